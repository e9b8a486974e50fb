"""Gradient training of a fixed architecture: BPTT, Adam, and error metrics.

The training loss is the MSE over all windowed pairs (smooth, so gradients are
well behaved); the monitored metric is the MAE after each epoch.  Training is
full batch: every epoch takes one Adam step on the gradient of the whole
training set.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .data import WindowedSet
from .randomness import rng_from
from .rnn import Architecture, _layer_dims, _sigmoid, predict_series, unpack_weights, weight_count


@dataclass(frozen=True)
class AdamConfig:
    epochs: int
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0.0 <= self.beta1 < 1.0 or not 0.0 <= self.beta2 < 1.0:
            raise ValueError("beta1 and beta2 must lie in [0, 1)")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step_count: int

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n), 0)


@dataclass(frozen=True)
class TrainReport:
    final_weights: np.ndarray
    loss_history: np.ndarray  # post-epoch training MAE, one entry per epoch
    wall_time: float


def mae(y: np.ndarray, yhat: np.ndarray) -> float:
    y, yhat = _check_pair(y, yhat)
    return float(np.mean(np.abs(y - yhat)))


def mse(y: np.ndarray, yhat: np.ndarray) -> float:
    y, yhat = _check_pair(y, yhat)
    return float(np.mean((y - yhat) ** 2))


def mape(y: np.ndarray, yhat: np.ndarray) -> float:
    """Mean absolute percentage error, scaled by 100."""
    y, yhat = _check_pair(y, yhat)
    if np.any(y == 0):
        raise ValueError("mape is undefined for zero targets")
    return float(100.0 * np.mean(np.abs((y - yhat) / y)))


def _check_pair(y, yhat) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.shape != yhat.shape:
        raise ValueError(f"length mismatch: targets {y.shape} vs predictions {yhat.shape}")
    if y.size == 0:
        raise ValueError("metrics need at least one value")
    return y, yhat


def initial_weights(arch: Architecture, seed: int, sd: float = 0.1, mean: float = 0.0) -> np.ndarray:
    """Fresh normal(mean, sd^2) weight draw for starting a training run."""
    return rng_from(seed).normal(mean, sd, size=weight_count(arch))


def _unpack_single(arch, weights):
    layers, (w_out, b_out) = unpack_weights(arch, weights[None, :])
    return [(w[0], u[0], b[0]) for w, u, b in layers], (w_out[0], b_out[0])


def _forward_cached(arch, layers, readout, inputs):
    """Forward pass over all windows, keeping activations for the backward pass."""
    k, steps = inputs.shape
    widths = arch.hidden_layers
    h_prev = [np.zeros((k, h)) for h in widths]
    c_prev = [np.zeros((k, h)) for h in widths]
    cache = []
    x = None
    for t in range(steps):
        x = inputs[:, t : t + 1]
        per_layer = []
        for j, (w, u, b) in enumerate(layers):
            h = widths[j]
            hp, cp = h_prev[j], c_prev[j]
            z = x @ w.T + hp @ u.T + b
            i_gate = _sigmoid(z[:, :h])
            f_gate = _sigmoid(z[:, h : 2 * h])
            g_cand = np.tanh(z[:, 2 * h : 3 * h])
            o_gate = _sigmoid(z[:, 3 * h :])
            c = f_gate * cp + i_gate * g_cand
            tc = np.tanh(c)
            h_new = o_gate * tc
            per_layer.append((x, hp, cp, i_gate, f_gate, g_cand, o_gate, tc))
            h_prev[j], c_prev[j] = h_new, c
            x = h_new
        cache.append(per_layer)
    w_out, b_out = readout
    preds = (x @ w_out.T + b_out)[:, 0]
    return preds, cache, x


def loss_and_gradient(arch: Architecture, weights: np.ndarray, windowed: WindowedSet):
    """MSE over the pairs and its gradient w.r.t. every weight, via BPTT."""
    _, loss, grad = _forward_backward(arch, weights, windowed)
    return loss, grad


def _forward_backward(arch, weights, windowed):
    weights = np.asarray(weights, dtype=float)
    if weights.size != weight_count(arch):
        raise ValueError(f"weight vector has {weights.size} values, expected {weight_count(arch)}")
    if windowed.look_back != arch.look_back:
        raise ValueError(
            f"windowed set has look_back {windowed.look_back}, architecture expects {arch.look_back}"
        )
    layers, (w_out, b_out) = _unpack_single(arch, weights)
    inputs, targets = windowed.inputs, windowed.targets
    preds, cache, h_top = _forward_cached(arch, layers, (w_out, b_out), inputs)

    k = targets.size
    err = preds - targets
    loss = float(np.mean(err**2))
    dpred = (2.0 / k) * err

    num_layers = len(layers)
    g_w = [np.zeros_like(w) for w, _, _ in layers]
    g_u = [np.zeros_like(u) for _, u, _ in layers]
    g_b = [np.zeros_like(b) for _, _, b in layers]
    g_w_out = (dpred @ h_top)[None, :]
    g_b_out = np.array([dpred.sum()])

    widths = arch.hidden_layers
    dh_next = [np.zeros((k, h)) for h in widths]
    dc_next = [np.zeros((k, h)) for h in widths]
    steps = inputs.shape[1]
    for t in reversed(range(steps)):
        if t == steps - 1:
            carry = np.outer(dpred, w_out[0])
        else:
            carry = np.zeros((k, widths[-1]))
        for j in reversed(range(num_layers)):
            x, hp, cp, i_gate, f_gate, g_cand, o_gate, tc = cache[t][j]
            dh = dh_next[j] + carry
            dc = dc_next[j] + dh * o_gate * (1.0 - tc * tc)
            dz_o = (dh * tc) * o_gate * (1.0 - o_gate)
            dz_i = (dc * g_cand) * i_gate * (1.0 - i_gate)
            dz_f = (dc * cp) * f_gate * (1.0 - f_gate)
            dz_g = (dc * i_gate) * (1.0 - g_cand * g_cand)
            dz = np.hstack([dz_i, dz_f, dz_g, dz_o])
            w, u, _ = layers[j]
            g_w[j] += dz.T @ x
            g_u[j] += dz.T @ hp
            g_b[j] += dz.sum(axis=0)
            carry = dz @ w
            dh_next[j] = dz @ u
            dc_next[j] = dc * f_gate

    flat = []
    for j in range(num_layers):
        flat.extend((g_w[j].ravel(), g_u[j].ravel(), g_b[j]))
    flat.extend((g_w_out.ravel(), g_b_out))
    return preds, loss, np.concatenate(flat)


def adam_step(weights: np.ndarray, gradient: np.ndarray, state: AdamState, cfg: AdamConfig):
    """One Adam update; returns the new weights and the advanced state."""
    w = np.asarray(weights, dtype=float)
    g = np.asarray(gradient, dtype=float)
    if w.shape != g.shape or w.shape != state.m.shape:
        raise ValueError(
            f"length mismatch: weights {w.shape}, gradient {g.shape}, state {state.m.shape}"
        )
    k = state.step_count + 1
    m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * g
    v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * g * g
    m_hat = m / (1.0 - cfg.beta1**k)
    v_hat = v / (1.0 - cfg.beta2**k)
    w_new = w - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
    return w_new, AdamState(m, v, k)


def train_adam(
    arch: Architecture, init_weights: np.ndarray, train: WindowedSet, cfg: AdamConfig
) -> TrainReport:
    """Full-batch Adam for ``cfg.epochs`` epochs; deterministic given the init."""
    start = time.perf_counter()
    weights = np.array(init_weights, dtype=float, copy=True)
    state = AdamState.zeros(weights.size)
    history = np.empty(cfg.epochs)
    for epoch in range(cfg.epochs):
        preds, _, grad = _forward_backward(arch, weights, train)
        if epoch > 0:
            # predictions before this step are the state after the previous epoch
            history[epoch - 1] = float(np.mean(np.abs(preds - train.targets)))
        weights, state = adam_step(weights, grad, state, cfg)
    history[cfg.epochs - 1] = mae(train.targets, predict_series(arch, weights, train))
    return TrainReport(
        final_weights=weights,
        loss_history=history,
        wall_time=time.perf_counter() - start,
    )
