"""Stacked-LSTM genotypes and forward evaluation against flat weight vectors.

Canonical flat weight layout, fixed so that sampling, training, and champion
files agree byte for byte.  Per layer, in order:

* input-to-gates matrix, shape ``(4h, fan_in)``, row-major;
* recurrent-to-gates matrix, shape ``(4h, h)``, row-major;
* gate biases, shape ``(4h,)``;

with the four gate blocks stacked input | forget | cell | output along the
``4h`` axis.  After the last layer come the dense readout weights
``(output_dim, h_last)`` and the readout bias ``(output_dim,)``.

States start at zero; gates use the logistic sigmoid, the cell candidate and
cell output transform use tanh; the prediction is a linear readout of the
last layer's hidden state at the final time step.  All arithmetic is double
precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Samples evaluated per inner batch; keeps temporaries cache-friendly without
# changing results (each sample's arithmetic is independent of the chunking).
_SAMPLE_CHUNK = 16


@dataclass(frozen=True)
class SearchSpace:
    """Bounds for architecture genotypes: layer count, widths, look-back."""

    max_layers: int
    min_neurons: int
    max_neurons: int
    min_look_back: int
    max_look_back: int

    def __post_init__(self):
        if self.max_layers < 1:
            raise ValueError(f"max_layers must be >= 1, got {self.max_layers}")
        if not 1 <= self.min_neurons <= self.max_neurons:
            raise ValueError(
                f"need 1 <= min_neurons <= max_neurons, got {self.min_neurons}..{self.max_neurons}"
            )
        if not 1 <= self.min_look_back <= self.max_look_back:
            raise ValueError(
                f"need 1 <= min_look_back <= max_look_back, "
                f"got {self.min_look_back}..{self.max_look_back}"
            )

    def contains(self, arch: "Architecture") -> bool:
        return (
            1 <= len(arch.hidden_layers) <= self.max_layers
            and all(self.min_neurons <= w <= self.max_neurons for w in arch.hidden_layers)
            and self.min_look_back <= arch.look_back <= self.max_look_back
        )


@dataclass(frozen=True)
class Architecture:
    """Genotype: stacked hidden-layer widths plus the input window length."""

    hidden_layers: tuple[int, ...]
    look_back: int
    input_dim: int = 1
    output_dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "hidden_layers", tuple(int(w) for w in self.hidden_layers))
        if not self.hidden_layers:
            raise ValueError("hidden_layers must be nonempty")
        if any(w < 1 for w in self.hidden_layers):
            raise ValueError(f"layer widths must be positive, got {self.hidden_layers}")
        if self.look_back < 1:
            raise ValueError(f"look_back must be positive, got {self.look_back}")
        if self.input_dim != 1 or self.output_dim != 1:
            raise ValueError("only univariate input_dim=1, output_dim=1 is supported")

    def describe(self) -> str:
        """One-line text form: comma-separated widths, a space, the look-back."""
        return f"{','.join(str(w) for w in self.hidden_layers)} {self.look_back}"

    @classmethod
    def from_description(cls, text: str) -> "Architecture":
        try:
            widths, look_back = text.split()
            return cls(tuple(int(w) for w in widths.split(",")), int(look_back))
        except ValueError:
            raise ValueError(f"malformed architecture line: {text!r}") from None


def _layer_dims(arch: Architecture) -> list[tuple[int, int]]:
    dims = []
    fan_in = arch.input_dim
    for h in arch.hidden_layers:
        dims.append((fan_in, h))
        fan_in = h
    return dims


def weight_count(arch: Architecture) -> int:
    """Number of scalars consumed by :func:`forward` for this architecture."""
    total = 0
    for fan_in, h in _layer_dims(arch):
        total += 4 * (h * (fan_in + h) + h)
    return total + arch.hidden_layers[-1] * arch.output_dim + arch.output_dim


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # tanh form: overflow-free for any preactivation magnitude
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def unpack_weights(arch: Architecture, rows: np.ndarray):
    """Split flat weight rows ``(S, weight_count)`` into per-layer tensors.

    Returns ``(layers, readout)`` where each layer is ``(W, U, b)`` with
    shapes ``(S, 4h, fan_in)``, ``(S, 4h, h)``, ``(S, 4h)``, and the readout
    is ``(w_out, b_out)`` with shapes ``(S, 1, h_last)``, ``(S, 1)``.
    """
    s = rows.shape[0]
    pos = 0
    layers = []
    for fan_in, h in _layer_dims(arch):
        w = rows[:, pos : pos + 4 * h * fan_in].reshape(s, 4 * h, fan_in)
        pos += 4 * h * fan_in
        u = rows[:, pos : pos + 4 * h * h].reshape(s, 4 * h, h)
        pos += 4 * h * h
        b = rows[:, pos : pos + 4 * h]
        pos += 4 * h
        layers.append((w, u, b))
    h_last = arch.hidden_layers[-1]
    w_out = rows[:, pos : pos + h_last].reshape(s, 1, h_last)
    pos += h_last
    b_out = rows[:, pos : pos + 1]
    return layers, (w_out, b_out)


def _check_weight_length(arch: Architecture, actual: int) -> None:
    expected = weight_count(arch)
    if actual != expected:
        raise ValueError(f"weight vector has {actual} values, expected {expected}")


def predict_batch(arch: Architecture, weight_rows: np.ndarray, inputs: np.ndarray) -> np.ndarray:
    """Predictions for every (weight row, input window) combination.

    ``weight_rows`` has shape ``(S, weight_count)``, ``inputs`` has shape
    ``(K, look_back)``; the result has shape ``(S, K)``.
    """
    weight_rows = np.atleast_2d(np.asarray(weight_rows, dtype=float))
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    _check_weight_length(arch, weight_rows.shape[1])
    n_samples, k = weight_rows.shape[0], inputs.shape[0]
    if inputs.shape[1] != arch.look_back:
        raise ValueError(
            f"input windows have length {inputs.shape[1]}, expected look_back {arch.look_back}"
        )
    out = np.empty((n_samples, k))
    for start in range(0, n_samples, _SAMPLE_CHUNK):
        chunk = weight_rows[start : start + _SAMPLE_CHUNK]
        out[start : start + chunk.shape[0]] = _predict_chunk(arch, chunk, inputs)
    return out


def _predict_chunk(arch: Architecture, rows: np.ndarray, inputs: np.ndarray) -> np.ndarray:
    s = rows.shape[0]
    k, steps = inputs.shape
    layers, (w_out, b_out) = unpack_weights(arch, rows)
    widths = arch.hidden_layers
    h_state = [np.zeros((s, k, h)) for h in widths]
    c_state = [np.zeros((s, k, h)) for h in widths]
    x_steps = inputs.T.reshape(steps, 1, k, 1)
    for t in range(steps):
        x = x_steps[t]
        for j, (w, u, b) in enumerate(layers):
            h = widths[j]
            z = x @ w.transpose(0, 2, 1) + h_state[j] @ u.transpose(0, 2, 1) + b[:, None, :]
            i_gate = _sigmoid(z[..., :h])
            f_gate = _sigmoid(z[..., h : 2 * h])
            g_cand = np.tanh(z[..., 2 * h : 3 * h])
            o_gate = _sigmoid(z[..., 3 * h :])
            c_state[j] = f_gate * c_state[j] + i_gate * g_cand
            h_state[j] = o_gate * np.tanh(c_state[j])
            x = h_state[j]
    preds = x @ w_out.transpose(0, 2, 1) + b_out[:, None, :]
    return preds[..., 0]


def forward(arch: Architecture, weights: np.ndarray, input_window: np.ndarray) -> float:
    """Scalar prediction for a single input window; pure and deterministic."""
    window = np.asarray(input_window, dtype=float)
    if window.ndim != 1 or window.size != arch.look_back:
        raise ValueError(
            f"input window has length {window.size}, expected look_back {arch.look_back}"
        )
    return float(predict_batch(arch, np.asarray(weights, dtype=float)[None, :], window[None, :])[0, 0])


def predict_series(arch: Architecture, weights: np.ndarray, windowed) -> np.ndarray:
    """One prediction per windowed pair, in pair order."""
    if windowed.look_back != arch.look_back:
        raise ValueError(
            f"windowed set has look_back {windowed.look_back}, architecture expects {arch.look_back}"
        )
    return predict_batch(arch, np.asarray(weights, dtype=float)[None, :], windowed.inputs)[0]


def save_weights(path, arch: Architecture, weights: np.ndarray) -> None:
    """Plain-text champion record: architecture line, then one weight per line."""
    weights = np.asarray(weights, dtype=float)
    _check_weight_length(arch, weights.size)
    lines = [arch.describe()]
    lines.extend(repr(float(v)) for v in weights)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_weights(path) -> tuple[Architecture, np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines:
        raise ValueError(f"{path}: empty weight file")
    arch = Architecture.from_description(lines[0])
    weights = np.array([float(v) for v in lines[1:]], dtype=float)
    _check_weight_length(arch, weights.size)
    return arch, weights
