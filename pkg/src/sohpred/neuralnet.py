"""Dual-module bidirectional GRU regressor, implemented from scratch.

Two serially connected bidirectional blocks, each made of a forward GRU
and a backward GRU that sees the time-reversed sequence; per-direction
inverted dropout; a dense head maps the last time step of the second
block to one scalar.  Training is full backpropagation through time with
Adam and piecewise-constant learning-rate decay.  Everything is float64
and deterministic given a seed.

Gate equations per cell, with z = [x_t, h_prev]:

    U = sigmoid(W_U z + b_U)
    R = sigmoid(W_R z + b_R)
    h~ = tanh(W_h [x_t, R * h_prev] + b_h)
    h  = (1 - U) * h_prev + U * h~

A flag switches the candidate input to the literal concatenation
``[x_t, R, h_prev]`` for auditing.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterator

import numpy as np

from .seeding import derive_rng

CANDIDATE_FORMS = ("reset_gated", "concat")


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss or activation."""


def sigmoid(x: np.ndarray) -> np.ndarray:
    # split positive/negative to avoid overflow in exp
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class GRUCellParams:
    """Weights of one GRU cell.

    Gate matrices act on [x, h_prev]; the candidate matrix acts on
    [x, R*h_prev] (reset_gated) or [x, R, h_prev] (concat).
    """

    W_U: np.ndarray
    W_R: np.ndarray
    W_h: np.ndarray
    b_U: np.ndarray
    b_R: np.ndarray
    b_h: np.ndarray
    input_size: int
    hidden_size: int
    candidate_form: str = "reset_gated"

    def __post_init__(self) -> None:
        if self.candidate_form not in CANDIDATE_FORMS:
            raise ValueError(f"candidate_form must be one of {CANDIDATE_FORMS}")
        joint = self.input_size + self.hidden_size
        cand = joint if self.candidate_form == "reset_gated" else joint + self.hidden_size
        expected = {
            "W_U": (self.hidden_size, joint),
            "W_R": (self.hidden_size, joint),
            "W_h": (self.hidden_size, cand),
            "b_U": (self.hidden_size,),
            "b_R": (self.hidden_size,),
            "b_h": (self.hidden_size,),
        }
        for name, shape in expected.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")


def _glorot(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    fan_out, fan_in = shape
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_gru_cell(
    input_size: int,
    hidden_size: int,
    rng: np.random.Generator,
    candidate_form: str = "reset_gated",
) -> GRUCellParams:
    joint = input_size + hidden_size
    cand = joint if candidate_form == "reset_gated" else joint + hidden_size
    return GRUCellParams(
        W_U=_glorot(rng, (hidden_size, joint)),
        W_R=_glorot(rng, (hidden_size, joint)),
        W_h=_glorot(rng, (hidden_size, cand)),
        b_U=np.zeros(hidden_size),
        b_R=np.zeros(hidden_size),
        b_h=np.zeros(hidden_size),
        input_size=input_size,
        hidden_size=hidden_size,
        candidate_form=candidate_form,
    )


def gru_cell_forward(
    params: GRUCellParams, x: np.ndarray, h_prev: np.ndarray
) -> tuple[np.ndarray, tuple]:
    """One GRU step.  Accepts (batch, dim) arrays or single vectors."""
    single = x.ndim == 1
    if single:
        x = x[None, :]
        h_prev = h_prev[None, :]
    if x.shape[1] != params.input_size or h_prev.shape[1] != params.hidden_size:
        raise ValueError(
            f"dimension mismatch: x {x.shape}, h {h_prev.shape} for cell "
            f"({params.input_size} -> {params.hidden_size})"
        )
    z = np.concatenate([x, h_prev], axis=1)
    U = sigmoid(z @ params.W_U.T + params.b_U)
    R = sigmoid(z @ params.W_R.T + params.b_R)
    if params.candidate_form == "reset_gated":
        zc = np.concatenate([x, R * h_prev], axis=1)
    else:
        zc = np.concatenate([x, R, h_prev], axis=1)
    h_tilde = np.tanh(zc @ params.W_h.T + params.b_h)
    h_new = (1.0 - U) * h_prev + U * h_tilde
    if not np.all(np.isfinite(h_new)):
        raise DivergenceError("non-finite hidden state")
    cache = (x, h_prev, U, R, h_tilde)
    return (h_new[0] if single else h_new), cache


@dataclass
class CellGrads:
    W_U: np.ndarray
    W_R: np.ndarray
    W_h: np.ndarray
    b_U: np.ndarray
    b_R: np.ndarray
    b_h: np.ndarray

    @classmethod
    def zeros_like(cls, params: GRUCellParams) -> "CellGrads":
        return cls(
            *(np.zeros_like(getattr(params, n)) for n in ("W_U", "W_R", "W_h", "b_U", "b_R", "b_h"))
        )


def gru_cell_backward(
    params: GRUCellParams, dh: np.ndarray, cache: tuple, grads: CellGrads
) -> tuple[np.ndarray, np.ndarray]:
    """Backprop one step; accumulates into ``grads``, returns (dx, dh_prev)."""
    x, h_prev, U, R, h_tilde = cache
    n_in = params.input_size

    dU = dh * (h_tilde - h_prev)
    dh_tilde = dh * U
    dh_prev = dh * (1.0 - U)

    da_h = dh_tilde * (1.0 - h_tilde**2)
    if params.candidate_form == "reset_gated":
        zc = np.concatenate([x, R * h_prev], axis=1)
    else:
        zc = np.concatenate([x, R, h_prev], axis=1)
    grads.W_h += da_h.T @ zc
    grads.b_h += da_h.sum(axis=0)
    dzc = da_h @ params.W_h
    dx = dzc[:, :n_in].copy()
    if params.candidate_form == "reset_gated":
        dRh = dzc[:, n_in:]
        dR = dRh * h_prev
        dh_prev = dh_prev + dRh * R
    else:
        dR = dzc[:, n_in : n_in + params.hidden_size]
        dh_prev = dh_prev + dzc[:, n_in + params.hidden_size :]

    da_U = dU * U * (1.0 - U)
    da_R = dR * R * (1.0 - R)
    z = np.concatenate([x, h_prev], axis=1)
    grads.W_U += da_U.T @ z
    grads.b_U += da_U.sum(axis=0)
    grads.W_R += da_R.T @ z
    grads.b_R += da_R.sum(axis=0)
    dz = da_U @ params.W_U + da_R @ params.W_R
    dx += dz[:, :n_in]
    dh_prev = dh_prev + dz[:, n_in:]
    return dx, dh_prev


def flip(sequence: np.ndarray) -> np.ndarray:
    """Reverse the time axis (axis 0)."""
    return np.asarray(sequence)[::-1].copy()


@dataclass
class _BiGRUCache:
    fwd_caches: list
    bwd_caches: list
    mask_fwd: np.ndarray | None
    mask_bwd: np.ndarray | None
    hidden_fwd: int


def _dropout_mask(
    rng: np.random.Generator, shape: tuple[int, ...], rate: float
) -> np.ndarray | None:
    if rate <= 0.0:
        return None
    keep = 1.0 - rate
    return (rng.random(shape) < keep).astype(float) / keep


def bigru_forward(
    forward_params: GRUCellParams,
    backward_params: GRUCellParams,
    dropout_fwd: float,
    dropout_bwd: float,
    sequence: np.ndarray,
    mode: str = "eval",
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, _BiGRUCache]:
    """Run both directions over a (time, batch, width) sequence.

    The backward direction consumes the flipped sequence and its output is
    flipped back, so output step t concatenates the forward state after
    seeing x[0..t] with the backward state after seeing x[t..T-1].
    Inverted dropout is applied per direction in train mode only.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    train = mode == "train"
    if train and (dropout_fwd > 0 or dropout_bwd > 0) and rng is None:
        raise ValueError("train mode with dropout needs an rng")
    T, B, _ = sequence.shape
    hf, hb = forward_params.hidden_size, backward_params.hidden_size

    out_f = np.empty((T, B, hf))
    h = np.zeros((B, hf))
    fwd_caches = []
    for t in range(T):
        h, cache = gru_cell_forward(forward_params, sequence[t], h)
        out_f[t] = h
        fwd_caches.append(cache)

    mask_f = _dropout_mask(rng, out_f.shape, dropout_fwd) if train else None
    if mask_f is not None:
        out_f = out_f * mask_f

    rev = flip(sequence)
    out_b_rev = np.empty((T, B, hb))
    h = np.zeros((B, hb))
    bwd_caches = []
    for t in range(T):
        h, cache = gru_cell_forward(backward_params, rev[t], h)
        out_b_rev[t] = h
        bwd_caches.append(cache)

    mask_b = _dropout_mask(rng, out_b_rev.shape, dropout_bwd) if train else None
    if mask_b is not None:
        out_b_rev = out_b_rev * mask_b

    out = np.concatenate([out_f, flip(out_b_rev)], axis=2)
    return out, _BiGRUCache(fwd_caches, bwd_caches, mask_f, mask_b, hf)


def bigru_backward(
    forward_params: GRUCellParams,
    backward_params: GRUCellParams,
    dout: np.ndarray,
    cache: _BiGRUCache,
    grads_fwd: CellGrads,
    grads_bwd: CellGrads,
) -> np.ndarray:
    """Backprop through both directions; returns gradient wrt the input sequence."""
    T, B, _ = dout.shape
    hf = cache.hidden_fwd
    d_f = dout[:, :, :hf]
    d_b_rev = flip(dout[:, :, hf:])
    if cache.mask_fwd is not None:
        d_f = d_f * cache.mask_fwd
    if cache.mask_bwd is not None:
        d_b_rev = d_b_rev * cache.mask_bwd

    dseq = np.zeros((T, B, forward_params.input_size))
    dh = np.zeros((B, hf))
    for t in range(T - 1, -1, -1):
        dx, dh = gru_cell_backward(forward_params, d_f[t] + dh, cache.fwd_caches[t], grads_fwd)
        dseq[t] += dx

    dseq_rev = np.zeros_like(dseq)
    dh = np.zeros((B, backward_params.hidden_size))
    for t in range(T - 1, -1, -1):
        dx, dh = gru_cell_backward(backward_params, d_b_rev[t] + dh, cache.bwd_caches[t], grads_bwd)
        dseq_rev[t] += dx
    dseq += flip(dseq_rev)
    return dseq


@dataclass
class ModelParams:
    """All trainable tensors: four GRU cells plus the dense head."""

    cells: tuple[GRUCellParams, GRUCellParams, GRUCellParams, GRUCellParams]
    dense_w: np.ndarray
    dense_b: np.ndarray  # shape ()


CELL_NAMES = ("m1f", "m1b", "m2f", "m2b")
CELL_FIELDS = ("W_U", "W_R", "W_h", "b_U", "b_R", "b_h")


def iter_arrays(params: ModelParams) -> Iterator[tuple[str, np.ndarray]]:
    for cname, cell in zip(CELL_NAMES, params.cells):
        for fname in CELL_FIELDS:
            yield f"{cname}.{fname}", getattr(cell, fname)
    yield "dense.w", params.dense_w
    yield "dense.b", params.dense_b


@dataclass(frozen=True)
class DualBiGRUSpec:
    """Architecture of the two-block network, plus its parameters once built.

    ``gru_units`` are the hidden sizes of (block-1 forward, block-1
    backward, block-2 forward, block-2 backward); ``dropout_rates`` follow
    the same order.
    """

    window_length: int
    gru_units: tuple[int, int, int, int]
    dropout_rates: tuple[float, float, float, float]
    candidate_form: str = "reset_gated"
    params: ModelParams | None = None

    def __post_init__(self) -> None:
        if self.window_length < 1:
            raise ValueError("window_length must be positive")
        if len(self.gru_units) != 4 or any(g < 1 for g in self.gru_units):
            raise ValueError("gru_units must be four positive integers")
        if len(self.dropout_rates) != 4 or any(
            not 0.0 <= d <= 0.5 for d in self.dropout_rates
        ):
            raise ValueError("dropout_rates must be four values in [0, 0.5]")
        if self.params is not None:
            g1, g2, g3, g4 = self.gru_units
            if self.params.cells[2].input_size != g1 + g2:
                raise ValueError("block-2 input width must equal g1 + g2")
            if self.params.dense_w.shape != (g3 + g4,):
                raise ValueError("dense input width must equal g3 + g4")


def init_params(spec: DualBiGRUSpec, rng: np.random.Generator) -> ModelParams:
    g1, g2, g3, g4 = spec.gru_units
    cells = (
        init_gru_cell(1, g1, rng, spec.candidate_form),
        init_gru_cell(1, g2, rng, spec.candidate_form),
        init_gru_cell(g1 + g2, g3, rng, spec.candidate_form),
        init_gru_cell(g1 + g2, g4, rng, spec.candidate_form),
    )
    dense_w = _glorot(rng, (1, g3 + g4))[0]
    return ModelParams(cells=cells, dense_w=dense_w, dense_b=np.zeros(()))


def network_forward(
    spec: DualBiGRUSpec,
    windows: np.ndarray,
    mode: str = "eval",
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, tuple]:
    """Predict one scalar per window.

    ``windows`` is (batch, window_length) of indicator values; returns the
    (batch,) predictions and the caches needed by :func:`network_backward`.
    """
    if spec.params is None:
        raise ValueError("spec has no parameters; call init_params or train first")
    windows = np.atleast_2d(np.asarray(windows, dtype=float))
    if windows.shape[1] != spec.window_length:
        raise ValueError(
            f"window length {windows.shape[1]} != spec window_length {spec.window_length}"
        )
    d1, d2, d3, d4 = spec.dropout_rates
    c = spec.params.cells
    seq = windows.T[:, :, None]  # (T, B, 1)
    out1, cache1 = bigru_forward(c[0], c[1], d1, d2, seq, mode, rng)
    out2, cache2 = bigru_forward(c[2], c[3], d3, d4, out1, mode, rng)
    last = out2[-1]
    y = last @ spec.params.dense_w + spec.params.dense_b
    return y, (cache1, cache2, last, out2.shape)


@dataclass
class ModelGrads:
    cells: tuple[CellGrads, CellGrads, CellGrads, CellGrads]
    dense_w: np.ndarray
    dense_b: np.ndarray

    @classmethod
    def zeros_like(cls, params: ModelParams) -> "ModelGrads":
        return cls(
            cells=tuple(CellGrads.zeros_like(c) for c in params.cells),
            dense_w=np.zeros_like(params.dense_w),
            dense_b=np.zeros_like(params.dense_b),
        )


def iter_grad_arrays(grads: ModelGrads) -> Iterator[tuple[str, np.ndarray]]:
    for cname, cell in zip(CELL_NAMES, grads.cells):
        for fname in CELL_FIELDS:
            yield f"{cname}.{fname}", getattr(cell, fname)
    yield "dense.w", grads.dense_w
    yield "dense.b", grads.dense_b


def network_backward(spec: DualBiGRUSpec, dy: np.ndarray, cache: tuple) -> ModelGrads:
    """Gradients of the loss wrt every parameter, given d(loss)/d(prediction)."""
    cache1, cache2, last, out2_shape = cache
    params = spec.params
    grads = ModelGrads.zeros_like(params)

    grads.dense_w += last.T @ dy
    grads.dense_b += dy.sum()
    dout2 = np.zeros(out2_shape)
    dout2[-1] = np.outer(dy, params.dense_w)

    dout1 = bigru_backward(
        params.cells[2], params.cells[3], dout2, cache2, grads.cells[2], grads.cells[3]
    )
    bigru_backward(
        params.cells[0], params.cells[1], dout1, cache1, grads.cells[0], grads.cells[1]
    )
    return grads


def mse_loss(predictions: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error and its gradient per prediction."""
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predictions.shape != targets.shape:
        raise ValueError(f"length mismatch: {predictions.shape} vs {targets.shape}")
    diff = predictions - targets
    loss = float(np.mean(diff**2))
    grad = 2.0 * diff / diff.size
    return loss, grad


@dataclass(frozen=True)
class TrainingConfig:
    """Optimizer and schedule settings for one training run."""

    max_epochs: int
    learning_rate: float
    lr_drop_period: int
    lr_drop_factor: float = 0.01
    batch_size: int = 16
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8

    def __post_init__(self) -> None:
        if self.max_epochs < 1 or self.batch_size < 1 or self.lr_drop_period < 1:
            raise ValueError("epochs, batch size and drop period must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if not 0.0 < self.lr_drop_factor <= 1.0:
            raise ValueError("lr_drop_factor must lie in (0, 1]")
        if self.lr_drop_period > self.max_epochs:
            raise ValueError("lr_drop_period cannot exceed max_epochs")


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0

    @classmethod
    def zeros_like(cls, params: ModelParams) -> "AdamState":
        return cls(
            m={name: np.zeros_like(arr) for name, arr in iter_arrays(params)},
            v={name: np.zeros_like(arr) for name, arr in iter_arrays(params)},
        )


def effective_learning_rate(config: TrainingConfig, epoch: int) -> float:
    """Step decay: drop by lr_drop_factor every lr_drop_period epochs."""
    return config.learning_rate * config.lr_drop_factor ** (epoch // config.lr_drop_period)


def adam_step(
    params: ModelParams,
    grads: ModelGrads,
    state: AdamState,
    config: TrainingConfig,
    epoch: int,
) -> tuple[ModelParams, AdamState]:
    """One bias-corrected Adam update, in place."""
    state.t += 1
    lr = effective_learning_rate(config, epoch)
    b1, b2, eps = config.adam_beta1, config.adam_beta2, config.adam_epsilon
    c1 = 1.0 - b1**state.t
    c2 = 1.0 - b2**state.t
    for (name, p), (_, g) in zip(iter_arrays(params), iter_grad_arrays(grads)):
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g**2
        p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    return params, state


@dataclass(frozen=True)
class SequenceBatch:
    """Sliding windows of indicator values with scalar targets.

    ``indices`` are the window-end positions in the source series, so
    predictions can be reported against the right cycle or month.
    """

    inputs: np.ndarray  # (n, window_length)
    targets: np.ndarray  # (n,)
    indices: np.ndarray  # (n,)

    def __post_init__(self) -> None:
        if not (self.inputs.shape[0] == self.targets.shape[0] == self.indices.shape[0]):
            raise ValueError("inputs and targets must have equal batch dimension")

    def __len__(self) -> int:
        return self.inputs.shape[0]


def make_windows(
    hi_values: np.ndarray,
    soh_values: np.ndarray,
    window_length: int,
    index_offset: int = 0,
) -> SequenceBatch:
    """Stride-1 sliding windows; each target is SOH at the window's end."""
    hi_values = np.asarray(hi_values, dtype=float)
    soh_values = np.asarray(soh_values, dtype=float)
    if hi_values.shape != soh_values.shape:
        raise ValueError("indicator and SOH series must be aligned")
    n = hi_values.size
    if n < window_length:
        raise ValueError(f"series length {n} shorter than window {window_length}")
    windows = np.lib.stride_tricks.sliding_window_view(hi_values, window_length).copy()
    targets = soh_values[window_length - 1 :].copy()
    indices = np.arange(window_length - 1, n) + index_offset
    return SequenceBatch(inputs=windows, targets=targets, indices=indices)


def train(
    spec: DualBiGRUSpec, config: TrainingConfig, data: SequenceBatch
) -> tuple[DualBiGRUSpec, list[float]]:
    """Train on shuffled mini-batches; returns the fitted spec and epoch losses.

    The input spec is never mutated.  Bit-reproducible for a fixed seed on
    one platform.
    """
    if len(data) == 0:
        raise ValueError("no training windows")
    if spec.params is None:
        params = init_params(spec, derive_rng(config.seed, "init"))
    else:
        params = copy.deepcopy(spec.params)
    work = replace(spec, params=params)
    dropout_rng = derive_rng(config.seed, "dropout")
    shuffle_rng = derive_rng(config.seed, "shuffle")
    state = AdamState.zeros_like(params)

    n = len(data)
    losses: list[float] = []
    for epoch in range(config.max_epochs):
        order = shuffle_rng.permutation(n)
        sq_sum = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            preds, cache = network_forward(work, data.inputs[idx], "train", dropout_rng)
            loss, dy = mse_loss(preds, data.targets[idx])
            if not np.isfinite(loss):
                raise DivergenceError(
                    f"non-finite loss at epoch {epoch}, batch offset {start}"
                )
            grads = network_backward(work, dy, cache)
            adam_step(params, grads, state, config, epoch)
            sq_sum += loss * idx.size
        losses.append(sq_sum / n)
    return work, losses


def predict(spec: DualBiGRUSpec, windows: np.ndarray) -> np.ndarray:
    """Deterministic eval-mode predictions, one per window."""
    preds, _ = network_forward(spec, windows, mode="eval")
    return preds


MODEL_MAGIC = "dual-bigru-model v1"


def save_model(spec: DualBiGRUSpec, path: Path | str) -> None:
    """Self-describing flat file: text header, then row-major float64 data."""
    if spec.params is None:
        raise ValueError("cannot save an unbuilt spec")
    tensors = list(iter_arrays(spec.params))
    lines = [
        MODEL_MAGIC,
        f"window_length {spec.window_length}",
        "gru_units " + " ".join(str(g) for g in spec.gru_units),
        "dropout_rates " + " ".join(repr(d) for d in spec.dropout_rates),
        f"candidate_form {spec.candidate_form}",
        f"tensors {len(tensors)}",
    ]
    for name, arr in tensors:
        dims = " ".join(str(d) for d in arr.shape)
        lines.append(f"{name} {arr.ndim}{(' ' + dims) if dims else ''}")
    lines.append("end-header")
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("ascii"))
        for _, arr in tensors:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_model(path: Path | str) -> DualBiGRUSpec:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"model file not found: {path}")
    blob = path.read_bytes()
    try:
        header_end = blob.index(b"end-header\n")
    except ValueError:
        raise ValueError(f"{path}: not a model file (missing header terminator)") from None
    header = blob[:header_end].decode("ascii").splitlines()
    if not header or header[0] != MODEL_MAGIC:
        raise ValueError(f"{path}: not a model file")
    fields = {}
    tensor_specs: list[tuple[str, tuple[int, ...]]] = []
    n_tensors = None
    for line in header[1:]:
        key, *rest = line.split()
        if key == "tensors":
            n_tensors = int(rest[0])
        elif n_tensors is None:
            fields[key] = rest
        else:
            ndim = int(rest[0])
            shape = tuple(int(d) for d in rest[1 : 1 + ndim])
            tensor_specs.append((key, shape))
    if n_tensors is None or len(tensor_specs) != n_tensors:
        raise ValueError(f"{path}: corrupt model header")

    data = blob[header_end + len(b"end-header\n") :]
    arrays: dict[str, np.ndarray] = {}
    offset = 0
    for name, shape in tensor_specs:
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(data, dtype="<f8", count=count, offset=offset)
        offset += count * 8
        arrays[name] = arr.reshape(shape).astype(float)

    window_length = int(fields["window_length"][0])
    gru_units = tuple(int(g) for g in fields["gru_units"])
    dropout_rates = tuple(float(d) for d in fields["dropout_rates"])
    candidate_form = fields["candidate_form"][0]
    g1, g2, _, _ = gru_units
    cells = []
    for cname, (in_size, hid) in zip(
        CELL_NAMES, [(1, gru_units[0]), (1, gru_units[1]), (g1 + g2, gru_units[2]), (g1 + g2, gru_units[3])]
    ):
        cells.append(
            GRUCellParams(
                W_U=arrays[f"{cname}.W_U"],
                W_R=arrays[f"{cname}.W_R"],
                W_h=arrays[f"{cname}.W_h"],
                b_U=arrays[f"{cname}.b_U"],
                b_R=arrays[f"{cname}.b_R"],
                b_h=arrays[f"{cname}.b_h"],
                input_size=in_size,
                hidden_size=hid,
                candidate_form=candidate_form,
            )
        )
    params = ModelParams(
        cells=tuple(cells), dense_w=arrays["dense.w"], dense_b=arrays["dense.b"]
    )
    return DualBiGRUSpec(
        window_length=window_length,
        gru_units=gru_units,
        dropout_rates=dropout_rates,
        candidate_form=candidate_form,
        params=params,
    )
