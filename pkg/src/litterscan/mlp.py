"""13-10-1 multilayer perceptron: tanh hidden layer, logistic output,
mean-squared-error loss, exact backprop gradients, and a Polak-Ribiere+
conjugate-gradient trainer with Armijo backtracking and validation-based
early stopping.

Flat weight layout (151 = 14*10 + 11): the 10x14 hidden matrix row-major
(columns 0..12 input weights, column 13 bias), then the 11 output weights
(10 hidden weights, then bias). Gradients, serialization and tests all use
this order.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .dataset import N_FEATURES, Normalizer, SampleSet, apply_normalizer
from .indexes import IndexMap
from .raster_io import LabelMask, atomic_write_bytes
from .resample import AlignedCube
from .rng import SplitMix64

N_HIDDEN = 10
N_PARAMS = (N_FEATURES + 1) * N_HIDDEN + (N_HIDDEN + 1)  # 151
MODEL_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class MlpModel:
    w_hidden: np.ndarray  # (10, 14)
    w_output: np.ndarray  # (11,)
    normalizer: Normalizer
    band_order: tuple[str, ...]
    hidden_activation: str = "tanh"
    output_activation: str = "logistic"

    def __post_init__(self):
        wh = np.ascontiguousarray(np.asarray(self.w_hidden, dtype=np.float64))
        wo = np.ascontiguousarray(np.asarray(self.w_output, dtype=np.float64))
        if wh.shape != (N_HIDDEN, N_FEATURES + 1):
            raise ValueError(f"w_hidden must be {(N_HIDDEN, N_FEATURES + 1)}")
        if wo.shape != (N_HIDDEN + 1,):
            raise ValueError(f"w_output must be ({N_HIDDEN + 1},)")
        if not (np.isfinite(wh).all() and np.isfinite(wo).all()):
            raise ValueError("weights must be finite")
        if self.hidden_activation != "tanh" or self.output_activation != "logistic":
            raise ValueError("unsupported activation tags")
        if len(self.band_order) != N_FEATURES:
            raise ValueError(f"band_order must list {N_FEATURES} bands")
        wh.setflags(write=False)
        wo.setflags(write=False)
        object.__setattr__(self, "w_hidden", wh)
        object.__setattr__(self, "w_output", wo)
        object.__setattr__(self, "band_order", tuple(self.band_order))

    @property
    def n_params(self) -> int:
        return N_PARAMS


@dataclass(frozen=True)
class TrainConfig:
    max_iters: int = 1000
    val_check_every: int = 1
    max_val_failures: int = 6
    seed: int = 0
    cg_restart_every: int = N_PARAMS
    armijo_initial_step: float = 1.0
    armijo_shrink: float = 0.5
    armijo_c: float = 1e-4
    grad_tol: float = 1e-10

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        for name in ("val_check_every", "max_val_failures", "cg_restart_every"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.armijo_shrink < 1.0:
            raise ValueError("armijo_shrink must be in (0, 1)")
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError("armijo_c must be in (0, 1)")
        if self.armijo_initial_step <= 0:
            raise ValueError("armijo_initial_step must be positive")


@dataclass(frozen=True)
class TrainReport:
    iterations_run: int
    final_train_loss: float
    final_val_loss: float
    stop_reason: str  # max_iters | val_early_stop | gradient_converged
    loss_history: tuple[tuple[int, float, float], ...]

    def to_dict(self) -> dict:
        return {
            "iterations_run": self.iterations_run,
            "final_train_loss": self.final_train_loss,
            "final_val_loss": self.final_val_loss,
            "stop_reason": self.stop_reason,
            "loss_history": [list(h) for h in self.loss_history],
        }


# ---------------------------------------------------------------------------
# construction, forward, loss, gradient

def init_model(seed: int, normalizer: Normalizer, band_order) -> MlpModel:
    """Seeded uniform(-r, r) init with r = sqrt(6 / (fan_in + fan_out)) per
    layer; draw order matches the flat weight layout."""
    rng = SplitMix64(seed)
    r_h = math.sqrt(6.0 / (N_FEATURES + N_HIDDEN))
    wh = np.array(
        [[rng.uniform(-r_h, r_h) for _ in range(N_FEATURES + 1)] for _ in range(N_HIDDEN)]
    )
    r_o = math.sqrt(6.0 / (N_HIDDEN + 1))
    wo = np.array([rng.uniform(-r_o, r_o) for _ in range(N_HIDDEN + 1)])
    return MlpModel(wh, wo, normalizer, tuple(band_order))


def flatten_weights(model: MlpModel) -> np.ndarray:
    return np.concatenate([model.w_hidden.reshape(-1), model.w_output])


def with_weights(model: MlpModel, flat: np.ndarray) -> MlpModel:
    flat = np.asarray(flat, dtype=np.float64)
    if flat.shape != (N_PARAMS,):
        raise ValueError(f"expected {N_PARAMS} weights, got {flat.shape}")
    n_h = N_HIDDEN * (N_FEATURES + 1)
    return MlpModel(flat[:n_h].reshape(N_HIDDEN, N_FEATURES + 1), flat[n_h:],
                    model.normalizer, model.band_order,
                    model.hidden_activation, model.output_activation)


_TINY = np.nextafter(0.0, 1.0)
_ALMOST_ONE = np.nextafter(1.0, 0.0)


def _logistic(z):
    # split by sign for overflow safety; clamp so saturated activations
    # still honor the open-interval (0, 1) output contract in float64
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return np.clip(out, _TINY, _ALMOST_ONE)


def forward_batch(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """x: (n, 13) normalized features -> (n,) outputs in (0, 1)."""
    x = np.asarray(x, dtype=np.float64)
    h = np.tanh(x @ model.w_hidden[:, :N_FEATURES].T + model.w_hidden[:, N_FEATURES])
    z = h @ model.w_output[:N_HIDDEN] + model.w_output[N_HIDDEN]
    return _logistic(z)


def forward(model: MlpModel, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (N_FEATURES,):
        raise ValueError(f"input must have {N_FEATURES} components")
    if not np.isfinite(x).all():
        raise ValueError("input must be finite")
    return float(forward_batch(model, x[None, :])[0])


def loss(model: MlpModel, samples: SampleSet) -> float:
    """Mean squared error against 0/1 targets."""
    if len(samples) == 0:
        raise ValueError("loss of an empty sample set")
    y = forward_batch(model, samples.features)
    e = y - samples.labels.astype(np.float64)
    return float(np.mean(e * e))


def gradient(model: MlpModel, samples: SampleSet) -> np.ndarray:
    """Exact MSE gradient via backprop, in flat layout order."""
    if len(samples) == 0:
        raise ValueError("gradient of an empty sample set")
    x = samples.features
    t = samples.labels.astype(np.float64)
    n = x.shape[0]

    h = np.tanh(x @ model.w_hidden[:, :N_FEATURES].T + model.w_hidden[:, N_FEATURES])
    y = _logistic(h @ model.w_output[:N_HIDDEN] + model.w_output[N_HIDDEN])

    # dL/dz_out = 2/n * (y - t) * y * (1 - y)
    dz_out = (2.0 / n) * (y - t) * y * (1.0 - y)          # (n,)
    g_wo = np.concatenate([dz_out @ h, [dz_out.sum()]])    # (11,)

    dh = np.outer(dz_out, model.w_output[:N_HIDDEN])       # (n, 10)
    dz_h = dh * (1.0 - h * h)                              # (n, 10)
    g_wh = np.concatenate([dz_h.T @ x, dz_h.sum(axis=0)[:, None]], axis=1)  # (10, 14)

    return np.concatenate([g_wh.reshape(-1), g_wo])


# ---------------------------------------------------------------------------
# training

def train(model: MlpModel, train_set: SampleSet, val_set: SampleSet,
          cfg: TrainConfig = TrainConfig()) -> tuple[MlpModel, TrainReport]:
    """Polak-Ribiere+ conjugate gradient on the 151-d weight vector.

    Direction restarts to steepest descent every cfg.cg_restart_every
    iterations or whenever the CG direction fails the descent test; step
    lengths come from Armijo backtracking, so the train loss never
    increases across accepted steps. The model with the best validation
    loss seen at a check is the one returned.
    """
    if len(train_set) == 0 or len(val_set) == 0:
        raise ValueError("train and validation sets must be nonempty")

    def f(wv):
        return loss(with_weights(model, wv), train_set)

    def fval(wv):
        return loss(with_weights(model, wv), val_set)

    w = flatten_weights(model)
    f_w = f(w)
    g = gradient(model, train_set)
    d = -g

    best_w = w.copy()
    best_val = fval(w)
    history: list[tuple[int, float, float]] = [(0, f_w, best_val)]
    failures = 0
    stop_reason = "max_iters"
    iters = 0

    for k in range(1, cfg.max_iters + 1):
        if not math.isfinite(f_w):
            raise ArithmeticError(f"training diverged: loss = {f_w} at iteration {k}")
        gnorm = float(np.linalg.norm(g))
        if gnorm < cfg.grad_tol:
            stop_reason = "gradient_converged"
            break

        slope = float(g @ d)
        if slope >= 0.0 or (k - 1) % cfg.cg_restart_every == 0 and k > 1:
            d = -g
            slope = -gnorm * gnorm

        # Armijo backtracking
        alpha = cfg.armijo_initial_step
        accepted = False
        for _ in range(60):
            f_new = f(w + alpha * d)
            if math.isfinite(f_new) and f_new <= f_w + cfg.armijo_c * alpha * slope:
                accepted = True
                break
            alpha *= cfg.armijo_shrink
        if not accepted:
            if np.array_equal(d, -g):
                stop_reason = "gradient_converged"  # no decrease along -g
                break
            d = -g  # retry from steepest descent next iteration
            continue

        w_new = w + alpha * d
        g_new = gradient(with_weights(model, w_new), train_set)
        beta = max(0.0, float(g_new @ (g_new - g)) / float(g @ g))
        d = -g_new + beta * d
        w, g, f_w = w_new, g_new, f(w_new)
        iters = k

        if k % cfg.val_check_every == 0:
            v = fval(w)
            history.append((k, f_w, v))
            if v < best_val:
                best_val = v
                best_w = w.copy()
                failures = 0
            else:
                failures += 1
                if failures >= cfg.max_val_failures:
                    stop_reason = "val_early_stop"
                    break

    final = with_weights(model, best_w)
    report = TrainReport(
        iterations_run=iters,
        final_train_loss=float(loss(final, train_set)),
        final_val_loss=float(best_val),
        stop_reason=stop_reason,
        loss_history=tuple(history),
    )
    return final, report


# ---------------------------------------------------------------------------
# inference and serialization

def predict_map(model: MlpModel, cube: AlignedCube,
                threshold: float = 0.5) -> tuple[LabelMask, IndexMap]:
    """Per-pixel normalize + forward; mask = output >= threshold."""
    if cube.band_ids != model.band_order:
        raise ValueError(
            f"cube bands {cube.band_ids} do not match model bands {model.band_order}"
        )
    x = apply_normalizer(model.normalizer, cube.values.reshape(-1, N_FEATURES))
    y = forward_batch(model, x).reshape(cube.rows, cube.cols)
    return LabelMask((y >= threshold).astype(np.uint8)), IndexMap(y)


def save_model(model: MlpModel, path: str | os.PathLike) -> None:
    doc = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "shape": [N_FEATURES, N_HIDDEN, 1],
        "activations": [model.hidden_activation, model.output_activation],
        "weights_hidden": [list(row) for row in model.w_hidden],
        "weights_output": list(model.w_output),
        "normalizer": {
            "min": list(model.normalizer.minimum),
            "max": list(model.normalizer.maximum),
        },
        "band_order": list(model.band_order),
    }
    atomic_write_bytes(path, json.dumps(doc, indent=2).encode())


def load_model(path: str | os.PathLike) -> MlpModel:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("shape") != [N_FEATURES, N_HIDDEN, 1]:
        raise ValueError(f"unsupported model shape {doc.get('shape')}")
    wh = np.asarray(doc["weights_hidden"], dtype=np.float64)
    wo = np.asarray(doc["weights_output"], dtype=np.float64)
    if wh.shape != (N_HIDDEN, N_FEATURES + 1) or wo.shape != (N_HIDDEN + 1,):
        raise ValueError(
            f"model has wrong parameter counts: hidden {wh.shape}, output {wo.shape}"
        )
    norm = Normalizer(np.asarray(doc["normalizer"]["min"], dtype=np.float64),
                      np.asarray(doc["normalizer"]["max"], dtype=np.float64))
    act = doc.get("activations", ["tanh", "logistic"])
    return MlpModel(wh, wo, norm, tuple(doc["band_order"]), act[0], act[1])
