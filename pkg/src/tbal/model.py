"""Linear hypothesis class and its ERM trainer.

Binary models are a single weight vector with the sign rule (positive margin
=> class 1); multiclass models are per-class weight rows trained with
multinomial logistic loss. Both are fit by minibatch SGD with per-epoch
shuffling driven by a named RNG stream, so training is deterministic per seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import softmax

from .core import rng_from

HINGE = "hinge"
LOGISTIC = "logistic"


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    loss: str = HINGE
    epochs: int = 80
    learning_rate: float = 0.1
    l2: float = 1e-4
    batch_size: int = 32
    tolerance: float = 1e-5
    init_scale: float = 5.0  # stddev of the random start; see _fit_hinge
    normalized: bool = False  # project to the unit sphere, no bias (homogeneous)

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class LinearModel:
    weights: np.ndarray  # (d,) binary, (K, d) multiclass
    bias: np.ndarray  # scalar array binary, (K,) multiclass
    num_classes: int
    normalized: bool = False
    single_class_warning: bool = False
    constant_class: int | None = None
    loss_trace: list = field(default_factory=list, repr=False)

    @property
    def binary(self) -> bool:
        return self.weights.ndim == 1

    @property
    def dimension(self) -> int:
        return self.weights.shape[-1]


def logits(model: LinearModel, x: np.ndarray) -> np.ndarray:
    """Raw per-class scores w_c . x + b_c. Binary models expose the
    symmetric pair (-s, +s) so argmax agrees with the sign rule."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.shape[1] != model.dimension:
        raise ValueError(f"dimension mismatch: {X.shape[1]} != {model.dimension}")
    if model.constant_class is not None:
        z = np.full((len(X), model.num_classes), -1.0)
        z[:, model.constant_class] = 1.0
    elif model.binary:
        s = X @ model.weights + float(model.bias)
        z = np.column_stack([-s, s])
    else:
        z = X @ model.weights.T + model.bias
    return z[0] if single else z


def predict(model: LinearModel, x: np.ndarray) -> np.ndarray:
    """Argmax of the class scores; ties go to the smallest class index."""
    z = logits(model, x)
    return np.argmax(z, axis=-1)


def hinge_value_grad(w: np.ndarray, b: float, X: np.ndarray, ypm: np.ndarray,
                     l2: float) -> tuple[float, np.ndarray, float]:
    """Regularized mean hinge loss and its subgradient. ypm in {-1, +1}."""
    margins = ypm * (X @ w + b)
    active = margins < 1.0
    loss = float(np.maximum(0.0, 1.0 - margins).mean() + 0.5 * l2 * w @ w)
    coef = np.where(active, -ypm, 0.0) / len(X)
    gw = X.T @ coef + l2 * w
    gb = float(coef.sum())
    return loss, gw, gb


def logistic_value_grad(W: np.ndarray, b: np.ndarray, X: np.ndarray, y: np.ndarray,
                        l2: float) -> tuple[float, np.ndarray, np.ndarray]:
    """Regularized mean multinomial logistic loss and its gradient."""
    z = X @ W.T + b
    z = z - z.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    n = len(X)
    loss = float(-logp[np.arange(n), y].mean() + 0.5 * l2 * (W * W).sum())
    p = np.exp(logp)
    p[np.arange(n), y] -= 1.0
    gW = p.T @ X / n + l2 * W
    gb = p.mean(axis=0)
    return loss, gW, gb


def _fit_hinge(X, y, cfg: TrainConfig, rng) -> LinearModel:
    # minibatch subgradient descent with 1/t decay and tail iterate
    # averaging. The start point is random per call: on non-separable data
    # the hinge optimum can be a useless degenerate separator, and a noisy
    # start lets repeated refits explore near-optimal alternatives instead
    # of collapsing to it every time.
    n, d = X.shape
    ypm = np.where(y == 1, 1.0, -1.0)
    w = rng.standard_normal(d)
    if cfg.normalized:
        # the homogeneous variant optimizes unconstrained from a unit-norm
        # start with the bias pinned at zero and projects once at the end;
        # projecting every step caps all margins below 1 and degrades the
        # solution to the class-mean direction
        w /= max(np.linalg.norm(w), 1e-12)
        b = 0.0
    else:
        w *= cfg.init_scale
        b = float(rng.standard_normal() * cfg.init_scale)
    steps_per_epoch = max(1, -(-n // cfg.batch_size))
    t0 = 5.0 * steps_per_epoch
    avg_start = int(cfg.epochs * 0.75)
    w_sum = np.zeros(d)
    b_sum = 0.0
    n_avg = 0
    trace = []
    prev = np.inf
    t = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            t += 1
            eta = cfg.learning_rate / (1.0 + t / t0)
            _, gw, gb = hinge_value_grad(w, b, X[idx], ypm[idx], cfg.l2)
            w -= eta * gw
            if not cfg.normalized:
                b -= eta * gb
            if epoch >= avg_start:
                w_sum += w
                b_sum += b
                n_avg += 1
        loss, _, _ = hinge_value_grad(w, b, X, ypm, cfg.l2)
        trace.append(loss)
        if abs(prev - loss) < cfg.tolerance and epoch >= avg_start:
            break
        prev = loss
    if n_avg:
        w = w_sum / n_avg
        b = b_sum / n_avg
        if cfg.normalized:
            nrm = np.linalg.norm(w)
            if nrm > 0:
                w /= nrm
            b = 0.0
        loss, _, _ = hinge_value_grad(w, b, X, ypm, cfg.l2)
        trace.append(loss)
    return LinearModel(w, np.asarray(b), num_classes=2, normalized=cfg.normalized,
                       loss_trace=trace)


def _fit_logistic(X, y, K, cfg: TrainConfig, rng) -> LinearModel:
    n, d = X.shape
    W = np.zeros((K, d))
    b = np.zeros(K)
    trace = []
    prev = np.inf
    for epoch in range(cfg.epochs):
        eta = cfg.learning_rate / (1.0 + 0.1 * epoch)
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            _, gW, gb = logistic_value_grad(W, b, X[idx], y[idx], cfg.l2)
            W -= eta * gW
            b -= eta * gb
        loss, _, _ = logistic_value_grad(W, b, X, y, cfg.l2)
        trace.append(loss)
        if abs(prev - loss) < cfg.tolerance:
            break
        prev = loss
    return LinearModel(W, b, num_classes=K, loss_trace=trace)


def fit(X: np.ndarray, y: np.ndarray, cfg: TrainConfig, seed: int,
        num_classes: int | None = None) -> LinearModel:
    """ERM on the gathered human labels.

    A single-class training set yields a constant-class model flagged with
    a warning rather than an error: early TBAL rounds can legitimately see
    one class only.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(X) == 0:
        raise TrainingError("empty training set")
    K = num_classes if num_classes is not None else int(y.max()) + 1
    classes = np.unique(y)
    if len(classes) == 1:
        d = X.shape[1]
        shape = (d,) if K == 2 else (K, d)
        m = LinearModel(np.zeros(shape), np.zeros(() if K == 2 else K),
                        num_classes=K, single_class_warning=True,
                        constant_class=int(classes[0]))
        return m
    rng = rng_from(seed, "fit")
    if cfg.loss == HINGE:
        if K != 2:
            raise TrainingError("hinge trainer is binary only; use logistic for K > 2")
        return _fit_hinge(X, y, cfg, rng)
    elif cfg.loss == LOGISTIC:
        return _fit_logistic(X, y, K, cfg, rng)
    raise TrainingError(f"unknown loss {cfg.loss!r}")


def save_model(model: LinearModel, path: str) -> None:
    """Flat text record: header line, then bias, then row-major weights."""
    W = model.weights if not model.binary else model.weights[None, :]
    b = np.atleast_1d(model.bias)
    with open(path, "w") as f:
        f.write("tbal-linear v1\n")
        f.write(f"{'binary' if model.binary else 'multiclass'} "
                f"{model.num_classes} {model.dimension} {int(model.normalized)}\n")
        f.write(" ".join(repr(float(v)) for v in b) + "\n")
        for row in W:
            f.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_model(path: str) -> LinearModel:
    with open(path) as f:
        header = f.readline().strip()
        if header != "tbal-linear v1":
            raise ValueError(f"{path}: unrecognized model header {header!r}")
        kind, k, d, norm = f.readline().split()
        bias = np.array([float(v) for v in f.readline().split()])
        rows = [np.array([float(v) for v in line.split()]) for line in f if line.strip()]
    W = np.vstack(rows)
    if kind == "binary":
        return LinearModel(W[0], bias[0] if bias.size else np.asarray(0.0),
                           num_classes=int(k), normalized=bool(int(norm)))
    return LinearModel(W, bias, num_classes=int(k), normalized=bool(int(norm)))


def predict_proba(model: LinearModel, x: np.ndarray) -> np.ndarray:
    return softmax(logits(model, x), axis=-1)
