"""A small numpy MLP used as the fuzzy classifier under study.

Architecture: dense hidden layers with PReLU activations (one learnable
slope per layer, initialised at 0.25) and a sigmoid output layer, so
the network is a genuine fuzzy function into ``(0, 1)``.  Training is
plain minibatch gradient descent with a fixed learning rate; no
adaptive optimiser state, which keeps runs bitwise reproducible from
the seed alone.

The loss is binary cross entropy plus an L2 weight penalty plus an
optional *coherence penalty*::

    loss = BCE(f(x), y) + weight_decay * sum ||W||^2
         + coherence_lambda * mean |f(x) - f(d(x))|

The last term pulls the network's value at ``x`` towards its value at
the projected point ``d(x)``, i.e. towards being coherent under ``d``.

Backpropagation is hand-written; ``gradient_check`` compares it
against central finite differences and returns the worst discrepancy,
scaled by ``max(1, |analytic|, |numeric|)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar, Sequence

import numpy as np

from .core import FuzzyExpr, Projection
from .errors import SerializationError, TrainingError, ValidationError

__all__ = [
    "MlpModel",
    "TrainConfig",
    "TrainResult",
    "MlpExpr",
    "init_model",
    "forward",
    "loss",
    "loss_and_grads",
    "gradient_check",
    "train",
]


@dataclass
class MlpModel:
    """Mutable parameter container: ``weights[i]`` has shape
    ``(fan_out, fan_in)``; ``slopes`` holds one PReLU slope per hidden
    layer (the output layer is always sigmoid)."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    slopes: np.ndarray

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.biases) or len(self.weights) < 1:
            raise ValidationError("weights and biases must pair up, one layer minimum")
        if self.slopes.shape != (len(self.weights) - 1,):
            raise ValidationError("one PReLU slope per hidden layer")
        for i in range(1, len(self.weights)):
            if self.weights[i].shape[1] != self.weights[i - 1].shape[0]:
                raise ValidationError(f"layer {i} fan-in does not match layer {i-1} fan-out")
        for w, b in zip(self.weights, self.biases):
            if b.shape != (w.shape[0],):
                raise ValidationError("bias length must match the layer fan-out")

    @property
    def in_arity(self) -> int:
        return int(self.weights[0].shape[1])

    @property
    def out_arity(self) -> int:
        return int(self.weights[-1].shape[0])

    def copy(self) -> "MlpModel":
        return MlpModel(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.slopes.copy(),
        )

    def to_dict(self) -> dict:
        layers = []
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            layer = {"weights": w.tolist(), "bias": b.tolist()}
            if i < len(self.weights) - 1:
                layer["activation"] = "prelu"
                layer["slope"] = float(self.slopes[i])
            else:
                layer["activation"] = "sigmoid"
            layers.append(layer)
        return {"layers": layers}

    @staticmethod
    def from_dict(doc: dict) -> "MlpModel":
        try:
            layers = doc["layers"]
            weights = [np.asarray(l["weights"], dtype=np.float64) for l in layers]
            biases = [np.asarray(l["bias"], dtype=np.float64) for l in layers]
            slopes = np.asarray([float(l.get("slope", 0.25)) for l in layers[:-1]])
        except (KeyError, TypeError) as exc:
            raise SerializationError(f"malformed model document: {exc}") from exc
        try:
            return MlpModel(weights, biases, slopes)
        except ValidationError as exc:
            raise SerializationError(str(exc)) from exc


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters; every stochastic choice derives from ``seed``."""

    hidden_sizes: tuple[int, ...] = (16, 16)
    learning_rate: float = 0.2
    weight_decay: float = 1e-5
    coherence_lambda: float = 0.0
    epochs: int = 300
    batch_size: int = 32
    seed: int = 0
    early_stopping_patience: int = 50
    projection: Projection = Projection.threshold(0.5)

    def __post_init__(self) -> None:
        if self.epochs < 0 or self.batch_size < 1:
            raise ValidationError("epochs must be >= 0 and batch_size >= 1")
        if self.learning_rate < 0 or self.weight_decay < 0 or self.coherence_lambda < 0:
            raise ValidationError("rates and penalties must be non-negative")
        if not self.hidden_sizes or any(h < 1 for h in self.hidden_sizes):
            raise ValidationError("hidden_sizes must be positive")


@dataclass(frozen=True)
class TrainResult:
    model: MlpModel
    best_val_accuracy: float
    best_epoch: int
    epochs_run: int
    stopped_early: bool


def init_model(
    in_arity: int,
    hidden_sizes: Sequence[int],
    out_arity: int,
    rng: np.random.Generator,
) -> MlpModel:
    """Uniform initialisation in ``+-sqrt(6 / (fan_in + fan_out))``,
    zero biases, PReLU slopes at 0.25."""
    sizes = [int(in_arity), *map(int, hidden_sizes), int(out_arity)]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        lim = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-lim, lim, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpModel(weights, biases, np.full(len(hidden_sizes), 0.25))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _forward_cache(model: MlpModel, xs: np.ndarray) -> tuple[np.ndarray, list]:
    """Forward pass keeping (input, pre-activation) per layer."""
    cache = []
    a = xs
    n_hidden = len(model.weights) - 1
    for i in range(n_hidden):
        z = a @ model.weights[i].T + model.biases[i]
        cache.append((a, z))
        a = np.where(z > 0, z, model.slopes[i] * z)
    z = a @ model.weights[-1].T + model.biases[-1]
    cache.append((a, z))
    return _sigmoid(z), cache


def forward(model: MlpModel, xs: np.ndarray) -> np.ndarray:
    """Network output on a ``(N, in_arity)`` batch."""
    out, _ = _forward_cache(model, np.asarray(xs, dtype=np.float64))
    return out


def _backward(model: MlpModel, cache: list, d_logits: np.ndarray) -> list[np.ndarray]:
    """Backpropagate a gradient given at the output-layer logits.

    Returns flat-ordered gradients: per layer dW, db, plus one dslope
    per hidden layer (same layout as ``_param_views``).
    """
    n_hidden = len(model.weights) - 1
    dW = [None] * len(model.weights)
    db = [None] * len(model.weights)
    dslope = np.zeros(n_hidden)

    a_in, _ = cache[-1]
    dW[-1] = d_logits.T @ a_in
    db[-1] = d_logits.sum(axis=0)
    da = d_logits @ model.weights[-1]
    for i in range(n_hidden - 1, -1, -1):
        a_prev, z = cache[i]
        neg = z <= 0
        dslope[i] = np.sum(da * np.where(neg, z, 0.0))
        dz = da * np.where(neg, model.slopes[i], 1.0)
        dW[i] = dz.T @ a_prev
        db[i] = dz.sum(axis=0)
        if i > 0:
            da = dz @ model.weights[i]
    return [*dW, *db, dslope]


def _param_views(model: MlpModel) -> list[np.ndarray]:
    return [*model.weights, *model.biases, model.slopes]


def loss_and_grads(
    model: MlpModel, xs: np.ndarray, ys: np.ndarray, cfg: TrainConfig
) -> tuple[float, list[np.ndarray]]:
    """Loss and its gradient, ordered like ``_param_views``."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if ys.ndim == 1:
        ys = ys.reshape(-1, 1)
    n_items = ys.size

    # divergence shows up as non-finite values that the caller checks;
    # the intermediate overflow itself is expected there, not a bug
    with np.errstate(over="ignore", invalid="ignore"):
        out, cache = _forward_cache(model, xs)
        logits = cache[-1][1]
        bce = float(np.mean(np.logaddexp(0.0, logits) - ys * logits))
        d_logits = (out - ys) / n_items
        grads = _backward(model, cache, d_logits)

        total = bce
        if cfg.coherence_lambda > 0.0:
            xs_fix = cfg.projection.apply(xs)
            out_fix, cache_fix = _forward_cache(model, xs_fix)
            diff = out - out_fix
            total += cfg.coherence_lambda * float(np.mean(np.abs(diff)))
            s = cfg.coherence_lambda * np.sign(diff) / n_items
            g_main = _backward(model, cache, s * out * (1.0 - out))
            g_fix = _backward(model, cache_fix, -s * out_fix * (1.0 - out_fix))
            for acc, g1, g2 in zip(grads, g_main, g_fix):
                acc += g1 + g2

        if cfg.weight_decay > 0.0:
            for i, w in enumerate(model.weights):
                total += cfg.weight_decay * float(np.sum(w * w))
                grads[i] += 2.0 * cfg.weight_decay * w

    return total, grads


def loss(model: MlpModel, xs: np.ndarray, ys: np.ndarray, cfg: TrainConfig) -> float:
    return loss_and_grads(model, xs, ys, cfg)[0]


def gradient_check(
    model: MlpModel,
    xs: np.ndarray,
    ys: np.ndarray,
    cfg: TrainConfig,
    step: float = 1e-5,
) -> float:
    """Worst discrepancy between backprop and central finite
    differences over every parameter, scaled by
    ``max(1, |analytic|, |numeric|)``."""
    work = model.copy()
    _, grads = loss_and_grads(work, xs, ys, cfg)
    views = _param_views(work)
    worst = 0.0
    for view, grad in zip(views, grads):
        flat_v = view.reshape(-1)
        flat_g = grad.reshape(-1)
        for j in range(flat_v.size):
            keep = flat_v[j]
            flat_v[j] = keep + step
            up = loss(work, xs, ys, cfg)
            flat_v[j] = keep - step
            down = loss(work, xs, ys, cfg)
            flat_v[j] = keep
            numeric = (up - down) / (2.0 * step)
            analytic = flat_g[j]
            err = abs(analytic - numeric) / max(1.0, abs(analytic), abs(numeric))
            worst = max(worst, err)
    return worst


def _as_xy(data) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(data, (tuple, list)) and len(data) == 2:
        xs, ys = data
    elif hasattr(data, "features") and hasattr(data, "labels"):
        xs, ys = data.features, data.labels
    else:
        raise ValidationError("expected an (X, y) pair or an object with features/labels")
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if ys.ndim == 1:
        ys = ys.reshape(-1, 1)
    if xs.ndim != 2 or xs.shape[0] != ys.shape[0]:
        raise ValidationError("features and labels must align on the batch axis")
    return xs, ys


def _val_accuracy(model: MlpModel, xs: np.ndarray, ys: np.ndarray, projection: Projection) -> float:
    preds = projection.apply(forward(model, xs))
    return float((preds == ys).all(axis=1).mean())


def train(cfg: TrainConfig, train_set, val_set) -> TrainResult:
    """Minibatch gradient descent; returns the parameters with the best
    validation accuracy seen (strict improvements only, so a run that
    never improves returns the initialisation).  Raises
    :class:`TrainingError` on divergence, naming the epoch."""
    xs, ys = _as_xy(train_set)
    xv, yv = _as_xy(val_set)
    rng = np.random.default_rng(cfg.seed)
    model = init_model(xs.shape[1], cfg.hidden_sizes, ys.shape[1], rng)

    best = model.copy()
    best_acc = _val_accuracy(model, xv, yv, cfg.projection)
    best_epoch = 0
    patience_left = cfg.early_stopping_patience
    epochs_run = 0
    stopped_early = False

    n = xs.shape[0]
    for epoch in range(1, cfg.epochs + 1):
        epochs_run = epoch
        perm = rng.permutation(n)
        for lo in range(0, n, cfg.batch_size):
            idx = perm[lo : lo + cfg.batch_size]
            value, grads = loss_and_grads(model, xs[idx], ys[idx], cfg)
            if not np.isfinite(value):
                raise TrainingError(f"training diverged at epoch {epoch}: non-finite loss")
            for view, grad in zip(_param_views(model), grads):
                view -= cfg.learning_rate * grad
        if not all(np.isfinite(v).all() for v in _param_views(model)):
            raise TrainingError(f"training diverged at epoch {epoch}: non-finite parameters")
        acc = _val_accuracy(model, xv, yv, cfg.projection)
        if acc > best_acc:
            best_acc = acc
            best = model.copy()
            best_epoch = epoch
            patience_left = cfg.early_stopping_patience
        else:
            patience_left -= 1
            if patience_left <= 0:
                stopped_early = True
                break

    return TrainResult(
        model=best,
        best_val_accuracy=best_acc,
        best_epoch=best_epoch,
        epochs_run=epochs_run,
        stopped_early=stopped_early,
    )


@dataclass(frozen=True, eq=False)
class MlpExpr(FuzzyExpr):
    """A trained network frozen as a fuzzy expression.

    The wrapped parameters are private copies with the write flag
    cleared, so later training steps cannot mutate an explanation that
    has already been extracted.
    """

    node_name: ClassVar[str] = "mlp"

    model: MlpModel = field(repr=False)

    def __post_init__(self) -> None:
        frozen = self.model.copy()
        for arr in _param_views(frozen):
            arr.setflags(write=False)
        object.__setattr__(self, "model", frozen)

    @staticmethod
    def from_model(model: MlpModel) -> "MlpExpr":
        return MlpExpr(model)

    @property
    def in_arity(self) -> int:
        return self.model.in_arity

    @property
    def out_arity(self) -> int:
        return self.model.out_arity

    def _eval(self, xs: np.ndarray) -> np.ndarray:
        return forward(self.model, xs)

    def to_payload(self) -> dict:
        return {"model": self.model.to_dict()}

    @classmethod
    def from_payload(cls, doc, decode):
        if "model" not in doc:
            raise SerializationError(
                "mlp node needs an inline 'model'; a 'weights_ref' must be resolved "
                "by the file loader first"
            )
        return MlpExpr(MlpModel.from_dict(doc["model"]))
