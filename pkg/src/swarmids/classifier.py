"""Soft-margin linear SVM with one-vs-all multiclass.

Training is primal stochastic subgradient descent on the hinge objective
lam/2*|w|^2 + mean hinge with lam = 1/(C*N), step 1/(lam*(t0+t)), shuffled
epochs under a seed. The epoch-end iterate with the lowest objective is
kept, which makes the final objective never worse than after epoch one.
The per-sample inner loop runs in the compiled kernel when available.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ._kernels import hinge_epoch
from .dataset import Dataset
from .errors import ConfigError, TrainingError
from .seeds import derive_seed


@dataclass(frozen=True)
class SvmConfig:
    """Training knobs.

    ``step_offset`` shifts the learning-rate schedule (eta = 1/(lam*(t0+t)));
    None picks ceil(C*N) so the first steps are O(1) regardless of scale.
    """

    c: float = 1.0
    epochs: int = 20
    step_offset: float | None = None
    seed: int = 0

    def validate(self) -> None:
        if not self.c > 0:
            raise ConfigError("svm C must be positive")
        if self.epochs < 1:
            raise ConfigError("epochs must be at least 1")


@dataclass(frozen=True)
class Hyperplane:
    """Decision plane w.x - b."""

    w: np.ndarray
    b: float

    def __post_init__(self):
        # Copy so freezing never aliases a caller's live buffer.
        w = np.array(self.w, dtype=np.float64, copy=True)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", float(self.b))


@dataclass(frozen=True)
class SvmModel:
    """One plane per class (None for classes absent at training time),
    plus the feature mask the planes were trained under."""

    class_names: tuple[str, ...]
    planes: tuple[Hyperplane | None, ...]
    mask: np.ndarray

    def __post_init__(self):
        mask = np.ascontiguousarray(self.mask, dtype=bool)
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        dims = {p.w.shape[0] for p in self.planes if p is not None}
        if len(dims) > 1:
            raise TrainingError("planes disagree on feature dimension")
        if dims and dims.pop() != int(mask.sum()):
            raise TrainingError("plane dimension must equal mask popcount")


def hinge_objective(x: np.ndarray, y: np.ndarray, plane: Hyperplane, c: float) -> float:
    """Regularizer plus mean hinge loss of a plane on (x, y in {-1,+1})."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    lam = 1.0 / (c * x.shape[0])
    margins = y * (x @ plane.w - plane.b)
    return float(lam / 2.0 * plane.w @ plane.w + np.mean(np.maximum(0.0, 1.0 - margins)))


def train_binary(x: np.ndarray, y: Sequence[float], config: SvmConfig) -> Hyperplane:
    """Train one plane on rows ``x`` with labels in {-1, +1}.

    Deterministic under ``config.seed``. Raises if only one class is present.
    """
    config.validate()
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise TrainingError("x must be (n, d) and y must be (n,)")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise TrainingError("labels must be -1 or +1")
    if not ((y > 0).any() and (y < 0).any()):
        raise TrainingError("need at least one row of each sign")

    n = x.shape[0]
    lam = 1.0 / (config.c * n)
    t0 = float(math.ceil(config.c * n)) if config.step_offset is None else float(config.step_offset)
    rng = np.random.default_rng(config.seed)

    w = np.zeros(x.shape[1], dtype=np.float64)
    b = 0.0
    t = 0
    best: tuple[float, np.ndarray, float] | None = None
    for _ in range(config.epochs):
        order = rng.permutation(n).astype(np.int64)
        b, t = hinge_epoch(x, y, order, w, b, lam, t0, t)
        objective = hinge_objective(x, y, Hyperplane(w, b), config.c)
        if best is None or objective < best[0]:
            best = (objective, w.copy(), b)
    assert best is not None
    return Hyperplane(best[1], best[2])


def decision(plane: Hyperplane, x: np.ndarray) -> float:
    """w.x - b for a single feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != plane.w.shape:
        raise TrainingError(
            f"dimension mismatch: x has {x.shape}, plane expects {plane.w.shape}"
        )
    return float(np.dot(plane.w, x) - plane.b)


def margin(plane: Hyperplane) -> float:
    """Separation width 2/|w|."""
    norm = float(np.linalg.norm(plane.w))
    if norm == 0.0:
        raise TrainingError("margin undefined for a zero weight vector")
    return 2.0 / norm


def train_ova(dataset: Dataset, config: SvmConfig, mask: np.ndarray | None = None) -> SvmModel:
    """Train one plane per class present in the data (target class +1,
    rest -1). Classes absent from the data get no plane and never win."""
    config.validate()
    if mask is None:
        mask = np.ones(dataset.n_features, dtype=bool)
    present = np.unique(dataset.labels)
    if present.shape[0] < 2:
        raise TrainingError("one-vs-all training needs at least two classes")
    planes: list[Hyperplane | None] = []
    for index in range(len(dataset.class_names)):
        if index not in present:
            planes.append(None)
            continue
        labels = np.where(dataset.labels == index, 1.0, -1.0)
        per_class = replace(config, seed=derive_seed(config.seed, "ova", index))
        planes.append(train_binary(dataset.rows, labels, per_class))
    return SvmModel(tuple(dataset.class_names), tuple(planes), mask)


def decision_values(model: SvmModel, x: np.ndarray) -> np.ndarray:
    """(n, n_classes) decision matrix; -inf columns for absent classes."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    dim = int(model.mask.sum())
    if x.shape[1] != dim:
        raise TrainingError(
            f"dimension mismatch: rows have {x.shape[1]} features, model expects {dim}"
        )
    out = np.full((x.shape[0], len(model.planes)), -np.inf, dtype=np.float64)
    for k, plane in enumerate(model.planes):
        if plane is not None:
            out[:, k] = x @ plane.w - plane.b
    return out


def predict(model: SvmModel, x: np.ndarray) -> int | np.ndarray:
    """Argmax class index over decision values; ties go to the lowest
    class index. Scalar for a single vector, array for a matrix."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    values = decision_values(model, x)
    labels = np.argmax(values, axis=1).astype(np.int64)
    return int(labels[0]) if single else labels


# --- serialization ------------------------------------------------------------

_FORMAT = "swarmids-svm"
_FORMAT_VERSION = 1


def model_to_json(model: SvmModel) -> str:
    """Versioned JSON artifact; float repr round-trips bit-exactly."""
    payload = {
        "format": _FORMAT,
        "format_version": _FORMAT_VERSION,
        "class_names": list(model.class_names),
        "mask": "".join("1" if bit else "0" for bit in model.mask),
        "planes": [
            None if p is None else {"w": p.w.tolist(), "b": p.b}
            for p in model.planes
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def model_from_json(text: str) -> SvmModel:
    payload = json.loads(text)
    if payload.get("format") != _FORMAT or payload.get("format_version") != _FORMAT_VERSION:
        raise TrainingError("unrecognized model artifact format")
    planes = tuple(
        None if p is None else Hyperplane(np.array(p["w"], dtype=np.float64), p["b"])
        for p in payload["planes"]
    )
    mask = np.array([ch == "1" for ch in payload["mask"]], dtype=bool)
    return SvmModel(tuple(payload["class_names"]), planes, mask)
