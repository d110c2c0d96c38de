"""Wrapper fitness bridging the optimizer and the classifier.

A candidate mask is scored by projecting the feature columns it selects,
training a one-vs-all SVM on a fixed stratified fit split, and scoring
predictions on the held-back validation split:

    fitness = r_tp + (1 - r_e) + (1 - n_f / n_total)

where r_tp and r_e come from the attack-pooled binary confusion
(every attack class counts as positive, Normal as negative).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, IO

import numpy as np

from .classifier import SvmConfig, SvmModel, predict, train_ova
from .dataset import Dataset, stratified_sample_indices
from .errors import DataError
from .evaluation import ConfusionCounts
from .optimizer import mask_to_bitstring
from .seeds import derive_seed

NORMAL_INDEX = 0


@dataclass(frozen=True)
class FitnessBreakdown:
    """Fitness components for one mask evaluation. ``degenerate`` is set
    when the validation split held no attack rows (r_tp forced to 0)."""

    r_tp: float
    r_e: float
    n_f: int
    fitness: float
    degenerate: bool = False


def fitness_value(r_tp: float, r_e: float, n_f: int, n_total: int = 41) -> float:
    """Combine the three components; strictly decreasing in n_f."""
    return r_tp + (1.0 - r_e) + (1.0 - n_f / n_total)


def project_features(dataset: Dataset, mask: np.ndarray) -> Dataset:
    """Keep the columns where the mask bit is set, in original order."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (dataset.n_features,):
        raise DataError(
            f"mask length {mask.shape} does not match {dataset.n_features} features"
        )
    if not mask.any():
        raise DataError("cannot project an empty feature mask")
    return Dataset(dataset.rows[:, mask], dataset.labels, dataset.class_names)


def rate_tp(counts: ConfusionCounts) -> float:
    """TP / (TP + FN); 0 when no positives exist (degenerate case)."""
    denominator = counts.tp + counts.fn
    return counts.tp / denominator if denominator else 0.0


def error_rate(counts: ConfusionCounts) -> float:
    """(FP + FN) / total."""
    if counts.total == 0:
        raise DataError("error rate undefined for an empty confusion table")
    return (counts.fp + counts.fn) / counts.total


def binary_attack_confusion(
    truth: np.ndarray, predicted: np.ndarray, normal_index: int = NORMAL_INDEX
) -> ConfusionCounts:
    """Pool all attack classes as positive, Normal as negative."""
    truth_attack = np.asarray(truth) != normal_index
    pred_attack = np.asarray(predicted) != normal_index
    return ConfusionCounts(
        tp=int(np.sum(truth_attack & pred_attack)),
        fn=int(np.sum(truth_attack & ~pred_attack)),
        fp=int(np.sum(~truth_attack & pred_attack)),
        tn=int(np.sum(~truth_attack & ~pred_attack)),
    )


def mask_fitness(
    mask: np.ndarray,
    fit_ds: Dataset,
    val_ds: Dataset,
    svm_config: SvmConfig,
    train_fn: Callable[[Dataset, SvmConfig], SvmModel] | None = None,
) -> FitnessBreakdown:
    """Train on the fit view, score on the validation view, combine.

    ``train_fn`` may substitute the classifier (frozen stubs in tests).
    """
    mask = np.asarray(mask, dtype=bool)
    trainer = train_ova if train_fn is None else train_fn
    model = trainer(project_features(fit_ds, mask), svm_config)
    predictions = predict(model, project_features(val_ds, mask).rows)
    counts = binary_attack_confusion(val_ds.labels, predictions)
    degenerate = (counts.tp + counts.fn) == 0
    r_tp = rate_tp(counts)
    r_e = error_rate(counts)
    n_f = int(mask.sum())
    return FitnessBreakdown(
        r_tp=r_tp,
        r_e=r_e,
        n_f=n_f,
        fitness=fitness_value(r_tp, r_e, n_f, mask.size),
        degenerate=degenerate,
    )


def fitness_split(
    labels: np.ndarray, seed: int, fit_fraction: float = 0.8
) -> tuple[np.ndarray, np.ndarray]:
    """Fixed stratified fit/validation split used for every mask in a run."""
    labels = np.asarray(labels)
    n_fit = max(1, min(labels.shape[0] - 1, round(labels.shape[0] * fit_fraction)))
    fit_idx = stratified_sample_indices(labels, n_fit, seed)
    val_idx = np.setdiff1d(np.arange(labels.shape[0], dtype=np.int64), fit_idx, assume_unique=True)
    return fit_idx, val_idx


class WrapperObjective:
    """Callable objective mapping masks to wrapper fitness.

    The fit/validation split is fixed at construction so fitness values
    are comparable across masks. Each distinct mask trains under a seed
    derived from (run_seed, bitstring), so results do not depend on
    evaluation order; repeat evaluations are served from a cache.

    ``trace`` (any object with ``write``) receives one CSV line per
    evaluation call: bitstring, r_tp, r_e, n_f, fitness.
    """

    TRACE_HEADER = "mask,r_tp,r_e,n_f,fitness\n"

    def __init__(
        self,
        train_ds: Dataset,
        run_seed: int,
        svm_config: SvmConfig,
        fitness_epochs: int = 5,
        fit_fraction: float = 0.8,
        trace: IO[str] | None = None,
        use_cache: bool = True,
    ):
        self.fit_idx, self.val_idx = fitness_split(
            train_ds.labels, derive_seed(run_seed, "fitness-split"), fit_fraction
        )
        self.fit_ds = train_ds.take(self.fit_idx)
        self.val_ds = train_ds.take(self.val_idx)
        self.run_seed = run_seed
        self.svm_config = replace(svm_config, epochs=fitness_epochs)
        self.trace = trace
        self.evaluations = 0
        self._cache: dict[str, FitnessBreakdown] | None = {} if use_cache else None
        if trace is not None:
            trace.write(self.TRACE_HEADER)

    def breakdown(self, mask: np.ndarray) -> FitnessBreakdown:
        bits = mask_to_bitstring(mask)
        result = self._cache.get(bits) if self._cache is not None else None
        if result is None:
            config = replace(self.svm_config, seed=derive_seed(self.run_seed, "mask", bits))
            result = mask_fitness(mask, self.fit_ds, self.val_ds, config)
            self.evaluations += 1
            if self._cache is not None:
                self._cache[bits] = result
        if self.trace is not None:
            self.trace.write(
                f"{bits},{result.r_tp!r},{result.r_e!r},{result.n_f},{result.fitness!r}\n"
            )
        return result

    def __call__(self, mask: np.ndarray) -> float:
        return self.breakdown(mask).fitness
