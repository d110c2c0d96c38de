"""Confusion accounting, one-vs-rest rates with macro averaging, and
k-fold cross-validation of the full select-then-classify pipeline.

TNR is computed as TN/(TN+FP) so that fpr + tnr = 1 holds exactly; the
serialized reports carry a note recording this definition.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .classifier import SvmConfig, predict, train_ova
from .dataset import (
    CLASS_NAMES,
    RawRecord,
    apply_normalize,
    encode,
    fit_encoding,
    fit_normalize,
    map_label,
    stratified_fold_indices,
)
from .errors import DataError
from .optimizer import GoaConfig, mask_to_bitstring, run
from .seeds import derive_seed

METRIC_NAMES = ("tpr", "fpr", "tnr", "fnr", "accuracy")

TNR_NOTE = "tnr computed as tn/(tn+fp) so that fpr + tnr = 1"


@dataclass(frozen=True)
class ConfusionCounts:
    """One-vs-rest tallies for a single positive class."""

    tp: int
    fn: int
    fp: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fn, self.fp, self.tn) < 0:
            raise DataError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn


def tpr(c: ConfusionCounts) -> float:
    d = c.tp + c.fn
    return c.tp / d if d else 0.0


def fpr(c: ConfusionCounts) -> float:
    d = c.fp + c.tn
    return c.fp / d if d else 0.0


def tnr(c: ConfusionCounts) -> float:
    d = c.tn + c.fp
    return c.tn / d if d else 0.0


def fnr(c: ConfusionCounts) -> float:
    d = c.fn + c.tp
    return c.fn / d if d else 0.0


def accuracy(c: ConfusionCounts) -> float:
    return (c.tp + c.tn) / c.total if c.total else 0.0


_METRIC_FNS: dict[str, Callable[[ConfusionCounts], float]] = {
    "tpr": tpr, "fpr": fpr, "tnr": tnr, "fnr": fnr, "accuracy": accuracy,
}


def _degenerate_metrics(c: ConfusionCounts) -> tuple[str, ...]:
    out = []
    if c.tp + c.fn == 0:
        out.extend(["tpr", "fnr"])
    if c.fp + c.tn == 0:
        out.extend(["fpr", "tnr"])
    if c.total == 0:
        out.append("accuracy")
    return tuple(out)


def confusion_per_class(
    truth: Sequence[int], predicted: Sequence[int], target: int
) -> ConfusionCounts:
    """One-vs-rest counts treating ``target`` as the positive class."""
    truth = np.asarray(truth)
    predicted = np.asarray(predicted)
    if truth.shape != predicted.shape or truth.size == 0:
        raise DataError("truth and prediction lists must be equal-length and non-empty")
    pos_truth = truth == target
    pos_pred = predicted == target
    return ConfusionCounts(
        tp=int(np.sum(pos_truth & pos_pred)),
        fn=int(np.sum(pos_truth & ~pos_pred)),
        fp=int(np.sum(~pos_truth & pos_pred)),
        tn=int(np.sum(~pos_truth & ~pos_pred)),
    )


@dataclass(frozen=True)
class ClassMetrics:
    counts: ConfusionCounts
    tpr: float
    fpr: float
    tnr: float
    fnr: float
    accuracy: float
    degenerate: tuple[str, ...]

    @classmethod
    def from_counts(cls, counts: ConfusionCounts) -> "ClassMetrics":
        return cls(
            counts=counts,
            tpr=tpr(counts),
            fpr=fpr(counts),
            tnr=tnr(counts),
            fnr=fnr(counts),
            accuracy=accuracy(counts),
            degenerate=_degenerate_metrics(counts),
        )

    def value(self, metric: str) -> float:
        return getattr(self, metric)


@dataclass(frozen=True)
class MetricsReport:
    """Per-class one-vs-rest metrics plus unweighted macro averages over
    the classes present in truth (support-weighted averages included for
    information)."""

    class_names: tuple[str, ...]
    per_class: Mapping[str, ClassMetrics]
    support: Mapping[str, int]
    macro: Mapping[str, float]
    weighted: Mapping[str, float]

    def to_dict(self) -> dict:
        return {
            "class_names": list(self.class_names),
            "per_class": {
                name: {
                    "counts": {
                        "tp": m.counts.tp, "fn": m.counts.fn,
                        "fp": m.counts.fp, "tn": m.counts.tn,
                    },
                    **{metric: m.value(metric) for metric in METRIC_NAMES},
                    "degenerate": list(m.degenerate),
                }
                for name, m in self.per_class.items()
            },
            "support": dict(self.support),
            "macro": dict(self.macro),
            "weighted": dict(self.weighted),
        }


def macro_report(
    truth: Sequence[int],
    predicted: Sequence[int],
    class_names: Sequence[str] = CLASS_NAMES,
) -> MetricsReport:
    """Per-class one-vs-rest metrics and their macro average."""
    truth = np.asarray(truth)
    predicted = np.asarray(predicted)
    per_class = {}
    support = {}
    for index, name in enumerate(class_names):
        per_class[name] = ClassMetrics.from_counts(
            confusion_per_class(truth, predicted, index)
        )
        support[name] = int(np.sum(truth == index))
    present = [name for name in class_names if support[name] > 0]
    macro = {
        metric: float(np.mean([per_class[name].value(metric) for name in present]))
        for metric in METRIC_NAMES
    }
    total_support = sum(support[name] for name in present)
    weighted = {
        metric: float(
            sum(per_class[name].value(metric) * support[name] for name in present)
            / total_support
        )
        for metric in METRIC_NAMES
    }
    return MetricsReport(
        class_names=tuple(class_names),
        per_class=per_class,
        support=support,
        macro=macro,
        weighted=weighted,
    )


@dataclass(frozen=True)
class FoldReport:
    index: int
    train_size: int
    test_size: int
    mask_bits: str
    mask_popcount: int
    goa_iterations: int
    goa_best_fitness: float
    goa_stop_reason: str
    metrics: MetricsReport
    attack_confusion: ConfusionCounts
    seconds: float

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "index": self.index,
            "train_size": self.train_size,
            "test_size": self.test_size,
            "mask": self.mask_bits,
            "mask_popcount": self.mask_popcount,
            "goa_iterations": self.goa_iterations,
            "goa_best_fitness": self.goa_best_fitness,
            "goa_stop_reason": self.goa_stop_reason,
            "metrics": self.metrics.to_dict(),
            "attack_vs_normal": {
                "tp": self.attack_confusion.tp, "fn": self.attack_confusion.fn,
                "fp": self.attack_confusion.fp, "tn": self.attack_confusion.tn,
                "tpr": tpr(self.attack_confusion),
                "fpr": fpr(self.attack_confusion),
            },
        }
        if include_timing:
            out["seconds"] = self.seconds
        return out


@dataclass(frozen=True)
class CvReport:
    k: int
    seed: int
    class_names: tuple[str, ...]
    folds: tuple[FoldReport, ...]
    macro_mean: Mapping[str, float]
    macro_std: Mapping[str, float]
    weighted_mean: Mapping[str, float]
    attack_overall: ConfusionCounts
    notes: tuple[str, ...] = (TNR_NOTE,)

    def to_dict(self, include_timing: bool = False) -> dict:
        return {
            "k": self.k,
            "seed": self.seed,
            "class_names": list(self.class_names),
            "folds": [f.to_dict(include_timing) for f in self.folds],
            "macro_mean": dict(self.macro_mean),
            "macro_std": dict(self.macro_std),
            "weighted_mean": dict(self.weighted_mean),
            "attack_vs_normal_overall": {
                "tp": self.attack_overall.tp, "fn": self.attack_overall.fn,
                "fp": self.attack_overall.fp, "tn": self.attack_overall.tn,
                "tpr": tpr(self.attack_overall),
                "fpr": fpr(self.attack_overall),
            },
            "notes": list(self.notes),
        }


def report_to_json(report: CvReport, include_timing: bool = False, meta: Mapping[str, str] | None = None) -> str:
    """Canonical JSON (sorted keys). Timing is excluded by default so the
    artifact is byte-identical across runs with the same config and seed."""
    payload = report.to_dict(include_timing)
    if meta:
        payload["meta"] = dict(meta)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


AuditHook = Callable[[str, int, np.ndarray], None]


def _run_fold(
    fold: int,
    records: Sequence[RawRecord],
    labels: np.ndarray,
    train_idx: np.ndarray,
    test_idx: np.ndarray,
    goa_config: GoaConfig,
    svm_config: SvmConfig,
    seed: int,
    fitness_epochs: int,
    audit: AuditHook | None,
) -> FoldReport:
    # Imported here: selection depends on this module for ConfusionCounts.
    from .selection import WrapperObjective, binary_attack_confusion, project_features

    started = time.perf_counter()
    fold_seed = derive_seed(seed, "fold", fold)
    train_records = [records[int(i)] for i in train_idx]
    test_records = [records[int(i)] for i in test_idx]

    encoding = fit_encoding(train_records, fitted_on=f"fold{fold}-train")
    if audit is not None:
        audit("encoding_fit", fold, train_idx)
    train_raw = encode(train_records, encoding)
    stats = fit_normalize(train_raw)
    if audit is not None:
        audit("normalize_fit", fold, train_idx)
    train_ds = apply_normalize(train_raw, stats)
    test_ds = apply_normalize(encode(test_records, encoding), stats)

    objective = WrapperObjective(
        train_ds,
        run_seed=derive_seed(fold_seed, "fitness"),
        svm_config=svm_config,
        fitness_epochs=fitness_epochs,
    )
    if audit is not None:
        audit("fitness_train", fold, train_idx[objective.fit_idx])
        audit("fitness_val", fold, train_idx[objective.val_idx])

    goa = replace(goa_config, dim=train_ds.n_features, seed=derive_seed(fold_seed, "goa"))
    result = run(objective, goa)

    final_config = replace(svm_config, seed=derive_seed(fold_seed, "svm"))
    model = train_ova(
        project_features(train_ds, result.best_mask), final_config, mask=result.best_mask
    )
    if audit is not None:
        audit("final_train", fold, train_idx)
    predictions = predict(model, project_features(test_ds, result.best_mask).rows)
    if audit is not None:
        audit("test_predict", fold, test_idx)

    return FoldReport(
        index=fold,
        train_size=int(train_idx.shape[0]),
        test_size=int(test_idx.shape[0]),
        mask_bits=mask_to_bitstring(result.best_mask),
        mask_popcount=int(result.best_mask.sum()),
        goa_iterations=len(result.history),
        goa_best_fitness=result.best_fitness,
        goa_stop_reason=result.stop_reason,
        metrics=macro_report(test_ds.labels, predictions, train_ds.class_names),
        attack_confusion=binary_attack_confusion(test_ds.labels, predictions),
        seconds=time.perf_counter() - started,
    )


def cross_validate(
    records: Sequence[RawRecord],
    k: int,
    goa_config: GoaConfig,
    svm_config: SvmConfig,
    seed: int,
    fitness_epochs: int = 5,
    threads: int = 1,
    audit: AuditHook | None = None,
) -> CvReport:
    """Stratified k-fold evaluation of the full pipeline.

    Per fold: encoding and normalization are fitted on the training rows
    only; feature selection runs on the training rows (with its internal
    fit/validation split); the final model trains with full epochs on all
    training rows under the selected mask; the held-out fold is scored.
    Folds use disjoint derived seeds, so results do not depend on thread
    count. ``audit`` receives (stage, fold, absolute row indices).
    """
    if k < 2:
        raise DataError("cross-validation needs k >= 2")
    labels = np.fromiter((map_label(r.label) for r in records), dtype=np.int64, count=len(records))
    folds = stratified_fold_indices(labels, k, derive_seed(seed, "folds"))

    def job(args):
        fold, (train_idx, test_idx) = args
        return _run_fold(
            fold, records, labels, train_idx, test_idx,
            goa_config, svm_config, seed, fitness_epochs, audit,
        )

    work = list(enumerate(folds))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            fold_reports = list(pool.map(job, work))
    else:
        fold_reports = [job(item) for item in work]

    macro_values = {
        metric: np.array([f.metrics.macro[metric] for f in fold_reports])
        for metric in METRIC_NAMES
    }
    weighted_values = {
        metric: np.array([f.metrics.weighted[metric] for f in fold_reports])
        for metric in METRIC_NAMES
    }
    overall = ConfusionCounts(
        tp=sum(f.attack_confusion.tp for f in fold_reports),
        fn=sum(f.attack_confusion.fn for f in fold_reports),
        fp=sum(f.attack_confusion.fp for f in fold_reports),
        tn=sum(f.attack_confusion.tn for f in fold_reports),
    )
    return CvReport(
        k=k,
        seed=seed,
        class_names=CLASS_NAMES,
        folds=tuple(fold_reports),
        macro_mean={m: float(v.mean()) for m, v in macro_values.items()},
        macro_std={m: float(v.std()) for m, v in macro_values.items()},
        weighted_mean={m: float(v.mean()) for m, v in weighted_values.items()},
        attack_overall=overall,
    )
