"""Confusion accounting, per-class rates, macro averaging, and the
cross-validation orchestrator (including the leakage audit)."""

import json
import warnings
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmids.classifier import SvmConfig
from swarmids.dataset import CLASS_NAMES
from swarmids.errors import DataError, DataWarning
from swarmids.evaluation import (
    ConfusionCounts,
    accuracy,
    confusion_per_class,
    cross_validate,
    fnr,
    fpr,
    macro_report,
    report_to_json,
    tnr,
    tpr,
)
from swarmids.optimizer import GoaConfig


class TestConfusion:
    def test_hand_counted_example(self):
        counts = confusion_per_class(["A", "A", "B"], ["A", "B", "B"], "A")
        assert (counts.tp, counts.fn, counts.fp, counts.tn) == (1, 1, 0, 1)

    def test_perfect_predictions(self):
        truth = [0, 1, 2, 1, 0]
        for target in (0, 1, 2):
            counts = confusion_per_class(truth, truth, target)
            assert counts.fn == 0 and counts.fp == 0

    def test_absent_target_class(self):
        counts = confusion_per_class([0, 0, 1], [0, 1, 1], 7)
        assert counts.tp == 0 and counts.fn == 0
        assert counts.tn == 3 and counts.fp == 0

    def test_length_mismatch_rejected(self):
        with pytest.raises(DataError):
            confusion_per_class([0, 1], [0], 0)
        with pytest.raises(DataError):
            confusion_per_class([], [], 0)

    def test_negative_counts_rejected(self):
        with pytest.raises(DataError):
            ConfusionCounts(tp=-1, fn=0, fp=0, tn=0)


class TestRates:
    def test_frozen_values(self):
        assert tpr(ConfusionCounts(tp=90, fn=10, fp=0, tn=0)) == 0.9
        counts = ConfusionCounts(tp=0, fn=0, fp=2, tn=98)
        assert fpr(counts) == 0.02
        assert tnr(counts) == 0.98
        assert accuracy(ConfusionCounts(tp=50, fn=0, fp=0, tn=50)) == 1.0

    def test_degenerate_denominators_yield_zero(self):
        empty_pos = ConfusionCounts(tp=0, fn=0, fp=3, tn=7)
        assert tpr(empty_pos) == 0.0 and fnr(empty_pos) == 0.0
        empty_neg = ConfusionCounts(tp=3, fn=7, fp=0, tn=0)
        assert fpr(empty_neg) == 0.0 and tnr(empty_neg) == 0.0

    @given(
        tp=st.integers(0, 10**6), fn=st.integers(0, 10**6),
        fp=st.integers(0, 10**6), tn=st.integers(0, 10**6),
    )
    @settings(max_examples=200, deadline=None)
    def test_identities_exact(self, tp, fn, fp, tn):
        counts = ConfusionCounts(tp, fn, fp, tn)
        if tp + fn > 0:
            assert tpr(counts) + fnr(counts) == 1.0
        if fp + tn > 0:
            assert fpr(counts) + tnr(counts) == 1.0

    def test_accuracy_relabel_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            tp, fn, fp, tn = (int(v) for v in rng.integers(0, 100, 4))
            if tp + fn + fp + tn == 0:
                continue
            a = accuracy(ConfusionCounts(tp, fn, fp, tn))
            b = accuracy(ConfusionCounts(tn, fp, fn, tp))
            assert a == b


def _brute_force_metrics(truth, predicted, target):
    tp = fn = fp = tn = 0
    for t, p in zip(truth, predicted):
        if t == target and p == target:
            tp += 1
        elif t == target:
            fn += 1
        elif p == target:
            fp += 1
        else:
            tn += 1
    return tp, fn, fp, tn


class TestMacroReport:
    def test_mean_of_two_classes(self):
        # class 0: tpr 1.0 (2/2); class 1: tpr 0.8 (4/5)
        truth = [0, 0, 1, 1, 1, 1, 1]
        pred = [0, 0, 1, 1, 1, 1, 0]
        report = macro_report(truth, pred, ("a", "b"))
        assert report.per_class["a"].tpr == 1.0
        assert report.per_class["b"].tpr == 0.8
        assert report.macro["tpr"] == pytest.approx(0.9)

    def test_single_class_truth_equals_its_metrics(self):
        truth = [1, 1, 1]
        pred = [1, 0, 1]
        report = macro_report(truth, pred, ("a", "b"))
        assert report.macro["tpr"] == report.per_class["b"].tpr

    def test_matches_brute_force_recount(self):
        rng = np.random.default_rng(7)
        truth = rng.integers(0, 5, 1000)
        pred = rng.integers(0, 5, 1000)
        report = macro_report(truth, pred, CLASS_NAMES)
        for index, name in enumerate(CLASS_NAMES):
            tp, fn, fp, tn = _brute_force_metrics(truth, pred, index)
            counts = report.per_class[name].counts
            assert (counts.tp, counts.fn, counts.fp, counts.tn) == (tp, fn, fp, tn)
            if tp + fn:
                assert report.per_class[name].tpr == tp / (tp + fn)

    def test_per_class_tp_sums_to_total_correct(self):
        rng = np.random.default_rng(3)
        truth = rng.integers(0, 5, 500)
        pred = rng.integers(0, 5, 500)
        report = macro_report(truth, pred, CLASS_NAMES)
        total_tp = sum(m.counts.tp for m in report.per_class.values())
        assert total_tp == int(np.sum(truth == pred))

    def test_weighted_average_emitted(self):
        truth = [0] * 9 + [1]
        pred = [0] * 9 + [0]
        report = macro_report(truth, pred, ("a", "b"))
        assert report.weighted["tpr"] == pytest.approx(0.9 * 1.0 + 0.1 * 0.0)


def _fast_configs():
    goa = GoaConfig(population_size=8, dim=41, max_iterations=6,
                    fitness_delta_stop=0.0, seed=0)
    svm = SvmConfig(c=1.0, epochs=4, seed=0)
    return goa, svm


@pytest.fixture(scope="module")
def cv_report(synth_records):
    goa, svm = _fast_configs()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DataWarning)
        return cross_validate(
            synth_records, k=3, goa_config=goa, svm_config=svm,
            seed=123, fitness_epochs=2,
        )


class TestCrossValidate:
    def test_fold_count_and_masks(self, cv_report):
        assert cv_report.k == 3
        assert len(cv_report.folds) == 3
        for fold in cv_report.folds:
            assert len(fold.mask_bits) == 41
            assert fold.mask_popcount >= 1

    def test_deterministic(self, synth_records, cv_report):
        goa, svm = _fast_configs()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DataWarning)
            again = cross_validate(
                synth_records, k=3, goa_config=goa, svm_config=svm,
                seed=123, fitness_epochs=2,
            )
        assert report_to_json(again) == report_to_json(cv_report)

    def test_threads_do_not_change_results(self, synth_records, cv_report):
        goa, svm = _fast_configs()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DataWarning)
            threaded = cross_validate(
                synth_records, k=3, goa_config=goa, svm_config=svm,
                seed=123, fitness_epochs=2, threads=3,
            )
        assert report_to_json(threaded) == report_to_json(cv_report)

    def test_canonical_json_excludes_timing(self, cv_report):
        payload = json.loads(report_to_json(cv_report))
        assert "seconds" not in payload["folds"][0]
        timed = json.loads(report_to_json(cv_report, include_timing=True))
        assert "seconds" in timed["folds"][0]

    def test_report_carries_tnr_note(self, cv_report):
        payload = json.loads(report_to_json(cv_report))
        assert any("tn/(tn+fp)" in note for note in payload["notes"])

    def test_k_below_two_rejected(self, synth_records):
        goa, svm = _fast_configs()
        with pytest.raises(DataError):
            cross_validate(synth_records, k=1, goa_config=goa, svm_config=svm, seed=0)


class TestLeakageAudit:
    def test_no_test_rows_in_any_training_stage(self, synth_records):
        goa, svm = _fast_configs()
        events = defaultdict(list)

        def audit(stage, fold, indices):
            events[(stage, fold)].append(np.array(indices, copy=True))

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DataWarning)
            cross_validate(
                synth_records, k=3, goa_config=goa, svm_config=svm,
                seed=5, fitness_epochs=2, audit=audit,
            )
        stages = {
            "encoding_fit", "normalize_fit", "fitness_train",
            "fitness_val", "final_train", "test_predict",
        }
        seen_stages = {stage for stage, _ in events}
        assert seen_stages == stages
        for fold in range(3):
            test_rows = set(np.concatenate(events[("test_predict", fold)]).tolist())
            for stage in stages - {"test_predict"}:
                used = set(np.concatenate(events[(stage, fold)]).tolist())
                assert not (used & test_rows), f"{stage} saw fold-{fold} test rows"
            # fitness split partitions the training rows
            fit = set(np.concatenate(events[("fitness_train", fold)]).tolist())
            val = set(np.concatenate(events[("fitness_val", fold)]).tolist())
            train = set(np.concatenate(events[("final_train", fold)]).tolist())
            assert fit | val == train
            assert not (fit & val)
