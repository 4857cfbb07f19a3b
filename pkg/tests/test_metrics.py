from __future__ import annotations

import itertools
import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qgdiag.corpus import ErrorLabelSet
from qgdiag.metrics import (
    MetricError,
    classification_report,
    multilabel_report,
    overestimation_rate,
    pearson,
)
from qgdiag.taxonomy import ErrorType

L = lambda *codes: ErrorLabelSet.from_codes(list(codes))  # noqa: E731


# --- independent brute-force references ---------------------------------------

def ref_pearson(xs, ys):
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    cov = sx = sy = 0.0
    for x, y in zip(xs, ys):
        cov += (x - mx) * (y - my)
        sx += (x - mx) ** 2
        sy += (y - my) ** 2
    return cov / math.sqrt(sx * sy)


def ref_prf(tp, fp, fn):
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def ref_multilabel(preds, golds):
    labels = list(ErrorType)
    tp = {e: 0 for e in labels}
    fp = {e: 0 for e in labels}
    fn = {e: 0 for e in labels}
    for pred, gold in zip(preds, golds):
        for e in labels:
            if e in pred and e in gold:
                tp[e] += 1
            if e in pred and e not in gold:
                fp[e] += 1
            if e not in pred and e in gold:
                fn[e] += 1
    micro = ref_prf(sum(tp.values()), sum(fp.values()), sum(fn.values()))[2]
    included = [e for e in labels if tp[e] + fn[e] + fp[e] > 0]
    macro = sum(ref_prf(tp[e], fp[e], fn[e])[2] for e in included) / len(included)
    support = {e: tp[e] + fn[e] for e in labels}
    total = sum(support.values())
    weighted = (
        sum(ref_prf(tp[e], fp[e], fn[e])[2] * support[e] for e in labels) / total
    )
    emr = sum(1 for p, g in zip(preds, golds) if p == g) / len(preds)
    spurious = sum(len(p.errors - g.errors) for p, g in zip(preds, golds))
    predicted = sum(len(p) for p in preds)
    return micro, macro, weighted, emr, spurious / predicted


def random_label_set(rng: random.Random) -> ErrorLabelSet:
    if rng.random() < 0.25:
        return L("NoErr")
    errors = rng.sample(
        [e for e in ErrorType if e is not ErrorType.NO_ERR], k=rng.randint(1, 4)
    )
    return ErrorLabelSet(errors)


class TestPearson:
    def test_perfect_linear(self) -> None:
        assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)

    def test_perfect_inverse(self) -> None:
        assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_half_correlation_case(self) -> None:
        # Hand-check: covariance 1, both variances 2 -> r = 1/2.
        assert pearson([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5)

    def test_zero_variance_is_error(self) -> None:
        with pytest.raises(MetricError, match="variance"):
            pearson([1, 1, 1], [1, 2, 3])
        with pytest.raises(MetricError, match="variance"):
            pearson([1, 2, 3], [2, 2, 2])

    def test_length_mismatch_and_short(self) -> None:
        with pytest.raises(MetricError):
            pearson([1, 2], [1, 2, 3])
        with pytest.raises(MetricError):
            pearson([1], [2])

    @given(
        xs=st.lists(st.floats(-50, 50), min_size=3, max_size=30),
        a=st.floats(0.1, 10),
        b=st.floats(-5, 5),
    )
    def test_affine_invariance(self, xs, a, b) -> None:
        if max(xs) - min(xs) < 1e-6:  # avoid float-underflow degeneracy
            return
        ys = [a * x + b for x in xs]
        assert pearson(xs, ys) == pytest.approx(1.0, abs=1e-6)
        ys_neg = [-a * x + b for x in xs]
        assert pearson(xs, ys_neg) == pytest.approx(-1.0, abs=1e-6)

    def test_matches_reference_on_random_inputs(self) -> None:
        rng = random.Random(3)
        for _ in range(200):
            n = rng.randint(2, 50)
            xs = [rng.uniform(-10, 10) for _ in range(n)]
            ys = [rng.uniform(-10, 10) for _ in range(n)]
            if len(set(xs)) < 2 or len(set(ys)) < 2:
                continue
            assert pearson(xs, ys) == pytest.approx(ref_pearson(xs, ys), abs=1e-9)


class TestClassificationReport:
    def test_perfect(self) -> None:
        report = classification_report([1, 0, 1, 0], [1, 0, 1, 0])
        assert report["accuracy"] == 1.0
        assert report["macro_f1"] == 1.0

    def test_half_right(self) -> None:
        report = classification_report([1, 1, 0, 0], [1, 0, 1, 0])
        assert report["accuracy"] == 0.5
        assert report["macro_f1"] == 0.5

    def test_degenerate_all_ones(self) -> None:
        report = classification_report([1, 1, 1], [1, 1, 1])
        assert report["accuracy"] == 1.0
        assert report["macro_f1"] == 0.5  # class 0 contributes 0 by convention

    def test_matches_exhaustive_reference(self) -> None:
        rng = random.Random(9)
        for _ in range(200):
            n = rng.randint(1, 50)
            preds = [rng.randint(0, 1) for _ in range(n)]
            golds = [rng.randint(0, 1) for _ in range(n)]
            report = classification_report(preds, golds)
            per = {}
            for cls in (0, 1):
                tp = sum(1 for p, g in zip(preds, golds) if p == cls and g == cls)
                fp = sum(1 for p, g in zip(preds, golds) if p == cls and g != cls)
                fn = sum(1 for p, g in zip(preds, golds) if p != cls and g == cls)
                per[cls] = ref_prf(tp, fp, fn)
            assert report["macro_precision"] == pytest.approx(
                (per[0][0] + per[1][0]) / 2, abs=1e-9
            )
            assert report["macro_recall"] == pytest.approx(
                (per[0][1] + per[1][1]) / 2, abs=1e-9
            )
            assert report["macro_f1"] == pytest.approx(
                (per[0][2] + per[1][2]) / 2, abs=1e-9
            )

    def test_length_mismatch(self) -> None:
        with pytest.raises(MetricError):
            classification_report([1], [1, 0])


class TestMultilabelReport:
    def test_identity(self) -> None:
        sets = [L("Inc"), L("NoErr"), L("Spell", "Gram")]
        report = multilabel_report(sets, sets)
        assert report.micro_f1 == 1.0
        assert report.macro_f1 == 1.0
        assert report.weighted_f1 == 1.0
        assert report.emr == 1.0
        assert report.opr == 0.0

    def test_worked_example(self) -> None:
        preds = [L("Inc"), L("NoErr"), L("Spell", "Gram")]
        golds = [L("Inc"), L("NoErr"), L("Spell")]
        report = multilabel_report(preds, golds)
        assert report.emr == pytest.approx(2 / 3)
        assert report.opr == pytest.approx(1 / 4)
        assert report.micro_f1 == pytest.approx(6 / 7)

    def test_micro_precision_recall_case(self) -> None:
        preds = [L("Inc"), L("Spell")]
        golds = [L("Inc", "Spell"), L("Spell")]
        report = multilabel_report(preds, golds)
        # TP=2, FP=0, FN=1 -> P=1, R=2/3, F1=0.8
        assert report.micro_f1 == pytest.approx(0.8)

    def test_matches_brute_force_on_random_instances(self) -> None:
        rng = random.Random(17)
        for _ in range(200):
            n = rng.randint(1, 50)
            preds = [random_label_set(rng) for _ in range(n)]
            golds = [random_label_set(rng) for _ in range(n)]
            report = multilabel_report(preds, golds)
            micro, macro, weighted, emr, opr = ref_multilabel(preds, golds)
            assert report.micro_f1 == pytest.approx(micro, abs=1e-9)
            assert report.macro_f1 == pytest.approx(macro, abs=1e-9)
            assert report.weighted_f1 == pytest.approx(weighted, abs=1e-9)
            assert report.emr == pytest.approx(emr, abs=1e-9)
            assert report.opr == pytest.approx(opr, abs=1e-9)

    def test_perfect_emr_forces_perfect_rest(self) -> None:
        rng = random.Random(23)
        for _ in range(50):
            sets = [random_label_set(rng) for _ in range(rng.randint(1, 30))]
            report = multilabel_report(sets, sets)
            assert report.emr == 1.0
            assert report.opr == 0.0
            assert report.micro_f1 == 1.0

    def test_unsupported_labels_excluded_from_macro(self) -> None:
        preds = [L("Inc")] * 4
        golds = [L("Inc")] * 4
        report = multilabel_report(preds, golds)
        assert report.macro_f1 == 1.0
        assert set(report.excluded_labels) == {
            e.value for e in ErrorType if e is not ErrorType.INC
        }

    def test_length_mismatch(self) -> None:
        with pytest.raises(MetricError):
            multilabel_report([L("Inc")], [])


class TestOverestimationRate:
    def test_worked_example(self) -> None:
        assert overestimation_rate([1, 2, 3, 3, 1], [3, 3, 3, 3, 1]) == pytest.approx(2 / 3)

    def test_model_never_high(self) -> None:
        assert overestimation_rate([1, 2, 2], [2, 2, 1]) == 0.0

    def test_saturation(self) -> None:
        assert overestimation_rate([1, 2, 1], [3, 3, 3]) == 1.0

    def test_no_low_quality_is_error(self) -> None:
        with pytest.raises(MetricError, match="low-quality"):
            overestimation_rate([3, 3], [3, 3])

    def test_permutation_invariance(self) -> None:
        rng = random.Random(4)
        human = [rng.randint(1, 3) for _ in range(30)]
        model = [rng.randint(1, 3) for _ in range(30)]
        base = overestimation_rate(human, model)
        for _ in range(10):
            order = list(range(30))
            rng.shuffle(order)
            assert overestimation_rate(
                [human[i] for i in order], [model[i] for i in order]
            ) == pytest.approx(base)
