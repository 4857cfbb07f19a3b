from __future__ import annotations

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgdiag.corpus import ErrorLabelSet
from qgdiag.linear import Hyperparameters
from qgdiag.planted import generate_planted_corpus
from qgdiag.taxonomy import ErrorType
from qgdiag.verifier import (
    Validity,
    VerificationPair,
    build_verifier_training_set,
    perturb_labels,
    train_verifier,
    verify,
    verify_batch,
)

REAL_ERRORS = [e for e in ErrorType if e is not ErrorType.NO_ERR]


def valid_label_sets() -> st.SearchStrategy[ErrorLabelSet]:
    noerr = st.just(ErrorLabelSet({ErrorType.NO_ERR}))
    errors = st.sets(st.sampled_from(REAL_ERRORS), min_size=1, max_size=6).map(
        ErrorLabelSet
    )
    return st.one_of(noerr, errors)


class TestPerturbLabels:
    def test_noerr_becomes_single_error(self) -> None:
        rng = random.Random(0)
        for _ in range(50):
            out = perturb_labels(ErrorLabelSet({ErrorType.NO_ERR}), rng)
            assert len(out) == 1
            assert not out.is_no_error

    def test_multi_error_set_stays_valid(self) -> None:
        rng = random.Random(1)
        labels = ErrorLabelSet({ErrorType.INC, ErrorType.SPELL})
        for _ in range(200):
            out = perturb_labels(labels, rng)
            assert out != labels
            if ErrorType.NO_ERR in out:
                assert len(out) == 1

    def test_thousand_seeded_perturbations_of_fact(self) -> None:
        rng = random.Random(42)
        source = ErrorLabelSet({ErrorType.FACT})
        for _ in range(1000):
            out = perturb_labels(source, rng)
            assert out != source
            assert len(out) >= 1
            if ErrorType.NO_ERR in out:
                assert len(out) == 1

    @settings(max_examples=300)
    @given(labels=valid_label_sets(), seed=st.integers(0, 2**16))
    def test_never_returns_input_and_always_valid(self, labels, seed) -> None:
        out = perturb_labels(labels, random.Random(seed))
        assert out != labels
        assert len(out) >= 1  # constructing ErrorLabelSet enforces validity


class TestTrainingSetConstruction:
    def test_balanced_counts(self, planted_small) -> None:
        pairs = build_verifier_training_set(planted_small[:50], 1.0, random.Random(3))
        assert len(pairs) == 100
        assert sum(1 for p in pairs if p.validity is Validity.VALID) == 50

    def test_ceiling_arithmetic(self, planted_small) -> None:
        pairs = build_verifier_training_set(planted_small[:10], 0.5, random.Random(3))
        assert len(pairs) == 15

    def test_negatives_differ_from_gold(self, planted_small) -> None:
        gold = {it.sample.id: it.labels for it in planted_small}
        pairs = build_verifier_training_set(planted_small, 1.0, random.Random(9))
        for pair in pairs:
            if pair.validity is Validity.INVALID:
                assert pair.labels != gold[pair.sample.id]

    def test_shuffle_is_deterministic(self, planted_small) -> None:
        a = build_verifier_training_set(planted_small, 1.0, random.Random(7))
        b = build_verifier_training_set(planted_small, 1.0, random.Random(7))
        assert a == b

    def test_empty_and_bad_ratio(self, planted_small) -> None:
        with pytest.raises(ValueError):
            build_verifier_training_set([], 1.0, random.Random(0))
        with pytest.raises(ValueError):
            build_verifier_training_set(planted_small, 0.0, random.Random(0))


class TestVerifierTraining:
    def test_zero_epochs_scores_half(self, planted_small) -> None:
        pairs = build_verifier_training_set(planted_small, 1.0, random.Random(0))
        model = train_verifier(pairs, Hyperparameters(epochs=0))
        item = planted_small[0]
        assert verify(model, item.sample, item.labels) == 0.5

    def test_separable_toy_training_accuracy(self) -> None:
        corpus = generate_planted_corpus(
            seed=6, n=40, mix={ErrorType.COPY: 1.0, ErrorType.NO_ERR: 1.0}
        )
        pairs = build_verifier_training_set(corpus, 1.0, random.Random(2))
        model = train_verifier(pairs, Hyperparameters(learning_rate=0.2, epochs=2000))
        scores = verify_batch(model, [(p.sample, p.labels) for p in pairs])
        preds = scores >= 0.5
        golds = np.array([p.validity is Validity.VALID for p in pairs])
        assert (preds == golds).mean() == 1.0

    def test_gradient_matches_finite_differences_binary(self) -> None:
        from qgdiag.linear import loss_and_gradient

        rng = np.random.default_rng(5)
        x = rng.normal(size=(8, 6))
        y = (rng.random((8, 1)) < 0.5).astype(float)
        weights = rng.normal(scale=0.4, size=(1, 6))
        bias = rng.normal(scale=0.2, size=1)
        _, grad_w, grad_b = loss_and_gradient(weights, bias, x, y, l2=1e-3)
        eps = 1e-6
        for idx in np.ndindex(weights.shape):
            w_plus, w_minus = weights.copy(), weights.copy()
            w_plus[idx] += eps
            w_minus[idx] -= eps
            lp = loss_and_gradient(w_plus, bias, x, y, 1e-3)[0]
            lm = loss_and_gradient(w_minus, bias, x, y, 1e-3)[0]
            fd = (lp - lm) / (2 * eps)
            assert abs(grad_w[idx] - fd) / max(abs(fd), 1e-12) < 1e-4

    def test_loss_curve_monotone(self, toy_verifier) -> None:
        curve = toy_verifier.loss_curve
        assert all(a >= b - 1e-12 for a, b in zip(curve, curve[1:]))


class TestVerify:
    def test_verify_pure_and_bounded(self, toy_verifier, planted_small) -> None:
        item = planted_small[0]
        a = verify(toy_verifier, item.sample, item.labels)
        b = verify(toy_verifier, item.sample, item.labels)
        assert a == b
        assert 0.0 <= a <= 1.0

    def test_gold_scores_above_perturbed(self, toy_verifier, planted_eval) -> None:
        rng = random.Random(13)
        gold_scores, bad_scores = [], []
        for item in planted_eval:
            gold_scores.append(verify(toy_verifier, item.sample, item.labels))
            bad_scores.append(
                verify(toy_verifier, item.sample, perturb_labels(item.labels, rng))
            )
        assert np.mean(gold_scores) > np.mean(bad_scores)

    def test_heldout_auc_above_08(self, toy_verifier, planted_eval) -> None:
        pairs = build_verifier_training_set(planted_eval, 1.0, random.Random(21))
        scores = verify_batch(toy_verifier, [(p.sample, p.labels) for p in pairs])
        y = np.array([1.0 if p.validity is Validity.VALID else 0.0 for p in pairs])
        order = np.argsort(scores)
        ranks = np.empty(len(scores))
        ranks[order] = np.arange(1, len(scores) + 1)
        n1, n0 = y.sum(), (1 - y).sum()
        auc = (ranks[y == 1].sum() - n1 * (n1 + 1) / 2) / (n1 * n0)
        assert auc > 0.8, auc
