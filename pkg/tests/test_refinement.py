from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qgdiag.corpus import ErrorLabelSet, LabelSource
from qgdiag.linear import Hyperparameters
from qgdiag.planted import generate_planted_corpus
from qgdiag.refinement import (
    Assessment,
    IterationRecord,
    Partition,
    RefinementConfig,
    ReviewError,
    ReviewStatus,
    StateLock,
    StateLockHeld,
    Thresholds,
    inconsistency,
    init_state,
    load_state,
    partition_pool,
    persist_iteration,
    resolve_review,
    run_iteration,
    select_checkpoint,
    skip_review,
    train_loop,
    uncertainty,
)
from qgdiag.taxonomy import ErrorType

UNIFORM = {e: 1.0 for e in ErrorType}

FAST = RefinementConfig(
    ei_hparams=Hyperparameters(epochs=300),
    verifier_hparams=Hyperparameters(learning_rate=0.2, epochs=300),
)


def small_state():
    train = generate_planted_corpus(seed=51, n=40, mix=UNIFORM)
    pool_labeled = generate_planted_corpus(seed=52, n=60, mix=UNIFORM)
    dev = generate_planted_corpus(seed=53, n=30, mix=UNIFORM)
    gold = {it.sample.id: it.labels for it in pool_labeled}
    return init_state(train, [it.sample for it in pool_labeled], dev), gold


class TestSelectionMetrics:
    def test_uncertainty_values(self) -> None:
        assert uncertainty(0.5) == 1.0
        assert uncertainty(0.9) == pytest.approx(0.6)
        assert uncertainty(0.0) == 0.5
        assert uncertainty(1.0) == 0.5

    def test_uncertainty_range_error(self) -> None:
        for bad in (-0.1, 1.1):
            with pytest.raises(ValueError):
                uncertainty(bad)

    def test_inconsistency_values(self) -> None:
        assert inconsistency(0.7, 0.7) == 0.0
        assert inconsistency(0.9, 0.2) == pytest.approx(0.7)

    def test_inconsistency_range_error(self) -> None:
        with pytest.raises(ValueError):
            inconsistency(1.2, 0.5)
        with pytest.raises(ValueError):
            inconsistency(0.5, -0.01)

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_inconsistency_symmetry(self, a, b) -> None:
        assert inconsistency(a, b) == inconsistency(b, a)

    @given(st.floats(0, 1))
    def test_uncertainty_symmetry_about_half(self, p) -> None:
        assert uncertainty(p) == pytest.approx(uncertainty(1.0 - p))
        assert 0.5 <= uncertainty(p) <= 1.0


def make_assessment(p_e: float, p_v: float) -> Assessment:
    return Assessment(
        sample_id="x",
        confidences=tuple([0.5] * 11),
        predicted=ErrorLabelSet({ErrorType.NO_ERR}),
        p_e=p_e,
        p_v=p_v,
        uncertainty=uncertainty(p_e),
        inconsistency=inconsistency(p_e, p_v),
    )


class TestPartition:
    def test_reliable_case(self) -> None:
        tagged = partition_pool([make_assessment(0.98, 0.95)], Thresholds())
        assert tagged[0].partition is Partition.RELIABLE

    def test_unreliable_by_uncertainty(self) -> None:
        tagged = partition_pool([make_assessment(0.55, 0.55)], Thresholds())
        assert tagged[0].partition is Partition.UNRELIABLE

    def test_undecided_case(self) -> None:
        tagged = partition_pool([make_assessment(0.85, 0.70)], Thresholds())
        assert tagged[0].partition is Partition.UNDECIDED

    def test_unreliable_by_inconsistency(self) -> None:
        tagged = partition_pool([make_assessment(0.95, 0.55)], Thresholds())
        assert tagged[0].partition is Partition.UNRELIABLE

    def test_classes_exhaustive_and_exclusive(self) -> None:
        rng = random.Random(0)
        assessments = [
            make_assessment(rng.random(), rng.random()) for _ in range(500)
        ]
        tagged = partition_pool(assessments, Thresholds())
        assert all(a.partition in Partition for a in tagged)

    def test_threshold_ordering_enforced(self) -> None:
        with pytest.raises(ValueError):
            Thresholds(tau_u=0.9, theta_u=0.6)
        with pytest.raises(ValueError):
            Thresholds(tau_i=0.4, theta_i=0.3)


class TestSelectCheckpoint:
    def test_paper_like_sequence(self) -> None:
        assert select_checkpoint([57.7, 64.9, 69.4, 71.5, 68.2]) == 3

    def test_single_entry(self) -> None:
        assert select_checkpoint([42.0]) == 0

    def test_tie_goes_earliest(self) -> None:
        assert select_checkpoint([70, 70, 65]) == 0

    def test_records_accepted(self) -> None:
        records = [
            IterationRecord(
                index=i, added_reliable=0, added_human=0, train_size=1, pool_size=0,
                queue_pending=0, micro_f1=f, macro_f1=0, weighted_f1=0, emr=0, opr=0,
            )
            for i, f in enumerate([0.5, 0.8, 0.7])
        ]
        assert select_checkpoint(records) == 1

    def test_empty_history_rejected(self) -> None:
        with pytest.raises(ValueError):
            select_checkpoint([])


class TestRunIteration:
    def test_bootstrap_iteration_trains_only(self) -> None:
        state, _ = small_state()
        record = run_iteration(state, FAST)
        assert record.index == 0
        assert record.added_reliable == 0 and record.added_human == 0
        assert record.train_size == 40
        assert state.ei_model is not None and state.verifier_model is not None

    def test_growth_is_monotone_and_ids_unique(self) -> None:
        state, gold = small_state()
        sizes = []
        for _ in range(3):
            record = run_iteration(state, FAST, reviewer=lambda it: gold[it.sample.id])
            sizes.append(record.train_size)
        assert sizes == sorted(sizes)
        ids = [it.sample.id for it in state.training_set]
        assert len(ids) == len(set(ids))
        pool_ids = {s.id for s in state.pool}
        assert not pool_ids & set(ids)

    def test_verified_reviews_absorbed_without_pool(self) -> None:
        state, gold = small_state()
        run_iteration(state, FAST)
        run_iteration(state, FAST)  # enqueues unreliable samples
        pending = [it for it in state.review_queue if it.status is ReviewStatus.PENDING]
        assert pending
        for item in pending[:5]:
            resolve_review(state, item.sample.id, gold[item.sample.id], reviewer="r")
        state.pool = []  # force the queue-only path
        before = len(state.training_set)
        record = run_iteration(state, FAST)
        assert record.added_human == 5
        assert len(state.training_set) == before + 5
        assert record.added_reliable == 0

    def test_skipped_items_return_to_pool(self) -> None:
        state, gold = small_state()
        run_iteration(state, FAST)
        run_iteration(state, FAST)
        pending = [it for it in state.review_queue if it.status is ReviewStatus.PENDING]
        skip_review(state, pending[0].sample.id)
        pool_before = len(state.pool)
        run_iteration(state, FAST)
        assert pending[0].sample.id in {s.id for s in state.pool} or any(
            it.sample.id == pending[0].sample.id for it in state.review_queue
        ) is False
        assert len(state.pool) <= pool_before + 1

    def test_nothing_to_do_raises(self) -> None:
        state, _ = small_state()
        run_iteration(state, FAST)
        state.pool = []
        state.review_queue = []
        with pytest.raises(ValueError, match="nothing to do"):
            run_iteration(state, FAST)

    def test_caps_validated(self) -> None:
        state, _ = small_state()
        with pytest.raises(ValueError):
            run_iteration(state, RefinementConfig(cap_reliable=0))

    def test_empty_dev_rejected(self) -> None:
        state, _ = small_state()
        state.dev = []
        with pytest.raises(ValueError, match="dev"):
            run_iteration(state, FAST)

    def test_two_runs_identical_history(self) -> None:
        r1 = []
        for _ in range(2):
            state, gold = small_state()
            records = train_loop(
                state, FAST, iterations=2, reviewer=lambda it: gold[it.sample.id]
            )
            r1.append([r.as_dict() for r in records])
        assert r1[0] == r1[1]

    def test_human_verified_source_recorded(self) -> None:
        state, gold = small_state()
        train_loop(state, FAST, iterations=2, reviewer=lambda it: gold[it.sample.id])
        sources = {it.label_source for it in state.training_set}
        assert LabelSource.HUMAN_VERIFIED in sources


class TestResolveReview:
    def _state_with_queue(self):
        state, gold = small_state()
        run_iteration(state, FAST)
        run_iteration(state, FAST)
        pending = [it for it in state.review_queue if it.status is ReviewStatus.PENDING]
        assert pending
        return state, gold, pending

    def test_resolve_records_labels(self) -> None:
        state, _, pending = self._state_with_queue()
        item = resolve_review(
            state, pending[0].sample.id, ErrorLabelSet({ErrorType.OTA}), reviewer="me"
        )
        assert item.status is ReviewStatus.VERIFIED
        assert item.human_labels == ErrorLabelSet({ErrorType.OTA})
        assert item.reviewer == "me"

    def test_unknown_id(self) -> None:
        state, _, _ = self._state_with_queue()
        with pytest.raises(ReviewError) as err:
            resolve_review(state, "missing", ErrorLabelSet({ErrorType.OTA}))
        assert err.value.code == "unknown_item"

    def test_double_resolve_conflicts(self) -> None:
        state, _, pending = self._state_with_queue()
        resolve_review(state, pending[0].sample.id, ErrorLabelSet({ErrorType.OTA}))
        with pytest.raises(ReviewError) as err:
            resolve_review(state, pending[0].sample.id, ErrorLabelSet({ErrorType.VAG}))
        assert err.value.code == "already_resolved"

    def test_invalid_labels_rejected_before_state_change(self) -> None:
        from qgdiag.corpus import CorpusError

        with pytest.raises(CorpusError):
            ErrorLabelSet({ErrorType.NO_ERR, ErrorType.INC})


class TestPersistence:
    def test_state_round_trip(self, tmp_path) -> None:
        state, gold = small_state()
        train_loop(
            state, FAST, iterations=2, state_dir=tmp_path / "state",
            reviewer=lambda it: gold[it.sample.id],
        )
        loaded = load_state(tmp_path / "state")
        assert [r.as_dict() for r in loaded.history] == [
            r.as_dict() for r in state.history
        ]
        assert [it.sample.id for it in loaded.training_set] == [
            it.sample.id for it in state.training_set
        ]
        assert np.array_equal(loaded.ei_model.weights, state.ei_model.weights)
        assert len(loaded.review_queue) == len(state.review_queue)

    def test_layout(self, tmp_path) -> None:
        state, gold = small_state()
        train_loop(
            state, FAST, iterations=2, state_dir=tmp_path / "state",
            reviewer=lambda it: gold[it.sample.id],
        )
        for k in (0, 1):
            iter_dir = tmp_path / "state" / f"iter_{k}"
            for name in ("training.jsonl", "ei.ckpt", "verifier.ckpt", "report.json"):
                assert (iter_dir / name).is_file(), name
        assert (tmp_path / "state" / "queue.jsonl").is_file()

    def test_lock_exclusive(self, tmp_path) -> None:
        with StateLock(tmp_path):
            with pytest.raises(StateLockHeld):
                StateLock(tmp_path).acquire()
        # Released: can be taken again.
        StateLock(tmp_path).acquire().release()
