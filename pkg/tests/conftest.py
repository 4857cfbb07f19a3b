from __future__ import annotations

import pytest

from qgdiag.linear import Hyperparameters
from qgdiag.planted import generate_planted_corpus
from qgdiag.taxonomy import ErrorType

UNIFORM_MIX = {e: 1.0 for e in ErrorType}


@pytest.fixture(scope="session")
def planted_small():
    """60 samples across all error types; shared read-only fixture."""
    return generate_planted_corpus(seed=11, n=60, mix=UNIFORM_MIX)


@pytest.fixture(scope="session")
def planted_eval():
    """Disjoint 120-sample set for held-out checks."""
    return generate_planted_corpus(seed=77, n=120, mix=UNIFORM_MIX)


@pytest.fixture(scope="session")
def fast_hparams():
    """Cheap training settings for unit tests; defaults are for real runs."""
    return Hyperparameters(epochs=400)


@pytest.fixture(scope="session")
def toy_identifier(planted_small, fast_hparams):
    from qgdiag.identifier import train_identifier

    return train_identifier(planted_small, fast_hparams)


@pytest.fixture(scope="session")
def toy_verifier(planted_small, fast_hparams):
    import random

    from qgdiag.verifier import build_verifier_training_set, train_verifier

    pairs = build_verifier_training_set(planted_small, 1.0, random.Random(5))
    return train_verifier(pairs, Hyperparameters(learning_rate=0.2, epochs=400))
