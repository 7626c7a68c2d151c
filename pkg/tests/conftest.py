import numpy as np
import pytest

from nclp.algebra import AlgebraDescriptor


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("NCLP_TOL", "NCLP_WORKERS", "NCLP_SEED", "NCLP_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def m2():
    return AlgebraDescriptor.of(2)


@pytest.fixture
def mixed():
    """M₂ ⊕ M₁ with a non-trivial trace weight."""
    return AlgebraDescriptor.of(2, 1, weights=(1.0, 0.5))
