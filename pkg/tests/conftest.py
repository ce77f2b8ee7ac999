import numpy as np
import pytest

from src.orbit_hull.sampling import random_unitary


@pytest.fixture
def rng():
    """Fixture providing a seeded numpy Generator, fresh for every test."""
    return np.random.default_rng(20240611)


@pytest.fixture
def unitary(rng):
    """Fixture providing a factory of Haar unitaries drawn from the test's generator."""
    return lambda n: random_unitary(n, rng)


@pytest.fixture
def conjugated(unitary):
    """Fixture providing a factory U diag(values) U* for a fresh Haar U."""
    def build(values):
        values = np.asarray(values, dtype=complex)
        u = unitary(values.size)
        return u @ np.diag(values) @ u.conj().T

    return build


@pytest.fixture
def roots_of_unity():
    """Fixture providing the fourth roots of unity (1, i, -1, -i)."""
    return np.array([1, 1j, -1, -1j])
