import numpy as np
import pytest

from src.orbit_hull.correction import correct_ds, corrected_channel
from src.orbit_hull.cpmaps import FunctionChannel, MixedUnitaryChannel, channel_from_ds
from src.orbit_hull.errors import PreconditionError, ShapeError
from src.orbit_hull.sampling import random_complex_tuple, random_doubly_stochastic


@pytest.fixture
def leaky_channel():
    """Unital on 2x2 matrices, but its stochastic matrix has column sums 1.1 and 0.9."""
    s = np.array([[0.6, 0.4], [0.5, 0.5]])
    return FunctionChannel(dim=2, action=lambda a: np.diag(s @ np.diag(a)))


def test_two_by_two_example():
    report = correct_ds(np.array([[0.6, 0.5], [0.4, 0.5]]), eps2=0.1)
    assert report.lambda_plus == [0]
    assert report.lambda_minus == [1]
    np.testing.assert_allclose(report.eps_prime, [0.1, -0.1], atol=1e-12)
    np.testing.assert_allclose(report.d_corrected.d, np.array([[6, 5], [5, 6]]) / 11, atol=1e-12)


def test_zero_defect_leaves_matrix_unchanged(rng):
    d = random_doubly_stochastic(5, rng).d
    report = correct_ds(d, eps2=0.0)
    np.testing.assert_array_equal(report.d_corrected.d, d)
    assert report.lambda_minus == []
    assert np.all(report.eps_matrix == 0.0)


def test_rounding_dust_is_not_a_defect():
    d = np.array([[0.5, 0.5], [0.5, 0.5]])
    d[0, 0] -= 1.1e-16
    report = correct_ds(d, eps2=0.0)
    assert report.lambda_plus == [0, 1]
    assert report.lambda_minus == []
    np.testing.assert_array_equal(report.eps_prime, [0.0, 0.0])
    np.testing.assert_array_equal(report.d_corrected.d, d)


def test_random_column_stochastic_matrices(rng):
    for _ in range(25):
        n = int(rng.integers(2, 8))
        m = rng.random((n, n)) + 0.05
        d = m / m.sum(axis=0)
        eps_prime = d.sum(axis=1) - 1
        report = correct_ds(d, eps2=float(np.abs(eps_prime).max()))
        eps = report.eps_matrix
        assert np.all(eps >= 0)
        np.testing.assert_allclose(eps.sum(axis=1), np.abs(eps_prime), atol=1e-10)
        plus, minus = report.lambda_plus, report.lambda_minus
        np.testing.assert_allclose(eps[plus].sum(axis=0), eps[minus].sum(axis=0), atol=1e-10)
        assert np.abs(report.d_corrected.d - d).sum() <= 2 * np.abs(eps_prime).sum() + 1e-10


@pytest.mark.parametrize(
    "d, eps2",
    [
        (np.array([[0.6, 0.5], [0.4, 0.5]]), 0.05),
        (np.array([[0.7, 0.5], [0.4, 0.5]]), 0.2),
        (np.array([[1.2, 0.0], [-0.2, 1.0]]), 0.2),
    ],
)
def test_preconditions(d, eps2):
    with pytest.raises(PreconditionError):
        correct_ds(d, eps2)


def test_non_square_input():
    with pytest.raises(ShapeError):
        correct_ds(np.ones((2, 3)) / 2, eps2=1.0)


def test_corrected_channel_on_an_exact_pair():
    y = np.diag([1.0, 2.0])
    report = corrected_channel(y, y, MixedUnitaryChannel.identity(2))
    assert report.eps1 == pytest.approx(0.0, abs=1e-12)
    assert report.eps2 == pytest.approx(0.0, abs=1e-12)
    assert report.achieved == pytest.approx(0.0, abs=1e-10)


def test_corrected_channel_from_a_witness(rng):
    mu = random_complex_tuple(4, rng)
    d = random_doubly_stochastic(4, rng)
    y = np.diag(mu)
    x = np.diag(d.d @ mu)
    report = corrected_channel(x, y, channel_from_ds(d))
    assert report.achieved <= 1e-8
    assert report.entrywise_gap <= 1e-8


def test_corrected_channel_repairs_a_leaky_channel(leaky_channel):
    y = np.diag([1.0, 2.0])
    x = np.diag([1.4, 1.5])
    report = corrected_channel(x, y, leaky_channel)
    assert report.eps1 == pytest.approx(0.0, abs=1e-12)
    assert report.eps2 == pytest.approx(0.1)
    assert report.s == pytest.approx(0.5)
    assert report.achieved == pytest.approx(3 / 55, abs=1e-9)
    assert report.achieved <= report.bound
    assert report.entrywise_gap <= report.entrywise_bound


def test_corrected_channel_checks_supplied_hypotheses(leaky_channel):
    y = np.diag([1.0, 2.0])
    x = np.diag([1.4, 1.5])
    with pytest.raises(PreconditionError):
        corrected_channel(x, y, leaky_channel, eps2=0.0)
    with pytest.raises(PreconditionError):
        corrected_channel(np.diag([0.0, 0.0]), y, leaky_channel, eps1=0.1)


def test_corrected_channel_rejects_non_unital_maps():
    collapse = FunctionChannel(dim=2, action=lambda a: np.trace(a) * np.diag([1.0, 0.0]))
    with pytest.raises(PreconditionError):
        corrected_channel(np.diag([3.0, 0.0]), np.diag([1.0, 2.0]), collapse)
