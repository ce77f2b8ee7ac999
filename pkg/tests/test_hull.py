import asyncio

import numpy as np
import pytest

from src.orbit_hull.cpmaps import apply
from src.orbit_hull.errors import ParameterError, PreconditionError, ShapeError
from src.orbit_hull.hull import (
    compose_witnesses,
    distance_bound,
    membership,
    membership_batch,
    mutual_membership,
)
from src.orbit_hull.sampling import random_complex_tuple, random_doubly_stochastic, random_normal
from src.orbit_hull.spectra import operator_norm


def test_matrix_is_in_its_own_hull(rng):
    y = random_normal(4, rng)
    result = membership(y, y, tol=1e-7)
    assert result.verdict == "member"
    assert result.achieved <= 1e-7
    assert result.certificate is None


def test_scalar_mean_is_a_member():
    result = membership(1.5 * np.eye(2), np.diag([1.0, 2.0]), tol=1e-7)
    assert result.verdict == "member"
    np.testing.assert_allclose(apply(result.witness, result.y), 1.5 * np.eye(2), atol=1e-7)


def test_rotated_spectra_are_members(conjugated):
    result = membership(conjugated([0, 0, 0, 0]), conjugated([1, 1j, -1, -1j]), tol=1e-7)
    assert result.verdict == "member"


def test_non_member_carries_a_separator(roots_of_unity):
    result = membership(np.diag([1, 1, -1, -1]), np.diag(roots_of_unity), tol=1e-7)
    assert result.verdict == "non_member"
    assert result.witness is None
    assert result.certificate.gap > 0


def test_mixed_pair_from_a_random_witness(rng, unitary):
    mu = random_complex_tuple(5, rng)
    d = random_doubly_stochastic(5, rng)
    fy, fx = unitary(5), unitary(5)
    y = fy @ np.diag(mu) @ fy.conj().T
    x = fx @ np.diag(d.d @ mu) @ fx.conj().T
    result = membership(x, y, tol=1e-7)
    assert result.verdict == "member"
    assert operator_norm(x - apply(result.witness, y)) <= 1e-7


@pytest.mark.parametrize(
    "x, y, error",
    [
        (np.eye(2), np.eye(3), ShapeError),
        (np.array([[0, 1], [0, 0]]), np.eye(2), PreconditionError),
    ],
)
def test_membership_errors(x, y, error):
    with pytest.raises(error):
        membership(x, y, tol=1e-7)


def test_membership_rejects_non_positive_tol():
    with pytest.raises(ParameterError):
        membership(np.eye(2), np.eye(2), tol=0.0)


@pytest.mark.asyncio
async def test_batch_matches_sequential_runs(rng, roots_of_unity):
    pairs = [
        (np.eye(2), np.eye(2)),
        (np.diag([1, 1, -1, -1]), np.diag(roots_of_unity)),
        (1.5 * np.eye(2), np.diag([1.0, 2.0])),
        (random_normal(3, rng), random_normal(3, rng)),
    ]
    batched = await membership_batch(pairs, tol=1e-7)
    sequential = [membership(x, y, tol=1e-7) for x, y in pairs]
    assert [r.verdict for r in batched] == [r.verdict for r in sequential]


def test_batch_runs_in_a_fresh_event_loop():
    results = asyncio.run(membership_batch([(np.eye(1), np.eye(1))], tol=1e-7))
    assert results[0].verdict == "member"


def test_compose_witnesses_chains_errors(rng):
    z_values = random_complex_tuple(4, rng)
    d1, d2 = random_doubly_stochastic(4, rng), random_doubly_stochastic(4, rng)
    z = np.diag(z_values)
    y = np.diag(d1.d @ z_values)
    x = np.diag(d2.d @ d1.d @ z_values)
    composed = compose_witnesses(membership(x, y, tol=1e-7), membership(y, z, tol=1e-7))
    assert composed.achieved <= composed.bound + 1e-10
    assert operator_norm(x - apply(composed.channel, z)) <= 2e-7


def test_compose_witnesses_preconditions(roots_of_unity):
    member = membership(np.eye(2), np.eye(2), tol=1e-7)
    outsider = membership(np.diag([1, 1, -1, -1]), np.diag(roots_of_unity), tol=1e-7)
    with pytest.raises(PreconditionError):
        compose_witnesses(member, outsider)
    other = membership(np.diag([1.0, 2.0]), np.diag([2.0, 1.0]), tol=1e-7)
    with pytest.raises(ShapeError):
        compose_witnesses(member, other)


@pytest.mark.parametrize(
    "x_spectrum, y_spectrum, both_ways",
    [
        ([1, 2], [2, 1], True),
        ([1.5, 1.5], [1, 2], False),
        ([1, 1, 2], [1, 2, 2], False),
        ([1j, -1j, 3], [3, 1j, -1j], True),
    ],
)
def test_mutual_membership(conjugated, x_spectrum, y_spectrum, both_ways):
    report = mutual_membership(conjugated(x_spectrum), np.diag(y_spectrum), tol=1e-7, oracle=True)
    assert (report.xy == "member" and report.yx == "member") is both_ways
    assert report.measures_equal is both_ways
    assert report.consistent
    assert report.oracle_xy == (report.xy == "member")
    assert report.oracle_yx == (report.yx == "member")


def test_mutual_membership_same_spectrum_different_multiplicities(conjugated):
    report = mutual_membership(conjugated([1, 1, 2]), np.diag([1, 2, 2]), tol=1e-7)
    assert report.spectra_equal
    assert not report.measures_equal
    assert report.consistent


@pytest.mark.parametrize(
    "x, y, lower",
    [
        (np.diag([1.0, 1j]), np.diag([1j, 1.0]), 0.0),
        (np.diag([-0.1, 1.1]), np.diag([0.0, 1.0]), 0.1),
        (np.diag([0.5, 1.5]), np.diag([0.0, 1.0]), 0.5),
    ],
)
def test_distance_bound(x, y, lower):
    bound = distance_bound(x, y)
    assert bound.lower == pytest.approx(lower, abs=1e-9)
    assert bound.lower <= bound.upper + 1e-9
    assert bound.upper <= bound.modulus_upper + 1e-9
    assert bound.modulus_upper == pytest.approx(np.sqrt(2) * lower, abs=1e-9)


def test_distance_bound_rejects_mismatched_dimensions():
    with pytest.raises(ShapeError):
        distance_bound(np.eye(2), np.eye(3))


def test_eigenvalues_closer_than_the_grouping_radius_stay_members():
    x = np.diag([1.0, 1.0 + 5e-9, -2.0])
    result = membership(x, x, tol=1e-9)
    assert result.verdict == "member"
    assert result.achieved <= 1e-9
