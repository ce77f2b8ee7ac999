import numpy as np
import pytest
from pydantic import ValidationError

from src.orbit_hull.cpmaps import (
    ChannelTerm,
    FunctionChannel,
    MixedUnitaryChannel,
    SpectralGrouping,
    apply,
    channel_from_ds,
    check_channel,
    compose,
    ds_from_channel,
    pinch,
    witness_channel,
)
from src.orbit_hull.errors import ShapeError
from src.orbit_hull.sampling import random_complex_tuple, random_doubly_stochastic, random_unitary
from src.orbit_hull.spectra import operator_norm


@pytest.fixture
def depolarizing():
    """Sends every 3x3 matrix to its normalized trace times the identity."""
    return FunctionChannel(dim=3, action=lambda a: np.trace(a) / 3 * np.eye(3))


def test_identity_channel_fixes_everything(rng):
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    np.testing.assert_allclose(apply(MixedUnitaryChannel.identity(3), m), m)
    np.testing.assert_allclose(channel_from_ds(np.eye(3))(m), m)


@pytest.mark.parametrize(
    "d, mu, expected",
    [
        (np.eye(2), [1, 2], [1, 2]),
        (np.full((2, 2), 0.5), [1, 2], [1.5, 1.5]),
        (np.array([[0.75, 0.25], [0.25, 0.75]]), [0, 1], [0.25, 0.75]),
        (np.full((4, 4), 0.25), [1, 1j, -1, -1j], [0, 0, 0, 0]),
    ],
)
def test_channel_from_ds_maps_diagonal_to_d_mu(d, mu, expected):
    channel = channel_from_ds(d)
    np.testing.assert_allclose(channel(np.diag(mu)), np.diag(expected), atol=1e-12)


def test_channel_in_a_rotated_frame(rng):
    mu = random_complex_tuple(4, rng)
    d = random_doubly_stochastic(4, rng)
    u = random_unitary(4, rng)
    image = channel_from_ds(d, u)(u @ np.diag(mu) @ u.conj().T)
    np.testing.assert_allclose(image, u @ np.diag(d.d @ mu) @ u.conj().T, atol=1e-10)


def test_witness_channel_moves_between_frames(rng):
    mu = random_complex_tuple(3, rng)
    d = random_doubly_stochastic(3, rng)
    fy, fx = random_unitary(3, rng), random_unitary(3, rng)
    channel = witness_channel(d, fy, fx)
    y = fy @ np.diag(mu) @ fy.conj().T
    np.testing.assert_allclose(channel(y), fx @ np.diag(d.d @ mu) @ fx.conj().T, atol=1e-10)


def test_compose_matches_sequential_application(rng):
    outer = channel_from_ds(random_doubly_stochastic(3, rng), random_unitary(3, rng))
    inner = channel_from_ds(random_doubly_stochastic(3, rng), random_unitary(3, rng))
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    np.testing.assert_allclose(compose(outer, inner)(m), outer(inner(m)), atol=1e-10)
    assert len(compose(outer, inner).terms) == len(outer.terms) * len(inner.terms)


def test_compose_rejects_mismatched_dimensions():
    with pytest.raises(ShapeError):
        compose(MixedUnitaryChannel.identity(2), MixedUnitaryChannel.identity(3))


def test_apply_rejects_wrong_shape():
    with pytest.raises(ShapeError):
        apply(MixedUnitaryChannel.identity(2), np.eye(3))


def test_channel_invariants():
    with pytest.raises(ValidationError):
        MixedUnitaryChannel(
            dim=2,
            terms=[ChannelTerm(weight=0.6, unitary=np.eye(2)), ChannelTerm(weight=0.6, unitary=np.eye(2))],
        )
    with pytest.raises(ValidationError):
        MixedUnitaryChannel(dim=2, terms=[ChannelTerm(weight=1.0, unitary=2 * np.eye(2))])
    with pytest.raises(ValidationError):
        MixedUnitaryChannel(dim=2, terms=[])


@pytest.mark.parametrize(
    "m, grouping, expected",
    [
        (np.array([[1, 2], [3, 4]]), None, np.array([[1, 0], [0, 4]])),
        (
            np.ones((3, 3)),
            SpectralGrouping(groups=[[0, 2], [1]], values=[5, 7]),
            np.array([[1, 0, 1], [0, 1, 0], [1, 0, 1]]),
        ),
        (np.ones((2, 2)), SpectralGrouping(groups=[[0, 1]], values=[3]), np.ones((2, 2))),
    ],
)
def test_pinch_examples(m, grouping, expected):
    np.testing.assert_array_equal(pinch(m, grouping), expected)


def test_pinch_is_idempotent(rng):
    grouping = SpectralGrouping.from_values([1, 2, 1, 3, 2])
    m = rng.normal(size=(5, 5))
    once = pinch(m, grouping)
    np.testing.assert_array_equal(pinch(once, grouping), once)


@pytest.mark.parametrize("values", [None, [1, 2, 1, 3, 2, 3], [4, 4, 4, 4, 4, 4], [1j, 2, 3, 4, 5, 6]])
def test_pinch_preserves_trace_and_contracts_norm(rng, values):
    grouping = None if values is None else SpectralGrouping.from_values(values)
    for _ in range(20):
        m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        pinched = pinch(m, grouping)
        assert np.trace(pinched) == pytest.approx(np.trace(m), abs=1e-12)
        assert operator_norm(pinched) <= operator_norm(m) + 1e-12


def test_grouping_from_values_keeps_first_appearance_order():
    grouping = SpectralGrouping.from_values([2, 1, 2, 1j])
    assert grouping.groups == [[0, 2], [1], [3]]
    np.testing.assert_allclose(grouping.values, [2, 1, 1j])


def test_grouping_must_partition():
    with pytest.raises(ValidationError):
        SpectralGrouping(groups=[[0], [0, 1]], values=[1, 2])


def test_ds_from_identity_channel():
    extracted = ds_from_channel(MixedUnitaryChannel.identity(3), [1, 2, 3])
    np.testing.assert_allclose(extracted.d, np.eye(3))
    assert extracted.unital


def test_ds_from_depolarizing_channel(depolarizing):
    extracted = ds_from_channel(depolarizing, [1, 1j, -1])
    np.testing.assert_allclose(extracted.d, np.full((3, 3), 1 / 3))
    np.testing.assert_allclose(extracted.input_sums, np.ones(3))


def test_ds_round_trip_through_a_channel(rng):
    d = random_doubly_stochastic(4, rng)
    extracted = ds_from_channel(channel_from_ds(d), [1, 2, 3, 4])
    np.testing.assert_allclose(extracted.d, d.d, atol=1e-12)


def test_ds_from_repeated_eigenvalues_averages_over_the_group():
    swap = channel_from_ds(np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]]))
    extracted = ds_from_channel(swap, [5, 5, 1])
    np.testing.assert_allclose(extracted.d, [[0.5, 0.5, 0], [0.5, 0.5, 0], [0, 0, 1]])


def test_ds_from_non_unital_channel_is_flagged():
    collapse = FunctionChannel(dim=2, action=lambda a: np.trace(a) * np.diag([1.0, 0.0]))
    extracted = ds_from_channel(collapse, [1, 2])
    assert not extracted.unital
    np.testing.assert_allclose(extracted.output_sums, [2, 0])
    np.testing.assert_allclose(extracted.input_sums, [1, 1])


def test_ds_from_channel_checks_dimensions():
    with pytest.raises(ShapeError):
        ds_from_channel(MixedUnitaryChannel.identity(2), [1, 2, 3])


def test_check_channel_on_mixed_unitary(rng):
    channel = channel_from_ds(random_doubly_stochastic(3, rng), random_unitary(3, rng))
    report = check_channel(channel)
    assert report.unital and report.trace_preserving and report.contractive


def test_check_channel_on_function_channels(depolarizing):
    assert check_channel(depolarizing).unital

    doubling = FunctionChannel(dim=2, action=lambda a: 2 * a)
    report = check_channel(doubling)
    assert not report.unital
    assert not report.trace_preserving
    assert report.contraction_excess == pytest.approx(1.0)
