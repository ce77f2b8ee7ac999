import numpy as np
import pytest

from src.orbit_hull.errors import DegeneracyError, SolverError, VerificationError
from src.orbit_hull.graph import (
    app,
    route_after_majorize,
    should_continue_after_decompose,
    should_continue_after_synthesize,
)
from src.orbit_hull.hull import membership
from src.orbit_hull.majorization import DoublyStochastic, is_majorized
from src.orbit_hull.state import MembershipState


@pytest.fixture
def base_state():
    """Fixture providing a MembershipState with nothing computed yet."""
    return MembershipState(
        x=np.eye(2, dtype=complex),
        y=np.eye(2, dtype=complex),
        tol=1e-7,
        exact=False,
        x_form=None,
        y_form=None,
        lam=None,
        mu=None,
        certificate=None,
        channel=None,
        achieved=None,
        verdict=None,
        errors=[],
    )


@pytest.fixture
def mean_state(base_state):
    """Fixture providing the pair x = 1.5 I, y = diag(1, 2)."""
    base_state["x"] = 1.5 * np.eye(2, dtype=complex)
    base_state["y"] = np.diag([1.0, 2.0]).astype(complex)
    return base_state


@pytest.fixture
def swapped_state(base_state):
    """Fixture providing the pair x = diag(1, 2), y = 1.5 I, outside the hull."""
    base_state["x"] = np.diag([1.0, 2.0]).astype(complex)
    base_state["y"] = 1.5 * np.eye(2, dtype=complex)
    return base_state


def test_member_path(mean_state):
    """The feasible branch synthesizes and verifies a witness."""
    final_state = app.invoke(mean_state)
    assert final_state["verdict"] == "member"
    assert final_state["achieved"] <= 1e-7, "Witness should reproduce x within tol"
    assert final_state["channel"] is not None
    assert final_state["errors"] == []


def test_non_member_path(swapped_state):
    """The infeasible branch ends at the certificate without a channel."""
    final_state = app.invoke(swapped_state)
    assert final_state["verdict"] == "non_member"
    assert final_state["channel"] is None, "No witness should be built for a non-member"
    assert final_state["certificate"].separator.gap > 0


def test_decompose_error_stops_the_graph(base_state):
    """A non-normal input is recorded as an error and nothing else runs."""
    base_state["x"] = np.array([[0, 1], [0, 0]], dtype=complex)
    final_state = app.invoke(base_state)
    assert final_state["errors"][0]["step"] == "decompose"
    assert final_state["errors"][0]["error_type"] == "PreconditionError"
    assert final_state["certificate"] is None
    assert final_state["verdict"] is None


def test_solver_failure_is_reported(mocker, mean_state):
    """Errors raised inside the LP surface as a majorize-step error."""
    mocker.patch("src.orbit_hull.nodes.is_majorized", side_effect=SolverError("iteration cap reached"))
    final_state = app.invoke(mean_state)
    assert final_state["errors"][0]["step"] == "majorize"
    assert final_state["verdict"] is None

    with pytest.raises(SolverError, match="iteration cap"):
        membership(mean_state["x"], mean_state["y"], tol=1e-7)


def test_synthesis_failure_is_reported(mocker, mean_state):
    """A peeling failure stops the graph before verification."""
    mocker.patch("src.orbit_hull.nodes.witness_channel", side_effect=DegeneracyError("no perfect matching"))
    final_state = app.invoke(mean_state)
    assert final_state["errors"][0]["step"] == "synthesize"
    assert final_state["achieved"] is None


def test_verification_failure_is_reported(mocker, mean_state):
    """A witness that misses x is never reported as a member."""
    mocker.patch("src.orbit_hull.nodes.operator_norm", return_value=1.0)
    with pytest.raises(VerificationError):
        membership(mean_state["x"], mean_state["y"], tol=1e-7)


def test_routing_functions(mean_state, swapped_state):
    assert should_continue_after_decompose(mean_state) == "next_step"
    assert should_continue_after_synthesize(mean_state) == "next_step"

    mean_state["certificate"] = is_majorized([1.5, 1.5], [1.0, 2.0])
    assert route_after_majorize(mean_state) == "member_step"
    swapped_state["certificate"] = is_majorized([1.0, 2.0], [1.5, 1.5])
    assert route_after_majorize(swapped_state) == "non_member_step"

    mean_state["errors"] = [{"step": "majorize", "error_type": "SolverError", "message": "boom"}]
    assert route_after_majorize(mean_state) == "end_step"
    assert should_continue_after_decompose(mean_state) == "end_step"
    assert should_continue_after_synthesize(mean_state) == "end_step"


def test_invalid_model_inside_a_node_is_recorded(mocker, mean_state):
    """A model that fails validation mid-pipeline becomes a recorded degeneracy, not a crash."""
    def broken_witness(*args):
        return DoublyStochastic(n=2, d=[[1.5, -0.5], [-0.5, 1.5]])

    mocker.patch("src.orbit_hull.nodes.witness_channel", side_effect=broken_witness)
    final_state = app.invoke(mean_state)
    assert final_state["errors"][0]["step"] == "synthesize"
    assert final_state["errors"][0]["error_type"] == "DegeneracyError"

    with pytest.raises(DegeneracyError, match="synthesize"):
        membership(mean_state["x"], mean_state["y"], tol=1e-7)
