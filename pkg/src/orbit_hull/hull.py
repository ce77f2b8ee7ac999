"""Membership of a normal matrix in the closed convex hull of another's unitary orbit."""
import asyncio
import math
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import get_settings
from .cpmaps import MixedUnitaryChannel, apply, compose, witness_channel
from .errors import ERROR_TYPES, ParameterError, PreconditionError, ShapeError
from .graph import app
from .logger import get_logger
from .majorization import Separator, hull_distance_report, perm_hull_oracle
from .spectra import (
    NormalMatrix,
    measures_equal,
    operator_norm,
    spectra_equal,
    spectral_decompose,
    tracial_spectral_measure,
)
from .state import MembershipState

# Get the logger
logger = get_logger()

MatrixLike = Union[NormalMatrix, np.ndarray]


class MembershipResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    verdict: Literal["member", "non_member"]
    witness: Optional[MixedUnitaryChannel] = None
    achieved: Optional[float] = Field(default=None, description="||x - witness(y)|| measured after synthesis.")
    certificate: Optional[Separator] = None
    tol: float
    x: np.ndarray
    y: np.ndarray
    lam: np.ndarray
    mu: np.ndarray

    @model_validator(mode="after")
    def _check(self) -> "MembershipResult":
        if self.verdict == "member":
            if self.witness is None or self.achieved is None:
                raise ValueError("a member verdict needs a witness")
            if self.achieved > self.tol:
                raise ValueError(f"witness error {self.achieved:.3e} exceeds tol {self.tol:.3e}")
        elif self.certificate is None:
            raise ValueError("a non-member verdict needs a separating functional")
        return self


def _entries(m: MatrixLike) -> np.ndarray:
    return m.entries if isinstance(m, NormalMatrix) else np.asarray(m, dtype=complex)


def membership(x: MatrixLike, y: MatrixLike, tol: Optional[float] = None, exact: bool = False) -> MembershipResult:
    """Decides x in closure conv U(y) and returns a verified witness or a separator."""
    if tol is None:
        tol = get_settings().tol
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    initial_state = MembershipState(
        x=_entries(x),
        y=_entries(y),
        tol=tol,
        exact=exact,
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
    final_state = app.invoke(initial_state)

    if final_state.get("errors"):
        error = final_state["errors"][0]
        raise ERROR_TYPES.get(error["error_type"], PreconditionError)(f"[{error['step']}] {error['message']}")

    certificate = final_state["certificate"]
    return MembershipResult(
        verdict=final_state["verdict"],
        witness=final_state.get("channel"),
        achieved=final_state.get("achieved"),
        certificate=certificate.separator,
        tol=tol,
        x=final_state["x"],
        y=final_state["y"],
        lam=final_state["lam"],
        mu=final_state["mu"],
    )


async def membership_batch(
    pairs: Sequence[Tuple[MatrixLike, MatrixLike]],
    tol: Optional[float] = None,
) -> List[MembershipResult]:
    """Evaluates independent pairs concurrently in worker threads; results keep input order."""
    logger.info(f"--- Running {len(pairs)} membership checks concurrently ---")
    tasks = [asyncio.to_thread(membership, x, y, tol) for x, y in pairs]
    return list(await asyncio.gather(*tasks))


class ComposedWitness(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    channel: MixedUnitaryChannel
    achieved: float
    bound: float = Field(description="Sum of the two component errors.")


def compose_witnesses(xy: MembershipResult, yz: MembershipResult) -> ComposedWitness:
    """From x ~ Phi(y) and y ~ Psi(z), the channel Phi o Psi with error at most the sum."""
    if xy.verdict != "member" or yz.verdict != "member":
        raise PreconditionError("both results must be member verdicts")
    if xy.y.shape != yz.x.shape or not np.allclose(xy.y, yz.x, atol=1e-12):
        raise ShapeError("the middle matrices of the two results differ")
    channel = compose(xy.witness, yz.witness)
    achieved = operator_norm(xy.x - apply(channel, yz.y))
    bound = xy.achieved + yz.achieved
    logger.info(f"compose_witnesses: achieved {achieved:.3e}, bound {bound:.3e}")
    return ComposedWitness(channel=channel, achieved=achieved, bound=bound)


class MutualReport(BaseModel):
    xy: Literal["member", "non_member"]
    yx: Literal["member", "non_member"]
    spectra_equal: bool
    measures_equal: bool
    consistent: bool = Field(description="Both-way membership holds exactly when the spectral measures agree.")
    oracle_xy: Optional[bool] = None
    oracle_yx: Optional[bool] = None


def mutual_membership(x: MatrixLike, y: MatrixLike, tol: Optional[float] = None, oracle: bool = False) -> MutualReport:
    """Runs membership both ways and compares spectra and tracial spectral measures."""
    forward = membership(x, y, tol)
    backward = membership(y, x, tol)
    x_matrix = NormalMatrix.from_array(forward.x)
    y_matrix = NormalMatrix.from_array(forward.y)
    same_spectra = spectra_equal(x_matrix, y_matrix)
    same_measures = measures_equal(tracial_spectral_measure(x_matrix), tracial_spectral_measure(y_matrix))
    both = forward.verdict == "member" and backward.verdict == "member"
    oracle_xy = oracle_yx = None
    if oracle:
        box = forward.tol / math.sqrt(2)
        oracle_xy = perm_hull_oracle(forward.lam, forward.mu, box)
        oracle_yx = perm_hull_oracle(backward.lam, backward.mu, box)
    report = MutualReport(
        xy=forward.verdict,
        yx=backward.verdict,
        spectra_equal=same_spectra,
        measures_equal=same_measures,
        consistent=both == same_measures,
        oracle_xy=oracle_xy,
        oracle_yx=oracle_yx,
    )
    if not report.consistent:
        logger.error(f"Mutual membership {both} disagrees with spectral measure equality {same_measures}")
    return report


class DistanceBound(BaseModel):
    lower: float = Field(description="Box distance between eigenvalue tuples; at most the modulus distance.")
    upper: float = Field(description="Operator-norm error of the witness built from the LP-optimal D.")
    modulus_upper: float = Field(description="sqrt(2) times the box distance.")


def distance_bound(x: MatrixLike, y: MatrixLike) -> DistanceBound:
    x = x if isinstance(x, NormalMatrix) else NormalMatrix.from_array(x)
    y = y if isinstance(y, NormalMatrix) else NormalMatrix.from_array(y)
    if x.dim != y.dim:
        raise ShapeError(f"x has dimension {x.dim}, y has dimension {y.dim}")
    x_form, y_form = spectral_decompose(x), spectral_decompose(y)
    report = hull_distance_report(x_form.eigenvalues(), y_form.eigenvalues())
    channel = witness_channel(report.witness, y_form.frame, x_form.frame)
    upper = operator_norm(x.entries - apply(channel, y.entries))
    logger.info(f"distance_bound: lower {report.box:.3e}, upper {upper:.3e}")
    return DistanceBound(lower=report.box, upper=upper, modulus_upper=report.modulus_upper)
