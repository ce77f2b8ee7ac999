"""Transfer kernels between finite spectra.

A positive unital map C(X) -> C(Y) on finite sets is a row-stochastic kernel S with
(Psi f)(y) = sum_x S[y, x] f(x). The same kernel, read on measures, is the affine map
gamma(nu)_x = sum_y nu_y S[y, x]. Both feasibility problems are linear programs over S.
"""
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from .errors import ParameterError
from .logger import get_logger
from .simplex import solve_lp
from .spectra import DiscreteMeasure

# Get the logger
logger = get_logger()


class DiscreteTransferMap(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    source_support: np.ndarray
    target_support: np.ndarray
    s: np.ndarray

    @model_validator(mode="after")
    def _check(self) -> "DiscreteTransferMap":
        k, m = self.target_support.size, self.source_support.size
        if self.s.shape != (k, m):
            raise ValueError(f"kernel has shape {self.s.shape}, expected ({k}, {m})")
        if np.any(self.s < 0):
            raise ValueError("kernel entries must be nonnegative")
        if np.abs(self.s.sum(axis=1) - 1).max() > 1e-12:
            raise ValueError("kernel rows must be probability vectors")
        return self

    def __call__(self, f: np.ndarray) -> np.ndarray:
        """(Psi f)(y) for a function given by its values on the source support."""
        return self.s @ np.asarray(f)


class TransferReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    feasible: bool
    transfer: Optional[DiscreteTransferMap] = None
    eps: float
    degree: int
    test_functions: int


def monomial_exponents(degree: int) -> List[Tuple[int, int]]:
    """Pairs (a, b) with 1 <= a + b <= degree, for the test functions z^a conj(z)^b."""
    return [(a, total - a) for total in range(1, degree + 1) for a in range(total, -1, -1)]


def _monomial(points: np.ndarray, a: int, b: int) -> np.ndarray:
    return points ** a * np.conj(points) ** b


def _validate(eps: float, degree: int) -> None:
    if degree < 1:
        raise ParameterError(f"degree must be at least 1, got {degree}")
    if eps < 0:
        raise ParameterError(f"eps must be nonnegative, got {eps}")


def _kernel(x: np.ndarray, k: int, m: int) -> np.ndarray:
    s = np.asarray(x, dtype=float).reshape(k, m)
    s = np.where(s < 0, 0.0, s)
    return s / s.sum(axis=1, keepdims=True)


def check_condition4(mx: DiscreteMeasure, my: DiscreteMeasure, eps: float, degree: int = 3) -> TransferReport:
    """Is there a kernel moving the identity function within eps and preserving the trace of test functions?

    Constraints, assembled row by row: each row of S is a probability vector;
    |sum_x S[y, x] x - y| <= eps in Re and Im for every target point y; and for every
    monomial f, |sum_y w_y (S f)(y) - sum_x v_x f(x)| <= eps in Re and Im.
    """
    _validate(eps, degree)
    xs, ys = mx.support, my.support
    m, k = xs.size, ys.size
    size = k * m

    a_eq = np.zeros((k, size))
    for y in range(k):
        a_eq[y, y * m:(y + 1) * m] = 1.0
    b_eq = np.ones(k)

    rows, rhs = [], []
    for y in range(k):
        for part in (np.real, np.imag):
            for sign in (1.0, -1.0):
                row = np.zeros(size)
                row[y * m:(y + 1) * m] = sign * part(xs)
                rows.append(row)
                rhs.append(eps + sign * part(ys[y]))
    exponents = monomial_exponents(degree)
    for a, b in exponents:
        values = _monomial(xs, a, b)
        reference = np.dot(mx.weights, values)
        for part in (np.real, np.imag):
            for sign in (1.0, -1.0):
                row = np.zeros(size)
                for y in range(k):
                    row[y * m:(y + 1) * m] = sign * my.weights[y] * part(values)
                rows.append(row)
                rhs.append(eps + sign * part(reference))

    result = solve_lp(np.zeros(size), a_eq, b_eq, np.array(rows), np.array(rhs))
    feasible = result.status == "optimal"
    transfer = None
    if feasible:
        transfer = DiscreteTransferMap(source_support=xs, target_support=ys, s=_kernel(result.x, k, m))
    logger.info(f"check_condition4: |X|={m}, |Y|={k}, degree={degree}, feasible={feasible}")
    return TransferReport(
        feasible=feasible, transfer=transfer, eps=eps, degree=degree, test_functions=len(exponents)
    )


def check_condition5(mx: DiscreteMeasure, my: DiscreteMeasure, eps: float, degree: int = 3) -> TransferReport:
    """Is there an affine map gamma of measures on Y to measures on X with small barycentre drift?

    gamma is fixed by its values gamma(delta_y) on the Dirac measures. The barycentre
    condition is imposed at those extreme points; the trace condition compares
    gamma(my) with mx on every monomial. Assembled column-wise over the Dirac images.
    """
    _validate(eps, degree)
    xs, ys = mx.support, my.support
    m, k = xs.size, ys.size
    identity_k = np.eye(k)

    a_eq = np.kron(identity_k, np.ones((1, m)))
    b_eq = np.ones(k)

    barycentre = np.vstack([np.kron(identity_k, xs.real[None, :]), np.kron(identity_k, xs.imag[None, :])])
    targets = np.concatenate([ys.real, ys.imag])
    exponents = monomial_exponents(degree)
    moments = np.array([_monomial(xs, a, b) for a, b in exponents])
    pushed = np.kron(my.weights[None, :], moments)
    references = moments @ mx.weights
    trace = np.vstack([pushed.real, pushed.imag])
    trace_targets = np.concatenate([references.real, references.imag])

    a_ub = np.vstack([barycentre, -barycentre, trace, -trace])
    b_ub = np.concatenate([eps + targets, eps - targets, eps + trace_targets, eps - trace_targets])
    result = solve_lp(np.zeros(k * m), a_eq, b_eq, a_ub, b_ub)
    feasible = result.status == "optimal"
    gamma = None
    if feasible:
        gamma = DiscreteTransferMap(source_support=xs, target_support=ys, s=_kernel(result.x, k, m))
    logger.info(f"check_condition5: |X|={m}, |Y|={k}, degree={degree}, feasible={feasible}")
    return TransferReport(
        feasible=feasible, transfer=gamma, eps=eps, degree=degree, test_functions=len(exponents)
    )


def pushback(gamma: DiscreteTransferMap, nu: DiscreteMeasure) -> DiscreteMeasure:
    """gamma(nu)_x = sum_y nu_y S[y, x], a measure on the source support."""
    if nu.support.size != gamma.target_support.size or np.any(nu.support != gamma.target_support):
        raise ParameterError("nu must live on the target support of gamma")
    weights = nu.weights @ gamma.s
    return DiscreteMeasure(support=gamma.source_support, weights=weights / weights.sum())
