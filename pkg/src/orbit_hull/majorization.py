"""Complex majorization: lam is majorized by mu when lam = D mu for a doubly stochastic D.

The decision is an LP over the Birkhoff polytope with the residual measured in the box
norm max(|Re|, |Im|). Infeasible instances come back with a separating functional
read from the LP's Farkas certificate, and every separator is re-checked against the
permutation polytope through an assignment problem.
"""
import itertools
import math
from fractions import Fraction
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.optimize import linear_sum_assignment

from .errors import DegeneracyError, DomainError, ParameterError, ShapeError, SizeError
from .logger import get_logger
from .simplex import LPResult, solve_lp

# Get the logger
logger = get_logger()

ORACLE_MAX_N = 8
EXACT_MAX_N = 4
LP_DUST = 1e-9


class ComplexTuple(BaseModel):
    """Ordered eigenvalue list with repetitions."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    entries: np.ndarray

    @field_validator("entries", mode="before")
    @classmethod
    def _complex_entries(cls, value):
        return np.asarray(value, dtype=complex).reshape(-1)

    @model_validator(mode="after")
    def _non_empty(self) -> "ComplexTuple":
        if self.entries.size < 1:
            raise ValueError("a tuple needs at least one entry")
        return self

    def __len__(self) -> int:
        return self.entries.size


TupleLike = Union[ComplexTuple, np.ndarray, Sequence[complex]]


def as_tuple(values: TupleLike) -> ComplexTuple:
    return values if isinstance(values, ComplexTuple) else ComplexTuple(entries=values)


class DoublyStochastic(BaseModel):
    """Nonnegative square matrix with unit row and column sums."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int = Field(gt=0)
    d: np.ndarray

    @field_validator("d", mode="before")
    @classmethod
    def _real_entries(cls, value):
        return np.asarray(value, dtype=float)

    @model_validator(mode="after")
    def _check(self) -> "DoublyStochastic":
        if self.d.shape != (self.n, self.n):
            raise ValueError(f"matrix has shape {self.d.shape}, expected ({self.n}, {self.n})")
        if np.any(self.d < -1e-12):
            raise ValueError(f"negative entry {self.d.min():.3e}")
        rows = np.abs(self.d.sum(axis=1) - 1).max()
        cols = np.abs(self.d.sum(axis=0) - 1).max()
        if max(rows, cols) > 1e-10:
            raise ValueError(f"row/column sums deviate from 1 by {max(rows, cols):.3e}")
        return self

    @classmethod
    def from_array(cls, d) -> "DoublyStochastic":
        d = np.asarray(d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ShapeError(f"expected a square matrix, got shape {d.shape}")
        return cls(n=d.shape[0], d=d)


class Separator(BaseModel):
    """A functional c with Re<c, lam> > max over permutations of Re<c, P mu>."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    c: np.ndarray
    value: float = Field(description="Re<c, lam>.")
    offset: float = Field(description="max over permutations sigma of Re<c, P_sigma mu>.")

    @property
    def gap(self) -> float:
        return self.value - self.offset


class MajorizationCertificate(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    verdict: Literal["feasible", "infeasible"]
    witness: Optional[DoublyStochastic] = None
    separator: Optional[Separator] = None
    residual: Optional[float] = Field(default=None, description="max box residual of D mu - lam for the witness.")
    tol: float
    exact_witness: Optional[List[List[str]]] = Field(default=None, description="Witness entries as fractions in exact mode.")

    @model_validator(mode="after")
    def _one_side(self) -> "MajorizationCertificate":
        if (self.witness is None) == (self.separator is None):
            raise ValueError("exactly one of witness and separator must be present")
        if self.verdict == "feasible" and self.witness is None:
            raise ValueError("a feasible verdict needs a witness")
        if self.verdict == "infeasible" and self.separator is None:
            raise ValueError("an infeasible verdict needs a separator")
        return self


class HullDistanceReport(BaseModel):
    """Box distance from lam to the permutation hull of mu, with modulus bounds."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    box: float
    modulus_lower: float
    modulus_upper: float
    witness: DoublyStochastic


def polish_doubly_stochastic(d: np.ndarray, max_sweeps: int = 50) -> np.ndarray:
    """Clears solver dust from an almost doubly stochastic matrix.

    Entries down to -LP_DUST times the largest entry are clamped to zero, then Sinkhorn
    sweeps restore unit row and column sums. Zeros stay zero.
    """
    d = np.array(d, dtype=float)
    scale = max(float(np.abs(d).max()), 1.0)
    if d.min() < -LP_DUST * scale:
        raise DegeneracyError(f"solver returned entry {d.min():.3e}, far below zero")
    np.clip(d, 0.0, None, out=d)
    for _ in range(max_sweeps):
        d /= d.sum(axis=1, keepdims=True)
        d /= d.sum(axis=0, keepdims=True)
        if np.abs(d.sum(axis=1) - 1).max() <= 1e-14:
            break
    return d


def _pairing(c: np.ndarray, values: np.ndarray) -> float:
    return float(np.sum(c.real * values.real + c.imag * values.imag))


def max_pairing(c: np.ndarray, mu: TupleLike) -> float:
    """max over permutations sigma of Re<c, P_sigma mu>, by the assignment problem."""
    mu = as_tuple(mu).entries
    c = np.asarray(c, dtype=complex).reshape(-1)
    if c.size != mu.size:
        raise ShapeError(f"functional has length {c.size}, tuple has length {mu.size}")
    gains = np.outer(c.real, mu.real) + np.outer(c.imag, mu.imag)
    rows, cols = linear_sum_assignment(gains, maximize=True)
    return float(gains[rows, cols].sum())


def _pair(lam: TupleLike, mu: TupleLike) -> Tuple[np.ndarray, np.ndarray]:
    lam, mu = as_tuple(lam).entries, as_tuple(mu).entries
    if lam.size != mu.size:
        raise ShapeError(f"tuples differ in length: {lam.size} vs {mu.size}")
    return lam, mu


def _birkhoff_lp(lam: np.ndarray, mu: np.ndarray, tol: Optional[float]):
    """Variables d_ij (index i*n + j) followed by t; minimise t, the box residual."""
    n = lam.size
    size = n * n + 1
    a_eq = np.zeros((2 * n, size))
    for i in range(n):
        a_eq[i, i * n:(i + 1) * n] = 1.0
        a_eq[n + i, i:n * n:n] = 1.0
    b_eq = np.ones(2 * n)

    rows, rhs = [], []
    for i in range(n):
        for part, target in ((mu.real, lam.real[i]), (mu.imag, lam.imag[i])):
            for sign in (1.0, -1.0):
                row = np.zeros(size)
                row[i * n:(i + 1) * n] = sign * part
                row[-1] = -1.0
                rows.append(row)
                rhs.append(sign * target)
    if tol is not None:
        row = np.zeros(size)
        row[-1] = 1.0
        rows.append(row)
        rhs.append(tol)
    c = np.zeros(size)
    c[-1] = 1.0
    return c, a_eq, b_eq, np.array(rows), np.array(rhs)


def _witness_from(result: LPResult, n: int) -> DoublyStochastic:
    d = np.asarray(result.x[:n * n], dtype=float).reshape(n, n)
    return DoublyStochastic(n=n, d=polish_doubly_stochastic(d))


def _box_residual(d: np.ndarray, lam: np.ndarray, mu: np.ndarray) -> float:
    diff = d @ mu - lam
    return float(max(np.abs(diff.real).max(), np.abs(diff.imag).max()))


def _separator_from(result: LPResult, lam: np.ndarray, mu: np.ndarray) -> Separator:
    w = np.asarray(result.farkas_ub, dtype=float)
    n = lam.size
    blocks = w[:4 * n].reshape(n, 4)
    c = (blocks[:, 1] - blocks[:, 0]) + 1j * (blocks[:, 3] - blocks[:, 2])
    scale = np.abs(c).max()
    if scale > 0:
        c = c / scale
    separator = Separator(c=c, value=_pairing(c, lam), offset=max_pairing(c, mu))
    if separator.gap <= 0:
        logger.warning(f"separator gap {separator.gap:.3e} is not positive")
    return separator


def _check_exact(n: int, exact: bool) -> None:
    if exact and n > EXACT_MAX_N:
        raise ParameterError(f"exact mode supports n <= {EXACT_MAX_N}, got n={n}")


def is_majorized(lam: TupleLike, mu: TupleLike, tol: float = 1e-7, exact: bool = False) -> MajorizationCertificate:
    """Decides whether some doubly stochastic D has box residual ||D mu - lam|| <= tol.

    Among feasible D the returned witness minimises the residual.
    """
    lam, mu = _pair(lam, mu)
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    n = lam.size
    _check_exact(n, exact)
    c, a_eq, b_eq, a_ub, b_ub = _birkhoff_lp(lam, mu, tol)
    result = solve_lp(c, a_eq, b_eq, a_ub, b_ub, exact=exact)

    if result.status == "infeasible":
        separator = _separator_from(result, lam, mu)
        logger.info(f"is_majorized: n={n}, infeasible, separation gap {separator.gap:.3e}")
        return MajorizationCertificate(verdict="infeasible", separator=separator, tol=tol)

    witness = _witness_from(result, n)
    residual = _box_residual(witness.d, lam, mu)
    if residual > tol + 1e-12:
        logger.warning(f"witness residual {residual:.3e} exceeds tol {tol:.3e}")
    exact_witness = None
    if exact:
        exact_witness = [[str(Fraction(v)) for v in result.x[i * n:(i + 1) * n]] for i in range(n)]
    logger.info(f"is_majorized: n={n}, feasible, residual {residual:.3e}")
    return MajorizationCertificate(
        verdict="feasible",
        witness=witness,
        residual=residual,
        tol=tol,
        exact_witness=exact_witness,
    )


def perm_hull_oracle(lam: TupleLike, mu: TupleLike, tol: float = 1e-7) -> bool:
    """Brute force: is lam within tol (box) of conv{P_sigma mu} over all n! permutations."""
    lam, mu = _pair(lam, mu)
    n = lam.size
    if n > ORACLE_MAX_N:
        raise SizeError(f"oracle enumerates n! permutations; n={n} exceeds {ORACLE_MAX_N}")
    points = np.array([mu[list(perm)] for perm in itertools.permutations(range(n))]).T
    a_ub = np.vstack([points.real, -points.real, points.imag, -points.imag])
    b_ub = np.concatenate([lam.real + tol, -lam.real + tol, lam.imag + tol, -lam.imag + tol])
    count = points.shape[1]
    result = solve_lp(np.zeros(count), np.ones((1, count)), np.ones(1), a_ub, b_ub)
    return result.status == "optimal"


def real_majorization(lam: Sequence[float], mu: Sequence[float]) -> bool:
    """Classical partial-sum test on real tuples."""
    lam, mu = np.asarray(lam), np.asarray(mu)
    for values in (lam, mu):
        if np.iscomplexobj(values) and np.any(values.imag != 0):
            raise DomainError("real_majorization needs real entries")
    lam, mu = lam.real.astype(float).reshape(-1), mu.real.astype(float).reshape(-1)
    if lam.size != mu.size:
        raise ShapeError(f"tuples differ in length: {lam.size} vs {mu.size}")
    lam_sums = np.cumsum(np.sort(lam)[::-1])
    mu_sums = np.cumsum(np.sort(mu)[::-1])
    if abs(lam_sums[-1] - mu_sums[-1]) > 1e-10:
        return False
    return bool(np.all(lam_sums <= mu_sums + 1e-10))


def hull_distance_report(lam: TupleLike, mu: TupleLike, exact: bool = False) -> HullDistanceReport:
    lam, mu = _pair(lam, mu)
    n = lam.size
    _check_exact(n, exact)
    c, a_eq, b_eq, a_ub, b_ub = _birkhoff_lp(lam, mu, None)
    result = solve_lp(c, a_eq, b_eq, a_ub, b_ub, exact=exact)
    witness = _witness_from(result, n)
    box = max(float(result.objective), 0.0)
    return HullDistanceReport(box=box, modulus_lower=box, modulus_upper=math.sqrt(2) * box, witness=witness)


def hull_distance(lam: TupleLike, mu: TupleLike, exact: bool = False) -> float:
    """min over doubly stochastic D of the box residual of D mu - lam."""
    return hull_distance_report(lam, mu, exact).box


class ConvexTraceGaps(BaseModel):
    """sum g(mu_i) - sum g(lam_i) for g = |z - c| at each center, then g = |z|^2."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    centers: np.ndarray
    gaps: np.ndarray

    @property
    def holds(self) -> bool:
        return bool(np.all(self.gaps >= -1e-9))


def convex_trace_gaps(lam: TupleLike, mu: TupleLike, centers: Optional[Sequence[complex]] = None) -> ConvexTraceGaps:
    """Necessary condition for lam majorized by mu: every convex g has sum g(lam) <= sum g(mu)."""
    lam, mu = _pair(lam, mu)
    if centers is None:
        centers = np.concatenate([[0.0], lam, mu])
    centers = np.asarray(centers, dtype=complex).reshape(-1)
    gaps = [np.abs(mu - c).sum() - np.abs(lam - c).sum() for c in centers]
    gaps.append((np.abs(mu) ** 2).sum() - (np.abs(lam) ** 2).sum())
    return ConvexTraceGaps(centers=centers, gaps=np.array(gaps))
