"""Dense two-phase tableau simplex.

Minimises ``c @ x`` subject to ``a_eq @ x == b_eq``, ``a_ub @ x <= b_ub`` and ``x >= 0``.
Bland's rule picks both the entering and the leaving variable, so degenerate problems
terminate. The same code runs over float64 or, with ``exact=True``, over
``fractions.Fraction`` object arrays.

An infeasible problem comes back with a Farkas certificate ``(y_eq, w_ub)``, ``w_ub >= 0``,
satisfying ``a_eq.T @ y_eq <= a_ub.T @ w_ub`` componentwise and
``b_eq @ y_eq > b_ub @ w_ub``. It is read off the phase-one reduced costs of the
artificial columns.
"""
from fractions import Fraction
from typing import Any, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .errors import ShapeError, SolverError
from .logger import get_logger

# Get the logger
logger = get_logger()


class LPResult(BaseModel):
    """Outcome of one call to :func:`solve_lp`."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    status: Literal["optimal", "infeasible", "unbounded"]
    x: Optional[np.ndarray] = Field(default=None, description="Primal optimum, present when status is optimal.")
    objective: Optional[Any] = Field(default=None, description="c @ x at the optimum.")
    farkas_eq: Optional[np.ndarray] = Field(default=None, description="Multipliers of the equality rows when infeasible.")
    farkas_ub: Optional[np.ndarray] = Field(default=None, description="Nonnegative multipliers of the inequality rows when infeasible.")
    iterations: int = Field(default=0, description="Total pivots over both phases.")
    exact: bool = False


def _to_fraction(array: np.ndarray) -> np.ndarray:
    out = np.empty(array.shape, dtype=object)
    for index, value in np.ndenumerate(array):
        out[index] = value if isinstance(value, Fraction) else Fraction(float(value))
    return out


def _block(a, b, n: int, name: str) -> Tuple[np.ndarray, np.ndarray]:
    if a is None and b is None:
        return np.zeros((0, n)), np.zeros(0)
    if a is None or b is None:
        raise ShapeError(f"a_{name} and b_{name} must be given together")
    a = np.asarray(a)
    b = np.asarray(b).reshape(-1)
    if a.ndim != 2 or a.shape[1] != n or a.shape[0] != b.shape[0]:
        raise ShapeError(f"a_{name} has shape {a.shape}, expected ({b.shape[0]}, {n})")
    return a, b


def _pivot(t: np.ndarray, row: int, col: int, exact: bool) -> None:
    t[row] = t[row] / t[row, col]
    factor = t[:, col].copy()
    factor[row] = 0
    t -= np.outer(factor, t[row])
    t[:, col] = 0
    t[row, col] = 1
    if not exact:
        rhs = t[:-1, -1]
        rhs[(rhs < 0) & (rhs > -1e-12)] = 0.0


def _iterate(
    t: np.ndarray,
    basis: List[int],
    n_allowed: int,
    tol,
    exact: bool,
    max_iter: int,
    iterations: int,
) -> Tuple[str, int]:
    m = len(basis)
    while True:
        entering = np.flatnonzero(t[-1, :n_allowed] < -tol)
        if entering.size == 0:
            return "optimal", iterations
        col = int(entering[0])
        column = t[:m, col]
        rows = np.flatnonzero(column > tol)
        if rows.size == 0:
            return "unbounded", iterations
        ratios = t[rows, -1] / column[rows]
        best = ratios.min()
        slack = tol if exact else tol * (1 + abs(best))
        ties = rows[ratios <= best + slack]
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(t, row, col, exact)
        basis[row] = col
        iterations += 1
        if iterations > max_iter:
            raise SolverError(f"simplex exceeded {max_iter} pivots")


def solve_lp(
    c,
    a_eq=None,
    b_eq=None,
    a_ub=None,
    b_ub=None,
    exact: bool = False,
    tol: float = 1e-9,
    max_iter: Optional[int] = None,
) -> LPResult:
    """Solves a standard-form LP with the two-phase tableau method."""
    c = np.asarray(c).reshape(-1)
    n = c.shape[0]
    a_eq, b_eq = _block(a_eq, b_eq, n, "eq")
    a_ub, b_ub = _block(a_ub, b_ub, n, "ub")
    m_eq, m_ub = b_eq.shape[0], b_ub.shape[0]
    m = m_eq + m_ub
    n_total = n + m_ub
    if max_iter is None:
        max_iter = 1000 + 50 * (m + n_total)

    dtype = object if exact else float
    a = np.zeros((m, n_total), dtype=dtype)
    a[:m_eq, :n] = a_eq
    a[m_eq:, :n] = a_ub
    a[m_eq:, n:] = np.eye(m_ub, dtype=int)
    b = np.concatenate([b_eq, b_ub]).astype(dtype)
    costs = np.concatenate([c, np.zeros(m_ub)]).astype(dtype)
    if exact:
        a, b, costs = _to_fraction(a), _to_fraction(b), _to_fraction(costs)
        tol = Fraction(0)

    signs = np.where(b < 0, -1, 1)
    a = a * signs[:, None]
    b = b * signs

    zero = Fraction(0) if exact else 0.0
    t = np.full((m + 1, n_total + m + 1), zero, dtype=dtype)
    t[:m, :n_total] = a
    t[:m, n_total:n_total + m] = np.eye(m, dtype=int)
    t[:m, -1] = b
    t[-1, :n_total] = -a.sum(axis=0)
    t[-1, -1] = -b.sum()
    basis = list(range(n_total, n_total + m))

    status, iterations = _iterate(t, basis, n_total, tol, exact, max_iter, 0)
    infeasibility = -t[-1, -1]
    threshold = 0 if exact else tol * max(1.0, float(np.max(np.abs(b), initial=0.0)))
    logger.debug(f"simplex phase one: {iterations} pivots, residual {float(infeasibility):.3e}")

    if infeasibility > threshold:
        duals = (1 - t[-1, n_total:n_total + m]) * signs
        farkas_ub = -duals[m_eq:]
        if not exact:
            farkas_ub = np.maximum(farkas_ub.astype(float), 0.0)
        return LPResult(
            status="infeasible",
            farkas_eq=duals[:m_eq],
            farkas_ub=farkas_ub,
            iterations=iterations,
            exact=exact,
        )

    # Drive artificial variables out of the basis; rows where that is impossible are redundant.
    keep = []
    for row in range(m):
        if basis[row] < n_total:
            keep.append(row)
            continue
        candidates = np.flatnonzero(np.abs(t[row, :n_total]) > tol)
        if candidates.size == 0:
            continue
        col = int(candidates[0])
        _pivot(t, row, col, exact)
        basis[row] = col
        keep.append(row)
    if len(keep) < m:
        logger.debug(f"simplex dropped {m - len(keep)} redundant equality rows")

    columns = list(range(n_total)) + [n_total + m]
    t = t[np.ix_(keep + [m], columns)]
    basis = [basis[row] for row in keep]
    basic_costs = costs[basis]
    t[-1, :n_total] = costs - basic_costs @ t[:-1, :n_total]
    t[-1, -1] = -(basic_costs @ t[:-1, -1])

    status, iterations = _iterate(t, basis, n_total, tol, exact, max_iter, iterations)
    logger.debug(f"simplex finished: {status} after {iterations} pivots")
    if status == "unbounded":
        return LPResult(status="unbounded", iterations=iterations, exact=exact)

    x = np.full(n_total, zero, dtype=dtype)
    x[basis] = t[:-1, -1]
    x = x[:n]
    objective = costs[:n] @ x
    return LPResult(status="optimal", x=x, objective=objective, iterations=iterations, exact=exact)
