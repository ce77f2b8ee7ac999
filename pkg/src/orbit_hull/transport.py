"""Nonnegative matrices with prescribed row and column sums (northwest-corner rule)."""
import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from .errors import BalanceError, DomainError, ShapeError
from .logger import get_logger

# Get the logger
logger = get_logger()

CLAMP = 1e-12


class TransportPlan(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    rows: int
    cols: int
    e: np.ndarray
    row_marginals: np.ndarray
    col_marginals: np.ndarray

    @model_validator(mode="after")
    def _check(self) -> "TransportPlan":
        if self.e.shape != (self.rows, self.cols):
            raise ValueError(f"plan has shape {self.e.shape}, expected ({self.rows}, {self.cols})")
        if np.any(self.e < 0):
            raise ValueError("plan entries must be nonnegative")
        slack = 1e-12 * max(1.0, float(self.row_marginals.sum()))
        if self.rows and np.abs(self.e.sum(axis=1) - self.row_marginals).max() > slack:
            raise ValueError("row sums do not match the row marginals")
        # columns absorb the rescaling of b, so they get the balance tolerance
        col_slack = 1e-10 * max(1.0, float(self.col_marginals.sum()))
        if self.cols and np.abs(self.e.sum(axis=0) - self.col_marginals).max() > col_slack:
            raise ValueError("column sums do not match the column marginals")
        return self

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.e))


def _marginal(values, name: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise ShapeError(f"{name} must be a vector, got shape {values.shape}")
    if np.any(values < -CLAMP):
        raise DomainError(f"{name} has a negative entry {values.min():.3e}")
    return np.where(values < 0, 0.0, values)


def riesz_interpolate(a, b) -> TransportPlan:
    """A plan with row sums ``a`` and column sums ``b`` by the northwest-corner rule."""
    a = _marginal(a, "a")
    b = _marginal(b, "b")
    total_a, total_b = a.sum(), b.sum()
    if abs(total_a - total_b) > 1e-10 * max(total_a, 1.0):
        raise BalanceError(f"marginals carry different mass: {total_a!r} vs {total_b!r}")
    scaled = b * (total_a / total_b) if total_b > 0 else b

    m, k = a.size, b.size
    e = np.zeros((m, k))
    supply, demand = a.copy(), scaled.copy()
    i = j = 0
    while i < m and j < k:
        amount = min(supply[i], demand[j])
        e[i, j] += amount
        supply[i] -= amount
        demand[j] -= amount
        if supply[i] <= 0:
            i += 1
        if demand[j] <= 0:
            j += 1
    if i < m and k:
        e[i:, -1] += supply[i:]

    logger.info(f"riesz_interpolate: {m}x{k}, support {np.count_nonzero(e)}")
    return TransportPlan(rows=m, cols=k, e=e, row_marginals=a, col_marginals=b)
