"""Normal matrices, their spectral forms and tracial spectral measures."""
from typing import List, Optional, Union

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import PreconditionError, ShapeError
from .logger import get_logger

# Get the logger
logger = get_logger()

ArrayLike = Union[np.ndarray, list]


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def _square(m: ArrayLike) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ShapeError(f"expected a non-empty square matrix, got shape {m.shape}")
    return m


class NormalityReport(BaseModel):
    defect: float = Field(description="Operator norm of M*M - MM*.")
    tol: float
    passed: bool


def check_normality(m: ArrayLike, tol: Optional[float] = None) -> NormalityReport:
    """Measures how far ``m`` is from commuting with its adjoint."""
    m = _square(m)
    if tol is None:
        tol = 1e-10 * operator_norm(m) ** 2
    adjoint = m.conj().T
    defect = operator_norm(adjoint @ m - m @ adjoint)
    return NormalityReport(defect=defect, tol=tol, passed=defect <= tol)


class NormalMatrix(BaseModel):
    """A square complex matrix whose normality defect is within the construction tolerance."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dim: int = Field(gt=0)
    entries: np.ndarray
    normality_defect: float = Field(ge=0)
    tol: Optional[float] = Field(default=None, description="Normality tolerance; 1e-10 * ||M||^2 when unset.")

    @field_validator("entries", mode="before")
    @classmethod
    def _complex_entries(cls, value):
        return np.asarray(value, dtype=complex)

    @model_validator(mode="after")
    def _check(self) -> "NormalMatrix":
        if self.entries.shape != (self.dim, self.dim):
            raise ValueError(f"entries have shape {self.entries.shape}, expected ({self.dim}, {self.dim})")
        tol = self.tol if self.tol is not None else 1e-10 * self.norm ** 2
        if self.normality_defect > tol:
            raise ValueError(f"normality defect {self.normality_defect:.3e} exceeds tolerance {tol:.3e}")
        return self

    @property
    def norm(self) -> float:
        return operator_norm(self.entries)

    @classmethod
    def from_array(cls, m: ArrayLike, tol: Optional[float] = None) -> "NormalMatrix":
        report = check_normality(m, tol)
        if not report.passed:
            raise PreconditionError(f"matrix is not normal: defect {report.defect:.3e} > tol {report.tol:.3e}")
        m = np.asarray(m, dtype=complex)
        return cls(dim=m.shape[0], entries=m, normality_defect=report.defect, tol=report.tol)


class SpectralForm(BaseModel):
    """Distinct eigenvalues, their multiplicities and a unitary eigenframe.

    The frame's columns are ordered so that each eigenvalue's eigenvectors are
    contiguous, in the order of ``values``.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    multiplicities: List[int]
    frame: np.ndarray
    diagonal: Optional[np.ndarray] = Field(
        default=None, description="Unrounded eigenvalue of each frame column; group values are means over it."
    )

    @field_validator("values", mode="before")
    @classmethod
    def _complex_values(cls, value):
        return np.asarray(value, dtype=complex).reshape(-1)

    @field_validator("frame", mode="before")
    @classmethod
    def _complex_frame(cls, value):
        return np.asarray(value, dtype=complex)

    @field_validator("diagonal", mode="before")
    @classmethod
    def _complex_diagonal(cls, value):
        return None if value is None else np.asarray(value, dtype=complex).reshape(-1)

    @model_validator(mode="after")
    def _check(self) -> "SpectralForm":
        if len(self.values) != len(self.multiplicities):
            raise ValueError("values and multiplicities differ in length")
        if any(k <= 0 for k in self.multiplicities):
            raise ValueError("multiplicities must be positive")
        n = sum(self.multiplicities)
        if self.frame.shape != (n, n):
            raise ValueError(f"frame has shape {self.frame.shape}, expected ({n}, {n})")
        if self.diagonal is not None and self.diagonal.size != n:
            raise ValueError(f"diagonal has {self.diagonal.size} entries, expected {n}")
        if operator_norm(self.frame.conj().T @ self.frame - np.eye(n)) > 1e-10:
            raise ValueError("frame is not unitary")
        for i in range(len(self.values)):
            for j in range(i):
                if self.values[i] == self.values[j]:
                    raise ValueError(f"eigenvalue {self.values[i]} listed twice")
        return self

    @property
    def dim(self) -> int:
        return sum(self.multiplicities)

    def expanded_values(self) -> np.ndarray:
        """Eigenvalues repeated by multiplicity, aligned with the frame's columns."""
        return np.repeat(self.values, self.multiplicities)

    def eigenvalues(self) -> np.ndarray:
        """Per-column eigenvalues without group rounding, falling back to the grouped values."""
        return self.diagonal if self.diagonal is not None else self.expanded_values()

    def group_indices(self) -> List[List[int]]:
        bounds = np.cumsum([0] + list(self.multiplicities))
        return [list(range(bounds[k], bounds[k + 1])) for k in range(len(self.multiplicities))]

    def reconstruct(self) -> np.ndarray:
        return (self.frame * self.eigenvalues()) @ self.frame.conj().T


class DiscreteMeasure(BaseModel):
    """Finitely supported probability measure on the complex plane."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    support: np.ndarray
    weights: np.ndarray

    @field_validator("support", mode="before")
    @classmethod
    def _complex_support(cls, value):
        return np.asarray(value, dtype=complex).reshape(-1)

    @field_validator("weights", mode="before")
    @classmethod
    def _real_weights(cls, value):
        return np.asarray(value, dtype=float).reshape(-1)

    @model_validator(mode="after")
    def _check(self) -> "DiscreteMeasure":
        if self.support.shape != self.weights.shape or self.support.size == 0:
            raise ValueError("support and weights must be non-empty and of equal length")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {self.weights.sum()!r}, not 1")
        if len(np.unique(self.support)) != self.support.size:
            raise ValueError("support points must be pairwise distinct")
        return self


def spectral_decompose(m: NormalMatrix, group_tol: Optional[float] = None) -> SpectralForm:
    """Eigendecomposition of a normal matrix through its complex Schur form.

    Diagonal entries of the triangular factor closer than ``group_tol`` to an earlier
    group's first member join that group; the group value is the mean of its members.
    """
    if not isinstance(m, NormalMatrix):
        m = NormalMatrix.from_array(m)
    scale = m.norm
    if group_tol is None:
        group_tol = 1e-8 * scale
    triangular, unitary = scipy.linalg.schur(m.entries, output="complex")
    off_diagonal = operator_norm(np.triu(triangular, k=1))
    if off_diagonal > 1e-8 * max(scale, 1e-300):
        raise PreconditionError(f"Schur factor is not diagonal: off-diagonal norm {off_diagonal:.3e}")

    diagonal = np.diag(triangular)
    leaders: List[complex] = []
    members: List[List[int]] = []
    for index, value in enumerate(diagonal):
        for k, leader in enumerate(leaders):
            if abs(value - leader) <= group_tol:
                members[k].append(index)
                break
        else:
            leaders.append(value)
            members.append([index])

    values = np.array([diagonal[group].mean() for group in members])
    order = [index for group in members for index in group]
    logger.info(f"spectral_decompose: dim={m.dim}, {len(values)} distinct eigenvalues")
    return SpectralForm(
        values=values,
        multiplicities=[len(group) for group in members],
        frame=unitary[:, order],
        diagonal=diagonal[order],
    )


def tracial_spectral_measure(m: NormalMatrix, group_tol: Optional[float] = None) -> DiscreteMeasure:
    """Eigenvalues weighted by multiplicity over dimension."""
    form = spectral_decompose(m, group_tol)
    weights = np.asarray(form.multiplicities, dtype=float) / form.dim
    return DiscreteMeasure(support=form.values, weights=weights)


def measures_equal(first: DiscreteMeasure, second: DiscreteMeasure, tol: float = 1e-8) -> bool:
    """Weighted-multiset equality: supports match within ``tol`` and weights within 1e-10."""
    if first.support.size != second.support.size:
        return False
    unused = list(range(second.support.size))
    for point, weight in zip(first.support, first.weights):
        match = next((j for j in unused if abs(second.support[j] - point) <= tol), None)
        if match is None or abs(second.weights[match] - weight) > 1e-10:
            return False
        unused.remove(match)
    return True


def spectra_equal(x: NormalMatrix, y: NormalMatrix, tol: Optional[float] = None) -> bool:
    """Set equality of spectra, ignoring multiplicities."""
    if tol is None:
        tol = 1e-8 * max(x.norm, y.norm, 1.0)
    first = spectral_decompose(x).values
    second = spectral_decompose(y).values
    covered = all(np.min(np.abs(second - value)) <= tol for value in first)
    return covered and all(np.min(np.abs(first - value)) <= tol for value in second)
