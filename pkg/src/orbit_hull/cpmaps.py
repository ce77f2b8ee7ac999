"""
Mixed-unitary channels, pinchings and the stochastic matrix read off a channel.

A mixed-unitary channel acts as ``a -> sum_i t_i U_i* a U_i``. Channels built from a
doubly stochastic matrix D use one permutation unitary per Birkhoff term, so that
``diag(mu)`` is sent to ``diag(D mu)``.
"""

from __future__ import annotations

from typing import Callable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .birkhoff import decompose, permutation_matrix
from .errors import DomainError, ShapeError
from .logger import get_logger
from .majorization import DoublyStochastic
from .spectra import operator_norm

# Get the logger
logger = get_logger()


class ChannelTerm(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    weight: float = Field(gt=0, le=1 + 1e-12)
    unitary: np.ndarray

    @field_validator("unitary", mode="before")
    @classmethod
    def _complex_unitary(cls, value):
        return np.asarray(value, dtype=complex)


class MixedUnitaryChannel(BaseModel):
    """Convex combination of unitary conjugations; unital and trace preserving."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dim: int = Field(gt=0)
    terms: List[ChannelTerm]

    @model_validator(mode="after")
    def _check(self) -> "MixedUnitaryChannel":
        if not self.terms:
            raise ValueError("a channel needs at least one term")
        total = sum(term.weight for term in self.terms)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total!r}, not 1")
        identity = np.eye(self.dim)
        for term in self.terms:
            if term.unitary.shape != (self.dim, self.dim):
                raise ValueError(f"unitary has shape {term.unitary.shape}, expected ({self.dim}, {self.dim})")
            if operator_norm(term.unitary.conj().T @ term.unitary - identity) > 1e-10:
                raise ValueError("term is not unitary")
        return self

    @classmethod
    def identity(cls, dim: int) -> "MixedUnitaryChannel":
        return cls(dim=dim, terms=[ChannelTerm(weight=1.0, unitary=np.eye(dim))])

    @property
    def weights(self) -> np.ndarray:
        return np.array([term.weight for term in self.terms])

    @property
    def unitaries(self) -> np.ndarray:
        return np.stack([term.unitary for term in self.terms])

    def __call__(self, m: np.ndarray) -> np.ndarray:
        return apply(self, m)


class FunctionChannel(BaseModel):
    """A channel known only through its action on dim x dim matrices."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dim: int = Field(gt=0)
    action: Callable[[np.ndarray], np.ndarray]

    def __call__(self, m: np.ndarray) -> np.ndarray:
        return np.asarray(self.action(np.asarray(m, dtype=complex)), dtype=complex)


class SpectralGrouping(BaseModel):
    """Index sets S_k of equal eigenvalues and their common values."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    groups: List[List[int]]
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _complex_values(cls, value):
        return np.asarray(value, dtype=complex).reshape(-1)

    @model_validator(mode="after")
    def _check(self) -> "SpectralGrouping":
        if len(self.groups) != self.values.size:
            raise ValueError("one value per group is required")
        flat = sorted(index for group in self.groups for index in group)
        if flat != list(range(len(flat))) or any(not group for group in self.groups):
            raise ValueError("groups must partition 0..n-1 into non-empty sets")
        return self

    @property
    def n(self) -> int:
        return sum(len(group) for group in self.groups)

    @classmethod
    def from_values(cls, mu: Sequence[complex], tol: float = 1e-10) -> "SpectralGrouping":
        """Groups equal entries of ``mu`` in order of first appearance."""
        mu = np.asarray(mu, dtype=complex).reshape(-1)
        groups: List[List[int]] = []
        for index, value in enumerate(mu):
            for group in groups:
                if abs(mu[group[0]] - value) <= tol:
                    group.append(index)
                    break
            else:
                groups.append([index])
        return cls(groups=groups, values=[mu[group[0]] for group in groups])

    @classmethod
    def full_diagonal(cls, n: int) -> "SpectralGrouping":
        return cls(groups=[[i] for i in range(n)], values=np.zeros(n))

    def projection(self, k: int) -> np.ndarray:
        q = np.zeros((self.n, self.n))
        q[self.groups[k], self.groups[k]] = 1.0
        return q


Channel = MixedUnitaryChannel | FunctionChannel


def _square(m: np.ndarray, dim: int) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (dim, dim):
        raise ShapeError(f"matrix has shape {m.shape}, channel acts on ({dim}, {dim})")
    return m


def apply(channel: Channel, m: np.ndarray) -> np.ndarray:
    """
    Apply a channel to a square matrix.

    Parameters
    ----------
    channel : MixedUnitaryChannel or FunctionChannel
        The map to apply.
    m : np.ndarray
        A ``dim x dim`` complex matrix.

    Returns
    -------
    np.ndarray
        ``sum_i t_i U_i* m U_i`` for a mixed-unitary channel, or the supplied action.
    """
    m = _square(m, channel.dim)
    if isinstance(channel, FunctionChannel):
        return channel(m)
    unitaries = channel.unitaries
    return np.einsum("k,kba,bc,kcd->ad", channel.weights, unitaries.conj(), m, unitaries, optimize=True)


def witness_channel(d: DoublyStochastic, y_frame: np.ndarray, x_frame: np.ndarray) -> MixedUnitaryChannel:
    """
    Channel sending ``Fy diag(mu) Fy*`` to ``Fx diag(D mu) Fx*``.

    Each Birkhoff term (t, sigma) of D contributes the unitary ``Fy P_sigma^T Fx*``.

    Parameters
    ----------
    d : DoublyStochastic
        Matrix acting as lam = D mu.
    y_frame, x_frame : np.ndarray
        Unitary eigenframes of the source and the target.
    """
    if not isinstance(d, DoublyStochastic):
        d = DoublyStochastic.from_array(d)
    y_frame = _square(y_frame, d.n)
    x_frame = _square(x_frame, d.n)
    combination = decompose(d)
    terms = [
        ChannelTerm(weight=term.weight, unitary=y_frame @ permutation_matrix(term.perm).T @ x_frame.conj().T)
        for term in combination.terms
    ]
    return MixedUnitaryChannel(dim=d.n, terms=terms)


def channel_from_ds(d: DoublyStochastic, frame: Optional[np.ndarray] = None) -> MixedUnitaryChannel:
    """sum_sigma t_sigma Ad(F P_sigma^T F*); identity frame by default."""
    if not isinstance(d, DoublyStochastic):
        d = DoublyStochastic.from_array(d)
    if frame is None:
        frame = np.eye(d.n)
    return witness_channel(d, frame, frame)


def compose(outer: MixedUnitaryChannel, inner: MixedUnitaryChannel) -> MixedUnitaryChannel:
    """The channel a -> outer(inner(a))."""
    if outer.dim != inner.dim:
        raise ShapeError(f"cannot compose channels on {outer.dim} and {inner.dim} dimensions")
    terms = [
        ChannelTerm(weight=s.weight * t.weight, unitary=t.unitary @ s.unitary)
        for s in outer.terms
        for t in inner.terms
    ]
    return MixedUnitaryChannel(dim=outer.dim, terms=terms)


def pinch(m: np.ndarray, grouping: Optional[SpectralGrouping] = None) -> np.ndarray:
    """Keeps the diagonal blocks of ``grouping``; only the diagonal when no grouping is given."""
    m = np.asarray(m, dtype=complex)
    if grouping is None:
        return np.diag(np.diag(m))
    labels = np.empty(grouping.n, dtype=int)
    for k, group in enumerate(grouping.groups):
        labels[group] = k
    return np.where(labels[:, None] == labels[None, :], m, 0)


class ExtractedMatrix(BaseModel):
    """Stochastic matrix read off a channel, oriented so that lam = D mu."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    d: np.ndarray
    output_sums: np.ndarray = Field(description="Row sums; all ones exactly when the channel is unital.")
    input_sums: np.ndarray = Field(description="Column sums tau(Phi(Q_k)) / tau(Q_k); ones when trace compatible.")
    unital: bool


def ds_from_channel(
    channel: Channel,
    mu: Sequence[complex],
    grouping: Optional[SpectralGrouping] = None,
) -> ExtractedMatrix:
    """
    Entry [j, i] = Tr(e_j Phi(Q_k) e_j) / |S_k| for i in S_k.

    Parameters
    ----------
    channel : MixedUnitaryChannel or FunctionChannel
        The map Phi, in the basis where ``diag(mu)`` is the source.
    mu : sequence of complex
        Source eigenvalues.
    grouping : SpectralGrouping, optional
        Index sets of equal eigenvalues; derived from ``mu`` when omitted.

    Returns
    -------
    ExtractedMatrix
        Row sums are one for unital channels; column sums measure trace compatibility
        on the Q_k, and are not forced to one.
    """
    mu = np.asarray(mu, dtype=complex).reshape(-1)
    n = mu.size
    if channel.dim != n:
        raise ShapeError(f"channel acts on dimension {channel.dim}, mu has length {n}")
    if grouping is None:
        grouping = SpectralGrouping.from_values(mu)
    if grouping.n != n:
        raise ShapeError(f"grouping covers {grouping.n} indices, mu has {n}")
    for k, group in enumerate(grouping.groups):
        if np.abs(mu[group] - grouping.values[k]).max() > 1e-8 * max(1.0, np.abs(mu).max()):
            raise ShapeError(f"group {k} does not carry a single value of mu")

    d = np.zeros((n, n))
    for k, group in enumerate(grouping.groups):
        image = np.real(np.diag(apply(channel, grouping.projection(k))))
        if np.any(image < -1e-12):
            raise DomainError(f"channel output on Q_{k} has a negative diagonal entry {image.min():.3e}")
        image = np.where(image < 0, 0.0, image)
        d[:, group] = (image / len(group))[:, None]

    output_sums = d.sum(axis=1)
    unital = bool(np.abs(output_sums - 1).max() <= 1e-10)
    if not unital:
        logger.warning(f"ds_from_channel: channel is not unital, row sums deviate by {np.abs(output_sums - 1).max():.3e}")
    return ExtractedMatrix(d=d, output_sums=output_sums, input_sums=d.sum(axis=0), unital=unital)


class ChannelReport(BaseModel):
    unital: bool
    unital_residual: float
    trace_preserving: bool
    trace_residual: float
    contractive: bool
    contraction_excess: float


def _matrix_units(n: int) -> List[np.ndarray]:
    units = []
    for a in range(n):
        for b in range(n):
            unit = np.zeros((n, n), dtype=complex)
            unit[a, b] = 1.0
            units.append(unit)
    return units


def check_channel(
    channel: Channel,
    test_matrices: Optional[Sequence[np.ndarray]] = None,
    tol: float = 1e-10,
) -> ChannelReport:
    """Unitality, trace preservation and contractivity on a test set (matrix units by default)."""
    n = channel.dim
    identity = np.eye(n)
    if isinstance(channel, MixedUnitaryChannel):
        unitaries = channel.unitaries
        weights = channel.weights
        unital_residual = operator_norm(np.einsum("k,kba,kbc->ac", weights, unitaries.conj(), unitaries) - identity)
        trace_residual = operator_norm(np.einsum("k,kab,kcb->ac", weights, unitaries, unitaries.conj()) - identity)
    else:
        unital_residual = operator_norm(apply(channel, identity) - identity)
        trace_residual = max(
            abs(np.trace(apply(channel, unit)) - np.trace(unit)) for unit in _matrix_units(n)
        )
    if test_matrices is None:
        test_matrices = _matrix_units(n)
    excess = max(operator_norm(apply(channel, m)) - operator_norm(m) for m in test_matrices)
    return ChannelReport(
        unital=unital_residual <= tol,
        unital_residual=unital_residual,
        trace_preserving=trace_residual <= tol,
        trace_residual=float(trace_residual),
        contractive=excess <= tol,
        contraction_excess=float(excess),
    )
