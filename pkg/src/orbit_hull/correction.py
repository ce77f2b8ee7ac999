"""Repair of an almost trace-compatible stochastic matrix into a doubly stochastic one.

``correct_ds`` works in the orientation where rows carry the defects
``eps'_i = (row sum) - 1`` and columns already sum to one. ``corrected_channel`` reads a
matrix off a channel, repairs it and rebuilds a trace-preserving channel whose error
against the target is checked against ``2 eps2 ||y|| + 3 eps1``.
"""
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .cpmaps import Channel, FunctionChannel, MixedUnitaryChannel, SpectralGrouping, apply, ds_from_channel, witness_channel
from .errors import DegeneracyError, PreconditionError, ShapeError, VerificationError
from .logger import get_logger
from .majorization import DoublyStochastic
from .spectra import NormalMatrix, operator_norm, spectral_decompose
from .transport import riesz_interpolate

# Get the logger
logger = get_logger()

# Row and column defects at or below this are rounding, not mass to move.
DEFECT_DUST = 1e-12


class CorrectionReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    d_input: np.ndarray
    eps_prime: np.ndarray
    lambda_plus: List[int]
    lambda_minus: List[int]
    eps_matrix: np.ndarray
    d_corrected: DoublyStochastic
    balance: float = Field(description="sum of eps' over both index sets; zero up to rounding.")
    eps1: Optional[float] = None
    eps2: Optional[float] = None
    s: Optional[float] = Field(default=None, description="min_k |S_k| / n, the smallest trace of a Q_k.")
    bound: Optional[float] = None
    achieved: Optional[float] = None
    entrywise_gap: Optional[float] = Field(default=None, description="max_j |lam_j - (D' mu)_j|.")
    entrywise_bound: Optional[float] = Field(default=None, description="2 eps1 + 2 eps2 ||y||.")
    channel: Optional[MixedUnitaryChannel] = None

    @model_validator(mode="after")
    def _check(self) -> "CorrectionReport":
        if abs(self.balance) > 1e-10:
            raise ValueError(f"defects do not balance: {self.balance:.3e}")
        if self.achieved is not None and self.bound is not None and self.achieved > self.bound + 1e-8:
            raise ValueError(f"achieved {self.achieved:.3e} exceeds bound {self.bound:.3e}")
        return self


def correct_ds(d: np.ndarray, eps2: float) -> CorrectionReport:
    """Moves mass between rows so that every row sums to one, keeping columns at one."""
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {d.shape}")
    if np.any(d < -1e-12):
        raise PreconditionError(f"matrix has a negative entry {d.min():.3e}")
    d = np.where(d < 0, 0.0, d)
    columns = d.sum(axis=0)
    if np.abs(columns - 1).max() > 1e-10:
        raise PreconditionError(f"column sums deviate from 1 by {np.abs(columns - 1).max():.3e}")
    if np.abs(columns - 1).max() > DEFECT_DUST:
        d = d / columns

    eps_prime = d.sum(axis=1) - 1.0
    eps_prime[np.abs(eps_prime) <= DEFECT_DUST] = 0.0
    if np.abs(eps_prime).max() > eps2 + 1e-12:
        raise PreconditionError(f"row defect {np.abs(eps_prime).max():.3e} exceeds eps2={eps2:.3e}")
    if np.any(1.0 + eps_prime <= 0):
        raise DegeneracyError("a row sums to zero")

    plus = np.flatnonzero(eps_prime >= 0)
    minus = np.flatnonzero(eps_prime < 0)
    eps = np.zeros_like(d)
    eps[plus] = d[plus] * (eps_prime[plus] / (1.0 + eps_prime[plus]))[:, None]
    if minus.size:
        plan = riesz_interpolate(-eps_prime[minus], eps[plus].sum(axis=0))
        eps[minus] = plan.e

    corrected = d.copy()
    corrected[plus] -= eps[plus]
    corrected[minus] += eps[minus]
    corrected = np.where(corrected < 0, 0.0, corrected)
    balance = float(eps_prime[plus].sum() + eps_prime[minus].sum())
    logger.info(
        f"correct_ds: n={d.shape[0]}, |L+|={plus.size}, |L-|={minus.size}, max defect {np.abs(eps_prime).max():.3e}"
    )
    return CorrectionReport(
        d_input=d,
        eps_prime=eps_prime,
        lambda_plus=plus.tolist(),
        lambda_minus=minus.tolist(),
        eps_matrix=eps,
        d_corrected=DoublyStochastic.from_array(corrected),
        balance=balance,
    )


def corrected_channel(
    x: NormalMatrix,
    y: NormalMatrix,
    channel: Channel,
    eps1: Optional[float] = None,
    eps2: Optional[float] = None,
    grouping: Optional[SpectralGrouping] = None,
) -> CorrectionReport:
    """Trace-preserving replacement for a unital channel that nearly sends y to x.

    Supplied ``eps1``/``eps2`` are checked as hypotheses; omitted ones are measured.
    The matrix is extracted in the eigenframes of y (source) and x (target).
    """
    x = x if isinstance(x, NormalMatrix) else NormalMatrix.from_array(x)
    y = y if isinstance(y, NormalMatrix) else NormalMatrix.from_array(y)
    if x.dim != y.dim or channel.dim != x.dim:
        raise ShapeError(f"dimensions differ: x {x.dim}, y {y.dim}, channel {channel.dim}")
    n = x.dim
    x_form, y_form = spectral_decompose(x), spectral_decompose(y)
    fx, fy = x_form.frame, y_form.frame
    mu = y_form.expanded_values()
    lam = x_form.expanded_values()
    if grouping is None:
        grouping = SpectralGrouping(groups=y_form.group_indices(), values=y_form.values)

    measured_eps1 = operator_norm(apply(channel, y.entries) - x.entries)
    if eps1 is None:
        eps1 = measured_eps1
    elif measured_eps1 > eps1 + 1e-12:
        raise PreconditionError(f"||ch(y) - x|| = {measured_eps1:.3e} exceeds eps1={eps1:.3e}")

    aligned = FunctionChannel(dim=n, action=lambda a: fx.conj().T @ apply(channel, fy @ a @ fy.conj().T) @ fx)
    extracted = ds_from_channel(aligned, mu, grouping)
    if not extracted.unital:
        raise PreconditionError("channel is not unital; its matrix has no unit row sums")

    s = min(len(group) for group in grouping.groups) / n
    defects = np.array([abs(extracted.input_sums[group[0]] - 1.0) * len(group) / n for group in grouping.groups])
    if eps2 is None:
        eps2 = float(defects.max() / s)
    elif defects.max() > s * eps2 + 1e-12:
        raise PreconditionError(f"trace defect {defects.max():.3e} exceeds s*eps2 = {s * eps2:.3e}")

    report = correct_ds(extracted.d.T, eps2)
    d_prime = DoublyStochastic.from_array(report.d_corrected.d.T)
    psi = witness_channel(d_prime, fy, fx)
    achieved = operator_norm(apply(psi, y.entries) - x.entries)
    bound = 2 * eps2 * y.norm + 3 * eps1
    entrywise_gap = float(np.abs(lam - d_prime.d @ mu).max())
    entrywise_bound = 2 * eps1 + 2 * eps2 * y.norm
    logger.info(f"corrected_channel: achieved {achieved:.3e}, bound {bound:.3e}")
    if achieved > bound + 1e-8:
        raise VerificationError(f"corrected channel error {achieved:.3e} exceeds bound {bound:.3e}")
    return CorrectionReport(
        **{
            **dict(report),
            "eps1": eps1,
            "eps2": eps2,
            "s": s,
            "bound": bound,
            "achieved": achieved,
            "entrywise_gap": entrywise_gap,
            "entrywise_bound": entrywise_bound,
            "channel": psi,
        }
    )
