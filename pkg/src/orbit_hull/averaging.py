"""Explicit averaging witnesses with their error bounds.

Every witness is a uniform mixture of permutation unitaries, conjugated into the
relevant eigenframe, and reports the achieved distance ``||target - channel(source)||``
next to the bound it must respect.
"""
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .birkhoff import permutation_matrix
from .cpmaps import ChannelTerm, MixedUnitaryChannel, apply, compose
from .errors import ParameterError, ShapeError, VerificationError
from .logger import get_logger
from .spectra import NormalMatrix, SpectralForm, operator_norm, spectral_decompose

# Get the logger
logger = get_logger()

BOUND_SLACK = 1e-9

Block = Union[NormalMatrix, np.ndarray, Sequence[Sequence[complex]]]


class AveragingWitness(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    channel: MixedUnitaryChannel
    target: np.ndarray
    source: np.ndarray
    achieved: float = Field(description="||target - channel(source)||.")
    bound: float
    ledger: Dict[str, Any] = Field(default_factory=dict, description="Block sizes and intermediate constants.")
    notes: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _within_bound(self) -> "AveragingWitness":
        if self.achieved > self.bound + BOUND_SLACK:
            raise ValueError(f"achieved {self.achieved:.3e} exceeds bound {self.bound:.3e}")
        return self


def _block(a: Block, name: str) -> np.ndarray:
    if isinstance(a, NormalMatrix):
        return a.entries
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {a.shape}")
    return a


def _uniform(unitaries: List[np.ndarray]) -> MixedUnitaryChannel:
    weight = 1.0 / len(unitaries)
    return MixedUnitaryChannel(
        dim=unitaries[0].shape[0],
        terms=[ChannelTerm(weight=weight, unitary=u) for u in unitaries],
    )


def _finish(
    operation: str,
    channel: MixedUnitaryChannel,
    target: np.ndarray,
    source: np.ndarray,
    bound: float,
    ledger: Dict[str, Any],
    notes: Optional[List[str]] = None,
) -> AveragingWitness:
    achieved = operator_norm(target - apply(channel, source))
    ratio = achieved / bound if bound > 0 else 0.0
    logger.info(f"{operation}: achieved {achieved:.3e}, bound {bound:.3e}, ratio {ratio:.3f}")
    if achieved > bound + BOUND_SLACK:
        raise VerificationError(f"{operation}: achieved {achieved:.3e} exceeds bound {bound:.3e}")
    return AveragingWitness(
        channel=channel,
        target=target,
        source=source,
        achieved=achieved,
        bound=bound,
        ledger=ledger,
        notes=notes or [],
    )


def _rotation(blocks: Sequence[Sequence[int]], dim: int, shift: int) -> np.ndarray:
    """Permutation unitary carrying block (b + shift) mod len(blocks) onto block b, index by index."""
    perm = list(range(dim))
    count = len(blocks)
    for b, block in enumerate(blocks):
        for position, index in enumerate(block):
            perm[index] = blocks[(b + shift) % count][position]
    return permutation_matrix(perm).T


def cyclic_shift_witness(a: Block, K: int) -> AveragingWitness:
    """diag(a, ..., a) (K copies) from diag(0, a, ..., a) by averaging the K cyclic block shifts."""
    if K < 2:
        raise ParameterError(f"K must be at least 2, got {K}")
    a = _block(a, "a")
    r = a.shape[0]
    target = np.kron(np.eye(K), a)
    source = target.copy()
    source[:r, :r] = 0
    blocks = [list(range(j * r, (j + 1) * r)) for j in range(K)]
    unitaries = [_rotation(blocks, K * r, shift) for shift in range(K)]
    norm_a = operator_norm(a)
    return _finish(
        "cyclic_shift_witness",
        _uniform(unitaries),
        target,
        source,
        norm_a / K,
        {"K": K, "block_size": r, "norm_a": norm_a},
    )


def absorb_witness(y_small: Block, y_big: Block, K: int, q_size: Optional[int] = None) -> AveragingWitness:
    """Approximates y_big + 0 from y_big + y_small by spreading y_small over K copies of its corner.

    The ambient space is ordered p (y_big), e (y_small), q (free room of size ``q_size``).
    """
    if K < 1:
        raise ParameterError(f"K must be at least 1, got {K}")
    y_small = _block(y_small, "y_small")
    y_big = _block(y_big, "y_big")
    big, r = y_big.shape[0], y_small.shape[0]
    if q_size is None:
        q_size = K * r
    if q_size < K * r:
        raise ParameterError(f"q has size {q_size}, needs at least K*size(e) = {K * r}")
    dim = big + r + q_size

    source = np.zeros((dim, dim), dtype=complex)
    source[:big, :big] = y_big
    source[big:big + r, big:big + r] = y_small
    target = np.zeros_like(source)
    target[:big, :big] = y_big

    corner = list(range(big, big + r))
    unitaries = [np.eye(dim)]
    for j in range(K):
        start = big + r + j * r
        blocks = [corner, list(range(start, start + r))]
        unitaries.append(_rotation(blocks, dim, 1))
    norm_small = operator_norm(y_small)
    return _finish(
        "absorb_witness",
        _uniform(unitaries),
        target,
        source,
        norm_small / (K + 1),
        {"K": K, "p": big, "e": r, "q": q_size, "norm_y_small": norm_small},
    )


def _corner_sizes(multiplicities: Sequence[int], total: int, K: int) -> List[int]:
    sizes = []
    remaining = total
    for m in multiplicities:
        take = min(m // (K + 2), remaining)
        sizes.append(take)
        remaining -= take
    if remaining:
        raise ParameterError(f"corner of size {total} does not fit (K+2)-fold into multiplicities {list(multiplicities)}")
    return sizes


class CornerStages(BaseModel):
    """The two averaging stages behind a corner replacement, in the eigenframe of x."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    target: np.ndarray
    source: np.ndarray
    x_prime: np.ndarray
    absorb: MixedUnitaryChannel = Field(description="Identity and the K swaps of the corner with block j.")
    cyclic: MixedUnitaryChannel = Field(description="The K+1 cyclic shifts of the corner and the K blocks.")

    def composed(self) -> MixedUnitaryChannel:
        return compose(self.cyclic, self.absorb)

    def stage_errors(self) -> Dict[str, float]:
        return {
            "absorb_stage": operator_norm(self.target - apply(self.absorb, self.source)),
            "cyclic_stage": operator_norm(self.target - apply(self.cyclic, self.target)),
        }


def _corner_stages(
    values: np.ndarray,
    multiplicities: Sequence[int],
    frame: np.ndarray,
    y_corner: np.ndarray,
    corner_sizes: Sequence[int],
    K: int,
    frame_e: Optional[np.ndarray] = None,
) -> CornerStages:
    """Target x (+) x', source x (+) y', over K+1 aligned blocks.

    Block 0 is the corner e; block j >= 1 takes the j-th run of r_i indices from
    each eigenvalue's p-block. Every block then carries x' in the same order.
    """
    p = sum(multiplicities)
    r = sum(corner_sizes)
    dim = p + r
    if y_corner.shape != (r, r):
        raise ShapeError(f"corner has shape {y_corner.shape}, corner sizes sum to {r}")
    for m_i, r_i in zip(multiplicities, corner_sizes):
        if (K + 2) * r_i > m_i:
            raise ParameterError(f"(K+2)*{r_i} exceeds multiplicity {m_i}")
    if frame_e is None:
        frame_e = np.eye(r)

    starts = np.cumsum([0] + list(multiplicities))[:-1]
    blocks = [list(range(p, dim))]
    for j in range(K):
        block = []
        for start, r_i in zip(starts, corner_sizes):
            block.extend(range(start + j * r_i, start + (j + 1) * r_i))
        blocks.append(block)

    x_diag = np.diag(np.repeat(values, multiplicities))
    x_prime = np.diag(np.repeat(values, corner_sizes))
    w = scipy.linalg.block_diag(frame, frame_e)
    swaps = [np.eye(dim)] + [_rotation([blocks[0], blocks[j]], dim, 1) for j in range(1, K + 1)]
    shifts = [_rotation(blocks, dim, shift) for shift in range(K + 1)]
    return CornerStages(
        target=w @ scipy.linalg.block_diag(x_diag, x_prime) @ w.conj().T,
        source=w @ scipy.linalg.block_diag(x_diag, y_corner) @ w.conj().T,
        x_prime=x_prime,
        absorb=_uniform([w @ u @ w.conj().T for u in swaps]),
        cyclic=_uniform([w @ u @ w.conj().T for u in shifts]),
    )


def _as_form(x: Union[SpectralForm, NormalMatrix, np.ndarray]) -> SpectralForm:
    if isinstance(x, SpectralForm):
        return x
    return spectral_decompose(x if isinstance(x, NormalMatrix) else NormalMatrix.from_array(x))


def corner_replace_witness(
    x: Union[SpectralForm, NormalMatrix, np.ndarray],
    y_small: Block,
    K: int,
    corner_sizes: Optional[Sequence[int]] = None,
) -> AveragingWitness:
    """x + x' from x + y' where x' repeats x's eigenvalues on the corner with sizes r_i.

    The witness is the cyclic-shift average composed after the corner-absorbing swap
    average; the ledger carries each stage's own error. Requires (K+2) r_i <= m_i.
    Corner sizes default to a greedy fill of the multiplicities.
    """
    if K < 2:
        raise ParameterError(f"K must be at least 2, got {K}")
    form = _as_form(x)
    y_small = _block(y_small, "y_small")
    r = y_small.shape[0]
    if corner_sizes is None:
        corner_sizes = _corner_sizes(form.multiplicities, r, K)
    corner_sizes = list(corner_sizes)
    if len(corner_sizes) != len(form.multiplicities) or sum(corner_sizes) != r:
        raise ParameterError(f"corner sizes {corner_sizes} do not split a corner of size {r}")

    stages = _corner_stages(form.values, form.multiplicities, form.frame, y_small, corner_sizes, K)
    norm_x = float(np.abs(form.values).max())
    norm_y = operator_norm(y_small)
    shift = form.values[0]
    eta3 = (operator_norm(y_small - shift * np.eye(r)) + float(np.abs(form.values - shift).max())) / K
    ledger = {
        "K": K,
        "multiplicities": list(form.multiplicities),
        "corner_sizes": corner_sizes,
        "norm_x": norm_x,
        "norm_y_small": norm_y,
        "recenter": [float(shift.real), float(shift.imag)],
        "recentered_estimate": eta3,
        "rotation_estimate": operator_norm(y_small - stages.x_prime) / (K + 1),
        **stages.stage_errors(),
    }
    return _finish(
        "corner_replace_witness",
        stages.composed(),
        stages.target,
        stages.source,
        (norm_y + 3 * norm_x) / K,
        ledger,
    )


def absorb_estimate(
    x1: Union[SpectralForm, NormalMatrix, np.ndarray],
    x2: Optional[Block],
    K: int,
    eta: Optional[float] = None,
    eps: float = 0.0,
) -> AveragingWitness:
    """Distance from x1 (+) x2 to the averages of x1 (+) 0.

    x2's eigenvalues are rounded to the nearest eigenvalue of x1 (distance eta), and the
    rounded corner is then filled in by the two-stage corner replacement. Requires
    (2K+5) size(x2) <= every multiplicity of x1. An absent or zero x2 leaves nothing
    to move and gives the identity witness.
    """
    if K < 2:
        raise ParameterError(f"K must be at least 2, got {K}")
    if eps < 0:
        raise ParameterError(f"eps must be nonnegative, got {eps}")
    form = _as_form(x1)
    notes = ["index repair step skipped: K1 of a matrix algebra is zero"]

    corner_block = None
    if x2 is not None:
        corner_block = x2.entries if isinstance(x2, NormalMatrix) else np.asarray(x2, dtype=complex)
    if corner_block is None or corner_block.size == 0 or not np.any(corner_block):
        r = 0 if corner_block is None or corner_block.size == 0 else _block(corner_block, "x2").shape[0]
        source = form.reconstruct()
        if r:
            source = scipy.linalg.block_diag(source, np.zeros((r, r)))
        norm_x = float(np.abs(form.values).max())
        return _finish(
            "absorb_estimate",
            MixedUnitaryChannel.identity(source.shape[0]),
            source,
            source,
            8 * norm_x / K + eps + (eta or 0.0),
            {"K": K, "multiplicities": list(form.multiplicities), "corner": r, "eta": 0.0},
            notes,
        )

    x2 = x2 if isinstance(x2, NormalMatrix) else NormalMatrix.from_array(_block(x2, "x2"))
    r = x2.dim
    for m in form.multiplicities:
        if (2 * K + 5) * r > m:
            raise ParameterError(f"(2K+5)*{r} exceeds multiplicity {m}")

    corner = spectral_decompose(x2)
    nu = corner.eigenvalues()
    nearest = np.argmin(np.abs(nu[:, None] - form.values[None, :]), axis=1)
    measured_eta = float(np.abs(nu - form.values[nearest]).max())
    if eta is not None and measured_eta > eta + 1e-12:
        raise ParameterError(f"eigenvalues of x2 are {measured_eta:.3e} from the lambda set, more than eta={eta}")
    if eta is None:
        eta = measured_eta

    order = np.argsort(nearest, kind="stable")
    frame_e = corner.frame[:, order]
    corner_sizes = [int(np.count_nonzero(nearest == k)) for k in range(len(form.values))]
    stages = _corner_stages(
        form.values,
        form.multiplicities,
        form.frame,
        np.zeros((r, r)),
        corner_sizes,
        K,
        frame_e,
    )
    x = scipy.linalg.block_diag(form.reconstruct(), x2.entries)
    norm_x = operator_norm(x)
    ledger = {
        "K": K,
        "multiplicities": list(form.multiplicities),
        "corner": r,
        "corner_sizes": corner_sizes,
        "eta": measured_eta,
        "eps": eps,
        "norm_x": norm_x,
        **stages.stage_errors(),
    }
    return _finish("absorb_estimate", stages.composed(), x, stages.source, 8 * norm_x / K + eps + eta, ledger, notes)
