"""JSON wire format. Complex numbers travel as [re, im] pairs; every report carries a schema tag."""
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .averaging import AveragingWitness
from .birkhoff import PermutationCombination
from .correction import CorrectionReport
from .cpmaps import ChannelTerm, MixedUnitaryChannel
from .majorization import DoublyStochastic, Separator
from .measures import DiscreteTransferMap
from .spectra import DiscreteMeasure
from .transport import TransportPlan

SCHEMA = "orbit-hull/1"

Pair = Tuple[float, float]


def complex_to_pairs(values) -> List[List[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=complex).reshape(-1)]


def pairs_to_complex(pairs) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=complex)


def real_rows(m: np.ndarray) -> List[List[float]]:
    return [[float(v) for v in row] for row in np.asarray(m, dtype=float)]


class MatrixPayload(BaseModel):
    dim: int = Field(gt=0)
    entries: List[Pair]

    @model_validator(mode="after")
    def _size(self) -> "MatrixPayload":
        if len(self.entries) != self.dim * self.dim:
            raise ValueError(f"expected {self.dim * self.dim} entries for dim {self.dim}, got {len(self.entries)}")
        return self

    def to_array(self) -> np.ndarray:
        return pairs_to_complex(self.entries).reshape(self.dim, self.dim)

    @classmethod
    def from_array(cls, m: np.ndarray) -> "MatrixPayload":
        m = np.asarray(m, dtype=complex)
        return cls(dim=m.shape[0], entries=[tuple(pair) for pair in complex_to_pairs(m)])


class MeasurePayload(BaseModel):
    support: List[Pair] = Field(min_length=1)
    weights: List[float]

    def to_measure(self) -> DiscreteMeasure:
        return DiscreteMeasure(support=pairs_to_complex(self.support), weights=self.weights)


class StochasticPayload(BaseModel):
    n: int = Field(gt=0)
    d: List[List[float]]

    @model_validator(mode="after")
    def _square(self) -> "StochasticPayload":
        if len(self.d) != self.n or any(len(row) != self.n for row in self.d):
            raise ValueError(f"d must be {self.n} rows of {self.n} entries")
        return self

    def to_array(self) -> np.ndarray:
        return np.asarray(self.d, dtype=float)


class ChannelTermPayload(BaseModel):
    weight: float
    unitary: MatrixPayload


class ChannelPayload(BaseModel):
    dim: int = Field(gt=0)
    terms: List[ChannelTermPayload] = Field(min_length=1)

    def to_channel(self) -> MixedUnitaryChannel:
        return MixedUnitaryChannel(
            dim=self.dim,
            terms=[ChannelTerm(weight=term.weight, unitary=term.unitary.to_array()) for term in self.terms],
        )


# --- Command inputs ---

class TransportInput(BaseModel):
    a: List[float]
    b: List[float]


class CorrectInput(BaseModel):
    d: List[List[float]] = Field(min_length=1)
    eps2: float = Field(ge=0)

    @model_validator(mode="after")
    def _square(self) -> "CorrectInput":
        if any(len(row) != len(self.d) for row in self.d):
            raise ValueError("d must be square")
        return self


class AverageInput(BaseModel):
    part: int = Field(ge=1, le=3)
    a: Optional[MatrixPayload] = None
    y_small: Optional[MatrixPayload] = None
    y_big: Optional[MatrixPayload] = None
    x: Optional[MatrixPayload] = None
    corner_sizes: Optional[List[int]] = None
    q_size: Optional[int] = None

    @model_validator(mode="after")
    def _fields_for_part(self) -> "AverageInput":
        needed = {1: ("a",), 2: ("y_small", "y_big"), 3: ("x", "y_small")}[self.part]
        missing = [name for name in needed if getattr(self, name) is None]
        if missing:
            raise ValueError(f"part {self.part} needs {', '.join(missing)}")
        return self


class AbsorbInput(BaseModel):
    x1: MatrixPayload
    x2: Optional[MatrixPayload] = None
    eta: Optional[float] = Field(default=None, ge=0)
    eps: float = Field(default=0.0, ge=0)


class MeasuresInput(BaseModel):
    X: MeasurePayload
    Y: MeasurePayload
    eps: float = Field(ge=0)


# --- Report encoders ---

def matrix_json(m: np.ndarray) -> Dict[str, Any]:
    return MatrixPayload.from_array(m).model_dump()


def channel_json(channel: MixedUnitaryChannel) -> Dict[str, Any]:
    return {
        "dim": channel.dim,
        "terms": [{"weight": term.weight, "unitary": matrix_json(term.unitary)} for term in channel.terms],
    }


def combination_json(combination: PermutationCombination) -> Dict[str, Any]:
    return {"terms": [{"weight": t.weight, "perm": [i + 1 for i in t.perm]} for t in combination.terms]}


def stochastic_json(d: DoublyStochastic) -> Dict[str, Any]:
    return {"n": d.n, "d": real_rows(d.d)}


def separator_json(separator: Separator) -> Dict[str, Any]:
    return {
        "c": complex_to_pairs(separator.c),
        "value": separator.value,
        "offset": separator.offset,
        "gap": separator.gap,
    }


def plan_json(plan: TransportPlan) -> Dict[str, Any]:
    return {
        "e": real_rows(plan.e),
        "row_marginals": [float(v) for v in plan.row_marginals],
        "col_marginals": [float(v) for v in plan.col_marginals],
        "support_size": plan.support_size,
    }


def correction_json(report: CorrectionReport) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "d_input": real_rows(report.d_input),
        "eps_prime": [float(v) for v in report.eps_prime],
        "lambda_plus": report.lambda_plus,
        "lambda_minus": report.lambda_minus,
        "eps_matrix": real_rows(report.eps_matrix),
        "d_corrected": stochastic_json(report.d_corrected),
        "balance": report.balance,
    }
    for name in ("eps1", "eps2", "s", "bound", "achieved", "entrywise_gap", "entrywise_bound"):
        value = getattr(report, name)
        if value is not None:
            out[name] = value
    if report.channel is not None:
        out["channel"] = channel_json(report.channel)
    return out


def witness_json(witness: AveragingWitness) -> Dict[str, Any]:
    return {
        "channel": channel_json(witness.channel),
        "target": matrix_json(witness.target),
        "source": matrix_json(witness.source),
        "achieved": witness.achieved,
        "bound": witness.bound,
        "ledger": witness.ledger,
        "notes": witness.notes,
    }


def transfer_json(transfer: DiscreteTransferMap) -> Dict[str, Any]:
    return {
        "X": complex_to_pairs(transfer.source_support),
        "Y": complex_to_pairs(transfer.target_support),
        "S": real_rows(transfer.s),
    }


def report(command: str, **fields: Any) -> Dict[str, Any]:
    return {"schema": SCHEMA, "command": command, **fields}
