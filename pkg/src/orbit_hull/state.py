from typing import List, Literal, Optional, TypedDict

import numpy as np

from .cpmaps import MixedUnitaryChannel
from .majorization import MajorizationCertificate
from .spectra import SpectralForm


class GraphError(TypedDict):
    step: Literal["decompose", "majorize", "synthesize", "verify", "certify"]
    error_type: Literal[
        "ShapeError",
        "ParameterError",
        "DomainError",
        "PreconditionError",
        "DegeneracyError",
        "BalanceError",
        "SizeError",
        "SolverError",
        "VerificationError",
    ]
    message: str


class MembershipState(TypedDict):
    x: np.ndarray
    y: np.ndarray
    tol: float
    exact: bool
    x_form: Optional[SpectralForm]
    y_form: Optional[SpectralForm]
    lam: Optional[np.ndarray]
    mu: Optional[np.ndarray]
    certificate: Optional[MajorizationCertificate]
    channel: Optional[MixedUnitaryChannel]
    achieved: Optional[float]
    verdict: Optional[Literal["member", "non_member"]]
    errors: List[GraphError]
