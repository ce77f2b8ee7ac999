import math

from pydantic import ValidationError

from .cpmaps import apply, check_channel, witness_channel
from .errors import OrbitHullError
from .logger import get_logger
from .majorization import is_majorized
from .spectra import NormalMatrix, operator_norm, spectral_decompose
from .state import MembershipState

# Get the logger
logger = get_logger()


def log_error(step: str, error_type: str, message: str) -> dict:
    return {
        "errors": [{
            "step": step,
            "error_type": error_type,
            "message": message
        }]
    }


def decompose_node(state: MembershipState) -> dict:
    """Checks normality of x and y and computes both spectral forms."""
    logger.info("--- Node: decompose ---")
    try:
        x = NormalMatrix.from_array(state["x"])
        y = NormalMatrix.from_array(state["y"])
        if x.dim != y.dim:
            return log_error("decompose", "ShapeError", f"x has dimension {x.dim}, y has dimension {y.dim}")
        x_form = spectral_decompose(x)
        y_form = spectral_decompose(y)
    except OrbitHullError as e:
        logger.error(f"Error decomposing inputs: {e}")
        return log_error("decompose", type(e).__name__, str(e))
    except ValidationError as e:
        logger.error(f"Decomposition produced an invalid model: {e}")
        return log_error("decompose", "DegeneracyError", str(e))
    return {
        "x_form": x_form,
        "y_form": y_form,
        "lam": x_form.eigenvalues(),
        "mu": y_form.eigenvalues(),
    }


def majorize_node(state: MembershipState) -> dict:
    """Runs the majorization LP at box tolerance tol/sqrt(2), so modulus errors stay below tol."""
    logger.info("--- Node: majorize ---")
    try:
        certificate = is_majorized(state["lam"], state["mu"], state["tol"] / math.sqrt(2), exact=state["exact"])
    except OrbitHullError as e:
        logger.error(f"Error deciding majorization: {e}")
        return log_error("majorize", type(e).__name__, str(e))
    except ValidationError as e:
        logger.error(f"Majorization produced an invalid model: {e}")
        return log_error("majorize", "DegeneracyError", str(e))
    return {"certificate": certificate}


def synthesize_node(state: MembershipState) -> dict:
    """Builds the channel sum_sigma t_sigma Ad(Fy P_sigma^T Fx*) from the witness D."""
    logger.info("--- Node: synthesize ---")
    try:
        channel = witness_channel(state["certificate"].witness, state["y_form"].frame, state["x_form"].frame)
    except OrbitHullError as e:
        logger.error(f"Error synthesizing witness: {e}")
        return log_error("synthesize", type(e).__name__, str(e))
    except ValidationError as e:
        logger.error(f"Synthesis produced an invalid model: {e}")
        return log_error("synthesize", "DegeneracyError", str(e))
    logger.info(f"Witness channel with {len(channel.terms)} terms")
    return {"channel": channel}


def verify_node(state: MembershipState) -> dict:
    """Re-measures ||x - channel(y)|| by direct matrix arithmetic."""
    logger.info("--- Node: verify ---")
    channel = state["channel"]
    achieved = operator_norm(state["x"] - apply(channel, state["y"]))
    report = check_channel(channel, test_matrices=[state["y"]])
    if not report.trace_preserving:
        return log_error("verify", "VerificationError", f"witness trace residual {report.trace_residual:.3e}")
    if achieved > state["tol"]:
        logger.error(f"Witness error {achieved:.3e} exceeds tol {state['tol']:.3e}")
        return log_error("verify", "VerificationError", f"witness error {achieved:.3e} exceeds tol {state['tol']:.3e}")
    return {"achieved": achieved, "verdict": "member"}


def certify_node(state: MembershipState) -> dict:
    """Records a non-member verdict backed by the separating functional."""
    logger.info("--- Node: certify ---")
    separator = state["certificate"].separator
    logger.info(f"Separator gap {separator.gap:.3e}")
    return {"verdict": "non_member"}
