class OrbitHullError(ValueError):
    """Base class for every failure raised by the orbit-hull operations."""


class ShapeError(OrbitHullError):
    """Inputs have the wrong shape or mismatched dimensions."""


class ParameterError(OrbitHullError):
    """A numeric parameter is out of its admissible range."""


class DomainError(OrbitHullError):
    """Input values lie outside the domain of the operation (e.g. complex where real is required)."""


class PreconditionError(OrbitHullError):
    """A mathematical hypothesis of the operation does not hold for the input."""


class DegeneracyError(OrbitHullError):
    """A numerical degeneracy prevented the construction from finishing."""


class BalanceError(OrbitHullError):
    """Row and column marginals do not carry the same total mass."""


class SizeError(OrbitHullError):
    """The instance is too large for an enumerating routine."""


class SolverError(OrbitHullError):
    """The linear programming engine did not terminate."""


class VerificationError(OrbitHullError):
    """A synthesized witness failed its independent re-check."""


# Maps GraphError.error_type back to the exception raised by the public API.
ERROR_TYPES: dict[str, type[OrbitHullError]] = {
    cls.__name__: cls
    for cls in (
        ShapeError,
        ParameterError,
        DomainError,
        PreconditionError,
        DegeneracyError,
        BalanceError,
        SizeError,
        SolverError,
        VerificationError,
    )
}
