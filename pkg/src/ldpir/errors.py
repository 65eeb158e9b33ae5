"""Exception types shared across the package."""


class LdpirError(Exception):
    """Base class for all package errors."""


class ModulusMismatch(LdpirError, ValueError):
    """Operands belong to different prime fields."""


class DivisionByZero(LdpirError, ZeroDivisionError):
    """Multiplicative inverse of zero requested."""


class DuplicatePoint(LdpirError, ValueError):
    """Interpolation sample set contains a repeated evaluation point."""


class ZeroPolynomial(LdpirError, ValueError):
    """Operation undefined for the zero polynomial."""


class InfeasibleParameters(LdpirError, ValueError):
    """Parameter combination violates a scheme precondition."""


class NoSolution(LdpirError, RuntimeError):
    """A constraint system unexpectedly has an empty solution space."""


class IndexOutOfRange(LdpirError, IndexError):
    """Retrieval or encoding index outside the valid range."""


class ShapeError(LdpirError, ValueError):
    """Vector length does not match the expected dimension."""


class InsufficientResponses(LdpirError, ValueError):
    """Fewer servers responded than the reconstruction threshold."""


class OracleTooLarge(LdpirError, ValueError):
    """Brute-force enumeration would exceed the configured cost bound."""


class WireFormatError(LdpirError, ValueError):
    """Malformed serialized message."""
