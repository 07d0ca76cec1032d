"""Exceptions raised by the exact-arithmetic kernel."""


class KernelError(Exception):
    """Base class for exact-arithmetic failures."""


class DivisionByZero(KernelError):
    pass


class UnrationalizableDenominator(KernelError):
    """Denominator spans three or more independent radicals, contains a
    nested radicand, or mixes pi in a non-cancelling way."""


class NegativeRadicand(KernelError):
    pass


class NestingDepthExceeded(KernelError):
    """Square root of a value that already contains a nested radical."""


class UnsupportedPiPower(KernelError):
    """Operation would create a pi power outside {0, 1}."""


class UnsupportedAngle(KernelError):
    """Angle has no exact sine/cosine in the kernel's radical field."""


class PrecisionExhausted(KernelError):
    """Certified interval still straddles the decision threshold at the
    maximum escalation precision; caller must treat as inconclusive."""


class ParseError(KernelError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class EvalError(KernelError):
    """Expression parsed but cannot be folded into an exact scalar."""
