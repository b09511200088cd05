"""Exception hierarchy.

Input problems (``InputError`` subclasses) map to CLI exit code 1. The
``AssertionFailure`` subclasses signal that a proven inequality did not hold
on computed numbers, which means a bug somewhere, and map to exit code 2.
"""


class MECError(Exception):
    """Base class for every error raised by this package."""


class InputError(MECError, ValueError):
    """Malformed or out-of-domain input."""


class NegativeMass(InputError):
    pass


class NotNormalized(InputError):
    pass


class IndexOutOfRange(InputError, IndexError):
    pass


class DomainError(InputError):
    pass


class NoCoveringPrefix(InputError):
    pass


class PreconditionViolated(InputError):
    pass


class InvalidWitness(InputError):
    pass


class SupportTooLarge(InputError):
    pass


class CapExceeded(MECError):
    """Enumeration stopped at its node or time cap."""


class AssertionFailure(MECError):
    """A bound that must hold did not hold."""


class CertificateViolation(AssertionFailure):
    pass


class BoundViolation(AssertionFailure):
    pass
