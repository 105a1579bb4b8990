"""Exception types shared across the package."""


class UnisetError(Exception):
    """Base class for all package-specific errors."""


class CapExceeded(UnisetError):
    """A requested computation is larger than the configured safety cap."""


class DomainError(UnisetError, ValueError):
    """Arguments lie outside the mathematical domain of a formula."""


class ParamsMismatch(UnisetError):
    """Two objects built for different (c, k) were combined."""


class InvalidPermutation(UnisetError):
    """A ground-set permutation is not a bijection on 0..n-1."""


class InvalidAnchors(UnisetError):
    """Anchor blocks violate a construction's validity conditions."""


class InfeasibleConstruction(UnisetError):
    """No block system satisfies a construction's side conditions."""


class NonIntegerResult(UnisetError):
    """An exact rational that must be an integer is not one (formula bug)."""


class EmptyFamily(UnisetError):
    """An operation that needs a non-empty family received an empty one."""


class PreconditionViolated(UnisetError):
    """A structural precondition (covering number, non-emptiness...) fails."""


class CacheCorrupt(UnisetError):
    """A universe cache file failed validation and cannot be trusted."""
