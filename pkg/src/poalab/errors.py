"""Error types raised across the package."""


class PoaLabError(Exception):
    """Base class for library errors."""


class ContractError(PoaLabError, ValueError):
    """An argument violates a documented precondition."""


class DomainError(PoaLabError, IndexError):
    """An item or unit index lies outside the ground set."""


class CapacityError(PoaLabError, ValueError):
    """The requested size exceeds what brute force or storage allows."""


class UnsupportedError(PoaLabError, NotImplementedError):
    """The requested evaluation path does not exist for this structure."""
