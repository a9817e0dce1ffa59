"""Exception types shared across the package."""


class DomainError(ValueError):
    """A point lies outside the domain of the function being evaluated."""


class PreconditionError(ValueError):
    """An input violates a documented precondition (e.g. not on the boundary)."""


class ConfigError(ValueError):
    """Invalid run configuration or schedule precondition.

    ``key`` names the offending configuration entry when there is one.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
