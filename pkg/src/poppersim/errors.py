"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input value lies outside the physically meaningful domain."""


class ConfigError(ValueError):
    """A scenario or optical configuration is inconsistent or incomplete."""


class ResolutionError(RuntimeError):
    """The numerical grid cannot resolve the requested state.

    Carries enough information in the message to pick an adequate grid
    (required extent and/or step).
    """
