class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class DuplicateInputError(ValueError):
    """An input was revealed twice with conflicting values."""


class OutOfRegionError(ValueError):
    """Parameters fall outside the validity region of a bound."""


class ConsistencyError(AssertionError):
    """An adversary's witness is not a member of the advertised class."""


class ConfigError(ValueError):
    pass
