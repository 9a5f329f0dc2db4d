"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An operation was called with arguments outside its contract."""


class ConfigError(ValueError):
    """A run or sweep configuration is malformed or inconsistent."""


class IngestionError(ValueError):
    """A dataset file is missing or malformed."""


class UndefinedAverage(ArithmeticError):
    """Replay evaluation matched zero rounds, so no average exists."""
