"""Exception types. ConfigError maps to CLI exit code 2, FeasibilityError
(and subclasses) to exit code 3."""


class ConfigError(ValueError):
    """Bad scenario file or recipe parameters."""


class FeasibilityError(ValueError):
    """Infeasible state or action (negative assets, overconsumption, ...)."""


class GridTooSmallError(FeasibilityError):
    """Reachable next-period assets exceed the grid top beyond tolerance."""
