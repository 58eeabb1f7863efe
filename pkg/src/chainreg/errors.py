"""Exception types shared across the package."""


class ChainregError(Exception):
    pass


class ParameterError(ChainregError, ValueError):
    """A tuning or configuration parameter is out of its admissible range."""


class DimensionError(ChainregError, ValueError):
    """Vector or block shapes do not match."""


class DomainError(ChainregError, ValueError):
    """An input point lies outside the function domain."""


class ResourceError(ChainregError, RuntimeError):
    """An enumeration would exceed its configured cardinality cap."""


class CertificationError(ChainregError, RuntimeError):
    """An empirical net certificate exceeded its analytic bound."""
