class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class SolverError(RuntimeError):
    """A solve did not reach its tolerance or hit a degenerate system."""


class ConfigError(ValueError):
    """An experiment configuration violates one of its invariants."""
