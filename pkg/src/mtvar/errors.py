"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class EvaluationError(RuntimeError):
    """A user-supplied evaluator produced an invalid value (negative, NaN)."""


class NoLimitError(RuntimeError):
    """A sampled limit failed to stabilize across successive decades."""


class IntegrationError(RuntimeError):
    """A quadrature produced a non-finite result."""


class SolverError(RuntimeError):
    """An ODE shooting / bisection procedure failed to bracket or converge."""


class ExtractionError(RuntimeError):
    """Asymptote extrapolation did not converge to the requested spread."""


class MappingError(ValueError):
    """Profile support is incompatible with the requested change of variables."""


class ConstructionError(RuntimeError):
    """A constructed profile violates its defining constraint beyond tolerance."""


class OptimizerError(RuntimeError):
    """An iterative maximization stalled or diverged."""


class ContractError(ValueError):
    """Two results that must share identical inputs were combined."""
