"""Semantic exception hierarchy shared by all modules."""


class WmitError(Exception):
    """Base error for this package."""


class ConfigError(WmitError, ValueError):
    """Bad configuration: unknown family/kind/order, invalid parameter."""


class DomainError(WmitError, ValueError):
    """Evaluation outside the usable domain (e.g. CDF below the floor)."""


class EvaluationError(WmitError):
    """A callable returned NaN or otherwise failed at a known point."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class ConvergenceError(WmitError):
    """Quadrature or iteration did not converge; carries the best estimate."""

    def __init__(self, message, best=None, error_estimate=None):
        super().__init__(message)
        self.best = best
        self.error_estimate = error_estimate


class FinitenessError(WmitError):
    """An integral or moment required to be finite appears to diverge."""


class PreconditionError(WmitError):
    """A grid-checked hypothesis is violated; carries a witness point."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class CharacterizationError(WmitError):
    """CDF reconstruction from a WMIT curve hit an inconsistency."""
