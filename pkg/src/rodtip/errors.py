"""Exception and warning types raised by rodtip."""


class RodTipError(Exception):
    """Base class for all rodtip errors."""


class ParameterError(RodTipError, ValueError):
    """A physical parameter or configuration value is invalid."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DomainError(RodTipError, ValueError):
    """An operation was called outside its mathematical domain."""


class PropagatorValidityError(DomainError):
    """The short-time propagator is used past its validity bound."""

    def __init__(self, t, ratio, limit):
        self.t = t
        self.ratio = ratio
        self.limit = limit
        super().__init__(
            f"semiclassical propagator invalid at t={t:.6g}: "
            f"validity ratio 2*hbar*sinh(Omega t)/(M a^2 Omega) = {ratio:.6g} >= {limit:g}"
        )


class NoInteriorMaximumError(DomainError):
    """The density at a fixed angle has no interior maximum in time."""


class SolverError(RodTipError, RuntimeError):
    """The tridiagonal solve of an implicit time step failed."""


class ConfigError(RodTipError):
    """Aggregated configuration problems, reported together."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {p}" for p in self.problems))


class SemiclassicalValidityWarning(UserWarning):
    """Propagator used where the validity ratio is not small."""


class RegimeWarning(UserWarning):
    """An approximation is evaluated outside the regime it was derived for."""
