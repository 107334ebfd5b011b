"""Exception hierarchy shared by the modelling, estimation and runner layers."""


class PseudoSpinError(Exception):
    """Base class for all errors raised by this package."""


class ZeroOverlap(PseudoSpinError):
    """Pre- and post-selected states are orthogonal; the weak value diverges."""


class AngleSingularity(PseudoSpinError):
    """A first-order formula was evaluated where cot(theta) is undefined."""


class QuadratureFailure(PseudoSpinError):
    """Numerical integration did not reach the requested tolerance."""


class VanishingPostselection(PseudoSpinError):
    """Post-selection probability fell below the configured floor."""


class TotalInternalReflection(PseudoSpinError):
    pass


class BrewsterSingularity(PseudoSpinError):
    """r_p vanishes, so the SHEL shift is undefined."""


class DegenerateOutcome(PseudoSpinError):
    """One detector receives all photons; Fisher information is undefined."""


class NonMonotonicInterval(PseudoSpinError):
    """The search interval does not lie on a single monotonic branch."""


class ContrastOutOfRange(PseudoSpinError):
    pass


class EmptyFrame(PseudoSpinError):
    pass


class ConfigError(PseudoSpinError):
    pass


class ParseError(ConfigError):
    """Malformed config document. Carries the offending line or key."""

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class ValidationError(ConfigError):
    pass
