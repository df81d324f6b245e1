"""Exception types shared across the package."""


class SwiptafError(Exception):
    """Base class for all package errors."""


class DomainError(SwiptafError, ValueError):
    """Argument outside the mathematical domain of a function."""


class PoleError(DomainError):
    """Evaluation requested at (or too close to) a pole of Gamma."""


class ContourError(SwiptafError):
    """No vertical contour separates the two pole families."""


class ConvergenceError(SwiptafError):
    """Quadrature or series failed to reach the requested accuracy."""


class DivergentMomentError(SwiptafError):
    """The requested moment of the end-to-end SNR does not exist."""


class AccuracyError(SwiptafError):
    """A probability left [0, 1] by more than the numerical tolerance."""


class BracketError(SwiptafError):
    """Root bracketing failed to find a sign change."""


class ConfigError(SwiptafError, ValueError):
    """Invalid or unparseable configuration."""
