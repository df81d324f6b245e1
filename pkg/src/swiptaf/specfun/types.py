"""Parameter containers for univariate, incomplete and bivariate Fox H-functions."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import DomainError


@dataclass(frozen=True)
class GammaPair:
    a: float
    A: float

    def __post_init__(self):
        if not self.A > 0:
            raise DomainError(f"gamma pair scale must be > 0, got A={self.A}")


@dataclass(frozen=True)
class GammaTriple:
    """Pair plus incompleteness argument; ``alpha == 0`` means complete Gamma."""

    a: float
    A: float
    alpha: float = 0.0

    def __post_init__(self):
        if not self.A > 0:
            raise DomainError(f"gamma triple scale must be > 0, got A={self.A}")
        if not self.alpha >= 0:
            raise DomainError(f"incompleteness argument must be >= 0, got {self.alpha}")


def _as_pairs(items):
    return tuple(it if isinstance(it, GammaPair) else GammaPair(*it) for it in items)


def _as_triples(items):
    out = []
    for it in items:
        if isinstance(it, GammaTriple):
            out.append(it)
        elif isinstance(it, GammaPair):
            out.append(GammaTriple(it.a, it.A, 0.0))
        else:
            out.append(GammaTriple(*it))
    return tuple(out)


def _check_orders(m, n, p, q):
    if min(m, n, p, q) < 0:
        raise DomainError("H-function orders must be nonnegative")
    if n > p or m > q:
        raise DomainError(f"need n <= p and m <= q, got m={m} n={n} p={p} q={q}")


@dataclass(frozen=True)
class HFunctionSpec:
    """H^{m,n}_{p,q}(argument | upper; lower); p and q follow from the lists."""

    m: int
    n: int
    upper: tuple
    lower: tuple
    argument: complex

    def __post_init__(self):
        object.__setattr__(self, "upper", _as_pairs(self.upper))
        object.__setattr__(self, "lower", _as_pairs(self.lower))
        _check_orders(self.m, self.n, self.p, self.q)
        if self.argument == 0:
            raise DomainError("H-function argument must be nonzero")

    @property
    def p(self):
        return len(self.upper)

    @property
    def q(self):
        return len(self.lower)

    def with_argument(self, z):
        return HFunctionSpec(self.m, self.n, self.upper, self.lower, z)


@dataclass(frozen=True)
class IncompleteHSpec:
    """Generalized incomplete-upper H: triples whose third slot is > 0 use Gamma(., x)."""

    m: int
    n: int
    upper: tuple
    lower: tuple
    argument: complex

    def __post_init__(self):
        object.__setattr__(self, "upper", _as_triples(self.upper))
        object.__setattr__(self, "lower", _as_triples(self.lower))
        _check_orders(self.m, self.n, self.p, self.q)
        if self.argument == 0:
            raise DomainError("H-function argument must be nonzero")

    @property
    def p(self):
        return len(self.upper)

    @property
    def q(self):
        return len(self.lower)

    @classmethod
    def from_complete(cls, spec: HFunctionSpec):
        return cls(spec.m, spec.n, spec.upper, spec.lower, spec.argument)


@dataclass(frozen=True)
class BivariateHSpec:
    """Bivariate H^{0,n1:m2,n2:m3,n3}(x, y).

    ``outer_upper`` / ``outer_lower`` hold triples (a, alpha, A): the coupled
    factor is Gamma(1 - a - alpha*s - A*t) for the first ``n1`` upper entries
    (numerator) and Gamma(a + alpha*s + A*t) for the rest (denominator); every
    outer lower entry contributes 1/Gamma(1 - b - beta*s - B*t).  The s-block
    pairs with ``x`` and the t-block with ``y``, each as in a univariate H.
    """

    n1: int
    outer_upper: tuple
    outer_lower: tuple
    m2: int
    n2: int
    s_upper: tuple
    s_lower: tuple
    m3: int
    n3: int
    t_upper: tuple
    t_lower: tuple
    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "outer_upper", tuple(tuple(map(float, t)) for t in self.outer_upper))
        object.__setattr__(self, "outer_lower", tuple(tuple(map(float, t)) for t in self.outer_lower))
        for name in ("s_upper", "s_lower", "t_upper", "t_lower"):
            object.__setattr__(self, name, _as_pairs(getattr(self, name)))
        if not 0 <= self.n1 <= len(self.outer_upper):
            raise DomainError("n1 out of range")
        _check_orders(self.m2, self.n2, len(self.s_upper), len(self.s_lower))
        _check_orders(self.m3, self.n3, len(self.t_upper), len(self.t_lower))
        if not (self.x > 0 and self.y > 0):
            raise DomainError("bivariate H arguments must be positive")


@dataclass(frozen=True)
class ContourPlan:
    c: float
    L: float
    N: int
    rule: str = "gauss-legendre"
    interval: tuple = (-np.inf, np.inf)


@dataclass
class MetricResult:
    """A computed value with its error estimate and evaluation diagnostics."""

    value: float
    error: float = 0.0
    contour: Optional[tuple] = None
    nodes: int = 0
    terms: int = 1
    info: dict = field(default_factory=dict)

    def __float__(self):
        return float(np.real(self.value))
