"""Mellin-Barnes kernels and vertical-contour placement.

A kernel is a product of factors Gamma(u + v*s [, x])**sign.  Numerator
factors with v > 0 form the left pole family, numerator factors with v < 0 the
right family.  Factors carrying an incompleteness argument x > 0 are entire in
s and therefore do not constrain the contour.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ContourError
from .gammafn import log_upper_gamma, loggamma
from .types import ContourPlan, HFunctionSpec, IncompleteHSpec

POLE_GUARD = 1e-6
SADDLE_MARGIN = 0.02
FALLBACK_OFFSET = 1.0
_SADDLE_REACH = 200.0


@dataclass(frozen=True)
class Factor:
    u: float
    v: float
    x: float = 0.0
    sign: int = 1

    def log(self, s):
        arg = self.u + self.v * s
        if self.x > 0.0:
            return self.sign * log_upper_gamma(arg, self.x)
        return self.sign * loggamma(arg)

    @property
    def constrains(self):
        return self.sign > 0 and self.x == 0.0

    def first_pole(self):
        return -self.u / self.v

    def poles(self, count=4):
        j = np.arange(count)
        return (-self.u - j) / self.v


def kernel_factors(spec):
    """Translate an H / incomplete-H spec into a list of gamma factors."""
    if isinstance(spec, HFunctionSpec):
        spec = IncompleteHSpec.from_complete(spec)
    out = []
    for k, t in enumerate(spec.lower):
        if k < spec.m:
            out.append(Factor(t.a, t.A, t.alpha, +1))
        else:
            out.append(Factor(1.0 - t.a, -t.A, t.alpha, -1))
    for i, t in enumerate(spec.upper):
        if i < spec.n:
            out.append(Factor(1.0 - t.a, -t.A, t.alpha, +1))
        else:
            out.append(Factor(t.a, t.A, t.alpha, -1))
    return out


def log_kernel(factors, s):
    s = np.asarray(s, dtype=complex)
    acc = np.zeros(s.shape, dtype=complex)
    for f in factors:
        acc = acc + f.log(s)
    return acc


def feasible_interval(factors):
    lo, hi = -np.inf, np.inf
    for f in factors:
        if not f.constrains:
            continue
        if f.v > 0:
            lo = max(lo, f.first_pole())
        else:
            hi = min(hi, f.first_pole())
    return lo, hi


def decay_rate(factors):
    """Exponential decay rate of |kernel| along a vertical line, in units of pi/2."""
    rate = 0.0
    for f in factors:
        if f.x > 0.0:
            continue
        rate += f.sign * abs(f.v)
    return rate


def _pole_distance(factors, c):
    d = np.inf
    for f in factors:
        if f.sign > 0:
            d = min(d, np.min(np.abs(f.poles() - c)))
    return d


def _midpoint(lo, hi):
    if np.isfinite(lo) and np.isfinite(hi):
        return 0.5 * (lo + hi)
    if np.isfinite(lo):
        return lo + FALLBACK_OFFSET
    if np.isfinite(hi):
        return hi - FALLBACK_OFFSET
    return 0.0


def _saddle(factors, log_z, lo, hi):
    width = hi - lo
    margin = min(SADDLE_MARGIN, 0.25 * width) if np.isfinite(width) else SADDLE_MARGIN
    a = lo + margin if np.isfinite(lo) else hi - _SADDLE_REACH
    b = hi - margin if np.isfinite(hi) else lo + _SADDLE_REACH
    if not np.isfinite(a):
        a, b = -_SADDLE_REACH / 2, _SADDLE_REACH / 2

    def phi(cs):
        with np.errstate(all="ignore"):
            val = np.real(log_kernel(factors, cs + 0j)) - cs * log_z
        return np.where(np.isfinite(val), val, np.inf)

    # coarse grid, then a finer grid around the best coarse point
    grid = np.linspace(a, b, 97)
    k = int(np.argmin(phi(grid)))
    h = grid[1] - grid[0]
    fine = np.linspace(max(a, grid[k] - h), min(b, grid[k] + h), 65)
    c = float(fine[np.argmin(phi(fine))])
    # stay clear of the removable singular points of incomplete factors too
    for f in factors:
        if f.sign > 0 and f.x > 0.0:
            near = f.poles(8)
            j = np.argmin(np.abs(near - c))
            if abs(near[j] - c) < margin:
                for cand in (near[j] + margin, near[j] - margin):
                    if a <= cand <= b:
                        c = cand
                        break
    return c


def plan_contour(spec, rule="midpoint", log_z=None, nodes=20):
    """Place a vertical contour separating the left and right pole families.

    ``rule="midpoint"`` takes the middle of the feasible interval (or sits one
    unit beyond the finite end of a half-infinite interval).  ``rule="saddle"``
    instead minimises |kernel(c) z^-c| over the interval, which keeps the
    quadrature free of cancellation for extreme arguments.
    """
    factors = spec if isinstance(spec, list) else kernel_factors(spec)
    lo, hi = feasible_interval(factors)
    if not lo < hi:
        raise ContourError(f"empty feasible interval ({lo:.6g}, {hi:.6g})")
    if rule == "midpoint":
        c = _midpoint(lo, hi)
        if _pole_distance(factors, c) < POLE_GUARD:
            width = hi - lo if np.isfinite(hi - lo) else 1.0
            c += 0.1 * width
    elif rule == "saddle":
        if log_z is None:
            log_z = float(np.log(abs(spec.argument)))
        c = _saddle(factors, log_z, lo, hi)
    else:
        raise ValueError(f"unknown contour rule {rule!r}")
    L = truncation_length(factors, c, log_z if log_z is not None else 0.0)
    return ContourPlan(c=c, L=L, N=nodes, interval=(lo, hi))


def truncation_length(factors, c, log_z, tail=1e-17, imag_log_z=0.0):
    """Half-length beyond which |integrand| drops below ``tail`` times its peak."""
    taus = np.concatenate([[0.0], 0.25 * 2.0 ** np.arange(0, 16)])
    s = c + 1j * taus
    lv = np.real(log_kernel(factors, s)) - c * log_z + taus * imag_log_z
    peak = np.max(lv[np.isfinite(lv)])
    below = np.nonzero(lv < peak + np.log(tail))[0]
    below = below[below > np.argmax(lv)]
    if below.size == 0:
        raise ContourError("integrand does not decay along the contour")
    k = below[0]
    # refine inside the bracketing octave on a 5% grid
    fine = np.linspace(taus[k - 1], taus[k], 21)[1:]
    lv = np.real(log_kernel(factors, c + 1j * fine)) - c * log_z + fine * imag_log_z
    return float(fine[np.argmax(lv < peak + np.log(tail))])
