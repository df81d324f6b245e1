"""Closed-form ASER and average capacity under ORA, OPRA, CIFR and TCIFR.

Every metric integrates the per-case complementary CDF term by term.  A term

    exp(-beta z) (beta z)^k H(kappa z^(alpha2/2) | block),   k = n - p,

against z^r exp(-tau z) or over [x, inf) produces a single (incomplete) Fox H
whose extra upper entry carries k; the ORA kernel 1/(1+z) adds a second
Mellin-Barnes variable and yields a bivariate H.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import gamma as gamma_fn, log, pi, sqrt

import numpy as np
from scipy.optimize import brentq

from .endtoend import SystemConfig, e2e_ccdf, term_table
from .errors import AccuracyError, BracketError, DivergentMomentError, DomainError
from .specfun import (
    BivariateHSpec,
    HFunctionSpec,
    IncompleteHSpec,
    MetricResult,
    bivariate_fox_h,
    fox_h,
    incomplete_fox_h,
)

LN2 = log(2.0)
METRIC_RTOL = 1e-12
BIVARIATE_RTOL = 1e-9
CUTOFF_RESIDUAL = 1e-9


@dataclass(frozen=True)
class ModulationParams:
    """Conditional error probability rho * erfc(sqrt(tau * snr))."""

    rho: float
    tau: float
    name: str = ""

    def __post_init__(self):
        if not 0 < self.rho <= 1:
            raise DomainError(f"rho must lie in (0, 1], got {self.rho}")
        if not self.tau > 0:
            raise DomainError(f"tau must be > 0, got {self.tau}")


BPSK = ModulationParams(0.5, 1.0, "BPSK")
BFSK = ModulationParams(0.5, 0.5, "BFSK")
QPSK = ModulationParams(1.0, 0.5, "QPSK")
MODULATIONS = {m.name: m for m in (BPSK, BFSK, QPSK)}


@dataclass(frozen=True)
class CutoffSolve:
    gamma_star: float
    residual: float
    bracket: tuple
    iterations: int


def _rows(cfg):
    """Yield (weight * K, kappa, alpha/2, row) over the active cases."""
    table = term_table(cfg)
    for ct in table.cases:
        for row in ct.rows:
            yield ct.weight * ct.K, ct.kappa, 0.5 * cfg.am.alpha2, row


def _accumulate(results):
    val = err = 0.0
    nodes = terms = 0
    for scale, r in results:
        val += scale * r.value
        err += abs(scale) * r.error
        nodes += r.nodes if isinstance(r.nodes, int) else 0
        terms += 1
    return val, err, nodes, terms


# -- ASER ---------------------------------------------------------------

def aser(cfg: SystemConfig, mod: ModulationParams, rtol=METRIC_RTOL) -> MetricResult:
    """Average symbol error rate rho * E[erfc(sqrt(tau * snr))]."""
    beta = cfg.beta
    sigma = beta + mod.tau

    def parts():
        for wk, kappa, half, row in _rows(cfg):
            k = row.n - row.p
            spec = HFunctionSpec(len(row.lower), 1, ((0.5 - k, half),), row.lower,
                                 kappa * sigma ** (-half))
            yield wk * row.coef * (beta / sigma) ** k, fox_h(spec, rtol=rtol)

    val, err, nodes, terms = _accumulate(parts())
    lead = sqrt(mod.tau / (pi * sigma))
    value = mod.rho * (1.0 - lead * val)
    return MetricResult(value, mod.rho * lead * err, nodes=nodes, terms=terms,
                        info={"sigma": sigma, "modulation": mod.name})


# -- ORA ----------------------------------------------------------------

def ora_spec(beta, kappa, half, row):
    k = row.n - row.p
    return BivariateHSpec(
        n1=1, outer_upper=((-k, 1.0, half),), outer_lower=(),
        m2=1, n2=1, s_upper=((0.0, 1.0),), s_lower=((0.0, 1.0),),
        m3=len(row.lower), n3=0, t_upper=(), t_lower=row.lower,
        x=1.0 / beta, y=kappa * beta ** (-half))


def capacity_ora(cfg: SystemConfig, rtol=BIVARIATE_RTOL) -> MetricResult:
    """Ergodic capacity E[log2(1 + snr)] in bits/s/Hz."""
    beta = cfg.beta
    contours = []

    def parts():
        for wk, kappa, half, row in _rows(cfg):
            r = bivariate_fox_h(ora_spec(beta, kappa, half, row), rtol=rtol)
            contours.append(r.contour)
            yield wk * row.coef / (beta * LN2), r

    val, err, nodes, terms = _accumulate(parts())
    return MetricResult(val, err, contour=tuple(contours), nodes=nodes, terms=terms)


# -- truncated integrals -------------------------------------------------

def _truncated_mellin_spec(kappa, half, row, beta, x, shift):
    """M(kappa beta^-half | (shift + p - n, half, beta x); block)."""
    k = row.n - row.p
    lower = tuple((b, B, 0.0) for b, B in row.lower)
    return IncompleteHSpec(len(lower), 1, ((shift - k, half, beta * x),), lower,
                           kappa * beta ** (-half))


def ccdf_power_integral(cfg: SystemConfig, x, power, rtol=METRIC_RTOL) -> MetricResult:
    """Integral of F^c(z) z^(-power) over [x, inf) for power in {1, 2}.

    power=1 is (ln 2) times the OPRA capacity at cutoff x; power=2 drives the
    optimal-cutoff equation.  Each term is a single positive incomplete H.
    """
    if x <= 0:
        raise DomainError("truncation point must be > 0")
    beta = cfg.beta

    def parts():
        for wk, kappa, half, row in _rows(cfg):
            spec = _truncated_mellin_spec(kappa, half, row, beta, x, float(power))
            yield wk * row.coef * beta ** (power - 1), incomplete_fox_h(spec, rtol=rtol)

    val, err, nodes, terms = _accumulate(parts())
    return MetricResult(val, err, nodes=nodes, terms=terms)


def _exact_inverse_moment(cfg: SystemConfig):
    m, mu, alpha = cfg.nak.m1, cfg.am.mu2, cfg.am.alpha2
    if m <= 1 or alpha * mu / 2 <= 1:
        raise DivergentMomentError(
            f"E[1/snr] diverges (need m1 > 1 and alpha2*mu2/2 > 1; got m1={m}, "
            f"alpha2*mu2/2={alpha * mu / 2})")
    inv_g1 = m / ((m - 1) * cfg.gamma1_mean)
    # E[(G/mu)^(-2/alpha)] for G ~ Gamma(mu, 1)
    inv_ups = mu ** (2 / alpha) * np.exp(np.log(gamma_fn(mu - 2 / alpha)) - np.log(gamma_fn(mu)))
    val = 0.0
    for case, w in zip((1, 2), cfg.weights):
        if w == 0.0:
            continue
        if case == 1:
            inv_g2 = m / ((m - 1) * cfg.gamma2_mean_harvest) * inv_ups
        else:
            inv_g2 = inv_ups / cfg.gamma2_mean_battery
        val += w * inv_g1 * (1.0 + cfg.C * inv_g2)
    return val


def _t_term_moment(cfg: SystemConfig, x, rtol):
    # three incomplete-H families per term: the level part of the density, its
    # (n - p)/z correction and the derivative part; they cancel in the far tail
    beta = cfg.beta

    def parts():
        for wk, kappa, half, row in _rows(cfg):
            k = row.n - row.p
            scale = wk * row.coef * beta
            yield scale, incomplete_fox_h(_truncated_mellin_spec(kappa, half, row, beta, x, 1.0), rtol=rtol)
            shifted = _truncated_mellin_spec(kappa, half, row, beta, x, 2.0)
            if k:
                yield -k * scale, incomplete_fox_h(shifted, rtol=rtol)
            slope = IncompleteHSpec(
                shifted.m, 2, shifted.upper + ((0.0, 1.0, 0.0),),
                shifted.lower + ((1.0, 1.0, 0.0),), shifted.argument)
            yield -half * scale, incomplete_fox_h(slope, rtol=rtol)

    val, err, nodes, terms = _accumulate(parts())
    return MetricResult(val, err, nodes=nodes, terms=terms, info={"method": "t-terms"})


def _by_parts_moment(cfg: SystemConfig, x, rtol, ccdf=None):
    # int_x^inf f/z = F^c(x)/x - int_x^inf F^c/z^2, two positive closed forms
    ccdf = e2e_ccdf(cfg, x, rtol) if ccdf is None else ccdf
    tail = ccdf_power_integral(cfg, x, 2, rtol)
    val = ccdf.value / x - tail.value
    return MetricResult(val, ccdf.error / x + tail.error, nodes=tail.nodes,
                        terms=ccdf.terms + tail.terms, info={"method": "by-parts"})


def inverse_snr_moment(cfg: SystemConfig, x, rtol=METRIC_RTOL, method="auto") -> MetricResult:
    """Truncated inverse moment: integral of f(z)/z over [x, inf).

    Two closed forms are available for x > 0.  ``"t-terms"`` sums the
    incomplete-H families of the density directly; they cancel against each
    other once x sits in the upper tail.  ``"by-parts"`` integrates by parts
    into F^c(x)/x minus the F^c/z^2 tail integral, which instead cancels for x
    well below the bulk.  ``"auto"`` picks t-terms while F^c(x) >= 1/2.

    At x = 0 the families have coincident poles and only their sum is
    finite, so the untruncated value comes from the product-moment identity
    E[1/g1] (1 + C E[1/g2]).
    """
    if x < 0:
        raise DomainError(f"truncation point must be >= 0, got {x}")
    if x == 0:
        return MetricResult(_exact_inverse_moment(cfg), 0.0, terms=0,
                            info={"method": "moment-identity"})
    if method == "auto":
        ccdf = e2e_ccdf(cfg, x, rtol)
        if ccdf.value >= 0.5:
            r = _t_term_moment(cfg, x, rtol)
        else:
            r = _by_parts_moment(cfg, x, rtol, ccdf)
    elif method == "by-parts":
        r = _by_parts_moment(cfg, x, rtol)
    elif method == "t-terms":
        r = _t_term_moment(cfg, x, rtol)
    else:
        raise DomainError(f"unknown method {method!r}")
    if r.value < 0:
        raise AccuracyError(f"truncated inverse moment came out negative ({r.value:.3e})")
    return r


# -- OPRA ---------------------------------------------------------------

def cutoff_function(cfg: SystemConfig, x, rtol=METRIC_RTOL):
    """g(x) = F^c(x)/x - E[1/snr]_x - 1, evaluated as int_x^inf F^c/z^2 - 1."""
    return ccdf_power_integral(cfg, x, 2, rtol).value - 1.0


@lru_cache(maxsize=128)
def opra_cutoff(cfg: SystemConfig, rtol=METRIC_RTOL) -> CutoffSolve:
    """Unique root of the decreasing cutoff function g."""
    lo, hi = 1e-6, 1.0
    g_lo, g_hi = cutoff_function(cfg, lo, rtol), cutoff_function(cfg, hi, rtol)
    for _ in range(60):
        if g_lo > 0 >= g_hi:
            break
        if g_lo <= 0:
            hi, g_hi = lo, g_lo
            lo /= 10.0
            g_lo = cutoff_function(cfg, lo, rtol)
        else:
            lo, g_lo = hi, g_hi
            hi *= 10.0
            g_hi = cutoff_function(cfg, hi, rtol)
    else:
        raise BracketError("cutoff function shows no sign change")
    if g_hi == 0:
        return CutoffSolve(hi, 0.0, (lo, hi), 0)
    root, info = brentq(lambda x: cutoff_function(cfg, x, rtol), lo, hi,
                        xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200,
                        full_output=True)
    residual = cutoff_function(cfg, root, rtol)
    return CutoffSolve(float(root), float(residual), (lo, hi), info.iterations)


def capacity_opra(cfg: SystemConfig, rtol=METRIC_RTOL, cutoff=None) -> MetricResult:
    """Capacity with optimal power and rate adaptation."""
    solve = opra_cutoff(cfg) if cutoff is None else None
    gstar = solve.gamma_star if solve else cutoff
    r = ccdf_power_integral(cfg, gstar, 1, rtol)
    return MetricResult(r.value / LN2, r.error / LN2, nodes=r.nodes, terms=r.terms,
                        info={"gamma_star": gstar})


# -- channel inversion ----------------------------------------------------

def capacity_cifr(cfg: SystemConfig, rtol=METRIC_RTOL) -> MetricResult:
    """Capacity with full channel inversion."""
    moment = inverse_snr_moment(cfg, 0.0, rtol)
    return MetricResult(np.log2(1.0 + 1.0 / moment.value), 0.0,
                        info={"inverse_moment": moment.value})


def capacity_tcifr(cfg: SystemConfig, gamma0=None, rtol=METRIC_RTOL) -> MetricResult:
    """Truncated channel inversion above ``gamma0`` (default: the OPRA cutoff)."""
    if gamma0 is None:
        gamma0 = opra_cutoff(cfg).gamma_star
    if not gamma0 > 0:
        raise DomainError(f"gamma0 must be > 0, got {gamma0}")
    ccdf = e2e_ccdf(cfg, gamma0)
    if ccdf.value <= 0.0:
        # nothing survives the truncation
        return MetricResult(0.0, ccdf.error, terms=ccdf.terms, info={"gamma0": gamma0})
    moment = inverse_snr_moment(cfg, gamma0, rtol)
    rate = np.log2(1.0 + 1.0 / moment.value)
    # first-order propagation of the two error estimates
    err = ccdf.error * rate + ccdf.value * moment.error / (LN2 * moment.value * (1 + moment.value))
    return MetricResult(ccdf.value * rate, err, terms=moment.terms + ccdf.terms,
                        info={"gamma0": gamma0, "inverse_moment": moment.value})
