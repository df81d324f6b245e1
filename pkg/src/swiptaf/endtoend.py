"""End-to-end SNR statistics of the energy-harvesting fixed-gain AF link.

The relay transmit power is either the harvested power (case 1, probability
w1 = F_PE(P_B)) or the battery power (case 2, probability w2).  In each case
the complementary CDF of the end-to-end SNR is

    K_i exp(-beta z) sum_{n<m1} sum_{p<=n} C(n,p) (beta z)^(n-p) / n!
        * H(kappa_i z^(alpha2/2) | block_i)

with beta = m1 / mean(gamma1) and H a Fox H^{q,0}_{0,q}.  Block 1 is
(mu2,1),(p,alpha2/2),(m1,alpha2/2) and block 2 is (mu2,1),(p,alpha2/2).
"""

import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from math import comb, factorial, lgamma, log

import numpy as np

from . import channels
from .channels import AlphaMuParams, EnergyConfig, NakagamiParams
from .errors import AccuracyError, DomainError
from .specfun import HFunctionSpec, MetricResult, fox_h

CLAMP_TOL = 1e-8
CDF_RTOL = 1e-12


@dataclass(frozen=True)
class SystemConfig:
    nak: NakagamiParams = field(default_factory=NakagamiParams)
    am: AlphaMuParams = field(default_factory=AlphaMuParams)
    energy: EnergyConfig = field(default_factory=EnergyConfig)
    C: float = 1.0

    def __post_init__(self):
        if not self.C > 0:
            raise DomainError(f"relay gain constant C must be > 0, got {self.C}")

    def replace(self, **changes):
        return replace(self, **changes)

    @property
    def gamma1_mean(self):
        return channels.gamma1_mean(self.nak, self.energy)

    @property
    def beta(self):
        return self.nak.m1 / self.gamma1_mean

    @property
    def upsilon2_mean(self):
        return channels.upsilon2_mean(self.am, self.energy)

    @property
    def gamma2_mean_harvest(self):
        """Scale of the second-hop SNR when the relay spends the harvested power."""
        return channels.mean_harvested_power(self.nak, self.energy) * self.upsilon2_mean

    @property
    def gamma2_mean_battery(self):
        return self.energy.battery_power * self.upsilon2_mean

    @property
    def weights(self):
        w1, w2 = channels.battery_weights(self.nak, self.energy)
        return MixtureWeights(w1, w2)

    def require_integer_m(self):
        if not self.nak.integer_m or self.nak.m1 < 1:
            raise DomainError(
                f"closed-form metrics need a positive integer m1, got {self.nak.m1}")
        return int(self.nak.m1)


@dataclass(frozen=True)
class MixtureWeights:
    w1: float
    w2: float

    def __iter__(self):
        return iter((self.w1, self.w2))


@dataclass(frozen=True)
class TermRow:
    n: int
    p: int
    coef: float          # C(n, p) / n!
    lower: tuple         # Fox H lower pairs


@dataclass(frozen=True)
class CaseTerms:
    case: int
    weight: float
    K: float             # normalising constant
    kappa: float         # z-free H-argument prefactor
    rows: tuple
    alpha2: float = 2.0

    def argument(self, z):
        return self.kappa * z ** (0.5 * self.alpha2)


@dataclass(frozen=True)
class HTermTable:
    beta: float
    cases: tuple         # CaseTerms with nonzero weight


def delta_block(am: AlphaMuParams, m1, p, case):
    half = 0.5 * am.alpha2
    if case == 1:
        return ((am.mu2, 1.0), (float(p), half), (float(m1), half))
    return ((am.mu2, 1.0), (float(p), half))


def case_prefactor(cfg: SystemConfig, case):
    """kappa_i: the H argument is kappa_i * z^(alpha2/2)."""
    m, mu, a = cfg.nak.m1, cfg.am.mu2, cfg.am.alpha2
    if case == 1:
        base = m * m * cfg.C / (cfg.gamma1_mean * cfg.gamma2_mean_harvest)
    else:
        base = m * cfg.C / (cfg.gamma1_mean * cfg.gamma2_mean_battery)
    return mu * base ** (0.5 * a)


def case_constant(cfg: SystemConfig, case):
    k = 0.5 * cfg.am.alpha2 / np.exp(lgamma(cfg.am.mu2))
    return k / np.exp(lgamma(cfg.nak.m1)) if case == 1 else k


@lru_cache(maxsize=256)
def term_table(cfg: SystemConfig) -> HTermTable:
    """Per-configuration table of the (n, p) double-sum terms."""
    m = cfg.require_integer_m()
    cases = []
    for case, w in zip((1, 2), cfg.weights):
        if w == 0.0:
            continue
        rows = tuple(
            TermRow(n, p, comb(n, p) / factorial(n), delta_block(cfg.am, m, p, case))
            for n in range(m) for p in range(n + 1))
        cases.append(CaseTerms(case, w, case_constant(cfg, case), case_prefactor(cfg, case),
                               rows, cfg.am.alpha2))
    return HTermTable(cfg.beta, tuple(cases))


def e2e_snr(g1, g2, C):
    """Fixed-gain AF end-to-end SNR g1*g2/(g2 + C)."""
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    with np.errstate(invalid="ignore"):
        out = np.where(np.isinf(g2), g1, g1 * g2 / (g2 + C))
    return out[()] if out.ndim == 0 else out


def _h(lower, w, rtol, derivative=False):
    if derivative:
        spec = HFunctionSpec(len(lower), 1, ((0.0, 1.0),), lower + ((1.0, 1.0),), w)
    else:
        spec = HFunctionSpec(len(lower), 0, (), lower, w)
    return fox_h(spec, rtol=rtol)


def branch_ccdf(cfg: SystemConfig, z, case, rtol=CDF_RTOL):
    """Complementary CDF of the end-to-end SNR given the relay-power case."""
    table = term_table(cfg)
    beta = table.beta
    if z == 0:
        return MetricResult(1.0, 0.0, terms=0)
    ct = next((c for c in table.cases if c.case == case), None)
    if ct is None:
        ct = _standalone_case(cfg, case)
    w = ct.argument(z)
    total, err, nodes = 0.0, 0.0, 0
    for row in ct.rows:
        lead = row.coef * np.exp((row.n - row.p) * log(beta * z) - beta * z)
        r = _h(row.lower, w, rtol)
        total += lead * r.value
        err += lead * r.error
        nodes += r.nodes
    return MetricResult(ct.K * total, ct.K * err, nodes=nodes, terms=len(ct.rows))


def _standalone_case(cfg, case):
    m = cfg.require_integer_m()
    rows = tuple(TermRow(n, p, comb(n, p) / factorial(n), delta_block(cfg.am, m, p, case))
                 for n in range(m) for p in range(n + 1))
    return CaseTerms(case, 0.0, case_constant(cfg, case), case_prefactor(cfg, case), rows,
                     cfg.am.alpha2)


def e2e_ccdf(cfg: SystemConfig, z, rtol=CDF_RTOL):
    """1 - F(z), summed directly so small tails keep full relative accuracy."""
    if z < 0:
        raise DomainError(f"SNR threshold must be >= 0, got {z}")
    table = term_table(cfg)
    val, err, terms, nodes = 0.0, 0.0, 0, 0
    for ct in table.cases:
        r = branch_ccdf(cfg, z, ct.case, rtol)
        val += ct.weight * r.value
        err += ct.weight * r.error
        terms += r.terms
        nodes += r.nodes
    return MetricResult(val, err, nodes=nodes, terms=terms)


def _clamp(value, what):
    if value < -CLAMP_TOL or value > 1.0 + CLAMP_TOL:
        raise AccuracyError(f"{what} {value!r} outside [0, 1] beyond tolerance")
    return min(max(value, 0.0), 1.0)


def e2e_cdf(cfg: SystemConfig, z, rtol=CDF_RTOL):
    """Mixture CDF of the end-to-end SNR at threshold ``z``."""
    r = e2e_ccdf(cfg, z, rtol)
    r.value = _clamp(1.0 - r.value, "CDF")
    return r


def e2e_pdf(cfg: SystemConfig, z, rtol=CDF_RTOL):
    """Density of the end-to-end SNR at ``z > 0``."""
    if z <= 0:
        raise DomainError(f"density needs z > 0, got {z}")
    if z < 1e-12:
        warnings.warn("end-to-end density evaluated very close to its singular origin")
    table = term_table(cfg)
    beta = table.beta
    half = 0.5 * cfg.am.alpha2
    val, err, terms = 0.0, 0.0, 0
    for ct in table.cases:
        w = ct.argument(z)
        acc, acc_err = 0.0, 0.0
        for row in ct.rows:
            k = row.n - row.p
            lead = row.coef * np.exp(k * log(beta * z) - beta * z)
            level = _h(row.lower, w, rtol)
            slope = _h(row.lower, w, rtol, derivative=True)
            acc += lead * ((beta - k / z) * level.value - (half / z) * slope.value)
            acc_err += lead * (abs(beta - k / z) * level.error + (half / z) * slope.error)
            terms += 2
        val += ct.weight * ct.K * acc
        err += ct.weight * ct.K * acc_err
    return MetricResult(val, err, terms=terms)
