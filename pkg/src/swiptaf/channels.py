"""Fading and energy-harvesting primitives: densities and samplers.

First hop: Nakagami-m, so the S-R SNR is Gamma distributed.  Second hop:
alpha-mu, whose SNR factor Upsilon_2 satisfies mu2*(Upsilon_2/mean)^(alpha2/2)
~ Gamma(mu2, 1).  The relay transmits with the harvested power, clipped at the
battery level.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammainc, gammaincc, gammaln

from .errors import DomainError


class Scheme(str, Enum):
    TS = "TS"
    PS = "PS"


@dataclass(frozen=True)
class NakagamiParams:
    m1: float = 3.0
    omega1: float = 5.0

    def __post_init__(self):
        if not self.m1 >= 0.5:
            raise DomainError(f"Nakagami m1 must be >= 0.5, got {self.m1}")
        if not self.omega1 > 0:
            raise DomainError(f"omega1 must be > 0, got {self.omega1}")

    @property
    def integer_m(self):
        return float(self.m1).is_integer()


@dataclass(frozen=True)
class AlphaMuParams:
    alpha2: float = 2.0
    mu2: float = 4.2
    omega2: float = 5.0

    def __post_init__(self):
        for name in ("alpha2", "mu2", "omega2"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class EnergyConfig:
    """Link budget and harvesting parameters.

    ``kappa`` is the harvesting fraction (time fraction for TS, power fraction
    for PS); ``theta_eff`` is the RF-to-DC conversion efficiency.
    """

    scheme: Scheme = Scheme.TS
    kappa: float = 0.7
    theta_eff: float = 0.7
    T0: float = 1.0
    T1: float = 1.0
    battery: float = 500.0
    source_power: float = 1.0
    d1: float = 25.0
    d2: float = 25.0
    delta: float = 2.7
    N1: float = 1e-4
    N2: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not 0 < self.kappa < 1:
            raise DomainError(f"kappa must lie in (0, 1), got {self.kappa}")
        if not 0 < self.theta_eff <= 1:
            raise DomainError(f"theta_eff must lie in (0, 1], got {self.theta_eff}")
        for name in ("T0", "T1", "battery", "source_power", "d1", "d2", "delta", "N1", "N2"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0, got {getattr(self, name)}")

    @property
    def info_fraction(self):
        """1 - varsigma: share of the received power used for information."""
        return 1.0 - self.kappa if self.scheme is Scheme.PS else 1.0

    @property
    def battery_power(self):
        return self.battery / self.T1

    @property
    def path_loss1(self):
        return self.d1 ** self.delta

    @property
    def path_loss2(self):
        return self.d2 ** self.delta


def gamma1_mean(nak: NakagamiParams, cfg: EnergyConfig):
    return cfg.info_fraction * cfg.source_power * nak.omega1 / (cfg.path_loss1 * cfg.N1)


def psi_constant(nak: NakagamiParams, cfg: EnergyConfig):
    """Rate of the Gamma law of P_E = E_R / T1."""
    return nak.m1 * cfg.T1 * cfg.path_loss1 / (
        cfg.theta_eff * cfg.kappa * cfg.T0 * cfg.source_power * nak.omega1)


def mean_harvested_power(nak: NakagamiParams, cfg: EnergyConfig):
    return cfg.theta_eff * cfg.kappa * cfg.T0 * cfg.source_power * nak.omega1 / (
        cfg.T1 * cfg.path_loss1)


def upsilon2_mean(am: AlphaMuParams, cfg: EnergyConfig):
    return am.omega2 / (cfg.path_loss2 * cfg.N2)


def _gamma_law(shape, rate, x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("density argument must be >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        logpdf = shape * np.log(rate) + (shape - 1) * np.log(x) - rate * x - gammaln(shape)
        pdf = np.where(x > 0, np.exp(logpdf), 1.0 * rate if shape == 1 else 0.0)
    return pdf, gammainc(shape, rate * x)


def gamma1_pdf_cdf(nak: NakagamiParams, cfg: EnergyConfig, z):
    """Density and CDF of the first-hop SNR at ``z``."""
    return _gamma_law(nak.m1, nak.m1 / gamma1_mean(nak, cfg), z)


def harvested_power_pdf_cdf(nak: NakagamiParams, cfg: EnergyConfig, y):
    """Density and CDF of the harvested power P_E at ``y``."""
    return _gamma_law(nak.m1, psi_constant(nak, cfg), y)


def battery_weights(nak: NakagamiParams, cfg: EnergyConfig):
    """(F_PE(P_B), 1 - F_PE(P_B)); the complement is computed directly."""
    x = psi_constant(nak, cfg) * cfg.battery_power
    return float(gammainc(nak.m1, x)), float(gammaincc(nak.m1, x))


def sample_channel_power(nak: NakagamiParams, rng, size=None):
    """|h1|^2 ~ Gamma(m1, omega1/m1)."""
    return rng.standard_gamma(nak.m1, size) * (nak.omega1 / nak.m1)


def sample_gamma1(nak: NakagamiParams, cfg: EnergyConfig, rng, size=None, h1sq=None):
    if h1sq is None:
        h1sq = sample_channel_power(nak, rng, size)
    return cfg.info_fraction * cfg.source_power * h1sq / (cfg.path_loss1 * cfg.N1)


def sample_upsilon2(am: AlphaMuParams, cfg: EnergyConfig, rng, size=None):
    g = rng.standard_gamma(am.mu2, size)
    return upsilon2_mean(am, cfg) * (g / am.mu2) ** (2.0 / am.alpha2)


def harvested_energy(nak, cfg: EnergyConfig, h1sq):
    return cfg.theta_eff * cfg.kappa * cfg.T0 * cfg.source_power * h1sq / cfg.path_loss1


def sample_relay_power(nak: NakagamiParams, cfg: EnergyConfig, rng, size=None, h1sq=None):
    """Relay transmit power: E_R / T1 below the battery capacity, P_B otherwise."""
    if h1sq is None:
        h1sq = sample_channel_power(nak, rng, size)
    e_r = harvested_energy(nak, cfg, h1sq)
    return np.where(e_r < cfg.battery, e_r / cfg.T1, cfg.battery_power)
