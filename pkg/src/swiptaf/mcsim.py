"""Independent verification engines: Monte-Carlo link simulation and quadrature.

The simulator only uses the physical model (channel draws, harvesting,
battery clipping, fixed-gain combining).  The quadrature oracle integrates
the end-to-end CDF/PDF numerically and never touches the metric closed forms.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from math import log, pi, sqrt

import numpy as np
from scipy import integrate, special
from scipy.optimize import brentq

from . import channels
from .endtoend import SystemConfig, e2e_ccdf, e2e_pdf, e2e_snr
from .errors import BracketError, ConvergenceError, DomainError
from .specfun import MetricResult

CHUNK = 1 << 17
TAIL_KEEP = 2000


class SimMode(str, Enum):
    COUPLED = "coupled"
    INDEPENDENT = "independent-approximation"


class Policy(str, Enum):
    ORA = "ORA"
    OPRA = "OPRA"
    CIFR = "CIFR"
    TCIFR = "TCIFR"


@dataclass(frozen=True)
class SimBatch:
    config: SystemConfig
    mode: SimMode = SimMode.COUPLED
    n_draws: int = 10 ** 6
    seed: int = 20240101
    streams: int = 8

    def __post_init__(self):
        object.__setattr__(self, "mode", SimMode(self.mode))
        if self.n_draws < 1 or self.streams < 1:
            raise DomainError("n_draws and streams must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    def stream_sizes(self):
        base, extra = divmod(self.n_draws, self.streams)
        return [base + (1 if s < extra else 0) for s in range(self.streams)]


@dataclass
class Estimate:
    value: float
    stderr: float
    n: int


@dataclass
class EmpiricalStats:
    n: int
    estimates: dict = field(default_factory=dict)
    cdf_grid: np.ndarray = None
    cdf: np.ndarray = None
    cdf_stderr: np.ndarray = None
    flags: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.estimates[key]


def stream_generator(seed, stream):
    """Counter-based generator for one stream; depends only on (seed, stream)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream,))))


def draw_e2e(cfg: SystemConfig, mode: SimMode, rng, size):
    """One chunk of end-to-end SNR draws."""
    nak, am, en = cfg.nak, cfg.am, cfg.energy
    h1sq = channels.sample_channel_power(nak, rng, size)
    g1 = channels.sample_gamma1(nak, en, rng, h1sq=h1sq)
    if mode is SimMode.COUPLED:
        p_r = channels.sample_relay_power(nak, en, rng, h1sq=h1sq)
    else:
        # branch chosen by an independent harvest draw; branch 1 then uses a
        # fresh, unconditioned harvested power, as the mixture CDF assumes
        branch = channels.sample_channel_power(nak, rng, size)
        harvest = channels.sample_channel_power(nak, rng, size)
        battery = channels.harvested_energy(nak, en, branch) >= en.battery
        p_r = np.where(battery, en.battery_power,
                       channels.harvested_energy(nak, en, harvest) / en.T1)
    ups = channels.sample_upsilon2(am, en, rng, size)
    return e2e_snr(g1, p_r * ups, cfg.C)


@dataclass(frozen=True)
class Probes:
    grid: tuple = ()
    modulations: tuple = ()      # ModulationParams
    opra_cutoff: float = None
    tcifr_cutoff: float = None


def _features(gam, probes: Probes):
    """Per-draw quantities whose sample means are the reported estimates."""
    feats = {"mean_snr": gam, "ora": np.log2(1.0 + gam)}
    with np.errstate(divide="ignore"):
        inv = 1.0 / gam
    feats["inv_snr"] = inv
    for mod in probes.modulations:
        feats[f"aser_{mod.name}"] = mod.rho * special.erfc(np.sqrt(mod.tau * gam))
    if probes.opra_cutoff is not None:
        above = gam > probes.opra_cutoff
        feats["opra"] = np.where(above, np.log2(np.where(above, gam, 1.0) / probes.opra_cutoff), 0.0)
    if probes.tcifr_cutoff is not None:
        above = gam > probes.tcifr_cutoff
        feats["tcifr_keep"] = above.astype(float)
        feats["tcifr_inv"] = np.where(above, inv, 0.0)
    for j, z in enumerate(probes.grid):
        feats[f"cdf_{j}"] = (gam <= z).astype(float)
    return feats


def _run_stream(cfg, mode, seed, probes, stream, size):
    rng = stream_generator(seed, stream)
    sums, sq = {}, {}
    cross = 0.0
    tail = np.empty(0)
    left = size
    while left > 0:
        k = min(CHUNK, left)
        left -= k
        gam = draw_e2e(cfg, mode, rng, k)
        feats = _features(gam, probes)
        for name, v in feats.items():
            sums[name] = sums.get(name, 0.0) + float(np.sum(v))
            sq[name] = sq.get(name, 0.0) + float(np.dot(v, v)) if np.all(np.isfinite(v)) else np.inf
        if "tcifr_keep" in feats:
            cross += float(np.dot(feats["tcifr_keep"], feats["tcifr_inv"]))
        inv = feats["inv_snr"]
        tail = np.sort(np.concatenate([tail, inv[np.isfinite(inv)]]))[-TAIL_KEEP:]
    return sums, sq, cross, tail


def _run(batch: SimBatch, probes: Probes, workers=1):
    sizes = batch.stream_sizes()
    job = partial(_run_stream, batch.config, batch.mode, batch.seed, probes)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(batch.streams), sizes))
    else:
        parts = [job(s, n) for s, n in enumerate(sizes)]
    # reduce in fixed stream order so results do not depend on scheduling
    sums, sq, cross, tails = {}, {}, 0.0, []
    for s_sum, s_sq, s_cross, s_tail in parts:
        for k in s_sum:
            sums[k] = sums.get(k, 0.0) + s_sum[k]
            sq[k] = sq.get(k, 0.0) + s_sq[k]
        cross += s_cross
        tails.append(s_tail)
    tail = np.sort(np.concatenate(tails))[-TAIL_KEEP:]
    return sums, sq, cross, tail


def _mean_se(total, total_sq, n):
    mean = total / n
    if n < 2 or not np.isfinite(total_sq):
        return mean, np.inf
    var = max(total_sq / n - mean * mean, 0.0) * n / (n - 1)
    return mean, sqrt(var / n)


def hill_tail_index(top):
    """Hill estimator of the tail index from the largest order statistics."""
    top = np.sort(top)
    k = len(top) - 1
    if k < 10 or top[0] <= 0:
        return np.inf
    return 1.0 / np.mean(np.log(top[1:] / top[0]))


def simulate(batch: SimBatch, probes: Probes = Probes(), workers=1) -> EmpiricalStats:
    """Single pass over the batch evaluating every requested estimator."""
    n = batch.n_draws
    sums, sq, cross, tail = _run(batch, probes, workers)
    stats = EmpiricalStats(n=n)
    for key in sums:
        if key.startswith("cdf_") or key.startswith("tcifr_"):
            continue
        stats.estimates[key] = Estimate(*_mean_se(sums[key], sq[key], n), n)
    inv = stats.estimates["inv_snr"]
    cifr_rate = np.log2(1.0 + 1.0 / inv.value)
    # delta method for log2(1 + 1/m)
    slope = 1.0 / (log(2.0) * inv.value * (1.0 + inv.value))
    stats.estimates["cifr"] = Estimate(cifr_rate, slope * inv.stderr, n)
    alpha = hill_tail_index(tail)
    stats.flags["inv_snr_tail_index"] = alpha
    stats.flags["cifr_unstable"] = bool(alpha <= 1.0)
    if probes.tcifr_cutoff is not None:
        keep, kse = _mean_se(sums["tcifr_keep"], sq["tcifr_keep"], n)
        minv, mse = _mean_se(sums["tcifr_inv"], sq["tcifr_inv"], n)
        cov = (cross / n - keep * minv) / (n - 1) if n > 1 else 0.0
        rate = np.log2(1.0 + 1.0 / minv) if minv > 0 else 0.0
        d_keep = rate
        d_inv = -keep / (log(2.0) * minv * (1.0 + minv)) if minv > 0 else 0.0
        var = d_keep ** 2 * kse ** 2 + d_inv ** 2 * mse ** 2 + 2 * d_keep * d_inv * cov
        stats.estimates["tcifr"] = Estimate(keep * rate, sqrt(max(var, 0.0)), n)
    if probes.grid:
        grid = np.asarray(probes.grid, dtype=float)
        cdf = np.array([sums[f"cdf_{j}"] / n for j in range(len(grid))])
        stats.cdf_grid = grid
        stats.cdf = cdf
        stats.cdf_stderr = np.sqrt(cdf * (1.0 - cdf) / n)
    return stats


def simulate_e2e(batch: SimBatch, grid=(), workers=1) -> EmpiricalStats:
    return simulate(batch, Probes(grid=tuple(grid)), workers)


def simulate_aser(batch: SimBatch, mod, workers=1) -> EmpiricalStats:
    """Conditional-error averaging of rho * erfc(sqrt(tau * snr))."""
    stats = simulate(batch, Probes(modulations=(mod,)), workers)
    stats.estimates["aser"] = stats.estimates[f"aser_{mod.name}"]
    return stats


def simulate_capacity(batch: SimBatch, policy, cutoff=None, workers=1) -> EmpiricalStats:
    policy = Policy(policy)
    if policy in (Policy.OPRA, Policy.TCIFR) and cutoff is None:
        raise DomainError(f"{policy.value} simulation needs a cutoff")
    probes = Probes(opra_cutoff=cutoff if policy is Policy.OPRA else None,
                    tcifr_cutoff=cutoff if policy is Policy.TCIFR else None)
    stats = simulate(batch, probes, workers)
    stats.estimates["capacity"] = stats.estimates[policy.value.lower()]
    return stats


# -- deterministic quadrature oracle ---------------------------------------

ORACLE_RTOL = 1e-6


def _breakpoints(scale, start=0.0):
    pts = [start] + [scale * f for f in (1e-2, 0.1, 0.5, 2.0, 8.0, 30.0)]
    return sorted(p for p in set(pts) if p >= start)


def integrate_halfline(fun, scale, start=0.0, rtol=ORACLE_RTOL):
    """Adaptive quadrature of fun over [start, inf) split at multiples of ``scale``.

    The piece holding the bulk of the mass is integrated first; the others
    then only need an absolute accuracy relative to that bulk value.
    """
    pts = _breakpoints(scale, start)
    pieces = list(zip(pts[:-1], pts[1:])) + [(pts[-1], np.inf)]
    bulk = max(range(len(pieces)), key=lambda i: pieces[i][0] <= scale < pieces[i][1])
    order = [bulk] + [i for i in range(len(pieces)) if i != bulk]
    total = err = 0.0
    for i in order:
        a, b = pieces[i]
        atol = 0.1 * rtol * abs(total) / len(pieces)
        val, e, *rest = integrate.quad(fun, a, b, epsabs=atol, epsrel=0.1 * rtol, limit=200,
                                       full_output=1)
        total += val
        err += e
    if not np.isfinite(total) or err > rtol * abs(total):
        raise ConvergenceError(f"quadrature error {err:.3g} exceeds {rtol:g} x |{total:.6g}|")
    return total, err


def _oracle_cutoff(ccdf, scale):
    g = lambda x: integrate_halfline(lambda z: ccdf(z) / z ** 2, scale, x, 1e-10)[0] - 1.0
    lo, hi = 1e-6, 1.0
    for _ in range(60):
        if g(lo) > 0 >= g(hi):
            return brentq(g, lo, hi, xtol=1e-14, rtol=1e-13)
        lo, hi = lo / 10, hi * 10
    raise BracketError("oracle cutoff: no sign change")


def quadrature_oracle(cfg: SystemConfig, target, params=None, ccdf=None, pdf=None,
                      scale=None, rtol=ORACLE_RTOL) -> MetricResult:
    """Evaluate a metric's defining integral from the CDF/PDF layer alone.

    ``ccdf`` / ``pdf`` default to the closed-form end-to-end distribution and
    may be replaced by any callable (used by tests to inject known laws).
    """
    params = dict(params or {})
    if ccdf is None:
        ccdf = lambda z: e2e_ccdf(cfg, z).value
    if pdf is None:
        pdf = lambda z: e2e_pdf(cfg, z).value
    if scale is None:
        scale = cfg.gamma1_mean
    target = target.upper()
    if target == "ASER":
        mod = params["modulation"]
        # z = u^2 removes the inverse-square-root endpoint singularity
        val, err = integrate_halfline(
            lambda u: 2.0 * np.exp(-mod.tau * u * u) * ccdf(u * u), sqrt(scale), rtol=rtol)
        lead = sqrt(mod.tau / pi)
        return MetricResult(mod.rho * (1.0 - lead * val), mod.rho * lead * err)
    if target == "ORA":
        val, err = integrate_halfline(lambda z: ccdf(z) / (1.0 + z), scale, rtol=rtol)
        return MetricResult(val / log(2.0), err / log(2.0))
    if target == "OPRA":
        cut = params.get("cutoff")
        if cut is None:
            cut = _oracle_cutoff(ccdf, scale)
        val, err = integrate_halfline(lambda z: ccdf(z) / z, scale, cut, rtol)
        return MetricResult(val / log(2.0), err / log(2.0), info={"gamma_star": cut})
    if target in ("INVMOMENT", "CIFR", "TCIFR"):
        x = params.get("x", params.get("gamma0", 0.0))
        if target == "CIFR":
            x = 0.0
        if target == "TCIFR" and not x:
            x = _oracle_cutoff(ccdf, scale)
        val, err = integrate_halfline(lambda z: pdf(z) / z if z > 0 else 0.0, scale, x, rtol)
        if target == "INVMOMENT":
            return MetricResult(val, err, info={"x": x})
        rate = np.log2(1.0 + 1.0 / val)
        keep = 1.0 if target == "CIFR" else ccdf(x)
        return MetricResult(keep * rate, keep * err / (log(2.0) * val * (1 + val)),
                            info={"inverse_moment": val, "gamma0": x})
    raise DomainError(f"unknown oracle target {target!r}")
