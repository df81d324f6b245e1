import numpy as np
import pytest

from swiptaf.channels import NakagamiParams
from swiptaf.endtoend import SystemConfig
from swiptaf.errors import DomainError
from swiptaf.mcsim import (
    Policy,
    Probes,
    SimBatch,
    SimMode,
    draw_e2e,
    hill_tail_index,
    quadrature_oracle,
    simulate,
    simulate_aser,
    simulate_capacity,
    simulate_e2e,
    stream_generator,
)
from swiptaf.metrics import BPSK, QPSK, aser, capacity_cifr, capacity_ora, opra_cutoff

LN2 = np.log(2.0)
EXP_CCDF = lambda z: np.exp(-z)


# -- quadrature oracle on laws with known answers ------------------------------

def test_oracle_ora_exponential(cfg):
    r = quadrature_oracle(cfg, "ORA", ccdf=EXP_CCDF, scale=1.0)
    assert r.value == pytest.approx(0.596347362323194074 / LN2, rel=1e-9)


def test_oracle_aser_exponential(cfg):
    r = quadrature_oracle(cfg, "ASER", {"modulation": BPSK}, ccdf=EXP_CCDF, scale=1.0)
    assert r.value == pytest.approx(0.146446609406726238, rel=1e-9)


def test_oracle_opra_exponential(cfg):
    r = quadrature_oracle(cfg, "OPRA", ccdf=EXP_CCDF, scale=1.0)
    assert r.info["gamma_star"] == pytest.approx(0.393773845045118357, rel=1e-9)
    assert r.value == pytest.approx(1.028538925359477861, rel=1e-8)


def test_oracle_inverse_moment_gamma_two(cfg):
    # Gamma(2, 1): E[1/z] = 1
    r = quadrature_oracle(cfg, "InvMoment", {"x": 0.0}, ccdf=lambda z: (1 + z) * np.exp(-z),
                          pdf=lambda z: z * np.exp(-z), scale=1.0)
    assert r.value == pytest.approx(1.0, rel=1e-9)


def test_oracle_unknown_target(cfg):
    with pytest.raises(DomainError):
        quadrature_oracle(cfg, "nope")


# -- random streams --------------------------------------------------------

def test_batch_validation():
    with pytest.raises(DomainError):
        SimBatch(SystemConfig(), n_draws=0)
    with pytest.raises(DomainError):
        SimBatch(SystemConfig(), seed=-1)
    b = SimBatch(SystemConfig(), n_draws=10, streams=4)
    assert b.stream_sizes() == [3, 3, 2, 2]


def test_stream_generator_is_deterministic():
    a = stream_generator(5, 2).random(4)
    b = stream_generator(5, 2).random(4)
    c = stream_generator(5, 3).random(4)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_results_independent_of_worker_count(cfg):
    batch = SimBatch(cfg, SimMode.COUPLED, 40_000, seed=9, streams=4)
    probes = Probes(grid=(5.0,), modulations=(BPSK,), opra_cutoff=0.85, tcifr_cutoff=0.85)
    one = simulate(batch, probes, workers=1)
    two = simulate(batch, probes, workers=2)
    for k in one.estimates:
        assert one.estimates[k].value == two.estimates[k].value
        assert one.estimates[k].stderr == two.estimates[k].stderr
    assert np.array_equal(one.cdf, two.cdf)


def test_seed_changes_results(cfg):
    a = simulate_e2e(SimBatch(cfg, n_draws=5000, seed=1), (5.0,))
    b = simulate_e2e(SimBatch(cfg, n_draws=5000, seed=2), (5.0,))
    assert a["ora"].value != b["ora"].value


# -- physical model ------------------------------------------------------------

def test_coupled_draw_reproduces_manual_chain(cfg):
    from swiptaf import channels
    gam = draw_e2e(cfg, SimMode.COUPLED, stream_generator(0, 0), 1000)
    rng = stream_generator(0, 0)
    h = channels.sample_channel_power(cfg.nak, rng, 1000)
    g1 = channels.sample_gamma1(cfg.nak, cfg.energy, rng, h1sq=h)
    pr = channels.sample_relay_power(cfg.nak, cfg.energy, rng, h1sq=h)
    g2 = pr * channels.sample_upsilon2(cfg.am, cfg.energy, rng, 1000)
    assert np.array_equal(gam, g1 * g2 / (g2 + cfg.C))
    assert np.all(gam < g1)


def test_estimates_agree_with_closed_forms(cfg):
    batch = SimBatch(cfg, SimMode.INDEPENDENT, 400_000, seed=4)
    st = simulate(batch, Probes(modulations=(BPSK, QPSK)))
    assert abs(st["aser_BPSK"].value - aser(cfg, BPSK).value) < 4 * st["aser_BPSK"].stderr
    assert abs(st["ora"].value - capacity_ora(cfg).value) < 4 * st["ora"].stderr
    assert abs(st["cifr"].value - capacity_cifr(cfg).value) < 4 * st["cifr"].stderr
    assert not st.flags["cifr_unstable"]


def test_capacity_wrappers(cfg):
    batch = SimBatch(cfg, n_draws=20_000, seed=5)
    with pytest.raises(DomainError):
        simulate_capacity(batch, Policy.OPRA)
    gstar = opra_cutoff(cfg).gamma_star
    for policy in ("ORA", "OPRA", "CIFR", "TCIFR"):
        st = simulate_capacity(batch, policy, cutoff=gstar)
        est = st["capacity"]
        assert est.value > 0 and np.isfinite(est.stderr) and est.stderr > 0
    assert simulate_aser(batch, BPSK)["aser"].value > 0


def test_hill_estimator_on_pareto():
    rng = np.random.default_rng(0)
    x = rng.pareto(1.5, 200_000) + 1.0
    top = np.sort(x)[-2000:]
    assert hill_tail_index(top) == pytest.approx(1.5, rel=0.1)


def test_heavy_inverse_tail_flagged():
    # m1 = 1 makes E[1/snr] infinite; the Hill index of 1/snr drops to ~1
    cfg = SystemConfig(nak=NakagamiParams(m1=1.0))
    st = simulate(SimBatch(cfg, n_draws=200_000, seed=8))
    assert st.flags["inv_snr_tail_index"] < 1.3
