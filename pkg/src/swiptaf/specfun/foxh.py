"""Fox H-function evaluation by quadrature along a vertical Mellin-Barnes contour."""

from functools import lru_cache

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.special import roots_legendre

from ..errors import ContourError, ConvergenceError
from .contour import (
    SADDLE_MARGIN,
    decay_rate,
    kernel_factors,
    log_kernel,
    plan_contour,
    truncation_length,
)
from .gammafn import loggamma
from .types import BivariateHSpec, HFunctionSpec, IncompleteHSpec, MetricResult

DEFAULT_RTOL = 1e-12
_EPS = np.finfo(float).eps
_MAX_ROUNDS = 40
_MAX_PANELS = 4000
# integrals below this are indistinguishable from underflow
_UNDERFLOW = 1e-280


@lru_cache(maxsize=32)
def _gauss(n):
    x, w = roots_legendre(n)
    return x, w


def _panel_nodes(edges, n):
    x, w = _gauss(n)
    a, b = edges[:, 0:1], edges[:, 1:2]
    half = 0.5 * (b - a)
    return (a + half * (1.0 + x)).ravel(), (half * w).ravel()


def _initial_edges(L, pole_gap, step=1.0):
    pts = [0.0]
    g = min(pole_gap, step)
    if g < step:
        t = g / 8.0
        while t < step:
            pts.append(t)
            t *= 2.0
    t = step
    while t < L:
        pts.append(t)
        t += step
    pts.append(L)
    pts = np.unique(np.array(pts))
    return np.column_stack([pts[:-1], pts[1:]])


def adaptive_line_integral(fun, edges, n, rtol):
    """Composite Gauss-Legendre on panels with (n, 2n) error control.

    ``fun`` maps real node arrays to complex integrand values.  Returns
    (integral, error estimate, L1 norm, panel count, total nodes used).
    """
    done_val, done_err, done_abs = 0.0, 0.0, 0.0
    pending = edges
    used = 0
    total_val = 0.0
    for _ in range(_MAX_ROUNDS):
        x1, w1 = _panel_nodes(pending, n)
        x2, w2 = _panel_nodes(pending, 2 * n)
        f1 = fun(x1)
        f2 = fun(x2)
        used += x1.size + x2.size
        q1 = (f1 * w1).reshape(len(pending), n).sum(axis=1)
        q2 = (f2 * w2).reshape(len(pending), 2 * n).sum(axis=1)
        a2 = (np.abs(f2) * w2).reshape(len(pending), 2 * n).sum(axis=1)
        err = np.abs(q2 - q1)
        total_val = done_val + q2.sum()
        l1 = done_abs + a2.sum()
        floor = max(50.0 * _EPS * l1, _UNDERFLOW)
        budget = max(rtol * abs(total_val), floor)
        if done_err + err.sum() <= budget:
            return total_val, done_err + err.sum() + floor, l1, len(edges), used
        # accept panels that are already good enough, split the rest
        share = budget / max(len(pending), 1)
        good = err <= 0.5 * share
        done_val += q2[good].sum()
        done_err += err[good].sum()
        done_abs += a2[good].sum()
        bad = pending[~good]
        mids = 0.5 * (bad[:, 0] + bad[:, 1])
        pending = np.concatenate([np.column_stack([bad[:, 0], mids]),
                                  np.column_stack([mids, bad[:, 1]])])
        if len(pending) > _MAX_PANELS:
            break
    raise ConvergenceError(
        f"contour quadrature did not converge (value {total_val!r}, "
        f"error {done_err + err.sum():.3g})")


def _real_setup(factors, z):
    zc = complex(z)
    return zc.imag == 0.0 and zc.real > 0.0


def _evaluate(factors, z, plan, rtol, nodes):
    zc = complex(z)
    log_z = np.log(zc)
    if decay_rate(factors) <= 0.0 and not any(f.x > 0 for f in factors):
        raise ContourError("kernel does not decay along vertical lines")
    c = plan.c
    symmetric = _real_setup(factors, zc)
    if symmetric:
        L = plan.L
    else:
        L = max(truncation_length(factors, c, log_z.real, imag_log_z=log_z.imag),
                truncation_length(factors, c, log_z.real, imag_log_z=-log_z.imag))

    def integrand(tau):
        s = c + 1j * tau
        return np.exp(log_kernel(factors, s) - s * log_z)

    gap = np.inf
    for f in factors:
        if f.sign > 0:
            gap = min(gap, float(np.min(np.abs(f.poles() - c))))
    if symmetric:
        edges = _initial_edges(L, gap)
        val, err, l1, panels, used = adaptive_line_integral(
            lambda t: integrand(t).real, edges, nodes, rtol)
        val, err = val / np.pi, err / np.pi
    else:
        right = _initial_edges(L, gap)
        edges = np.concatenate([-right[::-1, ::-1], right])
        val, err, l1, panels, used = adaptive_line_integral(integrand, edges, nodes, rtol)
        val, err = val / (2 * np.pi), err / (2 * np.pi)
    return MetricResult(value=val, error=float(err), contour=(c, L), nodes=used,
                        info={"panels": panels, "interval": plan.interval})


def fox_h(spec: HFunctionSpec, rtol=DEFAULT_RTOL, rule="saddle", nodes=20, plan=None):
    """Evaluate the Fox H-function H^{m,n}_{p,q}(z) of ``spec``.

    The result carries a discretisation error estimate (panel-wise difference
    between n- and 2n-point Gauss-Legendre) plus the round-off floor.
    """
    factors = kernel_factors(spec)
    z = spec.argument
    if plan is None:
        plan = plan_contour(factors, rule=rule, log_z=float(np.log(abs(z))), nodes=nodes)
    return _evaluate(factors, z, plan, rtol, nodes)


def incomplete_fox_h(spec: IncompleteHSpec, rtol=DEFAULT_RTOL, rule="saddle", nodes=20,
                     plan=None):
    """Generalized incomplete-upper Fox H-function M^{m,n}_{p,q}(z).

    Triples with a positive third slot use Gamma(., x) in the Mellin kernel;
    with every third slot zero this coincides with :func:`fox_h`.
    """
    return fox_h(spec, rtol=rtol, rule=rule, nodes=nodes, plan=plan)


# -- bivariate --------------------------------------------------------------

def _bivariate_factors(spec: BivariateHSpec):
    """Return factors as (u, vs, vt, sign) for Gamma(u + vs*s + vt*t)**sign."""
    fac = []
    for i, (a, al, A) in enumerate(spec.outer_upper):
        if i < spec.n1:
            fac.append((1.0 - a, -al, -A, +1))
        else:
            fac.append((a, al, A, -1))
    for (b, be, B) in spec.outer_lower:
        fac.append((1.0 - b, -be, -B, -1))
    for f in kernel_factors(HFunctionSpec(spec.m2, spec.n2, spec.s_upper, spec.s_lower, 1.0)):
        fac.append((f.u, f.v, 0.0, f.sign))
    for f in kernel_factors(HFunctionSpec(spec.m3, spec.n3, spec.t_upper, spec.t_lower, 1.0)):
        fac.append((f.u, 0.0, f.v, f.sign))
    return fac


def _biv_log_kernel(fac, s, t):
    acc = np.zeros(np.broadcast(s, t).shape, dtype=complex)
    for (u, vs, vt, sign) in fac:
        acc = acc + sign * loggamma_b(u + vs * s + vt * t)
    return acc


def loggamma_b(z):
    z = np.asarray(z, dtype=complex)
    return loggamma(z.ravel()).reshape(z.shape)


def plan_bivariate(spec: BivariateHSpec, margin=SADDLE_MARGIN):
    """Pick (c_s, c_t) strictly inside the pole-separation polytope.

    A Chebyshev-centre LP finds an interior point; the abscissae are then moved
    to the minimum of |kernel x^-s y^-t| on the real plane, keeping ``margin``
    distance from every pole hyperplane.
    """
    fac = _bivariate_factors(spec)
    rows, rhs = [], []
    for (u, vs, vt, sign) in fac:
        if sign < 0:
            continue
        norm = np.hypot(vs, vt)
        # u + vs*cs + vt*ct >= r*norm  ->  -vs*cs - vt*ct + r*norm <= u
        rows.append([-vs, -vt, norm])
        rhs.append(u)
    res = linprog(c=[0, 0, -1], A_ub=rows, b_ub=rhs,
                  bounds=[(-50, 50), (-50, 50), (0, 5)], method="highs")
    if res.status != 0 or res.x[2] <= 0:
        raise ContourError("no separating contour pair for the bivariate H-function")
    c0 = res.x[:2]
    r = res.x[2]
    marg = min(margin, 0.5 * r)
    lx, ly = np.log(spec.x), np.log(spec.y)

    def phi(c):
        v = np.real(_biv_log_kernel(fac, np.array(c[0] + 0j), np.array(c[1] + 0j))) - c[0] * lx - c[1] * ly
        return float(v) if np.isfinite(v) else 1e300

    cons = [{"type": "ineq", "fun": (lambda c, u=u, vs=vs, vt=vt: u + vs * c[0] + vt * c[1] - marg * np.hypot(vs, vt))}
            for (u, vs, vt, sign) in fac if sign > 0]
    opt = minimize(phi, c0, constraints=cons, method="SLSQP",
                   bounds=[(c0[0] - 60, c0[0] + 60), (c0[1] - 60, c0[1] + 60)])
    c = opt.x if opt.success and all(k["fun"](opt.x) >= -1e-12 for k in cons) else c0
    return float(c[0]), float(c[1]), float(r)


def _axis_length(fac, cs, ct, lx, ly, axis, tail=1e-17):
    taus = np.concatenate([[0.0], 0.25 * 2.0 ** np.arange(0, 16)])
    if axis == 0:
        s, t = cs + 1j * taus, np.full(taus.shape, ct + 0j)
    else:
        s, t = np.full(taus.shape, cs + 0j), ct + 1j * taus
    lv = np.real(_biv_log_kernel(fac, s, t)) - cs * lx - ct * ly
    peak = np.max(lv)
    idx = np.nonzero(lv < peak + np.log(tail))[0]
    idx = idx[idx > np.argmax(lv)]
    if idx.size == 0:
        raise ContourError(f"bivariate integrand does not decay along axis {axis}")
    return float(taus[idx[0]])


def bivariate_fox_h(spec: BivariateHSpec, rtol=1e-9, nodes=12, max_nodes=768):
    """Bivariate Fox H-function by tensor Gauss-Legendre quadrature.

    Value = (2 pi i)^-2 ∫∫ kernel(s, t) x^-s y^-t ds dt on Re s = c_s,
    Re t = c_t.  Node counts on the two axes are doubled independently; the
    reported error is the larger of the two per-axis refinement differences.
    """
    fac = _bivariate_factors(spec)
    cs, ct, _ = plan_bivariate(spec)
    lx, ly = np.log(spec.x), np.log(spec.y)
    Ls = _axis_length(fac, cs, ct, lx, ly, 0)
    Lt = _axis_length(fac, cs, ct, lx, ly, 1)
    # cross-term decay check on the box edges
    edge_t = np.linspace(-Lt, Lt, 41)
    edge = np.real(_biv_log_kernel(fac, cs + 1j * Ls, ct + 1j * edge_t)) - cs * lx - ct * ly
    centre = np.real(_biv_log_kernel(fac, np.array(cs + 0j), np.array(ct + 0j))) - cs * lx - ct * ly
    if np.max(edge) > centre + np.log(1e-12):
        raise ContourError("bivariate integrand fails the decay pre-check")

    coupled = [f for f in fac if f[1] != 0.0 and f[2] != 0.0]
    only_s = [f for f in fac if f[2] == 0.0]
    only_t = [f for f in fac if f[1] == 0.0 and f[2] != 0.0]

    def quad(ns, nt):
        es = _initial_edges(Ls, 1.0)
        et = _initial_edges(Lt, 1.0)
        et = np.concatenate([-et[::-1, ::-1], et])
        xs, ws = _panel_nodes(es, ns)
        xt, wt = _panel_nodes(et, nt)
        s1 = cs + 1j * xs
        t1 = ct + 1j * xt
        # factors depending on one variable only are evaluated on their axis
        ls = _biv_log_kernel(only_s, s1, 0.0) - s1 * lx
        lt = _biv_log_kernel(only_t, 0.0, t1) - t1 * ly
        logf = ls[:, None] + lt[None, :]
        if coupled:
            logf = logf + _biv_log_kernel(coupled, s1[:, None], t1[None, :])
        f = np.exp(logf)
        # conjugate symmetry: integrate Im s >= 0 and double the real part
        return 2.0 * np.real(ws @ f @ wt) / (4 * np.pi ** 2), np.sum(np.abs(f) * np.outer(ws, wt))

    ns = nt = nodes
    base, l1 = quad(ns, nt)
    while True:
        qs, _ = quad(2 * ns, nt)
        qt, _ = quad(ns, 2 * nt)
        es, et = abs(qs - base), abs(qt - base)
        err = max(es, et)
        floor = 50 * _EPS * l1 / (2 * np.pi ** 2)
        if err <= max(rtol * abs(base), floor):
            best = quad(2 * ns, 2 * nt)[0] if err > 0 else base
            return MetricResult(value=best, error=float(max(err, floor)), contour=(cs, ct, Ls, Lt),
                                nodes=(2 * ns) * (2 * nt), info={"nodes_s": ns, "nodes_t": nt})
        if es > rtol * abs(base):
            ns *= 2
        if et > rtol * abs(base):
            nt *= 2
        if max(ns, nt) > max_nodes:
            raise ConvergenceError(f"bivariate quadrature did not converge (err {err:.3g})")
        base, l1 = quad(ns, nt)
