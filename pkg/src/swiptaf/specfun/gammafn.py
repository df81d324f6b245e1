"""Complex log-gamma and upper incomplete gamma, vectorised over numpy arrays."""

import numpy as np

from ..errors import DomainError, PoleError

_LANCZOS_G = 7.0
_LANCZOS = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)
_LOG_PI = np.log(np.pi)

# below this real part the upward recurrence gets long; switch to reflection
_REFLECT_BELOW = -20.0


def _lanczos(z):
    # valid for Re(z) >= 0.5, principal branch
    z = z - 1.0
    acc = np.full_like(z, _LANCZOS[0])
    for i in range(1, len(_LANCZOS)):
        acc = acc + _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(acc)


def _log_sin_pi(z):
    # log sin(pi z) modulo 2*pi*i, without overflow for large |Im z|
    out = np.empty_like(z)
    big = np.abs(z.imag) > 10.0
    zb = z[big]
    up = zb.imag > 0
    with np.errstate(over="ignore", invalid="ignore"):
        out[big] = np.where(
            up,
            -1j * np.pi * zb + np.log1p(-np.exp(2j * np.pi * zb)) - np.log(-2j),
            1j * np.pi * zb + np.log1p(-np.exp(-2j * np.pi * zb)) - np.log(2j),
        )
    out[~big] = np.log(np.sin(np.pi * z[~big]))
    return out


def _stirling(z):
    return (z - 0.5) * np.log(z) - z + _HALF_LOG_2PI + 1.0 / (12.0 * z)


def loggamma(z):
    """Principal-branch log Gamma for complex arrays (no pole checks)."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)

    right = z.real >= 0.5
    out[right] = _lanczos(z[right])

    mid = ~right & (z.real > _REFLECT_BELOW)
    if mid.any():
        w = z[mid].copy()
        steps = np.ceil(0.5 - w.real).astype(int)
        shift = np.zeros_like(w)
        for j in range(int(steps.max())):
            act = j < steps
            shift[act] += np.log(w[act])
            w[act] += 1.0
        out[mid] = _lanczos(w) - shift

    far = z.real <= _REFLECT_BELOW
    if far.any():
        zf = z[far]
        raw = _LOG_PI - _log_sin_pi(zf) - _lanczos(1.0 - zf)
        # pick the 2*pi*k sheet that agrees with Stirling's principal branch
        k = np.round((_stirling(zf).imag - raw.imag) / (2.0 * np.pi))
        out[far] = raw + 2j * np.pi * k
    return out[0] if scalar else out


def log_gamma_complex(z):
    """log Gamma(z) on the principal branch.

    Raises PoleError when ``z`` lies within 1e-12 of a nonpositive integer.
    """
    z = complex(z)
    if z.real <= 0.5 and abs(z - round(z.real)) < 1e-12 and round(z.real) <= 0:
        raise PoleError(f"Gamma has a pole at {z}")
    return complex(loggamma(z))


def _log_lower_series(s, x, logx):
    # log gamma(s, x), gamma(s, x) = x^s e^-x sum_k x^k / (s (s+1) ... (s+k))
    term = 1.0 / s
    acc = term.copy()
    for k in range(1, int(x + 12.0 * np.sqrt(x)) + 400):
        term = term * x / (s + k)
        acc = acc + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(acc)):
            break
    return s * logx - x + np.log(acc)


def _log_upper_cf(s, x, logx):
    # log Gamma(s, x) by the Legendre continued fraction, modified Lentz
    tiny = 1e-300
    b = x + 1.0 - s
    c = np.full_like(s, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, 2000):
        an = -i * (i - s)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) <= 1e-16):
            break
    return s * logx - x + np.log(h)


def log_upper_gamma(s, x):
    """log Gamma(s, x) for complex array ``s`` and scalar ``x >= 0``."""
    s = np.asarray(s, dtype=complex)
    if x == 0.0:
        return loggamma(s)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    logx = np.log(x)
    out = np.empty_like(s)
    # continued fraction where Gamma(s, x) << Gamma(s) would cancel in the series
    use_cf = (x > 1.5) & (x > s.real + 1.0) & (np.abs(s.imag) < x)
    if use_cf.any():
        out[use_cf] = _log_upper_cf(s[use_cf], x, logx)
    ser = ~use_cf
    if ser.any():
        ss = s[ser]
        # log(Gamma(s) - gamma(s, x)) from the two logs; any branch will do
        # because the kernel only ever uses exp() and the real part
        lg = loggamma(ss)
        ll = _log_lower_series(ss, x, logx)
        first = lg.real >= ll.real
        out_ser = np.empty_like(ss)
        out_ser[first] = lg[first] + np.log1p(-np.exp(ll[first] - lg[first]))
        out_ser[~first] = ll[~first] + np.log(np.expm1(lg[~first] - ll[~first]))
        out[ser] = out_ser
    return out[0] if scalar else out


def upper_incomplete_gamma(s, x):
    """Upper incomplete gamma Gamma(s, x) for complex ``s`` and real ``x >= 0``."""
    x = float(x)
    if x < 0.0:
        raise DomainError(f"upper incomplete gamma needs x >= 0, got {x}")
    s = complex(s)
    if x == 0.0:
        return np.exp(log_gamma_complex(s))
    return complex(np.exp(log_upper_gamma(s, x)))
