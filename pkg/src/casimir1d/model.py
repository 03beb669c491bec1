r"""Closed-form building blocks evaluated at complex frequency.

Response function of a damped oscillator, free Green's functions of the
(1+1)-dimensional field in a Dirichlet box and on the whole line, the
sector functions :math:`\Phi_\sigma`, the separation factor :math:`L(\omega)`
of the infinite-line problem and the plasma-model inverse transmission
:math:`t(i\xi)^{-1}`.

All functions accept scalars or numpy arrays for the frequency argument.
"""
from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from .errors import ResonanceError
from .params import Geometry, OscillatorParams

_SERIES_CUTOFF = 1e-4  # |omega L| below which G1, G2 use their Taylor series


def _scalar_or_array(x):
    return x.item() if isinstance(x, np.ndarray) and x.ndim == 0 else x


def response_N(params: OscillatorParams, w):
    """N(w) = -w^2 + i gamma w + Omega^2."""
    w = np.asarray(w, dtype=complex)
    return _scalar_or_array(-w * w + 1j * params.gamma * w + params.omega**2)


def response_N_prime(params: OscillatorParams, w):
    w = np.asarray(w, dtype=complex)
    return _scalar_or_array(-2.0 * w + 1j * params.gamma)


def polarizability(params: OscillatorParams, w):
    """Dynamic polarizability alpha(w) = g / N(w)."""
    N = np.asarray(response_N(params, w))
    if np.any(N == 0):
        raise ResonanceError("polarizability evaluated on a root of N(w)")
    return _scalar_or_array(params.g / N)


def central_diff(f, w, h=None):
    """Fourth-order central difference of ``f`` at ``w``.

    The default step max(1e-5, 1e-5 |w|) keeps the truncation error near
    1e-20 relative for smooth f, well below any tolerance used with it.
    """
    if h is None:
        h = max(1e-5, 1e-5 * abs(w))
    return (-f(w + 2 * h) + 8 * f(w + h) - 8 * f(w - h) + f(w - 2 * h)) / (12 * h)


# ----------------------------------------------------------------------------
# Dirichlet box [-L/2, L/2]


def green_box(geom: Geometry, w, x, xp):
    r"""Free Green's function of :math:`-\omega^2-\partial_x^2` in the box.

    Uses the product form built from the two solutions vanishing at each
    wall.  It agrees with the eigenfunction sum over
    :math:`\sqrt{2/L}\sin(k_n(x-L/2))`.
    """
    if not geom.in_box:
        raise ValueError("green_box needs a box geometry")
    L = geom.L
    if abs(x) > L / 2 or abs(xp) > L / 2:
        raise ValueError("points must lie inside [-L/2, L/2]")
    lo, hi = min(x, xp), max(x, xp)
    w = complex(w)
    if abs(w * L) < _SERIES_CUTOFF:
        static = (lo + L / 2) * (L / 2 - hi) / L
        # next order of the product form, enough below the series cutoff
        c2 = ((lo + L / 2) * (L / 2 - hi) / (6 * L)) * (
            L**2 - (lo + L / 2) ** 2 - (L / 2 - hi) ** 2
        )
        val = static + c2 * w * w
    else:
        s = np.sin(w * L)
        if s == 0:
            raise ResonanceError(f"box resonance at w={w}")
        val = np.sin(w * (lo + L / 2)) * np.sin(w * (L / 2 - hi)) / (w * s)
    return val.real if w.imag == 0 else val


def green_box_mode_sum(geom: Geometry, w, x, xp, n_max=10_000):
    """Truncated eigenfunction sum for the box Green's function (test oracle)."""
    L = geom.L
    k = np.pi * np.arange(1, n_max + 1) / L
    phi = lambda y: np.sqrt(2 / L) * np.sin(k * (y - L / 2))
    return np.sum(phi(x) * phi(xp) / (k * k - w * w))


def _g12_direct(w, b, L):
    s = np.sin(w * L)
    if np.any(s == 0):
        raise ResonanceError("box resonance: sin(wL) = 0")
    G1 = (np.cos(w * b) - np.cos(w * L)) / (2 * w * s)
    G2 = (1 - np.cos(w * (L - b))) / (2 * w * s)
    return G1, G2


def _g12_lower(w, b, L):
    # exponentially scaled form, all exponentials decay for Im w < 0
    e = lambda a: np.exp(-1j * w * a)
    den = 1 - e(2 * L)
    G1 = 1j * (np.exp(1j * w * (b - L)) * (1 + e(2 * b)) - (1 + e(2 * L))) / (2 * w * den)
    G2 = 1j * (e(L) - 0.5 * (e(b) + e(2 * L - b))) / (w * den)
    return G1, G2


def _g12_series(w, b, L):
    d = L - b
    G1 = (L * L - b * b) / (4 * L) * (1 + w * w * (L * L - b * b) / 12)
    G2 = d * d / (4 * L) * (1 + w * w * (L * L / 6 - d * d / 12))
    return G1, G2


def green_sym(geom: Geometry, w):
    r"""Box Green's function at the oscillator positions.

    Returns ``(G1, G2)`` with G1 = G0(a_i, a_i) and G2 = G0(a_1, a_2).
    The removable singularity at w = 0 is handled by a series expansion,
    and for complex w an exponentially scaled form avoids overflow of
    cos/sin at large imaginary part.
    """
    if not geom.in_box:
        raise ValueError("green_sym needs a box geometry")
    b, L = geom.b, geom.L
    w = np.asarray(w, dtype=complex)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    G1 = np.empty_like(w)
    G2 = np.empty_like(w)
    small = np.abs(w * L) < _SERIES_CUTOFF
    lower = ~small & (w.imag < 0)
    upper = ~small & (w.imag > 0)
    real = ~small & (w.imag == 0)
    if small.any():
        G1[small], G2[small] = _g12_series(w[small], b, L)
    if lower.any():
        G1[lower], G2[lower] = _g12_lower(w[lower], b, L)
    if upper.any():
        g1, g2 = _g12_lower(np.conj(w[upper]), b, L)
        G1[upper], G2[upper] = np.conj(g1), np.conj(g2)
    if real.any():
        G1[real], G2[real] = _g12_direct(w[real].real, b, L)
    if np.all(w.imag == 0):
        G1, G2 = G1.real, G2.real
    if scalar:
        return G1[0], G2[0]
    return G1, G2


def green_sym_prime(geom: Geometry, w):
    """Frequency derivatives ``(G1', G2')`` of :func:`green_sym`."""
    b, L = geom.b, geom.L
    d = L - b
    w = np.asarray(w, dtype=complex)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    d1 = np.empty_like(w)
    d2 = np.empty_like(w)
    small = np.abs(w * L) < _SERIES_CUTOFF
    if small.any():
        ws = w[small]
        d1[small] = (L * L - b * b) ** 2 / (24 * L) * ws
        d2[small] = d * d / (2 * L) * (L * L / 6 - d * d / 12) * ws
    big = ~small
    if big.any():
        wb = w[big]
        s, c = np.sin(wb * L), np.cos(wb * L)
        if np.any(s == 0):
            raise ResonanceError("box resonance: sin(wL) = 0")
        B = 2 * wb * s
        dB = 2 * s + 2 * wb * L * c
        A1 = np.cos(wb * b) - c
        dA1 = -b * np.sin(wb * b) + L * s
        A2 = 1 - np.cos(wb * d)
        dA2 = d * np.sin(wb * d)
        d1[big] = (dA1 * B - A1 * dB) / (B * B)
        d2[big] = (dA2 * B - A2 * dB) / (B * B)
    if np.all(w.imag == 0):
        d1, d2 = d1.real, d2.real
    if scalar:
        return d1[0], d2[0]
    return d1, d2


def box_resonances(geom: Geometry, w_max):
    """Box wave numbers k_n = pi n / L up to ``w_max``."""
    n = np.arange(1, int(np.floor(w_max * geom.L / np.pi)) + 1)
    return np.pi * n / geom.L


# ----------------------------------------------------------------------------
# Infinite line


def green_line(geom: Geometry, w, half: str):
    """Whole-line Green's function at the oscillator positions.

    ``half`` selects the continuation: ``"lower"`` gives 1/(2iw) and
    exp(-iwb)/(2iw) (the box limit taken with Im w < 0), ``"upper"`` the
    retarded form exp(iw|x|)/(-2iw).  It is never inferred from w.
    """
    w = np.asarray(w, dtype=complex)
    if np.any(w == 0):
        raise ResonanceError("green_line is singular at w = 0")
    b = geom.b
    if half == "lower":
        G1 = 1 / (2j * w)
        G2 = np.exp(-1j * w * b) / (2j * w)
    elif half == "upper":
        G1 = 1 / (-2j * w)
        G2 = np.exp(1j * w * b) / (-2j * w)
    else:
        raise ValueError(f"half must be 'lower' or 'upper', got {half!r}")
    return _scalar_or_array(G1), _scalar_or_array(G2)


def _green_pair(geom, w, half):
    if geom.in_box:
        return green_sym(geom, w)
    return green_line(geom, w, half)


def phi_sigma(params: OscillatorParams, geom: Geometry, w, sigma: int, half="lower"):
    r""":math:`\Phi_\sigma(\omega) = N(\omega) - g\,(G_1 + \sigma G_2)`.

    In a box the box Green's functions are used; on the line the
    continuation named by ``half``.
    """
    if sigma not in (1, -1):
        raise ValueError("sigma must be +1 or -1")
    G1, G2 = _green_pair(geom, w, half)
    return _scalar_or_array(np.asarray(response_N(params, w)) - params.g * (G1 + sigma * G2))


def phi_sigma_prime(params: OscillatorParams, geom: Geometry, w, sigma: int, half="lower"):
    w = np.asarray(w, dtype=complex)
    if geom.in_box:
        d1, d2 = green_sym_prime(geom, w)
    else:
        G1, G2 = green_line(geom, w, half)
        s = -1j * geom.b if half == "lower" else 1j * geom.b
        d1 = -G1 / w
        d2 = G2 * (s - 1 / w)
    return _scalar_or_array(response_N_prime(params, w) - params.g * (d1 + sigma * d2))


def phi_reference(params: OscillatorParams, geom: Geometry, w, half="lower"):
    """N - g G1: one oscillator alone with the field (separation independent)."""
    G1, _ = _green_pair(geom, w, half)
    return _scalar_or_array(np.asarray(response_N(params, w)) - params.g * G1)


def phi_reference_prime(params: OscillatorParams, geom: Geometry, w, half="lower"):
    w = np.asarray(w, dtype=complex)
    if geom.in_box:
        d1, _ = green_sym_prime(geom, w)
    else:
        G1, _ = green_line(geom, w, half)
        d1 = -G1 / w
    return _scalar_or_array(response_N_prime(params, w) - params.g * d1)


def phi_matrix(params: OscillatorParams, geom: Geometry, w, half="lower"):
    """The symmetric 2x2 matrix N*1 - g*G0(a_i, a_j)."""
    G1, G2 = _green_pair(geom, w, half)
    N = response_N(params, w)
    return np.array([[N - params.g * G1, -params.g * G2], [-params.g * G2, N - params.g * G1]])


def _sep_ratio(params, geom, w):
    # r(w) = g exp(-iwb) / (2iw N(w) - g) and the pieces needed for 1 +- r
    w = np.asarray(w, dtype=complex)
    N = -w * w + 1j * params.gamma * w + params.omega**2
    D = 2j * w * N - params.g
    if np.any(D == 0):
        raise ResonanceError("L(w) has a pole: 2iwN(w) = g")
    return w, N, D


def l_factor(params: OscillatorParams, geom: Geometry, w):
    r"""Separation factor :math:`L(\omega) = L_+ L_-` of the infinite line.

    Computed as (1 - r)(1 + r) with 1 + r formed through expm1, which keeps
    the linear small-w behaviour free of cancellation.
    """
    w, N, D = _sep_ratio(params, geom, w)
    g, b = params.g, geom.b
    one_plus = (2j * w * N + g * np.expm1(-1j * w * b)) / D
    one_minus = (D - g * np.exp(-1j * w * b)) / D
    return _scalar_or_array(one_plus * one_minus)


def l_factor_logderiv(params: OscillatorParams, geom: Geometry, w):
    """L'(w)/L(w) in closed form."""
    w, N, D = _sep_ratio(params, geom, w)
    g, b = params.g, geom.b
    dN = -2 * w + 1j * params.gamma
    dD = 2j * N + 2j * w * dN
    ex = np.exp(-1j * w * b)
    r = g * ex / D
    dr = r * (-1j * b - dD / D)
    one_plus = (2j * w * N + g * np.expm1(-1j * w * b)) / D
    one_minus = 1 - r
    return _scalar_or_array(-2 * r * dr / (one_plus * one_minus))


def l_factor_imag(params: OscillatorParams, geom: Geometry, xi):
    r"""Real function :math:`L(-i\xi)` on the lower imaginary axis."""
    xi = np.asarray(xi, dtype=float)
    g, b = params.g, geom.b
    P = 2 * xi * (xi * xi + params.gamma * xi + params.omega**2)
    D = P - g
    if np.any(D == 0):
        raise ResonanceError("L(-i xi) has a pole: 2 xi (xi^2 + gamma xi + Omega^2) = g")
    ex = np.exp(-xi * b)
    return _scalar_or_array((P + g * np.expm1(-xi * b)) / D * (D - g * ex) / D)


def transmission_inv(params: OscillatorParams, geom: Geometry, xi):
    r"""Plasma-model :math:`t(i\xi)^{-1}` for undamped oscillators."""
    if params.gamma != 0:
        raise ValueError("transmission_inv is the gamma = 0 (plasma model) quantity")
    xi = np.asarray(xi, dtype=float)
    if np.any(xi <= 0):
        raise ValueError("xi must be positive")
    g, b = params.g, geom.b
    P = 2 * xi * (xi * xi + params.omega**2)
    D = P - g
    if np.any(D == 0):
        raise ResonanceError("t(i xi)^-1 has a pole")
    return _scalar_or_array((P + g * np.expm1(-xi * b)) / D * (D - g * np.exp(-xi * b)) / D)


# ----------------------------------------------------------------------------
# energy density kernel, used to check the Green's function identities


def _green_box_dx(geom, w, x, xp):
    L = geom.L
    s = np.sin(w * L)
    if x < xp:
        return np.cos(w * (x + L / 2)) * np.sin(w * (L / 2 - xp)) / s
    return -np.sin(w * (xp + L / 2)) * np.cos(w * (L / 2 - x)) / s


def energy_kernel_m_jk(geom: Geometry, w: float, j: int, k: int, epsrel=1e-12):
    """Field energy kernel m_jk = int dx (w^2 G0 G0 + dG0 dG0) by quadrature.

    Returns ``(value, error_estimate)``.  Real w away from box resonances.
    """
    a = geom.positions
    aj, ak = a[j], a[k]
    L = geom.L

    def f(x):
        return w * w * green_box(geom, w, x, aj) * green_box(geom, w, x, ak) + _green_box_dx(
            geom, w, x, aj
        ) * _green_box_dx(geom, w, x, ak)

    pts = sorted({-L / 2, aj, ak, L / 2})
    val = err = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        v, e = quad(f, lo, hi, epsabs=0, epsrel=epsrel, limit=200)
        val += v
        err += e
    return val, err


def green_overlap(geom: Geometry, w: float, x: float, y: float, epsrel=1e-12):
    """int dz G0(x, z) G0(y, z) over the box, by quadrature."""
    L = geom.L
    f = lambda z: green_box(geom, w, x, z) * green_box(geom, w, y, z)
    pts = sorted({-L / 2, x, y, L / 2})
    return sum(quad(f, lo, hi, epsabs=0, epsrel=epsrel, limit=200)[0] for lo, hi in zip(pts[:-1], pts[1:]))
