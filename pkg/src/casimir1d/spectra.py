r"""Real eigenfrequencies of the undamped box system and mode sums.

For ``gamma = 0`` the sector functions
:math:`\Phi^{(0)}_\sigma(\omega) = \Omega^2 - \omega^2 - gG_\sigma(\omega)` are
real and strictly decreasing between consecutive poles of :math:`G_\sigma`
(both :math:`-\omega^2` and :math:`-gG_\sigma` decrease there).  The poles of
:math:`G_\sigma` are the box wave numbers :math:`k_n = \pi n / L` whose mode
has parity matching the sector, :math:`\sigma = (-1)^{n+1}`, and does not
vanish at the oscillators.  Each gap between such poles therefore holds
exactly one root, and the first gap holds one iff
:math:`\Omega^2 - gG_\sigma(0) > 0`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import model
from .errors import ToleranceError
from .params import Geometry, OscillatorParams, ThermalParams


@dataclass(frozen=True)
class ModeSpectrum:
    """Real zeros of the undamped sector functions in (0, w_max].

    Attributes
    ----------
    omegas, sectors, signs : ndarray
        Root frequencies, their sector sigma and the sign of -dPhi/dw there.
    residuals : ndarray
        |Phi(w_s)| relative to the size of its largest term.
    slopes : ndarray
        -dPhi/dw at each root; gamma w_s / slope is the width of the
        corresponding resonance once damping is switched on.
    coupled_k : ndarray
        Box wave numbers below ``w_max`` whose modes couple to the
        oscillators; they are the free-field modes displaced by the coupling.
    w_max : float
    """

    omegas: np.ndarray
    sectors: np.ndarray
    signs: np.ndarray
    residuals: np.ndarray
    coupled_k: np.ndarray
    w_max: float
    slopes: np.ndarray = None

    @property
    def count(self) -> int:
        return int(self.omegas.size)


def _coupled_poles(geom, w_max):
    n = np.arange(1, int(np.floor(w_max * geom.L / np.pi)) + 1)
    k = np.pi * n / geom.L
    amp = np.sin(k * (geom.positions[0] - geom.L / 2)) ** 2
    keep = amp > 1e-24
    return n[keep], k[keep]


def _phi0(params, geom, sigma):
    # sigma = 0 selects the isolated-oscillator function N - g G1
    def f(w):
        G1, G2 = model.green_sym(geom, w)
        return params.omega**2 - w * w - params.g * (G1 + sigma * G2)

    return f


def _regular(params, geom, sigma):
    """Phi_sigma times the factor that cancels its poles, with the size of its terms.

    sigma = +1: cos(wL/2); sigma = -1: sin(wL/2); sigma = 0: sin(wL).  The
    product stays finite at the box resonances, so it also resolves roots
    that lie within a few ulps of a pole.
    """
    o2, g, b, L = params.omega**2, params.g, geom.b, geom.L

    def terms(w):
        if sigma == 1:
            c = math.cos(0.5 * w * L)
            n1, n2 = math.sin(0.5 * w * L), math.sin(0.5 * w * (L - 2 * b))
        elif sigma == -1:
            c = math.sin(0.5 * w * L)
            n1, n2 = math.cos(0.5 * w * (L - 2 * b)), -math.cos(0.5 * w * L)
        else:
            c = 2 * math.sin(w * L)
            n1, n2 = 2 * math.cos(w * b), -2 * math.cos(w * L)
        return (o2 - w * w) * c, g * n1 / (2 * w), g * n2 / (2 * w), c

    def h(w):
        a, t1, t2, _ = terms(w)
        return a - (t1 + t2)

    def scale(w):
        # size of the terms, or of the change of h over a relative step of one in w
        # when the root hugs a pole and the terms nearly vanish
        a, t1, t2, c = terms(w)
        d = 1e-6 * w
        slope = abs(h(w + d) - h(w - d)) / (2 * d)
        return max((w * w + o2) * abs(c) + abs(t1) + abs(t2), w * slope)

    return h, scale


def _polish(f, root, lo, hi):
    """Float neighbour of ``root`` inside [lo, hi] with the smallest |f|."""
    cand = [root]
    up = down = root
    for _ in range(4):
        up, down = np.nextafter(up, np.inf), np.nextafter(down, -np.inf)
        cand += [up, down]
    cand = [c for c in cand if lo <= c <= hi]
    return min(cand, key=lambda c: abs(f(c)))


def _brent(f, a, b):
    return brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def find_modes(params: OscillatorParams, geom: Geometry, w_max: float, include_reference=False) -> ModeSpectrum:
    """All real zeros of the undamped sector functions up to ``w_max``.

    ``gamma`` of ``params`` is ignored (set to zero); this lets damped
    callers ask for the positions of their narrow resonances.  With
    ``include_reference`` the zeros of Omega^2 - w^2 - g G1 (one oscillator
    alone in the box) are added with sector 0; mode sums skip them.

    Residuals are |Phi| relative to the size of its terms, or to w |dPhi/dw|
    where that is larger (roots hugging a weakly coupled resonance), and are
    evaluated on the pole-free product of :func:`_regular`.
    """
    if not geom.in_box:
        raise ValueError("find_modes needs a box geometry")
    p0 = params.replace(gamma=0.0)
    n, k = _coupled_poles(geom, w_max)
    if k.size == 0 or w_max < np.pi / geom.L:
        warnings.warn("w_max lies below the first box resonance", stacklevel=2)
    if p0.g == 0:
        k = np.empty(0)
        n = np.empty(0, dtype=int)
    oms, secs, sgn, res, slopes = [], [], [], [], []
    G1, G2 = model.green_sym(geom, 0.0)
    for sigma in (1, -1, 0) if include_reference else (1, -1):
        f = _phi0(p0, geom, sigma)
        h, hscale = _regular(p0, geom, sigma)
        if not k.size or sigma == 0:
            poles = k
        else:
            poles = k[(-1.0) ** (n + 1) == sigma]
        edges = [0.0, *poles, w_max]
        last = len(edges) - 2
        for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
            # a few ulps off each pole: weakly coupled roots can sit very close to it
            a = lo + 4 * np.spacing(lo) if i > 0 else 0.0
            bnd = hi - 4 * np.spacing(hi) if i < last else hi
            if bnd <= a:
                continue
            fa = p0.omega**2 - p0.g * (G1 + sigma * G2) if a == 0 else f(a)
            fb = f(bnd)
            if fa == 0:
                root = a
            elif np.sign(fa) != np.sign(fb):
                root = _polish(h, _brent(f, max(a, 1e-300), bnd), a, bnd)
            elif i > 0 and np.sign(h(lo)) != np.sign(h(a)):
                # the root and a pole agree to a few ulps; only the regular form sees it
                root = _polish(h, _brent(h, lo, a), lo, a)
            elif i < last and np.sign(h(bnd)) != np.sign(h(hi)):
                root = _polish(h, _brent(h, bnd, hi), bnd, hi)
            elif 0 < i < last:
                # closer to a pole than its own rounding: take the best float next to either pole
                cand = [c for x0, x1 in ((lo, a), (bnd, hi)) for c in np.linspace(x0, x1, 9)[1:-1]]
                root = min(cand, key=lambda c: abs(h(c)))
                if abs(h(root)) > 1e-10 * hscale(root):
                    raise ToleranceError(
                        f"no root found between box resonances {lo} and {hi}", estimate=np.nan, error=np.inf
                    )
            else:
                continue
            if root == 0:
                continue
            d1, d2 = model.green_sym_prime(geom, root)
            slope = 2 * root + p0.g * (d1 + sigma * d2)
            oms.append(root)
            secs.append(sigma)
            sgn.append(np.sign(slope))
            slopes.append(slope)
            res.append(abs(h(root)) / hscale(root))
    order = np.argsort(oms)
    arr = lambda x, dt=float: np.asarray(x, dtype=dt)[order]
    return ModeSpectrum(
        omegas=arr(oms),
        sectors=arr(secs, int),
        signs=arr(sgn),
        residuals=arr(res),
        coupled_k=k if p0.g else np.empty(0),
        w_max=float(w_max),
        slopes=arr(slopes),
    )


def _occupation(thermal, w):
    if thermal.zero:
        return np.zeros_like(w)
    return 1.0 / np.expm1(thermal.hbar * w / thermal.T)


def mode_sum_energy(spectrum: ModeSpectrum, thermal: ThermalParams, relative_to_free=True):
    r"""Thermal part of the mode-sum energy, :math:`\frac12\sum_s\hbar\omega_s(\mathcal N_T-1)s_s`.

    With ``relative_to_free`` the same sum over the coupled free-field modes
    is subtracted, which is the quantity produced by the box phase without
    reference.  The T-independent half sum diverges and is returned only as
    its cutoff value in the diagnostics.

    Returns
    -------
    energy : float
    diagnostics : dict
        ``vacuum_cutoff_sum`` and ``tail_bound``.
    """
    hb = thermal.hbar
    if not thermal.zero and spectrum.w_max * hb / thermal.T < 20:
        raise ToleranceError(
            "spectrum window too small for the Bose tail", estimate=np.nan, error=np.inf
        )
    keep = spectrum.sectors != 0
    w = spectrum.omegas[keep]
    sg = spectrum.signs[keep]
    E = np.sum(hb * w * _occupation(thermal, w) * sg)
    vac = 0.5 * np.sum(hb * w * sg)
    if relative_to_free:
        k = spectrum.coupled_k
        E -= np.sum(hb * k * _occupation(thermal, k))
        vac -= 0.5 * np.sum(hb * k)
    tail = 0.0
    if not thermal.zero:
        # modes above w_max are spaced by about pi/L, each weighted below 2 w e^{-beta w}
        x = spectrum.w_max * hb / thermal.T
        tail = 4 * thermal.T * (x + 1) * np.exp(-x) * max(1.0, spectrum.count / max(spectrum.w_max, 1e-300))
    return float(E), {"vacuum_cutoff_sum": float(vac), "tail_bound": float(tail)}
