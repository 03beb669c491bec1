"""Panelled adaptive quadrature on top of :func:`scipy.integrate.quad`.

Phase integrands of the box system carry narrow spikes next to every box
wave number and, at small damping, Lorentzian peaks of width ~gamma at the
eigenfrequencies.  A single adaptive call misses such features, so the
range is cut into panels at known feature positions and the panels next
to each feature are refined geometrically before ``quad`` runs on each.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import roots_legendre

_CLUSTER = np.logspace(-14, np.log10(0.49), 40)


@dataclass
class QuadResult:
    value: float = 0.0
    error: float = 0.0
    n_eval: int = 0
    n_subdiv: int = 0

    def __iadd__(self, other: "QuadResult"):
        self.value += other.value
        self.error += other.error
        self.n_eval += other.n_eval
        self.n_subdiv += other.n_subdiv
        return self

    def scaled(self, c: float) -> "QuadResult":
        return QuadResult(c * self.value, abs(c) * self.error, self.n_eval, self.n_subdiv)


def _quad(f, a, b, epsabs, epsrel, limit=200):
    val, err, info = quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)[:3]
    return QuadResult(val, err, info["neval"], info["last"])


def panel_edges(lo, hi, breakpoints=(), cluster=(), features=()):
    """Sorted panel edges on [lo, hi].

    Parameters
    ----------
    breakpoints : iterable of float
        Become edges.
    cluster : iterable of float
        Breakpoints that also get geometrically spaced extra edges on both
        sides, reaching down to 1e-14 of the neighbouring panel width.
    features : iterable of (center, width, reach)
        Narrow peaks: edges at center +- width * 2^j for all j with
        width * 2^j below reach.
    """
    pts = np.asarray(sorted({lo, hi, *[p for p in breakpoints if lo < p < hi]}), dtype=float)
    extra = []
    cl = np.asarray([c for c in cluster if lo <= c <= hi], dtype=float)
    if cl.size:
        for a, b in zip(pts[:-1], pts[1:]):
            h = b - a
            if np.any(np.isclose(cl, a, rtol=0, atol=1e-15 * max(1.0, abs(a)))):
                extra.append(a + h * _CLUSTER)
            if np.any(np.isclose(cl, b, rtol=0, atol=1e-15 * max(1.0, abs(b)))):
                extra.append(b - h * _CLUSTER)
    for c, w, reach in features:
        if not (lo <= c <= hi) or not w > 0:
            continue
        j = np.arange(-2, max(int(np.ceil(np.log2(max(reach / w, 1.0)))), -1) + 1)
        off = w * 2.0 ** j
        extra.append(np.concatenate([[c], c - off, c + off]))
    if extra:
        pts = np.concatenate([pts, *extra])
        pts = np.unique(pts[(pts >= lo) & (pts <= hi)])
    return pts


def rough_estimate(f_vec, edges, order=8) -> float:
    """Fixed-order Gauss-Legendre sum over all panels in one vectorised call."""
    edges = np.asarray(edges, dtype=float)
    x, wts = roots_legendre(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (b - a) * x[None, :] + 0.5 * (a + b)
    vals = np.asarray(f_vec(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return float(np.sum(0.5 * (b - a) * wts[None, :] * vals))


def integrate(f, edges, epsabs=1e-14, epsrel=1e-10, log_first=False, scale=None) -> QuadResult:
    """Sum of ``quad`` over consecutive panels.

    With ``log_first`` the first panel [0, a] is integrated in the variable
    u = ln w, which turns a logarithmic end-point singularity at w = 0
    into an exponentially decaying integrand.  When ``scale`` (an estimate
    of the magnitude of the whole integral) is given, each panel gets the
    absolute tolerance epsrel * scale weighted by its share of the range;
    otherwise panels near sign changes could never meet a pure relative
    target.
    """
    out = QuadResult()
    edges = np.asarray(edges, dtype=float)
    if scale is not None and edges.size > 1:
        width = edges[-1] - edges[0]
        budget = max(epsrel * abs(scale), epsabs)
        pan_abs = lambda a, b: budget * (b - a) / width
    else:
        pan_abs = lambda a, b: epsabs
    start = 0
    if log_first and edges.size > 1 and edges[0] == 0.0:
        a = edges[1]

        def g(u):
            w = math.exp(u)
            return f(w) * w if w > 0 else 0.0

        out += _quad(g, -np.inf, math.log(a), pan_abs(edges[0], a), epsrel)
        start = 1
    for a, b in zip(edges[start:-1], edges[start + 1 :]):
        if b > a:
            out += _quad(f, a, b, pan_abs(a, b), epsrel)
    return out


def integrate_to_infinity(f, edges, grow, epsabs=1e-14, epsrel=1e-10, max_doublings=40, scale=None):
    """Integrate over ``edges`` and keep appending panels until they vanish.

    ``grow(a, b)`` returns the panel edges for an extension [a, b].  The
    range is doubled until two consecutive extensions each contribute less
    than the target accuracy, or less than their own quadrature error.  The
    last extension's magnitude is returned as the tail estimate.  ``scale``
    is passed on to :func:`integrate` for the first range and then fixed to
    the running total.
    """
    res = integrate(f, edges, epsabs, epsrel, scale=scale)
    hi = float(edges[-1])
    small = 0
    tail = math.inf
    for _ in range(max_doublings):
        ref = max(abs(res.value), abs(scale) if scale is not None else 0.0)
        target = max(epsabs, epsrel * ref)
        ext = integrate(f, grow(hi, 2 * hi), epsabs, epsrel, scale=ref if ref > 0 else None)
        res += ext
        tail = abs(ext.value)
        hi *= 2
        small = small + 1 if tail < max(target, 10 * ext.error) else 0
        if small >= 2:
            break
    return res, tail, hi
