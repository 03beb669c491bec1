r"""Matsubara-sum representations of the separation-dependent free energy.

Box (valid for :math:`L < L_*`)

.. math::

    F = T\sum_{l\ge0}{}' \sum_\sigma
        \ln\frac{\Phi_\sigma(-i\xi_l)}{N(-i\xi_l) - gG_1(-i\xi_l)}
      = T\sum_{l\ge0}{}' \ln\big(1 - x_l^2\big),\qquad
    x = \frac{gG_2}{N - gG_1},

with weight 1/2 on l = 0.  Infinite line

.. math::

    F = \frac T2 \ln\Big|\frac{2cT}{\hbar}\Big|
      + T\sum_{l\ge1}\ln|L(-i\xi_l)| + B,\qquad c = b - \frac{2\Omega^2}{g},

where the l = 0 term has been replaced using :math:`L(-i\xi) = 2c\xi + \dots`
at :math:`\xi_1/(2\pi) = T/\hbar`, and B collects the contributions of the
zeros and the pole of :math:`L(-i\xi)` on the positive axis that the
contour rotation picks up.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from . import model
from .errors import DegeneracyError, DomainError
from .params import Geometry, OscillatorParams, ThermalParams
from .thermo import EnergyReport

BOUND_TERM_FORMS = ("general", "largest_abs", "largest_log")
_BLOCK = 1024
_DEGENERATE_REL = 1e-8


@dataclass(frozen=True)
class MatsubaraGrid:
    """xi_l = 2 pi T l / hbar for l = 0..l_max, with the tail estimate of the sum."""

    T: float
    hbar: float
    l_max: int
    tail: float = 0.0

    @property
    def spacing(self) -> float:
        return 2 * np.pi * self.T / self.hbar

    @property
    def xi(self) -> np.ndarray:
        return self.spacing * np.arange(self.l_max + 1)


@dataclass(frozen=True)
class BoundStateRoots:
    """Positive zeros of L(-i xi) and the pole of L(-i xi) between/below them."""

    roots: tuple
    pole: float
    residuals: tuple = field(default=())

    @property
    def count(self) -> int:
        return len(self.roots)

    @property
    def kappa_b(self) -> tuple:
        """Same roots, read as bound-state wave numbers (t(i kappa)^-1 = 0 at gamma = 0)."""
        return self.roots


@dataclass(frozen=True)
class CriticalBoxSize:
    L_star: float


def critical_box_size(params: OscillatorParams, geom: Geometry) -> CriticalBoxSize:
    """L_* = b + 2 Omega^2 / g: beyond it Phi_+ turns negative at w = 0."""
    if params.g <= 0:
        raise ValueError("L_* needs g > 0")
    return CriticalBoxSize(geom.b + 2 * params.omega**2 / params.g)


# ----------------------------------------------------------------------------
# bound states on the line


def _P(params, xi):
    return 2 * xi * (xi * xi + params.gamma * xi + params.omega**2)


def _pole(params):
    f = lambda x: _P(params, x) - params.g
    hi = 1.0
    while f(hi) <= 0:
        hi *= 2
    return brentq(f, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def find_bound_states(params: OscillatorParams, geom: Geometry) -> BoundStateRoots:
    r"""Positive roots of :math:`L(-i\xi)`.

    :math:`L = (1 - r)(1 + r)` with :math:`r = g e^{-\xi b}/(P - g)`,
    :math:`P = 2\xi(\xi^2 + \gamma\xi + \Omega^2)`.  Below the pole
    :math:`\xi_p` (where P = g) only 1 + r can vanish, and it does once iff
    c = b - 2 Omega^2/g > 0; above the pole 1 - r vanishes exactly once,
    below 10 max(Omega, gamma, g^(1/3), 1/b).  Each bracket is confirmed
    by a sign scan and refined by Brent's method to machine precision.
    """
    if geom.in_box:
        raise ValueError("find_bound_states works on the infinite line")
    if params.g == 0:
        return BoundStateRoots(roots=(), pole=0.0)
    g, b = params.g, geom.b
    xp = _pole(params)
    x_max = 10 * max(params.omega, params.gamma, g ** (1 / 3), 1 / b)
    lower = lambda x: _P(params, x) + g * math.expm1(-x * b)  # zero of 1 + r
    upper = lambda x: _P(params, x) - g - g * math.exp(-x * b)  # zero of 1 - r
    roots = []
    # sign scan of the lower factor on a geometric grid in (0, xi_p)
    grid = xp * np.geomspace(1e-300, 1.0, 600)[:-1]
    vals = np.array([lower(x) for x in grid])
    idx = np.nonzero(vals < 0)[0]
    if idx.size:
        i = idx[-1]
        if lower(xp) > 0:
            roots.append(brentq(lower, grid[i], xp, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500))
        else:
            # g e^{-xi_p b} is below rounding of P - g: root and pole coincide in floating point
            roots.append(xp)
    grid = np.linspace(xp, max(x_max, 2 * xp), 2001)
    vals = np.array([upper(x) for x in grid])
    ch = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    for i in ch:
        roots.append(brentq(upper, grid[i], grid[i + 1], xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500))
    roots = tuple(sorted(roots))
    res = tuple(abs(float(model.l_factor_imag(params, geom, r))) for r in roots)
    return BoundStateRoots(roots=roots, pole=xp, residuals=res)


def _two_sin(x):
    return abs(2 * math.sin(0.5 * x))


def bound_state_term(bs: BoundStateRoots, thermal: ThermalParams, form="general") -> float:
    r"""Contribution of the positive-axis zeros and pole of :math:`L(-i\xi)`.

    ``general``
        :math:`-T\sum_r\ln|2\sin(\beta\hbar\xi_r/2)| + 2T\ln|2\sin(\beta\hbar\xi_p/2)|`
        (every zero and the double pole of L);
    ``largest_abs``
        :math:`-T|2\sin(\beta\hbar\xi_*/2)|` with the largest zero;
    ``largest_log``
        :math:`-T\ln|2\sin(\beta\hbar\xi_*/2)|` with the largest zero.
    """
    if form not in BOUND_TERM_FORMS:
        raise ValueError(f"bound-state term form must be one of {BOUND_TERM_FORMS}")
    if thermal.zero or not bs.roots:
        return 0.0
    T, bh = thermal.T, thermal.hbar / thermal.T
    if form == "general":
        out = -T * sum(math.log(_two_sin(bh * r)) for r in bs.roots)
        return out + 2 * T * math.log(_two_sin(bh * bs.pole))
    top = bs.roots[-1]
    if form == "largest_abs":
        return -T * _two_sin(bh * top)
    return -T * math.log(_two_sin(bh * top))


# ----------------------------------------------------------------------------
# sums


def _sum_terms(term, spacing, start, tail_ratio, decay_from, rtol=1e-16):
    """Sum term(xi_l) for l >= start in blocks until the geometric tail is negligible."""
    parts = []
    l0 = start
    tail = math.inf
    while True:
        l = np.arange(l0, l0 + _BLOCK)
        v = term(spacing * l)
        parts.append(v)
        l0 += _BLOCK
        last = abs(v[-1])
        if spacing * (l0 - 1) > decay_from:
            tail = last * tail_ratio / (1 - tail_ratio) if tail_ratio < 1 else math.inf
            total = math.fsum(np.concatenate(parts))
            if tail <= rtol * max(abs(total), 1e-300) or last == 0.0:
                return total, l0 - 1, tail
        if l0 > 50_000_000:
            total = math.fsum(np.concatenate(parts))
            return total, l0 - 1, tail


def _imag_axis_integral(f, singular, b, epsrel=1e-11):
    """int_0^inf f(xi) d xi with integrable log singularities at ``singular``."""
    sing = sorted(s for s in singular if s > 0)
    top = (sing[-1] if sing else 0.0) + 40.0 / b
    pts = [0.0, *sing, top]
    val = err = 0.0
    for a, c in zip(pts[:-1], pts[1:]):
        if c > a:
            v, e = quad(f, a, c, epsabs=1e-15, epsrel=epsrel, limit=400)
            val += v
            err += e
    v, e = quad(f, top, np.inf, epsabs=1e-15, epsrel=epsrel, limit=200)
    return val + v, err + e


def line_zero_parameter_checked(params, geom):
    c = geom.b - 2 * params.omega**2 / params.g
    if abs(c) <= _DEGENERATE_REL * max(geom.b, 2 * params.omega**2 / params.g):
        raise DegeneracyError(
            "b = 2 Omega^2/g: the linear coefficient of L(w) at w = 0 vanishes, "
            "so the zero-mode logarithm is undefined"
        )
    return c


def _line_F(params, geom, thermal, form, plasma):
    p = params.replace(gamma=0.0) if plasma else params
    if plasma:
        logL = lambda xi: np.log(np.abs(model.transmission_inv(p, geom, xi)))
    else:
        logL = lambda xi: np.log(np.abs(model.l_factor_imag(p, geom, xi)))
    bs = find_bound_states(p, geom)
    sing = [*bs.roots, bs.pole]
    if thermal.zero:
        f = lambda x: float(logL(x)) if x > 0 else 0.0
        v, e = _imag_axis_integral(f, sing, geom.b)
        scale = thermal.hbar / (2 * np.pi)
        return scale * v, {"l_max": None, "tail_bound": 0.0, "quad_error": scale * e, "bound_states": bs}
    c = line_zero_parameter_checked(p, geom)
    T, hb = thermal.T, thermal.hbar
    spacing = 2 * np.pi * T / hb
    ratio = math.exp(-2 * spacing * geom.b)
    s, l_max, tail = _sum_terms(logL, spacing, 1, ratio, 2 * max(sing))
    # rounding of the compensated sum is at most a few ulps of its largest term
    rounding = 4 * np.finfo(float).eps * T * max(abs(s), float(np.max(np.abs(logL(spacing * np.arange(1, 4))))))
    zero = 0.5 * T * math.log(abs(2 * c * T / hb))
    B = bound_state_term(bs, thermal, form)
    F = zero + T * s + B
    diag = {
        "l_max": l_max,
        "tail_bound": T * tail,
        "quad_error": 0.0,
        "round_error": rounding,
        "bound_states": bs,
        "zero_mode_term": zero,
        "bound_state_term": B,
    }
    return F, diag


def _error(d):
    return d.get("tail_bound", 0.0) + d.get("quad_error", 0.0) + d.get("round_error", 0.0)


def _report(Ffun, thermal, diag, method, extra, dT_rel=1e-4):
    """Assemble F, F0, E and S from F(T) evaluations; ``Ffun`` returns (F, diagnostics)."""
    t0 = time.perf_counter()
    F, d = Ffun(thermal)
    diag.update(d)
    err = _error(d)
    if thermal.zero:
        F0, S = F, 0.0
    else:
        F0, d0 = Ffun(thermal.at(0.0))
        err += _error(d0)
        diag["F0_quad_error"] = d0.get("quad_error", 0.0)
        dT = dT_rel * thermal.T
        S = -(Ffun(thermal.at(thermal.T + dT))[0] - Ffun(thermal.at(thermal.T - dT))[0]) / (2 * dT)
    bs = diag.pop("bound_states", None)
    if bs is not None:
        diag["xi_star"] = list(bs.roots)
        diag["xi_pole"] = bs.pole
    diag.update(extra)
    diag["runtime_ms"] = 1e3 * (time.perf_counter() - t0)
    return EnergyReport(
        F=F,
        F0=F0,
        dTF=F - F0,
        E=F + thermal.T * S,
        S=S,
        err_estimate=err,
        tail_bound=diag.get("tail_bound", 0.0),
        method=method,
        diagnostics=diag,
    )


def free_energy_matsubara_line(
    params: OscillatorParams, geom: Geometry, thermal: ThermalParams, bound_term="general", plasma=False
) -> EnergyReport:
    """Line free energy from the Matsubara sum, with E and S by differencing in T.

    Parameters
    ----------
    bound_term : {"general", "largest_abs", "largest_log"}
        Form of the bound-state contribution; recorded in the diagnostics.
    plasma : bool
        Use t(i xi)^-1 of the undamped system instead of L(-i xi).
    """
    if geom.in_box:
        raise ValueError("free_energy_matsubara_line needs the infinite line")
    if params.g == 0:
        return EnergyReport(0.0, 0.0, 0.0, 0.0, 0.0, method="matsubara_line", diagnostics={"xi_star": []})
    line_zero_parameter_checked(params, geom)
    diag = {}
    Ffun = lambda th: _line_F(params, geom, th, bound_term, plasma)
    extra = {"bound_term_form": bound_term, "plasma": plasma, "c": geom.b - 2 * params.omega**2 / params.g}
    return _report(Ffun, thermal, diag, "matsubara_line", extra)


def _box_x(params, geom, xi):
    # x = g G2 / (N - g G1) on the negative imaginary axis, plus the denominator
    xi = np.asarray(xi, dtype=float)
    G1, G2 = model.green_sym(geom, -1j * xi)
    G1, G2 = np.real(G1), np.real(G2)
    ref = xi * xi + params.gamma * xi + params.omega**2 - params.g * G1
    return params.g * G2 / ref, ref


def _box_F(params, geom, thermal):
    def logterm(xi):
        x, ref = _box_x(params, geom, xi)
        if np.any(ref <= 0) or np.any(np.abs(x) >= 1):
            raise DomainError("Phi_sigma(-i xi) not positive: outside the validity range L < L_*")
        return np.log1p(-x * x)

    if thermal.zero:
        v, e = quad(lambda x: float(logterm(x)), 0, np.inf, epsabs=1e-15, epsrel=1e-11, limit=400)
        scale = thermal.hbar / (2 * np.pi)
        return scale * v, {"l_max": None, "tail_bound": 0.0, "quad_error": scale * e}
    T, hb = thermal.T, thermal.hbar
    spacing = 2 * np.pi * T / hb
    ratio = math.exp(-2 * spacing * geom.b)
    s, l_max, tail = _sum_terms(logterm, spacing, 1, ratio, 0.0)
    l0 = 0.5 * float(logterm(0.0))
    F = T * (l0 + s)
    rounding = 4 * np.finfo(float).eps * T * max(abs(s), abs(l0))
    return F, {"l_max": l_max, "tail_bound": T * tail, "quad_error": 0.0, "round_error": rounding}


def free_energy_matsubara_box(params: OscillatorParams, geom: Geometry, thermal: ThermalParams) -> EnergyReport:
    """Separation-dependent box free energy from the Matsubara sum.

    Raises
    ------
    DomainError
        If L >= L_*, where Phi_+ turns negative at zero frequency.
    """
    if not geom.in_box:
        raise ValueError("free_energy_matsubara_box needs a box")
    if params.g == 0:
        return EnergyReport(0.0, 0.0, 0.0, 0.0, 0.0, method="matsubara_box")
    Ls = critical_box_size(params, geom).L_star
    if geom.L >= Ls:
        raise DomainError(f"box length L={geom.L} not below L_*={Ls}")
    return _report(lambda th: _box_F(params, geom, th), thermal, {}, "matsubara_box", {"L_star": Ls})
