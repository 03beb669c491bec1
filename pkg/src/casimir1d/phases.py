r"""Phase functions :math:`\delta(\omega)` and their frequency derivatives.

Four systems are covered and kept strictly apart, since their phases are
different functions:

``single``
    one damped oscillator, :math:`\delta = \arg N(\omega)`;
``box``
    two oscillators in a Dirichlet box, :math:`\sum_\sigma \arg\Phi_\sigma`,
    optionally relative to two isolated oscillators in the same box;
``line``
    two oscillators on the whole line, :math:`\arg L(\omega)`;
``scattering``
    the plasma-model phase of :math:`t(\omega)/t(-\omega)` (``gamma = 0``).

All phases are normalised to :math:`\delta(0) = 0`.  For real
:math:`\omega > 0` every factor entering the box and line phases has a
non-negative imaginary part, so principal arguments are already
continuous and no unwrapping is needed.  The box phase still has genuine
steps of :math:`\mp\pi` at the box wave numbers :math:`k_n` where the
Green's function has a pole; :meth:`PhaseFunction.jumps` lists them so that
energy integrals written with :math:`\partial_\omega\delta` can add the
corresponding point contributions.  The scattering phase is obtained
independently by sampling and adaptive unwrapping.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import model
from .errors import BranchError, ResonanceError
from .params import Geometry, OscillatorParams

SYSTEMS = ("single", "box", "line", "scattering")

_MAX_BISECT = 60


def _as_real(w):
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise ValueError("phases are defined for real w >= 0")
    return w


def _out(x, like):
    return float(x) if np.ndim(like) == 0 else x


def _require_damping(params):
    if params.gamma <= 0:
        raise ValueError(
            "gamma = 0 makes the phase a step function; use the closed-form "
            "gamma -> 0 routes (spectra.mode_sum_energy, asymptotics.gamma_zero_forms)"
        )


def _start_offset(static, gamma):
    # arg of (static + O(w^2)) + i gamma w as w -> 0+
    if static > 0:
        return 0.0
    if static < 0:
        return np.pi
    return np.pi / 2 if gamma > 0 else 0.0


# ----------------------------------------------------------------------------
# single oscillator


def delta_single(params: OscillatorParams, w):
    """Phase arg N(w) of a single damped oscillator, shifted so delta(0) = 0.

    For Omega > 0 this is arg N in [0, pi).  A free particle (Omega = 0) has
    arg N(0+) = pi/2, which is removed, leaving arctan(w / gamma).
    """
    _require_damping(params)
    w = _as_real(w)
    d = np.arctan2(params.gamma * w, params.omega**2 - w * w)
    if params.omega == 0:
        d = np.where(w == 0, 0.0, d - np.pi / 2)
    return _out(d, w)


def d_delta_single(params: OscillatorParams, w):
    """gamma (w^2 + Omega^2) / |N(w)|^2."""
    _require_damping(params)
    w = _as_real(w)
    if params.omega == 0:
        # w^2 cancels between numerator and |N|^2
        return _out(params.gamma / (w * w + params.gamma**2), w)
    N = model.response_N(params, w)
    return _out(params.gamma * (w * w + params.omega**2) / np.abs(N) ** 2, w)


# ----------------------------------------------------------------------------
# two oscillators in a box


def _box_static(params, geom):
    G1, G2 = model.green_sym(geom, 0.0)
    o2 = params.omega**2
    return {1: o2 - params.g * (G1 + G2), -1: o2 - params.g * (G1 - G2), 0: o2 - params.g * G1}


def _box_offsets(params, geom):
    s = _box_static(params, geom)
    return {k: _start_offset(v, params.gamma) for k, v in s.items()}


def delta_box(params: OscillatorParams, geom: Geometry, w, reference: bool = False):
    r"""Box phase :math:`\sum_\sigma \arg\Phi_\sigma(\omega)` with delta(0) = 0.

    With ``reference=True`` twice the phase of a single oscillator in the
    same box, :math:`\arg(N - gG_1)`, is subtracted; the result is the
    separation-dependent part and tends to a constant at large w.

    Parameters
    ----------
    params, geom : model parameters, ``geom`` must contain a box.
    w : array_like
        Real frequencies >= 0, off the box wave numbers.
    reference : bool
        Subtract the isolated-oscillator phase.
    """
    _require_damping(params)
    w = _as_real(w)
    if not geom.in_box:
        raise ValueError("delta_box needs a box geometry")
    off = _box_offsets(params, geom)
    G1, G2 = model.green_sym(geom, w)
    reN = params.omega**2 - w * w
    im = params.gamma * w
    d = np.zeros_like(w)
    for s in (1, -1):
        d = d + np.arctan2(im, reN - params.g * (G1 + s * G2)) - off[s]
    if reference:
        d = d - 2 * (np.arctan2(im, reN - params.g * G1) - off[0])
    return _out(d, w)


def d_delta_box(params: OscillatorParams, geom: Geometry, w, reference: bool = False):
    r"""Smooth part of :math:`\partial_\omega\delta_{box}`, from Im[Phi'/Phi].

    The point contributions at the steps (see :func:`box_jumps`) are not
    included.
    """
    _require_damping(params)
    w = _as_real(w)
    d = np.zeros_like(w)
    for s in (1, -1):
        d = d + np.imag(
            model.phi_sigma_prime(params, geom, w, s) / model.phi_sigma(params, geom, w, s)
        )
    if reference:
        d = d - 2 * np.imag(
            model.phi_reference_prime(params, geom, w) / model.phi_reference(params, geom, w)
        )
    return _out(d, w)


def box_jumps(params: OscillatorParams, geom: Geometry, w_max: float, reference: bool = False):
    """Locations and sizes of the steps of the box phase below ``w_max``.

    A step sits at k_n = n pi / L whenever the n-th box mode does not vanish
    at the oscillators.  Only the sector with sigma = (-1)^(n+1) sees the
    pole, its phase drops by pi.  The isolated-oscillator reference has a
    pole at every such k_n, so with ``reference=True`` the net step is +pi.

    Returns
    -------
    k, jump : ndarray
    """
    k = model.box_resonances(geom, w_max)
    if params.g == 0 or k.size == 0:
        return np.empty(0), np.empty(0)
    a1 = geom.positions[0]
    amp = np.sin(k * (a1 - geom.L / 2)) ** 2
    keep = amp > 1e-24
    k = k[keep]
    j = np.full(k.shape, np.pi if reference else -np.pi)
    return k, j


# ----------------------------------------------------------------------------
# two oscillators on the line


def line_zero_parameter(params: OscillatorParams, geom: Geometry) -> float:
    """c = b - 2 Omega^2 / g, the coefficient of L(w) = 2iwc + O(w^2)."""
    if params.g == 0:
        return -np.inf
    return geom.b - 2 * params.omega**2 / params.g


def _line_raw_zero(params, geom):
    # arg L(0+): +pi/2 for c > 0, -pi/2 for c < 0
    if params.g == 0:
        return 0.0
    c = line_zero_parameter(params, geom)
    return float(np.sign(c)) * np.pi / 2


def delta_line(params: OscillatorParams, geom: Geometry, w):
    r"""Separation-dependent line phase :math:`\arg L(\omega)`, delta(0) = 0.

    Evaluated as the sum of arguments of :math:`\Phi_\pm` minus twice that of
    :math:`N - gG_1^\infty`, each having a non-negative imaginary part on the
    real axis.  The limit at large w is :func:`line_delta_inf`.
    """
    w = _as_real(w)
    if geom.in_box:
        raise ValueError("delta_line needs the infinite line (L = None)")
    if params.g == 0:
        return _out(np.zeros_like(w), w)
    ws = np.where(w == 0, 1.0, w)
    g, b = params.g, geom.b
    reN = params.omega**2 - ws * ws
    im0 = params.gamma * ws
    half = 0.5 * ws * b
    # real and imaginary parts written out so that Im >= 0 holds exactly
    d = np.arctan2(im0 + g * np.cos(half) ** 2 / ws, reN + g * np.sin(ws * b) / (2 * ws))
    d = d + np.arctan2(im0 + g * np.sin(half) ** 2 / ws, reN - g * np.sin(ws * b) / (2 * ws))
    d = d - 2 * np.arctan2(im0 + g / (2 * ws), reN)
    d = d - _line_raw_zero(params, geom)
    d = np.where(w == 0, 0.0, d)
    return _out(d, w)


def line_delta_inf(params: OscillatorParams, geom: Geometry) -> float:
    """Large-w limit of :func:`delta_line` (minus its raw value at 0+)."""
    return -_line_raw_zero(params, geom)


def d_delta_line(params: OscillatorParams, geom: Geometry, w):
    r""":math:`\partial_\omega\delta_L = \mathrm{Im}[L'(\omega)/L(\omega)]`."""
    w = _as_real(w)
    if params.g == 0:
        return _out(np.zeros_like(w), w)
    # below w_small the closed form loses digits to the 1/w real part of L'/L,
    # while the slope is constant up to O(w^2)
    w_small = 1e-7 * max(params.omega, params.gamma, params.g ** (1 / 3), 1 / geom.b)
    tiny = w < w_small
    ws = np.where(tiny, w_small, w)
    d = np.imag(model.l_factor_logderiv(params, geom, ws))
    if np.any(tiny):
        d = np.where(tiny, line_slope_at_zero(params, geom), d)
    return _out(d, w)


def line_slope_at_zero(params: OscillatorParams, geom: Geometry) -> float:
    r"""Closed-form :math:`\partial_\omega\delta_L(0)`.

    For Omega > 0 this is (b^2 g^2 + 2(gamma - 2 b Omega^2) g + 6 Omega^4)
    / ((2 Omega^2 - b g) g); for Omega = 0 it reduces to -b - 2 gamma/(b g).
    """
    g, b, o2, gam = params.g, geom.b, params.omega**2, params.gamma
    if g == 0:
        return 0.0
    if o2 == 0:
        return -b - 2 * gam / (b * g)
    return (b * b * g * g + 2 * (gam - 2 * b * o2) * g + 6 * o2 * o2) / ((2 * o2 - b * g) * g)


# ----------------------------------------------------------------------------
# plasma-model scattering phase


def _t_inv(params, geom, w):
    # t(w)^-1 = 1 - (g e^{iwb} / (2iwN + g))^2 on the real axis
    N = params.omega**2 - w * w
    r = params.g * np.exp(1j * w * geom.b) / (2j * w * N + params.g)
    return (1 - r) * (1 + r)


def unwrap_adaptive(raw, grid, start_value=None, threshold=np.pi / 2):
    """Continuous phase from a principal-value function by adaptive bisection.

    ``raw(w)`` returns the phase modulo 2 pi.  Between consecutive grid
    points the wrapped increment is accumulated; when it reaches
    ``threshold`` the interval is bisected until every sub-step is below it.

    Parameters
    ----------
    raw : callable
        Vectorised principal-value phase.
    grid : array_like
        Strictly increasing sample points.
    start_value : float, optional
        Branch chosen at ``grid[0]``; default is ``raw(grid[0])``.

    Raises
    ------
    BranchError
        If bisection cannot resolve a step, which signals a zero of the
        underlying function on (or extremely close to) the real axis.
    """
    grid = np.asarray(grid, dtype=float)
    vals = np.asarray(raw(grid), dtype=float)
    out = np.empty_like(vals)
    out[0] = vals[0] if start_value is None else start_value
    wrap = lambda x: (x + np.pi) % (2 * np.pi) - np.pi

    def step(a, b, fa, fb, depth):
        d = wrap(fb - fa)
        if abs(d) < threshold:
            return d
        if depth >= _MAX_BISECT or b - a <= 4 * np.finfo(float).eps * max(abs(a), abs(b)):
            raise BranchError(f"phase step not resolved near w={a:.17g}")
        m = 0.5 * (a + b)
        fm = float(raw(np.array([m]))[0])
        return step(a, m, fa, fm, depth + 1) + step(m, b, fm, fb, depth + 1)

    for i in range(1, len(grid)):
        out[i] = out[i - 1] + step(grid[i - 1], grid[i], vals[i - 1], vals[i], 0)
    return out


def delta_scattering(params: OscillatorParams, geom: Geometry, w, w_start=None):
    r"""Phase of :math:`t(\omega)/t(-\omega)` for undamped oscillators.

    Sampled on a grid from a small starting frequency and unwrapped by
    adaptive bisection; the branch at the start is fixed by the known
    :math:`\pm\pi/2` limit of :math:`-\arg t^{-1}(0^+)`, which is then
    removed so that delta(0) = 0.
    """
    if params.gamma != 0:
        raise ValueError("the scattering phase is defined for gamma = 0")
    if geom.in_box:
        raise ValueError("delta_scattering needs the infinite line")
    w = _as_real(w)
    if params.g == 0:
        return _out(np.zeros_like(w), w)
    flat = np.atleast_1d(w).ravel()
    order = np.argsort(flat)
    ws = flat[order]
    scale = max(params.omega, params.g ** (1 / 3), 1 / geom.b)
    w0 = 1e-9 / scale if w_start is None else w_start
    pos = ws[ws > 0]
    base = max(pos[-1], w0) if pos.size else w0
    # ensure a reasonably dense grid so the phase between samples is tracked
    dense = np.linspace(w0, base, max(2, int(np.ceil((base - w0) * geom.b * 8)) + 2))
    grid = np.unique(np.concatenate([[w0], dense, pos[pos >= w0]]))
    raw = lambda x: -np.angle(_t_inv(params, geom, x))
    raw0 = float(np.sign(line_zero_parameter(params, geom))) * np.pi / 2
    start = raw(np.array([w0]))[0]
    start = start + 2 * np.pi * np.round((raw0 - start) / (2 * np.pi))
    cont = unwrap_adaptive(raw, grid, start_value=start) - raw0
    res = np.interp(ws, grid, cont)
    # points below w0 are linear in w to the accuracy of the start branch
    small = ws < w0
    res[small] = cont[0] * ws[small] / w0
    out = np.empty_like(res)
    out[order] = res
    return _out(out.reshape(np.shape(w)), w)


# ----------------------------------------------------------------------------
# scalar fast paths used inside adaptive quadrature (about 30x cheaper than
# the array code for a single frequency)


def _g12_scalar(w, b, L):
    """G1, G2 and their derivatives at one real frequency."""
    d = L - b
    if abs(w * L) < 1e-4:
        G1 = (L * L - b * b) / (4 * L) * (1 + w * w * (L * L - b * b) / 12)
        G2 = d * d / (4 * L) * (1 + w * w * (L * L / 6 - d * d / 12))
        d1 = (L * L - b * b) ** 2 / (24 * L) * w
        d2 = d * d / (2 * L) * (L * L / 6 - d * d / 12) * w
        return G1, G2, d1, d2
    s, c = math.sin(w * L), math.cos(w * L)
    if s == 0:
        raise ResonanceError(f"box resonance at w={w}")
    B = 2 * w * s
    dB = 2 * s + 2 * w * L * c
    A1 = math.cos(w * b) - c
    A2 = 1 - math.cos(w * d)
    dA1 = -b * math.sin(w * b) + L * s
    dA2 = d * math.sin(w * d)
    return A1 / B, A2 / B, (dA1 * B - A1 * dB) / (B * B), (dA2 * B - A2 * dB) / (B * B)


def _box_scalar(params, geom, off, reference, w, derivative):
    G1, G2, d1, d2 = _g12_scalar(w, geom.b, geom.L)
    g, gam = params.g, params.gamma
    im = gam * w
    reN = params.omega**2 - w * w
    out = 0.0
    terms = [(1, G1 + G2, d1 + d2, off[1]), (1, G1 - G2, d1 - d2, off[-1])]
    if reference:
        terms.append((-2, G1, d1, off[0]))
    for wt, G, dG, o in terms:
        a = reN - g * G
        if derivative:
            out += wt * gam * (a + w * (2 * w + g * dG)) / (a * a + im * im)
        else:
            out += wt * (math.atan2(im, a) - o)
    return out


def _line_scalar(params, geom, raw0, w):
    if w == 0:
        return 0.0
    g, b = params.g, geom.b
    reN = params.omega**2 - w * w
    im0 = params.gamma * w
    sh, ch = math.sin(0.5 * w * b), math.cos(0.5 * w * b)
    sb = math.sin(w * b) / (2 * w)
    d = math.atan2(im0 + g * ch * ch / w, reN + g * sb)
    d += math.atan2(im0 + g * sh * sh / w, reN - g * sb)
    d -= 2 * math.atan2(im0 + g / (2 * w), reN)
    return d - raw0


def _line_scalar_derivative(params, geom, w):
    w_small = 1e-7 * max(params.omega, params.gamma, params.g ** (1 / 3), 1 / geom.b)
    if w < w_small:
        return line_slope_at_zero(params, geom)
    g, b = params.g, geom.b
    N = complex(params.omega**2 - w * w, params.gamma * w)
    dN = complex(-2 * w, params.gamma)
    D = 2j * w * N - g
    dD = 2j * N + 2j * w * dN
    ex = cmath.exp(-1j * w * b)
    r = g * ex / D
    dr = r * (-1j * b - dD / D)
    em1 = complex(-2 * math.sin(0.5 * w * b) ** 2, -math.sin(w * b))  # e^{-iwb} - 1
    one_plus = (2j * w * N + g * em1) / D
    return (-2 * r * dr / (one_plus * (1 - r))).imag


# ----------------------------------------------------------------------------
# unified access


@dataclass
class PhaseFunction:
    """Branch-continuous phase of one system with derivative access.

    Parameters
    ----------
    system : {"single", "box", "line", "scattering"}
    params : OscillatorParams
    geom : Geometry, optional
        Required for every system but ``single``.
    reference : bool
        Box only: subtract the isolated-oscillator phase.
    """

    system: str
    params: OscillatorParams
    geom: Geometry | None = None
    reference: bool = False
    _last: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ValueError(f"system must be one of {SYSTEMS}")
        if self.system != "single" and self.geom is None:
            raise ValueError(f"{self.system} phase needs a geometry")
        if self.system == "box" and not self.geom.in_box:
            raise ValueError("box phase needs L")
        if self.system in ("line", "scattering") and self.geom.in_box:
            raise ValueError(f"{self.system} phase lives on the infinite line")
        if self.system in ("single", "box"):
            _require_damping(self.params)

    def __call__(self, w):
        return self.value(w)

    def value(self, w):
        if self.system == "single":
            return delta_single(self.params, w)
        if self.system == "box":
            return delta_box(self.params, self.geom, w, self.reference)
        if self.system == "line":
            return delta_line(self.params, self.geom, w)
        return delta_scattering(self.params, self.geom, w)

    def scalar(self, w: float) -> float:
        """Phase at one frequency through the scalar fast path."""
        p = self.params
        if self.system == "single":
            d = math.atan2(p.gamma * w, p.omega**2 - w * w)
            return d - math.pi / 2 if p.omega == 0 and w > 0 else d
        if self.system == "box":
            if "off" not in self._last:
                self._last["off"] = _box_offsets(p, self.geom)
            return _box_scalar(p, self.geom, self._last["off"], self.reference, w, False)
        if self.system == "line":
            return 0.0 if p.g == 0 else _line_scalar(p, self.geom, _line_raw_zero(p, self.geom), w)
        return float(self.value(w))

    def scalar_derivative(self, w: float) -> float:
        p = self.params
        if self.system == "single":
            if p.omega == 0:
                return p.gamma / (w * w + p.gamma**2)
            n2 = (p.omega**2 - w * w) ** 2 + (p.gamma * w) ** 2
            return p.gamma * (w * w + p.omega**2) / n2
        if self.system == "box":
            return _box_scalar(p, self.geom, {1: 0.0, -1: 0.0, 0: 0.0}, self.reference, w, True)
        if p.g == 0:
            return 0.0
        return _line_scalar_derivative(p, self.geom, w)

    def derivative(self, w):
        """Smooth part of d delta / dw (no point contributions at steps)."""
        if self.system == "single":
            return d_delta_single(self.params, w)
        if self.system == "box":
            return d_delta_box(self.params, self.geom, w, self.reference)
        # the scattering phase equals the gamma = 0 line phase
        return d_delta_line(self.params, self.geom, w)

    def jumps(self, w_max: float):
        """Steps (positions, sizes) of the phase on (0, w_max]."""
        if self.system == "box":
            return box_jumps(self.params, self.geom, w_max, self.reference)
        return np.empty(0), np.empty(0)

    def breakpoints(self, w_max: float):
        """Frequencies where quadrature panels should end."""
        pts = []
        if self.system == "box":
            pts.extend(model.box_resonances(self.geom, w_max))
        if self.params.omega > 0 and self.params.omega < w_max:
            pts.append(self.params.omega)
        return np.unique(np.asarray(pts, dtype=float))

    @property
    def decays(self) -> bool:
        """Whether delta - delta_inf is integrable at large w."""
        return self.system in ("line", "scattering") or (self.system == "box" and self.reference)

    @property
    def delta_inf(self) -> float:
        """Limit (or mean limit, for the box) of delta at large w."""
        if self.system == "single":
            return np.pi / 2 if self.params.omega == 0 else np.pi
        if self.system in ("line", "scattering"):
            return line_delta_inf(self.params, self.geom) if self.params.g else 0.0
        off = _box_offsets(self.params, self.geom)
        if self.reference:
            return -off[1] - off[-1] + 2 * off[0]
        return 2 * np.pi - off[1] - off[-1]

    @property
    def slope_at_zero(self) -> float:
        p = self.params
        if self.system == "single":
            if p.omega == 0:
                return 1 / p.gamma
            return p.gamma / p.omega**2
        if self.system == "box":
            s = _box_static(p, self.geom)
            val = sum(p.gamma / s[k] for k in (1, -1))
            if self.reference:
                val -= 2 * p.gamma / s[0]
            return val
        return line_slope_at_zero(p, self.geom)

    def sample(self, grid):
        """Evaluate on an increasing grid and check branch continuity.

        Between neighbouring samples the phase may change by less than
        pi/2 apart from the known steps; otherwise the interval is bisected
        to confirm the change is resolved.  The last sampled frequency is
        remembered.
        """
        grid = np.asarray(grid, dtype=float)
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        vals = np.asarray(self.value(grid), dtype=float)
        k, _ = self.jumps(grid[-1] if grid.size else 0.0)

        def check(a, b, fa, fb, depth):
            if abs(fb - fa) < np.pi / 2:
                return
            if k.size and np.any((k > a) & (k < b)):
                return
            if depth >= _MAX_BISECT:
                raise BranchError(f"phase not continuous near w={a:.17g}")
            m = 0.5 * (a + b)
            fm = float(self.value(m))
            check(a, m, fa, fm, depth + 1)
            check(m, b, fm, fb, depth + 1)

        for i in range(1, grid.size):
            check(grid[i - 1], grid[i], vals[i - 1], vals[i], 0)
        if grid.size:
            self._last.update(w=float(grid[-1]), delta=float(vals[-1]))
        return vals


def d_delta(phase: PhaseFunction, w):
    """Analytic frequency derivative of a phase."""
    return phase.derivative(w)
