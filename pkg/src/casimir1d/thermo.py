r"""Real-frequency representations of E, F and S.

Starting point is the phase form of the free energy

.. math::

    F = \int_0^\infty \frac{d\omega}{\pi}
        \Big(\frac{\hbar\omega}{2} + T\ln(1 - e^{-\beta\hbar\omega})\Big)
        \partial_\omega\delta(\omega),

split into the vacuum part :math:`F_0` and the thermal part
:math:`\Delta_T F`.  After integration by parts (allowed since
:math:`\delta(0) = 0`) only :math:`\delta` itself is needed:

.. math::

    \Delta_T F = -\frac{\hbar}{\pi}\int_0^\infty d\omega\,
                 \frac{\delta(\omega)}{e^{\beta\hbar\omega} - 1},\qquad
    F_0 = -\frac{\hbar}{2\pi}\int_0^\infty d\omega\,(\delta - \delta_\infty).

The second form needs a phase that settles to a constant; for the single
oscillator and the box without reference the vacuum part is computed with
an explicit frequency cutoff instead and is regularisation dependent.
The unintegrated form of :math:`\Delta_T F`, including the point
contributions of box phase steps, is evaluated as a cross-check.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import model
from .errors import ToleranceError
from .params import Geometry, OscillatorParams, ThermalParams
from .phases import PhaseFunction
from .quadrature import QuadResult, integrate, integrate_to_infinity, panel_edges, rough_estimate

_X_MAX = 60.0  # beta*hbar*w beyond which thermal integrands are cut
_CUTOFF_FACTOR = {"single": 100.0, "box": 20.0}


@dataclass
class BoseWeight:
    r"""Thermal weight :math:`\mathcal N_T(\omega) = \coth(\beta\hbar\omega/2)`."""

    T: float
    hbar: float = 1.0

    def x(self, w):
        return self.hbar * w / self.T

    def __call__(self, w):
        if self.T == 0:
            return np.ones_like(np.asarray(w, dtype=float))
        return 1.0 / np.tanh(0.5 * self.x(w))

    def occupation(self, w: float) -> float:
        """1 / (e^{beta hbar w} - 1), zero beyond overflow."""
        if self.T == 0:
            return 0.0
        x = self.x(w)
        return 0.0 if x > 700 else 1.0 / math.expm1(x)

    def log_term(self, w: float) -> float:
        """T ln(1 - e^{-beta hbar w})."""
        if self.T == 0:
            return 0.0
        x = self.x(w)
        return self.T * (math.log(-math.expm1(-x)) if x > 1e-300 else math.log(max(x, 1e-320)))

    def tail_bound(self, w: float) -> float:
        """Upper bound 3 e^{-beta hbar w} on N_T - 1, valid for beta hbar w >= ln 3."""
        if self.T == 0:
            return 0.0
        return 3.0 * math.exp(-self.x(w))


@dataclass
class EnergyReport:
    """Free energy, its parts, internal energy and entropy with diagnostics."""

    F: float
    F0: float
    dTF: float
    E: float
    S: float
    err_estimate: float = 0.0
    n_eval: int = 0
    n_subdiv: int = 0
    tail_bound: float = 0.0
    method: str = ""
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def phase_scale(phase: PhaseFunction) -> float:
    """Largest intrinsic frequency of the system, sets panel and cutoff sizes."""
    p, g = phase.params, phase.geom
    s = [p.omega, p.gamma, p.g ** (1 / 3)]
    if g is not None:
        s.append(1 / g.b)
        if g.in_box:
            s.append(np.pi / g.L)
    return max(s)


def _features(phase: PhaseFunction, lo: float, hi: float):
    """Breakpoints and narrow peaks of the phase integrand on [lo, hi].

    The phase changes fastest where the real part of a factor crosses zero
    while its imaginary part is small: at Omega for one oscillator, at the
    undamped eigenfrequencies (and those of the isolated-oscillator
    reference) in the box.  A zero at w_s with slope s has width
    gamma w_s / s; the panels around it are refined on that scale.
    """
    p = phase.params
    bps, feats = [], []
    if p.omega > 0:
        bps.append(p.omega)
        if phase.system == "single" and p.gamma > 0:
            feats.append((p.omega, 0.5 * p.gamma, p.omega))
    if phase.system == "box":
        from .spectra import find_modes

        spacing = np.pi / phase.geom.L
        k = model.box_resonances(phase.geom, hi)
        bps.extend(k[k > lo])
        if p.g > 0 and hi > lo:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                spec = find_modes(p, phase.geom, hi, include_reference=phase.reference)
            for w, s in zip(spec.omegas, spec.slopes):
                if lo < w < hi:
                    bps.append(w)
                    width = p.gamma * w / abs(s) if s else spacing
                    feats.append((w, max(width, 1e-15 * w), 0.5 * spacing))
    elif phase.system in ("line", "scattering"):
        step = np.pi / (2 * phase.geom.b)
        n0 = math.floor(lo / step) + 1
        n1 = math.ceil(hi / step)
        if n1 - n0 < 20000:
            bps.extend(step * np.arange(n0, n1))
    return bps, feats


def _edges(phase, lo, hi, thermal=None):
    bps, feats = _features(phase, lo, hi)
    if thermal is not None and not thermal.zero:
        w_T = thermal.T / thermal.hbar
        bps.extend(w_T * np.array([1e-2, 1e-1, 0.5, 1, 2, 5, 10, 20, 40]))
    return panel_edges(lo, hi, bps, features=feats)


def _delta_bound(phase, w_hi):
    grid = np.linspace(0, w_hi, 2001)[1:]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            v = np.abs(phase.value(grid))
            m = float(np.max(v[np.isfinite(v)]))
        except ArithmeticError:
            m = 0.0
    return max(m, abs(phase.delta_inf)) + np.pi


def thermal_parts(phase: PhaseFunction, thermal: ThermalParams, epsrel=1e-10, check=True):
    r"""Temperature-dependent parts :math:`\Delta_T F` and :math:`\Delta_T E`.

    Both are integrated in the by-parts form over [0, 60 T/hbar] with the
    Bose tail bound added to the diagnostics.  With ``check`` the
    unintegrated form of :math:`\Delta_T F` is evaluated as well and the
    mismatch is reported.

    Returns
    -------
    dTF, dTE : QuadResult
    diag : dict
    """
    if thermal.zero:
        z = QuadResult()
        return z, QuadResult(), {"tail_bound": 0.0}
    hb = thermal.hbar
    bw = BoseWeight(thermal.T, hb)
    w_hi = _X_MAX * thermal.T / hb
    edges = _edges(phase, 0.0, w_hi, thermal)
    val = phase.scalar
    beta_h = hb / thermal.T

    def fF(w):
        return val(w) * bw.occupation(w)

    def fE(w):
        n = bw.occupation(w)
        return val(w) * (n - beta_h * w * n * (n + 1))

    def occ(w):
        with np.errstate(over="ignore", divide="ignore"):
            return 1.0 / np.expm1(beta_h * w)

    def l1(fun):
        return max(rough_estimate(lambda w: np.abs(fun(w)), edges), 1e-300)

    vF = lambda w: phase.value(w) * occ(w)
    vE = lambda w: phase.value(w) * (occ(w) - beta_h * w * occ(w) * (occ(w) + 1))
    rF = integrate(fF, edges, 1e-300, epsrel, scale=l1(vF)).scaled(-hb / np.pi)
    rE = integrate(fE, edges, 1e-300, epsrel, scale=l1(vE)).scaled(-hb / np.pi)
    dmax = _delta_bound(phase, w_hi)
    tail = 2 * dmax * thermal.T * (1 + _X_MAX) * math.exp(-_X_MAX) / np.pi
    diag = {"tail_bound": tail, "omega_thermal_max": w_hi}
    if check:
        der = phase.scalar_derivative
        vD = lambda w: thermal.T * np.log(-np.expm1(-beta_h * w)) * phase.derivative(w)
        rD = integrate(
            lambda w: bw.log_term(w) * der(w), edges, 1e-300, epsrel, log_first=True, scale=l1(vD)
        )
        k, J = phase.jumps(w_hi)
        jump = sum(bw.log_term(kk) * jj for kk, jj in zip(k, J))
        direct = (rD.value + jump) / np.pi
        diag["dTF_direct"] = direct
        diag["ibp_mismatch"] = abs(direct - rF.value)
        allowed = 1e3 * (rF.error + rD.error / np.pi) + 1e-8 * abs(rF.value) + tail + 1e-15
        if diag["ibp_mismatch"] > allowed:
            warnings.warn(
                f"by-parts and direct thermal free energies differ by {diag['ibp_mismatch']:.3e}",
                RuntimeWarning,
                stacklevel=2,
            )
    return rF, rE, diag


def vacuum_part(phase: PhaseFunction, epsrel=1e-10, omega_cut=None, hbar=1.0):
    """Zero-temperature free energy F0 (= vacuum energy E0).

    Decaying phases are integrated to infinity; otherwise a cutoff
    (default 100 x the intrinsic scale for one oscillator, 20 x for the box)
    is applied to the by-parts form (hbar/2pi)(Lambda delta(Lambda) - int delta).

    Returns
    -------
    QuadResult, tail estimate, cutoff used (None when not needed)
    """
    scale = phase_scale(phase)
    val = phase.scalar
    if phase.decays and omega_cut is None:
        d_inf = phase.delta_inf
        hi = 20 * scale
        if phase.system == "box":
            hi = max(hi, 20 * np.pi / phase.geom.L)
        f = lambda w: val(w) - d_inf
        grow = lambda a, b: _edges(phase, a, b)
        edges = _edges(phase, 0.0, hi)
        est = rough_estimate(np.vectorize(lambda w: abs(f(w))), edges)
        res, tail, hi = integrate_to_infinity(f, edges, grow, epsabs=1e-15, epsrel=epsrel, scale=est)
        return res.scaled(-hbar / (2 * np.pi)), tail * hbar / (2 * np.pi), None
    cut = omega_cut if omega_cut is not None else _CUTOFF_FACTOR.get(phase.system, 100.0) * scale
    r = integrate(val, _edges(phase, 0.0, cut), epsabs=1e-14, epsrel=epsrel)
    out = QuadResult(hbar / (2 * np.pi) * (cut * val(cut) - r.value), hbar * r.error / (2 * np.pi), r.n_eval, r.n_subdiv)
    return out, 0.0, cut


def free_energy_real_freq(
    phase: PhaseFunction, thermal: ThermalParams, epsrel=1e-10, omega_cut=None, check=True
) -> EnergyReport:
    """Free energy, internal energy and entropy from the phase.

    Parameters
    ----------
    phase : PhaseFunction
    thermal : ThermalParams
    epsrel : float
        Relative tolerance handed to each panel.
    omega_cut : float, optional
        Cutoff for the vacuum part of non-decaying phases.
    check : bool
        Also evaluate the unintegrated thermal free energy.
    """
    rF, rE, diag = thermal_parts(phase, thermal, epsrel, check)
    r0, tail0, cut = vacuum_part(phase, epsrel, omega_cut, thermal.hbar)
    F0, dTF, dTE = r0.value, rF.value, rE.value
    S = 0.0 if thermal.zero else (dTE - dTF) / thermal.T
    diag.update(
        {
            "system": phase.system,
            "reference": phase.reference,
            "delta_inf": phase.delta_inf,
            "omega_cut": cut,
            "cutoff_dependent": cut is not None,
            "F0_tail": tail0,
            "dTE": dTE,
        }
    )
    return EnergyReport(
        F=F0 + dTF,
        F0=F0,
        dTF=dTF,
        E=F0 + dTE,
        S=S,
        err_estimate=r0.error + rF.error + rE.error + tail0 + diag["tail_bound"],
        n_eval=r0.n_eval + rF.n_eval + rE.n_eval,
        n_subdiv=r0.n_subdiv + rF.n_subdiv + rE.n_subdiv,
        tail_bound=tail0 + diag["tail_bound"],
        method="real_frequency",
        diagnostics=diag,
    )


def energy_real_freq(phase: PhaseFunction, thermal: ThermalParams, **kw) -> float:
    """Internal energy E = F0 + Delta_T E (see :func:`free_energy_real_freq`)."""
    return free_energy_real_freq(phase, thermal, **kw).E


def entropy(producer, thermal: ThermalParams, dT=None) -> float:
    """S = -dF/dT by a centred difference.

    ``producer(thermal)`` returns an :class:`EnergyReport` or a float F.
    """
    T = thermal.T
    dT = 1e-3 * T if dT is None else dT
    if not T > dT > 0:
        raise ValueError("entropy needs T > dT > 0")
    F = lambda t: (lambda r: r.F if isinstance(r, EnergyReport) else float(r))(producer(thermal.at(t)))
    return -(F(T + dT) - F(T - dT)) / (2 * dT)


def vacuum_energy_imag_axis(params: OscillatorParams, geom: Geometry, hbar=1.0, epsrel=1e-11):
    r"""Plasma-model vacuum energy :math:`\frac{\hbar}{2\pi}\int_0^\infty d\xi\,\ln|t(i\xi)^{-1}|`.

    The integrable logarithmic singularities at the zeros and at the pole
    of :math:`t(i\xi)^{-1}` become panel ends.

    Returns
    -------
    value, error_estimate
    """
    if params.gamma != 0:
        raise ValueError("the imaginary-axis vacuum energy is the gamma = 0 quantity")
    if geom.in_box:
        raise ValueError("vacuum_energy_imag_axis is defined on the infinite line")
    if params.g == 0:
        return 0.0, 0.0
    from .matsubara import _imag_axis_integral, find_bound_states

    bs = find_bound_states(params, geom)
    f = lambda x: math.log(abs(model.transmission_inv(params, geom, x))) if x > 0 else 0.0
    val, err = _imag_axis_integral(f, [*bs.roots, bs.pole], geom.b, epsrel)
    return hbar * val / (2 * np.pi), hbar * err / (2 * np.pi)
