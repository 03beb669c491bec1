r"""Closed-form limits: low-temperature coefficients, gamma -> 0 forms, Dirichlet limit.

All low-temperature laws share one shape.  When the phase starts linearly,
:math:`\delta(\omega) \simeq s\,\omega`, the thermal free energy
:math:`-(\hbar/\pi)\int_0^\infty \delta\,\mathcal N_T\,d\omega` tends to
:math:`-s\,\zeta(2)T^2/(\pi\hbar)`.  The coefficient ``c_F`` returned here is
the prefactor of :math:`-T^2`, so :math:`\Delta_T F \approx -c_F T^2` and
:math:`S \approx 2c_F T`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DegeneracyError
from .params import Geometry, OscillatorParams, ThermalParams

ZETA2 = math.pi**2 / 6

# relative distance below which a vanishing denominator counts as degenerate
_DEGENERATE = 1e-8


@dataclass(frozen=True)
class LowTCoefficients:
    """Leading low-temperature behaviour of one system.

    Attributes
    ----------
    c_F : float
        Delta_T F = -c_F T^2 + ...
    slope : float
        d delta / d omega at omega = 0; c_F = slope * zeta(2) / (pi hbar).
    system : str
    parts : dict
        Building blocks (gamma, Omega, g, b, G_sigma(0) or c_2, per-sector slopes).
    """

    c_F: float
    slope: float
    system: str
    parts: dict = field(default_factory=dict)

    def free_energy(self, T: float) -> float:
        return -self.c_F * T * T

    def entropy(self, T: float) -> float:
        return 2 * self.c_F * T


def _coefficient(slope, hbar):
    return slope * ZETA2 / (math.pi * hbar)


def _check(den, scale, what):
    if abs(den) <= _DEGENERATE * scale:
        raise DegeneracyError(f"{what} vanishes; the T^2 law has no finite coefficient here")


def lowT_single(params: OscillatorParams, hbar: float = 1.0) -> LowTCoefficients:
    """One damped oscillator: slope gamma/Omega^2, or 1/gamma for a free particle."""
    g, o = params.gamma, params.omega
    if o > 0:
        if g == 0:
            raise DegeneracyError("gamma = 0: the phase is a step at Omega, no T^2 law")
        slope = g / o**2
    else:
        if g == 0:
            raise DegeneracyError("Omega = gamma = 0: no restoring force and no damping")
        slope = 1.0 / g
    return LowTCoefficients(_coefficient(slope, hbar), slope, "single", {"gamma": g, "omega": o})


def box_static_green(geom: Geometry) -> dict:
    """G_sigma(0) for both sectors: (L - b)/2 for sigma = +1 and b(L - b)/(2L) for sigma = -1."""
    if not geom.in_box:
        raise ValueError("box geometry required")
    L, b = geom.L, geom.b
    return {1: 0.5 * (L - b), -1: 0.5 * b * (L - b) / L}


def lowT_box(params: OscillatorParams, geom: Geometry, hbar: float = 1.0, reference: bool = False) -> LowTCoefficients:
    """Two oscillators in the box: slope sum_sigma gamma / (Omega^2 - g G_sigma(0)).

    With ``reference`` the slope of the isolated-oscillator pair,
    2 gamma / (Omega^2 - g G_1(0)), is subtracted, matching
    ``delta_box(..., reference=True)``.
    """
    G0 = box_static_green(geom)
    o2, g, gam = params.omega**2, params.g, params.gamma
    per = {}
    for s, G in G0.items():
        den = o2 - g * G
        _check(den, o2 + g * G, f"Omega^2 - g G_{'+' if s > 0 else '-'}(0)")
        per[s] = gam / den
    slope = per[1] + per[-1]
    parts = {"gamma": gam, "omega": params.omega, "g": g, "b": geom.b, "L": geom.L, "G0": G0, "sector_slopes": per}
    if reference:
        G1 = 0.5 * (G0[1] + G0[-1])
        den = o2 - g * G1
        _check(den, o2 + g * G1, "Omega^2 - g G_1(0)")
        parts["reference_slope"] = 2 * gam / den
        slope -= parts["reference_slope"]
    return LowTCoefficients(_coefficient(slope, hbar), slope, "box", parts)


def line_c2(params: OscillatorParams, geom: Geometry) -> float:
    """Slope of the line phase at omega = 0."""
    g, b, o2, gam = params.g, geom.b, params.omega**2, params.gamma
    if g == 0:
        raise DegeneracyError("g = 0: the oscillators decouple from the field")
    if o2 == 0:
        return -b - 2 * gam / (b * g)
    den = 2 * o2 - b * g
    _check(den, 2 * o2 + b * g, "2 Omega^2 - b g")
    return (b * b * g * g + 2 * (gam - 2 * b * o2) * g + 6 * o2 * o2) / (den * g)


def lowT_line(params: OscillatorParams, geom: Geometry, hbar: float = 1.0) -> LowTCoefficients:
    """Two oscillators on the line: c_F = zeta(2) c_2 / (pi hbar)."""
    c2 = line_c2(params, geom)
    parts = {"gamma": params.gamma, "omega": params.omega, "g": params.g, "b": geom.b, "c2": c2}
    return LowTCoefficients(_coefficient(c2, hbar), c2, "line", parts)


@dataclass(frozen=True)
class ThermoValues:
    F: float
    E: float
    S: float


def gamma_zero_forms(params: OscillatorParams, thermal: ThermalParams) -> ThermoValues:
    """Undamped oscillator in a thermal state.

    F = hbar Omega/2 + T ln(1 - e^{-beta hbar Omega}), E = (hbar Omega/2) coth(beta hbar Omega/2).
    The damped phase collapses to a step at Omega as gamma -> 0, so these are
    the limits of the real-frequency results.
    """
    hw = thermal.hbar * params.omega
    if hw == 0:
        raise DegeneracyError("Omega = 0 has no undamped thermal state")
    if thermal.zero:
        return ThermoValues(0.5 * hw, 0.5 * hw, 0.0)
    x = hw / thermal.T
    F = 0.5 * hw + thermal.T * math.log(-math.expm1(-x))
    E = 0.5 * hw / math.tanh(0.5 * x)
    return ThermoValues(F, E, (E - F) / thermal.T)


def dirichlet_energy(b: float, hbar: float = 1.0) -> float:
    """Vacuum energy of a massless scalar on an interval of length b with Dirichlet ends.

    This is the g -> infinity limit of the line vacuum energy and equals
    -pi hbar / (24 b) in units c = 1.
    """
    return -math.pi * hbar / (24 * b)
