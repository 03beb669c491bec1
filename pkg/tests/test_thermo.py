import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from casimir1d import asymptotics as asy
from casimir1d import thermo
from casimir1d.params import Geometry, OscillatorParams, ThermalParams
from casimir1d.phases import PhaseFunction

from .conftest import ORACLE


def single(omega=1.0, gamma=0.1):
    return PhaseFunction("single", OscillatorParams(omega, gamma, g=0.0))


def test_bose_weight():
    bw = thermo.BoseWeight(0.7)
    w = np.linspace(1e-3, 50, 200)
    assert np.all(bw(w) >= 1)
    assert bw(50.0) == pytest.approx(1.0, abs=1e-30)
    assert bw(0.3) == pytest.approx(2 * bw.occupation(0.3) + 1, rel=1e-14)
    assert bw.log_term(0.3) == pytest.approx(0.7 * math.log(1 - math.exp(-0.3 / 0.7)), rel=1e-14)
    for x in (math.log(3), 3.0, 10.0):
        assert bw(x * 0.7) - 1 <= bw.tail_bound(x * 0.7) * (1 + 1e-15)


def test_single_gamma_zero_free_energy():
    rep = thermo.free_energy_real_freq(single(gamma=1e-4), ThermalParams(1.0))
    assert rep.F == pytest.approx(ORACLE["gamma_zero_F_om1_T1"], abs=1e-3)
    assert rep.diagnostics["cutoff_dependent"]


def test_single_gamma_zero_energy():
    E = thermo.energy_real_freq(single(gamma=1e-3), ThermalParams(1.0))
    assert E == pytest.approx(0.5 / math.tanh(0.5), rel=1e-3)
    assert E == pytest.approx(ORACLE["gamma_zero_E_om1_T1"], rel=1e-3)


def test_single_thermal_part_converges_linearly_in_gamma():
    exact = asy.gamma_zero_forms(OscillatorParams(1.0, 0.0), ThermalParams(1.0))
    dev = []
    for g in (1e-2, 1e-3, 1e-4):
        rF, _, _ = thermo.thermal_parts(single(gamma=g), ThermalParams(1.0))
        dev.append(abs(rF.value - (exact.F - 0.5)))
    assert dev[0] > dev[1] > dev[2]
    assert dev[2] < 1e-3


@pytest.mark.parametrize("T", [50.0, 200.0])
def test_single_classical_limit(T):
    E = thermo.energy_real_freq(single(), ThermalParams(T))
    assert E / T == pytest.approx(1.0, rel=1e-2)


def test_decoupled_box_is_two_singles():
    p = OscillatorParams(1.2, 0.3, g=0.0)
    th = ThermalParams(0.8)
    cut = 30.0
    box = thermo.free_energy_real_freq(PhaseFunction("box", p, Geometry(1.0, 2.0)), th, omega_cut=cut)
    one = thermo.free_energy_real_freq(PhaseFunction("single", p), th, omega_cut=cut)
    assert box.E == pytest.approx(2 * one.E, rel=1e-8)
    assert box.F == pytest.approx(2 * one.F, rel=1e-8)


def test_split_and_direct_forms_agree():
    rep = thermo.free_energy_real_freq(PhaseFunction("line", OscillatorParams(1.0, 0.3, 1.0), Geometry(1.0)), ThermalParams(1.0))
    assert rep.F == pytest.approx(rep.F0 + rep.dTF, abs=1e-15)
    assert rep.diagnostics["ibp_mismatch"] < 1e-8
    assert rep.diagnostics["dTF_direct"] == pytest.approx(rep.dTF, rel=1e-8)


@pytest.mark.parametrize(
    "phase",
    [
        single(1.0, 0.3),
        PhaseFunction("line", OscillatorParams(1.0, 0.3, 1.0), Geometry(1.0)),
        PhaseFunction("line", OscillatorParams(0.0, 0.1, 1.0), Geometry(0.5)),
        pytest.param(
            PhaseFunction("box", OscillatorParams(1.0, 0.3, 0.5), Geometry(1.0, 2.0), reference=True),
            marks=pytest.mark.slow,
        ),
    ],
    ids=["single", "line", "line_free", "box"],
)
def test_legendre_consistency(phase):
    # E = d(beta F)/d beta by a centred difference in beta
    beta, h = 1.0, 1e-3
    F = lambda b: thermo.free_energy_real_freq(phase, ThermalParams(1 / b), check=False).F
    dbF = ((beta + h) * F(beta + h) - (beta - h) * F(beta - h)) / (2 * h)
    E = thermo.energy_real_freq(phase, ThermalParams(1 / beta), check=False)
    assert E == pytest.approx(dbF, rel=1e-4)


def test_entropy_matches_report():
    phase = PhaseFunction("line", OscillatorParams(1.0, 0.3, 1.0), Geometry(1.0))
    th = ThermalParams(1.0)
    rep = thermo.free_energy_real_freq(phase, th)
    S = thermo.entropy(lambda t: thermo.free_energy_real_freq(phase, t, check=False), th)
    assert S == pytest.approx(rep.S, rel=1e-6)
    assert rep.E == pytest.approx(rep.F + th.T * rep.S, rel=1e-10)
    with pytest.raises(ValueError):
        thermo.entropy(lambda t: 0.0, ThermalParams(1.0), dT=2.0)


def test_line_against_oracle():
    for key, (om, gam, b) in {"line_a": (1.0, 0.3, 1.0), "line_b": (0.0, 0.1, 0.5)}.items():
        rep = thermo.free_energy_real_freq(PhaseFunction("line", OscillatorParams(om, gam, 1.0), Geometry(b)), ThermalParams(1.0))
        o = ORACLE[key]
        assert rep.F0 == pytest.approx(o["F0"], rel=1e-8)
        assert rep.dTF == pytest.approx(o["dTF"], rel=1e-8)
        assert rep.F == pytest.approx(o["F"], rel=1e-8)


def test_box_against_oracle():
    phase = PhaseFunction("box", OscillatorParams(1.0, 0.3, 0.5), Geometry(1.0, 2.0), reference=True)
    rep = thermo.free_energy_real_freq(phase, ThermalParams(1.0))
    assert rep.F == pytest.approx(ORACLE["box_a"]["F"], rel=1e-7)


def test_line_separation_dependence_dies_out():
    # beyond the zero-mode convention term (T/2) ln|2 c T| nothing survives at large b
    p = OscillatorParams(1.0, 0.3, 1.0)
    rest = []
    for b in (5.0, 10.0, 20.0):
        rep = thermo.free_energy_real_freq(PhaseFunction("line", p, Geometry(b)), ThermalParams(1.0), check=False)
        c = b - 2 * p.omega**2 / p.g
        rest.append(abs(rep.F - 0.5 * math.log(2 * c)))
        assert abs(rep.F0) < 0.3 / b
    assert rest[2] < rest[1] < rest[0] and rest[2] < 1e-4


@settings(max_examples=25)
@given(st.floats(0.0, 2.0), st.floats(0.05, 1.0), st.floats(0.05, 3.0))
def test_thermal_free_energy_negative_for_positive_phase(om, gam, T):
    rF, _, _ = thermo.thermal_parts(single(om, gam), ThermalParams(T), check=False)
    assert rF.value <= 0


@settings(max_examples=15)
@given(st.floats(0.2, 2.0), st.floats(0.05, 1.0), st.floats(0.2, 2.0), st.floats(0.1, 3.0))
def test_thermal_part_homogeneous_in_hbar_and_T(om, gam, b, lam):
    # Delta_T F depends on hbar and T only through T / hbar, times hbar
    p = OscillatorParams(om, gam, 1.0)
    assume(abs(b - 2 * om * om) > 1e-2)
    phase = PhaseFunction("line", p, Geometry(b))
    a, _, _ = thermo.thermal_parts(phase, ThermalParams(0.5, 1.0), check=False)
    s, _, _ = thermo.thermal_parts(phase, ThermalParams(0.5 * lam, lam), check=False)
    assert s.value == pytest.approx(lam * a.value, rel=1e-8, abs=1e-13)


@pytest.mark.parametrize("om", [1.0, 0.0])
def test_entropy_vanishes_at_low_T(om):
    phase = single(om, 0.5)
    S = []
    for T in (1e-2, 1e-3):
        S.append(thermo.entropy(lambda t: thermo.free_energy_real_freq(phase, t, check=False), ThermalParams(T)))
    assert 0 < S[1] < S[0] and S[1] < 1e-2


def test_vacuum_imag_axis_decoupled():
    assert thermo.vacuum_energy_imag_axis(OscillatorParams(1.0, 0.0, 0.0), Geometry(1.0)) == (0.0, 0.0)
    with pytest.raises(ValueError):
        thermo.vacuum_energy_imag_axis(OscillatorParams(1.0, 0.1, 1.0), Geometry(1.0))


def test_vacuum_imag_axis_matches_oracle():
    E0, _ = thermo.vacuum_energy_imag_axis(OscillatorParams(1.0, 0.0, 1.0), Geometry(1.0))
    rep = thermo.free_energy_real_freq(PhaseFunction("line", OscillatorParams(1.0, 0.0, 1.0), Geometry(1.0)), ThermalParams(0.0))
    assert E0 == pytest.approx(rep.F0, rel=1e-8)


@settings(max_examples=10)
@given(st.floats(0.0, 2.0), st.floats(0.1, 3.0), st.floats(0.3, 3.0))
def test_vacuum_imag_axis_scaling(om, g, b):
    lam = 2.0
    E1, _ = thermo.vacuum_energy_imag_axis(OscillatorParams(om, 0.0, g), Geometry(b))
    E2, _ = thermo.vacuum_energy_imag_axis(OscillatorParams(om / lam, 0.0, g / lam**3), Geometry(lam * b))
    assert E2 * lam * b == pytest.approx(E1 * b, rel=1e-7, abs=1e-13)


def test_dirichlet_limit_is_pi_over_24():
    # the strong-coupling limit of the line vacuum energy, computed and by mpmath
    E0, _ = thermo.vacuum_energy_imag_axis(OscillatorParams(1.0, 0.0, 1e8), Geometry(1.0))
    assert E0 == pytest.approx(ORACLE["dirichlet_E0_g1e8_b1"], rel=1e-6)
    assert E0 == pytest.approx(asy.dirichlet_energy(1.0), rel=1e-3)
