import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from casimir1d import model, spectra, thermo
from casimir1d.errors import ToleranceError
from casimir1d.params import Geometry, OscillatorParams, ThermalParams
from casimir1d.phases import PhaseFunction

from .conftest import ORACLE

BOX = Geometry(1.0, 10.0)


def own_poles(geom, w_max, sigma):
    n = np.arange(1, int(w_max * geom.L / np.pi) + 1)
    return np.pi * n[(-1.0) ** (n + 1) == sigma] / geom.L


def test_modes_against_oracle():
    spec = spectra.find_modes(OscillatorParams(1.0, 0.0, 1.0), BOX, 1.7)
    assert spec.omegas == pytest.approx(ORACLE["box_modes_L10_b1_g1_om1"], rel=1e-10)


def test_one_root_per_own_pole_interval():
    w_max = 6.0
    spec = spectra.find_modes(OscillatorParams(1.0, 0.0, 1.0), BOX, w_max)
    for sigma in (1, -1):
        w = spec.omegas[spec.sectors == sigma]
        assert np.all(np.diff(w) > 0)
        k = own_poles(BOX, w_max, sigma)
        for lo, hi in zip(k[:-1], k[1:]):
            assert np.sum((w > lo) & (w < hi)) == 1
    # across both sectors every box interval holds one root, plus the oscillator mode near Omega
    k = np.pi * np.arange(1, 19) / BOX.L
    counts = np.array([np.sum((spec.omegas > a) & (spec.omegas < b)) for a, b in zip(k[:-1], k[1:])])
    assert np.sum(counts) == counts.size + 1 and np.all(counts >= 1)


def test_residuals():
    spec = spectra.find_modes(OscillatorParams(1.0, 0.0, 1.0), BOX, 6.0)
    assert np.max(spec.residuals) < 1e-10
    for w, s in zip(spec.omegas, spec.sectors):
        assert abs(model.phi_sigma(OscillatorParams(1.0, 0.0, 1.0), BOX, w, s)) < 1e-10 * (w * w + 1 + 10)


def test_weak_coupling_limit():
    w_max = 3.0
    spec = spectra.find_modes(OscillatorParams(1.0, 0.0, 1e-6), BOX, w_max)
    k = spec.coupled_k
    for w in spec.omegas:
        assert min(abs(w - 1.0), np.min(np.abs(w - k))) < 1e-4
    assert np.sum(np.abs(spec.omegas - 1.0) < 1e-4) == 2


@pytest.mark.parametrize("g", [0.01, 0.05, 0.1])
def test_signs_positive_at_small_coupling(g):
    spec = spectra.find_modes(OscillatorParams(1.0, 0.0, g), BOX, 8.0)
    assert np.all(spec.signs == 1)


def test_warns_below_first_resonance():
    with pytest.warns(UserWarning):
        spectra.find_modes(OscillatorParams(1.0, 0.0, 1.0), BOX, 0.2)
    with pytest.raises(ValueError):
        spectra.find_modes(OscillatorParams(1.0, 0.0, 1.0), Geometry(1.0), 3.0)


@settings(max_examples=20)
@given(st.floats(0.0, 2.0), st.floats(0.05, 3.0), st.floats(1.5, 6.0))
def test_sector_union_equals_determinant_zeros(om, g, L):
    # sign changes of Phi_+ Phi_- between box resonances sit exactly at the sector roots
    p = OscillatorParams(om, 0.0, g)
    geom = Geometry(1.0, L)
    w_max = 4.0
    spec = spectra.find_modes(p, geom, w_max)
    assert np.max(spec.residuals, initial=0.0) < 1e-10
    k = np.pi * np.arange(1, int(w_max * L / np.pi) + 1) / L
    edges = np.concatenate([[1e-9], k, [w_max]])
    det = lambda w: np.real(np.linalg.det(model.phi_matrix(p, geom, w)))
    found = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        w = np.linspace(lo, hi, 400)[1:-1]
        if w.size < 2:
            continue
        v = np.array([det(x) for x in w])
        found += np.sum(np.sign(v[:-1]) != np.sign(v[1:]))
        inside = spec.omegas[(spec.omegas > w[0]) & (spec.omegas < w[-1])]
        for r in inside:
            # the determinant vanishes at each sector root
            assert abs(det(r)) < 1e-8 * (1 + abs(det(0.5 * (lo + hi))))
    assert found <= spec.count


def test_decoupled_mode_sum():
    p = OscillatorParams(1.0, 0.0, 1e-9)
    geom = Geometry(1.0, 2.0)
    th = ThermalParams(1.0)
    spec = spectra.find_modes(p, geom, 40.0)
    E, diag = spectra.mode_sum_energy(spec, th, relative_to_free=False)
    k = spec.coupled_k
    n = lambda w: 1 / np.expm1(w)
    closed = 2 * n(1.0) + np.sum(k * n(k))
    assert E == pytest.approx(closed, rel=1e-6)
    rel, _ = spectra.mode_sum_energy(spec, th)
    assert rel == pytest.approx(2 * n(1.0), rel=1e-6)
    assert diag["tail_bound"] < 1e-10


def test_mode_sum_window_check():
    spec = spectra.find_modes(OscillatorParams(1.0, 0.0, 0.5), Geometry(1.0, 2.0), 5.0)
    with pytest.raises(ToleranceError):
        spectra.mode_sum_energy(spec, ThermalParams(1.0))


def test_damped_energy_converges_to_mode_sum():
    p = OscillatorParams(1.0, 0.0, 0.5)
    geom = Geometry(1.0, 2.0)
    th = ThermalParams(1.0)
    E, _ = spectra.mode_sum_energy(spectra.find_modes(p, geom, 40.0), th)
    err = []
    for g in (1e-2, 1e-3, 1e-4):
        _, rE, _ = thermo.thermal_parts(PhaseFunction("box", p.replace(gamma=g), geom), th, check=False)
        err.append(abs(rE.value - E) / abs(E))
    assert err[0] > err[1] > err[2]
    assert err[2] < 1e-3
