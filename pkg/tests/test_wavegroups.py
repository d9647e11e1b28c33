"""Wavegroup synthesis: linearity, kinematics, coherence formulas."""

import math

import numpy as np
import pytest

from qreflect.core import BodySpec, SpectrumSample, make_quadrature
from qreflect.units import UnitSystem
from qreflect.wavegroups import (WavegroupScenario, amplitude_grid, coherence_length,
                                 evaluate_snapshot, incident_only_snapshot,
                                 make_well_spectrum, thermal_coherence, thermal_spread)
from qreflect.analysis import marginal, centroid_track

U = UnitSystem.dimensionless()
SI = UnitSystem.si()


def _mirror(spec):
    return WavegroupScenario(system="mirror", particle=BodySpec(1.0, 1.0, 0.1),
                             reflector=BodySpec(100.0, 0.6, 0.002), units=U,
                             spectrum=tuple(spec))


def test_scenario_validation():
    part, refl = BodySpec(1.0, 1.0, 0.1), BodySpec(5.0, 0.5, 0.05)
    spec = tuple(make_quadrature(part, refl, n_nodes=4))
    with pytest.raises(ValueError):
        WavegroupScenario(system="maze", particle=part, reflector=refl, units=U, spectrum=spec)
    with pytest.raises(ValueError):
        WavegroupScenario(system="mirror", particle=part, reflector=refl, units=U, spectrum=())
    with pytest.raises(ValueError):
        WavegroupScenario(system="finite_barrier", particle=part, reflector=refl,
                          units=U, spectrum=spec, pe=-1.0, d=1.0)
    with pytest.raises(ValueError):
        WavegroupScenario(system="finite_well", particle=part, reflector=refl,
                          units=U, spectrum=spec, pe=2.0, d=1.0)
    with pytest.raises(ValueError):
        WavegroupScenario(system="finite_well", particle=part, reflector=refl,
                          units=U, spectrum=spec, pe=-2.0, d=0.0)


def test_single_sample_reduces_to_eigenstate():
    part, refl = BodySpec(1.0, 1.0, 0.0), BodySpec(100.0, 0.6, 0.0)
    spec = make_quadrature(part, refl, n_nodes=1)
    scn = WavegroupScenario(system="mirror", particle=part, reflector=refl,
                            units=U, spectrum=tuple(spec))
    from qreflect.core import PartitionMap
    from qreflect.eigenstates import mirror_pdf_identity
    x1 = np.linspace(-20.0, 5.0, 64)
    x2 = np.linspace(-3.0, 3.0, 32)
    snap = evaluate_snapshot(scn, x1, x2, 0.4)
    p = PartitionMap.from_bodies(part, refl, U)
    expected = np.where(x1[None, :] <= x2[:, None],
                        mirror_pdf_identity(p, x1[None, :], x2[:, None]), 0.0)
    assert np.allclose(snap.pdf, expected, atol=1e-11 * 4.0)


def test_amplitude_linearity_over_spectrum_split():
    spec = make_quadrature(BodySpec(1.0, 1.0, 0.1), BodySpec(100.0, 0.6, 0.002), n_nodes=6)
    scn_all = _mirror(spec)
    scn_a = _mirror(spec[:17])
    scn_b = _mirror(spec[17:])
    x1 = np.linspace(-12.0, 2.0, 31)
    x2 = np.linspace(-4.0, 4.0, 21)
    t = 0.6
    amp_all = amplitude_grid(scn_all, x1, x2, t)
    amp_sum = amplitude_grid(scn_a, x1, x2, t) + amplitude_grid(scn_b, x1, x2, t)
    assert np.allclose(amp_all, amp_sum, rtol=1e-12)


def test_incident_centroid_velocity_and_dispersion():
    part, refl = BodySpec(1.0, 1.0, 0.1), BodySpec(100.0, 0.6, 0.002)
    spec = make_quadrature(part, refl, n_nodes=48)
    scn = _mirror(spec)
    snaps = []
    for t in (-120.0, -100.0, -80.0):
        x1 = np.linspace(t - 60.0, t + 60.0, 256)
        x2 = np.linspace(0.6 * t - 40.0, 0.6 * t + 40.0, 128)
        snaps.append(incident_only_snapshot(scn, x1, x2, t))
    cx1 = centroid_track(snaps, "particle_x1")
    slope = (cx1[-1] - cx1[0]) / 40.0
    assert slope == pytest.approx(1.0, abs=0.01)
    cx2 = centroid_track(snaps, "reflector_x2")
    assert (cx2[-1] - cx2[0]) / 40.0 == pytest.approx(0.6, abs=0.01)
    widths = [marginal(s, "particle_x1").width() for s in snaps]
    assert widths[0] > widths[1] > widths[2]  # |t| decreasing toward collision


def test_well_spectrum_quantization_and_truncation():
    refl = BodySpec(10.0, 20.0, 0.6667)
    spec = make_well_spectrum(1.0, refl, U, d=1.0, n0=50, mode_width=1.0 / 15.0,
                              n_v_nodes=5)
    step = math.pi * 1.0 * 11.0 / (2.0 * 1.0 * 1.0 * 10.0)
    ns = sorted({round((s.v - s.V) / step) for s in spec})
    assert ns[0] == 50 - 19 and ns[-1] == 50 + 19
    for s in spec[:50]:
        n = (s.v - s.V) / step
        assert abs(n - round(n)) < 1e-9
    with pytest.raises(ValueError):
        make_well_spectrum(1.0, refl, U, d=1.0, n0=0, mode_width=0.1)


def test_infinite_well_scenario_rejects_off_lattice_nodes():
    part, refl = BodySpec(1.0, 5.0, 0.0), BodySpec(10.0, 1.0, 0.0)
    bad = (SpectrumSample(v=5.0, V=1.0, weight=1.0),)
    with pytest.raises(ValueError, match="quantization"):
        WavegroupScenario(system="infinite_well", particle=part, reflector=refl,
                          units=U, spectrum=bad, d=1.0, well_n0=3, well_mode_width=0.1)


def test_infinite_well_outside_region_zero():
    refl = BodySpec(10.0, 20.0, 0.5)
    spec = make_well_spectrum(1.0, refl, U, d=1.0, n0=20, mode_width=0.1, n_v_nodes=8)
    part = BodySpec(1.0, spec[0].v, 0.0)
    scn = WavegroupScenario(system="infinite_well", particle=part, reflector=refl,
                            units=U, spectrum=spec, d=1.0, well_n0=20, well_mode_width=0.1)
    x1 = np.linspace(-6.0, 6.0, 41)
    x2 = np.array([0.9, 1.0, 1.1])
    snap = evaluate_snapshot(scn, x1, x2, 0.01)
    xr = x1[None, :] - x2[:, None]
    interior_max = snap.pdf[np.abs(xr) < 1.0].max()
    assert interior_max > 0.0
    assert np.all(snap.pdf[np.abs(xr) > 1.0] == 0.0)
    # hard-wall nodes: the boundary value is zero up to roundoff of the
    # exponential decomposition of the sine
    on_wall = np.isclose(np.abs(xr), 1.0, rtol=0.0, atol=1e-12)
    assert snap.pdf[on_wall].max() < 1e-24 * interior_max


def test_barrier_scenario_needs_leftward_incidence():
    part, refl = BodySpec(1.0, 0.5, 0.0), BodySpec(5.0, 1.5, 0.0)
    spec = tuple(make_quadrature(part, refl, n_nodes=1))
    scn = WavegroupScenario(system="finite_barrier", particle=part, reflector=refl,
                            units=U, spectrum=spec, pe=1.0, d=1.0)
    with pytest.raises(ValueError, match="v > V"):
        amplitude_grid(scn, np.linspace(-2, 2, 8), np.linspace(-1, 1, 8), 0.0)


# ---------------------------------------------------------------------------
# Coherence lengths
# ---------------------------------------------------------------------------


def test_coherence_length_forms_agree():
    # lambda v0 / dv and h / (m dv) are the same expression
    spec = BodySpec(mass=1.44e-25, v0=0.01, dv=4.6e-3)
    lam = SI.h / (spec.mass * spec.v0)
    assert coherence_length(spec, SI) == pytest.approx(lam * spec.v0 / spec.dv, rel=1e-14)


def test_coherence_length_ultracold_scale():
    # ultracold-atom parameters land at the micrometer scale
    lc = coherence_length(BodySpec(mass=1.44e-25, v0=0.01, dv=4.6e-3), SI)
    assert 3e-7 < lc < 3e-6


def test_coherence_length_inverse_proportionality_and_flag():
    a = coherence_length(BodySpec(1.0, 1.0, 0.1), U)
    b = coherence_length(BodySpec(1.0, 1.0, 0.2), U)
    assert a == pytest.approx(2.0 * b, rel=1e-14)
    assert math.isinf(coherence_length(BodySpec(1.0, 1.0, 0.0), U))


def test_thermal_forms():
    lc = thermal_coherence(1e-13, 1.0, SI)
    assert lc == pytest.approx(4.0e-16, rel=0.05)
    # square-root law: T -> 4T halves l_c
    assert thermal_coherence(1e-13, 4.0, SI) == pytest.approx(lc / 2.0, rel=1e-14)
    # algebraic identity of the two thermal forms
    dv = thermal_spread(1e-13, 1.0, SI)
    assert lc * 1e-13 * dv == pytest.approx(SI.h, rel=1e-12)
    with pytest.raises(ValueError):
        thermal_spread(1e-13, -1.0, SI)
