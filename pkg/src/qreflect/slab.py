"""Two-surface slab reflection: weak delta reflections at x_rel = +/- D/2.

A particle reflecting from either surface of a slab of thickness D (surfaces
symmetrically offset by D/2 from the slab's cm) produces two reflected
two-body wavegroups that co-propagate while staying offset by ~2D along x1
and by the recoil offset 2 m D / M along x2.  Their interference carries the
round-trip relative phase 2 K_rel D, so the harmonic joint density varies as

    P ∝ sin^2[ D m M (v - V) / (hbar (m + M)) ],

with destructive-to-constructive spacing pi hbar / (2 D m) in the particle
speed for m << M.  The entry/exit surface reflections carry opposite
amplitude signs (thin-film convention), multiple reflections are neglected,
and both reflected substates of a body share one velocity distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import BodySpec, GridSnapshot, SpectrumSample, spectrum_arrays
from .kernels import REGION_ALL, BranchSet, grid_amplitude
from .units import UnitSystem
from .wavegroups import pdf_from_amplitude, thermal_spread


@dataclass(frozen=True)
class SlabScenario:
    """Thin-slab reflection scenario.

    d_thickness is the full slab thickness (surfaces at x_rel = +/- D/2; the
    finite-barrier module's half-width convention differs by a factor 2).
    r is the weak per-surface reflection amplitude.  A temperature sets the
    slab's velocity spread via the thermal form when dv is not given
    directly.
    """

    particle: BodySpec
    slab: BodySpec
    d_thickness: float
    r: float
    units: UnitSystem
    spectrum: tuple[SpectrumSample, ...]
    temperature: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.d_thickness <= 0.0:
            raise ValueError("slab thickness must be positive")
        if not (0.0 < abs(self.r) < 0.2):
            raise ValueError("weak-reflection model needs 0 < |r| << 1")
        if not self.spectrum:
            raise ValueError("spectrum must be non-empty")


def slab_body_from_temperature(M: float, T: float, units: UnitSystem, V0: float) -> BodySpec:
    """Slab BodySpec whose dv is the thermal spread at temperature T."""
    return BodySpec(mass=M, v0=V0, dv=thermal_spread(M, T, units))


# ---------------------------------------------------------------------------
# Closed-form estimates
# ---------------------------------------------------------------------------


def slab_harmonic_pdf(m: float, M: float, v: float, V: float, d: float,
                      units: UnitSystem) -> tuple[float, float]:
    """Harmonic two-surface interference, exact and m/M, V/v << 1 forms.

    Returns (sin^2[D m M (v - V) / (hbar (m + M))], sin^2[D m v / hbar]) up
    to the overall weak-reflection scale.  The argument is the half
    round-trip phase K_rel D between the two surface reflections.
    """
    theta = d * m * M * (v - V) / (units.hbar * (m + M))
    theta_approx = d * m * v / units.hbar
    return math.sin(theta) ** 2, math.sin(theta_approx) ** 2


def slab_fringe_velocity_period(m: float, d: float, units: UnitSystem) -> float:
    """Destructive-to-constructive particle-speed spacing pi hbar / (2 D m)."""
    return math.pi * units.hbar / (2.0 * d * m)


def slab_recoil_offset(m: float, M: float, d: float) -> float:
    """Separation 2 m D / M of the two reflected slab substates (m/M << 1)."""
    return 2.0 * m * d / M


def slab_overlap_temperature_bound(m: float, M: float, d: float, units: UnitSystem) -> float:
    """Temperature below which the recoil offset stays inside l_c^thermal.

    T < h^2 M / (8 D^2 k_B m^2); the identical expression with the opposite
    inequality is the no-interference threshold of the decoherence module.
    """
    return units.h ** 2 * M / (8.0 * d ** 2 * units.k_B * m ** 2)


# ---------------------------------------------------------------------------
# Wavegroup snapshot
# ---------------------------------------------------------------------------


def build_slab_branches(scn: SlabScenario, t: float) -> BranchSet:
    """Two mirror-type reflected branches with surface phase offsets.

    Surface j at x_rel = a_j contributes -s_j r e^{2 i K_rel a_j} times the
    elastically reflected plane wave, with opposite signs s_j for entry and
    exit.  The node-dependent phase 2 K_rel a_j is what displaces the second
    envelope by ~2D in x1 and 2mD/M in x2.  Far-field model: no support mask
    (valid once the reflected groups have left the slab region).
    """
    v, V, w, ph = spectrum_arrays(list(scn.spectrum))
    hbar = scn.units.hbar
    m, M = scn.particle.mass, scn.slab.mass
    mtot = m + M
    k = m * v / hbar
    K = M * V / hbar
    k_rel = (M * k - m * K) / mtot
    e_tot = (hbar * k) ** 2 / (2.0 * m) + (hbar * K) ** 2 / (2.0 * M)
    k_r = ((m - M) * k + 2.0 * m * K) / mtot
    K_r = (2.0 * M * k + (M - m) * K) / mtot

    c0 = w * np.exp(1j * ph) * np.exp(-1j * e_tot * t / hbar) * scn.r
    half = 0.5 * scn.d_thickness
    front = -c0 * np.exp(2j * k_rel * (-half))
    back = +c0 * np.exp(2j * k_rel * (+half))
    coef = np.stack([front, back])
    a1 = 1j * np.stack([k_r, k_r])
    a2 = 1j * np.stack([K_r, K_r])
    return BranchSet(coef=coef, a1=a1, a2=a2,
                     region=np.array([REGION_ALL, REGION_ALL]), d=0.0)


def slab_wavegroup_snapshot(scn: SlabScenario, x1_axis, x2_axis, t: float,
                            backend: str | None = None) -> GridSnapshot:
    """Coherent sum of the two surface-reflected wavegroups on the grid.

    If the grid misses the reflected-group support, the snapshot is returned
    zero-filled with a warning recorded in its metadata.
    """
    x1_axis = np.asarray(x1_axis, dtype=float)
    x2_axis = np.asarray(x2_axis, dtype=float)
    amp = grid_amplitude(build_slab_branches(scn, t), x1_axis, x2_axis, backend=backend)
    pdf = pdf_from_amplitude(amp)
    meta = {"system": "slab", "which": "reflected_pair"}

    c1, c2 = reflected_centroid(scn, t)
    if not (x1_axis[0] <= c1 <= x1_axis[-1] and x2_axis[0] <= c2 <= x2_axis[-1]):
        meta["warning"] = (f"grid does not contain the reflected-group centroid "
                           f"({c1:.6g}, {c2:.6g}); snapshot zero-filled")
        pdf = np.zeros_like(pdf)
    return GridSnapshot.from_pdf(t=t, x1_axis=x1_axis, x2_axis=x2_axis, pdf=pdf, meta=meta)


def reflected_centroid(scn: SlabScenario, t: float) -> tuple[float, float]:
    """Classical post-reflection centroid (x1, x2) at time t."""
    m, M = scn.particle.mass, scn.slab.mass
    v, V = scn.particle.v0, scn.slab.v0
    v_f = ((m - M) * v + 2.0 * M * V) / (m + M)
    V_f = ((M - m) * V + 2.0 * m * v) / (m + M)
    return v_f * t, V_f * t
