"""Two-body wavegroups: Gaussian-weighted eigenstate sums on (x2, x1) grids.

A wavegroup amplitude is sum_nodes weight * e^{i phase} * psi_eigen(v, V),
with the node list built by core.make_quadrature (or the infinite-well
variant below, which enumerates (n, V) pairs on the quantization lattice).
The joint PDF of a snapshot is |amplitude|^2, stored unnormalized with its
grid integral in GridSnapshot.norm.

Time origin: the eigenstate phases place every wavegroup centroid at the
origin at t = 0, so t = 0 is the classical collision of the centroids and
negative times are pre-collision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import BodySpec, GridSnapshot, SpectrumSample, spectrum_arrays
from .kernels import (REGION_ALL, REGION_BEFORE, REGION_INSIDE, REGION_AFTER,
                      BranchSet, grid_amplitude, point_amplitude)
from .units import UnitSystem

SYSTEMS = ("mirror", "finite_barrier", "finite_well", "infinite_well")


@dataclass(frozen=True)
class WavegroupScenario:
    """One reflection scenario: bodies, system geometry, and spectrum.

    d is the half width of the interaction region in x_rel (unused for the
    mirror).  For the infinite well, well_n0 / well_mode_width (the latter in
    units of D) describe the Gaussian mode-number distribution and every
    spectrum node satisfies the quantization v = V + n pi hbar (m+M)/(2 D m M)
    exactly.
    """

    system: str
    particle: BodySpec
    reflector: BodySpec
    units: UnitSystem
    spectrum: tuple[SpectrumSample, ...]
    pe: float = 0.0
    d: float = 0.0
    well_n0: int = 0
    well_mode_width: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ValueError(f"unknown system {self.system!r}")
        if not self.spectrum:
            raise ValueError("spectrum must be non-empty")
        if self.system == "finite_barrier" and self.pe <= 0.0:
            raise ValueError("finite_barrier requires PE > 0")
        if self.system == "finite_well" and self.pe >= 0.0:
            raise ValueError("finite_well requires PE < 0")
        if self.system in ("finite_barrier", "finite_well", "infinite_well") and self.d <= 0.0:
            raise ValueError(f"{self.system} requires a positive half width d")
        if self.system == "infinite_well":
            c = self.well_velocity_step()
            for s in self.spectrum:
                n = (s.v - s.V) / c
                if abs(n - round(n)) > 1e-6 or round(n) < 1:
                    raise ValueError(
                        f"infinite-well node (v={s.v}, V={s.V}) violates quantization")

    def well_velocity_step(self) -> float:
        """Velocity increment per mode number, pi hbar (m+M) / (2 D m M)."""
        m, M = self.particle.mass, self.reflector.mass
        return math.pi * self.units.hbar * (m + M) / (2.0 * self.d * m * M)


def make_well_spectrum(particle_mass: float, reflector: BodySpec, units: UnitSystem,
                       d: float, n0: int, mode_width: float, n_v_nodes: int = 48,
                       span_sigmas: float = 4.0, dephase_seed: int | None = None) -> tuple[SpectrumSample, ...]:
    """Quantized (n, V) tensor spectrum for the infinite well.

    Mode weights follow exp[-((n - n0) pi mode_width)^2] with mode_width in
    units of D; n is truncated where that weight falls below e^-16.  The V
    axis carries the reflector's Gaussian.  Weights multiply; v is fixed by
    the quantization relation for each pair.
    """
    if n0 < 1:
        raise ValueError("n0 must be >= 1")
    if mode_width <= 0.0:
        raise ValueError("mode_width must be positive")
    half_span = int(math.floor(4.0 / (math.pi * mode_width)))
    n_values = [n for n in range(n0 - half_span, n0 + half_span + 1) if n >= 1]
    if reflector.dv == 0.0 or n_v_nodes == 1:
        v_nodes = np.array([reflector.v0])
    else:
        v_nodes = np.linspace(reflector.v0 - span_sigmas * reflector.dv,
                              reflector.v0 + span_sigmas * reflector.dv, n_v_nodes)
    step = math.pi * units.hbar * (particle_mass + reflector.mass) / (
        2.0 * d * particle_mass * reflector.mass)

    phases = None
    if dephase_seed is not None:
        from .core import PhaseGenerator
        phases = PhaseGenerator(dephase_seed).phases(v_nodes.size)

    samples = []
    for i, V in enumerate(v_nodes):
        w_V = 1.0 if reflector.dv == 0.0 else math.exp(-((V - reflector.v0) ** 2) / (2.0 * reflector.dv ** 2))
        ph = float(phases[i]) if phases is not None else 0.0
        for n in n_values:
            w_n = math.exp(-((n - n0) * math.pi * mode_width) ** 2)
            samples.append(SpectrumSample(v=float(V + n * step), V=float(V),
                                          weight=float(w_V * w_n), phase=ph))
    return tuple(samples)


# ---------------------------------------------------------------------------
# Branch construction (lab-frame separable plane waves)
# ---------------------------------------------------------------------------


def _node_kinematics(scn: WavegroupScenario):
    v, V, w, ph = spectrum_arrays(list(scn.spectrum))
    hbar = scn.units.hbar
    m, M = scn.particle.mass, scn.reflector.mass
    k = m * v / hbar
    K = M * V / hbar
    mtot = m + M
    mu = m * M / mtot
    k_cm = k + K
    k_rel = (M * k - m * K) / mtot
    e_tot = (hbar * k) ** 2 / (2.0 * m) + (hbar * K) ** 2 / (2.0 * M)
    cnode = w * np.exp(1j * ph)
    return v, V, w, ph, k, K, k_cm, k_rel, e_tot, cnode, m, M, mtot, mu, hbar


def _reflected_wavevectors(k, K, m, M):
    mtot = m + M
    k_r = ((m - M) * k + 2.0 * m * K) / mtot
    K_r = (2.0 * M * k + (M - m) * K) / mtot
    return k_r, K_r


def build_branches(scn: WavegroupScenario, t: float, which: str = "all") -> BranchSet:
    """Assemble the separable branch set for a scenario at time t.

    which: "all" for the full eigenstate, "incident" for the free incident
    branch only (unmasked; used for pre-collision baselines).
    """
    v, V, w, ph, k, K, k_cm, k_rel, e_tot, cnode, m, M, mtot, mu, hbar = _node_kinematics(scn)
    tphase = np.exp(-1j * e_tot * t / hbar)
    c0 = cnode * tphase

    if which == "incident":
        return BranchSet(coef=c0[None, :], a1=(1j * k)[None, :], a2=(1j * K)[None, :],
                         region=np.array([REGION_ALL]), d=max(scn.d, 0.0))
    if which != "all":
        raise ValueError(f"unknown branch selector {which!r}")

    if scn.system == "mirror":
        k_r, K_r = _reflected_wavevectors(k, K, m, M)
        coef = np.stack([c0, -c0])
        a1 = 1j * np.stack([k, k_r])
        a2 = 1j * np.stack([K, K_r])
        region = np.array([REGION_BEFORE, REGION_BEFORE])
        return BranchSet(coef=coef, a1=a1, a2=a2, region=region, d=0.0)

    if scn.system in ("finite_barrier", "finite_well"):
        if np.any(k_rel <= 0.0):
            raise ValueError("every node needs v > V (incidence from the left)")
        e_rel = (hbar * k_rel) ** 2 / (2.0 * mu)
        b_c, f_c, g_c, h_c, k1, k2 = _barrier_coefficient_arrays(mu, e_rel, scn.pe, scn.d, hbar)
        k_r, K_r = _reflected_wavevectors(k, K, m, M)
        a1_f = 1j * ((m / mtot) * k_cm + k2)
        a2_f = 1j * ((M / mtot) * k_cm - k2)
        a1_g = 1j * ((m / mtot) * k_cm - k2)
        a2_g = 1j * ((M / mtot) * k_cm + k2)
        coef = np.stack([c0, c0 * b_c, c0 * f_c, c0 * g_c, c0 * h_c])
        a1 = np.stack([1j * k, 1j * k_r, a1_f, a1_g, 1j * k])
        a2 = np.stack([1j * K, 1j * K_r, a2_f, a2_g, 1j * K])
        region = np.array([REGION_BEFORE, REGION_BEFORE, REGION_INSIDE, REGION_INSIDE,
                           REGION_AFTER])
        return BranchSet(coef=coef, a1=a1, a2=a2, region=region, d=scn.d)

    # infinite well: sin[n pi (x_rel + D) / (2 D)] split into two exponentials
    step = scn.well_velocity_step()
    n = np.rint((v - V) / step).astype(np.int64)
    k_rel_q = n * np.pi / (2.0 * scn.d)
    phase_half = np.exp(0.5j * np.pi * n)
    a1_p = 1j * ((m / mtot) * k_cm + k_rel_q)
    a2_p = 1j * ((M / mtot) * k_cm - k_rel_q)
    a1_m = 1j * ((m / mtot) * k_cm - k_rel_q)
    a2_m = 1j * ((M / mtot) * k_cm + k_rel_q)
    coef = np.stack([c0 * phase_half / 2j, -c0 / phase_half / 2j])
    a1 = np.stack([a1_p, a1_m])
    a2 = np.stack([a2_p, a2_m])
    region = np.array([REGION_INSIDE, REGION_INSIDE])
    return BranchSet(coef=coef, a1=a1, a2=a2, region=region, d=scn.d)


def _barrier_coefficient_arrays(mu, e_rel, pe, d, hbar):
    """Vectorized closed-form matching coefficients over node arrays."""
    k1 = np.sqrt(2.0 * mu * e_rel) / hbar
    k2 = np.sqrt((2.0 * mu * (e_rel - pe)).astype(np.complex128)) / hbar
    if np.any(np.abs(k2) < 1e-14 * k1):
        raise ValueError("a node has E_rel = PE (zero barrier wavevector)")
    ratio = k1 / k2
    s = np.sin(2.0 * k2 * d)
    c = np.cos(2.0 * k2 * d)
    denom = 2.0 * c - 1j * (ratio + 1.0 / ratio) * s
    h = 2.0 * np.exp(-2j * k1 * d) / denom
    b = 0.5j * (1.0 / ratio - ratio) * s * h
    f = 0.5 * h * (1.0 + ratio) * np.exp(1j * (k1 - k2) * d)
    g = 0.5 * h * (1.0 - ratio) * np.exp(1j * (k1 + k2) * d)
    return b, f, g, h, k1, k2


# ---------------------------------------------------------------------------
# Snapshot evaluation
# ---------------------------------------------------------------------------


def amplitude_grid(scn: WavegroupScenario, x1_axis, x2_axis, t: float,
                   which: str = "all", backend: str | None = None) -> np.ndarray:
    """Complex amplitude of the wavegroup on the grid (row index = x2)."""
    x1_axis = np.asarray(x1_axis, dtype=float)
    x2_axis = np.asarray(x2_axis, dtype=float)
    return grid_amplitude(build_branches(scn, t, which), x1_axis, x2_axis, backend=backend)


def amplitude_points(scn: WavegroupScenario, p1, p2, t: float, which: str = "all",
                     backend: str | None = None, with_gradients: bool = False):
    """Amplitude (and optionally its x1/x2 gradients) at scattered points."""
    return point_amplitude(build_branches(scn, t, which), np.asarray(p1, float),
                           np.asarray(p2, float), backend=backend,
                           with_gradients=with_gradients)


def pdf_from_amplitude(amp: np.ndarray) -> np.ndarray:
    return amp.real ** 2 + amp.imag ** 2


def evaluate_snapshot(scn: WavegroupScenario, x1_axis, x2_axis, t: float,
                      backend: str | None = None) -> GridSnapshot:
    """Joint-PDF snapshot |sum_nodes w e^{i phase} psi|^2 with trapezoid norm."""
    amp = amplitude_grid(scn, x1_axis, x2_axis, t, backend=backend)
    return GridSnapshot.from_pdf(t=t, x1_axis=np.asarray(x1_axis, float),
                                 x2_axis=np.asarray(x2_axis, float),
                                 pdf=pdf_from_amplitude(amp),
                                 meta={"system": scn.system, "which": "all"})


def incident_only_snapshot(scn: WavegroupScenario, x1_axis, x2_axis, t: float,
                           backend: str | None = None) -> GridSnapshot:
    """Snapshot of the free incident branch only (pre-collision baseline)."""
    amp = amplitude_grid(scn, x1_axis, x2_axis, t, which="incident", backend=backend)
    return GridSnapshot.from_pdf(t=t, x1_axis=np.asarray(x1_axis, float),
                                 x2_axis=np.asarray(x2_axis, float),
                                 pdf=pdf_from_amplitude(amp),
                                 meta={"system": scn.system, "which": "incident"})


# ---------------------------------------------------------------------------
# Coherence lengths
# ---------------------------------------------------------------------------


def coherence_length(spec: BodySpec, units: UnitSystem) -> float:
    """Longitudinal coherence length l_c = lambda^2 / d(lambda) = h / (m dv).

    Both the lambda v0 / dv form and the wavevector form reduce to
    h / (mass dv); dv = 0 flags an infinite coherence length.
    """
    if spec.dv == 0.0:
        return math.inf
    return units.h / (spec.mass * spec.dv)


def thermal_spread(M: float, T: float, units: UnitSystem) -> float:
    """Thermal velocity spread sqrt(2 k_B T / M)."""
    if M <= 0.0 or T <= 0.0:
        raise ValueError("mass and temperature must be positive")
    return math.sqrt(2.0 * units.k_B * T / M)


def thermal_coherence(M: float, T: float, units: UnitSystem) -> float:
    """Thermal coherence length h / sqrt(2 M k_B T)."""
    if M <= 0.0 or T <= 0.0:
        raise ValueError("mass and temperature must be positive")
    return units.h / math.sqrt(2.0 * M * units.k_B * T)
