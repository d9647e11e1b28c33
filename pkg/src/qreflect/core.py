"""Core containers shared by every physics module.

BodySpec holds one body's mass and Gaussian velocity distribution,
PartitionMap the lab <-> (cm, rel) transform constants, GridSnapshot a dense
joint-PDF sample, and SpectrumSample one Gaussian-weighted velocity node of a
wavegroup sum.  All types are immutable after construction and all functions
are pure, so everything here is safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .units import UnitSystem

# ---------------------------------------------------------------------------
# Deterministic phase generator (part of the scenario-file contract).
#
# Dephased spectra draw their node phases from the 64-bit linear congruential
# generator with Knuth's MMIX constants,
#
#     state <- (6364136223846793005 * state + 1442695040888963407) mod 2^64
#
# seeded by state_0 = seed mod 2^64 and advanced once before the first draw.
# Each draw maps the top 53 bits to a phase in [0, 2*pi).  Identical seeds
# therefore reproduce bit-identical phase arrays on every platform.
# ---------------------------------------------------------------------------

_LCG_MULT = 6364136223846793005
_LCG_INC = 1442695040888963407
_LCG_MASK = (1 << 64) - 1


class PhaseGenerator:
    """64-bit LCG emitting uniform phases in [0, 2*pi)."""

    def __init__(self, seed: int):
        self._state = seed & _LCG_MASK

    def next_phase(self) -> float:
        self._state = (_LCG_MULT * self._state + _LCG_INC) & _LCG_MASK
        return 2.0 * math.pi * (self._state >> 11) / float(1 << 53)

    def phases(self, n: int) -> np.ndarray:
        return np.array([self.next_phase() for _ in range(n)], dtype=float)


# ---------------------------------------------------------------------------
# Body and partition specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BodySpec:
    """Mass and Gaussian velocity distribution of one body.

    dv is the 1/e^(1/2) width of the velocity amplitude distribution
    exp[-(v - v0)^2 / (2 dv^2)]; dv = 0 denotes a single-wavevector
    (harmonic) substate.
    """

    mass: float
    v0: float
    dv: float = 0.0

    def __post_init__(self):
        if self.mass <= 0.0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.dv < 0.0:
            raise ValueError(f"dv must be non-negative, got {self.dv}")


@dataclass(frozen=True)
class PartitionMap:
    """Lab <-> (cm, rel) transform constants for one (v, V) component.

    K_cm = k + K and K_rel = (M k - m K) / (m + M) with k = m v / hbar and
    K = M V / hbar.  E_cm + E_rel equals the lab-frame kinetic energy.
    """

    m: float
    M: float
    v: float
    V: float
    hbar: float
    M_tot: float = field(init=False)
    mu: float = field(init=False)
    k: float = field(init=False)
    K: float = field(init=False)
    K_cm: float = field(init=False)
    K_rel: float = field(init=False)
    E_cm: float = field(init=False)
    E_rel: float = field(init=False)

    def __post_init__(self):
        if self.m <= 0.0 or self.M <= 0.0:
            raise ValueError("masses must be positive")
        object.__setattr__(self, "M_tot", self.m + self.M)
        object.__setattr__(self, "mu", self.m * self.M / self.M_tot)
        object.__setattr__(self, "k", self.m * self.v / self.hbar)
        object.__setattr__(self, "K", self.M * self.V / self.hbar)
        object.__setattr__(self, "K_cm", self.k + self.K)
        object.__setattr__(self, "K_rel", (self.M * self.k - self.m * self.K) / self.M_tot)
        object.__setattr__(self, "E_cm", (self.hbar * self.K_cm) ** 2 / (2.0 * self.M_tot))
        object.__setattr__(self, "E_rel", (self.hbar * self.K_rel) ** 2 / (2.0 * self.mu))

    @staticmethod
    def from_bodies(particle: BodySpec, reflector: BodySpec, units: UnitSystem,
                    v: float | None = None, V: float | None = None) -> "PartitionMap":
        return PartitionMap(
            m=particle.mass, M=reflector.mass,
            v=particle.v0 if v is None else v,
            V=reflector.v0 if V is None else V,
            hbar=units.hbar,
        )

    def invert(self) -> tuple[float, float]:
        """Recover the lab wavevectors (k, K) from (K_cm, K_rel)."""
        k = self.K_rel + (self.m / self.M_tot) * self.K_cm
        K = (self.M / self.M_tot) * self.K_cm - self.K_rel
        return k, K

    def x_cm(self, x1, x2):
        return (self.m * np.asarray(x1) + self.M * np.asarray(x2)) / self.M_tot

    @staticmethod
    def x_rel(x1, x2):
        return np.asarray(x1) - np.asarray(x2)

    def lab_kinetic_energy(self) -> float:
        return (self.hbar * self.k) ** 2 / (2.0 * self.m) + (self.hbar * self.K) ** 2 / (2.0 * self.M)


# ---------------------------------------------------------------------------
# Grid snapshot
# ---------------------------------------------------------------------------


def trapezoid_2d(values: np.ndarray, x1_axis: np.ndarray, x2_axis: np.ndarray) -> float:
    """2-D trapezoid integral of values[i, j] over (x2_axis[i], x1_axis[j])."""
    return float(np.trapezoid(np.trapezoid(values, x1_axis, axis=1), x2_axis))


@dataclass(frozen=True)
class GridSnapshot:
    """Joint PDF sampled on a rectangular (x2, x1) grid at one time.

    pdf[i, j] is the (unnormalized) joint density at (x2_axis[i], x1_axis[j]);
    norm records its 2-D trapezoid integral so consumers can renormalize.
    """

    t: float
    x1_axis: np.ndarray
    x2_axis: np.ndarray
    pdf: np.ndarray
    norm: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, axis in (("x1_axis", self.x1_axis), ("x2_axis", self.x2_axis)):
            axis = np.asarray(axis, dtype=float)
            if axis.ndim != 1 or axis.size < 2:
                raise ValueError(f"{name} must be a 1-D axis with >= 2 points")
            steps = np.diff(axis)
            if not np.all(steps > 0):
                raise ValueError(f"{name} must be strictly increasing")
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
                raise ValueError(f"{name} must be uniformly spaced")
            object.__setattr__(self, name, axis)
        pdf = np.asarray(self.pdf, dtype=float)
        if pdf.shape != (self.x2_axis.size, self.x1_axis.size):
            raise ValueError(
                f"pdf shape {pdf.shape} != (len(x2_axis), len(x1_axis)) ="
                f" ({self.x2_axis.size}, {self.x1_axis.size})")
        if np.any(pdf < 0.0):
            raise ValueError("pdf entries must be non-negative")
        object.__setattr__(self, "pdf", pdf)

    @staticmethod
    def from_pdf(t: float, x1_axis: np.ndarray, x2_axis: np.ndarray,
                 pdf: np.ndarray, meta: dict | None = None) -> "GridSnapshot":
        norm = trapezoid_2d(pdf, np.asarray(x1_axis, float), np.asarray(x2_axis, float))
        return GridSnapshot(t=t, x1_axis=x1_axis, x2_axis=x2_axis, pdf=pdf,
                            norm=norm, meta=meta or {})


# ---------------------------------------------------------------------------
# Spectrum samples and quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumSample:
    """One (v, V) node of a wavegroup sum.

    weight is the product Gaussian exp[-(v-v0)^2/(2 dv^2)] *
    exp[-(V-V0)^2/(2 dV^2)] at the node (a zero-spread axis contributes 1);
    the constant 1/sqrt(dv dV) prefactors of the defining sums are dropped
    because the PDFs are kept unnormalized.  phase is 0 for a phased state.
    """

    v: float
    V: float
    weight: float
    phase: float = 0.0

    def __post_init__(self):
        if self.weight < 0.0:
            raise ValueError("weight must be non-negative")
        if not (0.0 <= self.phase < 2.0 * math.pi):
            raise ValueError("phase must lie in [0, 2*pi)")


def _axis_nodes(v0: float, dv: float, n_nodes: int, span_sigmas: float) -> tuple[np.ndarray, np.ndarray]:
    """Node values and their offsets from v0 (offsets exactly antisymmetric)."""
    if dv == 0.0 or n_nodes == 1:
        return np.array([v0], dtype=float), np.array([0.0])
    center = (n_nodes - 1) / 2.0
    offsets = (np.arange(n_nodes) - center) / center * (span_sigmas * dv)
    return v0 + offsets, offsets


def make_quadrature(spec_p: BodySpec, spec_r: BodySpec, n_nodes: int = 64,
                    span_sigmas: float = 4.0, dephase_seed: int | None = None,
                    dephase_target: str = "both") -> list[SpectrumSample]:
    """Tensor grid of (v, V) nodes with Gaussian weights.

    Nodes cover [v0 +/- span_sigmas*dv] x [V0 +/- span_sigmas*dV] with
    n_nodes per non-degenerate axis; a zero-spread axis collapses to its
    central value.  With dephase_seed set, each node's phase is an
    independent uniform draw from PhaseGenerator (dephase_target "both",
    the default); targets "reflector" / "particle" restrict the random
    phases to depend on V only / v only.
    """
    if n_nodes < 1:
        raise ValueError("n_nodes must be >= 1")
    if span_sigmas <= 0.0:
        raise ValueError("span_sigmas must be positive")
    if dephase_target not in ("reflector", "particle", "both"):
        raise ValueError(f"unknown dephase_target: {dephase_target!r}")

    v_nodes, v_off = _axis_nodes(spec_p.v0, spec_p.dv, n_nodes, span_sigmas)
    V_nodes, V_off = _axis_nodes(spec_r.v0, spec_r.dv, n_nodes, span_sigmas)

    def gauss(offsets: np.ndarray, dx: float) -> np.ndarray:
        if dx == 0.0:
            return np.ones_like(offsets)
        return np.exp(-(offsets ** 2) / (2.0 * dx * dx))

    w_v = gauss(v_off, spec_p.dv)
    w_V = gauss(V_off, spec_r.dv)

    if dephase_seed is None:
        ph_v = np.zeros(v_nodes.size)
        ph_V = np.zeros(V_nodes.size)
        ph_node = None
    else:
        gen = PhaseGenerator(dephase_seed)
        ph_v = gen.phases(v_nodes.size) if dephase_target == "particle" else np.zeros(v_nodes.size)
        ph_V = gen.phases(V_nodes.size) if dephase_target == "reflector" else np.zeros(V_nodes.size)
        ph_node = gen.phases(v_nodes.size * V_nodes.size) if dephase_target == "both" else None

    samples = []
    idx = 0
    for i, V in enumerate(V_nodes):
        for j, v in enumerate(v_nodes):
            phase = ph_node[idx] if ph_node is not None else math.fmod(ph_v[j] + ph_V[i], 2.0 * math.pi)
            samples.append(SpectrumSample(v=float(v), V=float(V),
                                          weight=float(w_v[j] * w_V[i]), phase=float(phase)))
            idx += 1
    return samples


def spectrum_arrays(spectrum: list[SpectrumSample]) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Unpack a spectrum into (v, V, weight, phase) arrays."""
    v = np.array([s.v for s in spectrum], dtype=float)
    V = np.array([s.V for s in spectrum], dtype=float)
    w = np.array([s.weight for s in spectrum], dtype=float)
    ph = np.array([s.phase for s in spectrum], dtype=float)
    return v, V, w, ph
