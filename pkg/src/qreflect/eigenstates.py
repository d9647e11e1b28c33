"""Exact two-body energy eigenstates in lab coordinates.

Covers the delta-function mirror, the finite barrier / finite well, and the
infinite well, together with the lab-frame momentum and energy parsing of
each plane-wave branch.  Every function is pure and vectorized over the
coordinate arguments.

Conventions
-----------
* The particle (mass m, coordinate x1) approaches the reflector (mass M,
  coordinate x2) from the left, so reflection requires v > V and the mirror
  eigenstate is supported on x1 <= x2 (x_rel = x1 - x2 <= 0).
* Barrier and well occupy x_rel in [-D, +D]: D is the HALF width.  The slab
  module uses thickness instead; conversions are explicit at the API level.
* The evanescent barrier wavevector uses the principal square root, so
  Im(K_barrier) >= 0 and the interior wave decays away from each wall.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PartitionMap

_DEGENERATE_RTOL = 1e-14


@dataclass(frozen=True)
class MirrorEigenstate:
    """Perfect-mirror (infinite delta strength) two-body eigenstate."""

    partition: PartitionMap
    beta_infinite: bool = True


@dataclass(frozen=True)
class FringeSpacing:
    """Exact and large-M approximate joint-fringe half periods."""

    exact: float     # pi (m + M) / |m K - M k|
    approx: float    # pi hbar / (m |v - V|)


@dataclass(frozen=True)
class ScatteringCoefficients:
    """Plane-wave amplitudes from barrier/well boundary matching (A = 1)."""

    A: complex
    B: complex
    F: complex
    G: complex
    H: complex
    K_before: complex
    K_barrier: complex
    K_after: complex


@dataclass(frozen=True)
class BranchKinematics:
    """Lab momenta and kinetic energies of one plane-wave branch."""

    p1: float
    p2: float
    ke1: float
    ke2: float


# ---------------------------------------------------------------------------
# Delta mirror
# ---------------------------------------------------------------------------


def mirror_psi(partition: PartitionMap, x1, x2, t):
    """Mirror eigenstate psi_cm * (e^{i phi_in} - e^{i phi_ref}) on x1 <= x2.

    The branch difference is evaluated as 2i sin(K_rel x_rel) times the
    common phase, which is the same function but stays accurate at the
    fringe nodes.  Outside the support (x1 > x2) the state vanishes.
    """
    p = partition
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    x_rel = x1 - x2
    x_cm = p.x_cm(x1, x2)
    energy_phase = (p.E_cm + p.E_rel) * t / p.hbar
    common = np.exp(1j * (p.K_cm * x_cm - energy_phase))
    psi = 2j * np.sin(p.K_rel * x_rel) * common
    return np.where(x_rel <= 0.0, psi, 0.0 + 0.0j)


def mirror_pdf_identity(partition: PartitionMap, x1, x2):
    """Closed-form |psi|^2 = 4 sin^2[(m K - M k)(x1 - x2)/(m + M)] on the support."""
    p = partition
    arg = (p.m * p.K - p.M * p.k) * (np.asarray(x1) - np.asarray(x2)) / p.M_tot
    return 4.0 * np.sin(arg) ** 2


def mirror_fringe_spacing(partition: PartitionMap) -> FringeSpacing:
    """Joint-fringe max-to-min distance, exact and in the m/M << 1 limit."""
    p = partition
    if p.K_rel == 0.0:
        raise ValueError("no relative motion: m K - M k = 0, nothing reflects")
    exact = np.pi * p.M_tot / abs(p.m * p.K - p.M * p.k)
    approx = np.pi * p.hbar / (p.m * abs(p.v - p.V))
    return FringeSpacing(exact=float(exact), approx=float(approx))


# ---------------------------------------------------------------------------
# Finite barrier / finite well
# ---------------------------------------------------------------------------


def barrier_wavevectors(partition: PartitionMap, pe: float) -> tuple[float, complex]:
    """(K_before, K_barrier) for relative energy E_rel against step PE."""
    p = partition
    if p.E_rel <= 0.0:
        raise ValueError("E_rel must be positive (co-moving bodies do not scatter)")
    k1 = np.sqrt(2.0 * p.mu * p.E_rel) / p.hbar
    k2 = np.sqrt(np.complex128(2.0 * p.mu * (p.E_rel - pe))) / p.hbar
    return float(k1), complex(k2)


def solve_barrier_coefficients(partition: PartitionMap, pe: float, d: float) -> ScatteringCoefficients:
    """Match value and x_rel derivative at x_rel = +/- D, with A = 1.

    Analytic elimination of the 4x4 system (the generic linear solve is kept
    as a test oracle).  Raises on E_rel = PE (zero interior wavevector) and
    on a numerically degenerate matching denominator.
    """
    if d <= 0.0:
        raise ValueError("half width D must be positive")
    k1, k2 = barrier_wavevectors(partition, pe)
    if partition.E_rel == pe or abs(k2) < _DEGENERATE_RTOL * k1:
        raise ValueError("zero barrier wavevector: E_rel equals PE")

    ratio = k1 / k2
    s = np.sin(2.0 * k2 * d)
    c = np.cos(2.0 * k2 * d)
    denom = 2.0 * c - 1j * (ratio + 1.0 / ratio) * s
    if abs(denom) < _DEGENERATE_RTOL * max(1.0, abs(ratio) + abs(1.0 / ratio)):
        raise ValueError("degenerate matching: boundary system is singular")

    h = 2.0 * np.exp(-2j * k1 * d) / denom
    b = 0.5j * (1.0 / ratio - ratio) * s * h
    f = 0.5 * h * (1.0 + ratio) * np.exp(1j * (k1 - k2) * d)
    g = 0.5 * h * (1.0 - ratio) * np.exp(1j * (k1 + k2) * d)
    return ScatteringCoefficients(A=1.0 + 0.0j, B=complex(b), F=complex(f), G=complex(g),
                                  H=complex(h), K_before=complex(k1), K_barrier=complex(k2),
                                  K_after=complex(k1))


def solve_barrier_coefficients_generic(partition: PartitionMap, pe: float, d: float) -> ScatteringCoefficients:
    """Same matching via a generic 4x4 linear solve (cross-check oracle)."""
    k1, k2 = barrier_wavevectors(partition, pe)
    e_m = np.exp(-1j * k1 * d)
    e_p = np.exp(1j * k1 * d)
    f_m = np.exp(-1j * k2 * d)
    f_p = np.exp(1j * k2 * d)
    # Unknowns (B, F, G, H); continuity of value and derivative at -D, +D.
    mat = np.array([
        [e_p, -f_m, -f_p, 0.0],
        [-k1 * e_p, -k2 * f_m, k2 * f_p, 0.0],
        [0.0, f_p, f_m, -e_p],
        [0.0, k2 * f_p, -k2 * f_m, -k1 * e_p],
    ], dtype=complex)
    rhs = np.array([-e_m, -k1 * e_m, 0.0, 0.0], dtype=complex)
    b, f, g, h = np.linalg.solve(mat, rhs)
    return ScatteringCoefficients(A=1.0 + 0.0j, B=b, F=f, G=g, H=h,
                                  K_before=complex(k1), K_barrier=complex(k2), K_after=complex(k1))


def barrier_psi(coeffs: ScatteringCoefficients, partition: PartitionMap, pe: float,
                d: float, x1, x2, t):
    """Piecewise lab-frame barrier/well eigenstate.

    The region is selected by x_rel against +/- D.  The temporal factor is
    exp(-i (E_cm + E_rel) t / hbar) in all three regions; inside the barrier
    this same total phase parses into KE1 + KE2 + PE of the interior
    branches, and the common exp(i PE t / hbar) bookkeeping factor is never
    materialized because it cannot affect |Psi|^2.  Interior exponentials
    are anchored at the nearest wall so evanescent components only decay.
    """
    p = partition
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    x_rel = x1 - x2
    x_cm = p.x_cm(x1, x2)
    common = np.exp(1j * (p.K_cm * x_cm - (p.E_cm + p.E_rel) * t / p.hbar))

    k1 = coeffs.K_before
    k2 = coeffs.K_barrier
    f_anch = coeffs.F * np.exp(-1j * k2 * d)   # wave anchored at x_rel = -D
    g_anch = coeffs.G * np.exp(-1j * k2 * d)   # wave anchored at x_rel = +D

    before = coeffs.A * np.exp(1j * k1 * x_rel) + coeffs.B * np.exp(-1j * k1 * x_rel)
    inside = f_anch * np.exp(1j * k2 * (x_rel + d)) + g_anch * np.exp(-1j * k2 * (x_rel - d))
    after = coeffs.H * np.exp(1j * k1 * x_rel)

    rel = np.where(x_rel < -d, before, np.where(x_rel > d, after, inside))
    return rel * common


def barrier_branch_kinematics(coeffs: ScatteringCoefficients, partition: PartitionMap,
                              pe: float, direction: str) -> BranchKinematics:
    """Lab-frame parsing of an interior (propagating) barrier branch.

    direction "right" is the F branch (+K_barrier), "left" the G branch.
    KE1 + KE2 + PE reproduces the conserved total energy.
    """
    p = partition
    k2 = coeffs.K_barrier
    if abs(k2.imag) > 1e-12 * max(1.0, abs(k2.real)):
        raise ValueError("interior branch is evanescent; no real momentum parsing")
    sign = {"right": 1.0, "left": -1.0}[direction]
    p1 = p.hbar * ((p.m / p.M_tot) * p.K_cm + sign * k2.real)
    p2 = p.hbar * ((p.M / p.M_tot) * p.K_cm - sign * k2.real)
    return BranchKinematics(p1=float(p1), p2=float(p2),
                            ke1=float(p1 ** 2 / (2.0 * p.m)),
                            ke2=float(p2 ** 2 / (2.0 * p.M)))


# ---------------------------------------------------------------------------
# Infinite well
# ---------------------------------------------------------------------------


def well_quantized_velocity(V: float, n: int, m: float, M: float, d: float, hbar: float) -> float:
    """Allowed particle velocity v = V + n pi hbar (m + M) / (2 D m M)."""
    if n < 1:
        raise ValueError("mode number n must be >= 1")
    return V + n * np.pi * hbar * (m + M) / (2.0 * d * m * M)


def well_psi(partition: PartitionMap, n: int, d: float, x1, x2, t):
    """Infinite-well eigenstate psi_cm e^{-i E_rel t/hbar} sin[n pi (x_rel+D)/(2D)].

    Vanishes outside x_rel in (-D, D).  The partition must satisfy the
    quantization K_rel = n pi / (2 D) (build it via well_quantized_velocity).
    """
    if n < 1:
        raise ValueError("mode number n must be >= 1")
    p = partition
    k_rel_expected = n * np.pi / (2.0 * d)
    if not np.isclose(p.K_rel, k_rel_expected, rtol=1e-8, atol=0.0):
        raise ValueError(
            f"partition K_rel {p.K_rel} violates quantization n pi/(2D) = {k_rel_expected}")
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    x_rel = x1 - x2
    x_cm = p.x_cm(x1, x2)
    common = np.exp(1j * (p.K_cm * x_cm - (p.E_cm + p.E_rel) * t / p.hbar))
    rel = np.sin(n * np.pi * (x_rel + d) / (2.0 * d))
    return np.where(np.abs(x_rel) < d, rel * common, 0.0 + 0.0j)


# ---------------------------------------------------------------------------
# Branch kinematics (mirror)
# ---------------------------------------------------------------------------


def branch_kinematics(partition: PartitionMap, branch: str) -> BranchKinematics:
    """Lab momenta/energies of the incident or reflected mirror branch.

    The reflected values are hbar d(phi_ref)/dx_i, i.e. the classical
    elastic-collision momenta.
    """
    p = partition
    if branch == "incident":
        p1 = p.hbar * p.k
        p2 = p.hbar * p.K
    elif branch == "reflected":
        p1 = p.m * ((p.m - p.M) * p.v + 2.0 * p.M * p.V) / p.M_tot
        p2 = p.M * ((p.M - p.m) * p.V + 2.0 * p.m * p.v) / p.M_tot
    else:
        raise ValueError(f"unknown branch: {branch!r}")
    return BranchKinematics(p1=float(p1), p2=float(p2),
                            ke1=float(p1 ** 2 / (2.0 * p.m)),
                            ke2=float(p2 ** 2 / (2.0 * p.M)))
