"""Closed-form interference-loss and decoherence estimators.

One-body fringe-loss thresholds, Heisenberg-microscope probe velocities for
path information, the exponential-decay ratio t_D / t_R = (lambda_T / dx)^2
of environmental decoherence, and the reflection-vs-thermal wavevector
ratio.  Pure arithmetic on SI (or scaled) inputs; the thermal relaxation
time t_R is always a user input because no general formula exists for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .units import UnitSystem
from .wavegroups import thermal_coherence, thermal_spread


@dataclass(frozen=True)
class DecoherenceInput:
    """Inputs for the decoherence ratio of a superposition split by delta_x.

    lambda_T defaults to the thermal de Broglie wavelength h / sqrt(2 M k_B T)
    when not supplied.  t_R (thermal relaxation time) must be supplied by the
    caller; it varies too much with environment and material to estimate.
    """

    M: float
    T: float
    delta_x: float
    t_R: float
    lambda_T: float | None = None

    def resolved_lambda_T(self, units: UnitSystem) -> float:
        lam = self.lambda_T if self.lambda_T is not None else thermal_coherence(self.M, self.T, units)
        if lam <= 0.0 or self.delta_x <= 0.0:
            raise ValueError("lambda_T and delta_x must be positive")
        return lam


def particle_fringe_loss_length(M: float, T: float, m: float, units: UnitSystem) -> float:
    """Particle coherence length above which mirror-overlap fringes vanish.

    h sqrt(M) / (2 m sqrt(2 k_B T)): beyond this, the thermal mirror's
    recoil displacement exceeds its own coherence length within the overlap
    and the incident/reflected two-body states become distinguishable.
    """
    if min(M, T, m) <= 0.0:
        raise ValueError("M, T, m must be positive")
    return units.h * math.sqrt(M) / (2.0 * m * math.sqrt(2.0 * units.k_B * T))


def slab_no_interference_temperature(m: float, M: float, d: float, units: UnitSystem) -> float:
    """Temperature above which particle-only slab interference vanishes.

    T > h^2 M / (8 D^2 k_B m^2), the same expression as the slab module's
    overlap bound with the inequality flipped (d is the slab thickness).
    """
    if min(m, M, d) <= 0.0:
        raise ValueError("m, M, d must be positive")
    return units.h ** 2 * M / (8.0 * d ** 2 * units.k_B * m ** 2)


def slab_no_interference_mass(m: float, T: float, d: float, units: UnitSystem) -> float:
    """Largest slab mass showing no particle-only interference at temperature T."""
    return 8.0 * d ** 2 * units.k_B * m ** 2 * T / units.h ** 2


def mirror_path_separation(l_c_particle: float, m: float, M: float) -> float:
    """Mean mirror displacement difference 2 l_c m / M between the two paths."""
    return 2.0 * l_c_particle * m / M


def slab_path_separation(m: float, M: float, d: float) -> float:
    """Slab displacement difference 2 m D / M between the two surface paths."""
    return 2.0 * m * d / M


def probe_velocity_mirror(M: float, m: float, m_star: float, l_c_particle: float,
                          units: UnitSystem) -> float:
    """Probe speed resolving the mirror path separation: h M / (4 l_c m m*)."""
    if min(M, m, m_star, l_c_particle) <= 0.0:
        raise ValueError("all inputs must be positive")
    return units.h * M / (4.0 * l_c_particle * m * m_star)


def probe_velocity_slab(M: float, m: float, m_star: float, d: float,
                        units: UnitSystem) -> float:
    """Probe speed resolving the slab path separation: h M / (4 D m m*)."""
    if min(M, m, m_star, d) <= 0.0:
        raise ValueError("all inputs must be positive")
    return units.h * M / (4.0 * d * m * m_star)


def zurek_ratio(inp: DecoherenceInput, units: UnitSystem) -> float:
    """Decoherence suppression t_D / t_R = (lambda_T / delta_x)^2."""
    return (inp.resolved_lambda_T(units) / inp.delta_x) ** 2


def zurek_time(inp: DecoherenceInput, units: UnitSystem) -> float:
    """Decoherence time t_D = t_R (lambda_T / delta_x)^2."""
    if inp.t_R <= 0.0:
        raise ValueError("t_R must be positive")
    return inp.t_R * zurek_ratio(inp, units)


def zurek_ratio_slab(m: float, M: float, d: float, T: float, units: UnitSystem) -> float:
    """Slab-recoil case: with delta_x = 2 m D / M the ratio is M h^2/(8 k_B T D^2 m^2)."""
    inp = DecoherenceInput(M=M, T=T, delta_x=slab_path_separation(m, M, d), t_R=1.0)
    return zurek_ratio(inp, units)


def zurek_ratio_mirror(m: float, M: float, l_c_particle: float, T: float,
                       units: UnitSystem) -> float:
    """Mirror case: delta_x = 2 l_c m / M gives M h^2 / (8 k_B T (l_c m)^2)."""
    inp = DecoherenceInput(M=M, T=T, delta_x=mirror_path_separation(l_c_particle, m, M), t_R=1.0)
    return zurek_ratio(inp, units)


def reflection_vs_thermal_ratio(m: float, v: float, M: float, T: float,
                                units: UnitSystem) -> float:
    """Reflection-to-thermal wavevector-change ratio R ~ m v / sqrt(M k_B T)."""
    if min(m, M, T) <= 0.0:
        raise ValueError("m, M, T must be positive")
    return m * abs(v) / math.sqrt(M * units.k_B * T)
