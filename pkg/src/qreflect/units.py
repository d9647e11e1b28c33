"""Unit systems and physical constants.

Two modes are supported:

* SI        -- hbar, h, k_B carry their exact SI (CODATA 2018) values and all
               quantities are in kg, m, s, J, K.
* scaled    -- hbar = 1 and the particle mass is the mass unit; every other
               quantity is a ratio.  Used for the dimensionless figure
               regimes (mass ratios, velocity-spread ratios).

The constants are definitions, not tunables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Exact SI values (2019 redefinition; hbar derived from h).
H_SI = 6.62607015e-34        # Planck constant, J s
HBAR_SI = 1.054571817e-34    # reduced Planck constant, J s
K_B_SI = 1.380649e-23        # Boltzmann constant, J / K

# CODATA 2018 neutron mass, kg.  Used by the SI presets.
NEUTRON_MASS_SI = 1.67492749804e-27


@dataclass(frozen=True)
class UnitSystem:
    """Constants for one unit mode; immutable and thread-safe."""

    mode: str    # "si" or "dimensionless"
    hbar: float
    h: float
    k_B: float

    @staticmethod
    def si() -> "UnitSystem":
        return UnitSystem(mode="si", hbar=HBAR_SI, h=H_SI, k_B=K_B_SI)

    @staticmethod
    def dimensionless() -> "UnitSystem":
        # hbar = 1 fixes h = 2*pi; k_B = 1 makes temperature an energy.
        return UnitSystem(mode="dimensionless", hbar=1.0, h=2.0 * math.pi, k_B=1.0)


def unit_system(mode: str) -> UnitSystem:
    """Resolve a mode string ("si" / "dimensionless") to a UnitSystem."""
    key = mode.strip().lower()
    if key == "si":
        return UnitSystem.si()
    if key in ("dimensionless", "scaled"):
        return UnitSystem.dimensionless()
    raise ValueError(f"unknown unit mode: {mode!r} (expected 'si' or 'dimensionless')")
