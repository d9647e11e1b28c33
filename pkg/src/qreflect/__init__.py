"""Two-body quantum reflection toolkit.

Closed-form two-body eigenstates (mirror, slab, finite barrier/well,
infinite well), Gaussian wavegroup synthesis, joint/marginal probability
densities, interference observables, conservation audits, decoherence
estimators, and a split-step spectral oracle.
"""

from .core import (BodySpec, GridSnapshot, PartitionMap, PhaseGenerator,
                   SpectrumSample, make_quadrature)
from .units import UnitSystem, unit_system

__version__ = "0.1.0"

__all__ = [
    "BodySpec", "GridSnapshot", "PartitionMap", "PhaseGenerator",
    "SpectrumSample", "make_quadrature", "UnitSystem", "unit_system",
    "__version__",
]
