"""Plane-wave Galerkin solver for Bloch varieties of 3D photonic crystals.

Computes band structures either by fixing the wave vector and solving for
omega^2, or by fixing omega and solving a linearized quadratic eigenvalue
problem for the wave vector along a chosen direction.
"""

__version__ = "0.1.0"

from .eigensolvers import (
    AdmissibilityReport,
    EtaEigenpair,
    check_admissibility,
    solve_quadratic_eta,
    solve_standard,
)
from .forms import build_linearized_system
from .lattice import PlaneWaveSet, WaveVectorSplit, build_index_set
from .materials import (
    FccCoatedSpheres,
    Homogeneous,
    LorentzParams,
    RodScaffold,
    inv_epsilon_fourier,
    coated_fcc,
    scaffold_rods,
)

__all__ = [
    "AdmissibilityReport",
    "EtaEigenpair",
    "FccCoatedSpheres",
    "Homogeneous",
    "LorentzParams",
    "PlaneWaveSet",
    "RodScaffold",
    "WaveVectorSplit",
    "build_index_set",
    "build_linearized_system",
    "check_admissibility",
    "inv_epsilon_fourier",
    "coated_fcc",
    "scaffold_rods",
    "solve_quadratic_eta",
    "solve_standard",
]
