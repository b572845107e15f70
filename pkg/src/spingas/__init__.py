"""spingas: exact entanglement and decoherence dynamics of spin gases.

A spin gas is a collection of particles whose positions move by
classical rules (kinetic-theory collisions, lattice hopping) while each
particle carries a qubit.  Colliding pairs pick up commuting Ising
phases, so the many-body quantum state is fully described by the
symmetric matrix of accumulated pairwise phases and can be evolved and
analyzed exactly even for very large gases.
"""

from .graph import InteractionGraph, Partition, UnionFind, is_effective
from .states import (
    InvalidStateError,
    LocalizationResult,
    ReducedDensityMatrix,
    brute_force_reduced,
    brute_force_state,
    coherence_factor,
    localize_entanglement,
    partial_trace,
    reduced_density_matrix,
)
from .entanglement import (
    EntanglementReport,
    classical_correlation,
    concurrence,
    concurrence_of_assistance,
    entanglement_report,
    localizable_bounds,
    meyer_wallach,
    renyi_entropy,
    subset_entropy,
    von_neumann_entropy,
)

__version__ = "0.1.0"
