"""Entanglement asymmetry of uniform matrix product states.

Library + CLI computing Renyi entanglement asymmetries of translation
invariant MPS for finite symmetry groups (exact group sums) and compact
Lie groups (Haar quadrature / Monte Carlo), through the spectra of charged
transfer operators, with a brute-force exact-diagonalization oracle for
validation.
"""

from .errors import (
    AsymmetryKitError,
    BadParam,
    CapExceeded,
    ClosureViolation,
    ConfigError,
    CriticalRegime,
    DecompositionFailed,
    DegenerateLeading,
    FitIllConditioned,
    MCVarianceTooLarge,
    NoConvergence,
    NonAbelian,
    NonClustering,
    NonConvergence,
    NonUnitary,
    OrderExceeded,
    ProductNotIdentity,
    StructureViolation,
    TermCapExceeded,
    ZeroTensor,
)
from .groups import (
    FiniteGroupRep,
    LieGroupRep,
    QuadratureSpec,
    SubgroupInfo,
    abelian_irrep_projectors,
    blocked_lie_rep,
    blocked_representation,
    detect_invariant_subalgebra,
    detect_invariant_subgroup,
    generate_group,
    group_from_json,
    group_to_json,
    haar_nodes_u1,
    haar_sample_su2,
    quotient_global_phases,
    rotation_about_y,
    spin_flip_z2,
    spin_matrices,
    su2_rep,
    u1_z_rep,
    y_rotation_group,
    y_rotation_z4_blocked,
    y_rotation_z4_physical,
)
from .linalg import EigenPair, eig_leading, matrix_power
from .moments import (
    AsymmetryReport,
    ChargedMomentResult,
    FitResult,
    HessianReport,
    ReplicaPermutation,
    asymmetry_finite_group,
    asymmetry_lie_group,
    charged_moment,
    fit_exponential_to_constant,
    fit_log_slope,
    free_energy_density,
    hessian_at_subgroup,
    permutation_matrix,
    renyi_entropy,
    subleading_correction_fit,
)
from .mps import (
    ClusteringReport,
    MpsTensor,
    TransferOperator,
    block_sites,
    build_charged_transfer,
    build_transfer_operator,
    clustering_check,
    fixed_point_projector,
    normalize,
    numerical_radius,
    spectral_radius,
    tensor_from_json,
    tensor_to_json,
)
from .states import GroundStateResult, XxzSpec, catalog, xxz_ground_state

__version__ = "0.1.0"
