"""Numerical verification of Bergman kernel bounds and the canonical vs
hyperbolic metric comparison on hyperbolic Riemann surfaces and their
Cartesian powers."""

from .bounds import (
    BoundReport,
    TailBoundParams,
    assemble_bound_chain,
    bx_closed_form,
    jl_tail_bound,
    looser_orbit_bound,
    pointwise_orbit_bound,
)
from .fuchsian import (
    CountProfile,
    FuchsianGroup,
    OrbitBall,
    SurfaceGeometry,
    bolza_group,
    builtin_group,
    count_profile,
    cyclic_test_group,
    enumerate_ball,
    gamma0_group,
    group_from_json,
    injectivity_radius,
    restrict_ball,
    systole,
)
from .hplane import (
    HPoint,
    MobiusTransform,
    compose,
    cosh_distance,
    hyp_distance,
    identity,
    inverse,
    mobius_apply,
    translation,
)
from .lmfdb_ingest import NewformRecord, fetch_level, validate_records
from .modforms import (
    CuspFormBasis,
    FundamentalCellDecomposition,
    QExpansion,
    bergman_kernel,
    build_basis,
    canonical_density_ratio,
    evaluate_form,
    orthonormalize,
    petersson_gram,
)
from .product import (
    KernelMatrix,
    ProductPoint,
    canonical_volume_ratio_det,
    canonical_volume_ratio_perm,
    kernel_matrix,
    product_bergman,
    product_hyp_density,
    volume_ratio_bound,
)

__version__ = "0.1.0"
