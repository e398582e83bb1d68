"""2D transport tomography: forward solves, partial-data ray transforms,
normal-operator diagnostics, and visibility analysis on concentric disks."""

from .geometry import (
    CutoffSpec,
    DiskGeometry,
    Grid,
    Ray,
    VisibilityMask,
    boundary_weight,
    chord,
    convex_hull_mask,
    cutoff_eval,
    cutoff_extended,
    invisible_mask,
    microvisible,
    visible_mask,
)
from .coefficients import (
    AbsorptionField,
    AngularField,
    AngularMode,
    ScatteringKernel,
    TrigPoly,
    attenuation_E,
    attenuation_Sigma,
    kernel_eval,
    mode_norms,
    sobolev_raster_norm,
)
from .phantoms import (
    ConstantPhantom,
    DiskPhantom,
    GaussianPhantom,
    MultiPhantom,
    rasterize,
)
from .transport import (
    BoundaryData,
    BoundaryGrid,
    NonConvergenceError,
    PhaseSpaceField,
    SolveReport,
    TransportSolver,
    apply_J,
    apply_K,
    apply_T1_inverse,
    measure_XV,
    solve_forward,
    trace_plus,
)
from .tomography import (
    EdgeReport,
    OperatorMatrix,
    SymbolField,
    WavefrontImage,
    adjoint_ray_transform,
    assemble_xv_matrix,
    edge_strengths,
    normal_operator_full,
    normal_operator_kernel,
    point_source_pairing,
    principal_symbol,
    ray_transform,
    smoothing_diagnostic,
    svd_injectivity,
    symbol_field,
    wavefront_image,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
