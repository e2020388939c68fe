"""Numerical certification of annulus contractions and their 2x2 block completions."""

__version__ = "0.1.0"

from .errors import (
    AnnulusCertError,
    ContractViolationError,
    DiagnosticError,
    DomainError,
    NumericalFailureError,
    SingularityError,
    TruncationError,
)
from .numerics import (
    MAX_DIM,
    Tolerances,
    DEFAULT_TOL,
    as_matrix,
    eigenvalues,
    hermitian_min_eig,
    int_power,
    inverse,
    operator_norm,
    pinv_apply,
    sqrt_psd,
)
from .pencil import (
    AnnulusParams,
    PencilPoint,
    TruncationPlan,
    DEFAULT_PLAN,
    gamma_coeff,
    gamma_derivative_matrix,
    gamma_matrix,
    gamma_scalar,
    gamma_scalar_batch,
    re_part,
)
from .rational import (
    RationalFunction,
    derivative,
    eval_matrix,
    poles_off_annulus,
    sup_on_annulus,
)
from .blocks import BlockSpec, assemble, fcalc_hat, fcalc_tx, solve_commutant_factor
from .factorization import (
    DefectPair,
    DiskBlockResult,
    FactorResult,
    block_psd_check,
    defects,
    disk_block_check,
    douglas_factor,
    halmos_unitary,
)
from .certifier import (
    Certificate,
    DEFAULT_GRID,
    PencilGrid,
    VnReport,
    certify_ar,
    check_thm_block1,
    check_thm_block2,
    spectrum_in_annulus,
    vn_sample,
)
from .misra import (
    KernelParams,
    MISRA_GRID,
    jordan_block,
    kernel_diag,
    misra_threshold,
    threshold_via_pencil,
)
from .generators import (
    random_commuting_pair,
    random_contraction,
    random_normal_annulus,
    random_psd,
)
