"""omaxcones: minimal/maximal operator-system cones over matrix algebras.

Block-positivity (minimal cone) and separability (maximal cone) membership
with machine-checkable certificates, the trace-pairing duality between the
two, order/minimal/decomposition norms, entanglement-breaking classification
of maps between matrix algebras, and Archimedeanization of finitely
presented ordered spaces.
"""

from .matcore import (
    BlockElement,
    NoConvergence,
    NotHermitian,
    Spectrum,
    eig_hermitian,
    hermitian_tensor_decompose,
    is_psd,
    kron,
    partial_transpose,
    swap_factors,
)
from .cones import (
    ConeVerdict,
    MemberStatus,
    ProductWitness,
    SearchBudget,
    SeparableDecomposition,
    decompose_separable,
    max_cone_test,
    min_cone_test,
    sample_dmax,
)
from .duality import (
    FunctionalMatrix,
    MatrixMap,
    choi,
    dual_cone_check,
    flat_adjoint,
    gamma,
    gamma_inv,
    map_from_choi,
    pair,
    qi_adjoint,
)
from .norms import NormReport, dec_norm, min_norm, order_norm
from .ebclass import (
    EBStatus,
    EBVerdict,
    classify,
    co_eb_check,
    cp_omin_falsify,
    holevo_from_kraus,
    holevo_from_separable,
    kraus_from_holevo,
)
from .arch import ArchResult, GeneratedCone, arch_closure_test, archimedeanize, compute_N, compute_states

__version__ = "0.1.0"

__all__ = [
    "BlockElement",
    "NotHermitian",
    "NoConvergence",
    "Spectrum",
    "eig_hermitian",
    "is_psd",
    "kron",
    "partial_transpose",
    "swap_factors",
    "hermitian_tensor_decompose",
    "SearchBudget",
    "MemberStatus",
    "ConeVerdict",
    "ProductWitness",
    "SeparableDecomposition",
    "min_cone_test",
    "max_cone_test",
    "decompose_separable",
    "sample_dmax",
    "FunctionalMatrix",
    "MatrixMap",
    "gamma",
    "gamma_inv",
    "pair",
    "choi",
    "map_from_choi",
    "flat_adjoint",
    "qi_adjoint",
    "dual_cone_check",
    "NormReport",
    "order_norm",
    "min_norm",
    "dec_norm",
    "EBStatus",
    "EBVerdict",
    "classify",
    "holevo_from_separable",
    "kraus_from_holevo",
    "holevo_from_kraus",
    "cp_omin_falsify",
    "co_eb_check",
    "GeneratedCone",
    "ArchResult",
    "compute_states",
    "compute_N",
    "arch_closure_test",
    "archimedeanize",
]
