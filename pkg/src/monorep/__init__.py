"""Representative functions of monotone operators on grids.

Discrete conjugation, Fitzpatrick functions, verification and extraction of
the operator a representative encodes, and resolvents certified by a
residual gap.
"""

from .duality import EUCLIDEAN, DualityMap, dual_norm, jmap, jstar, norm, pairing_defect
from .errors import (
    DimensionError,
    GridFormatError,
    InfeasibleStartError,
    MonorepError,
    MonotonicityError,
    NonMonotoneExtractionError,
    ProperError,
    SpecError,
    UnsupportedError,
)
from .grid import (
    GridFn,
    GridSpec,
    biconjugate,
    brute_force_conjugate,
    conjugate_1d,
    conjugate_nd,
    read_gridfn,
    write_gridfn,
)
from .maxaffine import MaxAffineFn, conjugate_max_affine, eval_max_affine
from .operators import (
    AnalyticOperator,
    OperatorGraph,
    ProbeReport,
    analytic_resolvent,
    maximality_probe,
    monotonicity_check,
    sample_graph,
)
from .representations import (
    AffineIndicator,
    AffinePhi,
    BoxPhi,
    FenchelYoungQuadratic,
    FitzpatrickRep,
    GridRep,
    MixRep,
    Representative,
    closed_form_indicator,
    closed_form_phi,
    fenchel_young,
    fitzpatrick_eval,
    fitzpatrick_linear_closed_form,
    identity_indicator,
    identity_phi,
    j_transform,
    load_representative,
    membership_check,
    minimality_check,
)
from .simplex import solve_lp
from .witness import (
    ResolventCertificate,
    extract_operator,
    phi_objective,
    residuals,
    solve_resolvent,
    verify_representative,
)

__version__ = "0.1.0"
