"""Block-matrix transversals: decide, solve and certify nonsingular
submatrices with prescribed per-block row and column counts."""

__version__ = "0.1.0"

from .exact_linalg import (  # noqa: E402
    ExactMatrix,
    FieldSpec,
    Scalar,
    determinant,
    is_nonsingular,
    make_field,
    rank,
    submatrix,
    transpose,
)
from .matroid_core import (  # noqa: E402
    AxiomReport,
    GroundSet,
    RankOracle,
    is_independent,
    kung_oracle,
    kung_rank,
    linking_rank,
    rado_hall_feasible,
    verify_bimatroid_axioms,
    verify_matroid_axioms,
    verify_rank_exchange,
)
from .block_theorem import (  # noqa: E402
    BlockInstance,
    Certificate,
    Selection,
    brute_force_solve,
    check_conditions,
    extract_witness,
    rado_hall_on_kung,
    random_instance,
    recheck_certificate,
    transpose_instance,
    verify_selection,
)
