"""Certified rewriting calculus for leveled splittings of (3-manifold, graph) pairs."""

from .model import (
    BoundaryLevel,
    Complex,
    CompressionBody,
    SchemaError,
    Surface,
    Tangle,
    ThickLevel,
    ThinLevel,
    ValidationError,
    ValidationReport,
    Violation,
    body_index,
    build_complex,
    emit_complex,
    empty_body_index,
    euler_char,
    parse_complex,
    thick_digraph,
    validate,
)
from .complexity import (
    EQ,
    GT,
    LT,
    compare,
    complexity,
    complexity_table,
    index_down,
    index_up,
    reach_down,
    reach_up,
    reverse_orientation,
    total_index,
)
from .moves import (
    Consolidate,
    Destabilize,
    DiscData,
    MoveRejected,
    Move,
    SplitData,
    UndoRemovable,
    Unperturb,
    Untelescope,
    apply_move,
    boundary_reduce,
    compress_surface,
    elementary_thinning_sequence,
    emit_move,
    is_reduced,
    parse_move,
)

__version__ = "0.1.0"
