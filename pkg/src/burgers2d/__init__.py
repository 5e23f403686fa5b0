"""Spectral Galerkin solver and verification suite for the hyperviscous
stationary Burgers system u . grad u + (-Delta)^m u = lam F on the 2D torus."""

from .continuation import (
    Branch,
    BranchPoint,
    NoBifurcationError,
    StepOptions,
    continue_branch,
    detect_pitchfork,
    emit_diagram,
    switch_branch,
)
from .fields import (
    EUCLIDEAN,
    SPLIT,
    GridParams,
    SineField,
    VectorField,
    apply_symmetry,
    block_assemble,
    block_split,
    load_vectorfield,
    make_force,
    nonlinear_term,
    norm,
    project,
    save_vectorfield,
    sp_symmetric,
)
from .linearize import LinearizationPair, scaling_table, solve_linearization
from .solver import (
    DivergenceError,
    RemainderPair,
    SolutionPair,
    apriori_monitor,
    assemble_solutions,
    fixed_point_iterate,
    jacobian,
    newton_refine,
    residual,
)
from .tridiag import (
    BoundSequences,
    TridiagonalBlock,
    bound_sequences,
    build_block,
    certify_bounds,
    inverse_columns,
    operator_norms,
    solve_block,
)

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "BranchPoint",
    "BoundSequences",
    "DivergenceError",
    "EUCLIDEAN",
    "GridParams",
    "LinearizationPair",
    "NoBifurcationError",
    "RemainderPair",
    "SPLIT",
    "SineField",
    "SolutionPair",
    "StepOptions",
    "TridiagonalBlock",
    "VectorField",
    "apply_symmetry",
    "apriori_monitor",
    "assemble_solutions",
    "block_assemble",
    "block_split",
    "bound_sequences",
    "build_block",
    "certify_bounds",
    "continue_branch",
    "detect_pitchfork",
    "emit_diagram",
    "fixed_point_iterate",
    "inverse_columns",
    "jacobian",
    "load_vectorfield",
    "make_force",
    "newton_refine",
    "nonlinear_term",
    "norm",
    "operator_norms",
    "project",
    "residual",
    "save_vectorfield",
    "scaling_table",
    "solve_block",
    "solve_linearization",
    "sp_symmetric",
    "switch_branch",
    "__version__",
]
