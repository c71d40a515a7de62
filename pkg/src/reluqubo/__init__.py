"""Two-body QUBO/Ising models embedding the hinge penalty -min(0, m)."""

from .algebra import (
    AffineExpr,
    BitVar,
    IsingModel,
    QuadraticExpr,
    QuboModel,
    QuboParseError,
    affine_add,
    affine_mul,
    energy,
    export_qubo,
    ising_from_qubo,
    parse_qubo,
    quad_scale_add,
    quadratic_to_model,
    qubo_from_ising,
)
from .encoding import BinaryExpansion, delta
from .formulation import (
    AbsPenaltySpec,
    BuiltModel,
    ConfigError,
    LinearModelSpec,
    ReluPenaltySpec,
    build_abs_qubo,
    build_cost_plus_relu,
    build_from_config,
    build_linear_model_expr,
    build_relu_penalty,
    default_intervals,
    make_bits,
    recommend_M,
    recommend_z_ranges,
)
from .oracle import (
    Grid1D,
    WolfeDualOptimum,
    legendre_conjugate_num,
    qloss_min_form,
    qloss_reference,
    relu_reference,
    wolfe_dual_analytic,
)
from .solvers import (
    AnnealConfig,
    BitCapExceeded,
    SolveResult,
    energy_delta,
    exhaustive_solve,
    fix_bits,
    simulated_anneal,
)

__version__ = "0.1.0"

__all__ = [
    "AffineExpr",
    "AbsPenaltySpec",
    "AnnealConfig",
    "BinaryExpansion",
    "BitCapExceeded",
    "BitVar",
    "BuiltModel",
    "ConfigError",
    "Grid1D",
    "IsingModel",
    "LinearModelSpec",
    "QuadraticExpr",
    "QuboModel",
    "QuboParseError",
    "ReluPenaltySpec",
    "SolveResult",
    "WolfeDualOptimum",
    "affine_add",
    "affine_mul",
    "build_abs_qubo",
    "build_cost_plus_relu",
    "build_from_config",
    "build_linear_model_expr",
    "build_relu_penalty",
    "default_intervals",
    "delta",
    "energy",
    "energy_delta",
    "exhaustive_solve",
    "export_qubo",
    "fix_bits",
    "ising_from_qubo",
    "legendre_conjugate_num",
    "make_bits",
    "parse_qubo",
    "qloss_min_form",
    "qloss_reference",
    "quad_scale_add",
    "quadratic_to_model",
    "qubo_from_ising",
    "recommend_M",
    "recommend_z_ranges",
    "relu_reference",
    "simulated_anneal",
    "wolfe_dual_analytic",
]
