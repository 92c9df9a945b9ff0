"""Constraint-preserving variational forms for VQE on linearly constrained
quadratic binary optimization problems."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    LcqboProblem,
    LinearConstraint,
    StructuralConstraint,
    QuboModel,
    IsingModel,
    brute_force,
    build_flp,
    build_lap,
    evaluate,
    load_problem,
    penalize,
    save_problem,
    to_ising,
)
from .ansatz import (  # noqa: F401
    GateStats,
    gate_stats,
    qaoa,
    tvf_at_most_one,
    tvf_chain,
    tvf_flp,
    tvf_lap,
    tvf_sum_eq_last,
    tvf_sum_leq_last,
    two_local,
    verify_feasibility,
)
from .statevector import (  # noqa: F401
    AngleExpr,
    Gate,
    ParamCircuit,
    StateVector,
    probabilities,
    run,
    sample,
)
from .vqe import AnsatzSpec, VqeConfig, VqeResult, expectation, minimize, run_vqe  # noqa: F401
