"""Hybrid optimization loop: expectation estimation, derivative-free search,
iteration tracing, and result extraction."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from . import ansatz as anz
from . import model as mdl
from .statevector import ParamCircuit, display, display_to_index, probabilities, run, sample

EXPECTATION_MODES = ("sampled", "exact")
OPTIMIZERS = ("cobyla", "nelder-mead")


class ConstraintNotRepresentableError(ValueError):
    """A structural constraint cannot be covered by the chosen ansatz."""


@dataclass
class AnsatzSpec:
    """Which variational form to run.

    kind "tvf" builds per-constraint tailored blocks from the problem's own
    structural constraints; "two_local" takes `depth`; "qaoa" takes `p` and
    a penalty scope for the target Hamiltonian.
    """

    kind: str = "tvf"
    depth: int = 1
    p: int = 2
    penalties: str = "all"  # scope used when the form cannot carry constraints

    def __post_init__(self):
        if self.kind not in ("tvf", "two_local", "qaoa"):
            raise ValueError(f"unknown ansatz kind {self.kind!r}")
        if self.depth < 1 or self.p < 1:
            raise ValueError("depth and p must be >= 1")


@dataclass
class VqeConfig:
    shots: int = 1024
    seed: int = 0
    max_iters: int = 200
    expectation_mode: str = "sampled"
    optimizer: str = "cobyla"
    tol: float = 1e-3
    rhobeg: float = 1.5  # initial COBYLA trust-region radius, in radians
    theta0: np.ndarray | None = None  # explicit init; None draws uniform [-pi, pi]
    restarts: int = 5
    lam: float | None = None  # None falls back to the problem's penalty weight

    def __post_init__(self):
        if self.expectation_mode not in EXPECTATION_MODES:
            raise ValueError(f"expectation_mode must be one of {EXPECTATION_MODES}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}")
        if self.expectation_mode == "sampled" and self.shots < 1:
            raise ValueError("shots must be >= 1 in sampled mode")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iters < 0 or self.restarts < 1:
            raise ValueError("max_iters must be >= 0 and restarts >= 1")


@dataclass
class VqeResult:
    theta_star: np.ndarray
    energy_star: float
    trace: list                  # (evaluation index, expected energy)
    histogram: dict              # display bitstring -> count at theta_star
    best_bits: tuple
    best_objective: float        # raw objective in the problem's own sense
    best_feasible: bool
    feasible_fraction: float
    num_evaluations: int
    seed: int

    @property
    def best_display(self) -> str:
        return "".join(str(b) for b in self.best_bits)


def expectation(circuit, theta, qubo, mode="exact", shots=1024, seed=0,
                value_table=None) -> float:
    """Expected QUBO value of the circuit output at theta.

    The Hamiltonian is diagonal, so the exact expectation is
    sum_z p(z) * qubo(z); sampled mode averages qubo over `shots` draws.
    """
    if qubo.num_vars != circuit.num_qubits:
        raise ValueError("QUBO variable count must equal circuit qubit count")
    if value_table is None:
        value_table = qubo.value_table()
    state = run(circuit.bind(theta))
    probs = probabilities(state)
    if mode == "exact":
        return float(probs @ value_table)
    if mode != "sampled":
        raise ValueError(f"unknown expectation mode {mode!r}")
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs / probs.sum())
    return float((counts @ value_table) / shots)


@dataclass
class MinimizeOutcome:
    theta_star: np.ndarray
    value_star: float
    trace: list


def minimize(objective, dim: int, config: VqeConfig, theta0=None,
             budget=None) -> MinimizeOutcome:
    """Derivative-free local search with a strict evaluation budget.

    Deterministic for a fixed init; every objective evaluation is traced,
    and the returned point is the best one actually evaluated.
    """
    if dim < 1:
        raise ValueError("need at least one parameter")
    if theta0 is None:
        theta0 = np.zeros(dim)
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.shape != (dim,):
        raise ValueError(f"theta0 must have length {dim}")
    if budget is None:
        budget = config.max_iters

    trace = []
    best = {"theta": theta0.copy(), "value": np.inf}

    class _BudgetExhausted(Exception):
        pass

    def wrapped(theta):
        if len(trace) >= budget:
            raise _BudgetExhausted
        value = float(objective(theta))
        if not np.isfinite(value):
            raise ValueError(
                f"objective returned non-finite value {value} at theta={theta}"
            )
        trace.append((len(trace), value))
        if value < best["value"]:
            best["value"] = value
            best["theta"] = np.array(theta, dtype=float)
        return value

    method = "COBYLA" if config.optimizer == "cobyla" else "Nelder-Mead"
    options = {"maxiter": budget, "rhobeg": config.rhobeg}
    if method == "Nelder-Mead":
        options = {"maxfev": budget}
    try:
        if budget > 0:
            _scipy_minimize(wrapped, theta0, method=method, tol=config.tol,
                            options=options)
    except _BudgetExhausted:
        pass
    if not trace:  # zero budget: evaluate the init once so the trace is non-empty
        value = float(objective(theta0))
        trace.append((0, value))
        best["value"], best["theta"] = value, theta0.copy()
    return MinimizeOutcome(best["theta"], best["value"], trace)


def build_ansatz(problem: mdl.LcqboProblem, spec: AnsatzSpec, lam: float):
    """Build the circuit for a problem and report which structural
    constraints it carries; the remaining ones must be penalizable.

    Returns (circuit, covered_structural, penalty_scope).
    """
    if spec.kind == "two_local":
        return two_local_for(problem, spec.depth), [], "all"
    if spec.kind == "qaoa":
        scope = spec.penalties
        ising = mdl.to_ising(mdl.penalize(problem, lam, scope))
        return anz.qaoa(ising, spec.p), [], scope
    return _build_tvf(problem, spec), list(problem.structural), "equalities_only"


def two_local_for(problem, depth):
    return anz.two_local(problem.num_vars, depth)


def _build_tvf(problem: mdl.LcqboProblem, spec: AnsatzSpec) -> ParamCircuit:
    """Compose per-constraint tailored blocks over disjoint variable groups.

    Every variable may appear in at most one structural constraint, except
    that a variable may dominate several var_leq_var pairs (the facility
    pattern).  Variables outside any constraint get a free rotation.
    """
    n = problem.num_vars
    owner = {}  # var index -> constraint id, for the constrained side
    dominators = set()
    for k, sc in enumerate(problem.structural):
        idx = [problem.var_index(v) for v in sc.vars]
        if sc.kind == mdl.VAR_LEQ_VAR:
            bound, dom = idx
            if bound in owner or bound in dominators or dom in owner:
                raise ConstraintNotRepresentableError(
                    f"variables of {sc.vars!r} appear in multiple structural "
                    "constraints; no tailored form covers that overlap"
                )
            owner[bound] = k
            dominators.add(dom)
        else:
            for i, v in zip(idx, sc.vars):
                if i in owner or i in dominators:
                    raise ConstraintNotRepresentableError(
                        f"variable {v!r} appears in multiple structural "
                        "constraints; no tailored form covers that overlap"
                    )
                owner[i] = k

    c = ParamCircuit(n, n)
    done_doms = set()
    used_params = set()
    for k, sc in enumerate(problem.structural):
        idx = [problem.var_index(v) for v in sc.vars]
        if sc.kind == mdl.VAR_LEQ_VAR:
            bound, dom = idx
            if dom not in done_doms:
                if dom not in owner:  # free dominator gets its own rotation
                    c.ry(dom, param=dom)
                    used_params.add(dom)
                done_doms.add(dom)
            anz._leq_pair_block(c, bound, dom, bound)
            used_params.add(bound)
        elif sc.kind == mdl.CHAIN_MONOTONE:
            anz._chain_block(c, idx, idx)
            used_params.update(idx)
        elif sc.kind == mdl.AT_MOST_ONE:
            anz._at_most_one_block(c, idx, idx)
            used_params.update(idx)
        elif sc.kind == mdl.SUM_LEQ_LAST:
            anz._at_most_one_block(c, idx, idx)
            for i in idx[:-1]:
                c.cx(i, idx[-1])
            used_params.update(idx)
        else:  # SUM_EQ_LAST: the bound variable carries no parameter
            head = idx[:-1]
            if len(head) == 1:
                c.ry(head[0], param=head[0])
            else:
                anz._at_most_one_block(c, head, head)
            for i in head:
                c.cx(i, idx[-1])
            used_params.update(head)
    for i in range(n):
        if i not in owner and i not in dominators:
            c.ry(i, param=i)
            used_params.add(i)
    return _compact_params(c, used_params, n)


def _compact_params(c: ParamCircuit, used, n):
    """Renumber parameter slots so unused ones (e.g. sum_eq_last bound
    variables) do not inflate the search dimension."""
    if len(used) == n:
        return c
    remap = {old: new for new, old in enumerate(sorted(used))}
    out = ParamCircuit(c.num_qubits, len(used))
    for g in c.gates:
        if g.angle is not None and g.angle.param_index is not None:
            expr = replace(g.angle, param_index=remap[g.angle.param_index])
            out.gates.append(replace(g, angle=expr))
        else:
            out.gates.append(g)
    return out


def run_vqe(problem: mdl.LcqboProblem, spec: AnsatzSpec, config: VqeConfig) -> VqeResult:
    """Full hybrid loop: optimize the expectation, then sample at theta*.

    best_bits is the feasible sampled bitstring with the best raw objective
    (problem's own sense), falling back to the best penalized value when
    nothing sampled is feasible.
    """
    lam = config.lam if config.lam is not None else problem.penalty_weight
    circuit, covered, scope = build_ansatz(problem, spec, lam)
    if circuit.num_qubits != problem.num_vars:
        raise ValueError("ansatz qubit count must equal the variable count")
    qubo = mdl.penalize(problem, lam, scope)
    table = qubo.value_table()

    eval_counter = {"k": 0}

    def objective_at(theta):
        k = eval_counter["k"]
        eval_counter["k"] += 1
        if config.expectation_mode == "exact":
            return expectation(circuit, theta, qubo, "exact", value_table=table)
        return expectation(
            circuit, theta, qubo, "sampled", shots=config.shots,
            seed=[config.seed, 1, k], value_table=table,
        )

    # max_iters is a total evaluation budget shared by the restarts: each
    # restart runs to its own convergence and the next one spends whatever
    # budget remains.
    init_rng = np.random.default_rng([config.seed, 0])
    best_outcome = None
    trace = []
    for r in range(config.restarts):
        if config.theta0 is not None:
            theta0 = np.asarray(config.theta0, dtype=float)
        else:
            theta0 = init_rng.uniform(-np.pi, np.pi, circuit.num_params)
        outcome = minimize(objective_at, circuit.num_params, config, theta0,
                           budget=config.max_iters - len(trace))
        offset = len(trace)
        trace.extend((offset + i, v) for i, v in outcome.trace)
        if best_outcome is None or outcome.value_star < best_outcome.value_star:
            best_outcome = outcome
        if config.theta0 is not None:
            break  # explicit init: restarts would repeat the same path
        if len(trace) >= config.max_iters:
            break

    theta_star = best_outcome.theta_star
    state = run(circuit.bind(theta_star))
    histogram = sample(state, config.shots, [config.seed, 2])

    best_bits = None
    best_obj = None
    best_feasible = False
    feasible_shots = 0
    fallback_bits, fallback_pen = None, np.inf
    better = (lambda a, b: a < b) if problem.sense == "min" else (lambda a, b: a > b)
    for bitstring, count in sorted(histogram.items(), key=lambda kv: display_to_index(kv[0])):
        bits = tuple(int(b) for b in bitstring)
        res = mdl.evaluate(problem, bits)
        if res.feasible:
            feasible_shots += count
            if best_bits is None or better(res.objective, best_obj):
                best_bits, best_obj = bits, res.objective
        else:
            pen = qubo.value(bits)
            if pen < fallback_pen:
                fallback_bits, fallback_pen = bits, pen
    if best_bits is None:
        best_bits = fallback_bits
        best_obj = mdl.evaluate(problem, best_bits).objective
        best_feasible = False
    else:
        best_feasible = True

    return VqeResult(
        theta_star=theta_star,
        energy_star=best_outcome.value_star,
        trace=trace,
        histogram=histogram,
        best_bits=best_bits,
        best_objective=float(best_obj),
        best_feasible=best_feasible,
        feasible_fraction=feasible_shots / config.shots,
        num_evaluations=len(trace),
        seed=config.seed,
    )
