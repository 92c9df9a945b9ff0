"""LCQBO problems, penalty reduction to QUBO/Ising, and the brute-force oracle."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

SENSES = ("min", "max")

# structural inequality kinds
CHAIN_MONOTONE = "chain"          # vars[k] <= vars[k+1]
AT_MOST_ONE = "at_most_one"       # sum(vars) <= 1
SUM_LEQ_LAST = "sum_leq_last"     # sum(vars[:-1]) <= vars[-1]
SUM_EQ_LAST = "sum_eq_last"       # sum(vars[:-1]) == vars[-1]
VAR_LEQ_VAR = "var_leq_var"       # vars[0] <= vars[1]
STRUCTURAL_KINDS = (CHAIN_MONOTONE, AT_MOST_ONE, SUM_LEQ_LAST, SUM_EQ_LAST, VAR_LEQ_VAR)

BRUTE_FORCE_CAP = 24


class PenaltyUnsupportedError(ValueError):
    """Raised for structural kinds that have no penalty form."""


@dataclass(frozen=True)
class LinearConstraint:
    """Integer linear equality sum(coeffs[v] * v) == rhs."""

    coeffs: dict
    rhs: int

    def __post_init__(self):
        if not any(c != 0 for c in self.coeffs.values()):
            raise ValueError("equality constraint needs a nonzero coefficient")

    def residual(self, assignment) -> int:
        return sum(c * assignment[v] for v, c in self.coeffs.items()) - self.rhs


@dataclass(frozen=True)
class StructuralConstraint:
    kind: str
    vars: tuple

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if self.kind not in STRUCTURAL_KINDS:
            raise ValueError(f"unknown structural kind {self.kind!r}")
        if len(set(self.vars)) != len(self.vars):
            raise ValueError("structural constraint has repeated variables")
        if self.kind == VAR_LEQ_VAR:
            if len(self.vars) != 2:
                raise ValueError("var_leq_var takes exactly 2 variables")
        elif len(self.vars) < 2:
            raise ValueError(f"{self.kind} needs at least 2 variables")

    def satisfied(self, assignment) -> bool:
        vals = [assignment[v] for v in self.vars]
        if self.kind == CHAIN_MONOTONE:
            return all(a <= b for a, b in zip(vals, vals[1:]))
        if self.kind == AT_MOST_ONE:
            return sum(vals) <= 1
        if self.kind == SUM_LEQ_LAST:
            return sum(vals[:-1]) <= vals[-1]
        if self.kind == SUM_EQ_LAST:
            return sum(vals[:-1]) == vals[-1]
        return vals[0] <= vals[1]  # VAR_LEQ_VAR


@dataclass
class LcqboProblem:
    """Binary quadratic objective with linear equalities and tagged inequalities.

    `quadratic` maps unordered variable pairs (canonical key: tuple sorted by
    declaration order) to coefficients; self-pairs are folded into `linear`
    since x*x == x on binaries.
    """

    variables: list
    sense: str = "min"
    linear: dict = field(default_factory=dict)
    quadratic: dict = field(default_factory=dict)
    constant: float = 0.0
    equalities: list = field(default_factory=list)
    structural: list = field(default_factory=list)
    penalty_weight: float = 100.0

    def __post_init__(self):
        if self.sense not in SENSES:
            raise ValueError(f"sense must be one of {SENSES}")
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("variable names must be unique")
        self._index = {v: i for i, v in enumerate(self.variables)}
        for v in self.linear:
            self._require(v)
        canon = {}
        for (a, b), coeff in self.quadratic.items():
            self._require(a)
            self._require(b)
            if a == b:
                self.linear[a] = self.linear.get(a, 0.0) + coeff
                continue
            key = tuple(sorted((a, b), key=self._index.get))
            canon[key] = canon.get(key, 0.0) + coeff
        self.quadratic = canon
        for eq in self.equalities:
            for v in eq.coeffs:
                self._require(v)
        for sc in self.structural:
            for v in sc.vars:
                self._require(v)

    def _require(self, v):
        if v not in self._index:
            raise ValueError(f"constraint references undeclared variable {v!r}")

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    def var_index(self, name) -> int:
        return self._index[name]

    def assignment(self, bits) -> dict:
        if len(bits) != self.num_vars:
            raise ValueError(f"expected {self.num_vars} bits, got {len(bits)}")
        return {v: int(b) for v, b in zip(self.variables, bits)}

    def objective(self, bits) -> float:
        a = self.assignment(bits)
        val = self.constant
        val += sum(c * a[v] for v, c in self.linear.items())
        val += sum(c * a[u] * a[v] for (u, v), c in self.quadratic.items())
        return val


@dataclass
class EvalResult:
    objective: float
    feasible: bool
    violations: list


def evaluate(problem: LcqboProblem, bits) -> EvalResult:
    """Raw objective (problem's own sense) plus full feasibility check."""
    a = problem.assignment(bits)
    violations = []
    for k, eq in enumerate(problem.equalities):
        r = eq.residual(a)
        if r != 0:
            violations.append(f"equality {k}: residual {r}")
    for k, sc in enumerate(problem.structural):
        if not sc.satisfied(a):
            violations.append(f"structural {k} ({sc.kind} over {list(sc.vars)})")
    return EvalResult(problem.objective(bits), not violations, violations)


@dataclass
class QuboModel:
    """Penalized minimization QUBO: constant + linear.x + sum quadratic[i,j] x_i x_j."""

    num_vars: int
    linear: np.ndarray
    quadratic: dict
    constant: float = 0.0
    lam: float = 100.0

    def __post_init__(self):
        self.linear = np.asarray(self.linear, dtype=float)
        if self.linear.shape != (self.num_vars,):
            raise ValueError("linear vector has wrong length")
        for i, j in self.quadratic:
            if not (0 <= i < j < self.num_vars):
                raise ValueError(f"bad quadratic key ({i},{j})")

    def value(self, bits) -> float:
        x = np.asarray(bits, dtype=float)
        if x.shape != (self.num_vars,):
            raise ValueError(f"expected {self.num_vars} bits")
        val = self.constant + float(self.linear @ x)
        for (i, j), c in self.quadratic.items():
            val += c * x[i] * x[j]
        return val

    def value_table(self) -> np.ndarray:
        """Vector of QUBO values over all 2**n bitstrings (basis-index order)."""
        n = self.num_vars
        if n > BRUTE_FORCE_CAP:
            raise ValueError(f"too many variables for enumeration: {n}")
        idx = np.arange(2**n, dtype=np.int64)
        vals = np.full(2**n, self.constant, dtype=float)
        bit = [((idx >> i) & 1).astype(float) for i in range(n)]
        for i in range(n):
            if self.linear[i] != 0.0:
                vals += self.linear[i] * bit[i]
        for (i, j), c in self.quadratic.items():
            vals += c * bit[i] * bit[j]
        return vals


@dataclass
class IsingModel:
    """Diagonal Pauli-Z form: offset + sum h_i Z_i + sum J_ij Z_i Z_j, Z_i = 1 - 2 x_i."""

    h: np.ndarray
    J: dict
    offset: float = 0.0

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=float)

    @property
    def num_vars(self) -> int:
        return len(self.h)

    def value(self, bits) -> float:
        z = 1.0 - 2.0 * np.asarray(bits, dtype=float)
        val = self.offset + float(self.h @ z)
        for (i, j), c in self.J.items():
            val += c * z[i] * z[j]
        return val


def penalize(problem: LcqboProblem, lam: float, which: str = "all") -> QuboModel:
    """Reduce to a minimization QUBO with quadratic penalties.

    Equalities contribute lam * (sum a_i x_i - b)^2.  With which="all",
    var_leq_var contributes lam * (x - x y), chains expand to adjacent
    var_leq_var pairs, and at_most_one contributes lam * sum_{i<j} x_i x_j.
    sum_leq_last / sum_eq_last have no penalty form and are rejected.
    Maximization objectives are negated first.
    """
    if lam <= 0:
        raise ValueError("penalty weight must be positive")
    if which not in ("all", "equalities_only"):
        raise ValueError(f"unknown penalty scope {which!r}")
    n = problem.num_vars
    sign = -1.0 if problem.sense == "max" else 1.0
    linear = np.zeros(n)
    quad = {}
    constant = sign * problem.constant

    def add_quad(i, j, c):
        if i == j:
            linear[i] += c
            return
        key = (i, j) if i < j else (j, i)
        quad[key] = quad.get(key, 0.0) + c

    for v, c in problem.linear.items():
        linear[problem.var_index(v)] += sign * c
    for (u, v), c in problem.quadratic.items():
        add_quad(problem.var_index(u), problem.var_index(v), sign * c)

    for eq in problem.equalities:
        terms = [(problem.var_index(v), c) for v, c in eq.coeffs.items() if c != 0]
        constant += lam * eq.rhs**2
        for i, a in terms:
            linear[i] += lam * (a * a - 2 * a * eq.rhs)
        for k, (i, a) in enumerate(terms):
            for j, b in terms[k + 1 :]:
                add_quad(i, j, 2 * lam * a * b)

    if which == "all":
        for sc in problem.structural:
            idx = [problem.var_index(v) for v in sc.vars]
            if sc.kind == VAR_LEQ_VAR:
                _penalize_leq_pair(linear, add_quad, idx[0], idx[1], lam)
            elif sc.kind == CHAIN_MONOTONE:
                for a, b in zip(idx, idx[1:]):
                    _penalize_leq_pair(linear, add_quad, a, b, lam)
            elif sc.kind == AT_MOST_ONE:
                for k, i in enumerate(idx):
                    for j in idx[k + 1 :]:
                        add_quad(i, j, lam)
            else:
                raise PenaltyUnsupportedError(
                    f"no penalty form for {sc.kind}; it is only representable "
                    "by a tailored variational form"
                )
    return QuboModel(n, linear, quad, constant, lam)


def _penalize_leq_pair(linear, add_quad, i, j, lam):
    # x <= y penalized as lam * (x - x y)
    linear[i] += lam
    add_quad(i, j, -lam)


def to_ising(q: QuboModel) -> IsingModel:
    """Substitute x_i = (1 - Z_i) / 2 into the QUBO."""
    n = q.num_vars
    h = np.zeros(n)
    J = {}
    offset = q.constant
    for i in range(n):
        h[i] -= q.linear[i] / 2.0
        offset += q.linear[i] / 2.0
    for (i, j), c in q.quadratic.items():
        J[(i, j)] = J.get((i, j), 0.0) + c / 4.0
        h[i] -= c / 4.0
        h[j] -= c / 4.0
        offset += c / 4.0
    return IsingModel(h, J, offset)


@dataclass
class BruteForceResult:
    best_bits: tuple
    best_value: float
    values: np.ndarray            # basis-index order, problem's own sense
    feasible: np.ndarray | None   # None for bare QUBO models


def brute_force(target) -> BruteForceResult:
    """Exhaustive enumeration oracle; ties break toward the lowest basis index.

    For a QuboModel, minimizes over all bitstrings.  For an LcqboProblem,
    optimizes the raw objective in the problem's own sense over the feasible
    set (every constraint checked directly).
    """
    if isinstance(target, QuboModel):
        vals = target.value_table()
        best = int(np.argmin(vals))
        n = target.num_vars
        return BruteForceResult(
            tuple((best >> i) & 1 for i in range(n)), float(vals[best]), vals, None
        )
    if not isinstance(target, LcqboProblem):
        raise TypeError("expected QuboModel or LcqboProblem")
    n = target.num_vars
    if n > BRUTE_FORCE_CAP:
        raise ValueError(f"too many variables for enumeration: {n}")
    vals = np.empty(2**n)
    feas = np.empty(2**n, dtype=bool)
    for idx in range(2**n):
        bits = tuple((idx >> i) & 1 for i in range(n))
        res = evaluate(target, bits)
        vals[idx] = res.objective
        feas[idx] = res.feasible
    if not feas.any():
        raise ValueError("problem has no feasible point")
    masked = np.where(feas, vals, np.inf if target.sense == "min" else -np.inf)
    best = int(np.argmin(masked) if target.sense == "min" else np.argmax(masked))
    return BruteForceResult(
        tuple((best >> i) & 1 for i in range(n)), float(vals[best]), vals, feas
    )


def build_flp(n: int, m: int, f, c) -> LcqboProblem:
    """Facility location: n facilities with opening costs f, m clients with
    service costs c[i][j]; each client served by exactly one facility and
    only by open facilities."""
    if n < 1 or m < 1:
        raise ValueError("need at least one facility and one client")
    f = np.asarray(f, dtype=float)
    c = np.asarray(c, dtype=float)
    if f.shape != (n,) or c.shape != (n, m):
        raise ValueError(f"cost shapes must be ({n},) and ({n},{m})")
    xs = [[f"x{i + 1}_{j + 1}" for j in range(m)] for i in range(n)]
    ys = [f"y{i + 1}" for i in range(n)]
    variables = [x for row in xs for x in row] + ys
    linear = {ys[i]: float(f[i]) for i in range(n)}
    for i in range(n):
        for j in range(m):
            linear[xs[i][j]] = float(c[i, j])
    equalities = [
        LinearConstraint({xs[i][j]: 1 for i in range(n)}, 1) for j in range(m)
    ]
    structural = [
        StructuralConstraint(VAR_LEQ_VAR, (xs[i][j], ys[i]))
        for i in range(n)
        for j in range(m)
    ]
    return LcqboProblem(variables, "min", linear, {}, 0.0, equalities, structural)


def build_lap(n1: int, n2: int, c) -> LcqboProblem:
    """Assignment of n1 jobs to n2 workers (n2 >= n1) at cost c[i][j]:
    every job done by exactly one worker, every worker takes at most one job,
    total cost minimized."""
    if not n2 >= n1 >= 1:
        raise ValueError("need n2 >= n1 >= 1")
    c = np.asarray(c, dtype=float)
    if c.shape != (n1, n2):
        raise ValueError(f"cost shape must be ({n1},{n2})")
    xs = [[f"x{i + 1}_{j + 1}" for j in range(n2)] for i in range(n1)]
    variables = [x for row in xs for x in row]
    linear = {xs[i][j]: float(c[i, j]) for i in range(n1) for j in range(n2)}
    equalities = [
        LinearConstraint({xs[i][j]: 1 for j in range(n2)}, 1) for i in range(n1)
    ]
    structural = [
        StructuralConstraint(AT_MOST_ONE, tuple(xs[i][j] for i in range(n1)))
        for j in range(n2)
    ] if n1 > 1 else []  # a single job can never double-book a worker
    return LcqboProblem(variables, "min", linear, {}, 0.0, equalities, structural)


# --- JSON problem format ---

_TOP_FIELDS = {"variables", "sense", "objective", "equalities", "structural", "lambda"}
_OBJ_FIELDS = {"linear", "quadratic", "constant"}
_SENSE_ALIASES = {"min": "min", "minimize": "min", "max": "max", "maximize": "max"}


def problem_from_dict(data: dict) -> LcqboProblem:
    unknown = set(data) - _TOP_FIELDS
    if unknown:
        raise ValueError(f"unknown problem fields: {sorted(unknown)}")
    if "variables" not in data:
        raise ValueError("missing field 'variables'")
    sense = _SENSE_ALIASES.get(data.get("sense", "min"))
    if sense is None:
        raise ValueError(f"bad sense {data.get('sense')!r}")
    obj = data.get("objective", {})
    unknown = set(obj) - _OBJ_FIELDS
    if unknown:
        raise ValueError(f"unknown objective fields: {sorted(unknown)}")
    quadratic = {}
    for entry in obj.get("quadratic", []):
        if len(entry) != 3:
            raise ValueError(f"quadratic entries are [var, var, coeff]: {entry}")
        u, v, coeff = entry
        quadratic[(u, v)] = quadratic.get((u, v), 0.0) + float(coeff)
    equalities = []
    for eq in data.get("equalities", []):
        unknown = set(eq) - {"coeffs", "rhs"}
        if unknown:
            raise ValueError(f"unknown equality fields: {sorted(unknown)}")
        equalities.append(
            LinearConstraint({v: int(c) for v, c in eq["coeffs"].items()}, int(eq["rhs"]))
        )
    structural = []
    for sc in data.get("structural", []):
        unknown = set(sc) - {"kind", "vars"}
        if unknown:
            raise ValueError(f"unknown structural fields: {sorted(unknown)}")
        structural.append(StructuralConstraint(sc["kind"], tuple(sc["vars"])))
    return LcqboProblem(
        variables=list(data["variables"]),
        sense=sense,
        linear={v: float(c) for v, c in obj.get("linear", {}).items()},
        quadratic=quadratic,
        constant=float(obj.get("constant", 0.0)),
        equalities=equalities,
        structural=structural,
        penalty_weight=float(data.get("lambda", 100.0)),
    )


def problem_to_dict(problem: LcqboProblem) -> dict:
    return {
        "variables": list(problem.variables),
        "sense": problem.sense,
        "objective": {
            "linear": {v: c for v, c in problem.linear.items()},
            "quadratic": [[u, v, c] for (u, v), c in problem.quadratic.items()],
            "constant": problem.constant,
        },
        "equalities": [
            {"coeffs": dict(eq.coeffs), "rhs": eq.rhs} for eq in problem.equalities
        ],
        "structural": [
            {"kind": sc.kind, "vars": list(sc.vars)} for sc in problem.structural
        ],
        "lambda": problem.penalty_weight,
    }


def load_problem(path) -> LcqboProblem:
    with open(path, encoding="utf-8") as fh:
        return problem_from_dict(json.load(fh))


def save_problem(problem: LcqboProblem, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(problem_to_dict(problem), fh, indent=2)
        fh.write("\n")
