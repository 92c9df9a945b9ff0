"""Constraint-preserving variational forms, baselines, and gate accounting.

All builders are pure functions returning ParamCircuit; the all-zero
parameter vector always prepares |0...0> (design anchor for every tailored
form).  Tailored forms only ever emit bitstrings satisfying their
designated constraint, for any parameter values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import model as mdl
from .statevector import (
    ParamCircuit,
    StateVector,
    display,
    probabilities,
    run,
)

CNOT_WEIGHT = 10  # one cnot costs as much as ten single-qubit gates


@dataclass(frozen=True)
class GateStats:
    su2: int
    cnot: int
    params: int

    @property
    def cost(self) -> int:
        return CNOT_WEIGHT * self.cnot + self.su2


def gate_stats(circuit: ParamCircuit) -> GateStats:
    su2 = sum(1 for g in circuit.gates if g.kind in ("RY", "RX", "RZ", "H", "X"))
    cnot = sum(1 for g in circuit.gates if g.kind in ("CX", "CZ"))
    return GateStats(su2, cnot, circuit.num_params)


def _chain_block(c: ParamCircuit, qubits, params):
    """Suffix-ones ladder block: RY(t) on the first qubit, then
    RY(t/2)-CX-RY(t/2) down the chain."""
    c.ry(qubits[0], param=params[0])
    for k in range(1, len(qubits)):
        c.ry(qubits[k], param=params[k], mult=0.5)
        c.cx(qubits[k - 1], qubits[k])
        c.ry(qubits[k], param=params[k], mult=0.5)


def _at_most_one_block(c: ParamCircuit, qubits, params):
    """One-hot-or-zero block: ladder block plus a backward CX cascade."""
    _chain_block(c, qubits, params)
    for k in range(len(qubits) - 1, 0, -1):
        c.cx(qubits[k - 1], qubits[k])


def _leq_pair_block(c: ParamCircuit, x, y, param):
    """x <= y block: RY(t), H, CX(y->x), H, RY(-t) on x.

    The closing rotation is negated so the block is the identity on x
    when y is 0; with +t it would rotate x by 2t and leak x=1, y=0.
    """
    c.ry(x, param=param)
    c.h(x)
    c.cx(y, x)
    c.h(x)
    c.ry(x, param=param, mult=-1.0)


def tvf_chain(N: int) -> ParamCircuit:
    """Tailored form for x_1 <= x_2 <= ... <= x_N (suffix-ones ladder)."""
    if N < 1:
        raise ValueError("need N >= 1")
    c = ParamCircuit(N, N)
    _chain_block(c, list(range(N)), list(range(N)))
    return c


def tvf_at_most_one(N: int) -> ParamCircuit:
    """Tailored form for sum(x) <= 1 (one-hot-or-zero support)."""
    if N < 2:
        raise ValueError("need N >= 2")
    c = ParamCircuit(N, N)
    _at_most_one_block(c, list(range(N)), list(range(N)))
    return c


def tvf_sum_leq_last(N: int) -> ParamCircuit:
    """Tailored form for x_1 + ... + x_{N-1} <= x_N.

    Built as a one-hot-or-zero block over all N qubits followed by
    CX(q_i -> q_N) for i < N, so any set x_i drags x_N to 1 while x_N
    alone stays reachable.  Uses 2N-1 single-qubit gates and 3N-3 cnots
    (fewer than the 4N-6 reference count for N > 3).
    """
    if N < 2:
        raise ValueError("need N >= 2")
    c = ParamCircuit(N, N)
    _at_most_one_block(c, list(range(N)), list(range(N)))
    for i in range(N - 1):
        c.cx(i, N - 1)
    return c


def tvf_sum_eq_last(N: int) -> ParamCircuit:
    """Tailored form for x_1 + ... + x_{N-1} == x_N.

    One-hot-or-zero block on the first N-1 qubits; the last qubit becomes
    their OR (equal to the sum) via CX fan-in, so it carries no parameter.
    """
    if N < 2:
        raise ValueError("need N >= 2")
    c = ParamCircuit(N, N - 1)
    if N == 2:
        c.ry(0, param=0)
    else:
        _at_most_one_block(c, list(range(N - 1)), list(range(N - 1)))
    for i in range(N - 1):
        c.cx(i, N - 1)
    return c


def tvf_flp(n: int, m: int) -> ParamCircuit:
    """Facility-location form: x_{ij} <= y_i for all i, j.

    Qubits: x block (i-major) then y block, matching build_flp's variable
    order; parameter k drives the rotation of variable k (y_i free, each
    x_{ij} conditioned on its y_i through a CZ-sandwich pair block).
    """
    if n < 1 or m < 1:
        raise ValueError("need n, m >= 1")
    nq = n * m + n
    c = ParamCircuit(nq, nq)
    for i in range(n):
        y = n * m + i
        c.ry(y, param=y)
        for j in range(m):
            x = i * m + j
            _leq_pair_block(c, x, y, x)
    return c


def tvf_lap(n1: int, n2: int) -> ParamCircuit:
    """Assignment form: per worker column j, at most one of x_{1j}..x_{n1,j}.

    Qubits row-major (x_{ij} at (i-1)*n2 + j-1) matching build_lap; each
    column gets an independent one-hot-or-zero block with column-local
    parameters.
    """
    if not n2 >= n1 >= 1:
        raise ValueError("need n2 >= n1 >= 1")
    nq = n1 * n2
    c = ParamCircuit(nq, nq)
    for j in range(n2):
        col = [i * n2 + j for i in range(n1)]
        if n1 == 1:
            c.ry(col[0], param=col[0])
        else:
            _at_most_one_block(c, col, col)
    return c


def two_local(N: int, depth: int = 1) -> ParamCircuit:
    """Hardware-heuristic baseline: RY layers separated by linear CX chains."""
    if N < 2:
        raise ValueError("need N >= 2")
    if depth < 1:
        raise ValueError("need depth >= 1")
    c = ParamCircuit(N, N * (depth + 1))
    p = 0
    for _ in range(depth):
        for q in range(N):
            c.ry(q, param=p)
            p += 1
        for q in range(N - 1):
            c.cx(q, q + 1)
    for q in range(N):
        c.ry(q, param=p)
        p += 1
    return c


def qaoa(ising: mdl.IsingModel, p: int = 2) -> ParamCircuit:
    """Cost/mixer alternation for a diagonal Z Hamiltonian; 2p parameters
    ordered (gamma_1, beta_1, gamma_2, beta_2, ...)."""
    if p < 1:
        raise ValueError("need p >= 1")
    n = ising.num_vars
    c = ParamCircuit(n, 2 * p)
    for q in range(n):
        c.h(q)
    for layer in range(p):
        gamma, beta = 2 * layer, 2 * layer + 1
        for q in range(n):
            if ising.h[q] != 0.0:
                c.rz(q, param=gamma, mult=2.0 * ising.h[q])
        for (i, j), coeff in sorted(ising.J.items()):
            if coeff == 0.0:
                continue
            c.cx(i, j)
            c.rz(j, param=gamma, mult=2.0 * coeff)
            c.cx(i, j)
        for q in range(n):
            c.rx(q, param=beta, mult=2.0)
    return c


# --- closed-form state families ---

def closed_form_chain(N: int, theta) -> dict[str, float]:
    """Predicted amplitudes of the ladder form, keyed by display bitstring.

    The state with k trailing ones has amplitude
    prod_{i=1..N-k} cos(theta_i/2) * sin(theta_{N-k+1}/2), taking
    theta_{N+1} = pi so the all-zero state reads prod cos(theta_i/2).
    (Index convention re-derived against the simulator; the source
    formula's product bounds do not close under their own induction.)
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (N,):
        raise ValueError(f"expected {N} parameters")
    half = theta / 2.0
    amps = {}
    for k in range(N + 1):
        bits = (0,) * (N - k) + (1,) * k
        a = float(np.prod(np.cos(half[: N - k])))
        if k >= 1:
            a *= float(np.sin(half[N - k]))
        amps["".join(map(str, bits))] = a
    return amps


def closed_form_at_most_one(N: int, theta) -> dict[str, float]:
    """Predicted amplitudes of the one-hot-or-zero form.

    The all-zero state carries prod cos(theta_i/2); the state with its
    single 1 at display position j carries
    prod_{i<j} cos(theta_i/2) * sin(theta_j/2).
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (N,):
        raise ValueError(f"expected {N} parameters")
    half = theta / 2.0
    amps = {"0" * N: float(np.prod(np.cos(half)))}
    for j in range(N):
        bits = ["0"] * N
        bits[j] = "1"
        amps["".join(bits)] = float(np.prod(np.cos(half[:j])) * np.sin(half[j]))
    return amps


# --- feasible sets and the feasibility verifier ---

@dataclass(frozen=True)
class FeasibleSet:
    """Membership predicate plus explicit enumeration over a small universe."""

    name: str
    num_qubits: int
    members: frozenset  # of basis indices

    def contains(self, index: int) -> bool:
        return index in self.members


def _bits(index, n):
    return tuple((index >> q) & 1 for q in range(n))


def feasible_set(kind: str, num_qubits: int, sizes=None) -> FeasibleSet:
    """Enumerated feasible set for a structural kind (or 'flp'/'lap')."""
    if num_qubits > 20:
        raise ValueError("feasible-set enumeration capped at 20 qubits")

    if kind == "flp":
        n, m = sizes
        if n * m + n != num_qubits:
            raise ValueError("flp sizes inconsistent with qubit count")

        def ok(bits):
            return all(
                bits[i * m + j] <= bits[n * m + i] for i in range(n) for j in range(m)
            )
    elif kind == "lap":
        n1, n2 = sizes
        if n1 * n2 != num_qubits:
            raise ValueError("lap sizes inconsistent with qubit count")

        def ok(bits):
            return all(sum(bits[i * n2 + j] for i in range(n1)) <= 1 for j in range(n2))
    elif kind == mdl.CHAIN_MONOTONE:
        def ok(bits):
            return all(a <= b for a, b in zip(bits, bits[1:]))
    elif kind == mdl.AT_MOST_ONE:
        def ok(bits):
            return sum(bits) <= 1
    elif kind == mdl.SUM_LEQ_LAST:
        def ok(bits):
            return sum(bits[:-1]) <= bits[-1]
    elif kind == mdl.SUM_EQ_LAST:
        def ok(bits):
            return sum(bits[:-1]) == bits[-1]
    else:
        raise ValueError(f"unknown feasible-set kind {kind!r}")

    members = frozenset(
        idx for idx in range(2**num_qubits) if ok(_bits(idx, num_qubits))
    )
    return FeasibleSet(kind, num_qubits, members)


@dataclass
class FeasibilityReport:
    passed: bool
    trials: int
    worst_infeasible_amp: float
    worst_theta: np.ndarray | None
    worst_state: str | None
    reachability: dict        # display bitstring -> best observed probability
    witnesses: dict           # display bitstring -> parameter vector
    unreached: list

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [
            f"{status}: worst infeasible amplitude {self.worst_infeasible_amp:.3e} "
            f"over {self.trials} trials",
        ]
        if self.worst_state is not None:
            lines.append(f"  offending state {self.worst_state} at theta={self.worst_theta}")
        if self.unreached:
            lines.append(f"  unreached feasible states: {self.unreached}")
        return "\n".join(lines)


def verify_feasibility(
    circuit: ParamCircuit,
    feasible: FeasibleSet,
    trials: int = 1000,
    seed=0,
    amp_tol: float = 1e-10,
    include_corners: bool = True,
) -> FeasibilityReport:
    """Sample random parameters in [-pi, pi] (plus the {0, pi} corner grid
    when small enough) and check that no infeasible basis state ever gains
    amplitude above amp_tol, and that every feasible state is reached."""
    if circuit.num_qubits != feasible.num_qubits:
        raise ValueError("circuit and feasible set disagree on qubit count")
    if circuit.num_qubits > 12:
        raise ValueError("verifier capped at 12 qubits")
    n = circuit.num_qubits
    infeasible = np.array(
        [i for i in range(2**n) if not feasible.contains(i)], dtype=np.int64
    )
    rng = np.random.default_rng(seed)
    thetas = [rng.uniform(-np.pi, np.pi, circuit.num_params) for _ in range(trials)]
    if include_corners and circuit.num_params <= 12:
        grid = np.stack(
            np.meshgrid(*([[0.0, np.pi]] * circuit.num_params), indexing="ij"), axis=-1
        ).reshape(-1, circuit.num_params) if circuit.num_params else [np.zeros(0)]
        thetas.extend(np.asarray(g) for g in grid)

    worst_amp = 0.0
    worst_theta = None
    worst_state = None
    best_prob = {i: 0.0 for i in feasible.members}
    witness = {}
    for theta in thetas:
        probs = probabilities(run(circuit.bind(theta)))
        if infeasible.size:
            bad = infeasible[int(np.argmax(probs[infeasible]))]
            amp = float(np.sqrt(probs[bad]))
            if amp > worst_amp:
                worst_amp, worst_theta, worst_state = amp, theta, display(int(bad), n)
        for i in feasible.members:
            if probs[i] > best_prob[i]:
                best_prob[i] = float(probs[i])
                witness[display(i, n)] = theta
    unreached = sorted(display(i, n) for i in feasible.members if best_prob[i] <= 0.0)
    passed = worst_amp <= amp_tol and not unreached
    return FeasibilityReport(
        passed=passed,
        trials=len(thetas),
        worst_infeasible_amp=worst_amp,
        worst_theta=worst_theta if worst_amp > amp_tol else None,
        worst_state=worst_state if worst_amp > amp_tol else None,
        reachability={display(i, n): best_prob[i] for i in sorted(feasible.members)},
        witnesses=witness,
        unreached=unreached,
    )
