"""Dense statevector simulator for small parameterized circuits.

Bit convention: qubit q holds the variable registered at position q and
contributes bit_q * 2**q to the basis index (qubit 0 is least significant
internally).  Display strings print qubit 0 leftmost, so basis index 5 on
3 qubits displays as "101".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ROTATION_KINDS = ("RY", "RX", "RZ")
SINGLE_KINDS = ROTATION_KINDS + ("H", "X")
CONTROLLED_KINDS = ("CX", "CZ")
GATE_KINDS = SINGLE_KINDS + CONTROLLED_KINDS

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class AngleExpr:
    """Symbolic rotation angle: multiplier * theta[param_index] + offset.

    With param_index None the angle is the constant `offset`.
    """

    param_index: int | None = None
    multiplier: float = 1.0
    offset: float = 0.0

    def value(self, theta) -> float:
        if self.param_index is None:
            return self.offset
        return self.multiplier * float(theta[self.param_index]) + self.offset

    @staticmethod
    def const(angle: float) -> "AngleExpr":
        return AngleExpr(param_index=None, multiplier=0.0, offset=angle)

    def __str__(self) -> str:
        if self.param_index is None:
            return repr(self.offset)
        return f"{self.multiplier!r}*t{self.param_index}+{self.offset!r}"


@dataclass(frozen=True)
class Gate:
    kind: str
    target: int
    control: int | None = None
    angle: AngleExpr | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind in CONTROLLED_KINDS:
            if self.control is None:
                raise ValueError(f"{self.kind} requires a control qubit")
            if self.control == self.target:
                raise ValueError("control and target must differ")
        elif self.control is not None:
            raise ValueError(f"{self.kind} takes no control qubit")
        if self.kind in ROTATION_KINDS:
            if self.angle is None:
                raise ValueError(f"{self.kind} requires an angle")
        elif self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")


@dataclass
class ParamCircuit:
    """Ordered gate list over num_qubits with symbolic rotation slots."""

    num_qubits: int
    num_params: int = 0
    gates: list[Gate] = field(default_factory=list)

    def _check_qubit(self, q: int):
        if not 0 <= q < self.num_qubits:
            raise ValueError(f"qubit {q} out of range for {self.num_qubits} qubits")

    def add(self, gate: Gate):
        self._check_qubit(gate.target)
        if gate.control is not None:
            self._check_qubit(gate.control)
        if gate.angle is not None and gate.angle.param_index is not None:
            if not 0 <= gate.angle.param_index < self.num_params:
                raise ValueError(
                    f"param index {gate.angle.param_index} out of range "
                    f"for {self.num_params} parameters"
                )
        self.gates.append(gate)

    # builder helpers
    def ry(self, q, param=None, mult=1.0, offset=0.0):
        self.add(Gate("RY", q, angle=_expr(param, mult, offset)))

    def rx(self, q, param=None, mult=1.0, offset=0.0):
        self.add(Gate("RX", q, angle=_expr(param, mult, offset)))

    def rz(self, q, param=None, mult=1.0, offset=0.0):
        self.add(Gate("RZ", q, angle=_expr(param, mult, offset)))

    def h(self, q):
        self.add(Gate("H", q))

    def x(self, q):
        self.add(Gate("X", q))

    def cx(self, control, target):
        self.add(Gate("CX", target, control=control))

    def cz(self, control, target):
        self.add(Gate("CZ", target, control=control))

    def bind(self, theta) -> "ParamCircuit":
        """Replace every symbolic angle by its numeric value.

        Returns a circuit with num_params == 0 and identical gate order.
        """
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.num_params,):
            raise ValueError(
                f"expected {self.num_params} parameters, got shape {theta.shape}"
            )
        if not np.all(np.isfinite(theta)):
            raise ValueError("parameter vector contains non-finite entries")
        bound = ParamCircuit(self.num_qubits, 0)
        for g in self.gates:
            if g.angle is None:
                bound.gates.append(g)
            else:
                bound.gates.append(
                    Gate(g.kind, g.target, angle=AngleExpr.const(g.angle.value(theta)))
                )
        return bound

    def dump(self) -> str:
        """One gate per line, preceded by a `qubits N params K` header.

        Qubit labels are 1-based (q1 is the leftmost display bit); parameter
        labels are 0-based (t0..t{K-1}).
        """
        lines = [f"qubits {self.num_qubits} params {self.num_params}"]
        for g in self.gates:
            if g.kind in CONTROLLED_KINDS:
                lines.append(f"{g.kind} q{g.control + 1} q{g.target + 1}")
            elif g.angle is not None:
                lines.append(f"{g.kind} q{g.target + 1} {g.angle}")
            else:
                lines.append(f"{g.kind} q{g.target + 1}")
        return "\n".join(lines) + "\n"


def _expr(param, mult, offset):
    if param is None:
        return AngleExpr.const(offset)
    return AngleExpr(param_index=param, multiplier=mult, offset=offset)


# --- bit convention helpers ---

def bits_to_index(bits) -> int:
    """Basis index of a bit tuple (bits[q] is the value of qubit q)."""
    return sum(int(b) << q for q, b in enumerate(bits))


def index_to_bits(index: int, num_qubits: int) -> tuple[int, ...]:
    return tuple((index >> q) & 1 for q in range(num_qubits))


def display(index: int, num_qubits: int) -> str:
    """Display string with qubit 0 leftmost, matching |x1 x2 ... xN> order."""
    return "".join(str((index >> q) & 1) for q in range(num_qubits))


def display_to_index(bitstring: str) -> int:
    return sum(int(b) << q for q, b in enumerate(bitstring))


class StateVector:
    """2**num_qubits complex amplitudes, kept unit norm."""

    def __init__(self, num_qubits: int, amplitudes=None):
        if num_qubits < 0:
            raise ValueError("num_qubits must be non-negative")
        self.num_qubits = num_qubits
        if amplitudes is None:
            amps = np.zeros(2**num_qubits, dtype=complex)
            amps[0] = 1.0
        else:
            amps = np.asarray(amplitudes, dtype=complex).copy()
            if amps.shape != (2**num_qubits,):
                raise ValueError("amplitude array has wrong length")
            norm = np.linalg.norm(amps)
            if abs(norm - 1.0) > 1e-12:
                raise ValueError(f"state not normalized: |norm - 1| = {abs(norm - 1.0):.3e}")
        self.amplitudes = amps

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes)

    def apply(self, gate: Gate, theta=None):
        """Apply one concrete gate in place (symbolic slots need theta)."""
        if gate.kind in CONTROLLED_KINDS:
            self._apply_controlled(gate)
        else:
            mat = _single_qubit_matrix(gate, theta)
            self.amplitudes = _apply_1q(self.amplitudes, mat, gate.target, self.num_qubits)

    def _apply_controlled(self, gate: Gate):
        n = self.num_qubits
        idx = np.arange(2**n)
        ctrl_on = ((idx >> gate.control) & 1) == 1
        if gate.kind == "CX":
            flipped = idx ^ (1 << gate.target)
            out = self.amplitudes.copy()
            out[ctrl_on] = self.amplitudes[flipped[ctrl_on]]
            self.amplitudes = out
        else:  # CZ
            both = ctrl_on & (((idx >> gate.target) & 1) == 1)
            self.amplitudes = self.amplitudes.copy()
            self.amplitudes[both] *= -1.0


def _single_qubit_matrix(gate: Gate, theta=None) -> np.ndarray:
    if gate.kind == "H":
        return np.array([[1, 1], [1, -1]], dtype=complex) / _SQRT2
    if gate.kind == "X":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    a = gate.angle.value(theta if theta is not None else ())
    half = a / 2.0
    c, s = math.cos(half), math.sin(half)
    if gate.kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if gate.kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if gate.kind == "RZ":
        return np.array([[np.exp(-1j * half), 0], [0, np.exp(1j * half)]], dtype=complex)
    raise ValueError(f"not a single-qubit gate: {gate.kind}")


def _apply_1q(amps: np.ndarray, mat: np.ndarray, q: int, n: int) -> np.ndarray:
    tensor = amps.reshape([2] * n)
    axis = n - 1 - q  # qubit 0 is least significant -> last axis in C order
    tensor = np.moveaxis(tensor, axis, 0)
    tensor = np.tensordot(mat, tensor, axes=([1], [0]))
    return np.ascontiguousarray(np.moveaxis(tensor, 0, axis)).reshape(-1)


def run(circuit: ParamCircuit, initial: StateVector | None = None) -> StateVector:
    """Apply a bound circuit's gates left-to-right to the initial state."""
    if circuit.num_params != 0:
        raise ValueError("circuit has unbound parameters; call bind() first")
    if initial is None:
        initial = StateVector(circuit.num_qubits)
    if initial.num_qubits != circuit.num_qubits:
        raise ValueError(
            f"state has {initial.num_qubits} qubits, circuit has {circuit.num_qubits}"
        )
    state = initial.copy()
    for g in circuit.gates:
        state.apply(g)
    return state


def probabilities(state: StateVector) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def sample(state: StateVector, shots: int, seed) -> dict[str, int]:
    """Multinomial shot sampling; deterministic for a fixed seed.

    Returns a histogram keyed by display-order bitstring, nonzero bins only.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = probabilities(state)
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, p)
    n = state.num_qubits
    return {display(i, n): int(c) for i, c in enumerate(counts) if c > 0}
