import math

import numpy as np
import pytest

from tvqe.statevector import (
    AngleExpr,
    Gate,
    ParamCircuit,
    StateVector,
    bits_to_index,
    display,
    display_to_index,
    index_to_bits,
    probabilities,
    run,
    sample,
)


def ry_circuit(angle, num_qubits=1, target=0):
    c = ParamCircuit(num_qubits)
    c.ry(target, offset=angle)
    return c


class TestAngleExpr:
    def test_constant(self):
        assert AngleExpr.const(1.25).value(()) == 1.25

    def test_bound_value(self):
        expr = AngleExpr(param_index=0, multiplier=0.5, offset=0.0)
        assert expr.value([math.pi]) == pytest.approx(math.pi / 2)

    def test_affine(self):
        expr = AngleExpr(param_index=1, multiplier=-2.0, offset=0.25)
        assert expr.value([0.0, 3.0]) == pytest.approx(-5.75)


class TestGateValidation:
    def test_rotation_needs_angle(self):
        with pytest.raises(ValueError):
            Gate("RY", 0)

    def test_h_takes_no_angle(self):
        with pytest.raises(ValueError):
            Gate("H", 0, angle=AngleExpr.const(1.0))

    def test_control_must_differ(self):
        with pytest.raises(ValueError):
            Gate("CX", 2, control=2)

    def test_cx_needs_control(self):
        with pytest.raises(ValueError):
            Gate("CX", 0)

    def test_qubit_range_checked(self):
        c = ParamCircuit(2)
        with pytest.raises(ValueError):
            c.ry(2, offset=0.1)

    def test_param_range_checked(self):
        c = ParamCircuit(2, 1)
        with pytest.raises(ValueError):
            c.ry(0, param=1)


class TestBind:
    def test_zero_theta_zeroes_all_rotations(self):
        c = ParamCircuit(2, 2)
        c.ry(0, param=0)
        c.ry(1, param=1, mult=0.5)
        c.cx(0, 1)
        c.ry(1, param=1, mult=0.5)
        bound = c.bind([0.0, 0.0])
        for g in bound.gates:
            if g.angle is not None:
                assert g.angle.value(()) == 0.0

    def test_half_multiplier(self):
        c = ParamCircuit(1, 1)
        c.ry(0, param=0, mult=0.5)
        bound = c.bind([math.pi])
        assert bound.gates[0].angle.value(()) == pytest.approx(math.pi / 2)

    def test_gate_order_preserved(self):
        c = ParamCircuit(2, 1)
        c.h(0)
        c.ry(1, param=0)
        c.cx(0, 1)
        bound = c.bind([0.3])
        assert [g.kind for g in bound.gates] == ["H", "RY", "CX"]

    def test_arity_mismatch(self):
        c = ParamCircuit(1, 2)
        with pytest.raises(ValueError):
            c.bind([0.1])

    def test_non_finite_rejected(self):
        c = ParamCircuit(1, 1)
        c.ry(0, param=0)
        with pytest.raises(ValueError):
            c.bind([np.nan])


class TestRun:
    def test_ry_pi_flips(self):
        state = run(ry_circuit(math.pi))
        assert probabilities(state) == pytest.approx([0.0, 1.0], abs=1e-12)
        assert state.amplitudes[1] == pytest.approx(1.0)

    def test_empty_circuit_identity(self):
        state = run(ParamCircuit(3))
        expected = np.zeros(8)
        expected[0] = 1.0
        assert np.allclose(state.amplitudes, expected)

    def test_chain_theta1_pi_gives_11(self):
        # amplitude of |11> is sin(theta_1 / 2) regardless of theta_2
        c = ParamCircuit(2, 2)
        c.ry(0, param=0)
        c.ry(1, param=1, mult=0.5)
        c.cx(0, 1)
        c.ry(1, param=1, mult=0.5)
        state = run(c.bind([math.pi, 1.234]))
        probs = probabilities(state)
        assert probs[bits_to_index((1, 1))] == pytest.approx(1.0, abs=1e-12)

    def test_qubit_count_mismatch(self):
        with pytest.raises(ValueError):
            run(ParamCircuit(2), StateVector(3))

    def test_unbound_circuit_rejected(self):
        c = ParamCircuit(1, 1)
        c.ry(0, param=0)
        with pytest.raises(ValueError):
            run(c)


class TestProbabilities:
    def test_basis_state(self):
        c = ParamCircuit(2)
        c.x(0)
        c.x(1)
        probs = probabilities(run(c))
        assert probs[bits_to_index((1, 1))] == pytest.approx(1.0)

    def test_hadamard_uniform(self):
        c = ParamCircuit(1)
        c.h(0)
        assert probabilities(run(c)) == pytest.approx([0.5, 0.5])

    def test_sum_to_one(self):
        c = random_circuit(4, 60, np.random.default_rng(7))
        probs = probabilities(run(c))
        assert probs.sum() == pytest.approx(1.0, abs=1e-10)


def random_circuit(n, num_gates, rng):
    c = ParamCircuit(n)
    for _ in range(num_gates):
        kind = rng.choice(["RY", "RX", "RZ", "H", "X", "CX", "CZ"])
        q = int(rng.integers(n))
        if kind in ("CX", "CZ"):
            ctrl = int(rng.integers(n - 1))
            if ctrl >= q:
                ctrl += 1
            c.add(Gate(kind, q, control=ctrl))
        elif kind in ("RY", "RX", "RZ"):
            c.add(Gate(kind, q, angle=AngleExpr.const(float(rng.uniform(-np.pi, np.pi)))))
        else:
            c.add(Gate(kind, q))
    return c


class TestNormAndUnitarity:
    @pytest.mark.parametrize("trial", range(10))
    def test_norm_preserved_random_circuits(self, trial):
        rng = np.random.default_rng(100 + trial)
        n = int(rng.integers(2, 9))
        c = random_circuit(n, int(rng.integers(1, 201)), rng)
        state = run(c)
        assert abs(np.linalg.norm(state.amplitudes) - 1.0) <= 1e-12

    def test_ry_inverse(self):
        c = ParamCircuit(1)
        c.ry(0, offset=0.7)
        c.ry(0, offset=-0.7)
        assert np.allclose(run(c).amplitudes, [1.0, 0.0], atol=1e-12)

    def test_cx_involution(self):
        rng = np.random.default_rng(5)
        start = random_circuit(3, 30, rng)
        base = run(start)
        c = ParamCircuit(3)
        c.cx(0, 2)
        c.cx(0, 2)
        after = run(c, base)
        assert np.allclose(after.amplitudes, base.amplitudes, atol=1e-12)

    def test_h_involution(self):
        rng = np.random.default_rng(6)
        base = run(random_circuit(2, 20, rng))
        c = ParamCircuit(2)
        c.h(1)
        c.h(1)
        after = run(c, base)
        assert np.allclose(after.amplitudes, base.amplitudes, atol=1e-12)

    def test_h_cx_h_equals_cz(self):
        for idx in range(4):
            amps = np.zeros(4, dtype=complex)
            amps[idx] = 1.0
            base = StateVector(2, amps)
            via_h = ParamCircuit(2)
            via_h.h(1)
            via_h.cx(0, 1)
            via_h.h(1)
            native = ParamCircuit(2)
            native.cz(0, 1)
            assert np.allclose(
                run(via_h, base).amplitudes, run(native, base).amplitudes, atol=1e-12
            )

    def test_cx_truth_table(self):
        for a in (0, 1):
            for b in (0, 1):
                amps = np.zeros(4, dtype=complex)
                amps[bits_to_index((a, b))] = 1.0
                c = ParamCircuit(2)
                c.cx(0, 1)
                out = run(c, StateVector(2, amps))
                expect = bits_to_index((a, b ^ a))
                assert out.amplitudes[expect] == pytest.approx(1.0)


class TestSample:
    def test_deterministic_state(self):
        c = ParamCircuit(2)
        c.x(1)
        hist = sample(run(c), 1024, seed=0)
        assert hist == {"01": 1024}

    def test_seed_reproducible(self):
        c = ParamCircuit(2)
        c.h(0)
        c.h(1)
        state = run(c)
        assert sample(state, 1024, seed=42) == sample(state, 1024, seed=42)

    def test_uniform_within_five_sigma(self):
        c = ParamCircuit(2)
        c.h(0)
        c.h(1)
        hist = sample(run(c), 1024, seed=7)
        sigma = math.sqrt(1024 * 0.25 * 0.75)
        assert sum(hist.values()) == 1024
        for count in hist.values():
            assert abs(count - 256) <= 5 * sigma

    def test_zero_shots_rejected(self):
        with pytest.raises(ValueError):
            sample(run(ParamCircuit(1)), 0, seed=0)

    def test_frequency_convergence(self):
        rng = np.random.default_rng(11)
        c = random_circuit(3, 40, rng)
        state = run(c)
        probs = probabilities(state)
        hist = sample(state, 10**5, seed=3)
        for idx, p in enumerate(probs):
            freq = hist.get(display(idx, 3), 0) / 10**5
            bound = 5 * math.sqrt(p * (1 - p) / 10**5)
            assert abs(freq - p) <= max(bound, 1e-4)


class TestBitConvention:
    def test_qubit0_least_significant(self):
        assert bits_to_index((1, 0, 0)) == 1
        assert bits_to_index((0, 0, 1)) == 4

    def test_display_qubit0_leftmost(self):
        assert display(1, 3) == "100"
        assert display(4, 3) == "001"

    def test_roundtrip(self):
        for idx in range(16):
            assert bits_to_index(index_to_bits(idx, 4)) == idx
            assert display_to_index(display(idx, 4)) == idx


class TestDump:
    def test_golden_chain(self):
        c = ParamCircuit(2, 2)
        c.ry(0, param=0)
        c.ry(1, param=1, mult=0.5)
        c.cx(0, 1)
        c.ry(1, param=1, mult=0.5)
        assert c.dump() == (
            "qubits 2 params 2\n"
            "RY q1 1.0*t0+0.0\n"
            "RY q2 0.5*t1+0.0\n"
            "CX q1 q2\n"
            "RY q2 0.5*t1+0.0\n"
        )

    def test_plain_gates(self):
        c = ParamCircuit(3)
        c.h(1)
        c.x(2)
        c.cz(0, 2)
        assert c.dump() == "qubits 3 params 0\nH q2\nX q3\nCZ q1 q3\n"
