import math

import numpy as np
import pytest

from tvqe import ansatz as anz
from tvqe import model as mdl
from tvqe.statevector import display, display_to_index, probabilities, run


def support(circuit, theta, tol=1e-10):
    probs = probabilities(run(circuit.bind(theta)))
    return {display(i, circuit.num_qubits) for i in np.flatnonzero(probs > tol)}


def random_thetas(num, dim, seed):
    rng = np.random.default_rng(seed)
    return rng.uniform(-np.pi, np.pi, (num, dim))


class TestGateStats:
    @pytest.mark.parametrize("N", range(2, 9))
    def test_chain_counts(self, N):
        s = anz.gate_stats(anz.tvf_chain(N))
        assert (s.su2, s.cnot, s.params) == (2 * N - 1, N - 1, N)

    @pytest.mark.parametrize("N", range(2, 9))
    def test_at_most_one_counts(self, N):
        s = anz.gate_stats(anz.tvf_at_most_one(N))
        assert (s.su2, s.cnot, s.params) == (2 * N - 1, 2 * (N - 1), N)

    @pytest.mark.parametrize("N", range(2, 9))
    def test_sum_eq_last_counts(self, N):
        s = anz.gate_stats(anz.tvf_sum_eq_last(N))
        assert (s.su2, s.cnot, s.params) == (2 * N - 3, 3 * N - 5, N - 1)

    @pytest.mark.parametrize("N", range(2, 9))
    def test_sum_leq_last_counts(self, N):
        # this construction meets the 2N-1 single-qubit / N-parameter targets
        # but uses 3N-3 cnots instead of the reference 4N-6 (fewer for N > 3)
        s = anz.gate_stats(anz.tvf_sum_leq_last(N))
        assert (s.su2, s.params) == (2 * N - 1, N)
        assert s.cnot == 3 * N - 3

    def test_chain_cost(self):
        s = anz.gate_stats(anz.tvf_chain(4))
        assert (s.su2, s.cnot, s.params, s.cost) == (7, 3, 4, 37)

    def test_flp_instance_counts(self):
        s = anz.gate_stats(anz.tvf_flp(2, 1))
        assert (s.su2, s.cnot, s.params, s.cost) == (10, 2, 4, 30)

    def test_lap_instance_counts(self):
        s = anz.gate_stats(anz.tvf_lap(2, 2))
        assert (s.su2, s.cnot, s.params, s.cost) == (6, 4, 4, 46)

    def test_two_local_counts(self):
        s = anz.gate_stats(anz.two_local(4, 1))
        assert (s.su2, s.cnot, s.params) == (8, 3, 8)

    def test_qaoa_flp_counts(self):
        flp = mdl.build_flp(2, 1, (5, 10), ((3,), (2,)))
        ising = mdl.to_ising(mdl.penalize(flp, 100.0))
        s = anz.gate_stats(anz.qaoa(ising, 2))
        assert (s.su2, s.cnot, s.params, s.cost) == (26, 12, 4, 146)

    def test_qaoa_lap_equalities_only_counts(self):
        lap = mdl.build_lap(2, 2, ((5, 8), (7, 11)))
        ising = mdl.to_ising(mdl.penalize(lap, 100.0, "equalities_only"))
        s = anz.gate_stats(anz.qaoa(ising, 2))
        assert (s.su2, s.cnot, s.params, s.cost) == (24, 8, 4, 104)

    def test_empty_circuit(self):
        from tvqe.statevector import ParamCircuit

        s = anz.gate_stats(ParamCircuit(2))
        assert (s.su2, s.cnot, s.params, s.cost) == (0, 0, 0, 0)


class TestZeroAnchor:
    @pytest.mark.parametrize(
        "circuit",
        [
            anz.tvf_chain(3),
            anz.tvf_at_most_one(3),
            anz.tvf_sum_leq_last(3),
            anz.tvf_sum_eq_last(3),
            anz.tvf_flp(2, 2),
            anz.tvf_lap(2, 3),
            anz.two_local(3, 1),
        ],
        ids=["chain", "amo", "sum_leq", "sum_eq", "flp", "lap", "two_local"],
    )
    def test_zero_theta_prepares_all_zero(self, circuit):
        probs = probabilities(run(circuit.bind(np.zeros(circuit.num_params))))
        assert probs[0] == pytest.approx(1.0, abs=1e-12)


class TestSupports:
    def test_chain_support_is_suffix_ladder(self):
        ladder = {"000", "001", "011", "111"}
        for theta in random_thetas(200, 3, seed=1):
            assert support(anz.tvf_chain(3), theta) <= ladder

    def test_at_most_one_support(self):
        onehot = {"0000", "1000", "0100", "0010", "0001"}
        for theta in random_thetas(200, 4, seed=2):
            assert support(anz.tvf_at_most_one(4), theta) <= onehot

    def test_sum_leq_last_support(self):
        allowed = {"000", "001", "101", "011"}
        for theta in random_thetas(200, 3, seed=3):
            assert support(anz.tvf_sum_leq_last(3), theta) <= allowed

    def test_sum_eq_last_support(self):
        allowed = {"0000", "1001", "0101", "0011"}
        for theta in random_thetas(200, 3, seed=4):
            assert support(anz.tvf_sum_eq_last(4), theta) <= allowed

    def test_flp_y_zero_freezes_clients(self):
        circuit = anz.tvf_flp(2, 1)
        theta = np.array([1.3, -0.8, 0.0, 0.0])  # both facilities closed
        probs = probabilities(run(circuit.bind(theta)))
        assert probs[0] == pytest.approx(1.0, abs=1e-12)


class TestPublishedParameters:
    def test_flp_argmax(self):
        circuit = anz.tvf_flp(2, 1)
        probs = probabilities(run(circuit.bind([1.51, -3.44, 2.97, -0.0688])))
        assert display(int(np.argmax(probs)), 4) == "1010"

    def test_lap_argmax(self):
        circuit = anz.tvf_lap(2, 2)
        probs = probabilities(run(circuit.bind([0.01, -3.22, -1.68, 3.42])))
        assert display(int(np.argmax(probs)), 4) == "0110"


class TestClosedForms:
    def test_chain_n2_structure(self):
        t1, t2 = 0.7, -1.1
        amps = anz.closed_form_chain(2, [t1, t2])
        assert amps["00"] == pytest.approx(math.cos(t1 / 2) * math.cos(t2 / 2))
        assert amps["01"] == pytest.approx(math.cos(t1 / 2) * math.sin(t2 / 2))
        assert amps["11"] == pytest.approx(math.sin(t1 / 2))

    def test_chain_zero_theta(self):
        amps = anz.closed_form_chain(4, np.zeros(4))
        assert amps["0000"] == pytest.approx(1.0)
        assert all(a == pytest.approx(0.0) for k, a in amps.items() if k != "0000")

    @pytest.mark.parametrize("N", range(1, 7))
    def test_chain_matches_simulator(self, N):
        circuit = anz.tvf_chain(N)
        for theta in random_thetas(100, N, seed=10 + N):
            state = run(circuit.bind(theta))
            amps = anz.closed_form_chain(N, theta)
            predicted = np.zeros(2**N)
            for bits, a in amps.items():
                predicted[display_to_index(bits)] = a
            assert np.allclose(state.amplitudes.real, predicted, atol=1e-9)
            assert np.allclose(state.amplitudes.imag, 0.0, atol=1e-12)

    @pytest.mark.parametrize("N", range(2, 7))
    def test_at_most_one_matches_simulator(self, N):
        circuit = anz.tvf_at_most_one(N)
        for theta in random_thetas(100, N, seed=20 + N):
            state = run(circuit.bind(theta))
            amps = anz.closed_form_at_most_one(N, theta)
            predicted = np.zeros(2**N)
            for bits, a in amps.items():
                predicted[display_to_index(bits)] = a
            assert np.allclose(state.amplitudes.real, predicted, atol=1e-9)

    @pytest.mark.parametrize("N", (2, 4, 6))
    def test_closed_forms_normalized(self, N):
        for theta in random_thetas(50, N, seed=30 + N):
            total = sum(a**2 for a in anz.closed_form_chain(N, theta).values())
            assert total == pytest.approx(1.0, abs=1e-10)
            total = sum(a**2 for a in anz.closed_form_at_most_one(N, theta).values())
            assert total == pytest.approx(1.0, abs=1e-10)


class TestFeasibleSet:
    def test_chain_members(self):
        fs = anz.feasible_set("chain", 3)
        assert {display(i, 3) for i in fs.members} == {"000", "001", "011", "111"}

    def test_at_most_one_members(self):
        fs = anz.feasible_set("at_most_one", 3)
        assert len(fs.members) == 4

    def test_flp_members_match_problem(self):
        fs = anz.feasible_set("flp", 4, (2, 1))
        flp = mdl.build_flp(2, 1, (5, 10), ((3,), (2,)))
        for idx in range(16):
            bits = tuple((idx >> q) & 1 for q in range(4))
            structural_ok = all(
                sc.satisfied(flp.assignment(bits)) for sc in flp.structural
            )
            assert fs.contains(idx) == structural_ok


class TestVerifyFeasibility:
    @pytest.mark.parametrize(
        "kind,circuit",
        [
            ("chain", anz.tvf_chain(5)),
            ("at_most_one", anz.tvf_at_most_one(5)),
            ("sum_leq_last", anz.tvf_sum_leq_last(5)),
            ("sum_eq_last", anz.tvf_sum_eq_last(5)),
        ],
    )
    def test_tvfs_pass(self, kind, circuit):
        fs = anz.feasible_set(kind, 5)
        rep = anz.verify_feasibility(circuit, fs, trials=300, seed=0)
        assert rep.passed
        assert rep.worst_infeasible_amp <= 1e-10
        assert not rep.unreached

    def test_flp_lap_pass(self):
        rep = anz.verify_feasibility(
            anz.tvf_flp(2, 2), anz.feasible_set("flp", 6, (2, 2)), trials=300, seed=0
        )
        assert rep.passed
        rep = anz.verify_feasibility(
            anz.tvf_lap(2, 3), anz.feasible_set("lap", 6, (2, 3)), trials=300, seed=0
        )
        assert rep.passed

    def test_negative_control(self):
        rep = anz.verify_feasibility(
            anz.tvf_chain(3), anz.feasible_set("at_most_one", 3), trials=100, seed=0
        )
        assert not rep.passed
        assert rep.worst_state is not None
        assert rep.worst_theta is not None

    def test_witnesses_recorded(self):
        rep = anz.verify_feasibility(
            anz.tvf_chain(3), anz.feasible_set("chain", 3), trials=100, seed=1
        )
        assert set(rep.witnesses) == set(rep.reachability)

    def test_qubit_cap(self):
        with pytest.raises(ValueError):
            anz.verify_feasibility(
                anz.tvf_chain(13), anz.feasible_set("chain", 13), trials=1
            )


class TestPenaltyTvfConsistency:
    """The reachable set of a tailored form equals the zero-penalty set of
    its penalty term."""

    @pytest.mark.parametrize("N", range(2, 7))
    def test_at_most_one(self, N):
        p = mdl.LcqboProblem(
            [f"v{i}" for i in range(N)],
            structural=[
                mdl.StructuralConstraint(mdl.AT_MOST_ONE, tuple(f"v{i}" for i in range(N)))
            ],
        )
        q = mdl.penalize(p, 1.0)
        fs = anz.feasible_set("at_most_one", N)
        rep = anz.verify_feasibility(
            anz.tvf_at_most_one(N), fs, trials=200, seed=N
        )
        assert rep.passed
        for idx in range(2**N):
            bits = tuple((idx >> i) & 1 for i in range(N))
            assert (q.value(bits) == 0.0) == fs.contains(idx)

    def test_var_leq_var(self):
        p = mdl.LcqboProblem(
            ["x", "y"],
            structural=[mdl.StructuralConstraint(mdl.VAR_LEQ_VAR, ("x", "y"))],
        )
        q = mdl.penalize(p, 1.0)
        fs = anz.feasible_set("flp", 2, (1, 1))  # single pair x <= y
        rep = anz.verify_feasibility(anz.tvf_flp(1, 1), fs, trials=200, seed=9)
        assert rep.passed
        for idx in range(4):
            bits = (idx & 1, (idx >> 1) & 1)
            assert (q.value(bits) == 0.0) == fs.contains(idx)


class TestBuilderGuards:
    def test_chain_needs_positive(self):
        with pytest.raises(ValueError):
            anz.tvf_chain(0)

    def test_pairwise_forms_need_two(self):
        for builder in (anz.tvf_at_most_one, anz.tvf_sum_leq_last, anz.tvf_sum_eq_last):
            with pytest.raises(ValueError):
                builder(1)

    def test_qaoa_p_positive(self):
        ising = mdl.IsingModel(np.zeros(2), {(0, 1): 1.0})
        with pytest.raises(ValueError):
            anz.qaoa(ising, 0)

    def test_qaoa_param_count(self):
        ising = mdl.IsingModel(np.ones(3), {(0, 1): 1.0})
        assert anz.qaoa(ising, 2).num_params == 4
