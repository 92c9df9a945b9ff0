"""Command-line interface: solve, compare, verify, oracle.

Exit codes: 0 success, 1 usage/input error, 2 infeasible best solution or
failed feasibility certificate.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources

import numpy as np

from . import __version__
from . import ansatz as anz
from . import model as mdl
from . import report
from .statevector import display
from .vqe import AnsatzSpec, ConstraintNotRepresentableError, VqeConfig, run_vqe

BUNDLED = ("flp", "lap")

# published instance tables (su2, cnot, params, cost), keyed by ansatz name
PUBLISHED_STATS = {
    "flp": {
        "tvf": (10, 2, 4, 30),
        "two_local": (14, 3, 8, 44),
        "qaoa": (26, 12, 4, 146),
    },
    "lap": {
        "tvf": (6, 4, 4, 46),
        "two_local": (14, 3, 8, 44),
        "qaoa": (24, 8, 4, 104),
    },
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _default_seed() -> int:
    return int(os.environ.get("TVQE_SEED", "0"))


def _resolve_problem(name: str) -> mdl.LcqboProblem:
    if name in BUNDLED:
        ref = resources.files("tvqe").joinpath("data", f"{name}.json")
        return mdl.problem_from_dict(json.loads(ref.read_text(encoding="utf-8")))
    return mdl.load_problem(name)


def _bundled_key(problem: mdl.LcqboProblem) -> str | None:
    """Name of the bundled instance this problem equals, if any."""
    for name in BUNDLED:
        if mdl.problem_to_dict(problem) == mdl.problem_to_dict(_resolve_problem(name)):
            return name
    return None


def _ansatz_spec(args) -> AnsatzSpec:
    kind = {"tvf": "tvf", "two-local": "two_local", "qaoa": "qaoa"}[args.ansatz]
    return AnsatzSpec(kind=kind, depth=args.depth, p=args.p, penalties=args.penalties)


def _vqe_config(args) -> VqeConfig:
    return VqeConfig(
        shots=args.shots,
        seed=args.seed,
        max_iters=args.max_iters,
        expectation_mode="exact" if args.exact else "sampled",
        restarts=args.restarts,
        lam=getattr(args, "lam", None),
    )


def _result_payload(problem, args, result, lam):
    return {
        "version": __version__,
        "config": {
            "ansatz": args.ansatz,
            "shots": args.shots,
            "seed": args.seed,
            "max_iters": args.max_iters,
            "lambda": lam,
            "exact": args.exact,
            "restarts": args.restarts,
        },
        "problem": mdl.problem_to_dict(problem),
        "theta_star": [float(t) for t in result.theta_star],
        "energy_star": result.energy_star,
        "best_bits": result.best_display,
        "best_objective": result.best_objective,
        "best_feasible": result.best_feasible,
        "feasible_fraction": _revalidated_fraction(problem, result.histogram),
        "num_evaluations": result.num_evaluations,
    }


def _revalidated_fraction(problem, histogram) -> float:
    """Re-check every histogram bitstring against the full constraint set."""
    total = sum(histogram.values())
    feasible = sum(
        count
        for bits, count in histogram.items()
        if mdl.evaluate(problem, tuple(int(b) for b in bits)).feasible
    )
    return feasible / total if total else 0.0


def _run_one(problem, args, spec):
    config = _vqe_config(args)
    return run_vqe(problem, spec, config)


def cmd_solve(args) -> int:
    problem = _resolve_problem(args.problem)
    out = report.ensure_dir(args.out)
    lam = args.lam if args.lam is not None else problem.penalty_weight
    result = _run_one(problem, args, _ansatz_spec(args))
    report.write_json(_result_payload(problem, args, result, lam), out / "result.json")
    report.write_trace_csv(result.trace, out / "trace.csv")
    report.write_histogram_json(result.histogram, out / "histogram.json")
    report.plot_trace({args.ansatz: result.trace}, out / "trace.png",
                      oracle_value=_oracle_energy(problem, lam),
                      title=f"{args.problem}: energy trace")
    report.plot_histogram({args.ansatz: result.histogram}, out / "histogram.png",
                          title=f"{args.problem}: outcomes at theta*")
    print(f"best {result.best_display}  objective {result.best_objective}"
          f"  feasible {result.best_feasible}")
    print(f"wrote {out}/result.json, trace.csv, histogram.json, trace.png, histogram.png")
    return 0 if result.best_feasible else 2


def _oracle_energy(problem, lam):
    qubo = mdl.penalize(problem, lam, "equalities_only"
                        if _has_unpenalizable(problem) else "all")
    return mdl.brute_force(qubo).best_value


def _has_unpenalizable(problem) -> bool:
    return any(sc.kind in (mdl.SUM_LEQ_LAST, mdl.SUM_EQ_LAST) for sc in problem.structural)


def cmd_compare(args) -> int:
    problem = _resolve_problem(args.problem)
    out = report.ensure_dir(args.out)
    lam = args.lam if args.lam is not None else problem.penalty_weight
    bundled = _bundled_key(problem)
    oracle = mdl.brute_force(problem)

    runs = {}
    stats_rows = []
    from .vqe import build_ansatz

    for name, spec in [
        ("tvf", AnsatzSpec("tvf")),
        ("two_local", AnsatzSpec("two_local", depth=args.depth)),
        ("qaoa", AnsatzSpec("qaoa", p=args.p, penalties=args.penalties)),
    ]:
        circuit, _, _ = build_ansatz(problem, spec, lam)
        stats = anz.gate_stats(circuit)
        row = {"ansatz": name, "su2": stats.su2, "cnot": stats.cnot,
               "params": stats.params, "cost": stats.cost}
        if bundled is not None:
            ref = PUBLISHED_STATS[bundled][name]
            row.update(ref_su2=ref[0], ref_cnot=ref[1], ref_params=ref[2], ref_cost=ref[3])
        stats_rows.append(row)
        result = run_vqe(problem, spec, _vqe_config(args))
        runs[name] = result
        report.write_trace_csv(result.trace, out / f"{name}_trace.csv")
        report.write_histogram_json(result.histogram, out / f"{name}_histogram.json")

    payload = {
        "version": __version__,
        "problem": mdl.problem_to_dict(problem),
        "lambda": lam,
        "seed": args.seed,
        "shots": args.shots,
        "oracle": {
            "best_bits": "".join(map(str, oracle.best_bits)),
            "best_objective": oracle.best_value,
        },
        "gate_stats": stats_rows,
        "results": {
            name: {
                "best_bits": r.best_display,
                "best_objective": r.best_objective,
                "best_feasible": r.best_feasible,
                "feasible_fraction": _revalidated_fraction(problem, r.histogram),
                "energy_star": r.energy_star,
            }
            for name, r in runs.items()
        },
    }
    report.write_json(payload, out / "compare.json")
    report.write_gate_stats_csv(stats_rows, out / "gate_stats.csv")
    report.plot_trace({n: r.trace for n, r in runs.items()}, out / "comparison_trace.png",
                      oracle_value=_oracle_energy(problem, lam),
                      title=f"{args.problem}: energy traces")
    report.plot_histogram({n: r.histogram for n, r in runs.items()},
                          out / "comparison_histogram.png",
                          title=f"{args.problem}: outcomes at theta*")
    print(f"oracle: {payload['oracle']['best_bits']} -> {oracle.best_value}")
    for row in stats_rows:
        ref = (f"  (published: {row['ref_su2']}/{row['ref_cnot']}/"
               f"{row['ref_params']}/{row['ref_cost']})" if "ref_su2" in row else "")
        print(f"{row['ansatz']:10s} su2={row['su2']} cnot={row['cnot']} "
              f"params={row['params']} cost={row['cost']}{ref}")
    for name, r in runs.items():
        print(f"{name:10s} best {r.best_display} objective {r.best_objective} "
              f"feasible {r.best_feasible}")
    print(f"wrote {out}/compare.json, gate_stats.csv, *_trace.csv, "
          f"*_histogram.json, comparison_trace.png, comparison_histogram.png")
    return 0


VERIFY_KINDS = ("chain", "at_most_one", "sum_leq_last", "sum_eq_last", "flp", "lap")


def _verify_circuit(kind, sizes):
    if kind == "flp":
        n, m = sizes
        return anz.tvf_flp(n, m), anz.feasible_set("flp", n * m + n, (n, m))
    if kind == "lap":
        n1, n2 = sizes
        return anz.tvf_lap(n1, n2), anz.feasible_set("lap", n1 * n2, (n1, n2))
    n = sizes[0]
    builder = {
        "chain": anz.tvf_chain,
        "at_most_one": anz.tvf_at_most_one,
        "sum_leq_last": anz.tvf_sum_leq_last,
        "sum_eq_last": anz.tvf_sum_eq_last,
    }[kind]
    if kind == "chain" and n == 1:
        return anz.tvf_chain(1), anz.feasible_set("chain", 1)
    return builder(n), anz.feasible_set(kind, n)


def cmd_verify(args) -> int:
    sizes = tuple(int(s) for s in args.size.split(","))
    if args.kind in ("flp", "lap") and len(sizes) != 2:
        return _usage_error("--size takes N,M for flp/lap")
    circuit, feasible = _verify_circuit(args.kind, sizes)
    if circuit.num_qubits > 12:
        return _usage_error("feasibility verification capped at 12 qubits")
    rep = anz.verify_feasibility(circuit, feasible, trials=args.trials, seed=args.seed)
    print(f"kind={args.kind} size={args.size} qubits={circuit.num_qubits} "
          f"params={circuit.num_params}")
    print(rep.summary())
    print(f"support ({len(rep.reachability)} states): "
          + " ".join(sorted(rep.reachability)))
    return 0 if rep.passed else 2


def _usage_error(msg) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 1


def cmd_oracle(args) -> int:
    problem = _resolve_problem(args.problem)
    if problem.num_vars > mdl.BRUTE_FORCE_CAP:
        return _usage_error(
            f"problem has {problem.num_vars} variables; oracle cap is "
            f"{mdl.BRUTE_FORCE_CAP}")
    lam = args.lam if args.lam is not None else problem.penalty_weight
    result = mdl.brute_force(problem)
    scope = "equalities_only" if _has_unpenalizable(problem) else "all"
    qubo = mdl.penalize(problem, lam, scope)
    out = report.ensure_dir(args.out)
    report.write_oracle_csv(problem, result, qubo, out / "oracle.csv")
    n = problem.num_vars
    best_idx = sum(b << i for i, b in enumerate(result.best_bits))
    print(f"optimum {result.best_value} at {display(best_idx, n)} "
          f"({problem.sense} over {int(result.feasible.sum())} feasible "
          f"of {2**n} bitstrings)")
    print(f"wrote {out}/oracle.csv")
    return 0


def _add_common(p):
    p.add_argument("--problem", required=True,
                   help="problem JSON file, or bundled name: flp, lap")
    p.add_argument("--shots", type=int, default=1024)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--max-iters", type=int, default=200, dest="max_iters")
    p.add_argument("--lambda", type=float, default=None, dest="lam",
                   help="penalty weight (defaults to the problem file's value)")
    p.add_argument("--exact", action="store_true",
                   help="exact expectations instead of shot sampling")
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--depth", type=int, default=1, help="2-Local depth")
    p.add_argument("--p", type=int, default=2, help="QAOA layer count")
    p.add_argument("--penalties", choices=("all", "equalities"), default="all",
                   help="penalty scope for the QAOA Hamiltonian")
    p.add_argument("--out", default="out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tvqe", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run VQE with one ansatz")
    _add_common(p)
    p.add_argument("--ansatz", choices=("tvf", "two-local", "qaoa"), default="tvf")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="run TVF, 2-Local, and QAOA side by side")
    _add_common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", help="feasibility certificate for a tailored form")
    p.add_argument("--kind", choices=VERIFY_KINDS, required=True)
    p.add_argument("--size", required=True, help="N, or N,M for flp/lap")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="exhaustive bitstring table")
    p.add_argument("--problem", required=True)
    p.add_argument("--lambda", type=float, default=None, dest="lam")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "shots", 1) < 1:
        return _usage_error("--shots must be >= 1")
    if getattr(args, "p", 1) < 1 or getattr(args, "depth", 1) < 1:
        return _usage_error("--p and --depth must be >= 1")
    spec_penalties = getattr(args, "penalties", None)
    if spec_penalties == "equalities":
        args.penalties = "equalities_only"
    try:
        return args.func(args)
    except (ConstraintNotRepresentableError, mdl.PenaltyUnsupportedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
