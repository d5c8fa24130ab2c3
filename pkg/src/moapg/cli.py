"""Command line front end.

    moapg solve|front|rate|compare --config CONFIG.json [--out DIR] [--seed N] [--emit-svg]

Exit codes: 0 success (solve: tolerance met), 1 configuration error,
2 iteration budget exhausted (solve), 3 solver or reference-front failure.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import refdata
from .bench import BenchmarkSpec, front_svg, generate_front, make_problem
from .core import Problem, SolverConfig, admissible_s0_bound, problem_from_dict, validate_config
from .merit import ReferenceFront, build_reference_front, certify_rate
from .solver import RunTrace, run, run_baseline

log = logging.getLogger("moapg")

METHODS = ("accelerated", "pg", "fista")
EXIT_OK, EXIT_CONFIG, EXIT_MAXITER, EXIT_FAIL = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    problem: Problem
    bench: BenchmarkSpec | None
    start_box: tuple
    solver: SolverConfig
    method: str
    outputs: Path
    emit_svg: bool
    seed: int
    x0: np.ndarray
    raw: dict

    @property
    def L(self) -> float:
        return self.problem.lipschitz_global


DEFAULTS = {
    "solver": {"alpha": 4.0, "s0": None, "epsilon": 1e-7, "max_iters": 10_000,
               "stop_rule": "step-norm"},
    "method": "accelerated",
    "outputs": "out",
    "emit_svg": False,
    "seed": None,
    "x0": None,
    "workers": 1,
    "rate": {"reference": None, "ref_starts": 1000, "ref_seed": 12345, "ref_iters": 2000,
             "deflate_r": 1.0},
    "compare": {"methods": list(METHODS), "threshold": 1e-6, "baseline_step": None},
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def resolve_config(raw: dict, out: str | None = None, seed: int | None = None,
                   emit_svg: bool = False) -> ExperimentConfig:
    """Materialize defaults, apply command line overrides and validate."""
    if "problem" not in raw:
        raise ConfigError("config needs a 'problem' section")
    cfg = _merge(DEFAULTS, raw)
    prob = cfg["problem"]
    if ("benchmark" in prob) == ("inline" in prob):
        raise ConfigError("problem must give exactly one of 'benchmark' or 'inline'")
    if out is not None:
        cfg["outputs"] = out
    if emit_svg:
        cfg["emit_svg"] = True
    if seed is not None:
        cfg["seed"] = seed

    try:
        if "benchmark" in prob:
            b = dict(prob["benchmark"])
            if cfg["seed"] is None:
                cfg["seed"] = int(b.get("seed", 0))
            b["seed"] = cfg["seed"]
            bench = BenchmarkSpec(**b)
            prob["benchmark"] = bench.to_dict()
            problem = make_problem(bench)
            start_box = bench.start_box
        else:
            inline = prob["inline"]
            problem = problem_from_dict(inline)
            bench = None
            if cfg["seed"] is None:
                cfg["seed"] = 0
            if "start_box" in inline:
                start_box = tuple(inline["start_box"])
            elif cfg["x0"] is not None:
                start_box = (cfg["x0"], cfg["x0"])
            else:
                raise ConfigError("inline problems need 'start_box' or 'x0'")
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"invalid problem description: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    if problem.lipschitz_global is None or not problem.lipschitz_global > 0:
        raise ConfigError("problem needs a positive Lipschitz bound")
    sv = cfg["solver"]
    if sv["s0"] is None:
        sv["s0"] = 0.99 * admissible_s0_bound(float(sv["alpha"]), problem.lipschitz_global)
    try:
        solver = SolverConfig(alpha=float(sv["alpha"]), s0=float(sv["s0"]),
                              epsilon=float(sv["epsilon"]), max_iters=int(sv["max_iters"]),
                              stop_rule=sv["stop_rule"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solver section: {exc}") from exc
    report = validate_config(solver, problem.lipschitz_global)
    if not report:
        raise ConfigError(report.message)
    if cfg["method"] not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}")

    if cfg["x0"] is None:
        rng = np.random.default_rng(cfg["seed"])
        x0 = rng.uniform(*start_box, size=problem.n)
        if problem.box is not None:
            x0 = np.clip(x0, *problem.box)
        cfg["x0"] = x0.tolist()
    x0 = np.asarray(cfg["x0"], dtype=float)
    if x0.shape != (problem.n,):
        raise ConfigError(f"x0 must have dimension {problem.n}")
    if not problem.feasible(x0):
        raise ConfigError("x0 lies outside the box constraint")

    return ExperimentConfig(problem, bench, start_box, solver, cfg["method"],
                            Path(cfg["outputs"]), bool(cfg["emit_svg"]), int(cfg["seed"]),
                            x0, cfg)


def _run_method(ec: ExperimentConfig, method: str, ref=None, step=None) -> RunTrace:
    if method == "accelerated":
        return run(ec.problem, ec.solver, ec.x0, ref=ref)
    step = ec.solver.s0 if step is None else step
    return run_baseline(ec.problem, method, ec.x0, step, ec.solver.epsilon,
                        ec.solver.max_iters, stop_rule=ec.solver.stop_rule, ref=ref)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_solve(ec: ExperimentConfig) -> int:
    trace = _run_method(ec, ec.method)
    _write(ec.outputs / "trace.csv", trace.to_csv())
    summary = trace.summary()
    summary["resolved_config"] = ec.raw
    _write(ec.outputs / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"{trace.stopping_reason} after {trace.iterations} iterations")
    return {"tolerance-met": EXIT_OK, "max-iters": EXIT_MAXITER}.get(trace.stopping_reason,
                                                                     EXIT_FAIL)


def cmd_front(ec: ExperimentConfig) -> int:
    if ec.bench is None:
        raise ConfigError("front needs a benchmark problem")
    result = generate_front(ec.bench, ec.solver, workers=int(ec.raw.get("workers") or 1))
    _write(ec.outputs / "front.csv", result.to_csv())
    if ec.emit_svg:
        _write(ec.outputs / "front.svg", front_svg(result.front_F, title=ec.problem.name))
    kept = int(result.nondominated_mask.sum())
    print(f"{kept} nondominated points from {len(result.solutions)} starts")
    return EXIT_OK if kept else EXIT_FAIL


def _reference(ec: ExperimentConfig) -> ReferenceFront:
    rc = ec.raw["rate"]
    if rc["reference"]:
        return ReferenceFront.load(rc["reference"])
    if ec.bench is not None:
        frozen = refdata.lookup(ec.bench)
        if frozen is not None:
            return frozen
    return build_reference_front(ec.problem, *ec.start_box, num_starts=int(rc["ref_starts"]),
                                 seed=int(rc["ref_seed"]), max_iters=int(rc["ref_iters"]))


def cmd_rate(ec: ExperimentConfig) -> int:
    try:
        ref = _reference(ec)
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"reference front unavailable: {exc}", file=sys.stderr)
        return EXIT_FAIL
    trace = run(ec.problem, ec.solver, ec.x0)
    cert = certify_rate(trace, ref, ec.L, ec.solver.alpha,
                        deflate=float(ec.raw["rate"]["deflate_r"]))
    _write(ec.outputs / "rate.csv", cert.to_csv())
    doc = cert.to_dict()
    doc.update(iterations=trace.iterations, stopping_reason=trace.stopping_reason,
               reference_points=len(ref), reference_provenance=ref.provenance,
               resolved_config=ec.raw)
    _write(ec.outputs / "certificate.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"R_hat={cert.R_hat:.6g} violations={cert.violations}")
    return EXIT_OK if trace.stopping_reason != "subproblem-failure" else EXIT_FAIL


COMPARE_COLUMNS = ["method", "iterations_to_threshold", "reached", "total_iterations",
                   "final_step_norm", "stopping_reason", "wall_time_s"]


def compare_rows(ec: ExperimentConfig, ref: ReferenceFront) -> list:
    cc = ec.raw["compare"]
    threshold = float(cc["threshold"])
    rows = []
    for method in cc["methods"]:
        if method not in METHODS:
            raise ConfigError(f"unknown method {method!r}")
        t0 = time.perf_counter()
        trace = _run_method(ec, method, step=cc["baseline_step"])
        wall = time.perf_counter() - t0
        hits = [k for k, F in enumerate(trace.F_points) if ref.u0_from_values(F) < threshold]
        reached = bool(hits)
        last = trace.records[-1].step_norm if trace.records else 0.0
        rows.append({
            "method": method,
            "iterations_to_threshold": hits[0] if reached else ec.solver.max_iters,
            "reached": int(reached),
            "total_iterations": trace.iterations,
            "final_step_norm": format(last, ".17g"),
            "stopping_reason": trace.stopping_reason,
            "wall_time_s": format(wall, ".6f"),
        })
    return rows


def cmd_compare(ec: ExperimentConfig) -> int:
    import csv
    import io

    ref = _reference(ec)
    rows = compare_rows(ec, ref)
    buf = io.StringIO()
    w = csv.DictWriter(buf, COMPARE_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    _write(ec.outputs / "compare.csv", buf.getvalue())
    for r in rows:
        print(f"{r['method']}: {r['iterations_to_threshold']} iterations "
              f"({'reached' if r['reached'] else 'not reached'})")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "front": cmd_front, "rate": cmd_rate, "compare": cmd_compare}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="moapg", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON experiment description")
    p.add_argument("--out", help="output directory (overrides 'outputs')")
    p.add_argument("--seed", type=int, help="random seed (overrides 'seed')")
    p.add_argument("--emit-svg", action="store_true", help="write front.svg")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        raw = json.loads(Path(args.config).read_text())
        ec = resolve_config(raw, args.out, args.seed, args.emit_svg)
        return COMMANDS[args.command](ec)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
