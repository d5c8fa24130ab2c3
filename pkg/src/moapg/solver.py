"""Accelerated proximal gradient iteration for composite multiobjective problems.

The method keeps the pair ``(x_k, x_{k-1})`` and a step ``s_k``::

    y_k     = x_k + (k + a - 4) / (k + a - 1) * (x_k - x_{k-1})
    x_{k+1} = p_{s_k}(x_k, y_k)
    s_{k+1} = eta_k * s_k,   eta_k = (k + a - 2)^2 / ((k + a - 1)(k + a - 3))

No line search is used: with ``s_0`` admissible the schedule stays strictly
below ``1/L`` for every k.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import InfeasiblePointError, Problem, SolverConfig, validate_config
from .subproblem import SubproblemInput, solve

__all__ = [
    "IterationRecord",
    "RunTrace",
    "eta",
    "extrapolate",
    "extrapolation_coefficient",
    "fista_coefficients",
    "run",
    "run_baseline",
    "step_size",
]

log = logging.getLogger(__name__)

MONOTONE_TOL = 1e-9


def eta(k: int, alpha: float) -> float:
    """Multiplicative step update factor between ``s_k`` and ``s_{k+1}``."""
    denom = (k + alpha - 1) * (k + alpha - 3)
    if denom == 0:
        raise ZeroDivisionError("eta is undefined when k + alpha = 3; use step_size instead")
    return (k + alpha - 2) ** 2 / denom


def step_size(k: int, alpha: float, s0: float) -> float:
    """Closed form of the step schedule.

    For ``alpha > 3`` this is the telescoped product of ``eta``; for
    ``alpha = 3`` it is ``k/(k+1) * s0`` from ``k = 1`` on.
    """
    if k == 0:
        return s0
    if alpha > 3:
        return (alpha - 2) * (k + alpha - 3) / ((alpha - 3) * (k + alpha - 2)) * s0
    return k / (k + 1) * s0


def extrapolation_coefficient(k: int, alpha: float) -> float:
    return (k + alpha - 4) / (k + alpha - 1)


def extrapolate(x_curr, x_prev, k: int, alpha: float) -> np.ndarray:
    x_curr = np.asarray(x_curr, dtype=float)
    return x_curr + extrapolation_coefficient(k, alpha) * (x_curr - np.asarray(x_prev, dtype=float))


def fista_coefficients(count: int) -> np.ndarray:
    """Momentum ``(t_{k+1} - 1) / t_{k+2}`` for iterations ``k = 0..count-1`` with ``t_1 = 1``."""
    t = [1.0]
    for _ in range(count + 1):
        t.append(0.5 * (1 + math.sqrt(1 + 4 * t[-1] ** 2)))
    return np.array([(t[k] - 1) / t[k + 1] for k in range(count)])


@dataclass
class IterationRecord:
    """Iteration ``k``: step and momentum used, and the resulting ``x_{k+1}``."""

    k: int
    s: float
    gamma: float
    F: np.ndarray
    step_norm: float
    merit: Optional[float] = None


@dataclass
class RunTrace:
    m: int
    records: list = field(default_factory=list)
    points: list = field(default_factory=list)
    bases: list = field(default_factory=list)
    F_points: list = field(default_factory=list)
    stopping_reason: str = "max-iters"
    method: str = "accelerated"
    config: dict = field(default_factory=dict)
    monotone: bool = True

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def x0(self) -> np.ndarray:
        return self.points[0]

    @property
    def x_final(self) -> np.ndarray:
        return self.points[-1]

    @property
    def steps(self) -> np.ndarray:
        return np.array([r.s for r in self.records])

    def columns(self) -> list:
        return (["k", "s_k", "gamma_k"] + [f"F_{i + 1}" for i in range(self.m)]
                + ["step_norm", "merit"])

    def rows(self) -> list:
        out = []
        for r in self.records:
            merit = "" if r.merit is None else _fmt(r.merit)
            out.append([str(r.k), _fmt(r.s), _fmt(r.gamma)] + [_fmt(v) for v in r.F]
                       + [_fmt(r.step_norm), merit])
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns())
        writer.writerows(self.rows())
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "method": self.method,
            "config": self.config,
            "stopping_reason": self.stopping_reason,
            "iterations": self.iterations,
            "x0": self.x0.tolist(),
            "final_point": self.x_final.tolist(),
            "final_F": np.asarray(self.F_points[-1]).tolist(),
            "monotone": self.monotone,
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _iterate(problem: Problem, x0, *, max_iters: int, epsilon: float, stop_rule: str,
             step_at: Callable, coef_at: Callable, method: str, config: dict,
             ref=None, tol: float = 1e-8, max_inner: int = 5000) -> RunTrace:
    x = problem.check_point(x0).copy()
    if not problem.feasible(x):
        raise InfeasiblePointError("starting point must lie in the domain of every g_i")
    trace = RunTrace(m=problem.m, method=method, config=config)
    F0 = problem.values(x)
    trace.points.append(x)
    trace.F_points.append(F0)
    x_prev = x
    for k in range(max_iters):
        s = step_at(k)
        if stop_rule == "subproblem-residual":
            probe = solve(problem, SubproblemInput(x, x, s), tol, max_inner)
            if not probe.converged:
                trace.stopping_reason = "subproblem-failure"
                break
            if float(np.max(np.abs(probe.z - x))) < epsilon:
                trace.stopping_reason = "tolerance-met"
                break
        gamma = coef_at(k)
        y = x + gamma * (x - x_prev)
        sol = solve(problem, SubproblemInput(x, y, s), tol, max_inner)
        if not sol.converged:
            log.warning("subproblem failed at k=%d (gap %.3g)", k, sol.gap)
            trace.stopping_reason = "subproblem-failure"
            break
        x_new = sol.z
        F_new = problem.values(x_new)
        step_norm = float(np.linalg.norm(x_new - x))
        merit = None if ref is None else ref.u0_from_values(F_new)
        trace.records.append(IterationRecord(k, s, gamma, F_new, step_norm, merit))
        trace.bases.append(y)
        trace.points.append(x_new)
        trace.F_points.append(F_new)
        x_prev, x = x, x_new
        if stop_rule == "step-norm" and step_norm < epsilon:
            trace.stopping_reason = "tolerance-met"
            break

    excess = float(np.max(np.asarray(trace.F_points) - F0))
    trace.monotone = excess <= MONOTONE_TOL
    if not trace.monotone:
        log.warning("F_i(x_k) exceeded F_i(x_0) by %.3g", excess)
    return trace


def run(problem: Problem, config: SolverConfig, x0, *, ref=None, L: float | None = None,
        tol: float = 1e-8, max_inner: int = 5000) -> RunTrace:
    """Run the accelerated method from ``x0``.

    ``ref`` is an optional reference front; when given, each record carries
    a lower estimate of the merit function at the new iterate.
    """
    L = problem.lipschitz_global if L is None else L
    report = validate_config(config, L)
    if not report:
        raise ValueError(report.message)
    alpha, s0 = config.alpha, config.s0
    return _iterate(
        problem, x0, max_iters=int(config.max_iters), epsilon=config.epsilon,
        stop_rule=config.stop_rule,
        step_at=lambda k: step_size(k, alpha, s0),
        coef_at=lambda k: extrapolation_coefficient(k, alpha),
        method="accelerated", config=config.to_dict(), ref=ref, tol=tol, max_inner=max_inner)


def run_baseline(problem: Problem, variant: str, x0, step: float, epsilon: float = 1e-7,
                 max_iters: int = 10_000, *, stop_rule: str = "step-norm", ref=None,
                 L: float | None = None, tol: float = 1e-8, max_inner: int = 5000) -> RunTrace:
    """Constant-step comparison methods sharing the same subproblem.

    ``variant="pg"`` uses ``y_k = x_k``; ``variant="fista"`` uses the classical
    ``t``-sequence momentum.
    """
    L = problem.lipschitz_global if L is None else L
    if not step > 0 or (L is not None and L > 0 and step > 1.0 / L):
        raise ValueError(f"baseline step must satisfy 0 < step <= 1/L (got {step}, L={L})")
    if variant == "pg":
        coef_at = lambda k: 0.0  # noqa: E731
    elif variant == "fista":
        coefs = fista_coefficients(int(max_iters))
        coef_at = lambda k: float(coefs[k])  # noqa: E731
    else:
        raise ValueError(f"unknown baseline {variant!r}")
    config = {"step": step, "epsilon": epsilon, "max_iters": max_iters, "stop_rule": stop_rule}
    return _iterate(
        problem, x0, max_iters=int(max_iters), epsilon=epsilon, stop_rule=stop_rule,
        step_at=lambda k: step, coef_at=coef_at, method=variant, config=config,
        ref=ref, tol=tol, max_inner=max_inner)
