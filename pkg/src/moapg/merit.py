"""Merit function estimates and convergence-rate diagnostics.

The merit function ``u0(x) = sup_z min_i [F_i(x) - F_i(z)]`` is zero exactly
at weakly Pareto points. The sup over all of ``R^n`` is not computable, so
it is bounded from below by a finite reference front. Because the rate
bound is an upper bound on ``u0``, a lower estimate still gives a valid
check of it.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import InfeasiblePointError, Problem
from .solver import RunTrace, run_baseline

__all__ = [
    "Prop2Report",
    "RateCertificate",
    "ReferenceFront",
    "build_reference_front",
    "certify_rate",
    "check_prop2",
    "empirical_R",
    "rho",
    "sigma",
    "u0_lower_bound",
]


@dataclass
class ReferenceFront:
    """Finite sample of approximate Pareto solutions ``(z, F(z))``."""

    xs: np.ndarray
    Fs: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.xs = np.atleast_2d(np.asarray(self.xs, dtype=float))
        self.Fs = np.atleast_2d(np.asarray(self.Fs, dtype=float))
        if len(self.xs) == 0 or len(self.xs) != len(self.Fs):
            raise ValueError("reference front must be nonempty with one F row per point")

    def __len__(self):
        return len(self.xs)

    @classmethod
    def from_points(cls, problem: Problem, xs, provenance: dict | None = None) -> "ReferenceFront":
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        return cls(xs, np.array([problem.values(x) for x in xs]), dict(provenance or {}))

    def u0_from_values(self, Fx) -> float:
        """``max(0, max_z min_i [Fx_i - F_i(z)])``; the zero is the ``z = x`` term."""
        gaps = np.min(np.asarray(Fx, dtype=float) - self.Fs, axis=1)
        return max(0.0, float(gaps.max()))

    def to_csv(self) -> str:
        n, m = self.xs.shape[1], self.Fs.shape[1]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x_{j + 1}" for j in range(n)] + [f"F_{i + 1}" for i in range(m)])
        for x, F in zip(self.xs, self.Fs):
            w.writerow([format(v, ".17g") for v in np.concatenate([x, F])])
        return buf.getvalue()

    def save(self, path) -> None:
        path = Path(path)
        path.write_text(self.to_csv())
        path.with_suffix(".json").write_text(json.dumps(self.provenance, indent=2, sort_keys=True))

    @classmethod
    def load(cls, path) -> "ReferenceFront":
        path = Path(path)
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], np.array(rows[1:], dtype=float)
        n = sum(1 for h in header if h.startswith("x_"))
        side = path.with_suffix(".json")
        prov = json.loads(side.read_text()) if side.exists() else {}
        return cls(body[:, :n], body[:, n:], prov)


def sigma(problem: Problem, x, z) -> float:
    """``min_i [F_i(x) - F_i(z)]``."""
    x, z = problem.check_point(x), problem.check_point(z)
    if not (problem.feasible(x) and problem.feasible(z)):
        raise InfeasiblePointError("sigma needs finite F at both points")
    return float(np.min(problem.values(x) - problem.values(z)))


def rho(x_p, x_prev, z, p: int, alpha: float) -> float:
    """``||(p + a - 2) x_p - (p + a - 4) x_{p-1} - z||^2``."""
    v = (p + alpha - 2) * np.asarray(x_p, float) - (p + alpha - 4) * np.asarray(x_prev, float)
    return float(np.sum((v - np.asarray(z, float)) ** 2))


def u0_lower_bound(problem: Problem, x, ref: ReferenceFront) -> float:
    return ref.u0_from_values(problem.values(problem.check_point(x)))


def empirical_R(problem: Problem, x0, x1, ref: ReferenceFront) -> float:
    """``max_z 4||2 x0 - z||^2 + ||x1 - z||^2`` over the reference points."""
    return _r_hat(problem.check_point(x0), problem.check_point(x1), ref.xs)


def _r_hat(x0, x1, zs) -> float:
    vals = 4 * np.sum((2 * x0 - zs) ** 2, axis=1) + np.sum((x1 - zs) ** 2, axis=1)
    return float(vals.max())


@dataclass
class RateCertificate:
    """Merit estimates against ``L * R / (k + alpha - 1)^2`` along a run.

    ``violations`` counts iterates exceeding that bound.
    ``statement_violations`` counts those exceeding the looser
    ``L (alpha-1)^2 R / (2 (k + alpha - 1)^2)``.
    """

    series: list
    R_hat: float
    L: float
    alpha: float
    violations: int
    statement_violations: int
    deflate: float = 1.0

    @property
    def min_u0(self) -> float:
        return min(u for _, u, _ in self.series) if self.series else 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "u0_lower", "bound"])
        for k, u, b in self.series:
            w.writerow([str(k), format(u, ".17g"), format(b, ".17g")])
        return buf.getvalue()

    def to_dict(self) -> dict:
        a = self.alpha
        return {
            "R_hat": self.R_hat,
            "L": self.L,
            "alpha": a,
            "deflate": self.deflate,
            "violations": self.violations,
            "statement_violations": self.statement_violations,
            "bound_constant": self.L * self.R_hat,
            "statement_bound_constant": self.L * (a - 1) ** 2 * self.R_hat / 2,
            "points_checked": len(self.series),
        }


def certify_rate(trace: RunTrace, ref: ReferenceFront, L: float, alpha: float,
                 deflate: float = 1.0) -> RateCertificate:
    """Check the merit estimate of every iterate against the rate bound.

    ``deflate`` multiplies the estimated R; values below one serve as a
    negative control of the checker.
    """
    x0 = trace.points[0]
    x1 = trace.points[1] if len(trace.points) > 1 else x0
    R_hat = _r_hat(x0, x1, ref.xs)
    R_used = R_hat * deflate
    series, bad, bad_stmt = [], 0, 0
    for k, Fx in enumerate(trace.F_points):
        u = ref.u0_from_values(Fx)
        bound = L * R_used / (k + alpha - 1) ** 2
        series.append((k, u, bound))
        bad += u > bound
        bad_stmt += u > bound * (alpha - 1) ** 2 / 2
    return RateCertificate(series, R_hat, L, alpha, int(bad), int(bad_stmt), deflate)


@dataclass
class Prop2Report:
    """Per-iteration margins of the two sigma inequalities (negative = violated)."""

    decrease: np.ndarray
    upper: np.ndarray
    decrease_violations: int
    upper_violations: int

    @property
    def checked(self) -> int:
        return len(self.decrease)

    @property
    def worst_decrease(self) -> float:
        return float(self.decrease.min()) if self.checked else 0.0

    @property
    def worst_upper(self) -> float:
        return float(self.upper.min()) if self.checked else 0.0

    @property
    def ok(self) -> bool:
        return self.decrease_violations == 0 and self.upper_violations == 0


def check_prop2(trace: RunTrace, problem: Problem, z, rel_tol: float = 1e-9) -> Prop2Report:
    """Verify along the trajectory that, for the given z,

    ``sigma_k - sigma_{k+1} >= -(2<y_k - x_{k+1}, y_k - x_k> + ||x_{k+1} - y_k||^2) / (2 s_k)``
    and
    ``sigma_{k+1} <= (2<y_k - x_{k+1}, y_k - z> - ||x_{k+1} - y_k||^2) / (2 s_k)``.

    Each margin is allowed a slack of ``rel_tol * (1 + magnitudes of both sides)``.
    """
    z = problem.check_point(z)
    if not trace.records:
        empty = np.zeros(0)
        return Prop2Report(empty, empty, 0, 0)
    X = np.asarray(trace.points)
    Y = np.asarray(trace.bases)
    S = trace.steps
    sig = np.min(np.asarray(trace.F_points) - problem.values(z), axis=1)
    xk, xk1 = X[:-1], X[1:]
    d = Y - xk1
    sq = np.sum(d ** 2, axis=1)
    rhs_dec = -(2 * np.sum(d * (Y - xk), axis=1) + sq) / (2 * S)
    rhs_up = (2 * np.sum(d * (Y - z), axis=1) - sq) / (2 * S)
    m_dec = (sig[:-1] - sig[1:]) - rhs_dec
    m_up = rhs_up - sig[1:]
    tol_dec = rel_tol * (1 + np.abs(sig[:-1]) + np.abs(sig[1:]) + np.abs(rhs_dec))
    tol_up = rel_tol * (1 + np.abs(sig[1:]) + np.abs(rhs_up))
    return Prop2Report(m_dec, m_up, int(np.sum(m_dec < -tol_dec)), int(np.sum(m_up < -tol_up)))


def build_reference_front(problem: Problem, lower, upper, num_starts: int = 1000,
                          seed: int = 0, step: float | None = None, epsilon: float = 1e-10,
                          max_iters: int = 2000) -> ReferenceFront:
    """Long constant-step proximal gradient runs from uniform starts, filtered
    to the weakly nondominated subset."""
    from .bench import nondominated_filter

    lower, upper = np.asarray(lower, float), np.asarray(upper, float)
    rng = np.random.default_rng(seed)
    starts = rng.uniform(lower, upper, size=(num_starts, problem.n))
    L = problem.lipschitz_global
    step = 1.0 / L if step is None else step
    finals = []
    for x0 in starts:
        if problem.box is not None:
            x0 = np.clip(x0, *problem.box)
        tr = run_baseline(problem, "pg", x0, step, epsilon, max_iters)
        finals.append(tr.x_final)
    xs = np.array(finals)
    Fs = np.array([problem.values(x) for x in xs])
    mask = nondominated_filter(Fs, dedup_tol=1e-9)
    prov = {
        "method": "pg",
        "problem": problem.name,
        "n": problem.n,
        "num_starts": num_starts,
        "seed": seed,
        "step": step,
        "epsilon": epsilon,
        "max_iters": max_iters,
        "start_box": [lower.tolist(), upper.tolist()],
        "kept": int(mask.sum()),
    }
    return ReferenceFront(xs[mask], Fs[mask], prov)
