"""Bi-objective benchmark problems and multi-start front generation."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from .core import NonsmoothTerm, Problem, QuadraticObjective, SolverConfig
from .solver import run

__all__ = [
    "BenchmarkSpec",
    "FrontResult",
    "StartResult",
    "analytic_front",
    "default_box",
    "front_svg",
    "generate_front",
    "hausdorff",
    "directed_distance",
    "distance_to_polyline",
    "make_problem",
    "nondominated_filter",
]

NAMES = ("BK1", "JOS1", "SP1")


def default_box(name: str, n: int = 2):
    if name == "BK1":
        return [-5.0, -5.0], [10.0, 10.0]
    if name == "JOS1":
        return [-10.0] * n, [10.0] * n
    if name == "SP1":
        return [-5.0, -5.0], [5.0, 5.0]
    raise ValueError(f"unknown benchmark {name!r}")


@dataclass
class BenchmarkSpec:
    name: str = "BK1"
    n: int = 2
    l1_weight: float = 0.1
    start_box: tuple = None
    num_starts: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.name not in NAMES:
            raise ValueError(f"unknown benchmark {self.name!r}; expected one of {NAMES}")
        if self.name != "JOS1":
            self.n = 2
        if not self.n >= 1:
            raise ValueError("n must be >= 1")
        if not self.l1_weight >= 0:
            raise ValueError("l1_weight must be nonnegative")
        if int(self.num_starts) != self.num_starts or self.num_starts < 1:
            raise ValueError("num_starts must be a positive integer")
        if self.start_box is None:
            self.start_box = default_box(self.name, self.n)
        lo, hi = (np.asarray(b, dtype=float) for b in self.start_box)
        if lo.shape != (self.n,) or hi.shape != (self.n,):
            raise ValueError("start_box bounds must have dimension n")
        if not np.all(lo < hi):
            raise ValueError("start_box needs lower < upper componentwise")
        self.start_box = (lo.tolist(), hi.tolist())

    def to_dict(self) -> dict:
        return {"name": self.name, "n": self.n, "l1_weight": self.l1_weight,
                "start_box": [list(self.start_box[0]), list(self.start_box[1])],
                "num_starts": self.num_starts, "seed": self.seed}


def make_problem(spec: BenchmarkSpec) -> Problem:
    """BK1, JOS1 or SP1 with ``g_i = l1_weight * ||x||_1`` on both objectives.

    BK1:  f1 = x1^2 + x2^2,              f2 = (x1-5)^2 + (x2-5)^2
    JOS1: f1 = (1/n) sum x_j^2,          f2 = (1/n) sum (x_j-2)^2
    SP1:  f1 = (x1-1)^2 + (x1-x2)^2,     f2 = (x2-3)^2 + (x1-x2)^2
    """
    name, n = spec.name, spec.n
    if name == "BK1":
        I = np.eye(2)
        smooth = [QuadraticObjective(2 * I), QuadraticObjective(2 * I, [-10.0, -10.0], 50.0)]
    elif name == "JOS1":
        I = np.eye(n)
        smooth = [QuadraticObjective(2.0 / n * I),
                  QuadraticObjective(2.0 / n * I, np.full(n, -4.0 / n), 4.0)]
    elif name == "SP1":
        smooth = [QuadraticObjective([[4.0, -2.0], [-2.0, 2.0]], [-2.0, 0.0], 1.0),
                  QuadraticObjective([[2.0, -2.0], [-2.0, 4.0]], [0.0, -6.0], 9.0)]
    else:
        raise ValueError(f"unknown benchmark {name!r}")
    g = NonsmoothTerm.l1(spec.l1_weight) if spec.l1_weight > 0 else NonsmoothTerm.zero()
    L = _analytic_L(name, n)
    label = name + (f"+l1({spec.l1_weight:g})" if spec.l1_weight > 0 else "")
    return Problem(n, smooth, [g, g], name=label, lipschitz_global=L)


def _analytic_L(name: str, n: int) -> float:
    if name == "BK1":
        return 2.0
    if name == "JOS1":
        return 2.0 / n
    # both SP1 Hessians have eigenvalues 3 +/- sqrt(5)
    return 3.0 + math.sqrt(5.0)


def analytic_front(name: str, n: int = 2, num: int = 10_001) -> np.ndarray:
    """Dense sample of the Pareto front of the smooth (``l1_weight = 0``) case."""
    if name == "BK1":
        t = np.linspace(0.0, 5.0, num)
        return np.column_stack([2 * t ** 2, 2 * (t - 5) ** 2])
    if name == "JOS1":
        t = np.linspace(0.0, 2.0, num)
        return np.column_stack([t ** 2, (t - 2) ** 2])
    if name == "SP1":
        xs = sp1_pareto_set(num)
        f1 = (xs[:, 0] - 1) ** 2 + (xs[:, 0] - xs[:, 1]) ** 2
        f2 = (xs[:, 1] - 3) ** 2 + (xs[:, 0] - xs[:, 1]) ** 2
        return np.column_stack([f1, f2])
    raise ValueError(f"unknown benchmark {name!r}")


def sp1_pareto_set(num: int = 10_001) -> np.ndarray:
    """Minimizers of ``w f1 + (1-w) f2`` for ``w`` in [0, 1]."""
    A1 = np.array([[4.0, -2.0], [-2.0, 2.0]])
    A2 = np.array([[2.0, -2.0], [-2.0, 4.0]])
    b1, b2 = np.array([-2.0, 0.0]), np.array([0.0, -6.0])
    out = []
    for w in np.linspace(0.0, 1.0, num):
        out.append(np.linalg.solve(w * A1 + (1 - w) * A2, -(w * b1 + (1 - w) * b2)))
    return np.array(out)


def nondominated_filter(points, dedup_tol: float | None = None) -> np.ndarray:
    """Mask of points not strictly dominated in every objective by another point.

    With ``dedup_tol`` set, a point within that sup-distance of an earlier
    kept point is also dropped.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.size == 0:
        return np.zeros(0, dtype=bool)
    dominated = np.any(np.all(P[:, None, :] < P[None, :, :], axis=2), axis=0)
    mask = ~dominated
    if dedup_tol is not None:
        for j in np.flatnonzero(mask):
            earlier = np.flatnonzero(mask[:j])
            if earlier.size and np.any(np.max(np.abs(P[earlier] - P[j]), axis=1) <= dedup_tol):
                mask[j] = False
    return mask


def directed_distance(A, B) -> float:
    """``max_a min_b ||a - b||``."""
    A, B = np.atleast_2d(A), np.atleast_2d(B)
    best = np.full(len(A), np.inf)
    for start in range(0, len(B), 2048):
        chunk = B[start:start + 2048]
        d = np.sqrt(np.sum((A[:, None, :] - chunk[None, :, :]) ** 2, axis=2))
        best = np.minimum(best, d.min(axis=1))
    return float(best.max())


def distance_to_polyline(P, C) -> np.ndarray:
    """Euclidean distance of each row of ``P`` to the polyline through the rows of ``C``."""
    P, C = np.atleast_2d(P), np.atleast_2d(C)
    a, d = C[:-1], np.diff(C, axis=0)
    dd = np.maximum(np.sum(d * d, axis=1), 1e-300)
    out = np.empty(len(P))
    for i, p in enumerate(P):
        t = np.clip(np.sum((p - a) * d, axis=1) / dd, 0.0, 1.0)
        out[i] = np.sqrt(np.min(np.sum((a + t[:, None] * d - p) ** 2, axis=1)))
    return out


def hausdorff(A, B) -> float:
    """Symmetric Hausdorff distance between two finite point sets."""
    return max(directed_distance(A, B), directed_distance(B, A))


@dataclass
class StartResult:
    x0: np.ndarray
    x_final: np.ndarray
    F: np.ndarray
    iterations: int
    stopping_reason: str


@dataclass
class FrontResult:
    solutions: list
    nondominated_mask: np.ndarray
    spec: dict = field(default_factory=dict)

    @property
    def front_F(self) -> np.ndarray:
        return np.array([s.F for s, k in zip(self.solutions, self.nondominated_mask) if k])

    @property
    def front_x(self) -> np.ndarray:
        return np.array([s.x_final for s, k in zip(self.solutions, self.nondominated_mask) if k])

    def to_csv(self) -> str:
        kept = [s for s, k in zip(self.solutions, self.nondominated_mask) if k]
        n = len(self.solutions[0].x_final) if self.solutions else 0
        m = len(self.solutions[0].F) if self.solutions else 0
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x_{j + 1}" for j in range(n)] + [f"F_{i + 1}" for i in range(m)]
                   + ["iterations"])
        for s in kept:
            w.writerow([format(v, ".17g") for v in s.x_final]
                       + [format(v, ".17g") for v in s.F] + [str(s.iterations)])
        return buf.getvalue()


def _solve_start(args):
    problem, config, x0 = args
    try:
        tr = run(problem, config, x0)
        return StartResult(x0, tr.x_final, np.asarray(tr.F_points[-1]), tr.iterations,
                           tr.stopping_reason)
    except (ValueError, ArithmeticError) as exc:
        return StartResult(x0, x0, problem.values(x0), 0, f"error: {exc}")


def sample_starts(spec: BenchmarkSpec) -> np.ndarray:
    rng = np.random.default_rng(spec.seed)
    lo, hi = spec.start_box
    return rng.uniform(lo, hi, size=(spec.num_starts, spec.n))


def generate_front(spec: BenchmarkSpec, config: SolverConfig, workers: int | None = None,
                   problem: Problem | None = None) -> FrontResult:
    """Run the accelerated method from seeded uniform starts and keep the
    weakly nondominated (deduplicated) final objective vectors."""
    problem = make_problem(spec) if problem is None else problem
    jobs = [(problem, config, x0) for x0 in sample_starts(spec)]
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            sols = list(pool.map(_solve_start, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        sols = [_solve_start(j) for j in jobs]
    ok = np.array([not s.stopping_reason.startswith("error") for s in sols])
    F = np.array([s.F for s in sols])
    mask = np.zeros(len(sols), dtype=bool)
    if ok.any():
        mask[ok] = nondominated_filter(F[ok], dedup_tol=1e-9)
    return FrontResult(sols, mask, spec.to_dict())


def front_svg(F, width: int = 480, height: int = 480, title: str = "") -> str:
    """Scatter plot of a bi-objective front, one circle per row."""
    F = np.atleast_2d(np.asarray(F, dtype=float))
    pad = 40
    lo, hi = F.min(axis=0), F.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<title>{escape(title)}</title>',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
        'fill="none" stroke="black"/>',
        f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle">F_1</text>',
        f'<text x="12" y="{height / 2}" text-anchor="middle">F_2</text>',
    ]
    for f in F:
        u = (f[:2] - lo[:2]) / span[:2]
        cx = pad + u[0] * (width - 2 * pad)
        cy = height - pad - u[1] * (height - 2 * pad)
        parts.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="2.5" fill="steelblue"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
