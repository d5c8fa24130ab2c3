"""Problem model for composite multiobjective optimization.

A problem has ``m`` objectives ``F_i = f_i + g_i`` over ``R^n``, where each
``f_i`` is convex and smooth with Lipschitz gradient and each ``g_i`` is a
convex term with a closed-form proximal operator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ConfigReport",
    "DimensionError",
    "InfeasiblePointError",
    "NonsmoothTerm",
    "ObjectiveVector",
    "Problem",
    "QuadraticObjective",
    "SmoothObjective",
    "SolverConfig",
    "admissible_s0_bound",
    "evaluate_F",
    "lipschitz_bound",
    "problem_from_dict",
    "problem_from_json",
    "validate_config",
]

POWER_SAFETY = 1.05
STOP_RULES = ("step-norm", "subproblem-residual")


class DimensionError(ValueError):
    pass


class InfeasiblePointError(ValueError):
    """Raised when a point lies outside the box of a box-indicator term."""


class SmoothObjective:
    """A convex smooth objective given by value and gradient callables.

    ``lipschitz`` is a known bound on the gradient's Lipschitz constant, or
    ``None`` when unknown.
    """

    hessian: Optional[np.ndarray] = None

    def __init__(self, fun: Callable, grad: Callable, lipschitz: Optional[float] = None):
        self._fun = fun
        self._grad = grad
        self.lipschitz = lipschitz

    def value(self, x: np.ndarray) -> float:
        return float(self._fun(x))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self._grad(x), dtype=float)


class QuadraticObjective(SmoothObjective):
    """``f(x) = 0.5 x^T A x + b^T x + c`` with symmetric positive semidefinite ``A``."""

    def __init__(self, A, b=None, c: float = 0.0):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise DimensionError(f"Hessian must be square, got {A.shape}")
        if not np.allclose(A, A.T):
            raise ValueError("Hessian must be symmetric")
        self.hessian = A
        self.b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=float)
        if self.b.shape != (A.shape[0],):
            raise DimensionError("linear term does not match Hessian")
        self.c = float(c)
        self.lipschitz = float(max(np.linalg.eigvalsh(A).max(), 0.0))

    @property
    def n(self) -> int:
        return self.hessian.shape[0]

    def value(self, x):
        return float(0.5 * x @ self.hessian @ x + self.b @ x + self.c)

    def gradient(self, x):
        return self.hessian @ x + self.b

    def to_dict(self) -> dict:
        return {"kind": "quadratic", "A": self.hessian.tolist(), "b": self.b.tolist(), "c": self.c}


@dataclass(frozen=True)
class NonsmoothTerm:
    """One of the supported prox-friendly terms.

    ``kind`` is ``"zero"``, ``"l1"`` (``weight * ||x||_1``) or ``"box"``
    (indicator of ``lower <= x <= upper``).
    """

    kind: str = "zero"
    weight: float = 0.0
    lower: Optional[tuple] = None
    upper: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("zero", "l1", "box"):
            raise ValueError(f"unknown nonsmooth kind {self.kind!r}")
        if self.kind == "l1" and not self.weight >= 0:
            raise ValueError("l1 weight must be nonnegative")
        if self.kind == "box":
            if self.lower is None or self.upper is None:
                raise ValueError("box term needs lower and upper bounds")
            lo, hi = np.asarray(self.lower, float), np.asarray(self.upper, float)
            if lo.shape != hi.shape or np.any(lo > hi):
                raise ValueError("box bounds must satisfy lower <= upper")
            object.__setattr__(self, "lower", tuple(lo.tolist()))
            object.__setattr__(self, "upper", tuple(hi.tolist()))

    @classmethod
    def zero(cls) -> "NonsmoothTerm":
        return cls("zero")

    @classmethod
    def l1(cls, weight: float) -> "NonsmoothTerm":
        return cls("l1", weight=float(weight))

    @classmethod
    def box(cls, lower, upper) -> "NonsmoothTerm":
        return cls("box", lower=tuple(np.ravel(lower)), upper=tuple(np.ravel(upper)))

    @property
    def family(self) -> str:
        if self.kind == "l1" and self.weight == 0:
            return "zero"
        return self.kind

    def contains(self, x: np.ndarray) -> bool:
        if self.kind != "box":
            return True
        return bool(np.all(x >= np.asarray(self.lower)) and np.all(x <= np.asarray(self.upper)))

    def finite_value(self, x: np.ndarray) -> float:
        """Value of the term ignoring the indicator part."""
        if self.kind == "l1":
            return self.weight * float(np.abs(x).sum())
        return 0.0

    def value(self, x: np.ndarray) -> float:
        if not self.contains(x):
            return math.inf
        return self.finite_value(x)

    def to_dict(self) -> dict:
        if self.kind == "l1":
            return {"kind": "l1", "weight": self.weight}
        if self.kind == "box":
            return {"kind": "box", "lower": list(self.lower), "upper": list(self.upper)}
        return {"kind": "zero"}


@dataclass(frozen=True)
class ObjectiveVector:
    """F(x) together with a feasibility flag.

    When ``feasible`` is false some box indicator is infinite at x; ``values``
    then hold only the finite parts.
    """

    values: np.ndarray
    feasible: bool = True

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


@dataclass(frozen=True)
class Problem:
    """Composite multiobjective problem ``min (f_1+g_1, ..., f_m+g_m)``."""

    n: int
    smooth: tuple
    nonsmooth: tuple
    name: str = "custom"
    lipschitz_global: float = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "smooth", tuple(self.smooth))
        object.__setattr__(self, "nonsmooth", tuple(self.nonsmooth))
        if len(self.smooth) == 0 or len(self.smooth) != len(self.nonsmooth):
            raise DimensionError("need m >= 1 smooth objectives paired with m nonsmooth terms")
        for f in self.smooth:
            if isinstance(f, QuadraticObjective) and f.n != self.n:
                raise DimensionError(f"objective dimension {f.n} != problem dimension {self.n}")
        for g in self.nonsmooth:
            if g.kind == "box" and len(g.lower) != self.n:
                raise DimensionError("box bounds do not match problem dimension")
        families = {g.family for g in self.nonsmooth} - {"zero"}
        if len(families) > 1:
            raise ValueError("nonsmooth terms of one problem must share a family (l1 or box)")
        if self.lipschitz_global is None:
            bounds = [f.lipschitz for f in self.smooth]
            L = None if any(b is None for b in bounds) else float(max(bounds))
            object.__setattr__(self, "lipschitz_global", L)

    @property
    def m(self) -> int:
        return len(self.smooth)

    @property
    def family(self) -> str:
        families = {g.family for g in self.nonsmooth} - {"zero"}
        return families.pop() if families else "zero"

    @property
    def l1_weights(self) -> np.ndarray:
        return np.array([g.weight if g.kind == "l1" else 0.0 for g in self.nonsmooth])

    @property
    def box(self):
        """Intersection of all box terms as ``(lower, upper)``, or ``None``."""
        boxes = [g for g in self.nonsmooth if g.kind == "box"]
        if not boxes:
            return None
        lo = np.max([g.lower for g in boxes], axis=0)
        hi = np.min([g.upper for g in boxes], axis=0)
        return lo, hi

    def check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimensionError(f"expected a point of dimension {self.n}, got shape {x.shape}")
        return x

    def smooth_values(self, x: np.ndarray) -> np.ndarray:
        return np.array([f.value(x) for f in self.smooth])

    def gradients(self, x: np.ndarray) -> np.ndarray:
        """Gradients stacked as an ``(m, n)`` array."""
        return np.array([f.gradient(x) for f in self.smooth])

    def nonsmooth_values(self, x: np.ndarray) -> np.ndarray:
        return np.array([g.finite_value(x) for g in self.nonsmooth])

    def feasible(self, x: np.ndarray) -> bool:
        return all(g.contains(x) for g in self.nonsmooth)

    def values(self, x: np.ndarray) -> np.ndarray:
        """F(x) as a plain array; raises when x violates a box term."""
        if not self.feasible(x):
            raise InfeasiblePointError("point lies outside a box-indicator term")
        return self.smooth_values(x) + self.nonsmooth_values(x)

    def to_dict(self) -> dict:
        objectives = []
        for f, g in zip(self.smooth, self.nonsmooth):
            if not isinstance(f, QuadraticObjective):
                raise TypeError("only quadratic objectives serialize to JSON")
            objectives.append({"smooth": f.to_dict(), "nonsmooth": g.to_dict()})
        return {"name": self.name, "n": self.n, "objectives": objectives}


def evaluate_F(problem: Problem, x) -> ObjectiveVector:
    """Evaluate ``f_i(x) + g_i(x)`` for every objective."""
    x = problem.check_point(x)
    vals = problem.smooth_values(x) + problem.nonsmooth_values(x)
    return ObjectiveVector(vals, problem.feasible(x))


def lipschitz_bound(problem: Problem, mode: str = "analytic", trials: int = 5,
                    iters: int = 100, seed: int = 0) -> float:
    """Upper bound on ``max_i L_i`` for the smooth parts.

    ``mode="analytic"`` takes the largest Hessian eigenvalue of quadratic
    objectives. ``mode="power-iteration"`` runs power iteration on
    gradient differences (exact Hessian-vector products for quadratics) and
    inflates the estimate by 5%.
    """
    if mode == "analytic":
        out = 0.0
        for f in problem.smooth:
            if f.hessian is None:
                raise TypeError("analytic Lipschitz bound needs quadratic objectives")
            out = max(out, float(np.linalg.eigvalsh(f.hessian).max()))
        return max(out, 0.0)
    if mode != "power-iteration":
        raise ValueError(f"unknown mode {mode!r}")

    rng = np.random.default_rng(seed)
    best = 0.0
    for f in problem.smooth:
        for _ in range(trials):
            base = rng.standard_normal(problem.n)
            g0 = f.gradient(base)
            v = rng.standard_normal(problem.n)
            v /= np.linalg.norm(v)
            est = 0.0
            for _ in range(iters):
                hv = f.gradient(base + v) - g0
                est = float(np.linalg.norm(hv))
                if est == 0.0:
                    break
                v = hv / est
            best = max(best, est)
    return POWER_SAFETY * best


@dataclass
class SolverConfig:
    alpha: float = 4.0
    s0: float = 0.1
    epsilon: float = 1e-7
    max_iters: int = 10_000
    stop_rule: str = "step-norm"

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "s0": self.s0, "epsilon": self.epsilon,
                "max_iters": self.max_iters, "stop_rule": self.stop_rule}


def admissible_s0_bound(alpha: float, L: float) -> float:
    """Supremum of admissible initial steps: ``(alpha-3)/((alpha-2) L)`` or ``1/L``."""
    if L <= 0:
        return math.inf
    if alpha > 3:
        return (alpha - 3) / ((alpha - 2) * L)
    return 1.0 / L


@dataclass(frozen=True)
class ConfigReport:
    ok: bool
    violations: tuple = ()

    def __bool__(self):
        return self.ok

    @property
    def message(self) -> str:
        return "ok" if self.ok else "; ".join(self.violations)


def validate_config(config: SolverConfig, L: float) -> ConfigReport:
    """Check parameter ranges and the initial step condition."""
    if not L > 0:
        raise ValueError("L must be positive")
    bad = []
    a, s0 = config.alpha, config.s0
    if not a >= 3:
        bad.append(f"alpha must satisfy alpha >= 3 (got {a})")
    if not s0 > 0:
        bad.append(f"s0 must be positive (got {s0})")
    if not config.epsilon > 0:
        bad.append(f"epsilon must be positive (got {config.epsilon})")
    if int(config.max_iters) != config.max_iters or config.max_iters < 0:
        bad.append(f"max_iters must be a nonnegative integer (got {config.max_iters})")
    if config.stop_rule not in STOP_RULES:
        bad.append(f"stop_rule must be one of {STOP_RULES} (got {config.stop_rule!r})")
    if a > 3 and s0 > 0:
        lhs = (a - 2) / (a - 3) * s0
        if not lhs < 1.0 / L:
            bad.append(f"strict inequality (alpha-2)/(alpha-3)*s0 < 1/L violated: "
                       f"{lhs!r} >= {1.0 / L!r}")
    elif a == 3 and s0 > 0 and not s0 < 1.0 / L:
        bad.append(f"strict inequality s0 < 1/L violated for alpha = 3: {s0!r} >= {1.0 / L!r}")
    return ConfigReport(not bad, tuple(bad))


def _term_from_dict(d: dict) -> NonsmoothTerm:
    kind = d.get("kind", "zero")
    if kind == "l1":
        return NonsmoothTerm.l1(d["weight"])
    if kind == "box":
        return NonsmoothTerm.box(d["lower"], d["upper"])
    if kind == "zero":
        return NonsmoothTerm.zero()
    raise ValueError(f"unknown nonsmooth kind {kind!r}")


def _smooth_from_dict(d: dict, n: int) -> QuadraticObjective:
    kind = d.get("kind", "quadratic")
    if kind == "quadratic":
        return QuadraticObjective(d["A"], d.get("b"), d.get("c", 0.0))
    if kind == "linear":
        return QuadraticObjective(np.zeros((n, n)), d["b"], d.get("c", 0.0))
    raise ValueError(f"unknown smooth kind {kind!r}")


def problem_from_dict(d: dict) -> Problem:
    """Build a problem from its JSON description.

    Example::

        {"n": 2, "objectives": [
            {"smooth": {"kind": "quadratic", "A": [[2, 0], [0, 2]], "b": [0, 0], "c": 0},
             "nonsmooth": {"kind": "l1", "weight": 0.1}},
            ...]}
    """
    n = int(d["n"])
    objs = d["objectives"]
    smooth = [_smooth_from_dict(o["smooth"], n) for o in objs]
    nonsmooth = [_term_from_dict(o.get("nonsmooth", {"kind": "zero"})) for o in objs]
    return Problem(n, smooth, nonsmooth, name=d.get("name", "custom"))


def problem_from_json(text: str) -> Problem:
    return problem_from_dict(json.loads(text))
