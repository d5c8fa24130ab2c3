"""The min-max proximal subproblem and its dual over the simplex.

For an anchor ``x``, base point ``y`` and step ``s`` the subproblem is::

    min_z  max_i [<grad f_i(y), z - y> + g_i(z) + f_i(y) - F_i(x)] + ||z - y||^2 / (2 s)

Writing ``h_i(z)`` for the bracketed term, the Lagrangian dual is
``d(lam) = min_z sum_i lam_i h_i(z) + ||z - y||^2 / (2 s)`` over the simplex.
The inner minimizer is a closed-form prox, and ``d`` is concave and
differentiable with gradient ``h(z(lam))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Problem
from .prox import WeightedNonsmooth, prox, soft_threshold

__all__ = [
    "SubproblemInput",
    "SubproblemSolution",
    "ThetaBoundsReport",
    "active_set",
    "dual_value",
    "kkt_residual",
    "primal_value",
    "simplex_project",
    "solve",
    "theta_bounds_check",
]

TIE_TOL = 1e-9


@dataclass(frozen=True)
class SubproblemInput:
    x: np.ndarray
    y: np.ndarray
    s: float

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError("step s must be positive")
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))


@dataclass
class SubproblemSolution:
    z: np.ndarray
    theta: float
    lam: np.ndarray
    gap: float
    active_set: tuple
    converged: bool = True
    iterations: int = 0


def simplex_project(v) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort and threshold)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, len(v) + 1)
    rho = np.count_nonzero(u - css / ind > 0)
    tau = css[rho - 1] / rho
    return np.maximum(v - tau, 0.0)


class _Model:
    """Subproblem data precomputed at ``y`` and vectorized over weights."""

    def __init__(self, problem: Problem, inp: SubproblemInput):
        x = problem.check_point(inp.x)
        y = problem.check_point(inp.y)
        self.y = y
        self.s = float(inp.s)
        self.G = problem.gradients(y)
        self.c = problem.smooth_values(y) - problem.values(x)
        self.family = problem.family
        self.w = problem.l1_weights if self.family == "l1" else np.zeros(problem.m)
        self.box = problem.box

    def z_of(self, lam: np.ndarray) -> np.ndarray:
        """Inner minimizer for one weight vector or a batch of them (rows)."""
        v = self.y - self.s * (lam @ self.G)
        if self.family == "box":
            return np.clip(v, self.box[0], self.box[1])
        if self.family == "l1":
            level = self.s * (lam @ self.w)
            return soft_threshold(v, np.expand_dims(level, -1))
        return v

    def h(self, z: np.ndarray) -> np.ndarray:
        out = (z - self.y) @ self.G.T + self.c
        if self.family == "l1":
            out = out + np.expand_dims(np.abs(z).sum(axis=-1), -1) * self.w
        return out

    def quad(self, z: np.ndarray) -> float:
        return float(np.sum((z - self.y) ** 2)) / (2.0 * self.s)

    def finish(self, lam, iterations=0, converged=True, tol=math.inf) -> SubproblemSolution:
        z = self.z_of(lam)
        hz = self.h(z)
        hmax = float(hz.max())
        gap = max(hmax - float(lam @ hz), 0.0)
        q = self.quad(z)
        return SubproblemSolution(
            z=z, theta=hmax + q, lam=lam, gap=gap, active_set=_ties(hz),
            converged=converged and gap <= tol, iterations=iterations)


def _ties(hz: np.ndarray) -> tuple:
    hmax = float(hz.max())
    return tuple(int(i) for i in np.flatnonzero(hz >= hmax - TIE_TOL * (1.0 + abs(hmax))))


def dual_value(problem: Problem, inp: SubproblemInput, lam) -> tuple:
    """Return ``(z(lam), d(lam))`` using the generic prox of the weighted terms."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < -1e-12) or abs(lam.sum() - 1.0) > 1e-9:
        raise ValueError("lam must lie in the simplex")
    x, y, s = problem.check_point(inp.x), problem.check_point(inp.y), inp.s
    G = problem.gradients(y)
    weights = lam
    if problem.family == "box":
        # the constraint is shared by every objective, so it does not depend on lam
        weights = np.ones_like(lam)
    h_comb = WeightedNonsmooth(tuple(zip(weights, problem.nonsmooth)))
    z = prox(h_comb, s, y - s * (lam @ G))
    lin = G @ (z - y) + problem.nonsmooth_values(z) + problem.smooth_values(y) - problem.values(x)
    d = float(lam @ lin) + float(np.sum((z - y) ** 2)) / (2 * s)
    return z, d


def primal_value(problem: Problem, inp: SubproblemInput, z) -> float:
    """``phi_s(z; x, y)``; infinite outside the box."""
    z = problem.check_point(z)
    if not problem.feasible(z):
        return math.inf
    y, s = inp.y, inp.s
    lin = (problem.gradients(y) @ (z - y) + problem.nonsmooth_values(z)
           + problem.smooth_values(y) - problem.values(inp.x))
    return float(lin.max()) + float(np.sum((z - y) ** 2)) / (2 * s)


def active_set(problem: Problem, inp: SubproblemInput, z) -> tuple:
    """Indices attaining the max of the linearized terms at ``z`` (ties within 1e-9)."""
    return _ties(_Model(problem, inp).h(np.asarray(z, dtype=float)))


def _solve_pair(model: _Model, tol: float, max_inner: int) -> SubproblemSolution:
    # lam = (t, 1 - t). z(t) is piecewise linear in t, so is d'(t) = h_1 - h_2,
    # and d' is nonincreasing. Scan the breakpoints, then interpolate.
    y, s, G, w = model.y, model.s, model.G, model.w
    v0 = y - s * G[1]
    dv = -s * (G[0] - G[1])
    cands = [np.array([0.0, 1.0])]
    with np.errstate(divide="ignore", invalid="ignore"):
        if model.family == "l1":
            tau0, dtau = s * w[1], s * (w[0] - w[1])
            cands.append((tau0 - v0) / (dv - dtau))
            cands.append((-tau0 - v0) / (dv + dtau))
        elif model.family == "box":
            cands.append((model.box[0] - v0) / dv)
            cands.append((model.box[1] - v0) / dv)
    T = np.concatenate(cands)
    T = np.unique(T[np.isfinite(T) & (T >= 0.0) & (T <= 1.0)])

    def deriv(t):
        lam = np.stack([t, 1.0 - t], axis=-1)
        hz = model.h(model.z_of(lam))
        return hz[..., 0] - hz[..., 1]

    D = deriv(T)
    if D[0] <= 0.0:
        return model.finish(np.array([0.0, 1.0]), 1, tol=tol)
    if D[-1] >= 0.0:
        return model.finish(np.array([1.0, 0.0]), 1, tol=tol)
    i = int(np.argmax(D <= 0.0))
    lo, hi, dlo, dhi = T[i - 1], T[i], D[i - 1], D[i]
    t = lo + dlo * (hi - lo) / (dlo - dhi)
    t = min(max(t, lo), hi)
    sol = model.finish(np.array([t, 1.0 - t]), 1, tol=tol)
    it = 1
    # rounding can leave a residual gap; polish by bisection on the sign of d'
    while sol.gap > tol and it < max_inner and hi - lo > 1e-16:
        it += 1
        mid = 0.5 * (lo + hi)
        if deriv(np.array(mid)) > 0:
            lo = mid
        else:
            hi = mid
        cand = model.finish(np.array([mid, 1.0 - mid]), it, tol=tol)
        if cand.gap < sol.gap:
            sol = cand
    sol.iterations = it
    sol.converged = sol.gap <= tol
    return sol


def _solve_many(model: _Model, tol: float, max_inner: int) -> SubproblemSolution:
    # accelerated projected gradient ascent on the smooth concave dual,
    # backtracking on its gradient Lipschitz constant, adaptive restart
    m = model.G.shape[0]

    def dual(lam):
        z = model.z_of(lam)
        hz = model.h(z)
        return float(lam @ hz) + model.quad(z), hz

    Ld = max(model.s * np.linalg.norm(model.G, 2) ** 2, 1e-12)
    lam = np.full(m, 1.0 / m)
    d_lam, _ = dual(lam)
    mu, t_mom = lam.copy(), 1.0
    best = model.finish(lam, 0, tol=tol)
    for it in range(1, max_inner + 1):
        d_mu, g_mu = dual(mu)
        while True:
            cand = simplex_project(mu + g_mu / Ld)
            d_cand, _ = dual(cand)
            step = cand - mu
            if d_cand >= d_mu + g_mu @ step - 0.5 * Ld * (step @ step) - 1e-15 * (1 + abs(d_mu)):
                break
            Ld *= 2.0
        sol = model.finish(cand, it, tol=tol)
        if sol.gap < best.gap:
            best = sol
        if best.gap <= tol:
            break
        if d_cand < d_lam:
            mu, t_mom = lam.copy(), 1.0
            continue
        t_next = 0.5 * (1 + math.sqrt(1 + 4 * t_mom ** 2))
        mu = cand + (t_mom - 1) / t_next * (cand - lam)
        lam, d_lam, t_mom = cand, d_cand, t_next
    best.iterations = it
    best.converged = best.gap <= tol
    return best


def solve(problem: Problem, inp: SubproblemInput, tol: float = 1e-8,
          max_inner: int = 5000) -> SubproblemSolution:
    """Solve the subproblem through its dual.

    Returns the minimizer ``z = p_s(x, y)``, the optimal value ``theta``, the
    dual weights and the duality gap. When the gap cannot be brought under
    ``tol`` within ``max_inner`` dual iterations the best iterate is returned
    with ``converged=False``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    model = _Model(problem, inp)
    if problem.m == 1:
        return model.finish(np.ones(1), 0, tol=tol)
    if problem.m == 2:
        return _solve_pair(model, tol, max_inner)
    return _solve_many(model, tol, max_inner)


def kkt_residual(problem: Problem, inp: SubproblemInput, solution: SubproblemSolution) -> float:
    """Sup-norm distance of the stationarity residual from the subdifferential.

    Computes ``min_u ||sum_i lam_i grad f_i(y) + u + (z - y)/s||_inf`` over
    ``u`` in the subdifferential of ``sum_i lam_i g_i`` at ``z``.
    """
    y, s = inp.y, inp.s
    z, lam = np.asarray(solution.z, float), np.asarray(solution.lam, float)
    a = lam @ problem.gradients(y) + (z - y) / s
    fam = problem.family
    if fam == "l1":
        W = float(lam @ problem.l1_weights)
        r = np.where(z != 0, np.abs(a + W * np.sign(z)), np.maximum(np.abs(a) - W, 0.0))
    elif fam == "box":
        lo, hi = problem.box
        r = np.abs(a)
        at_lo, at_hi = z <= lo, z >= hi
        r = np.where(at_lo & ~at_hi, np.maximum(-a, 0.0), r)
        r = np.where(at_hi & ~at_lo, np.maximum(a, 0.0), r)
        r = np.where(at_lo & at_hi, 0.0, r)
    else:
        r = np.abs(a)
    return float(r.max())


@dataclass
class ThetaBoundsReport:
    upper_ok: bool
    upper_margin: float
    lower_ok: bool | None
    lower_margin: float | None
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.upper_ok and self.lower_ok is not False


def theta_bounds_check(problem: Problem, inp: SubproblemInput, solution: SubproblemSolution,
                       tol: float = 1e-8, L: float | None = None) -> ThetaBoundsReport:
    """Check ``max_i[F_i(z) - F_i(x)] <= theta <= max_i[F_i(y) - F_i(x)]``.

    The lower bound is only asserted when ``s <= 1/L``.
    """
    Fx = problem.values(inp.x)
    if problem.feasible(inp.y):
        upper = float((problem.values(inp.y) - Fx).max())
    else:
        upper = math.inf
    upper_margin = upper - solution.theta
    report = ThetaBoundsReport(upper_margin >= -tol, upper_margin, None, None)
    L = problem.lipschitz_global if L is None else L
    if L is not None and (L <= 0 or inp.s <= 1.0 / L):
        lower = float((problem.values(solution.z) - Fx).max())
        report.lower_margin = solution.theta - lower
        report.lower_ok = report.lower_margin >= -tol
    else:
        report.notes.append("lower bound skipped: s > 1/L")
    return report
