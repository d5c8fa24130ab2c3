import csv
import io
import time

import numpy as np
import pytest

from moapg.core import SolverConfig
from moapg.solver import (
    eta,
    extrapolate,
    extrapolation_coefficient,
    fista_coefficients,
    run,
    run_baseline,
    step_size,
)

from conftest import bench_problem, config_for, single_quadratic
from oracles import scalar_accelerated


def test_eta_examples():
    assert eta(1, 3) == pytest.approx(4 / 3, rel=1e-15)
    assert eta(0, 4) == pytest.approx(4 / 3, rel=1e-15)
    assert abs(eta(10**6, 4) - 1) < 1e-11
    with pytest.raises(ZeroDivisionError):
        eta(0, 3)


def test_step_size_examples():
    assert step_size(0, 3, 0.4) == 0.4
    assert step_size(1, 3, 0.4) == pytest.approx(0.2, rel=1e-15)
    assert step_size(2, 3, 0.4) == pytest.approx(0.4 * 2 / 3, rel=1e-15)
    assert step_size(1, 4, 0.3) == pytest.approx(0.4, rel=1e-15)


@pytest.mark.parametrize("alpha", [3.0, 3.5, 4.0, 7.0])
def test_step_size_telescopes_eta(alpha):
    s0 = 0.1
    s = step_size(1, alpha, s0)
    for k in range(1, 2000):
        s *= eta(k, alpha)
        assert abs(s - step_size(k + 1, alpha, s0)) <= 1e-12 * s


@pytest.mark.parametrize("alpha", [3.0, 4.0, 10.0])
def test_step_stays_below_inverse_L(alpha):
    L = 2.0
    s0 = (alpha - 3) / ((alpha - 2) * L) if alpha > 3 else 1 / L
    s0 *= 0.999
    k = np.arange(0, 100_001)
    steps = np.array([step_size(int(j), alpha, s0) for j in k[::97]])
    assert np.all(steps < 1 / L)
    assert np.all(np.diff(steps[1:]) >= -1e-18)


def test_extrapolation_examples():
    assert extrapolate([1.0], [0.0], 5, 3)[0] == pytest.approx(11 / 7, rel=1e-15)
    np.testing.assert_array_equal(extrapolate([2.0, 3.0], [2.0, 3.0], 9, 4), [2.0, 3.0])
    c = [extrapolation_coefficient(k, 4) for k in range(500)]
    assert c[0] == 0.0
    assert np.all(np.diff(c) > 0) and max(c) < 1


def test_fista_coefficients():
    c = fista_coefficients(5)
    t2 = (1 + np.sqrt(5)) / 2
    assert c[0] == 0.0
    assert c[1] == pytest.approx((t2 - 1) / (0.5 * (1 + np.sqrt(1 + 4 * t2**2))), rel=1e-15)
    assert np.all(np.diff(fista_coefficients(200)) > 0)


@pytest.mark.parametrize("alpha", [3.0, 4.0])
def test_matches_scalar_recurrence(alpha):
    a = np.array([1.0, 0.01, 1e-4])
    p = single_quadratic(a)
    x0 = np.array([1.0, -2.0, 3.0])
    cfg = config_for(p, alpha, 0.9, epsilon=1e-300, max_iters=100)
    tr = run(p, cfg, x0)
    expected = scalar_accelerated(a, x0, alpha, cfg.s0, 100)
    assert tr.iterations == 100
    np.testing.assert_allclose(np.array(tr.points[1:]), expected, atol=1e-10, rtol=0)


def test_pg_is_gradient_descent():
    a = np.array([2.0, 0.5])
    p = single_quadratic(a)
    x = np.array([1.0, 1.0])
    tr = run_baseline(p, "pg", x, 0.3, epsilon=1e-300, max_iters=20)
    for k in range(20):
        x = x - 0.3 * a * x
        np.testing.assert_allclose(tr.points[k + 1], x, rtol=1e-14)


def test_stop_at_start_for_pareto_point(bk1):
    cfg = config_for(bk1, 4.0, stop_rule="subproblem-residual")
    tr = run(bk1, cfg, [2.0, 2.0])
    assert tr.iterations == 0 and tr.stopping_reason == "tolerance-met"


def test_zero_budget(bk1):
    tr = run(bk1, config_for(bk1, max_iters=0), [3.0, -1.0])
    assert tr.iterations == 0 and tr.stopping_reason == "max-iters"
    assert tr.to_csv().count("\n") == 1


def test_invalid_config_raises(bk1):
    with pytest.raises(ValueError, match="s0 < 1/L"):
        run(bk1, SolverConfig(alpha=3, s0=0.5), [0.0, 0.0])


def test_deterministic(bk1_l1):
    cfg = config_for(bk1_l1, 4.0)
    a = run(bk1_l1, cfg, [9.0, -4.0]).to_csv()
    b = run(bk1_l1, cfg, [9.0, -4.0]).to_csv()
    assert a == b


def test_csv_roundtrip(bk1_l1):
    tr = run(bk1_l1, config_for(bk1_l1, 3.0, max_iters=40, epsilon=1e-300), [9.0, -4.0])
    rows = list(csv.reader(io.StringIO(tr.to_csv())))
    assert rows[0] == ["k", "s_k", "gamma_k", "F_1", "F_2", "step_norm", "merit"]
    for row, rec in zip(rows[1:], tr.records):
        assert int(row[0]) == rec.k
        assert float(row[1]) == rec.s and float(row[2]) == rec.gamma
        assert [float(v) for v in row[3:5]] == list(rec.F)
        assert float(row[5]) == rec.step_norm


@pytest.mark.parametrize("name,n", [("BK1", 2), ("JOS1", 5), ("SP1", 2)])
@pytest.mark.parametrize("l1", [0.0, 0.1])
@pytest.mark.parametrize("alpha", [3.0, 4.0, 6.0])
def test_monotone_and_convergent(name, n, l1, alpha, rng):
    p = bench_problem(name, l1, n)
    for _ in range(5):
        x0 = rng.uniform(-5, 5, n)
        tr = run(p, config_for(p, alpha), x0)
        assert tr.monotone
        assert tr.stopping_reason == "tolerance-met"
        F = np.asarray(tr.F_points)
        assert np.all(F <= F[0] + 1e-9 * (1 + np.abs(F[0])))


def test_accelerated_beats_pg_on_ill_conditioned():
    p = single_quadratic([1.0, 1e-3])
    x0 = np.array([1.0, 1.0])
    acc = run(p, config_for(p, 4.0, epsilon=1e-300, max_iters=300), x0)
    pg = run_baseline(p, "pg", x0, 0.99, epsilon=1e-300, max_iters=300)
    assert acc.F_points[-1][0] < pg.F_points[-1][0]


def test_box_family_iterates_stay_feasible():
    from moapg.core import NonsmoothTerm, Problem, QuadraticObjective
    box = NonsmoothTerm.box([-1.0, -1.0], [1.0, 0.5])
    p = Problem(2, [QuadraticObjective(np.eye(2), [-3.0, 0.0]), QuadraticObjective(np.eye(2), [0.0, -3.0])],
                [box, box])
    tr = run(p, config_for(p, 4.0), [0.0, 0.0])
    assert all(p.feasible(x) for x in tr.points)
    assert tr.stopping_reason == "tolerance-met"


def test_run_time_reasonable(bk1):
    t = time.perf_counter()
    run(bk1, config_for(bk1, max_iters=1000, epsilon=1e-300), [9.0, -4.0])
    assert time.perf_counter() - t < 5.0
