import numpy as np
import pytest
from scipy.optimize import linprog

from polyflow.simplex import LPError, solve_lp


def test_small_known_optimum():
    # max x + y s.t. x + 2y <= 4, 3x + y <= 6
    res = solve_lp(np.array([-1.0, -1.0]), np.array([[1.0, 2.0], [3.0, 1.0]]), np.array([4.0, 6.0]))
    assert np.allclose(res.x, [1.6, 1.2])
    assert res.fun == pytest.approx(-2.8)


def test_negative_rhs_needs_phase_one():
    # x >= 2 written as -x <= -2
    res = solve_lp(np.array([1.0]), np.array([[-1.0]]), np.array([-2.0]))
    assert res.x[0] == pytest.approx(2.0)


def test_infeasible():
    with pytest.raises(LPError) as err:
        solve_lp(np.array([1.0]), np.array([[1.0], [-1.0]]), np.array([1.0, -2.0]))
    assert err.value.status == "infeasible"


def test_unbounded():
    with pytest.raises(LPError) as err:
        solve_lp(np.array([-1.0, 0.0]), np.array([[0.0, 1.0]]), np.array([1.0]))
    assert err.value.status == "unbounded"


@pytest.mark.parametrize("seed", range(60))
def test_matches_scipy_on_random_lps(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(2, 12), rng.integers(2, 10)
    A = rng.normal(size=(m, n))
    b = rng.normal(size=m) + 1.0
    c = rng.normal(size=n)
    ref = linprog(c, A_ub=A, b_ub=b, bounds=(0, None), method="highs")
    if ref.status == 0:
        res = solve_lp(c, A, b)
        assert res.fun == pytest.approx(ref.fun, rel=1e-7, abs=1e-8)
        assert np.all(A @ res.x <= b + 1e-8) and np.all(res.x >= -1e-12)
    else:
        status = {2: "infeasible", 3: "unbounded"}[ref.status]
        with pytest.raises(LPError) as err:
            solve_lp(c, A, b)
        assert err.value.status == status


def test_degenerate_problem_terminates():
    # many redundant constraints through the optimum
    A = np.array([[1.0, 1.0]] * 6 + [[1.0, 0.0], [0.0, 1.0]])
    b = np.array([1.0] * 6 + [1.0, 1.0])
    res = solve_lp(np.array([-1.0, -1.0]), A, b)
    assert res.fun == pytest.approx(-1.0)
