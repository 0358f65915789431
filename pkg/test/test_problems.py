# dfosparse
# (c) 2026 dfosparse contributors
# SPDX-License-Identifier: GPL-2.0-or-later

import math

import numpy as np
import pytest

from dfosparse.driver import DfoConfig, run_dfo_tr
from dfosparse.problems import (
    CHNROSNB_ALPHA,
    REGISTRY,
    SYNTHETIC,
    Problem,
    UnknownProblemError,
    get_problem,
    hessian_nnz,
    list_problems,
    oracle_optimum,
    random_sparse_quadratic,
)


def central_gradient(f, x, step=1e-6):
    gradient = np.empty_like(x)
    for i in range(len(x)):
        h = step * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        gradient[i] = (f(x + e) - f(x - e)) / (2 * h)
    return gradient


@pytest.mark.parametrize("name", REGISTRY)
def test_reference_gradient(name):
    problem = get_problem(name)
    rng = np.random.default_rng(0)
    assert np.all(np.isfinite(problem.start))
    for x in [problem.start,
              *(problem.start + rng.uniform(-0.1, 0.1, size=problem.n)
                for _ in range(3))]:
        gradient = problem.reference_grad(x)
        assert gradient.shape == (problem.n,)
        np.testing.assert_allclose(
            central_gradient(problem.objective, x), gradient, rtol=1e-5,
            atol=1e-5 * max(1.0, float(np.linalg.norm(gradient))))


@pytest.mark.parametrize("name", ["ARWHEAD", "WOODS", "SCHMVETT", "MOREBV",
                                  "HILBERTA"])
def test_reference_hessian(name):
    problem = get_problem(name, 8)
    x = problem.start + 0.05
    hessian = problem.reference_hess(x)
    np.testing.assert_allclose(hessian, hessian.T)
    fd = np.array([central_gradient(lambda y: problem.reference_grad(y)[i], x)
                   for i in range(problem.n)])
    np.testing.assert_allclose(
        fd, hessian, rtol=1e-5,
        atol=1e-5 * max(1.0, float(np.abs(hessian).max())))


PROBLEM_VALUES = {
    "dqdrtic-optimum": ("DQDRTIC", 10, np.zeros(10), 0.0),
    "dqdrtic-start": ("DQDRTIC", 10, np.full(10, 3.0), 8 * 1809.0),
    "arwhead-start": ("ARWHEAD", 20, np.ones(20), 3.0 * 19),
    "arwhead-optimum": ("ARWHEAD", 5, np.array([1.0, 1.0, 1.0, 1.0, 0.0]),
                        0.0),
    "srosenbr-optimum": ("SROSENBR", 4, np.ones(4), 0.0),
    "woods-optimum": ("WOODS", 4, np.ones(4), 0.0),
    "powellsg-optimum": ("POWELLSG", 8, np.zeros(8), 0.0),
    "extrosnb-optimum": ("EXTROSNB", 5, np.ones(5), 0.0),
    "chnrosnb-start": ("CHNROSNB", 15, np.full(15, -1.0),
                       sum(64 * a ** 2 + 4 for a in CHNROSNB_ALPHA[1:15])),
    "schmvett-optimum": ("SCHMVETT", 6, np.full(6, math.pi / (1 + math.pi)),
                         -12.0),
    "hilberta-optimum": ("HILBERTA", 10, np.zeros(10), 0.0),
    "genhumps-optimum": ("GENHUMPS", 5, np.zeros(5), 0.0),
}


@pytest.mark.parametrize("case", PROBLEM_VALUES)
def test_problem_value(case):
    name, n, x, expected = PROBLEM_VALUES[case]
    assert get_problem(name, n).objective(x) == pytest.approx(expected,
                                                              abs=1e-10)


ORACLE_BACKED = ("BDQRTIC", "CRAGGLVY")


@pytest.mark.parametrize("name", REGISTRY)
def test_f_best_matches_registry(name):
    problem = get_problem(name)
    assert problem.name == name
    assert problem.n == REGISTRY[name].default_n
    if name in ORACLE_BACKED:
        assert problem.f_best == oracle_optimum(name, problem.n)
    elif name == "SCHMVETT":
        assert problem.f_best == -3.0 * (problem.n - 2)
    else:
        assert problem.f_best == 0.0
    assert problem.f_best is not None
    assert problem.objective(problem.start) >= problem.f_best


@pytest.mark.parametrize(
    "name", [name for name in REGISTRY if name not in ORACLE_BACKED])
def test_oracle_reaches_f_best(name):
    problem = get_problem(name)
    assert oracle_optimum(name, problem.n) == pytest.approx(problem.f_best,
                                                            abs=1e-8)


@pytest.mark.parametrize("name", ORACLE_BACKED)
def test_oracle_optimum_bounds_solver(name):
    problem = get_problem(name)
    assert problem.f_best is not None
    assert problem.f_best < problem.objective(problem.start)
    trace = run_dfo_tr(problem.objective, problem.start,
                       DfoConfig(max_fevals=300))
    assert trace.f >= problem.f_best - 1e-8


def test_dqdrtic_hessian_nnz(rng):
    problem = get_problem("DQDRTIC", 10)
    assert problem.nnz_upper == 10
    for x in [problem.start, *rng.standard_normal((3, 10))]:
        assert hessian_nnz(problem, x) == 10


def test_synthetic_hessian_nnz(rng):
    problem = get_problem(SYNTHETIC, 10, h=5, seed=3)
    for x in rng.standard_normal((3, 10)):
        assert hessian_nnz(problem, x) == 5
    np.testing.assert_array_equal(problem.start, np.zeros(10))
    assert problem.f_best is None


def test_zero_quadratic_hessian_nnz():
    problem = get_problem(SYNTHETIC, 4, h=0, seed=0)
    assert hessian_nnz(problem, np.ones(4)) == 0


def test_synthetic_deterministic():
    first = get_problem(SYNTHETIC, 6, h=4, seed=11)
    second = get_problem(SYNTHETIC, 6, h=4, seed=11)
    x = np.linspace(-1, 1, 6)
    assert first.objective(x) == second.objective(x)


def test_random_sparse_quadratic(rng):
    hessian, gradient, constant = random_sparse_quadratic(6, 7, rng)
    np.testing.assert_array_equal(hessian, hessian.T)
    upper = np.triu(hessian)
    assert np.count_nonzero(upper) == 7
    magnitudes = np.abs(upper[upper != 0])
    assert magnitudes.min() >= 0.1 and magnitudes.max() <= 1.0
    assert gradient.shape == (6,)
    assert -1.0 <= constant <= 1.0
    with pytest.raises(ValueError):
        random_sparse_quadratic(3, 7, rng)


def test_hessian_nnz_requires_reference():
    problem = Problem(name="X", n=1, objective=lambda x: 0.0,
                      start=np.zeros(1))
    with pytest.raises(ValueError):
        hessian_nnz(problem, np.zeros(1))


def test_unknown_problem():
    with pytest.raises(UnknownProblemError) as e:
        get_problem("NOSUCH")
    assert e.value.name == "NOSUCH"


INVALID_DIMENSIONS = {
    "POWELLSG": 6,
    "WOODS": 10,
    "SROSENBR": 5,
    "CRAGGLVY": 3,
    "CHNROSNB": 51,
    "DQDRTIC": 2,
    "BDQRTIC": 4,
}


@pytest.mark.parametrize("name", INVALID_DIMENSIONS)
def test_invalid_dimension(name):
    with pytest.raises(ValueError):
        get_problem(name, INVALID_DIMENSIONS[name])


def test_case_insensitive():
    assert get_problem("dqdrtic", 5).name == "DQDRTIC"


def test_list_problems():
    listing = list_problems()
    assert len(listing) == len(REGISTRY) + 1
    assert ("DQDRTIC", 10, 10) in listing
    assert ("HILBERTA", 10, 55) in listing
    assert listing[-1] == (SYNTHETIC, 10, 5)
