# dfosparse
# (c) 2026 dfosparse contributors
# SPDX-License-Identifier: GPL-2.0-or-later

import math

import numpy as np
import pytest

from dfosparse.basis import (
    SQRT3,
    SQRT5,
    CanonicalBasis,
    PsiBasis,
    QuadraticModel,
    basis_size,
    coefficient_blocks,
    convert_coefficients,
    error_profile,
    eval_basis,
    gram_psi,
    model_value_grad_hess,
    psi_sup_norms,
    sample_grid,
)

EVAL_BASIS_VALUES = {
    "canonical-n1": (CanonicalBasis(), 1, [2.0], [2.0, 2.0, 1.0]),
    "psi-n1-corner": (PsiBasis(1.0), 1, [1.0], [SQRT5, SQRT3, 1.0]),
    "psi-n2-origin": (PsiBasis(0.7), 2, [0.0, 0.0],
                      [-SQRT5 / 2, -SQRT5 / 2, 0.0, 0.0, 0.0, 1.0]),
    "canonical-n2": (CanonicalBasis(), 2, [1.0, -3.0],
                     [0.5, 4.5, -3.0, 1.0, -3.0, 1.0]),
}


@pytest.mark.parametrize("case", EVAL_BASIS_VALUES)
def test_eval_basis(case):
    basis, n, x, expected = EVAL_BASIS_VALUES[case]
    np.testing.assert_allclose(eval_basis(basis, n, np.array(x)), expected,
                               rtol=0, atol=1e-14)


def test_eval_basis_dimension_mismatch():
    with pytest.raises(ValueError):
        eval_basis(CanonicalBasis(), 3, np.zeros(2))


def test_evaluate_stack():
    points = np.array([[1.0, 2.0], [0.5, -1.0], [0.0, 0.0]])
    basis = PsiBasis(2.0)
    rows = basis.evaluate(points)
    assert rows.shape == (3, basis_size(2))
    for point, row in zip(points, rows):
        np.testing.assert_array_equal(basis.evaluate(point), row)


def test_coefficient_blocks():
    blocks = coefficient_blocks(4)
    assert (blocks.diagonal, blocks.off_diagonal, blocks.linear,
            blocks.constant) == (slice(0, 4), slice(4, 10), slice(10, 14),
                                 14)


def test_psi_delta_positive():
    with pytest.raises(ValueError):
        PsiBasis(0.0)


@pytest.mark.parametrize("delta", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("n", range(1, 7))
def test_gram_psi_identity(n, delta):
    np.testing.assert_allclose(gram_psi(n, delta), np.eye(basis_size(n)),
                               rtol=0, atol=1e-12)


@pytest.mark.parametrize("n,delta", [(1, 1.0), (2, 0.3), (3, 0.5)])
def test_gram_psi_quadrature(n, delta):
    nodes, weights = np.polynomial.legendre.leggauss(6)
    axes = [nodes * delta] * n
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    # uniform probability measure: each axis weight sums to 1
    w = np.prod(np.stack(np.meshgrid(*([weights / 2] * n), indexing="ij"),
                         axis=-1).reshape(-1, n), axis=1)
    phi = PsiBasis(delta).evaluate(mesh)
    np.testing.assert_allclose(gram_psi(n, delta), phi.T @ (w[:, None] * phi),
                               rtol=0, atol=1e-12)


def test_gram_psi_invalid():
    with pytest.raises(ValueError):
        gram_psi(0, 1.0)


@pytest.mark.parametrize("delta", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_psi_sup_norms(n, delta):
    norms = psi_sup_norms(n, delta)
    expected = {"2,i": SQRT5, "1,i": SQRT3, "0": 1.0}
    if n > 1:
        expected["2,ij"] = 3.0
    assert norms.keys() == expected.keys()
    for key, value in expected.items():
        assert norms[key] == pytest.approx(value, abs=1e-12)
        assert norms[key] <= 3.0 + 1e-12


CONVERSIONS = {
    "half-square": (1, 1.0, [1.0, 0.0, 0.0],
                    [1 / (3 * SQRT5), 0.0, 1 / 6]),
    "cross-term": (2, 2.0, [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
                   [0.0, 0.0, 4 / 3, 0.0, 0.0, 0.0]),
    "linear": (1, 3.0, [0.0, 1.0, 2.0], [0.0, 3.0 / SQRT3, 2.0]),
}


@pytest.mark.parametrize("case", CONVERSIONS)
def test_convert_coefficients(case):
    n, delta, canonical, expected = CONVERSIONS[case]
    model = QuadraticModel(n=n, basis=CanonicalBasis(), alpha=canonical,
                           center=np.zeros(n))
    converted = convert_coefficients(model, PsiBasis(delta))
    assert converted.basis == PsiBasis(delta)
    np.testing.assert_allclose(converted.alpha, expected, rtol=0, atol=1e-14)
    points = np.random.default_rng(1).uniform(-delta, delta, size=(5, n))
    np.testing.assert_allclose(converted.values(points),
                               model.values(points), rtol=0, atol=1e-12)


@pytest.mark.parametrize("delta", [0.1, 1.0, 10.0])
def test_convert_round_trip(rng, delta):
    n = 4
    alpha = rng.standard_normal(basis_size(n))
    model = QuadraticModel(n=n, basis=CanonicalBasis(), alpha=alpha,
                           center=rng.standard_normal(n))
    psi = convert_coefficients(model, PsiBasis(delta))
    back = convert_coefficients(psi, CanonicalBasis())
    np.testing.assert_allclose(back.alpha, alpha, rtol=1e-12, atol=1e-12)
    np.testing.assert_array_equal(back.center, model.center)


def test_convert_same_basis_is_identity():
    model = QuadraticModel(n=1, basis=PsiBasis(2.0), alpha=[1.0, 2.0, 3.0],
                           center=[0.0])
    assert convert_coefficients(model, PsiBasis(2.0)) is model


def test_convert_preserves_off_diagonal_sparsity(rng):
    n = 5
    blocks = coefficient_blocks(n)
    for _ in range(10):
        alpha = rng.standard_normal(basis_size(n))
        off = alpha[blocks.off_diagonal]
        off[rng.random(len(off)) < 0.6] = 0.0
        alpha[blocks.off_diagonal] = off
        model = QuadraticModel(n=n, basis=CanonicalBasis(), alpha=alpha,
                               center=np.zeros(n))
        psi = convert_coefficients(model, PsiBasis(0.5))
        assert (np.count_nonzero(psi.alpha[blocks.off_diagonal]) ==
                np.count_nonzero(off))


def test_model_value_grad_hess():
    model = QuadraticModel(n=2, basis=CanonicalBasis(),
                           alpha=[1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
                           center=[0.0, 0.0])
    value, gradient, hessian = model_value_grad_hess(model, np.ones(2))
    assert value == pytest.approx(1.5)
    np.testing.assert_allclose(gradient, [1.0, 1.0])
    np.testing.assert_allclose(hessian, np.diag([1.0, 0.0]))


def test_model_gradient_finite_differences(rng):
    n = 3
    step = 1e-5
    for _ in range(10):
        model = QuadraticModel(n=n, basis=PsiBasis(rng.uniform(0.5, 2.0)),
                               alpha=rng.standard_normal(basis_size(n)),
                               center=rng.standard_normal(n))
        x = rng.standard_normal(n)
        value, gradient, hessian = model_value_grad_hess(model, x)
        assert value == pytest.approx(float(model.values(x)[0]), abs=1e-10)
        fd = np.array([
            (model_value_grad_hess(model, x + step * e)[0] -
             model_value_grad_hess(model, x - step * e)[0]) / (2 * step)
            for e in np.eye(n)])
        np.testing.assert_allclose(fd, gradient, rtol=1e-6,
                                   atol=1e-6 * max(1.0, np.abs(gradient).max()))
        np.testing.assert_allclose(hessian, hessian.T)
        _, _, other = model_value_grad_hess(model, rng.standard_normal(n))
        np.testing.assert_array_equal(hessian, other)


def test_quadratic_model_validation():
    with pytest.raises(ValueError):
        QuadraticModel(n=2, basis=CanonicalBasis(), alpha=np.zeros(5),
                       center=np.zeros(2))
    with pytest.raises(ValueError):
        QuadraticModel(n=2, basis=CanonicalBasis(), alpha=np.zeros(6),
                       center=np.zeros(3))


def test_sample_grid():
    lattice = sample_grid(2, np.array([1.0, -1.0]), 0.5)
    assert lattice.shape == (1024, 2)
    np.testing.assert_allclose(lattice.min(axis=0), [0.5, -1.5])
    np.testing.assert_allclose(lattice.max(axis=0), [1.5, -0.5])
    random = sample_grid(5, np.zeros(5), 2.0, size=300, seed=4)
    assert random.shape == (300, 5)
    assert np.abs(random).max() <= 2.0
    np.testing.assert_array_equal(
        random, sample_grid(5, np.zeros(5), 2.0, size=300, seed=4))
    with pytest.raises(ValueError):
        sample_grid(2, np.zeros(2), 1.0, size=50)


def quadratic_fixture():
    hessian = np.array([[2.0, 0.5], [0.5, -1.0]])
    gradient = np.array([1.0, -2.0])

    def f(x):
        return 3.0 + gradient @ x + 0.5 * x @ hessian @ x

    alpha = np.array([2.0, -1.0, 0.5, 1.0, -2.0, 3.0])
    return f, (lambda x: gradient + hessian @ x), (lambda x: hessian), alpha


def test_error_profile_exact_model():
    f, grad, hess, alpha = quadratic_fixture()
    model = QuadraticModel(n=2, basis=CanonicalBasis(), alpha=alpha,
                           center=np.zeros(2))
    profile = error_profile(model, f, grad, hess, np.zeros(2), 0.5)
    assert profile == pytest.approx((0.0, 0.0, 0.0), abs=1e-12)


def test_error_profile_shifted_constant():
    delta = 0.2
    f, grad, hess, alpha = quadratic_fixture()
    alpha = alpha.copy()
    alpha[-1] += delta ** 3
    model = QuadraticModel(n=2, basis=CanonicalBasis(), alpha=alpha,
                           center=np.zeros(2))
    profile = error_profile(model, f, grad, hess, np.zeros(2), delta)
    assert profile.e_f == pytest.approx(1.0, rel=1e-9)
    assert profile.e_g == pytest.approx(0.0, abs=1e-9)
    assert profile.e_h == pytest.approx(0.0, abs=1e-9)


def rosenbrock(x):
    return 100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2


def rosenbrock_grad(x):
    return np.array([-400 * x[0] * (x[1] - x[0] ** 2) - 2 * (1 - x[0]),
                     200 * (x[1] - x[0] ** 2)])


def rosenbrock_hess(x):
    return np.array([[1200 * x[0] ** 2 - 400 * x[1] + 2, -400 * x[0]],
                     [-400 * x[0], 200.0]])


def test_error_profile_taylor_model_stable():
    delta = 0.1
    x0 = np.zeros(2)
    # second-order Taylor expansion at the origin
    model = QuadraticModel(n=2, basis=CanonicalBasis(),
                           alpha=[2.0, 200.0, 0.0, -2.0, 0.0, 1.0],
                           center=x0)
    coarse = error_profile(model, rosenbrock, rosenbrock_grad,
                           rosenbrock_hess, x0, delta,
                           grid=sample_grid(2, x0, delta, size=100))
    fine = error_profile(model, rosenbrock, rosenbrock_grad, rosenbrock_hess,
                         x0, delta, grid=sample_grid(2, x0, delta, size=10000))
    assert all(math.isfinite(v) and v > 0 for v in coarse)
    assert fine == pytest.approx(coarse, rel=0.1)
