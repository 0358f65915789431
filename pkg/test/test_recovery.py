# dfosparse
# (c) 2026 dfosparse contributors
# SPDX-License-Identifier: GPL-2.0-or-later

import itertools
import math

import numpy as np
import pytest
import scipy.linalg

from dfosparse.basis import PsiBasis, QuadraticModel, basis_size, sample_grid
from dfosparse.recovery import (
    CombinatorialGuardError,
    RankDeficientError,
    RecoveryReport,
    canonical_coefficients,
    lemma_bound_check,
    noisy_recovery_experiment,
    partial_projector,
    partial_rip_constant,
    rip_constant,
    sample_bound_shape,
    sparse_hessian_recovery_experiment,
    tightness_witness,
    verify_l1_recovery,
)


def naive_rip(matrix, order):
    worst = 0.0
    for support in itertools.combinations(range(matrix.shape[1]), order):
        columns = matrix[:, support]
        eigenvalues = np.linalg.eigvalsh(columns.T @ columns)
        worst = max(worst, 1 - eigenvalues[0], eigenvalues[-1] - 1)
    return worst


def test_rip_orthogonal(rng):
    q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    for order in (1, 3, 6):
        assert rip_constant(q, order).delta == pytest.approx(0.0, abs=1e-12)


def test_rip_parallel_columns():
    report = rip_constant(np.array([[1.0, 1.0], [0.0, 0.0]]), 2)
    assert report.delta == pytest.approx(1.0)
    assert report.support == (0, 1)
    assert report.order == 2


@pytest.mark.parametrize("order", [1, 2])
def test_rip_matches_naive(rng, order):
    matrix = rng.standard_normal((20, 40)) / math.sqrt(20)
    report = rip_constant(matrix, order, batch=100)
    assert report.delta == pytest.approx(naive_rip(matrix, order), abs=1e-10)
    columns = matrix[:, report.support]
    eigenvalues = np.linalg.eigvalsh(columns.T @ columns)
    assert max(1 - eigenvalues[0], eigenvalues[-1] - 1) == pytest.approx(
        report.delta, abs=1e-10)


def test_rip_monotone(rng):
    matrix = rng.standard_normal((6, 10)) / math.sqrt(6)
    deltas = [rip_constant(matrix, s).delta for s in range(1, 8)]
    assert all(a <= b + 1e-12 for a, b in zip(deltas, deltas[1:]))
    # beyond the row count some Gram matrix is singular
    assert deltas[-1] >= 1.0


def test_rip_guard():
    with pytest.raises(CombinatorialGuardError) as e:
        rip_constant(np.zeros((2, 60)), 10)
    assert e.value.n_columns == 60
    assert e.value.order == 10
    assert e.value.count == math.comb(60, 10)


@pytest.mark.parametrize("order", [0, 5])
def test_rip_order_range(order):
    with pytest.raises(ValueError):
        rip_constant(np.eye(4), order)


def test_projector_single_column():
    projector = partial_projector(np.array([1.0, 0.0, 0.0]))
    np.testing.assert_allclose(projector, np.diag([0.0, 1.0, 1.0]),
                               atol=1e-15)


def test_projector_square(rng):
    projector = partial_projector(rng.standard_normal((4, 4)))
    np.testing.assert_allclose(projector, np.zeros((4, 4)), atol=1e-12)


def test_projector_properties(rng):
    a2 = rng.standard_normal((12, 4))
    projector = partial_projector(a2)
    np.testing.assert_allclose(projector, projector.T, atol=1e-12)
    np.testing.assert_allclose(projector @ projector, projector, atol=1e-12)
    np.testing.assert_allclose(projector @ a2, 0, atol=1e-12)
    np.testing.assert_allclose(np.linalg.eigvalsh(projector),
                               [0.0] * 4 + [1.0] * 8, atol=1e-12)


def test_projector_empty():
    np.testing.assert_array_equal(partial_projector(np.zeros((4, 0))),
                                  np.eye(4))


RANK_DEFICIENT = {
    "repeated": np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]),
    "wide": np.ones((2, 3)) + np.eye(2, 3),
    "zero": np.zeros((3, 1)),
}


@pytest.mark.parametrize("case", RANK_DEFICIENT)
def test_projector_rank_deficient(case):
    with pytest.raises(RankDeficientError):
        partial_projector(RANK_DEFICIENT[case])


def test_partial_rip_without_a2(rng):
    a1 = rng.standard_normal((8, 12)) / math.sqrt(8)
    assert partial_rip_constant(a1, np.zeros((8, 0)), 2).delta == \
        pytest.approx(rip_constant(a1, 2).delta, abs=1e-12)


def test_partial_rip_orthogonal_blocks(rng):
    q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    report = partial_rip_constant(q[:, :3], q[:, 3:5], 2)
    assert report.delta == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(50))
def test_partial_rip_bounded_by_full(seed):
    # each projected Gram matrix is a Schur complement of a full one
    matrix = np.random.default_rng(seed).standard_normal((10, 10))
    matrix /= math.sqrt(10)
    partial = partial_rip_constant(matrix[:, :8], matrix[:, 8:], 2).delta
    assert partial <= rip_constant(matrix, 4).delta + 1e-10


def test_recovery_of_zero(rng):
    assert verify_l1_recovery(rng.standard_normal((5, 10)), np.zeros(10))


def identity_hadamard():
    return np.hstack([np.eye(16), scipy.linalg.hadamard(16) / 4])


def test_identity_hadamard_rip():
    assert rip_constant(identity_hadamard(), 2).delta == pytest.approx(0.25)


@pytest.mark.parametrize("column", [0, 7, 16, 31])
def test_identity_hadamard_one_sparse(column):
    zbar = np.zeros(32)
    zbar[column] = -2.5
    assert verify_l1_recovery(identity_hadamard(), zbar)


def test_identity_hadamard_two_sparse():
    zbar = np.zeros(32)
    zbar[3] = 3.0
    zbar[20] = -2.0
    assert verify_l1_recovery(identity_hadamard(), zbar)


def test_repeated_columns_ambiguous():
    k = 4
    matrix = np.hstack([np.eye(k), np.eye(k)])
    unit = np.eye(2 * k)
    assert not verify_l1_recovery(matrix, unit[0] + unit[k])
    assert not (verify_l1_recovery(matrix, unit[0]) and
                verify_l1_recovery(matrix, unit[k]))


def test_determined_recovery():
    n = 2
    report = sparse_hessian_recovery_experiment(n, 2, basis_size(n), 5,
                                                seed=1, grid_size=200)
    assert report.success_rate == 1.0
    assert len(report.trials) == 5
    for trial in report.trials:
        assert trial.coef_err <= 1e-6
        assert trial.ef <= 1e-5


def test_affine_recovery():
    n = 3
    report = sparse_hessian_recovery_experiment(n, 0, n + 1, 5, delta=0.5,
                                                grid_size=200)
    assert report.success_rate == 1.0
    assert [t.p for t in report.trials] == [n + 1] * 5


def test_experiment_deterministic():
    first = sparse_hessian_recovery_experiment(4, 3, 10, 4, seed=9,
                                               grid_size=100)
    second = sparse_hessian_recovery_experiment(4, 3, 10, 4, seed=9,
                                                grid_size=100)
    assert [t.seed for t in first.trials] == [t.seed for t in second.trials]
    assert [t.coef_err for t in first.trials] == \
        [t.coef_err for t in second.trials]


EXPERIMENT_INVALID = {
    "sparsity": (2, 4, 3),
    "too-few": (2, 1, 0),
    "too-many": (2, 1, 7),
}


@pytest.mark.parametrize("case", EXPERIMENT_INVALID)
def test_experiment_validation(case):
    n, h, p = EXPERIMENT_INVALID[case]
    with pytest.raises(ValueError):
        sparse_hessian_recovery_experiment(n, h, p, 1)


def test_noisy_experiment():
    report = noisy_recovery_experiment(3, 2, 10, 3, 1.0, 1e-4, seed=2,
                                       grid_size=100)
    assert report.noise == 1e-4
    assert len(report.trials) == 3
    with pytest.raises(ValueError):
        noisy_recovery_experiment(3, 2, 10, 3, 1.0, 0.0)


def test_success_rate_empty():
    assert RecoveryReport(n=2, h=1, p=3, delta=1.0).success_rate == 0.0


def test_sample_bound_shape():
    m = 5 + 10 + 1
    assert sample_bound_shape(10, 5) == pytest.approx(
        m * math.log(m) ** 2 * math.log(66))


def test_canonical_coefficients():
    hessian = np.array([[1.0, 2.0], [2.0, 3.0]])
    np.testing.assert_array_equal(
        canonical_coefficients(hessian, np.array([4.0, 5.0]), 6.0),
        [1.0, 3.0, 2.0, 4.0, 5.0, 6.0])


def test_lemma_constant_model():
    alpha = np.zeros(basis_size(3))
    alpha[-1] = 2.0
    assert lemma_bound_check(alpha, 1.0, sample_grid(3, np.zeros(3), 1.0,
                                                     size=100))


@pytest.mark.parametrize("n", [2, 3, 5])
def test_tightness_witness(n):
    alpha = tightness_witness(n)
    assert np.linalg.norm(alpha) == pytest.approx(1.0)
    model = QuadraticModel(n=n, basis=PsiBasis(1.0), alpha=alpha,
                           center=np.zeros(n))
    assert model.values(np.ones((1, n)))[0] == pytest.approx(
        3 * math.sqrt(n * (n - 1) / 2), abs=1e-10)
    assert lemma_bound_check(alpha, 1.0, np.ones((1, n)))


@pytest.mark.parametrize("delta", [0.1, 1.0, 10.0])
def test_lemma_random_models(rng, delta):
    n = 6
    grid = sample_grid(n, np.zeros(n), delta, size=10000, seed=1)
    for _ in range(100):
        alpha = rng.standard_normal(basis_size(n))
        alpha[rng.random(basis_size(n)) < 0.7] = 0.0
        assert lemma_bound_check(alpha, delta, grid)


def test_lemma_grid_outside_cube():
    with pytest.raises(ValueError):
        lemma_bound_check(np.ones(basis_size(2)), 1.0, np.array([[1.5, 0.0]]))
