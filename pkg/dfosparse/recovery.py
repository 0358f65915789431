# dfosparse
# (c) 2026 dfosparse contributors
# SPDX-License-Identifier: GPL-2.0-or-later

import dataclasses
import itertools
import logging
import math
import typing

import numpy as np
import scipy.linalg

from dfosparse.basis import (
    SQRT5,
    CanonicalBasis,
    PsiBasis,
    QuadraticModel,
    basis_size,
    coefficient_blocks,
    convert_coefficients,
    error_profile,
    quadratic_size,
    sample_grid,
)
from dfosparse.fit import FitError, SampleSet, fit_min_l1, fit_min_l1_noisy
from dfosparse.problems import random_sparse_quadratic
from dfosparse.subsolvers import LpProblem, LpSolverError, LpStatus, solve_lp

MAX_SUPPORTS = 10 ** 6
RECOVERY_TOL = 1e-6
RANK_TOL = 1e-10
LEMMA_SLACK = 1e-12


class CombinatorialGuardError(RuntimeError):
    """Exhaustive support enumeration would be too large"""

    def __init__(self, n_columns: int, order: int, count: int) -> None:
        super().__init__(
            f"Refusing to enumerate C({n_columns}, {order}) = {count} "
            f"supports (limit {MAX_SUPPORTS})")
        self.n_columns = n_columns
        self.order = order
        self.count = count


class RankDeficientError(RuntimeError):
    """Matrix is not of full column rank"""

    def __init__(self, smallest: float) -> None:
        super().__init__(f"Matrix is rank deficient (relative smallest "
                         f"singular value {smallest:.3e})")
        self.smallest = smallest


class RipReport(typing.NamedTuple):
    order: int
    delta: float
    support: typing.Tuple[int, ...]


class TrialRecord(typing.NamedTuple):
    trial: int
    seed: int
    n: int
    h: int
    p: int
    success: bool
    coef_err: float
    ef: float
    eg: float
    eh: float


@dataclasses.dataclass
class RecoveryReport:
    n: int
    h: int
    p: int
    delta: float
    noise: float = 0.0
    trials: typing.List[TrialRecord] = dataclasses.field(
        default_factory=list)

    @property
    def success_rate(self) -> float:
        if not self.trials:
            return 0.0
        return sum(t.success for t in self.trials) / len(self.trials)


def rip_constant(matrix: np.ndarray, order: int, *, batch: int = 4096
                 ) -> RipReport:
    """
    Compute the restricted isometry constant of the given order

    All supports of size order are enumerated; the extremal eigenvalues
    of the Gram matrices of the column submatrices are computed in
    batches.
    """
    matrix = np.asarray(matrix, dtype=float)
    rows, n_columns = matrix.shape
    if not 1 <= order <= n_columns:
        raise ValueError(f"Order {order} out of range [1, {n_columns}]")
    count = math.comb(n_columns, order)
    if count > MAX_SUPPORTS:
        raise CombinatorialGuardError(n_columns, order, count)

    best = -math.inf
    best_support: typing.Tuple[int, ...] = ()
    supports = itertools.combinations(range(n_columns), order)
    while True:
        chunk = list(itertools.islice(supports, batch))
        if not chunk:
            break
        index = np.array(chunk)
        columns = matrix[:, index].transpose(1, 0, 2)
        gram = columns.transpose(0, 2, 1) @ columns
        eigenvalues = np.linalg.eigvalsh(gram)
        smallest = eigenvalues[:, 0]
        if order > rows:
            smallest = np.zeros_like(smallest)
        deviation = np.maximum(1 - smallest, eigenvalues[:, -1] - 1)
        worst = int(np.argmax(deviation))
        if deviation[worst] > best:
            best = float(deviation[worst])
            best_support = chunk[worst]
    return RipReport(order=order,
                     delta=max(best, 0.0),
                     support=tuple(int(i) for i in best_support))


def partial_projector(a2: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the complement of range(A2)"""
    a2 = np.asarray(a2, dtype=float)
    if a2.ndim == 1:
        a2 = a2[:, None]
    rows, cols = a2.shape
    if cols == 0:
        return np.eye(rows)
    singular = scipy.linalg.svdvals(a2)
    smallest = 0.0 if cols > rows else float(singular[-1])
    if not smallest > RANK_TOL * singular[0]:
        raise RankDeficientError(
            smallest / singular[0] if singular[0] > 0 else 0.0)
    q, _ = scipy.linalg.qr(a2, mode="economic")
    return np.eye(rows) - q @ q.T


def partial_rip_constant(a1: np.ndarray, a2: np.ndarray, order: int
                         ) -> RipReport:
    """RIP constant of P A1, P projecting out range(A2)"""
    a1 = np.asarray(a1, dtype=float)
    return rip_constant(partial_projector(a2) @ a1, order)


def verify_l1_recovery(matrix: np.ndarray, zbar: np.ndarray) -> bool:
    """Check whether min ||z||_1 s.t. Az = A zbar recovers zbar"""
    matrix = np.asarray(matrix, dtype=float)
    zbar = np.asarray(zbar, dtype=float)
    n_columns = matrix.shape[1]
    result = solve_lp(LpProblem(c=np.ones(2 * n_columns),
                                a_eq=np.hstack([matrix, -matrix]),
                                b_eq=matrix @ zbar))
    if result.status != LpStatus.OPTIMAL or result.x is None:
        raise LpSolverError(f"l1 recovery LP is {result.status.value}")
    z = result.x[:n_columns] - result.x[n_columns:]
    scale = max(1.0, float(np.abs(zbar).max(initial=0.0)))
    return bool(np.abs(z - zbar).max() <= RECOVERY_TOL * scale)


def canonical_coefficients(hessian: np.ndarray, gradient: np.ndarray,
                           constant: float) -> np.ndarray:
    """Canonical coefficient vector of c + g'x + x'Hx/2"""
    i, j = np.triu_indices(len(gradient), 1)
    return np.concatenate([np.diag(hessian), hessian[i, j], gradient,
                           [constant]])


def _run_trials(n: int, h: int, p: int, trials: int, delta: float,
                seed: int, noise: float, grid_size: int) -> RecoveryReport:
    q = basis_size(n)
    if not 0 <= h <= quadratic_size(n):
        raise ValueError(f"Sparsity {h} out of range "
                         f"[0, {quadratic_size(n)}] for n={n}")
    if not 1 <= p <= q:
        raise ValueError(f"Sample size {p} out of range [1, {q}]")
    if not delta > 0:
        raise ValueError(f"Radius must be positive, got {delta!r}")

    basis = PsiBasis(delta)
    center = np.zeros(n)
    report = RecoveryReport(n=n, h=h, p=p, delta=delta, noise=noise)
    threshold = RECOVERY_TOL if noise == 0 else 10 * noise * math.sqrt(q)
    for trial, trial_seed in enumerate(
            np.random.SeedSequence(seed).generate_state(trials)):
        rng = np.random.default_rng(int(trial_seed))
        hessian, gradient, constant = random_sparse_quadratic(n, h, rng)
        # draw q points and q noise terms, so that smaller p are prefixes
        points = rng.uniform(-delta, delta, size=(q, n))[:p]
        perturbation = rng.uniform(-noise, noise, size=q)[:p]
        values = (constant + points @ gradient +
                  0.5 * np.einsum("ij,jk,ik->i", points, hessian, points))
        sample_set = SampleSet(points=points,
                               values=values + perturbation,
                               center=center)
        truth = canonical_coefficients(hessian, gradient, constant)

        try:
            if noise == 0:
                outcome = fit_min_l1(sample_set, basis, scaled=False)
            else:
                outcome = fit_min_l1_noisy(sample_set, math.sqrt(p) * noise,
                                           basis, scaled=False)
        except FitError as e:
            logging.warning(f"Trial {trial} (seed {trial_seed}): {e}")
            report.trials.append(TrialRecord(
                trial, int(trial_seed), n, h, p, False, math.inf,
                math.nan, math.nan, math.nan))
            continue

        model = convert_coefficients(outcome.model, CanonicalBasis())
        coef_err = float(np.linalg.norm(model.alpha - truth))

        def f(x: np.ndarray) -> float:
            return float(constant + gradient @ x + 0.5 * x @ hessian @ x)

        profile = error_profile(
            model, f,
            lambda x: gradient + hessian @ x,
            lambda x: hessian,
            center, delta,
            grid=sample_grid(n, center, delta, size=grid_size,
                             seed=int(trial_seed)))
        report.trials.append(TrialRecord(
            trial, int(trial_seed), n, h, p, coef_err <= threshold,
            coef_err, profile.e_f, profile.e_g, profile.e_h))

    logging.info(f"n={n} h={h} p={p}: success rate "
                 f"{report.success_rate:.2f} over {trials} trials")
    return report


def sparse_hessian_recovery_experiment(n: int,
                                       h: int,
                                       p: int,
                                       trials: int,
                                       delta: float = 1.0,
                                       seed: int = 0,
                                       *,
                                       grid_size: int = 1000,
                                       ) -> RecoveryReport:
    """
    Recover random h-sparse quadratics from p uniform samples

    Each trial draws the objective and then the sample set from its own
    seed (split from the master seed), fits the min-l1 model in the
    hypercube basis and counts a success if the canonical coefficients
    are within 1e-6 of the truth.
    """
    return _run_trials(n, h, p, trials, delta, seed, 0.0, grid_size)


def noisy_recovery_experiment(n: int,
                              h: int,
                              p: int,
                              trials: int,
                              delta: float,
                              noise: float,
                              seed: int = 0,
                              *,
                              grid_size: int = 1000,
                              ) -> RecoveryReport:
    """
    As the exact experiment, with uniform noise of magnitude noise on the
    sampled values and the band fit with eta = sqrt(p) noise
    """
    if not noise > 0:
        raise ValueError(f"Noise level must be positive, got {noise!r}")
    return _run_trials(n, h, p, trials, delta, seed, noise, grid_size)


def recovery_curve(n: int,
                   h: int,
                   p_grid: typing.Iterable[int],
                   trials: int,
                   delta: float = 1.0,
                   seed: int = 0,
                   noise: float = 0.0,
                   *,
                   grid_size: int = 1000,
                   ) -> typing.List[RecoveryReport]:
    return [_run_trials(n, h, p, trials, delta, seed, noise, grid_size)
            for p in p_grid]


def sample_bound_shape(n: int, h: int) -> float:
    """(h+n+1) log(h+n+1)^2 log q, the sample count without its constant"""
    m = h + n + 1
    return m * math.log(m) ** 2 * math.log(basis_size(n))


def tightness_witness(n: int) -> np.ndarray:
    """
    Unit-norm hypercube-basis coefficients attaining the value bound

    The model is the equally weighted sum of all off-diagonal basis
    polynomials; at the cube corner it equals 3 sqrt(n(n-1)/2).
    """
    if n < 2:
        raise ValueError(f"Witness requires n >= 2, got {n}")
    alpha = np.zeros(basis_size(n))
    alpha[coefficient_blocks(n).off_diagonal] = math.sqrt(2 / (n * (n - 1)))
    return alpha


def _dimension_from_size(q: int) -> int:
    n = (math.isqrt(8 * q + 1) - 3) // 2
    if basis_size(n) != q:
        raise ValueError(f"{q} is not the size of a quadratic basis")
    return n


def lemma_bound_check(alpha: np.ndarray, delta: float, grid: np.ndarray
                      ) -> bool:
    """
    Check the value, gradient and Hessian bounds of a hypercube-basis model

    With c = card(alpha): |m| <= 3 sqrt(c) ||alpha||, ||grad m|| <=
    3 sqrt(5) sqrt(c) ||alpha|| / delta and ||hess m|| <= 3 sqrt(5)
    sqrt(c) ||alpha|| / delta^2 at every grid point.
    """
    alpha = np.asarray(alpha, dtype=float)
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    n = _dimension_from_size(len(alpha))
    if np.abs(grid).max() > delta * (1 + LEMMA_SLACK):
        raise ValueError(f"Grid leaves the cube of radius {delta}")
    model = QuadraticModel(n=n, basis=PsiBasis(delta), alpha=alpha,
                           center=np.zeros(n))
    scale = (math.sqrt(np.count_nonzero(alpha)) *
             float(np.linalg.norm(alpha)) * (1 + LEMMA_SLACK))
    _, gradient, hessian = model.canonical_terms()
    values = np.abs(model.values(grid))
    gradients = np.linalg.norm(gradient + grid @ hessian, axis=1)
    hessian_norm = float(np.linalg.norm(hessian, ord=2))
    return bool(values.max() <= 3 * scale and
                gradients.max() <= 3 * SQRT5 * scale / delta and
                hessian_norm <= 3 * SQRT5 * scale / delta ** 2)
