# dfosparse
# (c) 2026 dfosparse contributors
# SPDX-License-Identifier: GPL-2.0-or-later

import dataclasses
import enum
import math
import typing

import numpy as np
import scipy.linalg

from dfosparse.basis import (
    Basis,
    CanonicalBasis,
    QuadraticModel,
    coefficient_blocks,
    quadratic_size,
)
from dfosparse.subsolvers import (
    LpIterationLimitError,
    LpProblem,
    LpSolverError,
    LpStatus,
    solve_lp,
)

SVD_CUTOFF = 1e-12
SVD_FLOOR = 1e-300


class FitMethod(enum.Enum):
    MFN = "mfn"
    MIN_L1 = "min_l1"
    MIN_L1_NOISY = "min_l1_noisy"


class DegenerateSampleSetError(RuntimeError):
    """All sample points coincide with the center"""

    def __init__(self, size: int) -> None:
        super().__init__(
            f"All {size} sample points coincide with the center, "
            "cannot scale")
        self.size = size


class FitError(RuntimeError):
    """Model fit failed"""

    def __init__(self, method: FitMethod, reason: str) -> None:
        super().__init__(f"{method.value} fit failed: {reason}")
        self.method = method
        self.reason = reason


@dataclasses.dataclass(frozen=True, eq=False)
class SampleSet:
    """
    Interpolation points with their function values

    For a scaled set, points are (y - offset) / scale in terms of the
    original points y, and the center is the origin.
    """

    points: np.ndarray
    values: np.ndarray
    center: np.ndarray
    scale: float = 1.0
    offset: typing.Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "points",
                           np.atleast_2d(np.asarray(self.points, dtype=float)))
        object.__setattr__(self, "values",
                           np.asarray(self.values, dtype=float).reshape(-1))
        object.__setattr__(self, "center",
                           np.asarray(self.center, dtype=float))
        if len(self.points) == 0:
            raise ValueError("Sample set must not be empty")
        if len(self.points) != len(self.values):
            raise ValueError(f"{len(self.points)} points but "
                             f"{len(self.values)} values")
        if self.center.shape != (self.n,):
            raise ValueError(f"Center must have shape ({self.n},), "
                             f"got {self.center.shape}")
        if len(np.unique(self.points, axis=0)) != len(self.points):
            raise ValueError("Sample points must be pairwise distinct")
        if not self.scale > 0:
            raise ValueError(f"Scale must be positive, got {self.scale!r}")

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.points)

    @property
    def unscaled_points(self) -> np.ndarray:
        if self.offset is None:
            return self.points.copy()
        return self.offset + self.scale * self.points


class FitOutcome(typing.NamedTuple):
    model: QuadraticModel
    method: FitMethod
    eta: float
    cutoff_count: int
    lp_iterations: int
    residual: float


def _centered_points(sample_set: SampleSet, scaled: bool
                     ) -> typing.Tuple[np.ndarray, float]:
    """Shift the points to the center and optionally into the unit ball"""
    shifted = sample_set.points - sample_set.center
    if not scaled:
        return shifted, 1.0
    radius = float(np.linalg.norm(shifted, axis=1).max())
    if radius == 0:
        raise DegenerateSampleSetError(len(sample_set))
    return shifted / radius, radius


def scale_sample_set(sample_set: SampleSet) -> SampleSet:
    """Shift the sample set to the origin and scale it into B_2(0; 1)"""
    points, radius = _centered_points(sample_set, scaled=True)
    offset = sample_set.center.copy()
    if sample_set.offset is not None:
        offset = sample_set.offset + sample_set.scale * offset
    return SampleSet(points=points,
                     values=sample_set.values.copy(),
                     center=np.zeros(sample_set.n),
                     scale=sample_set.scale * radius,
                     offset=offset)


def build_interp_matrix(basis: Basis, sample_set: SampleSet,
                        scaled: bool = True) -> np.ndarray:
    """Return M(basis, Y) with rows for the centered (and scaled) points"""
    points, _ = _centered_points(sample_set, scaled)
    return basis.evaluate(points)


def unscale_model(model: QuadraticModel, scale: float,
                  offset: np.ndarray) -> QuadraticModel:
    """
    Map a model of z = (x - offset) / scale back to a model of x

    The result is expressed in the canonical basis.
    """
    n = model.n
    blocks = coefficient_blocks(n)
    canonical = model.basis.to_canonical(model.alpha, n)
    canonical[blocks.diagonal] /= scale ** 2
    canonical[blocks.off_diagonal] /= scale ** 2
    canonical[blocks.linear] /= scale
    return QuadraticModel(n=n,
                          basis=CanonicalBasis(),
                          alpha=canonical,
                          center=np.asarray(offset, dtype=float) +
                          scale * model.center)


def _finish(alpha: np.ndarray, basis: Basis, sample_set: SampleSet,
            radius: float, scaled: bool) -> typing.Tuple[QuadraticModel,
                                                          float]:
    n = sample_set.n
    if scaled:
        model = unscale_model(
            QuadraticModel(n=n, basis=basis, alpha=alpha,
                           center=np.zeros(n)),
            radius, sample_set.center)
    else:
        model = QuadraticModel(n=n, basis=basis, alpha=alpha,
                               center=sample_set.center.copy())
    residual = float(np.abs(model.values(sample_set.points) -
                            sample_set.values).max())
    return model, residual


def _truncated_solve(matrix: np.ndarray, rhs: np.ndarray
                     ) -> typing.Tuple[np.ndarray, int]:
    """
    Minimum-norm least-squares solution by truncated SVD

    Returns the solution and the number of singular values dropped.
    """
    if matrix.size == 0:
        return np.zeros(matrix.shape[1]), 0
    try:
        u, sigma, vt = scipy.linalg.svd(matrix, full_matrices=False)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise FitError(FitMethod.MFN, f"SVD failed: {e}") from e
    keep = sigma > max(SVD_CUTOFF * sigma[0], SVD_FLOOR)
    solution = vt[keep].T @ ((u[:, keep].T @ rhs) / sigma[keep])
    return solution, int(np.count_nonzero(~keep))


def fit_mfn(sample_set: SampleSet,
            basis: Basis = CanonicalBasis(),
            scaled: bool = True,
            ) -> FitOutcome:
    """
    Fit the minimum Frobenius norm interpolating model

    With at least q points the interpolation system M alpha = f is solved
    directly.  Otherwise the linear block is eliminated: with the columns
    of Z spanning the null space of M_L', alpha_Q is the minimum-norm
    solution of Z'M_Q alpha_Q = Z'f, and alpha_L then solves
    M_L alpha_L = f - M_Q alpha_Q.  Singular values below 1e-12 times the
    largest are dropped in either solve.
    """
    points, radius = _centered_points(sample_set, scaled)
    matrix = basis.evaluate(points)
    values = sample_set.values
    if not np.abs(matrix).max() > SVD_FLOOR:
        raise FitError(FitMethod.MFN, "interpolation matrix vanishes")

    if len(points) >= matrix.shape[1]:
        alpha, cutoff_count = _truncated_solve(matrix, values)
    else:
        split = quadratic_size(sample_set.n)
        m_q = matrix[:, :split]
        m_l = matrix[:, split:]
        try:
            null = scipy.linalg.null_space(m_l.T)
        except (np.linalg.LinAlgError, ValueError) as e:
            raise FitError(FitMethod.MFN, f"SVD failed: {e}") from e
        alpha_q, cutoff_count = _truncated_solve(null.T @ m_q,
                                                 null.T @ values)
        alpha_l, _ = _truncated_solve(m_l, values - m_q @ alpha_q)
        alpha = np.concatenate([alpha_q, alpha_l])

    model, residual = _finish(alpha, basis, sample_set, radius, scaled)
    return FitOutcome(model=model,
                      method=FitMethod.MFN,
                      eta=0.0,
                      cutoff_count=cutoff_count,
                      lp_iterations=0,
                      residual=residual)


def _fit_l1(sample_set: SampleSet, basis: Basis, scaled: bool,
            eta: float, method: FitMethod) -> FitOutcome:
    points, radius = _centered_points(sample_set, scaled)
    matrix = basis.evaluate(points)
    split = quadratic_size(sample_set.n)
    m_q = matrix[:, :split]
    m_l = matrix[:, split:]
    p, n_linear = len(points), m_l.shape[1]

    # alpha_Q = u - v with u, v >= 0; alpha_L free
    rows = np.hstack([m_q, -m_q, m_l])
    cost = np.concatenate([np.full(2 * split, 1.0 / p), np.zeros(n_linear)])
    lower = np.concatenate([np.zeros(2 * split), np.full(n_linear, -np.inf)])
    if method == FitMethod.MIN_L1:
        problem = LpProblem(c=cost, a_eq=rows, b_eq=sample_set.values,
                            lower=lower)
    else:
        band = eta / math.sqrt(p)
        problem = LpProblem(
            c=cost,
            a_ub=np.vstack([rows, -rows]),
            b_ub=np.concatenate([sample_set.values + band,
                                 band - sample_set.values]),
            lower=lower)

    try:
        result = solve_lp(problem)
    except (LpIterationLimitError, LpSolverError) as e:
        raise FitError(method, str(e)) from e
    if result.status != LpStatus.OPTIMAL or result.x is None:
        raise FitError(method, f"LP is {result.status.value}")

    x = result.x
    alpha = np.concatenate([x[:split] - x[split:2 * split], x[2 * split:]])
    model, residual = _finish(alpha, basis, sample_set, radius, scaled)
    return FitOutcome(model=model,
                      method=method,
                      eta=eta,
                      cutoff_count=0,
                      lp_iterations=result.iterations,
                      residual=residual)


def fit_min_l1(sample_set: SampleSet,
               basis: Basis = CanonicalBasis(),
               scaled: bool = True,
               ) -> FitOutcome:
    """
    Fit the interpolating model with minimal l1 norm of the quadratic block
    """
    return _fit_l1(sample_set, basis, scaled, 0.0, FitMethod.MIN_L1)


def fit_min_l1_noisy(sample_set: SampleSet,
                     eta: float,
                     basis: Basis = CanonicalBasis(),
                     scaled: bool = True,
                     ) -> FitOutcome:
    """
    Fit the l1-minimal model within the band |M alpha - f|_inf <= eta/sqrt(p)
    """
    if eta < 0:
        raise ValueError(f"Noise radius must be nonnegative, got {eta!r}")
    if eta == 0:
        return fit_min_l1(sample_set, basis, scaled)._replace(
            method=FitMethod.MIN_L1_NOISY)
    return _fit_l1(sample_set, basis, scaled, eta, FitMethod.MIN_L1_NOISY)
