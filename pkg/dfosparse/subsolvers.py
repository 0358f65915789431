# dfosparse
# (c) 2026 dfosparse contributors
# SPDX-License-Identifier: GPL-2.0-or-later

import dataclasses
import enum
import logging
import math
import typing

import numpy as np
import scipy.linalg
import scipy.optimize

LP_FEASIBILITY_TOL = 1e-8
REFINE_ROUNDS = 3


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LpIterationLimitError(RuntimeError):
    """LP solver hit its iteration cap"""

    def __init__(self, limit: int) -> None:
        super().__init__(f"LP iteration limit of {limit} reached")
        self.limit = limit


class LpSolverError(RuntimeError):
    """LP solver failed numerically"""

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class TrsError(RuntimeError):
    """Trust-region subproblem could not be solved"""


@dataclasses.dataclass(frozen=True, eq=False)
class LpProblem:
    """
    Linear program: min c'x s.t. A_eq x = b_eq, A_ub x <= b_ub,
    lower <= x <= upper

    Missing bounds default to x >= 0; use -inf / inf for free variables.
    """

    c: np.ndarray
    a_eq: typing.Optional[np.ndarray] = None
    b_eq: typing.Optional[np.ndarray] = None
    a_ub: typing.Optional[np.ndarray] = None
    b_ub: typing.Optional[np.ndarray] = None
    lower: typing.Optional[np.ndarray] = None
    upper: typing.Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        n_cols = len(self.c)
        for name in ("a_eq", "a_ub"):
            matrix = getattr(self, name)
            rhs = getattr(self, "b" + name[1:])
            if (matrix is None) != (rhs is None):
                raise ValueError(f"{name} and its right-hand side must be "
                                 "given together")
            if matrix is None:
                continue
            if matrix.ndim != 2 or matrix.shape[1] != n_cols:
                raise ValueError(f"{name} has shape {matrix.shape}, "
                                 f"expected (*, {n_cols})")
            if matrix.shape[0] != len(rhs):
                raise ValueError(f"{name} has {matrix.shape[0]} rows but "
                                 f"its right-hand side has {len(rhs)}")
            if not np.all(np.isfinite(rhs)):
                raise ValueError(f"Right-hand side of {name} is not finite")
        for name in ("lower", "upper"):
            bound = getattr(self, name)
            if bound is not None and len(bound) != n_cols:
                raise ValueError(f"{name} has {len(bound)} entries, "
                                 f"expected {n_cols}")

    @property
    def n_rows(self) -> int:
        return sum(len(b) for b in (self.b_eq, self.b_ub) if b is not None)

    @property
    def lower_bounds(self) -> np.ndarray:
        if self.lower is None:
            return np.zeros(len(self.c))
        return np.asarray(self.lower, dtype=float)

    @property
    def upper_bounds(self) -> np.ndarray:
        if self.upper is None:
            return np.full(len(self.c), np.inf)
        return np.asarray(self.upper, dtype=float)


class LpResult(typing.NamedTuple):
    x: typing.Optional[np.ndarray]
    status: LpStatus
    objective: float
    iterations: int


@dataclasses.dataclass(frozen=True, eq=False)
class TrsProblem:
    """min g's + s'Hs/2 subject to ||s||_2 <= delta"""

    g: np.ndarray
    h: np.ndarray
    delta: float

    def __post_init__(self) -> None:
        n = len(self.g)
        if self.h.shape != (n, n):
            raise ValueError(f"Hessian has shape {self.h.shape}, "
                             f"expected ({n}, {n})")
        asymmetry = np.abs(self.h - self.h.T).max(initial=0.0)
        if asymmetry > 1e-12 * max(1.0, np.abs(self.h).max(initial=0.0)):
            raise ValueError(f"Hessian is not symmetric (max asymmetry "
                             f"{asymmetry:.3e})")
        if not self.delta > 0:
            raise ValueError(f"Trust-region radius must be positive, "
                             f"got {self.delta!r}")


class TrsResult(typing.NamedTuple):
    step: np.ndarray
    multiplier: float
    hard_case: bool
    iterations: int


def _scale_rows(matrix: np.ndarray, rhs: np.ndarray
                ) -> typing.Tuple[np.ndarray, np.ndarray]:
    norms = np.abs(matrix).max(axis=1, initial=0.0)
    norms[norms == 0] = 1.0
    return matrix / norms[:, None], rhs / norms


def refine_vertex(x: np.ndarray,
                  lower: np.ndarray,
                  upper: np.ndarray,
                  a_eq: typing.Optional[np.ndarray] = None,
                  b_eq: typing.Optional[np.ndarray] = None,
                  a_ub: typing.Optional[np.ndarray] = None,
                  b_ub: typing.Optional[np.ndarray] = None,
                  ) -> np.ndarray:
    """
    Polish an LP solution so that its active rows hold to working precision

    Variables within the feasibility tolerance of a bound are pinned to
    it.  The others are corrected by a least-squares solve on the equality
    rows and the active inequality rows, repeated while corrections push
    further variables onto their bounds.
    """
    x = np.array(x, dtype=float)
    tol = LP_FEASIBILITY_TOL
    finite_lower = np.isfinite(lower)
    finite_upper = np.isfinite(upper)
    for _ in range(REFINE_ROUNDS):
        at_lower = finite_lower & (x <= lower + tol)
        at_upper = finite_upper & (x >= upper - tol)
        x[at_lower] = lower[at_lower]
        x[at_upper] = upper[at_upper]
        free = ~(at_lower | at_upper)

        rows = []
        rhs = []
        if a_eq is not None and b_eq is not None:
            rows.append(a_eq)
            rhs.append(b_eq)
        if a_ub is not None and b_ub is not None:
            active = a_ub @ x - b_ub >= -tol
            rows.append(a_ub[active])
            rhs.append(b_ub[active])
        matrix = np.vstack(rows) if rows else np.zeros((0, len(x)))
        if matrix.shape[0] == 0 or not free.any():
            break
        residual = np.concatenate(rhs) - matrix @ x
        try:
            correction = scipy.linalg.lstsq(matrix[:, free], residual)[0]
        except (np.linalg.LinAlgError, ValueError):
            break
        x[free] += correction
        if np.all(x[free] > lower[free] - tol) and np.all(
                x[free] < upper[free] + tol):
            break
    return x


def _violation(x: np.ndarray,
               lower: np.ndarray,
               upper: np.ndarray,
               a_eq: typing.Optional[np.ndarray],
               b_eq: typing.Optional[np.ndarray],
               a_ub: typing.Optional[np.ndarray],
               b_ub: typing.Optional[np.ndarray],
               ) -> float:
    violation = max(np.max(lower - x, initial=0.0),
                    np.max(x - upper, initial=0.0))
    if a_eq is not None and b_eq is not None:
        violation = max(violation, np.abs(a_eq @ x - b_eq).max(initial=0.0))
    if a_ub is not None and b_ub is not None:
        violation = max(violation, np.max(a_ub @ x - b_ub, initial=0.0))
    return float(violation)


def solve_lp(problem: LpProblem,
             *,
             max_iterations: typing.Optional[int] = None,
             ) -> LpResult:
    """
    Solve the linear program using the HiGHS engine

    Rows are scaled to unit max-norm before solving.  The returned optimum
    is polished by refine_vertex and re-checked for primal feasibility on
    the scaled rows.
    """
    n_cols = len(problem.c)
    limit = max_iterations or 10 * (problem.n_rows + n_cols)
    a_eq = b_eq = a_ub = b_ub = None
    if problem.a_eq is not None and problem.b_eq is not None:
        a_eq, b_eq = _scale_rows(np.asarray(problem.a_eq, dtype=float),
                                 np.asarray(problem.b_eq, dtype=float))
    if problem.a_ub is not None and problem.b_ub is not None:
        a_ub, b_ub = _scale_rows(np.asarray(problem.a_ub, dtype=float),
                                 np.asarray(problem.b_ub, dtype=float))
    lower = problem.lower_bounds
    upper = problem.upper_bounds
    bounds = [(None if math.isinf(lo) else lo, None if math.isinf(up) else up)
              for lo, up in zip(lower, upper)]

    result = scipy.optimize.linprog(
        np.asarray(problem.c, dtype=float),
        A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
        bounds=bounds,
        method="highs",
        options={
            "maxiter": limit,
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-9,
        })

    if result.status == 1:
        raise LpIterationLimitError(limit)
    if result.status == 2:
        return LpResult(None, LpStatus.INFEASIBLE, math.inf, result.nit)
    if result.status == 3:
        return LpResult(None, LpStatus.UNBOUNDED, -math.inf, result.nit)
    if result.status != 0:
        raise LpSolverError(f"LP solver failed: {result.message}")

    x = np.asarray(result.x, dtype=float)
    violation = _violation(x, lower, upper, a_eq, b_eq, a_ub, b_ub)
    refined = refine_vertex(x, lower, upper, a_eq, b_eq, a_ub, b_ub)
    refined_violation = _violation(refined, lower, upper,
                                   a_eq, b_eq, a_ub, b_ub)
    if refined_violation < violation:
        logging.debug(f"LP refinement reduced the violation from "
                      f"{violation:.3e} to {refined_violation:.3e}")
        x, violation = refined, refined_violation
    if violation > LP_FEASIBILITY_TOL:
        raise LpSolverError(
            f"LP solution violates constraints by {violation:.3e}")
    c = np.asarray(problem.c, dtype=float)
    return LpResult(x, LpStatus.OPTIMAL, float(c @ x), int(result.nit))


def solve_trs(problem: TrsProblem,
              *,
              max_iterations: int = 100,
              boundary_rtol: float = 1e-10,
              ) -> TrsResult:
    """
    Solve the trust-region subproblem (More-Sorensen)

    The secular equation 1/||s(lambda)|| = 1/delta is solved by a
    safeguarded Newton iteration in the eigenbasis of H; the hard case is
    completed with a step along the leftmost eigenvector.
    """
    g = np.asarray(problem.g, dtype=float)
    h = 0.5 * (problem.h + problem.h.T)
    delta = problem.delta
    gnorm = float(np.linalg.norm(g))
    if gnorm == 0 and not h.any():
        return TrsResult(np.zeros_like(g), 0.0, False, 0)

    try:
        eigenvalues, eigenvectors = scipy.linalg.eigh(h)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise TrsError(f"Eigendecomposition failed: {e}") from e

    g_hat = eigenvectors.T @ g
    leftmost = eigenvalues[0]
    eig_tol = 1e-12 * max(1.0, float(np.abs(eigenvalues).max()))

    if leftmost > eig_tol:
        newton = -(eigenvectors @ (g_hat / eigenvalues))
        if np.linalg.norm(newton) <= delta:
            return TrsResult(newton, 0.0, False, 0)

    lo = max(0.0, -leftmost)
    if leftmost <= eig_tol:
        near = eigenvalues - leftmost <= eig_tol
        if np.linalg.norm(g_hat[near]) <= 1e-12 * max(1.0, gnorm):
            partial = -(eigenvectors[:, ~near] @
                        (g_hat[~near] / (eigenvalues[~near] + lo)))
            partial_norm = float(np.linalg.norm(partial))
            if partial_norm <= delta:
                tau = math.sqrt(max(0.0, delta ** 2 - partial_norm ** 2))
                step = partial + tau * eigenvectors[:, 0]
                return TrsResult(step, lo, True, 0)

    # ||s(lo + gnorm/delta)|| <= delta, so [lo, hi] brackets the root
    a, b = lo, lo + gnorm / delta
    lam = b
    coeffs = g_hat / (eigenvalues + lam)
    snorm = float(np.linalg.norm(coeffs))
    iterations = 0
    while abs(snorm - delta) > boundary_rtol * delta:
        if iterations == max_iterations:
            break
        iterations += 1
        if snorm > delta:
            a = lam
        else:
            b = lam
        denom = eigenvalues + lam
        dphi = float(np.sum(g_hat ** 2 / denom ** 3)) / snorm ** 3
        candidate = lam - (1 / snorm - 1 / delta) / dphi
        lam = candidate if a < candidate < b else 0.5 * (a + b)
        coeffs = g_hat / (eigenvalues + lam)
        snorm = float(np.linalg.norm(coeffs))

    step = -(eigenvectors @ coeffs)
    if not np.all(np.isfinite(step)) or snorm > delta * (1 + 1e-6):
        raise TrsError(f"Secular iteration did not converge "
                       f"(||s||={snorm:.6e}, delta={delta:.6e})")
    return TrsResult(step, lam, False, iterations)
