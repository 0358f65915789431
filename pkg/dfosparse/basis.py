# dfosparse
# (c) 2026 dfosparse contributors
# SPDX-License-Identifier: GPL-2.0-or-later

import dataclasses
import math
import typing

import numpy as np

SQRT3 = math.sqrt(3.0)
SQRT5 = math.sqrt(5.0)

# names of the index classes of the hypercube basis, in coefficient order
PSI_CLASSES = ("2,i", "2,ij", "1,i", "0")


def basis_size(n: int) -> int:
    """Number of quadratic polynomials in dimension n, i.e. q"""
    return (n + 1) * (n + 2) // 2


def quadratic_size(n: int) -> int:
    """Length of the quadratic block, i.e. the split index"""
    return n * (n + 1) // 2


class CoefficientBlocks(typing.NamedTuple):
    diagonal: slice
    off_diagonal: slice
    linear: slice
    constant: int


def coefficient_blocks(n: int) -> CoefficientBlocks:
    """
    Return the slices of the coefficient vector for dimension n

    The order is: n diagonal quadratics, n(n-1)/2 off-diagonal quadratics
    (i < j, lexicographic), n linear terms, constant.
    """
    split = quadratic_size(n)
    return CoefficientBlocks(diagonal=slice(0, n),
                             off_diagonal=slice(n, split),
                             linear=slice(split, split + n),
                             constant=split + n)


def monomial_exponents(n: int) -> np.ndarray:
    """Exponent vectors of the canonical monomials, shape (q, n)"""
    eye = np.eye(n, dtype=int)
    i, j = np.triu_indices(n, 1)
    return np.vstack([2 * eye,
                      eye[i] + eye[j],
                      eye,
                      np.zeros((1, n), dtype=int)])


@dataclasses.dataclass(frozen=True)
class Basis:
    """A basis of the quadratic polynomials in the fixed coefficient order"""

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """
        Evaluate all basis polynomials at x

        x is either a single point (shape (n,)) or a stack of points
        (shape (p, n)); the result has shape (q,) or (p, q) respectively.
        """
        x = np.asarray(x, dtype=float)
        rows = self._evaluate(np.atleast_2d(x))
        if x.ndim == 1:
            return rows[0]
        return rows

    def _evaluate(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError()

    def canonical_expansion(self, n: int) -> np.ndarray:
        """Matrix whose row k expresses polynomial k in the canonical basis"""
        raise NotImplementedError()

    def to_canonical(self, alpha: np.ndarray, n: int) -> np.ndarray:
        raise NotImplementedError()

    def from_canonical(self, alpha: np.ndarray, n: int) -> np.ndarray:
        raise NotImplementedError()


@dataclasses.dataclass(frozen=True)
class CanonicalBasis(Basis):
    """The natural basis: x_i^2/2, x_i x_j, x_i, 1"""

    def _evaluate(self, points: np.ndarray) -> np.ndarray:
        i, j = np.triu_indices(points.shape[1], 1)
        return np.hstack([0.5 * points ** 2,
                          points[:, i] * points[:, j],
                          points,
                          np.ones((points.shape[0], 1))])

    def canonical_expansion(self, n: int) -> np.ndarray:
        return np.eye(basis_size(n))

    def to_canonical(self, alpha: np.ndarray, n: int) -> np.ndarray:
        return np.array(alpha, dtype=float)

    def from_canonical(self, alpha: np.ndarray, n: int) -> np.ndarray:
        return np.array(alpha, dtype=float)


@dataclasses.dataclass(frozen=True)
class PsiBasis(Basis):
    """
    Orthonormal quadratic basis on the hypercube [-delta, delta]^n

    The basis is orthonormal with respect to the uniform probability
    measure and bounded by 3 on the cube.
    """

    delta: float = 1.0

    def __post_init__(self) -> None:
        if not self.delta > 0:
            raise ValueError(f"Hypercube radius must be positive, "
                             f"got {self.delta!r}")

    def _evaluate(self, points: np.ndarray) -> np.ndarray:
        d2 = self.delta ** 2
        i, j = np.triu_indices(points.shape[1], 1)
        return np.hstack([3 * SQRT5 / (2 * d2) * points ** 2 - SQRT5 / 2,
                          3 / d2 * points[:, i] * points[:, j],
                          SQRT3 / self.delta * points,
                          np.ones((points.shape[0], 1))])

    def canonical_expansion(self, n: int) -> np.ndarray:
        d2 = self.delta ** 2
        blocks = coefficient_blocks(n)
        expansion = np.zeros((basis_size(n), basis_size(n)))
        for block, scale in ((blocks.diagonal, 3 * SQRT5 / d2),
                             (blocks.off_diagonal, 3 / d2),
                             (blocks.linear, SQRT3 / self.delta)):
            idx = np.arange(block.start, block.stop)
            expansion[idx, idx] = scale
        # psi_{2,i} = (3 sqrt5 / delta^2) (x_i^2 / 2) - sqrt5 / 2
        expansion[blocks.diagonal, blocks.constant] = -SQRT5 / 2
        expansion[blocks.constant, blocks.constant] = 1.0
        return expansion

    def to_canonical(self, alpha: np.ndarray, n: int) -> np.ndarray:
        d2 = self.delta ** 2
        blocks = coefficient_blocks(n)
        alpha = np.asarray(alpha, dtype=float)
        out = np.empty_like(alpha)
        out[blocks.diagonal] = 3 * SQRT5 / d2 * alpha[blocks.diagonal]
        out[blocks.off_diagonal] = 3 / d2 * alpha[blocks.off_diagonal]
        out[blocks.linear] = SQRT3 / self.delta * alpha[blocks.linear]
        out[blocks.constant] = (alpha[blocks.constant] -
                                SQRT5 / 2 * alpha[blocks.diagonal].sum())
        return out

    def from_canonical(self, alpha: np.ndarray, n: int) -> np.ndarray:
        d2 = self.delta ** 2
        blocks = coefficient_blocks(n)
        alpha = np.asarray(alpha, dtype=float)
        out = np.empty_like(alpha)
        # x_i^2 / 2 = delta^2 / (3 sqrt5) psi_{2,i} + delta^2 / 6
        out[blocks.diagonal] = d2 / (3 * SQRT5) * alpha[blocks.diagonal]
        out[blocks.off_diagonal] = d2 / 3 * alpha[blocks.off_diagonal]
        out[blocks.linear] = self.delta / SQRT3 * alpha[blocks.linear]
        out[blocks.constant] = (alpha[blocks.constant] +
                                d2 / 6 * alpha[blocks.diagonal].sum())
        return out


@dataclasses.dataclass(frozen=True, eq=False)
class QuadraticModel:
    """Quadratic polynomial of x - center, stored as basis coefficients"""

    n: int
    basis: Basis
    alpha: np.ndarray
    center: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha",
                           np.asarray(self.alpha, dtype=float))
        object.__setattr__(self, "center",
                           np.asarray(self.center, dtype=float))
        if self.alpha.shape != (basis_size(self.n),):
            raise ValueError(
                f"Expected {basis_size(self.n)} coefficients for n={self.n}, "
                f"got shape {self.alpha.shape}")
        if self.center.shape != (self.n,):
            raise ValueError(f"Center must have shape ({self.n},), "
                             f"got {self.center.shape}")

    @property
    def quadratic_block(self) -> np.ndarray:
        return self.alpha[:quadratic_size(self.n)]

    @property
    def linear_block(self) -> np.ndarray:
        return self.alpha[quadratic_size(self.n):]

    def canonical_terms(self
                        ) -> typing.Tuple[float, np.ndarray, np.ndarray]:
        """
        Return (c, g, H) such that m(x) = c + g's + s'Hs/2 with s = x - center
        """
        blocks = coefficient_blocks(self.n)
        canonical = self.basis.to_canonical(self.alpha, self.n)
        hessian = np.diag(canonical[blocks.diagonal])
        i, j = np.triu_indices(self.n, 1)
        hessian[i, j] = canonical[blocks.off_diagonal]
        hessian[j, i] = canonical[blocks.off_diagonal]
        return (float(canonical[blocks.constant]),
                canonical[blocks.linear].copy(),
                hessian)

    def values(self, points: np.ndarray) -> np.ndarray:
        """Evaluate the model at a stack of points"""
        return (self.basis.evaluate(np.atleast_2d(points) - self.center)
                @ self.alpha)


class ErrorProfile(typing.NamedTuple):
    e_f: float
    e_g: float
    e_h: float


def eval_basis(basis: Basis, n: int, x: np.ndarray) -> np.ndarray:
    """Evaluate the q basis polynomials of dimension n at point x"""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != n:
        raise ValueError(f"Point dimension {x.shape[-1]} does not match "
                         f"n={n}")
    return basis.evaluate(x)


def _uniform_moments(exponents: np.ndarray, delta: float) -> np.ndarray:
    """Moments of the uniform distribution on [-delta, delta]"""
    even = exponents % 2 == 0
    return np.where(even, float(delta) ** exponents / (exponents + 1), 0.0)


def gram_psi(n: int, delta: float) -> np.ndarray:
    """
    Gram matrix of the hypercube basis under the uniform measure

    The integrals are computed in closed form from the one-dimensional
    moments of the uniform distribution on [-delta, delta].
    """
    if n < 1:
        raise ValueError(f"Dimension must be positive, got {n}")
    exponents = monomial_exponents(n)
    pair_exponents = exponents[:, None, :] + exponents[None, :, :]
    monomial_gram = _uniform_moments(pair_exponents, delta).prod(axis=2)
    scale = np.ones(basis_size(n))
    scale[:n] = 0.5
    canonical_gram = np.outer(scale, scale) * monomial_gram
    expansion = PsiBasis(delta).canonical_expansion(n)
    return expansion @ canonical_gram @ expansion.T


def convert_coefficients(model: QuadraticModel, target: Basis
                         ) -> QuadraticModel:
    """Express the same polynomial in another basis"""
    if model.basis == target:
        return model
    canonical = model.basis.to_canonical(model.alpha, model.n)
    return QuadraticModel(n=model.n,
                          basis=target,
                          alpha=target.from_canonical(canonical, model.n),
                          center=model.center.copy())


def model_value_grad_hess(model: QuadraticModel, x: np.ndarray
                          ) -> typing.Tuple[float, np.ndarray, np.ndarray]:
    """Return the value, gradient and Hessian of the model at x"""
    constant, gradient, hessian = model.canonical_terms()
    step = np.asarray(x, dtype=float) - model.center
    hs = hessian @ step
    return (constant + gradient @ step + 0.5 * step @ hs,
            gradient + hs,
            hessian)


def sample_grid(n: int,
                center: np.ndarray,
                delta: float,
                size: int = 1000,
                seed: int = 0,
                ) -> np.ndarray:
    """
    Return evaluation points in the box of radius delta around center

    A lattice (with the corners) is used for n <= 3, a seeded uniform
    sample otherwise.
    """
    if size < 100:
        raise ValueError(f"Grid needs at least 100 points, got {size}")
    center = np.asarray(center, dtype=float)
    if n <= 3:
        per_axis = max(2, math.ceil(size ** (1 / n) - 1e-9))
        axis = np.linspace(-delta, delta, per_axis)
        mesh = np.meshgrid(*([axis] * n), indexing="ij")
        return center + np.stack(mesh, axis=-1).reshape(-1, n)
    rng = np.random.default_rng(seed)
    return center + rng.uniform(-delta, delta, size=(size, n))


def psi_sup_norms(n: int, delta: float, points_per_axis: int = 10
                  ) -> typing.Dict[str, float]:
    """Maximum of |psi| over a lattice on the cube, per index class"""
    axis = np.linspace(-delta, delta, points_per_axis)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    values = np.abs(PsiBasis(delta).evaluate(
        np.stack(mesh, axis=-1).reshape(-1, n)))
    blocks = coefficient_blocks(n)
    result = {
        "2,i": float(values[:, blocks.diagonal].max()),
        "1,i": float(values[:, blocks.linear].max()),
        "0": float(values[:, blocks.constant].max()),
    }
    if n > 1:
        result["2,ij"] = float(values[:, blocks.off_diagonal].max())
    return result


def error_profile(model: QuadraticModel,
                  f: typing.Callable[[np.ndarray], float],
                  gradient: typing.Callable[[np.ndarray], np.ndarray],
                  hessian: typing.Callable[[np.ndarray], np.ndarray],
                  x0: np.ndarray,
                  delta: float,
                  grid: typing.Optional[np.ndarray] = None,
                  ) -> ErrorProfile:
    """
    Measure how well the model approximates f around x0

    Returns the maxima over the grid of |f - m| / delta^3,
    ||grad f - grad m|| / delta^2 and ||hess f - hess m|| / delta.
    These are empirical estimates, not certificates.
    """
    if grid is None:
        grid = sample_grid(model.n, x0, delta)
    constant, model_gradient, model_hessian = model.canonical_terms()
    steps = grid - model.center
    model_values = (constant + steps @ model_gradient +
                    0.5 * np.einsum("ij,jk,ik->i", steps, model_hessian,
                                    steps))
    model_gradients = model_gradient + steps @ model_hessian

    e_f = e_g = e_h = 0.0
    for point, m_value, m_gradient in zip(grid, model_values,
                                          model_gradients):
        e_f = max(e_f, abs(f(point) - m_value))
        e_g = max(e_g, float(np.linalg.norm(gradient(point) - m_gradient)))
        e_h = max(e_h, float(np.linalg.norm(hessian(point) - model_hessian,
                                            ord=2)))
    return ErrorProfile(e_f=e_f / delta ** 3,
                        e_g=e_g / delta ** 2,
                        e_h=e_h / delta)
