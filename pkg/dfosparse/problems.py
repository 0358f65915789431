# dfosparse
# (c) 2026 dfosparse contributors
# SPDX-License-Identifier: GPL-2.0-or-later

"""Sparse-Hessian test problems from the CUTEr collection"""

import dataclasses
import functools
import logging
import typing

import numpy as np
import scipy.optimize
import sympy

HESSIAN_NNZ_TOL = 1e-10
ORACLE_GTOL = 1e-10

Objective = typing.Callable[[np.ndarray], float]
Expression = typing.Callable[[typing.Any, typing.Any], typing.Any]


class UnknownProblemError(RuntimeError):
    """Problem name not present in the registry"""

    def __init__(self, name: str) -> None:
        super().__init__(f"Unknown problem: {name}")
        self.name = name


@dataclasses.dataclass(frozen=True, eq=False)
class Problem:
    name: str
    n: int
    objective: Objective
    start: np.ndarray
    f_best: typing.Optional[float] = None
    nnz_upper: typing.Optional[int] = None
    reference_grad: typing.Optional[
        typing.Callable[[np.ndarray], np.ndarray]] = None
    reference_hess: typing.Optional[
        typing.Callable[[np.ndarray], np.ndarray]] = None


class ProblemEntry(typing.NamedTuple):
    """
    Registry entry

    The expression is written once against a namespace providing
    sin/cos/exp/tan/pi, so that it can be evaluated both with NumPy on
    floats and with SymPy on symbols.
    """

    expression: Expression
    default_n: int
    start: typing.Callable[[int], np.ndarray]
    f_best: typing.Callable[[int], typing.Optional[float]]
    nnz_upper: typing.Callable[[int], int]
    admissible: typing.Callable[[int], bool]
    pattern: str


def _dqdrtic(x: typing.Any, ns: typing.Any) -> typing.Any:
    return sum(x[i] ** 2 + 100 * x[i + 1] ** 2 + 100 * x[i + 2] ** 2
               for i in range(len(x) - 2))


def _arwhead(x: typing.Any, ns: typing.Any) -> typing.Any:
    n = len(x)
    return sum((x[i] ** 2 + x[n - 1] ** 2) ** 2 - 4 * x[i] + 3
               for i in range(n - 1))


def _srosenbr(x: typing.Any, ns: typing.Any) -> typing.Any:
    return sum(100 * (x[i + 1] - x[i] ** 2) ** 2 + (x[i] - 1) ** 2
               for i in range(0, len(x), 2))


def _powellsg(x: typing.Any, ns: typing.Any) -> typing.Any:
    return sum((x[i] + 10 * x[i + 1]) ** 2 +
               5 * (x[i + 2] - x[i + 3]) ** 2 +
               (x[i + 1] - 2 * x[i + 2]) ** 4 +
               10 * (x[i] - x[i + 3]) ** 4
               for i in range(0, len(x), 4))


def _woods(x: typing.Any, ns: typing.Any) -> typing.Any:
    return sum(100 * (x[i + 1] - x[i] ** 2) ** 2 + (1 - x[i]) ** 2 +
               90 * (x[i + 3] - x[i + 2] ** 2) ** 2 + (1 - x[i + 2]) ** 2 +
               10 * (x[i + 1] + x[i + 3] - 2) ** 2 +
               0.1 * (x[i + 1] - x[i + 3]) ** 2
               for i in range(0, len(x), 4))


def _liarwhd(x: typing.Any, ns: typing.Any) -> typing.Any:
    return sum(4 * (x[i] ** 2 - x[0]) ** 2 + (x[i] - 1) ** 2
               for i in range(len(x)))


def _morebv(x: typing.Any, ns: typing.Any) -> typing.Any:
    n = len(x)
    h = 1 / (n + 1)
    padded = [0, *x, 0]
    return sum((2 * padded[i] - padded[i - 1] - padded[i + 1] +
                h ** 2 * (padded[i] + i * h + 1) ** 3 / 2) ** 2
               for i in range(1, n + 1))


def _bdqrtic(x: typing.Any, ns: typing.Any) -> typing.Any:
    n = len(x)
    return sum((-4 * x[i] + 3) ** 2 +
               (x[i] ** 2 + 2 * x[i + 1] ** 2 + 3 * x[i + 2] ** 2 +
                4 * x[i + 3] ** 2 + 5 * x[n - 1] ** 2) ** 2
               for i in range(n - 4))


# Toint's coefficients of the chained Rosenbrock function
CHNROSNB_ALPHA = (
    1.25, 1.40, 2.40, 1.40, 1.75, 1.20, 2.25, 1.20, 1.00, 1.10,
    1.50, 1.60, 1.25, 1.25, 1.20, 1.20, 1.40, 0.50, 0.50, 1.25,
    1.80, 0.75, 1.25, 1.40, 1.60, 2.00, 1.00, 1.60, 1.25, 2.75,
    1.25, 1.25, 1.25, 3.00, 1.50, 2.00, 1.25, 1.40, 1.80, 1.50,
    2.20, 1.40, 1.50, 1.25, 2.00, 1.50, 1.25, 1.40, 0.60, 1.50,
)


def _chnrosnb(x: typing.Any, ns: typing.Any) -> typing.Any:
    return sum(16 * CHNROSNB_ALPHA[i] ** 2 * (x[i - 1] - x[i] ** 2) ** 2 +
               (x[i] - 1) ** 2
               for i in range(1, len(x)))


def _extrosnb(x: typing.Any, ns: typing.Any) -> typing.Any:
    return (x[0] - 1) ** 2 + sum(100 * (x[i] - x[i - 1] ** 2) ** 2
                                 for i in range(1, len(x)))


def _schmvett(x: typing.Any, ns: typing.Any) -> typing.Any:
    return sum(-1 / (1 + (x[i] - x[i + 1]) ** 2) -
               ns.sin((ns.pi * x[i + 1] + x[i + 2]) / 2) -
               ns.exp(-((x[i] + x[i + 2]) / x[i + 1] - 2) ** 2)
               for i in range(len(x) - 2))


def _cragglvy(x: typing.Any, ns: typing.Any) -> typing.Any:
    return sum((ns.exp(x[i]) - x[i + 1]) ** 4 +
               100 * (x[i + 1] - x[i + 2]) ** 6 +
               (ns.tan(x[i + 2] - x[i + 3]) + x[i + 2] - x[i + 3]) ** 4 +
               x[i] ** 8 +
               (x[i + 3] - 1) ** 2
               for i in range(0, len(x) - 2, 2))


GENHUMPS_ZETA = 2


def _genhumps(x: typing.Any, ns: typing.Any) -> typing.Any:
    return sum(ns.sin(GENHUMPS_ZETA * x[i]) ** 2 *
               ns.sin(GENHUMPS_ZETA * x[i + 1]) ** 2 +
               0.05 * (x[i] ** 2 + x[i + 1] ** 2)
               for i in range(len(x) - 1))


def _hilberta(x: typing.Any, ns: typing.Any) -> typing.Any:
    n = len(x)
    return sum(0.5 * x[i] * x[j] / (i + j + 1)
               for i in range(n) for j in range(n))


def _constant_start(value: float) -> typing.Callable[[int], np.ndarray]:
    return lambda n: np.full(n, value)


def _pattern_start(pattern: typing.Sequence[float]
                   ) -> typing.Callable[[int], np.ndarray]:
    return lambda n: np.resize(np.array(pattern, dtype=float), n)


def _first_other_start(first: float, other: float
                       ) -> typing.Callable[[int], np.ndarray]:
    def start(n: int) -> np.ndarray:
        x = np.full(n, other)
        x[0] = first
        return x
    return start


def _morebv_start(n: int) -> np.ndarray:
    t = np.arange(1, n + 1) / (n + 1)
    return t * (t - 1)


def _zero_optimum(n: int) -> typing.Optional[float]:
    return 0.0


def _oracle(name: str) -> typing.Callable[[int], typing.Optional[float]]:
    return lambda n: oracle_optimum(name, n)


REGISTRY: typing.Dict[str, ProblemEntry] = {
    "DQDRTIC": ProblemEntry(
        _dqdrtic, 10, _constant_start(3.0), _zero_optimum,
        lambda n: n, lambda n: n >= 3, "n >= 3"),
    "ARWHEAD": ProblemEntry(
        _arwhead, 15, _constant_start(1.0), _zero_optimum,
        lambda n: 2 * n - 1, lambda n: n >= 2, "n >= 2"),
    "SROSENBR": ProblemEntry(
        _srosenbr, 20, _pattern_start((-1.2, 1.0)), _zero_optimum,
        lambda n: 3 * n // 2, lambda n: n >= 2 and n % 2 == 0,
        "even n >= 2"),
    "POWELLSG": ProblemEntry(
        _powellsg, 20, _pattern_start((3.0, -1.0, 0.0, 1.0)), _zero_optimum,
        lambda n: 2 * n, lambda n: n >= 4 and n % 4 == 0,
        "multiple of 4"),
    "WOODS": ProblemEntry(
        _woods, 20, _pattern_start((-3.0, -1.0, -3.0, -1.0)), _zero_optimum,
        lambda n: 7 * n // 4, lambda n: n >= 4 and n % 4 == 0,
        "multiple of 4"),
    "LIARWHD": ProblemEntry(
        _liarwhd, 20, _constant_start(4.0), _zero_optimum,
        lambda n: 2 * n - 1, lambda n: n >= 2, "n >= 2"),
    "MOREBV": ProblemEntry(
        _morebv, 20, _morebv_start, _zero_optimum,
        lambda n: 3 * n - 3, lambda n: n >= 2, "n >= 2"),
    "BDQRTIC": ProblemEntry(
        _bdqrtic, 10, _constant_start(1.0), _oracle("BDQRTIC"),
        lambda n: 5 * n - 10, lambda n: n >= 5, "n >= 5"),
    "CHNROSNB": ProblemEntry(
        _chnrosnb, 15, _constant_start(-1.0), _zero_optimum,
        lambda n: 2 * n - 1,
        lambda n: 2 <= n <= len(CHNROSNB_ALPHA), "2 <= n <= 50"),
    "EXTROSNB": ProblemEntry(
        _extrosnb, 20, _constant_start(-1.0), _zero_optimum,
        lambda n: 2 * n - 1, lambda n: n >= 2, "n >= 2"),
    "SCHMVETT": ProblemEntry(
        _schmvett, 20, _constant_start(0.5), lambda n: -3.0 * (n - 2),
        lambda n: 3 * n - 3, lambda n: n >= 3, "n >= 3"),
    "CRAGGLVY": ProblemEntry(
        _cragglvy, 10, _first_other_start(1.0, 2.0), _oracle("CRAGGLVY"),
        lambda n: 2 * n - 1, lambda n: n >= 4 and n % 2 == 0,
        "even n >= 4"),
    "GENHUMPS": ProblemEntry(
        _genhumps, 5, _first_other_start(-506.0, 506.2), _zero_optimum,
        lambda n: 2 * n - 1, lambda n: n >= 2, "n >= 2"),
    "HILBERTA": ProblemEntry(
        _hilberta, 10, _constant_start(-3.0), _zero_optimum,
        lambda n: n * (n + 1) // 2, lambda n: n >= 1, "n >= 1"),
}

SYNTHETIC = "SYNTH_SPARSE_QUAD"
SYNTHETIC_DEFAULTS = {"n": 10, "h": 5, "seed": 0}


@functools.cache
def _reference_derivatives(name: str, n: int
                           ) -> typing.Tuple[typing.Callable[..., typing.Any],
                                             typing.Callable[..., typing.Any]]:
    """Differentiate the problem symbolically and compile with NumPy"""
    symbols = sympy.symbols(f"x0:{n}")
    expression = REGISTRY[name].expression(list(symbols), sympy)
    gradient = [sympy.diff(expression, s) for s in symbols]
    hessian = sympy.hessian(expression, symbols)
    return (sympy.lambdify([symbols], gradient, "numpy"),
            sympy.lambdify([symbols], hessian, "numpy"))


@functools.cache
def oracle_optimum(name: str, n: int) -> float:
    """
    Minimize a registry problem by BFGS with its reference gradient

    The run starts from the standard start and stops at a gradient norm
    of 1e-10 or when no further decrease is possible.  It provides f_best
    for problems without a closed-form optimum; the result is cached per
    (name, n).
    """
    entry = REGISTRY[name]
    gradient = _reference_derivatives(name, n)[0]
    result = scipy.optimize.minimize(
        lambda x: float(entry.expression(x, np)),
        entry.start(n),
        jac=lambda x: np.asarray(gradient(x), dtype=float),
        method="BFGS",
        options={"gtol": ORACLE_GTOL, "maxiter": 1000 * n})
    logging.debug(f"BFGS oracle for {name} (n={n}): f={result.fun:.12e} "
                  f"after {result.nit} iterations ({result.message})")
    return float(result.fun)


def _registry_problem(name: str, n: int) -> Problem:
    entry = REGISTRY[name]
    expression = entry.expression

    def objective(x: np.ndarray) -> float:
        return float(expression(np.asarray(x, dtype=float), np))

    def reference_grad(x: np.ndarray) -> np.ndarray:
        return np.asarray(_reference_derivatives(name, n)[0](x), dtype=float)

    def reference_hess(x: np.ndarray) -> np.ndarray:
        return np.asarray(_reference_derivatives(name, n)[1](x), dtype=float)

    return Problem(name=name,
                   n=n,
                   objective=objective,
                   start=entry.start(n),
                   f_best=entry.f_best(n),
                   nnz_upper=entry.nnz_upper(n),
                   reference_grad=reference_grad,
                   reference_hess=reference_hess)


def random_sparse_quadratic(n: int, h: int, rng: np.random.Generator
                            ) -> typing.Tuple[np.ndarray, np.ndarray, float]:
    """
    Draw (H, g, c) of a quadratic c + g'x + x'Hx/2 with h nonzero Hessian
    entries on or above the diagonal

    Nonzero magnitudes are uniform in [0.1, 1] with random signs, the
    gradient and constant are dense and uniform in [-1, 1].
    """
    upper = n * (n + 1) // 2
    if not 0 <= h <= upper:
        raise ValueError(f"Sparsity {h} out of range [0, {upper}] for n={n}")
    rows, cols = np.triu_indices(n)
    chosen = rng.choice(upper, size=h, replace=False)
    magnitudes = rng.uniform(0.1, 1.0, size=h)
    signs = rng.choice([-1.0, 1.0], size=h)
    hessian = np.zeros((n, n))
    hessian[rows[chosen], cols[chosen]] = signs * magnitudes
    hessian[cols[chosen], rows[chosen]] = signs * magnitudes
    gradient = rng.uniform(-1.0, 1.0, size=n)
    constant = float(rng.uniform(-1.0, 1.0))
    return hessian, gradient, constant


def synthetic_problem(n: int, h: int, seed: int) -> Problem:
    hessian, gradient, constant = random_sparse_quadratic(
        n, h, np.random.default_rng(seed))

    def objective(x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        return float(constant + gradient @ x + 0.5 * x @ hessian @ x)

    return Problem(name=SYNTHETIC,
                   n=n,
                   objective=objective,
                   start=np.zeros(n),
                   f_best=None,
                   nnz_upper=h,
                   reference_grad=lambda x: gradient + hessian @ x,
                   reference_hess=lambda x: hessian.copy())


def get_problem(name: str,
                n: typing.Optional[int] = None,
                *,
                h: typing.Optional[int] = None,
                seed: typing.Optional[int] = None,
                ) -> Problem:
    """Return the named problem, at its default dimension unless given"""
    key = name.upper()
    if key == SYNTHETIC:
        return synthetic_problem(
            n if n is not None else SYNTHETIC_DEFAULTS["n"],
            h if h is not None else SYNTHETIC_DEFAULTS["h"],
            seed if seed is not None else SYNTHETIC_DEFAULTS["seed"])
    entry = REGISTRY.get(key)
    if entry is None:
        raise UnknownProblemError(name)
    if n is None:
        n = entry.default_n
    if not entry.admissible(n):
        raise ValueError(f"Dimension n={n} not admissible for {key} "
                         f"(requires {entry.pattern})")
    return _registry_problem(key, n)


def hessian_nnz(problem: Problem, x: np.ndarray) -> int:
    """Count upper-triangle Hessian entries with magnitude above 1e-10"""
    if problem.reference_hess is None:
        raise ValueError(f"Problem {problem.name} has no reference Hessian")
    hessian = problem.reference_hess(np.asarray(x, dtype=float))
    return int(np.count_nonzero(np.abs(np.triu(hessian)) > HESSIAN_NNZ_TOL))


def list_problems() -> typing.List[typing.Tuple[str, int, int]]:
    """Return (name, default n, Hessian nonzero bound) for every problem"""
    listing = [(name, entry.default_n, entry.nnz_upper(entry.default_n))
               for name, entry in REGISTRY.items()]
    listing.append((SYNTHETIC, SYNTHETIC_DEFAULTS["n"],
                    SYNTHETIC_DEFAULTS["h"]))
    return listing
