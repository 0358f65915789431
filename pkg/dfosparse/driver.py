# dfosparse
# (c) 2026 dfosparse contributors
# SPDX-License-Identifier: GPL-2.0-or-later

import dataclasses
import enum
import logging
import math
import typing

import numpy as np

from dfosparse.basis import QuadraticModel, basis_size
from dfosparse.fit import (
    DegenerateSampleSetError,
    FitError,
    FitOutcome,
    SampleSet,
    fit_mfn,
    fit_min_l1,
)
from dfosparse.subsolvers import TrsError, TrsProblem, solve_trs


@dataclasses.dataclass(frozen=True)
class DfoConfig:
    """Constants of the trust-region method"""

    eps_g: float = 1e-5
    delta_stop: float = 1e-5
    eta1: float = 1e-3
    eta2: float = 0.75
    gamma1: float = 0.5
    gamma2: float = 2.0
    delta0: float = 1.0
    # model norm: 1 for min-l1 models, 2 for min-Frobenius models
    t: int = 2
    max_fevals: int = 15000
    prune_trigger: float = 1e-3
    prune_base: float = 100.0
    min_kept_points: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 < self.eta1 < self.eta2:
            raise ValueError(f"Require 0 < eta1 < eta2, got eta1={self.eta1}"
                             f", eta2={self.eta2}")
        if not 0 < self.gamma1 < 1 < self.gamma2:
            raise ValueError(f"Require 0 < gamma1 < 1 < gamma2, got "
                             f"gamma1={self.gamma1}, gamma2={self.gamma2}")
        for name in ("eps_g", "delta_stop", "delta0", "prune_trigger",
                     "prune_base"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, "
                                 f"got {getattr(self, name)!r}")
        if self.t not in (1, 2):
            raise ValueError(f"Model norm t must be 1 or 2, got {self.t!r}")
        if self.max_fevals < 1:
            raise ValueError(f"max_fevals must be positive, "
                             f"got {self.max_fevals!r}")
        if self.min_kept_points < 1:
            raise ValueError(f"min_kept_points must be positive, "
                             f"got {self.min_kept_points!r}")


class Termination(enum.Enum):
    GRADIENT = "gradient"
    RADIUS = "radius"
    BUDGET = "budget"


class IterationRecord(typing.NamedTuple):
    k: int
    x: np.ndarray
    f: float
    delta: float
    sample_size: int
    rho: float
    success: bool
    gnorm: float
    fevals: int
    fallback: bool
    # trial point was already in the sample set and was not re-evaluated
    duplicate: bool = False


@dataclasses.dataclass
class DfoTrace:
    records: typing.List[IterationRecord] = dataclasses.field(
        default_factory=list)
    # (cumulative feval count when evaluated, value) of every iterate
    iterates: typing.List[typing.Tuple[int, float]] = dataclasses.field(
        default_factory=list)
    termination: typing.Optional[Termination] = None
    x: typing.Optional[np.ndarray] = None
    f: float = math.inf
    fevals: int = 0
    gnorm: float = math.inf

    def fevals_to_reach(self, target: float) -> typing.Optional[int]:
        """Feval count at the first iterate with f <= target, if any"""
        for fevals, value in self.iterates:
            if value <= target:
                return fevals
        return None


class _CountedObjective:
    def __init__(self, f: typing.Callable[[np.ndarray], float]) -> None:
        self.f = f
        self.count = 0

    def __call__(self, x: np.ndarray) -> float:
        self.count += 1
        return float(self.f(x))


def initial_sample_set(f: typing.Callable[[np.ndarray], float],
                       x0: np.ndarray,
                       delta: float,
                       directions: typing.Optional[np.ndarray] = None,
                       f_x0: typing.Optional[float] = None,
                       ) -> SampleSet:
    """
    Evaluate f on the stencil {x0, x0 +- delta d_i}

    The directions default to the coordinate axes; f is not called at x0
    when its value is passed in.
    """
    n = len(x0)
    if directions is None:
        directions = np.eye(n)
    points = np.vstack([x0, x0 + delta * directions, x0 - delta * directions])
    values = [f(x0) if f_x0 is None else f_x0]
    values.extend(f(y) for y in points[1:])
    return SampleSet(points=points, values=np.array(values), center=x0.copy())


def update_sample_set(sample_set: SampleSet,
                      trial: np.ndarray,
                      f_trial: float,
                      success: bool,
                      p_max: int,
                      ) -> SampleSet:
    """
    Add the evaluated trial point to the sample set

    Below p_max points nothing is discarded.  At p_max the point farthest
    from the next iterate (lowest index on ties) makes room, on unsuccessful
    iterations only if the trial is not farther from x_k than that point.
    The returned set is centered at the next iterate.
    """
    x_k = sample_set.center
    x_next = trial if success else x_k
    points = sample_set.points
    values = sample_set.values
    if len(sample_set) >= p_max:
        out = int(np.argmax(np.linalg.norm(points - x_next, axis=1)))
        if not success and (np.linalg.norm(trial - x_k) >
                            np.linalg.norm(points[out] - x_k)):
            return dataclasses.replace(sample_set, center=x_next.copy())
        points = np.delete(points, out, axis=0)
        values = np.delete(values, out)
    return SampleSet(points=np.vstack([points, trial]),
                     values=np.append(values, f_trial),
                     center=x_next.copy())


def prune_radius_factor(distances: np.ndarray,
                        delta: float,
                        cfg: DfoConfig,
                        ) -> typing.Optional[float]:
    """
    Return the smallest r in {base, 2 base, 4 base, ...} such that enough
    points lie within r * delta, or None if pruning does not apply
    """
    if delta >= cfg.prune_trigger or len(distances) < cfg.min_kept_points:
        return None
    r = cfg.prune_base
    while np.count_nonzero(distances <= r * delta) < cfg.min_kept_points:
        r *= 2
    return r


def prune_far_points(sample_set: SampleSet,
                     delta: float,
                     cfg: DfoConfig,
                     ) -> SampleSet:
    """Discard points outside B_2(center; r delta) once delta is small"""
    distances = np.linalg.norm(sample_set.points - sample_set.center, axis=1)
    r = prune_radius_factor(distances, delta, cfg)
    if r is None:
        return sample_set
    keep = distances <= r * delta
    if keep.all():
        return sample_set
    logging.debug(f"Discarding {np.count_nonzero(~keep)} sample points "
                  f"outside radius {r * delta:.3e}")
    return SampleSet(points=sample_set.points[keep],
                     values=sample_set.values[keep],
                     center=sample_set.center.copy())


def build_model(sample_set: SampleSet, cfg: DfoConfig
                ) -> typing.Tuple[FitOutcome, bool]:
    """
    Fit the model of the configured norm, falling back to min-Frobenius

    Returns the fit and whether the fallback was used.
    """
    if cfg.t == 2:
        return fit_mfn(sample_set), False
    try:
        return fit_min_l1(sample_set), False
    except FitError as e:
        logging.warning(f"{e}, falling back to minimum Frobenius norm model")
        return fit_mfn(sample_set), True


def _trust_region_step(model: QuadraticModel, delta: float
                       ) -> typing.Tuple[np.ndarray, float]:
    """Return the step and the predicted reduction"""
    _, g, h = model.canonical_terms()
    try:
        step = solve_trs(TrsProblem(g=g, h=h, delta=delta)).step
    except TrsError as e:
        gnorm = np.linalg.norm(g)
        logging.warning(f"{e}, taking the Cauchy direction instead")
        step = -delta * g / gnorm if gnorm > 0 else np.zeros_like(g)
    return step, float(-(g @ step + 0.5 * step @ h @ step))


def run_dfo_tr(f: typing.Callable[[np.ndarray], float],
               x0: np.ndarray,
               cfg: DfoConfig = DfoConfig(),
               ) -> DfoTrace:
    """
    Minimize f by the interpolation-based trust-region method

    Models are rebuilt every iteration from the sample set, by minimum
    Frobenius norm (t=2) or minimum l1 norm (t=1) interpolation.
    """
    x = np.array(x0, dtype=float)
    if x.ndim != 1 or not np.all(np.isfinite(x)):
        raise ValueError("Starting point must be a finite vector")
    n = len(x)
    p_min = n + 1
    p_max = basis_size(n)
    rng = np.random.default_rng(cfg.seed)
    objective = _CountedObjective(f)
    trace = DfoTrace()

    delta = cfg.delta0
    sample_set = initial_sample_set(objective, x, delta)
    f_x = float(sample_set.values[0])
    if not math.isfinite(f_x):
        raise ValueError(f"Objective is not finite at the starting point "
                         f"({f_x})")
    trace.iterates.append((1, f_x))

    k = 0
    while True:
        try:
            outcome, fallback = build_model(sample_set, cfg)
        except (FitError, DegenerateSampleSetError) as e:
            # rebuild the geometry around x_k with a rotated stencil
            delta *= cfg.gamma1
            logging.warning(f"{e}, resampling with radius {delta:.3e}")
            if delta <= cfg.delta_stop:
                trace.termination = Termination.RADIUS
                break
            if objective.count + 2 * n > cfg.max_fevals:
                trace.termination = Termination.BUDGET
                break
            rotation, _ = np.linalg.qr(rng.standard_normal((n, n)))
            sample_set = initial_sample_set(objective, x, delta,
                                            rotation.T, f_x0=f_x)
            continue

        model = outcome.model
        _, g, _ = model.canonical_terms()
        gnorm = float(np.linalg.norm(g))
        trace.gnorm = gnorm

        def record(rho: float, success: bool,
                   duplicate: bool = False) -> None:
            trace.records.append(IterationRecord(
                k=k, x=x.copy(), f=f_x, delta=delta,
                sample_size=len(sample_set), rho=rho, success=success,
                gnorm=gnorm, fevals=objective.count, fallback=fallback,
                duplicate=duplicate))

        if gnorm <= cfg.eps_g:
            trace.termination = Termination.GRADIENT
        elif delta <= cfg.delta_stop:
            trace.termination = Termination.RADIUS
        elif objective.count >= cfg.max_fevals:
            trace.termination = Termination.BUDGET
        if trace.termination is not None:
            record(math.nan, False)
            break

        step, pred = _trust_region_step(model, delta)
        trial = x + step
        matches = np.flatnonzero(np.all(sample_set.points == trial, axis=1))
        duplicate = len(matches) > 0
        if duplicate:
            f_trial = float(sample_set.values[matches[0]])
        else:
            f_trial = objective(trial)
        rho = (f_x - f_trial) / pred if pred > 0 else -math.inf
        success = rho >= cfg.eta1 and math.isfinite(f_trial)
        record(rho, success, duplicate)
        logging.debug(f"k={k} f={f_x:.10e} delta={delta:.3e} "
                      f"|Y|={len(sample_set)} rho={rho:.3e} "
                      f"gnorm={gnorm:.3e} fevals={objective.count}")

        if success:
            if rho > cfg.eta2:
                delta *= cfg.gamma2
        elif duplicate or len(sample_set) >= p_min:
            delta *= cfg.gamma1

        if duplicate and success:
            sample_set = SampleSet(points=sample_set.points,
                                   values=sample_set.values,
                                   center=trial.copy())
        elif not duplicate and math.isfinite(f_trial):
            sample_set = update_sample_set(sample_set, trial, f_trial,
                                           success, p_max)
        if success:
            x = trial
            f_x = f_trial
            trace.iterates.append((objective.count, f_x))
        sample_set = prune_far_points(sample_set, delta, cfg)
        k += 1

    assert trace.termination is not None
    trace.x = x
    trace.f = f_x
    trace.fevals = objective.count
    logging.info(f"Terminated ({trace.termination.value}) after {k} "
                 f"iterations and {trace.fevals} evaluations, "
                 f"f={f_x:.10e}")
    return trace
