# dfosparse
# (c) 2026 dfosparse contributors
# SPDX-License-Identifier: GPL-2.0-or-later

import concurrent.futures
import csv
import dataclasses
import logging
import os
import tempfile
import time
import typing
from pathlib import Path

import numpy as np

from dfosparse.driver import DfoConfig, DfoTrace, run_dfo_tr
from dfosparse.problems import get_problem
from dfosparse.recovery import RecoveryReport

# r_{p,s} assigned to failed runs
FAIL_RATIO = 2.0 ** 30

RECORD_FIELDS = ("problem", "n", "solver", "acc", "fevals", "final_f",
                 "final_gnorm", "status", "total_fevals")
RECOVERY_FIELDS = ("trial", "seed", "n", "h", "p", "success", "coef_err",
                   "ef", "eg", "eh")


class Solver(typing.NamedTuple):
    label: str
    t: int


SOLVERS = {
    "frob": Solver("DFO-TR-Frob", 2),
    "l1": Solver("DFO-TR-l1", 1),
}


class BenchPreset(typing.NamedTuple):
    budget: int
    eps_g: float
    delta_stop: float
    # tolerance of the rerun when the accuracy was not reached, if any
    retry_tolerance: typing.Optional[float]


PRESETS = {
    "table1": BenchPreset(budget=15000, eps_g=1e-5, delta_stop=1e-5,
                          retry_tolerance=1e-7),
    "table3": BenchPreset(budget=5000, eps_g=1e-5, delta_stop=1e-5,
                          retry_tolerance=None),
}


class Status:
    OK = "ok"
    FAIL = "fail"
    NOREF = "noref"


class OutputError(RuntimeError):
    """Writing benchmark output failed"""

    def __init__(self, path: Path, reason: str) -> None:
        super().__init__(f"Unable to write {path}: {reason}")
        self.path = path
        self.reason = reason


class BenchmarkRecord(typing.NamedTuple):
    problem: str
    n: int
    solver: str
    acc: int
    # evaluations needed to reach f_best + 10^-acc, None if never reached
    fevals: typing.Optional[int]
    total_fevals: int
    final_f: float
    final_gnorm: float
    status: str
    wall_time: float = 0.0


@dataclasses.dataclass
class ProfileTable:
    acc: typing.Optional[int]
    solvers: typing.List[str]
    log2_tau: np.ndarray
    rho: typing.Dict[str, np.ndarray]


class _Cell(typing.NamedTuple):
    problem: str
    n: typing.Optional[int]
    solver: str
    accs: typing.Tuple[int, ...]
    preset: str
    budget: int
    config: DfoConfig


def _run_cell(cell: _Cell) -> typing.List[BenchmarkRecord]:
    problem = get_problem(cell.problem, cell.n)
    solver = SOLVERS[cell.solver]
    preset = PRESETS[cell.preset]
    config = dataclasses.replace(cell.config,
                                 t=solver.t,
                                 max_fevals=cell.budget,
                                 eps_g=preset.eps_g,
                                 delta_stop=preset.delta_stop)

    def targets_reached(trace_: DfoTrace) -> bool:
        if problem.f_best is None:
            return True
        return all(trace_.fevals_to_reach(problem.f_best + 10.0 ** -acc)
                   is not None for acc in cell.accs)

    start = time.perf_counter()
    trace = run_dfo_tr(problem.objective, problem.start, config)
    if preset.retry_tolerance is not None and not targets_reached(trace):
        logging.info(f"{problem.name} ({solver.label}): accuracy not reached"
                     f", rerunning with tolerance {preset.retry_tolerance}")
        trace = run_dfo_tr(problem.objective, problem.start,
                           dataclasses.replace(
                               config,
                               eps_g=preset.retry_tolerance,
                               delta_stop=preset.retry_tolerance))
    wall_time = time.perf_counter() - start

    records = []
    for acc in cell.accs:
        fevals: typing.Optional[int] = None
        if problem.f_best is None:
            status = Status.NOREF
        else:
            fevals = trace.fevals_to_reach(problem.f_best + 10.0 ** -acc)
            status = Status.FAIL if fevals is None else Status.OK
        records.append(BenchmarkRecord(problem=problem.name,
                                       n=problem.n,
                                       solver=solver.label,
                                       acc=acc,
                                       fevals=fevals,
                                       total_fevals=trace.fevals,
                                       final_f=trace.f,
                                       final_gnorm=trace.gnorm,
                                       status=status,
                                       wall_time=wall_time))
    logging.info(f"{problem.name} n={problem.n} {solver.label}: "
                 f"{trace.fevals} evaluations, f={trace.f:.6e}")
    return records


def run_benchmark(problems: typing.Iterable[
                      typing.Tuple[str, typing.Optional[int]]],
                  solvers: typing.Iterable[str] = ("frob", "l1"),
                  accs: typing.Iterable[int] = (4, 6),
                  preset: str = "table1",
                  budget: typing.Optional[int] = None,
                  seed: int = 0,
                  *,
                  config: typing.Optional[DfoConfig] = None,
                  jobs: int = 1,
                  ) -> typing.List[BenchmarkRecord]:
    """
    Run every solver on every problem and record time to accuracy

    Each (problem, solver) cell is run once; the evaluation count for
    every accuracy level is read off the iterate history.  The result
    is sorted by problem, solver and accuracy.
    """
    solvers = list(solvers)
    levels = tuple(accs)
    if preset not in PRESETS:
        raise ValueError(f"Unknown preset {preset!r} (one of: "
                         f"{', '.join(PRESETS)})")
    for solver in solvers:
        if solver not in SOLVERS:
            raise ValueError(f"Unknown solver {solver!r} (one of: "
                             f"{', '.join(SOLVERS)})")
    base = dataclasses.replace(config or DfoConfig(), seed=seed)
    cells = [_Cell(problem=name,
                   n=n,
                   solver=solver,
                   accs=levels,
                   preset=preset,
                   budget=budget or PRESETS[preset].budget,
                   config=base)
             for name, n in problems
             for solver in solvers]

    records: typing.List[BenchmarkRecord] = []
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            for cell_records in pool.map(_run_cell, cells):
                records.extend(cell_records)
    else:
        for cell in cells:
            records.extend(_run_cell(cell))
    return sorted(records, key=lambda r: (r.problem, r.n, r.solver, r.acc))


def performance_profile(records: typing.Iterable[BenchmarkRecord],
                        acc: typing.Optional[int] = None,
                        ) -> ProfileTable:
    """
    Compute the performance profile of the solvers in records

    Only records of the given accuracy are used (all records must share
    one accuracy when acc is None); problems without a reference value
    are skipped.  Failed runs get the ratio 2^30.
    """
    selected = [r for r in records
                if (acc is None or r.acc == acc) and r.status != Status.NOREF]
    if not selected:
        raise ValueError("No benchmark records to profile")
    accs = {r.acc for r in selected}
    if len(accs) > 1:
        raise ValueError(f"Records mix accuracy levels {sorted(accs)}, "
                         "pass acc")

    solvers = sorted({r.solver for r in selected})
    problems = sorted({(r.problem, r.n) for r in selected})
    counts = np.full((len(problems), len(solvers)), np.nan)
    for r in selected:
        counts[problems.index((r.problem, r.n)),
               solvers.index(r.solver)] = (np.inf if r.fevals is None
                                           else r.fevals)
    if np.isnan(counts).any():
        raise ValueError("Every problem needs a record for every solver")

    best = counts.min(axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        ratios = np.where(np.isfinite(counts), counts / best, FAIL_RATIO)

    finite = ratios[ratios < FAIL_RATIO]
    taus = np.unique(np.concatenate([[1.0], finite]))
    rho = {solver: (ratios[:, j][None, :] <= taus[:, None]).mean(axis=1)
           for j, solver in enumerate(solvers)}
    return ProfileTable(acc=accs.pop(),
                        solvers=solvers,
                        log2_tau=np.log2(taus),
                        rho=rho)


def performance_profiles(records: typing.Iterable[BenchmarkRecord]
                         ) -> typing.List[ProfileTable]:
    """One profile per accuracy level that has data"""
    records = list(records)
    return [performance_profile(records, acc)
            for acc in sorted({r.acc for r in records
                               if r.status != Status.NOREF})]


def _format_float(value: float) -> str:
    return f"{value:.17g}"


def _write_csv(path: Path,
               header: typing.Sequence[str],
               rows: typing.Iterable[typing.Sequence[str]],
               ) -> None:
    """Write a CSV file atomically"""
    try:
        with tempfile.NamedTemporaryFile(mode="w",
                                         encoding="utf-8",
                                         newline="",
                                         dir=path.parent,
                                         delete=False) as outf:
            try:
                writer = csv.writer(outf, lineterminator="\n")
                writer.writerow(header)
                writer.writerows(rows)
            except BaseException:
                Path(outf.name).unlink()
                raise
        Path(outf.name).rename(path)
    except OSError as e:
        raise OutputError(path, e.strerror or str(e)) from e


def write_records_csv(path: Path,
                      records: typing.Iterable[BenchmarkRecord]) -> None:
    _write_csv(path, RECORD_FIELDS, (
        (r.problem,
         str(r.n),
         r.solver,
         str(r.acc),
         "" if r.status == Status.NOREF else
         "FAIL" if r.fevals is None else str(r.fevals),
         _format_float(r.final_f),
         _format_float(r.final_gnorm),
         r.status,
         str(r.total_fevals))
        for r in records))


def read_records_csv(path: Path) -> typing.List[BenchmarkRecord]:
    """Read records written by write_records_csv (without wall times)"""
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != RECORD_FIELDS:
            raise ValueError(f"{path}: unexpected header "
                             f"{reader.fieldnames!r}")
        return [BenchmarkRecord(
                    problem=row["problem"],
                    n=int(row["n"]),
                    solver=row["solver"],
                    acc=int(row["acc"]),
                    fevals=(int(row["fevals"])
                            if row["fevals"] not in ("", "FAIL") else None),
                    total_fevals=int(row["total_fevals"]),
                    final_f=float(row["final_f"]),
                    final_gnorm=float(row["final_gnorm"]),
                    status=row["status"])
                for row in reader]


def write_profile_csv(path: Path,
                      profiles: typing.Sequence[ProfileTable]) -> None:
    solvers = sorted({s for profile in profiles for s in profile.solvers})
    rows = []
    for profile in profiles:
        for i, log2_tau in enumerate(profile.log2_tau):
            rows.append([
                "" if profile.acc is None else str(profile.acc),
                _format_float(float(log2_tau)),
                *(_format_float(float(profile.rho[s][i]))
                  if s in profile.rho else "" for s in solvers)])
    _write_csv(path, ["acc", "tau", *(f"rho_{s}" for s in solvers)], rows)


def write_recovery_csv(path: Path,
                       reports: typing.Iterable[RecoveryReport]) -> None:
    _write_csv(path, RECOVERY_FIELDS, (
        (str(t.trial), str(t.seed), str(t.n), str(t.h), str(t.p),
         str(int(t.success)), _format_float(t.coef_err),
         _format_float(t.ef), _format_float(t.eg), _format_float(t.eh))
        for report in reports
        for t in report.trials))


def emit_outputs(directory: Path,
                 records: typing.Optional[
                     typing.Sequence[BenchmarkRecord]] = None,
                 profiles: typing.Optional[
                     typing.Sequence[ProfileTable]] = None,
                 recovery: typing.Optional[
                     typing.Sequence[RecoveryReport]] = None,
                 ) -> typing.List[Path]:
    """
    Write records.csv, profile.csv and recovery.csv for the data given

    Returns the paths written.
    """
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as e:
        raise OutputError(directory, e.strerror or str(e)) from e
    written = []
    if records is not None:
        write_records_csv(directory / "records.csv", records)
        written.append(directory / "records.csv")
    if profiles is not None:
        write_profile_csv(directory / "profile.csv", profiles)
        written.append(directory / "profile.csv")
    if recovery is not None:
        write_recovery_csv(directory / "recovery.csv", recovery)
        written.append(directory / "recovery.csv")
    return written


def solved_fraction(profile: ProfileTable, solver: str) -> float:
    """rho_s at the largest finite ratio, i.e. the fraction solved"""
    return float(profile.rho[solver][-1]) if len(profile.log2_tau) else 0.0
