# dfosparse
# (c) 2026 dfosparse contributors
# SPDX-License-Identifier: GPL-2.0-or-later

import argparse
import dataclasses
import logging
import math
import os.path
import sys
import typing
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from dfosparse.bench import (
    PRESETS,
    SOLVERS,
    OutputError,
    emit_outputs,
    performance_profiles,
    run_benchmark,
    solved_fraction,
)
from dfosparse.driver import DfoConfig, DfoTrace, run_dfo_tr
from dfosparse.problems import (
    REGISTRY,
    UnknownProblemError,
    get_problem,
    list_problems,
)
from dfosparse.recovery import recovery_curve, sample_bound_shape

CONFIG_NAME = "dfo-sparse.toml"


def comma_list(value: str) -> typing.List[str]:
    return [x.strip() for x in value.split(",") if x.strip()]


def int_list(value: str) -> typing.List[int]:
    try:
        return [int(x) for x in comma_list(value)]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid integer list: {value!r}"
                                         ) from e


ProblemList = typing.List[typing.Tuple[str, typing.Optional[int]]]


def parse_problem_list(value: str) -> ProblemList:
    """Parse "all" or NAME[:N],... into (name, n) pairs"""
    if value == "all":
        return [(name, None) for name in REGISTRY]
    problems: ProblemList = []
    for item in comma_list(value):
        name, _, n = item.partition(":")
        problems.append((name.upper(), int(n) if n else None))
    return problems


def load_config(no_config: bool) -> typing.Dict[str, typing.Any]:
    if no_config:
        return {}
    config_dirs = os.environ.get("XDG_CONFIG_DIRS", "/etc/xdg").split(":")
    config_dirs.insert(0, os.environ.get("XDG_CONFIG_HOME", "~/.config"))
    for x in config_dirs:
        config_path = Path(os.path.expanduser(x)) / CONFIG_NAME
        try:
            with open(config_path, "rb") as f:
                config_toml = tomllib.load(f)
        except (FileNotFoundError, NotADirectoryError):
            pass
        except tomllib.TOMLDecodeError as e:
            raise RuntimeError(
                f"Error parsing configuration file {config_path}") from e
        else:
            logging.info(f"Using configuration file {config_path}")
            return config_toml
    return {}


def dfo_config(config_toml: typing.Dict[str, typing.Any], **kwargs: typing.Any
               ) -> DfoConfig:
    """Build DfoConfig from the [dfo] section and explicit overrides"""
    overrides = dict(config_toml.get("dfo", {}))
    known = {field.name for field in dataclasses.fields(DfoConfig)}
    unknown = set(overrides) - known
    if unknown:
        raise RuntimeError(f"Unknown keys in [dfo] configuration: "
                           f"{', '.join(sorted(unknown))}")
    overrides.update((k, v) for k, v in kwargs.items() if v is not None)
    return DfoConfig(**overrides)


def print_trace_table(trace: DfoTrace) -> None:
    print(f"{'k':>5} {'f':>24} {'delta':>10} {'|Y|':>4} {'rho':>10} "
          f"{'gnorm':>10} {'fevals':>6}")
    for r in trace.records:
        rho = "" if math.isnan(r.rho) else f"{r.rho:10.3e}"
        print(f"{r.k:>5} {r.f:>24.16e} {r.delta:>10.3e} {r.sample_size:>4} "
              f"{rho:>10} {r.gnorm:>10.3e} {r.fevals:>6}"
              f"{' *' if r.success else ''}{' F' if r.fallback else ''}")


def main(prog_name: str, *argv: str) -> int:
    argp = argparse.ArgumentParser(prog=os.path.basename(prog_name))
    argp.add_argument("--list-problems",
                      action="store_true",
                      help="List registered problems with their default "
                           "dimension and Hessian nonzero count, and exit")
    argp.add_argument("--no-config",
                      action="store_true",
                      help="Inhibit loading configuration files")
    argp.add_argument("-v", "--verbose",
                      action="store_true",
                      help="Log every trust-region iteration")
    subparsers = argp.add_subparsers(dest="command")

    bench = subparsers.add_parser(
        "bench", help="Run the solvers over test problems")
    bench.add_argument("--problems",
                       type=parse_problem_list,
                       default=parse_problem_list("all"),
                       help="Comma-separated NAME[:N] list or 'all' "
                            "(default: all)")
    bench.add_argument("--solvers",
                       type=comma_list,
                       default=list(SOLVERS),
                       help=f"Solvers to run (default: {','.join(SOLVERS)})")
    bench.add_argument("--acc",
                       type=int_list,
                       default=[4, 6],
                       help="Accuracy exponents (default: 4,6)")
    bench.add_argument("--budget",
                       type=int,
                       help="Function evaluation budget (default: from "
                            "preset)")
    bench.add_argument("--preset",
                       choices=tuple(PRESETS),
                       default="table1",
                       help="Tolerance protocol (default: table1)")
    bench.add_argument("--seed",
                       type=int,
                       default=0,
                       help="Seed (default: 0)")
    bench.add_argument("--jobs",
                       type=int,
                       help="Number of parallel worker processes "
                            "(default: 1)")
    bench.add_argument("--out",
                       type=Path,
                       help="Output directory (default: .)")

    recover = subparsers.add_parser(
        "recover", help="Run the sparse Hessian recovery experiment")
    recover.add_argument("--n", type=int, default=10,
                         help="Dimension (default: 10)")
    recover.add_argument("--h", type=int, default=5,
                         help="Hessian nonzeros on or above the diagonal "
                              "(default: 5)")
    recover.add_argument("--p-grid",
                         type=int_list,
                         default=[25, 35, 45, 55, 66],
                         help="Sample sizes (default: 25,35,45,55,66)")
    recover.add_argument("--trials", type=int, default=100,
                         help="Trials per sample size (default: 100)")
    recover.add_argument("--delta", type=float, default=1.0,
                         help="Half-width of the sampling cube (default: 1)")
    recover.add_argument("--noise", type=float, default=0.0,
                         help="Magnitude of uniform noise on the sampled "
                              "values (default: 0)")
    recover.add_argument("--seed", type=int, default=0,
                         help="Seed (default: 0)")
    recover.add_argument("--out",
                         type=Path,
                         help="Output directory (default: .)")

    solve = subparsers.add_parser(
        "solve", help="Run one solver on one problem")
    solve.add_argument("--problem", required=True,
                       help="Problem name")
    solve.add_argument("--n", type=int,
                       help="Dimension (default: problem default)")
    solve.add_argument("--solver",
                       choices=tuple(SOLVERS),
                       default="l1",
                       help="Model type (default: l1)")
    solve.add_argument("--budget", type=int,
                       help="Function evaluation budget")
    solve.add_argument("--trace",
                       action="store_true",
                       help="Print the iteration trace")
    args = argp.parse_args(argv)

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    if args.list_problems:
        for name, n, nnz in list_problems():
            print(f"{name:<20} {n:>4} {nnz:>6}")
        return 0
    if args.command is None:
        argp.print_usage()
        logging.error("No command given")
        return 1

    config_toml = load_config(args.no_config)
    bench_toml = config_toml.get("bench", {})

    try:
        if args.command == "bench":
            out = args.out or Path(bench_toml.get("out", "."))
            records = run_benchmark(
                args.problems,
                solvers=args.solvers,
                accs=args.acc,
                preset=args.preset,
                budget=args.budget or bench_toml.get("budget"),
                seed=args.seed,
                config=dfo_config(config_toml),
                jobs=args.jobs or bench_toml.get("jobs", 1))
            profiles = performance_profiles(records)
            for profile in profiles:
                for solver in profile.solvers:
                    logging.info(
                        f"acc={profile.acc} {solver}: solved fraction "
                        f"{solved_fraction(profile, solver):.2f}")
            paths = emit_outputs(out, records=records, profiles=profiles)
        elif args.command == "recover":
            logging.info(f"Sample bound shape (without constant): "
                         f"{sample_bound_shape(args.n, args.h):.1f}")
            reports = recovery_curve(args.n, args.h, args.p_grid,
                                     args.trials, args.delta, args.seed,
                                     args.noise)
            paths = emit_outputs(args.out or Path("."), recovery=reports)
        else:
            problem = get_problem(args.problem, args.n)
            solver = SOLVERS[args.solver]
            trace = run_dfo_tr(problem.objective, problem.start,
                               dfo_config(config_toml, t=solver.t,
                                          max_fevals=args.budget))
            assert trace.termination is not None
            if args.trace:
                print_trace_table(trace)
            print(f"{problem.name} n={problem.n} {solver.label}: "
                  f"f={trace.f:.16e} fevals={trace.fevals} "
                  f"gnorm={trace.gnorm:.3e} "
                  f"termination={trace.termination.value}")
            return 0
    except UnknownProblemError as e:
        logging.error(f"Unknown problem: {e.name!r}")
        logging.info("Use --list-problems to see the available problems.")
        return 1
    except OutputError as e:
        logging.error(f"Unable to write output to {str(e.path)!r}: "
                      f"{e.reason}")
        return 1
    except ValueError as e:
        logging.error(str(e))
        return 1

    for path in paths:
        print(f"{path}")
    return 0


def entry_point() -> None:
    try:
        from rich.logging import RichHandler
    except ImportError:
        logging.basicConfig(
            format="[{levelname:>7}] {message}",
            level=logging.INFO,
            style="{")
    else:
        logging.basicConfig(
            format="{message}",
            level=logging.INFO,
            style="{",
            handlers=[RichHandler(show_time=False, show_path=False)])

    sys.exit(main(*sys.argv))


if __name__ == "__main__":
    entry_point()
