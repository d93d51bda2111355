"""noma-vlc command line.

    noma-vlc gen-scenario --seed S --users M --out FILE
    noma-vlc solve --scenario FILE --out FILE [--config FILE]
    noma-vlc sweep --scenario FILE --pmax-list 8,10,...,20 --csv FILE [--config FILE]
    noma-vlc validate --scenario FILE [--resolution N]
    noma-vlc serve

Exit codes: 0 success, 1 usage or input error, 2 solver failure,
3 oracle validation failure.
"""
import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from src import __version__
from src.config.settings import Settings
from src.exceptions import NomaVlcError
from src.experiments.report import solve_report
from src.experiments.generator import RoomConfig, SimulationDefaults, gen_scenario
from src.experiments.sweep import SweepSpec, run_sweep, validate_against_oracle, write_sweep_csv
from src.noma.scenario_io import first_error, load_config, load_scenario, save_scenario, write_json
from src.optim.oracle import GridSpec
from src.optim.solver import SolverConfig, SolverStatus, solve

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_VALIDATION = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _pmax_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noma-vlc", description="Harmonic-rate NOMA power control for single-LED VLC cells")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    gen = sub.add_parser("gen-scenario", help="sample a seeded user drop")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--users", type=int, default=RoomConfig().num_users)
    gen.add_argument("--out", required=True)
    gen.add_argument("--p-max", type=float, default=None, help="P_max in mW")
    gen.add_argument("--pam-coefficient", type=float, default=None)

    slv = sub.add_parser("solve", help="solve one scenario")
    slv.add_argument("--scenario", required=True)
    slv.add_argument("--out", required=True)
    slv.add_argument("--config", default=None, help="solver config JSON")

    swp = sub.add_parser("sweep", help="solve over a list of P_max values")
    swp.add_argument("--scenario", required=True)
    swp.add_argument("--pmax-list", type=_pmax_list, default=None)
    swp.add_argument("--csv", required=True)
    swp.add_argument("--config", default=None)

    val = sub.add_parser("validate", help="compare the solver with the grid oracle")
    val.add_argument("--scenario", required=True)
    val.add_argument("--resolution", type=int, default=None)
    val.add_argument("--config", default=None)

    sub.add_parser("serve", help="run the HTTP API")
    return parser


def _solver_config(path: Optional[str]) -> SolverConfig:
    return load_config(SolverConfig, path) if path else SolverConfig()


def _gen_scenario(args) -> int:
    room = RoomConfig(seed=args.seed, num_users=args.users)
    overrides = {"pam_coefficient": args.pam_coefficient}
    if args.p_max is not None:
        overrides["p_max_mw"] = args.p_max
    scenario = gen_scenario(room, SimulationDefaults(**overrides))
    save_scenario(scenario, args.out)
    return EXIT_OK


def _solve(args) -> int:
    scenario = load_scenario(args.scenario)
    result = solve(scenario, _solver_config(args.config))
    write_json(args.out, solve_report(scenario, result))
    if result.status is not SolverStatus.OPTIMAL:
        print(f"solver finished with status {result.status.value}: {result.message}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _sweep(args) -> int:
    settings = Settings()
    scenario = load_scenario(args.scenario)
    sweep = SweepSpec(p_max_values=tuple(args.pmax_list)) if args.pmax_list else SweepSpec()
    rows = run_sweep(scenario, sweep, _solver_config(args.config), threads=settings.NOMA_VLC_THREADS)
    write_sweep_csv(rows, args.csv)
    if any(r.status is not SolverStatus.OPTIMAL for r in rows):
        return EXIT_SOLVER
    return EXIT_OK


def _validate(args) -> int:
    settings = Settings()
    scenario = load_scenario(args.scenario)
    spec = GridSpec(resolution=args.resolution)
    report = validate_against_oracle(scenario, spec, _solver_config(args.config),
                                     threads=settings.NOMA_VLC_THREADS)
    print(report.summary())
    if report.solver_status is not SolverStatus.OPTIMAL:
        return EXIT_SOLVER
    return EXIT_OK if report.passed else EXIT_VALIDATION


def _serve(args) -> int:
    import uvicorn

    settings = Settings()
    uvicorn.run("src.api.main:app", host="0.0.0.0", port=settings.PORT)
    return EXIT_OK


COMMANDS = {
    "gen-scenario": _gen_scenario,
    "solve": _solve,
    "sweep": _sweep,
    "validate": _validate,
    "serve": _serve,
}


def cli_main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help and --version
        return e.code if isinstance(e.code, int) else EXIT_OK

    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(level=Settings().LOG_LEVEL)
    try:
        return COMMANDS[args.command](args)
    except ValidationError as e:
        field, message = first_error(e)
        print(f"error: {field}: {message}", file=sys.stderr)
        return EXIT_USAGE
    except NomaVlcError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
