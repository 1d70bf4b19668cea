"""Command-line front end: ``sgdbounds {bounds,run,verify,audit} --config FILE``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import csvio
from .bounds import PreconditionError, bound_curve, check_applicable, derive_constants
from .config import ExperimentConfig, load
from .problems import EMPIRICAL, EXACT, AssumptionError, assumption_audit, constants_for
from .verify import DivergenceError, dominance_check, run_replicates

log = logging.getLogger("sgdbounds")

EXIT_FAIL = 1
EXIT_USAGE = 2


def _prepare(cfg: ExperimentConfig, theorems):
    problem = cfg.problem()
    constants = constants_for(problem, cfg.theta0(problem))
    for th in theorems:
        check_applicable(th, constants)
    return problem, constants


def _bound_checkpoints(cfg: ExperimentConfig, theorem: str):
    cps = cfg.checkpoints()
    lowest = max(cfg.verify_min_checkpoint, 1 if theorem in ("lemma1", "thm1", "lemma2", "thm2") else 0)
    return cps[cps >= lowest]


def cmd_bounds(cfg: ExperimentConfig, out: Path, scale: float = 1.0) -> int:
    _, constants = _prepare(cfg, cfg.verify_theorems)
    schedule = cfg.schedule()
    derived = derive_constants(constants, schedule)
    for th in cfg.verify_theorems:
        curve = bound_curve(th, _bound_checkpoints(cfg, th), constants, schedule, derived).scaled(scale)
        csvio.write_bound_curve(out / f"bounds_{th}.csv", curve)
    inherited = EMPIRICAL if EMPIRICAL in constants.provenance.values() else EXACT
    rows = list(constants.as_rows()) + [(name, value, inherited) for name, value in derived.as_rows()]
    csvio.write_rows(out / "constants.csv", ["name", "value", "provenance"], rows)
    log.info("wrote %d bound files to %s", len(cfg.verify_theorems), out)
    return 0


def _simulate(cfg: ExperimentConfig, problem, threads: int):
    return run_replicates(problem, cfg.schedule(), cfg.theta0(problem), cfg.run_replicates,
                          checkpoints=cfg.checkpoints(), master_seed=cfg.run_seed, threads=threads,
                          subopt_budget=cfg.run_subopt_budget)


def cmd_run(cfg: ExperimentConfig, out: Path, threads: int = 1) -> int:
    problem = cfg.problem()
    curves = _simulate(cfg, problem, threads)
    csvio.write_error_curves(out / "run.csv", curves)
    log.info("R=%d replicates (%d diverged), results in %s", curves.R, curves.n_diverged, out / "run.csv")
    return 0


def cmd_verify(cfg: ExperimentConfig, out: Path, threads: int = 1, scale: float = 1.0) -> int:
    if not cfg.verify_theorems:
        raise ValueError("verify.theorems must name at least one theorem")
    problem, constants = _prepare(cfg, cfg.verify_theorems)
    schedule = cfg.schedule()
    derived = derive_constants(constants, schedule)
    curves = _simulate(cfg, problem, threads)
    csvio.write_error_curves(out / "run.csv", curves)
    reports = []
    for th in cfg.verify_theorems:
        curve = bound_curve(th, _bound_checkpoints(cfg, th), constants, schedule, derived).scaled(scale)
        report = dominance_check(curves, curve, confidence=cfg.verify_confidence)
        csvio.write_plot_data(out / f"plot_{th}.csv", report)
        log.info("%s: %s", th, "pass" if report.passed else "FAIL")
        reports.append(report)
    csvio.write_dominance(out / "report.csv", reports)
    return 0 if all(r.passed for r in reports) else EXIT_FAIL


def cmd_audit(cfg: ExperimentConfig, out: Path) -> int:
    problem = cfg.problem()
    constants = constants_for(problem, cfg.theta0(problem))
    report = assumption_audit(problem, constants, budget=max(cfg.problem_audit_budget, 10 ** 6))
    csvio.write_rows(out / "audit.csv", ["check", "point", "radius", "lhs", "rhs", "stderr", "pass"],
                     [(e.check, e.point, e.radius, e.lhs, e.rhs, e.stderr, e.passed) for e in report.entries])
    for check, ok, margin in report.summary():
        log.info("%-10s %s (worst margin %.3g)", check, "pass" if ok else "FAIL", margin)
    return 0 if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sgdbounds", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("bounds", "evaluate bound curves and the constants ledger"),
                       ("run", "simulate replicated trajectories"),
                       ("verify", "simulate and test dominance by the bounds"),
                       ("audit", "Monte-Carlo audit of the assumption constants")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, help="output directory (overrides output.dir)")
        p.add_argument("--seed", type=int, help="master seed (overrides run.seed)")
        p.add_argument("--threads", type=int, default=1, help="worker threads; results do not depend on it")
        p.add_argument("--debug-scale-bounds", type=float, default=1.0, metavar="FACTOR",
                       help="multiply every bound value (test hook)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load(args.config)
        if args.seed is not None:
            cfg.run_seed = args.seed
        out = args.out if args.out is not None else Path(cfg.output_dir)
        if args.command == "bounds":
            return cmd_bounds(cfg, out, args.debug_scale_bounds)
        if args.command == "run":
            return cmd_run(cfg, out, args.threads)
        if args.command == "verify":
            return cmd_verify(cfg, out, args.threads, args.debug_scale_bounds)
        return cmd_audit(cfg, out)
    except (PreconditionError, AssumptionError, ValueError, OSError) as exc:
        print(f"sgdbounds: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"sgdbounds: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
