"""``lineint`` command-line front end.

Subcommands::

    lineint run --config run.toml --out results/
    lineint convergence --config run.toml --out results/
    lineint stability --config run.toml --out results/
    lineint symmetry --config run.toml --out results/
    lineint tableau hbvm 8 2
    lineint blended-table --s-max 7

Exit codes: 0 on success, 2 on a configuration error, 3 on a numerical
failure.  Numeric series are written as CSV (header row, LF line endings,
17 significant digits); tables go to stdout; progress goes to the log.
"""

from __future__ import annotations

import argparse
import csv
import sys
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from lineint._logging import configure_cli_logging, logger
from lineint.config import RunConfig, load_config
from lineint.errors import (
    ConfigurationError,
    DimensionError,
    LineIntegralError,
    ParameterError,
)
from lineint.integrator import Integrator
from lineint.methods import check_symplectic, gauss, hbvm, lim, tableau_of, trapezoidal_tableau
from lineint.runs import error_growth_fit, per_period_error, stability_scan
from lineint.solvers import MAX_BLENDED_DEGREE, blended_params
from lineint.types.methods import Method
from lineint.types.runs import IntegrationRun

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_CONFIG_ERRORS = (ConfigurationError, ParameterError, DimensionError)


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[float]]) -> None:
    """Write *rows* under *header*; floats with 17 significant digits, LF endings."""
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(float(v)) for v in row])
    logger.info("wrote %s", path)


# ----------------------------------------------------------------------
# Series
# ----------------------------------------------------------------------


def _invariant_rows(run: IntegrationRun) -> np.ndarray:
    return np.column_stack([run.times, run.invariant_errors])


def _write_series(out: Path, config: RunConfig, run: IntegrationRun, names: Sequence[str], period: float) -> None:
    for series in config.outputs:
        if series == "invariants":
            write_csv(out / "invariants.csv", ["t", *(f"d{n}" for n in names)], _invariant_rows(run))
        elif series == "trajectory":
            dim = run.states.shape[1]
            write_csv(
                out / "trajectory.csv",
                ["t", *(f"y{i}" for i in range(dim))],
                np.column_stack([run.times, run.states]),
            )
        elif series == "step_sizes":
            steps = np.arange(1, run.step_sizes.shape[0] + 1)
            write_csv(out / "step_sizes.csv", ["step", "h"], np.column_stack([steps, run.step_sizes]))
        elif series == "per_period_error":
            if not np.isfinite(period):
                raise ConfigurationError(
                    f"per_period_error needs a periodic problem; {config.problem.name} has no known period"
                )
            errors = per_period_error(run, period)
            n = np.arange(errors.shape[0])
            write_csv(out / "per_period_error.csv", ["period", "t", "error"], np.column_stack([n, n * period, errors]))
            if np.isfinite(errors).sum() >= 4:
                fit = error_growth_fit(errors)
                logger.info(
                    "error growth: slope %.3e, linear R^2 %.4f, quadratic gain %.3g",
                    fit.linear_slope,
                    fit.linear_r2,
                    fit.quadratic_gain,
                )


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------


def _prepare(args: argparse.Namespace) -> tuple[RunConfig, Path]:
    config = load_config(args.config)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigurationError(f"cannot create output directory {out}: {exc}") from exc
    config.dump(out / "effective_config.json")
    return config, out


def _integrator(config: RunConfig) -> Integrator:
    return Integrator(config.method.build(), solver=config.solver.build())


def cmd_run(args: argparse.Namespace) -> int:
    config, out = _prepare(args)
    problem, invariants, y0, period = config.benchmark()
    integrator = _integrator(config)
    logger.info("run: %s with %s", problem.description, integrator.method.name or "tableau")
    mode = config.mode
    if mode.kind == "fixed":
        run = integrator.integrate_fixed(problem, invariants, y0, mode.h, mode.n_steps, mode.sample_every)
    else:
        checkpoints = None
        if mode.checkpoint_periods and np.isfinite(period):
            checkpoints = period * np.arange(1, int(mode.t_end / period) + 1)
        run = integrator.integrate_adaptive(
            problem, invariants, y0, mode.t_end, mode.settings(), checkpoints=checkpoints
        )
        logger.info("adaptive run: %d accepted steps, %d rejections", run.step_sizes.shape[0], run.rejections)
    _write_series(out, config, run, invariants.names, period)
    if run.failed:
        logger.error("numerical failure: %s", run.failure)
        return EXIT_NUMERICAL
    maxima = run.max_invariant_errors()
    for name, value in zip(invariants.names, maxima):
        logger.info("max |d%s| = %.3e", name, value)
    return EXIT_OK


def cmd_convergence(args: argparse.Namespace) -> int:
    config, out = _prepare(args)
    problem, invariants, y0, _ = config.benchmark()
    study = _integrator(config).convergence_study(
        problem, y0, config.convergence.t_end, config.convergence.h, invariants=invariants
    )
    slopes = np.concatenate([[np.nan], study.local_orders])
    write_csv(out / "convergence.csv", ["h", "error", "slope"], np.column_stack([study.h, study.errors, slopes]))
    logger.info("observed order %.3f", study.order)
    return EXIT_OK


def cmd_stability(args: argparse.Namespace) -> int:
    config, out = _prepare(args)
    scan = stability_scan(config.method.build(), config.stability.grid())
    write_csv(
        out / "stability.csv",
        ["re_q", "im_q", "abs_R"],
        np.column_stack([scan.q.real, scan.q.imag, scan.modulus]),
    )
    logger.info("max |R| = %.17g over %d points", float(np.max(scan.modulus)), scan.q.shape[0])
    return EXIT_OK


def cmd_symmetry(args: argparse.Namespace) -> int:
    config, out = _prepare(args)
    problem, invariants, y0, _ = config.benchmark()
    integrator = _integrator(config)
    rows = [(h, integrator.symmetry_defect(problem, y0, h, invariants)) for h in config.symmetry.h]
    write_csv(out / "symmetry.csv", ["h", "defect"], rows)
    return EXIT_OK


def _method_from_words(words: Sequence[str]) -> Method:
    if not words:
        raise ConfigurationError("tableau needs a method: gauss S | hbvm K S | lim R K S | trapezoidal NU")
    name, *rest = words
    try:
        params = [int(w) for w in rest]
    except ValueError as exc:
        raise ConfigurationError(f"method parameters must be integers, got {rest}") from exc
    builders = {"gauss": (gauss, 1), "hbvm": (hbvm, 2), "lim": (lim, 3), "trapezoidal": (trapezoidal_tableau, 1)}
    if name not in builders:
        raise ConfigurationError(f"unknown method {name!r}; expected one of {', '.join(builders)}")
    build, arity = builders[name]
    if len(params) != arity:
        raise ConfigurationError(f"{name} takes {arity} integer parameter(s), got {len(params)}")
    return build(*params)


def _format_row(values: np.ndarray) -> str:
    return "  ".join(f"{v: .16f}" for v in values)


def cmd_tableau(args: argparse.Namespace) -> int:
    t = tableau_of(_method_from_words(args.method))
    lines = [f"# {t.name or 'tableau'} (stages={t.stages}, order={t.order})", "c:", _format_row(t.c), "A:"]
    lines.extend(_format_row(row) for row in t.A)
    lines.extend(["b:", _format_row(t.b)])
    lines.append(f"symplecticity residual: {check_symplectic(t):.3e}")
    lines.append(f"rank(A): {np.linalg.matrix_rank(t.A)}")
    print("\n".join(lines))
    return EXIT_OK


def cmd_blended_table(args: argparse.Namespace) -> int:
    if not 1 <= args.s_max <= MAX_BLENDED_DEGREE:
        raise ConfigurationError(f"--s-max must lie in 1..{MAX_BLENDED_DEGREE}, got {args.s_max}")
    lines = [f"{'s':>3}  {'zeta':>6}  {'rho*':>6}  {'rho~':>6}"]
    for s in range(1, args.s_max + 1):
        p = blended_params(s)
        lines.append(f"{s:>3}  {p.zeta:.4f}  {p.rho_star:.4f}  {p.rho_tilde:.4f}")
    print("\n".join(lines))
    return EXIT_OK


# ----------------------------------------------------------------------
# Entry point
# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lineint", description="Line-integral ODE integrators.")
    parser.add_argument("--quiet", action="store_true", help="log warnings and errors only")
    # accepted after the subcommand too; SUPPRESS keeps a top-level --quiet
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--quiet", action="store_true", default=argparse.SUPPRESS, help="log warnings and errors only"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, func, help_text in (
        ("run", cmd_run, "integrate a benchmark and write the requested series"),
        ("convergence", cmd_convergence, "observed order over the configured stepsizes"),
        ("stability", cmd_stability, "|R(q)| over the configured grid"),
        ("symmetry", cmd_symmetry, "forward-then-reversed step defect"),
    ):
        p = sub.add_parser(name, help=help_text, parents=[common])
        p.add_argument("--config", required=True, help="TOML or JSON run configuration")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.set_defaults(func=func)

    p = sub.add_parser("tableau", help="print the Butcher tableau of a method", parents=[common])
    p.add_argument("method", nargs="+", help="gauss S | hbvm K S | lim R K S | trapezoidal NU")
    p.set_defaults(func=cmd_tableau)

    p = sub.add_parser("blended-table", help="print the blended-iteration parameters", parents=[common])
    p.add_argument("--s-max", type=int, default=10)
    p.set_defaults(func=cmd_blended_table)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_cli_logging(args.quiet)
    try:
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        logger.error("configuration error: %s", exc.message)
        return EXIT_CONFIG
    except LineIntegralError as exc:
        logger.error("numerical failure: %s", exc.message)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
