"""Command-line entry point: ``stlab {converge,infsup,sweep,bounds,solve}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .analysis import ManufacturedSolution, error_norms, solve
from .assembly import Variant
from .bounds import stability_bounds
from .experiments import (
    ExperimentConfig,
    emit_outputs,
    fmt,
    run_convergence,
    run_infsup_sweep,
)
from .linalg import SingularMatrixError

# Flags that map one-to-one onto ExperimentConfig fields.
_CONFIG_FLAGS = (
    "method", "degree", "form", "delta", "penalty_order", "per_element", "mu", "T", "omega",
    "nel_list", "nel_max", "mu_grid", "quad_rhs", "beta_method", "out", "plots",
)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _mu_grid(text: str) -> list[float]:
    """``a,b,c`` explicit values or ``lo:hi:n`` for ``n`` values of ``10**[lo, hi]``."""
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            return [float(v) for v in 10.0 ** np.linspace(float(lo), float(hi), int(n))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected 'v1,v2,...' or 'log10_lo:log10_hi:count', got {text!r}"
        ) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("problem")
    g.add_argument("--config", type=Path, help="JSON file with config keys; flags override it")
    g.add_argument("--method", choices=["fem", "iga"])
    g.add_argument("--degree", type=int, help="spline degree (fem: 1)")
    g.add_argument("--form", choices=[v.value for v in Variant])
    g.add_argument("--delta", type=float, help="penalty weight (--form penalty)")
    g.add_argument("--penalty-order", dest="penalty_order", type=int,
                   help="derivative order of the penalty (default: degree)")
    g.add_argument("--per-element", dest="per_element", action="store_const", const=True,
                   help="use element lengths instead of the global h in scaled/penalty forms")
    g.add_argument("--mu", type=float)
    g.add_argument("--T", type=float)
    g.add_argument("--omega", type=float, help="frequency of the manufactured solution")
    g.add_argument("--nel", dest="nel_list", type=_int_list, help="comma-separated element counts")
    g.add_argument("--nel-max", dest="nel_max", type=int, help="largest element count when --nel is absent")
    g.add_argument("--mu-grid", dest="mu_grid", type=_mu_grid, help="'v1,v2,...' or 'lo:hi:n' (log10)")
    g.add_argument("--quad-rhs", dest="quad_rhs", type=int, help="Gauss points per element for the load")
    g.add_argument("--beta-method", dest="beta_method", choices=["auto", "svd", "eig", "iterative"])
    g.add_argument("--out", help="output file (CSV or JSON); stdout when omitted")
    g.add_argument("--plots", action="store_const", const=True, help="also write a matplotlib script")
    g.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="stlab", description="Galerkin discretizations of u'' + mu u = f")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("converge", parents=[common], help="error table over a list of meshes")
    sub.add_parser("infsup", parents=[common], help="inf-sup constant over meshes at fixed mu")
    sub.add_parser("sweep", parents=[common], help="inf-sup constant over a (mu, h) grid")
    sub.add_parser("bounds", parents=[common], help="closed-form thresholds and constants")
    sub.add_parser("solve", parents=[common], help="solve once and report the errors")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text())
        except OSError as exc:
            raise ValueError(f"cannot read config {args.config}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ValueError(f"invalid JSON in {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ValueError(f"{args.config} must contain a JSON object")
    for key in _CONFIG_FLAGS:
        v = getattr(args, key, None)
        if v is not None:
            data[key] = v
    if data.get("method") == "iga" and "degree" not in data:
        data["degree"] = 2
    return ExperimentConfig.from_dict(data)


def _emit_text(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def _plot_path(cfg: ExperimentConfig):
    return Path(cfg.out).with_suffix(".plot.py") if cfg.plots and cfg.out else None


def _run_table(result, cfg: ExperimentConfig, to_csv):
    if cfg.out is None:
        sys.stdout.write(to_csv(result))
        return
    for path in emit_outputs(result, cfg.out, _plot_path(cfg)):
        print(f"wrote {path}", file=sys.stderr)


def cmd_converge(cfg: ExperimentConfig):
    from .experiments import convergence_csv

    _run_table(run_convergence(cfg), cfg, convergence_csv)


def cmd_infsup(cfg: ExperimentConfig):
    from .experiments import sweep_csv

    _run_table(run_infsup_sweep(cfg, mus=[cfg.mu], nels=cfg.nels()), cfg, sweep_csv)


def cmd_sweep(cfg: ExperimentConfig):
    from .experiments import sweep_csv

    _run_table(run_infsup_sweep(cfg), cfg, sweep_csv)


def cmd_bounds(cfg: ExperimentConfig):
    rep = stability_bounds(cfg.mu, cfg.T).as_dict()
    _emit_text(json.dumps({k: float(fmt(v)) for k, v in rep.items()}, indent=2) + "\n", cfg.out)


def cmd_solve(cfg: ExperimentConfig):
    nel = cfg.nels()[-1] if cfg.nel_list else 64
    exact = ManufacturedSolution(cfg.mu, cfg.omega)
    trial, test = cfg.spaces(nel)
    c = solve(trial, test, cfg.form_spec(), exact.f, cfg.quad_rhs)
    rep = error_norms(trial, c, exact)
    out = {
        "nel": nel, "h": rep.h, "err_h1": rep.h1_semi, "err_l2": rep.l2, "best_h1": rep.best_h1,
        "rel_err_h1": rep.rel_h1, "rel_err_l2": rep.rel_l2,
        "coefficients": [float(v) for v in trial.embed(c)],
    }
    _emit_text(json.dumps(out, indent=2) + "\n", cfg.out)


COMMANDS = {
    "converge": cmd_converge,
    "infsup": cmd_infsup,
    "sweep": cmd_sweep,
    "bounds": cmd_bounds,
    "solve": cmd_solve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        COMMANDS[args.command](cfg)
    except (ValueError, OSError, SingularMatrixError) as exc:
        print(f"stlab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
