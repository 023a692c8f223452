"""Command-line front end: analytic queries, simulations, figure recipes.

Every CSV written is paired with a ``<name>.manifest.json`` recording the
exact configuration, seed, and tool version needed to reproduce it
byte-for-byte.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, analytics
from .channel import FadingModel, fading_moment
from .estimators import BasisPursuitParams
from .montecarlo import (
    DEFAULT_MASTER_SEED,
    SWEEP_COLUMNS,
    ExperimentConfig,
    run_point,
    sweep,
    validate_order_stats,
)

PAPER_DEFAULT = "[paper-default]"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # hard runtime failure
        print(f"failure: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cransim",
        description="Closed-form MSE limits and Monte Carlo experiments for "
        "sparse channel estimation in dense distributed-antenna networks.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_analytic(sub)
    _add_simulate(sub)
    _add_figs(sub)
    _add_validate_appendix(sub)
    return parser


# ---------------------------------------------------------------- analytic


def _fading_args(p: argparse.ArgumentParser):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--rayleigh", action="store_true", help=f"Rayleigh fading {PAPER_DEFAULT}")
    g.add_argument("--deterministic", action="store_true", help="unit-modulus fading")
    g.add_argument("--lognormal", type=float, metavar="SIGMA_DB", help="lognormal fading")
    g.add_argument("--moment", type=float, help="set E|c|^(4/alpha) directly")


def _fading_from_args(args) -> FadingModel:
    if getattr(args, "deterministic", False):
        return FadingModel.deterministic()
    if getattr(args, "lognormal", None) is not None:
        return FadingModel.lognormal(args.lognormal)
    return FadingModel.rayleigh()


def _moment_from_args(args, alpha: float) -> float:
    if getattr(args, "moment", None) is not None:
        return float(args.moment)
    return fading_moment(_fading_from_args(args), alpha)


def _add_analytic(sub):
    p = sub.add_parser("analytic", help="evaluate a closed-form quantity")
    ops = p.add_subparsers(dest="op", required=True)

    def common(q, s_flag=True, noise=False, metric=False):
        q.add_argument("--alpha", type=float, required=True, help="path loss exponent (> 2)")
        q.add_argument("--density", type=float, default=1.0, help=f"points per unit area {PAPER_DEFAULT}")
        q.add_argument("--np", dest="n_pilots", type=int, help="training sequence length")
        if s_flag:
            q.add_argument("--s", type=int, help="number of estimated channels")
        if noise:
            q.add_argument("--noise", type=float, default=0.0, help="noise variance")
        if metric:
            q.add_argument("--metric", choices=analytics.METRIC_KINDS, default="average")
        _fading_args(q)
        q.add_argument("--out", type=Path, help="write a one-row CSV instead of printing")

    q = ops.add_parser("residual-power", help="expected power of the ignored channels")
    common(q)
    q.set_defaults(handler=_cmd_analytic, op_name="residual-power")

    q = ops.add_parser("oracle-mse", help="known-support LS MSE for a given residual power")
    common(q, noise=True, metric=True)
    q.add_argument("--residual", type=float, required=True, help="expected residual power")
    q.set_defaults(handler=_cmd_analytic, op_name="oracle-mse")

    q = ops.add_parser("mse-bound", help="closed-form MSE upper bound")
    common(q, noise=True, metric=True)
    q.set_defaults(handler=_cmd_analytic, op_name="mse-bound")

    q = ops.add_parser("optimal-s", help="bound-minimizing number of estimated channels")
    common(q, s_flag=False, noise=True, metric=True)
    q.set_defaults(handler=_cmd_analytic, op_name="optimal-s")

    q = ops.add_parser("optimal-s-asymptotic", help="large-Np optimal support size")
    common(q, s_flag=False)
    q.set_defaults(handler=_cmd_analytic, op_name="optimal-s-asymptotic")

    q = ops.add_parser("min-mse-asymptotic", help="asymptotic minimum of the noiseless bound")
    common(q, s_flag=False, metric=True)
    q.set_defaults(handler=_cmd_analytic, op_name="min-mse-asymptotic")

    q = ops.add_parser("intensity", help="intensity of the received-power process")
    common(q, s_flag=False)
    q.add_argument("--g", type=float, required=True, help="power level")
    q.set_defaults(handler=_cmd_analytic, op_name="intensity")

    q = ops.add_parser("count-above", help="expected number of powers above a level")
    common(q, s_flag=False)
    q.add_argument("--delta", type=float, required=True, help="power level")
    q.set_defaults(handler=_cmd_analytic, op_name="count-above")

    q = ops.add_parser("power-cdf", help="cdf of the s-th strongest power")
    common(q)
    q.add_argument("--delta", type=float, required=True, help="power level")
    q.set_defaults(handler=_cmd_analytic, op_name="power-cdf")

    q = ops.add_parser("power-pdf", help="pdf of the s-th strongest power")
    common(q)
    q.add_argument("--delta", type=float, required=True, help="power level")
    q.set_defaults(handler=_cmd_analytic, op_name="power-pdf")

    q = ops.add_parser("power-moment", help="fractional moment of the s-th strongest power")
    common(q)
    q.set_defaults(handler=_cmd_analytic, op_name="power-moment")


def _cmd_analytic(args) -> int:
    alpha = args.alpha
    moment = _moment_from_args(args, alpha)
    op = args.op_name

    def scenario(s=None):
        return analytics.Scenario(
            alpha=alpha,
            density=args.density,
            moment=moment,
            noise_var=getattr(args, "noise", 0.0),
            n_pilots=_require(args, "n_pilots"),
            s=s,
        )

    if op == "residual-power":
        s = _require(args, "s")
        n_pilots = args.n_pilots if args.n_pilots is not None else s + 5  # unused here
        value = analytics.residual_power_expected(
            analytics.Scenario(alpha, args.density, moment, 0.0, n_pilots, s)
        )
    elif op == "oracle-mse":
        value = analytics.oracle_mse(args.residual, scenario(_require(args, "s")), args.metric)
    elif op == "mse-bound":
        value = analytics.mse_upper_bound(scenario(_require(args, "s")), args.metric)
    elif op == "optimal-s":
        value = analytics.best_support_size(scenario(), args.metric)[0]
    elif op == "optimal-s-asymptotic":
        value = analytics.best_support_size_asymptotic(alpha, _require(args, "n_pilots"))
    elif op == "min-mse-asymptotic":
        value = analytics.min_mse_asymptotic(scenario(), args.metric)
    elif op == "intensity":
        value = analytics.power_process_intensity(args.g, alpha, args.density, moment)
    elif op == "count-above":
        value = analytics.expected_count_above(args.delta, alpha, args.density, moment)
    elif op == "power-cdf":
        value = analytics.power_order_cdf(args.delta, _require(args, "s"), alpha, args.density, moment)
    elif op == "power-pdf":
        value = analytics.power_order_pdf(args.delta, _require(args, "s"), alpha, args.density, moment)
    else:
        value = analytics.power_order_fractional_moment(
            _require(args, "s"), alpha, args.density, moment
        )

    if args.out is not None:
        header = ["operation", "alpha", "density", "moment", "value"]
        row = {"operation": op, "alpha": alpha, "density": args.density, "moment": moment, "value": value}
        started = _now()
        write_csv(args.out, header, [row])
        write_manifest(args.out, sys.argv[1:], {"operation": op, "value": _json_safe(value)}, None, started)
    if isinstance(value, (int, np.integer)):
        print(int(value))
    else:
        print(f"{float(value):.12g}")
    return 0


def _require(args, name):
    value = getattr(args, name, None)
    if value is None:
        raise ValueError(f"--{name.replace('_', '-').replace('n-pilots', 'np')} is required for this operation")
    return value


# ---------------------------------------------------------------- simulate


def _add_simulate(sub):
    p = sub.add_parser("simulate", help="run a Monte Carlo experiment to CSV")
    p.add_argument("--config", type=Path, help="JSON config (or a previous manifest)")
    p.add_argument("--out", type=Path, required=True, help="output CSV path")
    p.add_argument("--estimator", choices=("oracle", "basis-pursuit", "omp"))
    p.add_argument("--n-rrh", type=int, help=f"deployed radio heads (500 {PAPER_DEFAULT})")
    p.add_argument("--density", type=float, help=f"radio heads per unit area (1 {PAPER_DEFAULT})")
    p.add_argument("--alpha", type=float, help=f"path loss exponent (4 {PAPER_DEFAULT})")
    p.add_argument("--noise", type=float, help=f"noise variance (0 {PAPER_DEFAULT})")
    p.add_argument("--np", dest="n_pilots", type=int, help=f"training length (81 {PAPER_DEFAULT})")
    p.add_argument("--s", help='support size (integer or "optimal")')
    p.add_argument("--trials", type=int, help="Monte Carlo trials")
    p.add_argument("--seed", type=int, help=f"master seed (default {DEFAULT_MASTER_SEED})")
    p.add_argument("--window-mode", choices=("uniform-finite", "hppp"))
    _fading_args(p)
    p.add_argument("--sweep-axis", choices=("s", "alpha", "n_pilots"))
    p.add_argument("--sweep-values", type=float, nargs="+")
    p.add_argument("--bp-epsilon", type=float, help="fidelity radius (default 1e-6*||y||)")
    p.add_argument("--bp-tolerance", type=float, help="solver optimality tolerance")
    p.add_argument("--bp-max-iters", type=int, help="solver iteration cap")
    p.set_defaults(handler=_cmd_simulate)


def _cmd_simulate(args) -> int:
    started = _now()
    cfg = _config_from_args(args)
    print(f"overhead reduction {100.0 * (1.0 - cfg.n_pilots / cfg.n_rrh):.1f}%")
    if args.sweep_axis:
        if not args.sweep_values:
            raise ValueError("--sweep-values is required with --sweep-axis")
        values = [
            int(v) if args.sweep_axis in ("s", "n_pilots") else float(v)
            for v in args.sweep_values
        ]
        rows = sweep(cfg, args.sweep_axis, values)
    else:
        rows = [run_point(cfg)]
    write_csv(args.out, list(SWEEP_COLUMNS), rows)
    write_manifest(args.out, sys.argv[1:], config_to_dict(cfg), cfg.master_seed, started)
    failures = [r for r in rows if r.get("error")]
    for r in failures:
        print(f"row {r.get('value')}: {r['error']}", file=sys.stderr)
    return 1 if failures else 0


def _config_from_args(args) -> ExperimentConfig:
    base: dict = {}
    if args.config is not None:
        payload = json.loads(Path(args.config).read_text())
        if isinstance(payload, dict) and "config" in payload and "tool" in payload:
            payload = payload["config"]  # accept a manifest for exact reruns
        base = dict(payload)
    overrides = {
        "estimator": args.estimator,
        "n_rrh": args.n_rrh,
        "density": args.density,
        "alpha": args.alpha,
        "noise_var": args.noise,
        "n_pilots": args.n_pilots,
        "trials": args.trials,
        "master_seed": args.seed,
        "window_mode": args.window_mode,
    }
    if args.s is not None:
        overrides["s"] = args.s if args.s == "optimal" else int(args.s)
    if args.rayleigh:
        base["fading"] = {"kind": "rayleigh-unit"}
    elif args.deterministic:
        base["fading"] = {"kind": "deterministic-unit"}
    elif args.lognormal is not None:
        base["fading"] = {"kind": "lognormal", "sigma_db": args.lognormal}
    solver_over = {
        "epsilon": args.bp_epsilon,
        "tolerance": args.bp_tolerance,
        "max_iters": args.bp_max_iters,
    }
    solver_over = {k: v for k, v in solver_over.items() if v is not None}
    if solver_over:
        base["solver"] = {**base.get("solver", {}), **solver_over}
    base.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_dict(base)


def config_from_dict(payload: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from a JSON-style dict, naming bad fields."""
    data = dict(payload)
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"config: unknown field(s): {', '.join(sorted(unknown))}")
    if "fading" in data and not isinstance(data["fading"], FadingModel):
        fd = data["fading"]
        if isinstance(fd, str):
            fd = {"kind": fd}
        try:
            data["fading"] = FadingModel(**fd)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"config: fading: {exc}") from exc
    if "solver" in data and not isinstance(data["solver"], BasisPursuitParams):
        try:
            data["solver"] = BasisPursuitParams(**data["solver"])
        except (TypeError, ValueError) as exc:
            raise ValueError(f"config: solver: {exc}") from exc
    if "ue" in data and data["ue"] is not None:
        data["ue"] = tuple(data["ue"])
    try:
        return ExperimentConfig(**data)
    except ValueError as exc:
        raise ValueError(f"config: {exc}") from exc


def config_to_dict(cfg: ExperimentConfig) -> dict:
    out = dataclasses.asdict(cfg)
    if out.get("ue") is not None:
        out["ue"] = list(out["ue"])
    return out


# ---------------------------------------------------------------- figures


def _add_figs(sub):
    p = sub.add_parser("fig1", help="oracle MSE vs support size, simulation and bound")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--alphas", type=float, nargs="+", default=[3.0, 4.0, 5.0, 6.0])
    p.add_argument("--s-values", type=int, nargs="+", default=list(range(2, 61, 2)))
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--n-rrh", type=int, default=500, help=PAPER_DEFAULT)
    p.add_argument("--np", dest="n_pilots", type=int, default=81, help=PAPER_DEFAULT)
    p.add_argument("--noise", type=float, default=0.0, help=PAPER_DEFAULT)
    p.add_argument("--seed", type=int, default=DEFAULT_MASTER_SEED)
    p.set_defaults(handler=_cmd_fig1)

    p = sub.add_parser("fig2", help="optimal support size vs path loss exponent (analytic)")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--np-values", type=int, nargs="+", default=[41, 81, 161])
    p.add_argument("--noise-values", type=float, nargs="+", default=[0.0, 0.1])
    p.add_argument("--alphas", type=float, nargs="+",
                   default=[2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0])
    p.add_argument("--density", type=float, default=1.0, help=PAPER_DEFAULT)
    p.set_defaults(handler=_cmd_fig2)

    p = sub.add_parser("fig3", help="Basis Pursuit total MSE vs training length")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--alphas", type=float, nargs="+", default=[3.0, 4.0, 5.0])
    p.add_argument("--np-values", type=int, nargs="+", default=[20, 40, 80, 160])
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--n-rrh", type=int, default=500, help=PAPER_DEFAULT)
    p.add_argument("--seed", type=int, default=DEFAULT_MASTER_SEED)
    p.set_defaults(handler=_cmd_fig3)


def _cmd_fig1(args) -> int:
    started = _now()
    header = ["alpha", "s", "trials", "mse_av", "mse_av_stderr",
              "mse_tot", "mse_tot_stderr", "bound_av", "bound_tot", "error"]
    rows, failed = [], False
    for alpha in args.alphas:
        cfg = ExperimentConfig(
            n_rrh=args.n_rrh, alpha=alpha, noise_var=args.noise,
            n_pilots=args.n_pilots, s=args.s_values[0], estimator="oracle",
            trials=args.trials, master_seed=args.seed,
        )
        for point in sweep(cfg, "s", args.s_values):
            rows.append({
                "alpha": alpha, "s": point["value"], "trials": args.trials,
                "mse_av": point["mse_av"], "mse_av_stderr": point["mse_av_stderr"],
                "mse_tot": point["mse_tot"], "mse_tot_stderr": point["mse_tot_stderr"],
                "bound_av": point["bound_av"], "bound_tot": point["bound_tot"],
                "error": point["error"],
            })
            failed = failed or bool(point["error"])
    write_csv(args.out, header, rows)
    write_manifest(args.out, sys.argv[1:], {"recipe": "fig1", "args": _args_dict(args)},
                   args.seed, started)
    return 1 if failed else 0


def _cmd_fig2(args) -> int:
    started = _now()
    header = ["noise_var", "n_pilots", "alpha", "s_opt_average", "s_opt_total",
              "bound_av_at_opt", "bound_tot_at_opt", "s_asymptotic", "s_asymptotic_rounded"]
    rows = []
    for noise in args.noise_values:
        for n_pilots in args.np_values:
            for alpha in args.alphas:
                moment = fading_moment(FadingModel.rayleigh(), alpha)
                sc = analytics.Scenario(alpha, args.density, moment, noise, n_pilots)
                s_av, b_av = analytics.best_support_size(sc, "average")
                s_tot, b_tot = analytics.best_support_size(sc, "total")
                asym = analytics.best_support_size_asymptotic(alpha, n_pilots)
                grid = analytics.admissible_support_sizes(alpha, n_pilots)
                rounded = min(max(round(asym), grid.start), grid.stop - 1)
                rows.append({
                    "noise_var": noise, "n_pilots": n_pilots, "alpha": alpha,
                    "s_opt_average": s_av, "s_opt_total": s_tot,
                    "bound_av_at_opt": b_av, "bound_tot_at_opt": b_tot,
                    "s_asymptotic": asym, "s_asymptotic_rounded": rounded,
                })
    write_csv(args.out, header, rows)
    write_manifest(args.out, sys.argv[1:], {"recipe": "fig2", "args": _args_dict(args)},
                   None, started)
    return 0


def _cmd_fig3(args) -> int:
    started = _now()
    header = ["alpha", "n_pilots", "trials", "mse_tot", "mse_tot_stderr",
              "non_converged", "s_opt", "bound_tot_at_opt", "error"]
    rows, failed = [], False
    for alpha in args.alphas:
        cfg = ExperimentConfig(
            n_rrh=args.n_rrh, alpha=alpha, noise_var=0.0,
            n_pilots=args.np_values[0], s="optimal", estimator="basis-pursuit",
            trials=args.trials, master_seed=args.seed,
        )
        for point in sweep(cfg, "n_pilots", args.np_values):
            n_pilots = point["value"]
            s_opt = point["s_opt_exact"]
            bound_tot = None
            if s_opt is not None:
                moment = fading_moment(FadingModel.rayleigh(), alpha)
                sc = analytics.Scenario(alpha, cfg.density, moment, 0.0, n_pilots, s_opt)
                bound_tot = analytics.mse_upper_bound(sc, "total")
            rows.append({
                "alpha": alpha, "n_pilots": n_pilots, "trials": args.trials,
                "mse_tot": point["mse_tot"], "mse_tot_stderr": point["mse_tot_stderr"],
                "non_converged": point["non_converged"], "s_opt": s_opt,
                "bound_tot_at_opt": bound_tot, "error": point["error"],
            })
            failed = failed or bool(point["error"])
    write_csv(args.out, header, rows)
    write_manifest(args.out, sys.argv[1:], {"recipe": "fig3", "args": _args_dict(args)},
                   args.seed, started)
    return 1 if failed else 0


# ------------------------------------------------------- validate-appendix


def _add_validate_appendix(sub):
    p = sub.add_parser(
        "validate-appendix",
        help="KS test of the simulated s-th strongest power against its closed-form cdf",
    )
    p.add_argument("--s-values", type=int, nargs="+", default=[1, 5, 10])
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--side", type=float, default=200.0, help="window side length")
    p.add_argument("--alpha", type=float, default=4.0, help=PAPER_DEFAULT)
    p.add_argument("--density", type=float, default=1.0, help=PAPER_DEFAULT)
    p.add_argument("--seed", type=int, default=DEFAULT_MASTER_SEED)
    _fading_args(p)
    p.add_argument("--out", type=Path, help="optional CSV output")
    p.set_defaults(handler=_cmd_validate_appendix)


def _cmd_validate_appendix(args) -> int:
    started = _now()
    cfg = ExperimentConfig(
        n_rrh=1,
        density=args.density,
        alpha=args.alpha,
        fading=_fading_from_args(args),
        trials=1,
        master_seed=args.seed,
        window_mode="hppp",
    )
    stats = validate_order_stats(cfg, args.s_values, args.samples, window_side=args.side)
    rows = [
        {"s": s, "samples": args.samples, "ks_distance": ks}
        for s, ks in zip(args.s_values, stats)
    ]
    for row in rows:
        print(f"s={row['s']} ks={row['ks_distance']:.5f}")
    if args.out is not None:
        write_csv(args.out, ["s", "samples", "ks_distance"], rows)
        write_manifest(args.out, sys.argv[1:],
                       {"recipe": "validate-appendix", "args": _args_dict(args)},
                       args.seed, started)
    return 0


# ------------------------------------------------------------------ I/O


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path: Path, header: list[str], rows: list[dict]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_cell(row.get(col)) for col in header))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_manifest(csv_path: Path, command, config: dict, master_seed, started: str):
    csv_path = Path(csv_path)
    manifest = {
        "tool": "cransim",
        "version": __version__,
        "command": list(command),
        "master_seed": master_seed,
        "config": _json_safe(config),
        "started": started,
        "finished": _now(),
        "outputs": [csv_path.name],
    }
    out = csv_path.with_suffix(".manifest.json")
    out.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def _args_dict(args) -> dict:
    skip = {"handler", "op_name", "command"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


if __name__ == "__main__":
    raise SystemExit(main())
