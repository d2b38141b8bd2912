"""Command-line front end.

Exit status: 0 success, 1 usage error, 2 validation/config error,
3 numeric or accuracy error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace

from .analytic import (AccuracyError, DomainError, SeriesControl, channel_moments,
                       outage_probability)
from .asymptotic import asymptotic_outage
from .config import ConfigError, RunConfig, dump_config, parse_config
from .model import PRESET_NAMES, OutageQuery, PhaseShifts, ValidationError, preset
from .montecarlo import estimate_outage
from .optimizer import optimal_outage
from .sweep import SweepError, SweepSpec, run_sweep, to_csv

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _theta_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of radians: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("scenario")
    src.add_argument("--config", metavar="PATH", help="TOML run configuration")
    src.add_argument("--preset", metavar="NAME", help=f"one of {', '.join(PRESET_NAMES)}")
    src.add_argument("--snr-db", type=float, help="transmit SNR in dB")
    src.add_argument("--rate", type=float, help="target rate R in bit/s/Hz")
    src.add_argument("--rel-tol", type=float, help="series relative tolerance")
    src.add_argument("--out", metavar="PATH", help="write output here instead of stdout")

    p = _Parser(prog="irs-outage", description="Outage analysis of multi-IRS Rician links.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eval", parents=[common], help="outage probability at given phases")
    e.add_argument("--theta", type=_theta_list, help="flat comma list of phases, radians")
    e.add_argument("--degrees", action="store_true", help="read --theta in degrees")

    sub.add_parser("optimal", parents=[common], help="optimal phases and outage probability")
    sub.add_parser("asymptotic", parents=[common], help="high-SNR asymptote of the optimum")

    m = sub.add_parser("mc", parents=[common], help="Monte Carlo outage estimate")
    m.add_argument("--theta", type=_theta_list, help="flat comma list of phases, radians")
    m.add_argument("--degrees", action="store_true", help="read --theta in degrees")
    m.add_argument("--optimal", action="store_true", help="simulate at the optimal phases")
    m.add_argument("--samples", type=int)
    m.add_argument("--seed", type=int)
    m.add_argument("--workers", type=int, default=1)

    s = sub.add_parser("sweep", parents=[common], help="parameter sweep as CSV")
    s.add_argument("--samples", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--figure", metavar="PATH", help="also render the sweep to an image file")

    pr = sub.add_parser("preset", help="list presets or dump one as a config document")
    pr.add_argument("name", nargs="?")
    pr.add_argument("--preset", dest="preset_opt", metavar="NAME")
    pr.add_argument("--list", action="store_true")
    pr.add_argument("--out", metavar="PATH")
    return p


def _load(args) -> RunConfig:
    if args.config and args.preset:
        raise UsageError("give either --config or --preset, not both")
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise UsageError(f"cannot read config: {e}") from None
        cfg = parse_config(text)
    elif args.preset:
        cfg = _preset_config(args.preset)
    else:
        raise UsageError("a scenario is required: use --config PATH or --preset NAME")

    q = cfg.query
    rate = q.rate if args.rate is None else args.rate
    if args.snr_db is not None:
        q = OutageQuery.from_db(rate, args.snr_db)
    elif args.rate is not None:
        q = OutageQuery(rate, q.snr)
    cfg = replace(cfg, query=q)
    if args.rel_tol is not None:
        cfg = replace(cfg, ctl=SeriesControl(args.rel_tol, cfg.ctl.max_terms))
    for name, field in (("samples", "mc_samples"), ("seed", "seed")):
        v = getattr(args, name, None)
        if v is not None:
            cfg = replace(cfg, **{field: v})
    return cfg


def _preset_config(name) -> RunConfig:
    try:
        sc = preset(name)
    except KeyError as e:
        raise UsageError(e.args[0]) from None
    return RunConfig(sc.model, sc.query, sweep=sc.sweep, preset_name=name)


def _phases(cfg, theta, degrees=False):
    if theta is not None:
        if degrees:
            theta = [math.radians(v) for v in theta]
        return PhaseShifts.from_flat(cfg.model, theta)
    if cfg.theta is not None:
        return cfg.theta
    return PhaseShifts.zeros(cfg.model)


def _g(v):
    return f"{v:.12g}"


def _flat(phases):
    return ",".join(repr(v) for v in phases.flat())


def _cmd_eval(args, cfg):
    phases = _phases(cfg, args.theta, args.degrees)
    m = channel_moments(cfg.model, phases)
    p = outage_probability(cfg.model, phases, cfg.query, cfg.ctl)
    return [f"p_o = {_g(p)}", f"g_los = {_g(m.g_los)}", f"g_nlos = {_g(m.g_nlos)}",
            f"threshold = {_g(cfg.query.threshold)}"]


def _cmd_optimal(args, cfg):
    sol = optimal_outage(cfg.model, cfg.query, cfg.ctl)
    return [f"case = {sol.case_tag}", f"theta = {_flat(sol.phases)}",
            f"g_los_star = {_g(sol.g_los_star)}", f"g_nlos = {_g(sol.g_nlos)}",
            f"p_o_star = {_g(sol.p_o_star)}"]


def _cmd_asymptotic(args, cfg):
    res = asymptotic_outage(cfg.model, cfg.query, cfg.ctl)
    ratio = "absent" if res.ratio_to_exact is None else _g(res.ratio_to_exact)
    out = [f"p_tilde = {_g(res.p_tilde)}", f"log_p_tilde = {_g(res.log_p_tilde)}",
           f"ratio_to_exact = {ratio}"]
    if res.above_one:
        out.append("warning = asymptote exceeds 1; SNR is outside the high-SNR regime")
    return out


def _cmd_mc(args, cfg):
    if args.optimal:
        phases = optimal_outage(cfg.model, cfg.query, cfg.ctl).phases
    else:
        phases = _phases(cfg, args.theta, args.degrees)
    est = estimate_outage(cfg.model, phases, cfg.query, cfg.mc_samples, cfg.seed,
                          workers=args.workers)
    lo, hi = est.interval()
    out = [f"p_hat = {_g(est.p_hat)}", f"std_err = {_g(est.std_err)}",
           f"ci95 = {_g(lo)},{_g(hi)}", f"n_samples = {est.n_samples}",
           f"n_outage = {est.n_outage}", f"seed = {est.seed}"]
    if est.rare_event:
        out.append("warning = no outage observed; use the asymptotic command for deep tails")
    return out


def _cmd_sweep(args, cfg):
    spec = SweepSpec.from_config(cfg)
    rows = run_sweep(spec, workers=args.workers)
    if args.figure:
        from .plotting import plot_sweep
        plot_sweep(spec.columns, rows, args.figure, title=cfg.preset_name)
    return to_csv(spec, rows)


def _cmd_preset(args):
    name = args.name or args.preset_opt
    if args.list or not name:
        return [*PRESET_NAMES]
    return dump_config(_preset_config(name)).rstrip("\n").split("\n")


COMMANDS = {"eval": _cmd_eval, "optimal": _cmd_optimal, "asymptotic": _cmd_asymptotic,
            "mc": _cmd_mc, "sweep": _cmd_sweep}


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _status(err) -> int:
    if isinstance(err, SweepError):
        return _status(err.cause)
    if isinstance(err, UsageError):
        return EXIT_USAGE
    if isinstance(err, (ValidationError, ConfigError)):
        return EXIT_INVALID
    if isinstance(err, (DomainError, AccuracyError, ArithmeticError, ValueError)):
        return EXIT_NUMERIC
    raise err


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "preset":
            out = _cmd_preset(args)
        else:
            cfg = _load(args)
            out = COMMANDS[args.command](args, cfg)
        text = out if isinstance(out, str) else "\n".join(out) + "\n"
        _emit(text, args.out)
    except Exception as err:
        code = _status(err)
        print(f"irs-outage: error: {err}", file=sys.stderr)
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
