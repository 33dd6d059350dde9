"""Command-line entry point: ``forster <subcommand> [options]``.

Exit status: 0 on success, 1 on a validation error (bad config, bad
arguments, failed precondition), 2 on a runtime failure.
"""
import argparse
import datetime
import os
import sys

import numpy as np

from . import __version__, experiments, kernels
from .analysis import DataSeries, fit_damped_sine, fit_double_gaussian, fit_power_law
from .config import config_items, load_config
from .dynamics import pump_probe_pgg
from .errors import (ConfigError, ContractError, DataError, DomainError, ForsterError,
                     RegimeError)
from .io import emit_csv, emit_grid, emit_record, read_csv, write_manifest
from .stochastic import monte_carlo_trace

VALIDATION_ERRORS = (ConfigError, DomainError, ContractError, RegimeError, DataError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="config file path, or 'default'")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--no-noise", action="store_true",
                   help="disable shot-to-shot noise and finite statistics")
    p.add_argument("--workers", type=int, help="worker threads (overrides config)")
    return p


def build_parser():
    common = _common()
    parser = _Parser(prog="forster", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"forster {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    p = sub.add_parser("stark", parents=[common], help="defect and eigensplitting vs field")
    p.add_argument("--r", type=float, help="distance (um)")

    p = sub.add_parser("spectrum", parents=[common], help="1-D detuning scan")
    p.add_argument("--r", type=float, help="distance (um)")
    p.add_argument("--field", type=float, help="field (mV/cm), default resonance")

    p = sub.add_parser("map", parents=[common], help="P_rr over field and detuning")
    p.add_argument("--r", type=float, help="distance (um)")

    p = sub.add_parser("oscillate", parents=[common], help="pump-probe P_gg(T) trace")
    p.add_argument("--r", type=float, help="distance (um)")

    p = sub.add_parser("scan-r", parents=[common], help="distance scan with power-law fit")
    p.add_argument("--mode", choices=("oscillation", "spectroscopy"), default="oscillation")

    p = sub.add_parser("blockade", parents=[common], help="blockade enhancement report")
    p.add_argument("--r", type=float, help="distance (um)")
    p.add_argument("--f-off", type=float, help="off-resonant field (mV/cm)")

    p = sub.add_parser("fit", parents=[common], help="fit a model to a CSV file")
    p.add_argument("model", choices=("double-gaussian", "damped-sine", "power-law"))
    p.add_argument("path", help="CSV file; first column is x")
    p.add_argument("--y-column", help="y column header (default: second column)")
    p.add_argument("--fix-exponent", type=float, help="power-law: fixed exponent")
    return parser


class Run:
    """Collects emitted files and writes the manifest at the end of a command."""

    def __init__(self, command, cfg):
        self.command = command
        self.cfg = cfg
        self.out = cfg.out_dir
        self.files = []
        self.started = datetime.datetime.now(datetime.timezone.utc).isoformat()
        os.makedirs(self.out, exist_ok=True)

    def path(self, name):
        p = os.path.join(self.out, name)
        self.files.append(p)
        return p

    def finish(self):
        items = [("tool", f"forster {__version__}"), ("command", self.command),
                 ("seed", self.cfg.seed), ("kernel_backend", kernels.BACKEND),
                 ("started", self.started),
                 ("finished", datetime.datetime.now(datetime.timezone.utc).isoformat()),
                 ("defaults_applied", ",".join(self.cfg.defaults_applied))]
        items += [(f"config.{key}", value) for _, key, value in config_items(self.cfg)]
        return write_manifest(os.path.join(self.out, f"{self.command}.manifest"),
                              items, self.files, self.out)


def _resolve_config(args):
    cfg = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["out_dir"] = args.out
    if args.no_noise:
        changes["noise"] = False
    if args.workers is not None:
        changes["workers"] = args.workers
    if changes:
        defaults = tuple(k for k in cfg.defaults_applied if k not in changes)
        cfg = cfg.replace(**changes, defaults_applied=defaults)
    return cfg


def cmd_stark(args, cfg, run):
    params = cfg.params()
    r = cfg.r_um if args.r is None else args.r
    table = experiments.stark_map(cfg.scan_spec().fields, r, params)
    emit_csv({"F(mV/cm)": table[:, 0], "defect(MHz)": table[:, 1],
              "E_minus(MHz)": table[:, 2], "E_plus(MHz)": table[:, 3],
              "splitting(MHz)": table[:, 4], "mixing_angle(rad)": table[:, 5]},
             run.path("stark.csv"))
    i = int(np.argmin(table[:, 4]))
    print(f"minimum splitting {table[i, 4]:.6g} MHz at F = {table[i, 0]:.6g} mV/cm (r = {r} um)")


def cmd_spectrum(args, cfg, run):
    params = cfg.params()
    spec = cfg.scan_spec()
    r = cfg.r_um if args.r is None else args.r
    f = params.f_res if args.field is None else args.field
    probs = experiments.spectrum(spec, f, r, params)
    emit_csv({"delta(MHz)": spec.deltas, "P_gg": probs[:, 0],
              "P_gr+P_rg": probs[:, 1], "P_rr": probs[:, 2]}, run.path("spectrum.csv"))
    i = int(np.argmax(probs[:, 2]))
    print(f"max P_rr = {probs[i, 2]:.6g} at delta = {spec.deltas[i]:.6g} MHz "
          f"(F = {f} mV/cm, r = {r} um)")


def cmd_map(args, cfg, run):
    params = cfg.params()
    spec = cfg.scan_spec()
    r = cfg.r_um if args.r is None else args.r
    p_rr = experiments.spectroscopy_map(spec, r, params)
    emit_grid("F(mV/cm)", spec.fields, "delta(MHz)", spec.deltas, "P_rr", p_rr,
              run.path("map.csv"))
    print(f"map: {len(spec.fields)} fields x {len(spec.deltas)} detunings (r = {r} um)")


def cmd_oscillate(args, cfg, run):
    params = cfg.params()
    spec = cfg.scan_spec()
    r = cfg.r_um if args.r is None else args.r
    if cfg.risetime_us > 0 and not spec.noisy:
        p = np.array([pump_probe_pgg(t, r, params, spec.omega, spec.f_prep,
                                     risetime=cfg.risetime_us) for t in spec.times])
        err = np.zeros_like(p)
    else:
        tr = monte_carlo_trace(spec.times, r, params, spec.omega, spec.active_noise,
                               spec.seed, f_prep=spec.f_prep,
                               finite_statistics=spec.noisy and spec.finite_statistics,
                               workers=spec.workers)
        p, err = tr.p_gg, tr.stderr
    emit_csv({"T(us)": spec.times, "P_gg": p, "P_gg_err": err}, run.path("oscillate.csv"))
    print(f"oscillation trace: {len(spec.times)} points (r = {r} um)")


def cmd_scan_r(args, cfg, run):
    params = cfg.params()
    spec = cfg.scan_spec()
    if args.mode == "oscillation":
        res = experiments.oscillation_vs_distance(spec.r_list, spec, params)
        col = "f_osc(MHz)"
        values = res.derived["frequency"]
    else:
        res = experiments.splitting_vs_distance(spec.r_list, spec, params)
        col = "dE(MHz)"
        values = res.derived["splitting"]
    emit_csv({"R(um)": res.derived["r"], col: values},
             run.path(f"scan_r_{args.mode}.csv"))
    record = {"mode": args.mode, "exponent": res.derived["exponent"],
              "exponent_err": res.derived["exponent_err"],
              "prefactor(MHz um^3)": res.derived["prefactor"],
              "c3(MHz um^3)": res.derived["c3"],
              "c3_fixed_exponent(MHz um^3)": res.derived["c3_fixed"]}
    for r, why in res.excluded:
        record[f"excluded_r{r:g}"] = why
    emit_record(record, run.path(f"scan_r_{args.mode}_fit.txt"))
    for k, v in record.items():
        print(f"{k} = {v}")


def cmd_blockade(args, cfg, run):
    params = cfg.params()
    r = cfg.blockade_r_um if args.r is None else args.r
    f_off = cfg.f_off_mv_cm if args.f_off is None else args.f_off
    rep = experiments.blockade_report(r, f_off, params, cfg.omega_mhz)
    record = {"r(um)": r, "f_off(mV/cm)": f_off, "omega(MHz)": cfg.omega_mhz,
              "U_off(MHz)": rep.u_off, "U_on(MHz)": rep.u_on,
              "enhancement": rep.enhancement, "radius_ratio": rep.radius_ratio,
              "R_blockade_on(um)": rep.r_blockade_on,
              "R_blockade_off(um)": rep.r_blockade_off}
    emit_csv({k: [v] for k, v in record.items()}, run.path("blockade.csv"))
    for k, v in record.items():
        print(f"{k} = {v:.6g}")


def cmd_fit(args, cfg, run):
    header, data = read_csv(args.path)
    if data.shape[1] < 2:
        raise DataError(f"{args.path}: need at least two columns")
    if args.y_column is None:
        j = 1
    elif args.y_column in header:
        j = header.index(args.y_column)
    else:
        raise DataError(f"{args.path}: no column named {args.y_column!r}")
    x, y = data[:, 0], data[:, j]
    if args.model == "double-gaussian":
        res = fit_double_gaussian(DataSeries(x, y))
        record = {"splitting": res.splitting, "resolved": res.resolved,
                  "center1": res.centers[0],
                  "center2": res.centers[-1] if res.resolved else float("nan")}
        fit = res.fit
    elif args.model == "damped-sine":
        res = fit_damped_sine(DataSeries(x, y))
        record = {"f_osc": res.frequency, "tau": res.tau, "contrast": res.contrast}
        fit = res.fit
    else:
        res = fit_power_law(x, y, fix_exponent=args.fix_exponent)
        record = {"exponent": res.exponent, "exponent_err": res.exponent_err,
                  "prefactor": res.prefactor, "c3": res.c3}
        fit = res.fit
    record.update(fit.to_record())
    record["message"] = fit.message
    emit_record(record, run.path(f"fit_{args.model}.txt"))
    for k, v in record.items():
        print(f"{k} = {v}")


COMMANDS = {
    "stark": cmd_stark,
    "spectrum": cmd_spectrum,
    "map": cmd_map,
    "oscillate": cmd_oscillate,
    "scan-r": cmd_scan_r,
    "blockade": cmd_blockade,
    "fit": cmd_fit,
}


def cli_dispatch(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    if args.command is None:
        parser.print_help(sys.stderr)
        return 1
    try:
        cfg = _resolve_config(args)
        run = Run(args.command, cfg)
        COMMANDS[args.command](args, cfg, run)
        run.finish()
    except VALIDATION_ERRORS as exc:
        print(f"forster {args.command}: {exc}", file=sys.stderr)
        return 1
    except (ForsterError, OSError, np.linalg.LinAlgError) as exc:
        print(f"forster {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    main()
