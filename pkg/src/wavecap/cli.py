"""Command-line surface.

Subcommands map onto the pipeline phases:

    run        full pipeline: calibrate, evolve, reduce, analyze, emit
    calibrate  detector-strength search only
    mc         reduction trials on an existing weights CSV
    claims     emit the claim report only
    sweep      rerun the pipeline while varying one config key

Exit codes: 0 success, 1 configuration/validation error, 2 numerical-guard
abort.
"""

from __future__ import annotations

import argparse
import importlib.resources
import json
import os
import sys
from dataclasses import asdict

from .analysis import detect_zero_current_window, summarize_batch
from .config import load_config, with_overrides
from .csvio import trials_to_csv, weights_from_csv
from .errors import ConfigError, NumericsError, ValidationError, WavecapError
from .pipeline import run_experiment, sweep_values
from .reduction import RULE_KINDS, ReductionRule, run_trials
from .scenario import calibrate_strength
from .state import EnergyMoments

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICS = 2


def preset_path(name: str) -> str:
    """Filesystem path of a shipped preset config (with or without .cfg)."""
    if not name.endswith(".cfg"):
        name += ".cfg"
    ref = importlib.resources.files("wavecap").joinpath("presets", name)
    if not ref.is_file():
        raise ConfigError([f"config: no such file or preset {name!r}"])
    return str(ref)


def list_presets() -> list[str]:
    base = importlib.resources.files("wavecap").joinpath("presets")
    return sorted(p.name[:-4] for p in base.iterdir() if p.name.endswith(".cfg"))


def _resolve_config(path: str):
    if os.path.exists(path):
        return load_config(path)
    return load_config(preset_path(path))


def _print_claims(claims):
    for c in claims:
        marker = "" if c["as_expected"] else "  [UNEXPECTED]"
        print(f"{c['result']:4s} (expected {c['expected']:4s}) {c['claim']}: "
              f"measured {c['measured']:.6g} {c['op']} {c['threshold']:.6g}"
              f"{marker}")


def _cmd_run(args) -> int:
    config = with_overrides(_resolve_config(args.config),
                            base_seed=args.seed, directory=args.out)
    out_dir = config.output.directory
    if out_dir is None:
        print("error: no output directory (pass --out or set output.directory)",
              file=sys.stderr)
        return EXIT_CONFIG
    result = run_experiment(config, out_dir, threads=args.threads)
    print(f"run '{config.label}' complete: {len(result.manifest['files'])} files "
          f"in {out_dir}")
    _print_claims(result.claims)
    return EXIT_OK


def _cmd_claims(args) -> int:
    config = with_overrides(_resolve_config(args.config),
                            base_seed=args.seed, directory=args.out)
    out_dir = config.output.directory
    if out_dir is None:
        print("error: no output directory (pass --out or set output.directory)",
              file=sys.stderr)
        return EXIT_CONFIG
    result = run_experiment(config, out_dir, threads=args.threads,
                            artifacts=("claims",))
    _print_claims(result.claims)
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    config = _resolve_config(args.config)
    cal = calibrate_strength(config.scenario, config.grid,
                             target=config.calibration.target,
                             tolerance=config.calibration.tolerance,
                             max_iter=config.calibration.max_iter)
    payload = asdict(cal)
    payload["bracket"] = list(cal.bracket)
    text = json.dumps(payload, indent=2)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "calibration.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        print(f"wrote {path}")
    print(text)
    return EXIT_OK


def _cmd_mc(args) -> int:
    with open(args.weights, "r", encoding="utf-8") as fh:
        weights = weights_from_csv(fh.read())
    kwargs = {}
    if args.tau_env is not None:
        kwargs["tau_env"] = args.tau_env
    if args.onset_epsilon is not None:
        kwargs["onset_epsilon"] = args.onset_epsilon
    rule = ReductionRule(kind=args.rule, **kwargs)
    moments = None
    if args.delta_e is not None:
        moments = EnergyMoments(mean_energy=0.0, energy_spread=args.delta_e)
    window = detect_zero_current_window(weights)
    records = run_trials(weights, rule, args.trials, args.seed,
                         moments=moments,
                         window=window if window.exists else None)
    summary = summarize_batch(records, weights,
                              window if window.exists else None)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"trials_{rule.kind}.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(trials_to_csv(records))
        print(f"wrote {path}")
    print(f"rule {rule.kind}: {summary.n_trials} trials, capture fraction "
          f"{summary.capture_fraction:.4f}, flags {summary.flag_counts}"
          + (f", KS {summary.ks_distance:.4f}"
             if summary.ks_distance is not None else ""))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = with_overrides(_resolve_config(args.config), base_seed=args.seed)
    values = [v for v in args.values.split(",") if v]
    if not values:
        print("error: --values must list at least one value", file=sys.stderr)
        return EXIT_CONFIG
    rows = []
    for sub in sweep_values(config, args.key, values):
        sub_dir = os.path.join(args.out, f"{args.key.split('.')[-1]}={sub.label.split('=')[-1]}")
        result = run_experiment(sub, sub_dir, threads=args.threads)
        row = {"value": sub.label.split("=")[-1],
               "final_capture": result.manifest["final_capture"],
               "claims": {c["claim"]: c["result"] for c in result.claims}}
        if result.window is not None:
            row["window"] = asdict(result.window)
        rows.append(row)
        print(f"swept {args.key} = {row['value']}: capture "
              f"{row['final_capture']:.6f}")
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "sweep.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"format_version": 1, "key": args.key, "runs": rows}, fh,
                  indent=2)
        fh.write("\n")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_presets(_args) -> int:
    for name in list_presets():
        print(f"{name}\t{preset_path(name)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavecap",
        description="1D wave-packet capture simulator with competing "
                    "state-reduction timing rules")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", required=True,
                       help="config file path or shipped preset name")
        if needs_out:
            p.add_argument("--out", required=False, default=None,
                           help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override trials.base_seed")
        p.add_argument("--threads", type=int, default=1,
                       help="parallel workers for trial batches")

    p_run = sub.add_parser("run", help="full pipeline")
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_claims = sub.add_parser("claims", help="claim report only")
    common(p_claims)
    p_claims.set_defaults(func=_cmd_claims)

    p_cal = sub.add_parser("calibrate", help="detector-strength search")
    p_cal.add_argument("--config", required=True)
    p_cal.add_argument("--out", default=None)
    p_cal.set_defaults(func=_cmd_calibrate)

    p_mc = sub.add_parser("mc", help="reduction trials on an existing weights CSV")
    p_mc.add_argument("--weights", required=True, help="weights CSV path")
    p_mc.add_argument("--rule", required=True, choices=RULE_KINDS)
    p_mc.add_argument("--trials", type=int, default=1000)
    p_mc.add_argument("--seed", type=int, default=0)
    p_mc.add_argument("--tau-env", type=float, default=None)
    p_mc.add_argument("--onset-epsilon", type=float, default=None)
    p_mc.add_argument("--delta-e", type=float, default=None,
                      help="packet energy spread (needed for penrose_spread)")
    p_mc.add_argument("--out", default=None)
    p_mc.set_defaults(func=_cmd_mc)

    p_sweep = sub.add_parser("sweep", help="vary one config key over a list")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--key", required=True,
                         help="dotted key, e.g. scenario.pulse_gap")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--threads", type=int, default=1)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_presets = sub.add_parser("presets", help="list shipped preset configs")
    p_presets.set_defaults(func=_cmd_presets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericsError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    except WavecapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
