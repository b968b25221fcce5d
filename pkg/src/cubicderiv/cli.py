"""Command line entry point: ``cubicderiv <subcommand> --config <path>``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .scenario import (
    EXIT_ERROR,
    EXIT_FAIL,
    EXIT_PASS,
    FORMATS,
    ScenarioError,
    builtin_scenario,
    execute,
    load_config,
    resolve_config,
    sweep_configs,
    sweep_csv,
    sweep_row,
    triangular_reproduction,
    write_outcome,
)

COMMANDS = ("validate", "example-triangular", "recover", "certify", "superstability", "sweep")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cubicderiv", description=__doc__)
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path, help="scenario config (JSON)")
    ap.add_argument("--scenario", help="builtin scenario name instead of a config file")
    ap.add_argument("--out", type=Path, help="report directory (overrides output.directory)")
    ap.add_argument("--format", default=None, help="comma separated subset of json,csv")
    return ap


def _formats(arg, cfg_formats):
    if arg is None:
        return tuple(cfg_formats)
    fmts = tuple(s.strip() for s in arg.split(",") if s.strip())
    bad = [f for f in fmts if f not in FORMATS]
    if bad:
        raise ScenarioError("--format", f"unknown format(s) {bad}")
    return fmts


def _load(args):
    if (args.config is None) == (args.scenario is None):
        raise ScenarioError("--config", "give exactly one of --config or --scenario")
    if args.config is not None:
        return load_config(args.config)
    return resolve_config(builtin_scenario(args.scenario))


def _print_table(rows, columns) -> None:
    widths = [max(len(c), *(len(str(r[c])) for r in rows)) for c in columns]
    print("  ".join(c.ljust(w) for c, w in zip(columns, widths)))
    for r in rows:
        print("  ".join(str(r[c]).ljust(w) for c, w in zip(columns, widths)))


def run_example(args) -> int:
    seeds = {}
    if args.config is not None:
        with open(args.config) as fh:
            seeds = json.load(fh)
    res = triangular_reproduction(int(seeds.get("g0_seed", 1)), int(seeds.get("probe_seed", 3)),
                                  int(seeds.get("count", 200)))
    print(f"triangular example over M2(R): {res['probes']} probes, {res['pairs']} pairs, "
          f"{res['arc_scalars']} arc scalars")
    rows = [{"check": r["check"], "value": f"{r['value']:.3e}",
             "verdict": {True: "ok", False: "FAIL", None: "-"}[r["passed"]]} for r in res["rows"]]
    _print_table(rows, ("check", "value", "verdict"))
    print(f"runtime {res['runtime_s']:.2f} s: {'reproduced' if res['passed'] else 'NOT reproduced'}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        res = dict(res)
        res.pop("runtime_s")
        (args.out / "example-triangular.json").write_text(json.dumps(res, sort_keys=True, indent=1) + "\n")
    return EXIT_PASS if res["passed"] else EXIT_FAIL


def run_sweep(args) -> int:
    base = None
    if args.config is not None:
        with open(args.config) as fh:
            base = json.load(fh)
    cfgs = sweep_configs(base)
    out_dir = args.out or Path("reports")
    formats = _formats(args.format, ["json", "csv"])
    rows, code = [], EXIT_PASS
    for cfg in cfgs:
        outcome = execute(cfg, "certify")
        write_outcome(outcome, out_dir, formats)
        rows.append(sweep_row(outcome))
        code = max(code, outcome.exit_code)
    table = sweep_csv(rows)
    if "csv" in formats:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "sweep.margins.csv").write_text(table)
    shown = [{k: (f"{v:.3e}" if isinstance(v, float) else v) for k, v in r.items()} for r in rows]
    _print_table(shown, ("scenario", "engine", "delta_hat", "N", "stability_min_margin",
                         "corollary_min_margin", "status"))
    print(f"{sum(r['status'] == 'pass' for r in rows)}/{len(rows)} scenarios pass")
    return code


def run_scenario(args) -> int:
    cfg = _load(args)
    outcome = execute(cfg, args.command)
    out_dir = args.out or Path(cfg.output["directory"])
    paths = write_outcome(outcome, out_dir, _formats(args.format, cfg.output["formats"]))
    rep = outcome.report
    if rep.get("error"):
        print(f"error: {rep['error']['message']}", file=sys.stderr)
    for name, v in rep.get("validation", {}).items():
        for msg in v["failures"]:
            print(f"validation failure ({name}): {msg}", file=sys.stderr)
    if "delta" in rep:
        print(f"delta_hat = {rep['delta']['delta_hat']}")
    if "recovery" in rep:
        print(f"engine {rep['recovery']['engine']}: N = {rep['recovery']['N']}, "
              f"max tail = {rep['recovery']['max_tail']:.3e}")
    for c in rep.get("certificates", []):
        print(f"{c['family']}: {c['verdict']} (min margin {c['min_margin']})")
        if c.get("witness"):
            print(f"  witness: {json.dumps(c['witness'], sort_keys=True)}")
    print(f"{cfg.name}: {outcome.status} (exit {outcome.exit_code}); wrote {len(paths)} file(s) to {out_dir}")
    return outcome.exit_code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "example-triangular":
            return run_example(args)
        if args.command == "sweep":
            return run_sweep(args)
        return run_scenario(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
