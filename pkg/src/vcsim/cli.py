"""Command-line front end.

    vcsim simulate --config desk --out results/
    vcsim price --n 10 --c 1/4 --b 1/8 --scheme drp --pc 8 --pb 8
    vcsim calibrate --dsp-report a.json --drp-report b.json
    vcsim gen --config desk --seed 3 --out stream.txt
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

from . import config as cfgmod
from .config import ConfigError
from .pricing import (CalibrationInput, LambdaParams, UnitPrices, calibrate_lambda_b,
                      calibrate_lambda_c, quote)
from .request import TemplateSet, UnpriceableError, VCRequest, as_fraction
from .simulator import SUMMARY_HEADER, Comparison, run_all, summary_row, write_series
from .workload import dump, generate, load

log = logging.getLogger("vcsim")


def _frac_arg(s: str) -> Fraction:
    try:
        return as_fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {s!r}")


def _list(conv):
    def parse(s: str):
        try:
            return tuple(conv(x) for x in s.split(",") if x.strip())
        except (ValueError, ZeroDivisionError):
            raise argparse.ArgumentTypeError(f"bad list: {s!r}")
    return parse


def _experiment(args) -> cfgmod.ExperimentConfig:
    cfg = cfgmod.resolve(args.config)
    wl = cfg.workload
    if getattr(args, "requests", None) is not None:
        wl = replace(wl, total_requests=args.requests,
                     warmup_requests=min(wl.warmup_requests, max(args.requests - 1, 0)))
    if getattr(args, "warmup", None) is not None:
        wl = replace(wl, warmup_requests=args.warmup)
    if getattr(args, "mean_n", None) is not None:
        wl = replace(wl, mean_n=args.mean_n)
    changes = {"workload": wl}
    if getattr(args, "seeds", None):
        changes["seeds"] = args.seeds
    if getattr(args, "oversub", None):
        changes["oversub"] = args.oversub
    if getattr(args, "load", None):
        changes["loads"] = args.load
    try:
        cfg = replace(cfg, **changes)
        for cell in cfg.cells():
            cfg.scenarios_for(*cell)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    return cfg


def _cell_name(emb, scheme, ov, load, seed) -> str:
    def tag(x):
        return str(x).replace("/", "_")
    return f"{emb}_{scheme}_ov{tag(ov)}_load{tag(load)}_seed{seed}"


def cmd_simulate(args) -> int:
    cfg = _experiment(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    replay = load(args.replay) if args.replay else None

    cells, scenarios, streams = [], [], []
    for ov, ld, seed in cfg.cells():
        group = cfg.scenarios_for(ov, ld, seed)
        stream = replay if replay is not None else generate(group[0].workload, group[0].tree_spec)
        for sc in group:
            cells.append((ov, ld, seed))
            scenarios.append(sc)
            streams.append(stream)
    log.info("running %d simulations", len(scenarios))
    reports = run_all(scenarios, streams, args.threads)

    rows = []
    for (ov, ld, seed), sc, rep in zip(cells, scenarios, reports):
        name = _cell_name(sc.embedder, sc.scheme, ov, ld, seed)
        with open(out / f"{name}.csv", "w", newline="") as f:
            write_series(rep, f)
        (out / f"{name}.json").write_text(json.dumps(rep.scalars(), indent=2, sort_keys=True) + "\n")
        rows.append(summary_row(rep, sc))
    with open(out / "summary.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        w.writerows(rows)

    k = len(cfg.arms)
    for i in range(0, len(reports), k):
        ov, ld, seed = cells[i]
        print(f"\n== oversub {ov}, load {ld}, seed {seed}")
        print(Comparison(scenarios[i:i + k], reports[i:i + k]).table())
    print(f"\nwrote {len(reports)} series and summary.csv to {out}")
    return 0


def cmd_price(args) -> int:
    req = VCRequest(0, args.n, args.c, args.b)
    prices = UnitPrices(args.pc, args.pb)
    lambdas = LambdaParams(args.lambda_c, args.lambda_b)
    templates = TemplateSet.of(args.templates) if args.templates else None
    q = quote(args.scheme, req, prices, lambdas, templates)
    print(q.total)
    if args.breakdown:
        print(f"base {q.base}  skew_fee {q.skew_fee}  ({float(q.total):.2f})")
    return 0


def _skew_input(report: dict, direction: str, delta: Fraction) -> CalibrationInput:
    s = report["skew"][direction]
    vm_time = Fraction(s["vm_time"])
    if vm_time == 0:
        raise ConfigError(f"report has no accepted requests with {direction}")
    return CalibrationInput(vm_time, Fraction(s["c"]) / vm_time, Fraction(s["b"]) / vm_time, delta)


def cmd_calibrate(args) -> int:
    prices = UnitPrices(args.pc, args.pb)
    if args.dsp_report or args.drp_report:
        if not (args.dsp_report and args.drp_report):
            raise ConfigError("--dsp-report and --drp-report go together")
        dsp = json.loads(Path(args.dsp_report).read_text())
        drp = json.loads(Path(args.drp_report).read_text())
        # DRP income had the non-upgraded (DSP-embedded) stream been charged DRP prices
        delta = (Fraction(dsp["revenue_by_scheme"]["drp"])
                 - Fraction(drp["revenue_by_scheme"]["drp"]))
        delta = max(delta, Fraction(0))
        lam_b = calibrate_lambda_b(_skew_input(dsp, "c>b", delta), prices)
        lam_c = calibrate_lambda_c(_skew_input(dsp, "b>c", delta), prices)
        print(f"delta {float(delta):.4f}")
        print(f"lambda_b {lam_b} ({float(lam_b):.4f})")
        print(f"lambda_c {lam_c} ({float(lam_c):.4f})")
        return 0
    missing = [n for n in ("n_vms", "ec", "eb", "delta") if getattr(args, n) is None]
    if missing:
        raise ConfigError("missing " + ", ".join("--" + m.replace("_", "-") for m in missing))
    inp = CalibrationInput(args.n_vms, args.ec, args.eb, args.delta)
    lam = (calibrate_lambda_b if args.direction == "b" else calibrate_lambda_c)(inp, prices)
    print(lam)
    return 0


def cmd_gen(args) -> int:
    cfg = _experiment(args)
    wl = cfg.workload
    if args.seed is not None:
        wl = replace(wl, seed=args.seed)
    else:
        wl = replace(wl, seed=cfg.seeds[0])
    stream = generate(wl, cfg.tree_spec)
    if args.out == "-":
        dump(stream, sys.stdout)
    else:
        dump(stream, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vcsim", description="Virtual cluster embedding and pricing simulator")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    sim = sub.add_parser("simulate", help="run an experiment grid")
    sim.add_argument("--config", default="desk", help="preset name or JSON file")
    sim.add_argument("--requests", type=int)
    sim.add_argument("--warmup", type=int)
    sim.add_argument("--mean-n", type=float)
    sim.add_argument("--seeds", type=_list(int))
    sim.add_argument("--oversub", type=_list(as_fraction))
    sim.add_argument("--load", type=_list(as_fraction))
    sim.add_argument("--replay", help="request stream written by 'gen'")
    sim.add_argument("--threads", type=int, help="parallel cells (default: $VCSIM_THREADS or CPU count)")
    sim.add_argument("--out", default="results")
    sim.set_defaults(func=cmd_simulate)

    pr = sub.add_parser("price", help="quote one request")
    pr.add_argument("--n", type=int, required=True)
    pr.add_argument("--c", type=_frac_arg, required=True)
    pr.add_argument("--b", type=_frac_arg, required=True)
    pr.add_argument("--scheme", choices=("ideal", "drp", "dsp"), default="dsp")
    pr.add_argument("--pc", type=_frac_arg, default=Fraction(1))
    pr.add_argument("--pb", type=_frac_arg, default=Fraction(1))
    pr.add_argument("--lambda-c", type=_frac_arg, default=Fraction(1, 6))
    pr.add_argument("--lambda-b", type=_frac_arg, default=Fraction(1, 6))
    pr.add_argument("--templates", type=_list(as_fraction))
    pr.add_argument("--breakdown", action="store_true")
    pr.set_defaults(func=cmd_price)

    cal = sub.add_parser("calibrate", help="solve for the DSP skew weights")
    cal.add_argument("--dsp-report", help="cell JSON of a DSP run")
    cal.add_argument("--drp-report", help="cell JSON of the paired DRP run")
    cal.add_argument("--n-vms", type=_frac_arg)
    cal.add_argument("--ec", type=_frac_arg)
    cal.add_argument("--eb", type=_frac_arg)
    cal.add_argument("--delta", type=_frac_arg)
    cal.add_argument("--direction", choices=("b", "c"), default="b",
                     help="b: lambda_b for c > b requests; c: lambda_c for b > c")
    cal.add_argument("--pc", type=_frac_arg, default=Fraction(1))
    cal.add_argument("--pb", type=_frac_arg, default=Fraction(1))
    cal.set_defaults(func=cmd_calibrate)

    gen = sub.add_parser("gen", help="write a request stream for replay")
    gen.add_argument("--config", default="desk")
    gen.add_argument("--requests", type=int)
    gen.add_argument("--warmup", type=int)
    gen.add_argument("--mean-n", type=float)
    gen.add_argument("--load", type=_list(as_fraction))
    gen.add_argument("--seed", type=int)
    gen.add_argument("--out", default="-")
    gen.set_defaults(func=cmd_gen)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UnpriceableError, ValueError, OSError) as e:
        print(f"vcsim: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
