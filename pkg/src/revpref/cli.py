"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 internal numeric failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import os
import sys
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import __version__
from .dataset import DatasetError, dump_dataset, load_dataset
from .lp import LPNumericalError
from .report import AnalysisReport, InconsistentReport, analyze
from .synth import (
    POWER_DESIGNS,
    CobbDouglasAgent,
    JekyllHydeSpec,
    ThetaExample,
    alice_spec,
    bob_spec,
    bronars_power,
    ccei_instability_curve,
    power_design_spec,
    jekyll_hyde_dataset,
    monte_carlo_relation,
    preference_instability,
    theta_example_dataset,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


class InputError(Exception):
    pass


def _fmt(v) -> str:
    if isinstance(v, Fraction) and v.denominator != 1:
        return f"{float(v):.10g} ({v})"
    return f"{float(v):.10g}"


def format_report(rep: AnalysisReport) -> str:
    one_based = lambda cyc: "-".join(str(i + 1) for i in cyc)  # noqa: E731
    lines = [
        f"observations        {rep.K}",
        f"goods               {rep.n}",
        f"GARP                {'satisfied' if rep.garp else 'violated'}",
    ]
    if rep.garp_witness:
        lines.append(f"  witness cycle     {one_based(rep.garp_witness.cycle)}")
    lines.append(
        f"CCEI                {_fmt(rep.ccei.value)}"
        f"{'' if rep.ccei.attained else '  (supremum, not attained)'}"
    )
    var = rep.varian
    lines.append(
        "Varian e            " + ", ".join(f"{float(v):.6g}" for v in var.e)
        + ("  [heuristic]" if var.heuristic else "")
    )
    lines.append(f"  min / ssq         {_fmt(var.aggregate_min)} / {_fmt(var.aggregate_ssq)}")
    mp = rep.money_pump
    lines.append(f"money pump cycles   {len(mp)} (length <= {mp.max_cycle_len})")
    if len(mp):
        lines.append(f"  max / mean MPI    {_fmt(mp.max_mpi)} / {_fmt(mp.mean_mpi)}")
        for cyc, m in mp.cycles[:10]:
            lines.append(f"  {one_based(cyc):<17} {_fmt(m)}")
        if len(mp) > 10:
            lines.append(f"  ... {len(mp) - 10} more")
    lines.append(f"Afriat inequalities {'feasible' if rep.afriat_feasible else 'infeasible'}")
    lines.append(
        f"instability phi     {rep.phi.phi:.10g}  (norm {rep.phi.norm.value}, lambda >= {rep.phi.lambda_floor:g})"
    )
    lines.append(f"  certificate       {'yes' if rep.phi_certificate else 'no'}")
    prov = rep.provenance
    lines.append(f"revpref {prov['version']}, tol {prov['tol']:g}")
    return "\n".join(lines) + "\n"


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _parse_vector(text: str) -> list[Fraction]:
    try:
        return [Fraction(v.strip()) for v in text.split(",")]
    except (ValueError, ZeroDivisionError):
        raise InputError(f"cannot parse vector {text!r}") from None


def _parse_prices(text: str) -> list[list[Fraction]]:
    return [_parse_vector(chunk) for chunk in text.split(";") if chunk.strip()]


# -- subcommands ------------------------------------------------------------


def cmd_check(args) -> int:
    try:
        with open(args.csv, encoding="utf-8", newline="") as fh:
            d = load_dataset(fh)
    except OSError as exc:
        raise InputError(f"cannot read {args.csv}: {exc.strerror}") from None
    if args.max_cycle_len is not None and args.max_cycle_len < 2:
        raise InputError("--max-cycle-len must be at least 2")
    rep = analyze(d, tol=args.tol, norm=args.norm, max_cycle_len=args.max_cycle_len, seed=args.seed)
    with _output(args.out) as out:
        if args.json:
            json.dump(rep.to_dict(), out, indent=2, sort_keys=True)
            out.write("\n")
        else:
            out.write(format_report(rep))
    return EXIT_OK


def cmd_simulate_jekyll_hyde(args) -> int:
    if args.preset == "alice":
        spec = alice_spec(args.periods)
    elif args.preset == "bob":
        spec = bob_spec(args.periods)
    else:
        if not (args.hyde and args.jekyll and args.schedule and args.prices):
            raise InputError("custom spec needs --hyde, --jekyll, --schedule and --prices")
        prices = _parse_prices(args.prices)
        schedule = ["hyde" if c.upper() == "H" else "jekyll" if c.upper() == "J" else c for c in args.schedule]
        if len(prices) == 1:
            prices = prices * len(schedule)
        try:
            spec = JekyllHydeSpec(
                CobbDouglasAgent(_parse_vector(args.hyde)),
                CobbDouglasAgent(_parse_vector(args.jekyll)),
                tuple(schedule),
                tuple(tuple(p) for p in prices),
                Fraction(args.income),
            )
            d = jekyll_hyde_dataset(spec)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        with _output(args.out) as out:
            dump_dataset(d, out)
        return EXIT_OK
    with _output(args.out) as out:
        dump_dataset(jekyll_hyde_dataset(spec), out)
    return EXIT_OK


def cmd_simulate_theta(args) -> int:
    try:
        t = ThetaExample(args.theta, args.delta)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    with _output(args.out) as out:
        dump_dataset(theta_example_dataset(t), out)
    return EXIT_OK


def cmd_figure1(args) -> int:
    if args.points < 1:
        raise InputError("--points must be positive")
    lo = args.i_min if args.i_min is not None else preference_instability(0, args.delta)
    grid = np.linspace(lo, args.i_max, args.points) if args.points > 1 else np.array([lo])
    rows = ccei_instability_curve(args.delta, grid)
    with _output(args.out) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["i", "ccei_plus", "ccei_minus"])
        for i, plus, minus in rows:
            w.writerow([repr(i), repr(plus), repr(minus)])
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    try:
        res = monte_carlo_relation(args.trials, args.theta_low, args.theta_high, args.seed, args.sampler)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    doc = {
        "frequency": res.frequency,
        "positive": res.positive,
        "trials": res.trials,
        "theta_low": res.theta_low,
        "theta_high": res.theta_high,
        "seed": res.seed,
        "sampler": res.sampler,
        "reference": 0.75,
    }
    with _output(args.out) as out:
        if args.json:
            json.dump(doc, out, indent=2, sort_keys=True)
            out.write("\n")
        else:
            for k in ("frequency", "positive", "trials", "theta_low", "theta_high", "seed", "sampler"):
                out.write(f"{k:<11} {doc[k]}\n")
    return EXIT_OK


def cmd_power(args) -> int:
    designs = {name: POWER_DESIGNS[name] for name in args.designs}
    if args.agent == "random":
        reports = bronars_power(designs, "random", args.trials, args.seed)
    else:
        reports = bronars_power(designs, power_design_spec)
    with _output(args.out) as out:
        if args.json:
            doc = []
            for r in reports:
                item = {"design": r.design, "agent": r.agent}
                if r.agent == "random":
                    item.update(trials=r.trials, violations=r.violations, rate=r.rate, stderr=r.stderr)
                else:
                    item.update(ccei=float(r.ccei), ccei_exact=str(r.ccei), attained=r.ccei_attained)
                doc.append(item)
            json.dump({"seed": args.seed, "reports": doc}, out, indent=2, sort_keys=True)
            out.write("\n")
        else:
            for r in reports:
                if r.agent == "random":
                    out.write(
                        f"design {r.design}: violation rate {r.rate:.6f} "
                        f"(se {r.stderr:.6f}, {r.violations}/{r.trials})\n"
                    )
                else:
                    out.write(f"design {r.design}: CCEI {_fmt(r.ccei)}\n")
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="revpref", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"revpref {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("check", parents=[common], help="run every index on a CSV dataset")
    p.add_argument("csv")
    p.add_argument("--json", action="store_true")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--norm", choices=["l1"], default="l1")
    p.add_argument("--max-cycle-len", type=int, default=None)
    p.set_defaults(func=cmd_check)

    sim = sub.add_parser("simulate", help="generate synthetic datasets as CSV")
    simsub = sim.add_subparsers(dest="generator", required=True)
    jh = simsub.add_parser("jekyll-hyde", parents=[common], help="two-selves consumer")
    jh.add_argument("--preset", choices=["alice", "bob"], default=None)
    jh.add_argument("--periods", type=int, default=10)
    jh.add_argument("--hyde", help="shares, e.g. 0.1,0.9")
    jh.add_argument("--jekyll", help="shares, e.g. 0.9,0.1")
    jh.add_argument("--schedule", help="one letter per period, H or J, e.g. HJHJ")
    jh.add_argument("--prices", help="';'-separated price vectors, one per period")
    jh.add_argument("--income", default="1")
    jh.set_defaults(func=cmd_simulate_jekyll_hyde)
    th = simsub.add_parser("theta-example", parents=[common], help="four-good two-observation family")
    th.add_argument("--theta", type=str, required=True)
    th.add_argument("--delta", type=str, default="0")
    th.set_defaults(func=cmd_simulate_theta)

    f1 = sub.add_parser("figure1", parents=[common], help="instability vs CCEI curve as CSV")
    f1.add_argument("--delta", type=float, default=0.0)
    f1.add_argument("--i-min", type=float, default=None)
    f1.add_argument("--i-max", type=float, default=1.4)
    f1.add_argument("--points", type=int, default=41)
    f1.set_defaults(func=cmd_figure1)

    mc = sub.add_parser("montecarlo", parents=[common], help="random-price robustness experiment")
    mc.add_argument("--trials", type=int, default=200_000)
    mc.add_argument("--theta-low", type=float, default=0.01)
    mc.add_argument("--theta-high", type=float, default=0.49)
    mc.add_argument("--sampler", choices=["uniform", "fixed"], default="uniform")
    mc.add_argument("--json", action="store_true")
    mc.set_defaults(func=cmd_montecarlo)

    pw = sub.add_parser("power", parents=[common], help="random-choice power of the built-in budget designs")
    pw.add_argument("--agent", choices=["random", "jekyll-hyde"], default="random")
    pw.add_argument("--designs", nargs="+", choices=sorted(POWER_DESIGNS), default=sorted(POWER_DESIGNS))
    pw.add_argument("--trials", type=int, default=50_000)
    pw.add_argument("--json", action="store_true")
    pw.set_defaults(func=cmd_power)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DatasetError, InputError) as exc:
        print(f"revpref: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (LPNumericalError, InconsistentReport) as exc:
        print(f"revpref: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BrokenPipeError:
        # Downstream reader closed early (e.g. piped into head); silence the
        # interpreter's flush at exit as well.
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
