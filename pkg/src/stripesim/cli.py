"""Command-line interface: simulate, fronthaul, verify.

Exit codes: 0 success, 1 configuration error, 2 verification failure,
3 numeric failure.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

from .campaign import CAMPAIGN_ALGORITHMS, run_campaign, write_results
from .config import PILOT_SCHEMES, PRESETS, SimConfig, load_config, preset_config
from .errors import ConfigurationError, NumericError, UsageError
from .fronthaul import fronthaul_report, latency_blocks
from .verification import verify


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message)


def build_parser():
    parser = _Parser(prog="stripesim",
                     description="Uplink cell-free massive MIMO over a "
                                 "sequential (radio stripe) fronthaul")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte-Carlo SE campaign")
    sim.add_argument("--config", help="flat TOML configuration file")
    sim.add_argument("--preset", choices=sorted(PRESETS),
                     help="named scenario preset (config file overrides it)")
    sim.add_argument("--algorithms", default=",".join(CAMPAIGN_ALGORITHMS),
                     help="comma-separated subset of "
                          f"{','.join(CAMPAIGN_ALGORITHMS)}")
    sim.add_argument("--seed", type=int, help="override the RNG seed")
    sim.add_argument("--out", default="results", help="output directory")
    sim.add_argument("--threads", type=int, default=1)
    sim.add_argument("--pilots", choices=PILOT_SCHEMES,
                     help="override the pilot assignment scheme")
    sim.add_argument("--figures", default=True,
                     action=argparse.BooleanOptionalAction,
                     help="render CDF figures next to the CSV output")

    fh = sub.add_parser("fronthaul", help="closed-form fronthaul/latency accounting")
    fh.add_argument("--K", type=int, required=True)
    fh.add_argument("--tauc", type=int, required=True)
    fh.add_argument("--taup", type=int, required=True)
    fh.add_argument("--N", type=int, required=True)
    fh.add_argument("--L-range", required=True, metavar="A:B",
                    help="inclusive AP-count range, e.g. 10:100")
    fh.add_argument("--out", help="directory for CSV/JSON/figure output")

    ver = sub.add_parser("verify", help="run the randomized identity checks")
    ver.add_argument("--instances", type=int, default=200)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--perturb", action="store_true",
                     help="inject noise into the sequential recursion "
                          "(negative control; the theorem-1 check must fail)")
    ver.add_argument("--out", help="write the JSON report here")
    return parser


def _simulate(args):
    if args.config:
        config = load_config(args.config, base=args.preset)
    elif args.preset:
        config = preset_config(args.preset)
    else:
        raise ConfigurationError("simulate: provide --config and/or --preset")
    overrides = {}
    if args.seed is not None:
        overrides["rng_seed"] = args.seed
    if args.pilots is not None:
        overrides["pilots"] = args.pilots
    if overrides:
        config = SimConfig(**{**config.to_dict(), **overrides})

    algorithms = tuple(a.strip() for a in args.algorithms.split(",") if a.strip())
    unknown = set(algorithms) - set(CAMPAIGN_ALGORITHMS) - {"altoslp"}
    if unknown:
        raise ConfigurationError(f"algorithms: unknown {sorted(unknown)}")

    result = run_campaign(config, algorithms=algorithms, threads=args.threads)
    written = write_results(result, args.out, figures=args.figures)
    summary = result.summary()
    for alg in algorithms:
        s = summary[alg]
        print(f"{alg:8s} median {s['median']:7.3f}  mean {s['mean']:7.3f} "
              f"+/- {1.96 * s['stderr']:.3f}  p05 {s['p05']:7.3f}  "
              f"p95 {s['p95']:7.3f}  bit/s/Hz")
    for path in written:
        print(f"wrote {path}")
    return 0


def _fronthaul(args):
    try:
        lo, hi = (int(v) for v in args.L_range.split(":"))
    except ValueError as exc:
        raise ConfigurationError(f"--L-range: expected A:B, got {args.L_range!r}") from exc
    if lo < 1 or hi < lo:
        raise ConfigurationError("--L-range: need 1 <= A <= B")
    l_values = list(range(lo, hi + 1))
    reports = [fronthaul_report(args.K, args.tauc, args.taup, args.N, L)
               for L in l_values]

    header = (f"{'L':>5s} {'alg':>12s} {'data':>10s} {'stats':>8s} "
              f"{'per-link':>10s} {'network':>12s} {'saved':>7s}")
    print(header)
    for L, rep in zip(l_values, reports):
        for alg, row in rep["rows"].items():
            saved = f"{100 * rep['savings_vs_centralized']:6.2f}%" if alg == "oslp" else ""
            print(f"{L:5d} {alg:>12s} {row['data_reals_per_block']:10d} "
                  f"{row['stats_reals_per_block']:8d} {row['total_per_link']:10d} "
                  f"{row['total_network']:12d} {saved:>7s}")
    t_u = args.tauc - args.taup
    pipelined, naive = latency_blocks(t_u, l_values[-1])
    print(f"latency at L={l_values[-1]}: {pipelined} time blocks pipelined "
          f"({naive} unpipelined) for {t_u} data uses")

    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        csv_path = outdir / "fronthaul.csv"
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["L", "algorithm", "data_reals_per_block",
                             "stats_reals_per_block", "total_per_link",
                             "total_network", "savings_vs_centralized"])
            for L, rep in zip(l_values, reports):
                for alg, row in rep["rows"].items():
                    writer.writerow([
                        L, alg, row["data_reals_per_block"],
                        row["stats_reals_per_block"], row["total_per_link"],
                        row["total_network"],
                        repr(rep["savings_vs_centralized"]) if alg == "oslp" else "",
                    ])
        json_path = outdir / "fronthaul.json"
        with open(json_path, "w") as fh:
            json.dump({"reports": reports}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        from .report import save_fronthaul_figure
        fig_path = save_fronthaul_figure(
            l_values, [rep["savings_vs_centralized"] for rep in reports],
            outdir / "fronthaul_savings.png")
        for path in (csv_path, json_path, fig_path):
            print(f"wrote {path}")
    return 0


def _verify(args):
    if args.instances < 1:
        raise ConfigurationError("--instances: must be >= 1")
    report = verify(n_instances=args.instances, seed=args.seed,
                    perturb=args.perturb)
    for line in report.lines():
        print(line)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report.as_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {args.out}")
    return 0 if report.passed else 2


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "simulate":
            return _simulate(args)
        if args.command == "fronthaul":
            return _fronthaul(args)
        return _verify(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
