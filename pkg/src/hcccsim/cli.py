"""Command-line front end: single runs, sweeps, config validation and defaults.

Output is CSV only; file names encode scheme, node count and seed so sweep
results can be collated by external plotting tools.
"""

import argparse
import os
import sys
from dataclasses import replace

from . import metrics
from .config import ConfigError, ScenarioConfig, dump_config, parse_config, validate
from .simulation import Simulation
from .topology import TopologyError

SWEEP_AXES = ("seeds", "node_count", "offered_load", "scheme")


def _out_dir(args):
    out = args.out or os.environ.get("HCCCSIM_OUT") or "results"
    os.makedirs(out, exist_ok=True)
    return out


def _load_config(args):
    if args.config:
        cfg = parse_config(args.config)
    else:
        cfg = validate(ScenarioConfig())
    if getattr(args, "seed", None) is not None:
        cfg = validate(replace(cfg, seed=args.seed))
    for flag in getattr(args, "trace", None) or []:
        cfg = replace(cfg, **{"trace_" + flag: True})
    return cfg


def _run_tag(cfg):
    return "%s_n%d_seed%d" % (cfg.scheme, cfg.node_count, cfg.seed)


def run_one(cfg, out_dir, dump_topology=False):
    """Execute one scenario and write its CSV reports; returns the report."""
    sim = Simulation(cfg)
    result = sim.run()
    report = metrics.build_report(result)
    tag = _run_tag(cfg)
    metrics.write_summary_csv(os.path.join(out_dir, tag + "_summary.csv"), [report])
    metrics.write_series_csv(os.path.join(out_dir, tag + "_series.csv"), report)
    if cfg.trace_packets:
        metrics.write_packets_csv(os.path.join(out_dir, tag + "_packets.csv"),
                                  result.records)
    if cfg.trace_mac:
        _write_rows(os.path.join(out_dir, tag + "_mac_trace.csv"),
                    "t_us,node,kind,dst,event", result.mac_trace)
    if cfg.trace_hccc:
        _write_rows(os.path.join(out_dir, tag + "_hccc_trace.csv"),
                    "t_us,node,b_r,c_d,rate,window,event", result.hccc_trace)
    if dump_topology:
        result.topology.write_csv(os.path.join(out_dir, tag + "_topology.csv"))
    return report


def _write_rows(path, header, rows):
    with open(path, "w") as f:
        f.write(header + "\n")
        for row in rows:
            f.write(",".join("%.10g" % v if isinstance(v, float) else str(v)
                             for v in row) + "\n")


def run_sweep(cfg, axis, values, seeds, out_dir):
    """One run per (value, seed) pair; returns {value: [reports]}.

    Every axis value is run against the identical seed list so comparisons
    are paired.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError("unknown sweep axis %r" % axis)
    if len(set(seeds)) != len(seeds):
        raise ConfigError("duplicate seeds in sweep")
    results = {}
    for value in values:
        reports = []
        for seed in seeds:
            if axis == "seeds":
                run_cfg = replace(cfg, seed=seed)
            else:
                run_cfg = replace(cfg, **{axis: value, "seed": seed})
            validate(run_cfg)
            reports.append(run_one(run_cfg, out_dir))
        results[value] = reports
    return results


def _parse_values(axis, raw):
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if not parts:
        raise ConfigError("empty sweep value list")
    if axis == "scheme":
        return parts
    if axis == "node_count":
        return [int(p) for p in parts]
    return [float(p) for p in parts]


def cmd_run(args):
    cfg = _load_config(args)
    out_dir = _out_dir(args)
    report = run_one(cfg, out_dir, dump_topology=args.dump_topology)
    print("run %s: loss=%.4f throughput=%.3fpps efficiency=%.4f"
          % (_run_tag(cfg), report.packet_loss_ratio, report.throughput_mean,
             report.energy_efficiency))
    return 0


def cmd_sweep(args):
    cfg = _load_config(args)
    out_dir = _out_dir(args)
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [cfg.seed]
    if args.axis == "seeds":
        values = [None]
        seeds = [int(v) for v in args.values.split(",")]
    else:
        values = _parse_values(args.axis, args.values)
    results = run_sweep(cfg, args.axis, values, seeds, out_dir)
    path = os.path.join(out_dir, "sweep_%s.csv" % args.axis)
    with open(path, "w") as f:
        f.write("axis,value,metric,mean,stddev,min,max\n")
        for value, reports in results.items():
            agg = metrics.aggregate(reports)
            for name, stats in agg.items():
                if stats is None:
                    continue
                f.write("%s,%s,%s,%.10g,%.10g,%.10g,%.10g\n"
                        % (args.axis, value, name, stats["mean"],
                           stats["stddev"], stats["min"], stats["max"]))
    for value, reports in results.items():
        agg = metrics.aggregate(reports)
        loss = agg["packet_loss_ratio"]
        print("sweep %s=%s: loss mean=%.4f stddev=%.4f (%d runs)"
              % (args.axis, value, loss["mean"], loss["stddev"], len(reports)))
    print("wrote %s" % path)
    return 0


def cmd_dump_defaults(args):
    text = dump_config(validate(ScenarioConfig()))
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_validate(args):
    cfg = parse_config(args.config)
    print("ok: %s (scheme=%s nodes=%d seed=%d)"
          % (args.config, cfg.scheme, cfg.node_count, cfg.seed))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hcccsim",
        description="Hop-by-hop cross-layer congestion control simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one scenario")
    p_run.add_argument("--config", help="scenario config file")
    p_run.add_argument("--seed", type=int, help="override the config seed")
    p_run.add_argument("--out", help="output directory (default $HCCCSIM_OUT or ./results)")
    p_run.add_argument("--trace", action="append", choices=("mac", "hccc", "packets"),
                       help="enable a trace output (repeatable)")
    p_run.add_argument("--dump-topology", action="store_true",
                       help="write node positions, edges and routes as CSV")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    p_sweep.add_argument("--config", help="scenario config file")
    p_sweep.add_argument("--seed", type=int, help="override the config seed")
    p_sweep.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated axis values")
    p_sweep.add_argument("--seeds",
                         help="comma-separated seeds applied to every axis value")
    p_sweep.add_argument("--out", help="output directory")
    p_sweep.add_argument("--trace", action="append",
                         choices=("mac", "hccc", "packets"))
    p_sweep.set_defaults(func=cmd_sweep)

    p_dump = sub.add_parser("dump-defaults", help="print the default config")
    p_dump.add_argument("--out", help="write to a file instead of stdout")
    p_dump.set_defaults(func=cmd_dump_defaults)

    p_val = sub.add_parser("validate", help="check a config file")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, TopologyError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
