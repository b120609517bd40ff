"""Command line front end.

Subcommands map onto the pipeline stages: ``gen`` writes packet traces,
``measure`` turns a trace into a measurement series, ``detect`` runs one
detector over a measurement file, ``experiment`` runs the seeded end-to-end
pipeline across systems, and ``stats`` summarizes a measurement file.

Exit codes: 0 success, 1 configuration error, 2 insufficient data, 3 I/O
failure.
"""

import argparse
import dataclasses
import json
import sys

from .errors import ConfigError, InsufficientDataError
from .harness import (
    COALESCENCE_PRESETS,
    PAD_PRESET,
    PDMM_PRESET,
    TRAFFIC_PRESETS,
    load_experiment_config,
    emit_results,
    measurement_stats,
    preset_experiment,
    run_experiment,
)
from .meassim import (
    HicConfig,
    PicConfig,
    TicConfig,
    TransferConfig,
    load_measurements,
    measure,
    save_measurements,
)
from .pad import PadConfig, detect_psd, rasterize
from .pdmm import PdmmConfig, detect_stream
from .trafficgen import (
    AttackConfig,
    PoissonConfig,
    gen_periodic,
    gen_poisson,
    load_trace,
    merge,
    save_trace,
)

US = 1000
SECOND = 1_000_000_000


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems as config errors."""

    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="icmeas", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a packet trace", parents=[])
    gen.add_argument("--preset", choices=sorted(TRAFFIC_PRESETS))
    gen.add_argument("--mean-gap-us", type=float, help="background exponential mean")
    gen.add_argument("--size-bytes", type=int, default=500)
    gen.add_argument("--attack-period-us", type=float)
    gen.add_argument("--attack-size-bytes", type=int, default=1500)
    gen.add_argument("--attack-jitter-us", type=float, default=0.0)
    gen.add_argument("--no-attack", action="store_true")
    gen.add_argument("--duration-s", type=float, default=20.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    meas = sub.add_parser("measure", help="simulate measurement of a trace")
    meas.add_argument("--trace", required=True)
    meas.add_argument("--system", choices=sorted(COALESCENCE_PRESETS))
    meas.add_argument("--pack-us", type=float, help="dual-timer per-packet timer")
    meas.add_argument("--abs-us", type=float, help="dual-timer absolute timer")
    meas.add_argument("--tic-us", type=float, help="fixed-timer coalescing")
    meas.add_argument("--pic-count", type=int, help="count-based coalescing")
    meas.add_argument("--rate-gbps", type=float, default=1.0)
    meas.add_argument("--out", required=True)

    det = sub.add_parser("detect", help="run one detector on measurements")
    det.add_argument("--detector", choices=["pdmm", "pad"], required=True)
    det.add_argument("--measurements", required=True)
    det.add_argument("--config", help="JSON file with a pdmm or pad section")
    det.add_argument("--threshold", type=float, help="histogram detector threshold")
    det.add_argument("--peak-factor", type=float, help="spectral detector threshold")
    det.add_argument("--out", help="write the report here instead of stdout")

    exp = sub.add_parser("experiment", help="run the seeded end-to-end pipeline")
    exp.add_argument("--preset", choices=sorted(TRAFFIC_PRESETS))
    exp.add_argument("--config", help="JSON experiment config file")
    exp.add_argument("--systems", default="hicv1,hicv2")
    exp.add_argument("--detectors", default="pdmm,pad")
    exp.add_argument("--no-attack", action="store_true")
    exp.add_argument("--window-s", type=float, default=20.0)
    exp.add_argument("--trials", type=int, default=1)
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--out", required=True, help="base path for .json and .csv")

    st = sub.add_parser("stats", help="summarize a measurement file")
    st.add_argument("--measurements", required=True)
    return parser


def _cmd_gen(args) -> int:
    duration_ns = int(round(args.duration_s * SECOND))
    if args.preset is not None:
        t = TRAFFIC_PRESETS[args.preset]
        mean_gap_ns = t["mean_gap_ns"]
        size_bytes = t["background_size_bytes"]
        attack_period_ns = t["attack_period_ns"]
        attack_size = t["attack_size_bytes"]
    elif args.mean_gap_us is not None:
        mean_gap_ns = args.mean_gap_us * US
        size_bytes = args.size_bytes
        attack_period_ns = (
            int(round(args.attack_period_us * US)) if args.attack_period_us else None
        )
        attack_size = args.attack_size_bytes
    else:
        raise ConfigError("gen needs --preset or --mean-gap-us")
    trace = gen_poisson(
        PoissonConfig(
            mean_gap_ns=mean_gap_ns,
            duration_ns=duration_ns,
            seed=args.seed,
            size_bytes=size_bytes,
        )
    )
    if attack_period_ns is not None and not args.no_attack:
        trace = merge(
            trace,
            gen_periodic(
                AttackConfig(
                    period_ns=int(attack_period_ns),
                    duration_ns=duration_ns,
                    size_bytes=attack_size,
                    jitter_stddev_ns=args.attack_jitter_us * US,
                )
            ),
        )
    save_trace(trace, args.out)
    print(f"wrote {len(trace)} packets to {args.out}")
    return 0


def _coalescence_from_args(args):
    if args.system is not None:
        return COALESCENCE_PRESETS[args.system]
    if args.pack_us is not None and args.abs_us is not None:
        return HicConfig(
            packet_timer_ns=int(round(args.pack_us * US)),
            absolute_timer_ns=int(round(args.abs_us * US)),
        )
    if args.tic_us is not None:
        return TicConfig(timer_ns=int(round(args.tic_us * US)))
    if args.pic_count is not None:
        return PicConfig(count=args.pic_count)
    raise ConfigError("measure needs --system, --pack-us/--abs-us, --tic-us, or --pic-count")


def _cmd_measure(args) -> int:
    cfg = _coalescence_from_args(args)
    trace = load_trace(args.trace)
    series = measure(trace, TransferConfig(bit_rate_bps=args.rate_gbps * 1e9), cfg)
    echo = dataclasses.asdict(cfg)
    echo["type"] = type(cfg).__name__
    save_measurements(series, args.out, config=echo)
    print(f"wrote {len(series)} measurements to {args.out}")
    return 0


def _detector_config(args):
    overrides = {}
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as f:
            overrides = json.load(f).get(args.detector, {})
    if args.detector == "pdmm":
        cfg = PdmmConfig(**{**dataclasses.asdict(PDMM_PRESET), **overrides})
        if args.threshold is not None:
            cfg = dataclasses.replace(cfg, threshold=args.threshold)
        return cfg
    cfg = PadConfig(**{**dataclasses.asdict(PAD_PRESET), **overrides})
    if args.peak_factor is not None:
        cfg = dataclasses.replace(cfg, peak_factor=args.peak_factor)
    return cfg


def _cmd_detect(args) -> int:
    series = load_measurements(args.measurements)
    cfg = _detector_config(args)
    if args.detector == "pdmm":
        report = detect_stream(series, cfg)
    else:
        report = detect_psd(rasterize(series, cfg.sample_interval_ns), cfg)
    text = json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_experiment(args) -> int:
    detectors = tuple(d for d in args.detectors.split(",") if d)
    window_ns = int(round(args.window_s * SECOND))
    results = {}
    if args.config is not None:
        cfg = load_experiment_config(args.config)
        cfg = dataclasses.replace(cfg, trials=args.trials, seed_base=args.seed)
        results["config"] = run_experiment(cfg)
    elif args.preset is not None:
        for system in [s for s in args.systems.split(",") if s]:
            cfg = preset_experiment(
                traffic=args.preset,
                system=system,
                trials=args.trials,
                seed_base=args.seed,
                attack=not args.no_attack,
                detectors=detectors,
                detection_window_ns=window_ns,
            )
            results[system] = run_experiment(cfg)
    else:
        raise ConfigError("experiment needs --preset or --config")
    emit_results(results, json_path=args.out + ".json", csv_path=args.out + ".csv")
    for name in sorted(results):
        for det, agg in results[name].aggregate.items():
            med = agg["median_ttd_ns"]
            shown = "-" if med is None else f"{med / SECOND:.3f}s"
            print(f"{name} {det}: median_ttd={shown} rate={agg['detection_rate']:.2f}")
    print(f"wrote {args.out}.json and {args.out}.csv")
    return 0


def _cmd_stats(args) -> int:
    series = load_measurements(args.measurements)
    stats = measurement_stats(series)
    sys.stdout.write(
        json.dumps(dataclasses.asdict(stats), sort_keys=True, indent=2) + "\n"
    )
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "measure": _cmd_measure,
    "detect": _cmd_detect,
    "experiment": _cmd_experiment,
    "stats": _cmd_stats,
}


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except (ConfigError, json.JSONDecodeError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except InsufficientDataError as exc:
        print(f"insufficient data: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
