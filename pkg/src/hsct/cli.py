"""Command-line driver: synth, transform, metrics, slice.

Exit status 0 on success, 2 for usage or validation errors, 3 for I/O
failures.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .core import (InvalidArgument, InvalidData, read_signal_csv, read_volume, write_signal_csv)
from .estimators import Thresholds
from .metrics import MetricsReport, evaluate
from .squeeze import METHODS, Transform, TransformParams, ideal_volume
from .synth import BUILTIN, builtin, gen, modes_from_config

EXIT_USAGE = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


def _load_modes(name=None, config=None):
    if config is not None:
        with open(config) as fh:
            try:
                items = json.load(fh)
            except json.JSONDecodeError as exc:
                raise UsageError(f"{config}: invalid JSON ({exc})") from exc
        return modes_from_config(items)
    if name is None:
        raise UsageError("give a signal name or --config")
    if name not in BUILTIN:
        raise UsageError(f"unknown signal {name!r}; choose from {', '.join(BUILTIN)}")
    return builtin(name)


def cmd_synth(args):
    modes = _load_modes(args.name, args.config)
    signal, _ = gen(modes, args.fs, args.duration, args.t0)
    write_signal_csv(args.out, signal)
    return 0


def _sidecar_path(path):
    return path + ".json"


def cmd_transform(args):
    methods = [m.strip().lower() for m in args.method.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            raise UsageError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    if len(methods) > 1 and "{method}" not in args.out:
        raise UsageError("with several methods the output path needs a {method} placeholder")
    signal = read_signal_csv(args.input)
    th = Thresholds(args.gamma1, args.gamma2, args.gamma3, args.thres)
    params = TransformParams(args.N, args.sigma, args.alpha, args.Q, args.cmax, th)
    tr = Transform.configure(signal, params)
    paths = {m: args.out.replace("{method}", m) for m in methods}
    start = time.perf_counter()
    counts = tr.write(paths, args.threads)
    wall = time.perf_counter() - start
    for m, p in paths.items():
        side = {"method": m, "kind": m.upper(), "input": os.path.abspath(args.input),
                "params": tr.meta(), "counts": counts[m].as_dict(), "wall_time_s": wall,
                "n": signal.n, "t0": signal.t0, "version": __version__}
        with open(_sidecar_path(p), "w") as fh:
            json.dump(side, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def _boundary_mask(path, n):
    side = _sidecar_path(path)
    try:
        with open(side) as fh:
            Q = int(json.load(fh)["params"]["Q"])
    except FileNotFoundError as exc:
        raise UsageError(f"--exclude-boundary needs the sidecar {side}") from exc
    except (KeyError, ValueError, TypeError) as exc:
        raise InvalidData(f"{side}: no window half-length recorded") from exc
    i = np.arange(n)
    return (i >= Q) & (i < n - Q)


def cmd_metrics(args):
    vols = [read_volume(p) for p in args.volumes]
    t0 = vols[0].time
    for p, v in zip(args.volumes, vols):
        if v.time != t0:
            raise UsageError(f"{p}: time grid differs from {args.volumes[0]}")
    if args.ideal is not None:
        given = read_volume(args.ideal)
        modes = None
    else:
        modes = _load_modes(args.signal, args.config)
    results = {}
    for p, v in zip(args.volumes, vols):
        if modes is None:
            if (given.time, given.freq, given.chirp) != (v.time, v.freq, v.chirp):
                raise UsageError(f"{p}: grids differ from the ideal volume {args.ideal}")
            ideal = given
        else:
            ideal = ideal_volume(modes, v.time, v.freq, v.chirp)
        mask = _boundary_mask(p, v.time.n) if args.exclude_boundary else None
        name = v.kind.lower()
        if name in results:
            name = os.path.basename(p)
        results[name] = evaluate(v, ideal, args.alpha_r, args.cap, args.chirp_weight, mask)
    params = {"alpha_renyi": args.alpha_r, "emd_cap": args.cap, "chirp_weight": args.chirp_weight,
              "exclude_boundary": args.exclude_boundary,
              "volumes": [os.path.abspath(p) for p in args.volumes],
              "grids": {os.path.basename(p): {"n": v.time.n, "dt": v.time.dt, "t0": v.time.t0,
                                              "df": v.freq.df, "F": v.freq.count,
                                              "dc": v.chirp.dc, "C": v.chirp.count}
                        for p, v in zip(args.volumes, vols)}}
    report = MetricsReport(results, params)
    curves = args.curves or os.path.splitext(args.out)[0] + ".csv"
    report.write(args.out, curves)
    return 0


def cmd_slice(args):
    v = read_volume(args.volume)
    lam, mag = v.chirp_slice(args.t, args.xi)
    lines = ["lambda,magnitude"] + [f"{a:.17g},{b:.17g}" for a, b in zip(lam, mag)]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="hsct", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("synth", help="write a benchmark or configured signal as CSV")
    s.add_argument("name", nargs="?", help=f"built-in signal ({', '.join(BUILTIN)})")
    s.add_argument("--config", help="JSON list of mode descriptions")
    s.add_argument("--fs", type=float, default=100.0)
    s.add_argument("--duration", type=float, default=6.0)
    s.add_argument("--t0", type=float, default=0.0)
    s.add_argument("-o", "--out", required=True)
    s.set_defaults(func=cmd_synth)

    t = sub.add_parser("transform", help="CT / SCT / HSCT volume of a signal CSV")
    t.add_argument("input")
    t.add_argument("--method", default="hsct", help="ct, sct, hsct or a comma list")
    t.add_argument("--N", type=int, default=512)
    t.add_argument("--alpha", type=float, default=1.0)
    t.add_argument("--sigma", type=float, default=1.0)
    t.add_argument("--Q", type=int, default=None, help="window half-length in samples")
    t.add_argument("--cmax", type=float, default=None, help="chirp-axis extent in Hz/s")
    t.add_argument("--thres", type=float, default=1e-4, help="relative reassignment floor")
    t.add_argument("--gamma1", type=float, default=1e-4)
    t.add_argument("--gamma2", type=float, default=1e-2)
    t.add_argument("--gamma3", type=float, default=1e-2)
    t.add_argument("--threads", type=int, default=None, help="defaults to $HSCT_THREADS or all cores")
    t.add_argument("-o", "--out", required=True)
    t.set_defaults(func=cmd_transform)

    m = sub.add_parser("metrics", help="Renyi entropy and EMDs against the ideal representation")
    m.add_argument("volumes", nargs="+")
    g = m.add_mutually_exclusive_group(required=True)
    g.add_argument("--signal", help="built-in signal name for the ideal representation")
    g.add_argument("--config", help="mode config for the ideal representation")
    g.add_argument("--ideal", help="volume file to use as the ideal")
    m.add_argument("--alpha-r", type=float, default=3.0)
    m.add_argument("--cap", type=int, default=512)
    m.add_argument("--chirp-weight", type=float, default=1.0)
    m.add_argument("--exclude-boundary", action="store_true")
    m.add_argument("--curves", help="per-time EMD CSV (default: next to the report)")
    m.add_argument("-o", "--out", required=True)
    m.set_defaults(func=cmd_metrics)

    c = sub.add_parser("slice", help="chirp-rate profile at one (t, xi)")
    c.add_argument("volume")
    c.add_argument("--t", type=float, required=True)
    c.add_argument("--xi", type=float, required=True)
    c.add_argument("-o", "--out")
    c.set_defaults(func=cmd_slice)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, InvalidArgument) as exc:
        print(f"hsct {args.cmd}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, InvalidData) as exc:
        print(f"hsct {args.cmd}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
