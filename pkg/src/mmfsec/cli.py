"""Command-line front end.

Exit codes: 0 success, 2 I/O failure, 64 usage error, 65 invalid configuration
or data.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .channel import channel_digest, gen_synthetic_channel, load_channel, save_channel
from .errors import MmfSecError
from .montecarlo import SCHEMES, SweepConfig, run_sweep
from .rng import SeededRng

EXIT_OK = 0
EXIT_IO = 2
EXIT_USAGE = 64
EXIT_CONFIG = 65

CSV_HEADER = ["snr_db", "scheme", "mean_rs", "min_rs", "std_rs", "trials", "seed"]
DUMP_HEADER = ["snr_db", "scheme", "trial", "rs"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_snr_range(text: str) -> list[float]:
    """``start:stop:step`` in dB with both endpoints inclusive, or a single value."""
    parts = text.split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad SNR range {text!r}; expected start:stop:step") from None
    if len(vals) == 1:
        return vals
    if len(vals) != 3:
        raise UsageError(f"bad SNR range {text!r}; expected start:stop:step")
    start, stop, step = vals
    if step <= 0 or stop < start:
        raise UsageError(f"bad SNR range {text!r}; need step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def parse_schemes(text: str) -> tuple[str, ...]:
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    unknown = [s for s in names if s not in SCHEMES]
    if unknown or not names:
        raise UsageError(f"unknown scheme(s) {unknown}; choose from {', '.join(SCHEMES)}")
    return names


def fmt(x: float) -> str:
    """Shortest round-trip decimal for a double."""
    return repr(float(x))


def sweep_csv(rows, seed: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([fmt(r.snr_db), r.scheme, fmt(r.mean_rs), fmt(r.min_rs), fmt(r.std_rs), r.trials, seed])
    return buf.getvalue()


def dump_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DUMP_HEADER)
    for r in rows:
        for t, v in enumerate(r.samples):
            w.writerow([fmt(r.snr_db), r.scheme, t, fmt(v)])
    return buf.getvalue()


def make_manifest(command: str, config: dict, seed: int, digest: str | None, extra: dict | None = None) -> dict:
    m = {
        "tool": "mmfsec",
        "version": __version__,
        "command": command,
        "config": config,
        "master_seed": seed,
        "channel_digest_fnv1a64": digest,
        "rate_units": "bits per channel use",
        "snr_convention": "snr_db = 10*log10(power / sigma2), power fixed, sigma2 per point",
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    if extra:
        m.update(extra)
    return m


def _emit_manifest(manifest: dict, path: str | None):
    text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stderr.write(text)


def _write_text(text: str, path: str | None):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)


def cmd_gen_channel(args) -> int:
    ch = gen_synthetic_channel(args.modes, args.spread_db, SeededRng(args.seed), label=args.label)
    save_channel(ch, args.output)
    cfg = {"modes": args.modes, "spread_db": args.spread_db, "seed": args.seed, "label": args.label}
    _emit_manifest(make_manifest("gen-channel", cfg, args.seed, channel_digest(ch), {"output": args.output}), args.manifest)
    return EXIT_OK


def cmd_sweep(args) -> int:
    snr = parse_snr_range(args.snr)
    schemes = parse_schemes(args.schemes)
    h = load_channel(args.channel)
    config = SweepConfig(
        snr_db_points=snr,
        trials=args.trials,
        schemes=schemes,
        power=args.power,
        mdl_db=args.mdl_db,
        master_seed=args.seed,
        tau_grid_step=args.tau_step,
        eve_draws=args.eve_draws,
        normalize_trace=not args.no_trace_norm,
        share_eve_across_snr=args.share_eve,
        refine_tau=args.refine_tau,
    )
    rows = run_sweep(h, config, workers=args.workers)
    _write_text(sweep_csv(rows, args.seed), args.output)
    if args.dump_trials:
        _write_text(dump_csv(rows), args.dump_trials)
    extra = {"channel_path": args.channel, "csv_header": ",".join(CSV_HEADER)}
    _emit_manifest(make_manifest("sweep", config.to_dict(), args.seed, channel_digest(h), extra), args.manifest)
    return EXIT_OK


def cmd_inspect(args) -> int:
    h = load_channel(args.channel)
    d = h.singular_values
    with np.errstate(divide="ignore"):
        span = 10 * np.log10(d[0] ** 2 / d[-1] ** 2) if d[-1] > 0 else float("inf")
    lines = [
        f"n: {h.n}",
        f"label: {h.label}" if h.label is not None else None,
        "singular_values: " + " ".join(f"{x:.6g}" for x in d),
        f"gain_range_db: {span:.2f}",
        f"trace: {h.power_trace:.6g}",
        f"digest: {channel_digest(h)}",
    ]
    sys.stdout.write("\n".join(x for x in lines if x is not None) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mmfsec", description="Secrecy rates for MMF wiretap channels with artificial noise.")
    p.add_argument("--version", action="version", version=f"mmfsec {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-channel", help="write a synthetic channel file")
    g.add_argument("--modes", type=int, required=True)
    g.add_argument("--spread-db", type=float, default=20.0, help="singular-value power range in dB")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--label", default=None)
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--manifest", default=None)
    g.set_defaults(func=cmd_gen_channel)

    s = sub.add_parser("sweep", help="Monte Carlo SNR sweep, CSV output")
    s.add_argument("--channel", required=True)
    s.add_argument("--snr", default="-5:15:5", help="start:stop:step in dB, inclusive")
    s.add_argument("--trials", type=int, default=20000)
    s.add_argument("--schemes", default="greedy-an,waterfilling", help=f"comma list from {','.join(SCHEMES)}")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--mdl-db", type=float, default=20.0)
    s.add_argument("--power", type=float, default=1.0)
    s.add_argument("--tau-step", type=float, default=0.05)
    s.add_argument("--eve-draws", type=int, default=500, help="frozen Eve draws inside the greedy search")
    s.add_argument("--refine-tau", action="store_true", help="polish tau around the best grid value")
    s.add_argument("--share-eve", action="store_true", help="reuse Eve draws across SNR points")
    s.add_argument("--no-trace-norm", action="store_true", help="do not rescale Eve to Bob's total power")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--dump-trials", default=None)
    s.add_argument("--manifest", default=None)
    s.add_argument("-o", "--output", default=None)
    s.set_defaults(func=cmd_sweep)

    i = sub.add_parser("inspect", help="report singular values and digest of a channel file")
    i.add_argument("--channel", required=True)
    i.set_defaults(func=cmd_inspect)
    return p


def join_snr_arg(argv: list[str]) -> list[str]:
    # argparse reads "--snr -5:15:5" as two flags
    out = []
    it = iter(argv)
    for a in it:
        if a == "--snr":
            nxt = next(it, None)
            out.append(a if nxt is None else f"--snr={nxt}")
        else:
            out.append(a)
    return out


def main(argv: list[str] | None = None) -> int:
    argv = join_snr_arg(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mmfsec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MmfSecError as exc:
        print(f"mmfsec: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"mmfsec: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
