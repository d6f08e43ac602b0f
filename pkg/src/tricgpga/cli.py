"""Command-line interface: ``generate``, ``mine``, ``stats`` and ``bench``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 internal invariant breach (including a determinism failure in ``bench``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .data import (
    Background,
    SyntheticSpec,
    generate_synthetic,
    make_planted_block,
    read_tensor,
    write_tensor,
)
from .exceptions import ConfigError, DeterminismError, InvariantError, TensorFormatError
from .ga import derive_seed
from .mining import (
    SUMMARY_COLUMNS,
    mine,
    parse_summary_csv,
    records_from_json,
    summarize,
    triclusters_json,
    write_results,
)

log = logging.getLogger("tricgpga")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _shape(text: str) -> tuple[int, int, int]:
    parts = text.lower().split("x")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected GxCxT, got {text!r}")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected GxCxT, got {text!r}") from None


def _add_config_flags(p: argparse.ArgumentParser, skip=()) -> None:
    p.add_argument("--config", type=Path, help="flat key = value config file")
    g = p.add_argument_group("configuration overrides")
    for key in cfgmod.KEYS.values():
        if key.name in skip:
            continue
        g.add_argument("--" + key.name.replace("_", "-"), dest=f"cfg_{key.name}",
                       metavar="V", help=f"{key.help} (default {key.default})")


def _collect_config(args, skip=()) -> dict:
    values = cfgmod.load_config(args.config) if args.config else {}
    for key in cfgmod.KEYS:
        if key in skip:
            continue
        raw = getattr(args, f"cfg_{key}", None)
        if raw is not None:
            values[key] = cfgmod.parse_value(key, raw, f"--{key.replace('_', '-')}: ")
    return cfgmod.resolve(values)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tricgpga", description="Island-model GA triclustering")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a synthetic tensor with planted blocks")
    p.add_argument("--genes", type=int, required=True)
    p.add_argument("--conditions", type=int, required=True)
    p.add_argument("--times", type=int, required=True)
    p.add_argument("--plant", type=_shape, action="append", default=[],
                   metavar="GxCxT", help="planted block shape; repeatable")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--background", default="uniform:0:10",
                   help="uniform:LOW:HIGH or normal:MEAN:STD")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("gct3", "long_csv"), default="gct3")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("mine", help="mine triclusters from a tensor file")
    p.add_argument("input", type=Path)
    p.add_argument("--format", choices=("gct3", "long_csv"))
    p.add_argument("--out", type=Path, required=True)
    _add_config_flags(p)

    p = sub.add_parser("stats", help="print the summary of a results directory")
    p.add_argument("results", type=Path)

    p = sub.add_parser("bench", help="time one workload at several thread counts")
    p.add_argument("input", type=Path)
    p.add_argument("--format", choices=("gct3", "long_csv"))
    p.add_argument("--thread-counts", default="1,2,4",
                   help="comma separated worker counts")
    p.add_argument("--out", type=Path, help="timing CSV path (default stdout)")
    _add_config_flags(p, skip=("threads",))
    return parser


def cmd_generate(args) -> int:
    dims = (args.genes, args.conditions, args.times)
    if min(dims) < 1:
        raise ConfigError("dimensions must be >= 1")
    if args.noise < 0:
        raise ConfigError("--noise must be >= 0")
    rng = np.random.default_rng(derive_seed(args.seed, 1))
    blocks, used = [], []
    for shape in args.plant:
        block = make_planted_block(dims, shape, rng, avoid_genes=used)
        used.extend(block.genes)
        blocks.append(block)
    spec = SyntheticSpec(dims, Background.parse(args.background), tuple(blocks),
                         args.noise, args.seed)
    tensor, _ = generate_synthetic(spec)
    args.out.mkdir(parents=True, exist_ok=True)
    name = "tensor.gct3" if args.format == "gct3" else "tensor.csv"
    write_tensor(tensor, args.out / name, args.format)
    truth = {"dims": list(dims), "noise_stddev": args.noise, "seed": args.seed,
             "blocks": [{"genes": list(b.genes), "conditions": list(b.conditions),
                         "times": list(b.times), "base": b.base,
                         "gene_effects": list(b.gene_effects),
                         "condition_effects": list(b.condition_effects),
                         "time_effects": list(b.time_effects)} for b in blocks]}
    (args.out / "truth.json").write_text(json.dumps(truth, indent=2) + "\n")
    print(f"wrote {args.out / name} and {args.out / 'truth.json'}")
    return EXIT_OK


def cmd_mine(args) -> int:
    values = _collect_config(args)
    cfg = cfgmod.to_mining_config(values)
    tensor = read_tensor(args.input, args.format)
    result = mine(tensor, cfg)
    write_results(result, tensor, args.out, cfgmod.format_config(values))
    print(f"wrote {len(result.triclusters)} triclusters to {args.out}")
    return EXIT_OK


def cmd_stats(args) -> int:
    try:
        text = (args.results / "summary.csv").read_text()
        stats = parse_summary_csv(text)
        records = records_from_json((args.results / "triclusters.json").read_text())
    except (OSError, ValueError, KeyError) as exc:
        raise TensorFormatError(f"cannot read results in {args.results}: {exc}") from exc
    if summarize(records) != stats:
        raise TensorFormatError("summary.csv disagrees with triclusters.json")
    print(",".join(SUMMARY_COLUMNS))
    print(",".join(repr(x) for x in stats.as_row()))
    return EXIT_OK


def run_bench(tensor, values: dict, thread_counts) -> list[tuple[int, float, str]]:
    """Mine the same workload at each worker count.

    Returns ``(threads, seconds, triclusters_json)`` per count; raises
    :class:`DeterminismError` if any output differs from the first.
    """
    rows = []
    for n in thread_counts:
        cfg = cfgmod.to_mining_config({**values, "threads": n})
        start = time.perf_counter()
        result = mine(tensor, cfg)
        elapsed = time.perf_counter() - start
        rows.append((n, elapsed, triclusters_json(result, tensor)))
        if rows[-1][2] != rows[0][2]:
            raise DeterminismError(
                f"results with {n} threads differ from {rows[0][0]} threads")
    return rows


def cmd_bench(args) -> int:
    try:
        counts = [int(x) for x in args.thread_counts.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad --thread-counts {args.thread_counts!r}") from None
    if not counts or min(counts) < 1:
        raise ConfigError("--thread-counts needs positive integers")
    values = _collect_config(args, skip=("threads",))
    tensor = read_tensor(args.input, args.format)
    rows = run_bench(tensor, values, counts)
    base = rows[0][1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["threads", "seconds", "speedup"])
    for n, sec, _ in rows:
        w.writerow([n, f"{sec:.6f}", f"{base / sec:.6f}"])
    if args.out:
        args.out.write_text(buf.getvalue())
    sys.stdout.write(buf.getvalue())
    for (n0, s0, _), (n1, s1, _) in zip(rows, rows[1:]):
        if s1 > s0:
            log.warning("wall-clock grew from %d to %d threads (%.3fs -> %.3fs)",
                        n0, n1, s0, s1)
    print(f"speedup {base / rows[-1][1]:.3f} ({rows[0][0]} -> {rows[-1][0]} threads); "
          "outputs identical")
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "mine": cmd_mine, "stats": cmd_stats,
            "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.INFO if args.verbose >= 1 else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TensorFormatError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
