"""Command-line front end: sample, bench, error, gof, multidim.

Exit status: 0 success/pass, 1 statistical fail, 2 usage, 3 I/O, 4 validation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, tables
from .bs_sampler import BsSampler, bbs_explicit
from .its_baselines import ItsSampler
from .model import FormatError, RngStream, ValidationError, WeightTable, load_weights
from .multidim import Shape, flatten, load_descriptor, truncated_sampler, unflatten
from .verify import ConstantSampler, GofPreconditionError, error_reports_csv, gof_test, rounding_error_experiment

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO, EXIT_VALIDATION = 0, 1, 2, 3, 4
SAMPLERS = ("bs", "its_forward", "its_backward", "bsits")


class UsageError(Exception):
    pass


def _parse_size(token: str) -> int:
    token = token.strip()
    for sep in ("**", "^"):
        if sep in token:
            base, exp = token.split(sep)
            return int(base) ** int(exp)
    return int(token)


def parse_sweep(text: str) -> list[int]:
    try:
        return [_parse_size(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"cannot parse sweep {text!r}") from None


def _read_input(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _load_table(args) -> tuple[WeightTable, str]:
    """Table from --input, or from --dist/--n; returns it with an input digest."""
    if args.input:
        raw = _read_input(args.input)
        fmt = args.input_format or ("json" if args.input.endswith(".json") else "plain")
        return load_weights(raw, format=fmt), hashlib.sha256(raw).hexdigest()
    if args.dist and args.n is not None:
        table = tables.make(args.dist, args.n, **_dist_params(args))
        tag = json.dumps({"dist": args.dist, "n": args.n, **_dist_params(args)}, sort_keys=True)
        return table, hashlib.sha256(tag.encode()).hexdigest()
    raise UsageError("provide --input FILE or --dist FAMILY with --n N")


def _dist_params(args) -> dict:
    return {"s": args.zipf_s, "gamma": args.gamma, "eps": args.eps}


def _metadata(args, table: WeightTable | None, digest: str | None, **extra) -> dict:
    meta = {
        "tool": "binsampling",
        "version": __version__,
        "command": args.command,
        "seed": args.seed,
        "generator": RngStream.generator,
        "numpy": np.__version__,
    }
    if table is not None:
        meta.update(N=table.n_max, d=table.depth)
    if digest is not None:
        meta["input_sha256"] = digest
    meta.update(extra)
    return meta


def _header(meta: dict) -> str:
    return "".join(f"# {k}: {json.dumps(v)}\n" for k, v in meta.items())


def _emit(args, text: str) -> None:
    if args.output and args.output != "-":
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _render_samples(args, meta: dict, rows: list) -> str:
    if args.format == "json":
        return json.dumps({"metadata": meta, "samples": rows}) + "\n"
    body = io.StringIO()
    if args.format == "csv":
        writer = csv.writer(body, lineterminator="\n")
        width = len(rows[0]) if rows and isinstance(rows[0], (list, tuple)) else 1
        writer.writerow(["sample"] if width == 1 else [f"m{k + 1}" for k in range(width)])
        for r in rows:
            writer.writerow(r if isinstance(r, (list, tuple)) else [r])
    else:
        for r in rows:
            body.write((",".join(map(str, r)) if isinstance(r, (list, tuple)) else str(r)) + "\n")
    return _header(meta) + body.getvalue()


def _make_sampler(name: str, table: WeightTable, rng, explicit_set: bool = False):
    if name == "bs":
        if explicit_set:
            first, tree, sizes = bbs_explicit(table, rng)
            sampler = BsSampler(tree=tree, rng=rng, first_sample=first, _first_pending=True)
            sampler.candidate_set_sizes = sizes
            return sampler
        return BsSampler.from_table(table, rng)
    if name in ("its_forward", "its_backward", "bsits"):
        return ItsSampler(table, rng, name)
    if name == "zero":
        return ConstantSampler(0)
    raise UsageError(f"unknown sampler {name!r}")


def cmd_sample(args) -> int:
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    table, digest = _load_table(args)
    shape = None
    if args.shape:
        shape = load_descriptor(_shape_text(args.shape))["shape"]
        if shape.size != table.n_max + 1:
            raise ValidationError(f"shape has {shape.size} cells but the table has {table.n_max + 1}")
    rng = RngStream(args.seed)
    sampler = _make_sampler(args.sampler, table, rng, args.explicit_set)
    samples = sampler.sample(args.count)
    extra = {"sampler": args.sampler, "count": args.count}
    if args.sampler == "bs":
        extra.update(tree_built=True, bbs_samples=1, fbs_samples=args.count - 1)
        if getattr(sampler, "candidate_set_sizes", None) is not None:
            extra["candidate_set_sizes"] = sampler.candidate_set_sizes
    rows = [list(unflatten(shape, int(i))) for i in samples] if shape else [int(i) for i in samples]
    _emit(args, _render_samples(args, _metadata(args, table, digest, **extra), rows))
    return EXIT_OK


def _shape_text(value: str) -> str:
    if value.lstrip().startswith("{"):
        return value
    return Path(value).read_text()


def _bench_cell(name: str, table: WeightTable, count: int, seed: int) -> dict:
    rng = RngStream(seed)
    t0 = time.perf_counter()
    if name == "bs":
        sampler = BsSampler.from_table(table, rng)
    else:
        sampler = ItsSampler(table, rng, name)
    build_time = time.perf_counter() - t0
    if name == "bs":
        before = rng.draw_count
        t0 = time.perf_counter()
        sampler.fbs_batch(count)
        elapsed = time.perf_counter() - t0
        steps = (rng.draw_count - before) / count
    else:
        t0 = time.perf_counter()
        sampler.sample(count)
        elapsed = time.perf_counter() - t0
        steps = sampler.mean_comparisons
    return {
        "N": table.n_max,
        "sampler": name,
        "build_time": build_time,
        "per_sample_time": elapsed / count,
        "comparisons_or_steps": steps,
    }


def cmd_bench(args) -> int:
    if not args.sweep:
        raise UsageError("bench needs --sweep N1,N2,...")
    sizes = parse_sweep(args.sweep)
    names = SAMPLERS if args.sampler == "all" else tuple(args.sampler.split(","))
    for name in names:
        if name not in SAMPLERS:
            raise UsageError(f"unknown sampler {name!r}")
    dist = args.dist or "uniform"
    rows = []
    for n in sizes:
        if n < 1:
            raise UsageError(f"sweep sizes must be positive, got {n}")
    # sweep entries are table sizes, so the largest index is size - 1
    for cell, n in enumerate(sizes):
        table = tables.make(dist, n - 1, **_dist_params(args))
        for k, name in enumerate(names):
            rows.append(_bench_cell(name, table, args.count, args.seed + 1000 * cell + k))
    meta = _metadata(args, None, None, dist=dist, sweep=sizes, samplers=list(names), count=args.count)
    if args.format == "json":
        text = json.dumps({"metadata": meta, "rows": rows}) + "\n"
    else:
        body = io.StringIO()
        writer = csv.DictWriter(body, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        text = _header(meta) + body.getvalue()
    _emit(args, text)
    return EXIT_OK


def cmd_error(args) -> int:
    sizes = parse_sweep(args.sweep or "65536")
    for n in sizes:
        if n < 1 or n & (n - 1):
            raise UsageError(f"size {n} is not a power of two")
    rng = RngStream(args.seed)
    pairs = []
    for n in sizes:
        pairs.extend(rounding_error_experiment(n, args.trials, rng))
    meta = _metadata(args, None, None, sizes=sizes, trials=args.trials)
    if args.format == "json":
        rows = [r.__dict__ for pair in pairs for r in pair]
        text = json.dumps({"metadata": meta, "rows": rows}) + "\n"
    else:
        text = _header(meta) + error_reports_csv(pairs)
    _emit(args, text)
    return EXIT_OK


def cmd_gof(args) -> int:
    table, digest = _load_table(args)
    rng = RngStream(args.seed)
    sampler = _make_sampler(args.sampler, table, rng, args.explicit_set)
    try:
        report = gof_test(sampler, table, args.count, args.alpha)
    except GofPreconditionError as exc:
        print(f"error: {exc}; rerun with --count {exc.min_count} or more", file=sys.stderr)
        return EXIT_USAGE
    doc = json.loads(report.to_json())
    doc["metadata"] = _metadata(args, table, digest, sampler=args.sampler, count=args.count)
    _emit(args, json.dumps(doc) + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_multidim(args) -> int:
    if not args.shape:
        raise UsageError("multidim needs --shape DESCRIPTOR")
    text = _shape_text(args.shape)
    desc = load_descriptor(text)
    shape: Shape = desc["shape"]
    doc = json.loads(text)
    if args.input:
        raw = _read_input(args.input)
        fmt = args.input_format or ("json" if args.input.endswith(".json") else "plain")
        flat = load_weights(raw, format=fmt).weights
        digest = hashlib.sha256(raw).hexdigest()
    elif "weights" in doc:
        flat = WeightTable(doc["weights"]).weights
        digest = hashlib.sha256(text.encode()).hexdigest()
    else:
        raise UsageError("multidim needs weights via --input or a \"weights\" key in the descriptor")
    if flat.size != shape.size:
        raise ValidationError(f"expected {shape.size} flattened weights, got {flat.size}")
    tail = args.tail_bound if args.tail_bound is not None else desc["tail_bound"]
    rng = RngStream(args.seed)
    sampler, report = truncated_sampler(
        lambda m: flat[flatten(shape, m)], desc["support"], rng, tail_bound=tail, shape=shape
    )
    rows = [list(m) for m in sampler.sample(args.count)]
    meta = _metadata(args, None, digest, sampler="bs", count=args.count, extents=list(shape.extents),
                     N=shape.size - 1, d=sampler.bs.tree.depth, **report.as_dict())
    _emit(args, _render_samples(args, meta, rows))
    return EXIT_OK


COMMANDS = {
    "sample": cmd_sample,
    "bench": cmd_bench,
    "error": cmd_error,
    "gof": cmd_gof,
    "multidim": cmd_multidim,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="binsample", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--sampler", default="bs")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--count", type=int, default=100_000 if name in ("gof", "bench") else 10)
        p.add_argument("--input")
        p.add_argument("--input-format", choices=("plain", "json"))
        p.add_argument("--output")
        p.add_argument("--format", choices=("csv", "json", "plain"),
                       default="csv" if name in ("bench", "error") else "plain")
        p.add_argument("--sweep")
        p.add_argument("--trials", type=int, default=100)
        p.add_argument("--shape")
        p.add_argument("--tail-bound", type=float)
        p.add_argument("--alpha", type=float, default=0.001)
        p.add_argument("--dist", choices=sorted(tables.FAMILIES))
        p.add_argument("--n", type=int)
        p.add_argument("--zipf-s", type=float, default=3.0)
        p.add_argument("--gamma", type=float, default=0.3)
        p.add_argument("--eps", type=float, default=0.5)
        p.add_argument("--explicit-set", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not 0 <= args.seed < 2**64:
        print("error: --seed must be a 64-bit unsigned integer", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, FormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
