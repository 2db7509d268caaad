"""Command-line interface: data generation, segmentation and the scale benchmark.

Every output embeds a run manifest (resolved configuration, seed, input
digest, tool version) and all floating-point output uses 6 significant
digits, so equal manifests reproduce equal files. Exit codes: 0 success,
2 invalid flags, 3 I/O failure, 4 malformed input row, 5 pipeline failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys

import numpy as np

from . import __version__, evaluation, pipeline
from .evaluation import SyntheticSpec, gen_two_lines, misclassification, scale_bench
from .exceptions import HomfError, InsufficientData, InvalidSpec
from .geometry import ModelKind

EXIT_OK = 0
EXIT_BAD_FLAGS = 2
EXIT_IO = 3
EXIT_BAD_INPUT = 4
EXIT_PIPELINE = 5


class MalformedInput(Exception):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


# ---------------------------------------------------------------------------
# Formatting and manifests
# ---------------------------------------------------------------------------


def fmt(value: float) -> str:
    """Render a float with 6 significant digits."""
    return f"{float(value):.6g}"


def _round_floats(obj):
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round_floats(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return _round_floats(float(obj))
    return obj


def digest_bytes(payload: bytes) -> str:
    """64-bit content hash rendered as 16 hex characters."""
    return hashlib.blake2b(payload, digest_size=8).hexdigest()


def build_manifest(command: str, seed: int, input_digest: str, parameters: dict) -> dict:
    return {
        "tool": "homf",
        "version": __version__,
        "command": command,
        "seed": int(seed),
        "input_digest": input_digest,
        "parameters": _round_floats(parameters),
    }


def manifest_comment(manifest: dict) -> str:
    return "# manifest=" + json.dumps(manifest, sort_keys=True, separators=(",", ":"))


def config_from_manifest(manifest: dict) -> pipeline.HOMFConfig:
    """Rebuild the segmentation configuration recorded in a manifest."""
    params = manifest["parameters"]
    return pipeline.HOMFConfig(
        c=int(params["clusters"]),
        kind=ModelKind(params["model"]),
        m=int(params["hyps"]),
        q_fraction=float(params["q_frac"]),
        t_max=int(params["tmax"]),
        update_factor=float(params["factor"]),
        kappa=int(params["kappa"]),
        affinity_mode=params["affinity"],
        seed=int(manifest["seed"]),
        outlier_multiplier=float(params["outlier_multiplier"]),
    )


# ---------------------------------------------------------------------------
# Input parsing
# ---------------------------------------------------------------------------


def read_observations(text: str, width: int) -> tuple[np.ndarray, np.ndarray | None]:
    """Parse CSV observations of ``width`` coordinates plus an optional label.

    Skips comment lines and a single leading header row. Raises
    MalformedInput with the 1-based line number on any inconsistent row.
    """
    rows: list[list[float]] = []
    labels: list[int] = []
    columns: int | None = None
    saw_data = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        try:
            values = [float(p) for p in parts]
        except ValueError:
            if not saw_data:
                continue  # header row
            raise MalformedInput(lineno, f"non-numeric field in {raw!r}")
        saw_data = True
        if columns is None:
            if len(values) not in (width, width + 1):
                raise MalformedInput(
                    lineno, f"expected {width} or {width + 1} columns, got {len(values)}"
                )
            columns = len(values)
        elif len(values) != columns:
            raise MalformedInput(lineno, f"expected {columns} columns, got {len(values)}")
        if not all(np.isfinite(values)):
            raise MalformedInput(lineno, "non-finite value")
        rows.append(values[:width])
        if columns == width + 1:
            label = values[width]
            if label != int(label):
                raise MalformedInput(lineno, f"label {label} is not an integer")
            labels.append(int(label))
    if not rows:
        raise MalformedInput(1, "no data rows")
    data = np.asarray(rows, dtype=np.float64)
    return data, (np.asarray(labels, dtype=np.int64) if labels else None)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    spec = SyntheticSpec(
        left_line_n=args.left,
        right_line_n=args.right,
        total_n=args.total,
        noise_sigma=args.noise,
        seed=args.seed,
    )
    try:
        spec.validate()
    except InvalidSpec as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_FLAGS
    dataset = gen_two_lines(spec)
    params = {
        "total": args.total,
        "left": args.left,
        "right": args.right,
        "noise": args.noise,
    }
    digest = digest_bytes(json.dumps(params, sort_keys=True).encode())
    manifest = build_manifest("gen", args.seed, digest, params)
    lines = [manifest_comment(manifest), "x,y,label"]
    for (x, y), label in zip(dataset.data, dataset.gt_labels):
        lines.append(f"{fmt(x)},{fmt(y)},{label}")
    try:
        with open(args.output, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    n_out = int(np.sum(dataset.gt_labels == -1))
    print(
        f"wrote {args.output}: {len(dataset.data)} points "
        f"({args.left} left, {args.right} right, {n_out} outliers)"
    )
    return EXIT_OK


def cmd_segment(args) -> int:
    kind = ModelKind(args.model)
    try:
        with open(args.input, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        data, gt_labels = read_observations(raw.decode("utf-8", errors="replace"), kind.data_width)
    except MalformedInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    params = {
        "model": args.model,
        "clusters": args.clusters,
        "hyps": args.hyps,
        "affinity": args.affinity,
        "q_frac": args.q_frac,
        "tmax": args.tmax,
        "kappa": args.kappa,
        "factor": args.factor,
        "outlier_multiplier": args.outlier_mult,
    }
    manifest = build_manifest("segment", args.seed, digest_bytes(raw), params)
    config = config_from_manifest(manifest)
    try:
        result = pipeline.fit(data, config)
    except (InsufficientData, HomfError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    if result.failed:
        print(f"error: pipeline failed: {result.failure_reason}", file=sys.stderr)
        return EXIT_PIPELINE

    output = {
        "manifest": manifest,
        "labels": result.labels.tolist(),
        "models": [
            {"kind": m.kind.value, "params": _round_floats(m.params)} for m in result.models
        ],
        "cluster_scales": [_round_floats(s.scale) for s in result.cluster_scales],
        "stats": {
            "hypotheses_drawn": result.stats.hypotheses_drawn,
            "hyperedges_rejected": result.stats.hyperedges_rejected,
            "iho_iterations_total": result.stats.iho_iterations_total,
        },
        "wall_time_s": _round_floats(result.stats.wall_time_s),
    }
    summary = f"segmented {len(data)} points into {args.clusters} structures"
    if gt_labels is not None:
        error = misclassification(result.labels, gt_labels)
        output["misclassification_percent"] = _round_floats(error)
        summary += f", misclassification {fmt(error)}%"
    summary += f", wall time {fmt(result.stats.wall_time_s)} s"
    try:
        with open(args.output, "w") as fh:
            json.dump(output, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(summary)
    return EXIT_OK


def parse_ratios(text: str) -> list[float]:
    try:
        start, stop, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"ratios must be start:stop:step, got {text!r}")
    if step <= 0 or not 0 < start <= stop < 1:
        raise argparse.ArgumentTypeError(f"invalid ratio sweep {text!r}")
    ratios = []
    value = start
    while value <= stop + 1e-9:
        ratios.append(round(value, 10))
        value += step
    return ratios


def cmd_scale_bench(args) -> int:
    estimators = [e.strip().lower() for e in args.estimators.split(",") if e.strip()]
    unknown = set(estimators) - set(evaluation.SCALE_ESTIMATORS)
    if unknown or not estimators:
        print(f"error: unknown estimators {sorted(unknown)}", file=sys.stderr)
        return EXIT_BAD_FLAGS
    params = {
        "ratios": args.ratios,
        "runs": args.runs,
        "estimators": ",".join(estimators),
    }
    digest = digest_bytes(json.dumps(params, sort_keys=True).encode())
    manifest = build_manifest("scale-bench", args.seed, digest, params)
    rows = scale_bench(parse_ratios(args.ratios), args.runs, estimators, seed=args.seed)
    lines = [manifest_comment(manifest), "estimator,ratio,std,mean,med,max,failures"]
    for row in rows:
        ratio = "all" if row.ratio is None else fmt(row.ratio)
        lines.append(
            f"{row.estimator},{ratio},{fmt(row.std)},{fmt(row.mean)},"
            f"{fmt(row.med)},{fmt(row.max)},{row.failures}"
        )
    try:
        with open(args.output, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print("aggregate scale errors (std / mean / med / max):")
    for row in rows:
        if row.ratio is None:
            print(
                f"  {row.estimator:>6}: {fmt(row.std)} / {fmt(row.mean)} / "
                f"{fmt(row.med)} / {fmt(row.max)}  ({row.failures} failures)"
            )
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homf", description="multi-structure geometric model fitting"
    )
    parser.add_argument("--version", action="version", version=f"homf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate synthetic two-line data")
    gen.add_argument("--total", type=int, default=evaluation.DEFAULT_TOTAL)
    gen.add_argument("--left", type=int, default=1000)
    gen.add_argument("--right", type=int, default=evaluation.DEFAULT_RIGHT)
    gen.add_argument("--noise", type=float, default=1.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("-o", "--output", required=True)
    gen.set_defaults(func=cmd_gen)

    seg = sub.add_parser("segment", help="fit multiple structures to a data file")
    seg.add_argument("input")
    seg.add_argument("--model", choices=[k.value for k in ModelKind], required=True)
    seg.add_argument("--clusters", type=int, required=True)
    seg.add_argument("--hyps", type=int, default=pipeline.DEFAULT_HYPOTHESES)
    seg.add_argument("--seed", type=int, default=0)
    seg.add_argument("--affinity", choices=["residual", "literal"], default="residual")
    seg.add_argument("--q-frac", type=float, default=0.1, dest="q_frac")
    seg.add_argument("--tmax", type=int, default=10)
    seg.add_argument("--kappa", type=int, default=10)
    seg.add_argument("--factor", type=float, default=5.0)
    seg.add_argument("--outlier-mult", type=float, default=2.5, dest="outlier_mult")
    seg.add_argument("-o", "--output", required=True)
    seg.set_defaults(func=cmd_segment)

    bench = sub.add_parser("scale-bench", help="benchmark the inlier scale estimators")
    bench.add_argument("--ratios", default="0.05:0.95:0.05")
    bench.add_argument("--runs", type=int, default=50)
    bench.add_argument("--estimators", default=",".join(evaluation.SCALE_ESTIMATORS))
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("-o", "--output", required=True)
    bench.set_defaults(func=cmd_scale_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "scale-bench":
        try:
            parse_ratios(args.ratios)
        except argparse.ArgumentTypeError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_BAD_FLAGS
    if getattr(args, "clusters", 1) < 1 or getattr(args, "hyps", 1) < 1:
        print("error: --clusters and --hyps must be positive", file=sys.stderr)
        return EXIT_BAD_FLAGS
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
