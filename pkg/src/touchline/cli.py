"""Command-line front end.

Subcommands: classify, line, score, rerank, eval, simulate, losscheck.
Exit codes: 0 success, 1 usage error (bad flags, missing file), 2 data
error (malformed or degenerate records; output for the valid remainder
is still written). All output goes to stdout unless --out is given;
diagnostics go to stderr. Identical argv and input bytes produce
byte-identical output; all randomness flows from --seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import TouchLineError
from .harness import (
    EvalReport,
    SkippedRecord,
    evaluate,
    load_scenes,
    parse_scene_lines,
    write_scenes,
)
from .lines import build_touch_line, select_attention_source
from .losses import alignment_score, verify_ae_gradient
from .rerank import rerank
from .simulate import SimSpec, generate
from .types import Config, Scene, TouchLineMode

_EXIT_OK = 0
_EXIT_USAGE = 1
_EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; we want 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(_EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_scene_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("scenes", nargs="?", help="scene JSONL file")
    p.add_argument("--stdin", action="store_true", help="read scene JSONL from stdin")


def _add_config_flags(p: argparse.ArgumentParser, mode: bool = True) -> None:
    if mode:
        p.add_argument("--mode", choices=["vtl", "fl", "adtl"], default="adtl")
    p.add_argument("--config", help="config file (JSON or key=value lines)")
    p.add_argument("--threshold", type=float, help="collinearity threshold override")
    p.add_argument("--weight", type=float, help="re-ranking fusion weight override")
    p.add_argument("--iou-thresholds", help="comma-separated IoU thresholds")
    p.add_argument("--seed", type=int, help="rng seed override")


def build_parser() -> _Parser:
    parser = _Parser(prog="touchline", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="attention-source kind per scene")
    _add_scene_input(p)
    _add_config_flags(p, mode=False)
    p.add_argument("--out")

    p = sub.add_parser("line", help="resolved touch line per scene")
    _add_scene_input(p)
    _add_config_flags(p)
    p.add_argument("--out")

    p = sub.add_parser("score", help="alignment score against gt box per scene")
    _add_scene_input(p)
    _add_config_flags(p)
    p.add_argument("--out")

    p = sub.add_parser("rerank", help="fused candidate ranking per scene")
    _add_scene_input(p)
    _add_config_flags(p)
    p.add_argument("--out")

    p = sub.add_parser("eval", help="threshold-accuracy report over a corpus")
    _add_scene_input(p)
    _add_config_flags(p)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--metric", choices=["iou", "giou", "both"], default="both",
                   help="metrics included in csv output")
    p.add_argument("--out")

    p = sub.add_parser("simulate", help="emit a synthetic scene corpus as JSONL")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bent-fraction", type=float, default=0.5)
    p.add_argument("--noise-px", type=float, default=0.0)
    p.add_argument("--distractors", type=int, default=3)
    p.add_argument("--width", type=float, default=640.0)
    p.add_argument("--height", type=float, default=480.0)
    p.add_argument("--bend-min", type=float, default=30.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("losscheck", help="verify the alignment-loss gradient numerically")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out")
    return parser


def _build_config(args) -> Config:
    cfg = Config()
    path = getattr(args, "config", None)
    if path:
        cfg = _apply_config_file(cfg, path)
    overrides = {}
    if getattr(args, "threshold", None) is not None:
        overrides["collinearity_threshold"] = args.threshold
    if getattr(args, "weight", None) is not None:
        overrides["rerank_weight"] = args.weight
    if getattr(args, "iou_thresholds", None):
        overrides["iou_thresholds"] = tuple(float(t) for t in args.iou_thresholds.split(","))
    if getattr(args, "seed", None) is not None:
        overrides["rng_seed"] = args.seed
    return cfg.with_overrides(**overrides) if overrides else cfg


def _apply_config_file(cfg: Config, path: str) -> Config:
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        raw = json.loads(text)
    else:
        raw = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            raw[key.strip()] = value.strip()
    overrides = {}
    for key in ("collinearity_threshold", "rerank_weight", "focal_gamma", "focal_alpha"):
        if key in raw:
            overrides[key] = float(raw[key])
    if "rng_seed" in raw:
        overrides["rng_seed"] = int(raw["rng_seed"])
    if "iou_thresholds" in raw:
        value = raw["iou_thresholds"]
        if isinstance(value, str):
            value = [float(t) for t in value.split(",")]
        overrides["iou_thresholds"] = tuple(float(t) for t in value)
    if "small_max_frac" in raw or "medium_max_frac" in raw:
        small = float(raw.get("small_max_frac", cfg.size_bucket_cutoffs[0]))
        medium = float(raw.get("medium_max_frac", cfg.size_bucket_cutoffs[1]))
        overrides["size_bucket_cutoffs"] = (small, medium)
    return cfg.with_overrides(**overrides)


def _read_scenes(args, parser: _Parser) -> tuple[list[Scene], list[SkippedRecord]]:
    if args.stdin:
        return parse_scene_lines(sys.stdin)
    if not args.scenes:
        parser.error(f"{args.command}: provide a scene file or --stdin")
    try:
        return load_scenes(args.scenes)
    except FileNotFoundError:
        parser.error(f"no such file: {args.scenes}")
    raise AssertionError("unreachable")


def _mode(args) -> TouchLineMode:
    return TouchLineMode[args.mode.upper()]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _report_skipped(skipped: list[SkippedRecord]) -> int:
    if not skipped:
        return _EXIT_OK
    for record in skipped:
        print(f"skipped {record.ref}: {record.error}", file=sys.stderr)
    print(f"{len(skipped)} record(s) skipped", file=sys.stderr)
    return _EXIT_DATA


def _cmd_classify(args, parser) -> int:
    scenes, skipped = _read_scenes(args, parser)
    cfg = _build_config(args)
    rows = []
    for scene in scenes:
        try:
            source = select_attention_source(scene.skeleton, cfg)
        except TouchLineError as exc:
            skipped.append(SkippedRecord(scene.id, f"{type(exc).__name__}: {exc}"))
            continue
        rows.append({"id": scene.id, "kind": source.kind.value, "collinearity": source.collinearity})
    _emit("".join(json.dumps(r) + "\n" for r in rows), args.out)
    return _report_skipped(skipped)


def _cmd_line(args, parser) -> int:
    scenes, skipped = _read_scenes(args, parser)
    cfg = _build_config(args)
    mode = _mode(args)
    rows = []
    for scene in scenes:
        try:
            line = build_touch_line(scene.skeleton, mode, cfg)
        except TouchLineError as exc:
            skipped.append(SkippedRecord(scene.id, f"{type(exc).__name__}: {exc}"))
            continue
        rows.append(
            {
                "id": scene.id,
                "mode": line.mode.value,
                "source": [line.source.x, line.source.y],
                "tip": [line.tip.x, line.tip.y],
            }
        )
    _emit("".join(json.dumps(r) + "\n" for r in rows), args.out)
    return _report_skipped(skipped)


def _cmd_score(args, parser) -> int:
    scenes, skipped = _read_scenes(args, parser)
    cfg = _build_config(args)
    mode = _mode(args)
    rows = []
    for scene in scenes:
        try:
            line = build_touch_line(scene.skeleton, mode, cfg)
            ae = alignment_score(line.source, line.tip, scene.gt_box)
        except TouchLineError as exc:
            skipped.append(SkippedRecord(scene.id, f"{type(exc).__name__}: {exc}"))
            continue
        rows.append({"id": scene.id, "mode": line.mode.value, "ae": ae})
    _emit("".join(json.dumps(r) + "\n" for r in rows), args.out)
    return _report_skipped(skipped)


def _cmd_rerank(args, parser) -> int:
    scenes, skipped = _read_scenes(args, parser)
    cfg = _build_config(args)
    mode = _mode(args)
    rows = []
    for scene in scenes:
        if not scene.candidates:
            skipped.append(SkippedRecord(scene.id, "EmptyCandidateList: no candidates to rerank"))
            continue
        try:
            line = build_touch_line(scene.skeleton, mode, cfg)
            ranked = rerank(scene.candidates, line, cfg)
        except TouchLineError as exc:
            skipped.append(SkippedRecord(scene.id, f"{type(exc).__name__}: {exc}"))
            continue
        rows.append(
            {
                "id": scene.id,
                "mode": line.mode.value,
                "ranking": [
                    {
                        "rank": rc.rank,
                        "box": list(rc.box.as_array()),
                        "conf": rc.base_confidence,
                        "alignment": rc.alignment,
                        "fused": rc.fused_score,
                    }
                    for rc in ranked
                ],
            }
        )
    _emit("".join(json.dumps(r) + "\n" for r in rows), args.out)
    return _report_skipped(skipped)


def _cmd_eval(args, parser) -> int:
    scenes, skipped = _read_scenes(args, parser)
    cfg = _build_config(args)
    try:
        report: EvalReport = evaluate(scenes, _mode(args), cfg, skipped=skipped)
    except TouchLineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_DATA
    text = report.to_json() + "\n" if args.format == "json" else report.to_csv(args.metric)
    _emit(text, args.out)
    return _report_skipped(list(report.skipped))


def _cmd_simulate(args, parser) -> int:
    spec = SimSpec(
        n_scenes=args.n,
        bent_fraction=args.bent_fraction,
        noise_px=args.noise_px,
        distractors_per_scene=args.distractors,
        image_size=(args.width, args.height),
        rng_seed=args.seed,
        arm_bend_degrees_min=args.bend_min,
    )
    labeled = generate(spec)
    import io

    buf = io.StringIO()
    write_scenes((ls.scene for ls in labeled), buf)
    _emit(buf.getvalue(), args.out)
    return _EXIT_OK


def _cmd_losscheck(args, parser) -> int:
    max_err = verify_ae_gradient(n=args.n, seed=args.seed)
    text = f"max relative error {max_err:.6e} over {args.n} configurations\n"
    _emit(text, args.out)
    if max_err >= 1e-6:
        print("gradient check FAILED tolerance 1e-6", file=sys.stderr)
        return _EXIT_DATA
    return _EXIT_OK


_HANDLERS = {
    "classify": _cmd_classify,
    "line": _cmd_line,
    "score": _cmd_score,
    "rerank": _cmd_rerank,
    "eval": _cmd_eval,
    "simulate": _cmd_simulate,
    "losscheck": _cmd_losscheck,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _HANDLERS[args.command](args, parser)
    except SystemExit as exc:  # argparse --help (0) or usage error (1)
        return int(exc.code or 0)
    except TouchLineError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return _EXIT_DATA
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE


def console_main() -> None:
    sys.exit(main())
