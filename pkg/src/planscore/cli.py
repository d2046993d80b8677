"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 input/IO error, 3 internal failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import graph
from .extractor import extract
from .harness import (
    ENV_RASTER_SIZE,
    ENV_TOLERANCE,
    ApartmentEntry,
    ManifestError,
    RunFileError,
    Settings,
    TruthError,
    aggregate,
    batch_score,
    format_leaderboard,
    load_plan,
    score_submission,
    write_manifest,
)
from .raster import ImageLoadError, save_grid
from .scorer import COMPONENTS
from .svg import SvgSyntaxError
from .synth import (
    GenerationError,
    Perturbation,
    PerturbationError,
    SynthConfig,
    baseline_mean,
    generate,
    perturb,
    random_baseline,
    render_to_svg,
)
from .validator import validate

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("planscore")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit(payload, fmt: str, text: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _breakdown_text(b) -> str:
    lines = [f"{c:<16} {getattr(b, c):.6f}" for c in COMPONENTS]
    lines.append(f"{'composite':<16} {b.composite:.6f}")
    return "\n".join(lines)


def cmd_validate(args, settings):
    grid, issues = load_plan(args.image, settings)
    violations = validate(grid)
    text = "\n".join(f"rule {v.rule}: {v.description}" + (f" at {v.location}" if v.location else "")
                     for v in violations) or "no violations"
    if issues:
        text += f"\n({issues} SVG parse issue(s))"
    _emit({"violations": [v.to_dict() for v in violations], "svg_issues": issues}, args.format, text)
    return EXIT_OK


def cmd_extract(args, settings):
    grid, _ = load_plan(args.image, settings)
    ir = extract(grid)
    doc = graph.serialize(ir)
    if args.out:
        Path(args.out).write_text(doc + "\n")
        print(f"{len(ir.rooms)} rooms, {len(ir.doors)} doors, {len(ir.edges)} edges -> {args.out}")
    else:
        print(doc)
    return EXIT_OK


def cmd_score(args, settings):
    rec = score_submission(args.candidate, args.truth, settings=settings)
    text = _breakdown_text(rec.breakdown)
    if rec.failure:
        text += f"\nfailure: {rec.failure}"
    _emit(rec.to_dict(), args.format, text)
    return EXIT_OK


def cmd_batch(args, settings):
    result = batch_score(args.manifest, args.submissions, args.epochs, run_file=args.run_file,
                         settings=settings, workers=args.workers)
    for note in result.skipped:
        log.warning("skipped %s", note)
    for err in result.errors:
        log.error("%s", err)
    payload = {"records": len(result.records), "skipped": result.skipped, "errors": result.errors}
    text = f"{len(result.records)} records, {len(result.skipped)} skipped, {len(result.errors)} errors"
    if args.run_file:
        text += f" -> {args.run_file}"
    _emit(payload, args.format, text)
    return EXIT_OK


def cmd_report(args, settings):
    rows = aggregate(args.run_file)
    payload = [
        {"submitter": r.submitter, "mean": r.mean, "std": r.std, "count": r.count,
         "component_means": r.component_means}
        for r in rows
    ]
    _emit(payload, args.format, format_leaderboard(rows))
    return EXIT_OK


def _config(args) -> SynthConfig:
    return SynthConfig(min_rooms=args.min_rooms, max_rooms=args.max_rooms,
                       width=args.size, height=args.size)


def _write_plan(plan, out: Path, stem: str) -> None:
    save_grid(plan.raster, out / f"{stem}.png")
    (out / f"{stem}.svg").write_text(render_to_svg(plan))
    (out / f"{stem}.ir.json").write_text(graph.serialize(plan.truth) + "\n")


def cmd_synth(args, settings):
    cfg = _config(args)
    if args.action == "baseline":
        if args.out:
            Path(args.out).write_text(graph.serialize(random_baseline(cfg, args.seed)) + "\n")
            print(f"baseline IR for seed {args.seed} -> {args.out}")
            return EXIT_OK
        mean = baseline_mean(args.pairs, args.block, cfg)
        _emit({"pairs": args.pairs, "block": args.block, "mean_composite": mean}, args.format,
              f"random baseline mean composite over {args.pairs} pairs (block {args.block}): {mean:.6f}")
        return EXIT_OK

    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    if args.action == "gen":
        entries, extra = [], {}
        for seed in range(args.seed, args.seed + args.count):
            stem = f"synth-{seed:04d}"
            _write_plan(generate(cfg, seed=seed), out, stem)
            entries.append(ApartmentEntry(stem, out / f"{stem}.png"))
            extra[stem] = {"seed": seed, "svg": f"{stem}.svg", "ir": f"{stem}.ir.json"}
        write_manifest(out / "manifest.toml", entries, extra)
        print(f"{args.count} plan(s) -> {out}")
        return EXIT_OK

    if args.op is None:
        raise UsageError("synth perturb needs --op")
    plan = perturb(generate(cfg, seed=args.seed), args.op, args.perturb_seed)
    stem = f"synth-{args.seed:04d}-{args.op}"
    _write_plan(plan, out, stem)
    print(f"{stem}: expected rules {sorted(plan.expected_rules) or '-'} -> {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    defaults = Settings()
    epilog = (f"environment: {ENV_TOLERANCE} (default {defaults.tolerance}) sets the color "
              f"tolerance; {ENV_RASTER_SIZE} (default {defaults.raster_size}) sets the raster size "
              "for SVG documents without explicit dimensions")
    parser = _Parser(prog="planscore", description="Floor-plan extraction and similarity scoring.",
                     epilog=epilog)
    parser.add_argument("--tolerance", type=int, default=None,
                        help=f"per-channel color tolerance (default {defaults.tolerance})")
    parser.add_argument("--raster-size", type=int, default=None,
                        help=f"SVG raster size when undeclared (default {defaults.raster_size})")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def fmt(p, choices=("text", "json"), default="text"):
        p.add_argument("--format", choices=choices, default=default)

    p = sub.add_parser("validate", help="check a plan against the drawing rules")
    p.add_argument("image")
    fmt(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("extract", help="extract rooms, doors and edges")
    p.add_argument("image")
    p.add_argument("--out")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("score", help="score a candidate plan against a truth plan")
    p.add_argument("candidate")
    p.add_argument("truth")
    fmt(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("batch", help="score a submissions tree against a manifest")
    p.add_argument("manifest")
    p.add_argument("submissions")
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--run-file")
    p.add_argument("--workers", type=int, default=1)
    fmt(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("report", help="aggregate a run file into a leaderboard")
    p.add_argument("run_file")
    fmt(p, ("table", "json"), "table")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="synthetic plans, perturbations and the random baseline")
    p.add_argument("action", choices=("gen", "perturb", "baseline"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--op", choices=[o.value for o in Perturbation])
    p.add_argument("--perturb-seed", type=int, default=0)
    p.add_argument("--pairs", type=int, default=100)
    p.add_argument("--block", type=int, default=0)
    p.add_argument("--min-rooms", type=int, default=3)
    p.add_argument("--max-rooms", type=int, default=6)
    p.add_argument("--size", type=int, default=1000)
    p.add_argument("--out")
    fmt(p)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        settings = Settings.from_env()
        if args.tolerance is not None:
            settings = replace(settings, tolerance=args.tolerance)
        if args.raster_size is not None:
            settings = replace(settings, raster_size=args.raster_size)
        return args.func(args, settings)
    except UsageError as exc:
        print(f"planscore: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ImageLoadError, SvgSyntaxError, ManifestError, RunFileError, TruthError,
            graph.IRError) as exc:
        print(f"planscore: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, GenerationError, PerturbationError) as exc:
        print(f"planscore: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:  # noqa: BLE001
        log.exception("internal failure")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
