"""Batch scoring over a dataset of apartments and submissions.

Manifest (TOML, ``manifest_version = 1``)::

    manifest_version = 1

    [[apartments]]
    id = "apt-001"
    truth = "truth/apt-001.png"     # relative to the manifest's directory
    photos = "photos/apt-001"       # optional, bookkeeping only

Submissions layout::

    <root>/<submitter>/<apartment>/<epoch>.<svg|png|jpg|...>

Epochs are numbered from 0. Run files hold one JSON ResultRecord per line.
"""

from __future__ import annotations

import json
import logging
import math
import os
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .extractor import extract
from .graph import FloorPlanIR
from .raster import DEFAULT_TOLERANCE, ImageLoadError, PixelGrid, load_image
from .scorer import COMPONENTS, ScoreBreakdown, composite_score
from .svg import DEFAULT_CANVAS, SvgSyntaxError, parse_svg, rasterize

log = logging.getLogger(__name__)

MANIFEST_VERSION = 1
ENV_TOLERANCE = "PLANSCORE_TOLERANCE"
ENV_RASTER_SIZE = "PLANSCORE_RASTER_SIZE"
VECTOR_SUFFIXES = (".svg",)
RASTER_SUFFIXES = (".png", ".bmp", ".gif", ".tif", ".tiff", ".webp", ".jpg", ".jpeg")


class ManifestError(ValueError):
    pass


class TruthError(RuntimeError):
    """Ground-truth plan could not be loaded; the dataset is broken."""


class RunFileError(ValueError):
    pass


@dataclass(frozen=True)
class Settings:
    tolerance: int = DEFAULT_TOLERANCE
    raster_size: int = DEFAULT_CANVAS

    @classmethod
    def from_env(cls, environ=None) -> "Settings":
        env = os.environ if environ is None else environ
        tol = int(env.get(ENV_TOLERANCE, DEFAULT_TOLERANCE))
        size = int(env.get(ENV_RASTER_SIZE, DEFAULT_CANVAS))
        if not 0 <= tol <= 255:
            raise ValueError(f"{ENV_TOLERANCE} must be in 0..255, got {tol}")
        if size < 1:
            raise ValueError(f"{ENV_RASTER_SIZE} must be positive, got {size}")
        return cls(tol, size)


@dataclass(frozen=True)
class ApartmentEntry:
    apartment_id: str
    truth: Path
    photos: Path | None = None


@dataclass(frozen=True)
class ResultRecord:
    apartment: str
    submitter: str
    epoch: int
    breakdown: ScoreBreakdown
    violations: int = 0
    svg_issues: int = 0
    failure: str | None = None
    started_at: str = ""
    finished_at: str = ""

    @property
    def composite(self) -> float:
        return self.breakdown.composite

    def to_dict(self) -> dict:
        return {
            "apartment": self.apartment,
            "submitter": self.submitter,
            "epoch": self.epoch,
            "breakdown": self.breakdown.to_dict(),
            "violations": self.violations,
            "svg_issues": self.svg_issues,
            "failure": self.failure,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ResultRecord":
        return cls(
            apartment=str(d["apartment"]),
            submitter=str(d["submitter"]),
            epoch=int(d["epoch"]),
            breakdown=ScoreBreakdown.from_dict(d["breakdown"]),
            violations=int(d.get("violations", 0)),
            svg_issues=int(d.get("svg_issues", 0)),
            failure=d.get("failure"),
            started_at=d.get("started_at", ""),
            finished_at=d.get("finished_at", ""),
        )


@dataclass(frozen=True)
class LeaderboardRow:
    submitter: str
    mean: float
    std: float
    component_means: dict[str, float]
    count: int


@dataclass
class BatchResult:
    records: list[ResultRecord] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


def load_manifest(path: str | os.PathLike) -> list[ApartmentEntry]:
    path = Path(path)
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ManifestError(f"{path}: {exc}") from exc
    if doc.get("manifest_version") != MANIFEST_VERSION:
        raise ManifestError(f"{path}: unsupported manifest_version {doc.get('manifest_version')!r}")
    base = path.parent
    entries = []
    seen = set()
    for i, item in enumerate(doc.get("apartments", [])):
        try:
            apt_id = str(item["id"])
            truth = base / str(item["truth"])
        except (KeyError, TypeError) as exc:
            raise ManifestError(f"{path}: apartment #{i} needs 'id' and 'truth'") from exc
        if apt_id in seen:
            raise ManifestError(f"{path}: duplicate apartment id {apt_id!r}")
        seen.add(apt_id)
        photos = base / str(item["photos"]) if "photos" in item else None
        entries.append(ApartmentEntry(apt_id, truth, photos))
    return entries


def write_manifest(path: str | os.PathLike, entries: Iterable[ApartmentEntry], extra: dict | None = None) -> None:
    """Write a manifest; paths are stored relative to its directory when possible."""
    path = Path(path)
    lines = [f"manifest_version = {MANIFEST_VERSION}", ""]
    for e in entries:
        lines.append("[[apartments]]")
        lines.append(f"id = {json.dumps(e.apartment_id)}")
        lines.append(f"truth = {json.dumps(_relative(e.truth, path.parent))}")
        if e.photos is not None:
            lines.append(f"photos = {json.dumps(_relative(e.photos, path.parent))}")
        for k, v in (extra or {}).get(e.apartment_id, {}).items():
            lines.append(f"{k} = {json.dumps(v)}")
        lines.append("")
    path.write_text("\n".join(lines))


def _relative(p: Path, base: Path) -> str:
    try:
        return Path(p).resolve().relative_to(base.resolve()).as_posix()
    except ValueError:
        return str(p)


def _is_vector(path: Path) -> bool:
    suffix = path.suffix.lower()
    if suffix in VECTOR_SUFFIXES:
        return True
    if suffix in RASTER_SUFFIXES:
        return False
    with open(path, "rb") as fh:
        head = fh.read(512).lstrip().lower()
    return head.startswith(b"<?xml") or head.startswith(b"<svg")


def load_plan(path: str | os.PathLike, settings: Settings | None = None) -> tuple[PixelGrid, int]:
    """Read a raster or SVG plan. Returns the grid and the count of SVG parse issues.

    Raises ImageLoadError / SvgSyntaxError / OSError on unreadable input.
    """
    settings = settings or Settings()
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    if _is_vector(path):
        plan = parse_svg(path.read_bytes(), settings.tolerance, settings.raster_size)
        for issue in plan.issues:
            log.debug("%s: %s", path, issue)
        return rasterize(plan), len(plan.issues)
    return load_image(path, settings.tolerance), 0


def extract_truth(path: str | os.PathLike, settings: Settings | None = None) -> FloorPlanIR:
    try:
        grid, _ = load_plan(path, settings)
    except (OSError, ImageLoadError, SvgSyntaxError) as exc:
        raise TruthError(f"cannot read ground truth {path}: {exc}") from exc
    return extract(grid)


def score_submission(submission: str | os.PathLike, truth: str | os.PathLike | FloorPlanIR, *,
                     apartment: str = "", submitter: str = "", epoch: int = 0,
                     settings: Settings | None = None) -> ResultRecord:
    """Score one submission file against a truth file (or an already extracted truth IR).

    Unreadable submissions get a zero breakdown and a failure reason rather
    than an exception; an unreadable truth raises TruthError.
    """
    settings = settings or Settings()
    started = _now()
    truth_ir = truth if isinstance(truth, FloorPlanIR) else extract_truth(truth, settings)
    try:
        grid, issues = load_plan(submission, settings)
    except (OSError, ImageLoadError, SvgSyntaxError, ValueError) as exc:
        return ResultRecord(apartment, submitter, epoch, ScoreBreakdown.zero(),
                            failure=f"{type(exc).__name__}: {exc}", started_at=started, finished_at=_now())
    candidate = extract(grid)
    return ResultRecord(
        apartment, submitter, epoch, composite_score(candidate, truth_ir),
        violations=len(candidate.violations), svg_issues=issues,
        started_at=started, finished_at=_now(),
    )


def _find_epoch_file(folder: Path, epoch: int) -> Path | None:
    if not folder.is_dir():
        return None
    hits = sorted(p for p in folder.iterdir()
                  if p.is_file() and p.stem == str(epoch)
                  and p.suffix.lower() in VECTOR_SUFFIXES + RASTER_SUFFIXES)
    if len(hits) > 1:
        log.warning("several files for epoch %d in %s; using %s", epoch, folder, hits[0].name)
    return hits[0] if hits else None


def batch_score(manifest: str | os.PathLike, submissions_root: str | os.PathLike, epochs: int = 1, *,
                run_file: str | os.PathLike | None = None, settings: Settings | None = None,
                workers: int = 1) -> BatchResult:
    """Score every (submitter, apartment, epoch) file that exists.

    Records come back (and are appended to ``run_file``) ordered by
    submitter, apartment, epoch. Missing files are listed in ``skipped``;
    broken truth files in ``errors``.
    """
    settings = settings or Settings()
    entries = sorted(load_manifest(manifest), key=lambda e: e.apartment_id)
    root = Path(submissions_root)
    if not root.is_dir():
        raise FileNotFoundError(f"submissions root not found: {root}")
    result = BatchResult()

    truths: dict[str, FloorPlanIR] = {}
    for e in entries:
        try:
            truths[e.apartment_id] = extract_truth(e.truth, settings)
        except TruthError as exc:
            result.errors.append(f"{e.apartment_id}: {exc}")

    jobs = []
    for submitter in sorted(p.name for p in root.iterdir() if p.is_dir()):
        for e in entries:
            if e.apartment_id not in truths:
                continue
            for epoch in range(epochs):
                f = _find_epoch_file(root / submitter / e.apartment_id, epoch)
                if f is None:
                    result.skipped.append(f"{submitter}/{e.apartment_id}/{epoch}: no submission file")
                else:
                    jobs.append((f, e.apartment_id, submitter, epoch))

    def run(job):
        f, apt, sub, epoch = job
        return score_submission(f, truths[apt], apartment=apt, submitter=sub, epoch=epoch, settings=settings)

    out = open(run_file, "a", encoding="utf-8") if run_file is not None else None
    try:
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            for record in pool.map(run, jobs):
                result.records.append(record)
                if out is not None:
                    out.write(record.to_json() + "\n")
                    out.flush()
    finally:
        if out is not None:
            out.close()
    return result


def read_run_file(path: str | os.PathLike) -> Iterator[ResultRecord]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield ResultRecord.from_dict(json.loads(line))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise RunFileError(f"{path}:{lineno}: bad record: {exc}") from exc


def aggregate(records: str | os.PathLike | Iterable[ResultRecord]) -> list[LeaderboardRow]:
    """Per-submitter mean and sample standard deviation of the composite score."""
    if isinstance(records, (str, os.PathLike)):
        records = read_run_file(records)
    groups: dict[str, list[ResultRecord]] = {}
    for r in records:
        groups.setdefault(r.submitter, []).append(r)
    rows = []
    for submitter, recs in groups.items():
        scores = [r.composite for r in recs]
        rows.append(LeaderboardRow(
            submitter=submitter,
            mean=math.fsum(scores) / len(scores),
            std=statistics.stdev(scores) if len(scores) > 1 else 0.0,
            component_means={c: math.fsum(getattr(r.breakdown, c) for r in recs) / len(recs)
                             for c in COMPONENTS},
            count=len(recs),
        ))
    rows.sort(key=lambda r: (-r.mean, r.submitter))
    return rows


def format_leaderboard(rows: list[LeaderboardRow]) -> str:
    header = ["rank", "submitter", "mean", "std", "n", *COMPONENTS]
    body = [
        [str(i), r.submitter, f"{r.mean:.4f}", f"{r.std:.4f}", str(r.count),
         *(f"{r.component_means[c]:.4f}" for c in COMPONENTS)]
        for i, r in enumerate(rows, start=1)
    ]
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    return "\n".join(fmt.format(*row).rstrip() for row in [header] + body)
