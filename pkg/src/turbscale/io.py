"""Reading and writing ESS point files, velocity signals, reports and plot data.

ESS point files are CSV with header ``label,re,x,y`` and an optional fifth
column ``r`` (the separation each point came from, when known). ``x`` is
log10 |D_LLL|, ``y`` is log10 D_LL, ``re`` may be blank. Lines starting with
``#`` are comments.

Signal files start with ``# spacing=<metres>`` followed by one sample per
line.

Numbers are written with 17 significant digits so that every double
survives a write/read cycle unchanged.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import re as _re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DomainError, ParseError
from .ess import TWO_THIRDS, EssPointSet, SlopeProfile
from .synth import VelocitySignal

PathLike = Union[str, Path]

ESS_HEADER = ["label", "re", "x", "y"]
ESS_HEADER_WITH_R = ESS_HEADER + ["r"]


def fmt(value: float) -> str:
    return format(float(value), ".17g")


@dataclass
class ExperimentRecord:
    """One experiment read from disk: its points, or a pointer to its signal."""

    label: str
    re: Optional[float] = None
    points: Optional[EssPointSet] = None
    signal_path: Optional[str] = None
    provenance: str = ""

    def __post_init__(self):
        if not self.label:
            raise DomainError("experiment label must be non-empty")
        if self.re is not None and not self.re > 1:
            raise DomainError(f"Re of {self.label!r} must exceed 1, got {self.re}")


def file_digest(path: PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return "sha256:" + h.hexdigest()


def _number(text: str, column: str, path, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"column {column!r}: {text!r} is not a number", path, line) from None
    if not math.isfinite(value):
        raise ParseError(f"column {column!r}: non-finite value {text!r}", path, line)
    return value


def read_ess_csv(path: PathLike) -> list[ExperimentRecord]:
    """Read digitized ESS points, one record per distinct label, in file order."""
    path = Path(path)
    header = None
    rows: dict[str, dict] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = [f.strip() for f in next(csv.reader([stripped]))]
            if header is None:
                if fields not in (ESS_HEADER, ESS_HEADER_WITH_R):
                    raise ParseError(f"expected header 'label,re,x,y[,r]', got {stripped!r}", path, lineno)
                header = fields
                continue
            if len(fields) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(fields)}", path, lineno)
            label = fields[0]
            if not label:
                raise ParseError("empty label", path, lineno)
            re_value = None
            if fields[1]:
                re_value = _number(fields[1], "re", path, lineno)
                if not re_value > 1:
                    raise ParseError(f"Re must exceed 1, got {fields[1]!r}", path, lineno)
            x = _number(fields[2], "x", path, lineno)
            y = _number(fields[3], "y", path, lineno)
            r = None
            if len(header) == 5:
                r = _number(fields[4], "r", path, lineno)
                if not r > 0:
                    raise ParseError(f"separation must be positive, got {fields[4]!r}", path, lineno)
            entry = rows.setdefault(label, {"re": re_value, "x": [], "y": [], "r": [], "line": lineno})
            if entry["re"] != re_value:
                raise ParseError(f"label {label!r} has conflicting Re values", path, lineno)
            entry["x"].append(x)
            entry["y"].append(y)
            entry["r"].append(r)
    if header is None:
        raise ParseError("file is empty", path)
    if not rows:
        raise ParseError("file has a header but no data rows", path)

    records = []
    for label, entry in rows.items():
        if len(entry["x"]) < 2:
            raise ParseError(f"experiment {label!r} has fewer than 2 points", path, entry["line"])
        sep = entry["r"] if len(header) == 5 else None
        pts = EssPointSet.from_points(entry["x"], entry["y"], label=label, re_tag=entry["re"],
                                      separations=sep)
        records.append(ExperimentRecord(label, entry["re"], pts, provenance=str(path)))
    return records


def write_ess_csv(sets: Sequence[EssPointSet], path: PathLike, re_override: Optional[dict] = None) -> None:
    """Write point sets in the ESS CSV format.

    ``re_override`` maps labels to the Re to write (``None`` for blank),
    for data whose Re is meant to be hidden, like the grid experiment.
    """
    if not sets:
        raise DomainError("no point sets to write")
    with_r = all(s.separations is not None for s in sets)
    lines = [",".join(ESS_HEADER_WITH_R if with_r else ESS_HEADER)]
    for s in sets:
        re_value = s.re_tag
        if re_override and s.label in re_override:
            re_value = re_override[s.label]
        re_text = "" if re_value is None else fmt(re_value)
        for i in range(len(s)):
            row = [s.label, re_text, fmt(s.x[i]), fmt(s.y[i])]
            if with_r:
                row.append(fmt(s.separations[i]))
            lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_signal(path: PathLike) -> VelocitySignal:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        m = _re.fullmatch(r"#\s*spacing\s*=\s*(\S+)\s*", first)
        if m is None:
            raise ParseError("missing '# spacing=<metres>' header", path, 1)
        spacing = _number(m.group(1), "spacing", path, 1)
        if not spacing > 0:
            raise ParseError(f"spacing must be positive, got {m.group(1)!r}", path, 1)
        samples = []
        for lineno, line in enumerate(fh, start=2):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            samples.append(_number(text, "sample", path, lineno))
    if len(samples) < 2:
        raise ParseError(f"need at least 2 samples, got {len(samples)}", path)
    return VelocitySignal(np.array(samples), spacing, label=path.stem)


def write_signal(signal: VelocitySignal, path: PathLike) -> None:
    body = "\n".join(fmt(v) for v in signal.samples)
    Path(path).write_text(f"# spacing={fmt(signal.spacing)}\n{body}\n", encoding="utf-8")


def write_report(report: dict, path: PathLike) -> None:
    """Write an analysis report as JSON.

    Python's float repr is the shortest string that reads back to the same
    double, so numbers round-trip exactly.
    """
    text = json.dumps(report, indent=2, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def read_report(path: PathLike) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _safe_name(label: str) -> str:
    return _re.sub(r"[^A-Za-z0-9._-]+", "_", label) or "unnamed"


def overlay_offsets(sets: Sequence[EssPointSet]) -> tuple[float, float]:
    """Offsets putting the 2/3 and 0.7 reference lines through the pooled centroid."""
    x = np.concatenate([s.x for s in sets])
    y = np.concatenate([s.y for s in sets])
    xm, ym = float(x.mean()), float(y.mean())
    return ym - TWO_THIRDS * xm, ym - 0.7 * xm


def emit_plot_data(sets: Sequence[EssPointSet], profiles: Sequence[SlopeProfile], prefix: PathLike,
                   a1: Optional[float] = None, a2: Optional[float] = None) -> list[Path]:
    """Write per-experiment points and local slopes, plus the reference lines.

    Produces ``<prefix><label>_points.csv``, ``<prefix><label>_slopes.csv``
    for each set and one ``<prefix>overlay.csv`` holding ``y = (2/3) x + a1``
    and ``y = 0.7 x + a2`` over the pooled x range.
    """
    if not sets:
        raise DomainError("no experiments to emit")
    if len(profiles) != len(sets):
        raise DomainError(f"{len(profiles)} slope profiles for {len(sets)} point sets")
    d1, d2 = overlay_offsets(sets)
    a1 = d1 if a1 is None else a1
    a2 = d2 if a2 is None else a2

    prefix = str(prefix)
    files: dict[Path, str] = {}
    for s, prof in zip(sets, profiles):
        name = _safe_name(s.label)
        pts = ["x,y"] + [f"{fmt(x)},{fmt(y)}" for x, y in zip(s.x, s.y)]
        slopes = ["x,local_slope"] + [f"{fmt(x)},{fmt(v)}" for x, v in zip(prof.x, prof.slopes)]
        files[Path(f"{prefix}{name}_points.csv")] = "\n".join(pts) + "\n"
        files[Path(f"{prefix}{name}_slopes.csv")] = "\n".join(slopes) + "\n"
    lo = min(float(s.x[0]) for s in sets)
    hi = max(float(s.x[-1]) for s in sets)
    overlay = ["x,y_two_thirds,y_point_seven"]
    for x in np.linspace(lo, hi, 21):
        overlay.append(f"{fmt(x)},{fmt(TWO_THIRDS * x + a1)},{fmt(0.7 * x + a2)}")
    files[Path(f"{prefix}overlay.csv")] = f"# a1={fmt(a1)} a2={fmt(a2)}\n" + "\n".join(overlay) + "\n"

    for target, text in files.items():
        target.write_text(text, encoding="utf-8")
    return list(files)
