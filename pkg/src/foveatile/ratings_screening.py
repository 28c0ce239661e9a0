"""Outlier screening and aggregation of per-zone JND ratings.

A record is rejected when it lies more than two standard deviations from
the mean of its (image, zone, measure) group.  Any subject rejected on two or
more distinct images loses every record.  By default the deviation is the
population one, the comparison strict, and screening runs a single pass.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass
from pathlib import Path

from .vision_models import VisionZone

MEASURES = ("q", "s")


@dataclass(frozen=True)
class RatingRecord:
    subject_id: str
    image_id: str
    zone: VisionZone
    measure: str
    value: float

    @property
    def group(self):
        return self.image_id, self.zone, self.measure


@dataclass(frozen=True)
class Exclusion:
    record: RatingRecord
    reason: str  # "outlier" or "subject"


def _std(values, sample: bool) -> float:
    return statistics.stdev(values) if sample else statistics.pstdev(values)


def _groups(records):
    groups: dict = {}
    for r in records:
        groups.setdefault(r.group, []).append(r)
    return groups


def _outliers(records, k: float, sample: bool, require_pairs: bool = True) -> set:
    flagged = set()
    for key, members in _groups(records).items():
        if len(members) < 2:
            if not require_pairs:
                continue
            raise ValueError(f"group {key} needs at least 2 records to screen, has {len(members)}")
        vals = [m.value for m in members]
        # exact-sum mean: fmean can sit an ulp off a constant group whose sigma is 0
        mu, sigma = statistics.mean(vals), _std(vals, sample)
        flagged.update(m for m in members if abs(m.value - mu) > k * sigma)
    return flagged


def validate(records) -> None:
    seen = set()
    for r in records:
        if not r.value > 0:
            raise ValueError(f"rating value must be positive: {r}")
        if r.measure not in MEASURES:
            raise ValueError(f"measure must be q or s: {r}")
        key = (r.subject_id, r.image_id, r.zone, r.measure)
        if key in seen:
            raise ValueError(f"duplicate rating {key}")
        seen.add(key)


def screen(records, k: float = 2.0, sample_std: bool = False, iterate: bool = False,
           min_images: int = 2):
    """Return ``(clean, exclusions)``; exclusions keep their reason and input order."""
    records = list(records)
    if not records:
        raise ValueError("no ratings to screen")
    validate(records)
    clean, excluded = records, []
    first = True
    while True:
        flagged = _outliers(clean, k, sample_std, require_pairs=first)
        first = False
        bad_images: dict = {}
        for r in flagged:
            bad_images.setdefault(r.subject_id, set()).add(r.image_id)
        dropped = {s for s, imgs in bad_images.items() if len(imgs) >= min_images}
        step_excl = []
        for r in clean:
            if r in flagged:
                step_excl.append(Exclusion(r, "outlier"))
            elif r.subject_id in dropped:
                step_excl.append(Exclusion(r, "subject"))
        gone = {e.record for e in step_excl}
        clean = [r for r in clean if r not in gone]
        excluded += step_excl
        if not iterate or not step_excl or not clean:
            break
    return clean, excluded


def aggregate(clean, expected_groups=None) -> dict:
    """Mean per (image, zone, measure); groups emptied by screening map to None."""
    out = {key: statistics.fmean(m.value for m in members) for key, members in _groups(clean).items()}
    for key in expected_groups or ():
        out.setdefault(key, None)
    return out


# -- CSV ------------------------------------------------------------------------

HEADER = ["subject", "image", "zone", "measure", "value"]


def parse_ratings(text: str) -> list:
    rows = list(csv.reader(io.StringIO(text)))
    if rows and [c.strip().lower() for c in rows[0]] == HEADER:
        rows = rows[1:]
    out = []
    for n, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) != 5:
            raise ValueError(f"ratings line {n}: expected 5 fields, got {len(row)}")
        subj, img, zone, measure, value = (c.strip() for c in row)
        out.append(RatingRecord(subj, img, VisionZone(zone.upper()), measure.lower(), float(value)))
    return out


def load_ratings(path) -> list:
    return parse_ratings(Path(path).read_text())


def records_csv(records) -> str:
    lines = [",".join(HEADER)]
    lines += [f"{r.subject_id},{r.image_id},{r.zone.value},{r.measure},{r.value!r}" for r in records]
    return "\n".join(lines) + "\n"


def exclusions_csv(excl) -> str:
    lines = [",".join(HEADER + ["reason"])]
    lines += [f"{e.record.subject_id},{e.record.image_id},{e.record.zone.value},{e.record.measure},"
              f"{e.record.value!r},{e.reason}" for e in excl]
    return "\n".join(lines) + "\n"


def aggregate_csv(agg: dict) -> str:
    lines = ["image,zone,measure,effective_value"]
    for (img, zone, measure), v in sorted(agg.items(), key=lambda kv: (kv[0][0], kv[0][1].value, kv[0][2])):
        lines.append(f"{img},{zone.value},{measure},{'' if v is None or math.isnan(v) else repr(float(v))}")
    return "\n".join(lines) + "\n"
