"""Ranging noise and the historical measurement table.

Path lengths come from fine-timing ranging, modeled as the true length
plus Gaussian noise.  Every sensed path is logged in a bounded table;
when a new path needs a partner for localization, the table is queried
for the strongest historical record that is not collinear with the
current one in the working plane, falling back to a separately kept
first-path record.  Tables serialize to a line-per-record text format
that round-trips exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geom import (
    DegenerateProjection,
    PathObservation,
    ProjectionPlane,
    SphericalAngles,
    classify_scene,
    clockwise_angle,
    direction_from_angles,
    project,
)

#: Angular tolerance under which two observations count as "the same"
#: path for selection purposes (guaranteed-unsolvable pairing).
EPS_COLLINEAR = 1e-6

#: Lower clamp for noisy distances, meters.
MIN_DISTANCE = 1e-9

DEFAULT_CAPACITY = 32

_TAGS = ("current", "historical", "first-path")


class NoUsableHistory(Exception):
    """The table offers no record that could pair with the current path."""


@dataclass(frozen=True)
class FtmConfig:
    """Ranging noise model: zero-mean Gaussian with std sigma_ftm meters."""

    sigma_ftm: float

    def __post_init__(self) -> None:
        if self.sigma_ftm < 0.0:
            raise ValueError(f"sigma_ftm must be >= 0, got {self.sigma_ftm}")


def ftm_distance(true_length: float, cfg: FtmConfig, rng: np.random.Generator) -> float:
    """One noisy range measurement, clamped positive."""
    if not true_length > 0.0:
        raise ValueError(f"true_length must be > 0, got {true_length}")
    noisy = true_length + cfg.sigma_ftm * float(rng.standard_normal())
    return max(noisy, MIN_DISTANCE)


@dataclass(frozen=True)
class MeasurementRecord:
    observation: PathObservation
    tag: str

    def __post_init__(self) -> None:
        if self.tag not in _TAGS:
            raise ValueError(f"tag must be one of {_TAGS}, got {self.tag!r}")


class MeasurementTable:
    """Bounded log of past path observations plus one first-path slot.

    Historical records keep insertion order, timestamps strictly
    increasing; when full, the oldest record is evicted.  The first-path
    record is stored aside and never counts against capacity.
    """

    def __init__(self, capacity: int = DEFAULT_CAPACITY) -> None:
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.records: list[MeasurementRecord] = []
        self.first_path: MeasurementRecord | None = None

    def add(self, obs: PathObservation, tag: str = "historical") -> None:
        if self.records and obs.timestamp <= self.records[-1].observation.timestamp:
            raise ValueError(
                f"timestamp {obs.timestamp} not after latest {self.records[-1].observation.timestamp}"
            )
        self.records.append(MeasurementRecord(obs, tag))
        if len(self.records) > self.capacity:
            del self.records[0]

    def __len__(self) -> int:
        return len(self.records)


def record_first_path(table: MeasurementTable, obs: PathObservation) -> None:
    """Store the shortest-ToF path aside, replacing any previous one."""
    table.first_path = MeasurementRecord(obs, "first-path")


def _pairs_with_scene_zero(
    plane: ProjectionPlane,
    cur_aod: np.ndarray,
    cur_aoa: np.ndarray,
    cand: PathObservation,
    eps_col: float,
) -> bool:
    """True when pairing current with cand is guaranteed unsolvable."""
    try:
        cand_aod = project(plane, direction_from_angles(cand.aod))
        cand_aoa = project(plane, direction_from_angles(cand.aoa))
    except DegenerateProjection:
        return True  # unusable in this plane
    aod_pair = clockwise_angle(plane, cur_aod, cand_aod)
    aoa_pair = clockwise_angle(plane, cur_aoa, cand_aoa)
    cross = clockwise_angle(plane, cur_aod, cur_aoa)
    return classify_scene(aod_pair, aoa_pair, cross, eps_col).code == 0


def select_historical(
    table: MeasurementTable,
    current: PathObservation,
    k: int,
    plane: ProjectionPlane | None = None,
    eps_col: float = EPS_COLLINEAR,
) -> list[PathObservation]:
    """Up to k historical partners for the current path, best SNR first.

    Records whose projected directions are within eps_col of collinear
    with the current path on both the departure and arrival side are
    skipped: that pairing cannot be solved.  Ties in SNR go to the
    newer record.  When nothing qualifies the first-path record is
    returned instead; NoUsableHistory means not even that exists.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if plane is None:
        plane = ProjectionPlane.from_name("yoz")
    try:
        cur_aod = project(plane, direction_from_angles(current.aod))
        cur_aoa = project(plane, direction_from_angles(current.aoa))
    except DegenerateProjection as exc:
        if table.first_path is not None:
            return [table.first_path.observation]
        raise NoUsableHistory("current observation does not project onto the plane") from exc

    usable = [
        rec.observation
        for rec in table.records
        if not _pairs_with_scene_zero(plane, cur_aod, cur_aoa, rec.observation, eps_col)
    ]
    usable.sort(key=lambda o: (-o.snr_db, -o.timestamp))
    if usable:
        return usable[:k]
    if table.first_path is not None:
        return [table.first_path.observation]
    raise NoUsableHistory("no historical record pairs with the current path")


def format_record(rec: MeasurementRecord) -> str:
    """One-line text form; floats use repr for exact round-trips."""
    o = rec.observation
    fields = (
        repr(o.timestamp),
        repr(o.aod.azimuth),
        repr(o.aod.elevation),
        repr(o.aoa.azimuth),
        repr(o.aoa.elevation),
        repr(o.path_length),
        repr(o.snr_db),
        rec.tag,
    )
    return ",".join(fields)


def parse_record(line: str) -> MeasurementRecord:
    parts = line.strip().split(",")
    if len(parts) != 8:
        raise ValueError(f"expected 8 comma-separated fields, got {len(parts)}: {line!r}")
    ts, phi_t, theta_t, phi_r, theta_r, c, snr, tag = parts
    obs = PathObservation(
        aod=SphericalAngles(float(phi_t), float(theta_t)),
        aoa=SphericalAngles(float(phi_r), float(theta_r)),
        path_length=float(c),
        snr_db=float(snr),
        timestamp=int(ts),
    )
    return MeasurementRecord(obs, tag)


def serialize_table(table: MeasurementTable) -> str:
    lines = [format_record(rec) for rec in table.records]
    if table.first_path is not None:
        lines.append(format_record(table.first_path))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_table(text: str, capacity: int = DEFAULT_CAPACITY) -> MeasurementTable:
    """Rebuild a table from its serialized form.

    Lines tagged first-path land in the side slot; 'current' records are
    stored like historical ones, and callers usually pull them back out.
    See parse_records for raw access.
    """
    table = MeasurementTable(capacity)
    for rec in parse_records(text):
        if rec.tag == "first-path":
            table.first_path = rec
        else:
            table.records.append(rec)
            if len(table.records) > table.capacity:
                del table.records[0]
    return table


def parse_records(text: str) -> list[MeasurementRecord]:
    records = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        records.append(parse_record(line))
    return records
