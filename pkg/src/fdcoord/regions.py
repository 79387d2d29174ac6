"""Spatially isolated region pairs and their mitigation factors.

The extraction pipeline over a radio map:

1. threshold the grid and collect 4-connected components (obstructions),
2. lay bands of width ``d`` flush against the four sides of each obstruction
   bounding box and pair opposing bands (optionally bisected into halves),
3. sample attenuation between paired regions on a lattice and keep the
   minimum as the pair's mitigation factor ``alpha``,
4. admit pairs whose ``alpha`` clears the admission threshold and store them,
   indexed in discovery order, together with extraction provenance.

Pairs that fail the admission threshold are dropped rather than reshaped.

Database file format (plain text, values quantized to 0.01):

    # isolation-regions database v1
    map_id <identifier>
    detection_threshold_db <v>
    band_width_m <v>
    admission_threshold_db <v>
    sampling_step_m <v>
    split_count <1|2>
    pairs <K>
    pair 1
    alpha_db <v>
    region_a <x_min> <x_max> <y_min> <y_max>
    region_b <x_min> <x_max> <y_min> <y_max>
    pair 2
    ...
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage

from .geometry import Position, Rect, segment_intersects_rect
from .propagation import ue_ue_pathloss
from .radio_map import RadioMap, _q2

# A region is an axis-aligned rectangle; membership uses closed edges.
Region = Rect

# Attenuation oracle: mu(p_a, p_b) in dB, total over the sampled positions.
AttenuationOracle = Callable[[Position, Position], float]

_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])

DB_HEADER = "# isolation-regions database v1"


class DatabaseFormatError(ValueError):
    """Raised when a database file violates the schema."""


class ExtractionError(ValueError):
    """Raised for invalid extraction inputs (geometry or parameters)."""


@dataclass(frozen=True)
class ExtractionParams:
    """Tunables of the extraction pipeline.

    ``band_width_m`` is the depth of the region bands around an obstruction;
    ``split_count`` of 2 bisects each band along the obstruction face and
    pairs matching halves, giving up to four pairs per obstruction.
    """

    detection_threshold_db: float = 120.0
    band_width_m: float = 100.0
    admission_threshold_db: float = 100.0
    sampling_step_m: float = 50.0
    split_count: int = 2

    def __post_init__(self) -> None:
        if not math.isfinite(self.detection_threshold_db):
            raise ValueError("detection threshold must be finite")
        for name in ("band_width_m", "admission_threshold_db", "sampling_step_m"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.sampling_step_m > self.band_width_m:
            raise ValueError("sampling step must not exceed the band width")
        if self.split_count not in (1, 2):
            raise ValueError(f"split_count must be 1 or 2, got {self.split_count}")


@dataclass(frozen=True)
class Obstruction:
    """A 4-connected set of high-loss pixels with its bounding rectangle."""

    pixels: frozenset[tuple[int, int]]  # (col, row) indices
    bounds: Rect

    def __post_init__(self) -> None:
        if not self.pixels:
            raise ValueError("obstruction pixel set must be non-empty")


@dataclass(frozen=True)
class RegionPair:
    """Pair (A_k, B_k) with mitigation factor alpha (dB, None until computed).

    Coordinates and alpha are quantized to 0.01 so database round-trips are
    exact.
    """

    index: int
    region_a: Region
    region_b: Region
    alpha_db: float | None = None

    def __post_init__(self) -> None:
        if self.region_a.area <= 0 or self.region_b.area <= 0:
            raise ValueError("regions must have positive area")
        if self.region_a.overlaps(self.region_b):
            raise ValueError(f"pair {self.index}: regions A and B overlap")
        object.__setattr__(self, "region_a", _q2_rect(self.region_a))
        object.__setattr__(self, "region_b", _q2_rect(self.region_b))
        if self.alpha_db is not None:
            object.__setattr__(self, "alpha_db", _q2(self.alpha_db))

    def separates(self, pos_a: Position, pos_b: Position) -> bool:
        """True when the positions straddle the pair in either orientation."""
        return (self.region_a.contains(pos_a) and self.region_b.contains(pos_b)) or (
            self.region_b.contains(pos_a) and self.region_a.contains(pos_b)
        )


def _q2_rect(rect: Rect) -> Rect:
    return Rect(_q2(rect.x_min), _q2(rect.x_max), _q2(rect.y_min), _q2(rect.y_max))


@dataclass(frozen=True)
class IsolationDatabase:
    """Ordered region pairs plus provenance of the extraction that built them."""

    pairs: tuple[RegionPair, ...]
    map_id: str
    params: ExtractionParams

    def __post_init__(self) -> None:
        indices = [p.index for p in self.pairs]
        if indices != list(range(1, len(self.pairs) + 1)):
            raise ValueError(f"pair indices must be 1..K in order, got {indices}")
        for p in self.pairs:
            if p.alpha_db is None:
                raise ValueError(f"pair {p.index}: alpha is unset")
            if p.alpha_db < self.params.admission_threshold_db:
                raise ValueError(
                    f"pair {p.index}: alpha {p.alpha_db} below admission threshold "
                    f"{self.params.admission_threshold_db}"
                )

    def __len__(self) -> int:
        return len(self.pairs)

    def side_of(self, pos: Position) -> tuple[int, str] | None:
        """(k, 'A'|'B') of the first pair containing ``pos``, else None.

        Regions are closed rectangles; a position on a shared boundary goes to
        the first matching pair in index order, side A before B.
        """
        for pair in self.pairs:
            if pair.region_a.contains(pos):
                return pair.index, "A"
            if pair.region_b.contains(pos):
                return pair.index, "B"
        return None

    def alpha_floor(self, pos_a: Position, pos_b: Position) -> float | None:
        """Largest alpha of any pair separating the two positions, else None."""
        best: float | None = None
        for pair in self.pairs:
            if pair.separates(pos_a, pos_b):
                if best is None or pair.alpha_db > best:
                    best = pair.alpha_db
        return best


def detect_obstructions(radio_map: RadioMap, threshold_db: float) -> list[Obstruction]:
    """All maximal 4-connected components of pixels with loss >= threshold.

    Components are returned in a deterministic order (south-west first). An
    empty list is a valid result.
    """
    if not math.isfinite(threshold_db):
        raise ValueError("detection threshold must be finite")
    mask = radio_map.pathloss >= threshold_db
    labels, count = ndimage.label(mask, structure=_FOUR_CONNECTED)
    obstructions = []
    for lbl in range(1, count + 1):
        rows, cols = np.nonzero(labels == lbl)
        pixels = frozenset((int(c), int(r)) for r, c in zip(rows, cols))
        bounds = Rect(
            radio_map.origin.x + int(cols.min()) * radio_map.pixel_size,
            radio_map.origin.x + (int(cols.max()) + 1) * radio_map.pixel_size,
            radio_map.origin.y + int(rows.min()) * radio_map.pixel_size,
            radio_map.origin.y + (int(rows.max()) + 1) * radio_map.pixel_size,
        )
        obstructions.append(Obstruction(pixels=pixels, bounds=bounds))
    obstructions.sort(key=lambda o: (o.bounds.y_min, o.bounds.x_min))
    return obstructions


def _split_band(band: Rect, axis: str) -> list[Rect]:
    if axis == "x":
        mid = 0.5 * (band.x_min + band.x_max)
        return [Rect(band.x_min, mid, band.y_min, band.y_max),
                Rect(mid, band.x_max, band.y_min, band.y_max)]
    mid = 0.5 * (band.y_min + band.y_max)
    return [Rect(band.x_min, band.x_max, band.y_min, mid),
            Rect(band.x_min, band.x_max, mid, band.y_max)]


def build_region_pairs(
    obstruction: Obstruction, params: ExtractionParams, radio_map: RadioMap
) -> list[RegionPair]:
    """Candidate pairs around one obstruction, alpha unset.

    Bands of width ``d`` sit flush against the four bounding-box sides,
    clipped to the map. Opposing bands form the (north, south) and
    (east, west) pairs; with ``split_count == 2`` each band is bisected along
    the axis parallel to its obstruction face and matching halves are paired.
    A band clipped to zero area drops its pair entirely.
    """
    box = obstruction.bounds
    area = radio_map.bounds
    if box.clip_to(area) is None or not (
        area.x_min <= box.x_min
        and box.x_max <= area.x_max
        and area.y_min <= box.y_min
        and box.y_max <= area.y_max
    ):
        raise ExtractionError(f"obstruction bounding box {box} outside map bounds {area}")

    d = params.band_width_m
    north = Rect(box.x_min, box.x_max, box.y_max, box.y_max + d).clip_to(area)
    south = Rect(box.x_min, box.x_max, box.y_min - d, box.y_min).clip_to(area)
    east = Rect(box.x_max, box.x_max + d, box.y_min, box.y_max).clip_to(area)
    west = Rect(box.x_min - d, box.x_min, box.y_min, box.y_max).clip_to(area)

    pairs: list[RegionPair] = []
    for side_a, side_b, axis in ((north, south, "x"), (east, west, "y")):
        if side_a is None or side_b is None:
            continue
        if params.split_count == 1:
            pairs.append(RegionPair(index=0, region_a=side_a, region_b=side_b))
        else:
            for half_a, half_b in zip(_split_band(side_a, axis), _split_band(side_b, axis)):
                pairs.append(RegionPair(index=0, region_a=half_a, region_b=half_b))
    return pairs


def _lattice(region: Region, step: float) -> list[Position]:
    """Square lattice of spacing ``step`` inside the region, corners included."""
    if region.area <= 0:
        raise ExtractionError(f"region {region} too small to sample")

    def axis_points(lo: float, hi: float) -> list[float]:
        pts = []
        v = lo
        while v < hi - 1e-9:
            pts.append(v)
            v += step
        pts.append(hi)
        return pts

    return [
        Position(x, y)
        for x in axis_points(region.x_min, region.x_max)
        for y in axis_points(region.y_min, region.y_max)
    ]


def compute_mitigation_factor(
    pair: RegionPair, attenuation: AttenuationOracle, step_m: float
) -> float:
    """Minimum sampled attenuation between the pair's regions, in dB.

    Positions are drawn on a square lattice of spacing ``step_m`` in each
    region (corners always included); the oracle is evaluated for every
    cross-region pair of samples. Halving the step refines the same lattice,
    so a finer step can only lower the result.
    """
    if step_m <= 0:
        raise ValueError("sampling step must be positive")
    samples_a = _lattice(pair.region_a, step_m)
    samples_b = _lattice(pair.region_b, step_m)
    return min(attenuation(pa, pb) for pa in samples_a for pb in samples_b)


def distance_model_oracle(f_mhz: float) -> AttenuationOracle:
    """Attenuation oracle backed by the UE-UE distance model alone."""

    def oracle(pos_a: Position, pos_b: Position) -> float:
        return ue_ue_pathloss(pos_a.distance_to(pos_b) / 1000.0, f_mhz)

    return oracle


def crossing_floor_oracle(
    obstruction_rects: Sequence[Rect], floor_db: float, f_mhz: float
) -> AttenuationOracle:
    """Distance model with a guaranteed floor across obstructions.

    When the segment between the sampled positions touches any obstruction
    rectangle, the obstruction shields the path and the attenuation is at
    least ``floor_db``: the oracle returns max(model, floor). Elsewhere it is
    the plain distance model.
    """
    if floor_db <= 0:
        raise ValueError("isolation floor must be positive")
    rects = tuple(obstruction_rects)
    model = distance_model_oracle(f_mhz)

    def oracle(pos_a: Position, pos_b: Position) -> float:
        p = model(pos_a, pos_b)
        if any(segment_intersects_rect(pos_a, pos_b, rect) for rect in rects):
            return max(p, floor_db)
        return p

    return oracle


def build_database(
    radio_map: RadioMap,
    params: ExtractionParams,
    attenuation: AttenuationOracle,
    obstructions: list[Obstruction] | None = None,
) -> IsolationDatabase:
    """Run the full extraction and return the admitted pairs.

    ``obstructions`` may be supplied to skip detection (the result is the
    same set of pairs regardless of obstruction processing order, up to
    re-indexing). Pairs whose alpha misses the admission threshold are
    rejected outright.
    """
    if obstructions is None:
        obstructions = detect_obstructions(radio_map, params.detection_threshold_db)

    admitted: list[RegionPair] = []
    for obstruction in obstructions:
        for candidate in build_region_pairs(obstruction, params, radio_map):
            alpha = compute_mitigation_factor(candidate, attenuation, params.sampling_step_m)
            if alpha >= params.admission_threshold_db:
                admitted.append(replace(candidate, index=len(admitted) + 1, alpha_db=alpha))
    return IsolationDatabase(pairs=tuple(admitted), map_id=radio_map.content_id(), params=params)


def save_database(db: IsolationDatabase, path) -> None:
    lines = [
        DB_HEADER,
        f"map_id {db.map_id}",
        f"detection_threshold_db {db.params.detection_threshold_db:.2f}",
        f"band_width_m {db.params.band_width_m:.2f}",
        f"admission_threshold_db {db.params.admission_threshold_db:.2f}",
        f"sampling_step_m {db.params.sampling_step_m:.2f}",
        f"split_count {db.params.split_count}",
        f"pairs {len(db.pairs)}",
    ]
    for pair in db.pairs:
        lines.append(f"pair {pair.index}")
        lines.append(f"alpha_db {pair.alpha_db:.2f}")
        for tag, region in (("region_a", pair.region_a), ("region_b", pair.region_b)):
            lines.append(
                f"{tag} {region.x_min:.2f} {region.x_max:.2f} {region.y_min:.2f} {region.y_max:.2f}"
            )
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def _expect_field(lines: list[str], pos: int, key: str, context: str) -> list[str]:
    if pos >= len(lines):
        raise DatabaseFormatError(f"{context}: missing {key}")
    tokens = lines[pos].split()
    if not tokens or tokens[0] != key:
        raise DatabaseFormatError(f"{context}: missing {key} (found {lines[pos]!r})")
    return tokens[1:]


def _parse_float_field(lines: list[str], pos: int, key: str, context: str) -> float:
    values = _expect_field(lines, pos, key, context)
    if len(values) != 1:
        raise DatabaseFormatError(f"{context}: {key} expects one value")
    try:
        return float(values[0])
    except ValueError:
        raise DatabaseFormatError(f"{context}: non-numeric {key} value {values[0]!r}") from None


def _parse_rect_field(lines: list[str], pos: int, key: str, context: str) -> Rect:
    values = _expect_field(lines, pos, key, context)
    if len(values) != 4:
        raise DatabaseFormatError(f"{context}: {key} expects 'x_min x_max y_min y_max'")
    try:
        nums = [float(v) for v in values]
    except ValueError:
        raise DatabaseFormatError(f"{context}: non-numeric {key} values") from None
    try:
        return Rect(*nums)
    except ValueError as exc:
        raise DatabaseFormatError(f"{context}: invalid {key}: {exc}") from None


def load_database(path) -> IsolationDatabase:
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip() != ""]
    if not lines or not lines[0].startswith("#"):
        raise DatabaseFormatError("missing database header comment")

    body = lines[1:]
    map_tokens = _expect_field(body, 0, "map_id", "header")
    if len(map_tokens) != 1:
        raise DatabaseFormatError("header: map_id expects one value")
    map_id = map_tokens[0]
    detection = _parse_float_field(body, 1, "detection_threshold_db", "header")
    band_width = _parse_float_field(body, 2, "band_width_m", "header")
    admission = _parse_float_field(body, 3, "admission_threshold_db", "header")
    step = _parse_float_field(body, 4, "sampling_step_m", "header")
    split_tokens = _expect_field(body, 5, "split_count", "header")
    pair_tokens = _expect_field(body, 6, "pairs", "header")
    try:
        split_count = int(split_tokens[0])
        n_pairs = int(pair_tokens[0])
    except (ValueError, IndexError):
        raise DatabaseFormatError("header: split_count and pairs must be integers") from None

    params = ExtractionParams(
        detection_threshold_db=detection,
        band_width_m=band_width,
        admission_threshold_db=admission,
        sampling_step_m=step,
        split_count=split_count,
    )

    pairs: list[RegionPair] = []
    pos = 7
    for k in range(1, n_pairs + 1):
        context = f"pair {k}"
        idx_tokens = _expect_field(body, pos, "pair", context)
        if len(idx_tokens) != 1 or idx_tokens[0] != str(k):
            raise DatabaseFormatError(f"{context}: expected 'pair {k}', found {body[pos]!r}")
        alpha = _parse_float_field(body, pos + 1, "alpha_db", context)
        region_a = _parse_rect_field(body, pos + 2, "region_a", context)
        region_b = _parse_rect_field(body, pos + 3, "region_b", context)
        try:
            pairs.append(RegionPair(index=k, region_a=region_a, region_b=region_b, alpha_db=alpha))
        except ValueError as exc:
            raise DatabaseFormatError(f"{context}: {exc}") from None
        pos += 4
    if pos != len(body):
        raise DatabaseFormatError(f"unexpected trailing content at line {pos + 2}")

    try:
        return IsolationDatabase(pairs=tuple(pairs), map_id=map_id, params=params)
    except ValueError as exc:
        raise DatabaseFormatError(str(exc)) from None
