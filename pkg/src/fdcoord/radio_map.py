"""Radio maps: BS-to-position path-loss grids.

A radio map is a rectangular grid of path-loss samples (dB) between one base
station and the center of every pixel. Maps are stored in a plain-text format:

    origin_x origin_y          <- south-west corner of the map area (m)
    pixel_size                 <- square pixel edge (m)
    n_cols n_rows
    bs_x bs_y                  <- base-station position (m)
    <n_rows lines of n_cols whitespace-separated dB values, row 0 southernmost>

All numeric values carry at most two fractional digits; grids are quantized to
0.01 dB on construction so that save/load round-trips are exact.

Pixel lookup convention: a position on a shared pixel edge belongs to the
pixel with the larger column (then row) index; the outer east/north boundary
belongs to the outermost pixel. No interpolation between pixels.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Position, Rect

# Free-space reference constant for 32.45 + 20 log10(d_km) + 20 log10(f_MHz).
_FSPL_CONST = 32.45


class MapFormatError(ValueError):
    """Raised when a radio-map file violates the grid format."""


class MapBoundsError(ValueError):
    """Raised when a position falls outside the map area."""


def _q2(value: float) -> float:
    """Quantize to the 0.01 resolution used by the file format."""
    return round(float(value), 2)


@dataclass(frozen=True)
class RadioMap:
    """Immutable path-loss grid with geometry metadata.

    ``pathloss[row, col]`` is the BS-to-pixel-center loss in dB; row 0 is the
    southernmost row. All values are finite, non-negative, and quantized to
    0.01 dB.
    """

    origin: Position
    pixel_size: float
    n_cols: int
    n_rows: int
    pathloss: np.ndarray
    bs_position: Position

    def __post_init__(self) -> None:
        if self.pixel_size <= 0:
            raise ValueError(f"pixel size must be positive, got {self.pixel_size}")
        if self.n_cols <= 0 or self.n_rows <= 0:
            raise ValueError(f"grid dimensions must be positive, got {self.n_cols}x{self.n_rows}")
        grid = np.asarray(self.pathloss, dtype=float)
        if grid.shape != (self.n_rows, self.n_cols):
            raise ValueError(
                f"grid shape {grid.shape} does not match declared {self.n_rows}x{self.n_cols}"
            )
        if not np.all(np.isfinite(grid)):
            raise ValueError("path-loss grid contains non-finite values")
        grid = np.round(grid, 2)
        if np.any(grid < 0):
            raise ValueError("path-loss values must be >= 0 dB")
        grid.flags.writeable = False
        object.__setattr__(self, "pathloss", grid)
        object.__setattr__(self, "pixel_size", _q2(self.pixel_size))
        object.__setattr__(self, "origin", Position(_q2(self.origin.x), _q2(self.origin.y)))
        object.__setattr__(
            self, "bs_position", Position(_q2(self.bs_position.x), _q2(self.bs_position.y))
        )

    @property
    def bounds(self) -> Rect:
        return Rect(
            self.origin.x,
            self.origin.x + self.n_cols * self.pixel_size,
            self.origin.y,
            self.origin.y + self.n_rows * self.pixel_size,
        )

    def pixel_center(self, col: int, row: int) -> Position:
        return Position(
            self.origin.x + (col + 0.5) * self.pixel_size,
            self.origin.y + (row + 0.5) * self.pixel_size,
        )

    def pixel_rect(self, col: int, row: int) -> Rect:
        x0 = self.origin.x + col * self.pixel_size
        y0 = self.origin.y + row * self.pixel_size
        return Rect(x0, x0 + self.pixel_size, y0, y0 + self.pixel_size)

    def pixel_of(self, pos: Position) -> tuple[int, int]:
        """(col, row) of the pixel containing ``pos`` under the edge rule."""
        b = self.bounds
        if not b.contains(pos):
            raise MapBoundsError(f"position ({pos.x}, {pos.y}) outside map bounds {b}")
        col = int(math.floor((pos.x - self.origin.x) / self.pixel_size))
        row = int(math.floor((pos.y - self.origin.y) / self.pixel_size))
        # The outer east/north boundary has no larger-index neighbour.
        col = min(col, self.n_cols - 1)
        row = min(row, self.n_rows - 1)
        return col, row

    def pathloss_at(self, pos: Position) -> float:
        """Path loss (dB) of the pixel containing ``pos``."""
        col, row = self.pixel_of(pos)
        return float(self.pathloss[row, col])

    def content_id(self) -> str:
        """Short stable identifier of geometry and grid content."""
        digest = hashlib.sha256()
        digest.update(
            f"{self.origin.x},{self.origin.y},{self.pixel_size},{self.n_cols},{self.n_rows},"
            f"{self.bs_position.x},{self.bs_position.y}".encode()
        )
        digest.update(self.pathloss.tobytes())
        return f"{self.n_cols}x{self.n_rows}@{self.pixel_size:g}m-{digest.hexdigest()[:12]}"


@dataclass(frozen=True)
class ObstructionSpec:
    """A rectangular obstruction adding ``penetration_db`` to covered pixels."""

    rect: Rect
    penetration_db: float

    def __post_init__(self) -> None:
        if self.penetration_db <= 0:
            raise ValueError(f"penetration increment must be positive, got {self.penetration_db}")


@dataclass(frozen=True)
class SyntheticMapSpec:
    """Recipe for a synthetic radio map.

    The baseline is a free-space-form model ``32.45 + 10*n*log10(d_km) +
    20*log10(f_MHz)`` evaluated at ``reference_freq_mhz`` with exponent ``n``;
    every obstruction whose footprint covers a pixel center adds its
    penetration increment on top. Distances below 1 m evaluate at 1 m.
    """

    width_m: float
    height_m: float
    pixel_size_m: float
    bs_position: Position
    origin: Position = field(default_factory=lambda: Position(0.0, 0.0))
    pathloss_exponent: float = 2.0
    reference_freq_mhz: float = 2140.0
    obstructions: tuple[ObstructionSpec, ...] = ()

    def __post_init__(self) -> None:
        if self.width_m <= 0 or self.height_m <= 0:
            raise ValueError("map area must have positive width and height")
        if self.pixel_size_m <= 0:
            raise ValueError("pixel size must be positive")
        if self.pathloss_exponent <= 0:
            raise ValueError("path-loss exponent must be positive")
        if self.reference_freq_mhz <= 0:
            raise ValueError("reference frequency must be positive")
        area = Rect(
            self.origin.x,
            self.origin.x + self.width_m,
            self.origin.y,
            self.origin.y + self.height_m,
        )
        for obs in self.obstructions:
            if obs.rect.clip_to(area) is None or not (
                area.x_min <= obs.rect.x_min
                and obs.rect.x_max <= area.x_max
                and area.y_min <= obs.rect.y_min
                and obs.rect.y_max <= area.y_max
            ):
                raise ValueError(f"obstruction {obs.rect} lies outside the map area {area}")


def generate_synthetic_map(spec: SyntheticMapSpec, seed: int = 0) -> RadioMap:
    """Build a RadioMap from a synthetic spec.

    Fully deterministic; ``seed`` is accepted for interface symmetry with the
    other generators and recorded nowhere (no stochastic terms are used).
    """
    del seed
    n_cols = int(round(spec.width_m / spec.pixel_size_m))
    n_rows = int(round(spec.height_m / spec.pixel_size_m))
    if n_cols <= 0 or n_rows <= 0:
        raise ValueError("map area smaller than one pixel")

    cols = spec.origin.x + (np.arange(n_cols) + 0.5) * spec.pixel_size_m
    rows = spec.origin.y + (np.arange(n_rows) + 0.5) * spec.pixel_size_m
    cx, cy = np.meshgrid(cols, rows)
    dist_m = np.hypot(cx - spec.bs_position.x, cy - spec.bs_position.y)
    dist_km = np.maximum(dist_m, 1.0) / 1000.0

    grid = (
        _FSPL_CONST
        + 10.0 * spec.pathloss_exponent * np.log10(dist_km)
        + 20.0 * math.log10(spec.reference_freq_mhz)
    )
    for obs in spec.obstructions:
        covered = (
            (cx >= obs.rect.x_min)
            & (cx <= obs.rect.x_max)
            & (cy >= obs.rect.y_min)
            & (cy <= obs.rect.y_max)
        )
        grid = np.where(covered, grid + obs.penetration_db, grid)
    grid = np.maximum(grid, 0.0)

    return RadioMap(
        origin=spec.origin,
        pixel_size=spec.pixel_size_m,
        n_cols=n_cols,
        n_rows=n_rows,
        pathloss=grid,
        bs_position=spec.bs_position,
    )


def save_radio_map(radio_map: RadioMap, path) -> None:
    """Write ``radio_map`` in the plain-text grid format."""
    lines = [
        f"{radio_map.origin.x:.2f} {radio_map.origin.y:.2f}",
        f"{radio_map.pixel_size:.2f}",
        f"{radio_map.n_cols} {radio_map.n_rows}",
        f"{radio_map.bs_position.x:.2f} {radio_map.bs_position.y:.2f}",
    ]
    for row in range(radio_map.n_rows):
        lines.append(" ".join(f"{v:.2f}" for v in radio_map.pathloss[row]))
    text = "\n".join(lines) + "\n"
    with open(path, "w", encoding="ascii") as fh:
        fh.write(text)


def _parse_floats(line: str, count: int, what: str, lineno: int) -> list[float]:
    tokens = line.split()
    if len(tokens) != count:
        raise MapFormatError(
            f"line {lineno}: expected {count} value(s) for {what}, got {len(tokens)}"
        )
    values = []
    for tok in tokens:
        try:
            values.append(float(tok))
        except ValueError:
            raise MapFormatError(f"line {lineno}: non-numeric {what} value {tok!r}") from None
    return values


def load_radio_map(path) -> RadioMap:
    """Parse a radio-map grid file, validating the header and every cell."""
    with open(path, "r", encoding="ascii") as fh:
        raw_lines = fh.read().splitlines()
    lines = [ln for ln in raw_lines if ln.strip() != ""]
    if len(lines) < 4:
        raise MapFormatError(f"truncated file: {len(lines)} non-empty line(s), header needs 4")

    origin = _parse_floats(lines[0], 2, "origin", 1)
    (pixel_size,) = _parse_floats(lines[1], 1, "pixel size", 2)
    dims = lines[2].split()
    if len(dims) != 2:
        raise MapFormatError(f"line 3: expected 'n_cols n_rows', got {lines[2]!r}")
    try:
        n_cols, n_rows = int(dims[0]), int(dims[1])
    except ValueError:
        raise MapFormatError(f"line 3: non-integer grid dimensions {lines[2]!r}") from None
    bs = _parse_floats(lines[3], 2, "BS position", 4)

    data_lines = lines[4:]
    if len(data_lines) != n_rows:
        raise MapFormatError(f"expected {n_rows} data rows, found {len(data_lines)}")
    grid = np.empty((n_rows, n_cols), dtype=float)
    for r, line in enumerate(data_lines):
        tokens = line.split()
        if len(tokens) != n_cols:
            raise MapFormatError(f"data row {r}: expected {n_cols} columns, got {len(tokens)}")
        for c, tok in enumerate(tokens):
            try:
                v = float(tok)
            except ValueError:
                raise MapFormatError(f"data row {r}, column {c}: non-numeric cell {tok!r}") from None
            if not math.isfinite(v) or v < 0:
                raise MapFormatError(f"data row {r}, column {c}: invalid path loss {tok!r}")
            grid[r, c] = v

    return RadioMap(
        origin=Position(origin[0], origin[1]),
        pixel_size=pixel_size,
        n_cols=n_cols,
        n_rows=n_rows,
        pathloss=grid,
        bs_position=Position(bs[0], bs[1]),
    )
