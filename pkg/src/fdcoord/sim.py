"""Monte-Carlo evaluation of the scheduling schemes.

A trial places users uniformly over the map (rejection-resampled to honour a
minimum pairwise spacing and to keep users out of obstruction interiors),
runs one scheme, and computes per-link metrics. A campaign aggregates many
trials into empirical CDFs per metric and view.

Reproducibility: trial ``t`` of a campaign with seed ``s`` draws all its
randomness from ``numpy.random.SeedSequence((s, t))`` (child 0 placement,
child 1 scheduling), so any single trial can be re-run in isolation and
results do not depend on worker count or completion order.

Per-user normalized spectral efficiency is the link rate divided by the
system bandwidth consumed per user: an FD-paired user consumes half a
resource, so it contributes twice its rate density; a half-duplex user
contributes its rate density unchanged. This makes schemes with different
total bandwidth directly comparable.

Cell-center views keep an FD link only when the user and its co-channel
partner both sit within the configured radius of the BS; half-duplex links
qualify on their own position.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import Position, Rect
from .propagation import (
    LinkBudgetConfig,
    interference_power_dbm,
    sinr_and_rate,
)
from .radio_map import RadioMap
from .regions import IsolationDatabase
from .scheduler import (
    MODE_FD,
    Assignment,
    BAND_F1,
    User,
    build_cost_matrix,
    schedule_fdrand,
    schedule_fdreghdelse,
    schedule_fdregrand,
    schedule_hd,
    solve_optimal,
)

SCHEMES = ("hd", "fdrand", "fdregrand", "fdreghdelse", "optimal")

DIRECTION_DL = "dl"
DIRECTION_UL = "ul"

# series keys are "<metric>__<view>"
SERIES_KEYS = (
    "interference__cell",
    "dl_se__cell",
    "dl_se__center",
    "uldl_se__cell",
    "uldl_se__center",
    "dl_rate__cell",
)


class PackingError(RuntimeError):
    """User placement failed within the attempt budget."""


@dataclass(frozen=True)
class ScenarioConfig:
    """One simulation scenario: population, placement rules, scheme, trials."""

    link_budget: LinkBudgetConfig = field(default_factory=LinkBudgetConfig)
    n_dl: int = 200
    n_ul: int = 200
    min_spacing_m: float = 1.0
    scheme: str = "fdregrand"
    trials: int = 100
    seed: int = 1
    cell_center_radius_m: float = 300.0
    exclusion_zones: tuple[Rect, ...] = ()
    max_place_attempts: int = 10_000

    def __post_init__(self) -> None:
        if self.n_dl < 0 or self.n_ul < 0:
            raise ValueError("user counts must be non-negative")
        if self.min_spacing_m <= 0:
            raise ValueError("minimum spacing must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}, expected one of {SCHEMES}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.cell_center_radius_m <= 0:
            raise ValueError("cell-center radius must be positive")


@dataclass(frozen=True)
class LinkMetrics:
    """Per-link powers, SINR, and spectral efficiency for one trial."""

    user_id: int
    direction: str
    resource_index: int
    s_dbm: float
    noise_dbm: float
    interference_dbm: float | None
    sinr_db: float
    rate_density: float
    normalized_se: float
    cell_center: bool


def place_users(
    cfg: ScenarioConfig, radio_map: RadioMap, rng: np.random.Generator
) -> list[User]:
    """Uniform i.i.d. positions over the map area with rejection resampling.

    Candidates inside an exclusion zone's interior or closer than the minimum
    spacing to an accepted user are redrawn; ids interleave DL (odd) and UL
    (even) in draw order.
    """
    bounds = radio_map.bounds
    total = cfg.n_dl + cfg.n_ul
    placed_x = np.empty(total)
    placed_y = np.empty(total)
    users: list[User] = []
    n_placed = 0
    dl_done = 0
    ul_done = 0
    min_sq = cfg.min_spacing_m**2

    for _ in range(total):
        downlink = (dl_done < cfg.n_dl) and (n_placed % 2 == 0 or ul_done >= cfg.n_ul)
        for attempt in range(cfg.max_place_attempts):
            x = rng.uniform(bounds.x_min, bounds.x_max)
            y = rng.uniform(bounds.y_min, bounds.y_max)
            pos = Position(x, y)
            if any(zone.contains_interior(pos) for zone in cfg.exclusion_zones):
                continue
            if n_placed:
                d_sq = (placed_x[:n_placed] - x) ** 2 + (placed_y[:n_placed] - y) ** 2
                if float(d_sq.min()) < min_sq:
                    continue
            break
        else:
            raise PackingError(
                f"could not place user {n_placed + 1} after {cfg.max_place_attempts} attempts"
            )
        placed_x[n_placed] = x
        placed_y[n_placed] = y
        n_placed += 1
        if downlink:
            users.append(User(id=2 * dl_done + 1, position=pos))
            dl_done += 1
        else:
            users.append(
                User(
                    id=2 * ul_done + 2,
                    position=pos,
                    tx_power_dbm=cfg.link_budget.ue_tx_power_dbm,
                )
            )
            ul_done += 1
    return users


def _trial_rngs(seed: int, trial_index: int) -> tuple[np.random.Generator, np.random.Generator]:
    children = np.random.SeedSequence((seed, trial_index)).spawn(2)
    return np.random.default_rng(children[0]), np.random.default_rng(children[1])


def _run_scheme(
    scheme: str,
    users: Sequence[User],
    db: IsolationDatabase,
    cfg: LinkBudgetConfig,
    radio_map: RadioMap,
    rng: np.random.Generator,
) -> Assignment:
    if scheme == "hd":
        return schedule_hd(users, cfg, rng)
    if scheme == "fdrand":
        return schedule_fdrand(users, cfg, rng)
    if scheme == "fdregrand":
        return schedule_fdregrand(users, db, cfg, rng)
    if scheme == "fdreghdelse":
        return schedule_fdreghdelse(users, db, cfg, rng)
    if scheme == "optimal":
        return solve_optimal(build_cost_matrix(users, db, cfg, radio_map), cfg)
    raise ValueError(f"unknown scheme {scheme!r}")


def _band_center_mhz(cfg: LinkBudgetConfig, band: str) -> float:
    return cfg.dl_band_center_mhz if band == BAND_F1 else cfg.ul_band_center_mhz


def compute_link_metrics(
    users: Sequence[User],
    assignment: Assignment,
    radio_map: RadioMap,
    db: IsolationDatabase,
    cfg: LinkBudgetConfig,
    center_radius_m: float,
) -> list[LinkMetrics]:
    """Per-link metrics of one scheduled drop.

    DL received power comes from the radio map at the user position; the only
    interference source of a DL user is its co-channel UL partner. UL links
    see no interference (perfect self-interference cancellation at the BS).
    """
    by_id = {u.id: u for u in users}
    bs = radio_map.bs_position
    noise = cfg.noise_floor_dbm
    metrics: list[LinkMetrics] = []

    for slot in assignment.slots:
        sharing = 2 if slot.mode == MODE_FD else 1
        f_mhz = _band_center_mhz(cfg, slot.resource.band)
        dl = by_id[slot.dl_id] if slot.dl_id is not None else None
        ul = by_id[slot.ul_id] if slot.ul_id is not None else None
        if slot.mode == MODE_FD:
            in_center = (
                dl.position.distance_to(bs) <= center_radius_m
                and ul.position.distance_to(bs) <= center_radius_m
            )
        else:
            solo = dl if dl is not None else ul
            in_center = solo.position.distance_to(bs) <= center_radius_m

        if dl is not None:
            s_dl = cfg.bs_tx_power_dbm - radio_map.pathloss_at(dl.position)
            i_dbm = None
            if ul is not None:
                i_dbm = interference_power_dbm(
                    cfg.ue_tx_power_dbm, ul.position, dl.position, db, f_mhz
                )
            sinr, rate = sinr_and_rate(s_dl, noise, i_dbm)
            metrics.append(
                LinkMetrics(
                    user_id=dl.id,
                    direction=DIRECTION_DL,
                    resource_index=slot.resource.index,
                    s_dbm=s_dl,
                    noise_dbm=noise,
                    interference_dbm=i_dbm,
                    sinr_db=sinr,
                    rate_density=rate,
                    normalized_se=rate * sharing,
                    cell_center=in_center,
                )
            )
        if ul is not None:
            s_ul = cfg.ue_tx_power_dbm - radio_map.pathloss_at(ul.position)
            sinr, rate = sinr_and_rate(s_ul, noise)
            metrics.append(
                LinkMetrics(
                    user_id=ul.id,
                    direction=DIRECTION_UL,
                    resource_index=slot.resource.index,
                    s_dbm=s_ul,
                    noise_dbm=noise,
                    interference_dbm=None,
                    sinr_db=sinr,
                    rate_density=rate,
                    normalized_se=rate * sharing,
                    cell_center=in_center,
                )
            )
    return metrics


@dataclass(frozen=True)
class TrialDetail:
    users: tuple[User, ...]
    assignment: Assignment
    metrics: tuple[LinkMetrics, ...]


def run_trial_detail(
    cfg: ScenarioConfig,
    radio_map: RadioMap,
    db: IsolationDatabase,
    trial_index: int = 0,
) -> TrialDetail:
    place_rng, sched_rng = _trial_rngs(cfg.seed, trial_index)
    users = place_users(cfg, radio_map, place_rng)
    assignment = _run_scheme(cfg.scheme, users, db, cfg.link_budget, radio_map, sched_rng)
    metrics = compute_link_metrics(
        users, assignment, radio_map, db, cfg.link_budget, cfg.cell_center_radius_m
    )
    return TrialDetail(users=tuple(users), assignment=assignment, metrics=tuple(metrics))


def run_trial(
    cfg: ScenarioConfig,
    radio_map: RadioMap,
    db: IsolationDatabase,
    trial_index: int = 0,
) -> list[LinkMetrics]:
    """Place users, run the configured scheme, return per-link metrics."""
    return list(run_trial_detail(cfg, radio_map, db, trial_index).metrics)


@dataclass(frozen=True)
class CdfSeries:
    """Empirical distribution over a sorted sample vector.

    Quantiles follow the midpoint (Hazen) convention: sample i of n sits at
    probability (i - 0.5) / n, with linear interpolation in between and
    clamping outside.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.sort(np.asarray(self.values, dtype=float))
        if arr.size == 0:
            raise ValueError("a CDF needs at least one sample")
        if not np.all(np.isfinite(arr)):
            raise ValueError("CDF samples must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_samples(cls, samples) -> "CdfSeries":
        return cls(values=np.asarray(list(samples), dtype=float))

    def __len__(self) -> int:
        return int(self.values.size)

    def query(self, q: float) -> float:
        """Value at cumulative probability ``q`` (midpoint convention)."""
        if not 0.0 <= q <= 1.0:
            raise ValueError(f"probability must be in [0, 1], got {q}")
        n = self.values.size
        positions = (np.arange(1, n + 1) - 0.5) / n
        return float(np.interp(q, positions, self.values))

    @property
    def median(self) -> float:
        return self.query(0.5)

    def mass_at(self, x: float, atol: float = 1e-9) -> float:
        """Probability mass concentrated at ``x`` (within ``atol``)."""
        return float(np.mean(np.abs(self.values - x) <= atol))

    def cdf_at(self, x: float) -> float:
        """P(sample <= x)."""
        return float(np.mean(self.values <= x))

    def exceedance(self, x: float) -> float:
        """P(sample > x)."""
        return float(np.mean(self.values > x))

    def merge(self, other: "CdfSeries") -> "CdfSeries":
        return CdfSeries(values=np.concatenate([self.values, other.values]))


def compute_cdf(samples) -> CdfSeries:
    """Empirical CDF of a sample collection."""
    return CdfSeries.from_samples(samples)


@dataclass(frozen=True)
class CampaignResult:
    """Aggregated metric distributions of one (scheme, config) campaign."""

    scheme: str
    trials: int
    seed: int
    series: dict[str, CdfSeries]


def _campaign_samples(metrics: list[LinkMetrics]) -> dict[str, list[float]]:
    samples: dict[str, list[float]] = {key: [] for key in SERIES_KEYS}
    for m in metrics:
        if m.direction == DIRECTION_DL:
            if m.interference_dbm is not None:
                samples["interference__cell"].append(m.interference_dbm)
            samples["dl_se__cell"].append(m.normalized_se)
            samples["dl_rate__cell"].append(m.rate_density)
            if m.cell_center:
                samples["dl_se__center"].append(m.normalized_se)
        samples["uldl_se__cell"].append(m.normalized_se)
        if m.cell_center:
            samples["uldl_se__center"].append(m.normalized_se)
    return samples


def _trial_worker(args) -> list[LinkMetrics]:
    cfg, radio_map, db, trial_index = args
    return run_trial(cfg, radio_map, db, trial_index)


def run_campaign(
    cfg: ScenarioConfig,
    radio_map: RadioMap,
    db: IsolationDatabase,
    threads: int = 1,
) -> CampaignResult:
    """Aggregate ``cfg.trials`` independent trials of ``cfg.scheme``.

    Trials are independent and may run in parallel; aggregation sorts the
    pooled samples, so the result is identical for any worker count.
    """
    jobs = [(cfg, radio_map, db, t) for t in range(cfg.trials)]
    if threads > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            per_trial = list(pool.map(_trial_worker, jobs, chunksize=8))
    else:
        per_trial = [_trial_worker(job) for job in jobs]

    pooled: dict[str, list[float]] = {key: [] for key in SERIES_KEYS}
    for metrics in per_trial:
        for key, values in _campaign_samples(metrics).items():
            pooled[key].extend(values)

    series = {
        key: CdfSeries.from_samples(values) for key, values in pooled.items() if values
    }
    return CampaignResult(scheme=cfg.scheme, trials=cfg.trials, seed=cfg.seed, series=series)


def isolation_floor_dbm(cfg: LinkBudgetConfig, db: IsolationDatabase) -> float | None:
    """Interference level of a region-paired link: UE power minus largest alpha."""
    if not db.pairs:
        return None
    return cfg.ue_tx_power_dbm - max(p.alpha_db for p in db.pairs)


def summarize_campaigns(
    results: dict[str, CampaignResult],
    cfg: LinkBudgetConfig,
    db: IsolationDatabase,
) -> dict:
    """Medians, interference exceedance, and median-gain ratios across schemes."""
    floor = isolation_floor_dbm(cfg, db)
    schemes: dict[str, dict] = {}
    for name, result in results.items():
        medians = {key: series.median for key, series in result.series.items()}
        interference = None
        inter = result.series.get("interference__cell")
        if inter is not None:
            interference = {
                "p_above_noise": inter.exceedance(cfg.noise_floor_dbm),
                "mass_at_floor": inter.mass_at(floor) if floor is not None else 0.0,
                "samples": len(inter),
            }
        schemes[name] = {
            "trials": result.trials,
            "seed": result.seed,
            "medians": medians,
            "interference": interference,
        }

    def median_ratio(num_scheme: str, den_scheme: str, key: str) -> float | None:
        num = results.get(num_scheme)
        den = results.get(den_scheme)
        if num is None or den is None:
            return None
        if key not in num.series or key not in den.series:
            return None
        den_med = den.series[key].median
        if den_med == 0:
            return None
        return num.series[key].median / den_med

    gains = {}
    for name, num, den, key in (
        ("fdregrand_over_hd__uldl_se__cell", "fdregrand", "hd", "uldl_se__cell"),
        ("fdreghdelse_over_hd__uldl_se__cell", "fdreghdelse", "hd", "uldl_se__cell"),
        ("fdregrand_over_fdrand__dl_se__cell", "fdregrand", "fdrand", "dl_se__cell"),
        ("fdregrand_over_fdrand__dl_se__center", "fdregrand", "fdrand", "dl_se__center"),
    ):
        ratio = median_ratio(num, den, key)
        if ratio is not None:
            gains[name] = ratio

    return {
        "noise_floor_dbm": cfg.noise_floor_dbm,
        "interference_floor_dbm": floor,
        "schemes": schemes,
        "gains": gains,
    }
