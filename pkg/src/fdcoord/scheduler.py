"""Uplink/downlink user assignment to frequency resources.

Users carry the odd/even id convention: odd ids are downlink, even ids are
uplink. A schedule is a list of resource slots; a full-duplex (FD) slot
carries exactly one DL and one UL user, a half-duplex slot exactly one user.
Every user lands on exactly one resource.

Schedulers:

* ``solve_optimal``     - minimum-cost perfect DL/UL matching (Hungarian via
                          scipy); pair costs are evaluated at band center, so
                          the frequency dimension collapses and the matching
                          is equivalent to the full per-resource program.
* ``schedule_fdregrand``   - pair users across isolated region pairs first,
                          then pair the remainder uniformly at random; FD on
                          every used resource.
* ``schedule_fdreghdelse`` - same region-driven first step; the remainder is
                          served half-duplex on dedicated resources.
* ``schedule_fdrand``   - uniform random DL/UL pairing (FD baseline).
* ``schedule_hd``       - every user on its own resource, DL in one band and
                          UL in the other (FDD baseline).

All randomness comes from one injected numpy Generator; equal inputs and seed
reproduce the schedule bit for bit. Within the region-driven step, users are
consumed in ascending id order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np
from scipy.optimize import linear_sum_assignment

from .geometry import Position
from .propagation import (
    LinkBudgetConfig,
    interference_power_dbm,
    sinr_and_rate,
)
from .radio_map import RadioMap
from .regions import IsolationDatabase

MODE_FD = "FD"
MODE_HD_DL = "HD-DL"
MODE_HD_UL = "HD-UL"

BAND_F1 = "f1"  # DL band, shared by FD uplink/downlink pairs
BAND_F2 = "f2"  # UL band under FDD, overflow for hybrid HD tails

# Per-link inverse-rate clamp (s*Hz/bit) for zero-rate links.
COST_CLAMP = 1e9


class SchedulingError(RuntimeError):
    """Contract violation inside a scheduling operation."""


class CapacityError(RuntimeError):
    """Not enough frequency resources for the requested schedule."""


@dataclass(frozen=True)
class User:
    """One user terminal; odd id = downlink, even id = uplink.

    ``tx_power_dbm`` is set for uplink users (the BS transmits on downlink).
    Ids are unique and consecutive from 1 when produced by placement.
    """

    id: int
    position: Position
    tx_power_dbm: float | None = None

    def __post_init__(self) -> None:
        if self.id < 1:
            raise ValueError(f"user id must be >= 1, got {self.id}")

    @property
    def is_downlink(self) -> bool:
        return self.id % 2 == 1


def make_users(
    dl_positions: Sequence[Position],
    ul_positions: Sequence[Position],
    ue_tx_power_dbm: float,
) -> list[User]:
    """Users with interleaved ids: DL get 1,3,5,... and UL get 2,4,6,..."""
    users = [User(id=2 * i + 1, position=p) for i, p in enumerate(dl_positions)]
    users += [
        User(id=2 * i + 2, position=p, tx_power_dbm=ue_tx_power_dbm)
        for i, p in enumerate(ul_positions)
    ]
    users.sort(key=lambda u: u.id)
    return users


@dataclass(frozen=True)
class FrequencyResource:
    index: int
    band: str
    center_mhz: float
    bandwidth_hz: float


def build_resources(cfg: LinkBudgetConfig, count: int) -> list[FrequencyResource]:
    """First ``count`` resources: band f1 fills up first, then band f2."""
    per_band = cfg.resources_per_band()
    if count > 2 * per_band:
        raise CapacityError(
            f"need {count} resources but the two bands hold only {2 * per_band}"
        )
    bw_mhz = cfg.user_bandwidth_hz / 1e6
    resources = []
    for i in range(count):
        if i < per_band:
            band, center = BAND_F1, cfg.dl_band_mhz[0] + (i + 0.5) * bw_mhz
        else:
            band, center = BAND_F2, cfg.ul_band_mhz[0] + (i - per_band + 0.5) * bw_mhz
        resources.append(
            FrequencyResource(
                index=i, band=band, center_mhz=center, bandwidth_hz=cfg.user_bandwidth_hz
            )
        )
    return resources


@dataclass(frozen=True)
class Slot:
    """One occupied resource: an FD pair or a single half-duplex user."""

    resource: FrequencyResource
    mode: str
    dl_id: int | None = None
    ul_id: int | None = None


@dataclass(frozen=True)
class Assignment:
    """A complete schedule; immutable once built."""

    slots: tuple[Slot, ...]

    def fd_pairs(self) -> list[tuple[int, int]]:
        return [(s.dl_id, s.ul_id) for s in self.slots if s.mode == MODE_FD]

    def occupied_bandwidth_hz(self) -> float:
        return sum(s.resource.bandwidth_hz for s in self.slots)

    def user_ids(self) -> list[int]:
        ids = []
        for s in self.slots:
            if s.dl_id is not None:
                ids.append(s.dl_id)
            if s.ul_id is not None:
                ids.append(s.ul_id)
        return ids


def verify_assignment(assignment: Assignment, users: Sequence[User]) -> None:
    """Structural check of the assignment constraints.

    FD slots carry exactly one DL and one UL user, half-duplex slots exactly
    one user of the matching direction, every user sits on exactly one
    resource, and no resource index repeats. Raises SchedulingError on the
    first violation.
    """
    seen_resources: set[int] = set()
    seen_users: set[int] = set()
    for slot in assignment.slots:
        if slot.resource.index in seen_resources:
            raise SchedulingError(f"resource {slot.resource.index} assigned twice")
        seen_resources.add(slot.resource.index)
        if slot.mode == MODE_FD:
            if slot.dl_id is None or slot.ul_id is None:
                raise SchedulingError(f"FD slot {slot.resource.index} missing a user")
            if slot.dl_id % 2 == 0 or slot.ul_id % 2 == 1:
                raise SchedulingError(f"FD slot {slot.resource.index} has wrong-parity users")
        elif slot.mode == MODE_HD_DL:
            if slot.dl_id is None or slot.ul_id is not None or slot.dl_id % 2 == 0:
                raise SchedulingError(f"HD-DL slot {slot.resource.index} malformed")
        elif slot.mode == MODE_HD_UL:
            if slot.ul_id is None or slot.dl_id is not None or slot.ul_id % 2 == 1:
                raise SchedulingError(f"HD-UL slot {slot.resource.index} malformed")
        else:
            raise SchedulingError(f"unknown slot mode {slot.mode!r}")
        for uid in (slot.dl_id, slot.ul_id):
            if uid is None:
                continue
            if uid in seen_users:
                raise SchedulingError(f"user {uid} assigned to more than one resource")
            seen_users.add(uid)
    expected = {u.id for u in users}
    if seen_users != expected:
        missing = sorted(expected - seen_users)
        extra = sorted(seen_users - expected)
        raise SchedulingError(f"user coverage mismatch: missing {missing}, extra {extra}")


def export_assignment(assignment: Assignment, dest: TextIO) -> None:
    """One delimited record per resource: index, band, center, mode, users."""
    dest.write("resource,band,center_mhz,mode,dl_user,ul_user\n")
    for s in assignment.slots:
        dl = "" if s.dl_id is None else str(s.dl_id)
        ul = "" if s.ul_id is None else str(s.ul_id)
        dest.write(f"{s.resource.index},{s.resource.band},{s.resource.center_mhz:.4f},{s.mode},{dl},{ul}\n")


def classify_users(
    users: Sequence[User], db: IsolationDatabase
) -> dict[int, tuple[int, str]]:
    """Region membership per user id: (k, 'A'|'B'), absent when outside all."""
    membership: dict[int, tuple[int, str]] = {}
    for user in users:
        side = db.side_of(user.position)
        if side is not None:
            membership[user.id] = side
    return membership


@dataclass(frozen=True)
class CostMatrix:
    """Pair costs c(dl, ul) in s*Hz/bit; rows DL users, columns UL users."""

    costs: np.ndarray
    dl_ids: tuple[int, ...]
    ul_ids: tuple[int, ...]


def _split_directions(users: Sequence[User]) -> tuple[list[User], list[User]]:
    ids = [u.id for u in users]
    if len(set(ids)) != len(ids):
        raise SchedulingError("duplicate user ids")
    dl = sorted((u for u in users if u.is_downlink), key=lambda u: u.id)
    ul = sorted((u for u in users if not u.is_downlink), key=lambda u: u.id)
    return dl, ul


def _inverse_rate(rate_density: float) -> float:
    if rate_density <= 0:
        return COST_CLAMP
    return min(1.0 / rate_density, COST_CLAMP)


def build_cost_matrix(
    users: Sequence[User],
    db: IsolationDatabase,
    cfg: LinkBudgetConfig,
    radio_map: RadioMap,
) -> CostMatrix:
    """Pair cost = inverse DL rate (with the UL user as co-channel interferer)
    plus inverse UL rate, evaluated at the shared-band center frequency.

    The UL term does not depend on the pairing (the BS cancels its own
    transmit signal) but keeps the objective equal to the full per-user sum.
    Zero-rate links are clamped to a large finite cost.
    """
    dl_users, ul_users = _split_directions(users)
    if len(dl_users) != len(ul_users):
        raise SchedulingError(
            f"cost matrix needs equal DL/UL counts, got {len(dl_users)}/{len(ul_users)}"
        )
    f_mhz = cfg.dl_band_center_mhz
    noise = cfg.noise_floor_dbm

    ul_inverse = np.empty(len(ul_users))
    for j, ul in enumerate(ul_users):
        s_ul = cfg.ue_tx_power_dbm - radio_map.pathloss_at(ul.position)
        _, r_ul = sinr_and_rate(s_ul, noise)
        ul_inverse[j] = _inverse_rate(r_ul)

    costs = np.empty((len(dl_users), len(ul_users)))
    for i, dl in enumerate(dl_users):
        s_dl = cfg.bs_tx_power_dbm - radio_map.pathloss_at(dl.position)
        for j, ul in enumerate(ul_users):
            i_dbm = interference_power_dbm(
                cfg.ue_tx_power_dbm, ul.position, dl.position, db, f_mhz
            )
            _, r_dl = sinr_and_rate(s_dl, noise, i_dbm)
            costs[i, j] = _inverse_rate(r_dl) + ul_inverse[j]

    return CostMatrix(
        costs=costs,
        dl_ids=tuple(u.id for u in dl_users),
        ul_ids=tuple(u.id for u in ul_users),
    )


def assignment_cost(assignment: Assignment, cost: CostMatrix) -> float:
    """Total pair cost of the FD pairs of an assignment under ``cost``."""
    row = {uid: i for i, uid in enumerate(cost.dl_ids)}
    col = {uid: j for j, uid in enumerate(cost.ul_ids)}
    total = 0.0
    for dl_id, ul_id in assignment.fd_pairs():
        total += float(cost.costs[row[dl_id], col[ul_id]])
    return total


def _emit(
    slots: list[Slot],
    resources: list[FrequencyResource],
    mode: str,
    dl_id: int | None = None,
    ul_id: int | None = None,
) -> None:
    slots.append(Slot(resource=resources[len(slots)], mode=mode, dl_id=dl_id, ul_id=ul_id))


def solve_optimal(cost: CostMatrix, cfg: LinkBudgetConfig) -> Assignment:
    """Minimum-total-cost perfect DL/UL matching, mapped to FD resources.

    Rectangular matrices are padded to square with ten times the largest real
    entry; users matched against padding fall back to half-duplex slots after
    the FD block. Matched pairs occupy resources in ascending DL id order.
    """
    matrix = np.asarray(cost.costs, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise SchedulingError("cost matrix contains non-finite entries")
    n_dl, n_ul = matrix.shape
    n = max(n_dl, n_ul)
    if n_dl != n_ul:
        pad_value = 10.0 * float(matrix.max()) if matrix.size else 1.0
        padded = np.full((n, n), pad_value)
        padded[:n_dl, :n_ul] = matrix
        matrix = padded
    rows, cols = linear_sum_assignment(matrix)

    pairs = []
    hd_dl = []
    hd_ul = []
    for i, j in zip(rows, cols):
        if i < n_dl and j < n_ul:
            pairs.append((cost.dl_ids[i], cost.ul_ids[j]))
        elif i < n_dl:
            hd_dl.append(cost.dl_ids[i])
        elif j < n_ul:
            hd_ul.append(cost.ul_ids[j])
    pairs.sort()

    resources = build_resources(cfg, len(pairs) + len(hd_dl) + len(hd_ul))
    slots: list[Slot] = []
    for dl_id, ul_id in pairs:
        _emit(slots, resources, MODE_FD, dl_id=dl_id, ul_id=ul_id)
    for dl_id in sorted(hd_dl):
        _emit(slots, resources, MODE_HD_DL, dl_id=dl_id)
    for ul_id in sorted(hd_ul):
        _emit(slots, resources, MODE_HD_UL, ul_id=ul_id)
    return Assignment(slots=tuple(slots))


def _region_step_pairs(
    users: Sequence[User], db: IsolationDatabase
) -> tuple[list[tuple[int, int]], list[User], list[User]]:
    """Region-driven pairing step shared by the two heuristics.

    For each pair k in index order, DL users in A_k are matched with UL users
    in B_k up to the smaller count, then UL users in A_k with DL users in
    B_k. Users inside each set are consumed in ascending id order. Returns
    the (dl_id, ul_id) pairs plus the leftover DL and UL users.
    """
    dl_users, ul_users = _split_directions(users)
    membership = classify_users(users, db)
    scheduled: set[int] = set()
    pairs: list[tuple[int, int]] = []

    def members(pool: list[User], k: int, side: str) -> list[User]:
        return [
            u for u in pool if u.id not in scheduled and membership.get(u.id) == (k, side)
        ]

    for pair in db.pairs:
        for dl_side, ul_side in (("A", "B"), ("B", "A")):
            dl_set = members(dl_users, pair.index, dl_side)
            ul_set = members(ul_users, pair.index, ul_side)
            for dl, ul in zip(dl_set, ul_set):
                pairs.append((dl.id, ul.id))
                scheduled.update((dl.id, ul.id))

    dl_left = [u for u in dl_users if u.id not in scheduled]
    ul_left = [u for u in ul_users if u.id not in scheduled]
    return pairs, dl_left, ul_left


def _shuffled_ids(pool: Sequence[User], rng: np.random.Generator) -> list[int]:
    ids = [u.id for u in pool]
    return [ids[i] for i in rng.permutation(len(ids))]


def _random_fd_pairing(
    dl_pool: Sequence[User], ul_pool: Sequence[User], rng: np.random.Generator
) -> list[tuple[int, int]]:
    if len(dl_pool) != len(ul_pool):
        raise SchedulingError(
            f"random FD pairing needs equal pools, got {len(dl_pool)}/{len(ul_pool)}"
        )
    return list(zip(_shuffled_ids(dl_pool, rng), _shuffled_ids(ul_pool, rng)))


def _fd_assignment(pairs: list[tuple[int, int]], cfg: LinkBudgetConfig) -> Assignment:
    per_band = cfg.resources_per_band()
    if len(pairs) > per_band:
        raise CapacityError(
            f"{len(pairs)} FD pairs exceed the {per_band} resources of the shared band"
        )
    resources = build_resources(cfg, len(pairs))
    slots: list[Slot] = []
    for dl_id, ul_id in pairs:
        _emit(slots, resources, MODE_FD, dl_id=dl_id, ul_id=ul_id)
    return Assignment(slots=tuple(slots))


def schedule_fdregrand(
    users: Sequence[User],
    db: IsolationDatabase,
    cfg: LinkBudgetConfig,
    rng: np.random.Generator,
) -> Assignment:
    """Region pairs first, then uniform random FD pairing of the remainder."""
    pairs, dl_left, ul_left = _region_step_pairs(users, db)
    pairs += _random_fd_pairing(dl_left, ul_left, rng)
    return _fd_assignment(pairs, cfg)


def schedule_fdreghdelse(
    users: Sequence[User],
    db: IsolationDatabase,
    cfg: LinkBudgetConfig,
    rng: np.random.Generator,
) -> Assignment:
    """Region pairs in FD, everything else half-duplex on its own resource."""
    pairs, dl_left, ul_left = _region_step_pairs(users, db)
    total = len(pairs) + len(dl_left) + len(ul_left)
    per_band = cfg.resources_per_band()
    if total > 2 * per_band:
        raise CapacityError(
            f"schedule needs {total} resources, {total - 2 * per_band} more than available"
        )
    resources = build_resources(cfg, total)
    slots: list[Slot] = []
    for dl_id, ul_id in pairs:
        _emit(slots, resources, MODE_FD, dl_id=dl_id, ul_id=ul_id)
    for dl_id in _shuffled_ids(dl_left, rng):
        _emit(slots, resources, MODE_HD_DL, dl_id=dl_id)
    for ul_id in _shuffled_ids(ul_left, rng):
        _emit(slots, resources, MODE_HD_UL, ul_id=ul_id)
    return Assignment(slots=tuple(slots))


def schedule_fdrand(
    users: Sequence[User], cfg: LinkBudgetConfig, rng: np.random.Generator
) -> Assignment:
    """Uniform random DL/UL pairing, FD on every used resource."""
    dl_users, ul_users = _split_directions(users)
    return _fd_assignment(_random_fd_pairing(dl_users, ul_users, rng), cfg)


def schedule_hd(
    users: Sequence[User], cfg: LinkBudgetConfig, rng: np.random.Generator
) -> Assignment:
    """FDD baseline: DL users on band f1, UL users on band f2, random order."""
    dl_users, ul_users = _split_directions(users)
    per_band = cfg.resources_per_band()
    if len(dl_users) > per_band or len(ul_users) > per_band:
        raise CapacityError(
            f"HD needs {len(dl_users)} DL and {len(ul_users)} UL resources, "
            f"bands hold {per_band} each"
        )
    resources = build_resources(cfg, per_band + len(ul_users))
    slots: list[Slot] = []
    for i, dl_id in enumerate(_shuffled_ids(dl_users, rng)):
        slots.append(Slot(resource=resources[i], mode=MODE_HD_DL, dl_id=dl_id))
    for i, ul_id in enumerate(_shuffled_ids(ul_users, rng)):
        slots.append(Slot(resource=resources[per_band + i], mode=MODE_HD_UL, ul_id=ul_id))
    return Assignment(slots=tuple(slots))
