"""Declarative run configuration for the CLI.

One JSON file describes the synthetic map, the region-extraction parameters,
the link budget, and the simulation scenario. Every key has a default; a
config file only needs the keys it changes, and CLI flags override the file.
The fully resolved configuration is echoed into simulation output
directories so a run can be reproduced from its artifacts alone.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path

from .geometry import Position, Rect
from .propagation import LinkBudgetConfig
from .radio_map import ObstructionSpec, SyntheticMapSpec
from .regions import ExtractionParams
from .sim import SCHEMES, ScenarioConfig


class ConfigError(ValueError):
    """Raised for unknown keys or invalid values in a run configuration."""


# Reference scenario: a 1050 x 1100 m cell with 50 m pixels, two large
# obstructions (at least 100 m per edge, +60 dB penetration), eight isolated
# region pairs with a 140 dB attenuation floor, and 200 + 200 users.
DEFAULT_CONFIG: dict = {
    "map": {
        "width_m": 1050.0,
        "height_m": 1100.0,
        "pixel_size_m": 50.0,
        "origin": [0.0, 0.0],
        "bs_position": [500.0, 400.0],
        "pathloss_exponent": 2.0,
        "obstructions": [
            {"rect": [450.0, 550.0, 150.0, 650.0], "penetration_db": 60.0},
            {"rect": [800.0, 900.0, 650.0, 1050.0], "penetration_db": 60.0},
        ],
    },
    "extraction": {
        "detection_threshold_db": 120.0,
        "band_width_m": 250.0,
        "admission_threshold_db": 100.0,
        "sampling_step_m": 50.0,
        "split_count": 2,
        "isolation_floor_db": 140.0,
    },
    "link_budget": {
        "noise_floor_dbm": -100.0,
        "ue_tx_power_dbm": 20.0,
        "bs_tx_power_dbm": 20.0,
        "dl_band_mhz": [2100.0, 2180.0],
        "ul_band_mhz": [1900.0, 1980.0],
        "user_bandwidth_hz": 400000.0,
    },
    "scenario": {
        "n_dl": 200,
        "n_ul": 200,
        "min_spacing_m": 1.0,
        "trials": 100,
        "seed": 1,
        "cell_center_radius_m": 300.0,
        "schemes": ["hd", "fdrand", "fdregrand", "fdreghdelse"],
    },
}


def _merge(base: dict, overlay: dict, path: str = "") -> dict:
    merged = copy.deepcopy(base)
    for key, value in overlay.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{where!r} must be an object")
            merged[key] = _merge(base[key], value, where)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def load_config(path: str | Path | None = None) -> dict:
    """Defaults overlaid with the JSON file at ``path`` (when given)."""
    if path is None:
        return copy.deepcopy(DEFAULT_CONFIG)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    try:
        overlay = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(overlay, dict):
        raise ConfigError("config root must be a JSON object")
    return _merge(DEFAULT_CONFIG, overlay)


def _number(config: dict, section: str, key: str) -> float:
    value = config[section][key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    return float(value)


def _integer(config: dict, section: str, key: str) -> int:
    value = config[section][key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
    return value


def _point(config: dict, section: str, key: str) -> Position:
    value = config[section][key]
    if not (isinstance(value, list) and len(value) == 2):
        raise ConfigError(f"{section}.{key} must be [x, y]")
    return Position(float(value[0]), float(value[1]))


def _band(config: dict, section: str, key: str) -> tuple[float, float]:
    value = config[section][key]
    if not (isinstance(value, list) and len(value) == 2):
        raise ConfigError(f"{section}.{key} must be [low, high]")
    return float(value[0]), float(value[1])


def build_map_spec(config: dict) -> SyntheticMapSpec:
    obstructions = []
    for i, entry in enumerate(config["map"]["obstructions"]):
        if not isinstance(entry, dict) or set(entry) != {"rect", "penetration_db"}:
            raise ConfigError(f"map.obstructions[{i}] must have 'rect' and 'penetration_db'")
        rect = entry["rect"]
        if not (isinstance(rect, list) and len(rect) == 4):
            raise ConfigError(f"map.obstructions[{i}].rect must be [x_min, x_max, y_min, y_max]")
        try:
            obstructions.append(
                ObstructionSpec(
                    rect=Rect(*(float(v) for v in rect)),
                    penetration_db=float(entry["penetration_db"]),
                )
            )
        except ValueError as exc:
            raise ConfigError(f"map.obstructions[{i}]: {exc}") from None
    link = build_link_budget(config)
    try:
        return SyntheticMapSpec(
            width_m=_number(config, "map", "width_m"),
            height_m=_number(config, "map", "height_m"),
            pixel_size_m=_number(config, "map", "pixel_size_m"),
            origin=_point(config, "map", "origin"),
            bs_position=_point(config, "map", "bs_position"),
            pathloss_exponent=_number(config, "map", "pathloss_exponent"),
            reference_freq_mhz=0.5 * (link.dl_band_mhz[0] + link.dl_band_mhz[1]),
            obstructions=tuple(obstructions),
        )
    except ValueError as exc:
        raise ConfigError(f"map: {exc}") from None


def build_extraction_params(config: dict) -> ExtractionParams:
    try:
        return ExtractionParams(
            detection_threshold_db=_number(config, "extraction", "detection_threshold_db"),
            band_width_m=_number(config, "extraction", "band_width_m"),
            admission_threshold_db=_number(config, "extraction", "admission_threshold_db"),
            sampling_step_m=_number(config, "extraction", "sampling_step_m"),
            split_count=_integer(config, "extraction", "split_count"),
        )
    except ValueError as exc:
        raise ConfigError(f"extraction: {exc}") from None


def isolation_floor_db(config: dict) -> float:
    floor = _number(config, "extraction", "isolation_floor_db")
    if floor <= 0:
        raise ConfigError("extraction.isolation_floor_db must be positive")
    return floor


def build_link_budget(config: dict) -> LinkBudgetConfig:
    try:
        return LinkBudgetConfig(
            noise_floor_dbm=_number(config, "link_budget", "noise_floor_dbm"),
            ue_tx_power_dbm=_number(config, "link_budget", "ue_tx_power_dbm"),
            bs_tx_power_dbm=_number(config, "link_budget", "bs_tx_power_dbm"),
            dl_band_mhz=_band(config, "link_budget", "dl_band_mhz"),
            ul_band_mhz=_band(config, "link_budget", "ul_band_mhz"),
            user_bandwidth_hz=_number(config, "link_budget", "user_bandwidth_hz"),
        )
    except ValueError as exc:
        raise ConfigError(f"link_budget: {exc}") from None


def scheme_list(config: dict) -> list[str]:
    schemes = config["scenario"]["schemes"]
    if not (isinstance(schemes, list) and schemes):
        raise ConfigError("scenario.schemes must be a non-empty list")
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
    if len(set(schemes)) != len(schemes):
        raise ConfigError("scenario.schemes contains duplicates")
    return list(schemes)


def build_scenario(config: dict, scheme: str) -> ScenarioConfig:
    exclusions = tuple(spec.rect for spec in build_map_spec(config).obstructions)
    try:
        return ScenarioConfig(
            link_budget=build_link_budget(config),
            n_dl=_integer(config, "scenario", "n_dl"),
            n_ul=_integer(config, "scenario", "n_ul"),
            min_spacing_m=_number(config, "scenario", "min_spacing_m"),
            scheme=scheme,
            trials=_integer(config, "scenario", "trials"),
            seed=_integer(config, "scenario", "seed"),
            cell_center_radius_m=_number(config, "scenario", "cell_center_radius_m"),
            exclusion_zones=exclusions,
        )
    except ValueError as exc:
        raise ConfigError(f"scenario: {exc}") from None


def validate_config(config: dict) -> None:
    """Build every typed object once so any bad value fails before compute."""
    build_map_spec(config)
    build_extraction_params(config)
    isolation_floor_db(config)
    for scheme in scheme_list(config):
        build_scenario(config, scheme)
