"""Geographical-context interference coordination for full-duplex cells."""

from .geometry import Position, Rect
from .propagation import (
    EffectivePathloss,
    LinkBudgetConfig,
    effective_interuser_pathloss,
    interference_power_dbm,
    sinr_and_rate,
    ue_ue_pathloss,
)
from .radio_map import (
    ObstructionSpec,
    RadioMap,
    SyntheticMapSpec,
    generate_synthetic_map,
    load_radio_map,
    save_radio_map,
)
from .regions import (
    ExtractionParams,
    IsolationDatabase,
    Obstruction,
    RegionPair,
    build_database,
    build_region_pairs,
    compute_mitigation_factor,
    crossing_floor_oracle,
    detect_obstructions,
    distance_model_oracle,
    load_database,
    save_database,
)
from .scheduler import (
    Assignment,
    CostMatrix,
    FrequencyResource,
    User,
    build_cost_matrix,
    classify_users,
    export_assignment,
    make_users,
    schedule_fdrand,
    schedule_fdreghdelse,
    schedule_fdregrand,
    schedule_hd,
    solve_optimal,
    verify_assignment,
)
from .sim import (
    CampaignResult,
    CdfSeries,
    LinkMetrics,
    ScenarioConfig,
    compute_cdf,
    place_users,
    run_campaign,
    run_trial,
    summarize_campaigns,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "CampaignResult",
    "CdfSeries",
    "CostMatrix",
    "EffectivePathloss",
    "ExtractionParams",
    "FrequencyResource",
    "IsolationDatabase",
    "LinkBudgetConfig",
    "LinkMetrics",
    "Obstruction",
    "ObstructionSpec",
    "Position",
    "RadioMap",
    "Rect",
    "RegionPair",
    "ScenarioConfig",
    "SyntheticMapSpec",
    "User",
    "build_cost_matrix",
    "build_database",
    "build_region_pairs",
    "classify_users",
    "compute_cdf",
    "compute_mitigation_factor",
    "crossing_floor_oracle",
    "detect_obstructions",
    "distance_model_oracle",
    "effective_interuser_pathloss",
    "export_assignment",
    "generate_synthetic_map",
    "interference_power_dbm",
    "load_database",
    "load_radio_map",
    "make_users",
    "place_users",
    "run_campaign",
    "run_trial",
    "save_database",
    "save_radio_map",
    "schedule_fdrand",
    "schedule_fdreghdelse",
    "schedule_fdregrand",
    "schedule_hd",
    "sinr_and_rate",
    "solve_optimal",
    "summarize_campaigns",
    "ue_ue_pathloss",
    "verify_assignment",
]
