"""Config-driven experiment scenarios and their shared plumbing."""

from .common import (
    RunReport,
    emit_report,
    exact_gaussian_hill,
    fit_order,
    load_velocity_csv,
    max_error,
    write_csv,
)
from .config import (
    ScenarioConfig,
    load_config,
    parse_config,
    save_config,
    serialize_config,
)
from .plots import line_plot
from .registry import (
    default_config,
    get_spec,
    run_scenario,
    scenario_names,
    validate_config,
)

__all__ = [
    "RunReport",
    "ScenarioConfig",
    "default_config",
    "emit_report",
    "exact_gaussian_hill",
    "fit_order",
    "get_spec",
    "line_plot",
    "load_config",
    "load_velocity_csv",
    "max_error",
    "parse_config",
    "run_scenario",
    "save_config",
    "scenario_names",
    "serialize_config",
    "validate_config",
    "write_csv",
]
