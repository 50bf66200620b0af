"""Reproducible experiment scenarios with CSV/JSON outputs."""

from .config import PARAM_DEFAULTS, SCENARIOS, SCHEMA_VERSION, ScenarioConfig
from .contamination import run_contamination_scenario
from .coverage import run_coverage_study
from .ellipse import run_ellipse_demo
from .gradient import run_gradient_scenario
from .lyapunov import run_lyapunov_scenario
from .pharma import run_pharma_scenario

RUNNERS = {
    "gradient": run_gradient_scenario,
    "contamination": run_contamination_scenario,
    "pharma": run_pharma_scenario,
    "lyapunov": run_lyapunov_scenario,
    "ellipse": run_ellipse_demo,
    "coverage": run_coverage_study,
}

__all__ = [
    "ScenarioConfig", "SCENARIOS", "SCHEMA_VERSION", "PARAM_DEFAULTS",
    "RUNNERS", "run_gradient_scenario", "run_contamination_scenario",
    "run_pharma_scenario", "run_lyapunov_scenario", "run_ellipse_demo",
    "run_coverage_study",
]
