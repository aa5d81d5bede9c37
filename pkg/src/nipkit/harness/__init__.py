"""Scenarios, ground-truth models, fixtures, reports and the command line."""
from .fixtures import FIXTURES, fixture_FIX_A, fixture_FIX_B, fixture_FIX_B_three, get_fixture
from .ground_truth import GroundTruthBundle, fix_b_ground_truth, generate_ground_truth
from .report import emit_report
from .runner import ScenarioResult, run_scenario
from .scenario import Scenario, load_scenario, scenario_from_dict

__all__ = [
    "FIXTURES",
    "fixture_FIX_A",
    "fixture_FIX_B",
    "fixture_FIX_B_three",
    "get_fixture",
    "GroundTruthBundle",
    "fix_b_ground_truth",
    "generate_ground_truth",
    "emit_report",
    "ScenarioResult",
    "run_scenario",
    "Scenario",
    "load_scenario",
    "scenario_from_dict",
]
