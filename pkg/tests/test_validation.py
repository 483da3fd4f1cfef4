import copy

from components.validation import REPORT_COLUMNS, run_invariant_suite
from data.data_manager import ExperimentManager
from data.sample_data import generate_singlet_config, generate_spin_config


def test_spin_config_passes_every_check():
    report = run_invariant_suite(ExperimentManager.load_config(None))
    assert list(report.columns) == REPORT_COLUMNS
    assert report["passed"].all()
    checks = set(report["check"])
    assert {"qm_reduction", "complement", "factorization", "pov_structure", "commutation"} <= checks
    assert {"representation", "glp_weights", "ideal_update"} <= checks
    # pure components have no detection entries of their own
    assert set(report.loc[report["state"] == "S_plus", "check"]) == {"qm_reduction", "ideal_update"}


def test_singlet_config_runs_composite_check():
    report = run_invariant_suite(ExperimentManager.parse_config(generate_singlet_config()))
    assert report["passed"].all()
    assert "composite" in set(report["check"])


def test_mixed_config_without_sweep():
    doc = copy.deepcopy(generate_spin_config())
    doc["sweep"] = None
    doc["states"]["psi"] = {"kind": "pure", "vector": [0.6, [0, 0.8]]}
    doc["detection"]["default"] = 0.7
    report = run_invariant_suite(ExperimentManager.parse_config(doc))
    assert report["passed"].all()
    assert "repeatability" in set(report.loc[report["state"] == "psi", "check"])


def test_tolerance_is_reported():
    report = run_invariant_suite(ExperimentManager.load_config(None), tol=1e-9)
    assert (report["tolerance"] == 1e-9).all()
