import math

import pytest

from nclp.errors import ConfigError, NotPositive
from nclp.suites import CheckRecord, Campaign, Report, RunConfig, run, shortfall, worst


@pytest.mark.parametrize(
    "overrides",
    [
        {"command": "nonsense"},
        {"p": 0.5},
        {"trials": 0},
        {"tol": 0.0},
        {"workers": 0},
        {"seed": -1},
    ]
)
def test_run_config_validation(overrides):
    fields = {"command": "clarkson"} | overrides
    with pytest.raises(ConfigError):
        RunConfig(**fields)


def test_campaign_sizes_are_capped_by_trials():
    config = RunConfig("suite", trials=500)
    assert config.size("clarkson") == 500
    assert config.size("agreement") == 50


def test_reducers():
    assert worst([0.1, None, 0.2]) == math.inf
    assert worst([(0.1, 3), (0.4, 1)], 0) == 0.4
    assert worst([]) == 0.0
    assert shortfall(0.05, 0.3) == 0.0
    assert shortfall(0.05, 0.01) == pytest.approx(0.04)


def test_failing_check_keeps_the_error():
    report = Report(RunConfig("paving"))
    campaign = Campaign(report.config, report)

    def broken():
        raise NotPositive("density is not positive", margin=-1.0)

    record = campaign.check("broken", broken)
    assert not record.passed
    assert record.witness["error"] == "NotPositive"
    assert record.as_dict()["max_residual"] is None
    assert not report.passed


def test_record_serialization():
    record = CheckRecord("x", True, 1e-12, 1e-9, {"gap": 0.25}, 1.23456)
    assert record.as_dict() == {
        "name": "x",
        "passed": True,
        "max_residual": 1e-12,
        "threshold": 1e-9,
        "elapsed_ms": 1.235,
        "witness": {"gap": 0.25},
    }


def test_ep_m2_reports_the_witness():
    report = run(RunConfig("ep-m2", p=1.0, trials=3))
    assert report.passed
    witness = next(c for c in report.checks if c.name == "ep.witness").witness
    assert witness["gap"] == pytest.approx(0.25, abs=1e-9)
    assert set(witness) >= {"h1", "h2", "gap"}


def test_reports_do_not_depend_on_workers():
    def strip(report):
        payload = report.as_dict()
        for check in payload["checks"]:
            check.pop("elapsed_ms")
        return payload

    single = run(RunConfig("paving", trials=4, seed=42, workers=1))
    threaded = run(RunConfig("paving", trials=4, seed=42, workers=3))
    assert strip(single) == strip(threaded)
    assert single.passed
    assert strip(single)["schema"] == 1


@pytest.mark.parametrize(
    "command", ["clarkson", "decompose", "construct", "stormer", "modular", "hs-check", "factor", "ep-m2", "paving"]
)
@pytest.mark.parametrize("p", [1.0, 3.0])
def test_every_campaign_passes_on_small_runs(command, p):
    report = run(RunConfig(command, p=p, seed=42, trials=3))
    failed = [c.as_dict() for c in report.checks if not c.passed]
    assert report.checks
    assert not failed


def test_clarkson_campaign_classifies_every_pair():
    report = run(RunConfig("clarkson", p=3.0, seed=0, trials=200))
    equivalence = [c for c in report.checks if c.name.endswith(".equivalence")]
    assert len(equivalence) == 4
    assert all(c.max_residual == 0.0 for c in equivalence)
