import json

import pytest

from vdfap.cli import main
from vdfap.suite import SUITES, run_suite


@pytest.mark.parametrize("name", ["ancillary", "bounds", "cauchy", "stability"])
def test_deterministic_checks_pass(name):
    records = run_suite(name, n=1000, seed=0)
    assert records and all(r["pass"] for r in records), records


def test_record_schema():
    for r in run_suite("cauchy"):
        assert set(r) == {"test", "statistic", "threshold", "pass"}
        json.dumps(r)


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope")


@pytest.mark.slow
def test_full_suite_cli(capsys):
    code = main(["validate", "--suite", "all", "--seed", "7"])
    records = json.loads(capsys.readouterr().out)
    failed = [r["test"] for r in records if not r["pass"]]
    assert code == 0 and not failed
    assert {r["test"].split("_")[0] for r in records} >= {"cf", "moments", "stability", "entropy", "mi", "physics"}
    assert len(SUITES) == 9
