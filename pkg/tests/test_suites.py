import pytest

from src.orbit_hull.errors import ParameterError
from src.orbit_hull.suites import SUITES, run_suite


@pytest.mark.parametrize(
    "name, count",
    [
        ("majorization", 40),
        ("birkhoff", 40),
        ("cyclic-shift", 3),
        ("absorb", 20),
        ("corner-replace", 10),
        ("correction", 10),
        ("witness", 8),
        ("horn", 20),
        ("mutual", 15),
        ("measures", 10),
    ],
)
def test_suite_passes_on_a_small_sample(name, count):
    report = run_suite(name, seed=0, count=count)
    assert report.passed, f"{name} failed: {report.messages}"
    assert report.instances >= count


def test_every_suite_is_covered():
    assert set(SUITES) == {
        "majorization",
        "birkhoff",
        "cyclic-shift",
        "absorb",
        "corner-replace",
        "correction",
        "witness",
        "horn",
        "mutual",
        "measures",
    }


def test_cyclic_shift_runs_every_K():
    assert run_suite("cyclic-shift", seed=1, count=2).instances == 9 * 2


def test_replay_is_identical():
    first = run_suite("majorization", seed=42, count=12)
    second = run_suite("majorization", seed=42, count=12)
    assert first.model_dump() == second.model_dump()


@pytest.mark.parametrize("name, count", [("no-such-suite", 1), ("birkhoff", 0)])
def test_run_suite_rejects_bad_arguments(name, count):
    with pytest.raises(ParameterError):
        run_suite(name, seed=0, count=count)


@pytest.mark.parametrize("name", sorted(SUITES))
def test_suite_passes_at_its_full_size(name):
    _, default = SUITES[name]
    report = run_suite(name, seed=0)
    assert report.passed, f"{name} failed: {report.messages[:5]}"
    assert report.instances == (9 * default if name == "cyclic-shift" else default)
