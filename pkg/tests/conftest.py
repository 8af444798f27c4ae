import numpy as np
import pytest

from coistop.curves import ErrorCurve
from coistop.synth import CurveModel, generate


def random_curve(rng, n=None, curve_id="rand"):
    """Synthetic curve with randomly drawn shape parameters and noise."""
    n = n or int(rng.integers(20, 160))
    model = CurveModel(
        n=n,
        train_floor=float(rng.uniform(0.5, 10)),
        train_init=float(rng.uniform(20, 90)),
        train_rate=float(rng.uniform(0.01, 0.3)),
        val_floor=float(rng.uniform(5, 20)),
        val_init=float(rng.uniform(30, 95)),
        val_rate=float(rng.uniform(0.01, 0.3)),
        onset=int(rng.integers(1, n + 1)),
        ramp=float(rng.uniform(0, 0.3)),
        noise_amp=float(rng.uniform(0, 2)),
        seed=int(rng.integers(0, 2**63)),
    )
    return generate(model, curve_id)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_curve():
    return ErrorCurve("small", [50.0, 40.0, 35.0], [52.0, 45.0, 44.0])


def pytest_terminal_summary(terminalreporter):
    lines = {}
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid:
                continue
            number = int(nodeid.split("test_criterion_")[1][:2])
            if rep.failed or number not in lines:
                lines[number] = "FAIL" if rep.failed else "PASS"
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(f"criterion {number}: {lines[number]}")
