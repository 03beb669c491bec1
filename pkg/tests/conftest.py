import json
from pathlib import Path

import numpy as np
from hypothesis import HealthCheck, settings

ORACLE = json.loads((Path(__file__).parent / "oracles" / "values.json").read_text())

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("default")


def away_from_poles(w, geom, gap=1e-3):
    """Shift w off the box resonances pi n / L by at least ``gap``."""
    if geom.L is None:
        return w
    k = np.pi / geom.L
    n = round(w / k)
    if n > 0 and abs(w - n * k) < gap:
        w = n * k + gap if w >= n * k else n * k - gap
    return w


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
