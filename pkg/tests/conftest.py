from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ROOT = Path(__file__).resolve().parents[1]
SYSTEMS = ROOT / "systems"


def random_residues(seed: int, scale: float = 0.3):
    """Three 2x2 residues whose sum is diagonal."""
    rng = np.random.default_rng(seed)

    def rm():
        return (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) * scale

    A0, A1 = rm(), rm()
    A2 = np.diag([0.3 + 0.1j, -0.2 + 0.05j])
    return A0, A1, A2 - A0 - A1


ACCEPTANCE_LINES: list[str] = []


def acceptance_line(number: str, ok: bool, text: str) -> str:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def systems_dir() -> Path:
    return SYSTEMS


# (system file, command, extra args, expected exit code)
CLI_EXAMPLES = [
    ("theta", "solve", [], 0),
    ("rank1", "connection", ["--pole-scan", "--grid", "16"], 0),
    ("qpvi_generic", "connection", [], 0),
    ("qpvi_generic", "qpvi-verify", ["--negative-control"], 0),
    ("qpvi_degenerate", "qpvi-verify", [], 0),
    ("qpvi_scalar", "qpvi-verify", [], 0),
    ("deformation_positive", "connection", [], 0),
    ("confluence_trivial", "confluence", [], 0),
    ("confluence_eq", "confluence", [], 0),
    ("guard_resonant", "solve", [], 3),
    ("guard_pole_at_zero", "solve", [], 3),
    ("guard_r0_ratio", "connection", [], 3),
]
