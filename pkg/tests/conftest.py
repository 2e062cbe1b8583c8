from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import settings

from somarena.backend.scripted import ScriptedBackend

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"
GOLDEN = Path(__file__).resolve().parent / "golden"

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")


@pytest.fixture
def configs() -> Path:
    return CONFIGS


@pytest.fixture
def follow_backend() -> ScriptedBackend:
    """Reasoner that predicts round(0.8 * last-target) directly at the action node."""
    return ScriptedBackend.from_rules(
        ("infer", r"Node: ACTION\n(?s:.*?)last-target = (?P<t>-?\d+(?:\.\d+)?)", "VALUE: {round(0.8 * t)}\nREASONING: scaled target"),
        ("infer", r"Node: ACTION", "VALUE: 50\nREASONING: opening"),
        ("reflect", r".", "The opponent expects an undercut."),
        ("extract", r".", "last-target -> expects-undercut -> ACTION"),
        ("infer", r"Node: expects-undercut", "VALUE: yes\nREASONING: always"),
        name="follow",
    )


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n][1])
