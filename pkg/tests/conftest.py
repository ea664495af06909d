"""Shared fixtures and the acceptance summary printed at the end of a run."""

import numpy as np
import pytest

from vipguard import ScenarioConfig, TrainConfig


@pytest.fixture
def small_scenario() -> ScenarioConfig:
    """Reduced scene: 1 bodyguard, 2 bystanders, 3 landmarks."""
    return ScenarioConfig(n_bodyguards=1, n_bystanders=2, n_landmarks=3)


@pytest.fixture
def mall_scenario() -> ScenarioConfig:
    """Full mall scene: 3 bodyguards, 10 bystanders, 12 landmarks."""
    return ScenarioConfig()


@pytest.fixture
def tiny_train() -> TrainConfig:
    """Fast training config for plumbing tests (not meant to learn anything)."""
    return TrainConfig(
        episodes=8,
        batch_size=32,
        update_every=20,
        warmup_transitions=60,
        hidden_sizes=(16,),
        buffer_capacity=1000,
        seed=0,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion, printed after the run."""
    lines = {}
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" not in nodeid or "::test_criterion_" not in nodeid:
                continue
            name = nodeid.split("::test_criterion_", 1)[1]
            number = int(name.split("_", 1)[0])
            label = name.split("_", 1)[1] if "_" in name else name
            verdict = "PASS" if status == "passed" else "FAIL"
            key = (number, label)
            if lines.get(key) != "FAIL":
                lines[key] = verdict
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for (number, label), verdict in sorted(lines.items()):
            terminalreporter.write_line(f"criterion {number} ({label.replace('_', ' ')}): {verdict}")
