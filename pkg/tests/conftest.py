"""Shared fixtures for the swarmcheck test suite."""
import os
from pathlib import Path

import pytest

import config
from swarmcheck.alpha_model import (
    Abstraction,
    Encoding,
    ModelParams,
    Mode,
    Motion,
    make_state,
)
from swarmcheck.grid_core import Direction, Pose

GOLDEN_DIR = Path(config.config.GOLDEN_DIR or Path(__file__).parent / "golden")


def params(m=3, r=2, alpha=1, w=1, abstraction="legacy", mode="strict", encoding="global", **extra) -> ModelParams:
    return ModelParams(
        m=m, r=r, alpha=alpha, w=w,
        abstraction=Abstraction(abstraction),
        mode=Mode(mode),
        encoding=Encoding(encoding),
        **extra,
    )


def pose(x, y, heading="N") -> Pose:
    return Pose(x, y, Direction[heading])


def legacy_state(p: ModelParams, *robots, sched=None):
    """robots: (x, y, heading, motion) tuples"""
    poses = [pose(x, y, d) for x, y, d, _ in robots]
    motions = [Motion[motion.upper()] for *_, motion in robots]
    return make_state(p, poses, motions, sched)


@pytest.fixture
def make_params():
    return params


@pytest.fixture
def golden():
    """Compare text against tests/golden/<name>; SWARMCHECK_UPDATE_GOLDEN=1 rewrites it"""
    def compare(name: str, text: str) -> None:
        path = GOLDEN_DIR / name
        if os.getenv("SWARMCHECK_UPDATE_GOLDEN") == "1":
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        if not path.exists():
            pytest.fail(f"golden snapshot {name} is missing; rerun with SWARMCHECK_UPDATE_GOLDEN=1 to record it")
        assert path.read_text() == text, f"{name} differs from its golden snapshot"
    return compare
