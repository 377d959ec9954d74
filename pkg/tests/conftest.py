from pathlib import Path

import pytest
from hypothesis import settings

from modec.bundle import load_bundle, load_elliptic_table

DATA = Path(__file__).resolve().parents[1] / "src" / "modec" / "data"
LEVEL36 = DATA / "36.108.6.g.1.json"
X011 = DATA / "11.12.1.a.1.json"
TABLE = DATA / "curves.jsonl"

settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def table():
    return load_elliptic_table(TABLE)


@pytest.fixture(scope="session")
def x011():
    return load_bundle(X011)


@pytest.fixture(scope="session")
def level36():
    return load_bundle(LEVEL36, check_model=False)


@pytest.fixture(scope="session")
def level36_run(level36, table):
    """Full find-map + rat-pts run on the level-36 bundle, shared across modules (about 75 s)."""
    from modec.bundle import group_classes
    from modec.cli import PipelineConfig, cmd_find_map, cmd_rat_pts

    cfg = PipelineConfig()
    classes = {"432.f": group_classes(table)["432.f"]}
    cmap, report = cmd_find_map(level36, classes, {"432.f": 1}, cfg)
    points, report = cmd_rat_pts(level36, cmap, cfg, report=report)
    return cmap, points, report
