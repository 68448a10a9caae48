import pytest

from hyperbergman.fuchsian import (
    HPoint,
    bolza_group,
    enumerate_ball,
    gamma0_group,
    systole,
)
from hyperbergman.lmfdb_ingest import fetch_level
from hyperbergman.modforms import build_basis

ALL_LEVELS = [23, 29, 31, 37]


@pytest.fixture(scope="session")
def session_cache(tmp_path_factory):
    return str(tmp_path_factory.mktemp("coeff-cache"))


@pytest.fixture(scope="session")
def level_data(session_cache):
    """Per-level (basis, cells, geometry), built once per session."""
    built = {}

    def get(level):
        if level not in built:
            records = fetch_level(level, cache=session_cache)
            forms = [r.to_qexpansion() for r in sorted(records, key=lambda r: r.label)]
            basis, cells = build_basis(forms)
            geom = systole(gamma0_group(level))
            built[level] = (basis, cells, geom)
        return built[level]

    return get


@pytest.fixture(scope="session")
def bolza():
    return bolza_group()


@pytest.fixture(scope="session")
def bolza_geom(bolza):
    return systole(bolza, search_radius=6.2)


@pytest.fixture(scope="session")
def bolza_master_ball(bolza):
    """Complete centered ball at i, big enough to restrict to nearby points."""
    base = HPoint(0.0, 1.0)
    ball = enumerate_ball(bolza, base, base, 4.4)
    assert ball.complete
    return ball
