import numpy as np
import pytest

from dcoset.config import load_fixture
from dcoset.symmetric import build_setup
from dcoset.tori import build_atlas

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def sl2_cfg():
    return load_fixture("sl2")


@pytest.fixture(scope="session")
def sl8_cfg():
    return load_fixture("sl8")


@pytest.fixture(scope="session")
def sl2(sl2_cfg):
    return build_setup(sl2_cfg.group, sl2_cfg.tol())


@pytest.fixture(scope="session")
def sl8(sl8_cfg):
    return build_setup(sl8_cfg.group, sl8_cfg.tol())


def _atlas(setup, cfg):
    n = cfg.numeric
    return build_atlas(setup, cfg.a0, cfg.weyl, cfg.domain, cfg.fibers, n["grid_n"], n["refine_levels"],
                       n["max_group_order"], n["seed"])


@pytest.fixture(scope="session")
def sl2_atlas(sl2, sl2_cfg):
    return _atlas(sl2, sl2_cfg)


@pytest.fixture(scope="session")
def sl8_atlas(sl8, sl8_cfg):
    return _atlas(sl8, sl8_cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
