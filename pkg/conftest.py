"""Shared pytest fixtures and the --runslow option"""
import pytest

from core.minimap import get_map
from modules.spacetime_model.v1 import ModelConfig
from modules.synth_arena.v1 import SimConfig, generate_dataset


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run tests marked slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def map_spec():
    return get_map()


@pytest.fixture
def tiny_model_cfg():
    """Small enough for exhaustive gradient checks"""
    return ModelConfig(image_size=16, patch_size=8, frames_per_clip=2, d_model=8, n_layers=1, n_heads=2,
                       d_event=4, dropout_p=0.0)


@pytest.fixture
def small_model_cfg():
    return ModelConfig(image_size=32, patch_size=8, frames_per_clip=4, d_model=16, n_layers=2, n_heads=2,
                       d_event=8, dropout_p=0.1)


@pytest.fixture
def sim_cfg():
    return SimConfig(seed=3)


@pytest.fixture(scope="session")
def synth_dataset(tmp_path_factory):
    """Ten rendered rounds stored as PNG frames"""
    out = tmp_path_factory.mktemp("synth")
    generate_dataset(SimConfig(seed=11), 10, out, "png", threads=2)
    return out


@pytest.fixture(scope="session")
def synth_dataset_noframes(tmp_path_factory):
    """Twenty rounds re-rendered from truth.jsonl on demand"""
    out = tmp_path_factory.mktemp("synth_none")
    generate_dataset(SimConfig(seed=5), 20, out, "none", threads=2)
    return out
