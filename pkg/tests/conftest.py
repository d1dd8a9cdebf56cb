import sys
from pathlib import Path
sys.path.append(str(Path(__file__).parent.parent))

import numpy as np
import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from src.compensation.models import WindowSpec
from src.core.constants import SPEED_OF_LIGHT
from src.extraction.models import ExtractorConfig
from src.simulation.models import ClockImpairment, DynamicPath, PathScene, StaticPath, SubcarrierGrid
from src.simulation.simulator import random_impairment
from src.storage.models import Base

IFFT_SIZE = 128
LOS_DELAY = 4.0 / SPEED_OF_LIGHT


def pytest_configure(config):
    config.addinivalue_line("markers", "benchmark: timing-sensitive test with loose bounds")


@pytest.fixture
def grid():
    """30 subcarriers, 625 kHz spacing, 1 kHz sampling, one 128-symbol CPI"""
    return SubcarrierGrid.uniform(num_symbols=128)


@pytest.fixture
def delay_quantum(grid):
    """One delay bin of the default IFFT"""
    return 1.0 / (IFFT_SIZE * grid.spacing)


@pytest.fixture
def window_spec():
    return WindowSpec(sigma=64.0, ifft_size=IFFT_SIZE)


@pytest.fixture
def extractor_config():
    return ExtractorConfig(max_workers=1)


def make_scene(
    grid,
    static=((1.0, LOS_DELAY),),
    dynamic=(),
    impairment=None,
):
    """Scene from (attenuation, delay) static and (attenuation, delay, doppler) dynamic tuples"""
    return PathScene(
        grid=grid,
        static_paths=[StaticPath(attenuation=a, delay=d) for a, d in static],
        dynamic_paths=[DynamicPath(attenuation=a, delay=d, doppler=f) for a, d, f in dynamic],
        impairment=impairment if impairment is not None else ClockImpairment.none(grid.num_symbols),
    )


@pytest.fixture
def scene_factory():
    return make_scene


@pytest.fixture
def static_scene(grid):
    return make_scene(grid)


@pytest.fixture
def target_scene(grid):
    """LoS plus one reflector 8 m longer moving at +40 Hz, no impairment or noise"""
    return make_scene(
        grid,
        dynamic=((0.3 * np.exp(0.7j), LOS_DELAY + 8.0 / SPEED_OF_LIGHT, 40.0),),
    )


@pytest.fixture
def quantised_impairment(grid, delay_quantum):
    return random_impairment(grid.num_symbols, 8 * delay_quantum, rng_seed=7, to_quantum=delay_quantum)


@pytest.fixture
def db_engine(tmp_path):
    engine = create_engine(f"sqlite:///{tmp_path / 'runs.db'}")
    Base.metadata.create_all(engine)

    yield engine

    engine.dispose()


@pytest.fixture
def db_session(db_engine):
    Session = sessionmaker(bind=db_engine)
    session = Session()

    yield session

    session.close()


SCENE_FILE = """\
# LoS over a 4 m baseline, one reflector 8 m longer
NUM_SUBCARRIERS=30
SAMPLE_RATE_HZ=1000
NUM_SYMBOLS=256
STATIC_PATH_1=1.0,0.0,4.0
DYNAMIC_PATH_1=0.3,0.7,12.0,40.0
TO_SCALE_S=1e-7
TO_QUANTUM_S=1.25e-8
SNR_DB=20
SEED=3
"""


@pytest.fixture
def scene_file(tmp_path):
    path = tmp_path / "scene.cfg"
    path.write_text(SCENE_FILE)
    return path
