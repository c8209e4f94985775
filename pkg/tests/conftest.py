"""Shared fixtures: geometries, dictionaries, and trial builders."""

import numpy as np
import pytest

import mmwavepp as mp


@pytest.fixture
def bs_geom():
    return mp.ArrayGeometry(16)


@pytest.fixture
def ue_geom():
    return mp.ArrayGeometry(8)


@pytest.fixture
def cos_grid():
    return mp.build_grid(mp.GridScheme.UNIFORM_COS_THETA, 16, 16)


@pytest.fixture
def cos_dict(cos_grid, bs_geom, ue_geom):
    return mp.build_dictionary(cos_grid, bs_geom, ue_geom)


@pytest.fixture
def theta_dict(bs_geom, ue_geom):
    grid = mp.build_grid(mp.GridScheme.UNIFORM_THETA, 16, 16)
    return mp.build_dictionary(grid, bs_geom, ue_geom)


def build_block(
    paths: mp.PathSet,
    snapshots: int,
    bs_geom: mp.ArrayGeometry,
    ue_geom: mp.ArrayGeometry,
    noise_variance: float = 0.0,
    seed: int = 0,
    m_rf: int = 5,
    n_rf: int = 6,
    gains: np.ndarray | None = None,
):
    """Draw gains/beams/noise for fixed paths and return (channel, block)."""
    rng = np.random.default_rng(seed)
    if gains is None:
        n_paths = paths.num_paths
        gains = (rng.standard_normal((snapshots, n_paths)) + 1j * rng.standard_normal((snapshots, n_paths))) / np.sqrt(2)
    channel = mp.synthesize_channel(paths, gains, 1.0, bs_geom, ue_geom)
    cfg = mp.TrainingConfig(m_rf=m_rf, n_rf=n_rf, snapshots=snapshots, noise_variance=noise_variance)
    beams = mp.draw_beamformers(cfg, bs_geom, ue_geom, rng)
    block = mp.measure(channel, beams, cfg, rng)
    return channel, block


@pytest.fixture
def make_block(bs_geom, ue_geom):
    def _make(paths, snapshots, **kwargs):
        return build_block(paths, snapshots, bs_geom, ue_geom, **kwargs)

    return _make
