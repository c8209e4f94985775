"""Beamformer draws, sensing aggregation, and noisy measurement tests."""

import numpy as np

import mmwavepp as mp
from mmwavepp.channel import vec


def _draw(cfg, bs, ue, seed=0):
    return mp.draw_beamformers(cfg, bs, ue, np.random.default_rng(seed))


class TestDrawBeamformers:
    def test_unit_norms(self, bs_geom, ue_geom):
        cfg = mp.TrainingConfig(5, 6, 3, 0.0)
        beams = _draw(cfg, bs_geom, ue_geom)
        assert np.max(np.abs(np.linalg.norm(beams.precoders, axis=-1) - 1.0)) < 1e-12
        assert np.max(np.abs(np.linalg.norm(beams.combiners, axis=-2) - 1.0)) < 1e-12

    def test_gaussian_style_unit_norms(self, bs_geom, ue_geom):
        cfg = mp.TrainingConfig(5, 6, 3, 0.0, beamformer_style=mp.BeamformerStyle.GAUSSIAN_NORMALIZED)
        beams = _draw(cfg, bs_geom, ue_geom)
        assert np.max(np.abs(np.linalg.norm(beams.precoders, axis=-1) - 1.0)) < 1e-12
        assert np.max(np.abs(np.linalg.norm(beams.combiners, axis=-2) - 1.0)) < 1e-12

    def test_dynamic_beams_differ_across_symbols(self, bs_geom, ue_geom):
        cfg = mp.TrainingConfig(5, 6, 2, 0.0)
        beams = _draw(cfg, bs_geom, ue_geom)
        assert np.max(np.abs(beams.precoders[0, 0] - beams.precoders[0, 1])) > 1e-6
        assert np.max(np.abs(beams.combiners[0, 0] - beams.combiners[0, 1])) > 1e-6

    def test_seed_reproducibility(self, bs_geom, ue_geom):
        cfg = mp.TrainingConfig(5, 6, 2, 0.0)
        b1, b2 = _draw(cfg, bs_geom, ue_geom, 3), _draw(cfg, bs_geom, ue_geom, 3)
        assert np.array_equal(b1.precoders, b2.precoders)
        assert np.array_equal(b1.combiners, b2.combiners)

    def test_rf_chain_limits(self, bs_geom, ue_geom):
        import pytest

        with pytest.raises(ValueError):
            _draw(mp.TrainingConfig(17, 6, 1, 0.0), bs_geom, ue_geom)
        with pytest.raises(ValueError):
            _draw(mp.TrainingConfig(5, 9, 1, 0.0), bs_geom, ue_geom)


class TestAggregateSensing:
    def test_shape_at_reference_configuration(self, bs_geom, ue_geom):
        cfg = mp.TrainingConfig(5, 6, 2, 0.0)
        beams = _draw(cfg, bs_geom, ue_geom)
        phi = mp.aggregate_sensing(beams, 0)
        assert phi.shape == (30, 128)

    def test_single_chain_is_plain_kronecker(self, bs_geom, ue_geom):
        cfg = mp.TrainingConfig(1, 1, 1, 0.0)
        beams = _draw(cfg, bs_geom, ue_geom)
        phi = mp.aggregate_sensing(beams, 0)
        expected = np.kron(beams.precoders[0, 0][None, :], beams.combiners[0, 0].conj().T)
        assert phi.shape == (1, 128)
        assert np.max(np.abs(phi - expected)) < 1e-14

    def test_per_symbol_oracle(self, bs_geom, ue_geom):
        # Phi @ vec(H) must equal the stacked combined symbols W^H H f
        cfg = mp.TrainingConfig(5, 6, 3, 0.0)
        beams = _draw(cfg, bs_geom, ue_geom, seed=4)
        rng = np.random.default_rng(5)
        h = rng.standard_normal((8, 16)) + 1j * rng.standard_normal((8, 16))
        phi = mp.aggregate_sensing(beams)
        for t in range(3):
            direct = np.concatenate(
                [beams.combiners[t, s].conj().T @ h @ beams.precoders[t, s] for s in range(5)]
            )
            assert np.linalg.norm(phi[t] @ vec(h) - direct) < 1e-12

    def test_linearity_in_channel(self, bs_geom, ue_geom):
        cfg = mp.TrainingConfig(4, 3, 1, 0.0)
        beams = _draw(cfg, bs_geom, ue_geom, seed=6)
        phi = mp.aggregate_sensing(beams, 0)
        rng = np.random.default_rng(7)
        h1 = rng.standard_normal(128) + 1j * rng.standard_normal(128)
        h2 = rng.standard_normal(128) + 1j * rng.standard_normal(128)
        assert np.max(np.abs(phi @ (h1 + h2) - (phi @ h1 + phi @ h2))) < 1e-12


class TestMeasure:
    def test_noiseless_is_exact(self, bs_geom, ue_geom, make_block):
        paths = mp.PathSet(aoa=np.array([1.1]), aod=np.array([2.0]))
        channel, block = make_block(paths, 3, noise_variance=0.0, seed=8)
        expected = np.einsum("tij,tj->ti", block.phi, channel.vectors())
        assert np.max(np.abs(block.measurements - expected)) < 1e-12

    def test_seed_determinism(self, bs_geom, ue_geom, make_block):
        paths = mp.PathSet(aoa=np.array([1.1]), aod=np.array([2.0]))
        _, b1 = make_block(paths, 3, noise_variance=0.1, seed=9)
        _, b2 = make_block(paths, 3, noise_variance=0.1, seed=9)
        assert np.array_equal(b1.measurements, b2.measurements)

    def test_noise_power_oracle(self, bs_geom, ue_geom):
        # zero channel: E||y||^2 = sigma^2 * sum_s ||W_s||_F^2 = sigma^2 m_rf n_rf
        sigma2 = 0.37
        frames = 10_000
        cfg = mp.TrainingConfig(3, 4, frames, sigma2)
        beams = _draw(cfg, bs_geom, ue_geom, seed=10)
        zero = mp.ChannelRealization(
            matrices=np.zeros((frames, 8, 16), dtype=complex),
            gains=np.zeros((frames, 1), dtype=complex),
        )
        block = mp.measure(zero, beams, cfg, np.random.default_rng(11))
        mean_energy = np.mean(np.sum(np.abs(block.measurements) ** 2, axis=1))
        expected = sigma2 * cfg.m_rf * cfg.n_rf
        assert abs(mean_energy - expected) / expected < 0.03

    def test_noise_coloring(self, bs_geom, ue_geom):
        # repeat one combiner over many frames: block-s noise covariance must
        # approach sigma^2 W^H W
        sigma2 = 0.5
        frames = 10_000
        one = mp.draw_beamformers(mp.TrainingConfig(2, 3, 1, sigma2), bs_geom, ue_geom, np.random.default_rng(12))
        beams = mp.BeamformerSet(
            precoders=np.repeat(one.precoders, frames, axis=0),
            combiners=np.repeat(one.combiners, frames, axis=0),
        )
        cfg = mp.TrainingConfig(2, 3, frames, sigma2)
        zero = mp.ChannelRealization(
            matrices=np.zeros((frames, 8, 16), dtype=complex),
            gains=np.zeros((frames, 1), dtype=complex),
        )
        block = mp.measure(zero, beams, cfg, np.random.default_rng(13))
        s = 0
        samples = block.measurements[:, s * 3 : (s + 1) * 3]
        emp = np.einsum("ti,tj->ij", samples, samples.conj()) / frames
        w = one.combiners[0, s]
        expected = sigma2 * w.conj().T @ w
        rel = np.linalg.norm(emp - expected) / np.linalg.norm(expected)
        assert rel < 0.05
