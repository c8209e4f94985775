"""Grid construction, dictionary structure, and perturbation bound tests."""

import numpy as np
import pytest

import mmwavepp as mp
from mmwavepp.channel import vec
from mmwavepp.dictionary import domain_bounds


class TestBuildGrid:
    def test_uniform_theta_g4(self):
        grid = mp.build_grid(mp.GridScheme.UNIFORM_THETA, 4, 4)
        assert np.allclose(grid.aod_angles, [0, np.pi / 4, np.pi / 2, 3 * np.pi / 4])

    def test_uniform_cos_g4(self):
        grid = mp.build_grid(mp.GridScheme.UNIFORM_COS_THETA, 4, 4)
        expected = [0.0, np.pi / 3, np.pi / 2, np.arccos(-0.5)]
        assert np.allclose(grid.aoa_angles, expected)

    def test_uniform_cos_g16_cosine_spacing(self):
        grid = mp.build_grid(mp.GridScheme.UNIFORM_COS_THETA, 16, 16)
        cosines = np.cos(grid.aod_angles)
        steps = np.diff(np.sort(cosines))
        assert np.max(np.abs(steps - 2.0 / 16)) < 1e-12

    def test_rejects_small_grids(self):
        with pytest.raises(ValueError):
            mp.build_grid(mp.GridScheme.UNIFORM_THETA, 1, 4)
        with pytest.raises(ValueError):
            mp.build_grid(mp.GridScheme.UNIFORM_COS_THETA, 4, 1)

    def test_angles_sorted_in_domain(self):
        for scheme in mp.GridScheme:
            grid = mp.build_grid(scheme, 9, 7)
            for ang in (grid.aod_angles, grid.aoa_angles):
                assert np.all(np.diff(ang) > 0)
                assert ang[0] >= 0 and ang[-1] < np.pi


class TestBuildDictionary:
    def test_per_column_oracle_2x2(self):
        bs, ue = mp.ArrayGeometry(2), mp.ArrayGeometry(2)
        grid = mp.build_grid(mp.GridScheme.UNIFORM_THETA, 2, 2)
        dic = mp.build_dictionary(grid, bs, ue)
        assert dic.psi.shape == (4, 4)
        for i_rx in range(2):
            for i_tx in range(2):
                a_ue = mp.array_response(grid.aoa_angles[i_rx], ue)
                a_bs = mp.array_response(grid.aod_angles[i_tx], bs)
                col = vec(np.outer(a_ue, a_bs.conj()))
                flat = dic.flat_index(i_rx, i_tx)
                assert np.max(np.abs(dic.psi[:, flat] - col)) < 1e-14
                assert dic.grid_indices(flat) == (i_rx, i_tx)

    def test_all_columns_unit_norm(self, cos_dict):
        assert np.max(np.abs(np.linalg.norm(cos_dict.psi, axis=0) - 1.0)) < 1e-12

    def test_on_grid_channel_peaks_at_its_column(self):
        bs, ue = mp.ArrayGeometry(4), mp.ArrayGeometry(4)
        grid = mp.build_grid(mp.GridScheme.UNIFORM_COS_THETA, 4, 4)
        dic = mp.build_dictionary(grid, bs, ue)
        for i_rx in range(4):
            for i_tx in range(4):
                h = np.outer(
                    mp.array_response(grid.aoa_angles[i_rx], ue),
                    mp.array_response(grid.aod_angles[i_tx], bs).conj(),
                )
                corr = np.abs(dic.psi.conj().T @ vec(h))
                assert int(np.argmax(corr)) == dic.flat_index(i_rx, i_tx)

    def test_vec_identity_sparse_virtual_channels(self):
        # psi @ vec(X) == vec(A_ue X A_bs^H) for sparse virtual matrices
        bs, ue = mp.ArrayGeometry(4), mp.ArrayGeometry(4)
        grid = mp.build_grid(mp.GridScheme.UNIFORM_COS_THETA, 4, 4)
        dic = mp.build_dictionary(grid, bs, ue)
        a_ue = np.column_stack([mp.array_response(t, ue) for t in grid.aoa_angles])
        a_bs = np.column_stack([mp.array_response(t, bs) for t in grid.aod_angles])
        rng = np.random.default_rng(13)
        for _ in range(50):
            x = np.zeros((4, 4), dtype=complex)
            idx = rng.integers(0, 4, size=(3, 2))
            x[idx[:, 0], idx[:, 1]] = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            lhs = dic.psi @ vec(x)
            rhs = vec(a_ue @ x @ a_bs.conj().T)
            assert np.linalg.norm(lhs - rhs) < 1e-12

    def test_cos_scheme_not_more_coherent_than_theta(self):
        # critically sized grid: uniform-cos sampling preserves orthogonality
        bs, ue = mp.ArrayGeometry(16), mp.ArrayGeometry(16)

        def coherence(scheme):
            grid = mp.build_grid(scheme, 16, 16)
            psi = mp.build_dictionary(grid, bs, ue).psi
            gram = np.abs(psi.conj().T @ psi)
            np.fill_diagonal(gram, 0.0)
            return gram.max()

        assert coherence(mp.GridScheme.UNIFORM_COS_THETA) <= coherence(mp.GridScheme.UNIFORM_THETA)


class TestPerturbationBounds:
    def test_uniform_theta_interior_symmetric(self):
        grid = mp.build_grid(mp.GridScheme.UNIFORM_THETA, 16, 16)
        for idx in range(1, 15):
            rx, tx = mp.perturbation_bounds(grid, idx, idx)
            assert abs(rx.lower + np.pi / 32) < 1e-12 and abs(rx.upper - np.pi / 32) < 1e-12
            assert abs(tx.lower + np.pi / 32) < 1e-12 and abs(tx.upper - np.pi / 32) < 1e-12

    def test_uniform_cos_middle_index(self):
        grid = mp.build_grid(mp.GridScheme.UNIFORM_COS_THETA, 4, 4)
        rx, _ = mp.perturbation_bounds(grid, 1, 0)  # angle pi/3
        assert abs(rx.lower + (np.pi / 3 - 0.0) / 2) < 1e-12
        assert abs(rx.upper - (np.pi / 2 - np.pi / 3) / 2) < 1e-12

    def test_first_index_clamps_at_domain_edge(self):
        grid = mp.build_grid(mp.GridScheme.UNIFORM_COS_THETA, 4, 4)
        rx, tx = mp.perturbation_bounds(grid, 0, 0)
        assert rx.lower == 0.0 and tx.lower == 0.0

    def test_bounds_keep_angles_in_domain(self):
        for scheme in mp.GridScheme:
            grid = mp.build_grid(scheme, 8, 8)
            for idx in range(8):
                rx, tx = mp.perturbation_bounds(grid, idx, idx)
                assert 0.0 <= grid.aoa_angles[idx] + rx.lower
                assert grid.aoa_angles[idx] + rx.upper < np.pi
                assert 0.0 <= grid.aod_angles[idx] + tx.lower
                assert grid.aod_angles[idx] + tx.upper < np.pi

    def test_cells_tile_without_overlap(self):
        for scheme in mp.GridScheme:
            grid = mp.build_grid(scheme, 16, 16)
            for angles in (grid.aoa_angles, grid.aod_angles):
                lower, upper = domain_bounds(angles)
                for i in range(len(angles) - 1):
                    left_edge = angles[i] + upper[i]
                    right_edge = angles[i + 1] + lower[i + 1]
                    assert abs(left_edge - right_edge) < 1e-12

    def test_index_out_of_range(self, cos_grid):
        with pytest.raises(ValueError):
            mp.perturbation_bounds(cos_grid, 16, 0)
        with pytest.raises(ValueError):
            mp.perturbation_bounds(cos_grid, 0, -1)
