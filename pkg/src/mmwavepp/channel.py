"""Geometric double-directional channel generation for ULA-to-ULA mmWave links.

Ground truth lives here: array responses, clustered path draws, per-snapshot
channel synthesis, and the spatial covariance used as the evaluation
reference. Angles are azimuths in [0, pi); all responses are unit-norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ArrayGeometry",
    "ChannelParams",
    "PathSet",
    "ChannelRealization",
    "array_response",
    "array_response_derivative",
    "draw_paths",
    "draw_gains",
    "synthesize_channel",
    "true_covariance",
    "empirical_covariance",
    "vec",
]


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array: element count and spacing in wavelengths."""

    num_antennas: int
    element_spacing_over_wavelength: float = 0.5

    def __post_init__(self):
        if self.num_antennas < 1:
            raise ValueError("num_antennas must be >= 1")
        if self.element_spacing_over_wavelength <= 0:
            raise ValueError("element spacing must be positive")


@dataclass(frozen=True)
class ChannelParams:
    """Clustered multipath configuration.

    ``clusters`` spatial clusters with ``paths_per_cluster`` subpaths each;
    subpath offsets around the cluster center are Laplacian with the given
    scale (radians). Gains redraw every snapshot, angles do not.
    """

    clusters: int
    paths_per_cluster: int
    sigma_as_aoa: float
    sigma_as_aod: float
    snapshots: int
    path_loss: float = 1.0
    rng_seed: int | None = None

    def __post_init__(self):
        if self.clusters < 1 or self.paths_per_cluster < 1 or self.snapshots < 1:
            raise ValueError("clusters, paths_per_cluster and snapshots must be >= 1")
        if self.sigma_as_aoa < 0 or self.sigma_as_aod < 0:
            raise ValueError("angular spreads must be >= 0")
        if self.path_loss <= 0:
            raise ValueError("path_loss must be positive")

    @property
    def num_paths(self) -> int:
        return self.clusters * self.paths_per_cluster


@dataclass(frozen=True)
class PathSet:
    """True continuous arrival/departure angles, fixed across snapshots."""

    aoa: np.ndarray
    aod: np.ndarray

    def __post_init__(self):
        aoa = np.asarray(self.aoa, dtype=float)
        aod = np.asarray(self.aod, dtype=float)
        if aoa.shape != aod.shape or aoa.ndim != 1:
            raise ValueError("aoa and aod must be 1-D arrays of equal length")
        if np.any(aoa < 0) or np.any(aoa >= np.pi) or np.any(aod < 0) or np.any(aod >= np.pi):
            raise ValueError("angles must lie in [0, pi)")
        object.__setattr__(self, "aoa", aoa)
        object.__setattr__(self, "aod", aod)

    @property
    def num_paths(self) -> int:
        return self.aoa.size


@dataclass(frozen=True)
class ChannelRealization:
    """Per-snapshot channel matrices H[t] (N x M) and the gains behind them."""

    matrices: np.ndarray  # (T, N, M) complex
    gains: np.ndarray  # (T, num_paths) complex

    @property
    def snapshots(self) -> int:
        return self.matrices.shape[0]

    def vectors(self) -> np.ndarray:
        """Column-stacked channel vectors, shape (T, M*N)."""
        return vec(self.matrices)


def vec(matrix: np.ndarray) -> np.ndarray:
    """Column-major vectorization; batched over a leading axis if present."""
    m = np.asarray(matrix)
    if m.ndim == 2:
        return m.reshape(-1, order="F")
    if m.ndim == 3:
        return m.transpose(0, 2, 1).reshape(m.shape[0], -1)
    raise ValueError("expected a matrix or a stack of matrices")


def array_response(theta: float, geometry: ArrayGeometry) -> np.ndarray:
    """Unit-norm ULA steering vector for azimuth ``theta``.

    Entry n (0-based) is exp(j*2*pi*spacing*n*cos(theta)) / sqrt(num_antennas).
    """
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite")
    n = np.arange(geometry.num_antennas)
    phase = 2.0 * np.pi * geometry.element_spacing_over_wavelength * np.cos(theta)
    if np.ndim(theta) == 0:
        return np.exp(1j * phase * n) / np.sqrt(geometry.num_antennas)
    # batched: theta (..., k) -> (num_antennas, ..., k) is unhelpful; return (num_antennas, k)
    return np.exp(1j * np.outer(n, phase)) / np.sqrt(geometry.num_antennas)


def array_response_derivative(theta: float, geometry: ArrayGeometry) -> np.ndarray:
    """Elementwise derivative of :func:`array_response` with respect to theta."""
    a = array_response(theta, geometry)
    n = np.arange(geometry.num_antennas)
    factor = -1j * 2.0 * np.pi * geometry.element_spacing_over_wavelength * np.sin(theta)
    if np.ndim(theta) == 0:
        return a * (factor * n)
    return a * np.outer(n, factor)


def draw_paths(params: ChannelParams, rng: np.random.Generator) -> PathSet:
    """Draw cluster centers uniform on [0, pi) and Laplacian subpath offsets.

    Offsets that leave [0, pi) are wrapped modulo pi. AoA and AoD are drawn
    independently, in the order: AoA centers, AoA offsets, AoD centers,
    AoD offsets (fixed so seeded runs reproduce).
    """
    k, el = params.clusters, params.paths_per_cluster

    def one_side(scale: float) -> np.ndarray:
        centers = rng.uniform(0.0, np.pi, size=k)
        if scale > 0:
            offsets = rng.laplace(0.0, scale, size=(k, el))
        else:
            offsets = np.zeros((k, el))
        return np.mod(centers[:, None] + offsets, np.pi).reshape(-1)

    aoa = one_side(params.sigma_as_aoa)
    aod = one_side(params.sigma_as_aod)
    return PathSet(aoa=aoa, aod=aod)


def draw_gains(params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. unit-variance circularly symmetric complex Gaussian gains, (T, paths)."""
    shape = (params.snapshots, params.num_paths)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def synthesize_channel(
    paths: PathSet,
    gains: np.ndarray,
    path_loss: float,
    bs_geometry: ArrayGeometry,
    ue_geometry: ArrayGeometry,
) -> ChannelRealization:
    """Sum of rank-1 path terms: H[t] = (1/beta) * sum_p gains[t,p] * a_ue a_bs^H."""
    gains = np.asarray(gains, dtype=complex)
    if gains.ndim != 2 or gains.shape[1] != paths.num_paths:
        raise ValueError("gains must be (snapshots, num_paths)")
    a_ue = array_response(paths.aoa, ue_geometry)  # (N, P)
    a_bs = array_response(paths.aod, bs_geometry)  # (M, P)
    h = np.einsum("tp,np,mp->tnm", gains, a_ue, np.conj(a_bs)) / path_loss
    return ChannelRealization(matrices=h, gains=gains)


def _path_atoms(paths: PathSet, bs_geometry: ArrayGeometry, ue_geometry: ArrayGeometry) -> np.ndarray:
    """Vectorized rank-1 responses vec(a_ue a_bs^H) as columns, (M*N, P)."""
    a_ue = array_response(paths.aoa, ue_geometry)
    a_bs = array_response(paths.aod, bs_geometry)
    n = ue_geometry.num_antennas
    m = bs_geometry.num_antennas
    # column p: kron(conj(a_bs[:,p]), a_ue[:,p])
    return (np.conj(a_bs)[:, None, :] * a_ue[None, :, :]).reshape(m * n, -1)


def true_covariance(
    paths: PathSet,
    path_loss: float,
    bs_geometry: ArrayGeometry,
    ue_geometry: ArrayGeometry,
) -> np.ndarray:
    """Analytic spatial covariance over unit-variance gains with angles held fixed.

    R = (1/beta^2) * sum_p v_p v_p^H with v_p = vec(a_ue a_bs^H). Hermitian
    PSD with rank at most the path count.
    """
    v = _path_atoms(paths, bs_geometry, ue_geometry)
    r = (v @ v.conj().T) / path_loss**2
    return 0.5 * (r + r.conj().T)


def empirical_covariance(channel: ChannelRealization) -> np.ndarray:
    """Sample covariance (1/T) * sum_t h_t h_t^H of the realized snapshots."""
    h = channel.vectors()
    r = np.einsum("ti,tj->ij", h, np.conj(h)) / h.shape[0]
    return 0.5 * (r + r.conj().T)
