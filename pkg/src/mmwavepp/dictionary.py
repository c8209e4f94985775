"""Angle grids and the redundant steering dictionary used for sparse recovery.

Two discretization schemes are supported: uniform steps in the angle itself,
and uniform steps in cos(angle) (denser near broadside, preserves column
orthogonality for critically sized grids). Each grid cell also carries the
bounds inside which a selected atom may later be perturbed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import ArrayGeometry, array_response

__all__ = [
    "GridScheme",
    "Grid",
    "Dictionary",
    "PerturbationBounds",
    "build_grid",
    "build_dictionary",
    "perturbation_bounds",
    "domain_bounds",
]


class GridScheme(str, Enum):
    UNIFORM_THETA = "uniform-theta"
    UNIFORM_COS_THETA = "uniform-cos-theta"


@dataclass(frozen=True)
class Grid:
    """Sorted departure/arrival grid angles in [0, pi)."""

    aod_angles: np.ndarray  # (G_bs,)
    aoa_angles: np.ndarray  # (G_ue,)
    scheme: GridScheme

    def __post_init__(self):
        for name in ("aod_angles", "aoa_angles"):
            ang = np.asarray(getattr(self, name), dtype=float)
            if ang.ndim != 1 or ang.size < 2:
                raise ValueError(f"{name} must hold at least two angles")
            if np.any(np.diff(ang) <= 0):
                raise ValueError(f"{name} must be strictly increasing")
            if ang[0] < 0 or ang[-1] >= np.pi:
                raise ValueError(f"{name} must lie in [0, pi)")
            object.__setattr__(self, name, ang)

    @property
    def g_bs(self) -> int:
        return self.aod_angles.size

    @property
    def g_ue(self) -> int:
        return self.aoa_angles.size


@dataclass(frozen=True)
class PerturbationBounds:
    """Offsets (relative to the grid angle) that keep an atom inside its cell."""

    lower: float  # <= 0
    upper: float  # >= 0

    def __post_init__(self):
        if not (self.lower <= 0.0 <= self.upper):
            raise ValueError("bounds must satisfy lower <= 0 <= upper")


@dataclass(frozen=True)
class Dictionary:
    """Steering dictionary: column (i_aoa, i_aod) is vec(a_ue(aoa) a_bs(aod)^H)."""

    grid: Grid
    bs_geometry: ArrayGeometry
    ue_geometry: ArrayGeometry
    psi: np.ndarray  # (M*N, G_bs*G_ue)

    @property
    def num_columns(self) -> int:
        return self.psi.shape[1]

    def flat_index(self, aoa_index: int, aod_index: int) -> int:
        return aod_index * self.grid.g_ue + aoa_index

    def grid_indices(self, flat: int) -> tuple[int, int]:
        """Inverse of :meth:`flat_index`, returns (aoa_index, aod_index)."""
        return flat % self.grid.g_ue, flat // self.grid.g_ue


def build_grid(scheme: GridScheme, g_bs: int, g_ue: int) -> Grid:
    """Discretize [0, pi) with ``g_bs`` departure and ``g_ue`` arrival points."""
    if g_bs < 2 or g_ue < 2:
        raise ValueError("grid sizes must be >= 2")

    def angles(g: int) -> np.ndarray:
        if scheme is GridScheme.UNIFORM_THETA:
            return np.arange(g) * np.pi / g
        cosines = 1.0 - 2.0 * np.arange(g) / g
        return np.sort(np.arccos(cosines))

    return Grid(aod_angles=angles(g_bs), aoa_angles=angles(g_ue), scheme=GridScheme(scheme))


def build_dictionary(grid: Grid, bs_geometry: ArrayGeometry, ue_geometry: ArrayGeometry) -> Dictionary:
    """Materialize the dictionary matrix for all grid angle combinations.

    Columns are laid out departure-major: flat = i_aod * G_ue + i_aoa, which
    makes psi the Kronecker product conj(A_bs) (x) A_ue, so that
    psi @ vec(X) == vec(A_ue @ X @ A_bs^H) for any (G_ue, G_bs) matrix X.
    """
    a_ue = array_response(grid.aoa_angles, ue_geometry)  # (N, G_ue)
    a_bs = array_response(grid.aod_angles, bs_geometry)  # (M, G_bs)
    psi = np.kron(np.conj(a_bs), a_ue)
    return Dictionary(grid=grid, bs_geometry=bs_geometry, ue_geometry=ue_geometry, psi=psi)


def domain_bounds(angles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-index perturbation bounds for one sorted angle axis.

    Interior cells extend half way to each neighbor; the first and last cells
    treat the domain edges 0 and pi as virtual neighbors, which clamps the
    outward bound so angle + bound stays inside [0, pi).
    """
    ang = np.asarray(angles, dtype=float)
    left = np.concatenate(([0.0], ang[:-1]))
    right = np.concatenate((ang[1:], [np.pi]))
    lower = -(ang - left) / 2.0
    upper = (right - ang) / 2.0
    return lower, upper


def perturbation_bounds(grid: Grid, aoa_index: int, aod_index: int) -> tuple[PerturbationBounds, PerturbationBounds]:
    """Bounds for the (arrival, departure) cell at the given grid indices."""
    if not (0 <= aoa_index < grid.g_ue):
        raise ValueError(f"aoa_index {aoa_index} out of range [0, {grid.g_ue})")
    if not (0 <= aod_index < grid.g_bs):
        raise ValueError(f"aod_index {aod_index} out of range [0, {grid.g_bs})")
    lo_rx, up_rx = domain_bounds(grid.aoa_angles)
    lo_tx, up_tx = domain_bounds(grid.aod_angles)
    return (
        PerturbationBounds(lower=lo_rx[aoa_index], upper=up_rx[aoa_index]),
        PerturbationBounds(lower=lo_tx[aod_index], upper=up_tx[aod_index]),
    )
