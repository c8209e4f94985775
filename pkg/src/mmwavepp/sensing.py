"""Analog training beams, per-frame sensing aggregation, and noisy measurements.

Per frame t, the transmitter sends one pilot per RF chain (symbols s = 1..m_rf)
through precoder f[t,s] while the receiver applies combiner W[t,s]; both are
redrawn for every symbol of every frame. Stacking the combined outputs of a
frame gives y[t] = Phi[t] @ vec(H[t]) + noise, with Phi[t] built from
row-blocks kron(f^T, W^H).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import ArrayGeometry, ChannelRealization

__all__ = [
    "BeamformerStyle",
    "TrainingConfig",
    "BeamformerSet",
    "SensingBlock",
    "draw_beamformers",
    "aggregate_sensing",
    "measure",
]


class BeamformerStyle(str, Enum):
    UNIT_MODULUS_RANDOM_PHASE = "unit-modulus-random-phase"
    GAUSSIAN_NORMALIZED = "gaussian-normalized"


@dataclass(frozen=True)
class TrainingConfig:
    """RF chain counts, frame count, noise level and beam drawing style."""

    m_rf: int
    n_rf: int
    snapshots: int
    noise_variance: float
    beamformer_style: BeamformerStyle = BeamformerStyle.UNIT_MODULUS_RANDOM_PHASE

    def __post_init__(self):
        if self.m_rf < 1 or self.n_rf < 1 or self.snapshots < 1:
            raise ValueError("m_rf, n_rf and snapshots must be >= 1")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be >= 0")

    @property
    def measurements_per_frame(self) -> int:
        return self.m_rf * self.n_rf


@dataclass(frozen=True)
class BeamformerSet:
    """Unit-norm precoders f[t,s] (M,) and combiners W[t,s] (N, n_rf)."""

    precoders: np.ndarray  # (T, m_rf, M)
    combiners: np.ndarray  # (T, m_rf, N, n_rf)


@dataclass(frozen=True)
class SensingBlock:
    """Aggregated sensing matrices, combiners, and baseband measurements."""

    phi: np.ndarray  # (T, m_rf*n_rf, M*N)
    combiners: np.ndarray  # (T, m_rf, N, n_rf)
    measurements: np.ndarray  # (T, m_rf*n_rf)
    noise_variance: float

    @property
    def snapshots(self) -> int:
        return self.phi.shape[0]


def draw_beamformers(
    cfg: TrainingConfig,
    bs_geometry: ArrayGeometry,
    ue_geometry: ArrayGeometry,
    rng: np.random.Generator,
) -> BeamformerSet:
    """Draw fresh unit-norm beams for every symbol of every frame.

    Unit-modulus style uses constant-magnitude entries with i.i.d. uniform
    phases (analog phase-shifter constraint); Gaussian style draws complex
    normal entries and normalizes each beam/column.
    """
    if cfg.m_rf > bs_geometry.num_antennas:
        raise ValueError("m_rf cannot exceed the BS antenna count")
    if cfg.n_rf > ue_geometry.num_antennas:
        raise ValueError("n_rf cannot exceed the UE antenna count")
    m, n = bs_geometry.num_antennas, ue_geometry.num_antennas
    t, s = cfg.snapshots, cfg.m_rf

    if cfg.beamformer_style is BeamformerStyle.UNIT_MODULUS_RANDOM_PHASE:
        f = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=(t, s, m))) / np.sqrt(m)
        w = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=(t, s, n, cfg.n_rf))) / np.sqrt(n)
    else:
        f = rng.standard_normal((t, s, m)) + 1j * rng.standard_normal((t, s, m))
        f /= np.linalg.norm(f, axis=-1, keepdims=True)
        w = rng.standard_normal((t, s, n, cfg.n_rf)) + 1j * rng.standard_normal((t, s, n, cfg.n_rf))
        w /= np.linalg.norm(w, axis=-2, keepdims=True)
    return BeamformerSet(precoders=f, combiners=w)


def aggregate_sensing(beams: BeamformerSet, frame: int | None = None) -> np.ndarray:
    """Stack per-symbol row blocks kron(f[t,s]^T, W[t,s]^H) into Phi.

    Returns (m_rf*n_rf, M*N) for a single frame, or the full (T, m_rf*n_rf,
    M*N) stack when ``frame`` is None. Row s*n_rf + i maps vec(H) to the
    combined sample w[t,s,:,i]^H H f[t,s].
    """
    f = beams.precoders
    w = beams.combiners
    if frame is not None:
        f = f[frame : frame + 1]
        w = w[frame : frame + 1]
    t, s, m = f.shape
    n, n_rf = w.shape[2], w.shape[3]
    # [t, s, i, m, n] = f[t,s,m] * conj(w[t,s,n,i]); flatten (s,i) rows and (m,n) columns
    blocks = f[:, :, None, :, None] * np.conj(w).transpose(0, 1, 3, 2)[:, :, :, None, :]
    phi = blocks.reshape(t, s * n_rf, m * n)
    return phi[0] if frame is not None else phi


def measure(
    channel: ChannelRealization,
    beams: BeamformerSet,
    cfg: TrainingConfig,
    rng: np.random.Generator,
) -> SensingBlock:
    """Produce noisy aggregated measurements for every frame.

    Noise is drawn per symbol at the antennas, CN(0, noise_variance * I_N),
    then passed through the symbol's combiner, so the aggregated noise is
    colored by W^H W.
    """
    phi = aggregate_sensing(beams)
    h = channel.vectors()
    clean = np.einsum("tij,tj->ti", phi, h)

    t, s, n, n_rf = beams.combiners.shape
    if cfg.noise_variance > 0:
        noise = (rng.standard_normal((t, s, n)) + 1j * rng.standard_normal((t, s, n))) * np.sqrt(
            cfg.noise_variance / 2.0
        )
        combined = np.einsum("tsni,tsn->tsi", np.conj(beams.combiners), noise)
        clean = clean + combined.reshape(t, s * n_rf)
    return SensingBlock(
        phi=phi,
        combiners=beams.combiners,
        measurements=clean,
        noise_variance=cfg.noise_variance,
    )
