"""Scenario schema (pydantic) and bundled experiment presets.

A scenario is a JSON-compatible description of one Monte Carlo experiment:
channel geometry, training sweep axes (snapshots, SNR, RF-chain pairs), grid,
solver options, algorithms, and trial bookkeeping. Presets mirror the
simulation settings behind the study's comparison figures (2 through 8).
"""

from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from .channel import ChannelParams
from .dictionary import GridScheme
from .estimators import SolverOptions
from .sensing import BeamformerStyle

__all__ = ["Scenario", "figure_preset", "PRESET_FIGURES", "snr_to_noise_variance"]

Algorithm = Literal["DSOMP", "PPSOMP", "DCOMP", "PPCOMP", "indirect-PPSOMP"]


class ChannelSection(BaseModel):
    bs_antennas: int = Field(16, ge=1)
    ue_antennas: int = Field(8, ge=1)
    clusters: int = Field(4, ge=1)
    paths_per_cluster: int = Field(2, ge=1)
    aoa_spread_deg: float = Field(20.0, ge=0.0)
    aod_spread_deg: float = Field(20.0, ge=0.0)
    path_loss: float = Field(1.0, gt=0.0)


class GridSection(BaseModel):
    scheme: Literal["uniform-theta", "uniform-cos-theta"] = "uniform-cos-theta"
    g_bs: int = Field(16, ge=2)
    g_ue: int = Field(16, ge=2)


class TrainingSection(BaseModel):
    rf_pairs: list[tuple[int, int]] = Field(default=[(5, 6)], min_length=1)
    snapshots: list[int] = Field(default=[30], min_length=1)
    snr_db: list[float] = Field(default=[10.0], min_length=1)
    beamformer_style: Literal["unit-modulus-random-phase", "gaussian-normalized"] = (
        "unit-modulus-random-phase"
    )
    snr_reference: Literal["measurement", "unit"] = "measurement"

    @field_validator("snapshots")
    @classmethod
    def _positive_snapshots(cls, v):
        if any(t < 1 for t in v):
            raise ValueError("snapshot counts must be >= 1")
        return v

    @field_validator("rf_pairs")
    @classmethod
    def _positive_pairs(cls, v):
        if any(m < 1 or n < 1 for m, n in v):
            raise ValueError("RF chain counts must be >= 1")
        return v


class SolverSection(BaseModel):
    epsilon: float = Field(1e-2, ge=0.0)
    k_max: int | None = Field(None, ge=1)  # default: 2 * clusters * paths_per_cluster
    mu0: float = Field(0.1, gt=0.0)
    p_max: int = Field(40, ge=1)
    tol_step: float = Field(1e-6, gt=0.0)
    gradient_form: Literal["exact", "summed-residual"] = "exact"
    ridge: float = Field(1e-10, gt=0.0)
    stall_tol: float = Field(0.02, ge=0.0, lt=1.0)
    shrinkage: float = Field(1.0, ge=0.0)


class Scenario(BaseModel):
    """Full experiment description; validates cross-field consistency."""

    scenario_id: str = Field(min_length=1)
    channel: ChannelSection = ChannelSection()
    grid: GridSection = GridSection()
    training: TrainingSection = TrainingSection()
    solver: SolverSection = SolverSection()
    algorithms: list[Algorithm] = Field(default=["DSOMP", "PPSOMP", "DCOMP", "PPCOMP"], min_length=1)
    metric_rank: int | None = Field(None, ge=1)  # default: number of clusters
    covariance_reference: Literal["analytic", "sample"] = "analytic"
    trials: int = Field(100, ge=1)
    base_seed: int = 0

    @model_validator(mode="after")
    def _cross_checks(self):
        m, n = self.channel.bs_antennas, self.channel.ue_antennas
        for m_rf, n_rf in self.training.rf_pairs:
            if m_rf > m:
                raise ValueError(f"rf pair ({m_rf},{n_rf}): m_rf exceeds bs_antennas={m}")
            if n_rf > n:
                raise ValueError(f"rf pair ({m_rf},{n_rf}): n_rf exceeds ue_antennas={n}")
        if self.metric_rank is not None and self.metric_rank > m * n:
            raise ValueError("metric_rank exceeds the covariance dimension")
        if self.solver.k_max is not None and self.solver.k_max > self.grid.g_bs * self.grid.g_ue:
            raise ValueError("k_max exceeds the dictionary size")
        return self

    # -- resolved values ----------------------------------------------------

    @property
    def effective_k_max(self) -> int:
        if self.solver.k_max is not None:
            return self.solver.k_max
        return 2 * self.channel.clusters * self.channel.paths_per_cluster

    @property
    def effective_metric_rank(self) -> int:
        return self.metric_rank if self.metric_rank is not None else self.channel.clusters

    def channel_params(self, snapshots: int) -> ChannelParams:
        return ChannelParams(
            clusters=self.channel.clusters,
            paths_per_cluster=self.channel.paths_per_cluster,
            sigma_as_aoa=np.deg2rad(self.channel.aoa_spread_deg),
            sigma_as_aod=np.deg2rad(self.channel.aod_spread_deg),
            snapshots=snapshots,
            path_loss=self.channel.path_loss,
        )

    def solver_options(self) -> SolverOptions:
        return SolverOptions(
            epsilon=self.solver.epsilon,
            k_max=self.effective_k_max,
            mu0=self.solver.mu0,
            p_max=self.solver.p_max,
            tol_step=self.solver.tol_step,
            gradient_form=self.solver.gradient_form,
            ridge=self.solver.ridge,
            stall_tol=self.solver.stall_tol,
            shrinkage=self.solver.shrinkage,
        )

    def grid_scheme(self) -> GridScheme:
        return GridScheme(self.grid.scheme)

    def beamformer_style(self) -> BeamformerStyle:
        return BeamformerStyle(self.training.beamformer_style)


def snr_to_noise_variance(snr_db: float, scenario: Scenario) -> float:
    """Noise variance realizing the requested SNR.

    With the default "measurement" reference the SNR is quoted against the
    average combined-sample signal power, tr(R_h)/(M N) = K L / (beta^2 M N)
    for unit-norm beams, so sigma_n^2 = signal_power / snr. The "unit"
    reference uses sigma_n^2 = 1 / snr directly.
    """
    snr_lin = 10.0 ** (snr_db / 10.0)
    if scenario.training.snr_reference == "unit":
        return 1.0 / snr_lin
    ch = scenario.channel
    signal_power = (ch.clusters * ch.paths_per_cluster) / (
        ch.path_loss**2 * ch.bs_antennas * ch.ue_antennas
    )
    return signal_power / snr_lin


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

_SNAPSHOT_SWEEP = [1, 5, 10, 20, 30, 40, 50]
_RF_BY_PRODUCT = {20: (4, 5), 30: (5, 6), 40: (5, 8), 50: (10, 5)}

PRESET_FIGURES = (2, 3, 4, 5, 6, 7, 8)


def figure_preset(figure: int) -> list[Scenario]:
    """Bundled scenarios reproducing the comparison figures.

    Most figures map to a single scenario; the sampling-scheme comparison
    (figure 5) and the antenna sweep (figure 8) return one scenario per
    variant, distinguished by scenario_id.
    """
    base = dict(trials=100, base_seed=1000 + figure)
    if figure == 2:
        return [
            Scenario(
                scenario_id="fig2",
                algorithms=["DSOMP", "PPSOMP"],
                training=TrainingSection(
                    rf_pairs=[_RF_BY_PRODUCT[p] for p in (20, 30, 40, 50)],
                    snapshots=_SNAPSHOT_SWEEP,
                    snr_db=[10.0],
                ),
                **base,
            )
        ]
    if figure in (3, 4):
        return [
            Scenario(
                scenario_id=f"fig{figure}",
                algorithms=["DSOMP", "PPSOMP", "DCOMP", "PPCOMP"],
                training=TrainingSection(rf_pairs=[(5, 6)], snapshots=_SNAPSHOT_SWEEP, snr_db=[10.0]),
                **base,
            )
        ]
    if figure == 5:
        return [
            Scenario(
                scenario_id=f"fig5-{label}",
                algorithms=["PPSOMP", "PPCOMP"],
                grid=GridSection(scheme=scheme),
                training=TrainingSection(rf_pairs=[(5, 6)], snapshots=_SNAPSHOT_SWEEP, snr_db=[10.0]),
                **base,
            )
            for label, scheme in (("cos", "uniform-cos-theta"), ("theta", "uniform-theta"))
        ]
    if figure == 6:
        return [
            Scenario(
                scenario_id="fig6",
                algorithms=["DCOMP", "PPCOMP"],
                training=TrainingSection(
                    rf_pairs=[(5, 6)],
                    snapshots=[1, 10, 40],
                    snr_db=[-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0],
                ),
                **base,
            )
        ]
    if figure == 7:
        return [
            Scenario(
                scenario_id="fig7",
                algorithms=["DCOMP", "PPCOMP"],
                training=TrainingSection(
                    rf_pairs=[_RF_BY_PRODUCT[p] for p in (20, 30, 40)],
                    snapshots=_SNAPSHOT_SWEEP,
                    snr_db=[10.0],
                ),
                **base,
            )
        ]
    if figure == 8:
        return [
            Scenario(
                scenario_id=f"fig8-{m}x{n}",
                algorithms=["DCOMP", "PPCOMP"],
                channel=ChannelSection(bs_antennas=m, ue_antennas=n),
                training=TrainingSection(rf_pairs=[(5, 6)], snapshots=_SNAPSHOT_SWEEP, snr_db=[10.0]),
                **base,
            )
            for m, n in ((16, 8), (32, 16), (64, 32))
        ]
    raise ValueError(f"no preset for figure {figure}; available: {PRESET_FIGURES}")
