"""Monte Carlo experiment runner and CSV emission.

Each (sweep point, trial) pair draws its channel, beams, and noise from a
generator seeded by SeedSequence((base_seed, trial)), so every requested
algorithm sees identical data within a trial, results do not depend on
execution order or worker count, and adding trials never perturbs earlier
ones.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from itertools import product

import numpy as np

from . import channel as chan
from . import estimators as est
from . import metrics as met
from . import sensing as sens
from .dictionary import build_dictionary, build_grid
from .scenario import Scenario, snr_to_noise_variance

__all__ = ["ResultRow", "RunResult", "run_scenario", "emit_csv", "write_csv", "CSV_HEADER"]

CSV_HEADER = "scenario_id,algorithm,T,snr_db,mrf_nrf,trial,nmse_h,nmse_c,eta,wall_ms,support_size"


@dataclass(frozen=True)
class ResultRow:
    scenario_id: str
    algorithm: str
    T: int
    snr_db: float
    mrf_nrf: int
    trial: int
    nmse_h: float
    nmse_c: float
    eta: float
    wall_ms: float
    support_size: int


@dataclass
class RunResult:
    rows: list[ResultRow]
    summary: list[dict]


def _trial_rows(scenario: Scenario, sweep, trial: int, timing: bool) -> list[ResultRow]:
    """Run every requested algorithm on one freshly drawn trial."""
    snapshots, snr_db, (m_rf, n_rf) = sweep
    rng = np.random.default_rng(np.random.SeedSequence((scenario.base_seed, trial)))

    bs_geom = chan.ArrayGeometry(scenario.channel.bs_antennas)
    ue_geom = chan.ArrayGeometry(scenario.channel.ue_antennas)
    params = scenario.channel_params(snapshots)
    paths = chan.draw_paths(params, rng)
    gains = chan.draw_gains(params, rng)
    realization = chan.synthesize_channel(paths, gains, params.path_loss, bs_geom, ue_geom)

    cfg = sens.TrainingConfig(
        m_rf=m_rf,
        n_rf=n_rf,
        snapshots=snapshots,
        noise_variance=snr_to_noise_variance(snr_db, scenario),
        beamformer_style=scenario.beamformer_style(),
    )
    beams = sens.draw_beamformers(cfg, bs_geom, ue_geom, rng)
    block = sens.measure(realization, beams, cfg, rng)

    grid = build_grid(scenario.grid_scheme(), scenario.grid.g_bs, scenario.grid.g_ue)
    dictionary = build_dictionary(grid, bs_geom, ue_geom)
    opts = scenario.solver_options()

    if scenario.covariance_reference == "analytic":
        r_ref = chan.true_covariance(paths, params.path_loss, bs_geom, ue_geom)
    else:
        r_ref = chan.empirical_covariance(realization)
    h_true = realization.vectors()
    rank = scenario.effective_metric_rank

    rows = []
    for algorithm in scenario.algorithms:
        t0 = time.perf_counter()
        if algorithm in ("PPSOMP", "DSOMP", "indirect-PPSOMP"):
            solve = est.dsomp if algorithm == "DSOMP" else est.ppsomp
            estimate = solve(block, dictionary, opts)
            r_hat = est.indirect_covariance(estimate)
            nmse_h = met.nmse_h(h_true, estimate.h_hat)
        else:
            solve = est.dcomp if algorithm == "DCOMP" else est.ppcomp
            estimate = solve(block, dictionary, opts)
            r_hat = estimate.r_hat
            nmse_h = float("nan")
        wall_ms = (time.perf_counter() - t0) * 1e3 if timing else 0.0
        rows.append(
            ResultRow(
                scenario_id=scenario.scenario_id,
                algorithm=algorithm,
                T=snapshots,
                snr_db=snr_db,
                mrf_nrf=m_rf * n_rf,
                trial=trial,
                nmse_h=nmse_h,
                nmse_c=met.nmse_c(r_ref, r_hat),
                eta=met.relative_efficiency(r_ref, r_hat, rank),
                wall_ms=wall_ms,
                support_size=len(estimate.support),
            )
        )
    return rows


def run_scenario(
    scenario: Scenario,
    trials: int | None = None,
    threads: int = 1,
    base_seed: int | None = None,
    timing: bool = True,
) -> RunResult:
    """Run the full sweep-by-trial grid and aggregate per-group statistics.

    Trials may execute on a thread pool; rows are merged in deterministic
    (sweep, trial) order regardless of completion order. ``timing=False``
    zeroes the wall_ms column so repeated runs are byte-identical.
    """
    if trials is not None or base_seed is not None:
        scenario = scenario.model_copy(
            update={
                "trials": trials if trials is not None else scenario.trials,
                "base_seed": base_seed if base_seed is not None else scenario.base_seed,
            }
        )
    sweeps = list(
        product(scenario.training.snapshots, scenario.training.snr_db, scenario.training.rf_pairs)
    )
    tasks = [(sweep, trial) for sweep in sweeps for trial in range(scenario.trials)]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda a: _trial_rows(scenario, a[0], a[1], timing), tasks))
    else:
        chunks = [_trial_rows(scenario, sweep, trial, timing) for sweep, trial in tasks]
    rows = [row for chunk in chunks for row in chunk]
    return RunResult(rows=rows, summary=summarize(rows))


def summarize(rows: list[ResultRow]) -> list[dict]:
    """Mean/std over trials for every (algorithm, sweep point) group."""
    groups: dict = {}
    for row in rows:
        groups.setdefault((row.scenario_id, row.algorithm, row.T, row.snr_db, row.mrf_nrf), []).append(row)
    out = []
    for (scenario_id, algorithm, t, snr_db, mrf_nrf), members in sorted(groups.items()):
        def stats(name):
            vals = np.array([getattr(r, name) for r in members], dtype=float)
            finite = vals[np.isfinite(vals)]
            if finite.size == 0:
                return float("nan"), float("nan")
            return float(np.mean(finite)), float(np.std(finite))
        nmse_h_mean, nmse_h_std = stats("nmse_h")
        nmse_c_mean, nmse_c_std = stats("nmse_c")
        eta_mean, eta_std = stats("eta")
        out.append(
            {
                "scenario_id": scenario_id,
                "algorithm": algorithm,
                "T": t,
                "snr_db": snr_db,
                "mrf_nrf": mrf_nrf,
                "trials": len(members),
                "nmse_h_mean": nmse_h_mean,
                "nmse_h_std": nmse_h_std,
                "nmse_c_mean": nmse_c_mean,
                "nmse_c_std": nmse_c_std,
                "eta_mean": eta_mean,
                "eta_std": eta_std,
                "wall_ms_mean": float(np.mean([r.wall_ms for r in members])),
                "support_size_mean": float(np.mean([r.support_size for r in members])),
            }
        )
    return out


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def emit_csv(rows: list[ResultRow]) -> str:
    """Render rows under the fixed header; newline-terminated final line."""
    lines = [CSV_HEADER]
    for row in rows:
        d = asdict(row)
        lines.append(",".join(_fmt(d[name]) for name in CSV_HEADER.split(",")))
    return "\n".join(lines) + "\n"


def write_csv(rows: list[ResultRow], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(emit_csv(rows))
