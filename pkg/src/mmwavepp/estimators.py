"""Greedy sparse channel and covariance estimators with bounded angle refinement.

Four solvers share one skeleton: a simultaneous greedy projection picks the
best grid atom per iteration, then (for the perturbed variants) all selected
angles are refined jointly by a clipped, backtracking gradient descent inside
their grid cells. ``PPSOMP``/``DSOMP`` operate on the measurement vectors,
``PPCOMP``/``DCOMP`` on the per-snapshot measurement covariances. The
non-perturbed baselines are the same solvers with the refinement disabled.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .channel import array_response, array_response_derivative
from .dictionary import Dictionary, domain_bounds
from .sensing import SensingBlock

__all__ = [
    "SolverOptions",
    "SupportEntry",
    "ChannelEstimate",
    "CovarianceEstimate",
    "ppsomp",
    "dsomp",
    "ppcomp",
    "dcomp",
    "perturb_channel",
    "channel_gradient",
    "indirect_covariance",
    "measurement_covariances",
    "perturb_covariance",
    "covariance_gradient",
]

_MAX_HALVINGS = 20


@dataclass(frozen=True)
class SolverOptions:
    """Shared knobs for all four solvers.

    ``epsilon`` stops the greedy loop once the summed residual energy falls
    below epsilon times the initial energy. ``mu0`` is the initial angular
    trust radius in radians: each refinement iteration proposes a move of at
    most the current radius along the normalized joint gradient and halves it
    (up to 20 times) until the objective stops increasing; the accepted
    radius seeds the next iteration. ``gradient_form`` selects the exact
    per-snapshot gradient ("exact", default) or the variant that sums
    residuals across snapshots before weighting ("summed-residual", kept for
    comparison only). ``stall_tol`` stops the greedy loop once an appended
    atom improves the residual energy by less than that fraction, which caps
    noise overfitting when the epsilon target is unreachable; 0 disables it.
    ``shrinkage`` scales the self-annealing Tikhonov weight of the covariance
    solvers' gain fits; 0 reverts them to plain least squares.
    """

    epsilon: float = 1e-2
    k_max: int = 16
    mu0: float = 0.1
    p_max: int = 40
    tol_step: float = 1e-6
    perturbation_enabled: bool = True
    gradient_form: str = "exact"
    ridge: float = 1e-10
    stall_tol: float = 0.02
    shrinkage: float = 1.0

    def __post_init__(self):
        if self.epsilon < 0 or self.k_max < 1 or self.mu0 <= 0 or self.p_max < 1:
            raise ValueError("epsilon >= 0, k_max >= 1, mu0 > 0, p_max >= 1 required")
        if self.tol_step <= 0 or self.ridge <= 0:
            raise ValueError("tol_step and ridge must be positive")
        if not (0.0 <= self.stall_tol < 1.0):
            raise ValueError("stall_tol must be in [0, 1)")
        if self.shrinkage < 0:
            raise ValueError("shrinkage must be >= 0")
        if self.gradient_form not in ("exact", "summed-residual"):
            raise ValueError("gradient_form must be 'exact' or 'summed-residual'")


@dataclass(frozen=True)
class SupportEntry:
    """A selected grid cell plus the refined offsets inside it."""

    aoa_index: int
    aod_index: int
    delta_aoa: float
    delta_aod: float


@dataclass
class ChannelEstimate:
    support: list[SupportEntry]
    gains: np.ndarray  # (T, k)
    h_hat: np.ndarray  # (T, M*N)
    residual_history: list[float]
    degenerate_atoms: bool = False


@dataclass
class CovarianceEstimate:
    support: list[SupportEntry]
    cross_gains: np.ndarray  # (T, k, k) Hermitian per snapshot
    r_hat: np.ndarray  # (M*N, M*N)
    residual_history: list[float]
    degenerate_atoms: bool = False


# ---------------------------------------------------------------------------
# atoms and support bookkeeping
# ---------------------------------------------------------------------------


def _atoms(th_rx, th_tx, dictionary: Dictionary) -> np.ndarray:
    """Columns vec(a_ue(th_rx) a_bs(th_tx)^H) for paired angle vectors, (M*N, k)."""
    a_ue = array_response(np.asarray(th_rx), dictionary.ue_geometry)
    a_bs = array_response(np.asarray(th_tx), dictionary.bs_geometry)
    mn = dictionary.psi.shape[0]
    return (np.conj(a_bs)[:, None, :] * a_ue[None, :, :]).reshape(mn, -1)


def _atom_derivatives(th_rx, th_tx, dictionary: Dictionary) -> tuple[np.ndarray, np.ndarray]:
    """Columnwise partial derivatives of :func:`_atoms` w.r.t. each angle."""
    a_ue = array_response(np.asarray(th_rx), dictionary.ue_geometry)
    a_bs = array_response(np.asarray(th_tx), dictionary.bs_geometry)
    d_ue = array_response_derivative(np.asarray(th_rx), dictionary.ue_geometry)
    d_bs = array_response_derivative(np.asarray(th_tx), dictionary.bs_geometry)
    mn = dictionary.psi.shape[0]
    d_rx = (np.conj(a_bs)[:, None, :] * d_ue[None, :, :]).reshape(mn, -1)
    d_tx = (np.conj(d_bs)[:, None, :] * a_ue[None, :, :]).reshape(mn, -1)
    return d_rx, d_tx


class _CellState:
    """Mutable solver state: selected cells, current angles, hard cell bounds."""

    def __init__(self, dictionary: Dictionary):
        self.dictionary = dictionary
        self.aoa_idx: list[int] = []
        self.aod_idx: list[int] = []
        self.th_rx = np.zeros(0)
        self.th_tx = np.zeros(0)
        self.lo_rx = np.zeros(0)
        self.hi_rx = np.zeros(0)
        self.lo_tx = np.zeros(0)
        self.hi_tx = np.zeros(0)
        grid = dictionary.grid
        self._rx_bounds = domain_bounds(grid.aoa_angles)
        self._tx_bounds = domain_bounds(grid.aod_angles)

    @property
    def size(self) -> int:
        return len(self.aoa_idx)

    def append(self, aoa_index: int, aod_index: int, delta_aoa: float = 0.0, delta_aod: float = 0.0):
        grid = self.dictionary.grid
        rx, tx = grid.aoa_angles[aoa_index], grid.aod_angles[aod_index]
        self.aoa_idx.append(aoa_index)
        self.aod_idx.append(aod_index)
        self.th_rx = np.append(self.th_rx, rx + delta_aoa)
        self.th_tx = np.append(self.th_tx, tx + delta_aod)
        self.lo_rx = np.append(self.lo_rx, rx + self._rx_bounds[0][aoa_index])
        self.hi_rx = np.append(self.hi_rx, rx + self._rx_bounds[1][aoa_index])
        self.lo_tx = np.append(self.lo_tx, tx + self._tx_bounds[0][aod_index])
        self.hi_tx = np.append(self.hi_tx, tx + self._tx_bounds[1][aod_index])

    def drop_last(self):
        self.aoa_idx.pop()
        self.aod_idx.pop()
        for name in ("th_rx", "th_tx", "lo_rx", "hi_rx", "lo_tx", "hi_tx"):
            setattr(self, name, getattr(self, name)[:-1])

    def clip(self, th_rx: np.ndarray, th_tx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return np.clip(th_rx, self.lo_rx, self.hi_rx), np.clip(th_tx, self.lo_tx, self.hi_tx)

    def entries(self) -> list[SupportEntry]:
        grid = self.dictionary.grid
        return [
            SupportEntry(
                aoa_index=ia,
                aod_index=id_,
                delta_aoa=float(self.th_rx[i] - grid.aoa_angles[ia]),
                delta_aod=float(self.th_tx[i] - grid.aod_angles[id_]),
            )
            for i, (ia, id_) in enumerate(zip(self.aoa_idx, self.aod_idx))
        ]

    @classmethod
    def from_support(cls, dictionary: Dictionary, support: list[SupportEntry]) -> "_CellState":
        state = cls(dictionary)
        for entry in support:
            state.append(entry.aoa_index, entry.aod_index, entry.delta_aoa, entry.delta_aod)
        return state


# ---------------------------------------------------------------------------
# least squares
# ---------------------------------------------------------------------------


def _ls_gains(u: np.ndarray, y: np.ndarray, ridge: float) -> tuple[np.ndarray, bool]:
    """Per-snapshot least-squares gains for stacked systems u[t] @ x = y[t].

    QR based; falls back to ridge-regularized normal equations when the
    stacked triangular factors indicate rank deficiency. Returns the gains
    and a flag that is True when the atom set is numerically degenerate.
    """
    q, r = np.linalg.qr(u)
    diag = np.abs(np.diagonal(r, axis1=-2, axis2=-1))
    degenerate = bool(np.any(diag < 1e-10 * np.maximum(diag.max(axis=-1, keepdims=True), 1e-300)))
    if not degenerate:
        rhs = (np.conj(q).transpose(0, 2, 1) @ y[..., None])[..., 0]
        gains = np.linalg.solve(r, rhs[..., None])[..., 0]
        return gains, False
    gram = np.conj(u).transpose(0, 2, 1) @ u
    scale = np.trace(gram, axis1=-2, axis2=-1).real / max(u.shape[-1], 1)
    gram = gram + (ridge * np.maximum(scale, 1e-300))[:, None, None] * np.eye(u.shape[-1])
    rhs = (np.conj(u).transpose(0, 2, 1) @ y[..., None])[..., 0]
    return np.linalg.solve(gram, rhs[..., None])[..., 0], True


# ---------------------------------------------------------------------------
# refinement driver
# ---------------------------------------------------------------------------


class _ChannelProblem:
    """Fit/gradient callbacks for the measurement-vector objective.

    The objective is the summed squared residual sum_t ||y_t - U_t gains_t||^2
    with per-snapshot LS gains refit at every evaluated angle set.
    """

    def __init__(self, y, phi, dictionary: Dictionary, opts: SolverOptions):
        self.y = y
        self.phi = phi
        self.phi_flat = np.ascontiguousarray(phi).reshape(-1, phi.shape[-1])
        self.dictionary = dictionary
        self.opts = opts

    def _sense(self, cols: np.ndarray) -> np.ndarray:
        t, m, _ = self.phi.shape
        return (self.phi_flat @ cols).reshape(t, m, -1)

    def fit(self, th_rx, th_tx):
        atoms = _atoms(th_rx, th_tx, self.dictionary)
        u = self._sense(atoms)
        gains, degenerate = _ls_gains(u, self.y, self.opts.ridge)
        residuals = self.y - (u @ gains[..., None])[..., 0]
        energy = float(np.sum(np.abs(residuals) ** 2))
        return {"gains": gains, "residuals": residuals, "degenerate": degenerate}, energy

    def descent_direction(self, payload, th_rx, th_tx):
        g_rx, g_tx = _channel_gradient_core(
            payload["residuals"], self.phi, payload["gains"], th_rx, th_tx, self.dictionary, self.opts.gradient_form
        )
        return g_rx, g_tx  # +g decreases the objective


class _CovarianceRank1Problem:
    """Covariance objective specialised to rank-1 snapshots R_t = y_t y_t^H.

    With the joint LS cross-gain fit, Gamma_t = c_t c_t^H where c_t are the
    LS gains of y_t on the sensed atoms, and the Frobenius residual reduces
    to ||y||^4 + ||yhat||^4 - 2|y^H yhat|^2 with yhat = U c. This avoids ever
    materializing the m x m residual covariances inside the hot loop.

    Gain fits are Tikhonov-shrunk with a self-annealing weight
    lam = shrinkage * (current vector-residual energy)/(T m): it vanishes in
    noiseless settings (exact recovery preserved) and settles at the noise
    floor otherwise, bounding the coefficient blow-up that an unregularized
    fit exhibits for correlated perturbed atoms.
    """

    def __init__(self, y, phi, dictionary: Dictionary, opts: SolverOptions):
        self.y = y
        self.phi = phi
        self.phi_flat = np.ascontiguousarray(phi).reshape(-1, phi.shape[-1])
        self.dictionary = dictionary
        self.opts = opts
        self.y_norm2 = np.sum(np.abs(y) ** 2, axis=1)
        self.lam = float(np.mean(np.abs(y) ** 2)) * opts.shrinkage

    def _sense(self, cols: np.ndarray) -> np.ndarray:
        t, m, _ = self.phi.shape
        return (self.phi_flat @ cols).reshape(t, m, -1)

    def _gains(self, u):
        if self.opts.shrinkage == 0.0 or self.lam == 0.0:
            return _ls_gains(u, self.y, self.opts.ridge)
        gram = np.conj(u).transpose(0, 2, 1) @ u
        gram = gram + self.lam * np.eye(u.shape[-1])
        rhs = (np.conj(u).transpose(0, 2, 1) @ self.y[..., None])[..., 0]
        return np.linalg.solve(gram, rhs[..., None])[..., 0], False

    def fit(self, th_rx, th_tx):
        atoms = _atoms(th_rx, th_tx, self.dictionary)
        u = self._sense(atoms)
        c, degenerate = self._gains(u)
        y_hat = (u @ c[..., None])[..., 0]
        hat_norm2 = np.sum(np.abs(y_hat) ** 2, axis=1)
        cross = np.abs(np.sum(np.conj(self.y) * y_hat, axis=1)) ** 2
        energy = float(np.sum(self.y_norm2**2 + hat_norm2**2 - 2.0 * cross))
        if self.opts.shrinkage > 0.0:
            # the achieved residual bounds the noise level from above; shrink
            # lam monotonically so noiseless fits anneal to exact LS
            level = self.opts.shrinkage * float(np.mean(np.abs(self.y - y_hat) ** 2))
            if level < self.lam:
                self.lam = level
        return {
            "c": c,
            "u": u,
            "y_hat": y_hat,
            "hat_norm2": hat_norm2,
            "degenerate": degenerate,
        }, energy

    def anneal(self, th_rx, th_tx):
        """Re-fit until the shrinkage weight stops dropping."""
        payload, energy = self.fit(th_rx, th_tx)
        if self.opts.shrinkage == 0.0:
            return payload, energy
        for _ in range(8):
            before = self.lam
            payload, energy = self.fit(th_rx, th_tx)
            if self.lam >= 0.9 * before:
                break
        return payload, energy

    def descent_direction(self, payload, th_rx, th_tx):
        d_rx, d_tx = _atom_derivatives(th_rx, th_tx, self.dictionary)
        v_rx = self._sense(d_rx)
        v_tx = self._sense(d_tx)
        c, u, y_hat = payload["c"], payload["u"], payload["y_hat"]
        # dG/dth_l = -4 sum_t Re{ c_l [s1 conj(v_l^H y) - s2 conj(v_l^H y_hat)] }
        # with s1 = c^H U^H y, s2 = c^H U^H y_hat (both ||y_hat||^2 at the LS point)
        uh_y = (np.conj(u).transpose(0, 2, 1) @ self.y[..., None])[..., 0]
        uh_hat = (np.conj(u).transpose(0, 2, 1) @ y_hat[..., None])[..., 0]
        s1 = np.sum(np.conj(c) * uh_y, axis=1)
        s2 = np.sum(np.conj(c) * uh_hat, axis=1)
        out = []
        for v in (v_rx, v_tx):
            vh_y = (np.conj(v).transpose(0, 2, 1) @ self.y[..., None])[..., 0]
            vh_hat = (np.conj(v).transpose(0, 2, 1) @ y_hat[..., None])[..., 0]
            term = c * (s1[:, None] * np.conj(vh_y) - s2[:, None] * np.conj(vh_hat))
            out.append(4.0 * np.sum(np.real(term), axis=0))  # descent: -dG/dth
        return out[0], out[1]


class _CovarianceGenericProblem:
    """Covariance objective for arbitrary Hermitian per-snapshot matrices."""

    def __init__(self, r_meas, phi, dictionary: Dictionary, opts: SolverOptions):
        self.r_meas = r_meas
        self.phi = phi
        self.dictionary = dictionary
        self.opts = opts

    def fit(self, th_rx, th_tx):
        gamma, u, r_perp, energy, degenerate = _cross_gain_fit(
            self.r_meas, self.phi, th_rx, th_tx, self.dictionary, self.opts.ridge
        )
        return {"gamma": gamma, "u": u, "r_perp": r_perp, "degenerate": degenerate}, energy

    def descent_direction(self, payload, th_rx, th_tx):
        grad_rx, grad_tx = _covariance_gradient_core(
            payload["r_perp"],
            self.phi,
            payload["gamma"],
            payload["u"],
            th_rx,
            th_tx,
            self.dictionary,
            self.opts.gradient_form,
        )
        return -grad_rx, -grad_tx


def _refine(problem, state: _CellState, opts: SolverOptions, target: float):
    """Alternate gain fits with clipped, backtracked joint angle moves.

    Accepts only objective non-increasing steps, so the returned energy never
    exceeds the entry energy. The accepted trust radius carries over to the
    next iteration (doubled, capped at mu0) to keep the number of candidate
    evaluations low. Skips refinement entirely once at/below ``target``.
    """
    entry_fit = getattr(problem, "anneal", problem.fit)
    payload, energy = entry_fit(state.th_rx, state.th_tx)
    if payload["degenerate"] or not opts.perturbation_enabled or energy <= target:
        return payload, energy
    mu = opts.mu0
    for _ in range(opts.p_max):
        g_rx, g_tx = problem.descent_direction(payload, state.th_rx, state.th_tx)
        scale = max(np.max(np.abs(g_rx), initial=0.0), np.max(np.abs(g_tx), initial=0.0))
        if scale <= 0 or not np.isfinite(scale):
            break
        d_rx, d_tx = g_rx / scale, g_tx / scale
        mu = min(2.0 * mu, opts.mu0)
        accepted = False
        moved = 0.0
        for _ in range(_MAX_HALVINGS):
            cand_rx, cand_tx = state.clip(state.th_rx + mu * d_rx, state.th_tx + mu * d_tx)
            moved = max(
                float(np.max(np.abs(cand_rx - state.th_rx), initial=0.0)),
                float(np.max(np.abs(cand_tx - state.th_tx), initial=0.0)),
            )
            if moved < opts.tol_step:
                break
            c_payload, c_energy = problem.fit(cand_rx, cand_tx)
            if c_energy <= energy:
                state.th_rx, state.th_tx = cand_rx, cand_tx
                payload, energy = c_payload, c_energy
                accepted = True
                break
            mu /= 2.0
        if not accepted or moved < opts.tol_step or energy <= target:
            break
    if hasattr(problem, "anneal"):
        # pick up any shrinkage reduction earned by the refined angles
        final_payload, final_energy = problem.anneal(state.th_rx, state.th_tx)
        if final_energy <= energy:
            payload, energy = final_payload, final_energy
    return payload, energy


# ---------------------------------------------------------------------------
# gradients
# ---------------------------------------------------------------------------


def _channel_gradient_core(y_perp, phi, gains, th_rx, th_tx, dictionary, form: str):
    """Ascent direction on the negative summed residual energy.

    g_rx[l] = sum_t Re{ conj(gains[t,l]) * (phi_t @ d_atom_rx_l)^H y_perp_t };
    adding a positive multiple of g to the angles decreases the residual
    energy (the energy derivative is -2 g). The "summed-residual" form pairs
    (sum_t gains * phi d_atom) with (sum_t y_perp_t) instead.
    """
    d_rx, d_tx = _atom_derivatives(th_rx, th_tx, dictionary)
    v_rx = phi @ d_rx
    v_tx = phi @ d_tx
    if form == "summed-residual":
        r_sum = y_perp.sum(axis=0)
        b_rx = np.einsum("tk,tmk->mk", gains, v_rx)
        b_tx = np.einsum("tk,tmk->mk", gains, v_tx)
        g_rx = np.real(np.einsum("mk,m->k", np.conj(b_rx), r_sum))
        g_tx = np.real(np.einsum("mk,m->k", np.conj(b_tx), r_sum))
        return g_rx, g_tx
    w_rx = (np.conj(v_rx).transpose(0, 2, 1) @ y_perp[..., None])[..., 0]
    w_tx = (np.conj(v_tx).transpose(0, 2, 1) @ y_perp[..., None])[..., 0]
    g_rx = np.sum(np.real(np.conj(gains) * w_rx), axis=0)
    g_tx = np.sum(np.real(np.conj(gains) * w_tx), axis=0)
    return g_rx, g_tx


def _cross_gain_fit(r_meas, phi, th_rx, th_tx, dictionary, ridge: float):
    """Cross-gain fit Gamma_t = U^+ R_t (U^+)^H and the residual covariances.

    Row l of the pseudo-inverse of U = [phi a_1, ..., phi a_k] plays the role
    of the per-atom inverse, which makes Gamma the exact Frobenius
    least-squares fit of R_t by U Gamma U^H and keeps it Hermitian. The upper
    triangle is evaluated and mirrored to pin the Hermitian structure exactly.
    """
    atoms = _atoms(th_rx, th_tx, dictionary)
    u = phi @ atoms
    q, r = np.linalg.qr(u)
    diag = np.abs(np.diagonal(r, axis1=-2, axis2=-1))
    degenerate = bool(np.any(diag < 1e-10 * np.maximum(diag.max(axis=-1, keepdims=True), 1e-300)))
    if not degenerate:
        pinv = np.linalg.solve(r, np.conj(q).transpose(0, 2, 1))  # (T, k, m)
    else:
        gram = np.conj(u).transpose(0, 2, 1) @ u
        scale = np.trace(gram, axis1=-2, axis2=-1).real / max(u.shape[-1], 1)
        gram = gram + (ridge * np.maximum(scale, 1e-300))[:, None, None] * np.eye(u.shape[-1])
        pinv = np.linalg.solve(gram, np.conj(u).transpose(0, 2, 1))
    gamma = pinv @ r_meas @ np.conj(pinv).transpose(0, 2, 1)
    upper = np.triu(gamma)
    gamma = upper + np.conj(np.swapaxes(np.triu(gamma, 1), -1, -2))
    r_perp = r_meas - u @ gamma @ np.conj(u).transpose(0, 2, 1)
    energy = float(np.sum(np.abs(r_perp) ** 2))
    return gamma, u, r_perp, energy, degenerate


def _covariance_gradient_core(r_perp, phi, gamma, u, th_rx, th_tx, dictionary, form: str):
    """Exact gradient of sum_t ||r_perp_t||_F^2 w.r.t. each selected angle.

    dG/d(th_rx[l]) = -4 sum_t Re{ sum_q Gamma[t,l,q] u_q^H r_perp_t u'_l }
    with u' the sensing image of the atom's angle derivative. The
    "summed-residual" form pairs the summed residual covariance with the
    per-snapshot weights instead.
    """
    d_rx, d_tx = _atom_derivatives(th_rx, th_tx, dictionary)
    v_rx = phi @ d_rx
    v_tx = phi @ d_tx
    uh = np.conj(u).transpose(0, 2, 1)
    if form == "summed-residual":
        r_ref = r_perp.sum(axis=0)
        pair = lambda v: uh @ (r_ref @ v)  # noqa: E731
    else:
        pair = lambda v: uh @ (r_perp @ v)  # noqa: E731
    out = []
    for v in (v_rx, v_tx):
        p = pair(v)  # p[t,q,l] = u_q^H r_perp u'_l
        term = np.einsum("tlq,tql->tl", gamma, p)
        out.append(-4.0 * np.sum(np.real(term), axis=0))
    return out[0], out[1]


# ---------------------------------------------------------------------------
# channel solvers
# ---------------------------------------------------------------------------


def ppsomp(block: SensingBlock, dictionary: Dictionary, opts: SolverOptions | None = None) -> ChannelEstimate:
    """Simultaneous greedy channel estimation with in-cell angle refinement.

    Per iteration: pick the grid column with the largest summed correlation
    against the per-snapshot residuals, append it, refine all selected angles
    jointly (when enabled), and rebuild the residuals from the refined atoms.
    Stops when the summed residual energy falls below epsilon times the
    initial energy or the support reaches k_max. With the refinement disabled
    this is the on-grid DSOMP baseline.
    """
    opts = opts or SolverOptions()
    y = block.measurements
    phi = block.phi
    psi = dictionary.psi
    t = y.shape[0]
    mn = psi.shape[0]

    e0 = float(np.sum(np.abs(y) ** 2))
    history = [e0]
    state = _CellState(dictionary)
    gains = np.zeros((t, 0), dtype=complex)
    if e0 == 0.0:
        return ChannelEstimate([], gains, np.zeros((t, mn), complex), history, False)

    problem = _ChannelProblem(y, phi, dictionary, opts)
    y_perp = y.copy()
    energy = e0
    warning = False
    banned: set[int] = set()
    k_limit = min(opts.k_max, dictionary.num_columns)
    target = opts.epsilon * e0

    while state.size < k_limit and energy > target:
        z = (np.conj(phi).transpose(0, 2, 1) @ y_perp[..., None])[..., 0]
        corr = np.sum(np.abs(z @ np.conj(psi)), axis=0)
        for j in banned:
            corr[j] = -np.inf
        for ia, id_ in zip(state.aoa_idx, state.aod_idx):
            corr[dictionary.flat_index(ia, id_)] = -np.inf
        j_star = int(np.argmax(corr))
        if not np.isfinite(corr[j_star]):
            break
        aoa_index, aod_index = dictionary.grid_indices(j_star)
        state.append(aoa_index, aod_index)
        payload, new_energy = _refine(problem, state, opts, target)
        if payload["degenerate"]:
            state.drop_last()
            banned.add(j_star)
            warning = True
            continue
        prev_energy = history[-1]
        gains, y_perp, energy = payload["gains"], payload["residuals"], new_energy
        history.append(energy)
        if prev_energy - energy < opts.stall_tol * prev_energy:
            break

    atoms = _atoms(state.th_rx, state.th_tx, dictionary)
    h_hat = gains @ atoms.T if state.size else np.zeros((t, mn), complex)
    return ChannelEstimate(state.entries(), gains, h_hat, history, warning)


def dsomp(block: SensingBlock, dictionary: Dictionary, opts: SolverOptions | None = None) -> ChannelEstimate:
    """On-grid baseline: greedy selection plus LS gains, no angle refinement."""
    opts = opts or SolverOptions()
    return ppsomp(block, dictionary, replace(opts, perturbation_enabled=False))


def perturb_channel(
    block: SensingBlock,
    dictionary: Dictionary,
    support: list[SupportEntry],
    opts: SolverOptions | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Refine the given support jointly; returns (gains, delta_aoa, delta_aod).

    Starts from the offsets carried by the support entries and never leaves
    the per-cell bounds.
    """
    if not support:
        raise ValueError("support must be non-empty")
    opts = opts or SolverOptions()
    state = _CellState.from_support(dictionary, support)
    problem = _ChannelProblem(block.measurements, block.phi, dictionary, opts)
    payload, _ = _refine(problem, state, opts, target=0.0)
    grid = dictionary.grid
    delta_rx = state.th_rx - grid.aoa_angles[state.aoa_idx]
    delta_tx = state.th_tx - grid.aod_angles[state.aod_idx]
    return payload["gains"], delta_rx, delta_tx


def channel_gradient(
    dictionary: Dictionary,
    support: list[SupportEntry],
    gains: np.ndarray,
    residuals: np.ndarray,
    block: SensingBlock,
    form: str = "exact",
) -> tuple[np.ndarray, np.ndarray]:
    """Angle sensitivities of the summed residual energy for a fixed support.

    The returned (g_rx, g_tx) satisfy d(energy)/d(angle) = -2 * g when the
    gains are held fixed, so stepping along +g decreases the energy.
    """
    state = _CellState.from_support(dictionary, support)
    return _channel_gradient_core(residuals, block.phi, gains, state.th_rx, state.th_tx, dictionary, form)


def indirect_covariance(estimate: ChannelEstimate) -> np.ndarray:
    """Sample covariance of the reconstructed snapshots, (1/T) sum h h^H."""
    h = estimate.h_hat
    r = np.einsum("ti,tj->ij", h, np.conj(h)) / h.shape[0]
    return 0.5 * (r + r.conj().T)


# ---------------------------------------------------------------------------
# covariance solvers
# ---------------------------------------------------------------------------


def measurement_covariances(block: SensingBlock) -> np.ndarray:
    """Rank-1 per-snapshot measurement covariances y_t y_t^H, (T, m, m)."""
    y = block.measurements
    return np.einsum("ti,tj->tij", y, np.conj(y))


def ppcomp(block: SensingBlock, dictionary: Dictionary, opts: SolverOptions | None = None) -> CovarianceEstimate:
    """Greedy explicit covariance estimation with in-cell angle refinement.

    Works on the per-snapshot measurement covariances: atoms are scored by
    the summed quadratic form |q_j^H R_perp_t q_j| with q_j the sensing image
    of dictionary column j, then refined like the channel solver but against
    the Frobenius covariance residual. Cross-gains are the joint LS fit, so
    the residual trajectory is non-increasing; a zero-gain fallback guards
    the numerical edge. The estimate is synthesized directly from the
    refined atoms: R_hat = (1/T) sum_t A Gamma_t A^H.
    """
    opts = opts or SolverOptions()
    y = block.measurements
    phi = block.phi
    psi = dictionary.psi
    t = block.snapshots
    mn = psi.shape[0]

    y_norm2 = np.sum(np.abs(y) ** 2, axis=1)
    e0 = float(np.sum(y_norm2**2))
    history = [e0]
    state = _CellState(dictionary)
    if e0 == 0.0:
        return CovarianceEstimate([], np.zeros((t, 0, 0), complex), np.zeros((mn, mn), complex), history, False)

    problem = _CovarianceRank1Problem(y, phi, dictionary, opts)
    payload = {"c": np.zeros((t, 0), complex), "y_hat": np.zeros_like(y)}
    energy = e0
    warning = False
    banned: set[int] = set()
    k_limit = min(opts.k_max, dictionary.num_columns)
    target = opts.epsilon * e0

    while state.size < k_limit and energy > target:
        # |q_j^H R_perp q_j| = | |q_j^H y|^2 - |q_j^H y_hat|^2 | for the rank-2 residual
        z_y = (np.conj(phi).transpose(0, 2, 1) @ y[..., None])[..., 0] @ np.conj(psi)
        z_hat = (np.conj(phi).transpose(0, 2, 1) @ payload["y_hat"][..., None])[..., 0] @ np.conj(psi)
        corr = np.sum(np.abs(np.abs(z_y) ** 2 - np.abs(z_hat) ** 2), axis=0)
        for j in banned:
            corr[j] = -np.inf
        for ia, id_ in zip(state.aoa_idx, state.aod_idx):
            corr[dictionary.flat_index(ia, id_)] = -np.inf
        j_star = int(np.argmax(corr))
        if not np.isfinite(corr[j_star]):
            break
        aoa_index, aod_index = dictionary.grid_indices(j_star)

        prev_payload, prev_energy = payload, energy
        state.append(aoa_index, aod_index)
        new_payload, new_energy = _refine(problem, state, opts, target)
        if new_payload["degenerate"]:
            state.drop_last()
            banned.add(j_star)
            warning = True
            continue
        if new_energy > prev_energy:
            # zero-gain fallback keeps the residual trajectory non-increasing
            state.th_rx[-1] = dictionary.grid.aoa_angles[aoa_index]
            state.th_tx[-1] = dictionary.grid.aod_angles[aod_index]
            c = np.zeros((t, state.size), dtype=complex)
            c[:, : state.size - 1] = prev_payload["c"]
            payload = {"c": c, "y_hat": prev_payload["y_hat"], "degenerate": False}
            energy = prev_energy
        else:
            payload, energy = new_payload, new_energy
        history.append(energy)
        if prev_energy - energy < opts.stall_tol * prev_energy:
            break

    atoms = _atoms(state.th_rx, state.th_tx, dictionary)
    c = payload["c"]
    gamma = c[:, :, None] * np.conj(c)[:, None, :]
    if state.size:
        proj = c @ atoms.T  # (T, MN): per-snapshot channel synthesis A c_t
        r_hat = (proj.T @ np.conj(proj)) / t
        r_hat = 0.5 * (r_hat + r_hat.conj().T)
    else:
        r_hat = np.zeros((mn, mn), dtype=complex)
    return CovarianceEstimate(state.entries(), gamma, r_hat, history, warning)


def dcomp(block: SensingBlock, dictionary: Dictionary, opts: SolverOptions | None = None) -> CovarianceEstimate:
    """On-grid covariance baseline: greedy selection without refinement."""
    opts = opts or SolverOptions()
    return ppcomp(block, dictionary, replace(opts, perturbation_enabled=False))


def perturb_covariance(
    r_meas: np.ndarray,
    block: SensingBlock,
    dictionary: Dictionary,
    support: list[SupportEntry],
    opts: SolverOptions | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Refine a covariance support; returns (cross_gains, delta_aoa, delta_aod).

    Accepts arbitrary Hermitian per-snapshot matrices; the solver-internal
    rank-1 shortcut is not assumed here.
    """
    if not support:
        raise ValueError("support must be non-empty")
    opts = opts or SolverOptions()
    state = _CellState.from_support(dictionary, support)
    problem = _CovarianceGenericProblem(np.asarray(r_meas), block.phi, dictionary, opts)
    payload, _ = _refine(problem, state, opts, target=0.0)
    grid = dictionary.grid
    delta_rx = state.th_rx - grid.aoa_angles[state.aoa_idx]
    delta_tx = state.th_tx - grid.aod_angles[state.aod_idx]
    return payload["gamma"], delta_rx, delta_tx


def covariance_gradient(
    dictionary: Dictionary,
    support: list[SupportEntry],
    cross_gains: np.ndarray,
    residual_covariances: np.ndarray,
    block: SensingBlock,
    form: str = "exact",
) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradient of (1/T) sum_t ||R_perp_t||_F^2 w.r.t. each angle.

    Cross-gains are held fixed; every pair involving an angle contributes,
    via both the left and the right factor of its rank-1 term.
    """
    state = _CellState.from_support(dictionary, support)
    atoms = _atoms(state.th_rx, state.th_tx, dictionary)
    u = block.phi @ atoms
    t = residual_covariances.shape[0]
    g_rx, g_tx = _covariance_gradient_core(
        np.asarray(residual_covariances),
        block.phi,
        np.asarray(cross_gains),
        u,
        state.th_rx,
        state.th_tx,
        dictionary,
        form,
    )
    return g_rx / t, g_tx / t
