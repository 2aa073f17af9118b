"""Energy-preserving reduced-order models on a shared spatial basis.

The reduced schemes are the exact Galerkin projections of the eliminated
full-order schemes onto the span of a basis ``V`` built from global
snapshots.  All nonlinear products are formed on lifted states (``V`` times
reduced coordinates), which is the reference evaluation path; an optional
precomputed third-order tensor path evaluates the same quadratic terms with
``r``-sized objects only and is verified against the lifted path.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import as_float_vector, check_positive
from .fom import reconstruct_aux, wave_initialize
from .grid import Grid1D, build_operator
from .linalg import LuSolver, lu_solve
from .pod import PodBasis, assemble_snapshots

_TENSOR_RANK_GUARD = 512


def _basis_array(basis) -> np.ndarray:
    return basis.basis_ if isinstance(basis, PodBasis) else np.asarray(basis, dtype=float)


def reduced_central_diff(basis, grid: Grid1D) -> np.ndarray:
    """``V^T D V``: the central difference compressed to the basis (skew-symmetric)."""
    v = _basis_array(basis)
    d_mat = build_operator(grid, "central_diff").matrix
    return v.T @ d_mat @ v


def wave_rom_step(u_prev_red, u_curr_red, reduced_diff, dt: float) -> np.ndarray:
    """One reduced wave step ``delta_t^2 u = mu_t^2 Dr^2 u`` (constant matrix)."""
    u_prev_red = as_float_vector(u_prev_red, "u_prev_red")
    u_curr_red = as_float_vector(u_curr_red, "u_curr_red")
    check_positive(dt, "dt")
    d2 = reduced_diff @ reduced_diff
    eye = np.eye(d2.shape[0])
    lhs = eye / dt**2 - 0.25 * d2
    rhs = (2.0 * eye / dt**2 + 0.5 * d2) @ u_curr_red - lhs @ u_prev_red
    return lu_solve(lhs, rhs)


def kdv_rom_step(u_red, basis, reduced_diff, dt: float,
                 eta: float = 1.0, gamma: float = 0.022,
                 step_index: int | None = None) -> np.ndarray:
    """One reduced KdV step with the quadratic term evaluated on lifted states.

    Solves ``(I/dt + (eta/2) Dr V^T diag(V u_n) V + (gamma^2/2) Dr^3) u_{n+1}
    = (I/dt - (gamma^2/2) Dr^3) u_n``.
    """
    u_red = as_float_vector(u_red, "u_red")
    check_positive(dt, "dt")
    v = _basis_array(basis)
    d3 = reduced_diff @ reduced_diff @ reduced_diff
    eye = np.eye(reduced_diff.shape[0])
    lifted = v @ u_red
    lhs = eye / dt + 0.5 * eta * reduced_diff @ ((v.T * lifted[None, :]) @ v) \
        + 0.5 * gamma**2 * d3
    rhs = (eye / dt - 0.5 * gamma**2 * d3) @ u_red
    return lu_solve(lhs, rhs, step_index=step_index)


def ch_rom_step(u_red, basis, reduced_diff, dt: float,
                step_index: int | None = None) -> np.ndarray:
    """One reduced CH step; mirrors the eliminated full-order assembly in the basis."""
    u_red = as_float_vector(u_red, "u_red")
    check_positive(dt, "dt")
    v = _basis_array(basis)
    d2 = reduced_diff @ reduced_diff
    v_diff = v @ reduced_diff
    eye = np.eye(reduced_diff.shape[0])
    mass_over_dt = (eye - d2) / dt
    lifted = v @ u_red
    lifted_nu = v_diff @ u_red
    lhs = mass_over_dt \
        - 0.5 * d2 @ ((v.T * lifted_nu[None, :]) @ v) \
        - 0.5 * d2 @ ((v.T * lifted[None, :]) @ v_diff) \
        + 1.5 * reduced_diff @ ((v.T * lifted[None, :]) @ v) \
        + 0.5 * reduced_diff @ ((v.T * lifted_nu[None, :]) @ v_diff)
    return lu_solve(lhs, mass_over_dt @ u_red, step_index=step_index)


def build_reduced_cubic_tensor(basis, label: str, grid: Grid1D,
                               eta: float = 1.0, gamma: float = 0.022) -> np.ndarray:
    """Precompute ``T[i,j,k]`` so the reduced quadratic term is ``T . u (x) u``.

    After this offline contraction the online quadratic assembly touches only
    ``r``-sized objects.  The tensor is symmetrized in its trailing pair,
    which leaves the evaluated form unchanged because the underlying
    two-level quadratic maps are symmetric under swapping the levels.  The
    wave model has no quadratic term and yields the zero tensor.
    """
    v = _basis_array(basis)
    r = v.shape[1]
    if r > _TENSOR_RANK_GUARD:
        raise ValueError(f"rank {r} exceeds the r^3 storage guard ({_TENSOR_RANK_GUARD})")
    reduced_diff = reduced_central_diff(v, grid)
    if label == "wave":
        return np.zeros((r, r, r))
    if label == "kdv":
        base = np.einsum("ml,mj,mk->ljk", v, v, v, optimize=True)
        tensor = 0.5 * eta * np.einsum("il,ljk->ijk", reduced_diff, base, optimize=True)
    elif label == "ch":
        v_diff = v @ reduced_diff
        d2 = reduced_diff @ reduced_diff
        t1 = np.einsum("ml,mj,mk->ljk", v, v_diff, v, optimize=True)
        t2 = np.einsum("ml,mj,mk->ljk", v, v, v_diff, optimize=True)
        t3 = np.einsum("ml,mj,mk->ljk", v, v, v, optimize=True)
        t4 = np.einsum("ml,mj,mk->ljk", v, v_diff, v_diff, optimize=True)
        tensor = np.einsum("il,ljk->ijk", d2, -0.5 * (t1 + t2), optimize=True) \
            + np.einsum("il,ljk->ijk", reduced_diff, 1.5 * t3 + 0.5 * t4, optimize=True)
    else:
        raise ValueError(f"unknown model label {label!r}")
    return 0.5 * (tensor + tensor.swapaxes(1, 2))


class LigepRom(BaseEstimator):
    """Reduced-order model preserving the polarized global energy.

    ``fit`` consumes the primary-state training trajectory, reconstructs the
    auxiliary components, assembles the global snapshot matrix, and computes
    the POD basis and reduced operators.  ``predict`` integrates the reduced
    scheme and returns the lifted primary trajectory.

    Parameters
    ----------
    grid, dt : spatial grid and time step (same as the full-order run).
    model : {"wave", "kdv", "ch"}
    rank : retained basis size.
    eta, gamma : KdV parameters (ignored elsewhere).
    online_path : {"lifted", "tensor"}
        Quadratic-term evaluation path; "lifted" is the reference,
        "tensor" uses :func:`build_reduced_cubic_tensor`.
    max_state_norm : float
        Reduced rollouts truncate when the state norm exceeds this bound.

    Attributes
    ----------
    pod_ : fitted :class:`PodBasis` (absent when an explicit basis is given).
    basis_ : ndarray (n, rank), the spatial basis actually used.
    singular_values_ : spectrum of the global snapshot matrix (when computed).
    reduced_diff_ : ndarray (rank, rank), ``V^T D V``.
    reduced_trajectory_ : reduced coordinates of the last ``predict`` run.
    diverged_at_ : truncation step index of the last run, or ``None``.
    """

    def __init__(self, grid: Grid1D, dt: float, model: str = "wave", rank: int = 20,
                 eta: float = 1.0, gamma: float = 0.022,
                 online_path: str = "lifted", max_state_norm: float = 1e8):
        self.grid = grid
        self.dt = dt
        self.model = model
        self.rank = rank
        self.eta = eta
        self.gamma = gamma
        self.online_path = online_path
        self.max_state_norm = max_state_norm

    def fit(self, u_train: np.ndarray, basis=None):
        if self.model not in ("wave", "kdv", "ch"):
            raise ValueError(f"unknown model label {self.model!r}")
        if self.online_path not in ("lifted", "tensor"):
            raise ValueError(f"online_path must be 'lifted' or 'tensor', got {self.online_path!r}")
        check_positive(self.dt, "dt")
        u_train = np.asarray(u_train, dtype=float)
        if basis is not None:
            self.basis_ = np.asarray(basis, dtype=float)
        else:
            aux = reconstruct_aux(self.model, u_train, self.grid, self.dt,
                                  eta=self.eta, gamma=self.gamma)
            snapshots = assemble_snapshots(self.model, u_train, aux, layout="global")
            self.pod_ = PodBasis(rank=self.rank).fit(snapshots)
            self.basis_ = self.pod_.basis_
            self.singular_values_ = self.pod_.singular_values_
        self.reduced_diff_ = reduced_central_diff(self.basis_, self.grid)
        self.u0_ = u_train[:, 0].copy()
        self.tensor_ = None
        if self.online_path == "tensor":
            self.tensor_ = build_reduced_cubic_tensor(
                self.basis_, self.model, self.grid, eta=self.eta, gamma=self.gamma)
        return self

    # -- online stage ---------------------------------------------------

    def _rollout_wave(self, u0_red: np.ndarray, n_steps: int):
        d2 = self.reduced_diff_ @ self.reduced_diff_
        eye = np.eye(d2.shape[0])
        lhs = eye / self.dt**2 - 0.25 * d2
        rhs_curr = 2.0 * eye / self.dt**2 + 0.5 * d2
        solver = LuSolver(lhs)
        out = np.empty((d2.shape[0], n_steps + 1))
        out[:, 0] = u0_red
        # reduced second-order Taylor start, mirroring the full-order run
        out[:, 1] = u0_red + 0.5 * self.dt**2 * (d2 @ u0_red)
        for n in range(1, n_steps):
            out[:, n + 1] = solver.solve(rhs_curr @ out[:, n] - lhs @ out[:, n - 1])
            norm = np.linalg.norm(out[:, n + 1])
            if not np.isfinite(norm) or norm > self.max_state_norm:
                return out[:, : n + 2], n + 1
        return out, None

    def _quad_matrix(self, u_red: np.ndarray) -> np.ndarray:
        """State-dependent quadratic block of the reduced step matrix."""
        if self.tensor_ is not None:
            return np.einsum("ijk,j->ik", self.tensor_, u_red)
        v = self.basis_
        if self.model == "kdv":
            lifted = v @ u_red
            return 0.5 * self.eta * self.reduced_diff_ @ ((v.T * lifted[None, :]) @ v)
        lifted = v @ u_red
        lifted_nu = self._v_diff @ u_red
        d_r = self.reduced_diff_
        d2 = self._d2
        return (-0.5 * d2 @ ((v.T * lifted_nu[None, :]) @ v)
                - 0.5 * d2 @ ((v.T * lifted[None, :]) @ self._v_diff)
                + 1.5 * d_r @ ((v.T * lifted[None, :]) @ v)
                + 0.5 * d_r @ ((v.T * lifted_nu[None, :]) @ self._v_diff))

    def _rollout_quadratic(self, u0_red: np.ndarray, n_steps: int):
        r = self.reduced_diff_.shape[0]
        eye = np.eye(r)
        self._d2 = self.reduced_diff_ @ self.reduced_diff_
        self._v_diff = self.basis_ @ self.reduced_diff_
        if self.model == "kdv":
            d3 = self._d2 @ self.reduced_diff_
            lhs_const = eye / self.dt + 0.5 * self.gamma**2 * d3
            rhs_mat = eye / self.dt - 0.5 * self.gamma**2 * d3
        else:
            lhs_const = (eye - self._d2) / self.dt
            rhs_mat = lhs_const
        out = np.empty((r, n_steps + 1))
        out[:, 0] = u0_red
        u_red = u0_red
        for n in range(n_steps):
            lhs = lhs_const + self._quad_matrix(u_red)
            u_red = lu_solve(lhs, rhs_mat @ u_red, step_index=n)
            out[:, n + 1] = u_red
            norm = np.linalg.norm(u_red)
            if not np.isfinite(norm) or norm > self.max_state_norm:
                return out[:, : n + 2], n + 1
        return out, None

    def predict_reduced(self, n_steps: int, u0: np.ndarray | None = None) -> np.ndarray:
        """Integrate ``n_steps`` reduced steps; returns reduced coordinates."""
        if n_steps < 1:
            raise ValueError("n_steps must be at least 1")
        start = self.u0_ if u0 is None else as_float_vector(u0, "u0")
        u0_red = self.basis_.T @ start
        if self.model == "wave":
            out, diverged = self._rollout_wave(u0_red, n_steps)
        else:
            out, diverged = self._rollout_quadratic(u0_red, n_steps)
        self.reduced_trajectory_ = out
        self.diverged_at_ = diverged
        return out

    def predict(self, n_steps: int, u0: np.ndarray | None = None) -> np.ndarray:
        """Integrate and lift: returns the primary-state trajectory ``V u_red``."""
        return self.basis_ @ self.predict_reduced(n_steps, u0=u0)
