"""Fully discrete energy-preserving full-order models.

Each model advances only the physical state ``u``; the auxiliary components
of the first-order form are eliminated analytically and can be reconstructed
afterwards with :func:`reconstruct_aux` for snapshot assembly.  The spatial
derivative in every scheme is the skew-symmetric central difference ``D``;
higher derivatives are its powers (``D @ D``, ``D @ D @ D``), never the
wider direct stencils, which belong to the projection baselines only.

One step of each scheme is one linear solve.  The wave matrix is constant
and factorized once; the KdV and CH matrices depend on the current state and
are rebuilt and refactorized every step, which exact energy conservation
requires.
"""

from __future__ import annotations

import numpy as np

from ._validation import as_float_vector, check_positive
from .grid import Grid1D, build_operator
from .linalg import LuSolver, SingularSystemError, lu_solve
from .systems import MultiSymplecticSystem

# Relative residual above which the rank-deficient coupled solve is deemed
# inconsistent rather than merely underdetermined.
_COUPLED_RESIDUAL_TOL = 1e-8


def wave_initialize(grid: Grid1D, dt: float):
    """Initial pair ``(u0, u1)`` for the three-level wave scheme.

    ``u0 = sech(x)`` with zero initial velocity; the second level is the
    second-order Taylor start ``u1 = u0 + (dt^2 / 2) D^2 u0``.
    """
    check_positive(dt, "dt")
    x = grid.nodes
    u0 = 1.0 / np.cosh(x)
    d_mat = build_operator(grid, "central_diff").matrix
    u1 = u0 + 0.5 * dt**2 * (d_mat @ (d_mat @ u0))
    return u0, u1


def ch_initialize(grid: Grid1D, c: float = 1.0, a: float = 30.0, x0: float = 0.0) -> np.ndarray:
    """Periodic peaked traveling-wave initial state on ``[0, a]``.

    ``u = (c / cosh(a/2)) cosh(x - x0)`` within half a period of ``x0`` and
    ``(c / cosh(a/2)) cosh(a - (x - x0))`` beyond; the two branches meet
    continuously and the crest of height ``c`` sits at ``|x - x0| = a/2``.
    """
    x = grid.nodes
    scale = c / np.cosh(a / 2.0)
    shifted = x - x0
    return np.where(np.abs(shifted) <= a / 2.0,
                    scale * np.cosh(shifted),
                    scale * np.cosh(a - shifted))


class WaveFom:
    """Three-level scheme ``delta_t^2 u = mu_t^2 D^2 u`` for the linear wave equation."""

    def __init__(self, grid: Grid1D, dt: float):
        self.grid = grid
        self.dt = check_positive(dt, "dt")
        self.d_mat = build_operator(grid, "central_diff").matrix
        d2 = self.d_mat @ self.d_mat
        eye = np.eye(grid.n)
        # (I/dt^2 - D^2/4) u_next = (2/dt^2 + D^2/2) u_curr - (I/dt^2 - D^2/4) u_prev
        self._lhs = eye / dt**2 - 0.25 * d2
        self._rhs_curr = 2.0 * eye / dt**2 + 0.5 * d2
        self._solver = LuSolver(self._lhs)

    def step(self, u_prev: np.ndarray, u_curr: np.ndarray) -> np.ndarray:
        u_prev = as_float_vector(u_prev, "u_prev")
        u_curr = as_float_vector(u_curr, "u_curr")
        return self._solver.solve(self._rhs_curr @ u_curr - self._lhs @ u_prev)

    def run(self, u0: np.ndarray, u1: np.ndarray, n_steps: int) -> np.ndarray:
        """Integrate to ``n_steps`` intervals; returns ``(n, n_steps + 1)``."""
        if n_steps < 1:
            raise ValueError("n_steps must be at least 1")
        out = np.empty((self.grid.n, n_steps + 1))
        out[:, 0] = u0
        out[:, 1] = u1
        for n in range(1, n_steps):
            out[:, n + 1] = self.step(out[:, n - 1], out[:, n])
        return out


class KdvFom:
    """Linearly implicit scheme for ``u_t + eta u u_x + gamma^2 u_xxx = 0``.

    One step solves
    ``(I/dt + (eta/2) D diag(u_n) + (gamma^2/2) D^3) u_{n+1}
    = (I/dt - (gamma^2/2) D^3) u_n``.
    """

    def __init__(self, grid: Grid1D, dt: float, eta: float = 1.0, gamma: float = 0.022):
        self.grid = grid
        self.dt = check_positive(dt, "dt")
        self.eta = float(eta)
        self.gamma = float(gamma)
        self.d_mat = build_operator(grid, "central_diff").matrix
        d3 = self.d_mat @ self.d_mat @ self.d_mat
        eye = np.eye(grid.n)
        self._lhs_const = eye / dt + 0.5 * self.gamma**2 * d3
        self._rhs_mat = eye / dt - 0.5 * self.gamma**2 * d3

    def step(self, u: np.ndarray, step_index: int | None = None) -> np.ndarray:
        u = as_float_vector(u, "u")
        lhs = self._lhs_const + 0.5 * self.eta * (self.d_mat * u[None, :])
        return lu_solve(lhs, self._rhs_mat @ u, step_index=step_index)

    def run(self, u0: np.ndarray, n_steps: int) -> np.ndarray:
        out = np.empty((self.grid.n, n_steps + 1))
        out[:, 0] = u0
        for n in range(n_steps):
            out[:, n + 1] = self.step(out[:, n], step_index=n)
        return out


class ChFom:
    """Linearly implicit scheme for the Camassa-Holm equation.

    One step solves the eliminated form
    ``((I - D^2)/dt - (1/2) D^2 diag(D u_n) - (1/2) D^2 diag(u_n) D
    + (3/2) D diag(u_n) + (1/2) D diag(D u_n) D) u_{n+1} = ((I - D^2)/dt) u_n``.
    The two terms ending in ``D`` share one matrix product per step.
    """

    def __init__(self, grid: Grid1D, dt: float):
        self.grid = grid
        self.dt = check_positive(dt, "dt")
        self.d_mat = build_operator(grid, "central_diff").matrix
        self._d2 = self.d_mat @ self.d_mat
        self._mass_over_dt = (np.eye(grid.n) - self._d2) / dt

    def step(self, u: np.ndarray, step_index: int | None = None) -> np.ndarray:
        u = as_float_vector(u, "u")
        nu = self.d_mat @ u
        lhs = self._mass_over_dt - 0.5 * (self._d2 * nu[None, :]) \
            + 1.5 * (self.d_mat * u[None, :]) \
            + (-0.5 * (self._d2 * u[None, :]) + 0.5 * (self.d_mat * nu[None, :])) @ self.d_mat
        return lu_solve(lhs, self._mass_over_dt @ u, step_index=step_index)

    def run(self, u0: np.ndarray, n_steps: int) -> np.ndarray:
        out = np.empty((self.grid.n, n_steps + 1))
        out[:, 0] = u0
        for n in range(n_steps):
            out[:, n + 1] = self.step(out[:, n], step_index=n)
        return out


def wave_fom_step(u_prev, u_curr, grid: Grid1D, dt: float) -> np.ndarray:
    """Single wave step; builds the constant matrix on every call.

    Convenience for small verification instances; use :class:`WaveFom` for
    repeated stepping.
    """
    return WaveFom(grid, dt).step(u_prev, u_curr)


def kdv_fom_step(u, grid: Grid1D, dt: float, eta: float = 1.0, gamma: float = 0.022) -> np.ndarray:
    """Single KdV step (one-off convenience; see :class:`KdvFom`)."""
    return KdvFom(grid, dt, eta=eta, gamma=gamma).step(u)


def ch_fom_step(u, grid: Grid1D, dt: float) -> np.ndarray:
    """Single CH step (one-off convenience; see :class:`ChFom`)."""
    return ChFom(grid, dt).step(u)


def trapezoid_antiderivative(f: np.ndarray, grid: Grid1D) -> np.ndarray:
    """Antiderivative by the trapezoid rule with zero at the first node.

    ``phi_1 = 0`` and ``phi_{j+1} = phi_j + (dx/2)(f_j + f_{j+1})``.  A 2-D
    input is integrated column by column.
    """
    f = np.asarray(f, dtype=float)
    if f.shape[0] != grid.n:
        raise ValueError(f"expected {grid.n} rows, got {f.shape[0]}")
    out = np.zeros_like(f)
    out[1:] = np.cumsum(0.5 * grid.dx * (f[:-1] + f[1:]), axis=0)
    return out


def _time_derivative(u_traj: np.ndarray, dt: float) -> np.ndarray:
    """Second-order time derivative of a trajectory: central inside, one-sided at the ends."""
    ut = np.empty_like(u_traj)
    ut[:, 1:-1] = (u_traj[:, 2:] - u_traj[:, :-2]) / (2.0 * dt)
    ut[:, 0] = (-3.0 * u_traj[:, 0] + 4.0 * u_traj[:, 1] - u_traj[:, 2]) / (2.0 * dt)
    ut[:, -1] = (3.0 * u_traj[:, -1] - 4.0 * u_traj[:, -2] + u_traj[:, -3]) / (2.0 * dt)
    return ut


def reconstruct_aux(label: str, u_traj: np.ndarray, grid: Grid1D, dt: float,
                    eta: float = 1.0, gamma: float = 0.022) -> dict[str, np.ndarray]:
    """Recover the eliminated auxiliary components along a ``u`` trajectory.

    Returns a dict of snapshot matrices keyed by component name:

    * wave: ``v`` (from ``v_n = delta_t u_n - (dt/2) mu_t D^2 u_n``, one
      column fewer than ``u``) and ``w = D u``;
    * kdv: ``phi`` (trapezoid antiderivative), ``v = gamma D u``,
      ``w = (gamma/2) D v + (eta/4) u^2``;
    * ch: ``phi``, ``nu = D u``, ``w`` (antiderivative of ``u_t / 2`` with
      ``u_t`` by second-order differences in time), ``v = u nu + D w``.
    """
    u_traj = np.asarray(u_traj, dtype=float)
    if u_traj.ndim != 2 or u_traj.shape[0] != grid.n:
        raise ValueError(f"u_traj must be ({grid.n}, n_times), got {u_traj.shape}")
    if u_traj.shape[1] < 3:
        raise ValueError("need at least 3 time levels to reconstruct auxiliaries")
    check_positive(dt, "dt")
    d_mat = build_operator(grid, "central_diff").matrix
    if label == "wave":
        d2 = d_mat @ d_mat
        v = (u_traj[:, 1:] - u_traj[:, :-1]) / dt \
            - 0.25 * dt * (d2 @ (u_traj[:, :-1] + u_traj[:, 1:]))
        return {"v": v, "w": d_mat @ u_traj}
    if label == "kdv":
        v = gamma * (d_mat @ u_traj)
        w = 0.5 * gamma * (d_mat @ v) + 0.25 * eta * u_traj**2
        return {"phi": trapezoid_antiderivative(u_traj, grid), "v": v, "w": w}
    if label == "ch":
        nu = d_mat @ u_traj
        w = trapezoid_antiderivative(0.5 * _time_derivative(u_traj, dt), grid)
        v = u_traj * nu + d_mat @ w
        return {"phi": trapezoid_antiderivative(u_traj, grid), "v": v, "w": w, "nu": nu}
    raise ValueError(f"unknown model label {label!r}")


def ligep_compact_step(system: MultiSymplecticSystem, z: np.ndarray, grid: Grid1D,
                       dt: float, step_index: int | None = None) -> np.ndarray:
    """One step of the coupled first-order scheme, all components at once.

    ``z`` stacks the ``d`` components blockwise (component ``i`` occupies
    ``z[i*n:(i+1)*n]``).  The step solves

    ``(K/dt (x) I + (L (x) D)/2 - 3 Qhat(z_n) - B (x) I) z_{n+1}
    = (K/dt (x) I - (L (x) D)/2 + B (x) I) z_n + c (x) 1``

    where ``Qhat`` scatters the per-node matrices ``Q(z_m)``.  The system
    matrix is structurally rank-deficient (``K`` is singular), so a minimum
    norm least-squares solve is used and the relative residual is checked;
    an inconsistent system raises :class:`SingularSystemError`.  This
    stepper exists to verify the eliminated per-model schemes on small
    grids, not for production stepping.
    """
    d, n = system.d, grid.n
    z = as_float_vector(z, "z")
    if z.shape[0] != d * n:
        raise ValueError(f"z must have length {d * n}, got {z.shape[0]}")
    check_positive(dt, "dt")
    d_mat = build_operator(grid, "central_diff").matrix
    eye = np.eye(n)
    k_big = np.kron(system.k_mat / dt, eye)
    l_big = np.kron(system.l_mat, d_mat)
    b_big = np.kron(system.hamiltonian.linear, eye)
    q_big = np.zeros((d * n, d * n))
    z_nodes = z.reshape(d, n)
    for m in range(n):
        q_m = system.hamiltonian.q_matrix(z_nodes[:, m])
        for i in range(d):
            for j in range(d):
                if q_m[i, j] != 0.0:
                    q_big[i * n + m, j * n + m] += q_m[i, j]
    c_big = np.kron(system.hamiltonian.shift, np.ones(n))
    lhs = k_big + 0.5 * l_big - 3.0 * q_big - b_big
    rhs = (k_big - 0.5 * l_big + b_big) @ z + c_big
    z_next, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    scale = max(np.linalg.norm(rhs), 1.0)
    residual = np.linalg.norm(lhs @ z_next - rhs) / scale
    if residual > _COUPLED_RESIDUAL_TOL:
        raise SingularSystemError(
            f"coupled step inconsistent: relative residual {residual:.3e}",
            step_index=step_index,
        )
    return z_next
