"""Classical projection baselines without energy-preserving structure.

These reduced models Galerkin-project a conventional semi-discretization of
each PDE and integrate the result with the linearly implicit quadratic-ODE
stepper.  Unlike the energy-preserving schemes, their spatial operators are
the direct difference stencils: the three-point second difference and the
five-point third difference, never powers of the central difference.  The
baselines are expected to drift in energy and may diverge outside the
training window; rollouts truncate at a state-norm bound and record the
divergence step instead of failing.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import as_float_vector, check_positive
from .grid import Grid1D, build_operator
from .kahan import QuadraticODE, kahan_rollout, kahan_step
from .pod import PodBasis


def wave_hamiltonian_rollout(grid: Grid1D, dt: float, n_steps: int,
                             u0: np.ndarray | None = None,
                             v0: np.ndarray | None = None) -> np.ndarray:
    """Integrate the unreduced wave system ``y' = J y`` with ``y = (u, v)``.

    ``J = [[0, I], [Dxx, 0]]`` with the three-point second difference; the
    integrator degenerates to implicit midpoint.  This trajectory is the
    snapshot source for the wave projection baseline.  Defaults reproduce
    the standard initial state ``u0 = sech(x)``, ``v0 = 0``.
    """
    check_positive(dt, "dt")
    n = grid.n
    u0 = 1.0 / np.cosh(grid.nodes) if u0 is None else as_float_vector(u0, "u0")
    v0 = np.zeros(n) if v0 is None else as_float_vector(v0, "v0")
    sys = QuadraticODE(2 * n, linear=_wave_block_operator(grid))
    y, diverged = kahan_rollout(sys, np.concatenate([u0, v0]), dt, n_steps)
    if diverged is not None:  # linear skew-like system; not expected
        raise RuntimeError(f"unreduced wave rollout diverged at step {diverged}")
    return y


def _wave_block_operator(grid: Grid1D) -> np.ndarray:
    n = grid.n
    dxx = build_operator(grid, "second_diff").matrix
    j_mat = np.zeros((2 * n, 2 * n))
    j_mat[:n, n:] = np.eye(n)
    j_mat[n:, :n] = dxx
    return j_mat


def build_galerkin_system(label: str, basis, grid: Grid1D,
                          eta: float = 1.0, gamma: float = 0.022) -> QuadraticODE:
    """Assemble the reduced quadratic ODE for one projection baseline.

    * wave: ``y' = (W^T J W) y`` on stacked ``(u, v)`` snapshots;
    * kdv: ``u' = W^T(-eta (Wu) o (Dx Wu) - gamma^2 Dxxx Wu)``;
    * ch: ``(I - W^T Dxx W) u' = W^T(-3 (Wu) o (Dx Wu) + 2 (Dx Wu) o (Dxx Wu)
      + (Wu) o (Dxxx Wu))`` with the constant mass matrix kept on the left.
    """
    w = basis.basis_ if isinstance(basis, PodBasis) else np.asarray(basis, dtype=float)
    r = w.shape[1]
    if label == "wave":
        return QuadraticODE(r, linear=w.T @ _wave_block_operator(grid) @ w)
    if label == "kdv":
        dx_w = build_operator(grid, "central_diff").matrix @ w
        dxxx_w = build_operator(grid, "third_diff").matrix @ w

        def bilinear(a, b):
            return -0.5 * eta * (w.T @ ((w @ a) * (dx_w @ b) + (w @ b) * (dx_w @ a)))

        def bilinear_matrix(a):
            return -0.5 * eta * (w.T @ ((dx_w * (w @ a)[:, None]) + (w * (dx_w @ a)[:, None])))

        return QuadraticODE(r, bilinear=bilinear, bilinear_matrix=bilinear_matrix,
                            linear=-gamma**2 * (w.T @ dxxx_w))
    if label == "ch":
        dx_w = build_operator(grid, "central_diff").matrix @ w
        dxx_w = build_operator(grid, "second_diff").matrix @ w
        dxxx_w = build_operator(grid, "third_diff").matrix @ w
        mass = np.eye(r) - w.T @ dxx_w

        def bilinear(a, b):
            ua, ub = w @ a, w @ b
            da, db = dx_w @ a, dx_w @ b
            dda, ddb = dxx_w @ a, dxx_w @ b
            d3a, d3b = dxxx_w @ a, dxxx_w @ b
            return 0.5 * (w.T @ (-3.0 * (ua * db + ub * da)
                                 + 2.0 * (da * ddb + db * dda)
                                 + ua * d3b + ub * d3a))

        def bilinear_matrix(a):
            ua, da, dda, d3a = w @ a, dx_w @ a, dxx_w @ a, dxxx_w @ a
            return 0.5 * (w.T @ (-3.0 * (dx_w * ua[:, None] + w * da[:, None])
                                 + 2.0 * (dxx_w * da[:, None] + dx_w * dda[:, None])
                                 + dxxx_w * ua[:, None] + w * d3a[:, None]))

        return QuadraticODE(r, bilinear=bilinear, bilinear_matrix=bilinear_matrix, mass=mass)
    raise ValueError(f"unknown model label {label!r}")


def galerkin_step(label: str, basis, grid: Grid1D, y_red, dt: float,
                  eta: float = 1.0, gamma: float = 0.022,
                  step_index: int | None = None) -> np.ndarray:
    """One baseline step (one-off convenience; :class:`GalerkinRom` caches the system)."""
    sys = build_galerkin_system(label, basis, grid, eta=eta, gamma=gamma)
    return kahan_step(sys, y_red, dt, step_index=step_index)


class GalerkinRom(BaseEstimator):
    """Projection baseline reduced-order model.

    ``fit`` consumes the training snapshots (the stacked ``(u, v)``
    trajectory for the wave model, the primary ``u`` trajectory otherwise)
    and computes the POD basis and the reduced system.  ``predict``
    integrates the baseline and returns the lifted primary trajectory,
    truncated at ``max_state_norm`` with the step recorded in
    ``diverged_at_`` when the run leaves the stable regime.
    """

    def __init__(self, grid: Grid1D, dt: float, model: str = "wave", rank: int = 20,
                 eta: float = 1.0, gamma: float = 0.022, max_state_norm: float = 1e8):
        self.grid = grid
        self.dt = dt
        self.model = model
        self.rank = rank
        self.eta = eta
        self.gamma = gamma
        self.max_state_norm = max_state_norm

    def fit(self, train: np.ndarray, basis=None):
        if self.model not in ("wave", "kdv", "ch"):
            raise ValueError(f"unknown model label {self.model!r}")
        check_positive(self.dt, "dt")
        train = np.asarray(train, dtype=float)
        expected_rows = 2 * self.grid.n if self.model == "wave" else self.grid.n
        if train.ndim != 2 or train.shape[0] != expected_rows:
            raise ValueError(f"training snapshots must be ({expected_rows}, n_times), "
                             f"got {train.shape}")
        if basis is not None:
            self.basis_ = np.asarray(basis, dtype=float)
        else:
            self.pod_ = PodBasis(rank=self.rank).fit(train)
            self.basis_ = self.pod_.basis_
            self.singular_values_ = self.pod_.singular_values_
        self.system_ = build_galerkin_system(self.model, self.basis_, self.grid,
                                             eta=self.eta, gamma=self.gamma)
        self.y0_ = train[:, 0].copy()
        return self

    def predict_reduced(self, n_steps: int, y0: np.ndarray | None = None) -> np.ndarray:
        if n_steps < 1:
            raise ValueError("n_steps must be at least 1")
        start = self.y0_ if y0 is None else as_float_vector(y0, "y0")
        y0_red = self.basis_.T @ start
        out, diverged = kahan_rollout(self.system_, y0_red, self.dt, n_steps,
                                      max_state_norm=self.max_state_norm)
        self.reduced_trajectory_ = out
        self.diverged_at_ = diverged
        return out

    def predict(self, n_steps: int, y0: np.ndarray | None = None) -> np.ndarray:
        """Lifted primary trajectory; the wave model returns the ``u`` half."""
        lifted = self.basis_ @ self.predict_reduced(n_steps, y0=y0)
        return lifted[: self.grid.n]
