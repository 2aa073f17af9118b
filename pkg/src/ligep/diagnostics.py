"""Error metrics and polarized discrete energies for full and reduced runs.

Every scheme in this package conserves a two-level energy: a polarized form
evaluated on consecutive states, so a series over a trajectory with ``m``
snapshot columns has ``m - 1`` entries (the wave formulas additionally
reconstruct the velocity across two levels and lose one more).  Drift series
measure conservation against the initial value; gap series compare full and
reduced energies over a shared horizon.

Model-specific closed forms live in :func:`polarized_energy` and the
vectorized series functions.  :func:`compact_polarized_energy` evaluates the
generic energy of the coupled formulation directly from the polarized
Hamiltonian and the upper-triangular flux splitting; it is an independent
cross-check for the closed forms.

Note on the KdV energy: the cross term carries the same ``gamma**2`` factor
as the squared term.  Dropping it breaks two-level conservation by many
orders of magnitude, so the conserved form is the one implemented.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import as_float_matrix, as_float_vector, check_positive
from .grid import Grid1D, build_operator
from .pod import PodBasis
from .rom import reduced_central_diff
from .systems import MultiSymplecticSystem


def _basis_array(basis) -> np.ndarray:
    if basis is None:
        raise ValueError("a basis is required at the reduced level")
    return basis.basis_ if isinstance(basis, PodBasis) else np.asarray(basis, dtype=float)


def relative_state_error(u_ref, u_approx) -> float:
    """``||u_ref - u_approx||_2 / ||u_ref||_2``; a zero reference is an error."""
    u_ref = as_float_vector(u_ref, "u_ref")
    u_approx = as_float_vector(u_approx, "u_approx")
    if u_ref.shape != u_approx.shape:
        raise ValueError(f"states must have equal length, got {u_ref.shape} "
                         f"and {u_approx.shape}")
    denom = np.linalg.norm(u_ref)
    if denom == 0.0:
        raise ValueError("reference state has zero norm; relative error undefined")
    return float(np.linalg.norm(u_ref - u_approx) / denom)


def state_error_series(ref_traj, approx_traj) -> np.ndarray:
    """Columnwise relative errors of two equally shaped trajectories."""
    ref_traj = as_float_matrix(ref_traj, "ref_traj")
    approx_traj = as_float_matrix(approx_traj, "approx_traj")
    if ref_traj.shape != approx_traj.shape:
        raise ValueError(f"trajectories must have equal shape, got {ref_traj.shape} "
                         f"and {approx_traj.shape}")
    denom = np.linalg.norm(ref_traj, axis=0)
    if np.any(denom == 0.0):
        raise ValueError("reference trajectory has a zero column; relative error undefined")
    return np.linalg.norm(ref_traj - approx_traj, axis=0) / denom


# ---------------------------------------------------------------------------
# closed-form two-level energies

def _wave_terms(du_n, du_n1, v_n, v_n1):
    return 2.0 * du_n * du_n1 + du_n**2 + 2.0 * v_n * v_n1 + v_n**2


def _kdv_terms(u_n, u_n1, du_n, du_n1, eta, gamma):
    return -gamma**2 * (du_n**2 + 2.0 * du_n * du_n1) + eta * u_n**2 * u_n1


def _ch_terms(u_n, u_n1, du_n, du_n1):
    return -3.0 * u_n**2 * u_n1 - du_n**2 * u_n1 - 2.0 * du_n * du_n1 * u_n


def polarized_energy(label: str, level: str, state_n, state_n1, grid: Grid1D,
                     basis=None, eta: float = 1.0, gamma: float = 0.022) -> float:
    """Two-level energy on one pair of consecutive states.

    Wave states are ``(u, v)`` pairs; the other models take the primary
    state alone.  At ``level="rom"`` the states are reduced coordinates and
    the sums run over the lifted vectors, with the spatial derivative taken
    through the reduced operator (lift of ``Dr u``, not ``D`` of the lift).
    """
    if level not in ("fom", "rom"):
        raise ValueError(f"level must be 'fom' or 'rom', got {level!r}")
    if label == "wave":
        u_n, v_n = state_n
        u_n1, v_n1 = state_n1
        u_n = as_float_vector(u_n, "u_n")
        v_n = as_float_vector(v_n, "v_n")
        u_n1 = as_float_vector(u_n1, "u_n1")
        v_n1 = as_float_vector(v_n1, "v_n1")
        if level == "rom":
            v_mat = _basis_array(basis)
            d_red = reduced_central_diff(v_mat, grid)
            du_n, du_n1 = v_mat @ (d_red @ u_n), v_mat @ (d_red @ u_n1)
            v_n, v_n1 = v_mat @ v_n, v_mat @ v_n1
        else:
            d_mat = build_operator(grid, "central_diff").matrix
            du_n, du_n1 = d_mat @ u_n, d_mat @ u_n1
        terms = _wave_terms(du_n, du_n1, v_n, v_n1)
    elif label in ("kdv", "ch"):
        u_n = as_float_vector(state_n, "state_n")
        u_n1 = as_float_vector(state_n1, "state_n1")
        if level == "rom":
            v_mat = _basis_array(basis)
            d_red = reduced_central_diff(v_mat, grid)
            du_n, du_n1 = v_mat @ (d_red @ u_n), v_mat @ (d_red @ u_n1)
            u_n, u_n1 = v_mat @ u_n, v_mat @ u_n1
        else:
            d_mat = build_operator(grid, "central_diff").matrix
            du_n, du_n1 = d_mat @ u_n, d_mat @ u_n1
        if label == "kdv":
            terms = _kdv_terms(u_n, u_n1, du_n, du_n1, eta, gamma)
        else:
            terms = _ch_terms(u_n, u_n1, du_n, du_n1)
    else:
        raise ValueError(f"unknown model label {label!r}")
    return float(grid.dx / 6.0 * np.sum(terms))


def _wave_velocity(u_traj, second_diff, dt):
    # v at level n from u at n and n+1: forward difference minus the
    # averaged second derivative, one column fewer than u
    d2u = second_diff @ u_traj
    return (u_traj[:, 1:] - u_traj[:, :-1]) / dt - 0.25 * dt * (d2u[:, :-1] + d2u[:, 1:])


def fom_energy_series(label: str, u_traj, grid: Grid1D, dt: float | None = None,
                      eta: float = 1.0, gamma: float = 0.022) -> np.ndarray:
    """Energy at each interval of a full-order primary trajectory.

    Returns ``m - 1`` values for ``m`` snapshot columns, except the wave
    model, which needs the velocity at both levels and returns ``m - 2``.
    """
    u_traj = as_float_matrix(u_traj, "u_traj")
    d_mat = build_operator(grid, "central_diff").matrix
    du = d_mat @ u_traj
    if label == "wave":
        if dt is None:
            raise ValueError("dt is required for the wave energy")
        check_positive(dt, "dt")
        d2_mat = d_mat @ d_mat
        v = _wave_velocity(u_traj, d2_mat, dt)
        terms = _wave_terms(du[:, :-2], du[:, 1:-1], v[:, :-1], v[:, 1:])
    elif label == "kdv":
        terms = _kdv_terms(u_traj[:, :-1], u_traj[:, 1:], du[:, :-1], du[:, 1:], eta, gamma)
    elif label == "ch":
        terms = _ch_terms(u_traj[:, :-1], u_traj[:, 1:], du[:, :-1], du[:, 1:])
    else:
        raise ValueError(f"unknown model label {label!r}")
    return grid.dx / 6.0 * np.sum(terms, axis=0)


def rom_energy_series(label: str, u_red_traj, basis, grid: Grid1D,
                      dt: float | None = None, eta: float = 1.0,
                      gamma: float = 0.022) -> np.ndarray:
    """Reduced-level energy series, evaluated on lifted quantities.

    The derivative is lifted from the reduced operator, so this is the
    energy the reduced schemes actually conserve; it is not the full-order
    series of the lifted trajectory.
    """
    u_red_traj = as_float_matrix(u_red_traj, "u_red_traj")
    v_mat = _basis_array(basis)
    d_red = reduced_central_diff(v_mat, grid)
    u_lift = v_mat @ u_red_traj
    du_lift = v_mat @ (d_red @ u_red_traj)
    if label == "wave":
        if dt is None:
            raise ValueError("dt is required for the wave energy")
        check_positive(dt, "dt")
        v_red = _wave_velocity(u_red_traj, d_red @ d_red, dt)
        v_lift = v_mat @ v_red
        terms = _wave_terms(du_lift[:, :-2], du_lift[:, 1:-1], v_lift[:, :-1], v_lift[:, 1:])
    elif label == "kdv":
        terms = _kdv_terms(u_lift[:, :-1], u_lift[:, 1:], du_lift[:, :-1], du_lift[:, 1:],
                           eta, gamma)
    elif label == "ch":
        terms = _ch_terms(u_lift[:, :-1], u_lift[:, 1:], du_lift[:, :-1], du_lift[:, 1:])
    else:
        raise ValueError(f"unknown model label {label!r}")
    return grid.dx / 6.0 * np.sum(terms, axis=0)


def compact_polarized_energy(system: MultiSymplecticSystem, z_n, z_n1,
                             grid: Grid1D) -> float:
    """Generic two-level energy of the coupled formulation.

    ``dx * sum_m [ Sbar(z_m, z_m, z'_m) + (1/3)((Dz)_m L+ z_m
    + (Dz)_m L+ z'_m + (Dz')_m L+ z_m) ]`` with ``L+`` the upper triangle
    of ``L``.  States are component-major vectors of length ``d * n``.
    Independent of the per-model closed forms, and deliberately written as
    a plain per-node loop.
    """
    d, n = system.d, grid.n
    z_n = as_float_vector(z_n, "z_n").reshape(d, n)
    z_n1 = as_float_vector(z_n1, "z_n1").reshape(d, n)
    d_mat = build_operator(grid, "central_diff").matrix
    dz_n = z_n @ d_mat.T
    dz_n1 = z_n1 @ d_mat.T
    l_plus = np.triu(system.l_mat)
    total = 0.0
    for m in range(n):
        a, b = z_n[:, m], z_n1[:, m]
        s_bar = system.hamiltonian.polarized(a, a, b)
        flux = (dz_n[:, m] @ l_plus @ a + dz_n[:, m] @ l_plus @ b
                + dz_n1[:, m] @ l_plus @ a) / 3.0
        total += s_bar + flux
    return float(grid.dx * total)


def drift_series(energy) -> np.ndarray:
    """``|E(t_j) - E(t_0)|`` per entry."""
    energy = as_float_vector(energy, "energy")
    if energy.size == 0:
        raise ValueError("energy series is empty")
    return np.abs(energy - energy[0])


def gap_series(fom_energy, rom_energy) -> np.ndarray:
    """``|E(t_n) - E_r(t_n)|`` per entry; series must share the horizon."""
    fom_energy = as_float_vector(fom_energy, "fom_energy")
    rom_energy = as_float_vector(rom_energy, "rom_energy")
    if fom_energy.shape != rom_energy.shape:
        raise ValueError(f"energy series must have equal length, got "
                         f"{fom_energy.shape} and {rom_energy.shape}")
    return np.abs(fom_energy - rom_energy)


@dataclass
class EnergyReport:
    """Energy bookkeeping of one completed run.

    ``times`` carries one entry per energy value (two-level energies end
    one or two steps before the final snapshot).  ``gap`` is present only
    for reduced runs compared against a full-order reference over the same
    horizon.  ``truncated_at`` records the divergence step of a run cut
    short by the state-norm guard.
    """

    model: str
    method: str
    rank: int | None
    times: np.ndarray
    energy: np.ndarray
    drift: np.ndarray = field(default=None)
    gap: np.ndarray | None = None
    truncated_at: int | None = None

    def __post_init__(self):
        self.times = as_float_vector(self.times, "times")
        self.energy = as_float_vector(self.energy, "energy")
        if self.drift is None:
            self.drift = drift_series(self.energy)
        self.drift = as_float_vector(self.drift, "drift")
        lengths = {self.times.size, self.energy.size, self.drift.size}
        if self.gap is not None:
            self.gap = as_float_vector(self.gap, "gap")
            lengths.add(self.gap.size)
        if len(lengths) != 1:
            raise ValueError("report series must have equal length")

    @property
    def max_drift(self) -> float:
        return float(self.drift.max())
