"""The three multi-symplectic first-order systems and their cubic forms.

Each PDE is recast as ``K z_t + L z_x = grad S(z)`` with skew-symmetric
``K`` and ``L`` acting on a short vector ``z`` of state components, and a
cubic scalar ``S``.  The component orderings follow the first-order
formulations used by the schemes:

* wave: ``z = (u, v, w)`` with ``v = u_t`` and ``w = u_x``;
* kdv: ``z = (phi, u, v, w)`` with ``u = phi_x``, ``v = gamma u_x``;
* ch: ``z = (u, phi, w, v, nu)`` with ``u = phi_x`` and ``nu = u_x``.

``primary_index`` locates the physical state ``u`` inside ``z``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kahan import CubicHamiltonian


@dataclass(frozen=True)
class MultiSymplecticSystem:
    label: str
    d: int
    k_mat: np.ndarray
    l_mat: np.ndarray
    hamiltonian: CubicHamiltonian
    component_names: tuple[str, ...]
    primary_index: int

    def __post_init__(self):
        for name, mat in (("k_mat", self.k_mat), ("l_mat", self.l_mat)):
            if mat.shape != (self.d, self.d):
                raise ValueError(f"{name} must be {self.d}x{self.d}")
            if np.any(mat + mat.T != 0.0):
                raise ValueError(f"{name} must be exactly skew-symmetric")
        if len(self.component_names) != self.d:
            raise ValueError("component_names length must equal d")
        if self.hamiltonian.dim != self.d:
            raise ValueError("hamiltonian dimension must equal d")


def wave_system() -> MultiSymplecticSystem:
    """Linear wave equation ``u_tt = u_xx`` as a 3-component system."""
    k = np.zeros((3, 3))
    k[0, 1], k[1, 0] = -1.0, 1.0
    l = np.zeros((3, 3))
    l[0, 2], l[2, 0] = 1.0, -1.0
    b = np.diag([0.0, 0.5, -0.5])
    s = CubicHamiltonian(3, quadratic_map=None, linear=b)
    return MultiSymplecticSystem("wave", 3, k, l, s, ("u", "v", "w"), 0)


def kdv_system(eta: float = 1.0, gamma: float = 0.022) -> MultiSymplecticSystem:
    """KdV equation ``u_t + eta u u_x + gamma^2 u_xxx = 0``."""
    eta = float(eta)
    gamma = float(gamma)
    k = np.zeros((4, 4))
    k[0, 1], k[1, 0] = 0.5, -0.5
    l = np.zeros((4, 4))
    l[0, 3], l[3, 0] = 1.0, -1.0
    l[1, 2], l[2, 1] = -gamma, gamma
    b = np.zeros((4, 4))
    b[2, 2] = 0.5
    b[1, 3] = b[3, 1] = -0.5

    def q_map(z):
        q = np.zeros((4, 4))
        q[1, 1] = eta * z[1] / 6.0
        return q

    s = CubicHamiltonian(4, quadratic_map=q_map, linear=b)
    return MultiSymplecticSystem("kdv", 4, k, l, s, ("phi", "u", "v", "w"), 1)


def ch_system() -> MultiSymplecticSystem:
    """Camassa-Holm equation ``u_t - u_xxt + 3 u u_x = 2 u_x u_xx + u u_xxx``."""
    k = np.zeros((5, 5))
    k[0, 1], k[1, 0] = 0.5, -0.5
    k[0, 4], k[4, 0] = -0.5, 0.5
    l = np.zeros((5, 5))
    l[0, 3], l[3, 0] = -1.0, 1.0
    l[1, 2], l[2, 1] = 1.0, -1.0
    b = np.zeros((5, 5))
    b[0, 2] = b[2, 0] = -0.5
    b[3, 4] = b[4, 3] = 0.5

    def q_map(z):
        q = np.zeros((5, 5))
        q[0, 0] = -0.5 * z[0]
        q[0, 4] = q[4, 0] = -z[4] / 6.0
        q[4, 4] = -z[0] / 6.0
        return q

    s = CubicHamiltonian(5, quadratic_map=q_map, linear=b)
    return MultiSymplecticSystem("ch", 5, k, l, s, ("u", "phi", "w", "v", "nu"), 0)


def make_system(label: str, eta: float = 1.0, gamma: float = 0.022) -> MultiSymplecticSystem:
    """Build a system by label; ``eta``/``gamma`` only apply to ``kdv``."""
    if label == "wave":
        return wave_system()
    if label == "kdv":
        return kdv_system(eta=eta, gamma=gamma)
    if label == "ch":
        return ch_system()
    raise ValueError(f"unknown model label {label!r}")
