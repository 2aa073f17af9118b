"""Linearly implicit integration of quadratic ODEs and polarization machinery.

The integrator treats ``M y' = T(y, y) + B y + c`` with a symmetric bilinear
map ``T``, symmetric ``B``, and an optional constant mass matrix ``M``.  One
step solves a single linear system: the quadratic term is evaluated across
the two time levels as ``T(y_n, y_{n+1})`` and the linear term as the
midpoint average, so no nonlinear iteration is ever needed.

The cubic-form half of the module carries the scalar functions
``S(z) = z^T Q(z) z + z^T B z + c^T z + d`` driving the multi-symplectic
systems, together with their symmetric trilinear polarization.
"""

from __future__ import annotations

import numpy as np

from ._validation import as_float_vector, check_positive, check_square
from .linalg import LuSolver, lu_solve

_CHECK_RNG_SEED = 7
_SYMMETRY_RTOL = 1e-13


def _as_square(mat, dim: int, name: str) -> np.ndarray:
    if mat is None:
        return np.zeros((dim, dim))
    mat = check_square(np.asarray(mat, dtype=float), name)
    if mat.shape[0] != dim:
        raise ValueError(f"{name} must be {dim}x{dim}, got {mat.shape}")
    return mat


def _as_symmetric(mat, dim: int, name: str) -> np.ndarray:
    mat = _as_square(mat, dim, name)
    scale = max(1.0, np.abs(mat).max())
    if np.abs(mat - mat.T).max() > 1e-12 * scale:
        raise ValueError(f"{name} must be symmetric")
    return mat


class QuadraticODE:
    """Right-hand side ``T(y, y) + B y + c`` with optional mass matrix.

    Parameters
    ----------
    dim : int
        State dimension.
    bilinear : callable, optional
        Symmetric bilinear map ``(a, b) -> vector``; ``None`` means the
        quadratic part vanishes.  Symmetry is spot-checked on seeded random
        pairs at construction.
    linear : ndarray, optional
        Matrix ``B``.  The energy theory behind the schemes assumes a
        symmetric ``B``, but the integrator itself does not need it (with a
        vanishing quadratic part it is implicit midpoint for any ``B``), so
        symmetry is not enforced here.
    constant : ndarray, optional
        Constant forcing ``c``.
    bilinear_matrix : callable, optional
        Map ``a -> T(a, .)`` as a ``dim x dim`` matrix.  Without it the step
        matrix is assembled column-by-column from ``bilinear``, which costs
        ``dim`` map evaluations per step.
    mass : ndarray, optional
        Constant invertible mass matrix ``M``; identity when omitted.
    """

    def __init__(self, dim, bilinear=None, linear=None, constant=None,
                 bilinear_matrix=None, mass=None):
        self.dim = int(dim)
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {dim}")
        self.bilinear = bilinear
        self.bilinear_matrix = bilinear_matrix
        self.linear = _as_square(linear, self.dim, "linear")
        self.constant = (np.zeros(self.dim) if constant is None
                         else as_float_vector(constant, "constant"))
        if self.constant.shape[0] != self.dim:
            raise ValueError(f"constant must have length {dim}")
        self.mass = None
        if mass is not None:
            self.mass = check_square(np.asarray(mass, dtype=float), "mass")
            if self.mass.shape[0] != self.dim:
                raise ValueError(f"mass must be {dim}x{dim}, got {self.mass.shape}")
        self._check_symmetry()

    def _check_symmetry(self):
        if self.bilinear is None:
            return
        rng = np.random.default_rng(_CHECK_RNG_SEED)
        for _ in range(3):
            a = rng.standard_normal(self.dim)
            b = rng.standard_normal(self.dim)
            ab = np.asarray(self.bilinear(a, b), dtype=float)
            ba = np.asarray(self.bilinear(b, a), dtype=float)
            scale = max(1.0, np.abs(ab).max())
            if np.abs(ab - ba).max() > _SYMMETRY_RTOL * scale:
                raise ValueError("bilinear map is not symmetric: T(a,b) != T(b,a)")
            if self.bilinear_matrix is not None:
                via_matrix = np.asarray(self.bilinear_matrix(a), dtype=float) @ b
                if np.abs(ab - via_matrix).max() > 1e-11 * scale:
                    raise ValueError("bilinear_matrix disagrees with bilinear")

    def quadratic(self, y: np.ndarray) -> np.ndarray:
        """The quadratic form ``Q(y) = T(y, y)``."""
        y = as_float_vector(y, "y")
        if self.bilinear is None:
            return np.zeros(self.dim)
        return np.asarray(self.bilinear(y, y), dtype=float)

    def rhs(self, y: np.ndarray) -> np.ndarray:
        """``T(y, y) + B y + c`` (not premultiplied by the inverse mass)."""
        return self.quadratic(y) + self.linear @ y + self.constant

    def bilinear_as_matrix(self, y: np.ndarray) -> np.ndarray:
        """The matrix of ``b -> T(y, b)``."""
        if self.bilinear is None and self.bilinear_matrix is None:
            return np.zeros((self.dim, self.dim))
        if self.bilinear_matrix is not None:
            return np.asarray(self.bilinear_matrix(y), dtype=float)
        cols = np.eye(self.dim)
        return np.column_stack([self.bilinear(y, cols[:, j]) for j in range(self.dim)])


def polarize_quadratic(sys: QuadraticODE, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Polarization ``(Q(a+b) - Q(a) - Q(b)) / 2`` of the quadratic part.

    Evaluated through the quadratic form itself so tests can compare it
    against the bilinear map independently; by bilinearity the two agree.
    """
    a = as_float_vector(a, "a")
    b = as_float_vector(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"vectors must have equal length, got {a.shape} and {b.shape}")
    return 0.5 * (sys.quadratic(a + b) - sys.quadratic(a) - sys.quadratic(b))


def kahan_step(sys: QuadraticODE, y: np.ndarray, dt: float,
               step_index: int | None = None) -> np.ndarray:
    """One linearly implicit step of ``M y' = T(y,y) + B y + c``.

    Solves ``(M/dt - T(y_n, .) - B/2) y_{n+1} = (M/dt + B/2) y_n + c``.
    The step matrix depends on ``y_n`` and is factorized anew on every call;
    see :func:`kahan_rollout` for the constant-matrix fast path.
    """
    y = as_float_vector(y, "y")
    check_positive(dt, "dt")
    mass = np.eye(sys.dim) if sys.mass is None else sys.mass
    t_mat = sys.bilinear_as_matrix(y)
    a = mass / dt - t_mat - 0.5 * sys.linear
    rhs = (mass / dt + 0.5 * sys.linear) @ y + sys.constant
    return lu_solve(a, rhs, step_index=step_index)


def kahan_rollout(sys: QuadraticODE, y0: np.ndarray, dt: float, n_steps: int,
                  max_state_norm: float = 1e8):
    """Integrate ``n_steps`` steps; returns ``(trajectory, diverged_at)``.

    ``trajectory`` holds one state per column including the initial state.
    When a state norm exceeds ``max_state_norm`` or turns non-finite the
    rollout stops, the trajectory is truncated after the offending state,
    and ``diverged_at`` records its step index; otherwise it is ``None``.
    With no quadratic part the step matrix is constant and factorized once.
    """
    y0 = as_float_vector(y0, "y0")
    check_positive(dt, "dt")
    out = np.empty((sys.dim, n_steps + 1))
    out[:, 0] = y0
    constant_matrix = sys.bilinear is None and sys.bilinear_matrix is None
    solver = None
    if constant_matrix:
        mass = np.eye(sys.dim) if sys.mass is None else sys.mass
        solver = LuSolver(mass / dt - 0.5 * sys.linear)
        rhs_mat = mass / dt + 0.5 * sys.linear
    y = y0
    for n in range(n_steps):
        if constant_matrix:
            y = solver.solve(rhs_mat @ y + sys.constant)
        else:
            y = kahan_step(sys, y, dt, step_index=n)
        out[:, n + 1] = y
        norm = np.linalg.norm(y)
        if not np.isfinite(norm) or norm > max_state_norm:
            return out[:, : n + 2], n + 1
    return out, None


class CubicHamiltonian:
    """Scalar cubic form ``S(z) = z^T Q(z) z + z^T B z + c^T z + d``.

    ``quadratic_map`` returns the symmetric matrix ``Q(z)`` whose entries are
    linear and homogeneous in ``z``; equivalently ``6 Q(z)`` is the linear
    part of the Hessian of ``S``.  Both properties are spot-checked on
    seeded random vectors at construction.
    """

    def __init__(self, dim, quadratic_map=None, linear=None, shift=None, offset=0.0):
        self.dim = int(dim)
        self.quadratic_map = quadratic_map
        self.linear = _as_symmetric(linear, self.dim, "linear")
        self.shift = np.zeros(self.dim) if shift is None else as_float_vector(shift, "shift")
        if self.shift.shape[0] != self.dim:
            raise ValueError(f"shift must have length {dim}")
        self.offset = float(offset)
        self._check_map()

    def _check_map(self):
        q0 = self.q_matrix(np.zeros(self.dim))
        if np.abs(q0).max() > 0.0:
            raise ValueError("quadratic_map must vanish at z = 0")
        rng = np.random.default_rng(_CHECK_RNG_SEED)
        for _ in range(3):
            z = rng.standard_normal(self.dim)
            q = self.q_matrix(z)
            scale = max(1.0, np.abs(q).max())
            if np.abs(q - q.T).max() > _SYMMETRY_RTOL * scale:
                raise ValueError("quadratic_map must return symmetric matrices")
            if np.abs(self.q_matrix(2.0 * z) - 2.0 * q).max() > _SYMMETRY_RTOL * scale:
                raise ValueError("quadratic_map entries must be linear homogeneous in z")

    def q_matrix(self, z: np.ndarray) -> np.ndarray:
        if self.quadratic_map is None:
            return np.zeros((self.dim, self.dim))
        return np.asarray(self.quadratic_map(np.asarray(z, dtype=float)), dtype=float)

    def value(self, z: np.ndarray) -> float:
        z = as_float_vector(z, "z")
        return float(z @ self.q_matrix(z) @ z + z @ self.linear @ z
                     + self.shift @ z + self.offset)

    def polarized(self, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> float:
        """Symmetric trilinear form agreeing with ``S`` on the diagonal."""
        x = as_float_vector(x, "x")
        y = as_float_vector(y, "y")
        z = as_float_vector(z, "z")
        if not (x.shape == y.shape == z.shape):
            raise ValueError("polarized arguments must have equal length")
        cubic = x @ self.q_matrix(y) @ z
        quad = (x @ self.linear @ y + y @ self.linear @ z + z @ self.linear @ x) / 3.0
        lin = self.shift @ (x + y + z) / 3.0
        return float(cubic + quad + lin + self.offset)

    def grad_polarized(self, y: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Gradient of the polarized form in its first slot: ``Q(y) z + B(y+z)/3 + c/3``."""
        y = as_float_vector(y, "y")
        z = as_float_vector(z, "z")
        if y.shape != z.shape:
            raise ValueError("grad_polarized arguments must have equal length")
        return self.q_matrix(y) @ z + self.linear @ (y + z) / 3.0 + self.shift / 3.0


def polarize_cubic(hamiltonian: CubicHamiltonian, x, y, z) -> float:
    """Module-level alias for :meth:`CubicHamiltonian.polarized`."""
    return hamiltonian.polarized(x, y, z)


def grad_polarized(hamiltonian: CubicHamiltonian, y, z) -> np.ndarray:
    """Module-level alias for :meth:`CubicHamiltonian.grad_polarized`."""
    return hamiltonian.grad_polarized(y, z)
