"""Dense linear-algebra kernel: pivoted LU solves, thin SVD, block-diagonal lifts.

Everything is 64-bit; the energy-conservation claims of the schemes leave no
budget for reduced precision.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._validation import as_float_matrix, check_finite, check_square

# Pivots below this magnitude are treated as exact zeros.
_PIVOT_FLOOR = 1e-300


class SingularSystemError(np.linalg.LinAlgError):
    """A linear system was singular (or inconsistent) to working precision.

    ``step_index`` carries the time-step index when the failure happened
    inside a stepper, so batch reports can name the offending step.
    """

    def __init__(self, message: str, step_index: int | None = None):
        if step_index is not None:
            message = f"{message} (at step index {step_index})"
        super().__init__(message)
        self.step_index = step_index


class LuSolver:
    """LU factorization with partial pivoting, computed once, solved many times.

    Raises :class:`SingularSystemError` at construction when a pivot falls
    below ``1e-300``.
    """

    def __init__(self, a: np.ndarray, step_index: int | None = None):
        a = check_square(a, "a")
        check_finite(a, "a")
        with warnings.catch_warnings():
            # the zero-pivot advisory duplicates the typed error raised below
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            self._lu, self._piv = scipy.linalg.lu_factor(a, check_finite=False)
        pivots = np.abs(np.diagonal(self._lu))
        if pivots.min() < _PIVOT_FLOOR:
            raise SingularSystemError(
                f"singular matrix: pivot {pivots.min():.3e} below {_PIVOT_FLOOR:.0e}",
                step_index=step_index,
            )

    def solve(self, b: np.ndarray) -> np.ndarray:
        return scipy.linalg.lu_solve((self._lu, self._piv), b, check_finite=False)


def lu_solve(a: np.ndarray, b: np.ndarray, step_index: int | None = None) -> np.ndarray:
    """Solve ``a x = b`` by LU with partial pivoting.

    Parameters
    ----------
    a : ndarray, square
    b : ndarray
        Right-hand side vector or matrix of right-hand sides.
    step_index : int, optional
        Time-step index to attach to a singularity error.
    """
    return LuSolver(a, step_index=step_index).solve(np.asarray(b, dtype=float))


def thin_svd(z: np.ndarray):
    """Thin singular value decomposition ``z = u @ diag(s) @ wt``.

    Returns ``(u, s, wt)`` with ``k = min(m, n)`` columns in ``u``, singular
    values ``s`` in non-increasing order, and ``k`` rows in ``wt``.
    """
    z = as_float_matrix(z, "z")
    check_finite(z, "z")
    return np.linalg.svd(z, full_matrices=False)


@dataclass(frozen=True)
class BlockDiagonalLift:
    """The block-diagonal operator ``I_d (x) V`` applied without materialization.

    A stacked vector of ``d`` component blocks is lifted block-by-block with
    ``V`` (``apply``) or projected block-by-block with ``V^T`` (``project``).
    With orthonormal columns in ``V``, ``project(apply(x)) == x``.
    """

    v: np.ndarray
    d: int

    def __post_init__(self):
        v = as_float_matrix(self.v, "v")
        object.__setattr__(self, "v", v)
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"block count d must be a positive integer, got {self.d}")
        object.__setattr__(self, "d", int(self.d))

    def apply(self, x: np.ndarray) -> np.ndarray:
        n_rows, r = self.v.shape
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.d * r:
            raise ValueError(f"expected length {self.d * r}, got {x.shape[0]}")
        blocks = x.reshape(self.d, r, -1) if x.ndim > 1 else x.reshape(self.d, r)
        out = np.einsum("nr,dr...->dn...", self.v, blocks)
        return out.reshape((self.d * n_rows,) + x.shape[1:])

    def project(self, y: np.ndarray) -> np.ndarray:
        n_rows, r = self.v.shape
        y = np.asarray(y, dtype=float)
        if y.shape[0] != self.d * n_rows:
            raise ValueError(f"expected length {self.d * n_rows}, got {y.shape[0]}")
        blocks = y.reshape(self.d, n_rows, -1) if y.ndim > 1 else y.reshape(self.d, n_rows)
        out = np.einsum("nr,dn...->dr...", self.v, blocks)
        return out.reshape((self.d * r,) + y.shape[1:])
