"""Periodic one-dimensional grids and the discrete operator calculus built on them.

The spatial operators are circulant matrices acting on node values of a
periodic grid.  The time-direction operators act on pairs of time levels and
are provided as plain functions.  All difference operators are second order
except the one-sided forward difference, which is first order and only used
inside trapezoid-style constructions where its error cancels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import as_float_vector, check_positive

# offsets, coefficients, and the power p of dx dividing the stencil.
_STENCILS: dict[str, tuple[tuple[int, ...], tuple[float, ...], int]] = {
    "forward_diff": ((0, 1), (-1.0, 1.0), 1),
    "central_diff": ((-1, 1), (-0.5, 0.5), 1),
    "average": ((0, 1), (0.5, 0.5), 0),
    "second_diff": ((-1, 0, 1), (1.0, -2.0, 1.0), 2),
    "third_diff": ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5), 3),
}


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid with ``n`` nodes on ``[a, b)``.

    The node ``x_{n+1}`` is identified with ``x_1``, so every circulant
    operator is a square ``n x n`` matrix and the grid spacing is
    ``(b - a) / n``.

    Parameters
    ----------
    a, b : float
        Domain endpoints, ``b > a``.
    n : int
        Number of nodes, at least 3.
    """

    a: float
    b: float
    n: int

    def __post_init__(self):
        if self.b <= self.a:
            raise ValueError(f"need b > a, got [{self.a}, {self.b}]")
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"need an integer node count n >= 3, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def dx(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def nodes(self) -> np.ndarray:
        return self.a + self.dx * np.arange(self.n)


@dataclass(frozen=True)
class StencilOperator:
    """A circulant finite-difference or averaging operator on a :class:`Grid1D`.

    ``matrix`` is the dense realization; :meth:`apply` is an equivalent
    matrix-free path used by shift-invariance property tests.  The dense
    matrix is authoritative for factorizations.
    """

    kind: str
    grid: Grid1D
    matrix: np.ndarray = field(repr=False)

    def apply(self, u: np.ndarray) -> np.ndarray:
        """Apply the operator along the first axis of ``u`` without the matrix."""
        u = np.asarray(u, dtype=float)
        offsets, coeffs, power = _STENCILS[self.kind]
        scale = self.grid.dx ** power
        out = np.zeros_like(u)
        for off, coef in zip(offsets, coeffs):
            # roll(-off) moves entry j+off into slot j on the periodic ring
            out += (coef / scale) * np.roll(u, -off, axis=0)
        return out


def build_operator(grid: Grid1D, kind: str) -> StencilOperator:
    """Build the circulant matrix for one operator kind.

    Supported kinds: ``forward_diff`` (one-sided d/dx), ``central_diff``
    (the skew-symmetric d/dx used by every scheme here), ``average``
    (two-point forward mean), ``second_diff`` (three-point d2/dx2), and
    ``third_diff`` (five-point d3/dx3, used only by projection baselines,
    never as a shorthand for the cube of ``central_diff``).

    The central difference matrix is exactly skew-symmetric: each pair of
    entries is placed with the same magnitude and opposite signs, so no
    floating-point cancellation is involved.
    """
    if kind not in _STENCILS:
        raise ValueError(f"unknown operator kind {kind!r}; choose from {sorted(_STENCILS)}")
    offsets, coeffs, power = _STENCILS[kind]
    width = max(offsets) - min(offsets) + 1
    if grid.n < width:
        raise ValueError(f"{kind} needs at least {width} nodes, grid has {grid.n}")
    scale = grid.dx ** power
    mat = np.zeros((grid.n, grid.n))
    rows = np.arange(grid.n)
    for off, coef in zip(offsets, coeffs):
        mat[rows, (rows + off) % grid.n] += coef / scale
    return StencilOperator(kind=kind, grid=grid, matrix=mat)


def apply_time_ops(u_prev: np.ndarray, u_next: np.ndarray, dt: float):
    """Forward time difference and two-point time average of a level pair.

    Returns ``(delta, mu)`` with ``delta = (u_next - u_prev)/dt`` and
    ``mu = (u_next + u_prev)/2``.
    """
    u_prev = as_float_vector(u_prev, "u_prev")
    u_next = as_float_vector(u_next, "u_next")
    if u_prev.shape != u_next.shape:
        raise ValueError(
            f"time levels must have equal length, got {u_prev.shape} and {u_next.shape}"
        )
    check_positive(dt, "dt")
    return (u_next - u_prev) / dt, 0.5 * (u_next + u_prev)
