"""Snapshot assembly and proper orthogonal decomposition bases.

The reduction layer follows the scikit-learn estimator protocol: a
:class:`PodBasis` is a transformer fitted on a snapshot matrix whose
``transform``/``inverse_transform`` move states between full and reduced
coordinates.  Snapshots are always stored one state per column.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .linalg import BlockDiagonalLift, thin_svd

# component orders of the global snapshot matrices, one block per component
_SNAPSHOT_ORDER = {
    "wave": ("u", "v", "w"),
    "kdv": ("phi", "u", "v", "w"),
    "ch": ("u", "phi", "v", "w", "nu"),
}


@dataclass(frozen=True)
class SnapshotSet:
    """A snapshot matrix with its layout bookkeeping.

    ``global`` layout concatenates the components column-blockwise into an
    ``n_space x (d * n_times)`` matrix so a single spatial basis serves all
    components; ``stacked`` layout stacks components row-blockwise per time
    column into ``(d * n_space) x n_times``.
    """

    data: np.ndarray = field(repr=False)
    layout: str
    component_names: tuple[str, ...]
    n_space: int
    n_times: int

    def __post_init__(self):
        d = len(self.component_names)
        expected = ((self.n_space, d * self.n_times) if self.layout == "global"
                    else (d * self.n_space, self.n_times))
        if self.layout not in ("global", "stacked"):
            raise ValueError(f"layout must be 'global' or 'stacked', got {self.layout!r}")
        if self.data.shape != expected:
            raise ValueError(
                f"{self.layout} layout expects shape {expected}, got {self.data.shape}"
            )


def assemble_snapshots(label: str, u_traj: np.ndarray, aux: dict[str, np.ndarray],
                       layout: str = "global") -> SnapshotSet:
    """Combine the primary trajectory and reconstructed auxiliaries.

    Component blocks appear in the model's fixed order (wave: u,v,w; kdv:
    phi,u,v,w; ch: u,phi,v,w,nu).  All blocks are truncated to the shortest
    component series, which matters for the wave model whose ``v``
    reconstruction has one column fewer than ``u``.
    """
    if label not in _SNAPSHOT_ORDER:
        raise ValueError(f"unknown model label {label!r}")
    order = _SNAPSHOT_ORDER[label]
    u_traj = np.asarray(u_traj, dtype=float)
    blocks = dict(aux)
    blocks["u"] = u_traj
    missing = [name for name in order if name not in blocks]
    if missing:
        raise ValueError(f"missing components for {label}: {missing}")
    n_space = u_traj.shape[0]
    for name in order:
        if np.asarray(blocks[name]).shape[0] != n_space:
            raise ValueError(f"component {name!r} row count differs from u")
    n_times = min(np.asarray(blocks[name]).shape[1] for name in order)
    trimmed = [np.asarray(blocks[name], dtype=float)[:, :n_times] for name in order]
    data = np.hstack(trimmed) if layout == "global" else np.vstack(trimmed)
    return SnapshotSet(data=data, layout=layout, component_names=order,
                       n_space=n_space, n_times=n_times)


class PodBasis(TransformerMixin, BaseEstimator):
    """Orthonormal basis of dominant left singular vectors of a snapshot matrix.

    Parameters
    ----------
    rank : int
        Number of retained modes; must satisfy ``1 <= rank <= min(shape)``
        of the fitted matrix.

    Attributes
    ----------
    basis_ : ndarray of shape (n_rows, rank)
        The retained left singular vectors.
    singular_values_ : ndarray
        The full singular spectrum of the fitted matrix.
    n_rows_ : int
        Row dimension of the fitted matrix.
    """

    def __init__(self, rank: int = 10):
        self.rank = rank

    def fit(self, X, y=None):
        data = X.data if isinstance(X, SnapshotSet) else np.asarray(X, dtype=float)
        if data.ndim != 2:
            raise ValueError(f"snapshot matrix must be 2-D, got shape {data.shape}")
        max_rank = min(data.shape)
        if int(self.rank) != self.rank or not 1 <= self.rank <= max_rank:
            raise ValueError(f"rank must be an integer in [1, {max_rank}], got {self.rank}")
        left, sigma, _ = thin_svd(data)
        self.basis_ = left[:, : int(self.rank)]
        self.singular_values_ = sigma
        self.n_rows_ = data.shape[0]
        return self

    def transform(self, X):
        return self.basis_.T @ np.asarray(X, dtype=float)

    def inverse_transform(self, X):
        return self.basis_ @ np.asarray(X, dtype=float)


def compute_basis(snapshots, rank: int) -> PodBasis:
    """Fit a :class:`PodBasis` of the given rank on a snapshot matrix."""
    return PodBasis(rank=rank).fit(snapshots)


def _basis_array(basis) -> np.ndarray:
    return basis.basis_ if isinstance(basis, PodBasis) else np.asarray(basis, dtype=float)


def project_state(basis, z: np.ndarray, d: int) -> np.ndarray:
    """Blockwise projection of a stacked ``d``-component state to reduced coordinates."""
    v = _basis_array(basis)
    return BlockDiagonalLift(v, d).project(np.asarray(z, dtype=float))


def lift_state(basis, z_red: np.ndarray, d: int) -> np.ndarray:
    """Blockwise lift of stacked reduced coordinates back to the full space."""
    v = _basis_array(basis)
    return BlockDiagonalLift(v, d).apply(np.asarray(z_red, dtype=float))
