"""Linearly implicit, energy-preserving solvers and reduced-order models.

Full-order and reduced-order schemes for three multi-symplectic PDEs (the
linear wave equation, Korteweg-de Vries, Camassa-Holm) that conserve a
polarized discrete energy to round-off, one linear solve per step, with
classical projection baselines and a config-driven benchmark runner.
"""

from .diagnostics import (EnergyReport, compact_polarized_energy, drift_series,
                          fom_energy_series, gap_series, polarized_energy,
                          relative_state_error, rom_energy_series,
                          state_error_series)
from .experiments import (ExperimentConfig, emit_plot_scripts, load_config,
                          run_experiment)
from .fom import (ChFom, KdvFom, WaveFom, ch_fom_step, ch_initialize,
                  kdv_fom_step, ligep_compact_step, reconstruct_aux,
                  trapezoid_antiderivative, wave_fom_step, wave_initialize)
from .galerkin import (GalerkinRom, build_galerkin_system, galerkin_step,
                       wave_hamiltonian_rollout)
from .grid import Grid1D, StencilOperator, apply_time_ops, build_operator
from .kahan import (CubicHamiltonian, QuadraticODE, grad_polarized, kahan_rollout,
                    kahan_step, polarize_cubic, polarize_quadratic)
from .linalg import (BlockDiagonalLift, LuSolver, SingularSystemError, lu_solve,
                     thin_svd)
from .pod import (PodBasis, SnapshotSet, assemble_snapshots, compute_basis,
                  lift_state, project_state)
from .rom import (LigepRom, build_reduced_cubic_tensor, ch_rom_step, kdv_rom_step,
                  reduced_central_diff, wave_rom_step)
from .systems import (MultiSymplecticSystem, ch_system, kdv_system, make_system,
                      wave_system)

__version__ = "0.1.0"

__all__ = [
    "BlockDiagonalLift",
    "ChFom",
    "CubicHamiltonian",
    "EnergyReport",
    "ExperimentConfig",
    "GalerkinRom",
    "Grid1D",
    "KdvFom",
    "LigepRom",
    "LuSolver",
    "MultiSymplecticSystem",
    "PodBasis",
    "QuadraticODE",
    "SingularSystemError",
    "SnapshotSet",
    "StencilOperator",
    "WaveFom",
    "apply_time_ops",
    "assemble_snapshots",
    "build_galerkin_system",
    "build_operator",
    "build_reduced_cubic_tensor",
    "ch_fom_step",
    "ch_initialize",
    "ch_rom_step",
    "ch_system",
    "compact_polarized_energy",
    "compute_basis",
    "drift_series",
    "emit_plot_scripts",
    "fom_energy_series",
    "galerkin_step",
    "gap_series",
    "grad_polarized",
    "kahan_rollout",
    "kahan_step",
    "kdv_fom_step",
    "kdv_rom_step",
    "kdv_system",
    "lift_state",
    "ligep_compact_step",
    "load_config",
    "lu_solve",
    "make_system",
    "polarize_cubic",
    "polarize_quadratic",
    "polarized_energy",
    "project_state",
    "reconstruct_aux",
    "reduced_central_diff",
    "relative_state_error",
    "rom_energy_series",
    "run_experiment",
    "state_error_series",
    "thin_svd",
    "trapezoid_antiderivative",
    "wave_fom_step",
    "wave_hamiltonian_rollout",
    "wave_initialize",
    "wave_rom_step",
    "wave_system",
]
