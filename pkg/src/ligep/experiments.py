"""Configuration-driven benchmark runner.

One experiment runs the full-order model over the full horizon, builds the
reduction bases from the training window only, rolls out the requested
reduced models at every rank, and writes one directory of CSV reports per
run plus a manifest.  Reduced runs that hit a singular step matrix are
recorded as failed runs with the step index; they never abort the batch.
Output is deterministic: repeated runs of one config produce byte-identical
CSV files.

Config files are flat ``key = value`` text.  Keys mirror
:class:`ExperimentConfig`: ``model``, domain ``a`` and ``b``, ``dx``,
``dt``, ``t_train``, ``t_final``, ``ranks`` (comma-separated), ``methods``
(comma-separated subset of ``ligep-rom, pod-galerkin``), ``eta``, ``gamma``
(KdV), ``ch_c``, ``ch_a``, ``ch_x0`` (peakon height, period, center),
``output_dir``, ``seed``, ``state_stride``.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .diagnostics import (drift_series, fom_energy_series, gap_series,
                          rom_energy_series, state_error_series)
from .fom import ChFom, KdvFom, WaveFom, ch_initialize, wave_initialize
from .galerkin import GalerkinRom, wave_hamiltonian_rollout
from .grid import Grid1D
from .linalg import SingularSystemError
from .rom import LigepRom

_METHODS = ("ligep-rom", "pod-galerkin")
_MODELS = ("wave", "kdv", "ch")
_STEP_COUNT_RTOL = 1e-8


def _as_step_count(span: float, step: float, name: str) -> int:
    count = span / step
    rounded = int(round(count))
    if rounded < 1 or abs(count - rounded) > _STEP_COUNT_RTOL * max(1.0, count):
        raise ValueError(f"{name} ({span}) must be a positive whole multiple "
                         f"of the step ({step})")
    return rounded


@dataclass
class ExperimentConfig:
    """One benchmark setup; see the module docstring for the file keys."""

    model: str
    a: float
    b: float
    dx: float
    dt: float
    t_train: float
    t_final: float
    ranks: tuple[int, ...]
    methods: tuple[str, ...] = _METHODS
    eta: float = 1.0
    gamma: float = 0.022
    ch_c: float = 1.0
    ch_a: float = 30.0
    ch_x0: float = 0.0
    output_dir: str = "runs"
    seed: int = 0
    state_stride: int = 0

    def __post_init__(self):
        if self.model not in _MODELS:
            raise ValueError(f"model must be one of {_MODELS}, got {self.model!r}")
        if not self.b > self.a:
            raise ValueError(f"domain must satisfy b > a, got [{self.a}, {self.b}]")
        if self.dx <= 0 or self.dt <= 0:
            raise ValueError("dx and dt must be positive")
        if not 0 < self.t_train <= self.t_final:
            raise ValueError(f"need 0 < t_train <= t_final, got "
                             f"{self.t_train} and {self.t_final}")
        self.ranks = tuple(int(r) for r in self.ranks)
        if not self.ranks or any(r < 1 for r in self.ranks):
            raise ValueError(f"ranks must be a non-empty list of positive "
                             f"integers, got {self.ranks}")
        self.methods = tuple(self.methods)
        unknown = [m for m in self.methods if m not in _METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {_METHODS}")
        if self.state_stride < 0:
            raise ValueError("state_stride must be non-negative")
        # fail early on inconsistent discretizations
        self.grid()
        self.n_steps_train()
        self.n_steps_final()

    def grid(self) -> Grid1D:
        n = _as_step_count(self.b - self.a, self.dx, "domain length")
        return Grid1D(self.a, self.b, n)

    def n_steps_train(self) -> int:
        return _as_step_count(self.t_train, self.dt, "t_train")

    def n_steps_final(self) -> int:
        return _as_step_count(self.t_final, self.dt, "t_final")


_CONFIG_PARSERS = {
    "model": str,
    "a": float,
    "b": float,
    "dx": float,
    "dt": float,
    "t_train": float,
    "t_final": float,
    "ranks": lambda s: tuple(int(tok) for tok in s.replace(",", " ").split()),
    "methods": lambda s: tuple(tok for tok in s.replace(",", " ").split()),
    "eta": float,
    "gamma": float,
    "ch_c": float,
    "ch_a": float,
    "ch_x0": float,
    "output_dir": str,
    "seed": int,
    "state_stride": int,
}


def load_config(path: str) -> ExperimentConfig:
    """Parse a flat ``key = value`` config file; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, text = line.partition("=")
            key, text = key.strip(), text.strip()
            if key not in _CONFIG_PARSERS:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            if key in values:
                raise ValueError(f"{path}:{lineno}: duplicate config key {key!r}")
            try:
                values[key] = _CONFIG_PARSERS[key](text)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    required = ("model", "a", "b", "dx", "dt", "t_train", "t_final", "ranks")
    missing = [key for key in required if key not in values]
    if missing:
        raise ValueError(f"{path}: missing required config keys {missing}")
    return ExperimentConfig(**values)


# ---------------------------------------------------------------------------
# CSV and manifest plumbing

def _format(value: float) -> str:
    return f"{value:.17g}"


def _write_csv(path: str, header: str, *columns) -> None:
    columns = [np.asarray(col, dtype=float) for col in columns]
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in zip(*columns):
            fh.write(",".join(_format(v) for v in row) + "\n")


def _write_states_csv(path: str, times, grid: Grid1D, u_traj, stride: int) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("t,x,u\n")
        for j in range(0, len(times), stride):
            t_txt = _format(times[j])
            for x, u in zip(grid.nodes, u_traj[:, j]):
                fh.write(f"{t_txt},{_format(x)},{_format(u)}\n")


def _times(dt: float, count: int) -> np.ndarray:
    return dt * np.arange(count)


class _RunWriter:
    """Collects per-run records and file paths for the manifest."""

    def __init__(self, root: str):
        self.root = root
        self.records = []

    def directory(self, name: str) -> str:
        path = os.path.join(self.root, name)
        os.makedirs(path, exist_ok=True)
        return path

    def record(self, name: str, method: str, rank, wall_time: float, *,
               status: str = "ok", files=(), truncated_at=None,
               max_drift=None, error=None, failed_at=None) -> None:
        self.records.append({
            "name": name,
            "method": method,
            "rank": rank,
            "status": status,
            "wall_time_s": round(wall_time, 3),
            "truncated_at": truncated_at,
            "max_drift": max_drift,
            "failed_at": failed_at,
            "error": error,
            "files": list(files),
        })


def _write_manifest(root: str, config: ExperimentConfig, writer: _RunWriter) -> dict:
    grid = config.grid()
    manifest = {
        "config": asdict(config),
        "grid": {"n": grid.n, "dx": grid.dx},
        "n_steps_train": config.n_steps_train(),
        "n_steps_final": config.n_steps_final(),
        "runs": writer.records,
    }
    tmp = os.path.join(root, "manifest.json.tmp")
    with open(tmp, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, os.path.join(root, "manifest.json"))
    return manifest


# ---------------------------------------------------------------------------
# the runner

def _run_fom(config: ExperimentConfig, grid: Grid1D, n_steps: int) -> np.ndarray:
    if config.model == "wave":
        u0, u1 = wave_initialize(grid, config.dt)
        return WaveFom(grid, config.dt).run(u0, u1, n_steps)
    if config.model == "kdv":
        u0 = np.cos(np.pi * grid.nodes)
        return KdvFom(grid, config.dt, eta=config.eta, gamma=config.gamma).run(u0, n_steps)
    u0 = ch_initialize(grid, c=config.ch_c, a=config.ch_a, x0=config.ch_x0)
    return ChFom(grid, config.dt).run(u0, n_steps)


def _galerkin_training(config: ExperimentConfig, grid: Grid1D,
                       u_train: np.ndarray) -> np.ndarray:
    # the wave baseline projects the (u, v) phase-space system and needs its
    # own stacked snapshots; the others reuse the primary training window
    if config.model == "wave":
        return wave_hamiltonian_rollout(grid, config.dt, u_train.shape[1] - 1)
    return u_train


def _reduced_run(config: ExperimentConfig, grid: Grid1D, method: str, rank: int,
                 train: np.ndarray, n_steps: int):
    """Returns (lifted primary trajectory, energy series, spectrum, diverged_at)."""
    if method == "ligep-rom":
        rom = LigepRom(grid=grid, dt=config.dt, model=config.model, rank=rank,
                       eta=config.eta, gamma=config.gamma)
        rom.fit(train)
        reduced = rom.predict_reduced(n_steps)
        lifted = rom.basis_ @ reduced
        energy = rom_energy_series(config.model, reduced, rom.basis_, grid,
                                   dt=config.dt, eta=config.eta, gamma=config.gamma)
        return lifted, energy, rom.singular_values_, rom.diverged_at_
    rom = GalerkinRom(grid=grid, dt=config.dt, model=config.model, rank=rank,
                      eta=config.eta, gamma=config.gamma)
    rom.fit(train)
    lifted = rom.predict(n_steps)
    energy = fom_energy_series(config.model, lifted, grid, dt=config.dt,
                               eta=config.eta, gamma=config.gamma)
    return lifted, energy, rom.singular_values_, rom.diverged_at_


def run_experiment(config: ExperimentConfig, out_dir: str | None = None,
                   quiet: bool = False) -> tuple[str, dict]:
    """Run one full benchmark; returns the artifact directory and manifest."""
    root = out_dir if out_dir is not None else config.output_dir
    os.makedirs(root, exist_ok=True)
    grid = config.grid()
    n_final = config.n_steps_final()
    n_train = config.n_steps_train()
    writer = _RunWriter(root)

    def log(msg):
        if not quiet:
            print(msg, flush=True)

    start = time.perf_counter()
    u_fom = _run_fom(config, grid, n_final)
    fom_wall = time.perf_counter() - start
    fom_energy = fom_energy_series(config.model, u_fom, grid, dt=config.dt,
                                   eta=config.eta, gamma=config.gamma)
    fom_drift = drift_series(fom_energy)
    fom_dir = writer.directory("fom")
    files = ["fom/energy.csv", "fom/drift.csv"]
    _write_csv(os.path.join(fom_dir, "energy.csv"), "t,energy",
               _times(config.dt, fom_energy.size), fom_energy)
    _write_csv(os.path.join(fom_dir, "drift.csv"), "t,abs_drift",
               _times(config.dt, fom_drift.size), fom_drift)
    if config.state_stride > 0:
        _write_states_csv(os.path.join(fom_dir, "states.csv"),
                          _times(config.dt, u_fom.shape[1]), grid, u_fom,
                          config.state_stride)
        files.append("fom/states.csv")
    max_drift = float(fom_drift.max())
    writer.record("fom", "fom", None, fom_wall, files=files, max_drift=max_drift)
    log(f"[{config.model}] fom: {n_final} steps in {fom_wall:.1f}s, "
        f"max drift {max_drift:.3e}")

    u_train = u_fom[:, : n_train + 1]
    galerkin_train = None
    for method in config.methods:
        train = u_train
        if method == "pod-galerkin":
            if galerkin_train is None:
                galerkin_train = _galerkin_training(config, grid, u_train)
            train = galerkin_train
        for rank in config.ranks:
            name = f"{method}-r{rank}"
            start = time.perf_counter()
            try:
                lifted, energy, spectrum, diverged = _reduced_run(
                    config, grid, method, rank, train, n_final)
            except SingularSystemError as exc:
                wall = time.perf_counter() - start
                writer.record(name, method, rank, wall, status="failed",
                              error=str(exc), failed_at=exc.step_index)
                log(f"[{config.model}] {name}: FAILED ({exc})")
                continue
            wall = time.perf_counter() - start
            run_dir = writer.directory(name)
            # a run can diverge before its first full energy interval
            drift = drift_series(energy) if energy.size else np.zeros(0)
            n_cols = lifted.shape[1]
            gap = gap_series(fom_energy[: energy.size], energy)
            err = state_error_series(u_fom[:, :n_cols], lifted)
            files = [f"{name}/{base}" for base in
                     ("energy.csv", "drift.csv", "gap.csv", "state_error.csv",
                      "spectrum.csv")]
            _write_csv(os.path.join(run_dir, "energy.csv"), "t,energy",
                       _times(config.dt, energy.size), energy)
            _write_csv(os.path.join(run_dir, "drift.csv"), "t,abs_drift",
                       _times(config.dt, drift.size), drift)
            _write_csv(os.path.join(run_dir, "gap.csv"), "t,abs_gap",
                       _times(config.dt, gap.size), gap)
            _write_csv(os.path.join(run_dir, "state_error.csv"), "t,rel_err",
                       _times(config.dt, err.size), err)
            _write_csv(os.path.join(run_dir, "spectrum.csv"), "k,sigma",
                       np.arange(1, spectrum.size + 1), spectrum)
            if config.state_stride > 0:
                _write_states_csv(os.path.join(run_dir, "states.csv"),
                                  _times(config.dt, n_cols), grid, lifted,
                                  config.state_stride)
                files.append(f"{name}/states.csv")
            max_drift = float(drift.max()) if drift.size else None
            writer.record(name, method, rank, wall, files=files,
                          truncated_at=diverged, max_drift=max_drift)
            note = "" if diverged is None else f", diverged at step {diverged}"
            drift_txt = "n/a" if max_drift is None else f"{max_drift:.3e}"
            log(f"[{config.model}] {name}: {wall:.1f}s, max drift "
                f"{drift_txt}, final state error {err[-1]:.3e}{note}")

    manifest = _write_manifest(root, config, writer)
    return root, manifest


# ---------------------------------------------------------------------------
# plot scripts

_PLOT_HEADER = '''\
"""{title} for every run in this artifact directory.

Generated alongside the CSV reports; run from this directory with
``python3 {filename}``.  Reads only the CSVs listed below.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

SERIES = [
{series}]

fig, ax = plt.subplots(figsize=(7, 4.5))
for path, label in SERIES:
    data = np.genfromtxt(path, delimiter=",", skip_header=1, ndmin=2)
    ax.plot(data[:, 0], data[:, 1], label=label)
{scale}ax.set_xlabel("t")
ax.set_ylabel({ylabel!r})
ax.set_title({title!r})
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
print("wrote", {png!r})
'''

_PLOT_KINDS = (
    ("energy.csv", "plot_energy.py", "Two-level energy", "energy", False),
    ("drift.csv", "plot_drift.py", "Energy drift", "abs drift", True),
    ("gap.csv", "plot_gap.py", "Energy gap to the full model", "abs gap", True),
    ("state_error.csv", "plot_state_error.py", "Relative state error", "rel err", True),
)


def emit_plot_scripts(run_dir: str) -> list[str]:
    """Write four plot scripts next to a completed artifact's manifest.

    Scripts reference CSVs by paths relative to ``run_dir`` and carry no
    computation.  Missing manifest or missing referenced CSVs are errors.
    """
    manifest_path = os.path.join(run_dir, "manifest.json")
    if not os.path.exists(manifest_path):
        raise FileNotFoundError(f"no manifest.json in {run_dir}; run the "
                                f"experiment first")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    listed = [f for run in manifest["runs"] for f in run.get("files", ())]
    missing = [f for f in listed if not os.path.exists(os.path.join(run_dir, f))]
    if missing:
        raise FileNotFoundError(f"artifact in {run_dir} is missing CSVs "
                                f"listed in its manifest: {missing}")
    written = []
    for base, filename, title, ylabel, log_scale in _PLOT_KINDS:
        rows = []
        for run in manifest["runs"]:
            match = [f for f in run.get("files", ()) if f.endswith("/" + base)]
            for path in match:
                rows.append(f"    ({path!r}, {run['name']!r}),\n")
        if not rows:
            continue
        scale = 'ax.set_yscale("log")\n' if log_scale else ""
        text = _PLOT_HEADER.format(title=title, filename=filename,
                                   series="".join(rows), scale=scale,
                                   ylabel=ylabel, png=filename[5:-3] + ".png")
        path = os.path.join(run_dir, filename)
        with open(path, "w") as fh:
            fh.write(text)
        written.append(path)
    return written
