import numpy as np
import pytest

from ligep.diagnostics import rom_energy_series
from ligep.fom import ChFom, KdvFom, WaveFom, ch_initialize, wave_initialize
from ligep.grid import Grid1D, build_operator
from ligep.pod import PodBasis
from ligep.rom import (LigepRom, build_reduced_cubic_tensor, ch_rom_step,
                       kdv_rom_step, reduced_central_diff, wave_rom_step)


def orthonormal_basis(rng, n, r):
    return np.linalg.qr(rng.standard_normal((n, r)))[0]


def test_reduced_central_diff_skew(rng):
    grid = Grid1D(0.0, 1.0, 30)
    v = orthonormal_basis(rng, 30, 8)
    d_red = reduced_central_diff(v, grid)
    assert d_red.shape == (8, 8)
    assert np.abs(d_red + d_red.T).max() <= 1e-13


def test_wave_rom_step_direct_solve(rng):
    grid = Grid1D(-2.0, 2.0, 24)
    v = orthonormal_basis(rng, 24, 6)
    d_red = reduced_central_diff(v, grid)
    dt = 0.05
    u_prev, u_curr = rng.standard_normal(6), rng.standard_normal(6)
    d2 = d_red @ d_red
    eye = np.eye(6)
    lhs = eye / dt**2 - 0.25 * d2
    rhs = (2.0 * eye / dt**2 + 0.5 * d2) @ u_curr - lhs @ u_prev
    np.testing.assert_allclose(wave_rom_step(u_prev, u_curr, d_red, dt),
                               np.linalg.solve(lhs, rhs), rtol=1e-12, atol=1e-12)


def test_kdv_rom_step_direct_solve(rng):
    grid = Grid1D(0.0, 2.0, 24)
    v = orthonormal_basis(rng, 24, 6)
    d_red = reduced_central_diff(v, grid)
    dt, eta, gamma = 0.01, 1.2, 0.4
    u_red = 0.2 * rng.standard_normal(6)
    eye = np.eye(6)
    lhs = eye / dt + 0.5 * eta * d_red @ (v.T @ np.diag(v @ u_red) @ v) \
        + 0.5 * gamma**2 * d_red @ d_red @ d_red
    rhs = (eye / dt - 0.5 * gamma**2 * d_red @ d_red @ d_red) @ u_red
    np.testing.assert_allclose(kdv_rom_step(u_red, v, d_red, dt, eta=eta,
                                            gamma=gamma),
                               np.linalg.solve(lhs, rhs), rtol=1e-12, atol=1e-12)


def test_ch_rom_step_direct_solve(rng):
    grid = Grid1D(0.0, 6.0, 24)
    v = orthonormal_basis(rng, 24, 6)
    d_red = reduced_central_diff(v, grid)
    dt = 0.02
    u_red = 0.2 * rng.standard_normal(6)
    d2 = d_red @ d_red
    eye = np.eye(6)
    lifted_u = np.diag(v @ u_red)
    lifted_nu = np.diag(v @ (d_red @ u_red))
    lhs = ((eye - d2) / dt
           - 0.5 * d2 @ (v.T @ lifted_nu @ v) - 0.5 * d2 @ (v.T @ lifted_u @ v) @ d_red
           + 1.5 * d_red @ (v.T @ lifted_u @ v) + 0.5 * d_red @ (v.T @ lifted_nu @ v) @ d_red)
    rhs = ((eye - d2) / dt) @ u_red
    np.testing.assert_allclose(ch_rom_step(u_red, v, d_red, dt),
                               np.linalg.solve(lhs, rhs), rtol=1e-12, atol=1e-12)


def test_full_basis_rom_reproduces_fom_wave():
    grid = Grid1D(-5.0, 5.0, 32)
    dt = 0.02
    u0, u1 = wave_initialize(grid, dt)
    fom_traj = WaveFom(grid, dt).run(u0, u1, 20)
    rom = LigepRom(grid=grid, dt=dt, model="wave", rank=32)
    rom.fit(fom_traj, basis=np.eye(32))
    lifted = rom.predict(20)
    np.testing.assert_allclose(lifted, fom_traj, rtol=0, atol=1e-9)


def test_full_basis_rom_reproduces_fom_kdv():
    grid = Grid1D(0.0, 2.0, 32)
    dt = 0.01
    u0 = np.cos(np.pi * grid.nodes)
    fom_traj = KdvFom(grid, dt).run(u0, 20)
    rom = LigepRom(grid=grid, dt=dt, model="kdv", rank=32)
    rom.fit(fom_traj, basis=np.eye(32))
    np.testing.assert_allclose(rom.predict(20), fom_traj, rtol=0, atol=1e-9)


def test_full_basis_rom_reproduces_fom_ch():
    grid = Grid1D(0.0, 30.0, 32)
    dt = 0.02
    fom_traj = ChFom(grid, dt).run(ch_initialize(grid), 20)
    rom = LigepRom(grid=grid, dt=dt, model="ch", rank=32)
    rom.fit(fom_traj, basis=np.eye(32))
    np.testing.assert_allclose(rom.predict(20), fom_traj, rtol=0, atol=1e-9)


@pytest.mark.parametrize("model,make", [
    ("wave", lambda grid, dt: WaveFom(grid, dt).run(*wave_initialize(grid, dt), 40)),
    ("kdv", lambda grid, dt: KdvFom(grid, dt).run(np.cos(np.pi * grid.nodes), 40)),
    ("ch", lambda grid, dt: ChFom(grid, dt).run(ch_initialize(grid), 40)),
])
def test_rom_conserves_reduced_energy(model, make):
    domains = {"wave": (-10.0, 10.0), "kdv": (0.0, 2.0), "ch": (0.0, 30.0)}
    a, b = domains[model]
    grid = Grid1D(a, b, 100)
    dt = 0.01
    train = make(grid, dt)
    rom = LigepRom(grid=grid, dt=dt, model=model, rank=12).fit(train)
    reduced = rom.predict_reduced(80)
    assert rom.diverged_at_ is None
    energy = rom_energy_series(model, reduced, rom.basis_, grid, dt=dt)
    drift = np.abs(energy - energy[0]).max()
    assert drift <= 1e-11 * max(1.0, abs(energy[0]))


@pytest.mark.parametrize("model", ["kdv", "ch"])
def test_tensor_path_matches_lifted_path(model):
    domains = {"kdv": (0.0, 2.0), "ch": (0.0, 30.0)}
    a, b = domains[model]
    grid = Grid1D(a, b, 80)
    dt = 0.01
    if model == "kdv":
        train = KdvFom(grid, dt).run(np.cos(np.pi * grid.nodes), 30)
    else:
        train = ChFom(grid, dt).run(ch_initialize(grid), 30)
    lifted = LigepRom(grid=grid, dt=dt, model=model, rank=10,
                      online_path="lifted").fit(train)
    tensor = LigepRom(grid=grid, dt=dt, model=model, rank=10,
                      online_path="tensor").fit(train)
    traj_l = lifted.predict_reduced(25)
    traj_t = tensor.predict_reduced(25)
    scale = np.abs(traj_l).max()
    assert np.abs(traj_l - traj_t).max() <= 1e-11 * max(1.0, scale)


def test_tensor_quadratic_matrix_matches_lifted(rng):
    # the offline tensor contracted with a reduced state reproduces the
    # lifted-product matrix entry for entry
    grid = Grid1D(0.0, 2.0, 40)
    v = orthonormal_basis(rng, 40, 7)
    d_red = reduced_central_diff(v, grid)
    eta = 1.7
    tensor = build_reduced_cubic_tensor(v, "kdv", grid, eta=eta, gamma=0.3)
    u_red = rng.standard_normal(7)
    quad_tensor = np.einsum("ijk,j->ik", tensor, u_red)
    quad_lifted = 0.5 * eta * d_red @ (v.T * (v @ u_red)[None, :]) @ v
    sym = 0.5 * (quad_tensor + np.einsum("ijk,k->ij", tensor, u_red))
    np.testing.assert_allclose(sym, quad_lifted, rtol=1e-11, atol=1e-12)


def test_wave_tensor_is_absent():
    grid = Grid1D(-1.0, 1.0, 16)
    tensor = build_reduced_cubic_tensor(np.eye(16)[:, :4], "wave", grid)
    assert np.abs(tensor).max() == 0.0


def test_tensor_rank_guard():
    grid = Grid1D(0.0, 1.0, 520)
    with pytest.raises(ValueError, match="rank"):
        build_reduced_cubic_tensor(np.eye(520)[:, :513], "kdv", grid)


def test_estimator_protocol():
    grid = Grid1D(0.0, 2.0, 20)
    rom = LigepRom(grid=grid, dt=0.01, model="kdv", rank=5)
    params = rom.get_params()
    assert params["rank"] == 5 and params["model"] == "kdv"
    rom.set_params(rank=4)
    assert rom.rank == 4


def test_rom_input_validation():
    grid = Grid1D(0.0, 2.0, 20)
    train = np.zeros((21, 5))
    with pytest.raises(ValueError):
        LigepRom(grid=grid, dt=0.01, model="kdv", rank=3).fit(train)
    with pytest.raises(ValueError):
        LigepRom(grid=grid, dt=0.01, model="heat", rank=3).fit(np.zeros((20, 5)))


def test_rom_divergence_guard():
    grid = Grid1D(0.0, 2.0, 60)
    dt = 0.01
    train = KdvFom(grid, dt).run(np.cos(np.pi * grid.nodes), 30)
    rom = LigepRom(grid=grid, dt=dt, model="kdv", rank=4,
                   max_state_norm=1e-3).fit(train)
    reduced = rom.predict_reduced(50)
    assert rom.diverged_at_ is not None
    assert reduced.shape[1] == rom.diverged_at_ + 1
