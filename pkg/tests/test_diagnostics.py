import numpy as np
import pytest

from ligep.diagnostics import (EnergyReport, compact_polarized_energy,
                               drift_series, fom_energy_series, gap_series,
                               polarized_energy, relative_state_error,
                               rom_energy_series, state_error_series)
from ligep.fom import (ChFom, KdvFom, WaveFom, ch_initialize, ligep_compact_step,
                       reconstruct_aux, wave_initialize)
from ligep.grid import Grid1D, build_operator
from ligep.rom import LigepRom, reduced_central_diff
from ligep.systems import ch_system, kdv_system, wave_system
from test_fom import tame_ch_state, tame_kdv_state, tame_wave_state


def test_relative_state_error_trivial(rng):
    u = rng.standard_normal(9)
    assert relative_state_error(u, u) == 0.0
    assert relative_state_error(u, 2.0 * u) == pytest.approx(1.0, rel=1e-13)


def test_relative_state_error_definition(rng):
    u = rng.standard_normal(14)
    w = rng.standard_normal(14)
    direct = np.sqrt(np.sum((u - w) ** 2)) / np.sqrt(np.sum(u**2))
    assert relative_state_error(u, w) == pytest.approx(direct, rel=1e-13)


def test_relative_state_error_zero_reference():
    with pytest.raises(ValueError, match="zero norm"):
        relative_state_error(np.zeros(4), np.ones(4))


def test_state_error_series_columnwise(rng):
    ref = rng.standard_normal((6, 5))
    approx = rng.standard_normal((6, 5))
    series = state_error_series(ref, approx)
    for j in range(5):
        assert series[j] == pytest.approx(
            relative_state_error(ref[:, j], approx[:, j]), rel=1e-13)


def test_drift_series():
    np.testing.assert_array_equal(drift_series([2.0, 2.0, 2.0]), np.zeros(3))
    # representation: fl(1 + 1e-12) - 1 is 1e-12 only to a few digits
    np.testing.assert_allclose(drift_series([1.0, 1.0 + 1e-12]),
                               [0.0, 1e-12], rtol=1e-3)
    with pytest.raises(ValueError):
        drift_series([])


def test_gap_series():
    np.testing.assert_array_equal(gap_series([1.0, 2.0], [1.0, 2.0]), np.zeros(2))
    np.testing.assert_allclose(gap_series([1.0, 2.0], [1.5, 2.5]), [0.5, 0.5],
                               rtol=1e-13)
    with pytest.raises(ValueError):
        gap_series([1.0], [1.0, 2.0])


@pytest.mark.parametrize("label", ["wave", "kdv", "ch"])
def test_zero_state_has_zero_energy(label):
    grid = Grid1D(0.0, 1.0, 10)
    z = np.zeros(10)
    if label == "wave":
        state = (z, z)
        assert polarized_energy(label, "fom", state, state, grid) == 0.0
    else:
        assert polarized_energy(label, "fom", z, z, grid) == 0.0


def test_kdv_constant_state_energy():
    # difference terms vanish, leaving (dx/6) * N * eta * c^3
    grid = Grid1D(0.0, 2.0, 25)
    c, eta = 0.7, 1.3
    u = np.full(25, c)
    value = polarized_energy("kdv", "fom", u, u, grid, eta=eta)
    assert value == pytest.approx(grid.dx / 6.0 * 25 * eta * c**3, rel=1e-13)


def test_wave_energy_element_loop_oracle():
    grid = Grid1D(-5.0, 5.0, 40)
    dt = 0.05
    u0, u1 = wave_initialize(grid, dt)
    traj = WaveFom(grid, dt).run(u0, u1, 6)
    aux = reconstruct_aux("wave", traj, grid, dt)
    d = build_operator(grid, "central_diff").matrix
    n = 2
    du_n, du_n1 = d @ traj[:, n], d @ traj[:, n + 1]
    v_n, v_n1 = aux["v"][:, n], aux["v"][:, n + 1]
    total = 0.0
    for j in range(grid.n):
        total += (2.0 * du_n[j] * du_n1[j] + du_n[j] ** 2
                  + 2.0 * v_n[j] * v_n1[j] + v_n[j] ** 2)
    expected = grid.dx / 6.0 * total
    value = polarized_energy("wave", "fom", (traj[:, n], v_n),
                             (traj[:, n + 1], v_n1), grid)
    assert value == pytest.approx(expected, rel=1e-13)
    series = fom_energy_series("wave", traj, grid, dt=dt)
    assert series[n] == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("label", ["kdv", "ch"])
def test_series_matches_per_interval_calls(label):
    if label == "kdv":
        grid = Grid1D(0.0, 2.0, 50)
        dt = 0.01
        traj = KdvFom(grid, dt).run(np.cos(np.pi * grid.nodes), 6)
    else:
        grid = Grid1D(0.0, 30.0, 50)
        dt = 0.02
        traj = ChFom(grid, dt).run(ch_initialize(grid), 6)
    series = fom_energy_series(label, traj, grid, dt=dt)
    assert series.size == 6
    for n in range(6):
        assert series[n] == pytest.approx(
            polarized_energy(label, "fom", traj[:, n], traj[:, n + 1], grid),
            rel=1e-12)


def test_rom_energy_with_full_basis_equals_fom_level(rng):
    grid = Grid1D(0.0, 2.0, 30)
    dt = 0.01
    traj = KdvFom(grid, dt).run(np.cos(np.pi * grid.nodes), 5)
    basis = np.eye(30)
    fom_series = fom_energy_series("kdv", traj, grid, dt=dt)
    rom_series = rom_energy_series("kdv", traj, basis, grid, dt=dt)
    np.testing.assert_allclose(rom_series, fom_series, rtol=1e-11)
    red = rng.standard_normal(30)
    red1 = rng.standard_normal(30)
    assert polarized_energy("kdv", "rom", red, red1, grid, basis=basis) == \
        pytest.approx(polarized_energy("kdv", "fom", red, red1, grid), rel=1e-11)


def test_rom_energy_is_the_conserved_quantity():
    # the reduced scheme conserves the lifted-formula energy, not the
    # full-order energy of its lifted trajectory
    grid = Grid1D(0.0, 2.0, 80)
    dt = 0.01
    train = KdvFom(grid, dt).run(np.cos(np.pi * grid.nodes), 40)
    rom = LigepRom(grid=grid, dt=dt, model="kdv", rank=10).fit(train)
    reduced = rom.predict_reduced(60)
    series = rom_energy_series("kdv", reduced, rom.basis_, grid, dt=dt)
    assert np.abs(series - series[0]).max() <= 1e-11 * max(1.0, abs(series[0]))


def test_rom_level_requires_basis():
    grid = Grid1D(0.0, 1.0, 8)
    with pytest.raises(ValueError, match="basis"):
        polarized_energy("kdv", "rom", np.ones(4), np.ones(4), grid)
    with pytest.raises(ValueError):
        polarized_energy("kdv", "middle", np.ones(8), np.ones(8), grid)


# ---------------------------------------------------------------------------
# generic two-level energy against the closed forms

@pytest.mark.parametrize("label", ["wave", "kdv", "ch"])
def test_compact_energy_equals_closed_form_on_scheme_states(label):
    """On coupled-scheme trajectories the eliminated closed forms agree with
    the generic polarized energy; on arbitrary states they need not."""
    if label == "wave":
        grid = Grid1D(-10.0, 10.0, 16)
        system, z = wave_system(), tame_wave_state(grid)
    elif label == "kdv":
        grid = Grid1D(0.0, 2.0, 16)
        system, z = kdv_system(), tame_kdv_state(grid)
    else:
        grid = Grid1D(0.0, 30.0, 16)
        system, z = ch_system(), tame_ch_state(grid)
    dt = 0.01
    states = [z]
    for n in range(4):
        states.append(ligep_compact_step(system, states[-1], grid, dt, step_index=n))
    n = grid.n
    for k in range(4):
        generic = compact_polarized_energy(system, states[k], states[k + 1], grid)
        zk = states[k].reshape(system.d, n)
        zk1 = states[k + 1].reshape(system.d, n)
        if label == "wave":
            closed = polarized_energy("wave", "fom", (zk[0], zk[1]),
                                      (zk1[0], zk1[1]), grid)
        elif label == "kdv":
            closed = polarized_energy("kdv", "fom", zk[1], zk1[1], grid,
                                      eta=1.0, gamma=0.022)
        else:
            closed = polarized_energy("ch", "fom", zk[0], zk1[0], grid)
        assert closed == pytest.approx(generic, rel=1e-10, abs=1e-12)


def test_energy_report():
    energy = np.array([1.0, 1.0, 1.0 + 1e-13])
    report = EnergyReport(model="kdv", method="ligep-rom", rank=12,
                          times=np.array([0.0, 0.1, 0.2]), energy=energy)
    np.testing.assert_allclose(report.drift, np.abs(energy - 1.0), rtol=1e-6)
    assert report.max_drift == pytest.approx(1e-13, rel=1e-6)
    assert report.truncated_at is None
    with pytest.raises(ValueError, match="equal length"):
        EnergyReport(model="kdv", method="fom", rank=None,
                     times=np.array([0.0, 0.1]), energy=energy)
