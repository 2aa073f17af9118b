import numpy as np
import pytest

from conftest import finite_difference_gradient
from ligep.kahan import (CubicHamiltonian, QuadraticODE, kahan_rollout,
                         kahan_step, polarize_quadratic)


def scalar_square():
    # y' = y^2 as a one-dimensional quadratic ODE
    return QuadraticODE(1, bilinear=lambda a, b: a * b,
                        bilinear_matrix=lambda a: np.atleast_2d(a))


def test_scalar_square_closed_form():
    """One step of y' = y^2 lands exactly on y0 / (1 - dt y0)."""
    sys = scalar_square()
    y = np.array([0.3])
    dt = 0.05
    for _ in range(100):
        y = kahan_step(sys, y, dt)
    t = 100 * dt
    assert abs(y[0] - 0.3 / (1.0 - t * 0.3)) <= 1e-12


def test_scalar_square_second_order_convergence():
    sys = scalar_square()
    y_exact = 0.4 / (1.0 - 1.0 * 0.4)

    def error(n_steps):
        traj, diverged = kahan_rollout(sys, np.array([0.4]), 1.0 / n_steps, n_steps)
        assert diverged is None
        return abs(traj[0, -1] - y_exact)

    # the scheme is exact on scalar quadratic problems; perturb with a linear
    # term to expose the generic second-order behavior
    sys = QuadraticODE(1, bilinear=lambda a, b: a * b,
                       bilinear_matrix=lambda a: np.atleast_2d(a),
                       linear=np.array([[0.7]]))
    from scipy.integrate import solve_ivp
    ref = solve_ivp(lambda t, y: y**2 + 0.7 * y, (0.0, 1.0), [0.4],
                    rtol=1e-12, atol=1e-14).y[0, -1]

    def error(n_steps):
        traj, _ = kahan_rollout(sys, np.array([0.4]), 1.0 / n_steps, n_steps)
        return abs(traj[0, -1] - ref)

    ratio = error(64) / error(128)
    assert ratio == pytest.approx(4.0, abs=0.2)


def test_zero_quadratic_part_is_implicit_midpoint(rng):
    # with T = 0 the step solves (I/dt - B/2) y' = (I/dt + B/2) y for any B,
    # symmetric or not
    b = rng.standard_normal((5, 5))
    sys = QuadraticODE(5, linear=b)
    y0 = rng.standard_normal(5)
    dt = 0.01
    stepped = kahan_step(sys, y0, dt)
    eye = np.eye(5)
    midpoint = np.linalg.solve(eye - 0.5 * dt * b, (eye + 0.5 * dt * b) @ y0)
    np.testing.assert_allclose(stepped, midpoint, rtol=1e-13, atol=1e-13)


def test_constant_matrix_rollout_matches_stepping(rng):
    b = rng.standard_normal((4, 4))
    sys = QuadraticODE(4, linear=b, constant=rng.standard_normal(4))
    y0 = rng.standard_normal(4)
    traj, diverged = kahan_rollout(sys, y0, 0.02, 7)
    assert diverged is None
    y = y0
    for n in range(7):
        y = kahan_step(sys, y, 0.02)
        np.testing.assert_allclose(traj[:, n + 1], y, rtol=1e-13, atol=1e-14)


def test_mass_matrix_step(rng):
    m = np.eye(3) + 0.1 * rng.standard_normal((3, 3))
    b = rng.standard_normal((3, 3))
    sys = QuadraticODE(3, linear=b, mass=m)
    y0 = rng.standard_normal(3)
    dt = 0.05
    stepped = kahan_step(sys, y0, dt)
    expected = np.linalg.solve(m / dt - 0.5 * b, (m / dt + 0.5 * b) @ y0)
    np.testing.assert_allclose(stepped, expected, rtol=1e-12, atol=1e-13)


def test_rollout_truncates_on_divergence():
    sys = scalar_square()
    # blows up at t = 1/y0 = 0.5; dt steps straight past the pole
    traj, diverged = kahan_rollout(sys, np.array([2.0]), 0.26, 10,
                                   max_state_norm=10.0)
    assert diverged is not None
    assert traj.shape[1] == diverged + 1
    assert np.abs(traj[:, -1]).max() > 10.0 or not np.isfinite(traj[:, -1]).all()


def test_asymmetric_bilinear_rejected(rng):
    with pytest.raises(ValueError, match="symmetric"):
        QuadraticODE(3, bilinear=lambda a, b: a * np.roll(b, 1))


def test_bilinear_matrix_mismatch_rejected():
    with pytest.raises(ValueError, match="disagrees"):
        QuadraticODE(2, bilinear=lambda a, b: a * b,
                     bilinear_matrix=lambda a: 2.0 * np.diag(a))


def test_polarize_quadratic_equals_bilinear(rng):
    mat = rng.standard_normal((4, 4))
    sym = 0.5 * (mat + mat.T)
    sys = QuadraticODE(4, bilinear=lambda a, b: (sym @ a) * b + (sym @ b) * a)
    a = rng.standard_normal(4)
    b = rng.standard_normal(4)
    np.testing.assert_allclose(polarize_quadratic(sys, a, b), sys.bilinear(a, b),
                               rtol=1e-12, atol=1e-12)


def test_bilinear_as_matrix_column_fallback(rng):
    mat = rng.standard_normal((3, 3))
    sym = 0.5 * (mat + mat.T)
    sys = QuadraticODE(3, bilinear=lambda a, b: (sym @ a) * b + (sym @ b) * a)
    y = rng.standard_normal(3)
    t_mat = sys.bilinear_as_matrix(y)
    for _ in range(3):
        v = rng.standard_normal(3)
        np.testing.assert_allclose(t_mat @ v, sys.bilinear(y, v), rtol=1e-12,
                                   atol=1e-12)


# ---------------------------------------------------------------------------
# cubic forms

def cubic_tensor(dim=4):
    # a fully symmetric 3-tensor; Q(z) = C contracted with z in one slot is
    # then a valid cubic polarization (symmetric, homogeneous, cyclic)
    raw = np.random.default_rng(42).standard_normal((dim, dim, dim))
    c = np.zeros_like(raw)
    from itertools import permutations
    for perm in permutations(range(3)):
        c += raw.transpose(perm)
    return c / 6.0


def example_cubic(dim=4):
    c3 = cubic_tensor(dim)
    b = np.diag(np.linspace(-1.0, 1.0, dim))
    c = np.linspace(0.5, -0.5, dim)
    return CubicHamiltonian(dim, quadratic_map=lambda z: np.einsum("ijk,i->jk", c3, z),
                            linear=b, shift=c, offset=0.25)


def test_cubic_value_hand_computed(rng):
    ham = example_cubic(3)
    c3 = cubic_tensor(3)
    z = rng.standard_normal(3)
    expected = (np.einsum("ijk,i,j,k->", c3, z, z, z)
                + z @ np.diag([-1.0, 0.0, 1.0]) @ z
                + np.array([0.5, 0.0, -0.5]) @ z + 0.25)
    assert ham.value(z) == pytest.approx(expected, rel=1e-12)


def test_polarized_is_symmetric_and_diagonal_consistent(rng):
    ham = example_cubic()
    x, y, z = (rng.standard_normal(4) for _ in range(3))
    vals = {ham.polarized(*perm) for perm in
            [(x, y, z), (y, z, x), (z, x, y), (x, z, y), (y, x, z), (z, y, x)]}
    assert max(vals) - min(vals) <= 1e-12 * max(1.0, abs(ham.polarized(x, y, z)))
    assert ham.polarized(z, z, z) == pytest.approx(ham.value(z), rel=1e-12)


def test_grad_polarized_matches_finite_differences(rng):
    ham = example_cubic()
    y = rng.standard_normal(4)
    z = rng.standard_normal(4)
    fd = finite_difference_gradient(lambda x: ham.polarized(x, y, z),
                                    rng.standard_normal(4))
    np.testing.assert_allclose(ham.grad_polarized(y, z), fd, rtol=1e-6, atol=1e-6)


def test_gradient_of_full_cubic(rng):
    # d/dz S(z) = 3 Q(z) z + 2 B z + c for the homogeneous cubic part
    ham = example_cubic()
    z = rng.standard_normal(4)
    fd = finite_difference_gradient(ham.value, z)
    analytic = 3.0 * (ham.q_matrix(z) @ z) + 2.0 * (ham.linear @ z) + ham.shift
    np.testing.assert_allclose(analytic, fd, rtol=1e-6, atol=1e-6)


def test_quadratic_map_validation():
    with pytest.raises(ValueError, match="vanish"):
        CubicHamiltonian(2, quadratic_map=lambda z: np.eye(2))
    with pytest.raises(ValueError, match="symmetric"):
        CubicHamiltonian(2, quadratic_map=lambda z: z[0] * np.array([[0.0, 1.0],
                                                                     [0.0, 0.0]]))
    with pytest.raises(ValueError, match="homogeneous"):
        CubicHamiltonian(2, quadratic_map=lambda z: z[0] ** 2 * np.eye(2))


def test_cubic_linear_part_must_be_symmetric():
    with pytest.raises(ValueError, match="symmetric"):
        CubicHamiltonian(2, linear=np.array([[0.0, 1.0], [0.0, 0.0]]))
