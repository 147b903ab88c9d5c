import numpy as np
import pytest

from niederer import dynamics as dyn
from niederer import group as grp
from niederer.errors import CollisionSingularity, WindowCrossesPole
from niederer.group import GroupElement, MoebiusMap
from niederer.phase_space import MechSystem, PhaseSpaceDensity, PhaseSpaceState, Trajectory

CM3 = PhaseSpaceState(0.0, [[-2.0], [0.0], [1.5]], [[0.3], [-0.1], [0.2]])


def test_free_acceleration_zero():
    s = PhaseSpaceState(0.0, [[1.0, 2.0], [0.0, -1.0]], [[0.5, 0.1], [0.0, 0.0]])
    np.testing.assert_array_equal(dyn.acceleration(MechSystem.free(2, 2), s), 0.0)


def test_cm_pair_acceleration():
    s = PhaseSpaceState(0.0, [[-1.0], [1.0]], [[0.0], [0.0]])
    np.testing.assert_allclose(dyn.acceleration(MechSystem.calogero_moser(2), s)[:, 0], [-0.25, 0.25])


def test_cm_zero_coupling_is_free():
    s = PhaseSpaceState(0.0, [[-1.0], [1.0]], [[0.3], [0.0]])
    np.testing.assert_array_equal(dyn.acceleration(MechSystem.calogero_moser(2, g2=0.0), s), 0.0)


def test_cm_force_is_minus_potential_gradient():
    sys = MechSystem.calogero_moser(3, m=1.3, g2=0.7)
    x = CM3.x
    h = 1e-6
    grad = np.zeros(3)
    for i in range(3):
        dx = np.zeros((3, 1))
        dx[i] = h
        grad[i] = (sys.potential(x + dx) - sys.potential(x - dx)) / (2 * h)
    acc = dyn.acceleration(sys, PhaseSpaceState(0.0, x, np.zeros((3, 1)), 1.3))
    np.testing.assert_allclose(acc[:, 0], -grad / 1.3, rtol=1e-7)


def test_collision_guard():
    s = PhaseSpaceState(0.0, [[0.0], [1e-8]], [[0.0], [0.0]])
    with pytest.raises(CollisionSingularity):
        dyn.acceleration(MechSystem.calogero_moser(2), s)


def test_free_integration_is_exact():
    tr = dyn.integrate(MechSystem.free(), PhaseSpaceState.single([0.0], [1.0]), 1.0, 7)
    assert tr.x[-1, 0, 0] == pytest.approx(1.0, abs=1e-15)


def test_symmetric_cm_center_of_mass_fixed():
    s = PhaseSpaceState(0.0, [[-1.0], [1.0]], [[0.2], [-0.2]])
    tr = dyn.integrate(MechSystem.calogero_moser(2), s, 3.0, 600)
    assert np.max(np.abs(tr.x.sum(axis=1))) < 1e-13


def test_rk4_energy_drift_scales_fourth_order():
    sys = MechSystem.calogero_moser(2)
    s = PhaseSpaceState(0.0, [[-1.0], [1.0]], [[0.4], [-0.1]])

    def drift(n):
        tr = dyn.integrate(sys, s, 2.0, n)
        H = np.array([sys.hamiltonian(x, p) for x, p in zip(tr.x, tr.p)])
        return np.max(np.abs(H - H[0]))

    ratio = drift(40) / drift(80)
    assert 2**3.5 < ratio < 2**4.7


def test_integrate_deterministic():
    sys = MechSystem.calogero_moser(3)
    a = dyn.integrate(sys, CM3, 1.0, 100)
    b = dyn.integrate(sys, CM3, 1.0, 100)
    np.testing.assert_array_equal(a.x, b.x)


def test_eom_residual_free_line():
    tr = Trajectory.free_line([[0.0], [1.0]], [[1.0], [-0.5]], np.linspace(0, 1, 21))
    assert np.max(dyn.eom_residual(tr)) < 1e-12


def test_eom_residual_stencil_order():
    sys = MechSystem.calogero_moser(3)
    tr = dyn.integrate(sys, CM3, 1.0, 2000)
    r1 = np.max(dyn.eom_residual(Trajectory(tr.times[::20], tr.x[::20], tr.p[::20], sys)))
    r2 = np.max(dyn.eom_residual(Trajectory(tr.times[::10], tr.x[::10], tr.p[::10], sys)))
    assert np.log2(r1 / r2) == pytest.approx(2.0, abs=0.2)


def test_eom_residual_spike():
    times = np.linspace(0, 1, 101)
    tr = Trajectory.free_line([[0.0]], [[1.0]], times)
    x = tr.x.copy()
    x[50] += 1e-3
    res = dyn.eom_residual(Trajectory(times, x, tr.p, tr.system))
    dt = times[1] - times[0]
    assert res[49] > 1e-3 / dt**2
    assert np.argmax(res) == 49


def test_invariance_free_random_elements():
    rng = np.random.default_rng(7)
    tr = Trajectory.free_line([[0.1, 0.2], [-0.5, 1.0]], [[1.0, 0.0], [0.3, -0.3]], np.linspace(0, 1, 201))
    for _ in range(10):
        e = grp.random_element(rng, 2)
        assert dyn.invariance_check(e, tr.system, tr).max_residual < 1e-6


def test_invariance_cm_expansion_converges_second_order():
    sys = MechSystem.calogero_moser(3)
    e = GroupElement.from_moebius(MoebiusMap.expansion(0.2))
    r = [dyn.invariance_check(e, sys, dyn.integrate(sys, CM3, 1.0, n)).max_residual for n in (200, 400, 800)]
    orders = np.log2(np.array(r[:-1]) / np.array(r[1:]))
    np.testing.assert_allclose(orders, 2.0, atol=0.3)


def test_invariance_rejects_window_across_pole():
    sys = MechSystem.free()
    tr = Trajectory.free_line([[0.0]], [[1.0]], np.linspace(-1, 1, 21))
    with pytest.raises(WindowCrossesPole):
        dyn.invariance_check(GroupElement.from_moebius(MoebiusMap.inversion()), sys, tr)


@pytest.mark.parametrize("control", ["rotating", "quadratic"])
def test_non_group_maps_have_residual_floor(control):
    floors = []
    for n in (100, 200, 400):
        tr = Trajectory.free_line([[1.0, 0.5]], [[0.3, -0.2]], np.linspace(0.5, 1.5, n + 1))
        moved = dyn.rotating_frame(tr, 0.5) if control == "rotating" else dyn.quadratic_time_map(tr)
        floors.append(np.max(dyn.eom_residual(moved)))
    assert min(floors) > 1e-3
    assert floors[-1] > 0.5 * floors[0]


def test_time_translation_covariance():
    sys = MechSystem.calogero_moser(3)
    a = dyn.integrate(sys, CM3, 0.7, 350)
    b = dyn.integrate(sys, a.state(len(a) - 1), 2.0, 650)
    c = dyn.integrate(sys, CM3, 2.0, 1000)
    np.testing.assert_allclose(b.x[-1], c.x[-1], atol=1e-10)


def test_galilei_covariance_free_exact():
    sys = MechSystem.free(2, 3)
    s = PhaseSpaceState(0.0, [[0.0, 1.0, 2.0], [1.0, 0.0, -1.0]], [[0.1, 0.2, 0.3], [0.0, 0.0, 1.0]])
    v = np.array([0.5, -0.25, 1.0])
    tb = dyn.integrate(sys, PhaseSpaceState(0.0, s.x, s.p + v), 2.0, 10)
    t0 = dyn.integrate(sys, s, 2.0, 10)
    np.testing.assert_allclose(tb.x[-1], t0.x[-1] + 2.0 * v, atol=1e-14)


def test_anyon_kinetic_velocity_is_conserved():
    sys = MechSystem.anyon_gas(3)
    s = PhaseSpaceState(0.0, [[0.0, 0.0], [1.0, 0.5], [-1.0, 1.0]], [[0.1, 0.2], [0.0, -0.3], [0.2, 0.1]])
    tr = dyn.integrate(sys, s, 1.0, 1000)
    v = tr.velocities()
    assert np.max(np.abs(v - v[0])) < 1e-10


def test_anyon_canonical_momentum_rhs_against_finite_difference():
    sys = MechSystem.anyon_gas(2, kappa=0.7)
    x = np.array([[0.3, -0.2], [1.1, 0.4]])
    p = np.array([[0.5, 0.1], [-0.2, 0.3]])
    _, pdot = dyn.hamilton_rhs(sys, x, p)
    h = 1e-6
    grad = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        dx = np.zeros_like(x)
        dx[idx] = h
        grad[idx] = (sys.hamiltonian(x + dx, p) - sys.hamiltonian(x - dx, p)) / (2 * h)
    np.testing.assert_allclose(pdot, -grad, atol=1e-8)


def test_liouville_transport():
    rng = np.random.default_rng(0)
    rho = PhaseSpaceDensity.gaussian(rng, 50)
    assert dyn.liouville_check(rho, 0.0).transport_deviation == 0.0
    assert dyn.liouville_check(rho, 2.0).transport_deviation < 1e-12


def test_liouville_stream_after_inversion():
    rng = np.random.default_rng(1)
    rho = PhaseSpaceDensity.gaussian(rng, 20, t=0.5)
    rep = dyn.liouville_check(rho, 1.0, GroupElement.from_moebius(MoebiusMap.inversion()))
    assert rep.stream_residual < 1e-6
