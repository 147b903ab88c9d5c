"""Free, Calogero-Moser and anyon-gas dynamics, equation-of-motion residuals
and invariance probes under group elements (and non-group controls)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import NonFiniteState
from .group import EPS_SING, GroupElement, act_trajectory
from .phase_space import (
    ANYON_GAS,
    CALOGERO_MOSER,
    FREE,
    MechSystem,
    PhaseSpaceDensity,
    PhaseSpaceState,
    Trajectory,
    _EPS2,
)


def _dfield(r):
    """Jacobian of f(r) = E r / |r|^2 for every pair, shape (N, N, 2, 2)."""
    r2 = np.sum(r * r, axis=-1)
    np.fill_diagonal(r2, np.inf)
    Er = np.einsum("kl,ijl->ijk", _EPS2, r)
    return _EPS2 / r2[..., None, None] - 2.0 * Er[..., :, None] * r[..., None, :] / (r2**2)[..., None, None]


def hamilton_rhs(sys: MechSystem, x, p):
    """(dx/dt, dp/dt) from Hamilton's equations with analytic gradients."""
    sys.check_collisions(x)
    xdot = sys.velocity(x, p)
    if sys.kind == FREE:
        return xdot, np.zeros_like(p)
    r = sys.pair_separations(x)
    if sys.kind == CALOGERO_MOSER:
        r1 = r[..., 0]
        np.fill_diagonal(r1, np.inf)
        force = 2.0 * sys.g2 * np.sum(1.0 / r1**3, axis=1)
        return xdot, force[:, None]
    # anyon gas: pdot_I = (kappa/m) sum_J Df(r_IJ)^T (pi_I - pi_J)
    pi = sys.m * xdot
    dpi = pi[:, None, :] - pi[None, :, :]
    pdot = (sys.kappa / sys.m) * np.einsum("ijlk,ijl->ik", _dfield(r), dpi)
    return xdot, pdot


def acceleration(sys: MechSystem, s: PhaseSpaceState):
    """Second time derivative of the positions at state ``s``."""
    x, p = s.x, s.p
    sys.check_collisions(x)
    if sys.kind == FREE:
        return np.zeros_like(x)
    if sys.kind == CALOGERO_MOSER:
        return hamilton_rhs(sys, x, p)[1] / sys.m
    # m xddot_I = (kappa/m) sum_J (Df^T - Df)(pi_I - pi_J); Df is symmetric off coincidence
    r = sys.pair_separations(x)
    pi = sys.m * sys.velocity(x, p)
    dpi = pi[:, None, :] - pi[None, :, :]
    Df = _dfield(r)
    curl = np.swapaxes(Df, -1, -2) - Df
    return (sys.kappa / sys.m**2) * np.einsum("ijkl,ijl->ik", curl, dpi)


def integrate(sys: MechSystem, init: PhaseSpaceState, t1: float, steps: int) -> Trajectory:
    """Classical fixed-step RK4 from ``init.t`` to ``t1``; every state is stored."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if init.x.shape != (sys.N, sys.d):
        raise ValueError("initial state does not match the system")
    dt = (t1 - init.t) / steps
    x = init.x.copy()
    p = init.p.copy()
    xs = np.empty((steps + 1,) + x.shape)
    ps = np.empty_like(xs)
    xs[0], ps[0] = x, p
    for k in range(steps):
        k1x, k1p = hamilton_rhs(sys, x, p)
        k2x, k2p = hamilton_rhs(sys, x + 0.5 * dt * k1x, p + 0.5 * dt * k1p)
        k3x, k3p = hamilton_rhs(sys, x + 0.5 * dt * k2x, p + 0.5 * dt * k2p)
        k4x, k4p = hamilton_rhs(sys, x + dt * k3x, p + dt * k3p)
        x = x + dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        p = p + dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p))):
            raise NonFiniteState(f"non-finite state after step {k + 1}")
        xs[k + 1], ps[k + 1] = x, p
    times = init.t + dt * np.arange(steps + 1)
    times[-1] = t1
    return Trajectory(times, xs, ps, sys)


def second_difference(times, x):
    """Three-point second derivative at interior samples (non-uniform spacing allowed)."""
    h1 = np.diff(times)[:-1]
    h2 = np.diff(times)[1:]
    shape = (-1,) + (1,) * (x.ndim - 1)
    h1, h2 = h1.reshape(shape), h2.reshape(shape)
    return 2.0 * (h1 * x[2:] - (h1 + h2) * x[1:-1] + h2 * x[:-2]) / (h1 * h2 * (h1 + h2))


def eom_residual(tr: Trajectory):
    """|finite-difference xddot - acceleration| at each interior sample."""
    if len(tr) < 5:
        raise ValueError("need at least 5 samples")
    fd = second_difference(tr.times, tr.x)
    acc = np.stack([acceleration(tr.system, tr.state(k)) for k in range(1, len(tr) - 1)])
    return np.linalg.norm((fd - acc).reshape(len(fd), -1), axis=1)


def resample_uniform(times, x, system: MechSystem, n=None) -> Trajectory:
    """Cubic-spline resampling of positions onto a uniform grid; momenta from the spline slope."""
    n = len(times) if n is None else n
    spline = CubicSpline(times, x, axis=0)
    grid = np.linspace(times[0], times[-1], n)
    xg = spline(grid)
    vg = spline(grid, 1)
    pg = np.stack([system.momentum(xk, vk) for xk, vk in zip(xg, vg)])
    return Trajectory(grid, xg, pg, system)


@dataclass(frozen=True)
class InvarianceReport:
    residuals: np.ndarray
    dtau: float

    @property
    def max_residual(self):
        return float(np.max(self.residuals))


def invariance_check(e: GroupElement, sys: MechSystem, tr: Trajectory, eps_sing=EPS_SING) -> InvarianceReport:
    """Transform ``tr`` by ``e``, resample on a uniform tau grid and measure the
    residual of the same equations of motion."""
    moved = act_trajectory(e, Trajectory(tr.times, tr.x, tr.p, sys), eps_sing)
    uniform = resample_uniform(moved.times, moved.x, sys)
    return InvarianceReport(eom_residual(uniform), float(uniform.times[1] - uniform.times[0]))


# -- non-group controls -------------------------------------------------------

def rotating_frame(tr: Trajectory, omega: float) -> Trajectory:
    """xi = R(omega t) x with a time-dependent rotation (d=2 only)."""
    if tr.system.d != 2:
        raise ValueError("rotating frame control needs d=2")
    c, s = np.cos(omega * tr.times), np.sin(omega * tr.times)
    R = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
    xi = np.einsum("kij,knj->kni", R, tr.x)
    return resample_uniform(tr.times, xi, tr.system)


def quadratic_time_map(tr: Trajectory) -> Trajectory:
    """tau = t^2, xi = sqrt(2 t) x (dh/dt = l^2 scaling with a non-Moebius h); needs t > 0."""
    if tr.times[0] <= 0:
        raise ValueError("quadratic time map control needs t > 0")
    tau = tr.times**2
    xi = np.sqrt(2.0 * tr.times)[:, None, None] * tr.x
    return resample_uniform(tau, xi, tr.system)


# -- Liouville transport ------------------------------------------------------

@dataclass(frozen=True)
class LiouvilleReport:
    transport_deviation: float
    stream_residual: float


def liouville_check(rho0: PhaseSpaceDensity, t: float, element: GroupElement | None = None,
                    window: float = 1.0, samples: int = 65) -> LiouvilleReport:
    """Density constancy along free characteristics, and free streaming of the
    ensemble after mapping it with ``element``."""
    m = rho0.m
    dt = t - rho0.t
    x_t = rho0.x + rho0.p * dt / m
    if rho0.density is not None:
        before = rho0.density(rho0.x, rho0.p)
        after = rho0.density(x_t - rho0.p * dt / m, rho0.p)
        transport = float(np.max(np.abs(after - before)))
    else:
        transport = 0.0

    stream = 0.0
    if element is not None:
        times = rho0.t + np.linspace(0.0, window, samples)
        tr = Trajectory.free_line(rho0.x, rho0.p / m, times - rho0.t, m)
        tr = Trajectory(times, tr.x, tr.p, tr.system)
        stream = invariance_check(element, tr.system, tr).max_residual
    return LiouvilleReport(transport, stream)
