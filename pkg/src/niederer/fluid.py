"""Planar polytropic Euler equations and the explosion-implosion map.

The solver is a first-order finite-volume scheme in (rho, rho u, E) with
E = eps + rho u^2 / 2 and p = (gamma0 - 1) eps, using the local
Lax-Friedrichs (Rusanov) flux.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import CFLViolation, PositivityLoss, SingularLocus, SupportClipped, WrongPolytrope
from .group import EPS_SING, MoebiusMap

PERIODIC = "periodic"
EXTRAPOLATE = "extrapolate"


@dataclass(frozen=True)
class FluidState:
    x_min: float
    x_max: float
    rho: np.ndarray
    u: np.ndarray
    eps: np.ndarray
    gamma0: float = 3.0
    t: float = 0.0
    d_eff: int = 1

    def __post_init__(self):
        rho, u, eps = (np.asarray(a, dtype=float).copy() for a in (self.rho, self.u, self.eps))
        if not (rho.shape == u.shape == eps.shape and rho.ndim == 1):
            raise ValueError("rho, u, eps must be 1D arrays of equal length")
        if self.gamma0 <= 1:
            raise ValueError("gamma0 must exceed 1")
        if np.any(rho <= 0) or np.any(eps <= 0):
            raise PositivityLoss("density and energy density must be positive")
        for name, a in (("rho", rho), ("u", u), ("eps", eps)):
            object.__setattr__(self, name, a)

    @property
    def n(self):
        return self.rho.size

    @property
    def dx(self):
        return (self.x_max - self.x_min) / self.n

    @property
    def x(self):
        return self.x_min + self.dx * (np.arange(self.n) + 0.5)

    @property
    def p(self):
        return (self.gamma0 - 1.0) * self.eps

    @property
    def sound_speed(self):
        return np.sqrt(self.gamma0 * self.p / self.rho)

    def conserved(self):
        return np.stack([self.rho, self.rho * self.u, self.eps + 0.5 * self.rho * self.u**2])

    def totals(self):
        """Integrals of mass, momentum and energy over the grid."""
        return self.conserved().sum(axis=1) * self.dx

    @classmethod
    def from_conserved(cls, template: "FluidState", U, t):
        rho = U[0]
        u = U[1] / rho
        eps = U[2] - 0.5 * rho * u**2
        if np.any(rho <= 0) or np.any(eps <= 0) or not np.all(np.isfinite(U)):
            raise PositivityLoss("non-positive density or internal energy after step")
        return replace(template, rho=rho, u=u, eps=eps, t=t)

    @classmethod
    def from_profile(cls, n, x_min, x_max, rho, u, p, gamma0=3.0, t=0.0, d_eff=1):
        """Sample callables rho(x), u(x), p(x) at cell centres."""
        x = x_min + (x_max - x_min) / n * (np.arange(n) + 0.5)
        return cls(x_min, x_max, rho(x), u(x), p(x) / (gamma0 - 1.0), gamma0, t, d_eff)


def stable_dt(s: FluidState, cfl=0.4):
    return cfl * s.dx / np.max(np.abs(s.u) + s.sound_speed)


def _with_ghosts(q, boundary):
    if boundary == PERIODIC:
        return np.concatenate([q[..., -1:], q, q[..., :1]], axis=-1)
    if boundary == EXTRAPOLATE:
        left = 2 * q[..., :1] - q[..., 1:2]
        right = 2 * q[..., -1:] - q[..., -2:-1]
        return np.concatenate([left, q, right], axis=-1)
    raise ValueError(f"unknown boundary {boundary!r}")


def _flux(rho, u, eps, gamma0):
    p = (gamma0 - 1.0) * eps
    E = eps + 0.5 * rho * u**2
    return np.stack([rho * u, rho * u**2 + p, (E + p) * u])


def euler_step(s: FluidState, dt: float, boundary=PERIODIC, cfl_max=1.0) -> FluidState:
    """One Rusanov finite-volume step."""
    smax = np.max(np.abs(s.u) + s.sound_speed)
    if dt <= 0 or dt > cfl_max * s.dx / smax:
        raise CFLViolation(f"dt={dt:.3e} exceeds {cfl_max} * dx / max(|u|+c) = {cfl_max * s.dx / smax:.3e}")
    rho, u, eps = (_with_ghosts(q, boundary) for q in (s.rho, s.u, s.eps))
    if np.any(rho <= 0) or np.any(eps <= 0):
        raise PositivityLoss("extrapolated ghost state is not positive")
    U = np.stack([rho, rho * u, eps + 0.5 * rho * u**2])
    F = _flux(rho, u, eps, s.gamma0)
    c = np.sqrt(s.gamma0 * (s.gamma0 - 1.0) * eps / rho)
    speed = np.abs(u) + c
    a = np.maximum(speed[:-1], speed[1:])
    face = 0.5 * (F[:, :-1] + F[:, 1:]) - 0.5 * a * (U[:, 1:] - U[:, :-1])
    Unew = U[:, 1:-1] - dt / s.dx * (face[:, 1:] - face[:, :-1])
    return FluidState.from_conserved(s, Unew, s.t + dt)


def evolve_fluid(s: FluidState, t_end: float, boundary=PERIODIC, cfl=0.4) -> FluidState:
    while s.t < t_end - 1e-14 * max(1.0, abs(t_end)):
        dt = min(stable_dt(s, cfl), t_end - s.t)
        s = euler_step(s, dt, boundary)
    return s


def _check_polytrope(s: FluidState):
    target = 1.0 + 2.0 / s.d_eff
    if abs(s.gamma0 - target) > 1e-12:
        raise WrongPolytrope(f"gamma0={s.gamma0} is not 1 + 2/d_eff = {target}; no symmetry")


def transform_fluid(sigma: MoebiusMap, s: FluidState, target=None, strict=True, eps_sing=EPS_SING) -> FluidState:
    """Push the flow forward along xi = x/s, tau = h(t) with s = gamma t + delta.

    u' = s u - gamma x, rho' = |s|^d rho, eps' = |s|^d s^2 eps.  ``target`` is an
    optional (x_min, x_max, n) grid; by default the image grid is used.
    ``strict=False`` allows the map for a non-symmetric polytrope (controls).
    """
    if strict:
        _check_polytrope(s)
    sc = float(sigma.scale(s.t))
    if abs(sc) <= eps_sing:
        raise SingularLocus(f"|gamma t + delta| = {abs(sc):.3e}")
    d = s.d_eff
    xi = s.x / sc
    u = sc * s.u - sigma.gamma * s.x
    rho = abs(sc) ** d * s.rho
    eps = abs(sc) ** d * sc**2 * s.eps
    lo, hi = sorted((s.x_min / sc, s.x_max / sc))
    if sc < 0:
        xi, u, rho, eps = xi[::-1], u[::-1], rho[::-1], eps[::-1]
    tau = float(sigma.time(s.t))
    if target is None:
        return replace(s, x_min=lo, x_max=hi, rho=rho, u=u, eps=eps, t=tau)
    t_min, t_max, n = target
    if t_min < lo - 1e-12 * (hi - lo) or t_max > hi + 1e-12 * (hi - lo):
        raise SupportClipped("target grid extends beyond the mapped domain")
    xt = t_min + (t_max - t_min) / n * (np.arange(n) + 0.5)
    # cell centres near the edge: extend linearly from the image samples
    fields = []
    for q in (rho, u, eps):
        xe = np.concatenate([[lo], xi, [hi]])
        qe = np.concatenate([[q[0] - (q[1] - q[0]) * (xi[0] - lo) / (xi[1] - xi[0])], q,
                             [q[-1] + (q[-1] - q[-2]) * (hi - xi[-1]) / (xi[-1] - xi[-2])]])
        fields.append(np.interp(xt, xe, qe))
    return replace(s, x_min=t_min, x_max=t_max, rho=fields[0], u=fields[1], eps=fields[2], t=tau)


@dataclass(frozen=True)
class DualityReport:
    errors: dict
    dx: float

    @property
    def rel_l1(self):
        return max(self.errors.values())


def rel_l1(a: FluidState, b: FluidState):
    return {name: float(np.sum(np.abs(getattr(a, name) - getattr(b, name))) / np.sum(np.abs(getattr(a, name))))
            for name in ("rho", "u", "eps")}


def duality_check(sigma: MoebiusMap, init: FluidState, t_end: float, boundary=EXTRAPOLATE,
                  cfl=0.4, strict=True) -> DualityReport:
    """evolve-then-transform against transform-then-evolve on the mapped interval.

    Both routes end at tau = h(t_end) on the smaller of the two image grids.
    """
    s0, s1 = float(sigma.scale(init.t)), float(sigma.scale(t_end))
    if s0 * s1 <= 0:
        raise SingularLocus("the evolution window crosses the Moebius pole")
    late = evolve_fluid(init, t_end, boundary, cfl)
    image_late = transform_fluid(sigma, late, strict=strict)
    image_early = transform_fluid(sigma, init, strict=strict)
    if abs(s1) >= abs(s0):
        grid = (image_late.x_min, image_late.x_max, init.n)
        route_a = image_late
        start = transform_fluid(sigma, init, target=grid, strict=strict)
    else:
        grid = (image_early.x_min, image_early.x_max, init.n)
        route_a = transform_fluid(sigma, late, target=grid, strict=strict)
        start = image_early
    route_b = evolve_fluid(start, float(sigma.time(t_end)), boundary, cfl)
    return DualityReport(rel_l1(route_a, route_b), route_a.dx)


def smooth_pulse(n=400, gamma0=3.0, amplitude=0.2, width=0.5, half_length=4.0):
    """Isentropic Gaussian density pulse at rest, p = rho^gamma0."""
    rho = lambda x: 1.0 + amplitude * np.exp(-((x / width) ** 2))
    return FluidState.from_profile(n, -half_length, half_length, rho, np.zeros_like,
                                   lambda x: rho(x) ** gamma0, gamma0)


def convergence_order(err_coarse, err_fine, ratio=2.0):
    return float(np.log(err_coarse / err_fine) / np.log(ratio))
