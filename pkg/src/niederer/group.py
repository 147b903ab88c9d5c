"""Elements of SL(2,R) x| G acting on nonrelativistic spacetime.

An element ``(sigma, g)`` acts on an event ``(x, t)`` as

    xi  = (R x + a + v t) / (gamma t + delta)
    tau = (alpha t + beta) / (gamma t + delta)

i.e. the static Galilei part ``g = (R, a, v)`` is applied first and the
Moebius part ``sigma`` second.  Composition follows the map order:
``act(compose(e1, e2), ev) == act(e1, act(e2, ev))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import simpson, trapezoid

from .errors import (
    NonPositiveDeterminant,
    NotARotation,
    SingularLocus,
    StationaryMap,
    WindowCrossesPole,
)
from .phase_space import Trajectory

EPS_SING = 1e-8


@dataclass(frozen=True)
class MoebiusMap:
    """Real fractional linear time map, normalized to unit determinant on construction."""

    alpha: float = 1.0
    beta: float = 0.0
    gamma: float = 0.0
    delta: float = 1.0

    def __post_init__(self):
        a, b, c, d = (float(v) for v in (self.alpha, self.beta, self.gamma, self.delta))
        det = a * d - b * c
        if not det > 0:
            raise NonPositiveDeterminant(
                f"alpha*delta - beta*gamma = {det!r}; orientation-reversing or singular time map"
            )
        if det != 1.0:
            k = 1.0 / math.sqrt(det)
            a, b, c, d = a * k, b * k, c * k, d * k
        for name, val in zip(("alpha", "beta", "gamma", "delta"), (a, b, c, d)):
            object.__setattr__(self, name, val)

    # named one-parameter subgroups
    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def time_translation(cls, beta):
        return cls(1.0, beta, 0.0, 1.0)

    @classmethod
    def dilation(cls, lam):
        return cls(lam, 0.0, 0.0, 1.0 / lam)

    @classmethod
    def expansion(cls, gamma):
        return cls(1.0, 0.0, gamma, 1.0)

    @classmethod
    def inversion(cls):
        return cls(0.0, -1.0, 1.0, 0.0)

    @classmethod
    def parity(cls):
        return cls(-1.0, 0.0, 0.0, -1.0)

    @classmethod
    def from_matrix(cls, M):
        M = np.asarray(M, dtype=float)
        return cls(M[0, 0], M[0, 1], M[1, 0], M[1, 1])

    @property
    def matrix(self):
        return np.array([[self.alpha, self.beta], [self.gamma, self.delta]])

    @property
    def det(self):
        return self.alpha * self.delta - self.beta * self.gamma

    @property
    def pole(self):
        """t* = -delta/gamma, or None for affine maps."""
        return None if self.gamma == 0 else -self.delta / self.gamma

    def scale(self, t):
        """s(t) = gamma t + delta; lengths are divided by it."""
        return self.gamma * np.asarray(t, dtype=float) + self.delta

    def time(self, t):
        t = np.asarray(t, dtype=float)
        return (self.alpha * t + self.beta) / (self.gamma * t + self.delta)

    def inverse_time(self, tau):
        tau = np.asarray(tau, dtype=float)
        return (self.delta * tau - self.beta) / (self.alpha - self.gamma * tau)

    def derivatives(self, t):
        """Closed-form (h', h'', h''') of the time map at t."""
        s = self.scale(t)
        return 1.0 / s**2, -2.0 * self.gamma / s**3, 6.0 * self.gamma**2 / s**4

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        return MoebiusMap.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.delta, -self.beta, -self.gamma, self.alpha)

    def params(self):
        return np.array([self.alpha, self.beta, self.gamma, self.delta])


def _check_rotation(R, tol=1e-9):
    R = np.atleast_2d(np.asarray(R, dtype=float))
    d = R.shape[0]
    if R.shape != (d, d) or d not in (1, 2, 3):
        raise NotARotation(f"rotation must be d x d with d in 1..3, got {R.shape}")
    if np.max(np.abs(R.T @ R - np.eye(d))) > tol:
        raise NotARotation("R^T R != 1")
    if np.linalg.det(R) <= 0:
        raise NotARotation("det R must be +1 (parity enters through the Moebius part -I)")
    return R


@dataclass(frozen=True)
class GalileiElement:
    """Connected static Galilei transformation x -> R x + a + v t."""

    R: np.ndarray
    a: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        R = _check_rotation(self.R)
        d = R.shape[0]
        a = np.asarray(self.a, dtype=float).reshape(d)
        v = np.asarray(self.v, dtype=float).reshape(d)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "v", v)

    @classmethod
    def identity(cls, d=1):
        return cls(np.eye(d), np.zeros(d), np.zeros(d))

    @classmethod
    def translation(cls, a):
        a = np.atleast_1d(np.asarray(a, dtype=float))
        return cls(np.eye(a.size), a, np.zeros(a.size))

    @classmethod
    def boost(cls, v):
        v = np.atleast_1d(np.asarray(v, dtype=float))
        return cls(np.eye(v.size), np.zeros(v.size), v)

    @property
    def d(self):
        return self.R.shape[0]

    def apply(self, x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        return x @ self.R.T + self.a + np.multiply.outer(t, self.v).reshape(
            t.shape + (1,) * (x.ndim - t.ndim - 1) + (self.d,)
        )

    def compose(self, other: "GalileiElement") -> "GalileiElement":
        """self o other (other applied first)."""
        return GalileiElement(self.R @ other.R, self.R @ other.a + self.a, self.R @ other.v + self.v)

    def inverse(self) -> "GalileiElement":
        Rt = self.R.T
        return GalileiElement(Rt, -Rt @ self.a, -Rt @ self.v)

    def params(self):
        return np.concatenate([self.R.ravel(), self.a, self.v])


@dataclass(frozen=True)
class GroupElement:
    sigma: MoebiusMap
    g: GalileiElement

    @property
    def d(self):
        return self.g.d

    @classmethod
    def identity(cls, d=1):
        return cls(MoebiusMap.identity(), GalileiElement.identity(d))

    @classmethod
    def from_moebius(cls, sigma, d=1):
        return cls(sigma, GalileiElement.identity(d))

    @classmethod
    def from_galilei(cls, g):
        return cls(MoebiusMap.identity(), g)

    def params(self):
        return np.concatenate([self.sigma.params(), self.g.params()])


class SpacetimeEvent(NamedTuple):
    x: np.ndarray
    t: float


class CocycleTerm(NamedTuple):
    """Closed-form boundary term F(x, t) of the free action under an element.

    For y = R x + a + v t and s = gamma t + delta:
        F = m (v . R x + v^2 t / 2) - m gamma |y|^2 / (2 s)
    summed over particles.
    """

    element: GroupElement
    m: float

    def __call__(self, x, t):
        e = self.element
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = e.g.apply(x, t)
        s = e.sigma.scale(t)
        galilei = np.sum(x @ e.g.R.T @ e.g.v) + 0.5 * x.shape[0] * (e.g.v @ e.g.v) * t
        return float(self.m * galilei - self.m * e.sigma.gamma * np.sum(y * y) / (2.0 * s))


def make_element(alpha, beta, gamma, delta, R=None, a=None, v=None) -> GroupElement:
    """Build an element, rescaling the Moebius part to unit determinant."""
    if R is None:
        d = np.atleast_1d(a).size if a is not None else (np.atleast_1d(v).size if v is not None else 1)
        R = np.eye(d)
    R = np.atleast_2d(np.asarray(R, dtype=float))
    d = R.shape[0]
    a = np.zeros(d) if a is None else a
    v = np.zeros(d) if v is None else v
    return GroupElement(MoebiusMap(alpha, beta, gamma, delta), GalileiElement(R, a, v))


def conjugate(sigma: MoebiusMap, g: GalileiElement) -> GalileiElement:
    """sigma^-1 o g o sigma, which stays in G: (v_s; a_s) = (alpha gamma; beta delta)(v; a)."""
    v_s = sigma.alpha * g.v + sigma.gamma * g.a
    a_s = sigma.beta * g.v + sigma.delta * g.a
    return GalileiElement(g.R, a_s, v_s)


def compose(e1: GroupElement, e2: GroupElement) -> GroupElement:
    """e1 o e2 = sigma1 sigma2 (sigma2^-1 g1 sigma2) g2."""
    if e1.d != e2.d:
        raise ValueError("elements act in different dimensions")
    return GroupElement(e1.sigma.compose(e2.sigma), conjugate(e2.sigma, e1.g).compose(e2.g))


def inverse(e: GroupElement) -> GroupElement:
    sigma_inv = e.sigma.inverse()
    return GroupElement(sigma_inv, conjugate(sigma_inv, e.g.inverse()))


def power(e: GroupElement, n: int) -> GroupElement:
    out = GroupElement.identity(e.d)
    for _ in range(n):
        out = compose(e, out)
    return out


def _guard_scale(s, eps_sing):
    if np.any(np.abs(s) <= eps_sing):
        raise SingularLocus(f"|gamma t + delta| = {np.min(np.abs(s)):.3e} <= {eps_sing:g}")


def act_points(e: GroupElement, x, t, eps_sing=EPS_SING):
    """Vectorized action: x has shape (..., d) with t broadcast against x[..., 0]."""
    t = np.asarray(t, dtype=float)
    s = e.sigma.scale(t)
    _guard_scale(s, eps_sing)
    y = e.g.apply(x, t)
    s_b = np.reshape(s, s.shape + (1,) * (y.ndim - s.ndim))
    return y / s_b, e.sigma.time(t)


def act(e: GroupElement, ev, eps_sing=EPS_SING) -> SpacetimeEvent:
    x, t = ev
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not (np.all(np.isfinite(x)) and np.isfinite(t)):
        raise ValueError("event components must be finite")
    xi, tau = act_points(e, x, float(t), eps_sing)
    return SpacetimeEvent(xi, float(tau))


def _check_window(sigma, times, eps_sing):
    s = sigma.scale(times)
    if np.any(np.abs(s) <= eps_sing) or (np.any(s > 0) and np.any(s < 0)):
        raise WindowCrossesPole(
            f"time window [{times.min():g}, {times.max():g}] meets the pole t*={sigma.pole}"
        )
    return s


def transformed_velocity(e: GroupElement, x, xdot, t):
    """d xi / d tau = s (R xdot + v) - gamma (R x + a + v t)."""
    s = e.sigma.scale(t)
    y = e.g.apply(x, t)
    w = np.asarray(xdot, dtype=float) @ e.g.R.T + e.g.v
    s_b = np.reshape(s, np.shape(s) + (1,) * (y.ndim - np.ndim(s)))
    return s_b * w - e.sigma.gamma * y


def act_trajectory(e: GroupElement, tr: Trajectory, eps_sing=EPS_SING) -> Trajectory:
    """Map every sample of ``tr``; momenta follow from chain-rule velocities."""
    if e.d != tr.system.d:
        raise ValueError("element and trajectory dimensions differ")
    _check_window(e.sigma, tr.times, eps_sing)
    xi, tau = act_points(e, tr.x, tr.times, eps_sing)
    w = transformed_velocity(e, tr.x, tr.velocities(), tr.times)
    p = np.stack([tr.system.momentum(xk, wk) for xk, wk in zip(xi, w)])
    order = np.argsort(tau, kind="stable")
    return Trajectory(tau[order], xi[order], p[order], tr.system)


def coset_square(g: GalileiElement, tol=1e-12):
    """(Sigma g)^2 and its parity flag; checks the closed form (R^2, R a - v, R v + a)."""
    e = GroupElement(MoebiusMap.inversion(), g)
    sq = compose(e, e)
    parity = np.allclose(sq.sigma.matrix, -np.eye(2), atol=tol, rtol=0)
    expected = GalileiElement(g.R @ g.R, g.R @ g.a - g.v, g.R @ g.v + g.a)
    if not parity or np.max(np.abs(sq.g.params() - expected.params())) > tol * (1 + np.max(np.abs(expected.params()))):
        raise AssertionError("coset square does not match the parity-reflected closed form")
    return sq.g, parity


def schwarzian(h, t) -> float:
    """h'''/h' - 3/2 (h''/h')^2.

    ``h`` is a MoebiusMap or any object with ``derivatives(t) -> (h1, h2, h3)``;
    a triple of callables is accepted too.
    """
    if hasattr(h, "derivatives"):
        h1, h2, h3 = h.derivatives(t)
    else:
        h1, h2, h3 = (f(t) for f in h)
    if h1 == 0:
        raise StationaryMap(f"h'({t}) = 0")
    return float(h3 / h1 - 1.5 * (h2 / h1) ** 2)


@dataclass(frozen=True)
class PolynomialTimeMap:
    """h(t) = sum c_k t^k, mainly for non-Moebius controls such as t^2."""

    coeffs: tuple

    def __call__(self, t):
        return np.polynomial.polynomial.polyval(t, self.coeffs)

    def derivatives(self, t):
        P = np.polynomial.Polynomial(self.coeffs)
        return tuple(float(P.deriv(k)(t)) for k in (1, 2, 3))


@dataclass(frozen=True)
class CocycleReport:
    defect: float
    defect_alt: float
    difference: float
    endpoint_term: float
    quadrature_error: float

    @property
    def endpoint_mismatch(self):
        return abs(self.defect - self.endpoint_term)


def _free_actions(e, times, x, xdot, m):
    """(S, S') by Simpson quadrature in the original time variable."""
    s = e.sigma.scale(times)
    w = transformed_velocity(e, x, xdot, times)
    lag = 0.5 * m * np.sum(xdot**2, axis=(1, 2))
    lag_new = 0.5 * m * np.sum(w**2, axis=(1, 2)) / s**2  # d tau = dt / s^2
    S = simpson(lag, x=times)
    S_new = simpson(lag_new, x=times)
    S_trap = trapezoid(lag, x=times)
    S_new_trap = trapezoid(lag_new, x=times)
    return S, S_new, abs((S_new - S) - (S_new_trap - S_trap))


def action_cocycle_check(e: GroupElement, tr: Trajectory, m=None, bump=0.25, eps_sing=EPS_SING):
    """Compare S' - S on ``tr`` and on a second path with the same endpoints.

    The second path adds ``bump * sin(pi (t - t0) / T)`` to every coordinate.
    Both defects must equal F(end) - F(start) of the closed-form cocycle.
    """
    m = tr.m if m is None else m
    times = tr.times
    _check_window(e.sigma, times, eps_sing)
    x = tr.x
    xdot = tr.velocities()
    S, S_new, qerr = _free_actions(e, times, x, xdot, m)

    t0, T = times[0], times[-1] - times[0]
    phase = np.pi * (times - t0) / T
    x2 = x + bump * np.sin(phase)[:, None, None]
    xdot2 = xdot + bump * (np.pi / T) * np.cos(phase)[:, None, None]
    S2, S2_new, qerr2 = _free_actions(e, times, x2, xdot2, m)

    F = CocycleTerm(e, m)
    endpoint = F(x[-1], times[-1]) - F(x[0], times[0])
    defect, defect_alt = S_new - S, S2_new - S2
    return CocycleReport(defect, defect_alt, defect - defect_alt, endpoint, max(qerr, qerr2))


# -- seeded sampling ---------------------------------------------------------

def random_rotation(rng, d):
    if d == 1:
        return np.eye(1)
    if d == 2:
        th = rng.uniform(-np.pi, np.pi)
        c, s = np.cos(th), np.sin(th)
        return np.array([[c, -s], [s, c]])
    q = rng.normal(size=4)
    w, x, y, z = q / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def random_moebius(rng, window=(0.0, 1.0), margin=0.1, low=-2.0, high=2.0, det_min=0.05):
    """Uniform parameters in [low, high], rejected until det > det_min and
    |gamma t + delta| > margin over the window (after normalization)."""
    t0, t1 = window
    while True:
        a, b, c, d = rng.uniform(low, high, size=4)
        if a * d - b * c <= det_min:
            continue
        sigma = MoebiusMap(a, b, c, d)
        s0, s1 = sigma.scale(t0), sigma.scale(t1)
        if s0 * s1 > 0 and min(abs(s0), abs(s1)) > margin:
            return sigma


def random_galilei(rng, d=1, low=-2.0, high=2.0):
    return GalileiElement(random_rotation(rng, d), rng.uniform(low, high, d), rng.uniform(low, high, d))


def random_element(rng, d=1, window=(0.0, 1.0), margin=0.1, **kw) -> GroupElement:
    return GroupElement(random_moebius(rng, window, margin, **kw), random_galilei(rng, d))


def param_deviation(e1: GroupElement, e2: GroupElement) -> float:
    return float(np.max(np.abs(e1.params() - e2.params())))
