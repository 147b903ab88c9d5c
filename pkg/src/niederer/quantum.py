"""Field representation in one dimension (hbar = 1): free Schroedinger
evolution, the SL(2,R) wavefunction law, generator algebra and the
Heisenberg-Weyl phase.

Generators act on a single-time field; time derivatives are removed on shell
with i d/dt -> -(1/2m) d^2/dx^2.  Ordering constants are d/2 = 1/2.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations_with_replacement

import numpy as np

from .errors import LinearSolveFailure, SingularLocus, SupportClipped
from .group import EPS_SING, MoebiusMap

GENERATORS = ("P", "K", "H", "D", "A")

# Sign of the quadratic phase in the SL(2,R) law, frozen from
# calibrate_phase_sign(): covariance residual ~1e-11 for +1 and ~1e-2 for -1
# with an expansion gamma=0.1, n=1024, dt=1e-4.
PHASE_SIGN = +1

SUPPORT_TOL = 1e-10


@dataclass(frozen=True)
class WaveField:
    x_min: float
    x_max: float
    psi: np.ndarray
    m: float = 1.0
    t: float = 0.0

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=complex)
        n = psi.size
        if psi.ndim != 1 or n < 2 or n & (n - 1):
            raise ValueError("psi must be 1D with a power-of-two length")
        if not np.all(np.isfinite(psi)):
            raise ValueError("non-finite wavefunction samples")
        if self.x_max <= self.x_min:
            raise ValueError("empty grid")
        object.__setattr__(self, "psi", psi)

    @property
    def n(self):
        return self.psi.size

    @property
    def dx(self):
        return (self.x_max - self.x_min) / self.n

    @property
    def x(self):
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def k(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.n, self.dx)

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.psi) ** 2) * self.dx))

    def with_psi(self, psi, t=None):
        return replace(self, psi=psi, t=self.t if t is None else t)

    @classmethod
    def gaussian(cls, n=1024, x_min=-20.0, x_max=20.0, x0=0.0, width=1.0, k0=0.0, m=1.0, t=0.0):
        """exp(-(x-x0)^2 / (4 width^2) + i k0 x), normalized."""
        x = x_min + (x_max - x_min) / n * np.arange(n)
        psi = np.exp(-((x - x0) ** 2) / (4 * width**2) + 1j * k0 * x)
        f = cls(x_min, x_max, psi, m, t)
        return f.with_psi(f.psi / f.norm())


def free_gaussian(x, t, width=1.0, k0=0.0, m=1.0, x0=0.0):
    """Closed-form free evolution of exp(-(x-x0)^2/(4 w^2) + i k0 x) (unnormalized)."""
    c = 1.0 + 1j * t / (2.0 * m * width**2)
    xc = x - x0 - k0 * t / m
    return c**-0.5 * np.exp(-(xc**2) / (4 * width**2 * c) + 1j * k0 * (x - x0) - 1j * k0**2 * t / (2 * m)) \
        * np.exp(1j * k0 * x0)


def _deriv(f: WaveField, psi, order=1):
    return np.fft.ifft((1j * f.k) ** order * np.fft.fft(psi))


def evolve(f: WaveField, dt: float, steps: int) -> WaveField:
    """Cayley (Crank-Nicolson) steps of i psi_t = -(1/2m) psi_xx.

    The spectral Laplacian is diagonal in Fourier space, so the implicit solve is
    exact and the one-step amplification factor has modulus one.
    """
    if steps == 0:
        return f
    if dt <= 0 or steps < 0:
        raise ValueError("need dt > 0 and steps >= 0")
    half = 0.5j * dt * f.k**2 / (2.0 * f.m)
    factor = (1.0 - half) / (1.0 + half)
    out = np.fft.ifft(np.fft.fft(f.psi) * factor**steps)
    if not np.all(np.isfinite(out)):
        raise LinearSolveFailure("non-finite result of the implicit step")
    return f.with_psi(out, f.t + dt * steps)


def _edge_mass(psi, width_pts):
    if width_pts <= 0:
        return 0.0
    peak = np.max(np.abs(psi))
    edge = max(np.max(np.abs(psi[:width_pts])), np.max(np.abs(psi[-width_pts:])))
    return edge / peak if peak > 0 else 0.0


def band_limited_eval(f: WaveField, y, chunk=512):
    """Trigonometric interpolant of f.psi at arbitrary points y (primary cell only)."""
    coeff = np.fft.fft(f.psi) / f.n
    k = f.k
    y = np.asarray(y, dtype=float)
    out = np.zeros(y.shape, dtype=complex)
    inside = (y >= f.x_min) & (y < f.x_max)
    yi = y[inside] - f.x_min
    vals = np.empty(yi.size, dtype=complex)
    for i in range(0, yi.size, chunk):
        vals[i:i + chunk] = np.exp(1j * np.outer(yi[i:i + chunk], k)) @ coeff
    out[inside] = vals
    return out


def transform_wavefield(sigma: MoebiusMap, f: WaveField, phase_sign=None, eps_sing=EPS_SING,
                        edge_pts=4) -> WaveField:
    """psi'(x, t) = |s|^(-1/2) exp(i c m gamma x^2 / (2 s)) psi(x / s, h(t)).

    ``f`` holds psi at time h(t); the result lives at t = h^-1(f.t) on the same
    grid, with s = gamma t + delta.
    """
    c = PHASE_SIGN if phase_sign is None else phase_sign
    t_new = float(sigma.inverse_time(f.t))
    s = float(sigma.scale(t_new))
    if abs(s) <= eps_sing or not np.isfinite(t_new):
        raise SingularLocus(f"|gamma t + delta| = {abs(s):.3e} at t = {t_new}")
    if _edge_mass(f.psi, edge_pts) > SUPPORT_TOL:
        raise SupportClipped("input field is not negligible at the grid edge")
    x = f.x
    psi = band_limited_eval(f, x / s)
    psi = abs(s) ** -0.5 * np.exp(1j * c * f.m * sigma.gamma * x**2 / (2.0 * s)) * psi
    if _edge_mass(psi, edge_pts) > SUPPORT_TOL:
        raise SupportClipped("mapped support exceeds the grid")
    return f.with_psi(psi, t_new)


def prefactor_mismatch(sigma: MoebiusMap, times) -> float:
    """max | |gamma tau - alpha| - 1/|gamma t + delta| | over regular times."""
    times = np.asarray(times, dtype=float)
    tau = sigma.time(times)
    return float(np.max(np.abs(np.abs(sigma.gamma * tau - sigma.alpha) - 1.0 / np.abs(sigma.scale(times)))))


def covariance_residual(sigma: MoebiusMap, f: WaveField, duration: float, dt: float, phase_sign=None):
    """Relative L2 gap between evolve(transform(f)) and transform(evolve(f)) after ``duration``.

    Both routes step with (nearly) the same dt in their own time variable, so
    the step counts differ whenever the time map stretches the interval.
    """
    g = transform_wavefield(sigma, f, phase_sign)
    steps_a = max(1, int(round(duration / dt)))
    route_a = evolve(g, duration / steps_a, steps_a)
    dtau = float(sigma.time(g.t + duration)) - f.t
    steps_b = max(1, int(round(dtau / dt)))
    route_b = transform_wavefield(sigma, evolve(f, dtau / steps_b, steps_b), phase_sign)
    return float(np.linalg.norm(route_a.psi - route_b.psi) / np.linalg.norm(route_a.psi))


def calibrate_phase_sign(sigma=None, f=None, duration=0.1, dt=1e-4):
    """Pick the quadratic-phase sign that makes the transform a symmetry.

    Returns (sign, {sign: residual}).
    """
    sigma = MoebiusMap.expansion(0.1) if sigma is None else sigma
    f = WaveField.gaussian() if f is None else f
    res = {c: covariance_residual(sigma, f, duration, dt, c) for c in (+1, -1)}
    return min(res, key=res.get), res


# -- generators ---------------------------------------------------------------

def apply_generator(name: str, f: WaveField, psi=None, a_form="on_shell"):
    """Apply P, K, H, D or A to ``psi`` (default f.psi) at time f.t.

    ``a_form="literal"`` uses an imaginary quadratic term +i (m/2) x^2 in A;
    the default uses -(m/2) x^2, i.e. A = -K^2/2m on shell.
    """
    psi = f.psi if psi is None else psi
    x, t, m = f.x, f.t, f.m
    if name == "P":
        return -1j * _deriv(f, psi)
    if name == "K":
        return -1j * t * _deriv(f, psi) - m * x * psi
    hpsi = -_deriv(f, psi, 2) / (2.0 * m)
    if name == "H":
        return hpsi
    scale = x * _deriv(f, psi) + 0.5 * psi
    if name == "D":
        return 2.0 * t * hpsi + 1j * scale
    if name == "A":
        quad = 0.5j * m * x**2 * psi if a_form == "literal" else -0.5 * m * x**2 * psi
        return -t * t * hpsi - 1j * t * scale + quad
    if name == "J":
        raise ValueError("J is absent in one dimension")
    raise ValueError(f"unknown generator {name!r}")


# [G1, G2] = coef * G3 (G3 = None means the identity)
_TABLE = {
    ("K", "P"): ("-im", None),
    ("P", "H"): (0, None),
    ("K", "H"): (-1j, "P"),
    ("D", "K"): (1j, "K"),
    ("D", "P"): (-1j, "P"),
    ("A", "K"): (0, None),
    ("A", "P"): (1j, "K"),
    ("D", "H"): (-2j, "H"),
    ("A", "H"): (1j, "D"),
    ("D", "A"): (2j, "A"),
}

COMMUTATOR_PAIRS = tuple(combinations_with_replacement(GENERATORS, 2))


def commutator(n1, n2, f: WaveField, psi=None, **kw):
    psi = f.psi if psi is None else psi
    return apply_generator(n1, f, apply_generator(n2, f, psi, **kw), **kw) - \
        apply_generator(n2, f, apply_generator(n1, f, psi, **kw), **kw)


def expected_commutator(n1, n2, f: WaveField, psi=None, **kw):
    psi = f.psi if psi is None else psi
    if n1 == n2:
        return np.zeros_like(psi)
    sign = 1
    entry = _TABLE.get((n1, n2))
    if entry is None:
        entry, sign = _TABLE[(n2, n1)], -1
    coef, target = entry
    if coef == "-im":
        return sign * (-1j * f.m) * psi
    if target is None:
        return np.zeros_like(psi)
    return sign * coef * apply_generator(target, f, psi, **kw)


def commutator_residual(n1, n2, f: WaveField, **kw) -> float:
    diff = commutator(n1, n2, f, **kw) - expected_commutator(n1, n2, f, **kw)
    return float(np.linalg.norm(diff) / np.linalg.norm(f.psi))


def jacobi_residual(n1, n2, n3, f: WaveField) -> float:
    psi = f.psi

    def nested(a, b, c):
        inner = lambda v: commutator(b, c, f, v)
        return apply_generator(a, f, inner(psi)) - inner(apply_generator(a, f, psi))

    total = nested(n1, n2, n3) + nested(n2, n3, n1) + nested(n3, n1, n2)
    return float(np.linalg.norm(total) / np.linalg.norm(psi))


# -- Heisenberg-Weyl ----------------------------------------------------------

def translate(f: WaveField, a, psi=None):
    """T(a) psi (x) = psi(x + a) by a spectral shift."""
    psi = f.psi if psi is None else psi
    return np.fft.ifft(np.fft.fft(psi) * np.exp(1j * f.k * a))


def boost_phase(f: WaveField, v, psi=None):
    """B(v) at t = 0: multiplication by exp(i m v x)."""
    psi = f.psi if psi is None else psi
    return np.exp(1j * f.m * v * f.x) * psi


def weyl_relation_check(a, v, f: WaveField):
    """Returns (ratio, |ratio - exp(i m a v)|) with ratio = <BT psi, TB psi> / <BT psi, BT psi>."""
    width = int(np.ceil(abs(a) / f.dx)) + 1
    if _edge_mass(f.psi, width) > SUPPORT_TOL:
        raise SupportClipped("field is within |a| of the grid edge")
    tb = translate(f, a, boost_phase(f, v))
    bt = boost_phase(f, v, translate(f, a))
    ratio = np.vdot(bt, tb) / np.vdot(bt, bt)
    return complex(ratio), float(abs(ratio - np.exp(1j * f.m * a * v)))
