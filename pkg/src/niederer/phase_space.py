"""Phase-space data types shared by the group, Noether and dynamics layers.

Positions and momenta are stored as ``(N, d)`` arrays for a single state and
``(K, N, d)`` arrays for a sampled trajectory.  Momenta are canonical; for the
anyon gas they differ from ``m * xdot`` by the vector potential.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import numpy as np

from .errors import CollisionSingularity

FREE = "Free"
CALOGERO_MOSER = "CalogeroMoser"
ANYON_GAS = "AnyonGas"
KINDS = (FREE, CALOGERO_MOSER, ANYON_GAS)

# exchange tensor eps_kl with eps_12 = +1
_EPS2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class MechSystem:
    kind: str = FREE
    N: int = 1
    d: int = 1
    m: float = 1.0
    g2: float = 0.0
    kappa: float = 1.0
    r_min: float = 1e-6

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown system kind {self.kind!r}")
        if self.N < 1 or self.d not in (1, 2, 3):
            raise ValueError("need N >= 1 and d in {1, 2, 3}")
        if self.m <= 0:
            raise ValueError("mass must be positive")
        if self.kind == CALOGERO_MOSER and (self.d != 1 or self.N < 2):
            raise ValueError("Calogero-Moser requires d=1, N>=2")
        if self.kind == ANYON_GAS and (self.d != 2 or self.N < 2):
            raise ValueError("anyon gas requires d=2, N>=2")
        if self.g2 < 0:
            raise ValueError("g2 must be non-negative")

    @classmethod
    def free(cls, N=1, d=1, m=1.0):
        return cls(FREE, N, d, m)

    @classmethod
    def calogero_moser(cls, N=2, m=1.0, g2=1.0):
        return cls(CALOGERO_MOSER, N, 1, m, g2=g2)

    @classmethod
    def anyon_gas(cls, N=2, m=1.0, kappa=1.0):
        return cls(ANYON_GAS, N, 2, m, kappa=kappa)

    # -- pair geometry -------------------------------------------------
    def pair_separations(self, x):
        """r[I, J] = x_I - x_J with shape (N, N, d)."""
        x = np.asarray(x, dtype=float)
        return x[:, None, :] - x[None, :, :]

    def check_collisions(self, x):
        if self.kind == FREE:
            return
        r = self.pair_separations(x)
        dist = np.linalg.norm(r, axis=-1)
        np.fill_diagonal(dist, np.inf)
        if dist.min() <= self.r_min:
            raise CollisionSingularity(
                f"pair distance {dist.min():.3e} below r_min={self.r_min:g}"
            )

    # -- potentials ----------------------------------------------------
    def potential(self, x):
        if self.kind != CALOGERO_MOSER:
            return 0.0
        r = self.pair_separations(x)[..., 0]
        iu = np.triu_indices(self.N, 1)
        return float(self.g2 * np.sum(1.0 / r[iu] ** 2))

    def vector_potential(self, x):
        """kappa * sum_J eps (x_I - x_J) / |x_I - x_J|^2 for each particle."""
        x = np.asarray(x, dtype=float)
        if self.kind != ANYON_GAS:
            return np.zeros_like(x)
        r = self.pair_separations(x)
        r2 = np.sum(r * r, axis=-1)
        np.fill_diagonal(r2, np.inf)
        return self.kappa * np.einsum("kl,ijl->ik", _EPS2, r / r2[..., None])

    def velocity(self, x, p):
        p = np.asarray(p, dtype=float)
        if self.kind == ANYON_GAS:
            return (p - self.vector_potential(x)) / self.m
        return p / self.m

    def momentum(self, x, v):
        v = np.asarray(v, dtype=float)
        if self.kind == ANYON_GAS:
            return self.m * v + self.vector_potential(x)
        return self.m * v

    def hamiltonian(self, x, p):
        v = self.velocity(x, p)
        return float(0.5 * self.m * np.sum(v * v) + self.potential(x))


@dataclass(frozen=True)
class PhaseSpaceState:
    t: float
    x: np.ndarray
    p: np.ndarray
    m: float = 1.0

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        p = np.atleast_2d(np.asarray(self.p, dtype=float))
        if x.shape != p.shape:
            raise ValueError(f"x shape {x.shape} != p shape {p.shape}")
        if x.shape[0] < 1:
            raise ValueError("need at least one particle")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p)) and np.isfinite(self.t)):
            raise ValueError("non-finite phase-space state")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "t", float(self.t))

    @property
    def N(self):
        return self.x.shape[0]

    @property
    def d(self):
        return self.x.shape[1]

    @classmethod
    def single(cls, x, p, t=0.0, m=1.0):
        """One particle; scalars are read as d=1."""
        return cls(t, np.atleast_1d(np.asarray(x, float))[None, :],
                   np.atleast_1d(np.asarray(p, float))[None, :], m)


@dataclass(frozen=True)
class Trajectory:
    """Samples ``(times[k], x[k], p[k])`` of a solution of ``system``."""

    times: np.ndarray
    x: np.ndarray
    p: np.ndarray
    system: MechSystem = field(default_factory=MechSystem)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        x = np.asarray(self.x, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if x.ndim != 3 or x.shape != p.shape or x.shape[0] != times.size:
            raise ValueError("trajectory arrays must be (K,), (K,N,d), (K,N,d)")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        if x.shape[1:] != (self.system.N, self.system.d):
            raise ValueError("trajectory shape does not match its system")
        for name, arr in (("times", times), ("x", x), ("p", p)):
            object.__setattr__(self, name, arr)

    def __len__(self):
        return self.times.size

    @property
    def m(self):
        return self.system.m

    def state(self, k) -> PhaseSpaceState:
        return PhaseSpaceState(self.times[k], self.x[k], self.p[k], self.system.m)

    @property
    def states(self) -> Iterator[PhaseSpaceState]:
        return (self.state(k) for k in range(len(self)))

    def velocities(self):
        return np.stack([self.system.velocity(xk, pk) for xk, pk in zip(self.x, self.p)])

    @classmethod
    def from_states(cls, states, system):
        states = list(states)
        return cls(np.array([s.t for s in states]), np.stack([s.x for s in states]),
                   np.stack([s.p for s in states]), system)

    @classmethod
    def free_line(cls, x0, v0, times, m=1.0):
        """Analytic sampling of ``x(t) = x0 + v0 t`` for one or more free particles."""
        times = np.asarray(times, dtype=float)
        x0 = np.atleast_2d(np.asarray(x0, dtype=float))
        v0 = np.atleast_2d(np.asarray(v0, dtype=float))
        x = x0[None] + times[:, None, None] * v0[None]
        p = np.broadcast_to(m * v0, x.shape).copy()
        return cls(times, x, p, MechSystem.free(x0.shape[0], x0.shape[1], m))


@dataclass(frozen=True)
class PhaseSpaceDensity:
    """Weighted particle samples of a one-particle density rho(x, p, t).

    ``density`` optionally evaluates rho0 at time ``t`` so that transport can be
    checked along characteristics.
    """

    x: np.ndarray
    p: np.ndarray
    weights: np.ndarray
    t: float = 0.0
    m: float = 1.0
    density: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        p = np.asarray(self.p, dtype=float).reshape(x.shape)
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (x.shape[0],) or np.any(w <= 0):
            raise ValueError("weights must be positive, one per sample")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "weights", w / w.sum())

    @classmethod
    def gaussian(cls, rng, n, x_mean=0.0, x_std=1.0, p_mean=0.0, p_std=1.0, t=0.0, m=1.0):
        x = rng.normal(x_mean, x_std, size=(n, 1))
        p = rng.normal(p_mean, p_std, size=(n, 1))

        def rho0(xq, pq):
            zx = (np.asarray(xq)[..., 0] - x_mean) / x_std
            zp = (np.asarray(pq)[..., 0] - p_mean) / p_std
            return np.exp(-0.5 * (zx**2 + zp**2)) / (2 * np.pi * x_std * p_std)

        return cls(x, p, np.ones(n), t, m, rho0)
