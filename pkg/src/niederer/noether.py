"""Conserved charges of the invariance group and their transformation laws."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DegenerateFit
from .group import GroupElement, MoebiusMap, act_trajectory
from .phase_space import MechSystem, PhaseSpaceState, Trajectory


class InfinitesimalSL2R(NamedTuple):
    beta_inf: float = 0.0
    epsilon_inf: float = 0.0
    gamma_inf: float = 0.0


@dataclass(frozen=True)
class ChargeSet:
    H: float
    D: float
    A: float
    P: np.ndarray
    K: np.ndarray
    J: Optional[np.ndarray]

    def families(self):
        """Name -> array view of every charge present (J is absent for d=1)."""
        out = {"H": np.atleast_1d(self.H), "D": np.atleast_1d(self.D), "A": np.atleast_1d(self.A),
               "P": np.atleast_1d(self.P), "K": np.atleast_1d(self.K)}
        if self.J is not None:
            out["J"] = np.atleast_1d(self.J)
        return out


def infinitesimal_variation(par: InfinitesimalSL2R, t, x, xdot):
    """(delta t, delta x) for alpha = 1 + eps, delta = 1 - eps and small beta, gamma."""
    b, e, c = par
    dt = b + 2.0 * e * t - c * t * t
    dx = (e - c * t) * np.asarray(x, dtype=float) - dt * np.asarray(xdot, dtype=float)
    return dt, dx


def boundary_term(par: InfinitesimalSL2R, t, x, xdot, m):
    """F whose time derivative equals the first-order change of the free Lagrangian."""
    b, e, c = par
    x = np.asarray(x, dtype=float)
    xdot = np.asarray(xdot, dtype=float)
    return -(b + 2.0 * e * t - c * t * t) * 0.5 * m * np.sum(xdot * xdot) - c * 0.5 * m * np.sum(x * x)


def noether_charge(par: InfinitesimalSL2R, t, x, xdot, m):
    """m xdot . delta x - F, conserved along free motion."""
    _, dx = infinitesimal_variation(par, t, x, xdot)
    return m * np.sum(np.asarray(xdot, dtype=float) * dx) - boundary_term(par, t, x, xdot, m)


def sl2r_charges(s: PhaseSpaceState, system: Optional[MechSystem] = None):
    """(H, D, A); with a system the potential enters H and hence D and A."""
    m = s.m if system is None else system.m
    if system is None:
        H = float(np.sum(s.p * s.p) / (2.0 * m))
    else:
        H = system.hamiltonian(s.x, s.p)
    px = float(np.sum(s.p * s.x))
    D = px - 2.0 * s.t * H
    A = 0.5 * m * float(np.sum(s.x * s.x)) - s.t * px + s.t**2 * H
    return H, D, A


def _angular(x, p):
    d = x.shape[1]
    if d == 1:
        return None
    if d == 2:
        return np.array(np.sum(x[:, 0] * p[:, 1] - x[:, 1] * p[:, 0]))
    return np.sum(np.cross(x, p), axis=0)


def galilei_charges(s: PhaseSpaceState):
    """(P, K, J) with K = t P - m sum x and J = sum x ^ p."""
    P = np.sum(s.p, axis=0)
    K = s.t * P - s.m * np.sum(s.x, axis=0)
    return P, K, _angular(s.x, s.p)


def charges(s: PhaseSpaceState, system: Optional[MechSystem] = None) -> ChargeSet:
    H, D, A = sl2r_charges(s, system)
    P, K, J = galilei_charges(s)
    return ChargeSet(H, D, A, P, K, J)


def charge_history(tr: Trajectory):
    return [charges(tr.state(k), tr.system) for k in range(len(tr))]


def charge_drift(tr: Trajectory):
    """max_t |Q(t) - Q(0)| / (1 + |Q(0)|) per charge family."""
    hist = charge_history(tr)
    q0 = hist[0].families()
    drift = {name: 0.0 for name in q0}
    for cs in hist[1:]:
        for name, val in cs.families().items():
            rel = np.max(np.abs(val - q0[name]) / (1.0 + np.abs(q0[name])))
            drift[name] = max(drift[name], float(rel))
    return drift


# -- SL(2,R) transformation behaviour ----------------------------------------

def _transformed_sl2r(sigma: MoebiusMap, s: PhaseSpaceState, t_probe: float):
    """Charges of the sigma image of the free solution through ``s``, sampled at t_probe."""
    x = s.x + s.p / s.m * (t_probe - s.t)
    tr = Trajectory(np.array([t_probe]), x[None], s.p[None], MechSystem.free(s.N, s.d, s.m))
    moved = act_trajectory(GroupElement.from_moebius(sigma, s.d), tr)
    return np.array(sl2r_charges(moved.state(0)))


def _probe_time(sigma: MoebiusMap, margin=0.1):
    for t in (0.0, 1.0, -1.0, 2.0, -2.0, 0.5):
        if abs(sigma.scale(t)) > margin:
            return t
    return 3.0


REFERENCE_STATES = (
    PhaseSpaceState.single(1.0, 0.0),
    PhaseSpaceState.single(0.0, 1.0),
    PhaseSpaceState.single(1.0, 1.0),
)


def adjoint_matrix(sigma: MoebiusMap, references=REFERENCE_STATES, cond_max=1e8):
    """3x3 matrix M with (H, D, A)[sigma solution] = M (H, D, A)[solution].

    Fitted from three free reference solutions; raises DegenerateFit when their
    charge vectors are (nearly) linearly dependent.
    """
    C = np.array([sl2r_charges(r) for r in references]).T
    if np.linalg.cond(C) > cond_max:
        raise DegenerateFit("reference charge vectors are linearly dependent")
    t_probe = _probe_time(sigma)
    Cp = np.array([_transformed_sl2r(sigma, r, t_probe) for r in references]).T
    return np.linalg.solve(C.T, Cp.T).T


def adjoint_residual(sigma: MoebiusMap, M, states):
    """Max deviation of M (H,D,A) from the charges of transformed held-out solutions."""
    t_probe = _probe_time(sigma)
    worst = 0.0
    for s in states:
        q = np.array(sl2r_charges(s))
        qp = _transformed_sl2r(sigma, s, t_probe)
        worst = max(worst, float(np.max(np.abs(M @ q - qp)) / (1.0 + np.max(np.abs(qp)))))
    return worst


def doublet_transform(sigma: MoebiusMap, K, P):
    """(K'; P') = (alpha beta; gamma delta)(K; P)."""
    K = np.asarray(K, dtype=float)
    P = np.asarray(P, dtype=float)
    return sigma.alpha * K + sigma.beta * P, sigma.gamma * K + sigma.delta * P


def doublet_residual(sigma: MoebiusMap, s: PhaseSpaceState):
    """Compare doublet_transform against K, P of the transformed free solution."""
    t_probe = _probe_time(sigma)
    x = s.x + s.p / s.m * (t_probe - s.t)
    tr = Trajectory(np.array([t_probe]), x[None], s.p[None], MechSystem.free(s.N, s.d, s.m))
    moved = act_trajectory(GroupElement.from_moebius(sigma, s.d), tr).state(0)
    P0, K0, _ = galilei_charges(s)
    P1, K1, _ = galilei_charges(moved)
    Kp, Pp = doublet_transform(sigma, K0, P0)
    return float(max(np.max(np.abs(Kp - K1)), np.max(np.abs(Pp - P1))))
