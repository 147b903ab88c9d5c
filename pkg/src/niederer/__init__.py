"""Numerical verification of the Schroedinger invariance group SL(2,R) x| static Galilei."""
from .errors import NiedererError
from .group import GalileiElement, GroupElement, MoebiusMap, act, compose, inverse
from .phase_space import MechSystem, PhaseSpaceState, Trajectory
from .report import Report, SuiteConfig, run_suite

__all__ = [
    "NiedererError", "GalileiElement", "GroupElement", "MoebiusMap", "act", "compose", "inverse",
    "MechSystem", "PhaseSpaceState", "Trajectory", "Report", "SuiteConfig", "run_suite",
]
