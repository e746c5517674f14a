"""
Static dark-state check of the T -> S conversion Hamiltonian.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .common import ConfigError


@dataclass(frozen=True)
class DarkStateSystem:
    g: float
    omega_c2: float

    def __post_init__(self):
        if self.g < 0 or self.omega_c2 < 0:
            raise ConfigError(f"dark_state: couplings must be non-negative, got g={self.g}, "
                              f"omega_c2={self.omega_c2}")
        if self.g == 0 and self.omega_c2 == 0:
            raise ConfigError("dark_state: g and omega_c2 cannot both be zero")

    @property
    def theta(self) -> float:
        return math.atan2(self.g, self.omega_c2)

    @property
    def scale(self) -> float:
        return math.hypot(self.g, self.omega_c2)

    def hamiltonian(self) -> np.ndarray:
        """
        Coupling matrix over (S|1>, E2|0>, T|0>) in units of hbar, divided by
        sqrt(g^2 + omega_c2^2).
        """
        g, w = self.g / self.scale, self.omega_c2 / self.scale
        return np.array([[0.0, g, 0.0],
                         [g, 0.0, w],
                         [0.0, w, 0.0]])

    def dark_state(self) -> np.ndarray:
        return np.array([math.cos(self.theta), 0.0, -math.sin(self.theta)])


def dark_state_check(system: DarkStateSystem) -> Tuple[float, float]:
    """Return (||H|D>||, theta); the residual is relative to the coupling scale."""
    residual = float(np.linalg.norm(system.hamiltonian() @ system.dark_state()))
    return residual, system.theta
