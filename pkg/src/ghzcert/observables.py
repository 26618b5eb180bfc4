"""Binary-outcome qubit observables restricted to the X-Z plane.

Two dichotomic measurements per party reduce, block by block, to qubit
observables in a common plane, so every measurement here is
``cos(theta) sigma_z + sin(theta) sigma_x`` for a per-party,
per-setting angle theta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadArity, BadIndex
from .linalg import IDENTITY_2, NORM_TOL, PAULI_X, PAULI_Z


def plane_observable(theta: float) -> np.ndarray:
    """The 2x2 involution cos(theta) sigma_z + sin(theta) sigma_x."""
    return np.cos(theta) * PAULI_Z + np.sin(theta) * PAULI_X


@dataclass(frozen=True)
class ObservableSet:
    """Measurement angles for n parties, two settings each.

    ``angles[i] = (theta_i0, theta_i1)`` realizes party i's observables
    as ``cos(theta) sigma_z + sin(theta) sigma_x``; each squares to the
    identity by construction.
    """

    angles: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.angles) < 2:
            raise BadArity(f"need at least 2 parties, got {len(self.angles)}")
        object.__setattr__(
            self, "angles",
            tuple((float(a), float(b)) for a, b in self.angles),
        )

    @property
    def n(self) -> int:
        return len(self.angles)

    def matrix(self, party: int, setting: int) -> np.ndarray:
        """Dense 2x2 observable for 0-based party and setting indices."""
        if not 0 <= party < self.n:
            raise BadIndex(f"party {party} out of range for n={self.n}")
        if setting not in (0, 1):
            raise BadIndex(f"setting must be 0 or 1, got {setting}")
        return plane_observable(self.angles[party][setting])

    def eigenbasis(self, party: int, setting: int) -> np.ndarray:
        """Columns = (+1, -1) eigenvectors of the observable.

        Column a is the eigenvector with eigenvalue (-1)**a, matching
        the outcome-bit convention.
        """
        theta = self.angles[party][setting]
        c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
        return np.array([[c, -s], [s, c]], dtype=complex)

    def check_involutions(self, tol: float = NORM_TOL) -> None:
        for i in range(self.n):
            for s in (0, 1):
                m = self.matrix(i, s)
                dev = np.max(np.abs(m @ m - IDENTITY_2))
                if dev > tol:
                    raise BadIndex(f"observable ({i},{s}) is not an involution (dev={dev:.2e})")
