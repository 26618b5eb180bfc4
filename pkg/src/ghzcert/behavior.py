"""Conditional probability tables p(a_1...a_N | x_1...x_N).

A behavior stores the full table for an (n, 2 settings, 2 outcomes)
scenario as a ``(2**n, 2**n)`` array indexed ``table[x, a]``, where both
indices pack bits party-major (party 1 is the most significant bit).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoSignallingViolation

PROB_TOL = 1e-10       # normalization / nonnegativity slack
NO_SIGNALLING_TOL = 1e-9


def parity_signs(n: int, mask: int) -> np.ndarray:
    """(-1)**(popcount(a & mask)) for every outcome index a."""
    bits = np.bitwise_count(np.arange(2 ** n, dtype=np.uint64) & np.uint64(mask))
    return 1.0 - 2.0 * (bits & 1).astype(float)


def party_bit(n: int, party: int) -> int:
    """Bit value of 0-based ``party`` in the party-major packing."""
    return 1 << (n - 1 - party)


@dataclass(frozen=True)
class Behavior:
    """Validated no-signalling behavior for n parties.

    Rows are conditional distributions over outcome tuples; single-party
    marginals must be independent of the other parties' settings.
    """

    n: int
    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        d = 2 ** self.n
        if table.shape != (d, d):
            raise DimensionMismatch(
                f"behavior table for n={self.n} must be {d}x{d}, got {table.shape}")
        if np.min(table) < -PROB_TOL or np.max(table) > 1.0 + PROB_TOL:
            raise DimensionMismatch("behavior entries outside [0, 1]")
        row_sums = table.sum(axis=1)
        if np.max(np.abs(row_sums - 1.0)) > PROB_TOL * d:
            raise DimensionMismatch("behavior rows do not sum to 1")
        self._check_no_signalling(table)
        table = table.copy()
        table.flags.writeable = False
        object.__setattr__(self, "table", table)

    def _check_no_signalling(self, table: np.ndarray) -> None:
        # For each party, p(a_i | x) must not depend on x_{j != i}.
        for i in range(self.n):
            marg = self.marginal_table(i, table)
            xbit = party_bit(self.n, i)
            for xi in (0, 1):
                rows = marg[[x for x in range(2 ** self.n) if ((x & xbit) != 0) == bool(xi)]]
                dev = np.max(np.abs(rows - rows[0]))
                if dev > NO_SIGNALLING_TOL:
                    raise NoSignallingViolation(
                        f"party {i} marginal varies by {dev:.2e} with remote settings")

    def marginal_table(self, party: int, table: np.ndarray | None = None) -> np.ndarray:
        """p(a_party | x) for all joint settings: shape (2**n, 2)."""
        if table is None:
            table = self.table
        abit = party_bit(self.n, party)
        a = np.arange(2 ** self.n)
        out = np.empty((2 ** self.n, 2))
        out[:, 1] = table[:, (a & abit) != 0].sum(axis=1)
        out[:, 0] = table[:, (a & abit) == 0].sum(axis=1)
        return out

    def conditional(self, x_index: int) -> np.ndarray:
        """Outcome distribution at packed setting index ``x_index``."""
        return self.table[x_index]


def uniform_behavior(n: int) -> Behavior:
    d = 2 ** n
    return Behavior(n, np.full((d, d), 1.0 / d))


def mix(b1: Behavior, b2: Behavior, weight: float) -> Behavior:
    """Convex mixture weight*b1 + (1-weight)*b2."""
    if b1.n != b2.n:
        raise DimensionMismatch("behaviors have different party counts")
    return Behavior(b1.n, weight * b1.table + (1.0 - weight) * b2.table)
