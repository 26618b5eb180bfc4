"""Local-hidden-variable bound by exhaustive deterministic enumeration.

Every local deterministic strategy assigns a value in {-1, +1} to each
of the 2n party/setting pairs; the LHV bound of a Bell expression is
the exact maximum over all 4^n such assignments.  For the stabilizer
family this is cross-checked against the closed form

    B_lhv = 2 - (n-1)(alpha-1)   for alpha in (alpha_threshold, 1/(n-1)],
    B_lhv = (n-1)(alpha+1)       for alpha > 1/(n-1),

which is stated only above the violation threshold alpha_threshold
(below it the quantum bound no longer exceeds the classical one and no
closed form is given; the enumerated value is still exact there).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bell import BellExpression
from .errors import BadArity, TooLarge

MAX_ENUM_PARTIES = 12
_CHUNK = 1 << 20


@dataclass(frozen=True)
class DeterministicStrategy:
    """Per-party (setting-0, setting-1) outcome values, each +-1."""

    assignments: tuple[tuple[int, int], ...]

    def value(self, party: int, setting: int) -> int:
        return self.assignments[party][setting]


def _strategy_from_index(n: int, k: int) -> DeterministicStrategy:
    # Entry order is party-major, setting-minor, first entry most
    # significant; bit 0 encodes -1 so index order is lexicographic
    # with -1 < +1.
    values = []
    for j in range(2 * n):
        bit = (k >> (2 * n - 1 - j)) & 1
        values.append(2 * bit - 1)
    assignments = tuple((values[2 * i], values[2 * i + 1]) for i in range(n))
    return DeterministicStrategy(assignments)


def lhv_bound_enumerated(expr: BellExpression) -> tuple[float, DeterministicStrategy]:
    """Exact LHV maximum and a witness strategy attaining it.

    Ties break to the lowest strategy index in lexicographic
    (-1 < +1, party-major) order.
    """
    n = expr.n
    if n > MAX_ENUM_PARTIES:
        raise TooLarge(f"enumeration capped at {MAX_ENUM_PARTIES} parties, got {n}")
    nbits = 2 * n
    total = 1 << nbits

    # Precompute, per term, the bit mask of involved (party, setting)
    # slots.  A strategy's term product is (-1)**(|I| + popcount(k & mask))
    # since bit 1 encodes +1.
    masks = []
    coeffs = []
    sizes = []
    for sel, coeff in expr.terms.items():
        mask = 0
        size = 0
        for i, s in enumerate(sel):
            if s is None:
                continue
            mask |= 1 << (nbits - 1 - (2 * i + s))
            size += 1
        masks.append(mask)
        coeffs.append(coeff)
        sizes.append(size)

    best_val = -np.inf
    best_k = 0
    for start in range(0, total, _CHUNK):
        ks = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
        vals = np.zeros(len(ks))
        for mask, coeff, size in zip(masks, coeffs, sizes):
            par = (np.bitwise_count(ks & np.uint64(mask)) + size) & 1
            vals += coeff * (1.0 - 2.0 * par.astype(float))
        idx = int(np.argmax(vals))
        if vals[idx] > best_val:
            best_val = float(vals[idx])
            best_k = start + idx
    return best_val, _strategy_from_index(n, best_k)


def alpha_violation_threshold(n: int) -> float:
    """Tilt value below which the family admits no quantum violation.

    For n parties this is where the quantum bound meets the classical
    one:  (2n^2 - 2n sqrt(n^2-2n+2) + n - 1) / (4n^2 - 5n + 1).
    """
    if n < 3:
        raise BadArity(f"threshold defined for n >= 3, got {n}")
    return (2 * n * n - 2 * n * np.sqrt(n * n - 2 * n + 2) + n - 1) / \
        (4 * n * n - 5 * n + 1)


def lhv_bound_formula(n: int, alpha: float) -> float | None:
    """Closed-form LHV bound; ``None`` below the violation threshold.

    The piecewise form is only stated for alpha above
    ``alpha_violation_threshold(n)``; callers wanting the exact value
    elsewhere should enumerate.
    """
    if n < 3:
        raise BadArity(f"closed form stated for n >= 3, got {n}")
    if alpha <= alpha_violation_threshold(n):
        return None
    if alpha <= 1.0 / (n - 1):
        return 2.0 - (n - 1) * (alpha - 1.0)
    return (n - 1) * (alpha + 1.0)
