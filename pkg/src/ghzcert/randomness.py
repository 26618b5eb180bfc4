"""Born-rule behaviors, guessing probabilities, and min-entropies.

Randomness is quantified by the min-entropy -log2 G, where G is the
largest conditional outcome probability at fixed settings (global) or
the largest single-party marginal probability (local).  At the optimal
GHZ realization with tilt alpha the global guessing probability at the
all-zeros setting tuple has the closed form

    G = (1 + 1/sqrt(1 + (n-1)^2 alpha^2)) / 2^n,

which tends to the optimal 2^-n as alpha grows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .behavior import Behavior, party_bit
from .errors import BadArity, BadIndex, BadSelector, DimensionMismatch
from .observables import ObservableSet


def _pure_conditional(psi: np.ndarray, obs: ObservableSet, x_index: int) -> np.ndarray:
    n = obs.n
    tensor = psi.reshape((2,) * n)
    for party in range(n):
        setting = (x_index >> (n - 1 - party)) & 1
        basis = obs.eigenbasis(party, setting)
        tensor = np.moveaxis(
            np.tensordot(basis.conj().T, tensor, axes=([1], [party])), 0, party)
    return np.abs(tensor.reshape(-1)) ** 2


def _mixed_conditional(rho: np.ndarray, obs: ObservableSet, x_index: int) -> np.ndarray:
    n = obs.n
    from .linalg import kron
    factors = []
    for party in range(n):
        setting = (x_index >> (n - 1 - party)) & 1
        factors.append(obs.eigenbasis(party, setting).conj().T)
    u = kron(*factors)
    return np.real(np.einsum("ij,jk,ik->i", u, rho, u.conj()))


def born_behavior(state: np.ndarray, obs: ObservableSet) -> Behavior:
    """Behavior table of a pure state or density matrix under projective
    X-Z plane measurements; outcome bit a has eigenvalue (-1)**a."""
    state = np.asarray(state, dtype=complex)
    n = obs.n
    d = 2 ** n
    if state.ndim == 1:
        if state.shape != (d,):
            raise DimensionMismatch(f"state has dim {state.shape}, expected ({d},)")
        rows = [_pure_conditional(state, obs, x) for x in range(d)]
    elif state.ndim == 2:
        if state.shape != (d, d):
            raise DimensionMismatch(f"density matrix {state.shape}, expected ({d},{d})")
        rows = [_mixed_conditional(state, obs, x) for x in range(d)]
    else:
        raise DimensionMismatch("state must be a vector or a square matrix")
    table = np.clip(np.array(rows), 0.0, None)
    return Behavior(n, table)


def _selector_to_x_index(n: int, x) -> int:
    if len(x) != n:
        raise BadSelector(f"selector length {len(x)} != n={n}")
    idx = 0
    for i, s in enumerate(x):
        if s is None:
            raise BadSelector("guessing probability needs every party's setting")
        if s not in (0, 1):
            raise BadSelector(f"setting {s!r} invalid")
        if s:
            idx |= party_bit(n, i)
    return idx


def guessing_probability(b: Behavior, x) -> float:
    """Largest outcome probability at the full setting tuple ``x``."""
    return float(b.table[_selector_to_x_index(b.n, x)].max())


def min_entropy_global(b: Behavior) -> tuple[float, tuple]:
    """Best min-entropy over all setting tuples, with its selector.

    Ties break to the lexicographically first selector.
    """
    guesses = b.table.max(axis=1)
    best_x = int(np.argmin(guesses))
    bits = -float(np.log2(guesses[best_x]))
    selector = tuple((best_x >> (b.n - 1 - i)) & 1 for i in range(b.n))
    return bits, selector


def min_entropy_local(b: Behavior, party: int, setting: int) -> float:
    """Min-entropy of one party's marginal at one of its settings."""
    if not 0 <= party < b.n:
        raise BadIndex(f"party {party} out of range for n={b.n}")
    if setting not in (0, 1):
        raise BadIndex(f"setting must be 0 or 1, got {setting}")
    x_index = party_bit(b.n, party) if setting else 0
    marg = b.marginal_table(party)[x_index]
    return -float(np.log2(marg.max()))


def optimal_realization_guessing_probability(n: int, alpha: float) -> float:
    """Closed-form G at the all-zeros settings of the optimal realization."""
    if n < 2:
        raise BadArity(f"need at least 2 parties, got {n}")
    k = float(n - 1)
    return (1.0 + 1.0 / np.sqrt(1.0 + k * k * alpha * alpha)) / 2 ** n


@dataclass(frozen=True)
class CertReport:
    """Certification summary for one (n, alpha) configuration."""

    bell_value: float
    guessing_probability_global: float
    min_entropy_global: float
    min_entropy_local: tuple  # per party: (bits at setting 0, bits at setting 1)
    settings_used: tuple

    def __post_init__(self):
        expected = -np.log2(self.guessing_probability_global)
        if abs(expected - self.min_entropy_global) > 1e-12:
            raise DimensionMismatch("min-entropy inconsistent with guessing probability")

    def to_json(self) -> str:
        return json.dumps({
            "bell_value": self.bell_value,
            "guessing_probability_global": self.guessing_probability_global,
            "min_entropy_global": self.min_entropy_global,
            "min_entropy_local": [list(pair) for pair in self.min_entropy_local],
            "settings_used": list(self.settings_used),
        }, sort_keys=True)


def certify(n: int, alpha: float) -> CertReport:
    """Full certification report at the optimal GHZ realization."""
    from .bell import build_bell, eval_on_behavior
    from .linalg import ghz_state
    from .quantum import optimal_angles

    obs = optimal_angles(n, alpha)
    b = born_behavior(ghz_state(n), obs)
    expr = build_bell(n, alpha)
    bell_value = eval_on_behavior(expr, b)
    bits, selector = min_entropy_global(b)
    g = guessing_probability(b, selector)
    local = tuple((min_entropy_local(b, i, 0), min_entropy_local(b, i, 1))
                  for i in range(n))
    return CertReport(
        bell_value=bell_value,
        guessing_probability_global=g,
        min_entropy_global=bits,
        min_entropy_local=local,
        settings_used=selector,
    )
