"""Stabilizer-type multipartite Bell expressions and their evaluation.

The family is built from the GHZ stabilizer generators by substituting
party 1's generators X -> A_10 + A_11 and Z -> alpha*A_10 - A_11, and
every other party's X -> A_i0, Z -> A_i1.  Summing the resulting terms
gives, for n parties and tilt parameter alpha,

    (A_10 + A_11) A_20 ... A_n0  +  sum_{i>=2} (alpha A_10 - A_11) A_i1,

a sum of one full n-party correlator pair and n-1 two-party correlator
pairs: 2 + 2(n-1) coefficients in total.  At n=2 this is the tilted
CHSH expression up to local relabelings.

A term is keyed by a per-party setting selector: 0 or 1 picks party i's
setting inside the correlator, ``None`` means the party is absent
(identity factor).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .behavior import Behavior, parity_signs, party_bit
from .errors import BadArity, BadSelector, DimensionMismatch, NoSignallingViolation
from .linalg import IDENTITY_2, kron
from .observables import ObservableSet

Selector = tuple  # per-party entries in {0, 1, None}

ABSENT_CHAR = "⊥"  # printed form of an absent party

MARGINAL_TOL = 1e-9  # absent-party setting independence check


def selector_to_string(sel: Selector) -> str:
    return "".join(ABSENT_CHAR if e is None else str(e) for e in sel)


def selector_from_string(s: str) -> Selector:
    out = []
    for ch in s:
        if ch == ABSENT_CHAR:
            out.append(None)
        elif ch in "01":
            out.append(int(ch))
        else:
            raise BadSelector(f"invalid selector character {ch!r}")
    return tuple(out)


@dataclass(frozen=True)
class BellExpression:
    """Sparse map from setting selectors to real coefficients."""

    n: int
    alpha: float
    terms: dict

    def __post_init__(self):
        for sel in self.terms:
            if len(sel) != self.n:
                raise BadSelector(
                    f"selector {selector_to_string(sel)} has length {len(sel)}, expected {self.n}")

    def to_json(self) -> str:
        """Canonical sorted JSON form used for golden tests."""
        payload = {
            "n": self.n,
            "alpha": self.alpha,
            "terms": {selector_to_string(sel): coeff
                      for sel, coeff in sorted(self.terms.items(),
                                               key=lambda kv: selector_to_string(kv[0]))},
        }
        return json.dumps(payload, ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "BellExpression":
        payload = json.loads(text)
        terms = {selector_from_string(k): float(v) for k, v in payload["terms"].items()}
        return cls(n=int(payload["n"]), alpha=float(payload["alpha"]), terms=terms)


def build_bell(n: int, alpha: float) -> BellExpression:
    """Construct the n-party stabilizer-type expression for a given alpha."""
    if n < 2:
        raise BadArity(f"need at least 2 parties, got {n}")
    if not np.isfinite(alpha):
        raise BadArity(f"alpha must be finite, got {alpha}")
    terms: dict = {}
    full0 = tuple([0] * n)
    full1 = tuple([1] + [0] * (n - 1))
    terms[full0] = 1.0
    terms[full1] = 1.0
    for i in range(1, n):
        base = [None] * n
        base[i] = 1
        sel_a = tuple([0] + base[1:])
        sel_b = tuple([1] + base[1:])
        terms[sel_a] = float(alpha)
        terms[sel_b] = -1.0
    return BellExpression(n=n, alpha=float(alpha), terms=terms)


def to_operator(expr: BellExpression, obs: ObservableSet) -> np.ndarray:
    """Materialize the Bell operator for concrete X-Z plane observables."""
    if obs.n != expr.n:
        raise DimensionMismatch(f"expression has n={expr.n} but observables n={obs.n}")
    obs.check_involutions()
    dim = 2 ** expr.n
    out = np.zeros((dim, dim), dtype=complex)
    for sel, coeff in expr.terms.items():
        factors = [IDENTITY_2 if s is None else obs.matrix(i, s)
                   for i, s in enumerate(sel)]
        out += coeff * kron(*factors)
    return out


def correlator(b: Behavior, sel: Selector, tol: float = MARGINAL_TOL) -> float:
    """Correlator <prod_i A_{i, sel_i}> of the involved parties.

    Absent parties are marginalized.  Well-definedness needs the
    marginal to be independent of the absent parties' settings, which
    is verified here across every absent-setting assignment before
    returning the value at absent settings fixed to 0.
    """
    n = b.n
    if len(sel) != n:
        raise BadSelector(f"selector length {len(sel)} != n={n}")
    involved = [i for i, s in enumerate(sel) if s is not None]
    if not involved:
        return 1.0
    sign_mask = 0
    base_x = 0
    for i in involved:
        sign_mask |= party_bit(n, i)
        if sel[i] == 1:
            base_x |= party_bit(n, i)
    signs = parity_signs(n, sign_mask)
    absent = [i for i, s in enumerate(sel) if s is None]
    values = []
    for z in range(2 ** len(absent)):
        x = base_x
        for j, i in enumerate(absent):
            if (z >> j) & 1:
                x |= party_bit(n, i)
        values.append(float(signs @ b.table[x]))
    if max(values) - min(values) > tol:
        raise NoSignallingViolation(
            f"correlator {selector_to_string(sel)} varies by "
            f"{max(values) - min(values):.2e} across absent settings")
    return values[0]


def eval_on_behavior(expr: BellExpression, b: Behavior) -> float:
    """Bell value sum_s c_s E_s of a behavior under the expression."""
    if b.n != expr.n:
        raise DimensionMismatch(f"expression has n={expr.n} but behavior n={b.n}")
    return sum(coeff * correlator(b, sel) for sel, coeff in expr.terms.items())
