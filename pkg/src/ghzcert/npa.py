"""Moment-matrix relaxations for device-independent guessing bounds.

Upper-bounds the eavesdropper's guessing probability at an observed
Bell value by the standard moment-hierarchy outer approximation of the
quantum set.  The adversary is modeled by convex decomposition: one
moment-matrix block per guess value e, each block an unnormalized
quantum behavior whose identity moment is the branch weight, with

    sum_e weight_e = 1,     sum_e Bell_e = observed value,
    objective = sum_e  p_e(outcome = e at the target settings).

Letters are the outcome-0 projectors, one per party and setting;
words reduce under projector idempotence and cross-party commutation.
Moments are shared between a word and its reversal (the moment matrix
of an optimal strategy can be taken real symmetric).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import product

import numpy as np

from .bell import BellExpression, build_bell
from .errors import BadRange, BadSelector, InfeasibleValue, MaxIterations, TooLarge, Unsupported
from .sdp import SdpBlock, SdpProblem, SdpSolution, solve as sdp_solve

MAX_PARTIES_LEVEL2 = 4
MAX_PARTIES_LEVEL3 = 3

Letter = tuple  # (party, setting)
Word = tuple    # sequence of letters, canonical form


@dataclass(frozen=True)
class Scenario:
    """n parties, two settings per party, two outcomes per setting."""

    parties: int
    settings: int = 2
    outcomes: int = 2

    def __post_init__(self):
        if self.parties < 2:
            raise BadRange(f"need at least 2 parties, got {self.parties}")
        if self.settings != 2 or self.outcomes != 2:
            raise Unsupported("only the (n, 2, 2) scenario is implemented")

    @property
    def letters(self) -> tuple:
        return tuple((i, s) for i in range(self.parties) for s in range(2))


def canonical_word(seq) -> Word:
    """Canonical form: different-party letters commute (stable sort by
    party), and adjacent repeats of one projector collapse."""
    letters = sorted(seq, key=lambda letter: letter[0])
    out = []
    for letter in letters:
        if out and out[-1] == letter:
            continue
        out.append(letter)
    return tuple(out)


def word_adjoint(word: Word) -> Word:
    return canonical_word(reversed(word))


def moment_key(word: Word) -> Word:
    """Words and their adjoints share one real moment variable."""
    return min(word, word_adjoint(word))


def build_words(scenario: Scenario, level: int) -> tuple:
    """Canonical operator words up to the given hierarchy level.

    Sorted by (length, letters) with the identity first.  Size guards:
    level 2 needs n <= 4, level 3 needs n <= 3 and is flagged
    experimental for the bundled solver.
    """
    if level not in (1, 2, 3):
        raise BadRange(f"level must be 1, 2 or 3, got {level}")
    n = scenario.parties
    words = {()}
    for length in range(1, level + 1):
        for combo in product(scenario.letters, repeat=length):
            words.add(canonical_word(combo))
    out = tuple(sorted(words, key=lambda w: (len(w), w)))
    if level >= 2 and n > MAX_PARTIES_LEVEL2:
        raise TooLarge(f"level {level} at n={n} would need {len(out)} basis words")
    if level == 3:
        if n > MAX_PARTIES_LEVEL3:
            raise TooLarge(f"level 3 at n={n} would need {len(out)} basis words")
        warnings.warn("level 3 is experimental with the bundled solver",
                      stacklevel=2)
    return out


@dataclass(frozen=True)
class MomentStructure:
    """Index layout of one moment matrix over a word basis."""

    words: tuple
    var_keys: tuple          # moment key per variable index
    entry_vars: np.ndarray   # (dim, dim) variable index per matrix entry

    @property
    def dim(self) -> int:
        return len(self.words)

    @property
    def num_vars(self) -> int:
        return len(self.var_keys)

    def var_index(self, word: Word) -> int:
        key = moment_key(canonical_word(word))
        try:
            return self._lookup[key]
        except KeyError:
            raise Unsupported(
                f"moment <{key}> does not appear in the level's moment matrix; "
                "increase the hierarchy level") from None

    def __post_init__(self):
        object.__setattr__(self, "_lookup",
                           {key: i for i, key in enumerate(self.var_keys)})


def moment_structure(words: tuple) -> MomentStructure:
    dim = len(words)
    lookup: dict = {}
    keys: list = []
    entry_vars = np.empty((dim, dim), dtype=np.intp)
    for i, u in enumerate(words):
        for j, v in enumerate(words):
            key = moment_key(canonical_word(word_adjoint(u) + v))
            idx = lookup.get(key)
            if idx is None:
                idx = len(keys)
                lookup[key] = idx
                keys.append(key)
            entry_vars[i, j] = idx
    return MomentStructure(words=words, var_keys=tuple(keys), entry_vars=entry_vars)


def projector_word_vector(structure: MomentStructure, letters) -> np.ndarray:
    """Coefficient vector of <prod of projector letters> (distinct parties)."""
    vec = np.zeros(structure.num_vars)
    vec[structure.var_index(tuple(letters))] = 1.0
    return vec


def correlator_vector(structure: MomentStructure, n: int, sel) -> np.ndarray:
    """<prod_{i in I} (2 P_{i, s_i} - 1)> as a moment-variable vector."""
    involved = [(i, s) for i, s in enumerate(sel) if s is not None]
    vec = np.zeros(structure.num_vars)
    k = len(involved)
    for subset_mask in range(2 ** k):
        letters = [involved[j] for j in range(k) if (subset_mask >> j) & 1]
        size = len(letters)
        coeff = (2.0 ** size) * ((-1.0) ** (k - size))
        vec[structure.var_index(tuple(letters))] += coeff
    return vec


def outcome_probability_vector(structure: MomentStructure, x, a) -> np.ndarray:
    """<prod_i Pi_{a_i | x_i}> with Pi_0 = P and Pi_1 = 1 - P."""
    if len(x) != len(a):
        raise BadSelector("setting and outcome tuples differ in length")
    zeros = [(i, x[i]) for i in range(len(x)) if a[i] == 0]
    ones = [(i, x[i]) for i in range(len(x)) if a[i] == 1]
    vec = np.zeros(structure.num_vars)
    for subset_mask in range(2 ** len(ones)):
        chosen = [ones[j] for j in range(len(ones)) if (subset_mask >> j) & 1]
        letters = sorted(zeros + chosen)
        vec[structure.var_index(tuple(letters))] += (-1.0) ** len(chosen)
    return vec


def bell_vector(structure: MomentStructure, expr: BellExpression) -> np.ndarray:
    vec = np.zeros(structure.num_vars)
    for sel, coeff in expr.terms.items():
        vec += coeff * correlator_vector(structure, expr.n, sel)
    return vec


def _moment_block(structure: MomentStructure, var_offset: int) -> SdpBlock:
    dim = structure.dim
    rows, cols = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    return SdpBlock(
        dim=dim,
        const=np.zeros((dim, dim)),
        rows=rows.reshape(-1),
        cols=cols.reshape(-1),
        vars=structure.entry_vars.reshape(-1) + var_offset,
        coeffs=np.ones(dim * dim),
    )


@dataclass(frozen=True)
class MomentProblem:
    """A guessing (or max-Bell) relaxation ready for an SDP backend."""

    scenario: Scenario
    level: int
    structure: MomentStructure
    branches: tuple           # guess labels, one per PSD block
    sdp: SdpProblem
    bell_value: float | None
    target: tuple | None


def build_max_bell_sdp(expr: BellExpression, level: int) -> MomentProblem:
    """Relaxation of the maximal Bell value at the given level."""
    scenario = Scenario(expr.n)
    structure = moment_structure(build_words(scenario, level))
    ident = structure.var_index(())
    eq = np.zeros((1, structure.num_vars))
    eq[0, ident] = 1.0
    problem = SdpProblem(
        num_vars=structure.num_vars,
        objective=bell_vector(structure, expr),
        eq_matrix=eq,
        eq_rhs=np.array([1.0]),
        blocks=(_moment_block(structure, 0),),
    )
    return MomentProblem(scenario=scenario, level=level, structure=structure,
                         branches=("max",), sdp=problem, bell_value=None, target=None)


def max_bell_value(expr: BellExpression, level: int, backend=None, **options) -> float:
    """Hierarchy upper bound on the Bell value (cached per call site)."""
    solution = sdp_solve(build_max_bell_sdp(expr, level).sdp, backend=backend, **options)
    return solution.objective


def build_guessing_sdp(expr: BellExpression, bell_value: float, target,
                       level: int, local: bool = False, equality: bool = True,
                       npa_cap: float | None = None) -> MomentProblem:
    """Convex-decomposition guessing-probability relaxation.

    ``target`` is a full setting selector (global randomness, one
    branch per outcome tuple) or, with ``local=True``, a
    ``(party, setting)`` pair (local randomness, two branches).  The
    Bell constraint is an equality by default; ``equality=False`` uses
    >= via a slack variable.

    ``npa_cap`` short-circuits the feasibility pre-check with a known
    hierarchy upper bound; when ``None`` it is computed here.
    """
    n = expr.n
    from .quantum import quantum_bound
    if bell_value > quantum_bound(n, expr.alpha) + 1e-9:
        raise InfeasibleValue(
            f"Bell value {bell_value} exceeds the quantum bound")
    if npa_cap is None:
        npa_cap = max_bell_value(expr, level)
    if bell_value > npa_cap + 1e-6:
        raise InfeasibleValue(
            f"Bell value {bell_value} exceeds the level-{level} relaxation "
            f"maximum {npa_cap:.9f}")

    scenario = Scenario(n)
    structure = moment_structure(build_words(scenario, level))
    nv = structure.num_vars
    ident = structure.var_index(())

    if local:
        party, setting = target
        if not (0 <= party < n and setting in (0, 1)):
            raise BadSelector(f"local target {target!r} invalid for n={n}")
        guesses = ((0,), (1,))
    else:
        if len(target) != n or any(t not in (0, 1) for t in target):
            raise BadSelector(f"target selector {target!r} invalid for n={n}")
        guesses = tuple(product((0, 1), repeat=n))

    branches = len(guesses)
    total_vars = branches * nv + (0 if equality else 1)
    objective = np.zeros(total_vars)
    blocks = []
    bellv = bell_vector(structure, expr)
    norm_row = np.zeros(total_vars)
    bell_row = np.zeros(total_vars)
    for k, guess in enumerate(guesses):
        off = k * nv
        blocks.append(_moment_block(structure, off))
        norm_row[off + ident] = 1.0
        bell_row[off: off + nv] = bellv
        if local:
            letter = (party, setting)
            vec = np.zeros(nv)
            if guess[0] == 0:
                vec[structure.var_index((letter,))] = 1.0
            else:
                vec[structure.var_index(())] = 1.0
                vec[structure.var_index((letter,))] = -1.0
        else:
            vec = outcome_probability_vector(structure, tuple(target), guess)
        objective[off: off + nv] = vec
    if not equality:
        # Slack in a 1x1 PSD block turns >= into equality.
        slack = total_vars - 1
        bell_row[slack] = -1.0
        blocks.append(SdpBlock(
            dim=1, const=np.zeros((1, 1)),
            rows=np.array([0], dtype=np.intp), cols=np.array([0], dtype=np.intp),
            vars=np.array([slack], dtype=np.intp), coeffs=np.array([1.0]),
        ))
    eq = np.vstack([norm_row, bell_row])
    rhs = np.array([1.0, float(bell_value)])
    problem = SdpProblem(
        num_vars=total_vars, objective=objective,
        eq_matrix=eq, eq_rhs=rhs, blocks=tuple(blocks),
    )
    return MomentProblem(scenario=scenario, level=level, structure=structure,
                         branches=guesses, sdp=problem,
                         bell_value=float(bell_value), target=tuple(target))


def solve(problem: MomentProblem, backend=None, **options) -> SdpSolution:
    """Solve a moment problem with the configured SDP backend."""
    return sdp_solve(problem.sdp, backend=backend, **options)


def robustness_curve(n: int, alpha: float, level: int, bell_values,
                     target=None, equality: bool = True, backend=None,
                     **options) -> list[tuple]:
    """Guessing bound and min-entropy across a grid of Bell values.

    Returns rows ``(bell_value, g_upper, entropy_lower, level,
    solver_residual)``.  Grid points solve independently; a point that
    exhausts the iteration budget contributes its best iterate and its
    residual tells the consumer how far it got.
    """
    expr = build_bell(n, alpha)
    if target is None:
        target = tuple([0] * n)
    npa_cap = max_bell_value(expr, level, backend=backend, **options)
    rows = []
    for bell in bell_values:
        problem = build_guessing_sdp(expr, float(bell), target, level,
                                     equality=equality, npa_cap=npa_cap)
        try:
            sol = solve(problem, backend=backend, **options)
        except MaxIterations as exc:
            sol = exc.solution
        g = min(max(sol.objective, 0.0), 1.0)
        entropy = -float(np.log2(g)) if g > 0 else float("inf")
        rows.append((float(bell), g, entropy, level, sol.primal_residual))
    return rows
