"""Eavesdropper Holevo-quantity bound for the alpha = 1 family.

Pipeline, for three parties unless stated otherwise:

1. classify the GHZ basis vectors into the two classes left invariant
   by the Pauli products occurring in the Bell operator;
2. build the full and reduced correlation matrices of a state in the
   Pauli basis;
3. maximize the Bell value over X-Z plane measurement vectors
   (alternating rank-one maximization plus singular values), giving
   2*sqrt(t0^2 + (t1+t2)^2);
4. eigendecompose Eve's conditional states for the Bell-saturating
   two-state mixtures;
5. invert the Bell value back to the mixing weight and bound the
   Holevo quantity chi <= h(1/2 + sqrt(B^2/4 - (n-1)^2)/2).

The squared Bell value inside the radical is forced by consistency
with the inversion of B = 2*sqrt((2 lambda - 1)^2 + 4); only then does
lambda = (1 + sqrt(B^2/4 - 4))/2 round-trip.  Similarly the
conditional-state eigenvalues carry cos^2(2 theta'), the form an
explicit eigensolve of the conditional matrix reproduces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadRange, DimensionMismatch, OutOfRange, TooLarge, Unsupported
from .linalg import IDENTITY_2, PAULI_X, PAULI_Y, PAULI_Z, kron

PAULIS = {"I": IDENTITY_2, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}

# Pauli products appearing when the three-party Bell operator is
# expanded over X-Z plane observables.
BELL_RELATED_OPERATORS = ("XXX", "XXZ", "XZX", "XZZ", "ZXI", "ZZI", "ZIX", "ZIZ")

MAX_TENSOR_PARTIES = 6


def pauli_product(word: str) -> np.ndarray:
    return kron(*[PAULIS[ch] for ch in word])


def ghz_basis_vector(labels: tuple) -> np.ndarray:
    """(|0 j k ...> + (-1)**i |1 jbar kbar ...>)/sqrt(2).

    ``labels = (i, j, k, ...)``: the first label is the sign bit, the
    rest give the bit pattern carried by the |0...> branch.
    """
    n = len(labels)
    if n < 2:
        raise DimensionMismatch("need at least 2 labels")
    i, rest = labels[0], labels[1:]
    vec = np.zeros(2 ** n, dtype=complex)
    hi = 0
    lo = 1
    for b in rest:
        hi = hi * 2 + b
        lo = lo * 2 + (1 - b)
    vec[hi] = 1.0 / np.sqrt(2.0)
    vec[lo] += (-1.0) ** i / np.sqrt(2.0)
    return vec


def _all_labels(n: int):
    for idx in range(2 ** n):
        yield tuple((idx >> (n - 1 - i)) & 1 for i in range(n))


def transformation_table(n: int = 3) -> dict:
    """Image of each GHZ basis vector under each related operator.

    Returns ``{(labels, op_word): (sign, image_labels)}`` computed by
    explicit matrix action; each image is exactly +- one basis vector.
    """
    if n != 3:
        raise Unsupported("transformation table implemented for n=3 only")
    basis = {labels: ghz_basis_vector(labels) for labels in _all_labels(n)}
    table = {}
    for word in BELL_RELATED_OPERATORS:
        op = pauli_product(word)
        for labels, vec in basis.items():
            image = op @ vec
            hit = None
            for cand, cvec in basis.items():
                overlap = np.vdot(cvec, image)
                if abs(overlap) > 1e-9:
                    if hit is not None:
                        raise DimensionMismatch("image is not a single basis vector")
                    sign = int(np.sign(overlap.real))
                    if abs(abs(overlap) - 1.0) > 1e-12 or abs(overlap.imag) > 1e-12:
                        raise DimensionMismatch("image overlap is not +-1")
                    hit = (sign, cand)
            table[(labels, word)] = hit
    return table


def classify_ghz_basis(n: int = 3) -> tuple[tuple, tuple, dict]:
    """Partition the GHZ basis into the two operator-invariant classes.

    Returns ``(class_1, class_2, table)`` with the class containing the
    all-zeros labels first; membership comes from the orbit closure of
    the transformation table.
    """
    table = transformation_table(n)
    parent = {labels: labels for labels in _all_labels(n)}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (labels, _), (_, image) in table.items():
        ra, rb = find(labels), find(image)
        if ra != rb:
            parent[rb] = ra

    zero = tuple([0] * n)
    class_1 = tuple(sorted(l for l in _all_labels(n) if find(l) == find(zero)))
    class_2 = tuple(sorted(l for l in _all_labels(n) if find(l) != find(zero)))
    if len(class_1) + len(class_2) != 2 ** n:
        raise DimensionMismatch("classes do not cover the basis")
    return class_1, class_2, table


def saturating_state(labels: tuple, lam: float) -> np.ndarray:
    """Two-vector mixture lam |psi_l><psi_l| + (1-lam)|psi_l'><psi_l'|
    with l' = l with the sign bit flipped; saturates the Bell maximum
    attainable at its correlation strength."""
    if not 0.0 <= lam <= 1.0:
        raise BadRange(f"lambda must lie in [0, 1], got {lam}")
    flipped = (1 - labels[0],) + tuple(labels[1:])
    v1 = ghz_basis_vector(labels)
    v2 = ghz_basis_vector(flipped)
    return lam * np.outer(v1, v1.conj()) + (1.0 - lam) * np.outer(v2, v2.conj())


@dataclass(frozen=True)
class CorrelationTensor:
    """Full correlation matrix plus the two-party reductions (n=3)."""

    n: int
    full: np.ndarray            # 3^floor(n/2) x 3^ceil(n/2)
    reduced_12: np.ndarray | None  # party 3 traced out (3x3, n=3 only)
    reduced_13: np.ndarray | None  # party 2 traced out (3x3, n=3 only)


def _pauli_expectations(rho: np.ndarray, n: int) -> np.ndarray:
    """tau[l_1, ..., l_n] over l in {X, Y, Z} as a (3,)*n array."""
    paulis = (PAULI_X, PAULI_Y, PAULI_Z)
    out = np.empty((3,) * n)
    for idx in np.ndindex(*(3,) * n):
        op = kron(*[paulis[l] for l in idx])
        out[idx] = float(np.trace(rho @ op).real)
    return out


def _partial_trace_qubits(rho: np.ndarray, n: int, drop: int) -> np.ndarray:
    tensor = rho.reshape((2,) * (2 * n))
    tensor = np.trace(tensor, axis1=drop, axis2=n + drop)
    return tensor.reshape(2 ** (n - 1), 2 ** (n - 1))


def correlation_tensor(rho: np.ndarray, n: int) -> CorrelationTensor:
    """Correlation matrices of an n-qubit state in the Pauli basis.

    The full matrix rows pack the first floor(n/2) parties' Pauli
    indices (base 3, party-major) and the columns the remaining
    parties.  For n=3 the two-party reductions obtained by tracing out
    party 3 (respectively party 2) are included.
    """
    if n > MAX_TENSOR_PARTIES:
        raise TooLarge(f"correlation tensor capped at {MAX_TENSOR_PARTIES} parties")
    d = 2 ** n
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (d, d):
        raise DimensionMismatch(f"state has shape {rho.shape}, expected ({d},{d})")
    tau = _pauli_expectations(rho, n)
    half = n // 2
    full = tau.reshape(3 ** half, 3 ** (n - half))
    reduced_12 = reduced_13 = None
    if n == 3:
        rho12 = _partial_trace_qubits(rho, n, drop=2)
        rho13 = _partial_trace_qubits(rho, n, drop=1)
        reduced_12 = _pauli_expectations(rho12, 2)
        reduced_13 = _pauli_expectations(rho13, 2)
    return CorrelationTensor(n=n, full=full, reduced_12=reduced_12, reduced_13=reduced_13)


def _alternating_rank_one_max(t3: np.ndarray, restarts: int = 10, seed: int = 0) -> float:
    """max over unit a, b, c of a . T (b x c) by alternating updates."""
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(restarts):
        b = rng.normal(size=3)
        b /= np.linalg.norm(b)
        c = rng.normal(size=3)
        c /= np.linalg.norm(c)
        value = 0.0
        for _ in range(200):
            a = np.einsum("ijk,j,k->i", t3, b, c)
            na = np.linalg.norm(a)
            if na < 1e-300:
                value = 0.0
                break
            a /= na
            b = np.einsum("ijk,i,k->j", t3, a, c)
            b /= np.linalg.norm(b)
            c = np.einsum("ijk,i,j->k", t3, a, b)
            nc = np.linalg.norm(c)
            c /= nc
            if abs(nc - value) < 1e-15:
                value = nc
                break
            value = nc
        best = max(best, value)
    return best


def horodecki_bell_max(t: CorrelationTensor) -> float:
    """Maximal alpha = 1 Bell value of a three-party state from its
    correlation matrices: 2*sqrt(t0^2 + (t1 + t2)^2)."""
    if t.n != 3 or t.reduced_12 is None or t.reduced_13 is None:
        raise Unsupported("Bell maximization needs the n=3 tensor structure")
    t3 = t.full.reshape(3, 3, 3)
    t0 = _alternating_rank_one_max(t3)
    t1 = float(np.linalg.svd(t.reduced_12, compute_uv=False)[0])
    t2 = float(np.linalg.svd(t.reduced_13, compute_uv=False)[0])
    return 2.0 * float(np.sqrt(t0 * t0 + (t1 + t2) ** 2))


def eve_conditional_state(lam: float, theta_prime: float, outcome: int = 0) -> np.ndarray:
    """Eve's normalized conditional state, built explicitly.

    Purifies the saturating mixture with a two-state register, traces
    out parties 1 and 2, and projects party 3 onto the X-Z plane
    outcome vector for angle theta_prime.
    """
    if not 0.0 <= lam <= 1.0:
        raise BadRange(f"lambda must lie in [0, 1], got {lam}")
    if outcome not in (0, 1):
        raise BadRange(f"outcome must be 0 or 1, got {outcome}")
    psi0 = ghz_basis_vector((0, 0, 0))
    psi1 = ghz_basis_vector((1, 0, 0))
    # |phi> = sqrt(lam)|psi_000>|e0> + sqrt(1-lam)|psi_100>|e1>
    phi = np.zeros(16, dtype=complex)
    phi[0::2] = np.sqrt(lam) * psi0
    phi[1::2] = np.sqrt(1.0 - lam) * psi1
    joint = np.outer(phi, phi.conj()).reshape((2,) * 8)
    # Trace out parties 1 and 2 (axes 0,1 against 4,5), keep (P3, E).
    reduced = np.einsum("abcdabef->cdef", joint).reshape(4, 4)
    c = np.array([np.cos(theta_prime), np.sin(theta_prime)]) if outcome == 0 \
        else np.array([np.sin(theta_prime), -np.cos(theta_prime)])
    r4 = reduced.reshape(2, 2, 2, 2)  # (P3, E, P3', E')
    rho_e = np.einsum("a,abcd,c->bd", c.conj(), r4, c)
    prob = float(np.trace(rho_e).real)
    if prob <= 0:
        raise BadRange("outcome has zero probability")
    return rho_e / prob


def eve_conditional_eigenvalues(lam: float, theta_prime: float) -> tuple[float, float]:
    """Eigenvalues of Eve's conditional state (same for both outcomes):

        (1 +- sqrt(1 - 4 lam (1-lam) + 4 lam (1-lam) cos^2(2 theta')))/2.
    """
    if not 0.0 <= lam <= 1.0:
        raise BadRange(f"lambda must lie in [0, 1], got {lam}")
    q = 4.0 * lam * (1.0 - lam)
    rad = np.sqrt(max(1.0 - q + q * np.cos(2.0 * theta_prime) ** 2, 0.0))
    return (0.5 * (1.0 + rad), 0.5 * (1.0 - rad))


BELL_LOW_3 = 4.0
BELL_HIGH_3 = 2.0 * np.sqrt(5.0)
_DOMAIN_SLACK = 1e-9


def mixing_weight_from_bell(bell: float, n: int = 3) -> float:
    """Invert B = 2*sqrt((2 lam - 1)^2 + 4) on the upper branch."""
    if n != 3:
        raise Unsupported("inversion implemented for n=3 only")
    if not BELL_LOW_3 - _DOMAIN_SLACK <= bell <= BELL_HIGH_3 + _DOMAIN_SLACK:
        raise OutOfRange(f"Bell value {bell} outside [{BELL_LOW_3}, {BELL_HIGH_3:.6f}]")
    rad = max(bell * bell / 4.0 - 4.0, 0.0)
    return 0.5 * (1.0 + float(np.sqrt(rad)))


def binary_entropy(p: float) -> float:
    """h(p) = -p log2 p - (1-p) log2 (1-p) with 0 log 0 = 0."""
    if not -1e-12 <= p <= 1.0 + 1e-12:
        raise BadRange(f"probability {p} outside [0, 1]")
    p = min(max(p, 0.0), 1.0)
    out = 0.0
    if p > 0.0:
        out -= p * np.log2(p)
    if p < 1.0:
        out -= (1.0 - p) * np.log2(1.0 - p)
    return float(out)


@dataclass(frozen=True)
class HolevoCurvePoint:
    bell_value: float
    chi_upper: float
    entropy_lower: float  # 1 - chi for the one-outcome case


def holevo_bound(bell: float, n: int) -> HolevoCurvePoint:
    """chi(A_n1 : E) <= h(1/2 + sqrt(bell^2/4 - (n-1)^2)/2) at alpha=1."""
    k = float(n - 1)
    low = 2.0 * k
    high = 2.0 * np.sqrt(1.0 + k * k)
    if not low - _DOMAIN_SLACK <= bell <= high + _DOMAIN_SLACK:
        raise OutOfRange(f"Bell value {bell} outside [{low}, {high:.6f}]")
    rad = np.sqrt(min(max(bell * bell / 4.0 - k * k, 0.0), 1.0))
    chi = binary_entropy(0.5 + 0.5 * float(rad))
    return HolevoCurvePoint(bell_value=float(bell), chi_upper=chi,
                            entropy_lower=1.0 - chi)


# Fig.-style comparison curves: one-outcome conditional entropy lower
# bounds as functions of each inequality's own Bell value m.

def this_work_entropy(m: float) -> float | None:
    if not BELL_LOW_3 <= m <= BELL_HIGH_3 + _DOMAIN_SLACK:
        return None
    return holevo_bound(m, 3).entropy_lower


def mabk_entropy(m: float) -> float | None:
    rad = m * m / 8.0 - 1.0
    if rad < 0.0 or rad > 1.0 + _DOMAIN_SLACK:
        return None
    return 1.0 - binary_entropy(0.5 + 0.5 * float(np.sqrt(min(rad, 1.0))))


def parity_chsh_entropy(m: float) -> float | None:
    rad = m * m - 1.0
    if rad < 0.0 or rad > 1.0 + _DOMAIN_SLACK:
        return None
    return 1.0 - binary_entropy(0.5 + 0.5 * float(np.sqrt(min(rad, 1.0))))


def holz_entropy(m: float) -> float | None:
    rad = m * m + 2.0 * m - 3.0
    if rad < 0.0:
        return None
    arg = 0.25 * (m + 1.0 + float(np.sqrt(rad)))
    if arg > 1.0 + _DOMAIN_SLACK:
        return None
    return 1.0 - binary_entropy(min(arg, 1.0))


COMPARISON_CURVES = {
    "this_work": (this_work_entropy, BELL_LOW_3, BELL_HIGH_3),
    "mabk": (mabk_entropy, 2.0 * np.sqrt(2.0), 4.0),
    "parity_chsh": (parity_chsh_entropy, 1.0, np.sqrt(2.0)),
    "holz": (holz_entropy, 1.0, 1.5),
}


def comparison_curves(points: int) -> list[tuple[str, float, float, float]]:
    """Sample each comparison curve across its own violation interval.

    Returns rows ``(curve_id, bell_value, chi, entropy)`` with the
    classical endpoint first and the quantum endpoint last.
    """
    if points < 2:
        raise BadRange(f"need at least 2 points, got {points}")
    rows = []
    for curve_id, (fn, low, high) in COMPARISON_CURVES.items():
        for m in np.linspace(low, high, points):
            entropy = fn(float(m))
            if entropy is None:
                rows.append((curve_id, float(m), float("nan"), float("nan")))
            else:
                rows.append((curve_id, float(m), 1.0 - entropy, entropy))
    return rows
