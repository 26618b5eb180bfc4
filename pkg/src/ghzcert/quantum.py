"""Quantum bound, optimal measurements, and self-testing verification.

The quantum maximum of the n-party expression is

    sqrt(1 + (n-1)^2 alpha^2) + sqrt(1 + (n-1)^2),

attained by the GHZ state with party 1 measuring two tilted X-Z plane
observables and every other party measuring sigma_x / sigma_z.  A
multi-start coordinate search over the 2n angles double-checks the
closed form, and the block-diagonal self-test verifies that any
direct-sum realization reproduces the reference state and measurements
up to the local swap-style isometry.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .bell import BellExpression, build_bell, to_operator
from .errors import BadArity, BadBlocks, DimensionMismatch, TooLarge
from .linalg import ghz_state, max_eigenvalue
from .observables import ObservableSet

MAX_EIG_PARTIES = 10
MAX_BLOCKS = 4


def quantum_bound(n: int, alpha: float) -> float:
    """Closed-form quantum maximum of the n-party expression."""
    if n < 2:
        raise BadArity(f"need at least 2 parties, got {n}")
    if not np.isfinite(alpha):
        raise BadArity(f"alpha must be finite, got {alpha}")
    k = float(n - 1)
    return float(np.sqrt(1.0 + k * k * alpha * alpha) + np.sqrt(1.0 + k * k))


def optimal_angles(n: int, alpha: float) -> ObservableSet:
    """Angles attaining the quantum bound.

    Party 1: tan(theta_10) = 1/((n-1) alpha) with both components
    nonnegative, and theta_11 in the second quadrant so that
    tan(theta_11) = -1/(n-1).  Every other party measures sigma_x
    (theta = pi/2) and sigma_z (theta = 0).
    """
    if n < 2:
        raise BadArity(f"need at least 2 parties, got {n}")
    k = float(n - 1)
    theta_10 = float(np.arctan2(1.0, k * alpha))
    theta_11 = float(np.arctan2(1.0, -k))
    angles = [(theta_10, theta_11)] + [(np.pi / 2.0, 0.0)] * (n - 1)
    return ObservableSet(tuple(angles))


def max_eigenvalue_bound(expr: BellExpression, obs: ObservableSet) -> float:
    """Largest eigenvalue of the Bell operator for these observables."""
    if expr.n > MAX_EIG_PARTIES:
        raise TooLarge(f"eigensolve capped at {MAX_EIG_PARTIES} parties, got {expr.n}")
    return max_eigenvalue(to_operator(expr, obs))


def ghz_expectation(expr: BellExpression, obs: ObservableSet) -> float:
    """<GHZ| B |GHZ> for the Bell operator of these observables."""
    op = to_operator(expr, obs)
    psi = ghz_state(expr.n)
    return float(np.vdot(psi, op @ psi).real)


def _operator_parts(expr: BellExpression, obs: ObservableSet, party: int, setting: int):
    """Split the Bell operator as R + cos(t) Dz + sin(t) Dx in one angle."""
    from .linalg import IDENTITY_2, PAULI_X, PAULI_Z, kron

    dim = 2 ** expr.n
    rest = np.zeros((dim, dim), dtype=complex)
    dz = np.zeros((dim, dim), dtype=complex)
    dx = np.zeros((dim, dim), dtype=complex)
    for sel, coeff in expr.terms.items():
        factors = [IDENTITY_2 if s is None else obs.matrix(i, s)
                   for i, s in enumerate(sel)]
        if sel[party] == setting:
            fz = list(factors)
            fz[party] = PAULI_Z
            dz += coeff * kron(*fz)
            fx = list(factors)
            fx[party] = PAULI_X
            dx += coeff * kron(*fx)
        else:
            rest += coeff * kron(*factors)
    return rest, dz, dx


def _golden_max(f, lo: float, hi: float, iters: int = 40):
    """Golden-section maximization on [lo, hi]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = (a + b) / 2.0
    return x, f(x)


_COARSE_POINTS = 16


def _refine_coordinate(expr, angles, party, setting):
    obs = ObservableSet(tuple(tuple(a) for a in angles))
    rest, dz, dx = _operator_parts(expr, obs, party, setting)

    def objective(theta):
        op = rest + np.cos(theta) * dz + np.sin(theta) * dx
        return float(np.linalg.eigvalsh(op)[-1])

    grid = np.linspace(0.0, np.pi, _COARSE_POINTS, endpoint=False)
    vals = [objective(t) for t in grid]
    best = int(np.argmax(vals))
    half = np.pi / _COARSE_POINTS
    lo = max(0.0, grid[best] - half)
    hi = min(np.pi, grid[best] + half)
    theta, val = _golden_max(objective, lo, hi)
    # Keep the grid point if refinement failed to improve on it.
    if vals[best] > val:
        theta, val = float(grid[best]), vals[best]
    return theta, val


def optimize_angles(expr: BellExpression, starts: int = 20, seed: int = 0,
                    initial: ObservableSet | None = None,
                    sweeps: int = 40, sweep_tol: float = 1e-12):
    """Multi-start coordinate-wise golden-section angle search.

    Maximizes the largest eigenvalue of the Bell operator over all 2n
    angles in [0, pi).  Returns ``(best_observables, best_value)``;
    deterministic given ``seed``, ties resolved to the earliest start.
    """
    if starts < 1:
        raise BadArity(f"starts must be >= 1, got {starts}")
    n = expr.n
    rng = np.random.default_rng(seed)
    start_points = []
    if initial is not None:
        if initial.n != n:
            raise DimensionMismatch("initial observables have wrong party count")
        start_points.append([list(p) for p in initial.angles])
    while len(start_points) < starts:
        start_points.append(rng.uniform(0.0, np.pi, size=(n, 2)).tolist())

    best_angles = None
    best_val = -np.inf
    for point in start_points:
        angles = [list(p) for p in point]
        current = max_eigenvalue_bound(expr, ObservableSet(tuple(tuple(a) for a in angles)))
        for _ in range(sweeps):
            previous = current
            for party in range(n):
                for setting in (0, 1):
                    theta, val = _refine_coordinate(expr, angles, party, setting)
                    if val >= current:
                        angles[party][setting] = theta
                        current = val
            if current - previous < sweep_tol:
                break
        if current > best_val:
            best_val = current
            best_angles = angles
    return ObservableSet(tuple(tuple(a) for a in best_angles)), float(best_val)


@dataclass(frozen=True)
class BlockState:
    """Direct-sum GHZ realization: weight per block index tuple.

    Every party uses the same number of 2-dimensional blocks; weight
    q_t >= 0 is attached to the block tuple t = (k_1, ..., k_n) and the
    weights sum to 1.
    """

    n: int
    weights: dict

    def __post_init__(self):
        if self.n < 2:
            raise BadArity(f"need at least 2 parties, got {self.n}")
        if not self.weights:
            raise BadBlocks("no blocks given")
        total = 0.0
        for t, q in self.weights.items():
            if len(t) != self.n:
                raise BadBlocks(f"block tuple {t} has length {len(t)}, expected {self.n}")
            if any(k < 0 for k in t):
                raise BadBlocks(f"negative block index in {t}")
            if q < -1e-12:
                raise BadBlocks(f"negative weight {q} for block {t}")
            total += q
        if abs(total - 1.0) > 1e-12:
            raise BadBlocks(f"weights sum to {total!r}, expected 1")
        if self.blocks_per_party > MAX_BLOCKS:
            raise BadBlocks(
                f"{self.blocks_per_party} blocks per party exceeds the cap of {MAX_BLOCKS}")

    @property
    def blocks_per_party(self) -> int:
        return 1 + max(max(t) for t in self.weights)


@dataclass(frozen=True)
class SelfTestReport:
    ancilla_fidelity: float
    observable_fidelities: dict
    bell_value: float
    quantum_bound: float

    def to_json(self) -> str:
        return json.dumps({
            "ancilla_fidelity": self.ancilla_fidelity,
            "observable_fidelities": self.observable_fidelities,
            "bell_value": self.bell_value,
            "quantum_bound": self.quantum_bound,
        }, sort_keys=True)


def _tilde_state(block_state: BlockState, blocks: int) -> np.ndarray:
    n = block_state.n
    m = 2 * blocks
    psi = np.zeros(m ** n, dtype=complex)
    for t, q in block_state.weights.items():
        even = 0
        odd = 0
        for k in t:
            even = even * m + 2 * k
            odd = odd * m + 2 * k + 1
        amp = np.sqrt(max(q, 0.0) / 2.0)
        psi[even] += amp
        psi[odd] += amp
    return psi


def _tilde_observable(c_z: float, c_x: float, blocks: int) -> np.ndarray:
    """Direct sum over 2x2 blocks of c_z sigma_z + c_x sigma_x."""
    m = 2 * blocks
    out = np.zeros((m, m), dtype=complex)
    for k in range(blocks):
        out[2 * k, 2 * k] = c_z
        out[2 * k + 1, 2 * k + 1] = -c_z
        out[2 * k, 2 * k + 1] = c_x
        out[2 * k + 1, 2 * k] = c_x
    return out


def _apply_local(op: np.ndarray, psi: np.ndarray, party: int, n: int, m: int) -> np.ndarray:
    """Apply a single-party operator to one axis of the state tensor."""
    tensor = psi.reshape((m,) * n)
    tensor = np.tensordot(op, tensor, axes=([1], [party]))
    tensor = np.moveaxis(tensor, 0, party)
    return tensor.reshape(-1)


def _swap_isometry(psi: np.ndarray, n: int, m: int) -> np.ndarray:
    """Map |d_1...d_n>|0...0> to |even(d)> |parity bits of d>.

    Returns the output as a (primary m^n) x (ancilla 2^n) matrix.
    """
    out = np.zeros((m ** n, 2 ** n), dtype=complex)
    nz = np.nonzero(psi)[0]
    for p in nz:
        digits = []
        rem = int(p)
        for _ in range(n):
            digits.append(rem % m)
            rem //= m
        digits.reverse()
        even = 0
        anc = 0
        for d in digits:
            even = even * m + (d - (d & 1))
            anc = anc * 2 + (d & 1)
        out[even, anc] += psi[p]
    return out


def selftest_verify(block_state: BlockState, n: int, alpha: float) -> SelfTestReport:
    """Verify the swap-isometry identities for a block realization.

    Applies the per-party isometry |2k>|0> -> |2k>|0>,
    |2k+1>|0> -> |2k>|1> to the direct-sum state and to the state hit
    by party 1's tilted observables, and checks that the ancilla factor
    carries the GHZ state (respectively A |GHZ>) with the same primary
    junk factor.
    """
    if block_state.n != n:
        raise BadBlocks(f"block state has n={block_state.n}, expected {n}")
    blocks = block_state.blocks_per_party
    m = 2 * blocks
    k = float(n - 1)
    norm0 = np.sqrt(1.0 + k * k * alpha * alpha)
    norm1 = np.sqrt(1.0 + k * k)
    party1 = {
        "A_10": (k * alpha / norm0, 1.0 / norm0),
        "A_11": (-k / norm1, 1.0 / norm1),
    }

    psi = _tilde_state(block_state, blocks)
    out = _swap_isometry(psi, n, m)
    ghz = ghz_state(n)
    rho_anc = out.T @ out.conj()
    ancilla_fidelity = float(np.real(np.vdot(ghz, rho_anc @ ghz)))

    # Junk state: ancilla contracted against GHZ, normalized.
    junk = out @ ghz.conj()
    junk_norm = np.linalg.norm(junk)
    if junk_norm > 0:
        junk = junk / junk_norm

    obs_fidelities = {}
    for name, (c_z, c_x) in party1.items():
        op = _tilde_observable(c_z, c_x, blocks)
        hit = _apply_local(op, psi, 0, n, m)
        out_hit = _swap_isometry(hit, n, m)
        ref = c_z * _apply_pauli_z(ghz, 0, n) + c_x * _apply_pauli_x(ghz, 0, n)
        target = np.outer(junk, ref)
        overlap = np.vdot(target.reshape(-1), out_hit.reshape(-1))
        obs_fidelities[name] = float(np.abs(overlap) ** 2)

    expr = build_bell(n, alpha)
    bell_value = _tilde_bell_value(expr, block_state, blocks, party1)
    return SelfTestReport(
        ancilla_fidelity=ancilla_fidelity,
        observable_fidelities=obs_fidelities,
        bell_value=bell_value,
        quantum_bound=quantum_bound(n, alpha),
    )


def _apply_pauli_z(psi: np.ndarray, party: int, n: int) -> np.ndarray:
    tensor = psi.reshape((2,) * n).copy()
    index = [slice(None)] * n
    index[party] = 1
    tensor[tuple(index)] *= -1.0
    return tensor.reshape(-1)


def _apply_pauli_x(psi: np.ndarray, party: int, n: int) -> np.ndarray:
    tensor = psi.reshape((2,) * n)
    return np.flip(tensor, axis=party).reshape(-1)


def _tilde_bell_value(expr, block_state, blocks, party1) -> float:
    n = expr.n
    m = 2 * blocks
    psi = _tilde_state(block_state, blocks)
    mats = {
        (0, 0): _tilde_observable(*party1["A_10"], blocks),
        (0, 1): _tilde_observable(*party1["A_11"], blocks),
    }
    for i in range(1, n):
        mats[(i, 0)] = _tilde_observable(0.0, 1.0, blocks)
        mats[(i, 1)] = _tilde_observable(1.0, 0.0, blocks)
    total = 0.0
    for sel, coeff in expr.terms.items():
        hit = psi
        for i, s in enumerate(sel):
            if s is None:
                continue
            hit = _apply_local(mats[(i, s)], hit, i, n, m)
        total += coeff * float(np.vdot(psi, hit).real)
    return total
