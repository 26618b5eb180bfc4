"""Dense complex linear algebra for 2^N-dimensional operator work.

Conventions used throughout the package:

* states are 1-D complex ndarrays, operators are square complex ndarrays
  (row-major, numpy's default);
* party 1 is the leftmost tensor factor, so basis index bit ``n-1-i``
  of an integer label is party ``i``'s qubit (party-major bit order);
* qubit outcome bit ``a`` corresponds to observable eigenvalue
  ``(-1)**a``, i.e. ``|0>`` is the +1 eigenvector of ``sigma_z``.

Dimensions are capped at 2^12 so enumeration and eigensolves stay within
desk-scale memory.  Eigensolves delegate to LAPACK (``numpy.linalg``),
which is deterministic for a fixed build and input.
"""

from __future__ import annotations

import numpy as np

from .errors import BadArity, DimensionMismatch, NonHermitian, TooLarge

# Centralized tolerance constants.
HERM_TOL = 1e-10   # Hermiticity check for eigensolves
EIG_TOL = 1e-9     # eigen-identity residual
NORM_TOL = 1e-12   # state normalization / involution checks

MAX_QUBITS = 12

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


def kron(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more operators, left to right."""
    if not factors:
        raise DimensionMismatch("kron needs at least one factor")
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f, dtype=complex))
    return out


def is_hermitian(m: np.ndarray, tol: float = HERM_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and \
        np.max(np.abs(m - m.conj().T)) <= tol


def hermitian_eig(m: np.ndarray, tol: float = HERM_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues real and
    sorted ascending and eigenvectors as columns, so that
    ``m @ V = V @ diag(w)`` within ``EIG_TOL`` per column.

    Raises:
        NonHermitian: if ``m`` deviates from ``m.conj().T`` beyond ``tol``.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > tol:
        raise NonHermitian(f"matrix deviates from Hermitian by {dev:.3e} (> {tol:.1e})")
    w, v = np.linalg.eigh(m)
    return w, v


def max_eigenvalue(m: np.ndarray, tol: float = HERM_TOL) -> float:
    """Largest eigenvalue of a Hermitian matrix."""
    m = np.asarray(m, dtype=complex)
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > tol:
        raise NonHermitian(f"matrix deviates from Hermitian by {dev:.3e} (> {tol:.1e})")
    return float(np.linalg.eigvalsh(m)[-1])


def ghz_state(n: int) -> np.ndarray:
    """The n-party GHZ state (|0...0> + |1...1>)/sqrt(2) as a 2^n vector."""
    if n < 2:
        raise BadArity(f"GHZ state needs at least 2 parties, got {n}")
    if n > MAX_QUBITS:
        raise TooLarge(f"{n} qubits exceeds the {MAX_QUBITS}-qubit cap")
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = psi[-1] = 1.0 / np.sqrt(2.0)
    return psi


def stabilizer_generators(n: int) -> list[np.ndarray]:
    """Generators of the GHZ stabilizer group as dense 2^n matrices.

    The first generator is X on every party; generator i >= 2 is Z on
    party 1 and party i with identity elsewhere.
    """
    if n < 2:
        raise BadArity(f"need at least 2 parties, got {n}")
    if n > MAX_QUBITS:
        raise TooLarge(f"{n} qubits exceeds the {MAX_QUBITS}-qubit cap")
    gens = [kron(*([PAULI_X] * n))]
    for i in range(1, n):
        factors = [IDENTITY_2] * n
        factors[0] = PAULI_Z
        factors[i] = PAULI_Z
        gens.append(kron(*factors))
    return gens


def check_state(psi: np.ndarray, tol: float = NORM_TOL) -> np.ndarray:
    """Validate and return a normalized state vector."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise DimensionMismatch(f"state must be a vector, got shape {psi.shape}")
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > tol:
        raise DimensionMismatch(f"state norm^2 = {norm2!r} deviates from 1 beyond {tol:.1e}")
    return psi


def check_density_matrix(rho: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Validate trace-1 Hermitian PSD within tolerance; returns the array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch(f"density matrix must be square, got shape {rho.shape}")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise DimensionMismatch(f"trace {np.trace(rho)!r} is not 1")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise NonHermitian("density matrix is not Hermitian")
    if np.linalg.eigvalsh(rho)[0] < -tol:
        raise DimensionMismatch("density matrix has a negative eigenvalue")
    return rho
