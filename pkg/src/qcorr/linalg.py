"""Dense complex linear algebra for 2-, 4- and 16-dimensional Hilbert spaces.

Matrices are plain ``numpy`` complex arrays. Tensor factors are ordered with
the first factor as the most significant index (subsystem A first).
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

ALLOWED_DIMS = (2, 4, 16)
HERMITIAN_TOL = 1e-10
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, SX, SY, SZ)


class LinalgError(ValueError):
    """Raised for inputs outside the supported dimensions or symmetries."""


class HermitianSpectrum(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(m) -> np.ndarray:
    """Coerce ``m`` to a square complex matrix of an allowed dimension."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise LinalgError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] not in ALLOWED_DIMS:
        raise LinalgError(f"dimension {a.shape[0]} not in {ALLOWED_DIMS}")
    if not np.all(np.isfinite(a)):
        raise LinalgError("matrix has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def kron(a, b) -> np.ndarray:
    """Kronecker product; ``a`` is the first (most significant) factor."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise LinalgError("kron expects square matrices")
    if a.shape[0] * b.shape[0] > 16:
        raise LinalgError(f"kron output dimension {a.shape[0] * b.shape[0]} exceeds 16")
    return np.kron(a, b)


_SELECTORS = {
    4: {"A": (0,), "B": (1,)},
    16: {"pol": (2, 3), "path": (0, 1), "pol_A": (2,), "pol_B": (3,),
         "path_A": (0,), "path_B": (1,)},
}


def partial_trace(rho, keep: str | Sequence[int]) -> np.ndarray:
    """Trace out every qubit not listed in ``keep``.

    ``keep`` is either a named selector (``"A"``/``"B"`` for two qubits,
    ``"pol"``, ``"path"``, ``"pol_A"``, ... for the four-qubit source ordering
    path_A, path_B, pol_A, pol_B) or an explicit tuple of qubit indices.
    Kept qubits stay in ascending order.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    if rho.shape != (dim, dim) or dim not in (4, 16):
        raise LinalgError(f"partial_trace needs a 4x4 or 16x16 matrix, got {rho.shape}")
    nq = dim.bit_length() - 1
    if isinstance(keep, str):
        try:
            kept = _SELECTORS[dim][keep]
        except KeyError:
            raise LinalgError(f"selector {keep!r} invalid for dimension {dim}") from None
    else:
        kept = tuple(sorted(int(k) for k in keep))
        if not kept or len(set(kept)) != len(kept) or kept[0] < 0 or kept[-1] >= nq:
            raise LinalgError(f"invalid qubit selection {keep!r} for {nq} qubits")
    traced = [q for q in range(nq) if q not in kept]
    t = rho.reshape((2,) * (2 * nq))
    # Contract row/column index pairs of traced qubits, highest first so the
    # remaining axis numbers stay valid.
    n_left = nq
    for q in sorted(traced, reverse=True):
        t = np.trace(t, axis1=q, axis2=q + n_left)
        n_left -= 1
    k = 2 ** len(kept)
    return t.reshape(k, k)


def hermitian_defect(m: np.ndarray) -> float:
    return float(np.linalg.norm(m - dagger(m)))


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def hermitian_eig(m, tol: float = HERMITIAN_TOL) -> HermitianSpectrum:
    """Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    The input is symmetrized as (m + m^dagger)/2 once its Hermiticity defect is
    verified to be below ``tol``. Eigenvalues are returned in descending order
    with the matching orthonormal eigenvectors as columns.
    """
    a = as_matrix(m)
    if hermitian_defect(a) > tol:
        raise LinalgError(f"matrix is not Hermitian (defect {hermitian_defect(a):.3e})")
    a = 0.5 * (a + dagger(a))
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(float(np.linalg.norm(a)), 1.0)
    for _ in range(JACOBI_MAX_SWEEPS):
        if _offdiag_norm(a) <= JACOBI_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                phase = apq / mag
                app, aqq = a[p, p].real, a[q, q].real
                theta = 0.5 * np.arctan2(2.0 * mag, aqq - app)
                c, s = np.cos(theta), np.sin(theta)
                # Unitary acting on the (p, q) plane; zeroes a[p, q] under G^dagger A G.
                gp = np.array([c, -s * np.conj(phase)])
                gq = np.array([s * phase, c])
                cols = a[:, [p, q]]
                a[:, p] = cols @ gp
                a[:, q] = cols @ gq
                rows = a[[p, q], :]
                a[p, :] = np.conj(gp) @ rows
                a[q, :] = np.conj(gq) @ rows
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vc = v[:, [p, q]]
                v[:, p] = vc @ gp
                v[:, q] = vc @ gq
    evals = np.real(np.diag(a))
    order = np.argsort(-evals, kind="stable")
    return HermitianSpectrum(evals[order], v[:, order])


def eigvalsh(m) -> np.ndarray:
    return hermitian_eig(m).eigenvalues


def psd_sqrt(m) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix."""
    lam, vec = hermitian_eig(m)
    return (vec * np.sqrt(np.clip(lam, 0.0, None))) @ dagger(vec)


def ket(*amplitudes) -> np.ndarray:
    return np.asarray(amplitudes, dtype=complex)


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, np.conj(v))


def to_pairs(m) -> list[list[float]]:
    """Row-major list of ``[re, im]`` pairs."""
    flat = np.asarray(m, dtype=complex).ravel()
    return [[float(z.real), float(z.imag)] for z in flat]


def from_pairs(dim: int, entries) -> np.ndarray:
    arr = np.asarray(entries, dtype=float)
    if arr.shape != (dim * dim, 2):
        raise LinalgError(f"expected {dim * dim} [re, im] pairs, got array of shape {arr.shape}")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(dim, dim)
