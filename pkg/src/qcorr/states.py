"""Two-qubit state families and density-matrix validation.

Basis ordering is |00>, |01>, |10>, |11> with H -> 0 and V -> 1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .linalg import (LinalgError, dagger, eigvalsh, from_pairs, hermitian_defect, hermitian_eig,
                     partial_trace, projector, to_pairs)

STATE_TOL = 1e-10


class StateError(ValueError):
    """Raised when a matrix violates a density-matrix invariant or a parameter is out of range."""


def _check_range(name, value, lo, hi):
    if not (lo <= value <= hi) or not np.isfinite(value):
        raise StateError(f"{name}={value} outside [{lo}, {hi}]")


def validate_density(rho, tol: float = STATE_TOL, clip: bool = True) -> np.ndarray:
    """Check the Hermitian, unit-trace and PSD invariants of a density matrix.

    Negative eigenvalues within ``tol`` are clipped to zero and the state is
    renormalized when ``clip`` is set. Returns a fresh Hermitian array.
    """
    try:
        a = np.array(rho, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise StateError(f"not a numeric matrix: {exc}") from None
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] not in (2, 4):
        raise StateError(f"density matrix must be 2x2 or 4x4, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise StateError("density matrix has non-finite entries")
    defect = hermitian_defect(a)
    if defect > tol:
        raise StateError(f"not Hermitian: ||rho - rho^dagger||_F = {defect:.3e} > {tol:g}")
    a = 0.5 * (a + dagger(a))
    tr = np.trace(a).real
    if abs(tr - 1.0) > tol:
        raise StateError(f"trace {tr:.12g} differs from 1 by more than {tol:g}")
    lam, vec = _spectrum(a)
    if lam[-1] < -tol:
        raise StateError(f"not positive semidefinite: min eigenvalue {lam[-1]:.3e} < -{tol:g}")
    if clip and lam[-1] < 0:
        lam = np.clip(lam, 0.0, None)
        lam /= lam.sum()
        a = (vec * lam) @ dagger(vec)
        a = 0.5 * (a + dagger(a))
    return a


def _spectrum(a):
    try:
        return hermitian_eig(a)
    except LinalgError as exc:
        raise StateError(str(exc)) from None


def is_density(rho, tol: float = STATE_TOL) -> bool:
    try:
        validate_density(rho, tol, clip=False)
    except StateError:
        return False
    return True


def phi_ket(p: float, sign: int = 1) -> np.ndarray:
    return np.array([np.sqrt(p), 0, 0, sign * np.sqrt(1 - p)], dtype=complex)


PHI_PLUS = phi_ket(0.5, +1)
PHI_MINUS = phi_ket(0.5, -1)
KET_01 = np.array([0, 1, 0, 0], dtype=complex)


def bell_phi(p: float, sign: int = 1) -> np.ndarray:
    """Projector onto sqrt(p)|00> + sign*sqrt(1-p)|11>."""
    _check_range("p", p, 0.0, 1.0)
    if sign not in (1, -1):
        raise StateError(f"sign must be +1 or -1, got {sign}")
    return projector(phi_ket(p, sign))


def werner(eps: float) -> np.ndarray:
    """(1-eps)|Phi+><Phi+| + eps I/4."""
    _check_range("eps", eps, 0.0, 1.0)
    return (1 - eps) * projector(PHI_PLUS) + eps * np.eye(4) / 4


def mems_ree(a: float, r: float) -> np.ndarray:
    """Rank-3 mixture of |Phi+>, |Phi-> and |01> with Bell weights (1-a+-r)/2."""
    _check_range("a", a, 0.0, 1.0 / 3.0)
    _check_range("r", r, 0.0, 1.0 - a)
    return ((1 - a + r) / 2 * projector(PHI_PLUS)
            + (1 - a - r) / 2 * projector(PHI_MINUS)
            + a * projector(KET_01))


def rho_down(q: float) -> np.ndarray:
    """(1-q)|Phi+><Phi+| + q|Phi-><Phi-|, the dephased Bell family."""
    _check_range("q", q, 0.0, 0.5)
    return (1 - q) * projector(PHI_PLUS) + q * projector(PHI_MINUS)


def rho_up(eps: float, p: float) -> np.ndarray:
    """(1-eps)|phi+(p)><phi+(p)| + eps|01><01|."""
    _check_range("eps", eps, 0.0, 1.0)
    _check_range("p", p, 0.0, 1.0)
    return (1 - eps) * projector(phi_ket(p, +1)) + eps * projector(KET_01)


@dataclass(frozen=True)
class XStateParams:
    rho11: float
    rho22: float
    rho33: float
    rho44: float
    rho14: complex = 0.0
    rho23: complex = 0.0

    def validate(self, tol: float = STATE_TOL) -> None:
        diag = (self.rho11, self.rho22, self.rho33, self.rho44)
        if min(diag) < -tol:
            raise StateError(f"negative population in {diag}")
        if abs(sum(diag) - 1) > tol:
            raise StateError(f"populations sum to {sum(diag):.12g}, not 1")
        if abs(self.rho14) ** 2 > self.rho11 * self.rho44 + tol:
            raise StateError("|rho14|^2 > rho11 rho44 (not positive semidefinite)")
        if abs(self.rho23) ** 2 > self.rho22 * self.rho33 + tol:
            raise StateError("|rho23|^2 > rho22 rho33 (not positive semidefinite)")

    @classmethod
    def from_matrix(cls, rho) -> "XStateParams":
        d = np.real(np.diag(rho))
        return cls(float(d[0]), float(d[1]), float(d[2]), float(d[3]),
                   complex(rho[0, 3]), complex(rho[1, 2]))


def xstate(params: XStateParams) -> np.ndarray:
    params.validate()
    m = np.diag([params.rho11, params.rho22, params.rho33, params.rho44]).astype(complex)
    m[0, 3] = params.rho14
    m[3, 0] = np.conj(params.rho14)
    m[1, 2] = params.rho23
    m[2, 1] = np.conj(params.rho23)
    return m


def random_state(seed) -> np.ndarray:
    """Hilbert-Schmidt random two-qubit state G G^dagger / Tr(G G^dagger).

    ``seed`` may be an integer or an existing ``numpy.random.Generator``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))) / np.sqrt(2)
    m = g @ dagger(g)
    return m / np.trace(m).real


def purity(rho) -> float:
    return float(np.real(np.trace(rho @ rho)))


def reduced_spectrum(rho, keep: str = "A") -> np.ndarray:
    return eigvalsh(partial_trace(rho, keep))


def state_to_json(rho) -> str:
    rho = np.asarray(rho, dtype=complex)
    return json.dumps({"dim": int(rho.shape[0]), "entries": to_pairs(rho)})


def state_from_json(text: str, validate: bool = True) -> np.ndarray:
    try:
        doc = json.loads(text)
        dim = int(doc["dim"])
        m = from_pairs(dim, doc["entries"])
    except (ValueError, KeyError, TypeError, LinalgError) as exc:
        raise StateError(f"malformed state document: {exc}") from None
    if dim != 4:
        raise StateError(f"state document has dim={dim}; two-qubit states need dim=4")
    if validate:
        validate_density(m, clip=False)
    return m
