"""Entropic correlation measures of two-qubit states.

All quantities are in bits. Optimizations run over rank-1 projective
measurements parameterized by Bloch angles (theta, phi); the measurement
vector is (cos(theta/2), e^{i phi} sin(theta/2)).

The objectives are evaluated through the Pauli (Bloch) decomposition

    rho = 1/4 (I + a.sigma x I + I x b.sigma + sum_ij T_ij sigma_i x sigma_j),

which turns every post-measurement quantity into a few dot products.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .linalg import PAULIS, eigvalsh, kron, partial_trace
from .optimize import FTOL, MAX_EVALS, N_STARTS, grid_then_refine
from .states import validate_density

EIG_CUTOFF = 1e-12
PROB_CUTOFF = 1e-12
CLAMP_TOL = 1e-9

GRID_1Q = 64
GRID_2Q = 16

SIDES = ("A", "B")


class MeasureError(ArithmeticError):
    """Raised when a measure comes out negative beyond float noise."""


def _clamp(value: float, name: str) -> float:
    if value < 0:
        if value < -CLAMP_TOL:
            raise MeasureError(f"{name} = {value:.3e} is negative beyond tolerance")
        return 0.0
    return float(value)


# --- entropies -------------------------------------------------------------

def entropy_bits(probs) -> float:
    """Shannon entropy of a probability vector; entries <= 1e-12 contribute 0."""
    total = 0.0
    for p in np.ravel(probs):
        if p > EIG_CUTOFF:
            total -= p * math.log2(p)
    return total


def vn_entropy(rho) -> float:
    """Von Neumann entropy -Tr[rho log2 rho] of a one- or two-qubit state."""
    rho = validate_density(rho)
    return float(max(entropy_bits(eigvalsh(rho)), 0.0))


def mutual_information(rho) -> float:
    rho = validate_density(rho)
    s_a = vn_entropy(partial_trace(rho, "A"))
    s_b = vn_entropy(partial_trace(rho, "B"))
    return _clamp(s_a + s_b - vn_entropy(rho), "I")


def _h_bloch(r: float) -> float:
    """Entropy of a qubit whose Bloch vector has length r."""
    if r >= 1.0:
        return 0.0
    lp = 0.5 * (1.0 + r)
    lm = 0.5 * (1.0 - r)
    out = -lp * math.log2(lp)
    if lm > EIG_CUTOFF:
        out -= lm * math.log2(lm)
    return out


def _h_bloch_vec(r: np.ndarray) -> np.ndarray:
    r = np.clip(r, 0.0, 1.0)
    lp = 0.5 * (1.0 + r)
    lm = 0.5 * (1.0 - r)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -lp * np.log2(lp)
        out -= np.where(lm > EIG_CUTOFF, lm * np.log2(np.where(lm > 0, lm, 1.0)), 0.0)
    return out


def _xlogx_vec(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p > PROB_CUTOFF, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)


# --- measurement bases -----------------------------------------------------

@dataclass(frozen=True)
class MeasurementBasis:
    theta: float
    phi: float

    @classmethod
    def canonical(cls, theta: float, phi: float) -> "MeasurementBasis":
        """Fold arbitrary angles into theta in [0, pi], phi in [0, 2 pi)."""
        theta = math.fmod(theta, 2 * math.pi)
        if theta < 0:
            theta += 2 * math.pi
        if theta > math.pi:
            theta = 2 * math.pi - theta
            phi += math.pi
        phi = math.fmod(phi, 2 * math.pi)
        if phi < 0:
            phi += 2 * math.pi
        if phi >= 2 * math.pi:
            phi = 0.0
        return cls(theta, phi)

    @property
    def vector(self) -> np.ndarray:
        return np.array([math.cos(self.theta / 2),
                         complex(math.cos(self.phi), math.sin(self.phi)) * math.sin(self.theta / 2)])

    @property
    def bloch(self) -> np.ndarray:
        return _bloch(self.theta, self.phi)

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        v = self.vector
        p0 = np.outer(v, np.conj(v))
        return p0, np.eye(2) - p0


@dataclass(frozen=True)
class BiLocalBasis:
    basisA: MeasurementBasis
    basisB: MeasurementBasis

    def projectors(self) -> list[np.ndarray]:
        """Omega_kl = Pi_{A,k} x Pi_{B,l}, ordered (00, 01, 10, 11)."""
        pa, pb = self.basisA.projectors(), self.basisB.projectors()
        return [kron(x, y) for x in pa for y in pb]


def _bloch(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def bloch_decomposition(rho) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Local Bloch vectors a, b and correlation matrix T of a two-qubit state."""
    rho = np.asarray(rho, dtype=complex)
    a = np.array([np.trace(rho @ kron(s, PAULIS[0])).real for s in PAULIS[1:]])
    b = np.array([np.trace(rho @ kron(PAULIS[0], s)).real for s in PAULIS[1:]])
    t = np.array([[np.trace(rho @ kron(si, sj)).real for sj in PAULIS[1:]] for si in PAULIS[1:]])
    return a, b, t


def _sphere_grid(n: int) -> np.ndarray:
    theta = np.linspace(0.0, math.pi, n)
    phi = np.arange(n) * (2 * math.pi / n)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    return np.column_stack([tt.ravel(), pp.ravel()])


_GRID_1Q_ANGLES = _sphere_grid(GRID_1Q)
_STEP_1Q = (math.pi / (GRID_1Q - 1), 2 * math.pi / GRID_1Q)
_GRID_2Q_SIDE = _sphere_grid(GRID_2Q)
_STEP_2Q = (math.pi / (GRID_2Q - 1), 2 * math.pi / GRID_2Q) * 2


def _axis_key(theta: float, phi: float) -> tuple:
    """Identifies the projective measurement along +-n (poles collapse, n ~ -n)."""
    v = np.round(_bloch(theta, phi), 9) + 0.0
    for c in v:
        if c != 0:
            if c < 0:
                v = -v + 0.0
            break
    return tuple(v.tolist())


def _key_1q(x) -> tuple:
    return _axis_key(x[0], x[1])


def _key_2q(x) -> tuple:
    return _axis_key(x[0], x[1]) + _axis_key(x[2], x[3])


# --- one-sided measurement -------------------------------------------------

def _oriented(a, b, t, measured: str):
    """Return (unmeasured vector, measured vector, T oriented as [unmeasured, measured])."""
    if measured == "B":
        return a, b, t
    if measured == "A":
        return b, a, t.T
    raise ValueError(f"measured side must be 'A' or 'B', got {measured!r}")


def _cond_entropy_grid(u, m, t, n_vecs: np.ndarray) -> np.ndarray:
    mn = n_vecs @ m
    tn = n_vecs @ t.T
    out = np.zeros(len(n_vecs))
    for sgn in (1.0, -1.0):
        w = 1.0 + sgn * mn
        p = 0.5 * w
        r = np.linalg.norm(u + sgn * tn, axis=1) / np.where(w > 0, w, 1.0)
        out += np.where(p > PROB_CUTOFF, p * _h_bloch_vec(r), 0.0)
    return out


def _cond_entropy_scalar(u, m, t):
    u0, u1, u2 = (float(x) for x in u)
    m0, m1, m2 = (float(x) for x in m)
    t00, t01, t02, t10, t11, t12, t20, t21, t22 = (float(x) for x in np.ravel(t))
    sin, cos, sqrt = math.sin, math.cos, math.sqrt

    def f(x):
        th, ph = x[0], x[1]
        st = sin(th)
        n0, n1, n2 = st * cos(ph), st * sin(ph), cos(th)
        mn = m0 * n0 + m1 * n1 + m2 * n2
        v0 = t00 * n0 + t01 * n1 + t02 * n2
        v1 = t10 * n0 + t11 * n1 + t12 * n2
        v2 = t20 * n0 + t21 * n1 + t22 * n2
        total = 0.0
        for sgn in (1.0, -1.0):
            w = 1.0 + sgn * mn
            p = 0.5 * w
            if p > PROB_CUTOFF:
                r = sqrt((u0 + sgn * v0) ** 2 + (u1 + sgn * v1) ** 2 + (u2 + sgn * v2) ** 2) / w
                total += p * _h_bloch(r)
        return total

    return f


def conditional_entropy_post_meas(rho, basis: MeasurementBasis, measured: str = "B") -> float:
    """Average entropy of the unmeasured qubit after measuring ``measured`` in ``basis``."""
    rho = validate_density(rho)
    u, m, t = _oriented(*bloch_decomposition(rho), measured)
    return float(_cond_entropy_grid(u, m, t, basis.bloch[None, :])[0])


@dataclass
class _OneSided:
    h_min: float
    basis: MeasurementBasis
    nfev: int
    converged: bool


def _minimize_cond_entropy(rho, measured: str) -> _OneSided:
    u, m, t = _oriented(*bloch_decomposition(rho), measured)
    grid_vals = _cond_entropy_grid(u, m, t, _bloch(_GRID_1Q_ANGLES[:, 0], _GRID_1Q_ANGLES[:, 1]))
    res = grid_then_refine(_cond_entropy_scalar(u, m, t), _GRID_1Q_ANGLES, grid_vals,
                           _STEP_1Q, n_starts=N_STARTS, ftol=FTOL, max_evals=MAX_EVALS, key=_key_1q)
    return _OneSided(max(float(res.fun), 0.0), MeasurementBasis.canonical(*res.x), res.nfev, res.converged)


def _reduced_entropies(rho):
    return (vn_entropy(partial_trace(rho, "A")), vn_entropy(partial_trace(rho, "B")),
            vn_entropy(rho))


def classical_correlation(rho, measured: str = "B") -> tuple[float, MeasurementBasis]:
    """One-way classical correlation, maximized over projective measurements on ``measured``.

    Measuring B yields J_left = S(rho_A) - min H(A|B); measuring A mirrors it.
    """
    rho = validate_density(rho)
    s_a, s_b, _ = _reduced_entropies(rho)
    opt = _minimize_cond_entropy(rho, measured)
    s_unmeasured = s_a if measured == "B" else s_b
    return _clamp(s_unmeasured - opt.h_min, "J"), opt.basis


def discord(rho, measured: str = "B") -> tuple[float, MeasurementBasis]:
    """Quantum discord with the measurement on ``measured`` ("B" gives D_left)."""
    rho = validate_density(rho)
    mi = mutual_information(rho)
    j, basis = classical_correlation(rho, measured)
    return _clamp(mi - j, "D"), basis


def discord_pair(rho) -> tuple[float, float]:
    """(D_left, D_right) with a single entropy evaluation shared by both sides."""
    rho = validate_density(rho)
    s_a, s_b, s = _reduced_entropies(rho)
    mi = _clamp(s_a + s_b - s, "I")
    d_left = _clamp(mi - _clamp(s_a - _minimize_cond_entropy(rho, "B").h_min, "J_left"), "D_left")
    d_right = _clamp(mi - _clamp(s_b - _minimize_cond_entropy(rho, "A").h_min, "J_right"), "D_right")
    return d_left, d_right


def discord_sym(rho) -> float:
    """Symmetrized discord max(D_left, D_right)."""
    return max(discord_pair(rho))


# --- bi-local measurement --------------------------------------------------

def _classical_mi_grid(a, b, t, m_vecs, n_vecs) -> np.ndarray:
    am = m_vecs @ a
    bn = n_vecs @ b
    mtn = m_vecs @ t @ n_vecs.T
    pa0 = 0.5 * (1 + am)[:, None]
    pb0 = 0.5 * (1 + bn)[None, :]
    h_marg = -(_xlogx_vec(pa0) + _xlogx_vec(1 - pa0)) - (_xlogx_vec(pb0) + _xlogx_vec(1 - pb0))
    h_joint = 0.0
    for k in (1.0, -1.0):
        for l in (1.0, -1.0):
            p = 0.25 * (1 + k * am[:, None] + l * bn[None, :] + k * l * mtn)
            h_joint = h_joint - _xlogx_vec(p)
    return h_marg - h_joint


def _classical_mi_scalar(a, b, t):
    a0, a1, a2 = (float(x) for x in a)
    b0, b1, b2 = (float(x) for x in b)
    t00, t01, t02, t10, t11, t12, t20, t21, t22 = (float(x) for x in np.ravel(t))
    sin, cos, log2 = math.sin, math.cos, math.log2

    def xlogx(p):
        return p * log2(p) if p > PROB_CUTOFF else 0.0

    def f(x):
        sa = sin(x[0])
        m0, m1, m2 = sa * cos(x[1]), sa * sin(x[1]), cos(x[0])
        sb = sin(x[2])
        n0, n1, n2 = sb * cos(x[3]), sb * sin(x[3]), cos(x[2])
        am = a0 * m0 + a1 * m1 + a2 * m2
        bn = b0 * n0 + b1 * n1 + b2 * n2
        mtn = (m0 * (t00 * n0 + t01 * n1 + t02 * n2) + m1 * (t10 * n0 + t11 * n1 + t12 * n2)
               + m2 * (t20 * n0 + t21 * n1 + t22 * n2))
        hj = 0.0
        for k in (1.0, -1.0):
            for l in (1.0, -1.0):
                hj -= xlogx(0.25 * (1 + k * am + l * bn + k * l * mtn))
        pa, pb = 0.5 * (1 + am), 0.5 * (1 + bn)
        hm = -(xlogx(pa) + xlogx(1 - pa) + xlogx(pb) + xlogx(1 - pb))
        # negated: the driver minimizes
        return hj - hm

    return f


@dataclass
class _BiLocal:
    ic: float
    basis: BiLocalBasis
    nfev: int
    converged: bool


def _maximize_classical_mi(rho) -> _BiLocal:
    a, b, t = bloch_decomposition(rho)
    side = _GRID_2Q_SIDE
    vecs = _bloch(side[:, 0], side[:, 1])
    grid_vals = -_classical_mi_grid(a, b, t, vecs, vecs).ravel()
    ia, ib = np.divmod(np.arange(len(side) ** 2), len(side))
    points = np.column_stack([side[ia], side[ib]])
    res = grid_then_refine(_classical_mi_scalar(a, b, t), points, grid_vals, _STEP_2Q,
                           n_starts=N_STARTS, ftol=FTOL, max_evals=MAX_EVALS, key=_key_2q)
    basis = BiLocalBasis(MeasurementBasis.canonical(res.x[0], res.x[1]),
                         MeasurementBasis.canonical(res.x[2], res.x[3]))
    return _BiLocal(max(-float(res.fun), 0.0), basis, res.nfev, res.converged)


def classical_mutual_info(rho) -> tuple[float, BiLocalBasis]:
    """Mutual information of the outcome table, maximized over bi-local projective measurements."""
    rho = validate_density(rho)
    opt = _maximize_classical_mi(rho)
    return opt.ic, opt.basis


def outcome_table(rho, basis: BiLocalBasis) -> np.ndarray:
    """Joint outcome probabilities p_kl = Tr[Omega_kl rho] as a 2x2 array."""
    return np.array([np.trace(w @ rho).real for w in basis.projectors()]).reshape(2, 2)


def classical_mi_of_table(p) -> float:
    p = np.asarray(p, dtype=float)
    return entropy_bits(p.sum(axis=1)) + entropy_bits(p.sum(axis=0)) - entropy_bits(p)


def amid(rho) -> float:
    rho = validate_density(rho)
    ic, _ = classical_mutual_info(rho)
    return _clamp(mutual_information(rho) - ic, "A")


# --- full report -----------------------------------------------------------

@dataclass
class CorrelationReport:
    S: float
    S_A: float
    S_B: float
    I: float
    J_left: float
    J_right: float
    D_left: float
    D_right: float
    D_sym: float
    I_c: float
    A: float
    basis_left: MeasurementBasis = field(repr=False)
    basis_right: MeasurementBasis = field(repr=False)
    basis_Ic: BiLocalBasis = field(repr=False)
    optimizer_evals: int = 0
    converged: bool = True

    FIELDS = ("S", "S_A", "S_B", "I", "J_left", "J_right", "D_left", "D_right", "D_sym", "I_c", "A")

    def values(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in self.FIELDS}

    def to_dict(self) -> dict:
        out = self.values()
        out["bases"] = {
            "left": asdict(self.basis_left),
            "right": asdict(self.basis_right),
            "I_c": asdict(self.basis_Ic),
        }
        out["optimizer_evals"] = self.optimizer_evals
        out["converged"] = self.converged
        return out


def correlation_report(rho) -> CorrelationReport:
    """Evaluate every measure of ``rho`` with a single optimization per quantity."""
    rho = validate_density(rho)
    s_a, s_b, s = _reduced_entropies(rho)
    mi = _clamp(s_a + s_b - s, "I")
    left = _minimize_cond_entropy(rho, "B")
    right = _minimize_cond_entropy(rho, "A")
    bil = _maximize_classical_mi(rho)
    j_left = _clamp(s_a - left.h_min, "J_left")
    j_right = _clamp(s_b - right.h_min, "J_right")
    d_left = _clamp(mi - j_left, "D_left")
    d_right = _clamp(mi - j_right, "D_right")
    ic = bil.ic
    return CorrelationReport(
        S=s, S_A=s_a, S_B=s_b, I=mi, J_left=j_left, J_right=j_right,
        D_left=d_left, D_right=d_right, D_sym=max(d_left, d_right), I_c=ic,
        A=_clamp(mi - ic, "A"),
        basis_left=left.basis, basis_right=right.basis, basis_Ic=bil.basis,
        optimizer_evals=left.nfev + right.nfev + bil.nfev,
        converged=left.converged and right.converged and bil.converged,
    )
