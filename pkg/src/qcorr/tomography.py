"""Simulated two-photon polarization tomography and state reconstruction.

Each photon is analysed in one of the six Pauli eigenstates H, V, D, A, R, L,
giving 36 product projectors. Counts are Poisson distributed.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import PAULIS, dagger, hermitian_defect, hermitian_eig, kron, psd_sqrt, to_pairs
from .optimize import nelder_mead
from .states import validate_density

MLE_MAX_EVALS = 100_000

_S = 1 / math.sqrt(2)
SINGLE_KETS = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([_S, _S], dtype=complex),
    "A": np.array([_S, -_S], dtype=complex),
    "R": np.array([_S, 1j * _S], dtype=complex),
    "L": np.array([_S, -1j * _S], dtype=complex),
}
LETTERS = "HVDARL"
SETTINGS = tuple(a + b for a, b in itertools.product(LETTERS, repeat=2))
# Pauli index -> (+1 eigenstate, -1 eigenstate)
_PAIRS = {1: ("D", "A"), 2: ("R", "L"), 3: ("H", "V")}

PROJECTORS = np.array([
    kron(np.outer(SINGLE_KETS[s[0]], SINGLE_KETS[s[0]].conj()),
         np.outer(SINGLE_KETS[s[1]], SINGLE_KETS[s[1]].conj()))
    for s in SETTINGS
])


class TomographyError(ValueError):
    pass


@dataclass
class TomographyDataset:
    counts: dict[str, float]
    n_nominal: float
    seed: int | None = None

    def __post_init__(self):
        missing = set(SETTINGS) - set(self.counts)
        extra = set(self.counts) - set(SETTINGS)
        if missing or extra:
            raise TomographyError(f"dataset needs exactly the 36 settings; missing {sorted(missing)}, "
                                  f"unexpected {sorted(extra)}")
        if any(v < 0 or not math.isfinite(v) for v in self.counts.values()):
            raise TomographyError("counts must be finite and non-negative")

    def vector(self) -> np.ndarray:
        return np.array([self.counts[s] for s in SETTINGS], dtype=float)

    def to_json(self) -> str:
        counts = {s: int(self.counts[s]) if float(self.counts[s]).is_integer() else self.counts[s]
                  for s in SETTINGS}
        return json.dumps({"n_nominal": int(self.n_nominal) if float(self.n_nominal).is_integer()
                           else self.n_nominal, "seed": self.seed, "counts": counts})

    @classmethod
    def from_json(cls, text: str) -> "TomographyDataset":
        try:
            doc = json.loads(text)
            return cls({k: float(v) for k, v in doc["counts"].items()}, float(doc["n_nominal"]),
                       doc.get("seed"))
        except (ValueError, KeyError, TypeError, AttributeError) as exc:
            raise TomographyError(f"malformed tomography dataset: {exc}") from None


@dataclass
class ReconstructionResult:
    rho_linear: np.ndarray
    rho_physical: np.ndarray
    log_likelihood: float
    initial_log_likelihood: float
    nfev: int
    converged: bool
    fidelity_vs_reference: float | None = field(default=None)


def outcome_probabilities(rho) -> np.ndarray:
    """Tr(P_s rho) for the 36 settings in ``SETTINGS`` order."""
    return np.real(np.einsum("sij,ji->s", PROJECTORS, rho))


def expected_counts(rho, n: float) -> TomographyDataset:
    """Noise-free dataset with mean counts n Tr(P_s rho)."""
    rho = validate_density(rho)
    return TomographyDataset(dict(zip(SETTINGS, (n * outcome_probabilities(rho)).tolist())), n)


def simulate_counts(rho, n: float, seed: int) -> TomographyDataset:
    if not n > 0:
        raise TomographyError(f"mean counts n={n} must be positive")
    rho = validate_density(rho)
    rng = np.random.default_rng(seed)
    lam = np.clip(n * outcome_probabilities(rho), 0.0, None)
    counts = rng.poisson(lam)
    return TomographyDataset({s: int(c) for s, c in zip(SETTINGS, counts)}, n, seed)


def pauli_expectations(data: TomographyDataset) -> np.ndarray:
    """4x4 table of <sigma_i x sigma_j> estimated from count contrasts.

    For a pair of analysis bases the four outcomes are normalised by their
    sum; single-photon terms are averaged over the three partner bases.
    """
    c = data.counts
    e = np.zeros((4, 4))
    e[0, 0] = 1.0
    marg_a = {i: [] for i in (1, 2, 3)}
    marg_b = {j: [] for j in (1, 2, 3)}
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            (ap, am), (bp, bm) = _PAIRS[i], _PAIRS[j]
            npp, npm, nmp, nmm = c[ap + bp], c[ap + bm], c[am + bp], c[am + bm]
            total = npp + npm + nmp + nmm
            if total <= 0:
                e[i, j] = 0.0
                marg_a[i].append(0.0)
                marg_b[j].append(0.0)
                continue
            e[i, j] = (npp - npm - nmp + nmm) / total
            marg_a[i].append((npp + npm - nmp - nmm) / total)
            marg_b[j].append((npp - npm + nmp - nmm) / total)
    for k in (1, 2, 3):
        e[k, 0] = float(np.mean(marg_a[k]))
        e[0, k] = float(np.mean(marg_b[k]))
    return e


def linear_inversion(data: TomographyDataset) -> np.ndarray:
    """rho = 1/4 sum_ij <sigma_i x sigma_j> sigma_i x sigma_j (may be unphysical)."""
    e = pauli_expectations(data)
    rho = sum(e[i, j] * kron(PAULIS[i], PAULIS[j]) for i in range(4) for j in range(4)) / 4
    return 0.5 * (rho + dagger(rho))


def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-and-threshold)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, v.size + 1)
    cond = u + (1.0 - css) / k > 0
    rho_idx = int(np.nonzero(cond)[0][-1])
    shift = (1.0 - css[rho_idx]) / (rho_idx + 1)
    return np.maximum(v + shift, 0.0)


def project_physical(m) -> np.ndarray:
    """Nearest density matrix in Frobenius norm to a Hermitian unit-trace matrix."""
    m = np.asarray(m, dtype=complex)
    if hermitian_defect(m) > 1e-10:
        raise TomographyError("project_physical needs a Hermitian input")
    lam, vec = hermitian_eig(m)
    mu = project_simplex(lam)
    rho = (vec * mu) @ dagger(vec)
    return 0.5 * (rho + dagger(rho))


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    rho = validate_density(rho)
    sigma = validate_density(sigma)
    sr = psd_sqrt(rho)
    inner = sr @ sigma @ sr
    inner = 0.5 * (inner + dagger(inner))
    lam = np.clip(hermitian_eig(inner).eigenvalues, 0.0, None)
    return float(min(max(np.sum(np.sqrt(lam)) ** 2, 0.0), 1.0))


# --- maximum likelihood ----------------------------------------------------

_STRICT = np.tril_indices(4, -1)


def t_to_rho(x) -> np.ndarray:
    """rho = T^dagger T / Tr(T^dagger T) for lower-triangular T from 16 reals."""
    t = np.zeros((4, 4), dtype=complex)
    t[np.diag_indices(4)] = x[:4]
    t[_STRICT] = np.asarray(x[4:10]) + 1j * np.asarray(x[10:16])
    m = dagger(t) @ t
    return m / np.trace(m).real


def rho_to_t(rho) -> np.ndarray:
    """16 reals whose T^dagger T reproduces a full-rank ``rho``."""
    j = np.eye(4)[::-1]
    lower = np.linalg.cholesky(j @ rho @ j)
    t = j @ dagger(lower) @ j
    return np.concatenate([np.real(np.diag(t)), t[_STRICT].real, t[_STRICT].imag])


def _rates(rho, data: TomographyDataset) -> tuple[np.ndarray, np.ndarray]:
    n = data.vector()
    # The 36 probabilities sum to 9; the best-fit rate is sum(n) / 9.
    return n, (n.sum() / 9.0) * outcome_probabilities(rho)


def deviance(rho, data: TomographyDataset) -> float:
    """Poisson deviance sum n log(n / lam) - (n - lam), computed term by term."""
    n, lam = _rates(rho, data)
    mask = n > 0
    if np.any(lam[mask] <= 0):
        return math.inf
    return float(np.sum(n[mask] * np.log(n[mask] / lam[mask])) + np.sum(lam - n))


def log_likelihood(rho, data: TomographyDataset) -> float:
    """Poisson log-likelihood with the overall count rate profiled out."""
    n, lam = _rates(rho, data)
    mask = n > 0
    if np.any(lam[mask] <= 0):
        return -math.inf
    return float(np.sum(n[mask] * np.log(lam[mask])) - lam.sum())


def mle_reconstruct(data: TomographyDataset, reference=None, max_evals: int = MLE_MAX_EVALS,
                    regularization: float = 1e-3) -> ReconstructionResult:
    """Maximum-likelihood state from counts.

    Starts from the linear-inversion estimate projected onto the physical
    states (mixed with ``regularization`` of I/4 so that T exists), then
    maximizes the Poisson likelihood with Nelder-Mead over T.
    """
    rho_lin = linear_inversion(data)
    rho0 = (1 - regularization) * project_physical(rho_lin) + regularization * np.eye(4) / 4
    x0 = rho_to_t(rho0)
    ll0 = log_likelihood(t_to_rho(x0), data)
    scale = max(float(np.max(np.abs(x0))), 1e-3)
    # Minimizing the deviance keeps objective values O(1) instead of O(total counts).
    res = nelder_mead(lambda x: deviance(t_to_rho(x), data), x0, 0.02 * scale,
                      ftol=1e-10, max_evals=max_evals)
    rho_phys = validate_density(t_to_rho(res.x))
    fid = None
    if reference is not None:
        fid = fidelity(rho_phys, reference)
    return ReconstructionResult(rho_lin, rho_phys, log_likelihood(rho_phys, data), ll0,
                                res.nfev, res.converged, fid)


def reconstruction_to_dict(result: ReconstructionResult) -> dict:
    out = {
        "rho_linear": {"dim": 4, "entries": to_pairs(result.rho_linear)},
        "rho_physical": {"dim": 4, "entries": to_pairs(result.rho_physical)},
        "log_likelihood": result.log_likelihood,
        "initial_log_likelihood": result.initial_log_likelihood,
        "optimizer_evals": result.nfev,
        "converged": result.converged,
    }
    if result.fidelity_vs_reference is not None:
        out["fidelity_vs_reference"] = result.fidelity_vs_reference
    return out
