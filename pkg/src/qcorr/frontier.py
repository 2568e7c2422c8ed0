"""Extremal frontiers in the discord-entropy and AMID-discord planes.

Work items (grid points, entropy bins, random samples) are independent; every
item that needs randomness gets its own generator seeded with
``seed ^ item_index`` so results do not depend on how items are scheduled.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import states
from .measures import CLAMP_TOL, CorrelationReport, amid, correlation_report, discord_pair, vn_entropy
from .optimize import nelder_mead
from .states import XStateParams

# Measured (eps, p) pairs with one-sigma uncertainties for the rho_up states
# realised in the photonic experiment.
MEASURED_RHO_UP = (
    ((0.00, 0.01), (0.50, 0.02)),
    ((0.05, 0.01), (0.70, 0.01)),
    ((0.10, 0.01), (0.80, 0.01)),
    ((0.15, 0.01), (0.90, 0.01)),
    ((0.18, 0.01), (0.95, 0.02)),
    ((0.20, 0.01), (0.99, 0.02)),
)

FAMILIES: dict[str, tuple[Callable[..., np.ndarray], tuple[str, ...]]] = {
    "werner": (states.werner, ("eps",)),
    "mems_ree": (states.mems_ree, ("a", "r")),
    "rho_down": (states.rho_down, ("q",)),
    "rho_up": (states.rho_up, ("eps", "p")),
    "bell_phi": (states.bell_phi, ("p",)),
}

PENALTY_KAPPA = 1e3
ENVELOPE_NM_EVALS = 1500
MAX_S_MEMS_REE = math.log2(3)


class FrontierError(ValueError):
    pass


def parallel_map(func, items: Sequence, jobs: int | None = 1) -> list:
    """Ordered map, optionally over a process pool."""
    items = list(items)
    if jobs is None:
        jobs = int(os.environ.get("QCORR_JOBS", "1"))
    if jobs <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items, chunksize=max(1, len(items) // (4 * jobs))))


# --- family sweeps ---------------------------------------------------------

@dataclass
class SweepRecord:
    family: str
    params: dict[str, float]
    report: CorrelationReport

    def state(self) -> np.ndarray:
        return family_state(self.family, self.params)

    def to_dict(self) -> dict:
        return {"family": self.family, "params": dict(self.params), "report": self.report.to_dict()}


def family_state(family: str, params: dict[str, float]) -> np.ndarray:
    try:
        ctor, names = FAMILIES[family]
    except KeyError:
        raise FrontierError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}") from None
    missing = set(names) - set(params)
    extra = set(params) - set(names)
    if missing or extra:
        raise FrontierError(f"family {family} takes parameters {names}, got {sorted(params)}")
    try:
        return ctor(*(float(params[n]) for n in names))
    except states.StateError as exc:
        raise FrontierError(f"{family}: {exc}") from None


def _evaluate_point(item) -> SweepRecord:
    family, params = item
    return SweepRecord(family, dict(params), correlation_report(family_state(family, params)))


def sweep_family(family: str, grid: Iterable, jobs: int | None = 1) -> list[SweepRecord]:
    """One record per grid point, in grid order.

    ``grid`` holds dicts of named parameters, or plain numbers / tuples taken
    in the family's parameter order.
    """
    if family not in FAMILIES:
        raise FrontierError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    names = FAMILIES[family][1]
    items = []
    for point in grid:
        if isinstance(point, dict):
            params = {k: float(v) for k, v in point.items()}
        else:
            values = np.atleast_1d(point).astype(float)
            if len(values) != len(names):
                raise FrontierError(f"family {family} expects {len(names)} values per point")
            params = dict(zip(names, values.tolist()))
        family_state(family, params)  # domain check before any work
        items.append((family, params))
    return parallel_map(_evaluate_point, items, jobs)


# --- closed-form-free family curves in the D-S plane -----------------------

def werner_eps_for_entropy(s_target: float) -> float:
    """Werner weight eps whose state has entropy ``s_target`` (S rises monotonically in eps)."""
    if not 0.0 <= s_target <= 2.0:
        raise FrontierError(f"entropy {s_target} outside [0, 2]")
    if s_target <= 0.0:
        return 0.0
    if s_target >= 2.0:
        return 1.0
    return float(brentq(lambda e: vn_entropy(states.werner(e)) - s_target, 0.0, 1.0, xtol=1e-14))


def mems_ree_r_for_entropy(a: float, s_target: float) -> float | None:
    """r in [0, 1-a] giving entropy ``s_target`` at fixed a, or None if out of reach."""
    def f(r):
        return vn_entropy(states.mems_ree(a, r)) - s_target

    lo, hi = f(0.0), f(1.0 - a)
    if abs(hi) < 1e-12:
        return 1.0 - a
    if abs(lo) < 1e-12:
        return 0.0
    if lo < 0 or hi > 0:
        return None
    return float(brentq(f, 0.0, 1.0 - a, xtol=1e-14))


def _dsym(rho) -> float:
    return max(discord_pair(rho))


def _binary_entropy(x: float) -> float:
    return -sum(v * math.log2(v) for v in (x, 1.0 - x) if v > 0)


def mems_ree_feasible_a(s_target: float) -> tuple[float, float]:
    """Interval of a for which some r in [0, 1-a] reaches entropy ``s_target``.

    At r = 1-a the spectrum is {1-a, a}; at r = 0 it is {(1-a)/2, (1-a)/2, a}.
    Both entropies increase with a on [0, 1/3].
    """
    if not 0.0 <= s_target <= MAX_S_MEMS_REE:
        raise FrontierError(f"rho^R family does not reach entropy {s_target}")
    third = 1.0 / 3.0
    if _binary_entropy(third) <= s_target:
        a_hi = third
    else:
        a_hi = brentq(lambda a: _binary_entropy(a) - s_target, 0.0, third, xtol=1e-15)

    def s_r0(a):
        w = (1.0 - a) / 2.0
        return -2 * w * math.log2(w) - (a * math.log2(a) if a > 0 else 0.0)

    a_lo = 0.0 if s_target <= 1.0 else brentq(lambda a: s_r0(a) - s_target, 0.0, third, xtol=1e-15)
    return float(a_lo), float(a_hi)


def mems_ree_frontier_point(s_target: float, n_grid: int = 33) -> tuple[float, float, float]:
    """Maximal D_sym over the rho^R family at entropy ``s_target``.

    For each a the entropy constraint fixes r; the best a is located on a grid
    over the feasible interval and refined with a bounded scalar search.
    Returns (D_sym, a, r).
    """
    a_lo, a_hi = mems_ree_feasible_a(s_target)

    def neg_d(a):
        r = mems_ree_r_for_entropy(a, s_target)
        return 1.0 if r is None else -_dsym(states.mems_ree(a, r))

    grid = np.linspace(a_lo, a_hi, n_grid)
    vals = np.array([neg_d(a) for a in grid])
    k = int(np.argmin(vals))
    if vals[k] > 0:
        raise FrontierError(f"no feasible rho^R state at entropy {s_target}")
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, n_grid - 1)]
    res = minimize_scalar(neg_d, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    a_best, d_best = (res.x, -res.fun) if res.fun < vals[k] else (grid[k], -vals[k])
    return float(d_best), float(a_best), float(mems_ree_r_for_entropy(a_best, s_target))


# --- MNCMS envelope --------------------------------------------------------

@dataclass(frozen=True)
class EnvelopeConfig:
    bin_axis: str = "entropy"
    bin_count: int = 40
    samples_per_bin: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.bin_axis not in ("entropy", "discord"):
            raise FrontierError(f"bin_axis must be 'entropy' or 'discord', got {self.bin_axis!r}")
        if self.bin_count < 1 or self.samples_per_bin < 1:
            raise FrontierError("bin_count and samples_per_bin must be positive")

    @property
    def edges(self) -> np.ndarray:
        top = 2.0 if self.bin_axis == "entropy" else 1.0
        return np.linspace(0.0, top, self.bin_count + 1)


@dataclass
class EnvelopeBin:
    index: int
    lo: float
    hi: float
    target: float
    present: bool
    S: float = float("nan")
    D_sym: float = float("nan")
    params: XStateParams | None = None
    source: str = ""
    monotone_fill: bool = False


def x_params_from_vector(x) -> XStateParams:
    """Map 6 unconstrained reals to an X-state with real non-negative coherences."""
    w = np.asarray(x[:4], dtype=float) ** 2
    total = w.sum()
    if total <= 0:
        w = np.full(4, 0.25)
    else:
        w = w / total
    c14 = math.sin(x[4]) ** 2 * math.sqrt(w[0] * w[3])
    c23 = math.sin(x[5]) ** 2 * math.sqrt(w[1] * w[2])
    return XStateParams(*(float(v) for v in w), c14, c23)


def x_vector_from_params(params: XStateParams) -> np.ndarray:
    d = np.array([params.rho11, params.rho22, params.rho33, params.rho44], dtype=float)
    d = np.clip(d, 0.0, None)

    def angle(c, bound):
        if bound <= 0:
            return 0.0
        return math.asin(math.sqrt(min(abs(c) / bound, 1.0)))

    return np.array([*np.sqrt(d),
                     angle(params.rho14, math.sqrt(d[0] * d[3])),
                     angle(params.rho23, math.sqrt(d[1] * d[2]))])


def _x_matrix(params: XStateParams) -> np.ndarray:
    m = np.diag([params.rho11, params.rho22, params.rho33, params.rho44]).astype(complex)
    m[0, 3] = m[3, 0] = abs(params.rho14)
    m[1, 2] = m[2, 1] = abs(params.rho23)
    return m


def mix_to_entropy(rho: np.ndarray, s_target: float) -> np.ndarray:
    """Mix ``rho`` with I/4 (to raise S) or |Phi+><Phi+| (to lower S) until S = s_target."""
    s0 = vn_entropy(rho)
    if abs(s0 - s_target) < 1e-12:
        return rho
    other = np.eye(4) / 4 if s0 < s_target else states.bell_phi(0.5)
    t = brentq(lambda t: vn_entropy((1 - t) * rho + t * other) - s_target, 0.0, 1.0, xtol=1e-14)
    return (1 - t) * rho + t * other


def _random_x_params(rng: np.random.Generator) -> XStateParams:
    d = rng.dirichlet(np.ones(4))
    f14, f23 = rng.uniform(0.0, 1.0, size=2)
    return XStateParams(*(float(v) for v in d), f14 * math.sqrt(d[0] * d[3]), f23 * math.sqrt(d[1] * d[2]))


def _family_seeds(s_target: float) -> list[tuple[str, np.ndarray]]:
    seeds = [("werner", states.werner(werner_eps_for_entropy(s_target)))]
    if s_target <= 1.0:
        seeds.append(("rho_down", mix_to_entropy(states.bell_phi(0.5), s_target)))
    if s_target < MAX_S_MEMS_REE - 1e-9:
        try:
            _, a, r = mems_ree_frontier_point(s_target)
            seeds.append(("mems_ree", states.mems_ree(a, r)))
        except FrontierError:
            pass
    return seeds


def _envelope_bin(item) -> EnvelopeBin:
    index, config = item
    edges = config.edges
    lo, hi = float(edges[index]), float(edges[index + 1])
    target = 0.5 * (lo + hi)
    half_width = 0.5 * (hi - lo)
    rng = np.random.default_rng(config.seed ^ index)

    def score(params: XStateParams) -> tuple[float, float, float]:
        rho = _x_matrix(params)
        s = vn_entropy(rho)
        d = _dsym(rho)
        return d - PENALTY_KAPPA * (s - target) ** 2, s, d

    candidates: list[tuple[str, XStateParams]] = []
    for name, rho in _family_seeds(target):
        p = XStateParams.from_matrix(rho)
        candidates.append((name, XStateParams(p.rho11, p.rho22, p.rho33, p.rho44,
                                              abs(p.rho14), abs(p.rho23))))
    for _ in range(config.samples_per_bin):
        rho = mix_to_entropy(_x_matrix(_random_x_params(rng)), target)
        candidates.append(("random", XStateParams.from_matrix(rho)))

    scored = [(score(p), name, p) for name, p in candidates]
    (best_val, _, _), best_name, best_params = max(scored, key=lambda t: t[0][0])

    res = nelder_mead(lambda x: -score(x_params_from_vector(x))[0],
                      x_vector_from_params(best_params), 0.05, max_evals=ENVELOPE_NM_EVALS)
    if -res.fun > best_val:
        best_params = x_params_from_vector(res.x)
        best_name = f"{best_name}+refined"
    _, s, d = score(best_params)
    if abs(s - target) >= half_width:
        return EnvelopeBin(index, lo, hi, target, present=False)
    return EnvelopeBin(index, lo, hi, target, True, s, d, best_params, best_name)


def mncms_envelope(config: EnvelopeConfig, jobs: int | None = 1) -> list[EnvelopeBin]:
    """Maximal symmetrized discord over X-states in each entropy bin.

    Each bin maximizes D_sym - kappa (S - S_center)^2 starting from the best of
    the known families and ``samples_per_bin`` random X-states mixed to the
    bin's entropy, then refines with Nelder-Mead. A final pass makes the
    envelope non-increasing in S; bins lifted by it are flagged.
    """
    if config.bin_axis != "entropy":
        raise FrontierError("mncms_envelope bins along entropy")
    bins = parallel_map(_envelope_bin, [(i, config) for i in range(config.bin_count)], jobs)
    running, donor = -1.0, None
    for b in reversed(bins):
        if not b.present:
            continue
        if b.D_sym < running:
            b.D_sym, b.params, b.monotone_fill = running, donor, True
        else:
            running, donor = b.D_sym, b.params
    return bins


# --- AMID vs discord plane -------------------------------------------------

@dataclass
class AmidBin:
    index: int
    lo: float
    hi: float
    min_A: float = float("nan")
    max_A: float = float("nan")
    argmax: dict[str, float] = field(default_factory=dict)
    lower_points: int = 0
    upper_points: int = 0


def _lower_grid(n: int) -> list[tuple[str, dict[str, float]]]:
    items = [("bell_phi", {"p": float(p)}) for p in np.linspace(0.5, 1.0, n)]
    items += [("werner", {"eps": float(e)}) for e in np.linspace(0.0, 1.0, n)]
    items += [("rho_down", {"q": float(q)}) for q in np.linspace(0.0, 0.5, n)]
    return items


def _upper_grid(n: int) -> list[tuple[str, dict[str, float]]]:
    # p and 1 - p give locally equivalent states (flip both qubits, swap A and B)
    return [("rho_up", {"eps": float(e), "p": float(p)})
            for e in np.linspace(0.0, 1.0, n) for p in np.linspace(0.5, 1.0, n)]


def amid_plane_bounds(config: EnvelopeConfig, jobs: int | None = 1) -> list[AmidBin]:
    """Per-discord-bin lower and upper AMID values.

    The lower curve comes from pure, Werner and rho_down sweeps; the upper one
    from a dense (eps, p) scan of rho_up keeping the largest A per bin.
    """
    if config.bin_axis != "discord":
        raise FrontierError("amid_plane_bounds bins along discord")
    n_low = max(2 * config.bin_count, 8)
    n_up = max(int(math.ceil(math.sqrt(config.bin_count * config.samples_per_bin))), 4)
    lower = parallel_map(_evaluate_point, _lower_grid(n_low), jobs)
    upper = parallel_map(_evaluate_point, _upper_grid(n_up), jobs)
    edges = config.edges
    out = [AmidBin(i, float(edges[i]), float(edges[i + 1])) for i in range(config.bin_count)]

    def locate(d):
        return min(int(np.searchsorted(edges, d, side="right")) - 1, config.bin_count - 1)

    for rec in lower:
        b = out[locate(rec.report.D_sym)]
        b.lower_points += 1
        b.min_A = rec.report.A if b.lower_points == 1 else min(b.min_A, rec.report.A)
    for rec in upper:
        b = out[locate(rec.report.D_sym)]
        b.upper_points += 1
        if b.upper_points == 1 or rec.report.A > b.max_A:
            b.max_A = rec.report.A
            b.argmax = dict(rec.params)
    for b in out:
        if b.lower_points and b.upper_points:
            b.max_A = max(b.max_A, b.min_A)
    return out


def rho_up_p_for_discord(eps: float, d_target: float) -> float | None:
    """p in [1/2, 1] with D_sym(rho_up(eps, p)) = d_target, if reachable."""
    def f(p):
        return _dsym(states.rho_up(eps, p)) - d_target

    top = f(0.5)
    if top < -CLAMP_TOL:
        return None
    if top <= 0:
        return 0.5
    return float(brentq(f, 0.5, 1.0, xtol=1e-13))


def rho_up_upper_at(d_target: float, eps_max: float = 0.6, n_grid: int = 31) -> tuple[float, float, float]:
    """Largest AMID among rho_up states with D_sym = d_target.

    Along the discord level set p is a function of eps; AMID is maximized over
    eps on a grid and then by a bounded scalar search. Returns (A, eps, p).
    """
    def neg_a(e):
        p = rho_up_p_for_discord(e, d_target)
        return 1.0 if p is None else -amid(states.rho_up(e, p))

    grid = np.linspace(0.0, eps_max, n_grid)
    vals = np.array([neg_a(e) for e in grid])
    k = int(np.argmin(vals))
    if vals[k] > 0:
        raise FrontierError(f"no rho_up state reaches D_sym = {d_target}")
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, n_grid - 1)]
    res = minimize_scalar(neg_a, bounds=(lo, hi), method="bounded", options={"xatol": 1e-9})
    e_best, a_best = (res.x, -res.fun) if res.fun < vals[k] else (grid[k], -vals[k])
    return float(a_best), float(e_best), float(rho_up_p_for_discord(e_best, d_target))


# --- random scatter and parameter spread -----------------------------------

def _random_record(item) -> SweepRecord:
    index, seed = item
    rho = states.random_state(seed ^ index)
    return SweepRecord("random", {"index": float(index)}, correlation_report(rho))


def scatter_random(n: int, seed: int, jobs: int | None = 1) -> list[SweepRecord]:
    if n < 1:
        raise FrontierError("n must be at least 1")
    return parallel_map(_random_record, [(i, seed) for i in range(n)], jobs)


def random_state_for(index: int, seed: int) -> np.ndarray:
    """The state behind ``scatter_random(...)[index]``."""
    return states.random_state(seed ^ index)


_DOMAINS = {
    "werner": {"eps": (0.0, 1.0)},
    "mems_ree": {"a": (0.0, 1.0 / 3.0), "r": (0.0, 1.0)},
    "rho_down": {"q": (0.0, 0.5)},
    "rho_up": {"eps": (0.0, 1.0), "p": (0.0, 1.0)},
    "bell_phi": {"p": (0.0, 1.0)},
}


def _clip_params(family: str, params: dict[str, float]) -> dict[str, float]:
    out = {k: float(np.clip(v, *_DOMAINS[family][k])) for k, v in params.items()}
    if family == "mems_ree":
        out["r"] = min(out["r"], 1.0 - out["a"])
    return out


def monte_carlo_spread(family: str, params: dict[str, float], sigmas: dict[str, float],
                       n: int, seed: int) -> dict[str, tuple[float, float]]:
    """Mean and sample standard deviation of S, D_sym and A under Gaussian parameter noise."""
    family_state(family, params)
    if set(sigmas) - set(params):
        raise FrontierError(f"sigmas name unknown parameters {sorted(set(sigmas) - set(params))}")
    if any(s < 0 for s in sigmas.values()):
        raise FrontierError("sigmas must be non-negative")
    if n < 1:
        raise FrontierError("n must be at least 1")
    rng = np.random.default_rng(seed)
    names = list(params)
    samples = {"S": [], "D_sym": [], "A": []}
    for _ in range(n):
        noisy = {k: params[k] + sigmas.get(k, 0.0) * rng.standard_normal() for k in names}
        rep = correlation_report(family_state(family, _clip_params(family, noisy)))
        samples["S"].append(rep.S)
        samples["D_sym"].append(rep.D_sym)
        samples["A"].append(rep.A)
    out = {}
    for key, vals in samples.items():
        arr = np.asarray(vals)
        # identical samples give exactly zero spread (np.std leaves rounding residue)
        if arr.max() == arr.min():
            out[key] = (float(arr[0]), 0.0)
        else:
            out[key] = (float(arr.mean()), float(arr.std(ddof=1)))
    return out
