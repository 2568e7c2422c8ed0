"""Model of the photonic state-engineering pipeline.

A four-qubit polarization-path resource state is prepared, the path qubits
are traced out, and birefringent quartz plates dephase the H/V coherences.
Qubit ordering of the resource state is (path_A, path_B, pol_A, pol_B) with
r -> 0, l -> 1 for paths and H -> 0, V -> 1 for polarizations.

Quartz dephasing model: a plate of dimensionless thickness
C = dn * l_q / (c * tau_coh) multiplies the H/V coherence of the photon it
acts on by exp(-C^2 / 2). This gives no decoherence at C = 0, full
decoherence for C >> 1, and composes as sqrt(C1^2 + C2^2).
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import states
from .linalg import partial_trace, projector

RECIPES = ("up", "down", "werner", "mems_ree")
TARGETS = ("A", "B", "both")


class SourceError(ValueError):
    pass


@dataclass(frozen=True)
class SourceConfig:
    eps: float = 0.0
    p: float = 0.5
    path_phase_gamma: float = 0.0
    quartz_C: float = 0.0
    recipe: str = "up"

    def validate(self) -> None:
        if self.recipe not in RECIPES:
            raise SourceError(f"recipe must be one of {RECIPES}, got {self.recipe!r}")
        for name in ("eps", "p"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise SourceError(f"{name}={v} outside [0, 1]")
        if not math.isfinite(self.path_phase_gamma):
            raise SourceError("path_phase_gamma must be finite")
        if not (math.isfinite(self.quartz_C) and self.quartz_C >= 0):
            raise SourceError(f"quartz_C={self.quartz_C} must be finite and >= 0")
        if self.recipe in ("down", "werner", "mems_ree") and self.p != 0.5:
            raise SourceError(f"recipe {self.recipe!r} runs with HWP1 at 0 degrees (p = 0.5), got p={self.p}")
        if self.recipe == "down" and self.eps != 0.0:
            raise SourceError("recipe 'down' uses only the correlated modes (eps = 0)")
        if self.recipe == "mems_ree" and self.eps > 1.0 / 3.0:
            raise SourceError(f"recipe 'mems_ree' needs eps = a <= 1/3, got {self.eps}")

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "SourceConfig":
        doc = json.loads(text)
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise SourceError(f"unknown SourceConfig fields {sorted(unknown)}")
        return cls(**doc)


def _basis16(path_a: int, path_b: int, pol_a: int, pol_b: int) -> int:
    return (path_a << 3) | (path_b << 2) | (pol_a << 1) | pol_b


def xi_state(eps: float, p: float, gamma: float = 0.0) -> np.ndarray:
    """sqrt(1-eps)|r l>|phi+(p)> + sqrt(eps) e^{i gamma} |l r>|HV> as 16 amplitudes."""
    if not (0.0 <= eps <= 1.0 and 0.0 <= p <= 1.0):
        raise SourceError(f"eps={eps}, p={p} must lie in [0, 1]")
    psi = np.zeros(16, dtype=complex)
    w = math.sqrt(1.0 - eps)
    psi[_basis16(0, 1, 0, 0)] = w * math.sqrt(p)
    psi[_basis16(0, 1, 1, 1)] = w * math.sqrt(1.0 - p)
    psi[_basis16(1, 0, 0, 1)] = math.sqrt(eps) * complex(math.cos(gamma), math.sin(gamma))
    return psi


def trace_path(xi: np.ndarray) -> np.ndarray:
    """Polarization state left after tracing out both path qubits."""
    xi = np.asarray(xi, dtype=complex)
    if xi.shape != (16,) or abs(np.vdot(xi, xi).real - 1.0) > 1e-12:
        raise SourceError("resource state must be 16 unit-norm amplitudes")
    return partial_trace(projector(xi), "pol")


def coherence_factor(C: float) -> float:
    return math.exp(-0.5 * C * C)


def q_of_C(C: float) -> float:
    """Phase-flip weight q of rho_down produced from |Phi+> by a plate of strength C."""
    return 0.5 * (1.0 - coherence_factor(C))


def C_of_q(q: float) -> float:
    if not 0.0 <= q < 0.5:
        raise SourceError(f"q={q} must lie in [0, 0.5) to invert")
    return math.sqrt(-2.0 * math.log(1.0 - 2.0 * q))


def dephase(rho, C: float, target: str = "A") -> np.ndarray:
    """Damp the H/V coherences of the targeted photon(s) by exp(-C^2/2) each."""
    if not (math.isfinite(C) and C >= 0):
        raise SourceError(f"C={C} must be finite and >= 0")
    if target not in TARGETS:
        raise SourceError(f"target must be one of {TARGETS}, got {target!r}")
    rho = np.array(rho, dtype=complex)
    g = coherence_factor(C)
    idx = np.arange(4)
    bit_a, bit_b = idx >> 1, idx & 1
    flips_a = (bit_a[:, None] != bit_a[None, :]).astype(int)
    flips_b = (bit_b[:, None] != bit_b[None, :]).astype(int)
    power = {"A": flips_a, "B": flips_b, "both": flips_a + flips_b}[target]
    return rho * g ** power


_PLUS_PLUS = projector(np.full(4, 0.5, dtype=complex))


def engineer(config: SourceConfig) -> np.ndarray:
    """Run one preparation recipe and return the two-qubit polarization state.

    ``up``       trace over the path of the resource state (eps, p).
    ``down``     |Phi+> on the correlated modes, one plate of strength C on photon A.
    ``werner``   correlated modes carry |Phi+>, the other mode pair |++> dephased by
                 plates of strength C on both photons; the path trace mixes them with
                 weights 1-eps and eps.
    ``mems_ree`` the ``up`` recipe at p = 1/2 followed by a plate of strength C on
                 photon A; a = eps and r = (1 - a) exp(-C^2/2).
    """
    config.validate()
    if config.recipe == "up":
        rho = trace_path(xi_state(config.eps, config.p, config.path_phase_gamma))
    elif config.recipe == "down":
        rho = dephase(states.bell_phi(0.5), config.quartz_C, "A")
    elif config.recipe == "werner":
        noise = dephase(_PLUS_PLUS, config.quartz_C, "both")
        rho = (1 - config.eps) * states.bell_phi(0.5) + config.eps * noise
    else:
        up = trace_path(xi_state(config.eps, 0.5, config.path_phase_gamma))
        rho = dephase(up, config.quartz_C, "A")
    return states.validate_density(rho)


def expected_state(config: SourceConfig) -> np.ndarray:
    """The family constructor a recipe is meant to realise (``werner`` assumes C >> 1)."""
    config.validate()
    if config.recipe == "up":
        return states.rho_up(config.eps, config.p)
    if config.recipe == "down":
        return states.rho_down(q_of_C(config.quartz_C))
    if config.recipe == "werner":
        return states.werner(config.eps)
    a = config.eps
    return states.mems_ree(a, (1 - a) * coherence_factor(config.quartz_C))
