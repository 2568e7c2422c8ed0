import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qcorr import source, states
from qcorr.linalg import partial_trace
from qcorr.source import SourceConfig, SourceError


class TestResourceState:
    def test_normalized(self):
        psi = source.xi_state(0.3, 0.7, 0.4)
        assert_allclose(np.vdot(psi, psi).real, 1.0)

    def test_path_trace_gives_rho_up(self):
        assert_allclose(source.trace_path(source.xi_state(0.15, 0.9)), states.rho_up(0.15, 0.9), atol=1e-15)

    def test_phase_is_irrelevant_after_trace(self):
        a = source.trace_path(source.xi_state(0.2, 0.6, 0.0))
        b = source.trace_path(source.xi_state(0.2, 0.6, 1.3))
        assert_allclose(a, b, atol=1e-15)

    def test_path_marginal(self):
        psi = source.xi_state(0.25, 0.5)
        path = partial_trace(np.outer(psi, psi.conj()), "path")
        assert_allclose(np.diag(path).real, [0, 0.75, 0.25, 0], atol=1e-15)


class TestDephasing:
    def test_limits(self):
        assert source.q_of_C(0.0) == 0.0
        assert abs(source.q_of_C(10.0) - 0.5) < 1e-3

    def test_inverse(self):
        for q in (0.0, 0.1, 0.3, 0.49):
            assert_allclose(source.q_of_C(source.C_of_q(q)), q, atol=1e-12)

    def test_composition(self):
        rho = states.bell_phi(0.5)
        twice = source.dephase(source.dephase(rho, 0.6, "A"), 0.8, "A")
        assert_allclose(twice, source.dephase(rho, 1.0, "A"), atol=1e-15)

    def test_populations_untouched(self):
        rho = states.random_state(2)
        out = source.dephase(rho, 2.0, "both")
        assert_allclose(np.diag(out), np.diag(rho))
        assert_allclose(out[0, 3], rho[0, 3] * math.exp(-4.0))

    def test_bad_target(self):
        with pytest.raises(SourceError):
            source.dephase(np.eye(4) / 4, 1.0, "C")


class TestRecipes:
    def test_down(self):
        cfg = SourceConfig(quartz_C=1.1, recipe="down")
        assert_allclose(source.engineer(cfg), states.rho_down(source.q_of_C(1.1)), atol=1e-15)

    def test_mems_ree(self):
        cfg = SourceConfig(eps=0.2, quartz_C=0.7, recipe="mems_ree")
        assert_allclose(source.engineer(cfg), states.mems_ree(0.2, 0.8 * math.exp(-0.245)), atol=1e-15)

    def test_werner_needs_large_C(self):
        far = source.engineer(SourceConfig(eps=0.4, quartz_C=0.0, recipe="werner"))
        near = source.engineer(SourceConfig(eps=0.4, quartz_C=12.0, recipe="werner"))
        assert np.abs(far - states.werner(0.4)).max() > 0.05
        assert_allclose(near, states.werner(0.4), atol=1e-12)

    @pytest.mark.parametrize("cfg", [
        SourceConfig(eps=1.2), SourceConfig(recipe="mixed"), SourceConfig(recipe="down", eps=0.1),
        SourceConfig(recipe="werner", p=0.7), SourceConfig(recipe="mems_ree", eps=0.5),
        SourceConfig(quartz_C=-1.0), SourceConfig(quartz_C=math.inf),
    ])
    def test_invalid(self, cfg):
        with pytest.raises(SourceError):
            source.engineer(cfg)

    def test_json_roundtrip(self):
        cfg = SourceConfig(0.1, 0.8, 0.3, 0.0, "up")
        assert SourceConfig.from_json(cfg.to_json()) == cfg
        with pytest.raises(SourceError):
            SourceConfig.from_json(json.dumps({"eps": 0.1, "theta": 2}))
