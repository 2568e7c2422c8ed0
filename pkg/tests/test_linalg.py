import numpy as np
import pytest
from numpy.testing import assert_allclose

from qcorr.linalg import (
    LinalgError, PAULIS, dagger, eigvalsh, from_pairs, hermitian_eig, kron, partial_trace,
    projector, psd_sqrt, to_pairs,
)


def random_hermitian(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (g + g.conj().T)


class TestHermitianEig:
    @pytest.mark.parametrize("n", [2, 4, 16])
    def test_matches_lapack(self, n):
        rng = np.random.default_rng(n)
        for _ in range(5):
            a = random_hermitian(rng, n)
            lam, vec = hermitian_eig(a)
            assert_allclose(lam, np.linalg.eigvalsh(a)[::-1], atol=1e-12)
            assert_allclose(vec @ np.diag(lam) @ dagger(vec), a, atol=1e-12)
            assert_allclose(dagger(vec) @ vec, np.eye(n), atol=1e-12)

    def test_sorted_descending(self):
        lam = hermitian_eig(np.diag([0.1, 0.7, 0.2, 0.0])).eigenvalues
        assert_allclose(lam, [0.7, 0.2, 0.1, 0.0])

    def test_degenerate(self):
        lam, vec = hermitian_eig(np.eye(4) / 4)
        assert_allclose(lam, np.full(4, 0.25))
        assert_allclose(dagger(vec) @ vec, np.eye(4), atol=1e-14)

    def test_rejects_non_hermitian(self):
        a = np.zeros((4, 4), dtype=complex)
        a[0, 1] = 1.0
        with pytest.raises(LinalgError, match="Hermitian"):
            hermitian_eig(a)

    @pytest.mark.parametrize("shape", [(3, 3), (4, 2), (8, 8)])
    def test_rejects_bad_shape(self, shape):
        with pytest.raises(LinalgError):
            hermitian_eig(np.zeros(shape))

    def test_rejects_nan(self):
        a = np.eye(2)
        a[0, 0] = np.nan
        with pytest.raises(LinalgError, match="non-finite"):
            hermitian_eig(a)

    def test_eigvalsh_and_sqrt(self):
        rng = np.random.default_rng(1)
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        m = g @ g.conj().T
        assert_allclose(eigvalsh(m), np.sort(np.linalg.eigvalsh(m))[::-1], atol=1e-12)
        s = psd_sqrt(m)
        assert_allclose(s @ s, m, atol=1e-11)


class TestKronAndTrace:
    def test_kron_matches_numpy(self):
        assert_allclose(kron(PAULIS[1], PAULIS[2]), np.kron(PAULIS[1], PAULIS[2]))

    def test_kron_size_limit(self):
        with pytest.raises(LinalgError, match="exceeds 16"):
            kron(np.eye(16), np.eye(2))

    def test_partial_trace_of_product(self):
        a = np.array([[0.7, 0.1j], [-0.1j, 0.3]])
        b = np.array([[0.4, 0.2], [0.2, 0.6]])
        rho = kron(a, b)
        assert_allclose(partial_trace(rho, "A"), a, atol=1e-15)
        assert_allclose(partial_trace(rho, "B"), b, atol=1e-15)

    def test_sixteen_dim_selectors(self):
        mats = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0]), np.diag([0.25, 0.75]), np.eye(2) / 2]
        rho = kron(kron(mats[0], mats[1]), kron(mats[2], mats[3]))
        assert_allclose(partial_trace(rho, "pol"), kron(mats[2], mats[3]))
        assert_allclose(partial_trace(rho, "path"), kron(mats[0], mats[1]))
        assert_allclose(partial_trace(rho, "pol_A"), mats[2])
        assert_allclose(partial_trace(rho, "path_B"), mats[1])
        assert_allclose(partial_trace(rho, (0, 3)), kron(mats[0], mats[3]))

    def test_entangled_marginal_is_mixed(self):
        phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
        assert_allclose(partial_trace(projector(phi), "A"), np.eye(2) / 2, atol=1e-15)

    def test_bad_selector(self):
        with pytest.raises(LinalgError):
            partial_trace(np.eye(4) / 4, "pol")
        with pytest.raises(LinalgError):
            partial_trace(np.eye(16) / 16, (0, 0))


def test_pairs_roundtrip():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert_allclose(from_pairs(4, to_pairs(m)), m)
    with pytest.raises(LinalgError):
        from_pairs(4, [[1, 0]])
