"""Brute-force reference implementations used only by the test-suite.

Everything here works on explicit projector matrices and numpy's LAPACK
eigensolver, so it shares no code path with the Bloch-vector objectives and
Nelder-Mead refinement in ``qcorr.measures``.
"""
import numpy as np


def _entropy_rows(evals):
    evals = np.clip(evals, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(evals > 1e-15, -evals * np.log2(np.where(evals > 0, evals, 1)), 0.0)
    return terms.sum(axis=-1)


def vn_entropy(rho):
    return float(_entropy_rows(np.linalg.eigvalsh(rho)))


def ptrace(rho, keep):
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    return np.einsum("ikjk->ij", r) if keep == "A" else np.einsum("kikj->ij", r)


def mutual_information(rho):
    return vn_entropy(ptrace(rho, "A")) + vn_entropy(ptrace(rho, "B")) - vn_entropy(rho)


def projectors(theta, phi):
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    v = np.stack([np.cos(theta / 2) + 0j, np.exp(1j * phi) * np.sin(theta / 2)], axis=-1)
    return np.einsum("...i,...j->...ij", v, np.conj(v))


def cond_entropy(rho, theta, phi, measured="B"):
    """Sum_i p_i S(rho_i) for projective measurement (theta, phi) on ``measured``."""
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    p0 = projectors(theta, phi)
    eye = np.eye(2)
    total = 0.0
    for proj in (p0, eye - p0):
        if measured == "B":
            sub = np.einsum("...lk,ikjl->...ij", proj, r)
        else:
            sub = np.einsum("...ji,ikjl->...kl", proj, r)
        p = np.real(np.trace(sub, axis1=-2, axis2=-1))
        safe = np.where(p > 1e-14, p, 1.0)
        evals = np.linalg.eigvalsh(sub / safe[..., None, None])
        total = total + np.where(p > 1e-14, p * _entropy_rows(evals), 0.0)
    return total


def _zoom_grid(center, half_widths, n):
    axes = [np.linspace(c - h, c + h, n) for c, h in zip(center, half_widths)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def min_cond_entropy(rho, measured="B", n=256, levels=6, keep=8):
    """Dense (theta, phi) grid followed by successively finer local grids."""
    th = np.linspace(0, np.pi, n)
    ph = np.arange(n) * 2 * np.pi / n
    tt, pp = np.meshgrid(th, ph, indexing="ij")
    pts = np.column_stack([tt.ravel(), pp.ravel()])
    vals = cond_entropy(rho, pts[:, 0], pts[:, 1], measured)
    best = vals.min()
    half = np.array([np.pi / (n - 1), 2 * np.pi / n]) * 2
    centers = pts[np.argsort(vals)[:keep]]
    for _ in range(levels):
        new_pts, new_vals = [], []
        for c in centers:
            g = _zoom_grid(c, half, 21)
            new_pts.append(g)
            new_vals.append(cond_entropy(rho, g[:, 0], g[:, 1], measured))
        pts = np.concatenate(new_pts)
        vals = np.concatenate(new_vals)
        best = min(best, vals.min())
        centers = pts[np.argsort(vals)[:keep]]
        half = half / 4
    return float(best)


def discord(rho, measured="B"):
    s_unmeasured = vn_entropy(ptrace(rho, "A" if measured == "B" else "B"))
    j = s_unmeasured - min_cond_entropy(rho, measured)
    return mutual_information(rho) - j


def _table_mi(p00, pa0, pb0):
    p = np.stack([p00, pa0 - p00, pb0 - p00, 1 - pa0 - pb0 + p00])
    pa = np.stack([pa0, 1 - pa0])
    pb = np.stack([pb0, 1 - pb0])

    def h(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return -np.where(x > 1e-15, x * np.log2(np.where(x > 0, x, 1)), 0.0).sum(axis=0)

    return h(pa) + h(pb) - h(p)


def _table_parts(rho, pa_proj, pb_proj):
    """Return p00[a, b], pA0[a], pB0[b] for projector stacks on each side."""
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    x = np.einsum("aji,ikjl->akl", pa_proj, r)
    p00 = np.real(np.einsum("akl,blk->ab", x, pb_proj))
    pa0 = np.real(np.einsum("akk->a", x))
    pb0 = np.real(np.einsum("blk,ikil->b", pb_proj, r))
    return p00, pa0, pb0


def classical_mi(rho, angles):
    """Classical MI at bi-local angles (..., 4) = (thA, phA, thB, phB)."""
    angles = np.atleast_2d(angles)
    pa = projectors(angles[:, 0], angles[:, 1])
    pb = projectors(angles[:, 2], angles[:, 3])
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    x = np.einsum("nji,ikjl->nkl", pa, r)
    p00 = np.real(np.einsum("nkl,nlk->n", x, pb))
    pa0 = np.real(np.einsum("nkk->n", x))
    pb0 = np.real(np.einsum("nlk,ikil->n", pb, r))
    return _table_mi(p00, pa0, pb0)


def max_classical_mi(rho, n_theta=40, n_phi=80, levels=8, keep=8):
    """Hemisphere grid on each side (n and -n give the same projector pair)."""
    th = np.linspace(0, np.pi / 2, n_theta)
    ph = np.arange(n_phi) * 2 * np.pi / n_phi
    tt, pp = np.meshgrid(th, ph, indexing="ij")
    side = np.column_stack([tt.ravel(), pp.ravel()])
    proj = projectors(side[:, 0], side[:, 1])
    p00, pa0, pb0 = _table_parts(rho, proj, proj)
    mi = _table_mi(p00, pa0[:, None] + 0 * p00, pb0[None, :] + 0 * p00)
    flat = np.argsort(mi.ravel())[::-1][:keep]
    ia, ib = np.divmod(flat, len(side))
    centers = np.column_stack([side[ia], side[ib]])
    best = mi.max()
    half = np.array([np.pi / 2 / (n_theta - 1), 2 * np.pi / n_phi] * 2) * 1.5
    for _ in range(levels):
        pts = np.concatenate([_zoom_grid(c, half, 7) for c in centers])
        vals = classical_mi(rho, pts)
        best = max(best, vals.max())
        centers = pts[np.argsort(vals)[::-1][:keep]]
        half = half / 3
    return float(best)
