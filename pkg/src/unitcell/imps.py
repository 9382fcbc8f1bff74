"""Infinite matrix product states with a 2-site unit cell.

States are stored in Vidal form: two site tensors of shape
``(chi_left, 2, chi_right)`` plus the two inequivalent bond-weight vectors.
The repeating pattern of the infinite chain is::

    ... [bond_ba] site_a [bond_ab] site_b [bond_ba] site_a ...

Transfer operators are applied matrix-free (two sequential site
contractions), so the memory footprint of an eigensolve is O(chi^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse.linalg as spla

from .tensors import RANK_CUTOFF, svd_truncate, tensor_from_json, tensor_to_json

__all__ = [
    "InfiniteMPS",
    "TransferOperator",
    "EigenResult",
    "EigensolverError",
    "NormalizationError",
    "leading_eigenvalue",
    "normalize",
    "local_fidelity",
    "expectation_2site",
    "correlation_length",
    "random_imps",
    "product_imps",
    "canonical_form",
    "imps_to_json",
    "imps_from_json",
]

PHYS_DIM = 2

# Arnoldi defaults: transfer spectra in all workloads here have a
# well-separated leading eigenvalue.
KRYLOV_DIM = 30
MAX_RESTARTS = 400
DENSE_CUTOFF = 8


class EigensolverError(RuntimeError):
    """Raised when the iterative eigensolver fails to converge."""

    def __init__(self, msg, best_residual=None):
        super().__init__(msg)
        self.best_residual = best_residual


class NormalizationError(RuntimeError):
    """Raised when a state cannot be normalized (vanishing leading eigenvalue)."""


@dataclass(frozen=True)
class InfiniteMPS:
    """Translation invariant state with a 2-site unit cell, in Vidal form."""

    site_a: np.ndarray  # (len(bond_ba), 2, len(bond_ab))
    site_b: np.ndarray  # (len(bond_ab), 2, len(bond_ba))
    bond_ab: np.ndarray  # weights on the bond between site_a and site_b
    bond_ba: np.ndarray  # weights on the bond between site_b and the next cell

    def __post_init__(self):
        ca, cb = len(self.bond_ab), len(self.bond_ba)
        if self.site_a.shape != (cb, PHYS_DIM, ca):
            raise ValueError(f"site_a shape {self.site_a.shape} != {(cb, PHYS_DIM, ca)}")
        if self.site_b.shape != (ca, PHYS_DIM, cb):
            raise ValueError(f"site_b shape {self.site_b.shape} != {(ca, PHYS_DIM, cb)}")

    @property
    def chi(self) -> int:
        return max(len(self.bond_ab), len(self.bond_ba))

    def cell_tensors(self):
        """Site tensors with their left bond weights absorbed.

        The unit cell ``(bond_ba . site_a)(bond_ab . site_b)`` defines the
        transfer matrix used for normalization and overlaps.
        """
        a = self.bond_ba[:, None, None] * self.site_a
        b = self.bond_ab[:, None, None] * self.site_b
        return a, b

    def shift(self) -> "InfiniteMPS":
        """The same state translated by one lattice site."""
        return InfiniteMPS(self.site_b, self.site_a, self.bond_ba, self.bond_ab)

    def scaled(self, factor: float) -> "InfiniteMPS":
        return InfiniteMPS(
            self.site_a * factor, self.site_b * factor, self.bond_ab, self.bond_ba
        )


def product_imps(vec_a: Sequence[complex], vec_b: Sequence[complex]) -> InfiniteMPS:
    """chi=1 product state with single-site states ``vec_a``, ``vec_b``."""
    va = np.asarray(vec_a, dtype=complex)
    vb = np.asarray(vec_b, dtype=complex)
    va = va / np.linalg.norm(va)
    vb = vb / np.linalg.norm(vb)
    one = np.ones(1)
    return InfiniteMPS(va.reshape(1, 2, 1), vb.reshape(1, 2, 1), one, one)


class TransferOperator:
    """Matrix-free (mixed) transfer operator of one unit cell.

    Maps a right-edge matrix ``v[ket, bra]`` to the left edge by contracting
    the ket cell of ``ket`` against the conjugated cell of ``bra``.  An
    optional 4x4 ``gate`` is sandwiched on the two physical legs of the ket
    cell (the gate is internal to the cell, i.e. parity 0; shift the states
    for the other alignment).
    """

    def __init__(self, ket: InfiniteMPS, bra: InfiniteMPS, gate: Optional[np.ndarray] = None):
        self.ket = ket
        self.bra = bra
        ka, kb = ket.cell_tensors()
        ba, bb = bra.cell_tensors()
        self._bra_a = ba.conj()
        self._bra_b = bb.conj()
        self.chi_ket = ka.shape[0]
        self.chi_bra = ba.shape[0]
        self.n_apply = 0
        if gate is None:
            self._ket_a = ka
            self._ket_b = kb
            self._blob = None
        else:
            g = np.asarray(gate, dtype=complex).reshape(2, 2, 2, 2)
            # blob[l, sa', sb', r] with the gate already applied to the cell
            blob = np.einsum("lam,mbr->labr", ka, kb)
            self._blob = np.einsum("xyab,labr->lxyr", g, blob)

    @property
    def dim(self) -> int:
        return self.chi_ket * self.chi_bra

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Apply to a ``(chi_ket, chi_bra)`` matrix."""
        self.n_apply += 1
        if self._blob is None:
            t = np.tensordot(self._ket_b, v, axes=[(2,), (0,)])  # (m, s, rb)
            v = np.tensordot(t, self._bra_b, axes=[(1, 2), (1, 2)])  # (m, mb)
            t = np.tensordot(self._ket_a, v, axes=[(2,), (0,)])
            return np.tensordot(t, self._bra_a, axes=[(1, 2), (1, 2)])
        t = np.tensordot(self._blob, v, axes=[(3,), (0,)])  # (l, sa, sb, rb)
        t = np.tensordot(t, self._bra_b, axes=[(2, 3), (1, 2)])  # (l, sa, mb)
        return np.tensordot(t, self._bra_a, axes=[(1, 2), (1, 2)])  # (l, lb)

    def apply_adjoint(self, w: np.ndarray) -> np.ndarray:
        """Apply the Hermitian adjoint to a left-edge matrix ``w[ket, bra]``."""
        self.n_apply += 1
        if self._blob is None:
            t = np.tensordot(self._ket_a.conj(), w, axes=[(0,), (0,)])  # (s, m, lb)
            w = np.tensordot(t, self._bra_a.conj(), axes=[(0, 2), (1, 0)])  # (m, mb)
            t = np.tensordot(self._ket_b.conj(), w, axes=[(0,), (0,)])
            return np.tensordot(t, self._bra_b.conj(), axes=[(0, 2), (1, 0)])
        t = np.tensordot(self._blob.conj(), w, axes=[(0,), (0,)])  # (sa, sb, r, lb)
        t = np.tensordot(t, self._bra_a.conj(), axes=[(0, 3), (1, 0)])  # (sb, r, mb)
        t = np.tensordot(t, self._bra_b.conj(), axes=[(0, 2), (1, 0)])  # (r, rb)
        return t

    def apply_vec(self, v: np.ndarray) -> np.ndarray:
        return self.apply(v.reshape(self.chi_ket, self.chi_bra)).reshape(-1)

    def apply_adjoint_vec(self, w: np.ndarray) -> np.ndarray:
        return self.apply_adjoint(w.reshape(self.chi_ket, self.chi_bra)).reshape(-1)

    def to_matrix(self) -> np.ndarray:
        """Dense matrix, for oracles and small problems. O(chi^4) memory."""
        if self._blob is None:
            ka, kb = self._ket_a, self._ket_b
            blob = np.einsum("lam,mbr->labr", ka, kb)
        else:
            blob = self._blob
        bra = np.einsum("lam,mbr->labr", self._bra_a, self._bra_b)
        t = np.einsum("labr,kabq->lkrq", blob, bra)
        return t.reshape(self.dim, self.dim)


@dataclass
class EigenResult:
    value: complex
    vector: np.ndarray
    residual: float
    iterations: int
    degenerate: bool = False


def _default_start(dim: int) -> np.ndarray:
    # Deterministic per dimension, so cold-started eigensolves are reproducible.
    rng = np.random.default_rng(0x5EED + dim)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _dense_leading(op: TransferOperator, adjoint: bool) -> EigenResult:
    m = op.to_matrix()
    if adjoint:
        m = m.conj().T
    w, v = np.linalg.eig(m)
    order = np.argsort(-np.abs(w))
    val = w[order[0]]
    vec = v[:, order[0]]
    vec = vec / np.linalg.norm(vec)
    residual = float(np.linalg.norm(m @ vec - val * vec))
    degenerate = len(w) > 1 and abs(np.abs(w[order[0]]) - np.abs(w[order[1]])) < 1e-10
    return EigenResult(complex(val), vec, residual, iterations=0, degenerate=degenerate)


def leading_eigenvalue(
    op: TransferOperator,
    warm_start: Optional[np.ndarray] = None,
    tol: float = 1e-12,
    adjoint: bool = False,
    dense_cutoff: int = DENSE_CUTOFF,
) -> EigenResult:
    """Largest-magnitude eigenvalue of a transfer operator.

    Uses an implicitly restarted Arnoldi iteration (ARPACK) on the
    matrix-free operator; small problems fall back to dense
    eigendecomposition.  ``warm_start`` seeds the Krylov space, which cuts
    the iteration count when a nearby eigenvector is known.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    dim = op.dim
    if dim <= max(dense_cutoff, 3):
        return _dense_leading(op, adjoint)
    matvec = op.apply_adjoint_vec if adjoint else op.apply_vec
    lin = spla.LinearOperator((dim, dim), matvec=matvec, dtype=complex)
    if warm_start is not None and np.size(warm_start) != dim:
        warm_start = None  # stale cache from a different bond dimension
    v0 = warm_start if warm_start is not None else _default_start(dim)
    v0 = np.asarray(v0, dtype=complex).reshape(-1)
    before = op.n_apply
    try:
        vals, vecs = spla.eigs(
            lin,
            k=1,
            which="LM",
            v0=v0,
            ncv=min(dim, KRYLOV_DIM),
            maxiter=MAX_RESTARTS,
            tol=tol,
        )
    except spla.ArpackNoConvergence as exc:
        if len(exc.eigenvalues):  # pragma: no cover - rare
            vals, vecs = exc.eigenvalues, exc.eigenvectors
        else:
            raise EigensolverError(
                f"Arnoldi iteration failed to converge (dim {dim}, tol {tol})"
            ) from exc
    iterations = op.n_apply - before
    val = complex(vals[0])
    vec = vecs[:, 0]
    vec = vec / np.linalg.norm(vec)
    residual = float(np.linalg.norm(matvec(vec) - val * vec))
    if residual > 100 * tol * max(abs(val), 1e-30):
        # One more shot, seeded with the best vector so far.
        try:
            vals, vecs = spla.eigs(
                lin, k=1, which="LM", v0=vec, ncv=min(dim, KRYLOV_DIM),
                maxiter=MAX_RESTARTS, tol=tol,
            )
            val = complex(vals[0])
            vec = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
            residual = float(np.linalg.norm(matvec(vec) - val * vec))
            iterations = op.n_apply - before
        except spla.ArpackNoConvergence as exc:
            raise EigensolverError(
                f"Arnoldi iteration stalled at residual {residual:.3e}",
                best_residual=residual,
            ) from exc
    return EigenResult(val, vec, residual, iterations)


def normalize(psi: InfiniteMPS, tol: float = 1e-12) -> InfiniteMPS:
    """Rescale so the self transfer matrix has leading eigenvalue of magnitude 1."""
    res = leading_eigenvalue(TransferOperator(psi, psi), tol=tol)
    mag = abs(res.value)
    if mag < 1e-300 or not math.isfinite(mag):
        raise NormalizationError(f"leading eigenvalue magnitude {mag} cannot be scaled to 1")
    return psi.scaled(mag ** (-0.25))


def local_fidelity(psi1: InfiniteMPS, psi2: InfiniteMPS, tol: float = 1e-12) -> float:
    """Per-unit-cell overlap density |lambda_0|^2 of the mixed transfer matrix."""
    res = leading_eigenvalue(TransferOperator(psi1, psi2), tol=tol)
    return float(abs(res.value) ** 2)


def _environments(psi: InfiniteMPS, tol: float = 1e-12):
    op = TransferOperator(psi, psi)
    right = leading_eigenvalue(op, tol=tol)
    left = leading_eigenvalue(op, tol=tol, adjoint=True)
    r = right.vector.reshape(op.chi_ket, op.chi_bra)
    l = left.vector.reshape(op.chi_ket, op.chi_bra)
    return l, r, op


def expectation_2site(psi: InfiniteMPS, op4: np.ndarray, bond_parity: int = 0,
                      tol: float = 1e-12) -> complex:
    """Expectation of a 2-site operator on the even (0) or odd (1) bond.

    Environments are the dominant left/right eigenvectors of the transfer
    operator, so no canonical-form assumption is made.
    """
    state = psi if bond_parity == 0 else psi.shift()
    l, r, top = _environments(state, tol=tol)
    with_op = TransferOperator(state, state, gate=np.asarray(op4, dtype=complex))
    num = np.vdot(l.reshape(-1), with_op.apply(r).reshape(-1))
    den = np.vdot(l.reshape(-1), top.apply(r).reshape(-1))
    if abs(den) < 1e-300:
        raise NormalizationError("vanishing norm in expectation value")
    return complex(num / den)


def correlation_length(psi: InfiniteMPS, tol: float = 1e-12) -> float:
    """Correlation length in lattice sites, from the subleading transfer eigenvalue.

    The unit cell spans 2 sites, so the per-site length is
    ``-2 / log|lambda_1 / lambda_0|``.  Returns ``inf`` when the two leading
    magnitudes coincide to 1e-12 (diverging correlations).
    """
    op = TransferOperator(psi, psi)
    dim = op.dim
    if dim == 1:
        return 0.0  # product state: no subleading eigenvalue, no correlations
    if dim <= 64:
        w = np.linalg.eigvals(op.to_matrix())
        mags = np.sort(np.abs(w))[::-1]
        lam0, lam1 = mags[0], mags[1]
    else:
        lin = spla.LinearOperator((dim, dim), matvec=op.apply_vec, dtype=complex)
        vals = spla.eigs(
            lin, k=2, which="LM", v0=_default_start(dim),
            ncv=min(dim, KRYLOV_DIM), maxiter=MAX_RESTARTS, tol=tol,
            return_eigenvectors=False,
        )
        mags = np.sort(np.abs(vals))[::-1]
        lam0, lam1 = mags[0], mags[1]
    ratio = lam1 / lam0
    if ratio >= 1.0 - 1e-12:
        return math.inf
    if ratio <= 0.0:
        return 0.0
    return -2.0 / math.log(ratio)


class _SiteTransfer:
    """Transfer operator of a single coarse-grained tensor (any physical dim)."""

    def __init__(self, ket_site: np.ndarray, bra_site: np.ndarray):
        self._ket = ket_site
        self._bra = bra_site.conj()
        self.chi_ket = ket_site.shape[0]
        self.chi_bra = bra_site.shape[0]
        self.n_apply = 0
        self._blob = None

    dim = TransferOperator.dim
    apply_vec = TransferOperator.apply_vec
    apply_adjoint_vec = TransferOperator.apply_adjoint_vec

    def apply(self, v):
        self.n_apply += 1
        t = np.tensordot(self._ket, v, axes=[(2,), (0,)])
        return np.tensordot(t, self._bra, axes=[(1, 2), (1, 2)])

    def apply_adjoint(self, w):
        self.n_apply += 1
        t = np.tensordot(self._ket.conj(), w, axes=[(0,), (0,)])
        return np.tensordot(t, self._bra.conj(), axes=[(0, 2), (1, 0)])

    def to_matrix(self):
        return np.einsum("lar,kaq->lkrq", self._ket, self._bra).reshape(self.dim, self.dim)


def _psd_factor(v: np.ndarray):
    """Factor a (numerically) PSD matrix as X @ X.conj().T after phase fixing."""
    tr = np.trace(v)
    if abs(tr) < 1e-300:
        raise NormalizationError("degenerate environment in canonicalization")
    v = v * (tr.conjugate() / abs(tr))
    v = (v + v.conj().T) / 2.0
    w, u = np.linalg.eigh(v)
    w = np.clip(w, 0.0, None)
    keep = w > RANK_CUTOFF * max(w.max(), 1e-300)
    x = u[:, keep] * np.sqrt(w[keep])
    return x


def canonical_form(psi: InfiniteMPS, tol: float = 1e-12) -> InfiniteMPS:
    """Bring a state to Vidal canonical form (bond weights = Schmidt values).

    Gauge-fixes the cell bond using the dominant left/right transfer
    eigenvectors, then re-splits the coarse-grained cell by SVD so both
    bond-weight vectors are genuine Schmidt coefficients.
    """
    chi = len(psi.bond_ba)
    # Coarse-grain the cell into one tensor with physical dimension 4.
    cell = np.einsum("lam,m,mbr->labr", psi.site_a, psi.bond_ab, psi.site_b)
    cell = cell.reshape(chi, PHYS_DIM * PHYS_DIM, chi)
    lam = np.asarray(psi.bond_ba, dtype=float)

    right_t = _SiteTransfer(cell * lam[None, None, :], cell * lam[None, None, :])
    res_r = leading_eigenvalue(right_t, tol=tol)
    eta = abs(res_r.value)
    if eta < 1e-300:
        raise NormalizationError("state has vanishing norm per cell")
    cell = cell / math.sqrt(eta)
    left_t = _SiteTransfer(lam[:, None, None] * cell, lam[:, None, None] * cell)
    res_l = leading_eigenvalue(left_t, tol=tol, adjoint=True)

    # The adjoint solve returns the conjugate of the left environment.
    e_left = res_l.vector.reshape(chi, chi).conj()
    x = _psd_factor(res_r.vector.reshape(chi, chi))  # E_R = X X^dag
    y = _psd_factor(e_left).conj().T                 # E_L = Y^dag Y
    yc = y.conj()
    m = yc @ np.diag(lam) @ x
    fac = svd_truncate(m, chi_max=max(m.shape))
    lam_new = fac.s / np.linalg.norm(fac.s)
    x_pinv = np.linalg.pinv(x, rcond=1e-12)
    yc_pinv = np.linalg.pinv(yc, rcond=1e-12)
    cell_new = np.einsum(
        "kl,lar,rm->kam", fac.vh @ x_pinv, cell, yc_pinv @ fac.u
    )

    # Split the canonical cell back into two sites via the Schmidt SVD.
    chi_new = len(lam_new)
    theta = lam_new[:, None, None] * cell_new * lam_new[None, None, :]
    theta = theta.reshape(chi_new, PHYS_DIM, PHYS_DIM, chi_new)
    split = svd_truncate(
        theta.reshape(chi_new * PHYS_DIM, PHYS_DIM * chi_new), chi_max=chi_new * PHYS_DIM
    )
    lam_ab = split.s / np.linalg.norm(split.s)
    inv_ba = np.where(lam_new > RANK_CUTOFF, 1.0 / lam_new, 0.0)
    site_a = split.u.reshape(chi_new, PHYS_DIM, len(lam_ab)) * inv_ba[:, None, None]
    site_b = split.vh.reshape(len(lam_ab), PHYS_DIM, chi_new) * inv_ba[None, None, :]
    out = InfiniteMPS(site_a, site_b, lam_ab, lam_new)
    return normalize(out, tol=tol)


def random_imps(chi: int, seed: int) -> InfiniteMPS:
    """Normalized random state with bond dimension ``chi``, deterministic per seed.

    Site tensors are drawn with independent standard complex Gaussian
    entries; bond weights come from the subsequent canonicalization.
    """
    if chi < 1:
        raise ValueError("chi must be >= 1")
    rng = np.random.default_rng(seed)

    def draw():
        return rng.standard_normal((chi, PHYS_DIM, chi)) + 1j * rng.standard_normal(
            (chi, PHYS_DIM, chi)
        )

    ones = np.ones(chi) / math.sqrt(chi)
    raw = InfiniteMPS(draw(), draw(), ones.copy(), ones.copy())
    return canonical_form(raw)


def imps_to_json(psi: InfiniteMPS, metadata: Optional[dict] = None) -> dict:
    obj = {
        "site_a": tensor_to_json(psi.site_a),
        "site_b": tensor_to_json(psi.site_b),
        "bond_ab": psi.bond_ab.tolist(),
        "bond_ba": psi.bond_ba.tolist(),
        "chi": psi.chi,
    }
    if metadata:
        obj["metadata"] = metadata
    return obj


def imps_from_json(obj: dict) -> InfiniteMPS:
    return InfiniteMPS(
        tensor_from_json(obj["site_a"]),
        tensor_from_json(obj["site_b"]),
        np.asarray(obj["bond_ab"], dtype=float),
        np.asarray(obj["bond_ba"], dtype=float),
    )
