"""Dense complex tensor kernels.

All tensors are numpy arrays stored row-major (C order, last index fastest).
That layout is also used for the JSON serialization produced by
:func:`tensor_to_json`, so serialized tensors are portable between runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "ContractionError",
    "NumericalError",
    "TruncatedSVD",
    "contract",
    "svd_truncate",
    "expm_hermitian",
    "tensor_to_json",
    "tensor_from_json",
]

# Singular values below this (relative to the largest) are treated as zero
# when deciding ranks, to avoid spurious bond growth from numerical noise.
RANK_CUTOFF = 1e-14


class ContractionError(ValueError):
    """Raised when paired axes of a contraction have mismatched dimensions."""


class NumericalError(RuntimeError):
    """Raised when a dense linear-algebra kernel fails to converge."""


def contract(a: np.ndarray, b: np.ndarray, pairs) -> np.ndarray:
    """Contract ``a`` with ``b`` over the given list of ``(axis_a, axis_b)`` pairs.

    Free axes of the result are ordered as the remaining axes of ``a``
    followed by the remaining axes of ``b``.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    pairs = list(pairs)
    ax_a = [p[0] for p in pairs]
    ax_b = [p[1] for p in pairs]
    for i, j in pairs:
        if a.shape[i] != b.shape[j]:
            raise ContractionError(
                f"axis {i} of shape {a.shape} does not match axis {j} of shape {b.shape}"
            )
    return np.tensordot(a, b, axes=(ax_a, ax_b))


@dataclass(frozen=True)
class TruncatedSVD:
    """Result of a rank-truncated singular value decomposition.

    ``u @ np.diag(s) @ vh`` reconstructs the input up to the discarded part.
    ``discarded_weight`` is the sum of squared discarded singular values
    divided by the sum of all squared singular values.
    """

    u: np.ndarray
    s: np.ndarray
    vh: np.ndarray
    discarded_weight: float


def _svd_with_fallback(m: np.ndarray):
    try:
        return np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        pass
    try:
        return scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd")
    except Exception as exc:  # pragma: no cover - defensive path
        norm = np.linalg.norm(m)
        raise NumericalError(
            f"SVD failed to converge for a {m.shape[0]}x{m.shape[1]} matrix "
            f"(Frobenius norm {norm:.3e})"
        ) from exc


def svd_truncate(m: np.ndarray, chi_max: int, weight_tol: float = 0.0) -> TruncatedSVD:
    """SVD of a matrix, keeping at most ``chi_max`` singular values.

    After the hard cap, trailing singular values are additionally dropped as
    long as the resulting discarded weight stays at or below ``weight_tol``.
    At least one singular value is always kept.
    """
    m = np.asarray(m)
    if m.ndim != 2:
        raise ContractionError(f"svd_truncate expects a matrix, got shape {m.shape}")
    if chi_max < 1:
        raise ValueError("chi_max must be >= 1")
    u, s, vh = _svd_with_fallback(m)
    total = float(np.sum(s**2))
    if total == 0.0:
        return TruncatedSVD(u[:, :1], s[:1], vh[:1, :], 0.0)
    rank = int(np.sum(s > RANK_CUTOFF * s[0]))
    rank = max(rank, 1)
    keep = min(rank, chi_max)
    # Tail weights: tail[k] = sum(s[k:]**2) / total.
    tail = np.concatenate([np.cumsum((s**2)[::-1])[::-1], [0.0]]) / total
    while keep > 1 and tail[keep - 1] <= weight_tol:
        keep -= 1
    dw = float(tail[keep])
    return TruncatedSVD(
        np.ascontiguousarray(u[:, :keep]),
        np.ascontiguousarray(s[:keep]),
        np.ascontiguousarray(vh[:keep, :]),
        dw,
    )


def expm_hermitian(h: np.ndarray, scale: complex) -> np.ndarray:
    """Return ``exp(scale * h)`` for Hermitian ``h`` via eigendecomposition.

    With ``scale = -1j * t`` (real ``t``) the result is unitary.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    herm_err = np.linalg.norm(h - h.conj().T)
    if herm_err > 1e-10 * max(1.0, np.linalg.norm(h)):
        raise NumericalError(f"matrix is not Hermitian (deviation {herm_err:.3e})")
    w, v = np.linalg.eigh((h + h.conj().T) / 2.0)
    return (v * np.exp(scale * w)) @ v.conj().T


def tensor_to_json(t: np.ndarray) -> dict:
    """Serialize a tensor as ``{"shape", "re", "im"}`` in row-major order."""
    t = np.asarray(t, dtype=complex)
    flat = t.reshape(-1)
    return {
        "shape": [int(d) for d in t.shape],
        "re": flat.real.tolist(),
        "im": flat.imag.tolist(),
    }


def tensor_from_json(obj: dict) -> np.ndarray:
    shape = tuple(int(d) for d in obj["shape"])
    data = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    if data.size != int(np.prod(shape)):
        raise ValueError("serialized tensor length does not match its shape")
    return data.reshape(shape)
