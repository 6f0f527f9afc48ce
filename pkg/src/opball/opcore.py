"""Dense complex matrix arithmetic and the Hermitian functional calculus.

Everything downstream (Mobius maps, the hyperbolic metric, unitarization)
is built from the four operations here: spectral norm, Hermitian
eigendecomposition, scalar functions of PSD matrices, and the polar
decomposition.  All functions are pure and operate on immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, NotHermitian, NotPSD

HERM_TOL = 1e-10
PSD_TOL = 1e-10
RANK_TOL = 1e-12
EIG_TOL = 1e-9


def as_matrix(data, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite complex 2-D array (a fresh, read-only copy)."""
    a = np.array(data, dtype=np.complex128, copy=True)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must be 2-D with positive shape, got {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    a.setflags(write=False)
    return a


def adjoint(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def spectral_norm(a) -> float:
    """Largest singular value of ``a``."""
    return float(np.linalg.norm(np.asarray(a, dtype=np.complex128), 2))


def hermitian_eig(s, herm_tol: float = HERM_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(lam, v)`` with ``lam`` ascending and ``s = v diag(lam) v*``.
    The input is symmetrized before the solve to absorb floating-point
    drift from products like ``A* A``; asymmetry beyond ``herm_tol``
    raises ``NotHermitian``.
    """
    s = np.asarray(s, dtype=np.complex128)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {s.shape}")
    defect = spectral_norm(s - adjoint(s))
    if defect > herm_tol * (1.0 + spectral_norm(s)):
        raise NotHermitian(f"asymmetry {defect:.3e} exceeds tolerance")
    lam, v = np.linalg.eigh((s + adjoint(s)) / 2.0)
    return lam, v


def psd_apply(s, f: Callable[[float], float], psd_tol: float = PSD_TOL,
              herm_tol: float = HERM_TOL) -> np.ndarray:
    """Apply a scalar function to a PSD matrix through its eigenvalues.

    Tiny negative eigenvalues (within ``psd_tol``) are clamped to zero
    before ``f`` is evaluated; ``f`` producing a non-finite value raises
    ``DomainError``.
    """
    lam, v = hermitian_eig(s, herm_tol=herm_tol)
    if lam.size and lam[0] < -psd_tol:
        raise NotPSD(f"eigenvalue {lam[0]:.3e} below -psd_tol")
    clamped = np.maximum(lam, 0.0)
    with np.errstate(all="ignore"):
        try:
            vals = np.asarray(f(clamped), dtype=np.float64)
            if vals.shape != clamped.shape:
                raise TypeError
        except (TypeError, ValueError):
            vals = np.array([f(x) for x in clamped], dtype=np.float64)
    if not np.all(np.isfinite(vals)):
        bad = clamped[~np.isfinite(vals)][0]
        raise DomainError(f"function undefined at eigenvalue {bad!r}")
    out = (v * vals) @ adjoint(v)
    return (out + adjoint(out)) / 2.0


def _psd_apply_fast(s: np.ndarray, fvec) -> np.ndarray:
    """Internal hot path: symmetrize and apply a vectorized scalar function,
    skipping the hermiticity-defect check (callers construct Hermitian
    inputs such as 1 - A A* directly)."""
    lam, v = np.linalg.eigh((s + s.conj().T) / 2.0)
    vals = fvec(np.maximum(lam, 0.0))
    if not np.all(np.isfinite(vals)):
        raise DomainError("matrix function undefined at an eigenvalue near 0")
    return (v * vals) @ v.conj().T


def sqrtm_psd(s) -> np.ndarray:
    return _psd_apply_fast(np.asarray(s, dtype=np.complex128), np.sqrt)


def inv_sqrtm_psd(s) -> np.ndarray:
    # 1/sqrt blows up at 0; DomainError there signals a boundary breach.
    with np.errstate(all="ignore"):
        return _psd_apply_fast(np.asarray(s, dtype=np.complex128),
                               lambda t: t ** -0.5)


@dataclass(frozen=True)
class PolarDecomposition:
    """``D = isometry @ modulus`` with ``modulus = (D* D)^{1/2}`` PSD and
    ``isometry`` a partial isometry supported on the range of ``modulus``."""

    isometry: np.ndarray
    modulus: np.ndarray
    rank: int


def polar_decompose(d, rank_tol: float = RANK_TOL) -> PolarDecomposition:
    """Polar decomposition via SVD, with the partial isometry restricted to
    singular values above ``rank_tol * sigma_max``."""
    d = np.asarray(d, dtype=np.complex128)
    w, sig, vh = np.linalg.svd(d, full_matrices=False)
    smax = sig[0] if sig.size else 0.0
    r = int(np.sum(sig > rank_tol * smax)) if smax > 0 else 0
    isometry = w[:, :r] @ vh[:r, :]
    modulus = (adjoint(vh) * sig) @ vh
    modulus = (modulus + adjoint(modulus)) / 2.0
    return PolarDecomposition(isometry=isometry, modulus=modulus, rank=r)
