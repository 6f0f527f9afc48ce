"""Mobius transformations of the operator ball and their block-matrix form.

A point of the ball is a strict contraction ``A`` from K (dim ``q``) to H
(dim ``p``).  The Mobius transform

    M_A(X) = (1 - A A*)^{-1/2} (A + X) (1 + A* X)^{-1} (1 - A* A)^{1/2}

is a biholomorphic automorphism with ``M_A(0) = A`` and inverse ``M_{-A}``.
Every automorphism this package consumes is represented concretely by an
eta-preserving block matrix T acting by the fractional-linear rule

    w_T(A) = (T11 A + T12)(T21 A + T22)^{-1}.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    BoundaryProximity,
    NotEtaPreserving,
    SingularDenominator,
    SingularResolvent,
)
from .opcore import adjoint, as_matrix, inv_sqrtm_psd, spectral_norm, sqrtm_psd

BOUNDARY_TOL = 1e-8
AUT_TOL = 1e-8
COND_TOL = 1e-13


class BallPoint:
    """A matrix with spectral norm strictly below 1.

    ``boundary_tol`` sets the rejection margin; construction raises
    ``BoundaryProximity`` for closer points instead of clamping.
    """

    __slots__ = ("matrix", "margin")

    def __init__(self, matrix, boundary_tol: float = BOUNDARY_TOL):
        m = as_matrix(matrix, name="ball point")
        norm = spectral_norm(m)
        if not norm < 1.0 - boundary_tol:
            raise BoundaryProximity(
                f"norm {norm!r} not strictly below 1 - {boundary_tol!r}")
        self.matrix = m
        self.margin = 1.0 - norm

    @property
    def shape(self):
        return self.matrix.shape

    def __repr__(self):
        return f"BallPoint(shape={self.matrix.shape}, margin={self.margin:.3e})"


def zero_point(p: int, q: int) -> BallPoint:
    return BallPoint(np.zeros((p, q)))


def _check_margin(*points: BallPoint, boundary_tol: float = 0.0):
    for pt in points:
        if pt.margin < boundary_tol:
            raise BoundaryProximity(f"margin {pt.margin!r} below {boundary_tol!r}")


def _min_singular(a: np.ndarray) -> float:
    return float(np.linalg.svd(a, compute_uv=False)[-1])


def mobius_matrix(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Core formula on raw matrices; see ``mobius_apply`` for the checked API."""
    p, q = a.shape
    resolvent = np.eye(q) + adjoint(a) @ x
    if _min_singular(resolvent) < COND_TOL:
        raise SingularResolvent("1 + A*X numerically singular")
    left = inv_sqrtm_psd(np.eye(p) - a @ adjoint(a))
    right = sqrtm_psd(np.eye(q) - adjoint(a) @ a)
    return left @ (a + x) @ np.linalg.solve(resolvent, right)


def mobius_apply(a: BallPoint, x: BallPoint,
                 boundary_tol: float = 0.0) -> BallPoint:
    """Evaluate M_A(X).  Both arguments must lie strictly inside the ball."""
    if a.shape != x.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {x.shape}")
    _check_margin(a, x, boundary_tol=boundary_tol)
    return BallPoint(mobius_matrix(a.matrix, x.matrix), boundary_tol=0.0)


def mobius_differential(b: BallPoint, a: BallPoint, v) -> np.ndarray:
    """Differential of M_B at A applied to V:

    (1 - BB*)^{1/2} (1 + AB*)^{-1} V (1 + B*A)^{-1} (1 - B*B)^{1/2}
    """
    v = np.asarray(v, dtype=np.complex128)
    if v.shape != a.shape or a.shape != b.shape:
        raise ValueError("A, B, V must share one shape")
    bm, am = b.matrix, a.matrix
    p, q = bm.shape
    left_res = np.eye(p) + am @ adjoint(bm)
    right_res = np.eye(q) + adjoint(bm) @ am
    if min(_min_singular(left_res), _min_singular(right_res)) < COND_TOL:
        raise SingularResolvent("1 + A B* numerically singular")
    left = sqrtm_psd(np.eye(p) - bm @ adjoint(bm))
    right = sqrtm_psd(np.eye(q) - adjoint(bm) @ bm)
    return left @ np.linalg.solve(left_res, v) @ np.linalg.solve(right_res, right)


class BallAutomorphism:
    """An eta-preserving block matrix acting by the fractional-linear rule.

    The block is rescaled at construction by the positive scalar that best
    fits ``T*JT`` to ``J`` (Frobenius Rayleigh estimate), so tolerance
    checks stay meaningful along long composition chains.
    """

    __slots__ = ("block", "dim_h", "dim_k", "defect")

    def __init__(self, block, dim_h: int, dim_k: int,
                 aut_tol: float = AUT_TOL, normalize: bool = True):
        t = as_matrix(block, name="automorphism block")
        n = dim_h + dim_k
        if t.shape != (n, n):
            raise ValueError(f"block must be {n}x{n}, got {t.shape}")
        j = eta_matrix(dim_h, dim_k)
        gram = adjoint(t) @ j @ t
        if normalize:
            scale = float(np.trace(j @ gram).real) / n
            if scale <= 0.0:
                raise NotEtaPreserving("T*JT has non-positive alignment with J")
            t = t / np.sqrt(scale)
            gram = adjoint(t) @ j @ t
        # forming T*JT already loses ||T||^2 eps, so the check scales with it
        defect = spectral_norm(gram - j)
        allowed = aut_tol * max(1.0, spectral_norm(t) ** 2)
        if defect > allowed:
            raise NotEtaPreserving(f"||T*JT - J|| = {defect:.3e} > {allowed!r}")
        t = t.copy()
        t.setflags(write=False)
        self.block = t
        self.dim_h = dim_h
        self.dim_k = dim_k
        self.defect = defect

    @classmethod
    def identity(cls, dim_h: int, dim_k: int) -> "BallAutomorphism":
        return cls(np.eye(dim_h + dim_k), dim_h, dim_k)

    def blocks(self):
        p = self.dim_h
        t = self.block
        return t[:p, :p], t[:p, p:], t[p:, :p], t[p:, p:]

    def inverse(self) -> "BallAutomorphism":
        return BallAutomorphism(np.linalg.inv(self.block), self.dim_h, self.dim_k)

    def __repr__(self):
        return (f"BallAutomorphism(dim_h={self.dim_h}, dim_k={self.dim_k}, "
                f"defect={self.defect:.3e})")


def eta_matrix(dim_h: int, dim_k: int) -> np.ndarray:
    """J = diag(I_H, -I_K) for the split H (+) K."""
    return np.diag(np.concatenate([np.ones(dim_h), -np.ones(dim_k)])).astype(
        np.complex128)


def mobius_as_block(a: BallPoint) -> BallAutomorphism:
    """Block matrix T_A whose fractional-linear action equals M_A."""
    am = a.matrix
    p, q = am.shape
    left = inv_sqrtm_psd(np.eye(p) - am @ adjoint(am))
    right = inv_sqrtm_psd(np.eye(q) - adjoint(am) @ am)
    block = np.block([[left, left @ am], [right @ adjoint(am), right]])
    return BallAutomorphism(block, p, q)


def automorphism_apply(t: BallAutomorphism, a: BallPoint) -> BallPoint:
    """w_T(A) = (T11 A + T12)(T21 A + T22)^{-1}."""
    if a.shape != (t.dim_h, t.dim_k):
        raise ValueError(f"point shape {a.shape} does not match split "
                         f"({t.dim_h}, {t.dim_k})")
    t11, t12, t21, t22 = t.blocks()
    num = t11 @ a.matrix + t12
    den = t21 @ a.matrix + t22
    sig = np.linalg.svd(den, compute_uv=False)
    if sig[-1] < COND_TOL * max(sig[0], 1.0):
        raise SingularDenominator("T21 A + T22 singular; T not eta-preserving")
    # solve on the right: num @ den^{-1}
    result = np.linalg.solve(den.conj().T, num.conj().T).conj().T
    return BallPoint(result, boundary_tol=0.0)


def automorphism_compose(t1: BallAutomorphism,
                         t2: BallAutomorphism) -> BallAutomorphism:
    """Composition of actions; a plain block-matrix product, renormalized."""
    if (t1.dim_h, t1.dim_k) != (t2.dim_h, t2.dim_k):
        raise ValueError("incompatible splits")
    return BallAutomorphism(t1.block @ t2.block, t1.dim_h, t1.dim_k)
