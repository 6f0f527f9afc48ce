"""Indefinite quadratic forms with finitely many negative squares, J-unitary
matrices, the graph correspondence between ball points and maximal negative
subspaces, unitarization of eta-preserving representations, and invariant
dual pairs.

The space splits as H (+) K with dim K = n_minus finite and
eta(x) = ||x_H||^2 - ||x_K||^2 = <Jx, x>, J = diag(I, -I).  A strict
contraction A corresponds to the maximal negative subspace
L(A) = {Ax (+) x}, and eta-preserving T acts on the ball through
w_T(A) = (T11 A + T12)(T21 A + T22)^{-1} with L(w_T(A)) = T L(A).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy.linalg import subspace_angles

from .errors import (
    DegenerateGraph,
    DegenerateSplit,
    FixedPointFailed,
    NotEtaPreserving,
    NotElliptic,
    NotNegative,
    ShapeMismatch,
    UnknownGroup,
)
from .fixedpoint import FP_TOL, MAX_ITER, AutomorphismGroup, find_fixed_point
from .mobius import BallAutomorphism, BallPoint, eta_matrix
from .opcore import adjoint, as_matrix, hermitian_eig, inv_sqrtm_psd, spectral_norm
from .sampling import random_eta_preserving, random_unitary, rng_from

REP_TOL = 1e-8
UNIT_TOL = 1e-7
PAIR_TOL = 1e-7
SPLIT_TOL = 1e-10


@dataclass(frozen=True)
class PontryaginSignature:
    """The split H (+) K with its involution J = diag(I_H, -I_K)."""

    n_plus: int
    n_minus: int

    def __post_init__(self):
        if self.n_plus < 1 or self.n_minus < 1:
            raise ValueError("both components need positive dimension")

    @property
    def dim(self) -> int:
        return self.n_plus + self.n_minus

    @property
    def j(self) -> np.ndarray:
        return eta_matrix(self.n_plus, self.n_minus)


def eta_value(sig: PontryaginSignature, x) -> float:
    """eta(x) = <Jx, x> = ||x_H||^2 - ||x_K||^2."""
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    if x.shape[0] != sig.dim:
        raise ShapeMismatch(f"vector length {x.shape[0]} != {sig.dim}")
    p = sig.n_plus
    return float(np.sum(np.abs(x[:p]) ** 2) - np.sum(np.abs(x[p:]) ** 2))


def is_J_unitary(sig: PontryaginSignature, t, tol: float = REP_TOL):
    """Returns ``(preserves, defect)`` with defect = ||T*JT - J||."""
    t = np.asarray(t, dtype=np.complex128)
    if t.shape != (sig.dim, sig.dim):
        raise ShapeMismatch(f"expected {(sig.dim, sig.dim)}, got {t.shape}")
    j = sig.j
    defect = spectral_norm(adjoint(t) @ j @ t - j)
    return defect <= tol, defect


def graph_subspace(sig: PontryaginSignature, a: BallPoint) -> np.ndarray:
    """Column basis [A; I] of L(A) = {Ax (+) x}, a maximal negative
    subspace."""
    if a.shape != (sig.n_plus, sig.n_minus):
        raise ShapeMismatch(f"point shape {a.shape} != "
                            f"{(sig.n_plus, sig.n_minus)}")
    return np.vstack([a.matrix, np.eye(sig.n_minus, dtype=np.complex128)])


def subspace_to_ball(sig: PontryaginSignature, basis) -> BallPoint:
    """The contraction whose graph spans the same maximal negative subspace."""
    basis = as_matrix(basis, name="subspace basis")
    if basis.shape != (sig.dim, sig.n_minus):
        raise ShapeMismatch(f"basis must be {(sig.dim, sig.n_minus)}, "
                            f"got {basis.shape}")
    sing = np.linalg.svd(basis, compute_uv=False)
    if sing[-1] <= 1e-12 * sing[0]:
        raise ValueError("basis columns are linearly dependent")
    gram = adjoint(basis) @ sig.j @ basis
    lam, _ = hermitian_eig(gram)
    if lam[-1] >= 0.0:
        raise NotNegative(f"eta Gram eigenvalue {lam[-1]!r} not negative")
    p = sig.n_plus
    bottom = basis[p:, :]
    bsing = np.linalg.svd(bottom, compute_uv=False)
    if bsing[-1] <= 1e-12 * max(bsing[0], 1.0):
        raise DegenerateGraph("subspace meets H; not a graph over K")
    a = np.linalg.solve(bottom.conj().T, basis[:p, :].conj().T).conj().T
    return BallPoint(a, boundary_tol=0.0)


def negativeness_degree(sig: PontryaginSignature, a: BallPoint) -> float:
    """Largest eps with eta <= -eps ||.||^2 on L(A):
    (1 - ||A||^2) / (1 + ||A||^2)."""
    if a.shape != (sig.n_plus, sig.n_minus):
        raise ShapeMismatch(f"point shape {a.shape} != "
                            f"{(sig.n_plus, sig.n_minus)}")
    beta_sq = spectral_norm(a.matrix) ** 2
    return (1.0 - beta_sq) / (1.0 + beta_sq)


def induced_automorphism(sig: PontryaginSignature, t,
                         rep_tol: float = REP_TOL) -> BallAutomorphism:
    """Wrap an eta-preserving matrix as the ball automorphism w_T."""
    ok, defect = is_J_unitary(sig, t, tol=rep_tol)
    if not ok:
        raise NotEtaPreserving(f"||T*JT - J|| = {defect:.3e} > {rep_tol!r}")
    return BallAutomorphism(t, sig.n_plus, sig.n_minus,
                            aut_tol=max(rep_tol, 10 * defect))


def unitarizer_matrix(sig: PontryaginSignature, d: BallPoint) -> np.ndarray:
    """The eta-preserving U mapping L(D) onto the K component:

    U = [[ (1-DD*)^{-1/2},      -D (1-D*D)^{-1/2} ],
         [ -D* (1-DD*)^{-1/2},   (1-D*D)^{-1/2}   ]]
    """
    if d.shape != (sig.n_plus, sig.n_minus):
        raise ShapeMismatch(f"point shape {d.shape} != "
                            f"{(sig.n_plus, sig.n_minus)}")
    dm = d.matrix
    p, q = dm.shape
    left = inv_sqrtm_psd(np.eye(p) - dm @ adjoint(dm))
    right = inv_sqrtm_psd(np.eye(q) - adjoint(dm) @ dm)
    return np.block([[left, -dm @ right], [-adjoint(dm) @ left, right]])


# --- finite groups and their representations --------------------------------


def _cyclic_table(n: int) -> np.ndarray:
    return np.array([[(i + j) % n for j in range(n)] for i in range(n)])


def _symmetric3_table() -> np.ndarray:
    elems = list(itertools.permutations(range(3)))
    index = {e: k for k, e in enumerate(elems)}
    n = len(elems)
    table = np.zeros((n, n), dtype=int)
    for ai, a in enumerate(elems):
        for bi, b in enumerate(elems):
            table[ai, bi] = index[tuple(a[b[x]] for x in range(3))]
    return table


def _quaternion_table() -> np.ndarray:
    eye = np.eye(2, dtype=np.complex128)
    i = np.array([[1j, 0], [0, -1j]])
    j = np.array([[0, 1], [-1, 0]], dtype=np.complex128)
    k = i @ j
    units = [eye, -eye, i, -i, j, -j, k, -k]
    table = np.zeros((8, 8), dtype=int)
    for a in range(8):
        for b in range(8):
            prod = units[a] @ units[b]
            table[a, b] = next(c for c in range(8)
                               if np.allclose(prod, units[c]))
    return table


def group_table(name: str) -> np.ndarray:
    """Multiplication table of a named finite group: C<n>, S3, or Q8."""
    name = name.strip().upper()
    if name.startswith("C") and name[1:].isdigit() and int(name[1:]) >= 1:
        return _cyclic_table(int(name[1:]))
    if name == "S3":
        return _symmetric3_table()
    if name == "Q8":
        return _quaternion_table()
    raise UnknownGroup(f"no table for group {name!r}")


def _validate_table(table: np.ndarray) -> int:
    """Check group-table sanity and return the identity index."""
    n = len(table)
    if table.shape != (n, n) or table.min() < 0 or table.max() >= n:
        raise ValueError("multiplication table must be square over 0..n-1")
    for g in range(n):
        if len(set(int(x) for x in table[g])) != n:
            raise ValueError(f"row {g} of the table is not a permutation")
        if len(set(int(table[h][g]) for h in range(n))) != n:
            raise ValueError(f"column {g} of the table is not a permutation")
    ident = [g for g in range(n)
             if all(int(table[g][h]) == h and int(table[h][g]) == h
                    for h in range(n))]
    if len(ident) != 1:
        raise ValueError("table has no two-sided identity")
    return ident[0]


def regular_representation(table: np.ndarray) -> list:
    """Permutation matrices of the left regular action."""
    n = len(table)
    mats = []
    for g in range(n):
        m = np.zeros((n, n), dtype=np.complex128)
        for h in range(n):
            m[table[g][h], h] = 1.0
        mats.append(m)
    return mats


def _irrep_classes(table: np.ndarray, rng) -> list:
    """One unitary representative per irreducible isomorphism class,
    extracted from the regular representation.

    A Reynolds-averaged random Hermitian matrix commutes with the regular
    action, so its eigenspaces are invariant; for a generic average they
    carry exactly one irreducible each, and characters cluster the copies
    into isomorphism classes.
    """
    n = len(table)
    reg = regular_representation(table)
    h = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = (h + adjoint(h)) / 2.0
    avg = sum(m @ h @ adjoint(m) for m in reg) / n
    lam, vecs = np.linalg.eigh(avg)
    spans = []
    start = 0
    for k in range(1, n + 1):
        if k == n or lam[k] - lam[k - 1] > 1e-7 * max(1.0, abs(lam[k])):
            spans.append(vecs[:, start:k])
            start = k
    subreps = [[adjoint(b) @ m @ b for m in reg] for b in spans]
    chars = [np.array([np.trace(m) for m in mats]) for mats in subreps]
    classes = []
    used = [False] * len(subreps)
    for a in range(len(subreps)):
        if used[a]:
            continue
        used[a] = True
        classes.append(subreps[a])
        for b in range(a + 1, len(subreps)):
            if not used[b] and abs(np.vdot(chars[a], chars[b])) / n > 0.5:
                used[b] = True
    return classes


def _assemble_block(classes, dim: int, allowed, rng) -> Optional[list]:
    """Direct sum of irreducibles from the allowed classes filling ``dim``
    exactly (repetition permitted), dressed by a random unitary."""
    dims = {c: classes[c][0].shape[0] for c in allowed}
    reach = {0: []}
    for target in range(1, dim + 1):
        for c in allowed:
            if target - dims[c] in reach:
                reach[target] = reach[target - dims[c]] + [c]
                break
    if dim not in reach:
        return None
    choice = list(reach[dim])
    rng.shuffle(choice)
    n_elems = len(classes[0])
    dress = random_unitary(rng, dim)
    out = []
    for g in range(n_elems):
        m = np.zeros((dim, dim), dtype=np.complex128)
        ofs = 0
        for c in choice:
            blk = classes[c][g]
            k = blk.shape[0]
            m[ofs:ofs + k, ofs:ofs + k] = blk
            ofs += k
        out.append(dress @ m @ adjoint(dress))
    return out


class Representation:
    """A finite group given by its multiplication table together with one
    matrix per element."""

    __slots__ = ("signature", "table", "images", "bound", "eta_defect",
                 "identity_index")

    def __init__(self, signature: PontryaginSignature, table, images,
                 rep_tol: float = REP_TOL):
        table = np.asarray(table, dtype=int)
        ident = _validate_table(table)
        images = [as_matrix(m, name=f"image {k}") for k, m in enumerate(images)]
        n = len(table)
        if len(images) != n:
            raise ValueError(f"need {n} images, got {len(images)}")
        dim = signature.dim
        for m in images:
            if m.shape != (dim, dim):
                raise ShapeMismatch(f"image shape {m.shape} != {(dim, dim)}")
        if spectral_norm(images[ident] - np.eye(dim)) > rep_tol:
            raise ValueError("identity element must map to the identity matrix")
        worst = 0.0
        for g in range(n):
            for h in range(n):
                worst = max(worst, spectral_norm(
                    images[int(table[g][h])] - images[g] @ images[h]))
        if worst > rep_tol:
            raise ValueError(f"homomorphism defect {worst:.3e} > {rep_tol!r}")
        j = signature.j
        self.eta_defect = max(
            spectral_norm(adjoint(m) @ j @ m - j) for m in images)
        self.signature = signature
        self.table = table
        self.images = images
        self.bound = max(spectral_norm(m) for m in images)
        self.identity_index = ident

    @property
    def group_order(self) -> int:
        return len(self.images)

    def eta_preserving(self, rep_tol: float = REP_TOL) -> bool:
        return self.eta_defect <= rep_tol

    def __repr__(self):
        return (f"Representation(order={self.group_order}, "
                f"sig=({self.signature.n_plus},{self.signature.n_minus}), "
                f"bound={self.bound:.3g})")


def make_test_representation(group: Union[str, np.ndarray],
                             sig: PontryaginSignature,
                             conditioning: float = 2.0,
                             seed: int = 0) -> Representation:
    """Generate pi = V tau V^{-1} with tau a random block-diagonal unitary
    representation and V eta-preserving of the requested conditioning.

    The H and K blocks of tau draw from disjoint irreducible classes when
    the dimensions allow it, which makes the induced fixed point unique;
    deterministic per seed.
    """
    if conditioning < 1.0:
        raise ValueError("conditioning must be >= 1")
    table = group_table(group) if isinstance(group, str) else np.asarray(group,
                                                                         dtype=int)
    _validate_table(table)
    rng = rng_from(seed)
    classes = _irrep_classes(table, rng)
    p, q = sig.n_plus, sig.n_minus

    order = list(rng.permutation(len(classes)))
    rep_h = rep_k = None
    for k_count in range(1, len(classes)):
        rep_k = _assemble_block(classes, q, order[:k_count], rng)
        rep_h = _assemble_block(classes, p, order[k_count:], rng)
        if rep_k is not None and rep_h is not None:
            break
        rep_h = rep_k = None
    if rep_h is None:
        everything = list(range(len(classes)))
        rep_k = _assemble_block(classes, q, everything, rng)
        rep_h = _assemble_block(classes, p, everything, rng)

    v = random_eta_preserving(rng, p, q, conditioning)
    v_inv = np.linalg.inv(v)
    images = []
    for g in range(len(table)):
        tau = np.zeros((sig.dim, sig.dim), dtype=np.complex128)
        tau[:p, :p] = rep_h[g]
        tau[p:, p:] = rep_k[g]
        images.append(v @ tau @ v_inv)
    return Representation(sig, table, images)


# --- unitarization and dual pairs --------------------------------------------


class UnitarizationResult(NamedTuple):
    similarity: np.ndarray
    unitary_rep: Representation
    fixed_point: BallPoint


def unitarize(rep: Representation, fp_tol: float = FP_TOL,
              unit_tol: float = UNIT_TOL, rep_tol: float = REP_TOL,
              max_iter: int = MAX_ITER,
              mode: str = "midpoint-descent") -> UnitarizationResult:
    """Similarity onto a unitary representation.

    Finds a common fixed point D of the induced automorphisms w_{pi(g)},
    builds U = unitarizer_matrix(D), and returns tau(g) = U pi(g) U^{-1};
    tau preserves eta and leaves the K component invariant, hence is
    unitary.
    """
    if rep.eta_defect > rep_tol:
        raise NotEtaPreserving(
            f"representation eta-defect {rep.eta_defect:.3e} > {rep_tol!r}")
    sig = rep.signature
    autos = [induced_automorphism(sig, m, rep_tol=rep_tol) for m in rep.images]
    group = AutomorphismGroup(elements=autos, table=rep.table)
    try:
        result = find_fixed_point(group, fp_tol=fp_tol, max_iter=max_iter,
                                  mode=mode)
    except NotElliptic as exc:
        raise FixedPointFailed(str(exc)) from exc
    if not result.converged:
        raise FixedPointFailed(
            f"solver stalled at displacement {result.displacement:.3e}")
    d = result.point
    u = unitarizer_matrix(sig, d)
    u_inv = np.linalg.inv(u)
    tau = [u @ m @ u_inv for m in rep.images]
    unitary_rep = Representation(sig, rep.table, tau, rep_tol=rep_tol)
    eye = np.eye(sig.dim)
    defect = max(spectral_norm(adjoint(m) @ m - eye) for m in tau)
    if defect > unit_tol:
        raise FixedPointFailed(f"unitarity defect {defect:.3e} > {unit_tol!r}")
    return UnitarizationResult(similarity=u, unitary_rep=unitary_rep,
                               fixed_point=d)


@dataclass(frozen=True)
class DualPair:
    """An invariant decomposition into a positive and a negative subspace,
    stored as orthonormal column bases."""

    positive_basis: np.ndarray
    negative_basis: np.ndarray

    def __post_init__(self):
        pos, neg = self.positive_basis, self.negative_basis
        dim = pos.shape[0]
        if neg.shape[0] != dim or pos.shape[1] + neg.shape[1] != dim:
            raise ShapeMismatch("component dimensions must fill the space")
        stacked = np.hstack([pos, neg])
        if np.linalg.svd(stacked, compute_uv=False)[-1] < 1e-10:
            raise DegenerateSplit("components do not span the space")


def _orthonormal_columns(b: np.ndarray) -> np.ndarray:
    qmat, _ = np.linalg.qr(b)
    return qmat


def dual_pair(rep: Representation, split_tol: float = SPLIT_TOL,
              **unitarize_kwargs) -> DualPair:
    """Invariant dual pair for a bounded group of J-unitary matrices.

    With T = U^{-1} (the similarity onto the unitary representation), the
    invertible Hermitian R = T*JT commutes with the unitarized group; its
    positive and negative spectral subspaces push forward through T to the
    invariant pair.
    """
    # invariance quality of the pair tracks the fixed-point residual, so
    # solve tighter than the unitarization default unless told otherwise
    unitarize_kwargs.setdefault("fp_tol", 1e-11)
    res = unitarize(rep, **unitarize_kwargs)
    sig = rep.signature
    t = np.linalg.inv(res.similarity)
    r = adjoint(t) @ sig.j @ t
    lam, vecs = hermitian_eig(r)
    if np.any(np.abs(lam) < split_tol):
        raise DegenerateSplit(
            f"eigenvalue {lam[np.abs(lam).argmin()]!r} too close to 0")
    neg = vecs[:, lam < 0.0]
    pos = vecs[:, lam > 0.0]
    if neg.shape[1] != sig.n_minus:
        raise DegenerateSplit(
            f"negative spectral dimension {neg.shape[1]} != {sig.n_minus}")
    positive = _orthonormal_columns(t @ pos)
    negative = _orthonormal_columns(t @ neg)
    for basis, sign, label in ((positive, 1.0, "positive"),
                               (negative, -1.0, "negative")):
        gram = adjoint(basis) @ sig.j @ basis
        eig = np.linalg.eigvalsh((gram + adjoint(gram)) / 2.0)
        if (sign * eig).min() <= 0.0:
            raise DegenerateSplit(f"eta not definite on the {label} component")
    return DualPair(positive_basis=positive, negative_basis=negative)


def max_principal_angle(b1: np.ndarray, b2: np.ndarray) -> float:
    """Largest principal angle between the column spans (radians)."""
    return float(np.max(subspace_angles(b1, b2)))
