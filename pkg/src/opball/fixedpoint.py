"""Orbits, ellipticity certification, and common fixed points of finite
groups of ball automorphisms.

The solver minimizes the displacement f(X) = max_g rho(X, w_g(X)), which
is convex along geodesics and vanishes exactly on the common fixed-point
set.  The default mode steps toward the rho-midpoint of X and the image
under the worst group element, with backtracking; the alternative mode
iterates the Chebyshev center of the orbit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .errors import (
    ClosureExceeded,
    MaxIterations,
    NotElliptic,
    NotEtaPreserving,
    PreconditionUnmet,
)
from .hyperbolic import (
    MetricSample,
    _atanh,
    barycenter_sequence,
    convex_combination,
    distance,
    distances_from,
    th_map,
)
from .mobius import (
    BallAutomorphism,
    BallPoint,
    automorphism_apply,
    automorphism_compose,
    mobius_as_block,
    mobius_matrix,
    zero_point,
)
from .opcore import adjoint, hermitian_eig, spectral_norm
from .sampling import probe_points

GROUP_TOL = 1e-8
ELLIPTIC_MARGIN = 1e-6
FP_TOL = 1e-9
CHEB_TOL = 1e-7
MAX_ELEMENTS = 256
MAX_ITER = 5000


@dataclass
class AutomorphismGroup:
    """A finite set of automorphisms closed under composition.

    ``table[i][j]`` indexes the element acting like elements[i] after
    elements[j]; ``generated_from`` records which elements were the
    closure seeds.
    """

    elements: list
    table: Optional[np.ndarray] = None
    generated_from: Sequence[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.elements:
            raise ValueError("group needs at least one element")
        first = self.elements[0]
        self.dim_h, self.dim_k = first.dim_h, first.dim_k
        self._blocks = np.stack([t.block for t in self.elements])

    def __len__(self):
        return len(self.elements)

    def apply_all(self, x: BallPoint) -> np.ndarray:
        """Stacked w_g(x) over all elements (batched fractional-linear)."""
        p = self.dim_h
        blocks = self._blocks
        num = blocks[:, :p, :p] @ x.matrix + blocks[:, :p, p:]
        den = blocks[:, p:, :p] @ x.matrix + blocks[:, p:, p:]
        return num @ np.linalg.inv(den)


# probe images closer to the boundary than this cannot be compared reliably
# in rho; such automorphisms are treated as distinct from everything (only
# runaway, non-elliptic sequences produce them)
_PROBE_MARGIN_FLOOR = 1e-10


def _action_signature(t: BallAutomorphism, probe_mats) -> Optional[np.ndarray]:
    """Raw w_T images of the probes, or None when the action degenerates."""
    p = t.dim_h
    t11, t12, t21, t22 = t.blocks()
    out = np.empty((len(probe_mats), p, t.dim_k), dtype=np.complex128)
    for k, pm in enumerate(probe_mats):
        den = t21 @ pm + t22
        try:
            out[k] = (t11 @ pm + t12) @ np.linalg.inv(den)
        except np.linalg.LinAlgError:
            return None
    return out


def group_closure(generators: Sequence[BallAutomorphism],
                  max_elements: int = MAX_ELEMENTS,
                  group_tol: float = GROUP_TOL) -> AutomorphismGroup:
    """Close a generator set under composition.

    Elements are deduplicated by the rho-distance of their action on a
    fixed seeded probe set (block matrices are only defined up to a scalar;
    the action is the semantic identity).  Raises ``ClosureExceeded`` when
    the group is infinite or larger than ``max_elements``.
    """
    if not generators:
        raise ValueError("need at least one generator")
    p, q = generators[0].dim_h, generators[0].dim_k
    for g in generators:
        if (g.dim_h, g.dim_k) != (p, q):
            raise ValueError("generators must share one split")
    probe_mats = [pt.matrix for pt in probe_points(p, q)]
    n_probes = len(probe_mats)

    elements: list = []
    sigs = np.empty((0, n_probes, p, q), dtype=np.complex128)
    healthy = np.empty(0, dtype=bool)

    def find(sig) -> Optional[int]:
        if sig is None or len(elements) == 0:
            return None
        margins = 1.0 - np.linalg.svd(sig, compute_uv=False)[:, 0]
        if margins.min() < _PROBE_MARGIN_FLOOR:
            return None
        worst = np.zeros(len(elements))
        for k in range(n_probes):
            worst = np.maximum(worst, np.where(
                healthy,
                distances_from(sig[k], sigs[:, k], saturate=True),
                np.inf))
        hit = int(np.argmin(worst))
        return hit if worst[hit] < group_tol else None

    def add(t: BallAutomorphism, sig) -> int:
        nonlocal sigs, healthy
        if len(elements) >= max_elements:
            raise ClosureExceeded(max_elements)
        elements.append(t)
        if sig is None:
            sig = np.zeros((n_probes, p, q), dtype=np.complex128)
            ok = False
        else:
            margins = 1.0 - np.linalg.svd(sig, compute_uv=False)[:, 0]
            ok = bool(margins.min() >= _PROBE_MARGIN_FLOOR)
        sigs = np.concatenate([sigs, sig[None]])
        healthy = np.append(healthy, ok)
        return len(elements) - 1

    def lookup_or_add(t: BallAutomorphism):
        sig = _action_signature(t, probe_mats)
        idx = find(sig)
        if idx is not None:
            return idx, False
        return add(t, sig), True

    lookup_or_add(BallAutomorphism.identity(p, q))
    gen_indices = []
    for g in generators:
        idx, _ = lookup_or_add(g)
        gen_indices.append(idx)
        lookup_or_add(g.inverse())

    products = {}
    frontier = list(range(len(elements)))
    while frontier:
        fresh = []
        known = len(elements)
        for i, j in itertools.chain(
                itertools.product(frontier, range(known)),
                itertools.product(range(known), frontier)):
            if (i, j) in products:
                continue
            try:
                comp = automorphism_compose(elements[i], elements[j])
            except NotEtaPreserving as exc:
                # products of an elliptic finite set never saturate double
                # precision; losing eta mid-closure means unbounded growth
                raise ClosureExceeded(
                    max_elements,
                    "composition chain saturated floating point; group "
                    "closure does not terminate") from exc
            idx, is_new = lookup_or_add(comp)
            if is_new:
                fresh.append(idx)
            products[(i, j)] = idx
        frontier = fresh

    n = len(elements)
    table = np.zeros((n, n), dtype=int)
    for i in range(n):
        for j in range(n):
            idx = products.get((i, j))
            if idx is None:
                comp = automorphism_compose(elements[i], elements[j])
                idx = find(_action_signature(comp, probe_mats))
            if idx is None:
                raise ArithmeticError(
                    f"closure inconsistent: product ({i}, {j}) matches no "
                    f"element at group_tol = {group_tol!r}")
            table[i, j] = idx
    return AutomorphismGroup(elements=elements, table=table,
                             generated_from=gen_indices)


def orbit(group: AutomorphismGroup, x0: BallPoint) -> MetricSample:
    """The sample {w_g(x0) : g in group} with its pairwise rho-table."""
    images = group.apply_all(x0)
    return MetricSample([BallPoint(m, boundary_tol=0.0) for m in images])


def is_elliptic(group: AutomorphismGroup, x0: BallPoint,
                elliptic_margin: float = ELLIPTIC_MARGIN):
    """Whether the orbit of x0 stays norm-separated from the boundary.
    Returns ``(elliptic, sup_norm)``."""
    images = group.apply_all(x0)
    sup_norm = float(np.linalg.svd(images, compute_uv=False)[:, 0].max())
    return sup_norm <= 1.0 - elliptic_margin, sup_norm


def displacement(group: AutomorphismGroup, x: BallPoint) -> float:
    """f(X) = max_g rho(X, w_g(X)); zero exactly on common fixed points."""
    return float(distances_from(x.matrix, group.apply_all(x)).max())


@dataclass(frozen=True)
class FixedPointResult:
    point: BallPoint
    displacement: float
    iterations: int
    converged: bool
    history: Optional[list] = None


def _min_norm_combination(grads):
    """Minimum-norm point of the convex hull of the flattened matrices;
    a tiny simplex QP solved with SLSQP."""
    k = len(grads)
    if k == 1:
        return grads[0]
    g = np.stack([x.ravel() for x in grads])
    q = np.real(g @ g.conj().T)
    res = minimize(lambda lam: lam @ q @ lam, np.full(k, 1.0 / k),
                   jac=lambda lam: 2.0 * q @ lam, method="SLSQP",
                   bounds=[(0.0, 1.0)] * k,
                   constraints=[{"type": "eq",
                                 "fun": lambda lam: lam.sum() - 1.0,
                                 "jac": lambda lam: np.ones_like(lam)}],
                   options={"maxiter": 300, "ftol": 1e-18})
    lam = np.clip(res.x, 0.0, None)
    lam /= lam.sum()
    return sum(l * x for l, x in zip(lam, grads))


def _top_singular_outer(mat, rel_tol=1e-9):
    """Outer products u v* over the near-maximal singular pairs; these span
    the subdifferential of the spectral norm at mat."""
    u, s, vh = np.linalg.svd(mat)
    out = []
    for k in range(len(s)):
        if s[k] >= s[0] - rel_tol * max(s[0], 1.0):
            out.append(np.outer(u[:, k], vh[k, :]))
    return out


def chebyshev_center(sample: MetricSample, cheb_tol: float = CHEB_TOL,
                     max_iter: int = 300):
    """Center and radius of the minimal enclosing rho-ball of the sample.

    Descends R(X) = max_i rho(X, p_i) along the minimum-norm element of the
    eps-active subdifferential, lifted to the chart at the current center,
    with an exact convex line search per step.  R is rho-convex, so the
    no-descent-direction condition certifies (eps-)optimality.
    """
    pts = list(sample.points)
    n = len(pts)
    if n == 1:
        return pts[0], 0.0
    if n == 2:
        center = convex_combination(pts[0], pts[1], 0.5)
        return center, float(max(distance(center, p) for p in pts))
    mats = np.stack([p.matrix for p in pts])

    def radius_at(xm) -> float:
        return float(distances_from(xm, mats).max())

    x = barycenter_sequence(pts)
    r = radius_at(x.matrix)
    floor = 10.0 * cheb_tol
    for _ in range(max_iter):
        lifted = [mobius_matrix(-x.matrix, m) for m in mats]
        rho = np.array([_atanh(spectral_norm(z)) for z in lifted])
        big = rho.max()
        if big <= cheb_tol:
            return x, big
        improved = False
        slack = max(floor, 0.05 * big)
        while True:
            grads = []
            for i in range(n):
                if rho[i] >= big - slack:
                    grads.extend(_top_singular_outer(lifted[i]))
            w = _min_norm_combination(grads)
            if float(np.linalg.norm(w)) >= 1e-9:
                wdir = w / spectral_norm(w)

                def line(t):
                    return radius_at(mobius_matrix(x.matrix, th_map(t * wdir)))

                res = minimize_scalar(line, bounds=(0.0, big), method="bounded",
                                      options={"xatol": 1e-13})
                if res.fun < r - max(cheb_tol * 1e-3, 1e-15):
                    x = BallPoint(mobius_matrix(x.matrix,
                                                th_map(float(res.x) * wdir)),
                                  boundary_tol=0.0)
                    r = min(float(res.fun), r)
                    improved = True
                    break
            if slack <= floor:
                break
            slack = max(floor, slack / 8.0)
        if not improved:
            return x, r
    raise MaxIterations(f"no convergence in {max_iter} center iterations")


def find_fixed_point(group: AutomorphismGroup, x0: Optional[BallPoint] = None,
                     fp_tol: float = FP_TOL, max_iter: int = MAX_ITER,
                     mode: str = "midpoint-descent",
                     elliptic_margin: float = ELLIPTIC_MARGIN,
                     record_history: bool = False) -> FixedPointResult:
    """Common fixed point of an elliptic automorphism group.

    Starts from the running barycenter of the orbit of ``x0`` (default 0)
    and descends the displacement.  ``mode`` selects midpoint descent with
    backtracking or Chebyshev-center iteration.  Which point of a
    non-trivial fixed-point set is returned is implementation-defined.
    """
    if mode not in ("midpoint-descent", "chebyshev-iterate"):
        raise ValueError(f"unknown mode {mode!r}")
    if x0 is None:
        x0 = zero_point(group.dim_h, group.dim_k)
    elliptic, sup_norm = is_elliptic(group, x0, elliptic_margin)
    if not elliptic:
        raise NotElliptic(f"orbit sup-norm {sup_norm!r} within "
                          f"{elliptic_margin!r} of the boundary")

    x = barycenter_sequence(
        [BallPoint(m, boundary_tol=0.0) for m in group.apply_all(x0)])
    f = displacement(group, x)
    history = [f]
    iterations = 0

    while f > fp_tol and iterations < max_iter:
        iterations += 1
        if mode == "chebyshev-iterate":
            cand, _ = chebyshev_center(orbit(group, x),
                                       cheb_tol=max(fp_tol * 0.1, 1e-12))
            fc = displacement(group, cand)
            if fc >= f:
                break
            x, f = cand, fc
        else:
            dists = distances_from(x.matrix, group.apply_all(x))
            worst = group.elements[int(np.argmax(dists))]
            target = automorphism_apply(worst, x)
            lam = 1.0
            improved = False
            while lam > 1e-4:
                cand = convex_combination(x, target, 0.5 * lam)
                fc = displacement(group, cand)
                if fc < f:
                    x, f = cand, fc
                    improved = True
                    break
                lam /= 2.0
            if not improved:
                break
        history.append(f)

    return FixedPointResult(point=x, displacement=f, iterations=iterations,
                            converged=f <= fp_tol,
                            history=history if record_history else None)


class EquicontinuityWitness(NamedTuple):
    x1: BallPoint
    x2: BallPoint
    images: tuple
    input_gap: float
    image_gap: float


def equicontinuity_witness(g: BallAutomorphism,
                           delta: float) -> EquicontinuityWitness:
    """Certify equicontinuity failure for a near-boundary automorphism.

    For g with ||g(0)|| > 1 - delta the pair X1 = 0 and X2 (the pullback of
    half the top spectral slice of g(0)) satisfies ||X2 - X1|| > 1/4 while
    the images under g differ by less than delta.
    """
    if not 0.0 < delta < 0.5:
        raise PreconditionUnmet(f"delta must lie in (0, 1/2), got {delta!r}")
    p, q = g.dim_h, g.dim_k
    x1 = zero_point(p, q)
    a = automorphism_apply(g, x1)
    norm_a = spectral_norm(a.matrix)
    if norm_a <= 1.0 - delta:
        raise PreconditionUnmet(
            f"||g(0)|| = {norm_a!r} not above 1 - delta = {1.0 - delta!r}")

    # linear factor h of g = M_A o h: S = T_{-A} T_g is block diagonal with
    # unitary blocks, acting by X -> S11 X S22^{-1}
    s = automorphism_compose(mobius_as_block(BallPoint(-a.matrix, 0.0)), g)
    s11, _, _, s22 = s.blocks()
    gram = adjoint(a.matrix) @ a.matrix
    lam, vecs = hermitian_eig(gram)
    top = lam >= lam[-1] - 1e-10 * (1.0 + lam[-1])
    proj = vecs[:, top] @ adjoint(vecs[:, top])
    half_slice = 0.5 * a.matrix @ proj
    x2 = BallPoint(np.linalg.solve(s11, half_slice) @ s22, boundary_tol=0.0)

    y1 = automorphism_apply(g, x1)
    y2 = automorphism_apply(g, x2)
    input_gap = spectral_norm(x2.matrix - x1.matrix)
    image_gap = spectral_norm(y2.matrix - y1.matrix)
    if not (input_gap > 0.25 and image_gap < delta):
        raise ArithmeticError(
            f"witness construction failed: input gap {input_gap!r}, "
            f"image gap {image_gap!r}")
    return EquicontinuityWitness(x1=x1, x2=x2, images=(y1, y2),
                                 input_gap=input_gap, image_gap=image_gap)
