"""Exact polyhedral primitives: cone membership with certificates, extreme-ray
enumeration by double description, facet computation, and the positive
row-reduction criterion for sign-structured pairing matrices.

Conventions
-----------
* Vectors are tuples in a fixed basis; functionals act through the diagonal
  intersection pairing (see :mod:`negcone.linalg`).
* Every certificate returned here has already been re-verified by direct
  arithmetic; callers may trust it bit-exactly.
* All outputs are primitive integer vectors in a canonical (lexicographic)
  order, so parallel and repeated runs are identical.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import lp
from .linalg import (
    Q,
    dot,
    is_zero,
    kernel_basis,
    pair,
    primitive,
    rank,
    sign_canonical,
    to_dot_functional,
    vneg,
)


class ConeContainsLine(Exception):
    """The inequality system admits a full line; the cone is not pointed."""

    def __init__(self, lineality):
        super().__init__(f"cone contains {len(lineality)} independent line(s)")
        self.lineality = lineality


class RayBudgetExceeded(Exception):
    """Intermediate ray count passed the configured ceiling."""


@dataclass(frozen=True)
class FarkasAnswer:
    """Either an exact nonnegative combination or an exact separating functional."""

    combination: dict | None = None
    separator: tuple | None = None

    @property
    def is_member(self) -> bool:
        return self.combination is not None


@dataclass(frozen=True)
class InequalitySystem:
    """Homogeneous system: pair(f, x) >= 0 and pair(e, x) = 0 over one basis."""

    inequalities: tuple
    equalities: tuple = ()
    basis_id: str = ""


@dataclass(frozen=True)
class ConeDescription:
    rays: tuple
    lineality: tuple = ()


@dataclass(frozen=True)
class FacetDescription:
    facets: tuple
    span_equations: tuple = ()


def cone_member(target, generators) -> FarkasAnswer:
    """Decide target in nonneg-span(generators), with a verified certificate either way."""
    gens = list(generators)
    if is_zero(target):
        return FarkasAnswer(combination={})
    status, payload = lp.feasible_combination(gens, tuple(target))
    if status == "feasible":
        acc = [Q(0)] * len(target)
        for j, c in payload.items():
            if c < 0:
                raise ArithmeticError("negative coefficient from phase-1 simplex")
            for k in range(len(target)):
                acc[k] += c * gens[j][k]
        if tuple(acc) != tuple(Q(t) for t in target):
            raise ArithmeticError("combination failed exact re-verification")
        return FarkasAnswer(combination=dict(sorted(payload.items())))
    y = payload
    sep = primitive((-y[0],) + tuple(y[1:]))
    if not pair(sep, target) < 0:
        raise ArithmeticError("separator failed exact re-verification on target")
    for g in gens:
        if not pair(sep, g) >= 0:
            raise ArithmeticError("separator failed exact re-verification on a generator")
    return FarkasAnswer(separator=sep)


def _functionals_in_basis(functionals, basis):
    """Express dot-functionals in subspace coordinates given its basis vectors."""
    return [tuple(dot(a, b) for b in basis) for a in functionals]


def _lift(z, basis):
    acc = [0] * len(basis[0])
    for c, b in zip(z, basis):
        for k in range(len(acc)):
            acc[k] += c * b[k]
    return tuple(acc)


def _row_space_basis(rows, dim):
    """Primitive basis of the span of the given integer rows."""
    mat = [list(map(Q, r)) for r in rows if not is_zero(r)]
    basis = []
    r = 0
    for c in range(dim):
        piv = None
        for i in range(r, len(mat)):
            if mat[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = mat[r][c]
        mat[r] = [x / inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        r += 1
    for i in range(r):
        basis.append(sign_canonical(tuple(mat[i])))
    return basis


class _DoubleDescription:
    """Pointed, full-rank double description over the integers.

    The caller guarantees the functionals span the working space, so the cone
    becomes pointed once a rank-sized independent prefix has been processed.
    Adjacency afterwards uses the combinatorial test with a popcount prefilter.
    """

    def __init__(self, functionals, dim, ray_limit=None):
        self.funcs = functionals
        self.dim = dim
        self.ray_limit = ray_limit
        self.processed = []
        self.rays = []  # list of (vector, tight-bitmask over processed order)

    def run(self):
        order = self._prefix_order()
        lineality = [tuple(1 if j == i else 0 for j in range(self.dim)) for i in range(self.dim)]
        for idx in order:
            a = self.funcs[idx]
            self._cut_with_lineality(a, idx, lineality)
        if lineality:
            raise ArithmeticError("rank prefix did not eliminate the lineality space")
        self._prune_to_extreme()
        remaining = [i for i in range(len(self.funcs)) if i not in set(order)]
        while remaining:
            nxt = self._pick_next(remaining)
            remaining.remove(nxt)
            self._cut_pointed(self.funcs[nxt], nxt)
        return [r for r, _ in self.rays]

    def _prefix_order(self):
        chosen = []
        rows = []
        for i, a in enumerate(self.funcs):
            if rank(rows + [a]) > len(rows):
                rows.append(a)
                chosen.append(i)
            if len(chosen) == self.dim:
                break
        if len(chosen) < self.dim:
            raise ArithmeticError("functionals do not span the working space")
        return chosen

    def _cut_with_lineality(self, a, idx, lineality):
        pivot = None
        for l in lineality:
            if dot(a, l) != 0:
                pivot = l
                break
        if pivot is None:
            raise ArithmeticError("independent functional vanished on the lineality space")
        lineality.remove(pivot)
        da = dot(a, pivot)
        if da < 0:
            pivot = vneg(pivot)
            da = -da
        for i, l in enumerate(lineality):
            dl = dot(a, l)
            if dl != 0:
                lineality[i] = primitive(tuple(da * x - dl * y for x, y in zip(l, pivot)))
        new_rays = [primitive(pivot)]
        for r, _ in self.rays:
            dr = dot(a, r)
            if dr == 0:
                new_rays.append(r)
            elif dr > 0:
                new_rays.append(r)
                new_rays.append(primitive(tuple(da * x - dr * y for x, y in zip(r, pivot))))
            else:
                new_rays.append(primitive(tuple(da * x - dr * y for x, y in zip(r, pivot))))
        self.processed.append(idx)
        seen = set()
        rebuilt = []
        for r in new_rays:
            if is_zero(r) or r in seen:
                continue
            seen.add(r)
            rebuilt.append((r, self._mask(r)))
        self.rays = rebuilt

    def _mask(self, r):
        m = 0
        for pos, idx in enumerate(self.processed):
            if dot(self.funcs[idx], r) == 0:
                m |= 1 << pos
        return m

    def _prune_to_extreme(self):
        d = self.dim
        kept = []
        for r, mask in self.rays:
            tight = [self.funcs[idx] for pos, idx in enumerate(self.processed) if mask >> pos & 1]
            if rank(tight) == d - 1:
                kept.append((r, mask))
        self.rays = kept

    def _pick_next(self, remaining):
        best = None
        best_key = None
        for idx in remaining:
            a = self.funcs[idx]
            neg = pos = 0
            for r, _ in self.rays:
                v = dot(a, r)
                if v < 0:
                    neg += 1
                elif v > 0:
                    pos += 1
            key = (neg if neg else -1, neg * pos, idx)
            if best is None or key < best_key:
                best, best_key = idx, key
        return best

    def _cut_pointed(self, a, idx):
        pos_bit = 1 << len(self.processed)
        plus, zero, minus = [], [], []
        for r, mask in self.rays:
            v = dot(a, r)
            if v > 0:
                plus.append((r, mask, v))
            elif v == 0:
                zero.append((r, mask | pos_bit))
            else:
                minus.append((r, mask, v))
        self.processed.append(idx)
        if not minus:
            self.rays = [(r, m | (pos_bit if dot(a, r) == 0 else 0)) for r, m in self.rays]
            return
        need = self.dim - 2  # adjacent rays share at least dim-2 tight functionals
        all_masks = [m for _, m in zero] + [m for _, m, _ in plus] + [m for _, m, _ in minus]
        new = []
        for rp, mp, vp in plus:
            for rm, mm, vm in minus:
                common = mp & mm
                if common.bit_count() < need:
                    continue
                if any(m & common == common and m not in (mp, mm) for m in all_masks):
                    continue
                w = primitive(tuple(vp * x - vm * y for x, y in zip(rm, rp)))
                new.append(w)
        rebuilt = list(zero) + [(r, m) for r, m, _ in plus]
        seen = {r for r, _ in rebuilt}
        for w in new:
            if w not in seen:
                seen.add(w)
                rebuilt.append((w, self._mask(w)))
        if self.ray_limit is not None and len(rebuilt) > self.ray_limit:
            raise RayBudgetExceeded(f"{len(rebuilt)} rays exceed ceiling {self.ray_limit}")
        self.rays = rebuilt


def extreme_rays(system: InequalitySystem, dim: int, *, allow_lines: bool = False,
                 ray_limit: int | None = None):
    """Extreme rays of {x : pair(f,x) >= 0, pair(e,x) = 0}, primitive and sorted.

    Cones containing a line are reported via :class:`ConeContainsLine` unless
    ``allow_lines`` is set, in which case the pointed part is enumerated inside
    a complement of the lineality space and the lines are returned alongside.
    """
    eqs = [to_dot_functional(e) for e in system.equalities]
    sub_basis = kernel_basis(eqs, dim) if eqs else \
        [tuple(1 if j == i else 0 for j in range(dim)) for i in range(dim)]
    if not sub_basis:
        return ConeDescription(rays=())
    funcs_dot = [to_dot_functional(f) for f in system.inequalities]
    funcs_z = [f for f in _functionals_in_basis(funcs_dot, sub_basis) if not is_zero(f)]
    k = len(sub_basis)
    lines_z = kernel_basis(funcs_z, k) if funcs_z else \
        [tuple(1 if j == i else 0 for j in range(k)) for i in range(k)]
    lines = tuple(sorted(sign_canonical(_lift(l, sub_basis)) for l in lines_z))
    if lines and not allow_lines:
        raise ConeContainsLine(lines)
    if not funcs_z:
        return ConeDescription(rays=(), lineality=lines)
    work_basis = _row_space_basis(funcs_z, k)
    funcs_w = _functionals_in_basis(funcs_z, work_basis)
    dd = _DoubleDescription(funcs_w, len(work_basis), ray_limit=ray_limit)
    rays_w = dd.run()
    rays = tuple(sorted(primitive(_lift(_lift(w, work_basis), sub_basis)) for w in rays_w))
    _validate_rays(system, rays, dim, lines)
    return ConeDescription(rays=rays, lineality=lines)


def _validate_rays(system, rays, dim, lines):
    """Soundness gate: each ray satisfies the system, and its tight constraints
    cut out exactly the line spanned by the ray (plus any flagged lineality)."""
    for r in rays:
        tight = [to_dot_functional(e) for e in system.equalities]
        for e in system.equalities:
            if pair(e, r) != 0:
                raise ArithmeticError("double description ray violates an equality")
        for f in system.inequalities:
            v = pair(f, r)
            if v < 0:
                raise ArithmeticError("double description produced an infeasible ray")
            if v == 0:
                tight.append(to_dot_functional(f))
        if rank(tight) != dim - len(lines) - 1:
            raise ArithmeticError("ray is not extreme: tight set has the wrong rank")


def facets(rays) -> FacetDescription:
    """Facet functionals of the cone generated by ``rays``.

    Facets are computed within the linear span; the span's defining equations
    are reported separately.  Functionals are primitive and sorted.
    """
    rays = [tuple(r) for r in rays]
    if not rays:
        return FacetDescription(facets=(), span_equations=())
    dim = len(rays[0])
    dual = extreme_rays(InequalitySystem(inequalities=tuple(rays)), dim, allow_lines=True)
    return FacetDescription(facets=dual.rays, span_equations=dual.lineality)


def rref_positive(matrix):
    """Positive-multiple row reduction on a pairing matrix with negative diagonal.

    Rows may only be added to rows beneath them, and only with positive
    multipliers.  If a nonnegative diagonal entry appears, the accumulated row
    weights (a nonnegative combination of the original rows equal to the
    resulting nonnegative row) are returned; otherwise None.
    """
    n = len(matrix)
    m = [[Q(x) for x in row] for row in matrix]
    if any(len(row) != n for row in m):
        raise ValueError("square matrix required")
    weights = [[Q(1) if i == j else Q(0) for j in range(n)] for i in range(n)]
    for k in range(n):
        if m[k][k] >= 0:
            row = tuple(m[k])
            if any(x < 0 for x in row):
                raise ValueError("sign structure violated: mixed row at a nonnegative pivot")
            return tuple(weights[k]), row
        piv = m[k][k]
        for i in range(k + 1, n):
            below = m[i][k]
            if below < 0:
                raise ValueError("sign structure violated: negative entry below the diagonal")
            if below > 0:
                t = -below / piv
                m[i] = [x + t * y for x, y in zip(m[i], m[k])]
                weights[i] = [x + t * y for x, y in zip(weights[i], weights[k])]
    return None
