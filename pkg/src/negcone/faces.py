"""Face-by-face verification that the dual-bounded cone sits inside the
generated effective cone.

Write M for the cone of divisor classes pairing nonnegatively with every
catalog curve, E for the cone spanned by the generator catalog D, and Q for
the set of curves inside the catalog cone that pair nonnegatively with all of
D (the dual of E + M).  Suppose some extreme ray v of M escaped E.  Then v
spans an extreme ray of E + M, so it pairs to zero with some nonzero x in Q;
x decomposes over Q's extreme rays, v pairs nonnegatively with each of them,
hence v pairs to zero with one, say q, and v lies on the face F(q) cut out of
M by q.  Certifying every extreme ray of every F(q) as a nonnegative
combination of D therefore proves M is contained in E.

Q is assembled without enumerating M: the dual of E is computed by double
description, and each of its extreme rays is Farkas-certified inside the
catalog curve cone.  Once every ray passes, the dual of E lies inside the
catalog cone, so it equals Q exactly; a failed certificate aborts the run.
Faces are computed once per relabeling orbit and transported to the other
rays by the group action; every transported certificate is re-verified by
direct arithmetic before it is accepted.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .catalog import orbits
from .kernel import InequalitySystem, cone_member, extreme_rays
from .linalg import Q, mat_vec, pair, primitive, rank, vneg


class VerificationFailure(Exception):
    """A ray escaped the generated cone; carries the exact counterexample."""

    def __init__(self, message, ray=None, separator=None, context=None):
        super().__init__(message)
        self.ray = ray
        self.separator = separator
        self.context = context or {}


@dataclass(frozen=True)
class Face:
    curve: tuple
    closure: frozenset  # curve ids vanishing on the face
    system: InequalitySystem


@dataclass(frozen=True)
class FaceCertificate:
    face: Face
    rays: tuple
    memberships: tuple  # per ray: dict divisor id -> positive rational


@dataclass(frozen=True)
class CoveringClass:
    representative: tuple
    orbit_size: int
    status: str  # 'initial' | 'subordinate' | 'degenerate'
    covered_by: tuple  # representative of an initial class whose face translates contain this one
    face_rank: int
    face_ray_count: int
    closure_size: int


@dataclass(frozen=True)
class TheoremCertificate:
    space_id: str
    q_rays: tuple
    faces: tuple  # FaceCertificate per q-ray, aligned with q_rays
    classes: tuple
    runtime: float


def q_nef_precheck(space, curve_vec):
    """Require membership in the catalog curve cone and nonnegativity against D."""
    curve_vec = tuple(curve_vec)
    for d in space.divisors:
        if space.pair(d.cls, curve_vec) < 0:
            raise ValueError(f"class pairs negatively with {d.name}")
    answer = cone_member(curve_vec, [c.cls for c in space.curves])
    if not answer.is_member:
        raise ValueError("class is not generated by the negative-curve catalog")
    return answer.combination


def face_closure(space, curve_vec, witnesses=None):
    """Curve ids vanishing on F(curve) = M cut by curve = 0.

    A candidate c' vanishes there iff -c' lies in the cone spanned by the
    catalog and -curve.  Interior witnesses from failed membership tests are
    kept so most candidates are settled by a single pairing evaluation.
    """
    gens = [c.cls for c in space.curves] + [vneg(tuple(curve_vec))]
    witnesses = witnesses if witnesses is not None else []
    out = set()
    for ci, c in enumerate(space.curves):
        if any(pair(w, c.cls) != 0 for w in witnesses):
            continue
        answer = cone_member(vneg(c.cls), gens)
        if answer.is_member:
            out.add(ci)
        else:
            witnesses.append(answer.separator)
    return frozenset(out)


def _face_from_closure(space, curve_vec, closure):
    eqs = tuple(sorted({space.curves[i].cls for i in closure} | {curve_vec}))
    ineqs = tuple(sorted(c.cls for i, c in enumerate(space.curves) if i not in closure))
    return Face(curve=curve_vec, closure=closure,
                system=InequalitySystem(inequalities=ineqs, equalities=eqs,
                                        basis_id=space.space_id + ":divisor"))


def face_of(space, curve_vec):
    """Assemble the face of M where the given generated nef class vanishes."""
    curve_vec = primitive(curve_vec)
    if all(x == 0 for x in curve_vec):
        raise ValueError("the zero class has no face")
    q_nef_precheck(space, curve_vec)
    return _face_from_closure(space, curve_vec, face_closure(space, curve_vec))


def face_rays(space, face, ray_limit=None):
    """Extreme rays of the face; a line here means the catalog itself is broken."""
    return extreme_rays(face.system, space.rank, ray_limit=ray_limit).rays


def certify_containment(space, face, rays):
    """Farkas-certify each face ray inside the generated cone, or fail with the
    exact separating functional."""
    gens = [d.cls for d in space.divisors]
    memberships = []
    for ray in rays:
        answer = cone_member(ray, gens)
        if not answer.is_member:
            raise VerificationFailure(
                "face ray escapes the generated effective cone",
                ray=ray, separator=answer.separator,
                context={"face_curve": face.curve})
        memberships.append(dict(answer.combination))
    return FaceCertificate(face=face, rays=tuple(rays), memberships=tuple(memberships))


def mov_cone_rays(space, ray_limit=None):
    """Extreme rays of M = {divisor classes pairing >= 0 with every catalog curve}."""
    sys = InequalitySystem(inequalities=tuple(c.cls for c in space.curves),
                           basis_id=space.space_id + ":divisor")
    return extreme_rays(sys, space.rank, ray_limit=ray_limit).rays


def q_cone_rays(space, ray_limit=None, with_certificates=False):
    """Extreme rays of Q, with a membership certificate in the catalog cone each.

    The rays of the dual of E are enumerated first; certifying all of them
    inside the catalog curve cone proves the dual of E already lies in it, so
    the intersection defining Q is the dual of E itself and the enumeration is
    complete.  A ray failing certification aborts: Q would then be a proper
    subcone this route cannot assemble.
    """
    sys = InequalitySystem(inequalities=tuple(d.cls for d in space.divisors),
                           basis_id=space.space_id + ":curve")
    dual = extreme_rays(sys, space.rank, ray_limit=ray_limit)
    catalog = [c.cls for c in space.curves]
    combos = {}
    for r in dual.rays:
        answer = cone_member(r, catalog)
        if not answer.is_member:
            raise VerificationFailure(
                "dual ray not generated by the negative-curve catalog",
                ray=r, separator=answer.separator)
        combos[r] = answer.combination
    return (dual.rays, combos) if with_certificates else dual.rays


def _transporters(space, rep, members, side="curve"):
    """For each orbit member, the index of one group element sending rep to it."""
    out = {}
    want = set(members)
    for gi, act in enumerate(space.group()):
        mat = act.on_curves if side == "curve" else act.on_divisors
        img = primitive(mat_vec(mat, rep))
        if img in want and img not in out:
            out[img] = gi
            if len(out) == len(want):
                break
    missing = want - set(out)
    if missing:
        raise ArithmeticError("orbit member unreachable from its representative")
    return out


def _translate_certificate(space, cert, gi, target_vec):
    """Transport a face certificate along group element gi and re-verify it."""
    act = space.group()[gi]
    curve_perm = space.curve_perms()[gi]
    div_perm = space.divisor_perms()[gi]
    closure = frozenset(curve_perm[i] for i in cert.face.closure)
    rays = tuple(sorted(primitive(mat_vec(act.on_divisors, r)) for r in cert.rays))
    order = sorted(range(len(cert.rays)),
                   key=lambda k: primitive(mat_vec(act.on_divisors, cert.rays[k])))
    memberships = tuple(
        {div_perm[d]: w for d, w in cert.memberships[k].items()} for k in order
    )
    face = _face_from_closure(space, target_vec, closure)
    _verify_face_certificate(space, face, rays, memberships)
    return FaceCertificate(face=face, rays=rays, memberships=memberships)


def _verify_face_certificate(space, face, rays, memberships):
    """Exact re-verification: rays satisfy the face system; combinations match."""
    for ray, comb in zip(rays, memberships):
        if space.pair(face.curve, ray) != 0:
            raise ArithmeticError("transported ray leaves the defining hyperplane")
        for i in face.closure:
            if space.pair(space.curves[i].cls, ray) != 0:
                raise ArithmeticError("transported ray misses a closure equality")
        for ci, c in enumerate(space.curves):
            if ci not in face.closure and space.pair(c.cls, ray) < 0:
                raise ArithmeticError("transported ray violates a catalog inequality")
        acc = [Q(0)] * space.rank
        for d, w in comb.items():
            if w < 0:
                raise ArithmeticError("negative weight in transported membership")
            for k in range(space.rank):
                acc[k] += w * space.divisors[d].cls[k]
        if tuple(acc) != tuple(Q(x) for x in ray):
            raise ArithmeticError("transported membership does not reconstruct its ray")


def verify_effective_cone(space, ray_limit=None):
    """Run the whole face route and return the assembled certificate."""
    t0 = time.time()
    q_rays, q_combos = q_cone_rays(space, ray_limit=ray_limit, with_certificates=True)
    orbit_list = orbits(space, q_rays, side="curve")

    cert_by_ray = {}
    class_data = []
    for orbit in orbit_list:
        rep = orbit[0]
        witnesses = []
        closure = face_closure(space, rep, witnesses)
        face = _face_from_closure(space, rep, closure)
        rays = face_rays(space, face, ray_limit=ray_limit)
        rep_cert = certify_containment(space, face, rays)
        cert_by_ray[rep] = rep_cert
        transporters = _transporters(space, rep, orbit)
        for member in orbit:
            if member == rep:
                continue
            cert_by_ray[member] = _translate_certificate(
                space, rep_cert, transporters[member], member)
        class_data.append({"rep": rep, "orbit": orbit, "cert": rep_cert,
                           "witnesses": witnesses})

    classes = _classify(space, class_data)
    faces = tuple(cert_by_ray[q] for q in q_rays)
    return TheoremCertificate(
        space_id=space.space_id,
        q_rays=tuple(q_rays),
        faces=faces,
        classes=classes,
        runtime=time.time() - t0,
    )


def _vanishes_on_rep_face(space, data, vec):
    """Does vec pair to zero on the whole face of this class representative?"""
    for w in data["witnesses"]:
        if pair(w, vec) != 0:
            return False
    closure_vecs = [space.curves[i].cls for i in data["cert"].face.closure]
    return cone_member(tuple(vec), closure_vecs).is_member


def _classify(space, class_data):
    """Rank the ray classes: a class is initial when its face is nonzero and not
    contained in any relabeling translate of another class's face."""
    by_rep = {d["rep"]: d for d in class_data}
    reps = [d["rep"] for d in class_data]

    def nests_into(rep_a, rep_b):
        for v in by_rep[rep_b]["orbit"]:
            if _vanishes_on_rep_face(space, by_rep[rep_a], v):
                return True
        return False

    status = {}
    covered_by = {}
    nondegenerate = [r for r in reps if by_rep[r]["cert"].rays]
    for rep in reps:
        if not by_rep[rep]["cert"].rays:
            status[rep] = "degenerate"
            continue
        dominated = None
        for other in nondegenerate:
            if other == rep:
                continue
            if nests_into(rep, other) and not nests_into(other, rep):
                dominated = other
                break
            if nests_into(rep, other) and nests_into(other, rep) and other < rep:
                dominated = other
                break
        if dominated is None:
            status[rep] = "initial"
            covered_by[rep] = rep
        else:
            status[rep] = "subordinate"
    initial = [r for r in reps if status[r] == "initial"]
    for rep in reps:
        if rep in covered_by:
            continue
        hit = next((r for r in initial
                    if status[rep] == "degenerate" or nests_into(rep, r)), None)
        covered_by[rep] = hit if hit is not None else rep
    out = []
    for d in class_data:
        rep = d["rep"]
        cert = d["cert"]
        out.append(CoveringClass(
            representative=rep,
            orbit_size=len(d["orbit"]),
            status=status[rep],
            covered_by=covered_by[rep],
            face_rank=rank(list(cert.rays)) if cert.rays else 0,
            face_ray_count=len(cert.rays),
            closure_size=len(cert.face.closure),
        ))
    return tuple(sorted(out, key=lambda c: (c.status != "initial", c.representative)))


def covering_classes(space, certificate=None, ray_limit=None):
    """Covering classification; computes the full certificate when not supplied."""
    if certificate is None:
        certificate = verify_effective_cone(space, ray_limit=ray_limit)
    return certificate.classes
