"""Catalogs for the moduli spaces with 5 and 6 markings.

A Space bundles the Kapranov-style coordinates, the intersection pairing, the
negative-curve catalog C (each curve tagged with the divisor it sweeps), the
generator catalog D (boundary classes, plus Keel-Vermeire classes for n=6),
and the symmetric-group action on both sides.

Divisor coordinates live in the basis (H, E_i, E_ij); a class written
d*H - sum m_i E_i - sum m_ij E_ij is stored as (d, -m_1, ..., -m_45).  Curve
coordinates use the dual basis (l, e_i, e_ij).  For n=5 the surface
intersection form identifies the two sides and the basis is (H, E_0..E_3).

The boundary dictionary (which side of which marking partition carries which
class) is pinned down by requiring that every relabeling of the markings acts
linearly and consistently on all boundary classes at once; `check_catalog`
re-verifies this along with the sign pattern and the orbit structure, so a
dictionary mistake cannot stay silent.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .linalg import (
    contragredient,
    identity,
    mat_mul,
    mat_vec,
    pair,
    primitive,
)


class CatalogError(Exception):
    """A self-check on the catalog data failed; the dictionary is suspect."""


@dataclass(frozen=True)
class DivisorGen:
    name: str
    cls: tuple
    kind: str  # 'boundary' | 'keel-vermiere'
    label: frozenset


@dataclass(frozen=True)
class NegativeCurve:
    name: str
    cls: tuple
    swept: int  # index into Space.divisors


@dataclass(frozen=True)
class LinearAction:
    perm: tuple  # images of markings 1..n
    on_divisors: tuple
    on_curves: tuple


PAIRS6 = tuple(itertools.combinations(range(1, 6), 2))
TRIPLES6 = tuple(itertools.combinations(range(1, 6), 3))


def _pair_slot(i, j):
    return 6 + PAIRS6.index((min(i, j), max(i, j)))


def format_class(vec, names):
    """Signed expression like '2l-e1-e2-e45' for an integer coordinate vector."""
    parts = []
    for c, name in zip(vec, names):
        if c == 0:
            continue
        mag = abs(c)
        term = name if mag == 1 else f"{mag}{name}"
        parts.append(("-" if c < 0 else "+") + term)
    if not parts:
        return "0"
    out = "".join(parts)
    return out[1:] if out[0] == "+" else out


def canonical_label(markings, n):
    """The canonical side of a boundary partition: size 2, or size 3 containing n."""
    s = frozenset(markings)
    if not 2 <= len(s) <= n - 2:
        raise ValueError(f"not a boundary partition side: {sorted(s)}")
    comp = frozenset(range(1, n + 1)) - s
    if len(s) == 2:
        return s
    if len(comp) == 2:
        return comp
    return s if n in s else comp


def _boundary_class(n, label):
    s = frozenset(label)
    if s != canonical_label(s, n):
        raise ValueError(f"non-canonical boundary label: {sorted(s)}")
    if n == 6:
        vec = [0] * 16
        if len(s) == 2 and 6 in s:
            (i,) = s - {6}
            vec[i] = 1
        elif len(s) == 3:
            i, j = sorted(s - {6})
            vec[_pair_slot(i, j)] = 1
        else:
            k, l, m = sorted(frozenset(range(1, 6)) - s)
            vec[0] = 1
            for a in (k, l, m):
                vec[a] = -1
            for a, b in itertools.combinations((k, l, m), 2):
                vec[_pair_slot(a, b)] = -1
        return tuple(vec)
    if n == 5:
        vec = [0] * 5
        if 5 in s:
            (i,) = s - {5}
            vec[i] = 1  # E_{i-1} sits at coordinate i
        else:
            k, l = sorted(frozenset(range(1, 5)) - s)
            vec[0] = 1
            vec[k] = -1
            vec[l] = -1
        return tuple(vec)
    raise ValueError(f"unsupported marking count {n}")


def kv_class(matching):
    """Keel-Vermeire class attached to a perfect matching of the six markings."""
    pairs = [tuple(sorted(p)) for p in matching]
    if sorted(x for p in pairs for x in p) != list(range(1, 7)):
        raise ValueError("matching must partition the six markings into pairs")
    (i, j), (k, h) = sorted(p for p in pairs if 6 not in p)
    vec = [0] * 16
    vec[0] = 2
    for a in range(1, 6):
        vec[a] = -1
    for a, b in ((i, k), (i, h), (j, k), (j, h)):
        vec[_pair_slot(a, b)] = -1
    return tuple(vec)


class Space:
    """Immutable catalog for one moduli space; use `build_space`."""

    def __init__(self, n, divisor_basis, curve_basis, divisors, curves, space_id):
        self.n = n
        self.rank = len(divisor_basis)
        self.divisor_basis = tuple(divisor_basis)
        self.curve_basis = tuple(curve_basis)
        self.divisors = tuple(divisors)
        self.curves = tuple(curves)
        self.space_id = space_id
        self.pairing = tuple(
            tuple((1 if i == 0 else -1) if i == j else 0 for j in range(self.rank))
            for i in range(self.rank)
        )
        self._div_index = {d.cls: i for i, d in enumerate(self.divisors)}
        self._curve_index = {c.cls: i for i, c in enumerate(self.curves)}
        self._div_by_name = {d.name: i for i, d in enumerate(self.divisors)}
        self._curve_by_name = {c.name: i for i, c in enumerate(self.curves)}
        self._group = None
        self._curve_perms = None
        self._div_perms = None

    # -- basic queries ----------------------------------------------------

    def pair(self, d, c):
        if len(d) != self.rank or len(c) != self.rank:
            raise ValueError("basis mismatch: wrong coordinate length for this space")
        return pair(d, c)

    def divisor_index(self, cls):
        return self._div_index.get(primitive(cls))

    def curve_index(self, cls):
        return self._curve_index.get(primitive(cls))

    def divisor_named(self, name):
        return self.divisors[self._div_by_name[name]]

    def curve_named(self, name):
        return self.curves[self._curve_by_name[name]]

    def curve_id(self, name):
        return self._curve_by_name[name]

    def divisor_id(self, name):
        return self._div_by_name[name]

    def curve_name_of(self, vec):
        return format_class(vec, self.curve_basis)

    def divisor_name_of(self, vec):
        return format_class(vec, self.divisor_basis)

    def boundary_class(self, label):
        return _boundary_class(self.n, label)

    # -- symmetric group --------------------------------------------------

    def transposition_actions(self):
        """Adjacent transpositions (i, i+1); they generate the whole group."""
        acts = []
        for i in range(1, self.n):
            perm = list(range(1, self.n + 1))
            perm[i - 1], perm[i] = perm[i], perm[i - 1]
            acts.append(s_action(self, tuple(perm)))
        return acts

    def group(self):
        """All n! relabeling actions, composed from the transpositions."""
        if self._group is None:
            gens = self.transposition_actions()
            ident = LinearAction(tuple(range(1, self.n + 1)),
                                 identity(self.rank), identity(self.rank))
            seen = {ident.perm: ident}
            frontier = [ident]
            while frontier:
                nxt = []
                for act in frontier:
                    for g in gens:
                        # (act . g)(marking) = act(g(marking))
                        perm = tuple(act.perm[g.perm[k - 1] - 1]
                                     for k in range(1, self.n + 1))
                        if perm in seen:
                            continue
                        new = LinearAction(
                            perm,
                            mat_mul(act.on_divisors, g.on_divisors),
                            mat_mul(act.on_curves, g.on_curves),
                        )
                        seen[perm] = new
                        nxt.append(new)
                frontier = nxt
            self._group = tuple(seen[p] for p in sorted(seen))
        return self._group

    def curve_perms(self):
        """Permutation of curve ids induced by each group element."""
        if self._curve_perms is None:
            perms = []
            for act in self.group():
                images = []
                for c in self.curves:
                    idx = self._curve_index.get(primitive(mat_vec(act.on_curves, c.cls)))
                    if idx is None:
                        raise CatalogError(
                            f"curve catalog not closed under relabeling {act.perm}")
                    images.append(idx)
                perms.append(tuple(images))
            self._curve_perms = tuple(perms)
        return self._curve_perms

    def divisor_perms(self):
        if self._div_perms is None:
            perms = []
            for act in self.group():
                images = []
                for d in self.divisors:
                    idx = self._div_index.get(primitive(mat_vec(act.on_divisors, d.cls)))
                    if idx is None:
                        raise CatalogError(
                            f"divisor catalog not closed under relabeling {act.perm}")
                    images.append(idx)
                perms.append(tuple(images))
            self._div_perms = tuple(perms)
        return self._div_perms

    # -- mutations for fault-injection tests --------------------------------

    def without_divisor(self, name):
        """Copy of this catalog with one generator removed (certification must fail)."""
        divisors = [d for d in self.divisors if d.name != name]
        if len(divisors) == len(self.divisors):
            raise KeyError(name)
        kept = {d.name: i for i, d in enumerate(divisors)}
        curves = []
        for c in self.curves:
            swept_name = self.divisors[c.swept].name
            if swept_name not in kept:
                raise ValueError(f"cannot drop {name}: it is swept by {c.name}")
            curves.append(NegativeCurve(c.name, c.cls, kept[swept_name]))
        return Space(self.n, self.divisor_basis, self.curve_basis, divisors, curves,
                     self.space_id)

    def with_perturbed_curve(self, name, slot, delta):
        """Copy with one curve coordinate shifted (the invariant gate must fire)."""
        curves = []
        for c in self.curves:
            if c.name == name:
                vec = list(c.cls)
                vec[slot] += delta
                vec = tuple(vec)
                curves.append(NegativeCurve(self.curve_name_of(vec), vec, c.swept))
            else:
                curves.append(c)
        return Space(self.n, self.divisor_basis, self.curve_basis, self.divisors,
                     curves, self.space_id)


# -- construction ------------------------------------------------------------


def _curve_vec6(l=0, e=(), eij=()):
    vec = [0] * 16
    vec[0] = l
    for i, c in e:
        vec[i] = c
    for (i, j), c in eij:
        vec[_pair_slot(i, j)] = c
    return tuple(vec)


def _build6():
    div_names = ["H"] + [f"E{i}" for i in range(1, 6)] + [f"E{i}{j}" for i, j in PAIRS6]
    curve_names = ["l"] + [f"e{i}" for i in range(1, 6)] + [f"e{i}{j}" for i, j in PAIRS6]

    divisors = []
    for i in range(1, 6):
        label = frozenset({i, 6})
        divisors.append(DivisorGen(f"E{i}", _boundary_class(6, label), "boundary", label))
    for i, j in PAIRS6:
        label = frozenset({i, j, 6})
        divisors.append(DivisorGen(f"E{i}{j}", _boundary_class(6, label), "boundary", label))
    for i, j, k in TRIPLES6:
        label = canonical_label(frozenset(range(1, 6)) - {i, j, k}, 6)
        divisors.append(DivisorGen(f"D{i}{j}{k}", _boundary_class(6, label), "boundary",
                                   label))
    matchings = set()
    for m in range(1, 6):
        rest = sorted(set(range(1, 6)) - {m})
        a = rest[0]
        for b in rest[1:]:
            p1 = (a, b)
            p2 = tuple(sorted(set(rest) - set(p1)))
            matchings.add(frozenset({frozenset(p1), frozenset(p2), frozenset({m, 6})}))
    kv = []
    for matching in matchings:
        p1, p2 = sorted(tuple(sorted(p)) for p in matching if 6 not in p)
        kv.append(DivisorGen(f"KV{p1[0]}{p1[1]},{p2[0]}{p2[1]}", kv_class(matching),
                             "keel-vermiere", matching))
    divisors.extend(sorted(kv, key=lambda d: d.name))
    div_index = {d.name: i for i, d in enumerate(divisors)}

    curves = []

    def add(vec, swept_name):
        curves.append(NegativeCurve(format_class(vec, curve_names), vec,
                                    div_index[swept_name]))

    for i in range(1, 6):
        for j in sorted(set(range(1, 6)) - {i}):
            add(_curve_vec6(e=[(i, 1)], eij=[((i, j), -1)]), f"E{i}")
        add(_curve_vec6(e=[(i, 2)], eij=[((i, j), -1) for j in range(1, 6) if j != i]),
            f"E{i}")
    for i, j, k in TRIPLES6:
        h, l = sorted(set(range(1, 6)) - {i, j, k})
        dname = f"D{i}{j}{k}"
        for a in (i, j, k):
            b, c = sorted({i, j, k} - {a})
            add(_curve_vec6(l=1, e=[(a, -1)], eij=[((b, c), -1)]), dname)
        add(_curve_vec6(l=2, e=[(i, -1), (j, -1), (k, -1)], eij=[((h, l), -1)]), dname)
        add(_curve_vec6(l=1, eij=[((i, j), -1), ((i, k), -1), ((j, k), -1),
                                  ((h, l), -1)]), dname)
    for i, j in PAIRS6:
        add(_curve_vec6(eij=[((i, j), 1)]), f"E{i}{j}")
        add(_curve_vec6(l=1, e=[(i, -1), (j, -1)], eij=[((i, j), 1)]), f"E{i}{j}")

    curves.sort(key=lambda c: (c.swept, c.cls))
    return Space(6, div_names, curve_names, divisors, curves, "m06")


def _build5():
    names = ("H", "E0", "E1", "E2", "E3")
    divisors = []
    for i in range(1, 5):
        label = frozenset({i, 5})
        cls = _boundary_class(5, label)
        divisors.append(DivisorGen(format_class(cls, names), cls, "boundary", label))
    for i, j in itertools.combinations(range(1, 5), 2):
        label = frozenset({i, j})
        cls = _boundary_class(5, label)
        divisors.append(DivisorGen(format_class(cls, names), cls, "boundary", label))
    divisors.sort(key=lambda d: d.cls)
    curves = [NegativeCurve(d.name, d.cls, i) for i, d in enumerate(divisors)]
    return Space(5, names, names, divisors, curves, "m05")


_SPACE_CACHE = {}


def build_space(n, fresh=False):
    """Catalog for n in {5, 6}; cached unless `fresh` forces a recomputation."""
    if n not in (5, 6):
        raise ValueError(f"unsupported marking count {n}")
    if fresh:
        return _build6() if n == 6 else _build5()
    if n not in _SPACE_CACHE:
        _SPACE_CACHE[n] = _build6() if n == 6 else _build5()
    return _SPACE_CACHE[n]


def space_by_id(space_id, fresh=False):
    return build_space({"m05": 5, "m06": 6}[space_id], fresh=fresh)


def s_action(space, perm):
    """Linear action of a relabeling of the markings, solved from the boundary
    dictionary and verified on every boundary class; the curve side is the
    pairing-contragredient."""
    n = space.n
    if sorted(perm) != list(range(1, n + 1)):
        raise ValueError(f"not a permutation of 1..{n}: {perm}")

    def image_of_label(label):
        return canonical_label(frozenset(perm[m - 1] for m in label), n)

    cols = {}
    if n == 6:
        for i in range(1, 6):
            cols[i] = _boundary_class(6, image_of_label({i, 6}))
        for i, j in PAIRS6:
            cols[_pair_slot(i, j)] = _boundary_class(6, image_of_label({i, j, 6}))
        # H = D123 + E1 + E2 + E3 + E12 + E13 + E23
        acc = list(_boundary_class(6, image_of_label({4, 5})))
        for slot in (1, 2, 3, _pair_slot(1, 2), _pair_slot(1, 3), _pair_slot(2, 3)):
            acc = [x + y for x, y in zip(acc, cols[slot])]
        cols[0] = tuple(acc)
    else:
        for i in range(1, 5):
            cols[i] = _boundary_class(5, image_of_label({i, 5}))
        # H = (H - E2 - E3) + E2 + E3, and H - E2 - E3 carries the label {1, 2}
        acc = list(_boundary_class(5, image_of_label({1, 2})))
        for slot in (3, 4):
            acc = [x + y for x, y in zip(acc, cols[slot])]
        cols[0] = tuple(acc)

    on_div = tuple(tuple(cols[j][i] for j in range(space.rank)) for i in range(space.rank))

    for d in space.divisors:
        if d.kind != "boundary":
            continue
        want = _boundary_class(n, image_of_label(d.label))
        if mat_vec(on_div, d.cls) != want:
            raise CatalogError(
                f"boundary dictionary inconsistent under relabeling {perm} at {d.name}")

    inv = [0] * n
    for k in range(1, n + 1):
        inv[perm[k - 1] - 1] = k
    inv_action = _divisor_matrix(space, tuple(inv))
    on_curves = contragredient(inv_action)
    return LinearAction(tuple(perm), on_div, on_curves)


def _divisor_matrix(space, perm):
    """Divisor-side matrix only (helper for the contragredient)."""
    n = space.n

    def image_of_label(label):
        return canonical_label(frozenset(perm[m - 1] for m in label), n)

    cols = {}
    if n == 6:
        for i in range(1, 6):
            cols[i] = _boundary_class(6, image_of_label({i, 6}))
        for i, j in PAIRS6:
            cols[_pair_slot(i, j)] = _boundary_class(6, image_of_label({i, j, 6}))
        acc = list(_boundary_class(6, image_of_label({4, 5})))
        for slot in (1, 2, 3, _pair_slot(1, 2), _pair_slot(1, 3), _pair_slot(2, 3)):
            acc = [x + y for x, y in zip(acc, cols[slot])]
        cols[0] = tuple(acc)
    else:
        for i in range(1, 5):
            cols[i] = _boundary_class(5, image_of_label({i, 5}))
        acc = list(_boundary_class(5, image_of_label({1, 2})))
        for slot in (3, 4):
            acc = [x + y for x, y in zip(acc, cols[slot])]
        cols[0] = tuple(acc)
    return tuple(tuple(cols[j][i] for j in range(space.rank)) for i in range(space.rank))


def orbits(space, vectors, side="curve", actions=None):
    """Partition vectors into orbits under the generated group; orbits and their
    members are canonically sorted.  `actions` defaults to the transpositions."""
    if actions is None:
        actions = space.transposition_actions()
    mats = [a.on_curves if side == "curve" else a.on_divisors for a in actions]
    vecs = [primitive(v) for v in vectors]
    remaining = dict.fromkeys(vecs)
    out = []
    while remaining:
        seed = next(iter(remaining))
        orbit = {seed}
        frontier = [seed]
        while frontier:
            nxt = []
            for v in frontier:
                for m in mats:
                    w = primitive(mat_vec(m, v))
                    if w not in orbit:
                        orbit.add(w)
                        nxt.append(w)
            frontier = nxt
        members = sorted(v for v in remaining if v in orbit)
        for v in members:
            del remaining[v]
        out.append(tuple(members))
    return sorted(out, key=lambda o: o[0])


def orbit_of_vector(space, vec, side="curve"):
    return orbits(space, [vec], side=side)[0]


def unimodality_flags(space):
    """True for curves whose off-divisor pairings against swept divisors all equal
    0 or the negated self-sweep pairing."""
    swept_divs = sorted({c.swept for c in space.curves})
    flags = {}
    for ci, c in enumerate(space.curves):
        own = space.pair(space.divisors[c.swept].cls, c.cls)
        ok = True
        for di in swept_divs:
            if di == c.swept:
                continue
            v = space.pair(space.divisors[di].cls, c.cls)
            if v != 0 and v != -own:
                ok = False
                break
        flags[ci] = ok
    return flags


def check_catalog(space):
    """Self-check suite; returns a list of violation messages (empty when clean)."""
    problems = []
    for ci, c in enumerate(space.curves):
        for di, d in enumerate(space.divisors):
            v = space.pair(d.cls, c.cls)
            if di == c.swept:
                if v >= 0:
                    problems.append(f"{c.name} not negative on its swept divisor {d.name}")
            elif v < 0:
                problems.append(f"{c.name} negative on {d.name} != swept")
    try:
        for act in space.transposition_actions():
            curve_imgs = {primitive(mat_vec(act.on_curves, c.cls)) for c in space.curves}
            if curve_imgs != {c.cls for c in space.curves}:
                problems.append(f"curve catalog not closed under {act.perm}")
            div_imgs = {primitive(mat_vec(act.on_divisors, d.cls)) for d in space.divisors}
            if div_imgs != {d.cls for d in space.divisors}:
                problems.append(f"divisor catalog not closed under {act.perm}")
            for d, c in ((space.divisors[0].cls, space.curves[0].cls),
                         (space.divisors[-1].cls, space.curves[-1].cls)):
                lhs = pair(mat_vec(act.on_divisors, d), mat_vec(act.on_curves, c))
                if lhs != pair(d, c):
                    problems.append(f"pairing not preserved by {act.perm}")
    except CatalogError as exc:
        problems.append(str(exc))

    if space.n == 6:
        if len(space.curves) != 95:
            problems.append(f"expected 95 curves, got {len(space.curves)}")
        if len(space.divisors) != 40:
            problems.append(f"expected 40 generators, got {len(space.divisors)}")
        if not problems:
            sizes = sorted(len(o) for o in orbits(space, [c.cls for c in space.curves]))
            if sizes != [15, 20, 60]:
                problems.append(f"curve orbit sizes {sizes} != [15, 20, 60]")
            dsizes = sorted(len(o) for o in
                            orbits(space, [d.cls for d in space.divisors], side="divisor"))
            if dsizes != [10, 15, 15]:
                problems.append(f"divisor orbit sizes {dsizes} != [10, 15, 15]")
            flags = unimodality_flags(space)
            double = {ci for ci, c in enumerate(space.curves)
                      if space.pair(space.divisors[c.swept].cls, c.cls) == -2}
            if {ci for ci, ok in flags.items() if not ok} != double or len(double) != 15:
                problems.append("unimodality flags do not match the -2 orbit")
    else:
        if len(space.curves) != 10 or len(space.divisors) != 10:
            problems.append("expected 10 boundary curves and generators")
        if not problems:
            sizes = sorted(len(o) for o in orbits(space, [c.cls for c in space.curves]))
            if sizes != [10]:
                problems.append(f"curve orbit sizes {sizes} != [10]")
            if not all(unimodality_flags(space).values()):
                problems.append("all boundary curves should be unimodal")
    return problems


def dump_catalog(space):
    """JSON-ready catalog: bases, integer class vectors, orbit partitions."""
    curve_vecs = [c.cls for c in space.curves]
    div_vecs = [d.cls for d in space.divisors]
    curve_ids = {v: i for i, v in enumerate(curve_vecs)}
    div_ids = {v: i for i, v in enumerate(div_vecs)}
    return {
        "space": space.space_id,
        "n": space.n,
        "rank": space.rank,
        "divisor_basis": list(space.divisor_basis),
        "curve_basis": list(space.curve_basis),
        "divisors": [
            {"id": i, "name": d.name, "kind": d.kind,
             "label": sorted(sorted(p) for p in d.label) if d.kind == "keel-vermiere"
             else sorted(d.label),
             "class": list(d.cls)}
            for i, d in enumerate(space.divisors)
        ],
        "curves": [
            {"id": i, "name": c.name, "swept": space.divisors[c.swept].name,
             "class": list(c.cls)}
            for i, c in enumerate(space.curves)
        ],
        "orbits": {
            "curves": [[curve_ids[v] for v in o]
                       for o in orbits(space, curve_vecs)],
            "divisors": [[div_ids[v] for v in o]
                         for o in orbits(space, div_vecs, side="divisor")],
        },
    }
