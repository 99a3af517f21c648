"""Search for nef-minimal subsets of the negative-curve catalog.

A subset I of the catalog is *nef-generating* when some nonnegative, nonzero
combination of its curves pairs nonnegatively with every generator in D, and
*nef-minimal* when no proper subset does.  The test over a subset sweeping
pairwise distinct divisors reduces to a sign criterion on the square pairing
matrix (positive row reduction); an LP formulation over the same matrix is the
independent cross-check.

`enumerate_nefmin` grows subsets depth-first, one curve at a time, attaching
each new curve to a divisor that an existing curve meets positively.  Branches
close when a swept divisor repeats, when the subset is covered by one of the
supplied nef curves, when one of the optional elimination criteria fires, or
when a nef certificate appears, in which case the subset is recorded and its
coverage checked.  Orbit pruning keeps one representative per relabeling class.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .kernel import cone_member, rref_positive
from .linalg import Q, is_zero, pair, primitive, vadd, vneg


class SearchBudgetExceeded(Exception):
    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class QNefCertificate:
    """A nonnegative combination of catalog curves nonnegative against all of D."""

    curve: tuple
    weights: dict  # curve id -> positive rational


@dataclass
class EliminationLedger:
    """Bookkeeping digraph on curve ids for the replacement criteria; acyclic."""

    edges: dict = field(default_factory=dict)  # id -> set of ids
    records: list = field(default_factory=list)  # (frozenset ids, criterion, data)

    def would_cycle(self, new_edges):
        adj = {k: set(v) for k, v in self.edges.items()}
        for a, b in new_edges:
            adj.setdefault(a, set()).add(b)
        seen, active = set(), set()

        def dfs(u):
            seen.add(u)
            active.add(u)
            for w in adj.get(u, ()):
                if w in active or (w not in seen and dfs(w)):
                    return True
            active.discard(u)
            return False

        return any(dfs(u) for u in list(adj) if u not in seen)

    def insert(self, new_edges, record):
        if self.would_cycle(new_edges):
            return False
        for a, b in new_edges:
            self.edges.setdefault(a, set()).add(b)
        self.records.append(record)
        return True


def pairing_matrix(space, ids):
    """Rows = curves of I, columns = their swept divisors, entries = pairings."""
    divs = [space.divisors[space.curves[i].swept].cls for i in ids]
    return [[space.pair(d, space.curves[i].cls) for d in divs] for i in ids]


def qnef_generate(space, ids):
    """Certificate that I generates a nonzero class nonnegative on all of D, or None.

    Subsets sweeping pairwise distinct divisors go through the positive
    row-reduction criterion; duplicated sweeps fall back to the LP route.
    """
    ids = tuple(ids)
    if not ids:
        return None
    swept = [space.curves[i].swept for i in ids]
    if len(set(swept)) == len(swept):
        hit = rref_positive(pairing_matrix(space, ids))
        if hit is None:
            return None
        weights, _ = hit
    else:
        weights = _qnef_lp_weights(space, ids)
        if weights is None:
            return None
    curve = [Q(0)] * space.rank
    for w, i in zip(weights, ids):
        if w:
            for k in range(space.rank):
                curve[k] += w * space.curves[i].cls[k]
    curve = tuple(curve)
    if is_zero(curve):
        raise ArithmeticError("nonzero weights produced the zero class; catalog not pointed")
    prim = primitive(curve)
    k = next(i for i, x in enumerate(prim) if x != 0)
    scale = Q(prim[k]) / Q(curve[k])
    cert = QNefCertificate(
        curve=prim,
        weights={i: w * scale for w, i in zip(weights, ids) if w != 0},
    )
    _validate_certificate(space, cert)
    return cert


def _validate_certificate(space, cert):
    acc = [Q(0)] * space.rank
    for i, w in cert.weights.items():
        if w <= 0:
            raise ArithmeticError("certificate weight not positive")
        for k in range(space.rank):
            acc[k] += w * space.curves[i].cls[k]
    if tuple(acc) != tuple(Q(x) for x in cert.curve):
        raise ArithmeticError("certificate does not reconstruct its curve")
    for d in space.divisors:
        if space.pair(d.cls, cert.curve) < 0:
            raise ArithmeticError(f"certified class negative on {d.name}")


def _qnef_lp_weights(space, ids):
    """LP route: weights w >= 0, sum w = 1, with A w >= 0 over the swept divisors."""
    divs = sorted({space.curves[i].swept for i in ids})
    rows = len(divs)
    cols = []
    for i in ids:
        c = space.curves[i].cls
        cols.append(tuple(space.pair(space.divisors[d].cls, c) for d in divs) + (1,))
    for r in range(rows):
        cols.append(tuple(-1 if k == r else 0 for k in range(rows)) + (0,))
    target = tuple([0] * rows + [1])
    answer = cone_member(target, cols)
    if not answer.is_member:
        return None
    return [answer.combination.get(j, Q(0)) for j in range(len(ids))]


def qnef_by_lp(space, ids):
    """Decision only, by the LP formulation; the cross-check partner of the
    row-reduction criterion."""
    return _qnef_lp_weights(space, tuple(ids)) is not None


def nef_minimal_check(space, ids):
    """True when no proper subset generates; testing co-dimension-one subsets suffices."""
    ids = tuple(ids)
    if qnef_generate(space, ids) is None:
        return False
    for drop in range(len(ids)):
        sub = ids[:drop] + ids[drop + 1:]
        if sub and qnef_generate(space, sub) is not None:
            return False
    return True


def build_graph(space, ids):
    """Directed graph on the swept divisors of I: an edge D -> D' whenever the
    curve of I sweeping D pairs positively with D'."""
    verts = sorted({space.curves[i].swept for i in ids})
    edges = {v: set() for v in verts}
    for v in verts:
        for i in ids:
            c = space.curves[i]
            if space.pair(space.divisors[v].cls, c.cls) < 0:
                for w in verts:
                    if w != v and space.pair(space.divisors[w].cls, c.cls) > 0:
                        edges[v].add(w)
    return edges


def graph_every_vertex_on_cycle(edges):
    """Each vertex lies on a directed cycle (reaches itself through >= 1 edge)."""
    for v in edges:
        frontier = set(edges[v])
        seen = set(frontier)
        while frontier:
            if v in seen:
                break
            frontier = {w for u in frontier for w in edges[u]} - seen
            seen |= frontier
        if v not in seen:
            return False
    return True


def hamiltonian_cycles(edges):
    """All directed Hamiltonian cycles, as canonical vertex tuples."""
    verts = sorted(edges)
    if not verts:
        return []
    start = verts[0]
    out = []

    def walk(path, used):
        u = path[-1]
        if len(path) == len(verts):
            if start in edges[u]:
                out.append(tuple(path))
            return
        for w in sorted(edges[u]):
            if w not in used:
                used.add(w)
                path.append(w)
                walk(path, used)
                path.pop()
                used.discard(w)

    walk([start], {start})
    return out


def count_simple_cycles(edges):
    """Number of directed simple cycles (small graphs only)."""
    verts = sorted(edges)
    count = 0
    for k in range(1, len(verts) + 1):
        for sub in itertools.permutations(verts, k):
            if sub[0] != min(sub):
                continue
            if all(sub[(i + 1) % k] in edges[sub[i]] for i in range(k)):
                count += 1
    return count


# -- faces through their vanishing sets --------------------------------------


def vanishing_closure(space, ids):
    """Curve ids vanishing on the face cut out by I: those c' whose negative lies
    in the cone spanned by the catalog together with the negated curves of I."""
    ids = tuple(ids)
    gens = [c.cls for c in space.curves] + [vneg(space.curves[i].cls) for i in ids]
    out = set(ids)
    for ci, c in enumerate(space.curves):
        if ci in out:
            continue
        if cone_member(vneg(c.cls), gens).is_member:
            out.add(ci)
    return frozenset(out)


def covers(space, curve_vec, ids):
    """The nef class covers I when the vanishing set of I generates it."""
    closure = vanishing_closure(space, ids)
    return cone_member(tuple(curve_vec), [space.curves[i].cls for i in closure]).is_member


# -- the depth-first enumeration ---------------------------------------------


@dataclass
class RecordedSubset:
    ids: tuple  # canonical id tuple
    certificate: QNefCertificate
    covered_by: tuple | None  # covering nef class, or None


@dataclass
class EnumerationReport:
    space_id: str
    criteria: tuple
    max_size: int
    status: str  # 'complete' | 'budget-exceeded'
    records: list
    uncovered: list
    eliminated: dict
    states_explored: int
    ledger: EliminationLedger
    budget_state: tuple | None = None

    @property
    def all_covered(self):
        return self.status == "complete" and not self.uncovered


class _Searcher:
    def __init__(self, space, cover_vectors, criteria, max_size):
        self.space = space
        self.criteria = tuple(sorted(criteria))
        self.max_size = max_size
        self.perms = space.curve_perms()
        self.cover_orbits = self._expand_covers(cover_vectors)
        self.visited = set()
        self.records = {}
        self.eliminated = {1: 0, 2: 0, 3: 0}
        self.states = 0
        self.ledger = EliminationLedger()
        self.budget_state = None
        self.catalog_vecs = [c.cls for c in space.curves]
        # positive divisors per curve, and curves per divisor, for extensions
        self.pos_divs = []
        for c in space.curves:
            self.pos_divs.append(tuple(
                di for di, d in enumerate(space.divisors)
                if d.kind == "boundary" and space.pair(d.cls, c.cls) > 0))
        self.curves_on = {}
        for ci, c in enumerate(space.curves):
            self.curves_on.setdefault(c.swept, []).append(ci)
        if 2 in self.criteria or 3 in self.criteria:
            self.crit2_patterns = _crit2_pattern_table(space)
            self.crit3_patterns = _crit3_pattern_table(space)
        else:
            self.crit2_patterns = {}
            self.crit3_patterns = {}

    def _expand_covers(self, vectors):
        from .catalog import orbit_of_vector

        out = []
        for v in vectors:
            out.append(tuple(orbit_of_vector(self.space, primitive(v))))
        return out

    def canonical(self, ids):
        best = None
        for p in self.perms:
            img = tuple(sorted(p[i] for i in ids))
            if best is None or img < best:
                best = img
        return best

    def run(self):
        space = self.space
        singles = sorted({self.canonical((ci,)) for ci in range(len(space.curves))})
        for s in singles:
            self._visit(list(s), witnesses=[])
        records = [self.records[k] for k in sorted(self.records)]
        uncovered = [r for r in records if r.covered_by is None]
        return EnumerationReport(
            space_id=space.space_id,
            criteria=self.criteria,
            max_size=self.max_size,
            status="budget-exceeded" if self.budget_state else "complete",
            records=records,
            uncovered=[r.ids for r in uncovered],
            eliminated=dict(self.eliminated),
            states_explored=self.states,
            ledger=self.ledger,
            budget_state=self.budget_state,
        )

    def _visit(self, ids, witnesses):
        key = self.canonical(tuple(ids))
        if key in self.visited:
            return
        self.visited.add(key)
        self.states += 1
        space = self.space

        cert = qnef_generate(space, tuple(ids))
        if cert is not None:
            if nef_minimal_check(space, tuple(ids)):
                covered = self._covering_class(ids, witnesses)
                self.records[key] = RecordedSubset(ids=key, certificate=cert,
                                                   covered_by=covered)
            return

        witnesses = list(witnesses)
        if self._is_covered(ids, witnesses):
            self.eliminated[1] += 1
            return

        if 2 in self.criteria and self._try_criterion2(ids):
            self.eliminated[2] += 1
            return
        if 3 in self.criteria and self._try_criterion3(ids):
            self.eliminated[3] += 1
            return

        if len(ids) >= self.max_size:
            if self.budget_state is None:
                self.budget_state = tuple(ids)
            return

        swept = {space.curves[i].swept for i in ids}
        targets = []
        seen_t = set()
        for di in self.pos_divs[ids[-1]]:
            if di not in swept and di not in seen_t:
                seen_t.add(di)
                targets.append(di)
        for i in ids[:-1]:
            for di in self.pos_divs[i]:
                if di not in swept and di not in seen_t:
                    seen_t.add(di)
                    targets.append(di)
        for di in targets:
            for cj in self.curves_on[di]:
                if cj in ids:
                    continue
                child = ids + [cj]
                kept = [w for w in witnesses
                        if pair(w, space.curves[cj].cls) == 0]
                self._visit(child, kept)

    # -- coverage ----------------------------------------------------------

    def _vanishes_on_face(self, ids, witnesses, vec):
        """Does vec pair to zero on the whole face of I?  Uses cached interior
        witnesses to avoid most membership LPs."""
        for w in witnesses:
            if pair(w, vec) != 0:
                return False
        gens = self.catalog_vecs + [vneg(self.space.curves[i].cls) for i in ids]
        answer = cone_member(vneg(tuple(vec)), gens)
        if answer.is_member:
            return True
        sep = answer.separator
        if any(pair(sep, self.space.curves[i].cls) != 0 for i in ids):
            raise ArithmeticError("separator not on the face it was derived from")
        witnesses.append(sep)
        return False

    def _is_covered(self, ids, witnesses):
        for orbit in self.cover_orbits:
            for v in orbit:
                if self._vanishes_on_face(ids, witnesses, v):
                    return True
        return False

    def _covering_class(self, ids, witnesses):
        for orbit in self.cover_orbits:
            for v in orbit:
                if self._vanishes_on_face(ids, witnesses, v):
                    return v
        return None

    # -- elimination criteria ------------------------------------------------

    def _try_criterion2(self, ids):
        idset = frozenset(ids)
        for triple in itertools.combinations(sorted(ids), 3):
            data = self.crit2_patterns.get(frozenset(triple))
            if data is None:
                continue
            ok = criterion2(self.space, idset, data["c"], data["alpha"],
                            data["i0"], self.ledger)
            if ok:
                return True
        return False

    def _try_criterion3(self, ids):
        idset = frozenset(ids)
        for quad in itertools.combinations(sorted(ids), 4):
            data = self.crit3_patterns.get(frozenset(quad))
            if data is None:
                continue
            if criterion3(self.space, idset, data["divisor"], self.ledger,
                          crit2_patterns=self.crit2_patterns):
                return True
        return False


def criterion2(space, state_ids, c_id, alpha_weights, i0_ids, ledger):
    """Replacement elimination: c plus a combination alpha of the remaining
    curves equals a combination over an alternative set I0 avoiding c, and the
    swap is recorded without closing a cycle in the bookkeeping graph.

    alpha_weights maps curve ids (inside state minus c) to nonnegative weights.
    Returns True when the state may be discarded; False leaves it open.
    """
    state_ids = frozenset(state_ids)
    if c_id not in state_ids:
        return False
    rest = state_ids - {c_id}
    if any(i not in rest for i in alpha_weights):
        return False
    alpha = [Q(0)] * space.rank
    for i, w in alpha_weights.items():
        if w < 0:
            return False
        for k in range(space.rank):
            alpha[k] += w * space.curves[i].cls[k]
    total = vadd(space.curves[c_id].cls, tuple(alpha))
    for i in rest:
        swept = space.divisors[space.curves[i].swept].cls
        if space.pair(swept, total) < 0:
            return False
    if c_id in i0_ids:
        return False
    answer = cone_member(total, [space.curves[i].cls for i in i0_ids])
    if not answer.is_member:
        return False
    new_edges = [(c_id, i) for i in i0_ids if i not in state_ids]
    return ledger.insert(new_edges, (state_ids, 2, {"c": c_id, "i0": tuple(i0_ids)}))


def criterion3(space, state_ids, divisor_id, ledger, crit2_patterns=None):
    """Saturated-divisor elimination: the face of I forces a divisor D outside
    the swept set, and every extension of I by a curve sweeping D was already
    eliminated by the replacement criterion; one bookkeeping edge must still be
    insertable without a cycle."""
    state_ids = frozenset(state_ids)
    swept = {space.curves[i].swept for i in state_ids}
    if divisor_id in swept:
        return False
    closure = vanishing_closure(space, state_ids)
    forced = [ci for ci in closure if space.curves[ci].swept == divisor_id]
    if not forced:
        return False
    candidates = [ci for ci, c in enumerate(space.curves) if c.swept == divisor_id]
    crit2_patterns = crit2_patterns or {}
    edge_options = []
    for ci in candidates:
        extended = state_ids | {ci}
        matched = None
        for triple, data in crit2_patterns.items():
            if triple <= extended and ci in triple and data["c"] != ci:
                ok = criterion2(space, triple, data["c"], data["alpha"], data["i0"],
                                EliminationLedger())
                if ok:
                    matched = data
                    break
        if matched is None:
            return False
        edge_options.append((matched["c"], ci))
    for a, b in edge_options:
        if not ledger.would_cycle([(a, b)]):
            return ledger.insert([(a, b)],
                                 (state_ids, 3, {"divisor": divisor_id}))
    return False


def _crit2_pattern_table(space):
    """All relabelings of the two replacement patterns built on a doubled curve:
    {doubled on E_j, long edge curve through j, short edge curve through j} and
    {doubled on E_j, two short edge curves through j}."""
    if space.n != 6:
        return {}
    table = {}
    perms = space.curve_perms()

    def register(base_ids, c_id, alpha_ids, i0_ids):
        for p in perms:
            key = frozenset(p[i] for i in base_ids)
            if key in table:
                continue
            table[key] = {
                "c": p[c_id],
                "alpha": {p[i]: Q(1) for i in alpha_ids},
                "i0": tuple(sorted(p[i] for i in i0_ids)),
            }

    cid = space.curve_id
    # doubled curve on E_1 with the long edge curve on E_12 and short e_13:
    #   (2e1 - e12 - e13 - e14 - e15) + (l - e1 - e2 + e12) + e13
    #        = (e1 - e14) + (l - e2 - e15)        [and the (4,5) swap]
    two_e1 = cid("2e1-e12-e13-e14-e15")
    register((two_e1, cid("l-e1-e2+e12"), cid("e13")),
             two_e1, (cid("l-e1-e2+e12"), cid("e13")),
             (cid("e1-e14"), cid("l-e2-e15")))
    # doubled curve with two short edge curves:
    #   (2e1 - ...) + e12 + e13 = (e1 - e14) + (e1 - e15)
    register((two_e1, cid("e12"), cid("e13")),
             two_e1, (cid("e12"), cid("e13")),
             (cid("e1-e14"), cid("e1-e15")))
    return table


def _crit3_pattern_table(space):
    """Relabelings of the saturated-divisor situation: the face of
    {2e1-.., e12, l-e12-e13-e23-e45, l-e2-e14} forces curves on E15."""
    if space.n != 6:
        return {}
    table = {}
    perms = space.curve_perms()
    cid = space.curve_id
    base = (cid("2e1-e12-e13-e14-e15"), cid("e12"),
            cid("l-e12-e13-e23-e45"), cid("l-e2-e14"))
    div_id = space.divisor_id("E15")
    div_perms = space.divisor_perms()
    for p, dp in zip(perms, div_perms):
        key = frozenset(p[i] for i in base)
        if key not in table:
            table[key] = {"divisor": dp[div_id]}
    return table
