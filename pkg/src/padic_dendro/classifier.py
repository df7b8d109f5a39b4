"""Ultrametric classification of p-adic numbers and the reverse encoding.

``classify`` turns a finite set of p-adic numbers into the stabilised *-tree
spanned by them and infinity: each internal vertex is a disc, and the edge
lengths are differences of radius exponents.  ``encode_dendrogram`` goes the
other way, assigning to every datum of a dendrogram the sum of its edge
labels weighted by ``p`` to the level of the edge's origin.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

from .dendrogram import ProjectiveDendrogram
from .errors import (
    IndistinguishableError,
    InvalidInputError,
    PrecisionError,
)
from .padic_core import (
    DEFAULT_PRECISION,
    POLYNOMIAL,
    FieldDescriptor,
    PAdicNumber,
    add_sub,
    difference_valuation,
    parse_padic,
)
from .strings import minimal_degree


class _PointAtInfinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"


INF = _PointAtInfinity()


class Disc:
    """The disc ``center + p^radius_exp O_K``; one vertex of the Bruhat-Tits tree."""

    __slots__ = ("center", "radius_exp")

    def __init__(self, center: PAdicNumber, radius_exp: int):
        if center.precision < radius_exp:
            raise PrecisionError(
                f"center known to precision {center.precision} cannot fix a disc of radius exponent {radius_exp}"
            )
        self.center = center
        self.radius_exp = radius_exp

    def contains(self, x: PAdicNumber) -> bool:
        try:
            return difference_valuation(self.center, x) >= self.radius_exp
        except IndistinguishableError as exc:
            if exc.precision >= self.radius_exp:
                return True
            raise

    def __eq__(self, other):
        if not isinstance(other, Disc):
            return NotImplemented
        return (
            self.radius_exp == other.radius_exp
            and self.center.field == other.center.field
            and self.contains(other.center)
        )

    def __hash__(self):
        m = self.radius_exp
        return hash((m, tuple(sorted((k, d) for k, d in self.center.terms().items() if k < m))))

    def key(self):
        """Canonical center: the center truncated below the radius exponent."""
        return self.center.truncate(self.radius_exp)

    def __repr__(self):
        return f"Disc({self.key()}, radius_exp={self.radius_exp})"

    def to_json(self):
        return {"center": str(self.key()), "radius_exp": self.radius_exp}


def disc_distance(a: Disc, b: Disc) -> int:
    """Number of edges between two vertices of the Bruhat-Tits tree."""
    try:
        join = min(a.radius_exp, b.radius_exp, difference_valuation(a.center, b.center))
    except IndistinguishableError:
        join = min(a.radius_exp, b.radius_exp)
    return (a.radius_exp - join) + (b.radius_exp - join)


def _dv(x, y):
    try:
        return difference_valuation(x, y)
    except IndistinguishableError:
        raise InvalidInputError("median vertex needs pairwise distinct points") from None


def median_vertex(x, y, z) -> Disc:
    """The vertex where the three geodesics between ``x``, ``y`` and ``z`` meet.

    For three finite points this is the disc around the closest pair, i.e. the
    largest of the three pairwise valuations.  With ``z = INF`` it is the
    smallest disc containing ``x`` and ``y``.
    """
    pts = [x, y, z]
    finite = [w for w in pts if w is not INF]
    if len(finite) < 2:
        raise InvalidInputError("at most one of the points may be infinity")
    if len(finite) == 2:
        a, b = finite
        return Disc(a, _dv(a, b))
    pairs = [(_dv(x, y), x), (_dv(x, z), x), (_dv(y, z), y)]
    m, center = max(pairs, key=lambda item: item[0])
    return Disc(center, m)


@dataclass
class ClusterHierarchy:
    """A classified data set: the dendrogram plus the disc behind each vertex."""

    dendrogram: ProjectiveDendrogram
    vertex_disc: dict
    coding: dict
    field: FieldDescriptor
    notes: list = field(default_factory=list)

    @property
    def root_disc(self) -> Disc:
        return self.vertex_disc[self.dendrogram.root]

    @property
    def leaf_map(self):
        return {lab: self.dendrogram.leaf_vertex(lab) for lab in self.coding}

    def level(self, v):
        return self.vertex_disc[v].radius_exp - self.root_disc.radius_exp

    def normality(self):
        values = list(self.coding.values())
        zero = any(x.is_zero() for x in values)
        one = any(x.v0 == 0 and x.digits == (1,) for x in values)
        integral = all(x.is_zero() or x.v0 >= 0 for x in values)
        return {"has_zero": zero, "has_one": one, "integral": integral,
                "normal": zero and one and integral}

    def label_of_value(self, pred):
        for lab, x in self.coding.items():
            if pred(x):
                return lab
        return None

    def is_isometric_to(self, other) -> bool:
        other_tree = other.dendrogram if isinstance(other, ClusterHierarchy) else other
        return self.dendrogram.canonical_form() == other_tree.canonical_form()

    def to_json(self):
        out = self.dendrogram.to_json()
        out["field"] = self.field.describe()
        out["vertex_disc"] = {str(v): d.to_json() for v, d in self.vertex_disc.items()}
        for leaf in out["leaves"]:
            leaf["coding"] = str(self.coding[leaf["label"]])
        if self.notes:
            out["notes"] = list(self.notes)
        return out

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        fd = field_from_json(obj["field"])
        tree = ProjectiveDendrogram.from_json(obj)
        coding = {leaf["label"]: parse_padic(leaf["coding"], fd) for leaf in obj["leaves"]}
        discs = {}
        for v in tree.vertices:
            entry = obj["vertex_disc"][str(v)]
            discs[v] = Disc(parse_padic(entry["center"], fd), entry["radius_exp"])
        return cls(tree, discs, coding, fd, list(obj.get("notes", [])))


def field_from_json(obj) -> FieldDescriptor:
    return FieldDescriptor(
        obj["p"], obj.get("f", 1), obj.get("rep_system", POLYNOMIAL),
        tuple(obj["modulus"]) if "modulus" in obj else None, obj.get("e", 1),
    )


def _valuation_matrix(labels, values):
    n = len(values)
    val = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            try:
                v = difference_valuation(values[i], values[j])
            except IndistinguishableError as exc:
                raise PrecisionError(
                    f"{labels[i]!r} and {labels[j]!r} agree on all {exc.precision} known digits"
                ) from None
            val[i][j] = val[j][i] = v
    return val


def classify(points, normalize=False) -> ClusterHierarchy:
    """Agglomerative classification of labelled p-adic numbers.

    Each round gathers, for every current cluster, the clusters at minimal
    distance from its representative.  Gatherings at the smallest distance
    of the round become vertices and the clusters of the next round; every
    other cluster waits for a later round.  A gathering made at valuation ``m`` is the disc of
    radius exponent ``m`` around its representative.

    ``normalize`` translates the data so that the first point becomes 0.
    """
    points = list(points)
    if not points:
        raise InvalidInputError("nothing to classify")
    labels = [lab for lab, _ in points]
    values = [x for _, x in points]
    if len(set(map(str, labels))) != len(labels):
        raise InvalidInputError("data labels must be distinct")
    fd = values[0].field
    for lab, x in points:
        if x.field != fd:
            raise InvalidInputError(f"{lab!r} belongs to a different field")
    notes = []
    if normalize:
        if fd.rep_system != POLYNOMIAL:
            notes.append("normalisation skipped: needs polynomial representatives")
        else:
            origin = values[0]
            values = [add_sub(x, origin, "sub") for x in values]
            notes.append(f"translated by -({origin})")
    coding = dict(zip(labels, values))
    if len(points) == 1:
        warnings.warn("a single point gives a degenerate dendrogram", stacklevel=2)
        tree = ProjectiveDendrogram.build("v0", [], [("v0", labels[0])], check=False)
        disc = Disc(values[0], values[0].precision)
        notes.append("degenerate: single datum")
        return ClusterHierarchy(tree, {"v0": disc}, coding, fd, notes)

    val = _valuation_matrix(labels, values)
    n = len(values)
    label_key = [str(lab) for lab in labels]

    def rep_of(members):
        return min(members, key=lambda i: label_key[i])

    # node ids: ("leaf", i) or ("node", k)
    nodes = []  # k -> {"radius", "children", "rep"}
    clusters = [{"members": frozenset([i]), "rep": i, "node": ("leaf", i)} for i in range(n)]
    while len(clusters) > 1:
        k = len(clusters)
        gatherings = {}
        for a in range(k):
            ra = clusters[a]["rep"]
            dists = {b: val[ra][clusters[b]["rep"]] for b in range(k) if b != a}
            best = max(dists.values())
            gathered = frozenset([a] + [b for b, d in dists.items() if d == best])
            if gatherings.setdefault(gathered, best) != best:
                raise AssertionError("valuations are not ultrametric")
        # only the closest gatherings are discs of the tree; a wider gathering
        # would skip the vertices that still have to form below it
        top = max(gatherings.values())
        gatherings = {g: m for g, m in gatherings.items() if m == top}
        done = frozenset().union(*gatherings)
        for b in range(k):
            if b not in done:
                gatherings[frozenset([b])] = None
        by_size = sorted(gatherings, key=len)
        parent_of = {}
        for i, s in enumerate(by_size):
            for t in by_size[i + 1:]:
                if len(t) > len(s) and s <= t:
                    parent_of[s] = t
                    break
        node_of = {}
        for s in by_size:
            if gatherings[s] is None:
                node_of[s] = clusters[next(iter(s))]["node"]
                continue
            subs = [t for t in by_size if parent_of.get(t) == s]
            covered = frozenset().union(*subs) if subs else frozenset()
            children = [node_of[t] for t in subs]
            children += [clusters[b]["node"] for b in sorted(s - covered)]
            members = frozenset().union(*(clusters[b]["members"] for b in s))
            nodes.append({"radius": gatherings[s], "children": children, "rep": rep_of(members)})
            node_of[s] = ("node", len(nodes) - 1)
        clusters = _next_round(by_size, parent_of, node_of, nodes, gatherings, clusters)
    return _hierarchy_from_nodes(nodes, clusters[0]["node"], labels, values, coding, fd, notes)


def _next_round(by_size, parent_of, node_of, nodes, gatherings, clusters):
    out = []
    for s in by_size:
        if s in parent_of:
            continue
        if gatherings[s] is None:
            out.append(clusters[next(iter(s))])
            continue
        nid = node_of[s]
        out.append({"members": _members(nodes, nid), "rep": nodes[nid[1]]["rep"], "node": nid})
    return out


def _members(nodes, nid):
    kind, k = nid
    if kind == "leaf":
        return frozenset([k])
    return frozenset().union(*(_members(nodes, c) for c in nodes[k]["children"]))


def _hierarchy_from_nodes(nodes, root_id, labels, values, coding, fd, notes):
    edges_, leaves_ = [], []
    for k, node in enumerate(nodes):
        for kind, c in node["children"]:
            if kind == "leaf":
                leaves_.append((k, labels[c]))
            else:
                child_radius = nodes[c]["radius"]
                if child_radius <= node["radius"]:
                    raise AssertionError("merge levels must increase away from the root")
                edges_.append((k, c, child_radius - node["radius"]))
    tree = ProjectiveDendrogram.build(root_id[1], edges_, leaves_)
    rename = {old: f"v{i}" for i, old in enumerate(tree.bfs())}
    tree = tree.relabel_vertices(rename)
    tree.validate()
    discs = {
        rename[k]: Disc(values[node["rep"]], node["radius"]) for k, node in enumerate(nodes)
    }
    return ClusterHierarchy(tree, discs, coding, fd, notes)


def star_tree(points, stable=True) -> ClusterHierarchy:
    """The *-tree of a finite point set containing infinity.

    ``points`` is a sequence of numbers or ``(label, number)`` pairs; exactly
    one entry is ``INF``.  With ``stable=False`` every internal edge is
    subdivided so that each integer level carries a vertex (the subtree of
    the Bruhat-Tits tree before stabilisation).
    """
    labelled = []
    n_inf = 0
    for i, item in enumerate(points):
        lab, x = item if isinstance(item, tuple) else (f"x{i + 1}", item)
        if x is INF:
            n_inf += 1
        else:
            labelled.append((lab, x))
    if n_inf != 1:
        raise InvalidInputError("the point set must contain infinity exactly once")
    if len(labelled) < 2:
        raise InvalidInputError("need at least two finite points besides infinity")
    h = classify(labelled)
    if not stable:
        h = subdivide(h)
    return h


def subdivide(h: ClusterHierarchy) -> ClusterHierarchy:
    """Insert a vertex at every integer level along the internal edges."""
    tree = h.dendrogram
    edges_, discs = [], dict(h.vertex_disc)
    order = {v: [t for _, t, _ in tree.children(v)] for v in tree.vertices}
    for a, b, n in tree.internal_edges():
        prev = a
        child_disc = h.vertex_disc[b]
        for k in range(1, n):
            mid = f"{b}.{k}"
            discs[mid] = Disc(child_disc.center, h.vertex_disc[a].radius_exp + k)
            edges_.append((prev, mid, 1))
            order[prev] = [mid if t == b else t for t in order[prev]] if prev == a else [mid]
            prev = mid
        edges_.append((prev, b, 1))
        if prev != a:
            order[prev] = [b]
    unstable = ProjectiveDendrogram.build(tree.root, edges_, tree.leaves(), order, check=False)
    return ClusterHierarchy(unstable, discs, h.coding, h.field, list(h.notes))


def stabilize(h: ClusterHierarchy) -> ClusterHierarchy:
    tree = h.dendrogram.stabilize()
    discs = {v: h.vertex_disc[v] for v in tree.vertices}
    return ClusterHierarchy(tree, discs, h.coding, h.field, list(h.notes))


# -- encoding ----------------------------------------------------------------

CANONICAL = "canonical"
PAPER_BINARY = "paper-binary"


def encode_dendrogram(tree: ProjectiveDendrogram, convention=CANONICAL, p=2,
                      rep_system=POLYNOMIAL, precision=None) -> dict:
    """p-adic code of every datum: sum of ``label(e) * p^level(origin(e))`` along its path.

    ``canonical`` gives the children of each vertex the digit codes 0, 1, 2,
    ... in child order.  ``paper-binary`` needs a binary tree: the root sends
    its first child to 0 and its second to 1; below the first child every
    vertex does the same, below the second child the labels are swapped.
    The first datum is then 0 and the last is 1.
    """
    levels = tree.level_map()
    if convention == PAPER_BINARY:
        if not tree.is_binary():
            raise InvalidInputError("paper-binary encoding needs a binary dendrogram")
        f = 1
    elif convention == CANONICAL:
        f = minimal_degree(tree.max_children(), p)
    else:
        raise InvalidInputError(f"unknown convention {convention!r}")
    fd = FieldDescriptor(p, f, rep_system)
    if precision is None:
        precision = max(DEFAULT_PRECISION, max(levels.values()) + 1)
    coding = {}
    # (vertex, terms so far, flipped)
    stack = [(tree.root, {}, None)]
    while stack:
        v, terms, flipped = stack.pop()
        for idx, (kind, tgt, _) in enumerate(tree.children(v)):
            if convention == PAPER_BINARY:
                if flipped is None:
                    branch = code = idx
                else:
                    branch = flipped
                    code = idx if branch == 0 else 1 - idx
            else:
                branch, code = None, idx
            new_terms = dict(terms)
            if code:
                new_terms[levels[v]] = code
            if kind == "leaf":
                coding[tgt] = PAdicNumber.from_terms(fd, new_terms, precision)
            else:
                stack.append((tgt, new_terms, branch))
    return {lab: coding[lab] for lab in tree.order_data()}


def dendrogram_round_trip(tree, convention=CANONICAL, p=2, rep_system=POLYNOMIAL):
    """``classify(encode_dendrogram(tree))``."""
    coding = encode_dendrogram(tree, convention, p, rep_system)
    return classify(list(coding.items()))
