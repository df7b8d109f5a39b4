"""Time series of binary p-adic dendrograms: balance trend, Tate and Mumford curve data.

All frames share one field and one set of particle labels, and every frame is
normal: some particle is coded 0 and some particle is coded 1.  The root of
each frame is then the unit disc, the common vertex ``v`` on the axis
between 0 and 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import sympy

from .classifier import INF, ClusterHierarchy, Disc, classify, disc_distance, median_vertex
from .dendrogram import FlagGraph, betti, cycle_rank
from .errors import (
    DegenerateError,
    IndistinguishableError,
    InvalidInputError,
    NonDiscreteError,
    UnsupportedOperationError,
)
from .invariants import subtree_volume
from .padic_core import POLYNOMIAL, FieldDescriptor, PAdicNumber, add_sub, difference_valuation

TRANSLATION_AT_ROOT = "translation_at_root"
FLOW_FROM_INFINITY = "flow_from_infinity"
STATIONARY = "stationary"


def _is_zero(x):
    return x.is_zero()


def _is_one(x):
    return x.v0 == 0 and x.digits == (1,)


class DendrogramSeries:
    """Frames ``X_0, ..., X_N`` over a common field and particle set."""

    def __init__(self, frames):
        frames = list(frames)
        if not frames:
            raise InvalidInputError("empty time series")
        self.frames = frames
        self.field = frames[0].field
        labels = set(frames[0].coding)
        for t, h in enumerate(frames):
            if h.field != self.field:
                raise InvalidInputError(f"frame {t} uses a different field")
            if set(h.coding) != labels:
                raise InvalidInputError(f"frame {t} has a different particle set")
            if h.label_of_value(_is_zero) is None or h.label_of_value(_is_one) is None:
                raise InvalidInputError(f"frame {t} is not normal: 0 and 1 must both be coded")

    @classmethod
    def from_codings(cls, codings):
        """Classify each frame given as a mapping ``label -> PAdicNumber``."""
        frames = []
        for t, coding in enumerate(codings):
            try:
                frames.append(classify(list(coding.items())))
            except InvalidInputError as exc:
                raise InvalidInputError(f"frame {t}: {exc}") from None
        return cls(frames)

    def __len__(self):
        return len(self.frames)

    def codings(self):
        return [dict(h.coding) for h in self.frames]


# -- balance and velocity ------------------------------------------------------

def axis_order(h: ClusterHierarchy):
    """Root branch indices ``(towards 0, towards 1)``."""
    tree = h.dendrogram
    zero, one = h.label_of_value(_is_zero), h.label_of_value(_is_one)
    found = {}
    for idx, (kind, tgt, _) in enumerate(tree.children(tree.root)):
        data = {tgt} if kind == "leaf" else tree.subtree_data(tgt)
        if zero in data:
            found[0] = idx
        if one in data:
            found[1] = idx
    return found[0], found[1]


def frame_balance(h: ClusterHierarchy, t=None) -> int:
    """``w0 - w1`` with branch 0 the one holding the particle coded 0."""
    tree = h.dendrogram
    if not tree.is_binary():
        where = "" if t is None else f"frame {t}: "
        raise InvalidInputError(f"{where}dendrogram is not binary")
    kids = tree.children(tree.root)
    i0, i1 = axis_order(h)

    def weight(i):
        kind, tgt, n = kids[i]
        return 0 if kind == "leaf" else n + subtree_volume(tree, tgt)

    return weight(i0) - weight(i1)


def balance_series(series: DendrogramSeries):
    return [frame_balance(h, t) for t, h in enumerate(series.frames)]


@dataclass(frozen=True)
class VelocityEstimate:
    c: Fraction
    method: str  # "periodic" or "ols-fallback"
    period: int | None
    diagnostics: tuple  # first differences
    exact: bool = True

    @property
    def d(self):
        return self.c.numerator

    @property
    def e(self):
        return self.c.denominator

    def to_json(self):
        return {"d": self.d, "e": self.e, "method": self.method, "period": self.period,
                "exact": self.exact, "differences": list(self.diagnostics)}


def estimate_velocity(balances) -> VelocityEstimate:
    """Average per-step change of the balance.

    The first differences are searched for the smallest period ``q`` that is
    confirmed by at least one further difference (a trailing partial period
    is allowed); the velocity is then the mean over one period.  Without
    such a period the least-squares slope is rounded to a fraction with
    denominator at most the series length and flagged inexact.
    """
    balances = [int(b) for b in balances]
    if len(balances) < 2:
        raise InvalidInputError("velocity needs at least two balances")
    diffs = [b - a for a, b in zip(balances, balances[1:])]
    for q in range(1, len(diffs)):
        if all(diffs[i] == diffs[i % q] for i in range(len(diffs))):
            return VelocityEstimate(Fraction(sum(diffs[:q]), q), "periodic", q, tuple(diffs))
    n = len(balances)
    ts = range(n)
    t_mean = Fraction(sum(ts), n)
    b_mean = Fraction(sum(balances), n)
    num = sum((t - t_mean) * (b - b_mean) for t, b in zip(ts, balances))
    den = sum((t - t_mean) ** 2 for t in ts)
    slope = num / den
    return VelocityEstimate(slope.limit_denominator(n), "ols-fallback", None, tuple(diffs),
                            exact=False)


# -- flow classification ---------------------------------------------------------

def axis_segment(h: ClusterHierarchy):
    """Vertices ``(v0, v1)`` bounding the part of the dagger-tree on the axis ]0, 1[."""
    tree = h.dendrogram
    return (tree.leaf_vertex(h.label_of_value(_is_zero)),
            tree.leaf_vertex(h.label_of_value(_is_one)))


@dataclass(frozen=True)
class FlowReport:
    kind: str
    since: int | None = None
    note: str = ""


def classify_flow(series: DendrogramSeries, velocity: VelocityEstimate = None) -> FlowReport:
    if velocity is None:
        velocity = estimate_velocity(balance_series(series))
    c = velocity.c
    if c == 0:
        return FlowReport(STATIONARY)
    side = 0 if c < 0 else 1  # the repelling fixed point
    hits = []
    for h in series.frames:
        hits.append(axis_segment(h)[side] == h.dendrogram.root)
    t0 = None
    for t in range(len(hits) - 1, -1, -1):
        if not hits[t]:
            break
        t0 = t
    if t0 is not None:
        return FlowReport(TRANSLATION_AT_ROOT, t0)
    return FlowReport(FLOW_FROM_INFINITY, None,
                      "flow from infinity: balance enters from outside the data; analysis unsupported")


# -- curves --------------------------------------------------------------------------

def power_symbol(exponent: Fraction):
    exponent = Fraction(exponent)
    return sympy.Symbol(f"p^({exponent.numerator}/{exponent.denominator})")


A_SYM, B_SYM = sympy.symbols("a b")


def theta_matrix(c: Fraction):
    """Matrix of the translation along ]0, 1[ with ``|c_p| = p^c``."""
    cp = power_symbol(c)
    return sympy.Matrix([[-cp, 0], [1 - cp, -1]])


def varsigma_matrix(u: Fraction):
    """Matrix of the translation by ``u`` along ]a, b[ (entries in symbols a, b)."""
    pu = power_symbol(u)
    a, b = A_SYM, B_SYM
    return sympy.Matrix([[a - pu * b, (pu - 1) * a * b], [1 - pu, pu * a - b]])


def mobius_fixes(matrix, z) -> bool:
    """Exact check that ``z`` is fixed by the Moebius map of ``matrix``."""
    alpha, beta, gamma, delta = matrix
    return sympy.expand(gamma * z ** 2 + (delta - alpha) * z - beta) == 0


def serialize_matrix(matrix):
    return [[str(sympy.expand(matrix[i, j])) for j in range(2)] for i in range(2)]


@dataclass
class CurveData:
    kind: str  # "tate" or "mumford2"
    base_field: FieldDescriptor
    generators: list
    fixed_points: list  # per generator, the two sympy points it fixes
    quotient_graph: FlagGraph | None
    edge_lengths: dict  # internal edge (flag pair) -> Fraction
    betti1: int | None
    genus: int | None
    orbit_map: dict  # t -> quotient vertex
    status: str = "ok"
    translation_lengths: tuple = ()
    notes: list = field(default_factory=list)

    def betti_checks(self):
        """``(h1 by Euler formula, h1 by cycle count)``."""
        return betti(self.quotient_graph)[1], cycle_rank(self.quotient_graph)[1]

    def verify_fixed_points(self) -> bool:
        return all(
            mobius_fixes(m, z) for m, pts in zip(self.generators, self.fixed_points) for z in pts
        )

    def to_json(self):
        out = {
            "kind": self.kind,
            "status": self.status,
            "field": self.base_field.describe(),
            "genus": self.genus,
            "betti1": self.betti1,
            "generators": [serialize_matrix(m) for m in self.generators],
            "translation_lengths": [str(x) for x in self.translation_lengths],
            "orbits": {str(t): v for t, v in self.orbit_map.items()},
        }
        if self.quotient_graph is not None:
            g = self.quotient_graph
            internal = list(self.edge_lengths)
            out["quotient"] = {
                "vertices": list(g.vertices),
                "edges": [[g.boundary[fa], g.boundary[fb]] for fa, fb in internal],
                "lengths": [str(self.edge_lengths[e]) for e in internal],
            }
        else:
            out["quotient"] = None
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _cycle(n, prefix="c"):
    names = [f"{prefix}{i}" for i in range(n)]
    return names, [(names[i], names[(i + 1) % n]) for i in range(n)]


def tate_curve(c, p, balances, f=1) -> CurveData:
    """Genus-one data for velocity ``c = d/e``.

    The translation acts on the tree of a field purely ramified of index
    ``e`` over K, where each edge has length ``1/e``; the axis modulo the
    translation is a cycle of ``|d|`` such edges.  Frame ``t`` sits at
    vertex ``(e * b(t)) mod |d|``.
    """
    c = Fraction(c)
    if c == 0:
        raise InvalidInputError("velocity 0: there is no translation")
    d, e = c.numerator, c.denominator
    n = abs(d)
    names, pairs = _cycle(n)
    graph = FlagGraph.from_edges(names, pairs)
    lengths = {(2 * i, 2 * i + 1): Fraction(1, e) for i in range(n)}
    theta = theta_matrix(c)
    orbit = {t: names[(e * int(b)) % n] for t, b in enumerate(balances)}
    h1 = betti(graph)[1]
    notes = []
    if not c.denominator == 1:
        notes.append(f"c_p = p^({d}/{e}) lives in a ramified extension; kept symbolic")
    return CurveData(
        kind="tate",
        base_field=FieldDescriptor(p, f, POLYNOMIAL, None, e),
        generators=[theta],
        fixed_points=[(sympy.Integer(0), sympy.Integer(1))],
        quotient_graph=graph,
        edge_lengths=lengths,
        betti1=h1,
        genus=1,
        orbit_map=orbit,
        translation_lengths=(abs(c),),
        notes=notes,
    )


@dataclass(frozen=True)
class InvariantBranch:
    root: Disc
    labels: frozenset
    vertices: tuple  # the branch root in each frame


def _path_discs(h, v):
    tree = h.dendrogram
    path = []
    while v is not None:
        path.append(h.vertex_disc[v])
        v = tree.parent(v)
    return path[::-1]


def invariant_branch(series: DendrogramSeries, off_axis=False):
    """A branch with the same particles and the same root path (as discs) at all times.

    Among the candidates the one with most particles wins, then the one
    nearest the root.  ``off_axis`` skips branches holding the particles
    coded 0 or 1.  Returns ``None`` when nothing is invariant.
    """
    first = series.frames[0]
    tree0 = first.dendrogram
    levels = tree0.level_map()
    lookup = []
    for h in series.frames:
        tree = h.dendrogram
        lookup.append({tree.subtree_data(v): v for v in tree.vertices if v != tree.root})
    axis_labels = set()
    for h in series.frames:
        axis_labels |= {h.label_of_value(_is_zero), h.label_of_value(_is_one)}
    found = []
    for rank, v in enumerate(tree0.bfs()):
        if v == tree0.root:
            continue
        labels = tree0.subtree_data(v)
        if off_axis and labels & axis_labels:
            continue
        path = _path_discs(first, v)
        where = []
        for h, table in zip(series.frames, lookup):
            w = table.get(labels)
            if w is None or _path_discs(h, w) != path:
                break
            where.append(w)
        else:
            found.append((-len(labels), levels[v], rank, InvariantBranch(path[-1], labels, tuple(where))))
    if not found:
        return None
    return min(found, key=lambda item: item[:3])[3]


def geodesic_endpoints(w0: Disc):
    """Ends ``a`` and ``b = a + p^m`` of a geodesic through the disc ``w0``.

    ``a`` is the centre cut off below the radius exponent ``m``.
    """
    fd = w0.center.field
    m = w0.radius_exp
    zero, one = PAdicNumber.zero(fd), PAdicNumber.from_digits(fd, [1])
    if m >= 0 and (w0.contains(zero) or w0.contains(one)):
        raise DegenerateError("the disc lies on the axis ]0, 1[; the geodesics would meet")
    a = w0.center.truncate(m)
    precision = max(a.precision, m + 1)
    a = PAdicNumber.from_terms(fd, a.terms(), precision)
    b = PAdicNumber.from_terms(fd, {**a.terms(), m: 1}, precision)
    return a, b


def _median(x, y, z, what):
    try:
        return median_vertex(x, y, z)
    except InvalidInputError:
        raise InvalidInputError(f"{what}: points must be pairwise distinct") from None


def mumford_curve(tate: CurveData, a: PAdicNumber, b: PAdicNumber, u=1) -> CurveData:
    """Genus-two data from the Tate translation and a translation by ``u`` along ]a, b[.

    Disjoint axes give a discrete free group; the quotient is the two loops
    joined by a bridge as long as the distance between the axes.  Axes that
    meet in a segment no longer than either translation length are reported
    as discrete but only partially analysed; longer overlaps raise
    ``NonDiscreteError``.
    """
    u = Fraction(u)
    if u <= 0:
        raise InvalidInputError("translation fraction u must be positive")
    fd = a.field
    zero, one = PAdicNumber.zero(fd, a.precision), PAdicNumber.from_digits(fd, [1], a.precision)
    for name, x in (("a", a), ("b", b)):
        for ref, y in (("0", zero), ("1", one)):
            try:
                difference_valuation(x, y)
            except IndistinguishableError:
                raise InvalidInputError(f"{name} = {ref}: the geodesic ]a, b[ meets the axis end {ref}") from None
    p01a = _median(zero, one, a, "v(0,1,a)")
    p01b = _median(zero, one, b, "v(0,1,b)")
    qab0 = _median(a, b, zero, "v(a,b,0)")
    qab1 = _median(a, b, one, "v(a,b,1)")
    tau = tate.translation_lengths[0]
    theta = tate.generators[0]
    sigma = varsigma_matrix(u)
    gens = [theta, sigma]
    fixed = [tate.fixed_points[0], (A_SYM, B_SYM)]
    notes = [f"a = {a}", f"b = {b}"]
    if p01a == p01b and qab0 == qab1 and p01a != qab0:
        bridge = disc_distance(p01a, qab0)
        n = len(tate.quotient_graph.vertices)
        names, pairs = _cycle(n)
        vertices = names + ["s0"]
        pairs = pairs + [(names[0], "s0"), ("s0", "s0")]
        graph = FlagGraph.from_edges(vertices, pairs)
        lengths = {}
        for i in range(n):
            lengths[(2 * i, 2 * i + 1)] = Fraction(1, tate.base_field.e)
        lengths[(2 * n, 2 * n + 1)] = Fraction(bridge)
        lengths[(2 * n + 2, 2 * n + 3)] = u
        curve = CurveData(
            kind="mumford2",
            base_field=tate.base_field,
            generators=gens,
            fixed_points=fixed,
            quotient_graph=graph,
            edge_lengths=lengths,
            betti1=betti(graph)[1],
            genus=2,
            orbit_map=dict(tate.orbit_map),
            status="disjoint",
            translation_lengths=(tau, u),
            notes=notes + [f"distance between the axes: {bridge}"],
        )
        return curve
    if p01a == p01b:
        overlap = 0
    else:
        overlap = disc_distance(p01a, p01b)
    if overlap > min(tau, u):
        raise NonDiscreteError(
            f"axes share a segment of length {overlap} > min(translation lengths) = {min(tau, u)}"
        )
    return CurveData(
        kind="mumford2",
        base_field=tate.base_field,
        generators=gens,
        fixed_points=fixed,
        quotient_graph=None,
        edge_lengths={},
        betti1=None,
        genus=None,
        orbit_map=dict(tate.orbit_map),
        status="discrete-intersecting, analysis-partial",
        translation_lengths=(tau, u),
        notes=notes + [f"axes share a segment of length {overlap}"],
    )


def recenter(series: DendrogramSeries, delta: PAdicNumber) -> DendrogramSeries:
    """Translate every coding value by ``delta`` and reclassify."""
    if series.field.rep_system != POLYNOMIAL:
        raise UnsupportedOperationError("translation needs polynomial representatives")
    frames = []
    for h in series.frames:
        coding = {lab: add_sub(x, delta, "add") for lab, x in h.coding.items()}
        frames.append(classify(list(coding.items())))
    out = DendrogramSeries.__new__(DendrogramSeries)
    out.frames, out.field = frames, series.field
    return out


def branch_balances(series: DendrogramSeries, branch: InvariantBranch):
    """Balance of the two sub-branches below the branch root, frame by frame."""
    out = []
    for t, (h, w) in enumerate(zip(series.frames, branch.vertices)):
        tree = h.dendrogram
        kids = tree.children(w)
        if len(kids) != 2:
            raise InvalidInputError(f"frame {t}: branch root is not binary")
        ws = [0 if k == "leaf" else n + subtree_volume(tree, tgt) for k, tgt, n in kids]
        out.append(ws[0] - ws[1])
    return out


def series_report(series: DendrogramSeries, genus2=False, u=None):
    """Everything the ``timeseries`` command prints, as plain JSON data."""
    balances = balance_series(series)
    velocity = estimate_velocity(balances)
    flow = classify_flow(series, velocity)
    report = {
        "balances": balances,
        "velocity": velocity.to_json(),
        "flow": flow.kind,
        "flow_since": flow.since,
        "curve": None,
    }
    if flow.note:
        report["notes"] = [flow.note]
    if flow.kind != TRANSLATION_AT_ROOT:
        return report
    tate = tate_curve(velocity.c, series.field.p, balances, series.field.f)
    curve = tate
    if genus2:
        branch = invariant_branch(series, off_axis=True)
        if branch is None:
            tate.notes.append("no time-invariant branch off the axis: genus 2 not available")
        else:
            a, b = geodesic_endpoints(branch.root)
            if u is None:
                u = Fraction(1)
                try:
                    bc = estimate_velocity(branch_balances(series, branch)).c
                    if bc != 0:
                        u = abs(bc)
                except InvalidInputError:
                    pass
            curve = mumford_curve(tate, a, b, u)
            curve.notes.append(f"invariant branch {sorted(map(str, branch.labels))}")
    report["curve"] = curve.to_json()
    return report


__all__ = [
    "DendrogramSeries", "VelocityEstimate", "FlowReport", "CurveData", "InvariantBranch",
    "balance_series", "estimate_velocity", "classify_flow", "tate_curve", "invariant_branch",
    "geodesic_endpoints", "mumford_curve", "recenter", "series_report", "INF",
]
