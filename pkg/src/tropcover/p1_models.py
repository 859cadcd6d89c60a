"""Charts of semistable models of P^1 and separating trees.

A model is described through its charts: positively/negatively oriented
closed disks B^+/-_k(x0) with coordinate (x - x0)/t^k resp. t^k/(x - x0),
and closed annuli S_{a,b}(x0) with coordinates u = (x - x0)/t^a,
v = t^b/(x - x0), uv = t^(b-a).  Each chart induces discrete valuations of
k0((t))(x); the t-adic prime of a disk chart is the vertex valuation, the
two vertical primes (u, t) and (v, t) of an annulus are the valuations of
the disks of radius b and a (note the swap).

The separating tree of a covering is computed from the y-discriminant:
its roots are expanded t-adically to a pairwise-separating height, the
branching structure of the expansions is exactly the combinatorial tree
spanned by the branch points together with infinity, and the Gauss disk
B_0(0) is kept as an anchoring vertex whenever it lies on the tree.
"""

from __future__ import annotations

from fractions import Fraction
from math import inf, lcm
from typing import NamedTuple

from .exactnum import (FFElem, FunctionField, Poly, PolyRing, QQ, Tower,
                       discriminant, poly_gcd, tower_of)
from .factorization import migrate_constants, squarefree_part
from .newton_puiseux import RootApproximation, discrete_np, NPRun
from .series import LaurentSeries, RamifiedParam, valuation


class InputCurve:
    """A bivariate polynomial f(x, y) over k0((t)) in exact form.

    ``terms`` maps (i, j) (powers of x and y) to exact LaurentSeries in t
    over the constants tower.
    """

    def __init__(self, terms: dict, constants: Tower, names=("x", "y")):
        self.terms = {k: v for k, v in terms.items() if v.terms}
        self.constants = constants
        self.names = names

    @property
    def degree_y(self) -> int:
        return max(j for _, j in self.terms)

    @property
    def degree_x(self) -> int:
        return max(i for i, _ in self.terms)

    def migrate(self, new_k: Tower) -> "InputCurve":
        old_k = self.constants
        terms = {k: s.map_coeffs(lambda c: migrate_constants(c, old_k, new_k),
                                 new_field=new_k)
                 for k, s in self.terms.items()}
        return InputCurve(terms, new_k, self.names)

    def rescale_t(self, r: int) -> "InputCurve":
        """Substitute t = tau^r (Kummer base extension); exponents scale by r."""
        terms = {}
        for k, s in self.terms.items():
            terms[k] = LaurentSeries(s.field, s.param,
                                     {e * r: c for e, c in s.terms.items()})
        return InputCurve(terms, self.constants, self.names)

    def y_coefficients_x(self):
        """Coefficients of y^j as dicts x-power -> series."""
        out = {}
        for (i, j), s in self.terms.items():
            out.setdefault(j, {})[i] = s
        return out


def tameness_check(curve: InputCurve, residue_char: int = 0):
    """Sufficient tameness conditions; this artifact fixes residue
    characteristic zero, where the covering is always tame."""
    if residue_char == 0:
        return True, "char(k)=0"
    if curve.degree_y < residue_char:
        return True, f"deg_y(f) = {curve.degree_y} < p = {residue_char}"
    return False, (f"deg_y(f) = {curve.degree_y} >= p = {residue_char}: "
                   "tameness not guaranteed")


# ---------------------------------------------------------------------------
# chart substitution
# ---------------------------------------------------------------------------

def vertex_chart_coeffs(curve: InputCurve, center: LaurentSeries, k: Fraction,
                        var: str = "xi", negative: bool = False):
    """Coefficients (in y) of f on the disk chart x = center + t^k * xi.

    With ``negative`` the negatively oriented disk x = center + t^k / xi is
    used (for the chart at infinity take center 0, k = minimal radius).
    Returns a list of exact LaurentSeries over k0(var).
    """
    ff = FunctionField(curve.constants, var)
    T = tower_of(ff)
    param = RamifiedParam("t", 1)
    xi = ff.gen()
    if negative:
        xi = ff.inv(xi)
    X = LaurentSeries(T, param,
                      {e: T.coerce(ff.coerce_constant(c))
                       for e, c in center.terms.items()})
    X = X + LaurentSeries(T, param, {Fraction(k): T.coerce(xi)})
    ycoeffs = curve.y_coefficients_x()
    d = curve.degree_y
    out = []
    for j in range(d + 1):
        xpoly = ycoeffs.get(j, {})
        acc = LaurentSeries.zero(T, param)
        for i in range(max(xpoly, default=0), -1, -1):
            acc = acc * X
            if i in xpoly:
                acc = acc + xpoly[i].map_coeffs(
                    lambda c: T.coerce(ff.coerce_constant(c)), new_field=T)
        out.append(acc)
    return out


def monicize(coeffs: list[LaurentSeries]):
    """lc^(d-1) f(y/lc): a monic polynomial with the same skeleton data.

    Roots are multiplied by lc, matching the normalization used in worked
    local computations.  Returns (new_coeffs, lc).
    """
    d = len(coeffs) - 1
    lc = coeffs[-1]
    out = []
    for j, c in enumerate(coeffs[:-1]):
        acc = c
        for _ in range(d - 1 - j):
            acc = acc * lc
        out.append(acc)
    out.append(LaurentSeries.const(coeffs[0].field, coeffs[0].param, 1))
    return out, lc


# ---------------------------------------------------------------------------
# discriminant of the covering
# ---------------------------------------------------------------------------

def discriminant_x(curve: InputCurve):
    """Coefficients (by x-power) of the y-discriminant of f.

    Returned as a list of exact LaurentSeries in t over the constants; a
    global power of t has been normalized away (it affects neither the
    roots nor the Newton-polygon slopes).
    """
    k = curve.constants
    Rt = PolyRing(k, "t")
    Rx = PolyRing(Rt, curve.names[0])
    shift = min(min(s.terms) for s in curve.terms.values())
    ycoeffs = curve.y_coefficients_x()
    d = curve.degree_y
    fcoeffs = []
    for j in range(d + 1):
        xpoly = ycoeffs.get(j, {})
        if not xpoly:
            fcoeffs.append(Rx.zero())
            continue
        xs = []
        for i in range(max(xpoly) + 1):
            s = xpoly.get(i)
            if s is None:
                xs.append(Rt.zero())
            else:
                deg = int(max(e - shift for e in s.terms))
                tc = [k.zero()] * (deg + 1)
                for e, c in s.terms.items():
                    tc[int(e - shift)] = c
                xs.append(Poly(k, tc))
        fcoeffs.append(Poly(Rt, xs))
    f = Poly(Rx, fcoeffs)
    if f.degree() < 1:
        raise ValueError("f must have positive degree in y")
    disc = discriminant(f)
    if disc.is_zero():
        raise ValueError("discriminant vanishes identically: f not separable in y")
    param = RamifiedParam("t", 1)
    out = []
    for i in range(disc.degree() + 1):
        tp = disc.coeff(i)
        out.append(LaurentSeries(k, param,
                                 {Fraction(e): c for e, c in enumerate(tp.coeffs)}))
    # drop the common t-power so valuations stay tidy
    lows = [min(s.terms) for s in out if s.terms]
    low = min(lows)
    out = [s.shift(-low) for s in out]
    return out


def squarefree_discriminant_x(curve: InputCurve):
    """Squarefree part of the discriminant, over k0(t)."""
    disc = discriminant_x(curve)
    k = curve.constants
    fft = FunctionField(k, "t")
    shift = min(min(s.terms) for s in disc if s.terms)
    coeffs = []
    for s in disc:
        deg = int(max((e - shift for e in s.terms), default=0))
        tc = [k.zero()] * (deg + 1)
        for e, c in s.terms.items():
            tc[int(e - shift)] = c
        coeffs.append(fft.from_poly(Poly(k, tc)))
    p = Poly(fft, coeffs)
    sf = squarefree_part(p)
    param = RamifiedParam("t", 1)
    out = []
    den_lcm = Poly.one(k)
    for c in sf.coeffs:
        dp = fft.den_poly(c)
        den_lcm = den_lcm.exact_div(poly_gcd(den_lcm, dp)) * dp
    for c in sf.coeffs:
        num = fft.num_poly(c) * den_lcm.exact_div(fft.den_poly(c))
        out.append(LaurentSeries(k, param,
                                 {Fraction(e): cc for e, cc in enumerate(num.coeffs)}))
    lows = [min(s.terms) for s in out if s.terms]
    low = min(lows)
    return [s.shift(-low) for s in out]


# ---------------------------------------------------------------------------
# separating trees
# ---------------------------------------------------------------------------

class Chart(NamedTuple):
    """A disk or annulus chart; ``b`` is None for disks.

    kind: "disk+", "disk-" or "annulus"; the embedding is
    u = (x - center)/t^a (and v = t^b/(x - center) for annuli, uv = t^(b-a)).
    """
    kind: str
    center: LaurentSeries
    a: Fraction
    b: Fraction | None

    def thickness(self):
        return None if self.b is None else self.b - self.a

    def label(self) -> str:
        c = self.center.to_str()
        if self.kind == "annulus":
            return f"S_({self.a},{self.b})({c})"
        return f"B{'+' if self.kind == 'disk+' else '-'}_{self.a}({c})"


class TreeVertex(NamedTuple):
    id: int
    radius: Fraction
    center: LaurentSeries          # exact, over the constants
    disk: Chart


class TreeEdge(NamedTuple):
    id: int
    chart: Chart                   # annulus S_{a,b}(center)
    outer: int                     # vertex id at radius a
    inner: int                     # vertex id at radius b

    def length(self):
        return self.chart.b - self.chart.a


class TreeLeaf(NamedTuple):
    id: int
    vertex: int
    kind: str                      # "branch" or "infinity"
    point: RootApproximation | None
    label: str


class SeparatingTree(NamedTuple):
    vertices: list[TreeVertex]
    edges: list[TreeEdge]
    leaves: list[TreeLeaf]
    run: NPRun                     # the branch-point expansion run
    base_ram: int                  # Kummer extension t^(1/r) performed
    warnings: tuple

    def vertex_by_radius(self, r) -> TreeVertex:
        matches = [v for v in self.vertices if v.radius == Fraction(r)]
        if len(matches) != 1:
            raise KeyError(f"radius {r} matches {len(matches)} vertices")
        return matches[0]

    def valuation_table(self):
        """Multiset of branch-point valuations: sorted (count, valuation)."""
        vals: dict = {}
        for a in self.run.approximations:
            v = valuation(a.series)
            vals[v] = vals.get(v, 0) + 1
        return sorted(((c, v) for v, c in vals.items()),
                      key=lambda p: -p[1])


def _project_to_constants(T: Tower, k: Tower, e):
    """The element as a constants-tower element, or None if it involves the
    packet levels above the constants."""
    cur = e
    for i in range(T.height, k.height, -1):
        sub = T.subfield(i - 1)
        if any(not sub.is_zero(c) for c in cur[1:]):
            return None
        cur = cur[0]
    return cur


class _Point(NamedTuple):
    idx: int                # approximation index, -1 for phantom points
    labels: tuple           # packet labels for conjugate copies
    approx: RootApproximation | None
    phantom: str            # "", "gauss"


def _sep(p: _Point, q: _Point) -> Fraction | float:
    """Valuation of the difference of two expanded branch points."""
    if p.phantom == "gauss" or q.phantom == "gauss":
        other = q if p.phantom == "gauss" else p
        v = valuation(other.approx.series)
        v = v if isinstance(v, Fraction) else Fraction(10 ** 9)
        return min(Fraction(0), v)
    a, b = p.approx, q.approx
    if a.lineage == b.lineage:
        events = [e for e in a.trace if e[3] > 1]
        for ev, la, lb in zip(events, p.labels, q.labels):
            if la != lb:
                return ev[0]
        return inf if a.exact else a.series.prec  # identical copies never compared
    for ea, eb in zip(a.trace, b.trace):
        if ea[:3] != eb[:3] or ea[3] != eb[3]:
            va = ea[0] if ea[0] != inf else inf
            vb = eb[0] if eb[0] != inf else inf
            return min(va, vb)
    raise AssertionError("distinct lineages share their whole trace")


def _expand_points(run: NPRun) -> list[_Point]:
    points = []
    by_lineage: dict = {}
    for i, a in enumerate(run.approximations):
        by_lineage.setdefault(a.lineage, []).append(i)
    for lineage, idxs in sorted(by_lineage.items()):
        a = run.approximations[idxs[0]]
        degs = [e[3] for e in a.trace if e[3] > 1]
        labels = [()]
        for d in degs:
            labels = [l + (j,) for l in labels for j in range(d)]
        if len(labels) != len(idxs):
            raise AssertionError("packet copies inconsistent with trace degrees")
        for idx, lab in zip(idxs, labels):
            points.append(_Point(idx, lab, run.approximations[idx], ""))
    return points


def build_separating_tree(curve: InputCurve, start_height: int = 4,
                          max_doublings: int = 6, bound: int = 8) -> SeparatingTree:
    """Separating tree for {roots of disc_y(f)} + {infinity}.

    The discriminant roots are expanded to a pairwise-separating height
    (doubling on failure); the expansion's branching structure is the tree.
    A Kummer base extension t -> tau^r is performed when the branch points
    require ramified expansions; radii are then in tau-units with
    ``base_ram`` = r recorded.
    """
    warnings = []
    disc = squarefree_discriminant_x(curve)
    if len(disc) - 1 < 1:
        raise ValueError("discriminant is constant: no finite branch points")
    k = curve.constants
    height = Fraction(start_height)
    base_ram = 1
    for attempt in range(max_doublings + 1):
        run = discrete_np(disc, height, k, all_slopes=True,
                          split_constants=False, bound=bound,
                          name_hint="d")
        rams = {a.ram for a in run.approximations}
        r = 1
        for x in rams:
            r = lcm(r, x)
        if r > 1:
            # branch points live over K(t^(1/r)): rescale and restart
            curve = curve.rescale_t(r)
            disc = squarefree_discriminant_x(curve)
            base_ram *= r
            warnings.append(f"base Kummer extension of degree {r} performed")
            continue
        if all(a.separated for a in run.approximations):
            break
        height *= 2
    else:
        raise RuntimeError("branch points not separated within the doubling budget")
    if run.constants.height > k.height:
        curve = curve.migrate(run.constants)
        k = run.constants
    points = _expand_points(run)

    # chi check: with |D| marked points (branch points + infinity)
    n_marked = len(points) + 1
    if 2 - n_marked >= 0:
        warnings.append(
            f"chi = {2 - n_marked} >= 0: degenerate, single-vertex model P1_R")
        gauss_center = LaurentSeries.zero(k, RamifiedParam("t", 1))
        disk = Chart("disk+", gauss_center, Fraction(0), None)
        v0 = TreeVertex(0, Fraction(0), gauss_center, disk)
        leaves = [TreeLeaf(i, 0, "branch", p.approx, f"P{i}")
                  for i, p in enumerate(points)]
        leaves.append(TreeLeaf(len(points), 0, "infinity", None, "inf"))
        return SeparatingTree([v0], [], leaves, run, base_ram, tuple(warnings))

    gauss = _Point(-1, (), None, "gauss")
    vertices: list[TreeVertex] = []
    edges: list[TreeEdge] = []
    leaves: list[TreeLeaf] = []
    counter = {"v": 0, "e": 0, "l": 0}

    def center_of(block, radius) -> LaurentSeries:
        """Common truncation below ``radius``; must be constants-rational."""
        for p in block:
            if p.phantom:
                continue
            s = p.approx.series
            out = {}
            for e, c in s.terms.items():
                if e >= radius:
                    continue
                proj = _project_to_constants(p.approx.tower, k, c)
                if proj is None:
                    raise NotImplementedError(
                        "chart center involves a conjugate packet constant; "
                        "beyond desk scale")
                out[e] = proj
            return LaurentSeries(k, RamifiedParam("t", 1), out)
        return LaurentSeries.zero(k, RamifiedParam("t", 1))

    def build(block: list[_Point], entry_radius) -> int:
        pairs = [(p, q) for ii, p in enumerate(block) for q in block[ii + 1:]]
        rmin = min(_sep(p, q) for p, q in pairs)
        center = center_of(block, rmin)
        vid = counter["v"]
        counter["v"] += 1
        disk = Chart("disk+", center, Fraction(rmin), None)
        vertices.append(TreeVertex(vid, Fraction(rmin), center, disk))
        # partition by sep > rmin
        classes: list[list[_Point]] = []
        for p in block:
            for cls in classes:
                if _sep(p, cls[0]) > rmin:
                    cls.append(p)
                    break
            else:
                classes.append([p])
        for cls in classes:
            if len(cls) == 1:
                p = cls[0]
                if p.phantom == "gauss":
                    continue  # anchoring phantom: vertex only
                lid = counter["l"]
                counter["l"] += 1
                leaves.append(TreeLeaf(lid, vid, "branch", p.approx,
                                       f"P{p.idx}.{'.'.join(map(str, p.labels))}"))
            else:
                sub_vid = build(cls, rmin)
                sub_v = vertices[sub_vid]
                eid = counter["e"]
                counter["e"] += 1
                ann = Chart("annulus", sub_v.center, Fraction(rmin),
                            sub_v.radius)
                edges.append(TreeEdge(eid, ann, vid, sub_vid))
        return vid

    root_id = build(points + [gauss], -inf)
    lid = counter["l"]
    leaves.append(TreeLeaf(lid, root_id, "infinity", None, "inf"))
    return SeparatingTree(vertices, edges, leaves, run, base_ram,
                          tuple(warnings))


# ---------------------------------------------------------------------------
# presentation switching (Moebius transfer between adjacent charts)
# ---------------------------------------------------------------------------

def mobius_substitute(elem: FFElem, src: FunctionField,
                      dst: FunctionField, image: FFElem) -> FFElem:
    """Rewrite a rational function of the source residue coordinate in the
    target presentation, substituting the gluing image of the coordinate."""
    num = src.num_poly(elem)
    den = src.den_poly(elem)
    num_d = Poly(dst, [dst.coerce_constant(c) for c in num.coeffs])
    den_d = Poly(dst, [dst.coerce_constant(c) for c in den.coeffs])
    return dst.div(num_d.eval(image), den_d.eval(image))


def chart_gluing(src: Chart, dst: Chart, constants: Tower):
    """Gluing data for two annuli meeting at the disk of radius src.b == dst.a.

    Returns (s, v_shift) with  U_dst = 1/V_src + s  and
    V_dst = t^(dst.b - dst.a) * V_src / (1 + s V_src); ``s`` is the constant
    red((src.center - dst.center)/t^b).
    """
    if src.b != dst.a:
        raise ValueError("charts are not adjacent at a common radius")
    diff = src.center - dst.center
    for e in diff.terms:
        if e < src.b:
            raise ValueError("charts do not share the meeting vertex")
    s = diff.coeff(src.b)
    return s, dst.b - dst.a


def mobius_transfer(series: LaurentSeries, src_field: FunctionField,
                    dst_field: FunctionField, image: FFElem) -> LaurentSeries:
    """Coefficientwise Moebius rewriting of a t-adic series at a shared vertex."""
    return series.map_coeffs(
        lambda c: mobius_substitute(c, src_field, dst_field, image),
        new_field=dst_field)
