"""Newton polygons and the discrete Newton-Puiseux algorithm over a DVR.

The expansion engine works over a discrete valuation ring whose residue
field is either the constants tower k0 or a rational function field
k0(x) (possibly both extended along the way).  A polynomial is a list of
LaurentSeries coefficients in the uniformizer t over a residue tower; the
algorithm computes, per root, a truncated t-adic expansion together with
the tower of residue extensions its coefficients generate:

1.  Newton polygon of f: segment slopes are the valuations of the roots.
2.  For a segment of slope a/b the uniformizer is refined to t^(1/b)
    (a Kummer base extension; exponents are rationals throughout).
3.  Scale f by t^slope and normalize the content; reduce mod t.
4.  Factor the reduction over the residue tower.  Factors that are not
    geometrically irreducible are split by growing the global constants
    field (the whole run restarts over the bigger constants - growth is
    monotone and rare).
5.  An irreducible factor of multiplicity one is a Hensel leaf: the
    approximation is separated and gets extended to the requested height
    by Newton iteration.  Otherwise adjoin a root of the factor to the
    tower, translate, and recurse on the strictly positive slopes.

A leaf covers [tower : entry tower] roots; the emitted list repeats each
leaf that many times so that exactly deg(f) root approximations come back,
and decomposition-group orbits are leaf groups (merged under rotations of
t^(1/r) when the run is ramified).
"""

from __future__ import annotations

from fractions import Fraction
from math import inf, lcm
from typing import NamedTuple

from .exactnum import Poly, Tower, tower_of, FunctionField, QQ
from .factorization import (
    DeskScaleError, factor_over, is_geometrically_irreducible,
    migrate_constants, migrate_elem, migrate_field, constants_of, fresh_name,
)
from .residue_towers import chain_fingerprint
from .series import AtLeast, LaurentSeries, RamifiedParam, series_inv, valuation


class WildnessError(Exception):
    """Tameness violated (ramification exceeding d! or inseparable residue)."""


class InsufficientPrecision(Exception):
    """Coefficient precision too low to decide the Newton polygon."""


class ConstantsGrown(Exception):
    """Internal: the global constants tower was extended; rerun the caller."""

    def __init__(self, new_constants: Tower):
        self.new_constants = new_constants


class Segment(NamedTuple):
    slope: Fraction          # valuation of the roots on this segment
    length: int              # number of roots (horizontal length)
    endpoints: tuple         # ((i0, v0), (i1, v1)) lattice endpoints


class NewtonPolygon(NamedTuple):
    segments: tuple[Segment, ...]
    trailing_zeros: int      # multiplicity of the exact root 0

    def slope_multiset(self):
        out = []
        for s in self.segments:
            out.extend([s.slope] * s.length)
        return sorted(out)


def newton_polygon(coeffs: list[LaurentSeries]) -> NewtonPolygon:
    """Lower convex hull of (i, v(a_i)); slopes reported as root valuations.

    Coefficients that are zero to finite precision participate as "unknown
    above the bound": if the bound cannot rule the point out of the hull,
    InsufficientPrecision is raised.
    """
    pts = []
    unknown = []
    n = len(coeffs) - 1
    while n >= 0 and _is_known_zero(coeffs[n]):
        n -= 1
    if n < 0:
        raise ValueError("all coefficients vanish")
    trailing = 0
    while trailing <= n and _is_known_zero(coeffs[trailing]):
        trailing += 1
    for i in range(trailing, n + 1):
        v = valuation(coeffs[i])
        if isinstance(v, AtLeast):
            unknown.append((i, v.bound))
        elif v != inf:
            pts.append((i, v))
    # lower hull, left to right
    hull = []
    for p in sorted(pts):
        while len(hull) >= 2 and _turns_left(hull[-2], hull[-1], p):
            hull.pop()
        hull.append(p)
    # prune upper-right: keep lower hull only (monotone slope increase)
    segs = []
    for a, b in zip(hull, hull[1:]):
        raw = Fraction(b[1] - a[1], b[0] - a[0])
        segs.append(Segment(-raw, b[0] - a[0], (a, b)))
    # imprecise points must lie on or above the hull
    for i, bound in unknown:
        if bound < _hull_value_at(hull, i):
            raise InsufficientPrecision(
                f"coefficient {i} known only above t^{bound}")
    segs.sort(key=lambda s: s.slope)
    return NewtonPolygon(tuple(segs), trailing)


def _is_known_zero(s: LaurentSeries) -> bool:
    return not s.terms and s.prec is None


def _turns_left(a, b, c) -> bool:
    # true when b is above or on segment a-c (so b can be dropped)
    return (b[1] - a[1]) * (c[0] - a[0]) >= (c[1] - a[1]) * (b[0] - a[0])


def _hull_value_at(hull, i):
    if not hull:
        return -inf
    for a, b in zip(hull, hull[1:]):
        if a[0] <= i <= b[0]:
            return a[1] + Fraction(b[1] - a[1], b[0] - a[0]) * (i - a[0])
    return inf if i < hull[0][0] or i > hull[-1][0] else -inf


class RootApproximation(NamedTuple):
    """One root of f over the strict Henselization, truncated at ``series.prec``.

    ``tower`` houses every coefficient; ``exact`` marks roots split off
    exactly; ``ram`` is the branch's ramification index (the exponent
    denominators divide it); ``lineage`` identifies the leaf (conjugate
    copies share it); ``separated`` is False when the target height was
    reached before the branch split completely.  ``trace`` records the
    branch lineage explicitly: one (exponent, node, branch, degree) entry
    per expansion step, where ``degree`` > 1 marks a conjugate packet.
    """
    series: LaurentSeries
    tower: Tower
    exact: bool
    ram: int
    lineage: int
    separated: bool
    trace: tuple = ()


class NPRun(NamedTuple):
    approximations: list      # list[RootApproximation], deg f entries
    constants: Tower          # possibly grown global constants
    field: object             # migrated residue tower of the input coefficients
    polygon: NewtonPolygon    # polygon of the (monicized) input


def discrete_np(coeffs: list[LaurentSeries], height, constants: Tower,
                residue_base=None, all_slopes: bool = True,
                split_constants: bool = False, bound: int = 8,
                name_hint: str = "g") -> NPRun:
    """Power-series expansions of the roots of f to t-precision ``height``.

    ``coeffs`` are LaurentSeries over a tower (or base field) whose bottom
    constants are ``constants``.  With ``all_slopes`` the whole polygon is
    processed (roots of any valuation); otherwise only strictly positive
    slopes.  ``split_constants`` forces residue roots to be realized in the
    constants tower itself (required when the caller must compare
    coefficients across branches, e.g. for edge orbits).
    """
    height = Fraction(height)
    while True:
        try:
            return _discrete_np_once(coeffs, height, constants, residue_base,
                                     all_slopes, split_constants, bound,
                                     name_hint)
        except ConstantsGrown as grown:
            old_k, new_k = constants, grown.new_constants
            field0 = coeffs[0].field
            new_field = migrate_field(field0, old_k, new_k)
            coeffs = [c.map_coeffs(
                lambda e: migrate_elem(e, field0, new_field, old_k, new_k),
                new_field=new_field) for c in coeffs]
            constants = new_k
            if residue_base is not None:
                residue_base = migrate_field(residue_base, old_k, new_k)


def _discrete_np_once(coeffs, height, constants, residue_base, all_slopes,
                      split_constants, bound, name_hint):
    field0 = coeffs[0].field
    T0 = field0 if isinstance(field0, Tower) else tower_of(field0)
    coeffs = [c.map_coeffs(lambda e: e, new_field=T0) for c in coeffs]
    if residue_base is None:
        residue_base = T0.base
    param = coeffs[0].param
    deg = len(coeffs) - 1
    max_ram = 1
    for d in range(1, deg + 1):
        max_ram = lcm(max_ram, d)
    out = []
    lineage_counter = [0]
    polygon0 = newton_polygon(coeffs)

    state = _EngineState(constants, residue_base, param, height, bound,
                         split_constants, max_ram, out, lineage_counter,
                         name_hint)
    state.entry_deg = T0.degree()
    state.node_counter = [0]
    prefix0 = LaurentSeries.zero(T0, param)
    _expand(state, coeffs, T0, prefix0, Fraction(0), 1,
            None if all_slopes else Fraction(0), ())
    return NPRun(out, state.constants, T0, polygon0)


class _EngineState:
    def __init__(self, constants, residue_base, param, height, bound,
                 split_constants, max_ram, out, lineage_counter, name_hint):
        self.constants = constants
        self.residue_base = residue_base
        self.param = param
        self.height = height
        self.bound = bound
        self.split_constants = split_constants
        self.max_ram = max_ram
        self.out = out
        self.lineage_counter = lineage_counter
        self.name_hint = name_hint

    def new_lineage(self):
        self.lineage_counter[0] += 1
        return self.lineage_counter[0]


def _expand(state, coeffs, T, prefix, shift, ram, min_slope, trace):
    """Process the roots of ``coeffs`` with valuation > min_slope (all when
    min_slope is None).  Roots of the original polynomial are
    prefix + t^shift * (roots here)."""
    poly = newton_polygon(coeffs)
    state.node_counter[0] += 1
    node = state.node_counter[0]
    # exact zero roots of the current polynomial (infinite slope)
    for _ in range(poly.trailing_zeros):
        _emit(state, T, prefix.copy(prec=None), True, ram,
              trace + ((inf, node, -1, 1),))
    for si, seg in enumerate(poly.segments):
        if min_slope is not None and seg.slope <= min_slope:
            continue
        _process_segment(state, coeffs, T, prefix, shift, ram, seg,
                         trace, node, si)


def _process_segment(state, coeffs, T, prefix, shift, ram, seg, trace, node, si):
    m = seg.slope
    ram2 = lcm(ram, m.denominator)
    if ram2 > state.max_ram:
        raise WildnessError(
            f"ramification {ram2} exceeds deg(f)! bound {state.max_ram}")
    # scale: f_e = t^-M f(t^m y); content normalization via min valuation
    scaled = [c.shift(m * i) for i, c in enumerate(coeffs)]
    vals = [valuation(c) for c in scaled]
    M = min(v for v in vals if isinstance(v, Fraction))
    if any(isinstance(v, AtLeast) and v.bound <= M for v in vals):
        raise InsufficientPrecision("content of the scaled polynomial unknown")
    scaled = [c.shift(-M) for c in scaled]
    # residue polynomial of the segment: support [i0, i1] of the hull edge
    i0 = seg.endpoints[0][0]
    i1 = seg.endpoints[1][0]
    resid_all = [c.coeff(0) for c in scaled]
    fbar = Poly(T, resid_all[i0:i1 + 1])
    if fbar.degree() != seg.length or T.is_zero(fbar.coeff(0)):
        raise AssertionError("reduction inconsistent with segment data")
    shift2 = shift + m
    if shift2 >= state.height:
        # the packet separates beyond the target height: emit unseparated
        _emit_packet(state, T, prefix.truncate(state.height), ram2,
                     seg.length, False, trace + ((shift2, node, si, seg.length),))
        return
    parts = _residue_factor(state, T, fbar)
    for fi, (gbar, mult) in enumerate(parts):
        trace2 = trace + ((shift2, node, (si, fi), gbar.degree()),)
        if gbar.degree() == 1:
            T2 = T
            root = T.neg(gbar.coeff(0))
            scaled2 = scaled
            prefix2 = prefix
        else:
            name = fresh_name(_names_taken(state, T), state.name_hint)
            T2 = T.extend(name, gbar)
            root = T2.gen()
            scaled2 = [c.map_coeffs(T2.lift_from_sub, new_field=T2)
                       for c in scaled]
            prefix2 = prefix.map_coeffs(T2.lift_from_sub, new_field=T2)
        prefix3 = prefix2 + LaurentSeries(T2, state.param, {shift2: root})
        # translate: f2 = f_e(y + root)
        f2 = _translate(scaled2, T2, root, state)
        if mult == 1:
            # simple residue root: Hensel applies; extend to target height
            series, is_exact = _newton_extend(state, f2, T2, prefix3, shift2)
            _emit(state, T2, series, is_exact, ram2, trace2)
        else:
            _expand(state, f2, T2, prefix3, shift2, ram2, Fraction(0), trace2)


def _names_taken(state, T):
    taken = {lv.name for lv in T.levels}
    taken |= {lv.name for lv in state.constants.levels}
    return taken


def _residue_factor(state, T, fbar):
    """Factor the reduction over the residue tower.

    Function-field residue fields get the geometric treatment (factors that
    split after a constant extension trigger a constants-growth restart).
    Over a pure-constants residue field, packet mode keeps irreducible
    factors as conjugate packets, while split mode realizes every root in
    the constants tower itself.
    """
    fmonic = fbar.monic()
    parts = factor_over(T, fmonic, max(state.bound, fmonic.degree()))
    # characteristic zero: residue factors are automatically separable; an
    # inseparable factor would indicate wild ramification
    for g, _ in parts:
        if g.degree() > 1 and g.derivative().is_zero():
            raise WildnessError("inseparable residue factor")
    out = []
    for g, mult in parts:
        if g.degree() == 1:
            out.append((g, mult))
            continue
        if _base_has_variable(state):
            ok, ext = is_geometrically_irreducible(T, g, state.bound)
            if not ok:
                raise ConstantsGrown(_merge_constants(state.constants, ext))
            out.append((g, mult))
        elif state.split_constants:
            raise ConstantsGrown(_constants_split_of(state, T, g))
        else:
            out.append((g, mult))
    return out


def _base_has_variable(state) -> bool:
    return isinstance(state.residue_base, FunctionField)


def _constants_split_of(state, T, g) -> Tower:
    """Constants extension realizing a root of g (pure-constants residue).

    In split mode the residue tower never grows (every factor is split the
    moment it appears), so T always has height zero here.
    """
    if T.height != 0:
        raise DeskScaleError(
            "splitting a residue packet over a nontrivial constants-residue "
            "tower is beyond desk scale", g)
    name = fresh_name({lv.name for lv in state.constants.levels}, "c")
    gk = Poly(state.constants, list(g.coeffs))
    return state.constants.extend(name, gk)


def _merge_constants(old_k: Tower, cand_k: Tower) -> Tower:
    """cand_k extends old_k by construction (same prefix)."""
    assert cand_k.levels[:old_k.height] == old_k.levels
    return cand_k


def _translate(coeffs, T, root, state):
    """Taylor shift f(y + root); root is a tower element."""
    n = len(coeffs) - 1
    res = [LaurentSeries.zero(T, state.param) for _ in range(n + 1)]
    binom = [[0] * (n + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        binom[i][0] = 1
        for k in range(1, i + 1):
            binom[i][k] = binom[i - 1][k - 1] + (binom[i - 1][k] if k <= i - 1 else 0)
    powers = [T.one()]
    for _ in range(n):
        powers.append(T.mul(powers[-1], root))
    for k in range(n + 1):
        acc = LaurentSeries.zero(T, state.param)
        for i in range(k, n + 1):
            c = T.mul(T.coerce(binom[i][k]), powers[i - k])
            acc = acc + coeffs[i].scalar_mul(c)
        res[k] = acc
    return res


def _eval_series_poly(coeffs, y: LaurentSeries, prec) -> LaurentSeries:
    T = y.field
    acc = LaurentSeries.zero(T, y.param, prec)
    for c in reversed(coeffs):
        acc = (acc * y).truncate(prec) + c.truncate(prec)
    return acc


def _newton_extend(state, f2, T, prefix, shift2):
    """Extend a Hensel-liftable approximation to the target height.

    f2 has a simple residue root at 0; the root of the original polynomial
    is prefix + t^shift2 * (root of f2), and Newton iteration converges
    quadratically from 0.  Returns (series, is_exact); the root is exact
    when the iteration lands on an exact zero of f2.
    """
    # exact stop: f2 already has the root 0 split off exactly
    if _is_known_zero(f2[0]):
        return prefix.copy(prec=None), True
    target_rel = state.height - shift2
    if target_rel <= 0:
        return prefix.truncate(state.height), False
    prec = target_rel
    y = LaurentSeries.zero(T, state.param, prec)
    df = [c.scalar_mul(T.coerce(i)) for i, c in enumerate(f2)][1:]
    for _ in range(64):
        fy = _eval_series_poly(f2, y, prec)
        if not fy.terms:
            break
        dfy = _eval_series_poly(df, y, prec)
        corr = (fy * series_inv(dfy, prec)).truncate(prec)
        y = (y - corr).truncate(prec)
        v = valuation(fy)
        if isinstance(v, Fraction) and v >= target_rel:
            break
    else:
        raise RuntimeError("Newton iteration failed to converge")
    if all(c.is_exact() for c in f2):
        y_exact = y.copy(prec=None)
        if not _eval_series_poly_exact(f2, y_exact).terms:
            return prefix.copy(prec=None) + y_exact.shift(shift2), True
    return (prefix + y.shift(shift2)).truncate(state.height), False


def _emit(state, T, series, exact, ram, trace):
    lineage = state.new_lineage()
    copies = T.degree() // state.entry_deg
    for _ in range(max(1, copies)):
        state.out.append(RootApproximation(series, T, exact, ram, lineage,
                                           True, trace))


def _emit_packet(state, T, series, ram, length, separated, trace):
    lineage = state.new_lineage()
    for _ in range(length):
        state.out.append(RootApproximation(series, T, False, ram, lineage,
                                           separated, trace))


def _eval_series_poly_exact(coeffs, y: LaurentSeries) -> LaurentSeries:
    T = y.field
    acc = LaurentSeries.zero(T, y.param)
    for c in reversed(coeffs):
        acc = acc * y + c
    return acc


def substitute_check(coeffs, approx: RootApproximation) -> bool:
    """Substitution oracle: f(approximation) vanishes to the claimed height."""
    T = approx.tower
    field0 = coeffs[0].field
    T0 = field0 if isinstance(field0, Tower) else tower_of(field0)
    lifted = [(_lift_series(c, T0, T)) for c in coeffs]
    prec = approx.series.prec
    if prec is None:
        val = _eval_series_poly(lifted, approx.series, Fraction(10 ** 6))
        return not val.terms
    val = _eval_series_poly(lifted, approx.series.copy(prec=None), prec)
    v = valuation(val)
    if isinstance(v, AtLeast):
        return v.bound >= prec
    return v == inf or v >= prec


def _lift_series(s: LaurentSeries, T_from: Tower, T_to: Tower) -> LaurentSeries:
    if T_to is T_from or T_to == T_from:
        return s
    assert T_to.levels[:T_from.height] == T_from.levels[:T_from.height]
    def lift(e):
        out = e
        for i in range(T_from.height, T_to.height):
            out = T_to.subfield(i + 1).lift_from_sub(out)
        return out
    return s.map_coeffs(lift, new_field=T_to)


# ---------------------------------------------------------------------------
# decomposition-group orbits of a run's approximations
# ---------------------------------------------------------------------------

def cyclotomic_poly(n: int) -> Poly:
    """n-th cyclotomic polynomial over Q, via exact division by divisors."""
    phi = Poly(QQ, [Fraction(-1)] + [Fraction(0)] * (n - 1) + [Fraction(1)])
    for d in range(1, n):
        if n % d == 0:
            phi = phi.exact_div(cyclotomic_poly(d))
    return phi


def ensure_root_of_unity(constants: Tower, n: int) -> tuple[Tower, object, bool]:
    """(constants', zeta_n, grew): a primitive n-th root of unity."""
    if n == 1:
        return constants, constants.one(), False
    if n == 2:
        return constants, constants.coerce(-1), False
    phi = cyclotomic_poly(n)
    phk = Poly(constants, [constants.coerce(c) for c in phi.coeffs])
    # look for an existing root
    from .factorization import roots_in_field
    roots = roots_in_field(constants, phk, max(8, phi.degree()))
    if roots:
        roots.sort(key=constants.to_str)
        return constants, roots[0], False
    parts = factor_over(constants, phk, max(8, phi.degree()))
    g = min((p for p, _ in parts), key=lambda h: (h.degree(), h.to_str("y")))
    name = fresh_name({lv.name for lv in constants.levels}, f"zeta{n}")
    if g.degree() == 1:
        return constants, constants.neg(g.coeff(0)), False
    new_k = constants.extend(name, g)
    return new_k, new_k.gen(), True


def dvr_orbits(run: NPRun, base=None) -> list[list[int]]:
    """Partition of the approximations into decomposition-group orbits.

    Indices refer to run.approximations.  Leaves (lineages) are orbits over
    the Kummer-extended base; when the run is ramified, leaves related by a
    rotation t^(1/r) -> zeta_r t^(1/r) are merged (the decomposition group
    of the original base contains those rotations).
    """
    apps = run.approximations
    if any(not a.separated for a in apps):
        raise ValueError("insufficient height: some branches not separated")
    groups: dict[int, list[int]] = {}
    for i, a in enumerate(apps):
        groups.setdefault(a.lineage, []).append(i)
    rams = {a.lineage: a.ram for a in apps}
    N = 1
    for r in rams.values():
        N = lcm(N, r)
    lineages = sorted(groups)
    if N == 1:
        return [groups[l] for l in lineages]
    # merge lineages under the zeta_N-rotation of exponents
    constants, zeta, _ = ensure_root_of_unity(run.constants, N)
    reps = {}
    for l in lineages:
        a = apps[groups[l][0]]
        reps[l] = a
    fp_cache = {}
    def twisted_fp(l, k):
        if (l, k) in fp_cache:
            return fp_cache[(l, k)]
        a = reps[l]
        T = a.tower
        kT = constants_of(T)
        if kT.height < constants.height:
            T2 = migrate_field(T, kT, constants)
            s = a.series.map_coeffs(
                lambda e: migrate_elem(e, T, T2, kT, constants), new_field=T2)
            T = T2
        else:
            s = a.series
        zT = T.lift_from_base(_const_into_base(T, constants, zeta))
        terms = {}
        for e, c in s.terms.items():
            power = (e * N) % N
            zk = T.one()
            for _ in range(int(power) * k % N):
                zk = T.mul(zk, zT)
            terms[e] = T.mul(c, zk)
        twisted = LaurentSeries(T, s.param, terms, s.prec)
        exps = sorted(twisted.terms)
        chain = [twisted.terms[e] for e in exps]
        fp, deg = chain_fingerprint(chain, T, T.base)
        fp_cache[(l, k)] = (tuple(exps), fp)
        return fp_cache[(l, k)]
    merged = []
    used = set()
    for l in lineages:
        if l in used:
            continue
        cls = list(groups[l])
        used.add(l)
        for l2 in lineages:
            if l2 in used:
                continue
            if any(twisted_fp(l, k) == twisted_fp(l2, 0) for k in range(N)):
                cls.extend(groups[l2])
                used.add(l2)
        merged.append(sorted(cls))
    return merged


def _const_into_base(T: Tower, constants: Tower, c):
    """Constants element as an element of T's base field."""
    base = T.base
    if isinstance(base, FunctionField):
        return base.coerce_constant(c)
    return c
