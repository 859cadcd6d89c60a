"""Truncated expansions with explicit precision.

Two shapes of expansion are used throughout:

* ``LaurentSeries`` -- one-parameter expansions ``sum c_e * t^e`` with
  rational exponents whose denominators divide a ramification index r, and
  an explicit precision: either exact (a finite Laurent polynomial) or
  "terms of exponent >= h unknown".  Coefficients live in any of the exact
  coefficient fields (constants towers, rational function fields, towers
  over them).

* ``DoublePointSeries`` -- two-parameter expansions ``sum c_{ij} u^i v^j``
  over the coordinate ring of an ordinary double point with u*v = t^n.
  Since t is u*v, the monomials u^i v^j for (i, j) in Z^2 are independent
  and mixed monomials are kept explicit; coefficients are constants-tower
  elements.  The precision ideal is (u^hu, v^hv).

Precision is never over-claimed: arithmetic results carry the minimum
justified precision, and "zero to its precision" is an observable state
distinct from exact zero (``valuation`` returns an ``AtLeast`` sentinel for
it).  Fixed precision is deliberate: when a downstream separation check
fails, the caller re-runs the producing algorithm at doubled height.
"""

from __future__ import annotations

from fractions import Fraction
from math import inf
from typing import NamedTuple


class AtLeast(NamedTuple):
    """Sentinel for 'valuation >= bound' (series zero to its precision)."""
    bound: Fraction

    def __str__(self):
        return f">= {self.bound}"


class RamifiedParam(NamedTuple):
    """A series parameter t^(1/r): exponents lie in (1/r)Z."""
    symbol: str
    ram: int = 1


def _fr(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class LaurentSeries:
    """Finite Laurent expansion over a coefficient field, with precision.

    ``terms`` maps rational exponents to nonzero coefficients; ``prec`` is a
    rational h (all stored exponents < h) or None for an exact value.
    """

    __slots__ = ("field", "param", "terms", "prec")

    def __init__(self, field, param: RamifiedParam, terms=None, prec=None,
                 normalize=True):
        self.field = field
        self.param = param
        terms = dict(terms or {})
        if normalize:
            clean = {}
            for e, c in terms.items():
                e = _fr(e)
                if prec is not None and e >= prec:
                    continue
                if not field.is_zero(c):
                    clean[e] = c
            terms = clean
        self.terms = terms
        self.prec = None if prec is None else _fr(prec)

    # -- constructors ---------------------------------------------------
    @staticmethod
    def const(field, param, c, prec=None):
        c = field.coerce(c)
        return LaurentSeries(field, param, {Fraction(0): c}, prec)

    @staticmethod
    def zero(field, param, prec=None):
        return LaurentSeries(field, param, {}, prec)

    @staticmethod
    def monomial(field, param, e, c=1, prec=None):
        return LaurentSeries(field, param, {_fr(e): field.coerce(c)}, prec)

    # -- structure --------------------------------------------------------
    def is_exact(self) -> bool:
        return self.prec is None

    def is_zero(self) -> bool:
        """Exact zero (no terms and no precision bound)."""
        return not self.terms and self.prec is None

    def is_zero_to_precision(self) -> bool:
        return not self.terms and self.prec is not None

    def copy(self, prec="keep"):
        return LaurentSeries(self.field, self.param, dict(self.terms),
                             self.prec if prec == "keep" else prec,
                             normalize=prec != "keep")

    def truncate(self, prec) -> "LaurentSeries":
        prec = _fr(prec)
        if self.prec is not None:
            prec = min(prec, self.prec)
        return LaurentSeries(self.field, self.param, self.terms, prec)

    def coeff(self, e):
        return self.terms.get(_fr(e), self.field.zero())

    def sorted_terms(self):
        return sorted(self.terms.items())

    # -- arithmetic ---------------------------------------------------------
    def _meet_prec(self, other):
        if self.prec is None:
            return other.prec
        if other.prec is None:
            return self.prec
        return min(self.prec, other.prec)

    def __add__(self, other):
        self._check(other)
        F = self.field
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = F.add(terms[e], c) if e in terms else c
        return LaurentSeries(F, self.param, terms, self._meet_prec(other))

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        F = self.field
        return LaurentSeries(F, self.param,
                             {e: F.neg(c) for e, c in self.terms.items()},
                             self.prec, normalize=False)

    def __mul__(self, other):
        self._check(other)
        F = self.field
        prec = None
        if self.prec is not None or other.prec is not None:
            cands = []
            if self.prec is not None:
                cands.append(self.prec + _low(other))
            if other.prec is not None:
                cands.append(other.prec + _low(self))
            prec = min(c for c in cands if c != inf) if any(
                c != inf for c in cands) else None
            if prec is None:
                # other factor is exact zero: product is exact zero
                return LaurentSeries(F, self.param, {}, None)
        terms = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = e1 + e2
                if prec is not None and e >= prec:
                    continue
                p = F.mul(c1, c2)
                terms[e] = F.add(terms[e], p) if e in terms else p
        return LaurentSeries(F, self.param, terms, prec)

    def scalar_mul(self, c) -> "LaurentSeries":
        F = self.field
        c = F.coerce(c)
        if F.is_zero(c):
            return LaurentSeries(F, self.param, {}, self.prec)
        return LaurentSeries(F, self.param,
                             {e: F.mul(c, x) for e, x in self.terms.items()},
                             self.prec)

    def shift(self, e) -> "LaurentSeries":
        """Multiply by t^e."""
        e = _fr(e)
        return LaurentSeries(self.field, self.param,
                             {k + e: c for k, c in self.terms.items()},
                             None if self.prec is None else self.prec + e,
                             normalize=False)

    def _check(self, other):
        if other.param.symbol != self.param.symbol:
            raise ValueError(
                f"mismatched parameters {self.param.symbol}/{other.param.symbol}")

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        if self.prec != other.prec:
            return False
        d = self - other
        return not d.terms

    def map_coeffs(self, fn, new_field=None) -> "LaurentSeries":
        F = new_field if new_field is not None else self.field
        return LaurentSeries(F, self.param,
                             {e: fn(c) for e, c in self.terms.items()},
                             self.prec)

    # -- rendering ----------------------------------------------------------
    def to_str(self) -> str:
        F = self.field
        sym = self.param.symbol
        parts = []
        for e, c in self.sorted_terms():
            cs = F.to_str(c)
            if any(op in cs[1:] for op in "+-") or "/" in cs or "*" in cs:
                cs = f"({cs})"
            if e == 0:
                parts.append(cs)
            else:
                mono = sym if e == 1 else f"{sym}^{_exp_str(e)}"
                parts.append(mono if cs == "1" else
                             f"-{mono}" if cs == "-1" else f"{cs}*{mono}")
        if self.prec is not None:
            parts.append(f"O({sym}^{_exp_str(self.prec)})")
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") and not p.startswith("-O") \
                else f" + {p}"
        return out

    def __repr__(self):
        return f"LaurentSeries({self.to_str()})"


def _low(s: LaurentSeries):
    return min(s.terms) if s.terms else inf


def _exp_str(e: Fraction) -> str:
    return str(e) if e.denominator == 1 else f"({e})"


def valuation(s: LaurentSeries):
    """Least exponent with nonzero coefficient.

    Exact zero gives +inf; zero-to-precision gives the AtLeast sentinel so
    that callers can never confuse the two.
    """
    if s.terms:
        return min(s.terms)
    if s.prec is None:
        return inf
    return AtLeast(s.prec)


def series_inv(s: LaurentSeries, prec) -> LaurentSeries:
    """Inverse of a series with invertible lowest term, to precision ``prec``.

    The result u satisfies u*s = 1 + O(t^prec) (relative precision prec
    above the valuation of the inverse).
    """
    prec = _fr(prec)
    v = valuation(s)
    if not isinstance(v, Fraction) and v == inf:
        raise ZeroDivisionError("inverse of zero series")
    if isinstance(v, AtLeast):
        raise ZeroDivisionError("inverse of series that is zero to precision")
    F = s.field
    lead = s.terms[v]
    ilead = F.inv(lead)
    # s = lead t^v (1 + eps); invert the unit part by geometric iteration
    unit = s.shift(-v).scalar_mul(ilead).truncate(prec)
    one = LaurentSeries.const(F, s.param, 1, prec)
    eps = (one - unit).truncate(prec)
    inv_unit = one
    power = one
    while power.terms:
        power = (power * eps).truncate(prec)
        inv_unit = inv_unit + power
    return inv_unit.scalar_mul(ilead).shift(-v)


def series_div(a: LaurentSeries, b: LaurentSeries, prec) -> LaurentSeries:
    return a * series_inv(b, prec)


# ---------------------------------------------------------------------------
# two-parameter expansions at an ordinary double point
# ---------------------------------------------------------------------------

class SeparatingIdeal(NamedTuple):
    """(u^hu, v^hv); membership of a monomial u^i v^j is i>=hu or j>=hv."""
    hu: Fraction
    hv: Fraction

    def contains_monomial(self, i, j) -> bool:
        return i >= self.hu or j >= self.hv

    def __str__(self):
        return f"(u^{self.hu}, v^{self.hv})"


class DoublePointSeries:
    """Expansion sum c_{ij} u^i v^j over constants, with uv = t^n.

    The monomial basis {u^i v^j} is a basis of the double-point coordinate
    ring, so two expansions are equal iff their term maps agree.  Mixed
    monomials stay explicit (coefficients contain no t).  ``prec`` is a
    SeparatingIdeal bound or None for exact values.
    """

    __slots__ = ("field", "relation_n", "terms", "prec", "names")

    def __init__(self, field, relation_n, terms=None, prec=None,
                 names=("u", "v"), normalize=True):
        self.field = field
        self.relation_n = _fr(relation_n)
        self.names = names
        terms = dict(terms or {})
        if normalize:
            clean = {}
            for (i, j), c in terms.items():
                key = (_fr(i), _fr(j))
                if prec is not None and prec.contains_monomial(*key):
                    continue
                if not field.is_zero(c):
                    clean[key] = c
            terms = clean
        self.terms = terms
        self.prec = prec

    @staticmethod
    def zero(field, relation_n, prec=None, names=("u", "v")):
        return DoublePointSeries(field, relation_n, {}, prec, names)

    @staticmethod
    def monomial(field, relation_n, i, j, c=1, prec=None, names=("u", "v")):
        return DoublePointSeries(field, relation_n, {(_fr(i), _fr(j)): field.coerce(c)},
                                 prec, names)

    def sorted_terms(self):
        return sorted(self.terms.items())

    def _meet_prec(self, other):
        if self.prec is None:
            return other.prec
        if other.prec is None:
            return self.prec
        return SeparatingIdeal(min(self.prec.hu, other.prec.hu),
                               min(self.prec.hv, other.prec.hv))

    def __add__(self, other):
        F = self.field
        assert other.relation_n == self.relation_n
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = F.add(terms[k], c) if k in terms else c
        return DoublePointSeries(F, self.relation_n, terms,
                                 self._meet_prec(other), self.names)

    def __neg__(self):
        F = self.field
        return DoublePointSeries(F, self.relation_n,
                                 {k: F.neg(c) for k, c in self.terms.items()},
                                 self.prec, self.names, normalize=False)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        F = self.field
        assert other.relation_n == self.relation_n
        prec = None
        if self.prec is not None or other.prec is not None:
            us, vs = _dp_low(self)
            uo, vo = _dp_low(other)
            cands_u, cands_v = [], []
            if self.prec is not None:
                cands_u.append(self.prec.hu + uo)
                cands_v.append(self.prec.hv + vo)
            if other.prec is not None:
                cands_u.append(other.prec.hu + us)
                cands_v.append(other.prec.hv + vs)
            prec = SeparatingIdeal(min(cands_u), min(cands_v))
        terms = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                k = (i1 + i2, j1 + j2)
                if prec is not None and prec.contains_monomial(*k):
                    continue
                p = F.mul(c1, c2)
                terms[k] = F.add(terms[k], p) if k in terms else p
        return DoublePointSeries(F, self.relation_n, terms, prec, self.names)

    def scalar_mul(self, c) -> "DoublePointSeries":
        F = self.field
        c = F.coerce(c)
        return DoublePointSeries(F, self.relation_n,
                                 {k: F.mul(c, x) for k, x in self.terms.items()},
                                 self.prec, self.names)

    def reduce_mod(self, ideal: SeparatingIdeal) -> "DoublePointSeries":
        if self.prec is not None and (self.prec.hu < ideal.hu or self.prec.hv < ideal.hv):
            raise ValueError("precision lower than the requested ideal")
        return DoublePointSeries(self.field, self.relation_n, self.terms,
                                 ideal, self.names)

    def eq_mod(self, other, ideal: SeparatingIdeal) -> bool:
        d = self - other
        return all(ideal.contains_monomial(i, j) for (i, j) in d.terms)

    def map_coeffs(self, fn, new_field=None) -> "DoublePointSeries":
        F = new_field if new_field is not None else self.field
        return DoublePointSeries(F, self.relation_n,
                                 {k: fn(c) for k, c in self.terms.items()},
                                 self.prec, self.names)

    def to_str(self) -> str:
        F = self.field
        un, vn = self.names
        parts = []
        for (i, j), c in self.sorted_terms():
            cs = F.to_str(c)
            if any(op in cs[1:] for op in "+-") or "/" in cs or "*" in cs:
                cs = f"({cs})"
            monos = []
            if i != 0:
                monos.append(un if i == 1 else f"{un}^{_exp_str(i)}")
            if j != 0:
                monos.append(vn if j == 1 else f"{vn}^{_exp_str(j)}")
            mono = "*".join(monos)
            if not mono:
                parts.append(cs)
            elif cs == "1":
                parts.append(mono)
            elif cs == "-1":
                parts.append(f"-{mono}")
            else:
                parts.append(f"{cs}*{mono}")
        if self.prec is not None:
            parts.append(f"O({un}^{_exp_str(self.prec.hu)}, {vn}^{_exp_str(self.prec.hv)})")
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") and not p.startswith("-O") \
                else f" + {p}"
        return out

    def __repr__(self):
        return f"DoublePointSeries({self.to_str()})"


def _dp_low(s: DoublePointSeries):
    if not s.terms:
        return (Fraction(0), Fraction(0))
    return (min(i for i, _ in s.terms), min(j for _, j in s.terms))


def separate(approximations: list[DoublePointSeries], ideal: SeparatingIdeal) -> bool:
    """True iff all pairwise differences are nonzero modulo the ideal."""
    for s in approximations:
        if s.prec is not None and (s.prec.hu < ideal.hu or s.prec.hv < ideal.hv):
            raise ValueError("approximation precision lower than the ideal")
    n = len(approximations)
    for a in range(n):
        for b in range(a + 1, n):
            if approximations[a].eq_mod(approximations[b], ideal):
                return False
    return True


def separate_laurent(approximations: list[LaurentSeries]) -> bool:
    """True iff the one-parameter approximations are pairwise distinct to
    their common precision."""
    n = len(approximations)
    for a in range(n):
        for b in range(a + 1, n):
            if not (approximations[a] - approximations[b]).terms:
                return False
    return True
