"""Exact arithmetic foundation: rationals, field towers and dense polynomials.

Every computation in this package happens over one of the following exact
coefficient structures:

* ``QQ`` -- the rational numbers, elements are ``fractions.Fraction``;
* ``GF(p)`` -- prime fields, elements are ints in ``{0, ..., p-1}``;
* ``FunctionField(k, "x")`` -- rational functions over a constants field,
  elements are reduced num/den pairs of dense coefficient tuples;
* ``Tower(base, levels)`` -- a chain of simple extensions
  ``base(g_1)(g_2)...(g_r)``, each level given by a generator name and a
  monic minimal polynomial over the level below.  An element of a tower
  with top degree ``d`` is a list of ``d`` elements of the level below
  (the coefficients of ``1, g, ..., g^{d-1}``).

Elements are plain data (Fraction / int / list / FFElem); all arithmetic is
routed through the field objects so that polynomials, series and linear
algebra can be written once, generically.  ``Poly`` is a dense univariate
polynomial over any such field or ring; resultants use the subresultant
polynomial remainder sequence so that e.g. degree-12 discriminants over
Q[t] do not blow up the way a naive remainder sequence would.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple


class FFElem(NamedTuple):
    """A rational function num/den; num, den are dense coefficient tuples."""
    num: tuple
    den: tuple


def _fr(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"cannot coerce {x!r} to a rational")


class RationalField:
    """The field Q. Elements are Fraction instances."""

    is_tower = False

    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def coerce(self, x):
        return _fr(x)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / a

    def div(self, a, b):
        return a / b

    def is_zero(self, a):
        return a == 0

    def eq(self, a, b):
        return a == b

    def to_str(self, a):
        return str(a)

    def __repr__(self):
        return "QQ"

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")


QQ = RationalField()


class PrimeField:
    """GF(p) for a prime p. Elements are ints reduced mod p."""

    is_tower = False

    def __init__(self, p: int):
        self.p = p

    def zero(self):
        return 0

    def one(self):
        return 1

    def coerce(self, x):
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise ZeroDivisionError("denominator divisible by p")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return int(x) % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError("inverse of zero mod p")
        return pow(a, -1, self.p)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a):
        return a % self.p == 0

    def eq(self, a, b):
        return (a - b) % self.p == 0

    def to_str(self, a):
        return str(a % self.p)

    def __repr__(self):
        return f"GF({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))


# ---------------------------------------------------------------------------
# dense univariate polynomials over a ring/field object
# ---------------------------------------------------------------------------

class Poly:
    """Dense univariate polynomial over a field/ring object ``field``.

    ``coeffs[i]`` is the coefficient of degree i; the leading coefficient is
    nonzero unless the polynomial is zero (empty list).
    """

    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs, normalize=True):
        self.field = field
        if normalize:
            coeffs = list(coeffs)
            while coeffs and field.is_zero(coeffs[-1]):
                coeffs.pop()
        self.coeffs = coeffs

    @staticmethod
    def from_ints(field, ints):
        return Poly(field, [field.coerce(c) for c in ints])

    @staticmethod
    def zero(field):
        return Poly(field, [], normalize=False)

    @staticmethod
    def one(field):
        return Poly(field, [field.one()], normalize=False)

    @staticmethod
    def gen(field):
        return Poly(field, [field.zero(), field.one()], normalize=False)

    @staticmethod
    def const(field, c):
        return Poly(field, [field.coerce(c)])

    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lc(self):
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def coeff(self, i):
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return self.field.zero()

    def __add__(self, other):
        F = self.field
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = F.add(out[i], c)
        return Poly(F, out)

    def __sub__(self, other):
        F = self.field
        n = max(len(self.coeffs), len(other.coeffs))
        out = [F.sub(self.coeff(i), other.coeff(i)) for i in range(n)]
        return Poly(F, out)

    def __neg__(self):
        F = self.field
        return Poly(F, [F.neg(c) for c in self.coeffs], normalize=False)

    def __mul__(self, other):
        F = self.field
        if self.is_zero() or other.is_zero():
            return Poly.zero(F)
        out = [F.zero()] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if F.is_zero(a):
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = F.add(out[i + j], F.mul(a, b))
        return Poly(F, out)

    def scale(self, c):
        F = self.field
        return Poly(F, [F.mul(c, a) for a in self.coeffs])

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative polynomial power")
        result = Poly.one(self.field)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def divmod(self, other):
        """Quotient and remainder; requires invertible leading coefficient."""
        F = self.field
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return Poly.zero(F), self
        ilc = F.inv(other.lc())
        quo = [F.zero()] * (dq + 1)
        for i in range(dq, -1, -1):
            if len(rem) < len(other.coeffs) + i:
                continue
            c = F.mul(rem[len(other.coeffs) - 1 + i], ilc)
            if F.is_zero(c):
                continue
            quo[i] = c
            for j, b in enumerate(other.coeffs):
                rem[i + j] = F.sub(rem[i + j], F.mul(c, b))
        while rem and F.is_zero(rem[-1]):
            rem.pop()
        return Poly(F, quo), Poly(F, rem, normalize=False)

    def __mod__(self, other):
        return self.divmod(other)[1]

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def exact_div(self, other):
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ArithmeticError("inexact polynomial division")
        return q

    def monic(self):
        if self.is_zero():
            return self
        F = self.field
        ilc = F.inv(self.lc())
        return Poly(F, [F.mul(ilc, c) for c in self.coeffs], normalize=False)

    def derivative(self):
        F = self.field
        return Poly(F, [F.mul(F.coerce(i), c)
                        for i, c in enumerate(self.coeffs)][1:])

    def eval(self, x):
        """Horner evaluation at a field element x."""
        F = self.field
        acc = F.zero()
        for c in reversed(self.coeffs):
            acc = F.add(F.mul(acc, x), c)
        return acc

    def eval_poly(self, g: "Poly") -> "Poly":
        """Composition self(g)."""
        acc = Poly.zero(self.field)
        for c in reversed(self.coeffs):
            acc = acc * g + Poly.const(self.field, c)
        return acc

    def shift(self, c) -> "Poly":
        """self(y + c)."""
        F = self.field
        g = Poly(F, [F.coerce(c), F.one()])
        return self.eval_poly(g)

    def map_coeffs(self, fn, new_field=None):
        F = new_field if new_field is not None else self.field
        return Poly(F, [fn(c) for c in self.coeffs])

    def reverse(self):
        return Poly(self.field, list(reversed(self.coeffs)))

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        if len(self.coeffs) != len(other.coeffs):
            return False
        F = self.field
        return all(F.eq(a, b) for a, b in zip(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash((len(self.coeffs), str(self)))

    def to_str(self, var="y"):
        F = self.field
        if self.is_zero():
            return "0"
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if F.is_zero(c):
                continue
            cs = F.to_str(c)
            if i == 0:
                parts.append(cs)
            else:
                mono = var if i == 1 else f"{var}^{i}"
                if cs == "1":
                    parts.append(mono)
                elif cs == "-1":
                    parts.append(f"-{mono}")
                else:
                    if any(op in cs[1:] for op in "+-") or "/" in cs or " " in cs:
                        cs = f"({cs})"
                    parts.append(f"{cs}*{mono}")
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __repr__(self):
        return f"Poly({self.to_str()})"


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd over a field; gcd(a, 0) = monic(a).

    Over rational function fields the naive remainder sequence explodes,
    so the computation is routed through a primitive subresultant PRS over
    the underlying polynomial ring.
    """
    if isinstance(a.field, FunctionField):
        return _ff_poly_gcd(a, b)
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def _ff_poly_gcd(a: Poly, b: Poly) -> Poly:
    F = a.field
    k = F.constants
    if a.is_zero():
        return b.monic()
    if b.is_zero():
        return a.monic()

    def clear(p: Poly) -> Poly:
        den = Poly.one(k)
        for c in p.coeffs:
            dp = F.den_poly(c)
            g = _euclid_gcd(den, dp)
            den = den.exact_div(g) * dp
        coeffs = [F.num_poly(c) * den.exact_div(F.den_poly(c)) for c in p.coeffs]
        return Poly(PolyRing(k, F.var), coeffs)

    def primitive(p: Poly) -> Poly:
        cont = Poly.zero(k)
        for c in p.coeffs:
            cont = _euclid_gcd(cont, c)
        if cont.degree() <= 0:
            return p
        return p.map_coeffs(lambda c: c.exact_div(cont))

    A = primitive(clear(a))
    B = primitive(clear(b))
    if A.degree() < B.degree():
        A, B = B, A
    R = A.field
    # primitive PRS: contents are stripped every step, which keeps the
    # coefficients small without the subresultant divisor bookkeeping
    while True:
        if B.is_zero():
            result = A
            break
        if B.degree() == 0:
            result = Poly.one(R)
            break
        rem = _pseudo_rem(A, B)
        A, B = B, primitive(rem)
    result = primitive(result)
    out = Poly(F, [F.from_poly(c) for c in result.coeffs])
    return out.monic()


def _euclid_gcd(a: Poly, b: Poly) -> Poly:
    while not b.is_zero():
        a, b = b, a % b
    return a.monic() if not a.is_zero() else a


def poly_xgcd(a: Poly, b: Poly):
    """Extended gcd: returns (g, s, t) monic with s*a + t*b = g."""
    F = a.field
    r0, r1 = a, b
    s0, s1 = Poly.one(F), Poly.zero(F)
    t0, t1 = Poly.zero(F), Poly.one(F)
    while not r1.is_zero():
        q, r = r0.divmod(r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if r0.is_zero():
        return r0, s0, t0
    c = F.inv(r0.lc())
    return r0.monic(), s0.scale(c), t0.scale(c)


# ---------------------------------------------------------------------------
# polynomial rings as coefficient rings (for subresultant PRS work)
# ---------------------------------------------------------------------------

class PolyRing:
    """R[x] viewed as a coefficient ring; elements are Poly over ``ring``."""

    is_tower = False

    def __init__(self, ring, var="x"):
        self.ring = ring
        self.var = var

    def zero(self):
        return Poly.zero(self.ring)

    def one(self):
        return Poly.one(self.ring)

    def coerce(self, x):
        if isinstance(x, Poly) and x.field is self.ring:
            return x
        return Poly.const(self.ring, self.ring.coerce(x))

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def is_zero(self, a):
        return a.is_zero()

    def eq(self, a, b):
        return a == b

    def exact_div(self, a, b):
        R = self.ring
        if hasattr(R, "inv"):
            return a.exact_div(b)
        # coefficient ring is itself a ring: schoolbook division with exact
        # leading-coefficient divisions
        if b.is_zero():
            raise ZeroDivisionError
        rem = list(a.coeffs)
        dq = len(rem) - len(b.coeffs)
        if dq < 0:
            if a.is_zero():
                return Poly.zero(R)
            raise ArithmeticError("inexact division")
        quo = [R.zero()] * (dq + 1)
        for i in range(dq, -1, -1):
            if len(rem) >= len(b.coeffs) + i:
                c = R.exact_div(rem[len(b.coeffs) - 1 + i], b.lc())
                quo[i] = c
                if not R.is_zero(c):
                    for j, bc in enumerate(b.coeffs):
                        rem[i + j] = R.sub(rem[i + j], R.mul(c, bc))
        rem_p = Poly(R, rem)
        if not rem_p.is_zero():
            raise ArithmeticError("inexact division")
        return Poly(R, quo)

    def to_str(self, a):
        return a.to_str(self.var)

    def __repr__(self):
        return f"{self.ring!r}[{self.var}]"


def _pseudo_rem(A: Poly, B: Poly) -> Poly:
    """Pseudo-remainder of A by B: rem of lc(B)^(degA-degB+1) * A."""
    R = A.field
    d = A.degree() - B.degree()
    rem = list(A.coeffs)
    lb = B.lc()
    for i in range(d, -1, -1):
        top = rem[B.degree() + i]
        for j in range(B.degree() + i):
            rem[j] = R.mul(rem[j], lb)
        for j, bc in enumerate(B.coeffs[:-1]):
            rem[j + i] = R.sub(rem[j + i], R.mul(top, bc))
        rem[B.degree() + i] = R.zero()
        for j in range(B.degree() + i + 1, len(rem)):
            rem[j] = R.mul(rem[j], lb)
    return Poly(R, rem)


def resultant(A: Poly, B: Poly):
    """Resultant via the subresultant PRS.

    Works over any integral domain whose ring object provides exact_div
    (fields do, PolyRing does).  Res(A, B) = 0 iff deg gcd >= 1.
    """
    R = A.field
    if A.is_zero() or B.is_zero():
        raise ValueError("resultant of the zero polynomial")
    exact_div = getattr(R, "exact_div", None)
    if exact_div is None:
        exact_div = lambda a, b: R.div(a, b)
    sign = 1
    if A.degree() < B.degree():
        if (A.degree() * B.degree()) % 2:
            sign = -sign
        A, B = B, A
    if B.degree() == 0:
        return _ring_pow(R, B.lc(), A.degree()) if sign == 1 else \
            R.neg(_ring_pow(R, B.lc(), A.degree()))
    g = R.one()
    h = R.one()
    while True:
        delta = A.degree() - B.degree()
        if (A.degree() % 2) and (B.degree() % 2):
            sign = -sign
        rem = _pseudo_rem(A, B)
        A = B
        denom = R.mul(g, _ring_pow(R, h, delta))
        B = rem.map_coeffs(lambda c: exact_div(c, denom))
        g = A.lc()
        if delta == 0:
            pass
        elif delta == 1:
            h = g
        else:
            h = exact_div(_ring_pow(R, g, delta), _ring_pow(R, h, delta - 1))
        if B.is_zero():
            return R.zero()
        if B.degree() == 0:
            dA = A.degree()
            num = _ring_pow(R, B.lc(), dA)
            if dA == 0:
                res = num
            elif dA == 1:
                res = num
            else:
                res = exact_div(num, _ring_pow(R, h, dA - 1))
            return res if sign == 1 else R.neg(res)


def _ring_pow(R, a, n: int):
    out = R.one()
    for _ in range(n):
        out = R.mul(out, a)
    return out


def discriminant(f: Poly):
    """Disc(f) = (-1)^(d(d-1)/2) Res(f, f') / lc(f)."""
    if f.degree() < 1:
        raise ValueError("discriminant needs degree >= 1")
    R = f.field
    res = resultant(f, f.derivative())
    exact_div = getattr(R, "exact_div", None)
    if exact_div is None:
        exact_div = lambda a, b: R.div(a, b)
    d = f.degree()
    out = exact_div(res, f.lc())
    if (d * (d - 1) // 2) % 2:
        out = R.neg(out)
    return out


# ---------------------------------------------------------------------------
# rational function fields
# ---------------------------------------------------------------------------

class FunctionField:
    """k(x): rational functions over a constants field ``constants``.

    Elements are FFElem(num, den) with dense coefficient tuples over the
    constants field, den monic, gcd(num, den) = 1.
    """

    is_tower = False

    def __init__(self, constants, var="x"):
        self.constants = constants
        self.var = var

    # -- construction -------------------------------------------------
    def _make(self, num: Poly, den: Poly) -> FFElem:
        k = self.constants
        if num.is_zero():
            return FFElem((), (k.one(),))
        if den.degree() > 0:
            g = poly_gcd(num, den)
            if g.degree() > 0:
                num = num.exact_div(g)
                den = den.exact_div(g)
        c = k.inv(den.lc())
        num = num.scale(c)
        den = den.scale(c) if den.degree() > 0 else Poly.one(k)
        return FFElem(tuple(num.coeffs), tuple(den.coeffs))

    def from_poly(self, num: Poly, den: Poly | None = None) -> FFElem:
        if den is None:
            den = Poly.one(self.constants)
        return self._make(num, den)

    def gen(self) -> FFElem:
        k = self.constants
        return FFElem((k.zero(), k.one()), (k.one(),))

    def num_poly(self, a: FFElem) -> Poly:
        return Poly(self.constants, list(a.num), normalize=False)

    def den_poly(self, a: FFElem) -> Poly:
        return Poly(self.constants, list(a.den), normalize=False)

    # -- field interface ----------------------------------------------
    def zero(self):
        return FFElem((), (self.constants.one(),))

    def one(self):
        return FFElem((self.constants.one(),), (self.constants.one(),))

    def coerce(self, x):
        if isinstance(x, FFElem):
            return x
        return self.coerce_constant(x)

    def coerce_constant(self, c):
        c = self.constants.coerce(c)
        if self.constants.is_zero(c):
            return self.zero()
        return FFElem((c,), (self.constants.one(),))

    def add(self, a, b):
        k = self.constants
        if len(a.den) == 1 and len(b.den) == 1:
            # polynomial fast path (constant denominators are normalized to 1)
            na, nb = a.num, b.num
            if len(na) < len(nb):
                na, nb = nb, na
            out = list(na)
            for i, c in enumerate(nb):
                out[i] = k.add(out[i], c)
            while out and k.is_zero(out[-1]):
                out.pop()
            return FFElem(tuple(out), a.den)
        na, da = self.num_poly(a), self.den_poly(a)
        nb, db = self.num_poly(b), self.den_poly(b)
        return self._make(na * db + nb * da, da * db)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if len(a.den) == 1 and len(b.den) == 1:
            if not a.num or not b.num:
                return self.zero()
            na, nb = self.num_poly(a), self.num_poly(b)
            return FFElem(tuple((na * nb).coeffs), a.den)
        na, da = self.num_poly(a), self.den_poly(a)
        nb, db = self.num_poly(b), self.den_poly(b)
        return self._make(na * nb, da * db)

    def neg(self, a):
        k = self.constants
        return FFElem(tuple(k.neg(c) for c in a.num), a.den)

    def inv(self, a):
        if not a.num:
            raise ZeroDivisionError("inverse of zero rational function")
        return self._make(self.den_poly(a), self.num_poly(a))

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a):
        return not a.num

    def eq(self, a, b):
        return a.num == b.num and a.den == b.den

    def to_str(self, a):
        if not a.num:
            return "0"
        ns = self.num_poly(a).to_str(self.var)
        if len(a.den) == 1:
            return ns
        ds = self.den_poly(a).to_str(self.var)
        if len(a.num) > 1 or any(op in ns[1:] for op in "+-"):
            ns = f"({ns})"
        return f"{ns}/({ds})"

    def __repr__(self):
        return f"{self.constants!r}({self.var})"

    def __eq__(self, other):
        return (isinstance(other, FunctionField)
                and other.constants == self.constants and other.var == self.var)

    def __hash__(self):
        return hash(("FF", self.constants, self.var))


# ---------------------------------------------------------------------------
# towers of simple extensions
# ---------------------------------------------------------------------------

class TowerLevel(NamedTuple):
    name: str
    minpoly: Poly  # monic, over the tower below this level


class Tower:
    """base(g_1)...(g_r): successive simple extensions of a field.

    ``levels[i].minpoly`` is monic over the tower truncated below level i.
    Irreducibility of the level polynomials is the caller's responsibility
    (the factorization module certifies it when towers are built by the
    algorithms).
    """

    is_tower = True

    def __init__(self, base, levels: tuple[TowerLevel, ...] = ()):
        self.base = base
        self.levels = tuple(levels)

    # -- structure ------------------------------------------------------
    @property
    def height(self) -> int:
        return len(self.levels)

    def down(self):
        """The field one level down (a Tower, or the base when height 1)."""
        if not self.levels:
            raise ValueError("base tower has no lower level")
        if len(self.levels) == 1:
            return self.base
        return Tower(self.base, self.levels[:-1])

    def subfield(self, height: int):
        if height == 0:
            return self.base
        return Tower(self.base, self.levels[:height])

    def degree(self) -> int:
        d = 1
        for lv in self.levels:
            d *= lv.minpoly.degree()
        return d

    def extend(self, name: str, minpoly: Poly) -> "Tower":
        """One more level; minpoly must be monic over self."""
        if minpoly.degree() < 1:
            raise ValueError("minimal polynomial must have degree >= 1")
        assert self.eq(minpoly.lc(), self.one()), "minimal polynomial must be monic"
        lifted = minpoly.map_coeffs(lambda c: c, new_field=self)
        return Tower(self.base, self.levels + (TowerLevel(name, lifted),))

    def gen(self, height: int | None = None):
        """The generator of the given level (default: top) as an element."""
        if height is None:
            height = len(self.levels)
        if height == 0:
            raise ValueError("base field has no tower generator")
        d = self.levels[height - 1].minpoly.degree()
        sub = self.subfield(height - 1)
        g = [sub.zero() for _ in range(d)]
        if d == 1:
            # degree-1 level: generator equals -const term
            g[0] = sub.neg(self.levels[height - 1].minpoly.coeff(0))
        else:
            g[1] = sub.one()
        e = g
        for i in range(height, len(self.levels)):
            e = self._lift_once(e, i)
        return e

    def _lift_once(self, e, level_idx: int):
        d = self.levels[level_idx].minpoly.degree()
        sub = self.subfield(level_idx)
        out = [sub.zero() for _ in range(d)]
        out[0] = e
        return out

    def lift_from_sub(self, e):
        """Embed an element of the tower one level down."""
        if not self.levels:
            raise ValueError("base tower")
        return self._lift_once(e, len(self.levels) - 1)

    def lift_from_base(self, e):
        out = e
        for i in range(len(self.levels)):
            out = self._lift_once(out, i)
        return out

    # -- field interface --------------------------------------------------
    def _zero_at(self, height):
        if height == 0:
            return self.base.zero()
        sub = self._zero_at(height - 1)
        return [sub] + [self._zero_at(height - 1)
                        for _ in range(self.levels[height - 1].minpoly.degree() - 1)]

    def zero(self):
        if not self.levels:
            return self.base.zero()
        return self._zero_at(len(self.levels))

    def one(self):
        if not self.levels:
            return self.base.one()
        e = self.base.one()
        for i in range(len(self.levels)):
            e = self._lift_once(e, i)
        return e

    def coerce(self, x):
        if not self.levels:
            return self.base.coerce(x)
        if isinstance(x, list):
            return x
        return self.lift_from_base(self.base.coerce(x))

    def add(self, a, b):
        if not self.levels:
            return self.base.add(a, b)
        subf = self.down()
        return [subf.add(x, y) for x, y in zip(a, b)]

    def sub(self, a, b):
        if not self.levels:
            return self.base.sub(a, b)
        subf = self.down()
        return [subf.sub(x, y) for x, y in zip(a, b)]

    def mul(self, a, b):
        if not self.levels:
            return self.base.mul(a, b)
        subf = self.down()
        pa = Poly(subf, list(a))
        pb = Poly(subf, list(b))
        m = self.levels[-1].minpoly.map_coeffs(lambda c: c, new_field=subf)
        prod = (pa * pb) % m
        return self._pad(prod.coeffs)

    def _pad(self, coeffs):
        subf = self.down() if self.levels else self.base
        d = self.levels[-1].minpoly.degree()
        out = list(coeffs) + [subf.zero()] * (d - len(coeffs))
        return out

    def neg(self, a):
        if not self.levels:
            return self.base.neg(a)
        subf = self.down()
        return [subf.neg(x) for x in a]

    def inv(self, a):
        if not self.levels:
            return self.base.inv(a)
        subf = self.down()
        pa = Poly(subf, list(a))
        if pa.is_zero():
            raise ZeroDivisionError("inverse of zero in tower")
        m = self.levels[-1].minpoly.map_coeffs(lambda c: c, new_field=subf)
        g, s, _ = poly_xgcd(pa, m)
        if g.degree() != 0:
            raise ZeroDivisionError(
                "non-invertible element: level polynomial is reducible")
        return self._pad(s.coeffs)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a):
        if not self.levels:
            return self.base.is_zero(a)
        subf = self.down()
        return all(subf.is_zero(x) for x in a)

    def eq(self, a, b):
        return self.is_zero(self.sub(a, b))

    def pow(self, a, n: int):
        out = self.one()
        base = a
        while n:
            if n & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            n >>= 1
        return out

    def to_str(self, a):
        if not self.levels:
            return self.base.to_str(a)
        subf = self.down()
        name = self.levels[-1].name
        parts = []
        for i in range(len(a) - 1, -1, -1):
            if subf.is_zero(a[i]):
                continue
            cs = subf.to_str(a[i])
            if i == 0:
                parts.append(cs)
                continue
            mono = name if i == 1 else f"{name}^{i}"
            if cs == "1":
                parts.append(mono)
            elif cs == "-1":
                parts.append(f"-{mono}")
            else:
                if any(op in cs[1:] for op in "+-") or "/" in cs or "*" in cs:
                    cs = f"({cs})"
                parts.append(f"{cs}*{mono}")
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    # -- vector-space structure over the base -----------------------------
    def flatten(self, a) -> list:
        """Coordinates of ``a`` over the bottom base field."""
        if not self.levels:
            return [a]
        subf = self.down()
        out = []
        for c in a:
            out.extend(subf.flatten(c) if subf_is_tower(subf) else [c])
        return out

    def unflatten(self, vec: list):
        if not self.levels:
            assert len(vec) == 1
            return vec[0]
        subf = self.down()
        d_sub = subf.degree() if subf_is_tower(subf) else 1
        d = self.levels[-1].minpoly.degree()
        assert len(vec) == d_sub * d
        out = []
        for i in range(d):
            chunk = vec[i * d_sub:(i + 1) * d_sub]
            out.append(subf.unflatten(chunk) if subf_is_tower(subf) else chunk[0])
        return out

    def __repr__(self):
        names = ",".join(lv.name for lv in self.levels)
        return f"{self.base!r}({names})" if names else f"{self.base!r}()"

    def __eq__(self, other):
        if not isinstance(other, Tower):
            return False
        if other.base != self.base or len(other.levels) != len(self.levels):
            return False
        return all(a.name == b.name and a.minpoly == b.minpoly
                   for a, b in zip(self.levels, other.levels))

    def __hash__(self):
        return hash(("Tower", self.base, tuple(lv.name for lv in self.levels)))


def subf_is_tower(f) -> bool:
    return isinstance(f, Tower) and f.height > 0


def tower_of(field) -> Tower:
    """View any base field as a height-0 tower."""
    if isinstance(field, Tower):
        return field
    return Tower(field, ())


# ---------------------------------------------------------------------------
# linear algebra over a field
# ---------------------------------------------------------------------------

class LinearSolver:
    """Incremental Gaussian elimination over a field.

    Feed vectors one at a time; ``add_vector`` returns None while they stay
    independent and, on the first dependent vector, the coefficients c_i
    with v = sum c_i * v_i over the previously added vectors.
    """

    def __init__(self, field):
        self.field = field
        self.rows = []       # echelon rows
        self.pivots = []     # pivot column per row
        self.combos = []     # expression of each echelon row in the inputs
        self.count = 0

    def add_vector(self, v):
        F = self.field
        v = list(v)
        combo = [F.zero()] * self.count + [F.one()]
        for row, piv, rc in zip(self.rows, self.pivots, self.combos):
            if piv < len(v) and not F.is_zero(v[piv]):
                c = v[piv]
                for j in range(len(v)):
                    v[j] = F.sub(v[j], F.mul(c, row[j]))
                for j in range(len(rc)):
                    combo[j] = F.sub(combo[j] if j < len(combo) else F.zero(),
                                     F.mul(c, rc[j]))
        piv = next((j for j, x in enumerate(v) if not F.is_zero(x)), None)
        self.count += 1
        if piv is None:
            # dependent: v_new = -sum(combo_i v_i)/combo_new over earlier ones
            lead = combo[-1]
            inv = F.inv(lead)
            return [F.neg(F.mul(inv, c)) for c in combo[:-1]]
        inv = F.inv(v[piv])
        row = [F.mul(inv, x) for x in v]
        rc = [F.mul(inv, c) for c in combo]
        rc += [F.zero()] * (self.count - len(rc))
        for i in range(len(self.rows)):
            self.combos[i] = self.combos[i] + \
                [F.zero()] * (self.count - len(self.combos[i]))
        self.rows.append(row)
        self.pivots.append(piv)
        self.combos.append(rc)
        return None


def minpoly_linalg(elem, tower: Tower, base=None) -> Poly:
    """Minimal polynomial of a tower element over the bottom base field.

    Computed by a linear-dependency search on the powers of ``elem`` in the
    tower's monomial basis over the base.
    """
    base = base if base is not None else tower.base
    solver = LinearSolver(base)
    power = tower.one()
    n = 0
    while True:
        dep = solver.add_vector(tower.flatten(power))
        if dep is not None:
            coeffs = [base.neg(c) for c in dep] + [base.one()]
            return Poly(base, coeffs)
        power = tower.mul(power, elem)
        n += 1
        if n > tower.degree() + 1:
            raise RuntimeError("minpoly search exceeded tower degree")
