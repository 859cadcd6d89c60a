"""Univariate factorization over the coefficient fields used in this package.

The auxiliary engine behind every residue-field computation.  Supported
coefficient fields:

* GF(p)             -- distinct-degree + equal-degree splitting;
* Q                 -- Zassenhaus: reduction mod p, Hensel lifting to a
                       Mignotte-style bound, exhaustive recombination;
* Q(x)              -- bivariate: specialize at a good rational point,
                       factor over Q, Hensel-lift in Q[[x - x0]] and
                       recombine with exact trial division;
* towers            -- Trager norm reduction: a shifted norm maps the
                       problem one level down, factors are recovered with
                       gcds over the tower.

Everything is deterministic (fixed element enumeration replaces random
choices in equal-degree splitting).  Degrees beyond the configured bound
raise DeskScaleError carrying the offending polynomial so callers can
surface "input beyond desk scale" instead of hanging.
"""

from __future__ import annotations

from fractions import Fraction

from .exactnum import (
    QQ, FFElem, FunctionField, Poly, PolyRing, PrimeField, Tower,
    minpoly_linalg, poly_gcd, resultant, tower_of,
)

DEFAULT_DEGREE_BOUND = 8

_PRIMES = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61,
           67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113]


class DeskScaleError(Exception):
    """Input exceeds the configured desk-scale bound; carries the culprit."""

    def __init__(self, message, poly=None):
        super().__init__(message)
        self.poly = poly


# ---------------------------------------------------------------------------
# squarefree decomposition (Yun, characteristic zero)
# ---------------------------------------------------------------------------

def squarefree_factor(f: Poly) -> list[tuple[Poly, int]]:
    """Yun decomposition over a characteristic-zero field.

    Returns monic parts with multiplicities; the product of parts^mult
    times lc(f) reconstructs f.
    """
    if f.is_zero():
        raise ValueError("squarefree decomposition of zero")
    f = f.monic()
    if f.degree() == 0:
        return []
    out = []
    df = f.derivative()
    a = poly_gcd(f, df)
    b = f.exact_div(a)
    c = df.exact_div(a)
    d = c - b.derivative()
    i = 1
    while b.degree() > 0:
        a = poly_gcd(b, d)
        if a.degree() > 0:
            out.append((a.monic(), i))
        b = b.exact_div(a)
        c = d.exact_div(a)
        d = c - b.derivative()
        i += 1
    return out


def squarefree_part(f: Poly) -> Poly:
    return f.monic().exact_div(poly_gcd(f, f.derivative())).monic()


# ---------------------------------------------------------------------------
# GF(p)
# ---------------------------------------------------------------------------

def _powmod(base: Poly, e: int, mod: Poly) -> Poly:
    out = Poly.one(base.field)
    base = base % mod
    while e:
        if e & 1:
            out = (out * base) % mod
        base = (base * base) % mod
        e >>= 1
    return out


def factor_fp(f: Poly) -> list[tuple[Poly, int]]:
    """Irreducible factorization over GF(p), deterministic."""
    F = f.field
    assert isinstance(F, PrimeField)
    p = F.p
    out = {}
    f = f.monic()
    # squarefree via gcd with derivative (p > deg in our use, but handle x^p)
    while f.degree() > 0:
        df = f.derivative()
        if df.is_zero():
            # f = g(x^p) = g(x)^p in GF(p)
            coeffs = [f.coeffs[i] for i in range(0, len(f.coeffs), p)]
            for g, m in factor_fp(Poly(F, coeffs)):
                out[_key(g)] = (g, out.get(_key(g), (g, 0))[1] + m * p)
            return sorted(out.values(), key=lambda t: (t[0].degree(), str(t[0])))
        sf = f.exact_div(poly_gcd(f, df))
        for g in _ddf_edf(sf):
            mult = 0
            while (f % g).is_zero():
                f = f.exact_div(g)
                mult += 1
            out[_key(g)] = (g, out.get(_key(g), (g, 0))[1] + mult)
    return sorted(out.values(), key=lambda t: (t[0].degree(), str(t[0])))


def _key(g: Poly) -> str:
    return g.to_str("x")


def _ddf_edf(f: Poly) -> list[Poly]:
    """Factor a squarefree monic polynomial over GF(p)."""
    F = f.field
    p = F.p
    x = Poly.gen(F)
    out = []
    h = x
    d = 0
    rest = f
    while rest.degree() > 0:
        d += 1
        if 2 * d > rest.degree():
            out.append(rest)
            break
        h = _powmod(h, p, rest)
        g = poly_gcd(h - x, rest)
        if g.degree() > 0:
            out.extend(_edf(g, d))
            rest = rest.exact_div(g)
            h = h % rest
        if rest.degree() == 0:
            break
    return out


def _edf(f: Poly, d: int) -> list[Poly]:
    """Equal-degree splitting, deterministic element enumeration (p odd)."""
    F = f.field
    p = F.p
    if f.degree() == d:
        return [f.monic()]
    e = (p ** d - 1) // 2
    counter = 0
    while True:
        counter += 1
        h = _enum_poly(F, counter, 2 * d - 1)
        g = poly_gcd(_powmod(h, e, f) - Poly.one(F), f)
        if 0 < g.degree() < f.degree():
            return _edf(g, d) + _edf(f.exact_div(g), d)
        if counter > 4 * p ** min(2 * d, 6) + 64:
            raise RuntimeError("equal-degree splitting failed to separate")


def _enum_poly(F: PrimeField, n: int, maxdeg: int) -> Poly:
    """n-th polynomial over GF(p) in a fixed enumeration (keeps runs seed-free)."""
    p = F.p
    coeffs = [1]  # never zero
    k = n
    while k:
        coeffs.append(k % p)
        k //= p
        if len(coeffs) > maxdeg + 1:
            break
    coeffs = coeffs[:maxdeg + 1]
    return Poly(F, list(reversed(coeffs)))


# ---------------------------------------------------------------------------
# Q (Zassenhaus)
# ---------------------------------------------------------------------------

def _to_int_poly(f: Poly) -> tuple[list[int], Fraction]:
    """Primitive integer coefficients and the rational scale factor."""
    from math import gcd, lcm
    dens = [c.denominator for c in f.coeffs]
    L = 1
    for d in dens:
        L = lcm(L, d)
    ints = [int(c * L) for c in f.coeffs]
    g = 0
    for c in ints:
        g = gcd(g, abs(c))
    g = g or 1
    ints = [c // g for c in ints]
    return ints, Fraction(g, L)


def factor_q(f: Poly) -> list[tuple[Poly, int]]:
    """Monic irreducible factorization over Q with multiplicities."""
    assert f.field == QQ
    out = []
    for part, mult in squarefree_factor(f):
        for g in _factor_q_squarefree(part):
            out.append((g, mult))
    out.sort(key=lambda t: (t[0].degree(), t[0].to_str("y")))
    return out


def _factor_q_squarefree(f: Poly) -> list[Poly]:
    """Factor a monic squarefree polynomial over Q (Zassenhaus)."""
    n = f.degree()
    if n <= 1:
        return [f] if n == 1 else []
    ints, _ = _to_int_poly(f)
    lc = ints[-1]
    # prime with good reduction
    for p in _PRIMES:
        if lc % p == 0:
            continue
        Fp = PrimeField(p)
        fp = Poly(Fp, [c % p for c in ints])
        if fp.degree() != n:
            continue
        if poly_gcd(fp, fp.derivative()).degree() == 0:
            break
    else:
        raise RuntimeError("no good prime found (desk-scale prime list)")
    modular = [g for g, _ in factor_fp(fp)]
    if len(modular) == 1:
        return [f]
    # Hensel lift to p^k above twice the factor-coefficient bound
    norm2 = sum(Fraction(c) ** 2 for c in ints)
    bound = 2 ** n * _isqrt_ceil(norm2) * abs(lc)
    pk = p
    k = 1
    while pk <= 2 * bound:
        pk *= p
        k += 1
    lifted = _hensel_tree(ints, modular, p, k)
    return _recombine(f, ints, lifted, p ** k)


def _isqrt_ceil(x: Fraction) -> int:
    from math import isqrt
    n = int(x) + 1
    return isqrt(n) + 1


def _hensel_tree(ints: list[int], modular: list[Poly], p: int, k: int) -> list[list[int]]:
    """Lift the mod-p factorization of ints (up to lc) to mod p^k."""
    pk = p ** k

    def center(poly_ints, m):
        return [((c + m // 2) % m) - m // 2 for c in poly_ints]

    def mul(a, b, m):
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] = (out[i + j] + x * y) % m
        return out

    def sub(a, b, m):
        n = max(len(a), len(b))
        return [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % m
                for i in range(n)]

    def trim(a):
        a = list(a)
        while a and a[-1] == 0:
            a.pop()
        return a

    def divmod_monic(a, b, m):
        # b monic mod m
        a = list(a)
        q = [0] * max(0, len(a) - len(b) + 1)
        for i in range(len(a) - len(b), -1, -1):
            c = a[i + len(b) - 1] % m
            if c:
                q[i] = c
                for j, bc in enumerate(b):
                    a[i + j] = (a[i + j] - c * bc) % m
        return q, trim([c % m for c in a[:len(b) - 1]])

    # linear lifting factor-by-factor through the full product relation;
    # desk-scale degrees make the O(k) iteration count irrelevant.
    Fp = PrimeField(p)
    lc = ints[-1]
    lc_inv = pow(lc, -1, p ** k)
    target = [c * lc_inv % (p ** k) for c in ints]  # monic target mod p^k
    facs = [[c % p for c in g.coeffs] for g in modular]

    # Bezout cofactors mod p for the tree: use pairwise via xgcd over GF(p)
    def fp_poly(c):
        return Poly(Fp, [x % p for x in c])

    m = p
    while m < p ** k:
        m2 = min(m * p, p ** k)
        # error term
        prod = [1]
        for fac in facs:
            prod = mul(prod, fac, m2)
        e = sub(target, prod, m2)
        if any(c % m for c in e):
            raise RuntimeError("Hensel invariant broken")
        # solve sum_i (delta_i * prod_{j != i} f_j) = e with deg delta_i < deg f_i:
        # delta_i = m * ((e/m) * inv(prod_{j != i})) mod (f_i, p)
        e_over = [c // m for c in e]
        new_facs = []
        for i, fac in enumerate(facs):
            others = [1]
            for j, fj in enumerate(facs):
                if j != i:
                    others = mul(others, fj, m2)
            # inverse of others mod (fac, p)
            g, s, t = _fp_xgcd(fp_poly(others), fp_poly(fac), Fp)
            assert g.degree() == 0
            inv_norm = Fp.inv(g.coeffs[0])
            s = s.scale(inv_norm)
            delta_p = (fp_poly(e_over) * s) % fp_poly(fac)
            delta = [c * m % m2 for c in delta_p.coeffs]
            new_fac = [ (a + (delta[idx] if idx < len(delta) else 0)) % m2
                        for idx, a in enumerate(fac)]
            new_facs.append(new_fac)
        facs = new_facs
        m = m2
    return facs


def _fp_xgcd(a: Poly, b: Poly, Fp) -> tuple[Poly, Poly, Poly]:
    r0, r1 = a, b
    s0, s1 = Poly.one(Fp), Poly.zero(Fp)
    t0, t1 = Poly.zero(Fp), Poly.one(Fp)
    while not r1.is_zero():
        q, r = r0.divmod(r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return r0, s0, t0


def _recombine(f: Poly, ints: list[int], lifted: list[list[int]], pk: int) -> list[Poly]:
    """Exhaustive subset recombination of lifted modular factors."""
    from itertools import combinations

    def center(c):
        c = c % pk
        return c - pk if c > pk // 2 else c

    remaining = list(range(len(lifted)))
    current = list(ints)
    out = []
    r = 1
    while 2 * r <= len(remaining):
        found = True
        while found:
            found = False
            for subset in combinations(remaining, r):
                prod = [1]
                for i in subset:
                    prod_new = [0] * (len(prod) + len(lifted[i]) - 1)
                    for a, x in enumerate(prod):
                        for b, y in enumerate(lifted[i]):
                            prod_new[a + b] = (prod_new[a + b] + x * y) % pk
                    prod = prod_new
                lc = current[-1]
                cand = [center(c * lc) for c in prod]
                from math import gcd
                g = 0
                for c in cand:
                    g = gcd(g, abs(c))
                g = g or 1
                cand = [c // g for c in cand]
                cand_q = Poly(QQ, [Fraction(c) for c in cand])
                cur_q = Poly(QQ, [Fraction(c) for c in current])
                q, rem = cur_q.divmod(cand_q)
                if rem.is_zero() and all(c.denominator == 1 for c in q.coeffs):
                    out.append(cand_q.monic())
                    current = [int(c) for c in q.coeffs]
                    for i in subset:
                        remaining.remove(i)
                    found = True
                    break
        r += 1
    if remaining:
        out.append(Poly(QQ, [Fraction(c) for c in current]).monic())
    out.sort(key=lambda g: (g.degree(), g.to_str("y")))
    return out


# ---------------------------------------------------------------------------
# Q(x): bivariate factorization by specialization + series Hensel lifting
# ---------------------------------------------------------------------------

class _SeriesRing:
    """Q[[s]] truncated at precision P; field-like for unit inversion."""

    is_tower = False

    def __init__(self, prec: int):
        self.prec = prec

    def zero(self):
        return (0,) * 0

    def one(self):
        return (Fraction(1),)

    def coerce(self, x):
        if isinstance(x, tuple):
            return x
        x = Fraction(x)
        return (x,) if x else ()

    def _trim(self, t):
        t = list(t[:self.prec])
        while t and t[-1] == 0:
            t.pop()
        return tuple(t)

    def add(self, a, b):
        n = max(len(a), len(b))
        return self._trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                           for i in range(n)])

    def sub(self, a, b):
        n = max(len(a), len(b))
        return self._trim([(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)
                           for i in range(n)])

    def mul(self, a, b):
        if not a or not b:
            return ()
        out = [Fraction(0)] * min(self.prec, len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if i >= self.prec:
                break
            if x:
                for j, y in enumerate(b):
                    if i + j >= self.prec:
                        break
                    out[i + j] += x * y
        return self._trim(out)

    def neg(self, a):
        return tuple(-c for c in a)

    def inv(self, a):
        if not a or a[0] == 0:
            raise ZeroDivisionError("series not a unit")
        out = [1 / a[0]]
        for n in range(1, self.prec):
            acc = Fraction(0)
            for i in range(1, min(n, len(a) - 1) + 1):
                acc += a[i] * out[n - i]
            out.append(-acc / a[0])
        return self._trim(out)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a):
        return all(c == 0 for c in a)

    def eq(self, a, b):
        return self.is_zero(self.sub(a, b))

    def to_str(self, a):
        return str(list(a))


def _ff_to_intcoeffs(f: Poly) -> list[Poly]:
    """Coefficients of a Q(x)[y] polynomial as Q[x] polys (denominators cleared)."""
    F = f.field
    k = F.constants
    den = Poly.one(k)
    for c in f.coeffs:
        den = den.exact_div(poly_gcd(den, F.den_poly(c))) * F.den_poly(c)
    out = []
    for c in f.coeffs:
        out.append(F.num_poly(c) * den.exact_div(F.den_poly(c)))
    return out


def factor_function_field(f: Poly, bound: int = DEFAULT_DEGREE_BOUND) -> list[tuple[Poly, int]]:
    """Monic irreducible factorization over Q(x)."""
    F = f.field
    assert isinstance(F, FunctionField) and F.constants == QQ
    if f.degree() > bound:
        raise DeskScaleError(f"degree {f.degree()} exceeds bound {bound}", f)
    out = []
    for part, mult in squarefree_factor(f):
        for g in _factor_ff_squarefree(part):
            out.append((g, mult))
    out.sort(key=lambda t: (t[0].degree(), t[0].to_str("y")))
    return out


def _factor_ff_squarefree(f: Poly) -> list[Poly]:
    F = f.field
    d = f.degree()
    if d <= 1:
        return [f] if d == 1 else []
    # monicize: g(y) = lc^(d-1) f(y/lc) has Q[x] coefficients, monic
    coeffs_int = _ff_to_intcoeffs(f)          # Q[x] coefficients, same roots
    lc = coeffs_int[-1]
    g_coeffs = [c * lc ** (d - 1 - i) for i, c in enumerate(coeffs_int[:-1])]
    g_coeffs.append(Poly.one(QQ))
    # g in Q[x][y], monic of degree d
    maxdegx = max(c.degree() for c in g_coeffs)
    # good specialization point
    for x0num in range(0, 200):
        x0 = Fraction(x0num if x0num % 2 == 0 else -(x0num + 1) // 2, 1) / 1
        x0 = Fraction((-1) ** x0num * ((x0num + 1) // 2))
        u = Poly(QQ, [c.eval(x0) for c in g_coeffs])
        if u.degree() == d and poly_gcd(u, u.derivative()).degree() == 0:
            break
    else:
        raise RuntimeError("no good specialization point found")
    mod_factors = _factor_q_squarefree(u.monic())
    if len(mod_factors) == 1:
        return [f.monic()]
    # Hensel lift in Q[[s]], s = x - x0.  For a monic g in Q[x][y] the total
    # pole order of the roots at 1/x is bounded by deg_x(g), so every monic
    # factor has coefficient degrees <= deg_x(g).
    prec = maxdegx + 2
    S = _SeriesRing(prec)

    def poly_to_series(c: Poly) -> tuple:
        # expand c(x0 + s)
        sh = c.shift(x0)   # c(s + x0)
        return S.coerce(tuple(sh.coeffs)) if sh.coeffs else ()

    g_series = Poly(S, [poly_to_series(c) for c in g_coeffs])
    lifted = _hensel_series(g_series, mod_factors, S)
    # recombination
    from itertools import combinations
    remaining = list(range(len(lifted)))
    current = f.monic()
    out = []
    r = 1
    while 2 * r <= len(remaining):
        found = True
        while found:
            found = False
            for subset in combinations(remaining, r):
                cand = Poly.one(S)
                for i in subset:
                    cand = cand * lifted[i]
                cand_ff = _series_poly_to_ff(cand, x0, f.field)
                q, rem = current.divmod(cand_ff)
                if rem.is_zero():
                    out.append(cand_ff.monic())
                    current = q.monic()
                    for i in subset:
                        remaining.remove(i)
                    found = True
                    break
        r += 1
    if current.degree() > 0:
        out.append(current.monic())
    return out


def _series_poly_to_ff(g: Poly, x0: Fraction, F: FunctionField) -> Poly:
    """Convert Q[[s]][y] (exact polynomial coefficients) back to Q(x)[y]."""
    k = F.constants
    out = []
    for c in g.coeffs:
        # c is a series tuple = polynomial in s = x - x0
        p = Poly(QQ, list(c))
        p = p.shift(-x0)  # substitute s = x - x0 : p(x - x0)
        out.append(F.from_poly(p))
    return Poly(F, out)


def _hensel_series(g: Poly, mod_factors: list[Poly], S: _SeriesRing) -> list[Poly]:
    """Lift the monic coprime factorization of g mod s to precision S.prec.

    Recursive two-factor quadratic Hensel steps with cofactor lifting (no
    modular inversions beyond the initial Bezout identity over Q).
    """
    if len(mod_factors) == 1:
        return [g]
    half = len(mod_factors) // 2
    left = Poly.one(QQ)
    for m in mod_factors[:half]:
        left = left * m
    right = Poly.one(QQ)
    for m in mod_factors[half:]:
        right = right * m
    from .exactnum import poly_xgcd
    gg, s0, t0 = poly_xgcd(left, right)
    assert gg.degree() == 0

    def q2s(p: Poly) -> Poly:
        return Poly(S, [S.coerce((cc,)) if cc else () for cc in p.coeffs])

    G, H = q2s(left), q2s(right)
    Scof, Tcof = q2s(s0), q2s(t0)
    one = Poly.one(S)
    prec = 1
    while prec < S.prec:
        prec = min(2 * prec, S.prec)
        e = g - G * H
        if not all(S.is_zero(cc) for cc in e.coeffs):
            q, r = (Scof * e).divmod(H)
            G = G + Tcof * e + q * G
            H = H + r
        b = Scof * G + Tcof * H - one
        if not all(S.is_zero(cc) for cc in b.coeffs):
            cq, cr = (Scof * b).divmod(H)
            Scof = Scof - cr
            Tcof = Tcof - Tcof * b - cq * G
    lifted_left = _hensel_series(G, mod_factors[:half], S)
    lifted_right = _hensel_series(H, mod_factors[half:], S)
    return lifted_left + lifted_right


# ---------------------------------------------------------------------------
# towers: Trager norm reduction + dispatch
# ---------------------------------------------------------------------------

def factor_over(field, f: Poly, bound: int = DEFAULT_DEGREE_BOUND) -> list[tuple[Poly, int]]:
    """Monic irreducible factorization of f over ``field`` with multiplicities.

    Dispatches on the coefficient structure; the reconstruction identity
    prod(parts^mult) * lc = f is asserted on every call.
    """
    if f.is_zero():
        raise ValueError("factor of zero polynomial")
    if f.degree() > bound:
        raise DeskScaleError(
            f"degree {f.degree()} exceeds factorization bound {bound}", f)
    result = _factor_dispatch(field, f, bound)
    _assert_reconstruction(field, f, result)
    return result


def _assert_reconstruction(field, f, parts):
    prod = Poly.const(field, f.lc())
    for g, m in parts:
        prod = prod * g ** m
    if not (prod == f):
        raise AssertionError("factorization failed reconstruction check")


def _factor_dispatch(field, f, bound):
    if isinstance(field, PrimeField):
        return factor_fp(f)
    if field == QQ:
        return factor_q(f)
    if isinstance(field, FunctionField):
        k = field.constants
        if k == QQ or (isinstance(k, Tower) and k.height == 0 and k.base == QQ):
            plain = FunctionField(QQ, field.var)
            fq = f.map_coeffs(lambda c: c, new_field=plain)
            parts = factor_function_field(fq, bound)
            return [(g.map_coeffs(lambda c: c, new_field=field), m) for g, m in parts]
        # constants are a tower: re-express as a tower over Q(x)
        flat, to_flat, from_flat = flatten_function_field(field)
        f_flat = f.map_coeffs(to_flat, new_field=flat)
        parts = _factor_tower(flat, f_flat, bound)
        return [(g.map_coeffs(from_flat, new_field=field), m) for g, m in parts]
    if isinstance(field, Tower):
        if field.height == 0:
            return _factor_dispatch(field.base, f.map_coeffs(lambda c: c, new_field=field.base), bound)
        return _factor_tower(field, f, bound)
    raise TypeError(f"no factorization over {field!r}")


def _factor_tower(T: Tower, f: Poly, bound: int) -> list[tuple[Poly, int]]:
    out = []
    for part, mult in squarefree_factor(f):
        for g in _factor_tower_squarefree(T, part, bound):
            out.append((g, mult))
    out.sort(key=lambda t: (t[0].degree(), t[0].to_str("y")))
    return out


def _factor_tower_squarefree(T: Tower, f: Poly, bound: int) -> list[Poly]:
    """Trager: norm down one level, factor there, pull back with gcds."""
    if f.degree() <= 1:
        return [f.monic()] if f.degree() == 1 else []
    S = T.down()
    theta = T.gen()
    m_sub = _minpoly_over_sub(T)
    d_norm = f.degree() * m_sub.degree()
    if d_norm > 96:
        raise DeskScaleError(
            f"Trager norm degree {d_norm} exceeds desk scale", f)
    for shift in range(0, 40):
        s_elem = T.coerce(shift)
        # f_s(y) = f(y - shift*theta)
        shift_poly = Poly(T, [T.neg(T.mul(s_elem, theta)), T.one()])
        f_s = f.monic().eval_poly(shift_poly)
        N = _norm_poly(T, S, m_sub, f_s)
        if poly_gcd(N, N.derivative()).degree() == 0:
            break
    else:
        raise RuntimeError("no squarefree Trager shift found")
    out = []
    for Nk, _ in factor_over(S, N, max(bound, d_norm)):
        # gcd(f, Nk(y + shift*theta)) over T
        Nk_T = Nk.map_coeffs(T.lift_from_sub, new_field=T)
        back = Poly(T, [T.mul(s_elem, theta), T.one()])
        g = poly_gcd(f.monic(), Nk_T.eval_poly(back))
        if g.degree() > 0:
            out.append(g.monic())
    out.sort(key=lambda g: (g.degree(), g.to_str("y")))
    return out


def _minpoly_over_sub(T: Tower) -> Poly:
    """Top level minimal polynomial as a Poly over the field one level down."""
    S = T.down()
    lv = T.levels[-1]
    # stored minpoly has coefficients already living over the sub-tower
    return Poly(S, [c for c in lv.minpoly.coeffs])


def _norm_poly(T: Tower, S, m_sub: Poly, f: Poly) -> Poly:
    """Norm of f from T[y] to S[y]: Res_theta(m(theta), f(y) as poly in theta)."""
    B = PolyRing(S, "y")
    d_theta = m_sub.degree()
    # reorganize f: coefficients are T-elements = lists of S-elements
    rows = []
    for j in range(d_theta):
        rows.append([])
    for i, c in enumerate(f.coeffs):
        cl = c if isinstance(c, list) else [c]
        for j in range(d_theta):
            val = cl[j] if j < len(cl) else S.zero()
            rows[j].append(val)
    F_theta = Poly(B, [Poly(S, row) for row in rows])
    M_theta = Poly(B, [Poly.const(S, c) for c in m_sub.coeffs])
    return resultant(M_theta, F_theta)


def flatten_function_field(field: FunctionField):
    """Present k0'(x) (constants a tower) as a tower over Q(x).

    Returns (tower, to_flat, from_flat) element converters.
    """
    k = field.constants
    assert isinstance(k, Tower)
    base_ff = FunctionField(QQ, field.var)
    flat = tower_of(base_ff)
    # add constants levels with coefficients coerced into the flat tower
    for i, lv in enumerate(k.levels):
        mp = lv.minpoly  # over k.subfield(i)
        sub_k = k.subfield(i)
        mp_flat = mp.map_coeffs(lambda c: _const_to_flat(sub_k, c, flat), new_field=flat)
        flat = flat.extend(lv.name, mp_flat)
    def to_flat(e: FFElem):
        num = [_const_to_flat(k, c, flat) for c in e.num]
        den = [_const_to_flat(k, c, flat) for c in e.den]
        # element = num(x)/den(x) with constants embedded: build via arithmetic
        xg = flat.lift_from_base(base_ff.gen()) if flat.height else base_ff.gen()
        out = flat.zero()
        xp = flat.one()
        for c in num:
            out = flat.add(out, flat.mul(c, xp))
            xp = flat.mul(xp, xg)
        den_e = flat.zero()
        xp = flat.one()
        for c in den:
            den_e = flat.add(den_e, flat.mul(c, xp))
            xp = flat.mul(xp, xg)
        return flat.div(out, den_e)
    def from_flat(e):
        return _flat_to_ff(k, field, flat, e)
    return flat, to_flat, from_flat


def _const_to_flat(k, c, flat: Tower):
    """Constants-tower element -> element of the flat tower over Q(x).

    ``flat`` must replicate the level structure of ``k``; only the leaves
    change from rationals to Q(x)-constants.
    """
    base_ff: FunctionField = flat.base

    def convert(kf, e):
        if not (isinstance(kf, Tower) and kf.height):
            return base_ff.coerce_constant(e)
        return [convert(kf.down(), x) for x in e]

    return convert(k, c)


def _flat_to_ff(k: Tower, field: FunctionField, flat: Tower, e) -> FFElem:
    """Flat-tower element (over Q(x)) -> FFElem over the tower constants.

    Only valid when denominators in x are trivial per nested coefficient;
    general elements are handled via common-denominator extraction.
    """
    base_ff: FunctionField = flat.base
    # collect nested FFElem leaves, find common denominator
    leaves = []
    def walk(kf, x):
        if not isinstance(kf, Tower) or kf.height == 0:
            leaves.append(x)
            return
        for c in x:
            walk(kf.down(), c)
    walk(k, e) if isinstance(k, Tower) and k.height else leaves.append(e)
    den = Poly.one(QQ)
    for leaf in leaves:
        dp = base_ff.den_poly(leaf)
        den = den.exact_div(poly_gcd(den, dp)) * dp
    # multiply e by den(x), convert numerator coefficients, divide back
    den_elem = flat.coerce(base_ff.from_poly(den)) if flat.height == 0 else \
        flat.lift_from_base(base_ff.from_poly(den))
    e_num = flat.mul(e, den_elem) if flat.height else base_ff.mul(e, den_elem)
    # now all leaves are polynomials in x; expand into coefficients over k
    deg = den.degree()
    def leaf_poly(x: FFElem) -> Poly:
        assert len(x.den) == 1
        return Poly(QQ, list(x.num))
    maxd = 0
    leaves2 = []
    def walk2(kf, x):
        nonlocal maxd
        if not isinstance(kf, Tower) or kf.height == 0:
            p = leaf_poly(x)
            maxd = max(maxd, p.degree())
            leaves2.append(p)
            return
        for c in x:
            walk2(kf.down(), c)
    walk2(k, e_num) if isinstance(k, Tower) and k.height else walk2(tower_of(QQ), e_num)
    # numerator coefficients over k for each x-power
    num_coeffs = []
    for xi in range(maxd + 1):
        idx = [0]
        def rebuild(kf):
            if not isinstance(kf, Tower) or kf.height == 0:
                p = leaves2[idx[0]]
                idx[0] += 1
                return p.coeff(xi)
            d = kf.levels[-1].minpoly.degree()
            # note: walk order is top-level list outer; rebuild mirrors walk
            return [rebuild(kf.down()) for _ in range(d)]
        num_coeffs.append(rebuild(k) if isinstance(k, Tower) and k.height else rebuild(tower_of(QQ)))
    num = Poly(field.constants, num_coeffs)
    denk = Poly(field.constants, [field.constants.coerce(c) for c in den.coeffs])
    return field._make(num, denk)


def is_irreducible(field, f: Poly, bound: int = DEFAULT_DEGREE_BOUND) -> bool:
    parts = factor_over(field, f, bound)
    return len(parts) == 1 and parts[0][1] == 1 and parts[0][0].degree() == f.degree()


def roots_in_field(field, f: Poly, bound: int = DEFAULT_DEGREE_BOUND) -> list:
    """Roots of f lying in the coefficient field (with multiplicity ignored)."""
    out = []
    for g, _ in factor_over(field, f, bound):
        if g.degree() == 1:
            out.append(field.neg(g.coeff(0)))
    return out


# ---------------------------------------------------------------------------
# constants-field growth and geometric irreducibility
# ---------------------------------------------------------------------------
#
# The orbit and skeleton computations are geometric: residue factorizations
# must not merge branches that only a constant-field extension separates
# (e.g. y^2 + w^2/4 is irreducible over Q(x)(w) but splits as
# (y - iw/2)(y + iw/2) once i is adjoined).  Constant extensions therefore
# live in one growing constants tower at the bottom of every coefficient
# field, and elements are migrated structurally when it grows.

def migrate_constants(e, old_k: Tower, new_k: Tower):
    """Element of the constants tower old_k into new_k (old_k is a prefix)."""
    assert new_k.levels[:old_k.height] == old_k.levels
    out = e
    for i in range(old_k.height, new_k.height):
        out = new_k.subfield(i + 1).lift_from_sub(out)
    return out


def migrate_field(field, old_k: Tower, new_k: Tower):
    """The same coefficient field over the grown constants tower."""
    if isinstance(field, Tower) and field.height == 0:
        base = migrate_field(field.base, old_k, new_k)
        return tower_of(base) if not isinstance(base, Tower) else base
    if isinstance(field, Tower):
        sub = migrate_field(field.down(), old_k, new_k)
        subt = sub if isinstance(sub, Tower) else tower_of(sub)
        mp = field.levels[-1].minpoly
        mp_new = Poly(subt, [migrate_elem(c, field.down(), sub, old_k, new_k)
                             for c in mp.coeffs])
        return subt.extend(field.levels[-1].name, mp_new)
    if isinstance(field, FunctionField):
        return FunctionField(new_k, field.var)
    if field == QQ or field == old_k:
        return new_k
    raise TypeError(f"cannot migrate {field!r}")


def migrate_elem(e, old_field, new_field, old_k: Tower, new_k: Tower):
    """Element of old_field into the migrated new_field."""
    if isinstance(old_field, Tower) and old_field.height == 0:
        return migrate_elem(e, old_field.base, new_field.base
                            if isinstance(new_field, Tower) else new_field,
                            old_k, new_k)
    if isinstance(old_field, Tower):
        sub_old = old_field.down()
        sub_new = new_field.down()
        return [migrate_elem(c, sub_old, sub_new, old_k, new_k) for c in e]
    if isinstance(old_field, FunctionField):
        num = tuple(migrate_constants(c, old_k, new_k) for c in e.num)
        den = tuple(migrate_constants(c, old_k, new_k) for c in e.den)
        return FFElem(num, den)
    # constants leaf
    return migrate_constants(e, old_k, new_k)


def migrate_poly(f: Poly, old_field, new_field, old_k, new_k) -> Poly:
    return Poly(new_field, [migrate_elem(c, old_field, new_field, old_k, new_k)
                            for c in f.coeffs])


def constants_of(field) -> Tower:
    """The constants tower at the bottom of a coefficient field."""
    if isinstance(field, Tower):
        if field.height == 0:
            return constants_of(field.base)
        return constants_of(field.base) if not isinstance(field.base, (Tower, FunctionField)) \
            else constants_of(field.base)
    if isinstance(field, FunctionField):
        k = field.constants
        return k if isinstance(k, Tower) else tower_of(k)
    if field == QQ:
        return tower_of(QQ)
    raise TypeError(f"no constants in {field!r}")


_GEN_NAMES = "abcdefghjklmnopqrs"


def fresh_name(taken, stem="a"):
    i = 0
    cand = stem
    while cand in taken:
        i += 1
        cand = f"{stem}{i}"
    return cand


def split_constants_completely(k: Tower, f: Poly, bound: int = DEFAULT_DEGREE_BOUND,
                               max_total_degree: int = 64):
    """All roots of f in a splitting tower over the constants k.

    f has coefficients in the constants tower k.  Extends k level by level
    until f splits into linear factors; returns (new_k, roots) with the
    roots listed in a deterministic order.  Raises DeskScaleError when the
    splitting tower would exceed ``max_total_degree``.
    """
    cur_k = k
    cur_f = f
    taken = {lv.name for lv in cur_k.levels}
    while True:
        parts = factor_over(cur_k, cur_f, max(bound, cur_f.degree()))
        nonlinear = [g for g, _ in parts if g.degree() > 1]
        if not nonlinear:
            roots = []
            for g, m in parts:
                root = cur_k.neg(g.coeff(0))
                roots.extend([root] * m)
            return cur_k, roots
        g = min(nonlinear, key=lambda h: (h.degree(), h.to_str("y")))
        if cur_k.degree() * g.degree() > max_total_degree:
            raise DeskScaleError(
                "constants splitting field exceeds desk-scale degree", f)
        name = fresh_name(taken, "c")
        taken.add(name)
        new_k = cur_k.extend(name, g)
        cur_f = Poly(new_k, [migrate_constants(c, cur_k, new_k)
                             for c in cur_f.coeffs])
        cur_k = new_k


def _specialize_chain(field, x0: Fraction):
    """Specialize a tower over k0(x) at x = x0.

    Returns (number_field_chain, eval_map) where eval_map sends elements of
    ``field`` into the chain (a constants Tower), or None when x0 is bad
    (vanishing denominator / inseparable level image).
    """
    k0 = constants_of(field)
    if isinstance(field, FunctionField):
        ff = field
        levels = []
    else:
        assert isinstance(field, Tower)
        ff = field.base
        levels = list(field.levels)
    taken = {lv.name for lv in k0.levels}

    K = k0
    gen_images: list = []  # image of each tower generator in K

    def eval_elem(e, height):
        # element of field.subfield(height) -> K   (may raise ZeroDivisionError)
        if height == 0:
            num = Poly(K, [migrate_constants(c, k0, K) for c in e.num])
            den = Poly(K, [migrate_constants(c, k0, K) for c in e.den])
            x0e = K.coerce(x0)
            dv = den.eval(x0e)
            if K.is_zero(dv):
                raise ZeroDivisionError
            return K.mul(num.eval(x0e), K.inv(dv))
        d = levels[height - 1].minpoly.degree()
        acc = K.zero()
        img = gen_images[height - 1]
        p = K.one()
        for c in e:
            acc = K.add(acc, K.mul(eval_elem(c, height - 1), p))
            p = K.mul(p, img)
        return acc

    try:
        for h, lv in enumerate(levels):
            mp_img = Poly(K, [eval_elem(c, h) for c in lv.minpoly.coeffs])
            if poly_gcd(mp_img, mp_img.derivative()).degree() != 0:
                return None
            parts = factor_over(K, mp_img, max(DEFAULT_DEGREE_BOUND, mp_img.degree()))
            g = min((p for p, _ in parts), key=lambda h_: (h_.degree(), h_.to_str("y")))
            if g.degree() == 1:
                gen_images.append(K.neg(g.coeff(0)))
            else:
                name = fresh_name(taken, "s")
                taken.add(name)
                K_new = K.extend(name, g)
                gen_images[:] = [migrate_constants(e, K, K_new) for e in gen_images]
                gen_images.append(K_new.gen())
                K = K_new
    except ZeroDivisionError:
        return None

    def eval_full(e):
        return eval_elem(e, len(levels)) if levels else eval_elem(e, 0)

    return K, eval_full


_GEOM_MEMO: dict = {}


def _geom_key(field, f: Poly) -> str:
    parts = [repr(field)]
    if isinstance(field, Tower):
        parts += [lv.minpoly.to_str("Y") for lv in field.levels]
    parts.append(f.to_str("y"))
    return "|".join(parts)


def is_geometrically_irreducible(field, f: Poly, bound: int = DEFAULT_DEGREE_BOUND):
    """Decide geometric irreducibility of an irreducible f over a residue field.

    ``field`` is a tower over k0(x) (or k0(x) itself) with constants k0 at
    the bottom.  Returns (True, None) or (False, new_constants) where
    new_constants is a constants tower over which f factors.

    Method: specialize tower and polynomial at a good rational point; the
    exact constant field of the function field of f embeds into the residue
    number field there, so factoring f over that candidate extension either
    splits it or proves geometric irreducibility.
    """
    k0 = constants_of(field)
    if isinstance(field, Tower) and field.height == 0:
        field = field.base
    if not isinstance(field, (FunctionField, Tower)):
        raise TypeError("expected a field over k0(x)")
    key = _geom_key(field, f)
    if key in _GEOM_MEMO:
        return _GEOM_MEMO[key], None
    for trial in range(60):
        x0 = Fraction((-1) ** trial * ((trial + 1) // 2))
        sp = _specialize_chain(field, x0)
        if sp is None:
            continue
        K, ev = sp
        try:
            f_img = Poly(K, [ev(c) for c in f.coeffs])
        except ZeroDivisionError:
            continue
        if f_img.degree() != f.degree():
            continue
        if poly_gcd(f_img, f_img.derivative()).degree() != 0:
            continue
        parts = factor_over(K, f_img, max(bound, f_img.degree()))
        g = min((p for p, _ in parts), key=lambda h_: (h_.degree(), h_.to_str("y")))
        # candidate constants: K extended by one root of f's image
        if g.degree() == 1:
            K_cand = K
        else:
            name = fresh_name({lv.name for lv in K.levels}, "s")
            K_cand = K.extend(name, g)
        if K_cand.height == k0.height:
            # nothing new could split f
            _GEOM_MEMO[key] = True
            return True, None
        field_big = migrate_field(field, k0, K_cand)
        f_big = migrate_poly(f, field, field_big, k0, K_cand)
        parts_big = factor_over(field_big, f_big, bound)
        if len(parts_big) == 1 and parts_big[0][1] == 1:
            _GEOM_MEMO[key] = True
            return True, None
        return False, K_cand
    raise RuntimeError("no good specialization point for geometric test")
