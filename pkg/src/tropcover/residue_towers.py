"""Residue-field towers and conjugacy of root approximations.

A root approximation produced by the expansion algorithms is a truncated
series whose coefficients generate a finite extension of the residue field
k(p) (k0, or k0 of a chart coordinate).  Two approximations are conjugate
under the absolute decomposition group iff, index by index, the minimal
polynomial of each coefficient over the field generated by the previous
coefficients is the same under the isomorphism pinned by those previous
coefficients.

That criterion is implemented here by computing, for each approximation, a
*chain fingerprint*: the abstract presentation of the subfield generated by
its coefficient chain.  Level i of the presentation is the minimal
polynomial of coefficient i over the subfield generated by coefficients
0..i-1, with its coefficients rewritten as polynomial expressions in
abstract generators z0, z1, ...  Pinning makes the presentation canonical,
so two approximations are conjugate iff their fingerprints are literally
equal.  The degree of the presented subfield is the orbit size (the number
of embeddings into the separable closure).
"""

from __future__ import annotations

from fractions import Fraction

from .exactnum import LinearSolver, Poly, Tower, tower_of
from .factorization import factor_over, is_irreducible, DeskScaleError
from .series import LaurentSeries


class EtaleLiftRecord:
    """A residue polynomial, its degree-preserving lift, and the chosen root."""

    def __init__(self, residue_poly: Poly, lifted_poly, root_marker=None):
        self.residue_poly = residue_poly
        self.lifted_poly = lifted_poly
        self.root_marker = root_marker
        if lifted_poly.degree() != residue_poly.degree():
            raise ValueError("etale lift must preserve the degree")


def extend_tower(tower: Tower, g: Poly, name: str,
                 bound: int = 8, verify: bool = True) -> Tower:
    """One more level with generator ``name`` satisfying monic irreducible g.

    Irreducibility is certified by the factorization engine; building a
    tower on a reducible polynomial is an error, not undefined behavior.
    """
    g = g.monic()
    if g.degree() == 1:
        raise ValueError("degree-1 levels are elided; adjoin nothing")
    if verify and not is_irreducible(tower, g, max(bound, g.degree())):
        raise ValueError(f"level polynomial {g.to_str('y')} is reducible")
    return tower.extend(name, g)


def tower_degree(tower: Tower) -> int:
    """Product of level degrees = number of embeddings into the closure."""
    return tower.degree()


class ChainPresentation:
    """Incremental abstract presentation of the field generated by a chain.

    ``tower``   -- abstract tower over the base, generators z0, z1, ...;
    ``images``  -- images of the abstract generators in the ambient field;
    ``entries`` -- one canonical string per chain element (its minimal
                   polynomial over the previous elements, or its expression
                   in them when it adds nothing).
    """

    def __init__(self, base, ambient: Tower):
        self.base = base
        self.ambient = ambient
        self.tower = tower_of(base)
        self.images = []
        self.basis_abs = [self.tower.one()]
        self.basis_img = [ambient.one()]
        self.entries: list[str] = []

    def degree(self) -> int:
        return self.tower.degree()

    def push(self, elem) -> None:
        """Process the next chain element (an ambient-tower element)."""
        amb, base = self.ambient, self.base
        solver = LinearSolver(base)
        for b in self.basis_img:
            dep = solver.add_vector(amb.flatten(b))
            assert dep is None, "presentation basis degenerated"
        power = amb.one()
        n = 0
        while True:
            # add basis * elem^n level by level (e^0 level is the basis
            # itself); a dependency can only appear at the pure power
            n += 1
            power = amb.mul(power, elem)
            dep = solver.add_vector(amb.flatten(power))
            if dep is not None:
                minpoly_coeffs = self._collect(dep, n)
                break
            for b in self.basis_img[1:]:
                dep = solver.add_vector(amb.flatten(amb.mul(b, power)))
                assert dep is None, "dependency off the pure power"
            if n > amb.degree() + 1:
                raise RuntimeError("chain minpoly search exceeded ambient degree")
        if n == 1:
            # element of the current subfield: record its expression
            expr = minpoly_coeffs[0]
            self.entries.append("= " + self.tower.to_str(expr))
            return
        mp = Poly(self.tower, [self.tower.neg(c) for c in minpoly_coeffs]
                  + [self.tower.one()])
        name = f"z{len(self.images)}"
        new_tower = self.tower.extend(name, mp)
        self.entries.append(f"{name}: " + mp.to_str("Y"))
        # grow basis: old basis times powers of the new generator
        old_abs, old_img = self.basis_abs, self.basis_img
        lift = new_tower.lift_from_sub
        self.basis_abs = []
        self.basis_img = []
        gen_abs = new_tower.gen()
        gp_abs = new_tower.one()
        gp_img = amb.one()
        for p in range(mp.degree()):
            for ba, bi in zip(old_abs, old_img):
                self.basis_abs.append(new_tower.mul(lift(ba), gp_abs))
                self.basis_img.append(amb.mul(bi, gp_img))
            gp_abs = new_tower.mul(gp_abs, gen_abs)
            gp_img = amb.mul(gp_img, elem)
        self.tower = new_tower
        self.images.append(elem)

    def _collect(self, dep, n):
        """Dependency coefficients -> coefficients of the minpoly over the
        abstract tower (per power of the element)."""
        D = len(self.basis_abs)
        out = []
        for j in range(n):
            chunk = dep[j * D:(j + 1) * D]
            acc = self.tower.zero()
            for c, b in zip(chunk, self.basis_abs):
                acc = self.tower.add(acc, self.tower.mul(self.tower.coerce(c), b))
            out.append(acc)
        return out

    def fingerprint(self) -> tuple[str, ...]:
        return tuple(self.entries)


def chain_fingerprint(chain: list, ambient: Tower, base) -> tuple[tuple[str, ...], int]:
    """Fingerprint and generated-subfield degree of a coefficient chain.

    ``chain`` lists ambient-tower elements in expansion order; ``base`` must
    be the bottom field of ``ambient``.
    """
    pres = ChainPresentation(base, ambient)
    for e in chain:
        pres.push(e)
    return pres.fingerprint(), pres.degree()


def conjugate_classes(approxes: list[LaurentSeries],
                      towers: list[Tower] | None = None,
                      base=None) -> list[list[int]]:
    """Partition approximations into decomposition-group orbits.

    Each approximation is a LaurentSeries whose coefficients live in a
    tower over ``base`` (the series' coefficient field when ``towers`` is
    omitted).  The approximations must be pairwise distinct at their
    precision; insufficient precision raises ValueError.

    Two series are conjugate iff at every exponent the minimal polynomials
    of their coefficients agree under the isomorphism built from all
    previous exponents; the partition is invariant under permuting the
    input.
    """
    n = len(approxes)
    if towers is None:
        towers = [s.field if isinstance(s.field, Tower) else tower_of(s.field)
                  for s in approxes]
    if base is None:
        base = towers[0].base
    exps = sorted({e for s in approxes for e in s.terms})
    fps = []
    degs = []
    for s, T in zip(approxes, towers):
        chain = [s.terms.get(e, T.zero()) for e in exps]
        fp, deg = chain_fingerprint(chain, T, base)
        fps.append((tuple(exps), fp))
        degs.append(deg)
    classes: list[list[int]] = []
    for idx in range(n):
        for cls in classes:
            if fps[cls[0]] == fps[idx]:
                cls.append(idx)
                break
        else:
            classes.append([idx])
    # separation check: a class collects exactly the embeddings of one
    # subfield, so its size must equal the subfield degree; a larger class
    # means two orbits still agree at this precision.
    for cls in classes:
        if len(cls) != degs[cls[0]]:
            raise ValueError("approximations not separated at this precision "
                             f"(class size {len(cls)} != degree {degs[cls[0]]})")
    return classes
