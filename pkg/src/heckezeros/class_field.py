"""Form class groups of imaginary quadratic fields and their characters.

A fundamental discriminant -D determines a finite set of reduced positive
definite binary quadratic forms ax^2 + bxy + cy^2 with b^2 - 4ac = -D, one per
ideal class.  Composition of classes is computed by Dirichlet composition with
an explicit reduction loop, the abelian group structure is decomposed into
invariant factors, and the characters of the group are materialized with exact
rational angles (numerator of 2*pi) so homomorphism identities can be tested
without rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .arith import kronecker_symbol, squarefree


class DiscriminantError(ValueError):
    """-D is not a fundamental discriminant in the supported range."""


class CompositionError(ValueError):
    """Form composition rejected or produced an inconsistent group."""


@dataclass(frozen=True, order=True)
class Form:
    """Positive definite binary quadratic form a*x^2 + b*x*y + c*y^2."""

    a: int
    b: int
    c: int

    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def inverse(self) -> "Form":
        return reduce_form(Form(self.a, -self.b, self.c))

    def __call__(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y


def _normalize(a: int, b: int, c: int) -> tuple[int, int, int]:
    # shift b into (-a, a] via (x, y) -> (x + r*y, y)
    r = (a - b) // (2 * a)
    return a, b + 2 * r * a, a * r * r + b * r + c


def reduce_form(f: Form) -> Form:
    """Reduced representative of the class of f (positive definite only)."""
    if f.a <= 0 or f.discriminant() >= 0:
        raise CompositionError(f"form {f} is not positive definite")
    a, b, c = _normalize(f.a, f.b, f.c)
    while a > c or (a == c and b < 0):
        a, b, c = _normalize(c, -b, a)
    return Form(a, b, c)


def is_reduced(f: Form) -> bool:
    if not (-f.a < f.b <= f.a <= f.c):
        return False
    if f.b < 0 and (f.a == f.c or f.a == abs(f.b)):
        return False
    return True


def validate_discriminant(d: int, cap: int = 10**6) -> None:
    """Reject d unless -d is a fundamental discriminant with 3 <= d <= cap."""
    if not isinstance(d, (int, np.integer)):
        raise DiscriminantError(f"discriminant parameter must be an integer, got {d!r}")
    if d < 3:
        raise DiscriminantError(f"need D >= 3 (got D={d}); -D must be a negative fundamental discriminant")
    if d > cap:
        raise DiscriminantError(f"D={d} exceeds the supported cap {cap}")
    if d % 4 == 3:
        if not squarefree(d):
            raise DiscriminantError(f"D={d} = 3 mod 4 but D is not squarefree")
    elif d % 4 == 0:
        m = d // 4
        if m % 4 not in (1, 2):
            raise DiscriminantError(f"D={d} = 4m with m = {m} = {m % 4} mod 4; need m = 1 or 2 mod 4")
        if not squarefree(m):
            raise DiscriminantError(f"D={d} = 4m with m = {m} not squarefree")
    else:
        raise DiscriminantError(f"-D = {-d} = {-d % 4} mod 4 is not 0 or 1 mod 4")


def reduced_forms(d: int) -> list[Form]:
    """All reduced forms of discriminant -d, sorted lexicographically by (a, b).

    Enumerates a <= sqrt(d/3), b in (-a, a] with b = d (mod 2) and
    4a | b^2 + d; c is then determined and must satisfy the reduction
    inequalities.
    """
    validate_discriminant(d)
    out = []
    for a in range(1, math.isqrt(d // 3) + 1):
        for b in range(-a + 1, a + 1):
            if (b - d) % 2 != 0:
                continue
            num = b * b + d
            if num % (4 * a) != 0:
                continue
            c = num // (4 * a)
            if c < a:
                continue
            if b < 0 and (a == c or a == abs(b)):
                continue
            out.append(Form(a, b, c))
    return sorted(out, key=lambda f: (f.a, f.b))


def _ext_gcd(x: int, y: int) -> tuple[int, int, int]:
    """(g, u, v) with u*x + v*y = g = gcd(x, y)."""
    u0, v0, u1, v1 = 1, 0, 0, 1
    while y:
        q, r = divmod(x, y)
        x, y = y, r
        u0, u1 = u1, u0 - q * u1
        v0, v1 = v1, v0 - q * v1
    return x, u0, v0


def compose(f1: Form, f2: Form, fld: "FieldData | None" = None) -> Form:
    """Reduced Dirichlet composition of two forms of the same discriminant."""
    if f1.discriminant() != f2.discriminant():
        raise CompositionError(
            f"discriminant mismatch: {f1.discriminant()} vs {f2.discriminant()}")
    if fld is not None:
        if f1 not in fld.form_index or f2 not in fld.form_index:
            raise CompositionError("forms do not belong to the given field")
    a1, b1, c1 = f1.a, f1.b, f1.c
    a2, b2, c2 = f2.a, f2.b, f2.c
    if a1 > a2:
        a1, b1, c1, a2, b2, c2 = a2, b2, c2, a1, b1, c1
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        d, u, _ = _ext_gcd(a2, a1)
        y1 = u
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        d1, u, v = _ext_gcd(s, d)
        x2, y2 = u, -v
    v1 = a1 // d1
    v2 = a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    a3 = v1 * v2
    b3 = b2 + 2 * v2 * r
    c3 = (b3 * b3 - f1.discriminant()) // (4 * a3)
    return reduce_form(Form(a3, b3, c3))


@dataclass
class FieldData:
    """Class-group data of Q(sqrt(-D)) realized on reduced forms.

    group[i, j] is the index of the reduced composition of forms[i] and
    forms[j]; gens/gen_orders/coords give a basis decomposition
    G = (Z/e_1) x ... x (Z/e_k) used to enumerate the characters.
    """

    D: int
    forms: list[Form]
    h: int
    group: np.ndarray
    w: int
    invariant_factors: list[int]
    gens: list[int]
    gen_orders: list[int]
    coords: np.ndarray          # shape (h, k); coords of each class in the basis
    form_index: dict = dc_field(repr=False, default_factory=dict)
    _characters: "list[HeckeCharacter] | None" = dc_field(default=None, repr=False)

    @property
    def principal_index(self) -> int:
        return 0

    def sqrt_disc(self) -> float:
        return math.sqrt(self.D)


def _power(table: np.ndarray, i: int, k: int, e0: int) -> int:
    acc = e0
    base = i
    while k:
        if k & 1:
            acc = int(table[acc, base])
        base = int(table[base, base])
        k >>= 1
    return acc


def _element_order(table: np.ndarray, i: int, e0: int) -> int:
    k, x = 1, i
    while x != e0:
        x = int(table[x, i])
        k += 1
    return k


def _decompose(table: np.ndarray, e0: int) -> list[tuple[int, int]]:
    """Basis [(element, order), ...] with orders in decreasing divisibility."""
    h = table.shape[0]
    if h == 1:
        return []
    orders = [_element_order(table, i, e0) for i in range(h)]
    g1 = int(np.argmax(orders))
    e1 = orders[g1]
    # cosets of <g1>
    powers = {}
    x = e0
    for k in range(e1):
        powers[x] = k
        x = int(table[x, g1])
    coset_id = -np.ones(h, dtype=np.int64)
    reps = []
    for i in range(h):
        if coset_id[i] >= 0:
            continue
        cid = len(reps)
        reps.append(i)
        x = i
        for _ in range(e1):
            coset_id[x] = cid
            x = int(table[x, g1])
    q = len(reps)
    qtable = np.zeros((q, q), dtype=np.int64)
    for i in range(q):
        for j in range(q):
            qtable[i, j] = coset_id[table[reps[i], reps[j]]]
    sub = _decompose(qtable, int(coset_id[e0]))
    out = [(g1, e1)]
    for qg, e in sub:
        x = reps[qg]
        xe = _power(table, x, e, e0)
        m = powers[xe]
        if m % e != 0:
            raise CompositionError("group decomposition failed (not abelian?)")
        adj = _power(table, g1, (e1 - m // e) % e1, e0)
        out.append((int(table[x, adj]), e))
    return out


def build_field(d: int) -> FieldData:
    """FieldData for discriminant -d, with the group axioms verified."""
    forms = reduced_forms(d)
    h = len(forms)
    index = {f: i for i, f in enumerate(forms)}
    group = np.zeros((h, h), dtype=np.int64)
    for i in range(h):
        for j in range(i, h):
            g = compose(forms[i], forms[j])
            if g not in index:
                raise CompositionError(
                    f"composition closure failure: {forms[i]} o {forms[j]} -> {g} "
                    f"is not a reduced form of discriminant {-d} (composition bug)")
            group[i, j] = group[j, i] = index[g]

    principal = forms[0]
    if principal.a != 1:
        raise CompositionError("principal form missing from reduced list")
    if not np.array_equal(group[0], np.arange(h)):
        raise CompositionError("principal form is not the identity")
    for i in range(h):
        if sorted(group[i]) != list(range(h)):
            raise CompositionError(f"row {i} of the composition table is not a permutation")

    basis = _decompose(group, 0)
    gens = [g for g, _ in basis]
    orders = [e for _, e in basis]
    if math.prod(orders) != h:
        raise CompositionError("basis orders do not multiply to h")
    k = len(gens)
    coords = np.zeros((h, k), dtype=np.int64)
    seen = {0: tuple([0] * k)}
    elems = [0]
    for axis, (g, e) in enumerate(basis):
        new_elems = list(elems)
        for x in elems:
            y = x
            for power in range(1, e):
                y = int(group[y, g])
                cv = list(seen[x])
                cv[axis] = power
                if y in seen:
                    raise CompositionError("basis is not independent")
                seen[y] = tuple(cv)
                new_elems.append(y)
        elems = new_elems
    if len(seen) != h:
        raise CompositionError("basis does not generate the group")
    for i, cv in seen.items():
        coords[i] = cv

    w = 6 if d == 3 else (4 if d == 4 else 2)
    return FieldData(D=d, forms=forms, h=h, group=group, w=w,
                     invariant_factors=sorted(orders), gens=gens,
                     gen_orders=orders, coords=coords, form_index=index)


@dataclass
class HeckeCharacter:
    """A character of the form class group.

    angles[i] is the exact rational t with psi(class i) = exp(2*pi*i*t);
    n_psi is the CLT weight (1 for complex characters, 2 for real ones).
    """

    index: int
    exponents: tuple
    angles: list[Fraction]
    is_complex: bool
    is_principal: bool
    n_psi: int
    conjugate_index: int

    @property
    def values(self) -> np.ndarray:
        out = np.empty(len(self.angles), dtype=complex)
        for i, t in enumerate(self.angles):
            out[i] = _root_of_unity(t)
        return out


_EXACT_COS = {
    Fraction(0): 1.0, Fraction(1, 2): -1.0, Fraction(1, 4): 0.0,
    Fraction(3, 4): 0.0, Fraction(1, 3): -0.5, Fraction(2, 3): -0.5,
    Fraction(1, 6): 0.5, Fraction(5, 6): 0.5,
}


def _root_of_unity(t: Fraction) -> complex:
    """exp(2*pi*i*t) with exact conjugate pairing: value(1-t) == conj(value(t)).

    Low-order angles get exactly representable real parts, so character sums
    with integer weights cancel cleanly (the r tables come out real to the
    last bit for conjugate classes).
    """
    t = t - math.floor(t)
    if 2 * t > 1:
        v = _root_of_unity(1 - t)
        return complex(v.real, -v.imag)
    re = _EXACT_COS.get(t)
    th = 2.0 * math.pi * float(t)
    if re is None:
        re = math.cos(th)
    im = math.sin(th) if t not in (Fraction(0), Fraction(1, 2)) else 0.0
    if 4 * t == 1:
        im = 1.0
    return complex(re, im)


def characters(fld: FieldData) -> list[HeckeCharacter]:
    """All h characters; principal first, conjugate pairs cross-linked."""
    if fld._characters is not None:
        return fld._characters
    orders = fld.gen_orders
    k = len(orders)
    vectors = [()]
    for e in orders:
        vectors = [v + (m,) for v in vectors for m in range(e)]
    vec_index = {v: i for i, v in enumerate(vectors)}
    chars = []
    for idx, vec in enumerate(vectors):
        angles = []
        for row in fld.coords:
            t = Fraction(0)
            for m, a, e in zip(vec, row, orders):
                t += Fraction(m * int(a), e)
            t -= math.floor(t)
            angles.append(t)
        conj_vec = tuple((-m) % e for m, e in zip(vec, orders))
        is_cplx = any(t != 0 and 2 * t != 1 for t in angles)
        chars.append(HeckeCharacter(
            index=idx, exponents=vec, angles=angles,
            is_complex=is_cplx, is_principal=(idx == 0),
            n_psi=1 if is_cplx else 2,
            conjugate_index=vec_index[conj_vec]))
    fld._characters = chars
    return chars


def distinct_l_representatives(fld: FieldData, complex_only: bool = False) -> list[int]:
    """One character index per {psi, conj(psi)} orbit (distinct L-functions)."""
    chars = characters(fld)
    reps = [c.index for c in chars if c.index <= c.conjugate_index]
    if complex_only:
        reps = [i for i in reps if chars[i].is_complex]
    return reps


def kronecker_chi(fld: FieldData, n: int) -> int:
    """chi_D(n) = Kronecker symbol (-D | n), n >= 1."""
    if n < 1:
        raise ValueError("kronecker_chi requires n >= 1")
    return kronecker_symbol(-fld.D, n)
