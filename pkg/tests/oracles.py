"""Independent reference computations used only by the tests; nothing here imports the package."""
from __future__ import annotations

import cmath
import itertools
import math
from fractions import Fraction

import numpy as np
import sympy
from sympy.solvers.diophantine.diophantine import diop_DN


def squarefree_range(lo: int, hi: int) -> list[int]:
    return [d for d in range(lo, hi) if d > 1 and all(e == 1 for e in sympy.factorint(d).values())]


def field_discriminant(d: int) -> int:
    return d if d % 4 == 1 else 4 * d


def kronecker(D: int, n: int) -> int:
    """Kronecker symbol (D/n) for n > 0."""
    out = 1
    for p, e in sympy.factorint(n).items():
        if p == 2:
            if D % 2 == 0:
                return 0
            s = 1 if D % 8 in (1, 7) else -1
        else:
            s = int(sympy.legendre_symbol(D % p, p)) if D % p else 0
        out *= s ** e
    return out


def pell_unit(d: int) -> tuple[Fraction, Fraction]:
    """Fundamental unit (a, b) meaning a + b*sqrt(d), from sympy's Pell solver."""
    if d % 4 == 1:
        sols = [(Fraction(x, 2), Fraction(y, 2)) for N in (-4, 4) for x, y in diop_DN(d, N) if x > 0 and y > 0]
    else:
        sols = [(Fraction(x), Fraction(y)) for N in (-1, 1) for x, y in diop_DN(d, N) if x > 0 and y > 0]
    return min(sols, key=lambda s: s[0] + s[1] * math.sqrt(d))


def analytic_class_number(d: int) -> int:
    """h from h*log(eps) = -1/2 sum chi(a) log sin(pi a / D)."""
    D = field_discriminant(d)
    a, b = pell_unit(d)
    eps = float(a) + float(b) * math.sqrt(d)
    s = sum(kronecker(D, k) * math.log(math.sin(math.pi * k / D)) for k in range(1, D))
    h = -0.5 * s / math.log(eps)
    assert abs(h - round(h)) < 1e-6, (d, h)
    return round(h)


# -- ideal classes by direct principality tests --------------------------------


def _hnf(vectors):
    """Hermite normal form basis of the Z-lattice spanned by integer 2-vectors."""
    rows = [list(v) for v in vectors if any(v)]
    out = []
    for col in range(2):
        rows = [r for r in rows if any(r)]
        while sum(1 for r in rows if r[col] != 0) > 1:
            rows.sort(key=lambda r: (r[col] == 0, abs(r[col])))
            piv = rows[0]
            for r in rows[1:]:
                if r[col]:
                    q = r[col] // piv[col]
                    for i in range(2):
                        r[i] -= q * piv[i]
        piv = next((r for r in rows if r[col] != 0), None)
        if piv is not None:
            out.append(piv)
            rows.remove(piv)
    return out


class _Order:
    """Ring of integers of Q(sqrt(d)) with basis 1, w; elements are integer pairs."""

    def __init__(self, d: int):
        self.d = d
        if d % 4 == 1:
            self.tr, self.nm = 1, (1 - d) // 4
        else:
            self.tr, self.nm = 0, -d
        self.w = ((1 + math.sqrt(d)) / 2) if d % 4 == 1 else math.sqrt(d)
        self.wbar = self.tr - self.w

    def mul(self, x, y):
        a, b = x
        c, e = y
        # (a + b w)(c + e w) = ac + (ae + bc) w + be w^2, with w^2 = tr*w - nm
        return (a * c - b * e * self.nm, a * e + b * c + b * e * self.tr)

    def norm(self, x):
        a, b = x
        return a * a + a * b * self.tr + b * b * self.nm

    def conj(self, x):
        a, b = x
        return (a + b * self.tr, -b)


def _ideals_up_to(O: _Order, D: int, bound: int):
    """Primitive ideals [a, (b + sqrt(D))/2] with a <= bound, as Z-bases in (1, w) coordinates."""
    out = []
    for a in range(1, bound + 1):
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            # (b + sqrt(D))/2 in terms of w
            if O.d % 4 == 1:
                gen = ((b - 1) // 2, 1)
            else:
                gen = (b // 2, 1)
            out.append((a, [(a, 0), gen]))
    return out


def _principal(O: _Order, basis, n: int, eps: float) -> bool:
    """Whether the ideal with Z-basis ``basis`` and norm n has a generator of norm +-n."""
    (p, q), (r, s) = basis
    # embeddings of the basis vectors
    e = np.array([[p + q * O.w, r + s * O.w], [p + q * O.wbar, r + s * O.wbar]])
    R = math.sqrt(n * eps) * (1 + 1e-9) + 1e-9
    inv = np.linalg.inv(e)
    xmax = int(abs(inv[0, 0]) * R + abs(inv[0, 1]) * R) + 1
    for x in range(-xmax, xmax + 1):
        # N(x v1 + y v2) = A y^2 + B y + C for this x
        v = lambda y: O.norm((x * p + y * r, x * q + y * s))
        C = v(0)
        A = (v(1) + v(-1)) // 2 - C
        B = (v(1) - v(-1)) // 2
        for target in (n, -n):
            disc = B * B - 4 * A * (C - target)
            if disc < 0:
                continue
            sq = math.isqrt(disc)
            if sq * sq != disc:
                continue
            for y2 in (-B + sq, -B - sq):
                if y2 % (2 * A) == 0:
                    return True
    return False


def ideal_class_number(d: int) -> int:
    """Count ideal classes among primitive ideals below the Minkowski bound by principality tests."""
    D = field_discriminant(d)
    O = _Order(d)
    a, b = pell_unit(d)
    eps = float(a) + float(b) * math.sqrt(d)
    bound = math.isqrt(D // 4) + 1
    ideals = _ideals_up_to(O, D, bound)
    reps: list = []
    for n, basis in ideals:
        new = True
        for m, rb in reps:
            # I ~ J iff I * conj(J) is principal
            prods = [O.mul(x, O.conj(y)) for x in basis for y in rb]
            P = _hnf(prods)
            if _principal(O, P, n * m, eps):
                new = False
                break
        if new:
            reps.append((n, basis))
    return len(reps)


# -- geometry of 2x2 monodromies ---------------------------------------------


def brute_geometry(A) -> str:
    M = np.array(A, dtype=object)
    I = np.identity(2, dtype=object)
    P = I.copy()
    for _ in range(12):
        P = P.dot(M)
        if (P == I).all():
            return "Euclidean"
    for k in (1, 2):
        N = np.linalg.matrix_power(np.array(A, dtype=np.int64), k) - np.identity(2, dtype=np.int64)
        if N.any() and not (N @ N).any():
            return "Nil"
    return "Sol"


# -- unit-circle polynomials ------------------------------------------------


def unit_circle_polys(n: int):
    """Monic integer degree-n polynomials with every root on the unit circle, by coefficient search."""
    ranges = [range(-math.comb(n, k), math.comb(n, k) + 1) for k in range(1, n + 1)]
    for coeffs in itertools.product(*ranges):
        c = (1,) + coeffs
        if c[-1] not in (1, -1):
            continue
        roots = np.roots(c)
        if np.all(np.abs(np.abs(roots) - 1) < 1e-4):
            yield c


def torsion_free_level(n: int) -> int:
    """Smallest prime q > n with no torsion charpoly congruent to (t-1)^n mod q, except (t-1)^n itself."""
    unip = [int(c) for c in sympy.Poly((sympy.Symbol("t") - 1) ** n).all_coeffs()]
    polys = [c for c in unit_circle_polys(n) if list(c) != unip]
    q = int(sympy.nextprime(n))
    while True:
        if all(any((a - b) % q for a, b in zip(c, unip)) for c in polys):
            return q
        q = int(sympy.nextprime(q))


def gauss_discriminant(p: int) -> int:
    """Square of the quadratic Gauss sum, with the residue symbol computed by brute force."""
    squares = {(x * x) % p for x in range(1, p)}
    z = cmath.exp(2j * math.pi / p)
    g = sum((1 if a in squares else -1) * z ** a for a in range(1, p))
    val = (g * g).real
    assert abs((g * g).imag) < 1e-9 and abs(val - round(val)) < 1e-9
    return round(val)
