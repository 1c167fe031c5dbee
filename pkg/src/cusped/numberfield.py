"""Exact arithmetic in quadratic fields and small integer-polynomial tools.

Elements are ``a + b*sqrt(d)`` with ``a`` and ``b`` stored as ``Fraction``.
Floating point only appears in :meth:`QuadElem.embed`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import sympy

from .errors import InvalidFieldError, SingularPairingError, UnsupportedError, InputError

CLASS_NUMBER_MAX_D = 10**4


def is_squarefree(n: int) -> bool:
    if n == 0:
        return False
    return all(e == 1 for e in sympy.factorint(abs(n)).values())


def squarefree_decomposition(n: int) -> tuple[int, int]:
    """Return ``(f, d)`` with ``n == f*f*d`` and ``d`` squarefree (sign kept on ``d``)."""
    if n == 0:
        raise InputError("zero has no squarefree decomposition")
    f, d = 1, -1 if n < 0 else 1
    for p, e in sympy.factorint(abs(n)).items():
        f *= p ** (e // 2)
        d *= p ** (e % 2)
    return f, d


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, sympy.Integer)):
        return Fraction(int(x))
    if isinstance(x, sympy.Rational):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot coerce {x!r} to an exact rational")


@dataclass(frozen=True)
class QuadField:
    d: int

    def __post_init__(self):
        if not isinstance(self.d, int) or self.d in (0, 1) or not is_squarefree(self.d):
            raise InvalidFieldError(f"d={self.d} is not a squarefree integer other than 0, 1")

    @property
    def is_real(self) -> bool:
        return self.d > 0

    @property
    def omega(self) -> QuadElem:
        if self.d % 4 == 1:
            return QuadElem(Fraction(1, 2), Fraction(1, 2), self.d)
        return QuadElem(0, 1, self.d)

    @property
    def integral_basis(self) -> tuple[QuadElem, QuadElem]:
        return QuadElem(1, 0, self.d), self.omega

    @property
    def discriminant(self) -> int:
        return self.d if self.d % 4 == 1 else 4 * self.d

    def __call__(self, a=0, b=0) -> QuadElem:
        return QuadElem(a, b, self.d)


class QuadElem:
    """Immutable element ``a + b*sqrt(d)``."""

    __slots__ = ("_a", "_b", "_d")

    def __init__(self, a=0, b=0, d: int = -1):
        a, b = _frac(a), _frac(b)
        object.__setattr__(self, "_a", a)
        object.__setattr__(self, "_b", b)
        object.__setattr__(self, "_d", int(d))

    def __setattr__(self, name, value):
        raise AttributeError("QuadElem is immutable")

    @property
    def a(self) -> Fraction:
        return self._a

    @property
    def b(self) -> Fraction:
        return self._b

    @property
    def d(self) -> int:
        return self._d

    @property
    def field(self) -> QuadField:
        return QuadField(self._d)

    def _coerce(self, other) -> QuadElem:
        if isinstance(other, QuadElem):
            if other._d != self._d:
                if other._b == 0:
                    return QuadElem(other._a, 0, self._d)
                if self._b == 0:
                    raise _Promote
                raise TypeError(f"field mismatch: Q(sqrt({self._d})) vs Q(sqrt({other._d}))")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadElem(other, 0, self._d)
        return NotImplemented

    def _binary(self, other, op):
        try:
            o = self._coerce(other)
        except _Promote:
            return op(QuadElem(self._a, 0, other._d), other)
        if o is NotImplemented:
            return NotImplemented
        return op(self, o)

    def __add__(self, other):
        return self._binary(other, lambda x, y: QuadElem(x._a + y._a, x._b + y._b, y._d))

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda x, y: QuadElem(x._a - y._a, x._b - y._b, y._d))

    def __rsub__(self, other):
        return self._binary(other, lambda x, y: QuadElem(y._a - x._a, y._b - x._b, y._d))

    def __mul__(self, other):
        def mul(x, y):
            return QuadElem(x._a * y._a + x._b * y._b * y._d, x._a * y._b + x._b * y._a, y._d)

        return self._binary(other, mul)

    __rmul__ = __mul__

    def __neg__(self):
        return QuadElem(-self._a, -self._b, self._d)

    def __pos__(self):
        return self

    def inverse(self) -> QuadElem:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        c = self.conj()
        return QuadElem(c._a / n, c._b / n, self._d)

    def __truediv__(self, other):
        return self._binary(other, lambda x, y: x * y.inverse())

    def __rtruediv__(self, other):
        return self._binary(other, lambda x, y: y * x.inverse())

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result, base = QuadElem(1, 0, self._d), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, QuadElem):
            if self._b == 0 and other._b == 0:
                return self._a == other._a
            return self._d == other._d and self._a == other._a and self._b == other._b
        if isinstance(other, (int, Fraction)):
            return self._b == 0 and self._a == other
        return NotImplemented

    def __hash__(self):
        if self._b == 0:
            return hash(self._a)
        return hash((self._a, self._b, self._d))

    def __bool__(self):
        return bool(self._a) or bool(self._b)

    def conj(self) -> QuadElem:
        return QuadElem(self._a, -self._b, self._d)

    def norm(self) -> Fraction:
        return self._a * self._a - self._d * self._b * self._b

    def trace(self) -> Fraction:
        return 2 * self._a

    def is_rational(self) -> bool:
        return self._b == 0

    def coords(self) -> tuple[Fraction, Fraction]:
        """Coordinates ``(x, y)`` with ``self == x + y*omega`` in the integral basis."""
        if self._d % 4 == 1:
            y = 2 * self._b
            return self._a - self._b, y
        return self._a, self._b

    @classmethod
    def from_coords(cls, x, y, d: int) -> QuadElem:
        return QuadElem(x, 0, d) + _frac(y) * QuadField(d).omega

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coords())

    def embed(self, i: int = 0):
        """Float value under the ``i``-th embedding (``sqrt(d) -> (-1)**i sqrt(d)``)."""
        s = -1 if i else 1
        if self._d > 0:
            return float(self._a) + s * float(self._b) * math.sqrt(self._d)
        return complex(float(self._a), s * float(self._b) * math.sqrt(-self._d))

    def sign(self, i: int = 0) -> int:
        """Exact sign under a real embedding."""
        if self._d < 0:
            raise InvalidFieldError("sign is only defined for real fields")
        a, b = self._a, self._b if i == 0 else -self._b
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return 1 if b > 0 else -1
        if (a > 0) == (b > 0):
            return 1 if a > 0 else -1
        # opposite signs: compare a^2 with d b^2
        big_a = a * a > self._d * b * b
        return (1 if a > 0 else -1) if big_a else (1 if b > 0 else -1)

    def is_totally_positive(self) -> bool:
        return self._d > 0 and self.sign(0) > 0 and self.sign(1) > 0

    def __lt__(self, other):
        other = self._coerce(other)
        return (self - other).sign(0) < 0

    def __le__(self, other):
        return self == other or self < other

    def __gt__(self, other):
        other = self._coerce(other)
        return (self - other).sign(0) > 0

    def __ge__(self, other):
        return self == other or self > other

    def __repr__(self):
        return f"QuadElem({self._a}, {self._b}, d={self._d})"

    def __str__(self):
        return format_quad(self)

    def to_json(self) -> dict:
        return {"a": [self._a.numerator, self._a.denominator],
                "b": [self._b.numerator, self._b.denominator], "d": self._d}

    @classmethod
    def from_json(cls, obj: dict) -> QuadElem:
        try:
            a = Fraction(int(obj["a"][0]), int(obj["a"][1]))
            b = Fraction(int(obj["b"][0]), int(obj["b"][1]))
            return QuadElem(a, b, int(obj["d"]))
        except (KeyError, TypeError, IndexError, ZeroDivisionError, ValueError) as exc:
            raise InputError(f"malformed field element {obj!r}") from exc

    def to_quadruple(self) -> list[int]:
        """[a_num, a_den, b_num, b_den]."""
        return [self._a.numerator, self._a.denominator, self._b.numerator, self._b.denominator]


class _Promote(Exception):
    pass


def format_quad(x: QuadElem) -> str:
    """Render as e.g. ``2+sqrt(3)``, ``(3+sqrt(5))/2`` or ``-1/2+3/2*sqrt(-3)``."""
    a, b, d = x.a, x.b, x.d
    root = f"sqrt({d})"
    if b == 0:
        return str(a)
    den = math.lcm(a.denominator, b.denominator)
    if den > 1 and a != 0 and (a * den).denominator == 1:
        inner = format_quad(QuadElem(a * den, b * den, d))
        return f"({inner})/{den}"

    def term(c: Fraction) -> str:
        if c == 1:
            return root
        if c == -1:
            return "-" + root
        return f"{c}*{root}"

    if a == 0:
        return term(b)
    t = term(b)
    return f"{a}{t if t.startswith('-') else '+' + t}"


def gaussian_unit(d: int) -> QuadElem:
    """``i`` for ``d=-1`` and ``zeta_3 = (-1+sqrt(-3))/2`` for ``d=-3``."""
    if d == -1:
        return QuadElem(0, 1, -1)
    if d == -3:
        return QuadElem(Fraction(-1, 2), Fraction(1, 2), -3)
    raise InvalidFieldError("only Q(i) and Q(sqrt(-3)) carry the extra roots of unity used here")


def roots_of_unity(d: int) -> list[QuadElem]:
    if d == -1:
        i = gaussian_unit(-1)
        return [i ** n for n in range(4)]
    if d == -3:
        z6 = -(gaussian_unit(-3) ** 2)
        return [z6 ** n for n in range(6)]
    return [QuadElem(1, 0, d), QuadElem(-1, 0, d)]


# -- units -----------------------------------------------------------------


def _check_real_field(d: int) -> None:
    if not isinstance(d, int) or d <= 1 or not is_squarefree(d):
        raise InvalidFieldError(f"d={d} must be a squarefree integer > 1")


@lru_cache(maxsize=None)
def fundamental_unit(d: int) -> QuadElem:
    """Smallest unit > 1 of the ring of integers of Q(sqrt(d)).

    Walks the continued fraction of omega; a convergent p/q yields a unit
    exactly when N(p - q*omega) = +-1, and the first one found is minimal
    because units above 1 are ordered by their omega-coordinate.
    """
    _check_real_field(d)
    F = QuadField(d)
    w = F.omega
    wbar = w.conj()
    r = math.isqrt(d)
    P, Q = (1, 2) if d % 4 == 1 else (0, 1)
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    for _ in range(20 * (r + 10) * max(1, d.bit_length())):
        a = (P + r) // Q
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        if abs((p - q * w).norm()) == 1:
            eps = p - q * wbar
            if eps > 1:
                return eps
        P = a * Q - P
        Q = (d - P * P) // Q
    return fundamental_unit_bruteforce(d)


def fundamental_unit_bruteforce(d: int, bound: int | None = None) -> QuadElem:
    """Search x + y*omega over growing y; test oracle for small d."""
    _check_real_field(d)
    F = QuadField(d)
    w = F.omega
    y = 1
    while bound is None or y <= bound:
        for x in range(-y * (math.isqrt(d) + 2) - 2, y * (math.isqrt(d) + 2) + 3):
            u = x + y * w
            if abs(u.norm()) == 1 and u > 1:
                return u
        y += 1
    raise UnsupportedError(f"no unit found with omega-coordinate up to {bound}")


def totally_positive_unit(d: int) -> QuadElem:
    eps = fundamental_unit(d)
    return eps if eps.norm() == 1 else eps * eps


# -- lattices --------------------------------------------------------------


def trace_gram(basis) -> list[list[Fraction]]:
    return [[(x * y).trace() for y in basis] for x in basis]


def dual_lattice(basis) -> tuple[QuadElem, QuadElem]:
    """Dual basis under the trace pairing: tr(b*_i b_j) = delta_ij."""
    b1, b2 = basis
    G = trace_gram((b1, b2))
    det = G[0][0] * G[1][1] - G[0][1] * G[1][0]
    if det == 0:
        raise SingularPairingError("basis is not Q-linearly independent")
    inv = [[G[1][1] / det, -G[0][1] / det], [-G[1][0] / det, G[0][0] / det]]
    return (inv[0][0] * b1 + inv[0][1] * b2, inv[1][0] * b1 + inv[1][1] * b2)


def basis_change(src, dst) -> list[list[Fraction]]:
    """Rational matrix C with dst_j = sum_i C[i][j] src_i (columns are coordinates)."""
    (s1, s2), cols = src, []
    det = s1.a * s2.b - s2.a * s1.b
    if det == 0:
        raise SingularPairingError("source basis is dependent")
    for t in dst:
        x = (t.a * s2.b - s2.a * t.b) / det
        y = (s1.a * t.b - t.a * s1.b) / det
        cols.append((x, y))
    return [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]]


def same_module(basis1, basis2) -> bool:
    """True when the two bases span the same Z-module (unimodular change of basis)."""
    C = basis_change(basis1, basis2)
    if any(c.denominator != 1 for row in C for c in row):
        return False
    return abs(C[0][0] * C[1][1] - C[0][1] * C[1][0]) == 1


# -- class numbers ---------------------------------------------------------


def _normalize_b(b: int, a: int, D: int, s: int) -> int:
    """Representative of b mod 2|a| in the normalisation window for discriminant D."""
    m = 2 * abs(a)
    if abs(a) > s:
        r = b % m
        if r > abs(a):
            r -= m
        return r
    lo = s - m  # r must satisfy lo < r <= s
    return lo + 1 + (b - lo - 1) % m


def _is_reduced(a: int, b: int, s: int) -> bool:
    return 0 < b <= s and 2 * abs(a) - b <= s and 2 * abs(a) + b >= s + 1


def _rho(form, D, s):
    a, b, c = form
    r = _normalize_b(-b, c, D, s)
    return (c, r, (r * r - D) // (4 * c))


def _reduce(form, D, s):
    seen = 0
    while not _is_reduced(form[0], form[1], s):
        form = _rho(form, D, s)
        seen += 1
        if seen > 10 * D + 100:
            raise RuntimeError("form reduction did not terminate")
    return form


def _cycle(form, D, s):
    cyc = [form]
    f = _rho(form, D, s)
    while f != form:
        cyc.append(f)
        f = _rho(f, D, s)
    return cyc


def _form_cycles(d: int):
    """Yield one representative form (a, b, c) with 0 < a below the Minkowski bound per ideal."""
    D = QuadField(d).discriminant
    bound = math.isqrt(D // 4) + 1  # covers sqrt(D)/2
    for a in range(1, bound + 1):
        if 4 * a * a > D:
            break
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a) == 0:
                yield (a, b, (b * b - D) // (4 * a))


def class_number(d: int) -> int:
    """Wide ideal class number of Q(sqrt(d)).

    Every wide class contains an ideal of norm at most sqrt(D)/2. Each such
    ideal is written as a binary form, reduced, and identified by its cycle of
    reduced forms. A form and its negative describe the same ideal up to an
    element of negative norm, so their cycles are merged.
    """
    _check_real_field(d)
    if d >= CLASS_NUMBER_MAX_D:
        raise UnsupportedError(f"class_number supports d < {CLASS_NUMBER_MAX_D}")
    D = QuadField(d).discriminant
    s = math.isqrt(D)
    owner: dict = {}
    classes = 0
    for form in _form_cycles(d):
        red = _reduce(form, D, s)
        if red in owner:
            continue
        neg = _reduce((-red[0], red[1], -red[2]), D, s)
        if neg in owner:
            label = owner[neg]
        else:
            classes += 1
            label = classes
            for f in _cycle(neg, D, s):
                owner[f] = label
        for f in _cycle(red, D, s):
            owner[f] = label
    return classes


def narrow_class_number(d: int) -> int:
    h = class_number(d)
    return h if fundamental_unit(d).norm() == -1 else 2 * h


# -- integer polynomials ---------------------------------------------------


class PolynomialZ:
    """Integer polynomial, coefficients listed from the leading term down."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients):
        coeffs = [int(c) for c in coefficients]
        while coeffs and coeffs[0] == 0:
            coeffs.pop(0)
        object.__setattr__(self, "coefficients", tuple(coeffs))

    def __setattr__(self, name, value):
        raise AttributeError("PolynomialZ is immutable")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def monic(self) -> bool:
        return bool(self.coefficients) and self.coefficients[0] == 1

    def is_zero(self) -> bool:
        return not self.coefficients

    def __eq__(self, other):
        return isinstance(other, PolynomialZ) and self.coefficients == other.coefficients

    def __hash__(self):
        return hash(self.coefficients)

    def __mul__(self, other: PolynomialZ) -> PolynomialZ:
        if self.is_zero() or other.is_zero():
            return PolynomialZ([])
        out = [0] * (self.degree + other.degree + 1)
        for i, x in enumerate(self.coefficients):
            for j, y in enumerate(other.coefficients):
                out[i + j] += x * y
        return PolynomialZ(out)

    def __sub__(self, other: PolynomialZ) -> PolynomialZ:
        n = max(len(self.coefficients), len(other.coefficients))
        a = [0] * (n - len(self.coefficients)) + list(self.coefficients)
        b = [0] * (n - len(other.coefficients)) + list(other.coefficients)
        return PolynomialZ([x - y for x, y in zip(a, b)])

    def __call__(self, x):
        acc = 0
        for c in self.coefficients:
            acc = acc * x + c
        return acc

    def __repr__(self):
        return f"PolynomialZ({list(self.coefficients)})"

    def __str__(self):
        return str(sympy.Poly(list(self.coefficients), sympy.Symbol("t")).as_expr())

    @classmethod
    def charpoly(cls, matrix) -> PolynomialZ:
        M = sympy.Matrix(matrix)
        return cls([int(c) for c in M.charpoly().all_coeffs()])


def _poly_rem(num: list[Fraction], den: list[Fraction]) -> list[Fraction]:
    num = list(num)
    while len(num) >= len(den) and any(num):
        if num[0] == 0:
            num.pop(0)
            continue
        q = num[0] / den[0]
        for i in range(len(den)):
            num[i] -= q * den[i]
        num.pop(0)
    while num and num[0] == 0:
        num.pop(0)
    return num


def _poly_derivative(p: list[Fraction]) -> list[Fraction]:
    n = len(p) - 1
    return [c * (n - i) for i, c in enumerate(p[:-1])]


def sturm_sequence(p: PolynomialZ) -> list[list[Fraction]]:
    if p.is_zero():
        raise InputError("zero polynomial")
    seq = [[Fraction(c) for c in p.coefficients]]
    seq.append(_poly_derivative(seq[0]))
    while seq[-1] and len(seq[-1]) > 1:
        r = _poly_rem(seq[-2], seq[-1])
        if not r:
            break
        seq.append([-c for c in r])
    return [s for s in seq if s]


def _sign_changes(values) -> int:
    signs = [v for v in values if v != 0]
    return sum(1 for x, y in zip(signs, signs[1:]) if (x > 0) != (y > 0))


def real_root_count(p: PolynomialZ) -> int:
    """Number of distinct real roots, by Sturm's theorem evaluated at -inf and +inf."""
    seq = sturm_sequence(p)
    at_pos = [s[0] for s in seq]
    at_neg = [s[0] * (-1) ** (len(s) - 1) for s in seq]
    return _sign_changes(at_neg) - _sign_changes(at_pos)


@lru_cache(maxsize=None)
def cyclotomic(n: int) -> PolynomialZ:
    return PolynomialZ(sympy.Poly(sympy.cyclotomic_poly(n, sympy.Symbol("t")), sympy.Symbol("t")).all_coeffs())


def cyclotomic_indices(max_degree: int) -> list[int]:
    """All m with phi(m) <= max_degree (phi(m) >= sqrt(m/2) bounds the search)."""
    return [m for m in range(1, 2 * max_degree * max_degree + 3) if sympy.totient(m) <= max_degree]


def is_cyclotomic_product(p: PolynomialZ) -> bool:
    if p.is_zero():
        raise InputError("zero polynomial")
    if not p.monic:
        return False
    t = sympy.Symbol("t")
    rest = sympy.Poly(list(p.coefficients), t)
    for m in sorted(cyclotomic_indices(p.degree), reverse=True):
        phi = sympy.Poly(list(cyclotomic(m).coefficients), t)
        while rest.degree() >= phi.degree():
            q, r = sympy.div(rest, phi)
            if not r.is_zero:
                break
            rest = q
    return rest.degree() == 0 and rest.LC() == 1
