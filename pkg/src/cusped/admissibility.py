"""Arithmetic admissibility tests for finite holonomy data."""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import sympy

from .errors import GroupClosureError, InputError, UnsupportedError
from .numberfield import PolynomialZ, QuadElem, cyclotomic, cyclotomic_indices, squarefree_decomposition

VERDICTS = ("admissible", "inadmissible", "undetermined")


@dataclass(frozen=True)
class ObstructionReport:
    verdict: str
    criterion: str
    witness: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == "inadmissible" and not self.witness:
            raise ValueError("an inadmissible verdict needs a witness")

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "criterion": self.criterion, "witness": self.witness}


def _require_odd_prime(p: int) -> None:
    if not isinstance(p, int) or p < 3 or not sympy.isprime(p):
        raise InputError(f"{p} is not an odd prime")


def imaginary_quadratic_subfield(p: int) -> int | None:
    """Discriminant of the imaginary quadratic subfield of Q(zeta_p), if there is one."""
    _require_odd_prime(p)
    return -p if p % 4 == 3 else None


def gauss_sum_squared(p: int) -> complex:
    """(sum_a (a|p) zeta_p^a)^2 in floating point."""
    _require_odd_prime(p)
    z = cmath.exp(2j * math.pi / p)
    g = sum(int(sympy.legendre_symbol(a, p)) * z ** a for a in range(1, p))
    return g * g


def prime_holonomy_check(p: int, n: int) -> ObstructionReport:
    """Order-p holonomy acting on C^(n-1) through a sum of (p-1)/2 characters."""
    _require_odd_prime(p)
    if 2 * (n - 1) != p - 1:
        raise UnsupportedError(f"dimension constraint 2(n-1) = p-1 fails for p={p}, n={n}")
    d = imaginary_quadratic_subfield(p)
    if d is None:
        return ObstructionReport(
            "inadmissible",
            "prime holonomy parity: p = 1 mod 4, so Q(zeta_p) has no imaginary quadratic subfield",
            {"p": p, "n": n, "p_mod_4": 1, "quadratic_subfield": p},
        )
    return ObstructionReport(
        "admissible",
        "prime holonomy parity: p = 3 mod 4",
        {"p": p, "n": n, "p_mod_4": 3, "field_d": d},
    )


# -- invariant forms -------------------------------------------------------


def _conj(x):
    return x.conj() if isinstance(x, QuadElem) else x


def _matmul(A, B):
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), 0 * A[0][0]) for j in range(len(B[0]))]
            for i in range(len(A))]


def _adjoint(A):
    return [[_conj(A[j][i]) for j in range(len(A))] for i in range(len(A[0]))]


def _key(A):
    return tuple(tuple(row) for row in A)


def _is_positive_definite(B) -> bool:
    n = len(B)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            x = B[i][j]
            if isinstance(x, QuadElem):
                if x.d > 0 and x.b != 0:
                    return False
                row.append(sympy.Rational(x.a.numerator, x.a.denominator)
                           + sympy.Rational(x.b.numerator, x.b.denominator) * sympy.sqrt(x.d))
            else:
                row.append(sympy.Rational(Fraction(x).numerator, Fraction(x).denominator))
        rows.append(row)
    M = sympy.Matrix(rows)
    if M != M.H:
        return False
    return all(sympy.simplify(M[:k, :k].det()) > 0 for k in range(1, n + 1))


def theta_average(form, group):
    """(1/|G|) sum of g* B g over a finite matrix group G, computed exactly."""
    elems = {_key(g): g for g in group}
    for g, h in itertools.product(list(elems.values()), repeat=2):
        if _key(_matmul(g, h)) not in elems:
            raise GroupClosureError("matrix set is not closed under multiplication")
    if not _is_positive_definite(form):
        raise InputError("form must be positive definite")
    n = len(form)
    total = [[0 * form[0][0] for _ in range(n)] for _ in range(n)]
    for g in elems.values():
        term = _matmul(_matmul(_adjoint(g), form), g)
        total = [[total[i][j] + term[i][j] for j in range(n)] for i in range(n)]
    size = len(elems)
    return [[total[i][j] * Fraction(1, size) for j in range(n)] for i in range(n)]


def is_invariant(form, group) -> bool:
    return all(_key(_matmul(_matmul(_adjoint(g), form), g)) == _key(form) for g in group)


# -- central products and quaternion orders -------------------------------


def central_product(meta1, meta2) -> ObstructionReport:
    """Each factor is ``(d, admissible, kind)`` with kind "complex" or "anticomplex"."""
    (d1, ok1, *kind1), (d2, ok2, *kind2) = meta1, meta2
    kind1 = kind1[0] if kind1 else "complex"
    kind2 = kind2[0] if kind2 else "complex"
    if kind1 != kind2:
        raise UnsupportedError("central products need both factors complex or both anticomplex")
    for d in (d1, d2):
        if d >= 0:
            raise InputError(f"d={d} is not imaginary quadratic")
    _, s1 = squarefree_decomposition(d1)
    _, s2 = squarefree_decomposition(d2)
    degree = 2 if s1 == s2 else 4
    witness = {"d1": s1, "d2": s2, "compositum_degree": degree}
    if not (ok1 and ok2):
        bad = [i + 1 for i, ok in enumerate((ok1, ok2)) if not ok]
        witness["inadmissible_factors"] = bad
        return ObstructionReport("inadmissible", "a factor is arithmetically inadmissible", witness)
    if degree == 4:
        return ObstructionReport(
            "inadmissible",
            "fields of definition differ: the compositum has degree 4, so no common imaginary quadratic field",
            witness,
        )
    witness["field_d"] = s1
    return ObstructionReport("admissible", "both factors arithmetic over the same imaginary quadratic field", witness)


def quaternion_order_obstruction(q: int) -> ObstructionReport:
    """Necessary degree condition for an element of order q in a rational quaternion algebra."""
    if not isinstance(q, int) or q < 1:
        raise InputError("q must be a positive integer")
    phi = int(sympy.totient(q))
    if phi > 2:
        return ObstructionReport(
            "inadmissible",
            "cyclotomic degree exceeds 2: Q(zeta_q) cannot embed in a rational quaternion algebra",
            {"q": q, "phi": phi, "result": "obstructed"},
        )
    return ObstructionReport(
        "undetermined",
        "degree test passed (necessary condition only, not an embedding decision)",
        {"q": q, "phi": phi, "result": "degree test passed"},
    )


# -- torsion-free congruence levels ---------------------------------------


def cyclotomic_products(n: int):
    """Every degree-n product of cyclotomic polynomials, with its index multiset."""
    idx = [m for m in cyclotomic_indices(n)]
    degs = {m: cyclotomic(m).degree for m in idx}

    def rec(start, remaining):
        if remaining == 0:
            yield ()
            return
        for pos in range(start, len(idx)):
            m = idx[pos]
            if degs[m] <= remaining:
                for rest in rec(pos, remaining - degs[m]):
                    yield (m,) + rest

    for combo in rec(0, n):
        poly = PolynomialZ([1])
        for m in combo:
            poly = poly * cyclotomic(m)
        yield combo, poly


def torsion_free_congruence(n: int) -> int:
    """Smallest prime q > n such that reduction mod q keeps every non-unipotent torsion class apart."""
    if not isinstance(n, int) or not 2 <= n <= 6:
        raise UnsupportedError("torsion_free_congruence supports 2 <= n <= 6")
    unipotent = PolynomialZ([1])
    for _ in range(n):
        unipotent = unipotent * PolynomialZ([1, -1])
    excluded: set[int] = set()
    for combo, poly in cyclotomic_products(n):
        if set(combo) == {1}:
            continue
        g = 0
        for c in (poly - unipotent).coefficients:
            g = math.gcd(g, c)
        excluded.update(sympy.primefactors(g))
    q = sympy.nextprime(n)
    while q in excluded:
        q = sympy.nextprime(q)
    return q


# -- trace fields ----------------------------------------------------------


@dataclass(frozen=True)
class HolonomyData:
    q: int
    exponents: tuple[int, ...]

    def __post_init__(self):
        if self.q < 1:
            raise InputError("group order must be positive")
        g = self.q
        for e in self.exponents:
            g = math.gcd(g, e)
        if not self.exponents or g != 1:
            raise InputError("exponents do not define a faithful character sum")

    @property
    def degree(self) -> int:
        return len(self.exponents)

    @property
    def field_candidate(self) -> int | None:
        info = holonomy_trace_field(self)
        return info.get("d") if info["kind"] == "quadratic" else None


def _trace_residue(q: int, exponents, a: int):
    t = sympy.Symbol("x")
    expr = sum(t ** ((a * e) % q) for e in exponents)
    return sympy.rem(sympy.Poly(expr, t), sympy.Poly(sympy.cyclotomic_poly(q, t), t))


def holonomy_trace_field(h: HolonomyData) -> dict:
    """Field generated by sum zeta_q^(n_j), via its stabiliser in (Z/q)^x."""
    q, ex = h.q, h.exponents
    units = [a for a in range(1, q + 1) if math.gcd(a, q) == 1] if q > 1 else [1]
    base = _trace_residue(q, ex, 1)
    stab = [a for a in units if _trace_residue(q, ex, a) == base]
    degree = len(units) // len(stab)
    out = {"q": q, "exponents": list(ex), "degree": degree, "stabilizer": stab}
    if degree == 1:
        out["kind"] = "rational"
        return out
    if degree == 2:
        other = next(a for a in units if a not in stab)
        diff = base - _trace_residue(q, ex, other)
        sq = sympy.rem(diff * diff, sympy.Poly(sympy.cyclotomic_poly(q, sympy.Symbol("x")), sympy.Symbol("x")))
        value = sympy.Rational(sq.as_expr())
        num = int(value.p) * int(value.q)
        _, d = squarefree_decomposition(num)
        out["kind"] = "quadratic"
        out["d"] = d
        return out
    out["kind"] = "higher"
    return out
