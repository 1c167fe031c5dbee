"""Torus bundles over the circle: geometry, arithmeticity and affine representations."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import sympy

from .admissibility import ObstructionReport
from .errors import (
    InputError,
    InvalidMonodromyError,
    NoRepresentationError,
    NonIntegralMatrixError,
    UnsupportedError,
    WrongGeometryError,
)
from .numberfield import PolynomialZ, QuadElem, QuadField, basis_change, real_root_count, squarefree_decomposition


def _as_matrix(A) -> tuple[tuple[int, ...], ...]:
    try:
        rows = tuple(tuple(int(x) for x in row) for row in A)
    except (TypeError, ValueError) as exc:
        raise InputError(f"not an integer matrix: {A!r}") from exc
    if not rows or any(len(r) != len(rows) for r in rows):
        raise InputError("monodromy matrices must be square")
    if any(int(x) != x for row in A for x in row):
        raise InputError("monodromy entries must be integers")
    return rows


def _det(A) -> int:
    return int(sympy.Matrix(A).det())


def _mat_mul(A, B):
    n = len(A)
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n)) for i in range(n))


def _identity(n):
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


Word = tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class Relation:
    """``conjugator * generator * conjugator^-1 == word``."""

    conjugator: str
    generator: str
    word: Word


@dataclass(frozen=True)
class TorusBundle:
    monodromy: tuple
    fiber_names: tuple[str, ...] = ()
    base_names: tuple[str, ...] = ()
    relations: tuple[Relation, ...] = ()

    def __post_init__(self):
        mats = tuple(_as_matrix(A) for A in self.monodromy)
        if not mats:
            raise InputError("at least one monodromy matrix is required")
        n = len(mats[0])
        if any(len(A) != n for A in mats):
            raise InputError("monodromy matrices have different sizes")
        for A in mats:
            if abs(_det(A)) != 1:
                raise InvalidMonodromyError(f"det {_det(A)} is not +-1")
        for A in mats:
            for B in mats:
                if _mat_mul(A, B) != _mat_mul(B, A):
                    raise InvalidMonodromyError("monodromy matrices do not commute")
        object.__setattr__(self, "monodromy", mats)
        if not self.fiber_names:
            object.__setattr__(self, "fiber_names", tuple(f"a{i + 1}" for i in range(n)))
        if not self.base_names:
            names = ("b",) if len(mats) == 1 else tuple(f"b{k + 1}" for k in range(len(mats)))
            object.__setattr__(self, "base_names", names)
        if len(self.fiber_names) != n or len(self.base_names) != len(mats):
            raise InputError("generator names do not match the monodromy shape")
        if not self.relations:
            object.__setattr__(self, "relations", self._default_relations())
        else:
            self._check_relations()

    @property
    def n(self) -> int:
        return len(self.monodromy[0])

    @property
    def m(self) -> int:
        return len(self.monodromy)

    def _default_relations(self):
        rels = []
        for k, A in enumerate(self.monodromy):
            for j in range(self.n):
                word = tuple((self.fiber_names[i], A[i][j]) for i in range(self.n) if A[i][j])
                rels.append(Relation(self.base_names[k], self.fiber_names[j], word))
        return tuple(rels)

    def _check_relations(self):
        for rel in self.relations:
            if rel.conjugator not in self.base_names or rel.generator not in self.fiber_names:
                raise InputError(f"relation uses unknown generators: {rel}")
            k = self.base_names.index(rel.conjugator)
            j = self.fiber_names.index(rel.generator)
            exps = [0] * self.n
            for g, e in rel.word:
                if g not in self.fiber_names:
                    raise InputError(f"relation word leaves the fiber: {rel}")
                exps[self.fiber_names.index(g)] += e
            if exps != [self.monodromy[k][i][j] for i in range(self.n)]:
                raise InputError(f"relation {rel} disagrees with the monodromy matrix")

    @classmethod
    def from_matrix(cls, A) -> TorusBundle:
        return cls((A,))

    def relator_words(self) -> list[tuple[str, Word]]:
        """All relators (words equal to 1), labelled for diagnostics."""
        out = []
        f = self.fiber_names
        for i in range(self.n):
            for j in range(i + 1, self.n):
                out.append((f"[{f[i]},{f[j]}]", ((f[i], 1), (f[j], 1), (f[i], -1), (f[j], -1))))
        bn = self.base_names
        for i in range(self.m):
            for j in range(i + 1, self.m):
                out.append((f"[{bn[i]},{bn[j]}]", ((bn[i], 1), (bn[j], 1), (bn[i], -1), (bn[j], -1))))
        for rel in self.relations:
            lhs = ((rel.conjugator, 1), (rel.generator, 1), (rel.conjugator, -1))
            inv = tuple((g, -e) for g, e in reversed(rel.word))
            label = f"{rel.conjugator} {rel.generator} {rel.conjugator}^-1 = " + " ".join(
                f"{g}^{e}" for g, e in rel.word)
            out.append((label, lhs + inv))
        return out

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "monodromy": [[list(r) for r in A] for A in self.monodromy]}


@dataclass(frozen=True)
class GeometryClass:
    tag: str
    witness: dict = field(default_factory=dict)

    def validate(self, A) -> bool:
        A = _as_matrix(A)
        n = len(A)
        if self.tag == "Euclidean":
            P = _identity(n)
            for _ in range(self.witness["order"]):
                P = _mat_mul(P, A)
            return P == _identity(n)
        if self.tag == "Nil":
            P = _identity(n)
            for _ in range(self.witness["unipotent_power"]):
                P = _mat_mul(P, A)
            N = tuple(tuple(P[i][j] - (i == j) for j in range(n)) for i in range(n))
            return any(any(r) for r in N) and not any(any(r) for r in _mat_mul(N, N))
        if self.tag == "Sol":
            tr = A[0][0] + A[1][1]
            return squarefree_decomposition(tr * tr - 4)[1] == self.witness["d"]
        return False


def classify_geometry(A) -> GeometryClass:
    A = _as_matrix(A)
    if len(A) != 2:
        raise InputError("classify_geometry expects a 2x2 matrix")
    if _det(A) != 1:
        raise InvalidMonodromyError(f"det {_det(A)} != 1")
    tr = A[0][0] + A[1][1]
    I = _identity(2)
    if abs(tr) < 2:
        order, P = 1, A
        while P != I:
            P = _mat_mul(P, A)
            order += 1
        return GeometryClass("Euclidean", {"order": order})
    if tr == 2:
        if A == I:
            return GeometryClass("Euclidean", {"order": 1})
        return GeometryClass("Nil", {"unipotent_power": 1})
    if tr == -2:
        if A == ((-1, 0), (0, -1)):
            return GeometryClass("Euclidean", {"order": 2})
        return GeometryClass("Nil", {"unipotent_power": 2})
    _, d = squarefree_decomposition(tr * tr - 4)
    return GeometryClass("Sol", {"d": d, "trace": tr})


def holonomy_as_unit(A) -> tuple[int, QuadElem]:
    """Squarefree d and the eigenvalue of largest absolute value, as an element of Q(sqrt(d))."""
    g = classify_geometry(A)
    if g.tag != "Sol":
        raise WrongGeometryError(f"monodromy is {g.tag}, not Sol")
    A = _as_matrix(A)
    tr = A[0][0] + A[1][1]
    f, d = squarefree_decomposition(tr * tr - 4)
    sgn = 1 if tr > 0 else -1
    return d, QuadElem(Fraction(tr, 2), Fraction(sgn * f, 2), d)


def restrict_scalars_unit(d: int, beta: QuadElem, basis) -> list[list[int]]:
    """Integer matrix of multiplication by beta; column j holds the coordinates of beta*basis[j]."""
    F = QuadField(d)
    beta = F(0) + beta
    if abs(beta.norm()) != 1 or not beta.is_integral():
        raise InputError(f"{beta} is not a unit")
    images = [beta * (F(0) + b) for b in basis]
    C = basis_change(tuple(F(0) + b for b in basis), images)
    if any(c.denominator != 1 for row in C for c in row):
        raise NonIntegralMatrixError("module is not stable under multiplication by the unit")
    return [[int(c) for c in row] for row in C]


# -- affine representations ------------------------------------------------


@dataclass(frozen=True)
class AffineElem:
    """Element (alpha, beta) of k x| k^x acting by x -> beta*x + alpha."""

    alpha: QuadElem
    beta: QuadElem

    def __mul__(self, other: AffineElem) -> AffineElem:
        return AffineElem(self.alpha + self.beta * other.alpha, self.beta * other.beta)

    def inverse(self) -> AffineElem:
        inv = self.beta.inverse()
        return AffineElem(-self.alpha * inv, inv)

    def __pow__(self, n: int) -> AffineElem:
        base = self if n >= 0 else self.inverse()
        out = AffineElem(self.alpha * 0, self.alpha * 0 + 1)
        for _ in range(abs(n)):
            out = out * base
        return out

    def is_identity(self) -> bool:
        return self.alpha == 0 and self.beta == 1


@dataclass(frozen=True)
class AffineRep:
    d: int
    images: tuple[tuple[str, AffineElem], ...]

    def image(self, name: str) -> AffineElem:
        return dict(self.images)[name]

    def evaluate(self, word: Word) -> AffineElem:
        F = QuadField(self.d)
        out = AffineElem(F(0), F(1))
        table = dict(self.images)
        for g, e in word:
            out = out * (table[g] ** e)
        return out

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "images": {name: {"alpha": x.alpha.to_quadruple(), "beta": x.beta.to_quadruple()}
                       for name, x in self.images},
        }


def verify_affine_relations(bundle: TorusBundle, rep: AffineRep) -> tuple[bool, str | None]:
    for label, word in bundle.relator_words():
        if not rep.evaluate(word).is_identity():
            return False, label
    return True, None


def _nullspace(rows: list[list[QuadElem]], ncols: int) -> list[list[QuadElem]]:
    """Exact nullspace over a quadratic field by Gauss-Jordan elimination."""
    M = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = M[r][c].inverse()
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    zero, one = rows[0][0] * 0, rows[0][0] * 0 + 1
    basis = []
    for free in (c for c in range(ncols) if c not in pivots):
        v = [zero] * ncols
        v[free] = one
        for i, pc in enumerate(pivots):
            v[pc] = -M[i][free]
        basis.append(v)
    return basis


def _normalize_vector(v: list[QuadElem]) -> list[QuadElem]:
    """Make the first nonzero entry 1, then clear denominators with the least positive integer.

    The first entry ends up a positive rational integer, hence totally positive.
    """
    first = next(x for x in v if x != 0)
    v = [x / first for x in v]
    den = 1
    for x in v:
        for c in x.coords():
            den = math.lcm(den, c.denominator)
    v = [x * den for x in v]
    g = 0
    for x in v:
        for c in x.coords():
            g = math.gcd(g, int(c))
    return [x * Fraction(1, g) for x in v]


def solve_representation(bundle: TorusBundle, chi) -> AffineRep:
    """Faithful representation into k x| k^x from one unit per base generator."""
    if isinstance(chi, QuadElem):
        chi = [chi]
    chi = list(chi)
    if len(chi) != bundle.m:
        raise InputError("need one unit per base generator")
    d = next((c.d for c in chi if not c.is_rational()), None)
    if d is None:
        raise NoRepresentationError("non-faithful character: rational units have finite order")
    F = QuadField(d)
    chi = [F(0) + c for c in chi]
    for c in chi:
        if abs(c.norm()) != 1:
            raise InputError(f"{c} is not a unit")
        if c == 1 or c == -1:
            raise NoRepresentationError("non-faithful character: a base generator maps to a root of unity")
    n = bundle.n
    rows = []
    for A, beta in zip(bundle.monodromy, chi):
        # beta * alpha_j = sum_i A[i][j] * alpha_i
        for j in range(n):
            rows.append([F(A[i][j]) - (beta if i == j else F(0)) for i in range(n)])
    null = _nullspace(rows, n)
    if not null:
        raise NoRepresentationError("the relation system has only the zero solution")
    alphas = _normalize_vector(null[0])
    images = [(name, AffineElem(a, F(1))) for name, a in zip(bundle.fiber_names, alphas)]
    images += [(name, AffineElem(F(0), beta)) for name, beta in zip(bundle.base_names, chi)]
    rep = AffineRep(d, tuple(images))
    ok, bad = verify_affine_relations(bundle, rep)
    if not ok:
        raise NoRepresentationError(f"solution fails relation {bad}")
    return rep


def integralize(rep: AffineRep) -> AffineRep:
    """Conjugate by (0, lam) so every translation part lies in the ring of integers."""
    lam = 1
    for _, x in rep.images:
        for c in x.alpha.coords():
            lam = math.lcm(lam, c.denominator)
    return AffineRep(rep.d, tuple((name, AffineElem(x.alpha * lam, x.beta)) for name, x in rep.images))


def is_k_arithmetic(bundle: TorusBundle) -> ObstructionReport:
    if bundle.m != 1 or bundle.n not in (2, 3):
        raise UnsupportedError(f"(n, m) = ({bundle.n}, {bundle.m}) is not supported")
    A = bundle.monodromy[0]
    if bundle.n == 2:
        g = classify_geometry(A)
        if g.tag != "Sol":
            return ObstructionReport(
                "inadmissible",
                f"monodromy is not hyperbolic: {g.tag} geometry",
                {"geometry": g.tag, **g.witness},
            )
        d, beta = holonomy_as_unit(A)
        positive = beta.is_totally_positive()
        return ObstructionReport(
            "admissible",
            "monodromy is the restriction of scalars of a faithful unit character",
            {"d": d, "beta": str(beta), "totally_positive": positive,
             "unit_group": "totally positive units" if positive else "all units"},
        )
    cp = PolynomialZ.charpoly(A)
    t = sympy.Symbol("t")
    poly = sympy.Poly(list(cp.coefficients), t)
    irreducible = poly.is_irreducible
    roots = real_root_count(cp)
    disc = int(sympy.discriminant(poly))
    witness = {"charpoly": list(cp.coefficients), "irreducible": irreducible, "real_roots": roots,
               "discriminant": disc}
    if not irreducible:
        witness["factors"] = [[int(c) for c in f.all_coeffs()] for f, _ in poly.factor_list()[1]]
        return ObstructionReport("inadmissible", "characteristic polynomial is reducible", witness)
    if roots == 3:
        witness.update({"unit_rank": 2, "base_rank": 1,
                        "cyclic_galois": sympy.sqrt(disc).is_integer,
                        "representable_into_full_peripheral_group": True})
        return ObstructionReport(
            "inadmissible",
            "totally real cubic: unit rank 2 differs from base rank 1, so not a generalized Hilbert modular cusp",
            witness,
        )
    witness.update({"unit_rank": 1, "base_rank": 1})
    return ObstructionReport("undetermined", "mixed-signature cubic field (outside the supported cases)", witness)
