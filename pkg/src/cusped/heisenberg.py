"""Heisenberg-affine groups over Q(i) and Q(sqrt(-3)), Nil 3-manifold families and U(2,1) images.

A point of the Heisenberg group is ``(z, t)`` with ``z`` in the imaginary quadratic
field ``k = Q(sqrt(d))`` (``d`` = -1 or -3) and ``t`` real. Only ``t`` in
``Q*sqrt(|d|)`` ever occurs, so ``t`` is stored as the rational coefficient ``s``
with ``t = s*sqrt(|d|)``; then ``i*t = s*sqrt(d)`` lies in ``k``.

Group law: ``(z1,t1)(z2,t2) = (z1+z2, t1+t2+2 Im(z1*conj(z2)))``. The affine group
adds a rotation ``eta`` (root of unity) and a flag ``eps`` for complex conjugation,
which acts by ``(z, t) -> (conj z, -t)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np
import sympy

from .errors import ConstraintError, InconsistencyError, InputError
from .numberfield import QuadElem, gaussian_unit, roots_of_unity


# -- the group law on raw coordinates -------------------------------------
#
# A raw element is (x, y, s, eta, eps) meaning z = x + y*sqrt(d), t = s*sqrt(|d|).
# x, y, s may be Fractions or sympy expressions; eta is always an exact QuadElem.


def _rotate(eta: QuadElem, eps: int, x, y, d: int):
    """Apply z -> eta * conj^eps(z) to z = x + y sqrt(d)."""
    if eps:
        y = -y
    p, q = eta.a, eta.b
    return p * x + q * y * d, p * y + q * x


def _raw_mul(e1, e2, d: int):
    x1, y1, s1, eta1, eps1 = e1
    x2, y2, s2, eta2, eps2 = e2
    rx, ry = _rotate(eta1, eps1, x2, y2, d)
    # 2 Im(z1 * conj(w)) in units of sqrt(|d|) is 2*(y1*wx - x1*wy)
    s = s1 + (-s2 if eps1 else s2) + 2 * (y1 * rx - x1 * ry)
    eta2c = eta2.conj() if eps1 else eta2
    return (x1 + rx, y1 + ry, s, eta1 * eta2c, eps1 ^ eps2)


def _raw_inverse(e, d: int):
    x, y, s, eta, eps = e
    inv_eta = eta.conj() if eps == 0 else eta  # c^eps(eta^-1) for |eta| = 1
    rx, ry = _rotate(inv_eta, eps, -x, -y, d)
    return (rx, ry, s if eps else -s, inv_eta, eps)


def _raw_identity(d: int):
    return (Fraction(0), Fraction(0), Fraction(0), QuadElem(1, 0, d), 0)


def _raw_pow(e, n: int, d: int):
    base = e if n >= 0 else _raw_inverse(e, d)
    out = _raw_identity(d)
    for _ in range(abs(n)):
        out = _raw_mul(out, base, d)
    return out


def _raw_word(images: dict, word, d: int):
    out = _raw_identity(d)
    for g, n in word:
        out = _raw_mul(out, _raw_pow(images[g], n, d), d)
    return out


# -- exact elements ---------------------------------------------------------


@dataclass(frozen=True)
class HeisPoint:
    z: QuadElem
    t: Fraction  # coefficient of sqrt(|d|)

    @property
    def d(self) -> int:
        return self.z.d

    def __mul__(self, other: HeisPoint) -> HeisPoint:
        u = UnitaryAffine(self.z, self.t) * UnitaryAffine(other.z, other.t)
        return u.point

    def inverse(self) -> HeisPoint:
        return HeisPoint(-self.z, -self.t)

    def it(self) -> QuadElem:
        """i*t as an element of k."""
        return QuadElem(0, self.t, self.d)


class UnitaryAffine:
    """Element (z, t, eta, eps) of the Heisenberg group extended by rotations and conjugation."""

    __slots__ = ("z", "t", "eta", "eps")

    def __init__(self, z: QuadElem, t=0, eta: QuadElem | None = None, eps: int = 0):
        d = z.d
        if d not in (-1, -3):
            raise InputError("Heisenberg coordinates must lie in Q(i) or Q(sqrt(-3))")
        eta = QuadElem(1, 0, d) if eta is None else QuadElem(0, 0, d) + eta
        if eta.norm() != 1 or not eta.is_integral():
            raise InputError(f"{eta} is not a root of unity")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "t", Fraction(t))
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "eps", int(eps) & 1)

    def __setattr__(self, name, value):
        raise AttributeError("UnitaryAffine is immutable")

    @property
    def d(self) -> int:
        return self.z.d

    @property
    def point(self) -> HeisPoint:
        return HeisPoint(self.z, self.t)

    @classmethod
    def identity(cls, d: int) -> UnitaryAffine:
        return cls(QuadElem(0, 0, d))

    def _raw(self):
        return (self.z.a, self.z.b, self.t, self.eta, self.eps)

    @classmethod
    def _from_raw(cls, raw, d: int) -> UnitaryAffine:
        x, y, s, eta, eps = raw
        return cls(QuadElem(x, y, d), s, eta, eps)

    def __mul__(self, other: UnitaryAffine) -> UnitaryAffine:
        if not isinstance(other, UnitaryAffine):
            return NotImplemented
        if other.d != self.d:
            raise TypeError("field mismatch in Heisenberg product")
        return self._from_raw(_raw_mul(self._raw(), other._raw(), self.d), self.d)

    def inverse(self) -> UnitaryAffine:
        return self._from_raw(_raw_inverse(self._raw(), self.d), self.d)

    def __pow__(self, n: int) -> UnitaryAffine:
        return self._from_raw(_raw_pow(self._raw(), n, self.d), self.d)

    def __eq__(self, other):
        if not isinstance(other, UnitaryAffine):
            return NotImplemented
        return (self.d, self.z, self.t, self.eta, self.eps) == (other.d, other.z, other.t, other.eta, other.eps)

    def __hash__(self):
        return hash((self.d, self.z, self.t, self.eta, self.eps))

    def is_identity(self) -> bool:
        return self.z == 0 and self.t == 0 and self.eta == 1 and self.eps == 0

    def is_translation(self) -> bool:
        return self.eta == 1 and self.eps == 0

    def __repr__(self):
        return f"UnitaryAffine(z={self.z}, t={format_t(self.t, self.d)}, eta={self.eta}, eps={self.eps})"

    def to_json(self) -> dict:
        return {"z": self.z.to_json(), "t": [self.t.numerator, self.t.denominator],
                "t_unit": "1" if self.d == -1 else f"sqrt({-self.d})", "eta": self.eta.to_json(), "eps": self.eps}


def format_t(t: Fraction, d: int) -> str:
    return str(t) if d == -1 or t == 0 else f"{t}*sqrt({-d})"


def heis_mul(x: UnitaryAffine, y: UnitaryAffine) -> UnitaryAffine:
    return x * y


def commutator(x: UnitaryAffine, y: UnitaryAffine) -> UnitaryAffine:
    """[x, y] = x y x^-1 y^-1."""
    return x * y * x.inverse() * y.inverse()


def dilate(x: UnitaryAffine, lam) -> UnitaryAffine:
    """Conjugate by the dilation (z, t) -> (lam z, lam^2 t)."""
    lam = Fraction(lam)
    if lam == 0:
        raise InputError("dilation factor must be nonzero")
    return UnitaryAffine(x.z * lam, x.t * lam * lam, x.eta, x.eps)


# -- matrices over k --------------------------------------------------------


class Matrix3k:
    """3x3 matrix over k, optionally followed by complex conjugation (the iota flag)."""

    __slots__ = ("rows", "iota")

    def __init__(self, rows, iota: int = 0):
        rows = tuple(tuple(r) for r in rows)
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise InputError("Matrix3k needs 3x3 entries")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "iota", int(iota) & 1)

    def __setattr__(self, name, value):
        raise AttributeError("Matrix3k is immutable")

    @property
    def d(self) -> int:
        return next(x.d for r in self.rows for x in r if isinstance(x, QuadElem))

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    @staticmethod
    def _conj_rows(rows):
        return tuple(tuple(x.conj() for x in r) for r in rows)

    def __mul__(self, other: Matrix3k) -> Matrix3k:
        B = self._conj_rows(other.rows) if self.iota else other.rows
        A = self.rows
        rows = [[sum((A[i][k] * B[k][j] for k in range(3)), A[0][0] * 0) for j in range(3)] for i in range(3)]
        return Matrix3k(rows, self.iota ^ other.iota)

    def adjoint(self) -> tuple:
        return tuple(tuple(self.rows[j][i].conj() for j in range(3)) for i in range(3))

    def det(self) -> QuadElem:
        m = self.rows
        return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))

    def __eq__(self, other):
        return isinstance(other, Matrix3k) and self.rows == other.rows and self.iota == other.iota

    def __hash__(self):
        return hash((self.rows, self.iota))

    def is_scalar(self) -> bool:
        m = self.rows
        return all(m[i][j] == 0 for i in range(3) for j in range(3) if i != j) and m[0][0] == m[1][1] == m[2][2]

    def preserves(self, H) -> bool:
        """X* H X == H, or == conj(H) when the matrix carries the conjugation flag."""
        lhs = _mat(_mat(self.adjoint(), H), self.rows)
        target = tuple(tuple(x.conj() for x in r) for r in H) if self.iota else tuple(tuple(r) for r in H)
        return lhs == target

    def to_json(self) -> dict:
        return {
            "entries": [[[[x.a.numerator, x.a.denominator], [x.b.numerator, x.b.denominator]] for x in r]
                        for r in self.rows],
            "basis": ["1", f"sqrt({self.d})"],
            "iota": self.iota,
        }

    def __repr__(self):
        body = "; ".join(", ".join(str(x) for x in r) for r in self.rows)
        return f"Matrix3k([{body}]{', iota' if self.iota else ''})"


def _mat(A, B):
    return tuple(tuple(sum((A[i][k] * B[k][j] for k in range(3)), A[0][0] * 0) for j in range(3)) for i in range(3))


def psi_embed(x: UnitaryAffine) -> Matrix3k:
    """Image in U(2,1): the translation block times diag(eta, 1, 1), then conjugation if eps = 1."""
    d = x.d
    xi = x.z
    w = (QuadElem(xi.norm(), 0, d) - QuadElem(0, x.t, d)) * Fraction(1, 2)
    one, zero = QuadElem(1, 0, d), QuadElem(0, 0, d)
    rows = (
        (one, xi, xi),
        (-xi.conj(), one - w, -w),
        (xi.conj(), w, one + w),
    )
    U = ((x.eta, zero, zero), (zero, one, zero), (zero, zero, one))
    return Matrix3k(_mat(rows, U), x.eps)


def invariant_hermitian_form(matrices: Iterable[Matrix3k]):
    """Common invariant Hermitian form, normalised so that H[0][0] = 1.

    Unknowns are the 9 real coordinates of a Hermitian H; each matrix contributes
    the linear conditions X* H X = H (or conj(H) for conjugate-linear maps).
    """
    mats = list(matrices)
    if not mats or all(m.is_scalar() and not m.iota for m in mats):
        raise InconsistencyError("need at least one non-scalar matrix to pin down a form")
    d = mats[0].d
    # basis of Hermitian matrices over Q with coordinates in {1, sqrt(d)}
    basis = []
    for i in range(3):
        E = [[QuadElem(0, 0, d)] * 3 for _ in range(3)]
        E[i][i] = QuadElem(1, 0, d)
        basis.append(E)
    for i, j in ((0, 1), (0, 2), (1, 2)):
        for v in (QuadElem(1, 0, d), QuadElem(0, 1, d)):
            E = [[QuadElem(0, 0, d)] * 3 for _ in range(3)]
            E[i][j] = v
            E[j][i] = v.conj()
            basis.append(E)
    rows = []
    for X in mats:
        cols = []
        for E in basis:
            lhs = _mat(_mat(X.adjoint(), E), X.rows)
            target = [[e.conj() for e in r] for r in E] if X.iota else E
            diff = [lhs[i][j] - target[i][j] for i in range(3) for j in range(3)]
            cols.append([c for q in diff for c in (q.a, q.b)])
        rows.extend([list(r) for r in zip(*cols)])
    null = sympy.Matrix(rows).nullspace()
    if len(null) == 2:
        # A parabolic group also fixes the rank-one form built from its null
        # vector; the gauge H22 + H33 = 0 picks one member of the pencil.
        rows.append([0, 1, 1] + [0] * 6)
        null = sympy.Matrix(rows).nullspace()
    if len(null) != 1:
        if not null:
            raise InconsistencyError("no common invariant Hermitian form")
        raise InconsistencyError(f"invariant form is underdetermined ({len(null)} dimensions)")
    v = [Fraction(int(c.p), int(c.q)) for c in null[0]]
    H = [[QuadElem(0, 0, d)] * 3 for _ in range(3)]
    for coef, E in zip(v, basis):
        H = [[H[i][j] + E[i][j] * coef for j in range(3)] for i in range(3)]
    h00 = H[0][0]
    if h00 == 0:
        raise InconsistencyError("invariant form has H[0][0] = 0; cannot normalise")
    H = tuple(tuple(x / h00 for x in r) for r in H)
    return H


def signature(H) -> tuple[int, int]:
    """(positive, negative) inertia of a Hermitian matrix over k."""
    A = np.array([[complex(x.embed(0)) for x in r] for r in H])
    ev = np.linalg.eigvalsh(A)
    return int((ev > 1e-9).sum()), int((ev < -1e-9).sum())


# -- Nil 3-manifold families --------------------------------------------------


def _comm(x, y):
    return ((x, 1), (y, 1), (x, -1), (y, -1))


def _w(*parts):
    """Word from ('a', 1), ('c', -k) pairs, dropping zero exponents."""
    return tuple((g, n) for g, n in parts if n != 0)


_FIELD = {1: -1, 2: -1, 3: -1, 4: -1, 5: -1, 6: -3, 7: -3}


@dataclass(frozen=True)
class NilFamily:
    family: int
    k: int
    k1: int | None = None
    k2: int | None = None
    p: int | None = None

    def __post_init__(self):
        f, k, k1, k2, p = self.family, self.k, self.k1, self.k2, self.p
        if f not in range(1, 8):
            raise ConstraintError(f"family must be 1..7, got {f}")
        if not isinstance(k, int) or k < 1:
            raise ConstraintError("k must be a positive integer")
        if f in (1, 3, 4):
            ok = k1 is None and k2 is None and p is None
        elif f == 2:
            ok = k % 2 == 0 and k1 is None and k2 is None and p is None
        elif f == 5:
            ok = k1 is None and k2 is None and ((k % 2 == 0 and p == 1) or (k % 4 == 0 and p == 3))
        elif f == 6:
            ok = p is None and (
                (k % 3 == 0 and k1 == 0 and k2 in (1, 2)) or (k % 3 != 0 and k1 == 1 and k2 == 1))
        else:
            ok = p is None and k2 is None and (
                (k % 6 == 0 and k1 in (1, 5)) or (k % 6 == 4 and k1 == 1) or (k % 6 == 2 and k1 == 5))
        if not ok:
            raise ConstraintError(f"parameters violate the constraints of family {f}: {self}")

    @property
    def d(self) -> int:
        return _FIELD[self.family]

    @property
    def generators(self) -> tuple[str, ...]:
        return {4: ("a", "b", "c", "alpha", "beta")}.get(
            self.family, ("a", "b", "c") if self.family == 1 else ("a", "b", "c", "alpha"))

    @property
    def center_power(self) -> int:
        """K with [b, a] = c^K."""
        return 2 * self.k if self.family in (3, 4) else self.k

    @property
    def dilation(self) -> int:
        """Scale that makes every image integral; fixed per family as a multiple of k."""
        return {1: 2, 2: 2, 3: 4, 4: 4, 5: 2, 6: 24, 7: 12}[self.family] * self.k

    def relations(self) -> list[tuple[str, tuple, tuple]]:
        """(label, lhs, rhs) triples; each relation reads lhs == rhs."""
        f, k, K = self.family, self.k, self.center_power
        R = [("[b,a]=c^K", _comm("b", "a"), _w(("c", K))),
             ("[c,a]=1", _comm("c", "a"), ()),
             ("[c,b]=1", _comm("c", "b"), ())]
        if f == 2:
            R += [("[alpha,c]=1", _comm("alpha", "c"), ()),
                  ("alpha a = a^-1 alpha", _w(("alpha", 1), ("a", 1)), _w(("a", -1), ("alpha", 1))),
                  ("alpha b = b^-1 alpha", _w(("alpha", 1), ("b", 1)), _w(("b", -1), ("alpha", 1))),
                  ("alpha^2 = c", _w(("alpha", 2)), _w(("c", 1)))]
        elif f == 3:
            R += [("[a,alpha]=1", _comm("a", "alpha"), ()),
                  ("alpha c = c^-1 alpha", _w(("alpha", 1), ("c", 1)), _w(("c", -1), ("alpha", 1))),
                  ("alpha b = b^-1 alpha c^-k", _w(("alpha", 1), ("b", 1)),
                   _w(("b", -1), ("alpha", 1), ("c", -k))),
                  ("alpha^2 = a", _w(("alpha", 2)), _w(("a", 1)))]
        elif f == 4:
            R += [("[c,alpha]=1", _comm("c", "alpha"), ()),
                  ("[a,beta]=1", _comm("a", "beta"), ()),
                  ("beta c = c^-1 beta", _w(("beta", 1), ("c", 1)), _w(("c", -1), ("beta", 1))),
                  ("alpha a = a^-1 alpha c^k", _w(("alpha", 1), ("a", 1)), _w(("a", -1), ("alpha", 1), ("c", k))),
                  ("alpha b = b^-1 alpha c^-k", _w(("alpha", 1), ("b", 1)),
                   _w(("b", -1), ("alpha", 1), ("c", -k))),
                  ("alpha^2 = c", _w(("alpha", 2)), _w(("c", 1))),
                  ("beta^2 = a", _w(("beta", 2)), _w(("a", 1))),
                  ("beta b = b^-1 beta c^-k", _w(("beta", 1), ("b", 1)), _w(("b", -1), ("beta", 1), ("c", -k))),
                  ("alpha beta = a^-1 b^-1 beta alpha c^(-k-1)", _w(("alpha", 1), ("beta", 1)),
                   _w(("a", -1), ("b", -1), ("beta", 1), ("alpha", 1), ("c", -k - 1)))]
        elif f == 5:
            R += [("[c,alpha]=1", _comm("c", "alpha"), ()),
                  ("alpha a = b alpha", _w(("alpha", 1), ("a", 1)), _w(("b", 1), ("alpha", 1))),
                  ("alpha b = a^-1 alpha", _w(("alpha", 1), ("b", 1)), _w(("a", -1), ("alpha", 1))),
                  ("alpha^4 = c^p", _w(("alpha", 4)), _w(("c", self.p)))]
        elif f == 6:
            R += [("[c,alpha]=1", _comm("c", "alpha"), ()),
                  ("alpha a = b alpha c^k1", _w(("alpha", 1), ("a", 1)), _w(("b", 1), ("alpha", 1), ("c", self.k1))),
                  ("alpha b = a^-1 b^-1 alpha", _w(("alpha", 1), ("b", 1)), _w(("a", -1), ("b", -1), ("alpha", 1))),
                  ("alpha^3 = c^k2", _w(("alpha", 3)), _w(("c", self.k2)))]
        elif f == 7:
            R += [("[c,alpha]=1", _comm("c", "alpha"), ()),
                  ("alpha a = a b alpha", _w(("alpha", 1), ("a", 1)), _w(("a", 1), ("b", 1), ("alpha", 1))),
                  ("alpha b = a^-1 alpha", _w(("alpha", 1), ("b", 1)), _w(("a", -1), ("alpha", 1))),
                  ("alpha^6 = c^k1", _w(("alpha", 6)), _w(("c", self.k1)))]
        return R


def _fitting_images(fam: NilFamily) -> dict:
    d = fam.d
    zeta = gaussian_unit(d)
    a = UnitaryAffine(QuadElem(1, 0, d))
    b = UnitaryAffine(zeta)
    ba = commutator(b, a)
    c = UnitaryAffine(QuadElem(0, 0, d), ba.t / fam.center_power)
    return {"a": a, "b": b, "c": c}


def _relation_residual(images: dict, lhs, rhs, d: int):
    left = _raw_word(images, lhs, d)
    right = _raw_word(images, rhs, d)
    return _raw_mul(left, _raw_inverse(right, d), d)


def _solve_extra(fam: NilFamily, fitting: dict) -> tuple[dict, list]:
    """Solve the relation equations for the non-Fitting generators.

    Every rotation/conjugation choice is tried; for each, the translation
    coordinates are unknowns of a polynomial system handled by sympy.
    """
    d = fam.d
    extra = [g for g in fam.generators if g not in fitting]
    raw_fit = {g: fitting[g]._raw() for g in fitting}
    rotations = [(eta, eps) for eps in (0, 1) for eta in roots_of_unity(d)]
    found = []
    for choice in itertools.product(rotations, repeat=len(extra)):
        syms = {}
        images = dict(raw_fit)
        for g, (eta, eps) in zip(extra, choice):
            x, y, s = sympy.symbols(f"x_{g} y_{g} s_{g}")
            syms[g] = (x, y, s)
            images[g] = (x, y, s, eta, eps)
        eqs, consistent = [], True
        for _, lhs, rhs in fam.relations():
            rx, ry, rs, reta, reps = _relation_residual(images, lhs, rhs, d)
            if reta != 1 or reps != 0:
                consistent = False
                break
            eqs.extend(sympy.expand(e) for e in (rx, ry, rs))
        if not consistent:
            continue
        eqs = [e for e in eqs if e != 0]
        unknowns = [v for g in extra for v in syms[g]]
        linear = [e for e in eqs if sympy.Poly(e, *unknowns).total_degree() <= 1]
        if linear and not sympy.linsolve(linear, unknowns):
            continue
        sols = sympy.solve(eqs, unknowns, dict=True) if eqs else [{}]
        for sol in sols:
            values = {}
            ok = True
            for v in unknowns:
                val = sympy.sympify(sol.get(v, v)).subs({u: 0 for u in unknowns})
                if not val.is_rational:
                    ok = False
                    break
                values[v] = Fraction(int(val.p), int(val.q))
            if not ok:
                continue
            free = [str(v) for v in unknowns if v not in sol]
            imgs = {}
            for g, (eta, eps) in zip(extra, choice):
                x, y, s = syms[g]
                imgs[g] = UnitaryAffine(QuadElem(values[x], values[y], d), values[s], eta, eps)
            found.append((imgs, free))
    if not found:
        raise InconsistencyError(f"relation equations of family {fam.family} have no solution")
    return found[0][0], found


@dataclass(frozen=True)
class NilSolution:
    family: NilFamily
    images: dict
    undilated: dict
    free_parameters: tuple[str, ...]
    solution_count: int

    def ordered(self) -> list[UnitaryAffine]:
        return [self.images[g] for g in self.family.generators]


def solve_nil_rep_detailed(fam: NilFamily) -> NilSolution:
    fitting = _fitting_images(fam)
    extra, found = _solve_extra(fam, fitting)
    raw = {**fitting, **extra}
    lam = fam.dilation
    images = {g: dilate(x, lam) for g, x in raw.items()}
    for g, x in images.items():
        if not psi_is_integral(x):
            raise InconsistencyError(f"dilated image of {g} is not integral")
    ok, bad = verify_relations(images, fam.relations(), d=fam.d)
    if not ok:
        raise InconsistencyError(f"solution fails relation {bad}")
    return NilSolution(fam, images, raw, tuple(found[0][1]), len(found))


def solve_nil_rep(fam: NilFamily) -> list[UnitaryAffine]:
    """Integral images of the generators (a, b, c, then alpha and beta where present)."""
    return solve_nil_rep_detailed(fam).ordered()


def psi_is_integral(x: UnitaryAffine) -> bool:
    M = psi_embed(x)
    return all(e.is_integral() for r in M.rows for e in r)


def _z_independent(z1: QuadElem, z2: QuadElem) -> bool:
    return z1.a * z2.b - z1.b * z2.a != 0


def _in_fitting_lattice(x: UnitaryAffine, a: UnitaryAffine, b: UnitaryAffine, c: UnitaryAffine) -> bool:
    """Whether a translation lies in the subgroup generated by the images of a, b, c."""
    det = a.z.a * b.z.b - a.z.b * b.z.a
    i = (x.z.a * b.z.b - x.z.b * b.z.a) / det
    j = (a.z.a * x.z.b - a.z.b * x.z.a) / det
    if i.denominator != 1 or j.denominator != 1:
        return False
    base = (a ** int(i)) * (b ** int(j))
    rest = base.inverse() * x
    return rest.z == 0 and c.t != 0 and (rest.t / c.t).denominator == 1


def verify_relations(images: dict, presentation, d: int | None = None) -> tuple[bool, str | None]:
    """Check every relation exactly, then the injectivity conditions on a, b, c and the extra generators.

    Returns ``(True, None)`` or ``(False, label)`` naming the first failing check.
    """
    if d is None:
        d = next(iter(images.values())).d
    names = {g for _, lhs, rhs in presentation for g, _ in lhs + rhs}
    if not names <= set(images):
        raise InputError(f"missing images for generators {sorted(names - set(images))}")
    raw = {g: x._raw() for g, x in images.items()}
    for label, lhs, rhs in presentation:
        res = _relation_residual(raw, lhs, rhs, d)
        if not UnitaryAffine._from_raw(res, d).is_identity():
            return False, label
    a, b, c = images["a"], images["b"], images["c"]
    if not (a.is_translation() and b.is_translation() and _z_independent(a.z, b.z)):
        return False, "z-parts of a and b are not Z-independent translations"
    if not c.is_translation() or c.z != 0 or c.t == 0:
        return False, "c is not a nontrivial central element"
    for g in images:
        if g in ("a", "b", "c"):
            continue
        x = images[g]
        power, order = x, 1
        while not power.is_translation():
            power = power * x
            order += 1
            if order > 12:
                return False, f"{g} has infinite rotational order"
        if order == 1:
            return False, f"{g} is a translation"
        if not _in_fitting_lattice(power, a, b, c):
            return False, f"{g}^{order} is not in the image of <a,b,c>"
    return True, None


def matrix_mismatches(computed: Matrix3k, reference: Matrix3k) -> list[tuple[int, int]]:
    out = [(i, j) for i in range(3) for j in range(3) if computed[i, j] != reference[i, j]]
    if computed.iota != reference.iota:
        out.append((-1, -1))
    return out


def psi_preimage(M: Matrix3k) -> UnitaryAffine | None:
    """Read (z, t, eta, eps) back from a matrix; None when M is not in the image of psi_embed."""
    rows = M.rows
    if any(x is None for r in rows for x in r):
        return None
    d = M.d
    eta, xi, w = rows[0][0], rows[0][1], -rows[1][2]
    it = QuadElem(xi.norm(), 0, d) - w * 2
    if it.a != 0 or eta.norm() != 1 or not eta.is_integral():
        return None
    x = UnitaryAffine(xi, it.b, eta, M.iota)
    return x if psi_embed(x) == M else None
