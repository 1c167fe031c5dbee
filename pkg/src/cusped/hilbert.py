"""Cusp data of Hilbert modular surfaces: peripheral lattices, L-sums and the delta invariant.

A cusp is described by a rank-2 module ``M`` in a real quadratic field together
with a totally positive unit ``eps`` generating the diagonal part ``V``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InputError, InvalidFieldError, NonIntegralMatrixError, SingularPairingError
from .numberfield import (
    QuadElem,
    basis_change,
    class_number,
    dual_lattice,
    is_squarefree,
    totally_positive_unit,
    trace_gram,
)

# hard cap on enumerated lattice points; the CLI can lower it via the environment
MAX_POINTS = 50_000_000
_CHUNK = 1_000_000


def _as_elem(x, d: int) -> QuadElem:
    return QuadElem(0, 0, d) + x


@dataclass(frozen=True)
class PeripheralLattice:
    d: int
    basis: tuple[QuadElem, QuadElem]
    eps: QuadElem

    def __post_init__(self):
        d = self.d
        if d <= 1 or not is_squarefree(d):
            raise InvalidFieldError(f"d={d} is not a squarefree integer > 1")
        b1, b2 = (_as_elem(x, d) for x in self.basis)
        eps = _as_elem(self.eps, d)
        object.__setattr__(self, "basis", (b1, b2))
        object.__setattr__(self, "eps", eps)
        if b1.a * b2.b - b2.a * b1.b == 0:
            raise SingularPairingError("module basis is dependent")
        if not (eps.is_integral() and eps.norm() == 1 and eps.is_totally_positive() and eps != 1):
            raise InputError(f"{eps} is not a totally positive unit of infinite order")
        self.monodromy()

    @classmethod
    def standard(cls, d: int) -> PeripheralLattice:
        """Ring of integers with the full group of totally positive units."""
        if d <= 1 or not is_squarefree(d):
            raise InvalidFieldError(f"d={d} is not a squarefree integer > 1")
        omega = QuadElem(Fraction(1, 2), Fraction(1, 2), d) if d % 4 == 1 else QuadElem(0, 1, d)
        return cls(d, (QuadElem(1, 0, d), omega), totally_positive_unit(d))

    def monodromy(self) -> list[list[int]]:
        """Integer matrix of multiplication by eps; column j is eps*basis[j] in basis coordinates."""
        C = basis_change(self.basis, tuple(self.eps * b for b in self.basis))
        if any(c.denominator != 1 for row in C for c in row):
            raise NonIntegralMatrixError("module is not stable under the unit")
        return [[int(c) for c in row] for row in C]

    def scaled(self, c) -> PeripheralLattice:
        return PeripheralLattice(self.d, tuple(b * c for b in self.basis), self.eps)

    def to_json(self) -> dict:
        return {"d": self.d, "basis": [b.to_json() for b in self.basis], "unit": self.eps.to_json()}


def covolume(basis) -> QuadElem:
    """|det| of the real embedding matrix, as an exact positive multiple of sqrt(d)."""
    b1, b2 = basis
    det = b1 * b2.conj() - b2 * b1.conj()
    if det == 0:
        raise SingularPairingError("basis is dependent")
    return det if det.sign(0) > 0 else -det


def _matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(2)) for j in range(2)] for i in range(2)]


def _inv2(A):
    det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
    return [[A[1][1] / det, -A[0][1] / det], [-A[1][0] / det, A[0][0] / det]]


def dual_peripheral(L: PeripheralLattice) -> tuple[PeripheralLattice, list[list[Fraction]]]:
    """Lattice on the trace dual M*, plus the rational T with T phi_M T^-1 = phi_{M*}."""
    dual = PeripheralLattice(L.d, dual_lattice(L.basis), L.eps)
    T = [[Fraction(x) for x in row] for row in trace_gram(L.basis)]
    phi = [[Fraction(x) for x in row] for row in L.monodromy()]
    lhs = _matmul(_matmul(T, phi), _inv2(T))
    if lhs != [[Fraction(x) for x in row] for row in dual.monodromy()]:
        raise SingularPairingError("trace pairing does not conjugate the two monodromies")
    return dual, T


# -- orbit enumeration ---------------------------------------------------------


def _int_coeffs(L: PeripheralLattice):
    """Integer data so that, for beta = x*b1 + y*b2, everything below is exact in int64.

    Returns (den_ab, A, B_, eden, EA, EB, nden, (q11, q12, q22)) where
    den_ab*beta = (A . (x,y)) + (B_ . (x,y)) sqrt(d), the same for beta/eps with eden,
    and nden*N(beta) = q11 x^2 + q12 x y + q22 y^2.
    """
    b1, b2 = L.basis
    inv = L.eps.inverse()
    c1, c2 = b1 * inv, b2 * inv

    def scale(*fs):
        den = math.lcm(*(f.denominator for f in fs))
        return den, [int(f * den) for f in fs]

    den_ab, (a1, a2, bb1, bb2) = scale(b1.a, b2.a, b1.b, b2.b)
    eden, (e1, e2, f1, f2) = scale(c1.a, c2.a, c1.b, c2.b)
    q = (b1.norm(), (b1 * b2.conj()).trace(), b2.norm())
    nden, qi = scale(*q)
    return den_ab, (a1, a2), (bb1, bb2), eden, (e1, e2), (f1, f2), nden, tuple(qi)


def _enumerate(L: PeripheralLattice, B: int):
    """Integer coordinates (x, y) and exact scaled norms of all domain points with 0 < |N| <= B."""
    if B < 1:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), 1
    b1, b2 = L.basis
    s = np.array([[b1.embed(0), b2.embed(0)], [b1.embed(1), b2.embed(1)]], dtype=float)
    e1 = L.eps.embed(0)
    r1, r2 = e1 * math.sqrt(B) * (1 + 1e-9) + 1e-9, math.sqrt(B) * (1 + 1e-9) + 1e-9
    Sinv = np.linalg.inv(s)
    xmax = int(math.ceil(abs(Sinv[0, 0]) * r1 + abs(Sinv[0, 1]) * r2))
    xr = np.arange(-xmax, xmax + 1, dtype=np.int64)
    # for fixed x, |s00 x + s01 y| <= r1 and |s10 x + s11 y| <= r2 are y-intervals
    lo = np.full(xr.shape, -np.inf)
    hi = np.full(xr.shape, np.inf)
    for row, r in ((0, r1), (1, r2)):
        p, q = s[row, 0], s[row, 1]
        a = (-r - p * xr) / q
        b = (r - p * xr) / q
        lo = np.maximum(lo, np.minimum(a, b))
        hi = np.minimum(hi, np.maximum(a, b))
    ylo = np.ceil(lo).astype(np.int64)
    counts = np.maximum(np.floor(hi).astype(np.int64) - ylo + 1, 0)
    if counts.sum() > MAX_POINTS:
        raise InputError(f"norm bound {B} needs more than {MAX_POINTS} lattice points")
    den_ab, (a1, a2), (bb1, bb2), eden, (e1_, e2_), (f1, f2), nden, (q11, q12, q22) = _int_coeffs(L)
    out_x, out_y, out_n = [], [], []
    ends = np.cumsum(counts)
    start = 0
    while start < xr.size:
        # chunks of roughly a million points keep memory flat
        stop = int(np.searchsorted(ends, ends[start] - counts[start] + _CHUNK, side="right"))
        stop = max(stop, start + 1)
        c = counts[start:stop]
        xs = np.repeat(xr[start:stop], c)
        offsets = np.arange(c.sum()) - np.repeat(np.cumsum(c) - c, c)
        ys = np.repeat(ylo[start:stop], c) + offsets
        A = a1 * xs + a2 * ys
        Bc = bb1 * xs + bb2 * ys
        Ae = e1_ * xs + e2_ * ys
        Be = f1 * xs + f2 * ys
        Nn = q11 * xs * xs + q12 * xs * ys + q22 * ys * ys
        # |sigma1| >= |sigma2| iff a*b >= 0; beta/eps must fail that strictly
        keep = ((Nn != 0) & (np.abs(Nn) <= B * nden)
                & (np.sign(A) * np.sign(Bc) >= 0) & (np.sign(Ae) * np.sign(Be) < 0))
        out_x.append(xs[keep])
        out_y.append(ys[keep])
        out_n.append(Nn[keep])
        start = stop
    return np.concatenate(out_x), np.concatenate(out_y), np.concatenate(out_n), nden


def _elem(L: PeripheralLattice, x, y) -> QuadElem:
    b1, b2 = L.basis
    return b1 * int(x) + b2 * int(y)


def orbit_representatives(L: PeripheralLattice, B: int) -> list[QuadElem]:
    """One element per <eps>-orbit of nonzero beta in M with |N(beta)| <= B, ordered by (|N|, sigma_1)."""
    xs, ys, _, _ = _enumerate(L, B)
    reps = [_elem(L, x, y) for x, y in zip(xs, ys)]
    reps.sort(key=lambda b: (abs(b.norm()), b.embed(0)))
    return reps


@dataclass(frozen=True)
class LSeries:
    """Grouped partial sums of sum sign(N(beta))/|N(beta)| over orbit representatives."""

    norms: tuple[Fraction, ...]  # distinct |N| in increasing order
    net_counts: tuple[int, ...]  # (#positive-norm) - (#negative-norm) representatives per group
    partial_sums: np.ndarray
    averaged: np.ndarray

    def group_terms(self) -> list[Fraction]:
        return [Fraction(c) / n for c, n in zip(self.net_counts, self.norms)]

    def __len__(self):
        return len(self.norms)


def _cesaro(partial: np.ndarray) -> np.ndarray:
    if partial.size == 0:
        return partial
    return np.cumsum(partial) / np.arange(1, partial.size + 1)


def shimizu_L(L: PeripheralLattice, B: int) -> LSeries:
    xs, ys, Nn, nden = _enumerate(L, B)
    if Nn.size == 0:
        empty = np.zeros(0)
        return LSeries((), (), empty, empty)
    absN = np.abs(Nn)
    keys, inv = np.unique(absN, return_inverse=True)
    net = np.bincount(inv, weights=np.sign(Nn)).astype(np.int64)
    norms = tuple(Fraction(int(k), nden) for k in keys)
    terms = net * (nden / keys.astype(float))
    partial = np.cumsum(terms)
    return LSeries(norms, tuple(int(c) for c in net), partial, _cesaro(partial))


def max_norm_bound() -> int | None:
    raw = os.environ.get("CUSPED_MAX_NORM_BOUND")
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise InputError("CUSPED_MAX_NORM_BOUND must be an integer") from None
    if value < 1:
        raise InputError("CUSPED_MAX_NORM_BOUND must be positive")
    return value


@dataclass(frozen=True)
class DeltaEstimate:
    value: float
    norm_bound: int
    term_count: int
    stabilization_gap: float
    raw_value: float = float("nan")
    checkpoints: tuple = field(default=())

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "norm_bound": self.norm_bound,
            "term_count": self.term_count,
            "stabilization_gap": self.stabilization_gap,
            "raw_value": self.raw_value,
            "checkpoints": [list(c) for c in self.checkpoints],
        }


def _averaged_at(series: LSeries, bound: Fraction) -> float:
    """Averaged partial sum over the groups with |N| <= bound."""
    idx = np.searchsorted(np.array([float(n) for n in series.norms]), float(bound), side="right")
    return float(series.averaged[idx - 1]) if idx else 0.0


def delta_cusp(L: PeripheralLattice, B: int) -> DeltaEstimate:
    """-vol(M)/pi^2 times the averaged L-sum at s = 1, truncated at |N| <= B.

    The gap compares the averaged estimate at B with the one at B/2.
    """
    if B < 1:
        raise InputError("norm bound must be at least 1")
    cap = max_norm_bound()
    if cap is not None and B > cap:
        raise InputError(f"norm bound {B} exceeds CUSPED_MAX_NORM_BOUND={cap}")
    series = shimizu_L(L, B)
    scale = -covolume(L.basis).embed(0) / math.pi ** 2
    if len(series) == 0:
        return DeltaEstimate(0.0, B, 0, float("inf"), 0.0, ())
    checkpoints = []
    b = B
    while b >= 1 and len(checkpoints) < 6:
        checkpoints.append((b, scale * _averaged_at(series, Fraction(b))))
        b //= 2
    value = checkpoints[0][1]
    gap = abs(value - checkpoints[1][1]) if len(checkpoints) > 1 else float("inf")
    return DeltaEstimate(
        value=value,
        norm_bound=B,
        term_count=len(series),
        stabilization_gap=gap,
        raw_value=scale * float(series.partial_sums[-1]),
        checkpoints=tuple(checkpoints),
    )


def bounding_obstruction(estimate: DeltaEstimate, tol: float = 0.1) -> dict:
    """Integrality test: an estimate that has stabilised but sits away from every integer is an obstruction."""
    if tol <= 0:
        raise InputError("tolerance must be positive")
    nearest = round(estimate.value)
    distance = abs(estimate.value - nearest)
    out = {"estimate": estimate.value, "nearest_integer": nearest, "distance": distance, "tol": tol,
           "stabilization_gap": estimate.stabilization_gap}
    if not estimate.stabilization_gap < tol:
        out["verdict"] = "inconclusive"
    elif distance > tol:
        out["verdict"] = "obstructed"
    else:
        out["verdict"] = "unobstructed-by-this-test"
    return out


def cusp_count_standard(d: int) -> int:
    """Number of cusps of the standard Hilbert modular surface, which is the class number."""
    if d <= 1 or not is_squarefree(d):
        raise InvalidFieldError(f"d={d} is not a squarefree integer > 1")
    return class_number(d)
