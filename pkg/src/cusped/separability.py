"""Congruence certificates separating an integer matrix from the stabiliser of a coordinate line.

The stabiliser of the line through ``e_1`` consists of matrices whose first column
is zero below the diagonal, so in SL(2) it is the upper-triangular Borel subgroup.
A matrix with a nonzero entry ``g[i][0]`` (i > 0) is excluded by reduction modulo
any prime that does not divide that entry.
"""
from __future__ import annotations

from dataclasses import dataclass

import sympy

from .errors import AlreadyMemberError, InputError


def _check_matrix(g) -> tuple[tuple[int, ...], ...]:
    try:
        rows = tuple(tuple(int(x) for x in row) for row in g)
    except (TypeError, ValueError):
        raise InputError("matrix entries must be integers") from None
    m = len(rows)
    if m < 2 or any(len(r) != m for r in rows):
        raise InputError("expected a square matrix of size at least 2")
    if any(int(x) != x for row in g for x in row):
        raise InputError("matrix entries must be integers")
    return rows


@dataclass(frozen=True)
class SeparationCertificate:
    element: tuple[tuple[int, ...], ...]
    modulus: int
    witness: tuple[int, int]

    def to_json(self) -> dict:
        return {"element": [list(r) for r in self.element], "modulus": self.modulus,
                "witness": list(self.witness), "stabilized_line": "e1"}


def _smallest_good_prime(entries) -> tuple[int, int]:
    q = 2
    while True:
        for idx, v in entries:
            if v % q:
                return q, idx
        q = int(sympy.nextprime(q))


def separate_from_line_stabilizer(g) -> SeparationCertificate:
    """Smallest prime q for which g mod q leaves the reduced stabiliser of the e_1 line."""
    rows = _check_matrix(g)
    entries = [(i, rows[i][0]) for i in range(1, len(rows)) if rows[i][0] != 0]
    if not entries:
        raise AlreadyMemberError("matrix already stabilises the line; nothing to separate")
    q, i = _smallest_good_prime(entries)
    return SeparationCertificate(rows, q, (i, 0))


def verify_certificate(cert: SeparationCertificate) -> bool:
    """Recompute the reduction: true iff the witness entry is a nonzero residue mod a prime q."""
    if not isinstance(cert, SeparationCertificate):
        raise InputError("not a certificate")
    rows = _check_matrix(cert.element)
    i, j = cert.witness
    m = len(rows)
    if not (0 <= i < m and j == 0 and i > 0):
        raise InputError("witness must be a below-diagonal entry of the first column")
    if all(rows[r][0] == 0 for r in range(1, m)):
        raise InputError("certificate element lies in the stabiliser")
    q = cert.modulus
    if not isinstance(q, int) or not sympy.isprime(q):
        return False
    return rows[i][0] % q != 0
