"""Published U(2,1) generator matrices for the seven Nil families, transcribed verbatim.

Entries over Q(i) use d = -1; entries written with sqrt(3)*i use d = -3, where
sqrt(3)*i == sqrt(-3). ``None`` marks an entry that the source leaves unresolved
(it depends on an unbound symbol).
"""
from fractions import Fraction

from cusped.heisenberg import Matrix3k, _mat
from cusped.numberfield import QuadElem


def _g(a, b=0):
    return QuadElem(Fraction(a), Fraction(b), -1)


def _e(a, b=0):
    return QuadElem(Fraction(a), Fraction(b), -3)


def _m(rows, iota=0):
    return Matrix3k(rows, iota)


def _times_diag(rows, u, one):
    z = one * 0
    return _mat(rows, ((u, z, z), (z, one, z), (z, z, one)))


def _fam1_abc(k):
    a = _m([[_g(1), _g(2 * k), _g(2 * k)],
            [_g(-2 * k), _g(1 - 2 * k * k), _g(-2 * k * k)],
            [_g(2 * k), _g(2 * k * k), _g(1 + 2 * k * k)]])
    b = _m([[_g(1), _g(0, 2 * k), _g(0, 2 * k)],
            [_g(0, 2 * k), _g(1 - 2 * k * k), _g(2 * k * k)],
            [_g(0, -2 * k), _g(2 * k * k), _g(1 + 2 * k * k)]])
    c = _m([[_g(1), _g(0), _g(0)],
            [_g(0), _g(1, 8 * k), _g(0, 8 * k)],
            [_g(0), _g(0, -8 * k), _g(1, -8 * k)]])
    return {"a": a, "b": b, "c": c}


def _fam3_abc(k):
    a = _m([[_g(1), _g(4 * k), _g(4 * k)],
            [_g(-4 * k), _g(1 - 8 * k * k), _g(-8 * k * k)],
            [_g(4 * k), _g(8 * k * k), _g(1 + 8 * k * k)]])
    b = _m([[_g(1), _g(0, 4 * k), _g(0, 4 * k)],
            [_g(0, 4 * k), _g(1 - 8 * k * k), _g(8 * k * k)],
            [_g(0, -4 * k), _g(8 * k * k), _g(1 + 8 * k * k)]])
    c = _m([[_g(1), _g(0), _g(0)],
            [_g(0), _g(1, 16 * k), _g(0, 16 * k)],
            [_g(0), _g(0, -16 * k), _g(1, -16 * k)]])
    return {"a": a, "b": b, "c": c}


def family1(k):
    return _fam1_abc(k)


def family2(k):
    out = _fam1_abc(k)
    out["alpha"] = _m([[_g(-1), _g(0), _g(0)],
                       [_g(0), _g(1, k), _g(0, k)],
                       [_g(0), _g(0, -k), _g(1, -k)]])
    return out


def family3(k):
    out = _fam3_abc(k)
    out["alpha"] = _m([[_g(1), _g(2 * k), _g(2 * k)],
                       [_g(2 * k), _g(1 - 2 * k * k), _g(-2 * k * k)],
                       [_g(-2 * k), _g(2 * k * k), _g(1 + 2 * k * k)]], iota=1)
    return out


def family4(k):
    out = _fam3_abc(k)
    out["alpha"] = _m([[_g(-1), _g(2 * k, 2 * k), _g(2 * k, 2 * k)],
                       [_g(-2 * k, 2 * k), _g(1 - 4 * k * k), _g(-4 * k * k)],
                       [_g(2 * k, -2 * k), _g(4 * k * k), _g(1 + 4 * k * k)]])
    out["beta"] = _m([[_g(1), _g(2 * k), _g(2 * k)],
                      [_g(-2 * k), _g(1 - 4 * k * k), _g(-4 * k * k)],
                      [_g(2 * k), _g(4 * k * k), _g(1 + 4 * k * k)]], iota=1)
    return out


def family5(k, p):
    out = _fam1_abc(k)
    h = Fraction(p * k, 2)
    out["alpha"] = _m([[_g(0, 1), _g(0), _g(0)],
                       [_g(0), _g(1, h), _g(0, h)],
                       [_g(0), _g(0, -h), _g(1, -h)]])
    return out


def family6(k, k1, k2):
    s = 288 * k * k
    a = _m([[_e(1), _e(24 * k), _e(24 * k)],
            [_e(-24 * k), _e(1 - s), _e(-s)],
            [_e(24 * k), _e(s), _e(1 + s)]])
    b = _m([[_e(1), _e(-12, 12), _e(-12, 12)],
            [_e(12, 12), _e(1 - s), _e(-s)],
            [_e(-12, -12), _e(s), _e(1 + s)]])
    c = _m([[_e(1), _e(0), _e(0)],
            [_e(0), _e(1, 144 * k), _e(0, 144 * k)],
            [_e(0), _e(0, -144 * k), _e(1, -144 * k)]])
    u, v = k + 2 * k1, k - 2 * k1
    mu = _e(-6 * u, 6 * v)
    zeta3 = _e(Fraction(-1, 2), Fraction(1, 2))
    # sigma involves an unbound |z|^2; those four entries stay unresolved
    rows = ((_e(1), mu, mu),
            (_e(6 * u, 6 * v), None, None),
            (_e(-6 * u, -6 * v), None, None))
    first = [r[0] for r in rows]
    alpha_rows = [[first[i] * zeta3] + list(rows[i][1:]) for i in range(3)]
    return {"a": a, "b": b, "c": c, "alpha": alpha_rows}


def family7(k, k1):
    s = 144 * k * k
    a = _m([[_e(1), _e(12 * k), _e(12 * k)],
            [_e(-12 * k), _e(1 - s), _e(-s)],
            [_e(12 * k), _e(s), _e(1 + s)]])
    b = _m([[_e(1), _e(-6 * k, 6 * k), _e(-6 * k, 6 * k)],
            [_e(6 * k, 6 * k), _e(1 - s), _e(-s)],
            [_e(-6 * k, -6 * k), _e(s), _e(1 + s)]])
    c = _m([[_e(1), _e(0), _e(0)],
            [_e(0), _e(1, 288 * k), _e(0, 288 * k)],
            [_e(0), _e(0, -288 * k), _e(1, -288)]])
    chi = _e(-36 * k * k, 12 * k * (4 * k1 + 3 * k))
    zeta6 = _e(Fraction(1, 2), Fraction(1, 2))
    rows = ((_e(1), _e(-6 * k), _e(-6 * k)),
            (_e(3 * k, -3 * k), _e(1) - chi, -chi),
            (_e(-3 * k, 3 * k), chi, _e(1) + chi))
    alpha = _m(_times_diag(rows, zeta6, _e(1)))
    return {"a": a, "b": b, "c": c, "alpha": alpha}


# three parameter choices per family, each satisfying that family's constraints
GRID = {
    1: [dict(k=2), dict(k=6), dict(k=12)],
    2: [dict(k=2), dict(k=6), dict(k=12)],
    3: [dict(k=2), dict(k=6), dict(k=12)],
    4: [dict(k=2), dict(k=6), dict(k=12)],
    5: [dict(k=2, p=1), dict(k=6, p=1), dict(k=12, p=3)],
    6: [dict(k=6, k1=0, k2=1), dict(k=12, k1=0, k2=2), dict(k=2, k1=1, k2=1)],
    7: [dict(k=6, k1=1), dict(k=12, k1=5), dict(k=2, k1=5)],
}

BUILDERS = {1: family1, 2: family2, 3: family3, 4: family4, 5: family5, 6: family6, 7: family7}


def reference(family: int, params: dict) -> dict:
    """Generator name -> Matrix3k, or a list of rows containing ``None`` for unresolved entries."""
    return BUILDERS[family](**params)
