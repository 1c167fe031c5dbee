import random
from fractions import Fraction

import pytest

from cusped.errors import InputError, InvalidFieldError, NonIntegralMatrixError, SingularPairingError
from cusped.hilbert import (
    DeltaEstimate,
    PeripheralLattice,
    bounding_obstruction,
    covolume,
    cusp_count_standard,
    delta_cusp,
    dual_peripheral,
    orbit_representatives,
    shimizu_L,
)
from cusped.numberfield import QuadElem, same_module, totally_positive_unit
from oracles import ideal_class_number, squarefree_range

TARGETS = {3: Fraction(-1, 3), 6: Fraction(-2, 3), 21: Fraction(-2, 3), 33: Fraction(-2, 3)}


def q(d, a, b=0):
    return QuadElem(a, b, d)


def test_covolume_examples():
    assert covolume((q(3, 1), q(3, 0, 1))) == q(3, 0, 2)
    assert covolume((q(5, 1), q(5, Fraction(1, 2), Fraction(1, 2)))) == q(5, 0, 1)
    assert covolume((q(2, 0, 1), q(2, 1))) == q(2, 0, 2)
    with pytest.raises(SingularPairingError):
        covolume((q(2, 1), q(2, 3)))


def test_standard_lattice_and_validation():
    L = PeripheralLattice.standard(3)
    assert L.eps == q(3, 2, 1)
    assert L.monodromy() == [[2, 3], [1, 2]]
    with pytest.raises(InputError):
        PeripheralLattice(3, (q(3, 1), q(3, 0, 1)), q(3, 1, 1))  # norm -2, not a unit
    with pytest.raises(NonIntegralMatrixError):
        PeripheralLattice(3, (q(3, 1), q(3, 0, 2)), q(3, 2, 1))
    with pytest.raises(InvalidFieldError):
        PeripheralLattice.standard(8)


def test_dual_example():
    dual, T = dual_peripheral(PeripheralLattice.standard(3))
    assert dual.basis == (q(3, Fraction(1, 2)), q(3, 0, Fraction(1, 6)))
    assert T == [[2, 0], [0, 6]]


def _random_lattice(rng, d):
    """gamma * (Z + f*omega Z) with a random unimodular basis, and a unit power preserving it."""
    f = rng.randint(1, 3)
    omega = q(d, Fraction(1, 2), Fraction(1, 2)) if d % 4 == 1 else q(d, 0, 1)
    gamma = q(d, rng.randint(1, 5), rng.randint(-4, 4))
    b = (gamma, gamma * omega * f)
    p, r = rng.randint(-3, 3), rng.randint(-3, 3)
    b = (b[0] + b[1] * p, b[1] + (b[0] + b[1] * p) * r)
    eps = totally_positive_unit(d)
    u = eps
    while True:
        try:
            return PeripheralLattice(d, b, u)
        except NonIntegralMatrixError:
            u = u * eps


def test_duality_fifty_random_lattices():
    rng = random.Random(11)
    for _ in range(50):
        L = _random_lattice(rng, rng.choice([2, 3, 5, 6]))
        D, T = dual_peripheral(L)
        DD, _ = dual_peripheral(D)
        assert same_module(DD.basis, L.basis)
        assert covolume(L.basis) * covolume(D.basis) == 1


# -- orbit enumeration against brute force ------------------------------------


def brute_orbits(L, B):
    """Union-find over a box of lattice points, linking beta to beta*eps^n exactly."""
    b1, b2 = L.basis
    R = 40
    pts = {}
    for x in range(-R, R + 1):
        for y in range(-R, R + 1):
            beta = b1 * x + b2 * y
            if beta != 0 and abs(beta.norm()) <= B:
                pts[beta] = beta
    parent = {p: p for p in pts}

    def find(p):
        while parent[p] != p:
            p = parent[p]
        return p

    for p in pts:
        u = p
        for _ in range(6):
            u = u * L.eps
            if u in parent:
                parent[find(u)] = find(p)
    roots = {}
    for p in pts:
        roots.setdefault(find(p), p)
    return list(roots.values())


@pytest.mark.parametrize("d", [2, 3, 5, 6])
def test_orbit_representatives_match_brute_force(d):
    L = PeripheralLattice.standard(d)
    for B in (1, 5, 12, 20):
        reps = orbit_representatives(L, B)
        brute = brute_orbits(L, B)
        assert len(reps) == len(brute)
        assert sorted(r.norm() for r in reps) == sorted(r.norm() for r in brute)
        # no two representatives share an orbit
        powers = {L.eps ** n for n in range(-8, 9)}
        for i, r in enumerate(reps):
            assert all(s * r.inverse() not in powers for s in reps[i + 1:])


def test_norm_one_bound_has_two_orbits():
    reps = orbit_representatives(PeripheralLattice.standard(3), 1)
    assert len(reps) == 2 and {r.norm() for r in reps} == {1}


def test_representative_choice_independence():
    rng = random.Random(3)
    for d in (2, 3, 5, 6):
        L = PeripheralLattice.standard(d)
        base = shimizu_L(L, 20)
        for _ in range(4):
            b1, b2 = L.basis
            p = rng.randint(-3, 3)
            other = PeripheralLattice(d, (b1 + b2 * p, b2), L.eps)
            s = shimizu_L(other, 20)
            assert s.norms == base.norms and s.net_counts == base.net_counts
        # the brute-force orbit list yields the same exact grouped terms
        brute = brute_orbits(L, 20)
        groups = {}
        for r in brute:
            n = r.norm()
            groups[abs(n)] = groups.get(abs(n), 0) + (1 if n > 0 else -1)
        assert [Fraction(groups[n]) / n for n in sorted(groups)] == base.group_terms()


@pytest.mark.parametrize("d,c", [(3, 2), (3, q(3, 3, 1)), (5, 3), (6, q(6, 3, 1))])
def test_delta_is_scaling_invariant(d, c):
    L = PeripheralLattice.standard(d)
    c = q(d, 0) + c
    n = abs(c.norm())
    M = L.scaled(c)
    for B in (10, 40, 200):
        a, b = shimizu_L(L, B), shimizu_L(M, int(B * n))
        assert b.norms == tuple(x * n for x in a.norms)
        sign = 1 if c.norm() > 0 else -1
        assert b.net_counts == tuple(sign * x for x in a.net_counts)
        if sign > 0:
            assert abs(delta_cusp(L, B).value - delta_cusp(M, int(B * n)).value) < 1e-12


@pytest.mark.parametrize("d", sorted(TARGETS))
def test_delta_targets(d):
    est = delta_cusp(PeripheralLattice.standard(d), 10 ** 5)
    assert est.stabilization_gap < 0.02
    assert est.value < 0
    assert abs(est.value - float(TARGETS[d])) < 0.1
    assert bounding_obstruction(est)["verdict"] == "obstructed"


def test_delta_sign_at_every_checkpoint():
    est = delta_cusp(PeripheralLattice.standard(6), 20000)
    assert len(est.checkpoints) == 6
    assert all(v < 0 for _, v in est.checkpoints)


def test_bounding_verdicts():
    def est(v, gap):
        return DeltaEstimate(v, 10, 5, gap)

    assert bounding_obstruction(est(-0.33, 0.001))["verdict"] == "obstructed"
    assert bounding_obstruction(est(-1.01, 0.001))["verdict"] == "unobstructed-by-this-test"
    assert bounding_obstruction(est(-0.33, 0.5))["verdict"] == "inconclusive"
    with pytest.raises(InputError):
        bounding_obstruction(est(0, 0), tol=0)


def test_norm_bound_cap(monkeypatch):
    L = PeripheralLattice.standard(3)
    monkeypatch.setenv("CUSPED_MAX_NORM_BOUND", "100")
    with pytest.raises(InputError):
        delta_cusp(L, 1000)
    assert delta_cusp(L, 100).norm_bound == 100
    monkeypatch.setenv("CUSPED_MAX_NORM_BOUND", "lots")
    with pytest.raises(InputError):
        delta_cusp(L, 10)
    with pytest.raises(InputError):
        delta_cusp(L, 0)


def test_cusp_counts():
    for d in TARGETS:
        assert cusp_count_standard(d) == 1
    for d in squarefree_range(2, 100):
        assert cusp_count_standard(d) == ideal_class_number(d), d
