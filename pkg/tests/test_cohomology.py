import random
from fractions import Fraction
from itertools import permutations, product

import pytest
from hypothesis import given, strategies as st

from lieper.cohomology import (Cochain, NotExact, cartan_map, ce_differential, eta_D,
                               is_closed, is_coboundary2, linear_functional, solve_exactness)
from lieper.errors import NotDerivation, NotInvariant, NotSkew
from lieper.invariants import universal_form
from lieper.lie import (BUILTIN, LinearMap, SymBilinearForm, abelian, direct_sum, gl,
                        killing_form, su2)


def rand_cochain(rng, p, n, d=1):
    return Cochain.from_function(p, n, d, lambda idx: [Fraction(rng.randint(-5, 5),
                                                                rng.randint(1, 3))
                                                       for _ in range(d)])


def normalized():
    return killing_form(su2()).scaled(Fraction(-1, 4))


@given(st.integers(0, 10**6))
def test_d1_formula(seed):
    rng = random.Random(seed)
    L = su2()
    lam = rand_cochain(rng, 1, 3)
    dl = ce_differential(lam, L)
    for i, j in product(range(3), repeat=2):
        x, y = L.basis[i], L.basis[j]
        assert dl(x, y) == [-v for v in lam(L.bracket(x, y))]


@given(st.integers(0, 10**6), st.sampled_from(sorted(BUILTIN)), st.integers(0, 2))
def test_d_squared_zero(seed, name, p):
    rng = random.Random(seed)
    L = BUILTIN[name]()
    c = rand_cochain(rng, p, L.dim, rng.randint(1, 2))
    assert ce_differential(ce_differential(c, L), L).is_zero()


def test_cartan_su2():
    C = cartan_map(su2(), normalized())
    assert C.on_basis((0, 1, 2)) == (4,)
    assert ce_differential(C, su2()).is_zero()
    assert C.is_alternating()
    for perm in permutations(range(3)):
        sign = 1 if perm in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1
        assert C.on_basis(perm) == (4 * sign,)


def test_cartan_abelian_zero_and_linear():
    assert cartan_map(abelian(3), SymBilinearForm.scalar([[1, 0, 0], [0, 1, 0], [0, 0, 1]])).is_zero()
    k = normalized()
    assert cartan_map(su2(), k.scaled(2)) == cartan_map(su2(), k).scaled(2)


def test_cartan_rejects_non_invariant():
    with pytest.raises(NotInvariant):
        cartan_map(su2(), SymBilinearForm.scalar([[1, 0, 0], [0, 2, 0], [0, 0, 3]]))


@pytest.mark.parametrize("name", sorted(BUILTIN))
def test_cartan_of_universal_form_is_alternating(name):
    L = BUILTIN[name]()
    assert cartan_map(L, universal_form(L).kappa_u).is_alternating()


def test_killing_on_su2_not_exact():
    res = solve_exactness(cartan_map(su2(), killing_form(su2())), su2())
    assert isinstance(res, NotExact)
    assert res.augmented_rank > res.matrix_rank


def test_zero_cocycle_exact():
    eta = solve_exactness(Cochain.zero(3, 3), su2())
    assert isinstance(eta, Cochain) and eta.is_zero()
    lam = is_coboundary2(Cochain.zero(2, 3), su2())
    assert isinstance(lam, Cochain) and lam.is_zero()


@given(st.integers(0, 10**6), st.sampled_from(sorted(BUILTIN)))
def test_exactness_round_trip(seed, name):
    rng = random.Random(seed)
    L = BUILTIN[name]()
    eta0 = rand_cochain(rng, 2, L.dim)
    C = ce_differential(eta0, L)
    eta = solve_exactness(C, L)
    assert isinstance(eta, Cochain)
    assert ce_differential(eta, L) == C


def test_eta_ad_is_coboundary():
    L = su2()
    k = normalized()
    I = L.basis[0]
    eta = eta_D(L, k, L.ad(I))
    assert ce_differential(eta, L).is_zero()
    lam = is_coboundary2(eta, L)
    assert lam == linear_functional(k, I)
    assert eta_D(L, k, LinearMap.zero(3, 3)).is_zero()


def test_eta_errors():
    L = direct_sum(su2(), su2())
    swap = LinearMap.from_rows([[int(j == (i + 3) % 6) for j in range(6)] for i in range(6)])
    with pytest.raises(NotDerivation):
        eta_D(L, universal_form(L).kappa_u, swap)
    G = gl(2)
    tr = [1, 0, 0, 1]
    trtr = SymBilinearForm.from_values(4, 1, lambda i, j: (tr[i] * tr[j],))
    # D(X) = tr(X) * Id is a derivation of gl2 but not skew for tr * tr
    D = LinearMap.from_rows([[tr[j] * tr[i] for j in range(4)] for i in range(4)])
    with pytest.raises(NotSkew):
        eta_D(G, trtr, D)


def test_cartan_slice_decided_exactly():
    L = su2()
    C = cartan_map(L, normalized())
    K = L.basis[2]
    omega = Cochain.from_function(2, 3, 1, lambda idx: C(L.basis[idx[0]], L.basis[idx[1]], K))
    assert is_closed(omega, L)
    lam = is_coboundary2(omega, L)
    assert isinstance(lam, Cochain)
    assert ce_differential(lam, L) == omega


@given(st.integers(0, 10**6))
def test_eta_closed_for_skew_derivations(seed):
    rng = random.Random(seed)
    L = direct_sum(su2(), su2())
    k = universal_form(L).kappa_u
    x = [Fraction(rng.randint(-4, 4)) for _ in range(6)]
    eta = eta_D(L, k, L.ad(x))
    assert is_closed(eta, L)
    assert is_coboundary2(eta, L) == linear_functional(k, x)
