import json
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lieper.errors import DimensionMismatch, InvalidLieAlgebra
from lieper.lie import (BUILTIN, LieAlgebra, LinearMap, SymBilinearForm, abelian, gl,
                        is_automorphism, is_derivation, is_ideal, is_invariant,
                        killing_form, load_algebra, radical, su2)

rat = st.fractions(min_value=-5, max_value=5, max_denominator=6)
names = st.sampled_from(sorted(BUILTIN))


def vec(n):
    return st.lists(rat, min_size=n, max_size=n)


def test_su2_bracket_is_quaternion_product():
    L = su2()
    I, J, K = L.basis
    assert L.bracket(I, J) == [0, 0, 2]
    assert L.bracket(J, K) == [2, 0, 0]
    assert L.bracket(K, I) == [0, 2, 0]


def _elementary(n, a, b):
    m = np.zeros((n, n))
    m[a, b] = 1
    return m


def test_gl2_matches_matrix_commutator():
    L = gl(2)
    mats = [_elementary(2, a, b) for a in range(2) for b in range(2)]
    for i, j in product(range(4), repeat=2):
        comm = mats[i] @ mats[j] - mats[j] @ mats[i]
        got = sum(float(c) * mats[k] for k, c in enumerate(L.bracket(L.basis[i], L.basis[j])))
        assert np.array_equal(got, comm)
    assert L.bracket(L.basis[0], L.basis[1]) == [0, 1, 0, 0]


@given(names.flatmap(lambda nm: st.tuples(st.just(nm), vec(BUILTIN[nm]().dim),
                                        vec(BUILTIN[nm]().dim))))
def test_bracket_antisymmetric(args):
    nm, x, y = args
    L = BUILTIN[nm]()
    assert L.bracket(x, x) == [0] * L.dim
    assert L.bracket(x, y) == [-t for t in L.bracket(y, x)]


def test_bracket_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        su2().bracket([1, 0], [0, 1, 0])


def test_killing_form_values():
    assert killing_form(su2()).table[0][0] == (Fraction(-8),)
    assert killing_form(abelian(3)).is_zero()
    kappa = killing_form(su2()).scaled(Fraction(-1, 4))
    assert kappa([1, 2, 3], [1, 2, 3]) == [2 * 14]


@pytest.mark.parametrize("name", sorted(BUILTIN))
def test_killing_invariant_and_ad_derivations(name):
    L = BUILTIN[name]()
    assert is_invariant(L, killing_form(L))
    for a in L.ad_basis:
        assert is_derivation(L, a)


def test_is_invariant_examples():
    gl2 = gl(2)
    tr = [1, 0, 0, 1]
    assert is_invariant(gl2, SymBilinearForm.from_values(4, 1, lambda i, j: (tr[i] * tr[j],)))
    assert not is_invariant(su2(), SymBilinearForm.scalar([[1, 0, 0], [0, 2, 0], [0, 0, 3]]))


def test_is_derivation_examples():
    L = su2()
    assert not is_derivation(L, LinearMap.identity(3))
    assert is_derivation(L, LinearMap.zero(3, 3))
    assert is_automorphism(L, LinearMap.from_rows([[0, -1, 0], [1, 0, 0], [0, 0, 1]]))
    assert not is_automorphism(L, LinearMap.identity(3).scaled(2))


def test_radical_examples():
    assert radical(su2()) == []
    assert len(radical(abelian(4))) == 4
    rad = radical(gl(2))
    assert len(rad) == 1
    r = rad[0]
    assert r[1] == r[2] == 0 and r[0] == r[3] != 0


@pytest.mark.parametrize("name", sorted(BUILTIN))
def test_radical_is_ideal(name):
    L = BUILTIN[name]()
    assert is_ideal(L, radical(L))


def test_jacobi_violation_rejected():
    with pytest.raises(InvalidLieAlgebra):
        LieAlgebra.from_brackets(["a", "b", "c"], {(0, 1): {2: 1}, (1, 2): {0: 1}, (0, 2): {0: 1}})


@pytest.mark.parametrize("name", sorted(BUILTIN))
def test_json_round_trip(name, tmp_path):
    L = BUILTIN[name]()
    p = tmp_path / "alg.json"
    p.write_text(json.dumps(L.to_json()))
    assert load_algebra(p) == L


def test_json_malformed():
    with pytest.raises(InvalidLieAlgebra):
        LieAlgebra.from_json({"basis": ["a"]})
    with pytest.raises(InvalidLieAlgebra):
        LieAlgebra.from_json({"dim": 2, "brackets": [[0, 1, [[0, "1"]]], [0, 1, [[1, "1"]]]]})
