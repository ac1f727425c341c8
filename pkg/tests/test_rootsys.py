"""
Unit tests for positive roots, closed subsets, B_C membership and W_C
"""

import galois
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.errors import DimensionTooLarge
from src.rootsys import (
    ClosedSet,
    Perm,
    Root,
    all_perms,
    b_c_member,
    conjugate_by_matrix,
    conjugate_by_perm,
    enumerate_closed_sets,
    is_closed,
    is_upper_triangular,
    positive_roots,
    w_c_combinatorial,
    w_c_conjugation,
    w_c_sampled,
)


@pytest.fixture
def c_of_204():
    """C for the weights (2, 0, 4)"""
    return ClosedSet.from_pairs(3, [(1, 3), (2, 3)])


def test_positive_roots():
    assert positive_roots(3) == (Root(1, 2), Root(1, 3), Root(2, 3))
    assert positive_roots(1) == ()
    with pytest.raises(ValueError):
        Root(2, 1)


def test_root_addition():
    assert Root(1, 2) + Root(2, 3) == Root(1, 3)
    assert Root(2, 3) + Root(1, 2) == Root(1, 3)
    assert Root(1, 2) + Root(1, 3) is None


def test_closure():
    assert is_closed(3, [Root(1, 2), Root(1, 3)])
    assert not is_closed(3, [Root(1, 2), Root(2, 3)])
    with pytest.raises(ValueError):
        ClosedSet.from_pairs(3, [(1, 2), (2, 3)])


@pytest.mark.parametrize('d, count', [(1, 1), (2, 2), (3, 7)])
def test_closed_set_counts(d, count):
    assert len(enumerate_closed_sets(d)) == count


def test_enumeration_guard():
    with pytest.raises(DimensionTooLarge):
        enumerate_closed_sets(6)


def test_closed_sets_contain_extremes():
    sets = enumerate_closed_sets(3)
    assert sets[0] == ClosedSet(3)
    assert ClosedSet.full(3) in sets


def test_perm_algebra():
    sigma = Perm((2, 3, 1))
    assert sigma(1) == 2
    assert sigma.compose(sigma.inverse()).is_identity()
    assert sigma.inverse().as_list() == [3, 1, 2]
    assert len(all_perms(4)) == 24
    with pytest.raises(ValueError):
        Perm((1, 1, 2))


def test_perm_matrix():
    """w_sigma sends e_j to e_sigma(j)"""
    w = Perm((2, 3, 1)).matrix()
    assert w[1, 0] == 1 and w[2, 1] == 1 and w[0, 2] == 1
    assert w.sum() == 3


def test_b_c_membership(c_of_204):
    A = [[1, 0, 5], [0, 2, 7], [0, 0, 3]]
    assert b_c_member(A, c_of_204)
    A[0][1] = 4
    assert not b_c_member(A, c_of_204)
    A[0][1] = 0
    A[2][0] = 1
    assert not b_c_member(A, c_of_204)


def test_w_c_example(c_of_204):
    """sigma must keep 3 last: W_C = {id, (2,1,3)}"""
    expected = {Perm((1, 2, 3)), Perm((2, 1, 3))}
    assert w_c_combinatorial(c_of_204) == expected
    assert w_c_conjugation(c_of_204) == expected


def test_w_c_of_empty_and_full_sets():
    assert w_c_combinatorial(ClosedSet(3)) == frozenset(all_perms(3))
    assert w_c_combinatorial(ClosedSet.full(3)) == {Perm.identity(3)}


@pytest.mark.parametrize('d', [2, 3, 4])
def test_both_descriptions_of_w_c_agree(d):
    """Exhaustive over every closed subset of R+"""
    for C in enumerate_closed_sets(d):
        assert w_c_combinatorial(C) == w_c_conjugation(C), C.pairs()


@pytest.mark.parametrize('d', [2, 3])
def test_sampling_oracle_agrees(d):
    for C in enumerate_closed_sets(d):
        assert w_c_sampled(C, p=5, samples=4, seed=1) == w_c_combinatorial(C)


@settings(deadline=None, max_examples=40)
@given(st.permutations([1, 2, 3, 4]), st.lists(st.integers(0, 6), min_size=16, max_size=16))
def test_matrix_conjugation_matches_index_remapping(images, values):
    GF = galois.GF(7)
    A = GF(np.array(values).reshape(4, 4))
    sigma = Perm(tuple(images))
    by_matrix = conjugate_by_matrix(A, sigma).tolist()
    by_index = conjugate_by_perm(A.tolist(), sigma)
    assert by_matrix == by_index


def test_conjugation_keeps_b_c_upper_triangular(c_of_204):
    """Members of W_C conjugate a member of B_C into the Borel"""
    A = [[1, 0, 5], [0, 2, 7], [0, 0, 3]]
    for sigma in w_c_combinatorial(c_of_204):
        assert is_upper_triangular(conjugate_by_perm(A, sigma))
    assert not is_upper_triangular(conjugate_by_perm(A, Perm((3, 1, 2))))
