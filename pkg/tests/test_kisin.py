"""
Unit tests for Kisin-module data, the height condition and the seeded generators
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.algebra import FieldParams, PolySeries, WittPoly, WittScalar
from src.errors import (
    BadDiagonal,
    BadWeights,
    NoHom,
    PreconditionFailed,
    SingularMatrix,
)
from src.kisin import (
    MUTATION_KINDS,
    RankOneKisin,
    UTKisinModule,
    extra_term_degree,
    height_check,
    hom_exists,
    mutate_module,
    random_lift,
    random_shaped_module,
    reduce_lift,
    teichmuller_lift,
)
from src.shape import ShapeAnalyzer


@pytest.fixture
def f5():
    return FieldParams(5)


@pytest.fixture
def u_poly(f5):
    """u^k over F_5"""
    return lambda k, c=1: PolySeries.monomial(f5, c, k)


@pytest.fixture
def shaped_204(f5):
    """The shaped module with weights (2, 0, 4)"""
    return random_shaped_module(f5, 3, (2, 0, 4), seed=11)


# ---------------------------------------------------------------------------
# Rank one
# ---------------------------------------------------------------------------

def test_rank_one_validation(f5):
    with pytest.raises(BadWeights):
        RankOneKisin(-1, f5.one)
    with pytest.raises(ValueError):
        RankOneKisin(2, f5.zero)


def test_rank_one_lift_reduces_back(f5):
    n = RankOneKisin(3, f5.element(2))
    lift = n.lift(2)
    assert lift.reduce() == n
    assert lift.matrix_entry().reduce() == n.matrix_entry()
    assert lift.matrix_entry().degree == 3


@pytest.mark.parametrize('source, target, expected', [
    ((4, 1), (0, 1), 1),     # gap p - 1
    ((3, 2), (3, 2), 0),     # identity
    ((0, 1), (4, 1), None),  # wrong direction
    ((2, 1), (0, 1), None),  # gap not a multiple of p - 1
    ((4, 1), (0, 2), None),  # different units
])
def test_hom_exists(f5, source, target, expected):
    s = RankOneKisin(source[0], f5.element(source[1]))
    t = RankOneKisin(target[0], f5.element(target[1]))
    assert hom_exists(s, t) == expected


def test_extra_term_degree():
    assert extra_term_degree(0, 4, 5) == 5
    assert extra_term_degree(1, 5, 5) == 6
    assert extra_term_degree(0, 2, 3) == 3
    with pytest.raises(NoHom):
        extra_term_degree(0, 2, 5)
    with pytest.raises(NoHom):
        extra_term_degree(4, 0, 5)


# ---------------------------------------------------------------------------
# Height
# ---------------------------------------------------------------------------

def test_height_of_diagonal_matrix(f5, u_poly):
    zero = PolySeries.zero(f5)
    A = [[u_poly(2), zero], [zero, u_poly(0)]]
    result = height_check(A, 2)
    assert result
    assert result.witness == ((u_poly(0), zero), (zero, u_poly(2)))
    assert not height_check(A, 1)


def test_height_witness_of_triangular_matrix(f5, u_poly):
    zero = PolySeries.zero(f5)
    A = [[u_poly(1), u_poly(0)], [zero, u_poly(1)]]
    result = height_check(A, 2)
    assert result
    assert result.witness == ((u_poly(1), u_poly(0, 4)), (zero, u_poly(1)))


def test_height_of_non_triangular_matrix(f5, u_poly):
    """Criterion u^r adj(A) divisible by det(A)"""
    zero = PolySeries.zero(f5)
    swap = [[zero, u_poly(0)], [u_poly(0), zero]]
    assert height_check(swap, 0)

    A = [[u_poly(1), u_poly(0)], [u_poly(1), zero]]
    assert not height_check(A, 0)
    assert height_check(A, 1)


def test_height_of_singular_matrix(f5, u_poly):
    A = [[u_poly(1), u_poly(1)], [u_poly(1), u_poly(1)]]
    with pytest.raises(SingularMatrix):
        height_check(A, 3)
    zero = PolySeries.zero(f5)
    with pytest.raises(SingularMatrix):
        height_check([[zero, u_poly(0)], [zero, u_poly(1)]], 1)


def test_height_over_witt_vectors(f5):
    module = UTKisinModule.from_diagonal(f5, (0, 2), (f5.one, f5.element(3)), r=2,
                                         off_diagonal={(1, 2): PolySeries.monomial(f5, 4, 0)})
    lift = teichmuller_lift(module, 2)
    assert height_check(lift.A_phi_lift, 2)

    lower = [list(row) for row in lift.A_phi_lift]
    lower[1][0] = WittPoly.one(f5, 2)
    with pytest.raises(ValueError):
        height_check(lower, 2)


@st.composite
def triangular_matrices(draw):
    """Upper-triangular matrices over F_5[u] with monomial diagonal"""
    params = FieldParams(5)
    d = draw(st.integers(1, 3))
    rows = [[PolySeries.zero(params)] * d for _ in range(d)]
    weights = []
    for i in range(d):
        t = draw(st.integers(0, 3))
        weights.append(t)
        rows[i][i] = PolySeries.monomial(params, draw(st.integers(1, 4)), t)
        for j in range(i + 1, d):
            rows[i][j] = PolySeries(params, draw(st.lists(st.integers(0, 4), max_size=4)))
    return rows, weights


@settings(deadline=None, max_examples=40)
@given(triangular_matrices())
def test_height_is_monotone_in_r(data):
    """Once A B = u^r Id has an integral solution, so does every larger r"""
    A, weights = data
    verdicts = [bool(height_check(A, r)) for r in range(sum(weights) + 2)]
    assert verdicts[sum(weights)]
    first = verdicts.index(True)
    assert all(verdicts[first:])


# ---------------------------------------------------------------------------
# Modules
# ---------------------------------------------------------------------------

def test_module_dimensions(f5, u_poly):
    with pytest.raises(ValueError):
        UTKisinModule(f5, 2, [[u_poly(0)]], 0)
    with pytest.raises(ValueError):
        UTKisinModule(f5, 1, [[u_poly(0)]], -1)
    other = PolySeries.one(FieldParams(7))
    with pytest.raises(ValueError):
        UTKisinModule(f5, 1, [[other]], 0)


def test_diagonal_and_weights(shaped_204):
    assert shaped_204.weights == (2, 0, 4)
    assert len(shaped_204.units) == 3
    assert shaped_204.is_upper_triangular()
    assert shaped_204.validate(crys=True) is shaped_204


def test_non_monomial_diagonal(f5):
    module = UTKisinModule(f5, 1, [[PolySeries(f5, (1, 1))]], 1)
    with pytest.raises(BadDiagonal) as excinfo:
        module.diagonal()
    assert excinfo.value.index == 1


def test_validate(f5, u_poly):
    zero = PolySeries.zero(f5)
    lower = UTKisinModule(f5, 2, [[u_poly(0), zero], [u_poly(0), u_poly(1)]], 1)
    with pytest.raises(ValueError):
        lower.validate()

    shifted = UTKisinModule.from_diagonal(f5, (1, 2), (f5.one, f5.one))
    with pytest.raises(BadWeights):
        shifted.validate(crys=True)

    too_low = UTKisinModule.from_diagonal(f5, (2, 0), (f5.one, f5.one), r=1)
    with pytest.raises(PreconditionFailed):
        too_low.validate()


def test_module_to_dict(f5, u_poly):
    module = UTKisinModule.from_diagonal(f5, (0, 2), (f5.element(2), f5.one),
                                         off_diagonal={(1, 2): u_poly(0, 3)})
    assert module.to_dict() == {'d': 2, 'r': 2, 'A_phi': [[[2], [3]], [[], [0, 0, 1]]]}


def test_extension_field_encoding():
    f25 = FieldParams(5, 2)
    module = UTKisinModule.from_diagonal(f25, (1,), (f25.from_coords([1, 1]),))
    assert module.to_dict()['A_phi'] == [[[[0, 0], [1, 1]]]]


# ---------------------------------------------------------------------------
# Lifts
# ---------------------------------------------------------------------------

def test_teichmuller_lift_reduces_to_module(f5, u_poly):
    module = UTKisinModule.from_diagonal(f5, (0, 2), (f5.one, f5.element(3)), r=2,
                                         off_diagonal={(1, 2): u_poly(0, 4)})
    lift = teichmuller_lift(module, 2)
    assert lift.A_phi_lift[0][1].coefficient(0) == WittScalar.from_int(f5, 2, 4) ** 5
    assert reduce_lift(lift) == module


def test_teichmuller_lift_rejects_extra_terms(f5, u_poly):
    module = UTKisinModule.from_diagonal(f5, (0, 4), (f5.one, f5.one),
                                         off_diagonal={(1, 2): u_poly(5)})
    with pytest.raises(ValueError):
        teichmuller_lift(module)


@pytest.mark.parametrize('seed', range(6))
def test_random_lift_reduction(f5, seed):
    lift = random_lift(f5, 3, (4, 0, 1), seed)
    assert height_check(lift.A_phi_lift, lift.r)
    reduced = lift.reduce()
    assert reduced.weights == (4, 0, 1)
    assert ShapeAnalyzer().analyze(reduced).ok


# ---------------------------------------------------------------------------
# Generators and mutations
# ---------------------------------------------------------------------------

def test_shaped_module_is_deterministic(f5):
    first = random_shaped_module(f5, 3, (2, 0, 4), seed=3)
    second = random_shaped_module(f5, 3, (2, 0, 4), seed=3)
    assert first == second


@pytest.mark.parametrize('weights', [(2, 0, 4), (0, 4, 1, 5), (5, 0), (3, 1, 0, 2)])
def test_shaped_modules_pass_analysis(f5, weights):
    for seed in range(10):
        module = random_shaped_module(f5, len(weights), weights, seed)
        report = ShapeAnalyzer().analyze(module)
        assert report.ok, report.codes()


def test_shaped_module_weight_checks(f5):
    with pytest.raises(BadWeights):
        random_shaped_module(f5, 2, (1, 1), 0)
    with pytest.raises(BadWeights):
        random_shaped_module(f5, 2, (0, 6), 0)
    with pytest.raises(BadWeights):
        random_shaped_module(f5, 3, (0, 1), 0)


@pytest.mark.parametrize('kind', MUTATION_KINDS)
def test_mutations_are_flagged(f5, kind):
    flagged = 0
    for seed in range(8):
        module = random_shaped_module(f5, 3, (2, 0, 4), seed)
        mutation = mutate_module(module, kind, seed)
        if mutation is None:
            continue
        assert mutation.kind == kind
        assert mutation.module != module
        assert kind in ShapeAnalyzer().analyze(mutation.module).codes()
        flagged += 1
    assert flagged


def test_mutation_without_candidates(f5):
    """Weights in increasing order leave no forbidden y position"""
    module = random_shaped_module(f5, 3, (0, 1, 2), 0)
    assert mutate_module(module, 'Y_NONZERO_FORBIDDEN', 0) is None
    with pytest.raises(ValueError):
        mutate_module(module, 'NOT_A_KIND', 0)
