"""
Unit tests for the arithmetic layer: k_E, k_E[u], Witt scalars and the model ring
"""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.algebra import (
    EpsilonModel,
    FieldElem,
    FieldParams,
    PolySeries,
    RamSeries,
    WittPoly,
    WittScalar,
    default_precision,
    e_polynomial,
    field_arith,
    padic_digits,
    phi_poly,
    phi_ram,
    poly_arith,
    ram_from_poly,
    reduce_mod_p,
    tau_ram,
    teichmuller,
    unit_pow_zp,
    v_R,
    witt_ops,
)
from src.errors import (
    DivisionByZero,
    IndeterminateValuation,
    NotDivisible,
    NotTopologicallyNilpotent,
)


@pytest.fixture
def f5():
    """The prime field F_5"""
    return FieldParams(5)


@pytest.fixture
def f25():
    """F_25 with its Conway polynomial"""
    return FieldParams(5, 2)


def poly(params, *coeffs):
    return PolySeries(params, coeffs)


# ---------------------------------------------------------------------------
# k_E
# ---------------------------------------------------------------------------

def test_field_params_validation():
    """Only odd primes and monic irreducible defining polynomials are accepted"""
    with pytest.raises(ValueError):
        FieldParams(2)
    with pytest.raises(ValueError):
        FieldParams(9)
    with pytest.raises(ValueError):
        FieldParams(5, 2, (0, 0, 1))  # y^2 is reducible
    with pytest.raises(ValueError):
        FieldParams(5, 2, (2, 4, 3))  # not monic


def test_conway_polynomial_default(f25):
    """F_25 defaults to the Conway polynomial y^2 + 4y + 2"""
    assert f25.defining_poly == (2, 4, 1)
    assert f25.order == 25
    assert FieldParams.default(5, 1) == FieldParams(5)


def test_prime_field_arithmetic(f5):
    two, three = f5.element(2), f5.element(3)
    assert two * three == f5.one
    assert two.inverse() == three
    assert two + 3 == f5.zero
    assert two - three == f5.element(4)
    assert field_arith(two, three, 'mul') == f5.one
    assert field_arith(two, op='inv') == three


def test_inverse_of_zero_raises(f5):
    with pytest.raises(DivisionByZero):
        f5.zero.inverse()
    with pytest.raises(ZeroDivisionError):
        field_arith(f5.zero, op='inv')


def test_coordinates_round_trip(f25):
    """Integer representation digits are the power-basis coordinates"""
    a = f25.from_coords([3, 1])
    assert a.value == 3 + 1 * 5
    assert a.coeffs == (3, 1)


@settings(deadline=None, max_examples=60)
@given(st.integers(0, 24), st.integers(0, 24), st.integers(0, 24))
def test_field_laws_f25(a, b, c):
    """Distributivity and Frobenius additivity in F_25"""
    params = FieldParams(5, 2)
    x, y, z = params.element(a), params.element(b), params.element(c)
    assert x * (y + z) == x * y + x * z
    assert (x + y).frobenius() == x.frobenius() + y.frobenius()
    assert x.frobenius().frobenius() == x


# ---------------------------------------------------------------------------
# k_E[u]
# ---------------------------------------------------------------------------

def test_polynomial_arithmetic(f5):
    one_plus_u = poly(f5, 1, 1)
    square = one_plus_u * one_plus_u
    assert square == poly(f5, 1, 2, 1)
    assert square.degree == 2
    assert poly(f5).degree == -1
    assert poly(f5, 0, 0, 3).low_degree == 2
    assert poly(f5, 0, 0, 3).is_monomial()


def test_divisibility(f5):
    one_plus_u = poly(f5, 1, 1)
    square = poly(f5, 1, 2, 1)
    assert one_plus_u.divides(square)
    assert poly_arith(one_plus_u, square, 'divides')
    assert poly_arith(square, one_plus_u, 'exact_div') == one_plus_u
    with pytest.raises(NotDivisible):
        poly_arith(one_plus_u, poly(f5, 0, 1), 'exact_div')


def test_division_by_zero_polynomial(f5):
    with pytest.raises(DivisionByZero):
        poly(f5, 1, 1).divmod(poly(f5))


def test_phi_on_polynomials(f5):
    """phi sends u to u^p and fixes coefficients"""
    assert phi_poly(poly(f5, 1, 2)) == poly(f5, 1, 0, 0, 0, 0, 2)
    a, b = poly(f5, 2, 1), poly(f5, 0, 3, 1)
    assert phi_poly(a * b) == phi_poly(a) * phi_poly(b)


# ---------------------------------------------------------------------------
# Witt scalars and polynomials
# ---------------------------------------------------------------------------

def test_witt_scalar_arithmetic(f5):
    """W_2(F_5) is Z/25"""
    seven, four = WittScalar.from_int(f5, 2, 7), WittScalar.from_int(f5, 2, 4)
    assert (seven * four).coeffs == (3,)
    assert WittScalar.from_int(f5, 2, 2).inverse().coeffs == (13,)
    assert witt_ops(seven, four, 'sub').coeffs == (3,)
    with pytest.raises(DivisionByZero):
        WittScalar.from_int(f5, 2, 5).inverse()


def test_teichmuller_prime_field(f5):
    """[2] in Z/25 is 7, since 7^4 = 1 mod 25"""
    lift = teichmuller(f5.element(2), 2)
    assert lift.coeffs == (7,)
    assert reduce_mod_p(lift) == f5.element(2)


@settings(deadline=None, max_examples=30)
@given(st.integers(1, 24))
def test_teichmuller_is_fixed_by_q_power(value):
    params = FieldParams(5, 2)
    a = params.element(value)
    lift = teichmuller(a, 3)
    assert lift.reduce() == a
    assert lift ** params.order == lift
    assert lift * lift.inverse() == WittScalar.one(params, 3)


def test_e_polynomial_division(f5):
    E = e_polynomial(f5, 2)
    assert E.reduce() == poly(f5, 0, 1)
    quotient, remainder = (E * E).divmod_monic(E)
    assert quotient == E
    assert remainder.is_zero()


def test_divmod_monic_needs_unit_leading_coefficient(f5):
    five_u = WittPoly.monomial(WittScalar.from_int(f5, 2, 5), 1)
    with pytest.raises(DivisionByZero):
        WittPoly.one(f5, 2).divmod_monic(five_u)


# ---------------------------------------------------------------------------
# Model ring
# ---------------------------------------------------------------------------

def test_padic_digits():
    """5/4 = 0 + 4*5 + 3*25 + ... in Z_5"""
    assert padic_digits(Fraction(5, 4), 5, 3) == (0, 4, 3)
    assert padic_digits(7, 5, 3) == (2, 1, 0)
    with pytest.raises(ValueError):
        padic_digits(Fraction(1, 5), 5, 2)


def test_truncated_product_loses_exactness(f5):
    x = RamSeries.monomial(f5, 1, 1, 4)
    cube = x * x * x
    assert cube.exact
    fourth = cube * x
    assert fourth.is_zero_up_to_precision()
    assert not fourth.exact


def test_valuation(f5):
    """v(u) = 1, hence v(x) = 1/(p-1)"""
    assert v_R(ram_from_poly(poly(f5, 0, 1), 20)) == 1
    assert v_R(RamSeries.monomial(f5, 3, 2, 20)) == Fraction(1, 2)
    assert v_R(RamSeries.zero(f5, 20)) == math.inf
    x = RamSeries.monomial(f5, 1, 3, 4)
    with pytest.raises(IndeterminateValuation):
        v_R(x * x)


def test_mixed_precision_sum_drops_exactness(f5):
    """Terms above the common precision are lost, so the sum is no longer exact"""
    high = RamSeries.monomial(f5, 1, 50, 100)
    total = high + RamSeries.zero(f5, 20)
    assert total.N == 20
    assert total.is_zero_up_to_precision()
    assert not total.exact
    with pytest.raises(IndeterminateValuation):
        v_R(total)

    low = RamSeries.monomial(f5, 1, 3, 100) + RamSeries.zero(f5, 20)
    assert low.exact
    assert v_R(low) == Fraction(3, 4)


def test_mixed_precision_product_drops_exactness(f5):
    high = RamSeries.monomial(f5, 2, 50, 100)
    product = high * RamSeries.one(f5, 20)
    assert not product.exact
    with pytest.raises(IndeterminateValuation):
        v_R(product)

    kept = RamSeries.monomial(f5, 2, 5, 100) * RamSeries.monomial(f5, 1, 3, 20)
    assert kept.exact
    assert kept == RamSeries.monomial(f5, 2, 8, 20)


def series(max_degree=12, N=200):
    """Exact elements of k_E[x] with F_5 coefficients, far below the precision"""
    return st.lists(st.integers(0, 4), min_size=1, max_size=max_degree).map(
        lambda coeffs: RamSeries(FieldParams(5), tuple(coeffs), N))


@settings(deadline=None, max_examples=60)
@given(series(), series())
def test_valuation_is_multiplicative_and_ultrametric(a, b):
    assert v_R(a * b) == v_R(a) + v_R(b)
    assert v_R(a + b) >= min(v_R(a), v_R(b))
    if v_R(a) != v_R(b):
        assert v_R(a + b) == min(v_R(a), v_R(b))


@settings(deadline=None, max_examples=60)
@given(series())
def test_phi_multiplies_valuation_by_p(z):
    assert v_R(phi_ram(z)) == 5 * v_R(z)
    assert phi_ram(z).exact


@settings(deadline=None, max_examples=20)
@given(series(8, 40), series(8, 40))
def test_tau_is_a_valuation_preserving_ring_map(a, b):
    assert tau_ram(a * b).agrees_with(tau_ram(a) * tau_ram(b))
    assert tau_ram(a + b).agrees_with(tau_ram(a) + tau_ram(b))
    if not a.is_zero_up_to_precision():
        assert v_R(tau_ram(a)) == v_R(a)


exponents = st.builds(Fraction, st.integers(0, 30), st.sampled_from([1, 2, 3, 4, 6, 7]))


@settings(deadline=None, max_examples=25)
@given(exponents, exponents, st.integers(1, 6))
def test_unit_pow_group_law(alpha, beta, shift):
    """(1+z)^alpha (1+z)^beta = (1+z)^(alpha+beta)"""
    params = FieldParams(5)
    z = RamSeries(params, (0,) * shift + (1, 3), 60)
    product = unit_pow_zp(z, alpha) * unit_pow_zp(z, beta)
    assert product.agrees_with(unit_pow_zp(z, alpha + beta))


def witt_polys(M=2):
    params = FieldParams(5)
    return st.lists(st.integers(0, 5 ** M - 1), max_size=6).map(
        lambda values: WittPoly(params, M, tuple(WittScalar.from_int(params, M, n) for n in values)))


@settings(deadline=None, max_examples=40)
@given(witt_polys(), witt_polys())
def test_reduction_mod_p_is_a_ring_map(a, b):
    assert (a + b).reduce() == a.reduce() + b.reduce()
    assert (a * b).reduce() == a.reduce() * b.reduce()
    assert reduce_mod_p(a - b) == reduce_mod_p(a) - reduce_mod_p(b)


def test_unit_pow_integer_exponent(f5):
    """(1 + x^5)^2 is computed exactly"""
    z = RamSeries.monomial(f5, 1, 5, 30)
    square = unit_pow_zp(z, 2)
    expected = RamSeries(f5, (1,) + (0,) * 4 + (2,) + (0,) * 4 + (1,), 30)
    assert square == expected
    assert square.exact


def test_unit_pow_needs_positive_valuation(f5):
    with pytest.raises(NotTopologicallyNilpotent):
        unit_pow_zp(RamSeries.one(f5, 10), 2)


@settings(deadline=None, max_examples=25)
@given(st.integers(1, 7), st.integers(1, 9))
def test_unit_pow_fraction_inverts_power(k, shift):
    """((1 + z)^{1/k})^k = 1 + z for k prime to p"""
    params = FieldParams(5)
    if k % 5 == 0:
        return
    z = RamSeries(params, (0,) * shift + (1, 2), 60)
    root = unit_pow_zp(z, Fraction(1, k))
    assert (root ** k).agrees_with(RamSeries.one(params, 60) + z)


@pytest.mark.parametrize('name', ['standard', 'shifted', 'doubled'])
def test_epsilon_models(name, f5):
    """phi(eps) = eps^p for every preset"""
    model = EpsilonModel.from_name(name)
    eps = model.epsilon(f5, 80)
    assert eps.coefficient(0) == f5.one
    assert eps.lowest_exponent == 0
    assert (eps - 1).lowest_exponent == 5
    assert phi_ram(eps).agrees_with(eps ** 5)


def test_epsilon_model_parsing():
    assert EpsilonModel.from_name('shifted').g == (1, 1)
    custom = EpsilonModel.from_name('1,2')
    assert custom.name == 'custom'
    assert custom.g == (1, 2)
    with pytest.raises(ValueError):
        EpsilonModel.from_name('nonsense')
    with pytest.raises(ValueError):
        EpsilonModel('zero', (5,)).g_values(5)


def test_tau_of_u_is_u_times_epsilon(f5):
    u = ram_from_poly(poly(f5, 0, 1), 60)
    eps = EpsilonModel.from_name('standard').epsilon(f5, 60)
    assert tau_ram(u).agrees_with(u * eps)


def test_tau_fixes_scalars(f5):
    c = RamSeries(f5, (3,), 40)
    assert tau_ram(c) == c


def test_tau_over_extension_field(f25):
    """tau is k_E-linear: tau(c u) = c tau(u)"""
    c = f25.from_coords([1, 2])
    u = ram_from_poly(poly(f25, 0, 1), 50)
    assert tau_ram(u * c).agrees_with(tau_ram(u) * c)


def test_default_precision():
    assert default_precision(5, 2) == 200
    assert default_precision(3, 0) == 36
    assert default_precision(3, 0, factor=1) == 9
