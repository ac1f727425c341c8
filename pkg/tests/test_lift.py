"""
Unit tests for characters, genericity and ordinary lift certificates
"""

import dataclasses

import pytest

from src.algebra import FieldParams, teichmuller
from src.documents import validate_certificate
from src.errors import DocumentError, NotGeneric, ShapeViolation
from src.kisin import RankOneKisin, UTKisinModule, random_shaped_module
from src.lift import (
    CrysCharData,
    LiftCertificate,
    LiftPipeline,
    ModPChar,
    char_of_rank1,
    chars_of_module,
    genericity_check,
    ordinary_lift,
    twist_sweep,
    verify_certificate,
)
from src.phigamma import block_diagonal_tau


@pytest.fixture
def f5():
    return FieldParams(5)


@pytest.fixture
def char(f5):
    return lambda mu, s: ModPChar(f5.element(mu), s)


# ---------------------------------------------------------------------------
# Characters
# ---------------------------------------------------------------------------

def test_character_normalizes_power(f5, char):
    assert char(2, 5).s == 1
    assert char(2, -1).s == 3
    with pytest.raises(ValueError):
        ModPChar(f5.zero, 0)


def test_character_group_law(f5, char):
    chi = char(2, 1)
    assert chi * chi.inverse() == ModPChar.identity(f5)
    assert char(3, 2) / char(3, 1) == ModPChar.cyclotomic(f5)
    assert (char(3, 2) / char(3, 1)).is_cyclotomic()


@pytest.mark.parametrize('t, a, expected', [
    (0, 3, (3, 0)),
    (4, 3, (3, 0)),   # p - 1 = 4
    (1, 1, (1, 1)),   # eps_p itself
    (6, 2, (2, 2)),
])
def test_char_of_rank_one(f5, char, t, a, expected):
    assert char_of_rank1(RankOneKisin(t, f5.element(a))) == char(*expected)


def test_char_of_rank_one_with_psi_twist(f5, char):
    n = RankOneKisin(3, f5.element(1))
    assert char_of_rank1(n, psi_twist=2) == char(3, 3)


def test_chars_of_module(load_fixture, char):
    chars = chars_of_module(load_fixture('shape_t204.json'))
    assert chars == [char(1, 2), char(2, 0), char(3, 0)]


def test_character_document_form(f5, char):
    chi = char(4, 3)
    assert chi.to_dict() == {'mu': 4, 's': 3}
    assert ModPChar.from_dict(f5, chi.to_dict()) == chi


def test_crystalline_character_reduces(f5, char):
    lifted = CrysCharData(teichmuller(f5.element(2), 3), 6)
    assert lifted.hodge_tate_weight == 6
    assert lifted.reduce() == char(2, 2)
    with pytest.raises(ValueError):
        CrysCharData(teichmuller(f5.zero, 2), 0)


# ---------------------------------------------------------------------------
# Genericity
# ---------------------------------------------------------------------------

def test_single_character_is_generic(char):
    assert genericity_check([char(1, 1)])
    assert genericity_check([])


def test_genericity_witness(char):
    result = genericity_check([char(1, 0), char(2, 2), char(2, 1)])
    assert not result
    assert result.witness == (2, 3)


def test_different_units_are_generic(char):
    assert genericity_check([char(1, 0), char(2, 1)])


def test_genericity_is_twist_invariant(char):
    chars = [char(1, 0), char(3, 2), char(4, 1)]
    verdicts = twist_sweep(chars)
    assert [c for c, _ in verdicts] == [1, 2, 3, 4]
    assert len({generic for _, generic in verdicts}) == 1

    bad = [char(2, 1), char(2, 0)]
    assert all(not generic for _, generic in twist_sweep(bad, twists=[1, 3]))
    assert twist_sweep([]) == []


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

def test_lift_of_worked_example(f5, load_fixture):
    module = load_fixture('shape_t204.json')
    cert = ordinary_lift(module)
    assert cert.sigma.as_list() == [2, 1, 3]
    assert cert.ht_multiset == (0, 2, 4)
    assert cert.generic and cert.ordinary
    assert [chi.t for chi in cert.output_chars] == [0, 2, 4]
    assert [chi.a_hat.reduce() for chi in cert.output_chars] == [f5.element(2), f5.element(1), f5.element(3)]
    assert cert.output_chars[0].a_hat == teichmuller(f5.element(2), cert.M)
    assert verify_certificate(cert, module)


def test_lift_of_generic_fixture(load_fixture):
    module = load_fixture('lift_generic.json')
    cert = ordinary_lift(module)
    assert cert.sigma.is_identity()
    assert cert.ht_multiset == (0, 2)


def test_lift_of_rank_one(load_fixture):
    cert = ordinary_lift(load_fixture('lift_rank1.json'))
    assert cert.ht_multiset == (0,)
    assert cert.ordinary


def test_equal_units_can_be_generic(f5):
    """t = (4, 0) with a_1 = a_2 gives characters differing by the trivial character"""
    module = UTKisinModule.from_diagonal(f5, (4, 0), (f5.element(2), f5.element(2)))
    cert = ordinary_lift(module)
    assert cert.sigma.as_list() == [2, 1]
    assert verify_certificate(cert, module)


def test_not_generic_fixture(load_fixture):
    with pytest.raises(NotGeneric) as excinfo:
        ordinary_lift(load_fixture('lift_not_generic.json'))
    assert excinfo.value.witness == (2, 1)


def test_shape_violation_blocks_lift(load_fixture):
    with pytest.raises(ShapeViolation):
        ordinary_lift(load_fixture('shape_t204_mutated.json'))


def test_lift_with_tau_matrix(f5):
    module = UTKisinModule.from_diagonal(f5, (2, 0), (f5.one, f5.element(4)))
    tau = block_diagonal_tau(f5, (2, 0), 60)
    assert ordinary_lift(module, tau).sigma.as_list() == [2, 1]


def test_verification_detects_tampering(load_fixture):
    module = load_fixture('shape_t204.json')
    cert = ordinary_lift(module)

    bumped = list(cert.output_chars)
    bumped[2] = CrysCharData(bumped[2].a_hat, 8)
    assert not verify_certificate(dataclasses.replace(cert, output_chars=tuple(bumped)), module)

    reordered = tuple(reversed(cert.output_chars))
    assert not verify_certificate(dataclasses.replace(cert, output_chars=reordered), module)

    wrong_unit = list(cert.output_chars)
    wrong_unit[0] = CrysCharData(teichmuller(module.params.element(4), cert.M), 0)
    assert not verify_certificate(dataclasses.replace(cert, output_chars=tuple(wrong_unit)), module)

    assert not verify_certificate(dataclasses.replace(cert, ht_multiset=(0, 2, 2)), module)


def test_certificate_document_round_trip(load_fixture):
    cert = ordinary_lift(load_fixture('shape_t204.json'))
    document = cert.to_dict()
    assert validate_certificate(document) == document
    assert document['sigma'] == [2, 1, 3]
    assert document['field_params']['p'] == 5
    assert len(document['field_params']['defining_poly']) == 2
    assert LiftCertificate.from_dict(document) == cert


def test_malformed_certificate_document():
    with pytest.raises(DocumentError):
        LiftCertificate.from_dict({'field_params': {'p': 5}})


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

@pytest.mark.parametrize('weights', [(2, 0, 4), (0, 5), (3, 1, 0, 2)])
def test_pipeline_on_shaped_modules(f5, weights):
    pipeline = LiftPipeline(witt_precision=3)
    for seed in range(4):
        module = random_shaped_module(f5, len(weights), weights, seed)
        if not genericity_check(chars_of_module(module)):
            with pytest.raises(NotGeneric):
                pipeline.run(module)
            continue
        cert = pipeline.run(module)
        assert cert.M == 3
        assert sorted(weights) == list(cert.ht_multiset)


def test_pipeline_reraises(load_fixture):
    with pytest.raises(NotGeneric):
        LiftPipeline().run(load_fixture('lift_not_generic.json'))
