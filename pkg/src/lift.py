"""
Characters and ordinary crystalline lifts
Mod-p characters as (unramified part, power of the cyclotomic character),
the genericity hypothesis, and the pipeline emitting lift certificates
"""

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from src.algebra import EpsilonModel, FieldElem, FieldParams, WittScalar, teichmuller
from src.config import FIELD_CONFIG, LIFT_CONFIG
from src.errors import (
    DocumentError,
    InvariantFailure,
    NotGeneric,
    ShapeViolation,
    ToolkitError,
)
from src.kisin import RankOneKisin, UTKisinModule, encode_elem
from src.phigamma import TauMatrix, tau_shape_check
from src.rootsys import Perm
from src.shape import ShapeAnalyzer, find_sigma

logger = logging.getLogger(__name__)


def _decode_elem(params: FieldParams, value) -> FieldElem:
    if isinstance(value, list):
        return params.from_coords(value)
    return params.scalar(value)


@dataclass(frozen=True)
class ModPChar:
    """
    lambda_mu * eps_p^s with eps_p the mod p cyclotomic character

    Attributes:
        mu (FieldElem): Unramified part (value at arithmetic Frobenius), nonzero
        s (int): Power of eps_p, a residue mod p - 1
    """
    mu: FieldElem
    s: int

    def __post_init__(self):
        if self.mu.is_zero():
            raise ValueError("unramified part of a character must be nonzero")
        object.__setattr__(self, 's', self.s % (self.mu.params.p - 1))

    @classmethod
    def identity(cls, params: FieldParams) -> 'ModPChar':
        return cls(params.one, 0)

    @classmethod
    def cyclotomic(cls, params: FieldParams) -> 'ModPChar':
        return cls(params.one, 1)

    def __mul__(self, other: 'ModPChar') -> 'ModPChar':
        return ModPChar(self.mu * other.mu, self.s + other.s)

    def inverse(self) -> 'ModPChar':
        return ModPChar(self.mu.inverse(), -self.s)

    def __truediv__(self, other: 'ModPChar') -> 'ModPChar':
        return self * other.inverse()

    def is_cyclotomic(self) -> bool:
        return self == ModPChar.cyclotomic(self.mu.params)

    def twist(self, c) -> 'ModPChar':
        """Multiply by the unramified character lambda_c"""
        c = c if isinstance(c, FieldElem) else self.mu.params.scalar(c)
        return ModPChar(self.mu * c, self.s)

    def to_dict(self) -> dict:
        return {'mu': encode_elem(self.mu), 's': self.s}

    @classmethod
    def from_dict(cls, params: FieldParams, data: dict) -> 'ModPChar':
        return cls(_decode_elem(params, data['mu']), int(data['s']))

    def __repr__(self):
        return f"ModPChar(mu={self.mu}, s={self.s})"


@dataclass(frozen=True)
class CrysCharData:
    """lambda_{a_hat} * psi^t, a crystalline character with Hodge-Tate weight t"""
    a_hat: WittScalar
    t: int

    def __post_init__(self):
        if not self.a_hat.is_unit():
            raise ValueError("unramified part of a crystalline character must be a unit")

    @property
    def hodge_tate_weight(self) -> int:
        return self.t

    def reduce(self, psi_twist=None) -> ModPChar:
        return char_of_rank1(RankOneKisin(self.t, self.a_hat.reduce()), psi_twist)

    def to_dict(self) -> dict:
        return {'a_hat': list(self.a_hat.coeffs), 't': self.t}

    @classmethod
    def from_dict(cls, params: FieldParams, M: int, data: dict) -> 'CrysCharData':
        return cls(WittScalar(params, M, tuple(int(c) for c in data['a_hat'])), int(data['t']))


def char_of_rank1(n: RankOneKisin, psi_twist=None) -> ModPChar:
    """
    The mod p character of the rank-1 module m(t; a)

    With psi reducing to lambda_c * eps_p, lambda_a * psi^t reduces to
    (a * c^t, t mod (p - 1)); c is KISIN_PSI_TWIST (1 by default).
    """
    c = LIFT_CONFIG['psi_twist'] if psi_twist is None else psi_twist
    c = c if isinstance(c, FieldElem) else n.params.scalar(c)
    return ModPChar(n.a * c ** n.t, n.t)


def chars_of_module(M: UTKisinModule, psi_twist=None) -> List[ModPChar]:
    """Characters of the diagonal pieces in slot order"""
    return [char_of_rank1(piece, psi_twist) for piece in M.diagonal()]


@dataclass(frozen=True)
class GenericityResult:
    generic: bool
    witness: Optional[Tuple[int, int]] = None

    def __bool__(self):
        return self.generic


def genericity_check(chars: Sequence[ModPChar]) -> GenericityResult:
    """
    chi_i * chi_j^{-1} != eps_p for every ordered pair i != j

    Returns:
        GenericityResult: the first offending pair (1-based, lexicographic) when not generic
    """
    for i, chi_i in enumerate(chars):
        for j, chi_j in enumerate(chars):
            if i != j and (chi_i / chi_j).is_cyclotomic():
                logger.debug(f"genericity fails for slots {i + 1}, {j + 1}")
                return GenericityResult(False, (i + 1, j + 1))
    return GenericityResult(True)


def twist_sweep(chars: Sequence[ModPChar], twists: Optional[Iterable] = None) -> List[Tuple[int, bool]]:
    """Genericity verdicts after a global unramified twist by each c (all units by default)"""
    if not chars:
        return []
    params = chars[0].mu.params
    twists = list(twists) if twists is not None else list(params.units())
    verdicts = []
    for c in twists:
        twisted = [chi.twist(c) for chi in chars]
        verdicts.append((int(c), genericity_check(twisted).generic))
    return verdicts


@dataclass(frozen=True)
class LiftCertificate:
    """
    Data of an ordinary upper-triangular crystalline lift

    output_chars[i] is the lift of the input character in slot sigma(i + 1),
    with Hodge-Tate weight r_i, the i-th smallest input weight.
    """
    params: FieldParams
    M: int
    input_chars: Tuple[ModPChar, ...]
    sigma: Perm
    output_chars: Tuple[CrysCharData, ...]
    ht_multiset: Tuple[int, ...]
    generic: bool
    ordinary: bool

    def to_dict(self) -> dict:
        return {
            'schema_version': LIFT_CONFIG['schema_version'],
            'field_params': self.params.to_dict(),
            'witt_precision': self.M,
            'input_chars': [chi.to_dict() for chi in self.input_chars],
            'sigma': self.sigma.as_list(),
            'output_chars': [chi.to_dict() for chi in self.output_chars],
            'ht_multiset': list(self.ht_multiset),
            'generic': self.generic,
            'ordinary': self.ordinary,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'LiftCertificate':
        """
        Rebuild a certificate from its document form

        Raises:
            DocumentError: Missing or malformed fields
        """
        try:
            field = data['field_params']
            poly = field.get('defining_poly')
            params = FieldParams(int(field['p']), int(field.get('f', 1)), tuple(poly) if poly else None)
            M = int(data['witt_precision'])
            return cls(
                params=params,
                M=M,
                input_chars=tuple(ModPChar.from_dict(params, chi) for chi in data['input_chars']),
                sigma=Perm(tuple(data['sigma'])),
                output_chars=tuple(CrysCharData.from_dict(params, M, chi) for chi in data['output_chars']),
                ht_multiset=tuple(int(t) for t in data['ht_multiset']),
                generic=bool(data['generic']),
                ordinary=bool(data['ordinary']),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise DocumentError(f"malformed lift certificate: {e}")


def ordinary_lift(M: UTKisinModule, A_tau: Optional[TauMatrix] = None,
                  model: Optional[EpsilonModel] = None, witt_precision: Optional[int] = None) -> LiftCertificate:
    """
    Certificate of an ordinary crystalline lift of the representation of M

    Args:
        M (UTKisinModule): Module with the expected shape
        A_tau (TauMatrix, optional): tau-matrix to check against the shape as well
        model (EpsilonModel, optional): Model 1-unit for the tau check
        witt_precision (int, optional): Precision of the Teichmuller lifts

    Returns:
        LiftCertificate: sigma, the reordered crystalline characters and their weights

    Raises:
        ShapeViolation: the shape report has diagnostics
        NotGeneric: two characters differ by eps_p (witness in input slots)
    """
    report = ShapeAnalyzer().analyze(M)
    if not report.ok:
        raise ShapeViolation(report.diagnostics)

    pieces = M.diagonal()
    chars = [char_of_rank1(piece) for piece in pieces]
    genericity = genericity_check(chars)
    if not genericity:
        raise NotGeneric(genericity.witness)

    if A_tau is not None and not tau_shape_check(M, A_tau, model):
        raise InvariantFailure("consistent A_tau is not in B_C")

    witt_precision = witt_precision or FIELD_CONFIG['witt_precision']
    sigma = find_sigma(M.weights)
    r = sorted(M.weights)
    output = tuple(CrysCharData(teichmuller(pieces[sigma(i + 1) - 1].a, witt_precision), r[i])
                   for i in range(M.d))

    return LiftCertificate(
        params=M.params,
        M=witt_precision,
        input_chars=tuple(chars),
        sigma=sigma,
        output_chars=output,
        ht_multiset=tuple(r),
        generic=True,
        ordinary=all(a < b for a, b in zip(r, r[1:])),
    )


def verify_certificate(cert: LiftCertificate, M: UTKisinModule) -> bool:
    """
    Re-derive sigma, the reductions, the weight multiset and the ordering

    Weights are compared as multisets.
    """
    try:
        weights = M.weights
        chars = chars_of_module(M)
        sigma = find_sigma(weights)
    except ToolkitError as e:
        logger.debug(f"certificate check could not re-derive the module data: {e}")
        return False

    if cert.params != M.params or cert.sigma != sigma or len(cert.output_chars) != M.d:
        return False
    if tuple(cert.input_chars) != tuple(chars):
        return False
    if Counter(cert.ht_multiset) != Counter(weights):
        return False

    r = [chi.t for chi in cert.output_chars]
    if not all(a < b for a, b in zip(r, r[1:])) or not cert.ordinary:
        return False
    if sorted(r) != sorted(weights):
        return False

    for i, chi in enumerate(cert.output_chars):
        slot = sigma(i + 1) - 1
        if chi.t != weights[slot] or chi.reduce() != chars[slot]:
            return False
    return cert.generic == genericity_check(chars).generic


class LiftPipeline:
    """analyze -> genericity -> optional tau shape -> certificate"""

    def __init__(self, model: Optional[EpsilonModel] = None, witt_precision: Optional[int] = None):
        self.logger = logging.getLogger(__name__)
        self.model = model
        self.witt_precision = witt_precision or FIELD_CONFIG['witt_precision']

    def run(self, M: UTKisinModule, A_tau: Optional[TauMatrix] = None) -> LiftCertificate:
        self.logger.info(f"Lifting module of rank {M.d} with weights {list(M.weights)}")
        try:
            cert = ordinary_lift(M, A_tau, self.model, self.witt_precision)
        except NotGeneric as e:
            self.logger.warning(f"Input is not generic: witness {e.witness}")
            raise
        except ShapeViolation as e:
            self.logger.warning(f"Input fails the shape check: {e}")
            raise
        except ToolkitError as e:
            self.logger.error(f"Lift pipeline failed: {e}")
            raise

        if not verify_certificate(cert, M):
            self.logger.error("Emitted certificate does not verify")
            raise InvariantFailure("certificate failed re-verification")
        self.logger.info(f"Certificate emitted: sigma = {cert.sigma.as_list()}, weights {list(cert.ht_multiset)}")
        return cert
