"""
Kisin-module data
Rank-1 modules and their lifts, upper-triangular Frobenius matrices, the
height condition, Hom-existence between rank-1 modules, reduction of lifts and
the seeded generators used by the fuzzing driver
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.algebra import (
    FieldElem,
    FieldParams,
    PolySeries,
    WittPoly,
    WittScalar,
    e_polynomial,
    teichmuller,
)
from src.config import FIELD_CONFIG, SHAPE_CONFIG
from src.errors import (
    BadDiagonal,
    BadWeights,
    DivisionByZero,
    InvariantFailure,
    NoHom,
    NotDivisible,
    PreconditionFailed,
    SingularMatrix,
)
from src.rootsys import is_upper_triangular

logger = logging.getLogger(__name__)

Matrix = Tuple[Tuple, ...]


def _freeze(rows) -> Matrix:
    return tuple(tuple(row) for row in rows)


# ---------------------------------------------------------------------------
# Rank one
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RankOneKisin:
    """m(t; a): phi(e) = a * u^t * e"""
    t: int
    a: FieldElem

    def __post_init__(self):
        if self.t < 0:
            raise BadWeights(f"weight must be non-negative, got {self.t}")
        if self.a.is_zero():
            raise ValueError("unit part of a rank-1 Kisin module must be nonzero")

    @property
    def params(self) -> FieldParams:
        return self.a.params

    def matrix_entry(self) -> PolySeries:
        return PolySeries.monomial(self.params, self.a, self.t)

    def lift(self, M: Optional[int] = None) -> 'RankOneLift':
        return RankOneLift(self.t, teichmuller(self.a, M))


@dataclass(frozen=True)
class RankOneLift:
    """m(t; a_hat): phi(e) = a_hat * (u - p)^t * e"""
    t: int
    a_hat: WittScalar

    def __post_init__(self):
        if self.t < 0:
            raise BadWeights(f"weight must be non-negative, got {self.t}")
        if not self.a_hat.is_unit():
            raise ValueError(f"{self.a_hat} is not a unit")

    def matrix_entry(self) -> WittPoly:
        E = e_polynomial(self.a_hat.params, self.a_hat.M)
        return (E ** self.t) * self.a_hat

    def reduce(self) -> RankOneKisin:
        return RankOneKisin(self.t, self.a_hat.reduce())


def hom_exists(source: RankOneKisin, target: RankOneKisin) -> Optional[int]:
    """
    Degree s of a nonzero morphism m(t_j; a_j) -> m(t_i; a_i), e_j -> c u^s e_i

    phi-equivariance forces a_i = a_j and s (p - 1) = t_j - t_i.

    Returns:
        Optional[int]: s, or None when only the zero map exists
    """
    p = source.params.p
    gap = source.t - target.t
    if source.a != target.a or gap < 0 or gap % (p - 1):
        return None
    return gap // (p - 1)


def extra_term_degree(t_i: int, t_j: int, p: int) -> int:
    """
    Degree t_j + (t_j - t_i)/(p - 1) of the extra term forced by a Hom j -> i

    Raises:
        NoHom: the weights admit no morphism in the j -> i direction
    """
    gap = t_j - t_i
    if gap < 0 or gap % (p - 1):
        raise NoHom(f"no morphism of weight {t_j} -> weight {t_i} for p={p}")
    degree = t_j + gap // (p - 1)
    if t_j <= p and gap == p - 1 and degree < p:
        raise InvariantFailure(f"extra term of degree {degree} below p={p}")
    return degree


# ---------------------------------------------------------------------------
# Height
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HeightResult:
    """Outcome of a height check; truthy iff the condition holds"""
    holds: bool
    witness: Optional[Matrix] = None

    def __bool__(self):
        return self.holds


def determinant(A):
    """Laplace expansion along the first row (ring entries, small d)"""
    d = len(A)
    if d == 1:
        return A[0][0]
    total = None
    for j in range(d):
        if A[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in A[1:]]
        term = A[0][j] * determinant(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total if total is not None else A[0][0] * 0


def adjugate(A) -> list:
    """Transpose of the cofactor matrix"""
    d = len(A)
    if d == 1:
        return [[A[0][0] * 0 + 1]]
    adj = [[None] * d for _ in range(d)]
    for i in range(d):
        for j in range(d):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(A) if k != i]
            cofactor = determinant(minor)
            adj[j][i] = -cofactor if (i + j) % 2 else cofactor
    return adj


def _matmul(A, B):
    d = len(A)
    return [[_dot(A[i], [B[k][j] for k in range(d)]) for j in range(d)] for i in range(d)]


def _dot(row, column):
    total = row[0] * column[0]
    for a, b in zip(row[1:], column[1:]):
        total = total + a * b
    return total


def _scalar_identity(A, scale):
    d = len(A)
    zero = scale * 0
    return [[scale if i == j else zero for j in range(d)] for i in range(d)]


def _triangular_witness(A, E_r, divide):
    """Solve A B = E^r Id by back substitution; None when a division is not exact"""
    d = len(A)
    zero = E_r * 0
    B = [[zero] * d for _ in range(d)]
    for j in range(d):
        for i in range(j, -1, -1):
            rhs = E_r if i == j else zero
            for k in range(i + 1, j + 1):
                rhs = rhs - A[i][k] * B[k][j]
            quotient = divide(rhs, A[i][i])
            if quotient is None:
                return None
            B[i][j] = quotient
    return B


def _divide_poly(numerator: PolySeries, divisor: PolySeries) -> Optional[PolySeries]:
    try:
        return numerator.exact_div(divisor)
    except NotDivisible:
        return None


def _divide_witt(numerator: WittPoly, divisor: WittPoly) -> Optional[WittPoly]:
    quotient, remainder = numerator.divmod_monic(divisor)
    return quotient if remainder.is_zero() else None


def height_check(A, r: int) -> HeightResult:
    """
    Height condition A B = E(u)^r Id with B integral

    Over k_E[u] (E(u) = u) the criterion is divisibility of E^r adj(A) by det(A);
    upper-triangular matrices (over k_E[u] or W_M(k_E)[u]) are solved by back
    substitution. A returned witness is re-verified.

    Args:
        A: Square matrix of PolySeries or WittPoly
        r (int): Height

    Returns:
        HeightResult: holds flag and witness B

    Raises:
        SingularMatrix: det(A) = 0
    """
    d = len(A)
    sample = A[0][0]

    if isinstance(sample, WittPoly):
        if not is_upper_triangular(A):
            raise ValueError("height check over W_M(k_E)[u] needs an upper-triangular matrix")
        if any(A[i][i].is_zero() for i in range(d)):
            raise SingularMatrix("zero diagonal entry")
        E_r = e_polynomial(sample.params, sample.M) ** r
        try:
            B = _triangular_witness(A, E_r, _divide_witt)
        except DivisionByZero as e:
            raise SingularMatrix(f"diagonal entry without unit leading coefficient: {e}")
    else:
        params = sample.params
        E_r = PolySeries.monomial(params, 1, r)
        if is_upper_triangular(A):
            if any(A[i][i].is_zero() for i in range(d)):
                raise SingularMatrix("zero diagonal entry")
            B = _triangular_witness(A, E_r, _divide_poly)
        else:
            det = determinant(A)
            if det.is_zero():
                raise SingularMatrix("det(A) = 0")
            adj = adjugate(A)
            B = []
            for row in adj:
                scaled = [E_r * entry for entry in row]
                if not all(det.divides(entry) for entry in scaled):
                    B = None
                    break
                B.append([entry.exact_div(det) for entry in scaled])

    if B is None:
        return HeightResult(False)

    if _matmul(A, B) != _scalar_identity(A, E_r):
        logger.error("height witness failed re-verification")
        raise InvariantFailure("A * B != E(u)^r * Id for the computed witness")
    return HeightResult(True, _freeze(B))


# ---------------------------------------------------------------------------
# Modules
# ---------------------------------------------------------------------------

def encode_elem(a: FieldElem):
    """Integer for prime fields, coordinate list otherwise"""
    return a.value if a.params.f == 1 else list(a.coeffs)


def encode_poly(poly: PolySeries):
    """Ascending coefficient list in the document encoding"""
    if poly.params.f == 1:
        return list(poly.coeffs)
    return [list(poly.coefficient(k).coeffs) for k in range(len(poly.coeffs))]


@dataclass(frozen=True)
class UTKisinModule:
    """
    Mod-p Kisin module given by its matrix of Frobenius

    Construction only checks the dimensions; ``validate`` enforces upper
    triangularity, the monomial diagonal and the height condition.
    """
    params: FieldParams
    d: int
    A_phi: Matrix
    r: int

    def __post_init__(self):
        object.__setattr__(self, 'A_phi', _freeze(self.A_phi))
        if len(self.A_phi) != self.d or any(len(row) != self.d for row in self.A_phi):
            raise ValueError(f"A_phi must be {self.d}x{self.d}")
        for row in self.A_phi:
            for entry in row:
                if entry.params != self.params:
                    raise ValueError("A_phi entry over a different field")
        if self.r < 0:
            raise ValueError(f"height must be non-negative, got {self.r}")

    @classmethod
    def from_diagonal(cls, params: FieldParams, weights: Sequence[int], units: Sequence,
                      r: Optional[int] = None, off_diagonal: Optional[dict] = None) -> 'UTKisinModule':
        """
        Module with diagonal a_i u^{t_i} and optional above-diagonal entries

        Args:
            off_diagonal (dict, optional): {(i, j): PolySeries} with 1-based i < j
        """
        d = len(weights)
        rows = [[PolySeries.zero(params)] * d for _ in range(d)]
        for i, (t, a) in enumerate(zip(weights, units)):
            rows[i][i] = PolySeries.monomial(params, a, t)
        for (i, j), entry in (off_diagonal or {}).items():
            rows[i - 1][j - 1] = entry
        return cls(params, d, rows, max(weights) if r is None else r)

    def entry(self, i: int, j: int) -> PolySeries:
        """1-based access"""
        return self.A_phi[i - 1][j - 1]

    def diagonal(self) -> List[RankOneKisin]:
        """
        Rank-1 graded pieces read off the diagonal

        Raises:
            BadDiagonal: a diagonal entry is not a nonzero monomial
        """
        pieces = []
        for i in range(self.d):
            entry = self.A_phi[i][i]
            if not entry.is_monomial():
                raise BadDiagonal(f"diagonal entry {i + 1} is not of the form a*u^t: {entry}", index=i + 1)
            t = entry.low_degree
            pieces.append(RankOneKisin(t, entry.coefficient(t)))
        return pieces

    @property
    def weights(self) -> Tuple[int, ...]:
        return tuple(piece.t for piece in self.diagonal())

    @property
    def units(self) -> Tuple[FieldElem, ...]:
        return tuple(piece.a for piece in self.diagonal())

    def is_upper_triangular(self) -> bool:
        return is_upper_triangular(self.A_phi)

    def validate(self, crys: bool = False) -> 'UTKisinModule':
        """
        Enforce the module invariants

        Args:
            crys (bool): Also require distinct weights in [0, p] containing 0

        Raises:
            ValueError: not upper triangular
            BadDiagonal: non-monomial diagonal
            BadWeights: crystalline weight constraints violated
            PreconditionFailed: height condition fails
        """
        if not self.is_upper_triangular():
            raise ValueError("A_phi is not upper triangular")
        weights = self.weights
        if crys:
            check_crys_weights(weights, self.params.p)
        if not height_check(self.A_phi, self.r):
            raise PreconditionFailed(f"height condition fails for r={self.r}")
        return self

    def to_dict(self) -> dict:
        return {
            'd': self.d,
            'r': self.r,
            'A_phi': [[encode_poly(entry) for entry in row] for row in self.A_phi],
        }


def check_crys_weights(weights: Sequence[int], p: int) -> None:
    """
    Raises:
        BadWeights: weights tied, outside [0, p], or missing 0
    """
    if len(set(weights)) != len(weights):
        raise BadWeights(f"weights must be distinct: {list(weights)}")
    if any(t < 0 or t > p for t in weights):
        raise BadWeights(f"weights must lie in [0, {p}]: {list(weights)}")
    if weights and min(weights) != 0:
        raise BadWeights(f"smallest weight must be 0: {list(weights)}")


@dataclass(frozen=True)
class UTKisinLift:
    """Upper-triangular Kisin module over W_M(k_E)[u]"""
    params: FieldParams
    M: int
    d: int
    A_phi_lift: Matrix
    r: int

    def __post_init__(self):
        object.__setattr__(self, 'A_phi_lift', _freeze(self.A_phi_lift))
        if len(self.A_phi_lift) != self.d or any(len(row) != self.d for row in self.A_phi_lift):
            raise ValueError(f"A_phi_lift must be {self.d}x{self.d}")

    def reduce(self) -> UTKisinModule:
        return reduce_lift(self)


def reduce_lift(lift: UTKisinLift) -> UTKisinModule:
    """
    Entrywise reduction mod p

    When the lift satisfies its height condition, the reduced witness is
    checked against the reduced matrix.
    """
    rows = [[entry.reduce() for entry in row] for row in lift.A_phi_lift]
    module = UTKisinModule(lift.params, lift.d, rows, lift.r)

    result = height_check(lift.A_phi_lift, lift.r)
    if not result:
        logger.warning(f"lift of rank {lift.d} fails its height condition at r={lift.r}")
        return module

    witness = [[entry.reduce() for entry in row] for row in result.witness]
    u_r = PolySeries.monomial(lift.params, 1, lift.r)
    if _matmul(module.A_phi, witness) != _scalar_identity(module.A_phi, u_r):
        logger.error("reduced height witness does not verify")
        raise InvariantFailure("reduction of the height witness fails mod p")
    return module


def teichmuller_lift(module: UTKisinModule, M: Optional[int] = None) -> UTKisinLift:
    """
    Lift of a module without extra terms

    Diagonal a_i u^{t_i} lifts to a_hat_i (u-p)^{t_i}; above-diagonal y u^{t_i}
    lifts to y_hat (u-p)^{t_i}.

    Raises:
        ValueError: an off-diagonal entry is not of the form y * u^{t_i}
    """
    M = M or FIELD_CONFIG['witt_precision']
    params = module.params
    E = e_polynomial(params, M)
    weights = module.weights
    zero = WittPoly.zero(params, M)
    rows = [[zero] * module.d for _ in range(module.d)]
    for i in range(module.d):
        power = E ** weights[i]
        for j in range(i, module.d):
            entry = module.A_phi[i][j]
            if entry.is_zero():
                continue
            if not entry.is_monomial() or entry.low_degree != weights[i]:
                raise ValueError(f"entry ({i + 1}, {j + 1}) = {entry} is not y*u^{weights[i]}")
            rows[i][j] = power * teichmuller(entry.coefficient(weights[i]), M)
    return UTKisinLift(params, M, module.d, rows, module.r)


# ---------------------------------------------------------------------------
# Seeded generators
# ---------------------------------------------------------------------------

def _random_unit(params: FieldParams, rng) -> FieldElem:
    return params.element(int(rng.integers(1, params.order)))


def _random_elem(params: FieldParams, rng) -> FieldElem:
    return params.element(int(rng.integers(0, params.order)))


def random_shaped_module(params: FieldParams, d: int, weights: Sequence[int], seed: int,
                         extra_degree_bound: Optional[int] = None) -> UTKisinModule:
    """
    Random module of the shape A_phi = A~ + u^p N

    Units are drawn from a pool of at most two values so that Homs between
    graded pieces occur; extra terms appear only where a Hom exists.

    Raises:
        BadWeights: weights not distinct, outside [0, p], or without 0
    """
    weights = tuple(int(t) for t in weights)
    if len(weights) != d:
        raise BadWeights(f"expected {d} weights, got {len(weights)}")
    check_crys_weights(weights, params.p)

    p = params.p
    bound = extra_degree_bound or SHAPE_CONFIG['extra_degree_bound'] or p + 1
    rng = np.random.default_rng(seed)
    pool = [_random_unit(params, rng) for _ in range(min(2, params.order - 1))]
    units = [pool[int(rng.integers(0, len(pool)))] for _ in range(d)]
    pieces = [RankOneKisin(t, a) for t, a in zip(weights, units)]

    off_diagonal = {}
    for i in range(d):
        for j in range(i + 1, d):
            entry = PolySeries.zero(params)
            if weights[j] > weights[i]:
                entry = PolySeries.monomial(params, _random_elem(params, rng), weights[i])
            if hom_exists(pieces[j], pieces[i]) is not None:
                start = extra_term_degree(weights[i], weights[j], p)
                for m in range(start, bound + 1):
                    entry = entry + PolySeries.monomial(params, _random_elem(params, rng), m)
            off_diagonal[(i + 1, j + 1)] = entry

    module = UTKisinModule.from_diagonal(params, weights, units, r=max(weights), off_diagonal=off_diagonal)
    logger.debug(f"random shaped module d={d} weights={weights} seed={seed}")
    return module


def random_lift(params: FieldParams, d: int, weights: Sequence[int], seed: int,
                M: Optional[int] = None) -> UTKisinLift:
    """
    Random lift A = diag((u-p)^{t_i}) U with U upper triangular and unit diagonal

    Entries of U carry p-multiple noise that vanishes on reduction; U_ij has a
    Teichmuller part only when t_j > t_i.
    """
    weights = tuple(int(t) for t in weights)
    check_crys_weights(weights, params.p)
    M = M or FIELD_CONFIG['witt_precision']
    p = params.p
    rng = np.random.default_rng(seed)
    E = e_polynomial(params, M)

    def noise(degree: int) -> WittPoly:
        coeffs = tuple(WittScalar.from_int(params, M, p * int(rng.integers(0, p ** (M - 1))))
                       for _ in range(degree + 1))
        return WittPoly(params, M, coeffs)

    zero = WittPoly.zero(params, M)
    rows = [[zero] * d for _ in range(d)]
    for i in range(d):
        power = E ** weights[i]
        unit = teichmuller(_random_unit(params, rng), M)
        rows[i][i] = power * (noise(0) + unit)
        for j in range(i + 1, d):
            upper = noise(1)
            if weights[j] > weights[i]:
                upper = upper + teichmuller(_random_elem(params, rng), M)
            rows[i][j] = power * upper
    return UTKisinLift(params, M, d, rows, max(weights))


MUTATION_KINDS = (
    'Y_NONZERO_FORBIDDEN',
    'Y_NOT_CONSTANT',
    'NOT_UPPER_TRIANGULAR',
    'EXTRA_TERM_WITHOUT_HOM',
    'BAD_DIAGONAL',
)


@dataclass(frozen=True)
class Mutation:
    """A single-point mutation and the diagnostic code it must trigger"""
    module: UTKisinModule
    kind: str
    position: Tuple[int, int]


def mutate_module(module: UTKisinModule, kind: str, seed: int) -> Optional[Mutation]:
    """
    Break exactly one shape constraint of a shaped module

    Returns:
        Optional[Mutation]: None when the module has no position the mutation applies to
    """
    if kind not in MUTATION_KINDS:
        raise ValueError(f"Unknown mutation kind: {kind}")

    params, p = module.params, module.params.p
    rng = np.random.default_rng(seed)
    t = module.weights
    pieces = module.diagonal()
    d = module.d
    upper = [(i, j) for i in range(d) for j in range(i + 1, d)]

    if kind == 'Y_NONZERO_FORBIDDEN':
        candidates = [(i, j) for i, j in upper if t[j] < t[i] < p]
        degree = lambda i, j: t[i]
    elif kind == 'Y_NOT_CONSTANT':
        candidates = [(i, j) for i, j in upper if t[j] > t[i] and t[i] + 1 < p]
        degree = lambda i, j: t[i] + 1
    elif kind == 'NOT_UPPER_TRIANGULAR':
        candidates = [(j, i) for i, j in upper]
        degree = lambda i, j: 0
    elif kind == 'EXTRA_TERM_WITHOUT_HOM':
        candidates = [(i, j) for i, j in upper
                      if hom_exists(pieces[j], pieces[i]) is None and t[i] != p]
        degree = lambda i, j: p
    else:
        candidates = [(i, i) for i in range(d)]
        degree = lambda i, j: t[i] + 1

    if not candidates:
        return None

    i, j = candidates[int(rng.integers(0, len(candidates)))]
    bump = PolySeries.monomial(params, _random_unit(params, rng), degree(i, j))
    rows = [list(row) for row in module.A_phi]
    rows[i][j] = rows[i][j] + bump
    mutated = UTKisinModule(params, d, rows, module.r)
    return Mutation(mutated, kind, (i + 1, j + 1))
