"""
Shape analysis of upper-triangular mod-p Kisin modules
Decomposition A_phi = A~ + u^p N, the closed set C of the weights, the unique
sorting permutation sigma in W_C and the conjugated Frobenius matrix
"""

import logging
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

from src.algebra import FieldElem, PolySeries
from src.config import SHAPE_CONFIG
from src.errors import (
    AmbiguousSplit,
    BadDiagonal,
    BadWeights,
    InvariantFailure,
    SingularMatrix,
)
from src.kisin import (
    RankOneKisin,
    UTKisinModule,
    encode_elem,
    encode_poly,
    extra_term_degree,
    height_check,
    hom_exists,
)
from src.rootsys import (
    ClosedSet,
    Perm,
    Root,
    b_c_member,
    conjugate_by_perm,
    is_closed,
    is_upper_triangular,
    w_c_combinatorial,
)

logger = logging.getLogger(__name__)

DIAGNOSTIC_CODES = (
    'Y_NONZERO_FORBIDDEN',
    'Y_NOT_CONSTANT',
    'NOT_UPPER_TRIANGULAR',
    'BAD_DIAGONAL',
    'TIED_WEIGHTS',
    'WEIGHTS_NOT_CRYS',
    'EXTRA_TERM_WITHOUT_HOM',
    'EXTRA_TERM_DEGREE',
    'EXTRA_TERM_COUNT',
    'NOT_IN_B_C',
    'C_NOT_CLOSED',
    'SIGMA_NOT_IN_WC',
    'CONJUGATE_NOT_UPPER',
    'CONJUGATE_DIAGONAL_MISMATCH',
    'HEIGHT_CHECK_FAILED',
    'SPLIT_NOT_EXACT',
)


@dataclass(frozen=True)
class Diagnostic:
    """A shape violation with a machine-readable code"""
    code: str
    message: str
    position: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        if self.code not in DIAGNOSTIC_CODES:
            raise ValueError(f"Unknown diagnostic code: {self.code}")

    def to_dict(self) -> dict:
        entry = {'code': self.code, 'message': self.message}
        if self.position is not None:
            entry['position'] = list(self.position)
        return entry


class Decomposition(NamedTuple):
    tilde_A_phi: tuple
    N_matrix: tuple
    violations: List[Diagnostic]


def _matrix_dict(A) -> list:
    return [[encode_poly(entry) for entry in row] for row in A] if A is not None else None


@dataclass
class ShapeReport:
    """Outcome of the shape pipeline; ``ok`` iff no diagnostics were collected"""
    weights: Optional[Tuple[int, ...]] = None
    units: Optional[Tuple[FieldElem, ...]] = None
    tilde_A_phi: Optional[tuple] = None
    N_matrix: Optional[tuple] = None
    C: Optional[ClosedSet] = None
    sigma: Optional[Perm] = None
    conjugated_A_phi: Optional[list] = None
    diagnostics: List[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    def codes(self) -> List[str]:
        return [d.code for d in self.diagnostics]

    def add(self, code: str, message: str, position: Optional[Tuple[int, int]] = None) -> None:
        self.diagnostics.append(Diagnostic(code, message, position))

    def to_dict(self) -> dict:
        return {
            'ok': self.ok,
            'weights': list(self.weights) if self.weights is not None else None,
            'units': [encode_elem(a) for a in self.units] if self.units is not None else None,
            'tilde_A_phi': _matrix_dict(self.tilde_A_phi),
            'N_matrix': _matrix_dict(self.N_matrix),
            'C': self.C.to_dict() if self.C is not None else None,
            'sigma': self.sigma.as_list() if self.sigma is not None else None,
            'conjugated_A_phi': _matrix_dict(self.conjugated_A_phi),
            'diagnostics': [d.to_dict() for d in self.diagnostics],
        }


# ---------------------------------------------------------------------------
# Pipeline steps
# ---------------------------------------------------------------------------

def _in_crys_range(weights: Sequence[int], p: int) -> bool:
    return len(set(weights)) == len(weights) and all(0 <= t <= p for t in weights) and min(weights) == 0


def decompose_phi(M: UTKisinModule, strict: bool = False,
                  extra_degree_bound: Optional[int] = None) -> Decomposition:
    """
    Split A_phi = A~ + u^p N

    Above the diagonal, A~ keeps the u^{t_i} coefficient when t_j > t_i (pattern
    priority), every term of degree >= p goes to u^p N, and any other term is
    kept in A~ and reported. Reassembly is exact by construction.

    Args:
        M (UTKisinModule): Module to split
        strict (bool): Raise AmbiguousSplit instead of applying pattern priority
        extra_degree_bound (int, optional): Largest allowed extra-term degree (default p+1)

    Returns:
        Decomposition: A~, N and the collected violations

    Raises:
        BadDiagonal: a diagonal entry is not a nonzero monomial
        AmbiguousSplit: strict mode and an entry fits both buckets
    """
    params, p, d = M.params, M.params.p, M.d
    pieces = M.diagonal()
    t = [piece.t for piece in pieces]
    bound = extra_degree_bound or SHAPE_CONFIG['extra_degree_bound'] or p + 1
    zero = PolySeries.zero(params)

    tilde = [[zero] * d for _ in range(d)]
    N = [[zero] * d for _ in range(d)]
    violations = []

    for i in range(d):
        tilde[i][i] = M.A_phi[i][i]
        for j in range(i):
            entry = M.A_phi[i][j]
            if not entry.is_zero():
                tilde[i][j] = entry
                violations.append(Diagnostic('NOT_UPPER_TRIANGULAR',
                                             f"nonzero entry below the diagonal: {entry}", (i + 1, j + 1)))

    for i in range(d):
        for j in range(i + 1, d):
            position = (i + 1, j + 1)
            pattern, extra = zero, zero
            for k, c in M.A_phi[i][j].terms():
                term = PolySeries.monomial(params, c, k)
                if t[j] > t[i] and k == t[i]:
                    if k >= p and strict:
                        raise AmbiguousSplit(position, [
                            {'tilde': term, 'N': zero},
                            {'tilde': zero, 'N': PolySeries.monomial(params, c, k - p)},
                        ])
                    pattern = pattern + term
                elif k >= p:
                    extra = extra + PolySeries.monomial(params, c, k - p)
                else:
                    pattern = pattern + term
                    if t[j] < t[i]:
                        violations.append(Diagnostic(
                            'Y_NONZERO_FORBIDDEN',
                            f"y{position} must vanish since t_{j + 1} < t_{i + 1}", position))
                    elif t[j] > t[i]:
                        violations.append(Diagnostic(
                            'Y_NOT_CONSTANT',
                            f"term of degree {k} is neither u^{t[i]}*y nor divisible by u^{p}", position))
            tilde[i][j], N[i][j] = pattern, extra

    extra_positions = []
    for i in range(d):
        for j in range(i + 1, d):
            if N[i][j].is_zero():
                continue
            position = (i + 1, j + 1)
            extra_positions.append(position)
            if hom_exists(pieces[j], pieces[i]) is None:
                violations.append(Diagnostic(
                    'EXTRA_TERM_WITHOUT_HOM',
                    f"extra term at {position} but no Hom m(t_{j + 1}) -> m(t_{i + 1})", position))
                continue
            lowest = extra_term_degree(t[i], t[j], p)
            for k, _ in N[i][j].terms():
                if not lowest <= k + p <= bound:
                    violations.append(Diagnostic(
                        'EXTRA_TERM_DEGREE',
                        f"extra term of degree {k + p} outside [{lowest}, {bound}]", position))

    if _in_crys_range(t, p) and len(extra_positions) > SHAPE_CONFIG['max_extra_terms']:
        violations.append(Diagnostic(
            'EXTRA_TERM_COUNT',
            f"{len(extra_positions)} extra-term positions, at most {SHAPE_CONFIG['max_extra_terms']} expected"))

    for i in range(d):
        for j in range(d):
            if tilde[i][j] + N[i][j].shift(p) != M.A_phi[i][j]:
                violations.append(Diagnostic('SPLIT_NOT_EXACT', "A~ + u^p N differs from A_phi", (i + 1, j + 1)))

    return Decomposition(tuple(map(tuple, tilde)), tuple(map(tuple, N)), violations)


def _check_distinct(t: Sequence[int]) -> None:
    if len(set(t)) != len(t):
        raise BadWeights(f"weights must be pairwise distinct: {list(t)}")


def closed_set_from_weights(t: Sequence[int]) -> ClosedSet:
    """
    C = {e_i - e_j : i < j, t_i < t_j}

    Raises:
        BadWeights: tied weights
    """
    _check_distinct(t)
    d = len(t)
    roots = frozenset(Root(i + 1, j + 1) for i in range(d) for j in range(i + 1, d) if t[i] < t[j])
    if not is_closed(d, roots):
        logger.error(f"closed set of weights {list(t)} is not closed")
        raise InvariantFailure(f"C of weights {list(t)} is not closed")
    return ClosedSet(d, roots)


def find_sigma(t: Sequence[int]) -> Perm:
    """
    The sorting permutation: t_{sigma(1)} < ... < t_{sigma(d)}

    Raises:
        BadWeights: tied weights
        InvariantFailure: sigma outside W_C
    """
    _check_distinct(t)
    sigma = Perm(tuple(i + 1 for i in sorted(range(len(t)), key=lambda k: t[k])))
    if sigma not in w_c_combinatorial(closed_set_from_weights(t)):
        logger.error(f"sorting permutation {sigma} of {list(t)} is not in W_C")
        raise InvariantFailure(f"{sigma} not in W_C")
    return sigma


def _conjugate_violations(conjugate, sigma: Perm, pieces: Sequence[RankOneKisin]) -> List[Diagnostic]:
    violations = []
    if not is_upper_triangular(conjugate):
        violations.append(Diagnostic('CONJUGATE_NOT_UPPER', f"sigma^-1 A_phi sigma is not upper triangular for {sigma}"))
    r = sorted(piece.t for piece in pieces)
    for i in range(sigma.d):
        piece = pieces[sigma(i + 1) - 1]
        expected = PolySeries.monomial(piece.params, piece.a, r[i])
        if conjugate[i][i] != expected:
            violations.append(Diagnostic(
                'CONJUGATE_DIAGONAL_MISMATCH',
                f"diagonal entry {i + 1} is {conjugate[i][i]}, expected {expected}", (i + 1, i + 1)))
    return violations


def conjugate_module(M: UTKisinModule, sigma: Perm) -> list:
    """
    sigma^{-1} A_phi sigma, checked upper triangular with diagonal a_{sigma(i)} u^{r_i}

    Raises:
        InvariantFailure: the conjugate violates either property
    """
    conjugate = conjugate_by_perm(M.A_phi, sigma)
    violations = _conjugate_violations(conjugate, sigma, M.diagonal())
    if violations:
        logger.error(f"conjugation by {sigma} failed: {[v.code for v in violations]}")
        raise InvariantFailure("; ".join(v.message for v in violations))
    return conjugate


def sigma_candidates(A, t: Sequence[int]) -> List[Perm]:
    """
    Every sigma in W_C giving an upper-triangular conjugate whose diagonal
    degrees strictly increase
    """
    C = closed_set_from_weights(t)
    found = []
    for sigma in sorted(w_c_combinatorial(C), key=lambda s: s.images):
        conjugate = conjugate_by_perm(A, sigma)
        if not is_upper_triangular(conjugate):
            continue
        diagonal = [conjugate[i][i] for i in range(len(t))]
        if not all(entry.is_monomial() for entry in diagonal):
            continue
        degrees = [entry.low_degree for entry in diagonal]
        if all(a < b for a, b in zip(degrees, degrees[1:])):
            found.append(sigma)
    return found


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

class ShapeAnalyzer:
    """Runs the shape pipeline and collects every violation as a diagnostic"""

    def __init__(self, extra_degree_bound: Optional[int] = None, check_height: bool = True):
        self.logger = logging.getLogger(__name__)
        self.extra_degree_bound = extra_degree_bound
        self.check_height = check_height

    def analyze(self, M: UTKisinModule) -> ShapeReport:
        """
        decompose_phi -> closed_set_from_weights -> find_sigma -> conjugate_module

        Args:
            M (UTKisinModule): Module to analyze

        Returns:
            ShapeReport: Report with diagnostics (empty iff the module has the expected shape)
        """
        report = ShapeReport()
        self.logger.info(f"Analyzing module of rank {M.d} over F_{M.params.order}")

        try:
            pieces = M.diagonal()
        except BadDiagonal as e:
            report.add('BAD_DIAGONAL', str(e), (e.index, e.index))
            for i in range(M.d):
                for j in range(i):
                    if not M.A_phi[i][j].is_zero():
                        report.add('NOT_UPPER_TRIANGULAR', "nonzero entry below the diagonal", (i + 1, j + 1))
            return report

        t = tuple(piece.t for piece in pieces)
        report.weights = t
        report.units = tuple(piece.a for piece in pieces)

        decomposition = decompose_phi(M, extra_degree_bound=self.extra_degree_bound)
        report.tilde_A_phi = decomposition.tilde_A_phi
        report.N_matrix = decomposition.N_matrix
        report.diagnostics.extend(decomposition.violations)

        if len(set(t)) != len(t):
            report.add('TIED_WEIGHTS', f"weights {list(t)} are not distinct")
            return self._finish(M, report)
        if not _in_crys_range(t, M.params.p):
            report.add('WEIGHTS_NOT_CRYS', f"weights {list(t)} are not in [0, {M.params.p}] with minimum 0")

        try:
            report.C = closed_set_from_weights(t)
        except InvariantFailure as e:
            report.add('C_NOT_CLOSED', str(e))
            return self._finish(M, report)

        if not b_c_member(report.tilde_A_phi, report.C):
            report.add('NOT_IN_B_C', f"A~ has support outside B_C for C = {report.C.pairs()}")

        try:
            report.sigma = find_sigma(t)
        except InvariantFailure as e:
            report.add('SIGMA_NOT_IN_WC', str(e))
            return self._finish(M, report)

        report.conjugated_A_phi = conjugate_by_perm(M.A_phi, report.sigma)
        report.diagnostics.extend(_conjugate_violations(report.conjugated_A_phi, report.sigma, pieces))
        return self._finish(M, report)

    def _finish(self, M: UTKisinModule, report: ShapeReport) -> ShapeReport:
        if self.check_height:
            try:
                if not height_check(M.A_phi, M.r):
                    report.add('HEIGHT_CHECK_FAILED', f"no B with A_phi B = u^{M.r} Id")
            except SingularMatrix as e:
                report.add('HEIGHT_CHECK_FAILED', str(e))

        if report.ok:
            self.logger.info(f"Shape verified: sigma = {report.sigma.as_list()}")
        else:
            self.logger.info(f"Shape violations: {sorted(set(report.codes()))}")
        return report


def analyze(M: UTKisinModule) -> ShapeReport:
    return ShapeAnalyzer().analyze(M)
