"""
The tau-side of (phi, G^)-module data
Rank-1 tau-matrices, the consistency identity A_tau tau(phi(A_phi)) =
phi(A_phi) phi(A_tau) in the model ring, and two engines for the forced
vanishing pattern of A_tau: a tropical induction over valuations and a
brute-force linear solve of the consistency identity
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.algebra import (
    INFINITY,
    EpsilonModel,
    FieldParams,
    PolySeries,
    RamSeries,
    default_precision,
    has_positive_valuation,
    phi_poly,
    phi_ram,
    ram_from_poly,
    tau_ram,
)
from src.config import KERNEL_CONFIG
from src.errors import (
    BadWeights,
    BudgetExceeded,
    HypothesisViolated,
    InsufficientPrecision,
    PreconditionFailed,
)
from src.kisin import UTKisinModule
from src.rootsys import b_c_member
from src.shape import closed_set_from_weights

logger = logging.getLogger(__name__)

Position = Tuple[int, int]


@dataclass(frozen=True)
class TauMatrix:
    """Matrix of tau on a (phi, G^)-module, entries in the model ring at precision N"""
    d: int
    entries: Tuple[Tuple[RamSeries, ...], ...]
    N: int

    def __post_init__(self):
        object.__setattr__(self, 'entries', tuple(tuple(row) for row in self.entries))
        if len(self.entries) != self.d or any(len(row) != self.d for row in self.entries):
            raise ValueError(f"A_tau must be {self.d}x{self.d}")

    @classmethod
    def identity(cls, params: FieldParams, d: int, N: int) -> 'TauMatrix':
        return cls(d, [[RamSeries.one(params, N) if i == j else RamSeries.zero(params, N)
                        for j in range(d)] for i in range(d)], N)

    @property
    def params(self) -> FieldParams:
        return self.entries[0][0].params

    @property
    def precision(self) -> int:
        return min(entry.N for row in self.entries for entry in row)

    def to_dict(self) -> dict:
        def encode(series: RamSeries):
            if series.params.f == 1:
                return list(series.coeffs)
            return [list(series.coefficient(k).coeffs) for k in range(len(series.coeffs))]

        return {'d': self.d, 'N': self.N,
                'entries': [[encode(entry) for entry in row] for row in self.entries]}


@dataclass(frozen=True)
class VanishingReport:
    """Above-diagonal positions (1-based) forced to vanish, and how this was established"""
    forced_zero_positions: FrozenSet[Position]
    engine: str
    precision_used: Optional[int] = None
    consistent: Optional[bool] = None
    candidate_valuations: Dict[Position, Fraction] = field(default_factory=dict)

    def to_dict(self) -> dict:
        report = {
            'engine': self.engine,
            'positions': [list(pos) for pos in sorted(self.forced_zero_positions)],
            'precision_used': self.precision_used,
        }
        if self.consistent is not None:
            report['consistent'] = self.consistent
        if self.candidate_valuations:
            report['candidate_valuations'] = {
                f"{i},{j}": str(v) for (i, j), v in sorted(self.candidate_valuations.items())}
        return report


@dataclass(frozen=True)
class ConsistencyResult:
    """Verdict of the consistency identity below x^precision; never claims exact equality"""
    verified: bool
    precision: int
    exponent: Optional[int] = None
    position: Optional[Position] = None

    def __bool__(self):
        return self.verified

    def to_dict(self) -> dict:
        if self.verified:
            return {'status': 'verified_up_to_precision', 'precision': self.precision}
        return {'status': 'violated', 'precision': self.precision,
                'exponent': self.exponent, 'position': list(self.position)}


# ---------------------------------------------------------------------------
# Rank one and block constructions
# ---------------------------------------------------------------------------

def rank1_tau(params: FieldParams, t: int, N: Optional[int] = None,
              model: Optional[EpsilonModel] = None) -> RamSeries:
    """
    epsilon^{p t/(p-1)}, the tau-matrix of the rank-1 module with phi(e) = a u^t e

    The exponent solves alpha + p t = p alpha, which is the rank-1 consistency
    identity once phi(epsilon) = epsilon^p.
    """
    if t < 0:
        raise BadWeights(f"weight must be non-negative, got {t}")
    N = N or default_precision(params.p, t)
    if t == 0:
        return RamSeries.one(params, N)
    model = model or EpsilonModel.from_name()
    return model.power(params, Fraction(params.p * t, params.p - 1), N)


def block_diagonal_tau(params: FieldParams, weights: Sequence[int], N: Optional[int] = None,
                       model: Optional[EpsilonModel] = None) -> TauMatrix:
    """diag(rank1_tau(t_1), ..., rank1_tau(t_d)), a valid A_tau for diagonal A_phi"""
    N = N or default_precision(params.p, max(weights))
    d = len(weights)
    entries = [[RamSeries.zero(params, N)] * d for _ in range(d)]
    for i, t in enumerate(weights):
        entries[i][i] = rank1_tau(params, t, N, model)
    return TauMatrix(d, entries, N)


def diagonal_template(params: FieldParams, weights: Sequence[int]) -> UTKisinModule:
    """F = diag(u^{t_i}) with unit parts 1"""
    return UTKisinModule.from_diagonal(params, weights, [params.one] * len(weights))


# ---------------------------------------------------------------------------
# Consistency identity
# ---------------------------------------------------------------------------

def _matrix_of(A_phi):
    return A_phi.A_phi if isinstance(A_phi, UTKisinModule) else A_phi


def _ram_matmul(A, B):
    d = len(A)
    result = []
    for i in range(d):
        row = []
        for j in range(d):
            total = A[i][0] * B[0][j]
            for k in range(1, d):
                total = total + A[i][k] * B[k][j]
            row.append(total)
        result.append(row)
    return result


def comparison_window(A_phi) -> int:
    """Smallest precision at which every entry of phi(A_phi) is visible"""
    F = _matrix_of(A_phi)
    p = F[0][0].params.p
    degree = max(max(entry.degree for row in F for entry in row), 0)
    return p * (p - 1) * degree + 1


def check_consistency(A_phi, A_tau: TauMatrix, model: Optional[EpsilonModel] = None) -> ConsistencyResult:
    """
    Compare A_tau tau(phi(A_phi)) with phi(A_phi) phi(A_tau) below x^N

    Args:
        A_phi: UTKisinModule or square matrix of PolySeries
        A_tau (TauMatrix): Candidate tau-matrix
        model (EpsilonModel, optional): Model 1-unit (configured default when omitted)

    Returns:
        ConsistencyResult: verified, or the lowest violating exponent and its position

    Raises:
        InsufficientPrecision: A_tau is known below the comparison window only
    """
    F = _matrix_of(A_phi)
    d = len(F)
    if d != A_tau.d:
        raise ValueError(f"A_phi is {d}x{d} but A_tau is {A_tau.d}x{A_tau.d}")

    N = A_tau.precision
    window = comparison_window(F)
    if N < window:
        raise InsufficientPrecision(f"A_tau precision {N} below the comparison window {window}")

    phi_F = [[ram_from_poly(phi_poly(entry), N) for entry in row] for row in F]
    tau_phi_F = [[tau_ram(entry, model) for entry in row] for row in phi_F]
    phi_tau = [[phi_ram(entry.with_precision(N)) for entry in row] for row in A_tau.entries]
    A_tau_N = [[entry.with_precision(N) for entry in row] for row in A_tau.entries]

    lhs = _ram_matmul(A_tau_N, tau_phi_F)
    rhs = _ram_matmul(phi_F, phi_tau)

    first = None
    for i in range(d):
        for j in range(d):
            exponent = lhs[i][j].first_difference(rhs[i][j])
            if exponent is not None and (first is None or exponent < first[0]):
                first = (exponent, (i + 1, j + 1))

    if first is None:
        logger.debug(f"consistency verified below x^{N}")
        return ConsistencyResult(True, N)
    logger.debug(f"consistency violated at x^{first[0]} in position {first[1]}")
    return ConsistencyResult(False, N, first[0], first[1])


def check_iplus(A_tau: TauMatrix) -> bool:
    """Every entry of A_tau - Id has positive valuation"""
    for i, row in enumerate(A_tau.entries):
        for j, entry in enumerate(row):
            shifted = entry - 1 if i == j else entry
            if not has_positive_valuation(shifted):
                return False
    return True


# ---------------------------------------------------------------------------
# Tropical engine
# ---------------------------------------------------------------------------

def solve_valuation_law(a: int, b: int, p: int, e: int = 1) -> Fraction:
    """
    The v solving v + p b/e = p a/e + p v

    This is the valuation balance of zeta tau(phi(u^b)) = phi(u^a) phi(zeta).
    """
    return Fraction(p * (b - a), e * (p - 1))


def valuation_law_holds(v, a: int, b: int, p: int, e: int = 1) -> bool:
    if v == INFINITY:
        return True
    v = Fraction(v)
    return v + Fraction(p * b, e) == Fraction(p * a, e) + p * v


def support_of(F) -> FrozenSet[Position]:
    """1-based above-diagonal positions where F has a nonzero entry"""
    matrix = _matrix_of(F)
    return frozenset((i + 1, j + 1) for i, row in enumerate(matrix)
                     for j, entry in enumerate(row) if i < j and not entry.is_zero())


def _surviving_terms(lo: int, hi: int, support: set, forced: set) -> List[int]:
    """
    Indices k of the corner equation of [lo, hi] whose terms may be nonzero

    The corner entry of M tau(phi(F)) = phi(F) phi(M) reads
    sum_k m_{lo,k} tau(phi(f_{k,hi})) = sum_k phi(f_{lo,k}) phi(m_{k,hi});
    a term vanishes once one of its factors is known to be zero. The two
    terms carrying m_{lo,hi} itself are not listed.
    """
    surviving = []
    if (lo, hi) in support:
        surviving.append(lo)
    for k in range(lo + 1, hi):
        left = (lo, k) not in forced and (k, hi) in support
        right = (lo, k) in support and (k, hi) not in forced
        if left or right:
            surviving.append(k)
    return surviving


def tropical_forced_zeros(weights: Sequence[int], support: Iterable[Position] = (),
                          p: int = 5, e: int = 1) -> VanishingReport:
    """
    Forced zeros of M with M tau(phi(F)) = phi(F) phi(M), by induction on intervals

    Intervals [lo, hi] are taken by increasing length, so both inner blocks
    [lo+1, hi] and [lo, hi-1] are settled before the corner (lo, hi). When
    every other term of the corner equation vanishes, what remains is
    m tau(phi(u^{t_hi})) = phi(u^{t_lo}) phi(m), whose valuation balance
    v = p (t_hi - t_lo) / (e (p - 1)) is impossible for v > 0 when t_lo > t_hi.
    Corners whose equation keeps other terms are left undecided.

    Args:
        weights (Sequence[int]): Distinct weights t_i of the diagonal of F
        support (Iterable[Position]): 1-based above-diagonal positions where f_ij != 0
        p (int): Prime
        e (int): Ramification index

    Returns:
        VanishingReport: forced positions and the candidate valuations of the
        corners reduced to a scalar equation

    Raises:
        HypothesisViolated: f_ij != 0 with i < j and t_i > t_j
        BadWeights: tied weights
    """
    t = list(weights)
    if len(set(t)) != len(t):
        raise BadWeights(f"weights must be distinct: {t}")
    support = {(i, j) for i, j in support if i < j}
    for i, j in sorted(support):
        if t[i - 1] > t[j - 1]:
            raise HypothesisViolated((i, j))

    d = len(t)
    forced = set()
    candidates = {}
    for length in range(2, d + 1):
        for lo in range(1, d - length + 2):
            hi = lo + length - 1
            coupled = _surviving_terms(lo, hi, support, forced)
            if coupled:
                logger.debug(f"tropical engine: corner {(lo, hi)} coupled through {coupled}")
                continue
            v = solve_valuation_law(t[lo - 1], t[hi - 1], p, e)
            if v <= 0:
                forced.add((lo, hi))
            else:
                candidates[(lo, hi)] = v

    logger.debug(f"tropical engine: weights {t} force {sorted(forced)}")
    return VanishingReport(frozenset(forced), 'tropical', None, None, candidates)


# ---------------------------------------------------------------------------
# Linear-kernel engine
# ---------------------------------------------------------------------------

def default_kernel_precision(weights: Sequence[int], p: int) -> int:
    return p * (max(weights) - min(weights)) + p + 1


class _DisjointPositions:
    def __init__(self, positions):
        self.parent = {pos: pos for pos in positions}

    def find(self, pos):
        while self.parent[pos] != pos:
            self.parent[pos] = self.parent[self.parent[pos]]
            pos = self.parent[pos]
        return pos

    def union(self, a, b):
        self.parent[self.find(a)] = self.find(b)

    def groups(self):
        found = {}
        for pos in sorted(self.parent):
            found.setdefault(self.find(pos), []).append(pos)
        return list(found.values())


class KernelSystem:
    """
    The consistency identity for M = Id + W as an affine system over k_E

    Unknowns are the coefficients of x^1 ... x^{S-1} of every upper-triangular
    entry of W, where the span S is N for diagonal F and N + 2 p (p-1) max t
    otherwise; off-diagonal terms of tau(phi(F)) of low order cut the equation
    windows short, and the extra span keeps every coefficient below x^N inside
    its equations. With T = tau(phi(F)) and P = phi(F) the identity reads
    W T - P phi(W) = P - T. Equations are imposed at every exponent whose
    coefficient involves no unknown beyond x^{S-1}; positions that never
    interact are solved as separate blocks. Forced zeros are read off the
    coefficients below x^N.
    """

    def __init__(self, F, N: int, model: Optional[EpsilonModel] = None):
        self.logger = logging.getLogger(__name__)
        self.F = _matrix_of(F)
        self.d = len(self.F)
        self.params = self.F[0][0].params
        self.p = self.params.p
        self.N = N
        self.model = model or EpsilonModel.from_name()

        if self.d > KERNEL_CONFIG['max_dimension']:
            raise BudgetExceeded(f"kernel engine is limited to d <= {KERNEL_CONFIG['max_dimension']}, got {self.d}")
        self.positions = [(i, j) for i in range(self.d) for j in range(i, self.d)]
        self.span = N + self._extra_span()
        unknowns = len(self.positions) * (self.span - 1)
        if unknowns > KERNEL_CONFIG['max_unknowns']:
            raise BudgetExceeded(f"{unknowns} unknowns exceed the budget of {KERNEL_CONFIG['max_unknowns']}")

        degree = max(max(entry.degree for row in self.F for entry in row), 0)
        self.N_eq = self.span + self.p * (self.p - 1) * degree
        self.P = [[ram_from_poly(phi_poly(entry), self.N_eq) for entry in row] for row in self.F]
        self.T = [[tau_ram(entry, self.model) for entry in row] for row in self.P]
        self.windows = {pos: self._window(*pos) for pos in self.positions}
        self.blocks = self._solve_blocks()

    def _extra_span(self) -> int:
        if not support_of(self.F):
            return 0
        top = max(self.F[i][i].low_degree or 0 for i in range(self.d))
        return 2 * self.p * (self.p - 1) * top

    def _window(self, i: int, j: int) -> int:
        limits = []
        for k in range(i, j + 1):
            order = self.T[k][j].lowest_exponent
            if order is not None:
                limits.append(self.span + order)
            order = self.P[i][k].lowest_exponent
            if order is not None:
                limits.append(self.p * self.span + order)
        return min(min(limits, default=self.span), self.N_eq)

    def _components(self):
        groups = _DisjointPositions(self.positions)
        for i, j in self.positions:
            for c in range(j, self.d):
                if self.T[j][c].lowest_exponent is not None:
                    groups.union((i, j), (i, c))
            for r in range(i + 1):
                if self.P[r][i].lowest_exponent is not None:
                    groups.union((i, j), (r, j))
        return groups.groups()

    def _solve_blocks(self):
        GF = self.params.field
        blocks = []
        for component in self._components():
            base, rows = {}, 0
            for pos in component:
                base[pos] = rows
                rows += self.windows[pos]
            unknowns = [(pos, k) for pos in component for k in range(1, self.span)]
            system = GF.Zeros((max(rows, 1), len(unknowns) + 1))

            for col, ((i, j), k) in enumerate(unknowns):
                for c in range(j, self.d):
                    self._accumulate(system, col, base, (i, c), self.T[j][c], k, 1)
                for r in range(i + 1):
                    self._accumulate(system, col, base, (r, j), self.P[r][i], self.p * k, -1)

            for pos in component:
                i, c = pos
                target = (self.P[i][c] - self.T[i][c]).array(self.N_eq)
                window = self.windows[pos]
                if window:
                    system[base[pos]:base[pos] + window, -1] = target[:window]

            reduced = system.row_reduce()
            blocks.append((component, unknowns, reduced))
        self.logger.debug(f"kernel system: {len(blocks)} blocks, N={self.N}, span={self.span}, N_eq={self.N_eq}")
        return blocks

    def _accumulate(self, system, col, base, pos, series: RamSeries, shift: int, sign: int) -> None:
        if pos not in base or series.lowest_exponent is None:
            return
        hi = self.windows[pos]
        if hi <= shift:
            return
        values = series.array(self.N_eq)[:hi - shift]
        rows = np.arange(base[pos] + shift, base[pos] + hi)
        update = values if sign > 0 else -values
        system[rows, col] = system[rows, col] + update

    @staticmethod
    def _pivots(reduced) -> List[Optional[int]]:
        pivots = []
        for row in reduced.view(np.ndarray):
            nonzero = np.flatnonzero(row)
            pivots.append(int(nonzero[0]) if len(nonzero) else None)
        return pivots

    def consistent(self) -> bool:
        for _, unknowns, reduced in self.blocks:
            if len(unknowns) in self._pivots(reduced):
                return False
        return True

    def forced_unknowns(self) -> set:
        """Unknowns equal to zero in every solution"""
        forced = set()
        for _, unknowns, reduced in self.blocks:
            matrix = reduced.view(np.ndarray)
            n = len(unknowns)
            for r, pivot in enumerate(self._pivots(reduced)):
                if pivot is None or pivot == n:
                    continue
                others = np.flatnonzero(matrix[r, :n])
                if len(others) == 1 and matrix[r, n] == 0:
                    forced.add(unknowns[pivot])
        return forced

    def forced_positions(self) -> FrozenSet[Position]:
        forced = self.forced_unknowns()
        found = set()
        for i, j in self.positions:
            if i < j and all(((i, j), k) in forced for k in range(1, self.N)):
                found.add((i + 1, j + 1))
        return frozenset(found)

    def sample(self, rng) -> Dict[Position, list]:
        """One solution: free variables drawn from rng, pivots solved from the echelon form"""
        GF = self.params.field
        coefficients = {pos: [0] * self.span for pos in self.positions}
        for _, unknowns, reduced in self.blocks:
            n = len(unknowns)
            pivots = self._pivots(reduced)
            pivot_cols = {pivot for pivot in pivots if pivot is not None}
            if n in pivot_cols:
                raise PreconditionFailed("the consistency identity has no solution at this precision")
            values = GF.Zeros(n)
            free = [col for col in range(n) if col not in pivot_cols]
            if free:
                values[free] = GF(rng.integers(0, self.params.order, size=len(free)))
            for r, pivot in enumerate(pivots):
                if pivot is None:
                    continue
                row = reduced[r]
                values[pivot] = row[n] - np.sum(row[free] * values[free]) if free else row[n]
            for col, (pos, k) in enumerate(unknowns):
                coefficients[pos][k] = int(values[col])
        return coefficients


def kernel_oracle(F, N: Optional[int] = None, model: Optional[EpsilonModel] = None) -> VanishingReport:
    """
    Forced zeros of A_tau by solving the consistency identity directly

    Args:
        F: UTKisinModule or upper-triangular matrix of PolySeries
        N (int, optional): Coefficients below x^N are tested (default p (max t - min t) + p + 1)
        model (EpsilonModel, optional): Model 1-unit

    Returns:
        VanishingReport: positions vanishing in every solution below x^N

    Raises:
        BudgetExceeded: dimension or unknown count over the configured budget
    """
    matrix = _matrix_of(F)
    p = matrix[0][0].params.p
    weights = [matrix[i][i].low_degree or 0 for i in range(len(matrix))]
    N = N or default_kernel_precision(weights, p)

    system = KernelSystem(matrix, N, model)
    consistent = system.consistent()
    if not consistent:
        logger.warning(f"consistency identity has no solution below x^{N}")
    return VanishingReport(system.forced_positions(), 'kernel', N, consistent)


def kernel_solutions(F, N: Optional[int] = None, count: int = 1, seed: int = 0,
                     model: Optional[EpsilonModel] = None) -> List[TauMatrix]:
    """
    Sample tau-matrices from the affine solution space of the consistency identity

    The default window also covers the comparison window of check_consistency.
    """
    matrix = _matrix_of(F)
    params = matrix[0][0].params
    p = params.p
    weights = [matrix[i][i].low_degree or 0 for i in range(len(matrix))]
    N = N or max(default_kernel_precision(weights, p), comparison_window(matrix) + p)

    system = KernelSystem(matrix, N, model)
    rng = np.random.default_rng(seed)
    samples = []
    d = len(matrix)
    for _ in range(count):
        coefficients = system.sample(rng)
        entries = [[RamSeries.zero(params, N)] * d for _ in range(d)]
        for (i, j), values in coefficients.items():
            values = list(values)
            if i == j:
                values[0] = 1
            entries[i][j] = RamSeries(params, tuple(values), N, exact=False)
        samples.append(TauMatrix(d, entries, N))
    return samples


# ---------------------------------------------------------------------------
# Shape of tau
# ---------------------------------------------------------------------------

def tau_shape_check(M: UTKisinModule, A_tau: TauMatrix, model: Optional[EpsilonModel] = None) -> bool:
    """
    A_tau lies in B_C(R (x) k_E) for the closed set C of the weights of M

    Zero-test is vanishing up to precision. A False verdict on consistent input
    contradicts the shape theorem and is logged as an error.

    Raises:
        PreconditionFailed: A_tau fails check_iplus or check_consistency against M
    """
    if M.d != A_tau.d:
        raise PreconditionFailed(f"rank {M.d} module against a {A_tau.d}x{A_tau.d} tau-matrix")
    if M.d == 1:
        return True
    if not check_iplus(A_tau):
        raise PreconditionFailed("A_tau - Id has an entry of non-positive valuation")
    consistency = check_consistency(M, A_tau, model)
    if not consistency:
        raise PreconditionFailed(
            f"consistency identity fails at x^{consistency.exponent} in position {consistency.position}")

    C = closed_set_from_weights(M.weights)
    holds = b_c_member(A_tau.entries, C, is_zero=lambda series: series.is_zero_up_to_precision())
    if not holds:
        logger.error(f"consistent A_tau outside B_C for weights {list(M.weights)}")
    return holds
