"""
Root-system combinatorics for GL_d
Positive roots, closed subsets, the groups B_C as membership predicates,
permutation matrices w_sigma and the two descriptions of W_C
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Callable, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import galois
import numpy as np

from src.cache import memoized
from src.config import CLI_CONFIG
from src.errors import DimensionTooLarge

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Root:
    """The positive root e_i - e_j of GL_d (1-based, i < j)"""
    i: int
    j: int

    def __post_init__(self):
        if not 1 <= self.i < self.j:
            raise ValueError(f"({self.i}, {self.j}) is not a positive root")

    def __add__(self, other: 'Root') -> Optional['Root']:
        """The sum as a positive root, or None when it is not a root"""
        if self.j == other.i:
            return Root(self.i, other.j)
        if other.j == self.i:
            return Root(other.i, self.j)
        return None

    def as_list(self) -> List[int]:
        return [self.i, self.j]

    def __repr__(self):
        return f"e{self.i}-e{self.j}"


def positive_roots(d: int) -> Tuple[Root, ...]:
    """R^+ for GL_d in lexicographic order"""
    return tuple(Root(i, j) for i in range(1, d + 1) for j in range(i + 1, d + 1))


def is_closed(d: int, roots: Iterable[Root]) -> bool:
    """
    Closure test: a, b in C and a + b in R^+ imply a + b in C

    Args:
        d (int): Dimension
        roots (Iterable[Root]): Candidate subset of R^+

    Returns:
        bool: True iff the subset is closed
    """
    roots = frozenset(roots)
    for root in roots:
        if root.j > d:
            raise ValueError(f"{root} is not a root of GL_{d}")
    for a in roots:
        for b in roots:
            total = a + b
            if total is not None and total not in roots:
                return False
    return True


@dataclass(frozen=True)
class ClosedSet:
    """A closed subset C of the positive roots of GL_d"""
    d: int
    roots: FrozenSet[Root] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, 'roots', frozenset(self.roots))
        if not is_closed(self.d, self.roots):
            raise ValueError(f"{sorted(self.roots)} is not closed in R^+ of GL_{self.d}")

    @classmethod
    def from_pairs(cls, d: int, pairs: Iterable[Sequence[int]]) -> 'ClosedSet':
        return cls(d, frozenset(Root(int(i), int(j)) for i, j in pairs))

    @classmethod
    def full(cls, d: int) -> 'ClosedSet':
        return cls(d, frozenset(positive_roots(d)))

    def __contains__(self, root) -> bool:
        if isinstance(root, tuple):
            root = Root(*root)
        return root in self.roots

    def pairs(self) -> List[Tuple[int, int]]:
        return sorted((r.i, r.j) for r in self.roots)

    def to_dict(self) -> dict:
        return {'d': self.d, 'roots': [list(pair) for pair in self.pairs()]}

    def __len__(self):
        return len(self.roots)


@memoized
def enumerate_closed_sets(d: int) -> Tuple[ClosedSet, ...]:
    """
    Every closed subset of R^+, ordered by the bitmask over lexicographic roots

    Raises:
        DimensionTooLarge: d beyond the enumeration guard
    """
    limit = CLI_CONFIG['enumerate_max_dimension']
    if d > limit:
        raise DimensionTooLarge(f"closed-set enumeration is limited to d <= {limit}, got {d}")

    roots = positive_roots(d)
    found = []
    for mask in range(1 << len(roots)):
        subset = frozenset(r for k, r in enumerate(roots) if mask >> k & 1)
        if is_closed(d, subset):
            found.append(ClosedSet(d, subset))
    logger.debug(f"d={d}: {len(found)} closed subsets out of {1 << len(roots)}")
    return tuple(found)


@dataclass(frozen=True)
class Perm:
    """A permutation sigma of {1, ..., d} by its images (sigma(1), ..., sigma(d))"""
    images: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'images', tuple(int(i) for i in self.images))
        if sorted(self.images) != list(range(1, len(self.images) + 1)):
            raise ValueError(f"{list(self.images)} is not a permutation")

    @classmethod
    def identity(cls, d: int) -> 'Perm':
        return cls(tuple(range(1, d + 1)))

    @property
    def d(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def inverse(self) -> 'Perm':
        result = [0] * self.d
        for i, image in enumerate(self.images, start=1):
            result[image - 1] = i
        return Perm(tuple(result))

    def compose(self, other: 'Perm') -> 'Perm':
        """self o other"""
        return Perm(tuple(self(other(i)) for i in range(1, self.d + 1)))

    def is_identity(self) -> bool:
        return self.images == tuple(range(1, self.d + 1))

    def matrix(self, field=None):
        """w_sigma = (delta_{i, sigma(j)}) over a galois field (integers when omitted)"""
        w = np.zeros((self.d, self.d), dtype=int)
        for j in range(1, self.d + 1):
            w[self(j) - 1, j - 1] = 1
        return field(w) if field is not None else w

    def inverse_image(self, root: Root) -> Tuple[int, int]:
        """sigma^{-1}(e_i - e_j) as an index pair (possibly a negative root)"""
        inv = self.inverse()
        return inv(root.i), inv(root.j)

    def as_list(self) -> List[int]:
        return list(self.images)

    def __repr__(self):
        return f"Perm{self.images}"


def all_perms(d: int) -> Tuple[Perm, ...]:
    return tuple(Perm(images) for images in itertools.permutations(range(1, d + 1)))


def _default_is_zero(entry) -> bool:
    if hasattr(entry, 'is_zero'):
        return entry.is_zero()
    return entry == 0


def is_upper_triangular(A, is_zero: Callable = _default_is_zero) -> bool:
    d = len(A)
    return all(is_zero(A[i][j]) for i in range(d) for j in range(i))


def b_c_member(A, C: ClosedSet, is_zero: Callable = _default_is_zero) -> bool:
    """
    Membership in B_C: upper triangular, above-diagonal support inside C

    Diagonal entries are not inspected; invertibility is the caller's concern.
    """
    d = len(A)
    if d != C.d:
        raise ValueError(f"matrix of size {d} against a closed set of GL_{C.d}")
    if not is_upper_triangular(A, is_zero):
        return False
    for i in range(d):
        for j in range(i + 1, d):
            if not is_zero(A[i][j]) and Root(i + 1, j + 1) not in C.roots:
                return False
    return True


def conjugate_by_perm(A, sigma: Perm) -> list:
    """sigma^{-1} A sigma, i.e. result[i][j] = A[sigma(i)][sigma(j)], by index remapping"""
    d = len(A)
    if d != sigma.d:
        raise ValueError(f"permutation of {sigma.d} letters against a {d}x{d} matrix")
    return [[A[sigma(i) - 1][sigma(j) - 1] for j in range(1, d + 1)] for i in range(1, d + 1)]


def conjugate_by_matrix(A, sigma: Perm):
    """w_sigma^{-1} A w_sigma by explicit products over the field of A"""
    w = sigma.matrix(type(A))
    return w.T @ A @ w


@memoized
def w_c_combinatorial(C: ClosedSet) -> FrozenSet[Perm]:
    """W_C = {sigma : sigma^{-1}(C) consists of positive roots}"""
    members = []
    for sigma in all_perms(C.d):
        if all(i < j for i, j in (sigma.inverse_image(root) for root in C.roots)):
            members.append(sigma)
    return frozenset(members)


@memoized
def w_c_conjugation(C: ClosedSet) -> FrozenSet[Perm]:
    """
    W_C as the permutations conjugating B_C into the upper-triangular Borel

    A generic member of B_C is realized as a support pattern: the diagonal and
    the positions of C are marked as possibly nonzero.
    """
    limit = CLI_CONFIG['enumerate_max_dimension']
    if C.d > limit:
        raise DimensionTooLarge(f"W_C by conjugation is limited to d <= {limit}, got {C.d}")

    d = C.d
    generic = [[i == j or (i < j and Root(i + 1, j + 1) in C.roots) for j in range(d)]
               for i in range(d)]
    members = []
    for sigma in all_perms(d):
        conjugate = conjugate_by_perm(generic, sigma)
        if is_upper_triangular(conjugate, is_zero=lambda marked: not marked):
            members.append(sigma)
    return frozenset(members)


def w_c_sampled(C: ClosedSet, p: int = 5, samples: int = 8, seed: int = 0) -> FrozenSet[Perm]:
    """
    Sampling oracle for W_C

    Draws random members of B_C over F_p with nonzero entries on the allowed
    positions and keeps the permutations whose explicit w_sigma conjugates of
    every sample are upper triangular.
    """
    GF = galois.GF(p)
    rng = np.random.default_rng(seed)
    d = C.d
    draws = []
    for _ in range(samples):
        A = np.zeros((d, d), dtype=int)
        for i in range(d):
            A[i, i] = rng.integers(1, p)
            for j in range(i + 1, d):
                if Root(i + 1, j + 1) in C.roots:
                    A[i, j] = rng.integers(1, p)
        draws.append(GF(A))

    members = []
    for sigma in all_perms(d):
        if all(is_upper_triangular(conjugate_by_matrix(A, sigma).tolist()) for A in draws):
            members.append(sigma)
    return frozenset(members)
