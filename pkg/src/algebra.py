"""
Exact coefficient and series arithmetic
Finite fields k_E = F_{p^f}, truncated Witt scalars modeling O_E, polynomial
rings with Frobenius, and the ramified truncated series model of R (x) k_E
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence, Tuple, Union

import galois
import numpy as np

from src.cache import memoized
from src.config import FIELD_CONFIG, PRECISION_CONFIG
from src.errors import (
    DivisionByZero,
    IndeterminateValuation,
    NotDivisible,
    NotTopologicallyNilpotent,
)

logger = logging.getLogger(__name__)

INFINITY = math.inf
Valuation = Union[Fraction, float]


# ---------------------------------------------------------------------------
# Coefficient fields
# ---------------------------------------------------------------------------

@memoized
def _galois_field(p: int, f: int, defining_poly: Tuple[int, ...]):
    if f == 1:
        return galois.GF(p)
    poly = galois.Poly(list(defining_poly), field=galois.GF(p), order="asc")
    logger.debug(f"Building GF({p}^{f}) with defining polynomial {poly}")
    return galois.GF(p ** f, irreducible_poly=poly)


@dataclass(frozen=True)
class FieldParams:
    """
    Parameters of the coefficient field k_E = F_p[y]/(defining_poly)

    Attributes:
        p (int): Odd prime
        f (int): Extension degree
        defining_poly (tuple): Monic irreducible polynomial over F_p, ascending coefficients
    """
    p: int
    f: int = 1
    defining_poly: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p <= 2 or not galois.is_prime(self.p):
            raise ValueError(f"p must be an odd prime, got {self.p}")
        if self.f < 1:
            raise ValueError(f"extension degree must be >= 1, got {self.f}")

        if self.defining_poly is None:
            conway = galois.conway_poly(self.p, self.f)
            object.__setattr__(self, 'defining_poly',
                               tuple(int(c) for c in conway.coeffs[::-1]))
        else:
            object.__setattr__(self, 'defining_poly',
                               tuple(int(c) % self.p for c in self.defining_poly))

        poly = self.defining_poly
        if len(poly) != self.f + 1 or poly[-1] != 1:
            raise ValueError(f"defining polynomial must be monic of degree {self.f}: {list(poly)}")
        if self.f > 1:
            candidate = galois.Poly(list(poly), field=galois.GF(self.p), order="asc")
            if not candidate.is_irreducible():
                raise ValueError(f"defining polynomial {list(poly)} is reducible over F_{self.p}")

    @classmethod
    def default(cls, p: Optional[int] = None, f: Optional[int] = None) -> 'FieldParams':
        """Field with the Conway polynomial for (p, f)"""
        return cls(p or FIELD_CONFIG['default_p'], f or FIELD_CONFIG['default_f'])

    @property
    def field(self):
        """The galois FieldArray class of k_E"""
        return _galois_field(self.p, self.f, self.defining_poly)

    @property
    def order(self) -> int:
        return self.p ** self.f

    def element(self, value: int) -> 'FieldElem':
        """Element from its integer representation (base-p digits are the coordinates)"""
        return FieldElem(self, int(value))

    def scalar(self, n: int) -> 'FieldElem':
        """Image of the integer n in F_p"""
        return FieldElem(self, int(n) % self.p)

    def from_coords(self, coords: Sequence[int]) -> 'FieldElem':
        return FieldElem.from_coords(self, coords)

    @property
    def zero(self) -> 'FieldElem':
        return FieldElem(self, 0)

    @property
    def one(self) -> 'FieldElem':
        return FieldElem(self, 1)

    def elements(self) -> Iterator['FieldElem']:
        for value in range(self.order):
            yield FieldElem(self, value)

    def units(self) -> Iterator['FieldElem']:
        for value in range(1, self.order):
            yield FieldElem(self, value)

    def to_dict(self) -> dict:
        return {'p': self.p, 'f': self.f, 'defining_poly': list(self.defining_poly)}


@dataclass(frozen=True)
class FieldElem:
    """
    Element of k_E stored by its integer representation

    The coordinates w.r.t. the power basis of the defining polynomial are the
    base-p digits of ``value`` (ascending).
    """
    params: FieldParams
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.params.order:
            raise ValueError(f"{self.value} is not an element of F_{self.params.order}")

    @classmethod
    def from_coords(cls, params: FieldParams, coords: Sequence[int]) -> 'FieldElem':
        coords = list(coords)
        if len(coords) > params.f:
            raise ValueError(f"expected at most {params.f} coordinates, got {len(coords)}")
        value = 0
        for c in reversed(coords):
            value = value * params.p + (int(c) % params.p)
        return cls(params, value)

    @property
    def coeffs(self) -> Tuple[int, ...]:
        digits, value = [], self.value
        for _ in range(self.params.f):
            value, digit = divmod(value, self.params.p)
            digits.append(digit)
        return tuple(digits)

    def _g(self):
        return self.params.field(self.value)

    def _coerce(self, other) -> 'FieldElem':
        if isinstance(other, FieldElem):
            if other.params != self.params:
                raise ValueError("field elements from different fields")
            return other
        if isinstance(other, (int, np.integer)):
            return self.params.scalar(int(other))
        return NotImplemented

    def _wrap(self, g) -> 'FieldElem':
        return FieldElem(self.params, int(g))

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._wrap(self._g() + other._g())

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._wrap(self._g() - other._g())

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self):
        return self._wrap(-self._g())

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._wrap(self._g() * other._g())

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return self._wrap(self._g() ** n)

    def inverse(self) -> 'FieldElem':
        if self.value == 0:
            raise DivisionByZero("inverse of zero in k_E")
        return self._wrap(self._g() ** -1)

    def frobenius(self) -> 'FieldElem':
        return self ** self.params.p

    def is_zero(self) -> bool:
        return self.value == 0

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def __repr__(self):
        if self.params.f == 1:
            return f"FieldElem({self.value} mod {self.params.p})"
        return f"FieldElem({list(self.coeffs)} in F_{self.params.order})"


def field_arith(a: FieldElem, b: Optional[FieldElem] = None, op: str = 'add') -> FieldElem:
    """
    Arithmetic in k_E

    Args:
        a (FieldElem): First operand
        b (FieldElem, optional): Second operand for binary operations
        op (str): One of add, mul, inv, frobenius

    Returns:
        FieldElem: Result

    Raises:
        DivisionByZero: Inversion of zero
    """
    if op == 'add':
        return a + b
    if op == 'mul':
        return a * b
    if op == 'inv':
        return a.inverse()
    if op == 'frobenius':
        return a.frobenius()
    raise ValueError(f"Unknown field operation: {op}")


# ---------------------------------------------------------------------------
# Coefficient helpers shared by the polynomial and series types
# ---------------------------------------------------------------------------

def _trim(values: Iterable[int]) -> Tuple[int, ...]:
    values = list(values)
    while values and values[-1] == 0:
        values.pop()
    return tuple(values)


def _as_array(params: FieldParams, values: Sequence[int], length: Optional[int] = None):
    values = list(values)
    if length is not None:
        values = values[:length] + [0] * (length - len(values))
    if not values:
        values = [0]
    return params.field(values)


def _ints(array) -> list:
    return [int(c) for c in array.view(np.ndarray).tolist()]


def _scalar_value(params: FieldParams, c) -> int:
    if isinstance(c, FieldElem):
        return c.value
    return int(c) % params.p


# ---------------------------------------------------------------------------
# k_E[u]
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolySeries:
    """
    Exact polynomial over k_E in u

    Attributes:
        params (FieldParams): Coefficient field
        coeffs (tuple): Integer representations of the coefficients, ascending in u
    """
    params: FieldParams
    coeffs: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'coeffs', _trim(int(c) for c in self.coeffs))

    @classmethod
    def zero(cls, params: FieldParams) -> 'PolySeries':
        return cls(params, ())

    @classmethod
    def one(cls, params: FieldParams) -> 'PolySeries':
        return cls(params, (1,))

    @classmethod
    def monomial(cls, params: FieldParams, c, k: int) -> 'PolySeries':
        """c * u^k for a FieldElem or integer c"""
        return cls(params, (0,) * k + (_scalar_value(params, c),))

    @classmethod
    def from_elems(cls, params: FieldParams, elems: Iterable[FieldElem]) -> 'PolySeries':
        return cls(params, tuple(_scalar_value(params, c) for c in elems))

    @property
    def degree(self) -> int:
        """Degree in u (-1 for the zero polynomial)"""
        return len(self.coeffs) - 1

    @property
    def low_degree(self) -> Optional[int]:
        """Exponent of the lowest nonzero term (None for zero)"""
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return None

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def coefficient(self, k: int) -> FieldElem:
        value = self.coeffs[k] if 0 <= k < len(self.coeffs) else 0
        return FieldElem(self.params, value)

    def terms(self) -> Iterator[Tuple[int, FieldElem]]:
        for k, c in enumerate(self.coeffs):
            if c:
                yield k, FieldElem(self.params, c)

    def is_monomial(self) -> bool:
        return sum(1 for c in self.coeffs if c) == 1

    def restrict(self, lo: int = 0, hi: Optional[int] = None) -> 'PolySeries':
        """Terms with lo <= exponent < hi"""
        hi = len(self.coeffs) if hi is None else hi
        return PolySeries(self.params, tuple(
            c if lo <= k < hi else 0 for k, c in enumerate(self.coeffs)))

    def array(self):
        return _as_array(self.params, self.coeffs)

    def _poly(self):
        if not self.coeffs:
            return galois.Poly.Zero(self.params.field)
        return galois.Poly(self.array(), order="asc")

    @classmethod
    def _from_poly(cls, params: FieldParams, poly) -> 'PolySeries':
        return cls(params, tuple(_ints(poly.coeffs[::-1])))

    def _coerce(self, other) -> Optional['PolySeries']:
        if isinstance(other, PolySeries):
            if other.params != self.params:
                raise ValueError("polynomials over different fields")
            return other
        if isinstance(other, (FieldElem, int, np.integer)):
            return PolySeries(self.params, (_scalar_value(self.params, other),))
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        total = _as_array(self.params, self.coeffs, n) + _as_array(self.params, other.coeffs, n)
        return PolySeries(self.params, tuple(_ints(total)))

    __radd__ = __add__

    def __neg__(self):
        if not self.coeffs:
            return self
        return PolySeries(self.params, tuple(_ints(-self.array())))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            return PolySeries.zero(self.params)
        product = np.convolve(self.array(), other.array())
        return PolySeries(self.params, tuple(_ints(product)))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = PolySeries.one(self.params)
        base = self
        while n > 0:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def shift(self, k: int) -> 'PolySeries':
        """Multiply by u^k"""
        if not self.coeffs:
            return self
        return PolySeries(self.params, (0,) * k + self.coeffs)

    def divmod(self, divisor: 'PolySeries') -> Tuple['PolySeries', 'PolySeries']:
        if divisor.is_zero():
            raise DivisionByZero("division by the zero polynomial")
        q, r = divmod(self._poly(), divisor._poly())
        return PolySeries._from_poly(self.params, q), PolySeries._from_poly(self.params, r)

    def divides(self, other: 'PolySeries') -> bool:
        """True iff self divides other in k_E[u]"""
        if self.is_zero():
            return other.is_zero()
        return other.divmod(self)[1].is_zero()

    def exact_div(self, divisor: 'PolySeries') -> 'PolySeries':
        quotient, remainder = self.divmod(divisor)
        if not remainder.is_zero():
            raise NotDivisible(f"{divisor} does not divide {self}")
        return quotient

    def phi(self) -> 'PolySeries':
        return phi_poly(self)

    def __repr__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for k, c in self.terms():
            label = repr(c.value) if self.params.f == 1 else str(list(c.coeffs))
            terms.append(label if k == 0 else f"{label}*u^{k}")
        return " + ".join(terms)


def poly_arith(a: PolySeries, b: PolySeries, op: str = 'add') -> Union[PolySeries, bool]:
    """
    Exact arithmetic in k_E[u]

    ``divides`` asks whether a divides b; ``exact_div`` returns a / b.

    Raises:
        NotDivisible: exact_div on a non-divisible pair
    """
    if op == 'add':
        return a + b
    if op == 'mul':
        return a * b
    if op == 'divides':
        return a.divides(b)
    if op == 'exact_div':
        return a.exact_div(b)
    raise ValueError(f"Unknown polynomial operation: {op}")


def phi_poly(a: PolySeries) -> PolySeries:
    """Frobenius on k_E[u]: u -> u^p, coefficients fixed"""
    p = a.params.p
    values = [0] * (max(a.degree, 0) * p + 1)
    for k, c in enumerate(a.coeffs):
        values[k * p] = c
    return PolySeries(a.params, tuple(values))


# ---------------------------------------------------------------------------
# Witt scalars W_M(k_E) = Z/p^M [y] / (lift of the defining polynomial)
# ---------------------------------------------------------------------------

def _ring_reduce(values: list, params: FieldParams, modulus: int) -> Tuple[int, ...]:
    f = params.f
    lift = params.defining_poly
    for k in range(len(values) - 1, f - 1, -1):
        c = values[k]
        if c:
            for i in range(f):
                values[k - f + i] -= c * lift[i]
            values[k] = 0
    values = values[:f] + [0] * (f - len(values))
    return tuple(v % modulus for v in values)


@dataclass(frozen=True)
class WittScalar:
    """
    Element of the truncated Witt ring W_M(k_E)

    Attributes:
        params (FieldParams): Residue field
        M (int): Precision exponent (arithmetic mod p^M)
        coeffs (tuple): f residues mod p^M w.r.t. the lifted power basis
    """
    params: FieldParams
    M: int
    coeffs: Tuple[int, ...]

    def __post_init__(self):
        if self.M < 1:
            raise ValueError(f"Witt precision must be >= 1, got {self.M}")
        values = [int(c) for c in self.coeffs] + [0] * (self.params.f - len(self.coeffs))
        if len(values) > self.params.f:
            raise ValueError(f"expected {self.params.f} coordinates, got {len(values)}")
        object.__setattr__(self, 'coeffs', tuple(v % self.modulus for v in values))

    @property
    def modulus(self) -> int:
        return self.params.p ** self.M

    @classmethod
    def from_int(cls, params: FieldParams, M: int, n: int) -> 'WittScalar':
        return cls(params, M, (n,))

    @classmethod
    def zero(cls, params: FieldParams, M: int) -> 'WittScalar':
        return cls(params, M, ())

    @classmethod
    def one(cls, params: FieldParams, M: int) -> 'WittScalar':
        return cls(params, M, (1,))

    def reduce(self) -> FieldElem:
        return FieldElem.from_coords(self.params, [c % self.params.p for c in self.coeffs])

    def is_unit(self) -> bool:
        return not self.reduce().is_zero()

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def _coerce(self, other) -> Optional['WittScalar']:
        if isinstance(other, WittScalar):
            if other.params != self.params or other.M != self.M:
                raise ValueError("Witt scalars over different rings")
            return other
        if isinstance(other, (int, np.integer)):
            return WittScalar.from_int(self.params, self.M, int(other))
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return WittScalar(self.params, self.M, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return WittScalar(self.params, self.M, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        f = self.params.f
        product = [0] * (2 * f - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    product[i + j] += a * b
        return WittScalar(self.params, self.M, _ring_reduce(product, self.params, self.modulus))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = WittScalar.one(self.params, self.M)
        base = self
        while n > 0:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self) -> 'WittScalar':
        if not self.is_unit():
            raise DivisionByZero(f"{self} is not a unit of W_{self.M}(F_{self.params.order})")
        p, f = self.params.p, self.params.f
        unit_group_order = (p ** f - 1) * p ** (f * (self.M - 1))
        return self ** (unit_group_order - 1)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __repr__(self):
        if self.params.f == 1:
            return f"WittScalar({self.coeffs[0]} mod {self.modulus})"
        return f"WittScalar({list(self.coeffs)} mod {self.modulus})"


def teichmuller(a: FieldElem, M: Optional[int] = None) -> WittScalar:
    """
    Teichmuller lift of a to W_M(k_E)

    Iterates x -> x^{p^f} from the naive lift; each step gains one p-adic digit.
    """
    M = M or FIELD_CONFIG['witt_precision']
    x = WittScalar(a.params, M, a.coeffs)
    q = a.params.order
    for _ in range(M - 1):
        x = x ** q
    return x


# ---------------------------------------------------------------------------
# W_M(k_E)[u]
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WittPoly:
    """Polynomial over W_M(k_E) in u, trailing zeros trimmed"""
    params: FieldParams
    M: int
    coeffs: Tuple[WittScalar, ...] = ()

    def __post_init__(self):
        values = list(self.coeffs)
        while values and values[-1].is_zero():
            values.pop()
        object.__setattr__(self, 'coeffs', tuple(values))

    @classmethod
    def zero(cls, params: FieldParams, M: int) -> 'WittPoly':
        return cls(params, M, ())

    @classmethod
    def one(cls, params: FieldParams, M: int) -> 'WittPoly':
        return cls(params, M, (WittScalar.one(params, M),))

    @classmethod
    def monomial(cls, c: WittScalar, k: int) -> 'WittPoly':
        zero = WittScalar.zero(c.params, c.M)
        return cls(c.params, c.M, (zero,) * k + (c,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, k: int) -> WittScalar:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return WittScalar.zero(self.params, self.M)

    def _coerce(self, other) -> Optional['WittPoly']:
        if isinstance(other, WittPoly):
            return other
        if isinstance(other, WittScalar):
            return WittPoly(self.params, self.M, (other,))
        if isinstance(other, (int, np.integer)):
            return WittPoly(self.params, self.M, (WittScalar.from_int(self.params, self.M, int(other)),))
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        return WittPoly(self.params, self.M, tuple(
            self.coefficient(k) + other.coefficient(k) for k in range(n)))

    __radd__ = __add__

    def __neg__(self):
        return WittPoly(self.params, self.M, tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return WittPoly.zero(self.params, self.M)
        product = [WittScalar.zero(self.params, self.M)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                product[i + j] = product[i + j] + a * b
        return WittPoly(self.params, self.M, tuple(product))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = WittPoly.one(self.params, self.M)
        for _ in range(n):
            result = result * self
        return result

    def divmod_monic(self, divisor: 'WittPoly') -> Tuple['WittPoly', 'WittPoly']:
        """
        Long division by a polynomial whose leading coefficient is a unit

        Raises:
            DivisionByZero: Leading coefficient of the divisor is not a unit
        """
        if divisor.is_zero() or not divisor.coeffs[-1].is_unit():
            raise DivisionByZero("divisor must have a unit leading coefficient")
        lead_inv = divisor.coeffs[-1].inverse()
        remainder = list(self.coeffs)
        zero = WittScalar.zero(self.params, self.M)
        quotient = [zero] * max(len(remainder) - len(divisor.coeffs) + 1, 0)
        for k in range(len(remainder) - len(divisor.coeffs), -1, -1):
            c = remainder[k + divisor.degree] * lead_inv
            quotient[k] = c
            if c.is_zero():
                continue
            for i, d in enumerate(divisor.coeffs):
                remainder[k + i] = remainder[k + i] - c * d
        return WittPoly(self.params, self.M, tuple(quotient)), WittPoly(self.params, self.M, tuple(remainder))

    def reduce(self) -> PolySeries:
        return PolySeries.from_elems(self.params, (c.reduce() for c in self.coeffs))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        return " + ".join(f"{c!r}*u^{k}" for k, c in enumerate(self.coeffs) if not c.is_zero())


def e_polynomial(params: FieldParams, M: Optional[int] = None) -> WittPoly:
    """E(u) = u - p, the Eisenstein polynomial of Q_p"""
    M = M or FIELD_CONFIG['witt_precision']
    return WittPoly(params, M, (WittScalar.from_int(params, M, -params.p), WittScalar.one(params, M)))


def reduce_mod_p(value: Union[WittScalar, WittPoly]) -> Union[FieldElem, PolySeries]:
    """Reduction O_E -> k_E (scalars) or W_M(k_E)[u] -> k_E[u] (polynomials)"""
    if isinstance(value, (WittScalar, WittPoly)):
        return value.reduce()
    raise TypeError(f"cannot reduce {type(value).__name__} mod p")


def witt_ops(a: Union[WittScalar, WittPoly], b=None, op: str = 'add'):
    """
    Arithmetic on Witt scalars and polynomials

    Args:
        op (str): One of add, sub, mul, inv, reduce, teichmuller (a is then a FieldElem)
    """
    if op == 'add':
        return a + b
    if op == 'sub':
        return a - b
    if op == 'mul':
        return a * b
    if op == 'inv':
        return a.inverse()
    if op == 'reduce':
        return reduce_mod_p(a)
    if op == 'teichmuller':
        return teichmuller(a, b)
    raise ValueError(f"Unknown Witt operation: {op}")


# ---------------------------------------------------------------------------
# The model k_E[x]/(x^N) of R (x) k_E, u = x^{p-1}
# ---------------------------------------------------------------------------

def padic_digits(value, p: int, count: int) -> Tuple[int, ...]:
    """
    First ``count`` base-p digits of a p-adic integer

    Args:
        value: int or Fraction whose denominator is prime to p
        p (int): Prime
        count (int): Number of digits

    Returns:
        tuple: Digits d_0, d_1, ... with value = sum d_i p^i
    """
    value = Fraction(value)
    if value.denominator % p == 0:
        raise ValueError(f"{value} is not a {p}-adic integer")
    digits = []
    for _ in range(count):
        digit = (value.numerator * pow(value.denominator, -1, p)) % p
        digits.append(digit)
        value = (value - digit) / p
    return tuple(digits)


def _mul_truncated(a, b, N: int):
    """Product truncated below x^N, plus whether a nonzero term was dropped"""
    full = np.convolve(a, b)
    lost = bool(np.any(full[N:].view(np.ndarray))) if len(full) > N else False
    if len(full) < N:
        full = np.concatenate([full, type(full).Zeros(N - len(full))])
    return full[:N], lost


@dataclass(frozen=True, eq=False)
class RamSeries:
    """
    Truncated series over k_E in x with u = x^{p-1}

    ``exact`` is True when the element is a polynomial known without truncation
    loss; otherwise only the coefficients below x^N are meaningful.
    """
    params: FieldParams
    coeffs: Tuple[int, ...]
    N: int
    exact: bool = True

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"precision must be positive, got {self.N}")
        values = [int(c) for c in self.coeffs]
        exact = self.exact and not any(values[self.N:])
        object.__setattr__(self, 'coeffs', _trim(values[:self.N]))
        object.__setattr__(self, 'exact', exact)

    @classmethod
    def zero(cls, params: FieldParams, N: int) -> 'RamSeries':
        return cls(params, (), N)

    @classmethod
    def one(cls, params: FieldParams, N: int) -> 'RamSeries':
        return cls(params, (1,), N)

    @classmethod
    def monomial(cls, params: FieldParams, c, k: int, N: int) -> 'RamSeries':
        """c * x^k"""
        return cls(params, (0,) * k + (_scalar_value(params, c),), N)

    @classmethod
    def from_array(cls, params: FieldParams, array, N: int, exact: bool) -> 'RamSeries':
        return cls(params, tuple(_ints(array)), N, exact)

    def array(self, length: Optional[int] = None):
        return _as_array(self.params, self.coeffs, length or self.N)

    def coefficient(self, k: int) -> FieldElem:
        value = self.coeffs[k] if 0 <= k < len(self.coeffs) else 0
        return FieldElem(self.params, value)

    @property
    def lowest_exponent(self) -> Optional[int]:
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return None

    def is_zero_up_to_precision(self) -> bool:
        return not self.coeffs

    def valuation(self) -> Valuation:
        return v_R(self)

    def with_precision(self, N: int) -> 'RamSeries':
        """Truncate (or, for exact elements, extend) to precision N"""
        if N > self.N and not self.exact:
            raise ValueError(f"cannot raise the precision of an inexact element from {self.N} to {N}")
        return RamSeries(self.params, self.coeffs, N, self.exact and not any(self.coeffs[N:]))

    def _coerce(self, other) -> Optional['RamSeries']:
        if isinstance(other, RamSeries):
            if other.params != self.params:
                raise ValueError("series over different fields")
            return other
        if isinstance(other, (FieldElem, int, np.integer)):
            return RamSeries(self.params, (_scalar_value(self.params, other),), self.N)
        return None

    def _full_array(self):
        return _as_array(self.params, self.coeffs, max(len(self.coeffs), 1))

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        N = min(self.N, other.N)
        # terms at or above the common precision are dropped from the sum
        lost = any(self.coeffs[N:]) or any(other.coeffs[N:])
        return RamSeries.from_array(self.params, self.array(N) + other.array(N), N,
                                    self.exact and other.exact and not lost)

    __radd__ = __add__

    def __neg__(self):
        return RamSeries.from_array(self.params, -self.array(), self.N, self.exact)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        N = min(self.N, other.N)
        product, lost = _mul_truncated(self._full_array(), other._full_array(), N)
        return RamSeries.from_array(self.params, product, N, self.exact and other.exact and not lost)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = RamSeries.one(self.params, self.N)
        base = self
        while n > 0:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def shift(self, k: int) -> 'RamSeries':
        """Multiply by x^k"""
        if not self.coeffs:
            return self
        return RamSeries(self.params, (0,) * k + self.coeffs, self.N, self.exact)

    def frobenius_power(self) -> 'RamSeries':
        """The p-th power, computed as c -> c^p on coefficients and x^k -> x^{pk}"""
        p = self.params.p
        values = [0] * self.N
        for k, c in enumerate(self.coeffs):
            if c and k * p < self.N:
                values[k * p] = c
        array = _as_array(self.params, values, self.N)
        if self.params.f > 1:
            array = array ** p
        lost = any(c and k * p >= self.N for k, c in enumerate(self.coeffs))
        return RamSeries.from_array(self.params, array, self.N, self.exact and not lost)

    def first_difference(self, other: 'RamSeries') -> Optional[int]:
        """Lowest exponent below the common precision where the two differ"""
        N = min(self.N, other.N)
        for k in range(N):
            a = self.coeffs[k] if k < len(self.coeffs) else 0
            b = other.coeffs[k] if k < len(other.coeffs) else 0
            if a != b:
                return k
        return None

    def agrees_with(self, other: 'RamSeries') -> bool:
        return self.first_difference(other) is None

    def __eq__(self, other):
        if not isinstance(other, RamSeries):
            return NotImplemented
        return self.params == other.params and self.N == other.N and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.params, self.coeffs, self.N))

    def __repr__(self):
        terms = [f"{c}*x^{k}" for k, c in enumerate(self.coeffs) if c]
        body = " + ".join(terms) if terms else "0"
        return f"RamSeries({body} + O(x^{self.N}))" if not self.exact else f"RamSeries({body})"


def ram_from_poly(a: PolySeries, N: int) -> RamSeries:
    """Embed k_E[u] into the model via u = x^{p-1}"""
    step = a.params.p - 1
    values = [0] * (max(a.degree, 0) * step + 1)
    for k, c in enumerate(a.coeffs):
        values[k * step] = c
    return RamSeries(a.params, tuple(values), N)


def v_R(a: RamSeries) -> Valuation:
    """
    Valuation normalized by v(u) = 1, so v(x) = 1/(p-1)

    Raises:
        IndeterminateValuation: a vanishes below x^N but is not known to be zero
    """
    k = a.lowest_exponent
    if k is None:
        if a.exact:
            return INFINITY
        raise IndeterminateValuation(a.N)
    return Fraction(k, a.params.p - 1)


def has_positive_valuation(a: RamSeries) -> bool:
    """v_R(a) > 0, decided by the constant coefficient alone"""
    return a.coefficient(0).is_zero()


def phi_ram(a: RamSeries) -> RamSeries:
    """Frobenius of the model: x -> x^p, coefficients fixed"""
    p = a.params.p
    values = [0] * a.N
    lost = False
    for k, c in enumerate(a.coeffs):
        if not c:
            continue
        if k * p < a.N:
            values[k * p] = c
        else:
            lost = True
    return RamSeries(a.params, tuple(values), a.N, a.exact and not lost)


def unit_pow_zp(z: RamSeries, alpha, N: Optional[int] = None) -> RamSeries:
    """
    (1 + z)^alpha for a p-adic integer alpha

    Uses the characteristic-p factorization (1+z)^alpha = prod_i (1 + z^{p^i})^{alpha_i}
    over the base-p digits of alpha, which agrees with the Lucas reduction of the
    binomial coefficients.

    Args:
        z (RamSeries): Element of positive valuation
        alpha: int, Fraction (denominator prime to p) or digit sequence
        N (int, optional): Output precision

    Raises:
        NotTopologicallyNilpotent: v_R(z) <= 0
    """
    if not has_positive_valuation(z):
        raise NotTopologicallyNilpotent("(1+z)^alpha needs v_R(z) > 0")

    params, p = z.params, z.params.p
    N = N or z.N
    if not z.exact:
        N = min(N, z.N)
    z = z.with_precision(N)

    order = z.lowest_exponent
    if order is None:
        return RamSeries(params, (1,), N, z.exact)

    needed = 0
    while order * p ** needed < N:
        needed += 1

    finite = isinstance(alpha, (int, np.integer)) and alpha >= 0
    if isinstance(alpha, (list, tuple)):
        digits = tuple(alpha)[:needed]
        finite = len(alpha) <= needed
    else:
        digits = padic_digits(alpha, p, needed)
        finite = finite and int(alpha) < p ** needed

    result = RamSeries.one(params, N)
    power = z
    for digit in digits:
        if digit:
            factor = RamSeries.one(params, N) + power
            for _ in range(digit):
                result = result * factor
        power = power.frobenius_power()

    exact = finite and z.exact and result.exact
    return RamSeries(params, result.coeffs, N, exact)


# ---------------------------------------------------------------------------
# The epsilon-unit and tau
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EpsilonModel:
    """
    The model 1-unit epsilon = 1 + x^p * g with g over F_p

    Attributes:
        name (str): Preset name or 'custom'
        g (tuple): Coefficients of g in x, ascending
    """
    name: str = 'standard'
    g: Tuple[int, ...] = (1,)

    PRESETS = {
        'standard': (1,),
        'shifted': (1, 1),
        'doubled': (2,),
    }

    @classmethod
    def from_name(cls, name: Optional[str] = None) -> 'EpsilonModel':
        """Preset name or a comma list of F_p coefficients of g"""
        name = (name or PRECISION_CONFIG['epsilon_model']).strip()
        if name in cls.PRESETS:
            return cls(name, cls.PRESETS[name])
        try:
            g = tuple(int(part) for part in name.split(','))
        except ValueError:
            raise ValueError(f"Unknown epsilon model: {name!r}")
        return cls('custom', g)

    @classmethod
    def variants(cls):
        return [cls(name, g) for name, g in cls.PRESETS.items()]

    def g_values(self, p: int) -> Tuple[int, ...]:
        values = tuple(c % p for c in self.g)
        if not values or values[0] == 0:
            raise ValueError(f"epsilon model {self.name} needs a nonzero constant term mod {p}")
        return values

    def epsilon(self, params: FieldParams, N: int) -> RamSeries:
        p = params.p
        return RamSeries(params, (1,) + (0,) * (p - 1) + self.g_values(p), N)

    def power(self, params: FieldParams, alpha, N: int) -> RamSeries:
        """epsilon^alpha for a p-adic integer alpha"""
        return unit_pow_zp(self.epsilon(params, N) - 1, alpha, N)

    def tau_of_x(self, params: FieldParams, N: int) -> RamSeries:
        """tau(x) = x * epsilon^{1/(p-1)}"""
        return _tau_of_x(params, N, self)


@memoized
def _tau_of_x(params: FieldParams, N: int, model: EpsilonModel) -> RamSeries:
    root = model.power(params, Fraction(1, params.p - 1), N)
    return RamSeries(params, (0,) + root.coeffs, N, root.exact)


def tau_ram(a: RamSeries, model: Optional[EpsilonModel] = None) -> RamSeries:
    """
    The ring endomorphism tau with tau(x) = x * epsilon^{1/(p-1)}

    Consequently tau(u) = u * epsilon; scalars are fixed.
    """
    model = model or EpsilonModel.from_name()
    if len(a.coeffs) <= 1:
        return a
    t = model.tau_of_x(a.params, a.N)
    result = RamSeries.zero(a.params, a.N)
    for c in reversed(a.coeffs):
        result = result * t + FieldElem(a.params, c)
    return RamSeries(a.params, result.coeffs, a.N, False)


def default_precision(p: int, r_max: int, factor: Optional[int] = None) -> int:
    """N = factor * p^2 * max(r_max, 1), never below 2p or the configured floor"""
    factor = factor or PRECISION_CONFIG['precision_factor']
    return max(factor * p * p * max(r_max, 1), 2 * p, PRECISION_CONFIG['min_precision'])
