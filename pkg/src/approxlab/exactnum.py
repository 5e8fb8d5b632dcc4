"""Exact scalars: rationals, real quadratic field elements, truncated F_p Laurent series.

Rationals are plain :class:`fractions.Fraction` values (always normalized).
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Sequence, Union

__all__ = [
    "DomainMismatch",
    "PrecisionError",
    "QuadElem",
    "FpSeries",
    "ExactScalar",
    "as_fraction",
    "domain_of",
    "scalar_arith",
    "quad_compare",
    "series_frobenius",
    "exact_floor",
    "exact_ceil",
    "exact_abs",
    "sign",
    "format_scalar",
    "parse_scalar",
    "DEFAULT_VALUATION_FLOOR",
]

DEFAULT_VALUATION_FLOOR = 8


class DomainMismatch(TypeError):
    """Operands live in different scalar domains."""


class PrecisionError(ArithmeticError):
    """A truncated series operation has no certified digits left."""


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not a rational: {x!r}")


def _is_squarefree(d: int) -> bool:
    if d < 2:
        return False
    k = 2
    while k * k <= d:
        if d % (k * k) == 0:
            return False
        k += 1
    return True


def _sign(q: Fraction) -> int:
    return (q > 0) - (q < 0)


@total_ordering
class QuadElem:
    """An element a + b*sqrt(d) of the real quadratic field Q(sqrt d)."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=0, d: int = 2):
        if not _is_squarefree(d):
            raise ValueError(f"d must be a square-free integer >= 2, got {d}")
        self.a = as_fraction(a)
        self.b = as_fraction(b)
        self.d = d

    def _coerce(self, other) -> QuadElem | None:
        if isinstance(other, QuadElem):
            if other.d != self.d:
                raise DomainMismatch(f"Q(sqrt {self.d}) vs Q(sqrt {other.d})")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadElem(other, 0, self.d)
        return None

    def __repr__(self) -> str:
        return f"QuadElem({self.a}, {self.b}, d={self.d})"

    def __str__(self) -> str:
        return format_scalar(self)

    def __eq__(self, other) -> bool:
        if isinstance(other, QuadElem):
            return self.a == other.a and self.b == other.b and self.d == other.d
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self) -> int:
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def sign(self) -> int:
        """Exact sign of the real number a + b*sqrt(d)."""
        sa, sb = _sign(self.a), _sign(self.b)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: the larger of a^2 and d*b^2 wins; equality needs sqrt(d) rational
        if self.a * self.a > self.d * self.b * self.b:
            return sa
        return sb

    def __lt__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadElem(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self) -> QuadElem:
        return QuadElem(-self.a, -self.b, self.d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadElem(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadElem(
            self.a * o.a + self.d * self.b * o.b,
            self.a * o.b + self.b * o.a,
            self.d,
        )

    __rmul__ = __mul__

    def conjugate(self) -> QuadElem:
        return QuadElem(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.d * self.b * self.b

    def inverse(self) -> QuadElem:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(sqrt d)")
        return QuadElem(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __abs__(self) -> QuadElem:
        return -self if self.sign() < 0 else self

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def is_rational(self) -> bool:
        return self.b == 0

    def floor(self) -> int:
        # rational bracket of sqrt(d) to 2^-64, then exact correction
        scale = 1 << 64
        root = Fraction(math.isqrt(self.d * scale * scale), scale)
        k = math.floor(self.a + self.b * root)
        while (self - k).sign() < 0:
            k -= 1
        while (self - (k + 1)).sign() >= 0:
            k += 1
        return k


ExactScalar = Union[Fraction, QuadElem, "FpSeries"]


class FpSeries:
    """A truncated Laurent series over F_p, known modulo t^N.

    ``coeffs[i]`` is the coefficient of ``t^(v + i)`` for ``v <= v + i < N``.
    The zero series has ``v == N`` and no coefficients.
    """

    __slots__ = ("p", "N", "v", "coeffs", "floor")

    def __init__(
        self,
        p: int,
        N: int,
        coeffs: Sequence[int] = (),
        v: int = 0,
        floor: int = DEFAULT_VALUATION_FLOOR,
    ):
        if p < 2 or any(p % k == 0 for k in range(2, math.isqrt(p) + 1)):
            raise ValueError(f"p must be prime, got {p}")
        if N < -floor:
            raise PrecisionError(f"precision t^{N} lies below the valuation floor -{floor}")
        cs = [c % p for c in coeffs][: max(N - v, 0)]
        k = 0
        while k < len(cs) and cs[k] == 0:
            k += 1
        cs = cs[k:]
        v += k
        if not cs:
            v = N
        elif v < -floor:
            raise PrecisionError(f"valuation {v} below floor -{floor}")
        cs += [0] * (N - v - len(cs))
        self.p = p
        self.N = N
        self.v = v
        self.coeffs = tuple(cs)
        self.floor = floor

    @classmethod
    def zero(cls, p: int, N: int) -> FpSeries:
        return cls(p, N)

    @classmethod
    def monomial(cls, p: int, N: int, k: int, c: int = 1) -> FpSeries:
        return cls(p, N, [c], v=k)

    def is_zero(self) -> bool:
        return self.v >= self.N

    def coef(self, i: int) -> int:
        if i >= self.N:
            raise PrecisionError(f"coefficient of t^{i} unknown modulo t^{self.N}")
        if i < self.v:
            return 0
        return self.coeffs[i - self.v]

    def coefficient_list(self, start: int = 0) -> list[int]:
        """Coefficients for indices start..N-1."""
        return [self.coef(i) for i in range(start, self.N)]

    def _check(self, other) -> FpSeries:
        if not isinstance(other, FpSeries):
            raise DomainMismatch(f"cannot combine FpSeries with {type(other).__name__}")
        if other.p != self.p:
            raise DomainMismatch(f"F_{self.p} vs F_{other.p}")
        return other

    def __eq__(self, other) -> bool:
        if not isinstance(other, FpSeries):
            return NotImplemented
        return (self.p, self.N, self.v, self.coeffs) == (other.p, other.N, other.v, other.coeffs)

    def __hash__(self) -> int:
        return hash((self.p, self.N, self.v, self.coeffs))

    def __repr__(self) -> str:
        return f"FpSeries({format_scalar(self)!r})"

    def __str__(self) -> str:
        return format_scalar(self)

    def _floor_with(self, other: FpSeries) -> int:
        return max(self.floor, other.floor)

    def __add__(self, other) -> FpSeries:
        o = self._check(other)
        N = min(self.N, o.N)
        v = min(self.v, o.v, N)
        cs = [self.coef(i) + o.coef(i) for i in range(v, N)]
        return FpSeries(self.p, N, cs, v, self._floor_with(o))

    def __neg__(self) -> FpSeries:
        return FpSeries(self.p, self.N, [-c for c in self.coeffs], self.v, self.floor)

    def __sub__(self, other) -> FpSeries:
        return self + (-self._check(other))

    def __mul__(self, other) -> FpSeries:
        if isinstance(other, int):
            return FpSeries(self.p, self.N, [c * other for c in self.coeffs], self.v, self.floor)
        o = self._check(other)
        floor = self._floor_with(o)
        N = min(self.N, o.N, self.N + o.v, o.N + self.v)
        if N < -floor:
            raise PrecisionError(f"product precision t^{N} below valuation floor -{floor}")
        v = self.v + o.v
        if self.is_zero() or o.is_zero() or v >= N:
            return FpSeries(self.p, N, (), N, floor)
        out = [0] * (N - v)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(o.coeffs):
                k = i + j
                if k >= len(out):
                    break
                out[k] += a * b
        return FpSeries(self.p, N, out, v, floor)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> FpSeries:
        if k < 0:
            return self.inverse() ** (-k)
        result = FpSeries(self.p, self.N, [1], 0, self.floor)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> FpSeries:
        if self.is_zero():
            raise ZeroDivisionError(f"series is zero modulo t^{self.N}")
        u = self.coeffs
        n = len(u)
        u0inv = pow(u[0], -1, self.p)
        c = [u0inv]
        for k in range(1, n):
            s = sum(u[i] * c[k - i] for i in range(1, k + 1))
            c.append((-s * u0inv) % self.p)
        return FpSeries(self.p, n - self.v, c, -self.v, self.floor)

    def __truediv__(self, other) -> FpSeries:
        o = self._check(other)
        return self * o.inverse()

    def shift(self, k: int) -> FpSeries:
        """Multiply by t^k (exact; precision moves with it)."""
        return FpSeries(self.p, self.N + k, self.coeffs, self.v + k, self.floor)

    def truncate(self, N: int) -> FpSeries:
        if N > self.N:
            raise PrecisionError(f"cannot raise precision from {self.N} to {N}")
        return FpSeries(self.p, N, self.coeffs, self.v, self.floor)


def domain_of(x) -> tuple:
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return ("Q",)
    if isinstance(x, QuadElem):
        return ("quad", x.d)
    if isinstance(x, FpSeries):
        return ("series", x.p)
    raise TypeError(f"not an exact scalar: {x!r}")


_OPS = {
    "add": lambda x, y: x + y,
    "sub": lambda x, y: x - y,
    "mul": lambda x, y: x * y,
    "div": lambda x, y: x / y,
}


def scalar_arith(x, y, op: str):
    """Exact field operation on two scalars of the same domain.

    Rationals promote into Q(sqrt d); every other cross-domain pair raises
    :class:`DomainMismatch`.
    """
    if op not in _OPS:
        raise ValueError(f"unknown op {op!r}")
    dx, dy = domain_of(x), domain_of(y)
    if dx != dy and not ({dx[0], dy[0]} == {"Q", "quad"}):
        raise DomainMismatch(f"{dx} vs {dy}")
    if dx == dy == ("Q",):
        x, y = as_fraction(x), as_fraction(y)
        if op == "div" and y == 0:
            raise ZeroDivisionError("division by zero")
    return _OPS[op](x, y)


def sign(x) -> int:
    if isinstance(x, QuadElem):
        return x.sign()
    return _sign(as_fraction(x))


def quad_compare(x: QuadElem, r) -> int:
    """Sign (-1, 0, 1) of x - r, decided without floating point."""
    if isinstance(x, QuadElem):
        return (x - as_fraction(r)).sign()
    return _sign(as_fraction(x) - as_fraction(r))


def exact_floor(x) -> int:
    if isinstance(x, QuadElem):
        return x.floor()
    return math.floor(as_fraction(x))


def exact_ceil(x) -> int:
    return -exact_floor(-x)


def exact_abs(x):
    return -x if sign(x) < 0 else x


def series_frobenius(x: FpSeries) -> FpSeries:
    """x^p via the additive Frobenius: coefficient i moves to index p*i."""
    p = x.p
    N = min(x.N, p * x.N)
    if x.is_zero():
        return FpSeries(p, N, (), N, x.floor)
    if p * x.v < -x.floor:
        raise PrecisionError(f"t^{p * x.v} lies below the valuation floor -{x.floor}")
    if p * x.v >= N:
        raise PrecisionError(f"all terms of x^{p} fall beyond precision t^{N}")
    out = [0] * (N - p * x.v)
    for i, c in enumerate(x.coeffs):
        k = p * i
        if k >= len(out):
            break
        out[k] = c
    return FpSeries(p, N, out, p * x.v, x.floor)


# -- text encodings -------------------------------------------------------------

_QUAD_RE = re.compile(
    r"^\s*(?P<a>[+-]?\d+(?:/\d+)?)\s*(?P<op>[+-])\s*(?P<b>[+-]?\d+(?:/\d+)?)\s*\*\s*sqrt\((?P<d>\d+)\)\s*$"
)
_SERIES_RE = re.compile(
    r"^\s*p=(?P<p>\d+);N=(?P<N>-?\d+);v=(?P<v>-?\d+);c=(?P<c>[\d,]*)\s*$"
)


def format_scalar(x) -> str:
    if isinstance(x, QuadElem):
        return f"{x.a}+{x.b}*sqrt({x.d})"
    if isinstance(x, FpSeries):
        return f"p={x.p};N={x.N};v={x.v};c={','.join(map(str, x.coeffs))}"
    return str(as_fraction(x))


def parse_scalar(text: str):
    """Inverse of :func:`format_scalar`."""
    m = _SERIES_RE.match(text)
    if m:
        cs = [int(c) for c in m["c"].split(",") if c != ""]
        p, N, v = int(m["p"]), int(m["N"]), int(m["v"])
        if len(cs) != max(N - v, 0):
            raise ValueError(f"series {text!r}: expected {max(N - v, 0)} coefficients, got {len(cs)}")
        if cs and cs[0] % p == 0:
            raise ValueError(f"series {text!r}: leading coefficient must be nonzero")
        return FpSeries(p, N, cs, v, max(DEFAULT_VALUATION_FLOOR, -v, -N))
    m = _QUAD_RE.match(text)
    if m:
        b = Fraction(m["b"])
        if m["op"] == "-":
            b = -b
        return QuadElem(Fraction(m["a"]), b, int(m["d"]))
    try:
        return Fraction(text.strip())
    except ValueError:
        raise ValueError(f"unparseable scalar {text!r}") from None


def parse_point(fields: Iterable[str]) -> tuple:
    return tuple(parse_scalar(f) for f in fields)
