"""Exact truncated power series over the rationals.

Everything here works with :class:`fractions.Fraction` coefficients.  Series
are dense and truncated at a fixed ``order``; arithmetic never looks past it.
Exponential generating functions are stored in series form (``c_n / n!``);
conversion to counts happens in :mod:`phylolevel.classes`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence, Union

Number = Union[int, Fraction]


class SeriesError(ValueError):
    """Raised on misuse of series operations (order mismatch, bad precondition)."""


class FixpointDivergence(ArithmeticError):
    """Raised when a fixed-point iteration fails to stabilise."""


def _frac(x: Number) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


# ---------------------------------------------------------------------------
# univariate series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerSeries:
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise SeriesError("a series needs at least the constant coefficient")

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[Number], order: int) -> PowerSeries:
        cs = [_frac(c) for c in coeffs][: order + 1]
        cs += [Fraction(0)] * (order + 1 - len(cs))
        return cls(tuple(cs))

    @classmethod
    def zero(cls, order: int) -> PowerSeries:
        return cls.from_coeffs((), order)

    @classmethod
    def one(cls, order: int) -> PowerSeries:
        return cls.from_coeffs((1,), order)

    @classmethod
    def z(cls, order: int) -> PowerSeries:
        return cls.from_coeffs((0, 1), order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> Fraction:
        return self.coeffs[n]

    def __len__(self) -> int:
        return len(self.coeffs)

    def _check(self, other: PowerSeries) -> None:
        if other.order != self.order:
            raise SeriesError(f"order mismatch: {self.order} != {other.order}")

    def __add__(self, other):
        if isinstance(other, PowerSeries):
            self._check(other)
            return PowerSeries(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))
        if isinstance(other, (int, Fraction)):
            return PowerSeries((self.coeffs[0] + other,) + self.coeffs[1:])
        return NotImplemented

    __radd__ = __add__

    def __neg__(self) -> PowerSeries:
        return PowerSeries(tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PowerSeries):
            return mul(self, other)
        if isinstance(other, (int, Fraction)):
            return PowerSeries(tuple(a * other for a in self.coeffs))
        return NotImplemented

    __rmul__ = __mul__

    def valuation(self) -> int | None:
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return None

    def evaluate(self, x):
        """Horner evaluation of the truncated polynomial at ``x``."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + (c if isinstance(x, (int, Fraction)) else _coerce(c, x))
        return acc


def mul(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    """Truncated Cauchy product."""
    a._check(b)
    n = a.order
    ac, bc = a.coeffs, b.coeffs
    va, vb = a.valuation(), b.valuation()
    if va is None or vb is None:
        return PowerSeries.zero(n)
    out = [Fraction(0)] * (n + 1)
    for i in range(va, n + 1 - vb):
        ai = ac[i]
        if not ai:
            continue
        for j in range(vb, n + 1 - i):
            out[i + j] += ai * bc[j]
    return PowerSeries(tuple(out))


def quasi_inverse(a: PowerSeries) -> PowerSeries:
    """Return ``1 / (1 - a)`` truncated to the order of ``a``."""
    if a.coeffs[0] != 0:
        raise SeriesError("quasi-inverse needs a series with zero constant term")
    n = a.order
    out = [Fraction(0)] * (n + 1)
    out[0] = Fraction(1)
    for k in range(1, n + 1):
        s = Fraction(0)
        for i in range(1, k + 1):
            if a.coeffs[i]:
                s += a.coeffs[i] * out[k - i]
        out[k] = s
    return PowerSeries(tuple(out))


def power(a: PowerSeries, k: int) -> PowerSeries:
    """``a**k`` by binary exponentiation; ``power(a, 0)`` is the series 1."""
    if k < 0:
        raise SeriesError("negative exponent")
    result = PowerSeries.one(a.order)
    base = a
    while k:
        if k & 1:
            result = mul(result, base)
        k >>= 1
        if k:
            base = mul(base, base)
    return result


def power_coefficients(a: Sequence[Fraction], alpha: int, n_terms: int) -> list[Fraction]:
    """First ``n_terms`` coefficients of ``a**alpha`` for ``a[0] != 0``.

    Uses the J.C.P. Miller recurrence, O(n_terms**2) operations.
    """
    a0 = a[0]
    if a0 == 0:
        raise SeriesError("power recurrence needs a nonzero constant term")
    b = [Fraction(a0) ** alpha]
    for k in range(1, n_terms):
        s = Fraction(0)
        for j in range(1, min(k, len(a) - 1) + 1):
            if a[j]:
                s += ((alpha + 1) * j - k) * a[j] * b[k - j]
        b.append(s / (k * a0))
    return b


# ---------------------------------------------------------------------------
# rational functions (exact, used for the phi's)
# ---------------------------------------------------------------------------


def _trim(p: Sequence[Fraction]) -> tuple[Fraction, ...]:
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return tuple(p) if p else (Fraction(0),)


def poly_add(p, q):
    n = max(len(p), len(q))
    return _trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return _trim(out)


def poly_scale(p, c):
    return _trim([a * c for a in p])


def poly_deriv(p):
    return _trim([i * p[i] for i in range(1, len(p))]) if len(p) > 1 else (Fraction(0),)


def poly_eval(p, x):
    acc = 0 * x
    for c in reversed(p):
        acc = acc * x + (c if isinstance(x, (int, Fraction)) else _coerce(c, x))
    return acc


def _coerce(c: Fraction, like):
    try:
        import mpmath

        if isinstance(like, (mpmath.mpf, mpmath.mpc)):
            return mpmath.mpf(c.numerator) / c.denominator
    except ImportError:  # pragma: no cover
        pass
    return float(c)


def poly_degree(p) -> int:
    p = _trim(p)
    return -1 if p == (0,) else len(p) - 1


def poly_divmod(p, q):
    p, q = list(_trim(p)), _trim(q)
    dq = poly_degree(q)
    if dq < 0:
        raise ZeroDivisionError("polynomial division by zero")
    quot = [Fraction(0)] * max(len(p) - dq, 1)
    lead = q[dq]
    while poly_degree(p) >= dq:
        dp = poly_degree(p)
        c = p[dp] / lead
        quot[dp - dq] = c
        for i in range(dq + 1):
            p[dp - dq + i] -= c * q[i]
        p = list(_trim(p))
    return _trim(quot), _trim(p)


def poly_gcd(p, q):
    p, q = _trim(p), _trim(q)
    while poly_degree(q) >= 0:
        _, r = poly_divmod(p, q)
        p, q = q, r
    d = poly_degree(p)
    return poly_scale(p, 1 / p[d]) if d >= 0 else p


@dataclass(frozen=True)
class RationalFunction:
    """``P(z) / Q(z)`` with exact rational coefficients, kept in lowest terms.

    Normalised so that the denominator has constant term 1 whenever
    ``Q(0) != 0`` (always the case for the phi's used here).
    """

    num: tuple[Fraction, ...]
    den: tuple[Fraction, ...]

    @classmethod
    def make(cls, num: Sequence[Number], den: Sequence[Number] = (1,)) -> RationalFunction:
        p = _trim([_frac(c) for c in num])
        q = _trim([_frac(c) for c in den])
        if poly_degree(q) < 0:
            raise ZeroDivisionError("zero denominator")
        g = poly_gcd(p, q)
        if poly_degree(g) > 0:
            p, _ = poly_divmod(p, g)
            q, _ = poly_divmod(q, g)
        norm = q[0] if q[0] != 0 else q[poly_degree(q)]
        return cls(poly_scale(p, 1 / norm), poly_scale(q, 1 / norm))

    @classmethod
    def z(cls) -> RationalFunction:
        return cls.make((0, 1))

    @classmethod
    def const(cls, c: Number) -> RationalFunction:
        return cls.make((c,))

    @staticmethod
    def _lift(other) -> RationalFunction:
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, (int, Fraction)):
            return RationalFunction.const(other)
        raise TypeError(type(other))

    def __add__(self, other):
        o = self._lift(other)
        return RationalFunction.make(
            poly_add(poly_mul(self.num, o.den), poly_mul(o.num, self.den)),
            poly_mul(self.den, o.den),
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(poly_scale(self.num, -1), self.den)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        return RationalFunction.make(poly_mul(self.num, o.num), poly_mul(self.den, o.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        return RationalFunction.make(poly_mul(self.num, o.den), poly_mul(self.den, o.num))

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return 1 / (self ** (-k))
        out = RationalFunction.const(1)
        for _ in range(k):
            out = out * self
        return out

    @property
    def numerator(self) -> tuple[Fraction, ...]:
        return self.num

    @property
    def denominator(self) -> tuple[Fraction, ...]:
        return self.den

    def derivative(self) -> RationalFunction:
        return RationalFunction.make(
            poly_add(poly_mul(poly_deriv(self.num), self.den), poly_scale(poly_mul(self.num, poly_deriv(self.den)), -1)),
            poly_mul(self.den, self.den),
        )

    def __call__(self, x):
        return poly_eval(self.num, x) / poly_eval(self.den, x)

    def series(self, order: int) -> PowerSeries:
        """Taylor expansion at 0, truncated at ``order``."""
        if self.den[0] == 0:
            raise SeriesError("rational function has a pole at 0")
        q0 = self.den[0]
        out = []
        for k in range(order + 1):
            s = self.num[k] if k < len(self.num) else Fraction(0)
            for j in range(1, min(k, len(self.den) - 1) + 1):
                s -= self.den[j] * out[k - j]
            out.append(s / q0)
        return PowerSeries(tuple(out))


# ---------------------------------------------------------------------------
# Lagrange inversion
# ---------------------------------------------------------------------------


def lagrange_coefficients(phi, N: int) -> list[Fraction]:
    """``[z^n] C`` for ``n = 1..N`` where ``C = z * phi(C)``.

    ``phi`` is anything with a ``series(order)`` method (a
    :class:`RationalFunction` or a :class:`PowerSeries` wrapper).  Each
    coefficient is ``(1/n) [z^(n-1)] phi^n``.
    """
    if N < 1:
        raise SeriesError("N must be at least 1")
    ps = phi.series(N - 1) if not isinstance(phi, PowerSeries) else phi
    if ps.coeffs[0] == 0:
        raise SeriesError("phi(0) must be nonzero")
    a = ps.coeffs
    return [power_coefficients(a, n, n)[n - 1] / n for n in range(1, N + 1)]


def lagrange_coefficient(phi, n: int) -> Fraction:
    """Single coefficient ``[z^n] C`` (same route as :func:`lagrange_coefficients`)."""
    if n < 1:
        raise SeriesError("n must be at least 1")
    ps = phi.series(n - 1) if not isinstance(phi, PowerSeries) else phi
    if ps.coeffs[0] == 0:
        raise SeriesError("phi(0) must be nonzero")
    return power_coefficients(ps.coeffs, n, n)[n - 1] / n


# ---------------------------------------------------------------------------
# bivariate coefficient polynomials and refined series
# ---------------------------------------------------------------------------


class BivarPoly:
    """Sparse polynomial in (x, y) with rational coefficients; zeros are never stored."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[int, int], Number] | None = None):
        self.terms: dict[tuple[int, int], Fraction] = {
            km: _frac(c) for km, c in (terms or {}).items() if c
        }

    @classmethod
    def const(cls, c: Number) -> BivarPoly:
        return cls({(0, 0): c})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, BivarPoly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == BivarPoly.const(other).terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        return f"BivarPoly({dict(sorted(self.terms.items()))})"

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = BivarPoly.const(other)
        out = dict(self.terms)
        for km, c in other.terms.items():
            out[km] = out.get(km, 0) + c
        return BivarPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return BivarPoly({km: -c for km, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return BivarPoly({km: c * other for km, c in self.terms.items()})
        out: dict[tuple[int, int], Fraction] = {}
        for (k1, m1), c1 in self.terms.items():
            for (k2, m2), c2 in other.terms.items():
                key = (k1 + k2, m1 + m2)
                out[key] = out.get(key, 0) + c1 * c2
        return BivarPoly(out)

    __rmul__ = __mul__

    def shift(self, dk: int, dm: int) -> BivarPoly:
        """Multiply by ``x**dk * y**dm``."""
        return BivarPoly({(k + dk, m + dm): c for (k, m), c in self.terms.items()})

    def evaluate(self, x: Number = 1, y: Number = 1) -> Fraction:
        return sum((c * _frac(x) ** k * _frac(y) ** m for (k, m), c in self.terms.items()), Fraction(0))


@dataclass(frozen=True)
class RefinedSeries:
    """Series in z whose coefficients are :class:`BivarPoly` in (x, y)."""

    coeffs: tuple[BivarPoly, ...]

    @classmethod
    def zero(cls, order: int) -> RefinedSeries:
        return cls(tuple(BivarPoly() for _ in range(order + 1)))

    @classmethod
    def monomial(cls, order: int, n: int = 0, k: int = 0, m: int = 0, c: Number = 1) -> RefinedSeries:
        cs = [BivarPoly() for _ in range(order + 1)]
        if n <= order:
            cs[n] = BivarPoly({(k, m): c})
        return cls(tuple(cs))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> BivarPoly:
        return self.coeffs[n]

    def _check(self, other: RefinedSeries) -> None:
        if other.order != self.order:
            raise SeriesError(f"order mismatch: {self.order} != {other.order}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            return RefinedSeries((self.coeffs[0] + other,) + self.coeffs[1:])
        self._check(other)
        return RefinedSeries(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return RefinedSeries(tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return RefinedSeries(tuple(a * other for a in self.coeffs))
        self._check(other)
        n = self.order
        out = [BivarPoly() for _ in range(n + 1)]
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j in range(n + 1 - i):
                b = other.coeffs[j]
                if b:
                    out[i + j] = out[i + j] + a * b
        return RefinedSeries(tuple(out))

    __rmul__ = __mul__

    def shift(self, dk: int, dm: int) -> RefinedSeries:
        return RefinedSeries(tuple(a.shift(dk, dm) for a in self.coeffs))

    def quasi_inverse(self) -> RefinedSeries:
        if self.coeffs[0]:
            raise SeriesError("quasi-inverse needs a series with zero constant term")
        n = self.order
        out = [BivarPoly.const(1)] + [BivarPoly() for _ in range(n)]
        for k in range(1, n + 1):
            s = BivarPoly()
            for i in range(1, k + 1):
                if self.coeffs[i] and out[k - i]:
                    s = s + self.coeffs[i] * out[k - i]
            out[k] = s
        return RefinedSeries(tuple(out))

    def specialize(self, x: Number = 1, y: Number = 1) -> PowerSeries:
        return PowerSeries(tuple(c.evaluate(x, y) for c in self.coeffs))


def solve_fixpoint(F: Callable[..., RefinedSeries], N: int) -> RefinedSeries:
    """Solve ``C = F(C, z, x, y)`` to order ``N`` by plain iteration.

    ``F`` receives the current iterate plus the series ``z``, ``x`` and ``y``
    (as :class:`RefinedSeries` of order ``N``).  Starting from 0 the iteration
    runs exactly ``N + 1`` times; each pass fixes at least one more
    coefficient when ``F`` is contracting.  A nonzero residual afterwards
    raises :class:`FixpointDivergence`.
    """
    z = RefinedSeries.monomial(N, n=1)
    x = RefinedSeries.monomial(N, k=1)
    y = RefinedSeries.monomial(N, m=1)
    C = RefinedSeries.zero(N)
    start = F(C, z, x, y)
    if start.coeffs[0]:
        raise SeriesError("F(0) must have zero constant term")
    for _ in range(N + 1):
        C = F(C, z, x, y)
    residual = F(C, z, x, y) - C
    if any(residual.coeffs):
        raise FixpointDivergence(f"no fixed point reached after {N + 1} iterations")
    return C

pow = power  # public name used by callers that mirror the series API
