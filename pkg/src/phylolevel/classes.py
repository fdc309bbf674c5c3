"""The four network classes: functional equations, phi's and exact counts.

Each class is described by a single list of terms.  A term
``(w, a, b, p, q)`` stands for ``w * x**a * y**b * C**p / (1 - y*C)**q`` and
the class series satisfies ``C = z + sum(terms)``.  Here ``x`` marks blobs of
level at least one and ``y`` marks edges (arcs) inside those blobs.  Setting
``x = y = 1`` and dividing by ``C`` gives the Lagrangian form ``C = z phi(C)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, lcm

import gmpy2

from .series import (
    RationalFunction,
    RefinedSeries,
    SeriesError,
    lagrange_coefficient,
    power_coefficients,
    solve_fixpoint,
)

F = Fraction


class NetworkClass(enum.Enum):
    UNROOTED1 = "unrooted1"
    ROOTED1 = "rooted1"
    UNROOTED2 = "unrooted2"
    ROOTED2 = "rooted2"

    @property
    def rooted(self) -> bool:
        return self in (NetworkClass.ROOTED1, NetworkClass.ROOTED2)

    @property
    def level(self) -> int:
        return 1 if self in (NetworkClass.UNROOTED1, NetworkClass.ROOTED1) else 2

    @property
    def leaf_offset(self) -> int:
        """Series index ``n`` counts networks with ``n + leaf_offset`` leaves."""
        return 0 if self.rooted else 1

    @property
    def letter(self) -> str:
        return {"unrooted1": "G", "rooted1": "R", "unrooted2": "U", "rooted2": "L"}[self.value]

    def leaves(self, n_index: int) -> int:
        return n_index + self.leaf_offset

    def index(self, leaves: int) -> int:
        return leaves - self.leaf_offset

    @classmethod
    def parse(cls, name: str) -> NetworkClass:
        key = name.strip().lower()
        for c in cls:
            if key in (c.value, c.name.lower(), c.letter.lower()):
                return c
        raise ValueError(f"unknown network class {name!r}")


# (weight, x-power, y-power, C-power, power of 1/(1 - yC))
Term = tuple[Fraction, int, int, int, int]

_TREE: Term = (F(1, 2), 0, 0, 2, 0)

TERMS: dict[NetworkClass, tuple[Term, ...]] = {
    NetworkClass.UNROOTED1: (
        _TREE,
        (F(1, 2), 1, 3, 2, 1),
    ),
    NetworkClass.ROOTED1: (
        _TREE,
        (F(1), 1, 3, 2, 1),
        (F(1, 2), 1, 4, 3, 2),
    ),
    NetworkClass.UNROOTED2: (
        _TREE,
        (F(1, 2), 1, 3, 2, 1),
        (F(1, 2), 1, 6, 2, 1),
        (F(3, 2), 1, 6, 2, 0),
        (F(5, 2), 1, 7, 3, 1),
        (F(5, 4), 1, 8, 4, 2),
        (F(1), 1, 7, 3, 0),
        (F(3), 1, 8, 4, 1),
        (F(3), 1, 9, 5, 2),
        (F(1), 1, 10, 6, 3),
        (F(1, 4), 1, 8, 4, 0),
        (F(1), 1, 9, 5, 1),
        (F(3, 2), 1, 10, 6, 2),
        (F(1), 1, 11, 7, 3),
        (F(1, 4), 1, 12, 8, 4),
    ),
    NetworkClass.ROOTED2: (
        _TREE,
        (F(1, 2), 1, 6, 2, 0),
        (F(1), 1, 3, 2, 1),
        (F(6), 1, 6, 2, 1),
        (F(3, 2), 1, 7, 3, 1),
        (F(1, 2), 1, 4, 3, 2),
        (F(27, 2), 1, 7, 3, 2),
        (F(15, 4), 1, 8, 4, 2),
        (F(29, 2), 1, 8, 4, 3),
        (F(5), 1, 9, 5, 3),
        (F(15, 2), 1, 9, 5, 4),
        (F(15, 4), 1, 10, 6, 4),
        (F(3, 2), 1, 10, 6, 5),
        (F(3, 2), 1, 11, 7, 5),
        (F(1), 1, 6, 2, 6),
        (F(1, 4), 1, 12, 8, 6),
    ),
}


def _as_class(cls) -> NetworkClass:
    return cls if isinstance(cls, NetworkClass) else NetworkClass.parse(cls)


# ---------------------------------------------------------------------------
# phi and exact counts
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def phi(cls) -> RationalFunction:
    """``phi`` with ``C = z * phi(C)``, as an exact rational function."""
    cls = _as_class(cls)
    t = RationalFunction.z()
    a = RationalFunction.const(0)
    for w, _, _, p, q in TERMS[cls]:
        a = a + w * t ** (p - 1) / (1 - t) ** q
    return 1 / (1 - a)


@lru_cache(maxsize=None)
def _phi_coeffs(cls: NetworkClass, order: int) -> tuple[Fraction, ...]:
    return phi(cls).series(order).coeffs


def count(cls, n_index: int) -> int:
    """Number of networks of the class at series index ``n_index``."""
    cls = _as_class(cls)
    if n_index < 1:
        raise ValueError("n_index must be at least 1")
    # reuse a generous prefix so consecutive calls don't re-expand phi
    order = max(32, 1 << (n_index - 1).bit_length())
    coeffs = _phi_coeffs(cls, order)
    c = power_coefficients(coeffs, n_index, n_index)[n_index - 1] / n_index * factorial(n_index)
    if c.denominator != 1:
        raise ArithmeticError(f"non-integral count for {cls.value} at n={n_index}: {c}")
    return int(c)


def counts(cls, n_max: int) -> list[int]:
    """``[count(cls, n) for n in 1..n_max]``."""
    return [count(cls, n) for n in range(1, n_max + 1)]


def egf_coefficients(cls, n_max: int) -> list[Fraction]:
    """``[z^n] C`` for ``n = 1..n_max`` (series form)."""
    cls = _as_class(cls)
    return [lagrange_coefficient(phi(cls), n) for n in range(1, n_max + 1)]


# ---------------------------------------------------------------------------
# closed formulas
# ---------------------------------------------------------------------------


def _fact(k: int) -> int | None:
    """Factorial with the zero-on-negative convention signalled by ``None``."""
    return factorial(k) if k >= 0 else None


def _tree_count(n: int) -> Fraction:
    return F(factorial(2 * n - 2), 2 ** (n - 1) * factorial(n - 1))


def _closed_unrooted1(n: int) -> Fraction:
    total = _tree_count(n)
    for i in range(1, n):
        for k in range(1, i + 1):
            num = factorial(n + i - 1) * factorial(n + k - i - 2)
            den = factorial(k) * factorial(k - 1) * factorial(i - k) * factorial(n - i - 1) * 2 ** i
            total += F(num, den)
    return total


def _closed_rooted1(n: int) -> Fraction:
    total = _tree_count(n)
    for i in range(1, n):
        for k in range(1, i + 1):
            head = factorial(n + i - 1) * factorial(n + k - i - 2)
            for p in range(k + 1):
                parts = [_fact(i - k), _fact(k - p), _fact(p), _fact(n - 1 - i - k + p), _fact(2 * k - p - 1)]
                if None in parts:
                    continue
                den = 1
                for x in parts:
                    den *= x
                total += F(head, den) * F(2) ** (p - i)
    return total


# nested ratios of phi's numerator polynomial, innermost last
_LEVEL2_CHAIN = {
    NetworkClass.UNROOTED2: (3, 4, (F(-5, 2), F(-16, 15), F(-1, 2), F(-3, 16))),
    NetworkClass.ROOTED2: (9, 6, (F(-17, 6), F(-53, 34), F(-148, 159), F(-81, 148), F(-8, 27), F(-1, 8))),
}


@lru_cache(maxsize=None)
def _chain_sums(cls: NetworkClass, bound: int) -> tuple[tuple[Fraction, ...], ...]:
    """``W[i][e]``: the nested binomial sum over index chains below ``i`` with total excess ``e``."""
    ratios = _LEVEL2_CHAIN[cls][2]
    r = ratios[-1]
    V = [[comb(t, e) * r ** e for e in range(bound + 1)] for t in range(bound + 1)]
    for r in reversed(ratios[:-1]):
        pw = [r ** u for u in range(bound + 1)]
        V = [
            [sum((comb(t, u) * pw[u] * V[u][e - u] for u in range(min(t, e) + 1)), F(0)) for e in range(bound + 1)]
            for t in range(bound + 1)
        ]
    return tuple(tuple(row) for row in V)


def _closed_level2(cls: NetworkClass, n: int) -> Fraction:
    weight, exponent, _ = _LEVEL2_CHAIN[cls]
    W = _chain_sums(cls, max(40, n))
    total = F(0)
    for i in range(n):
        outer = comb(n + i - 1, i) * weight ** i
        for e in range(n - i):
            j = n - 1 - i - e
            # [z^j] (1 - z)^(-exponent*i); for i = 0 only j = 0 survives
            tail = comb(exponent * i + j - 1, j) if i else int(j == 0)
            if tail and W[i][e]:
                total += outer * W[i][e] * tail
    return total * factorial(n - 1)


def closed_count(cls, n_index: int) -> int:
    """Count from the explicit multi-index summation formulas."""
    cls = _as_class(cls)
    if n_index < 1:
        raise ValueError("n_index must be at least 1")
    if cls is NetworkClass.UNROOTED1:
        v = _closed_unrooted1(n_index)
    elif cls is NetworkClass.ROOTED1:
        v = _closed_rooted1(n_index)
    else:
        v = _closed_level2(cls, n_index)
    if v.denominator != 1:
        raise ArithmeticError(f"closed formula is not integral: {v}")
    return int(v)


def refined_closed_rooted1(n: int, k: int, m: int) -> int:
    """Rooted level-1 networks on ``n`` leaves with ``k`` cycles and ``m`` inner arcs.

    ``k = 0`` is accepted and gives the tree count when ``m = 0``.
    """
    if n < 1 or k < 0 or m < 0:
        raise ValueError("need n >= 1 and k, m >= 0")
    if k == 0:
        return int(_tree_count(n)) if m == 0 else 0
    total = F(0)
    for p in range(k + 1):
        parts_num = [_fact(2 * n + 3 * k - m - 2), _fact(m - 2 * k - 1)]
        parts_den = [_fact(n + 2 * k - m - 1), _fact(p), _fact(k - p), _fact(m - 4 * k + p), _fact(2 * k - p - 1)]
        if None in parts_num or None in parts_den:
            continue
        num = parts_num[0] * parts_num[1]
        den = 1
        for x in parts_den:
            den *= x
        total += F(num, den) * F(2) ** (p + m + 1 - n - 3 * k)
    if total.denominator != 1:
        raise ArithmeticError(f"refined formula is not integral: {total}")
    return int(total)


def eval_closed_R(z):
    """Radical closed form of the rooted level-1 EGF, valid on ``[0, 1/8)``."""
    import mpmath

    z = mpmath.mpf(z)
    if not (0 <= z < mpmath.mpf(1) / 8):
        raise ValueError("z must lie in [0, 1/8)")
    if z == 0:
        return mpmath.mpf(0)
    s = mpmath.sqrt(1 - 8 * z)
    inner = -4 * (s - 2) * z + 9 * s - 1
    return -mpmath.sqrt(2) * mpmath.sqrt(inner) / (4 * mpmath.root(1 - 8 * z, 4)) - s / 4 + mpmath.mpf(5) / 4


# ---------------------------------------------------------------------------
# refined counts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RefinedCountTable:
    cls: NetworkClass
    n_index: int
    entries: dict[tuple[int, int], int] = field(hash=False)

    @property
    def total(self) -> int:
        return sum(self.entries.values())

    def mean_k(self) -> Fraction:
        return F(sum(k * c for (k, _), c in self.entries.items()), self.total)

    def mean_m(self) -> Fraction:
        return F(sum(m * c for (_, m), c in self.entries.items()), self.total)


def functional_equation(cls):
    """``F(C, z, x, y)`` for :func:`solve_fixpoint`, built from the term list."""
    cls = _as_class(cls)
    terms = TERMS[cls]

    def F_(C: RefinedSeries, z: RefinedSeries, x: RefinedSeries, y: RefinedSeries) -> RefinedSeries:
        out = z
        Q = (y * C).quasi_inverse()
        for w, a, b, p, q in terms:
            t = C
            for _ in range(p - 1):
                t = t * C
            for _ in range(q):
                t = t * Q
            out = out + t.shift(a, b) * w
        return out

    return F_


def refined_series(cls, N: int) -> RefinedSeries:
    """The multivariate EGF to order ``N`` by plain fixed-point iteration."""
    return solve_fixpoint(functional_equation(cls), N)


class _Packed:
    """Bivariate integer polynomials packed into one big integer.

    Slot ``k * my + m`` holds the coefficient of ``x^k y^m`` in ``bits`` bits.
    """

    def __init__(self, bits: int, my: int):
        self.bits, self.my = bits, my
        self.zero, self.one = gmpy2.mpz(0), gmpy2.mpz(1)

    def shift(self, v, a, b):
        return v << ((a * self.my + b) * self.bits)

    def div(self, v, d):
        q, r = gmpy2.f_divmod(v, d)
        if r:
            raise ArithmeticError("refined coefficient is not integral")
        return q

    def unpack(self, v) -> dict[tuple[int, int], int]:
        """Slot contents keyed by ``(k, m)``; stored y exponents are offset by ``3k``."""
        nbytes = self.bits // 8
        raw = int(v).to_bytes((int(v).bit_length() + 7) // 8 or 1, "little")
        out = {}
        for slot, start in enumerate(range(0, len(raw), nbytes)):
            c = int.from_bytes(raw[start : start + nbytes], "little")
            if c:
                k, m = divmod(slot, self.my)
                out[(k, m + 3 * k)] = c
        return out


class _Plain:
    """Univariate specialisation x = y = 1 (used to bound slot widths)."""

    zero, one = 0, 1

    def shift(self, v, a, b):
        return v

    def div(self, v, d):
        q, r = divmod(v, d)
        if r:
            raise ArithmeticError("coefficient is not integral")
        return q


class _Degree:
    """Max-plus semiring: tracks the largest x and y exponents present."""

    zero, one = None, (0, 0)

    def shift(self, v, a, b):
        return None if v is None else (v[0] + a, v[1] + b)

    def div(self, v, d):
        return v


def _run(cls: NetworkClass, N: int, ring, track=None):
    """Online coefficient-by-coefficient solve of the class equation in count form.

    Returns the count sequence ``C[0..N]`` (``C[n] = n! [z^n] C``).
    """
    terms = TERMS[cls]
    D = lcm(*(w.denominator for w, *_ in terms))
    weights = [int(w * D) for w, *_ in terms]
    pmax = max(t[3] for t in terms)
    qmax = max(t[4] for t in terms)
    degree = isinstance(ring, _Degree)

    def add(u, v):
        if degree:
            if u is None:
                return v
            if v is None:
                return u
            return (max(u[0], v[0]), max(u[1], v[1]))
        return u + v

    def mul(u, v, c):
        if degree:
            return None if u is None or v is None else (u[0] + v[0], u[1] + v[1])
        return u * v * c

    def scale(u, c):
        return u if degree else u * c

    C = [ring.zero] * (N + 1)
    if N >= 1:
        C[1] = ring.one
    P = {p: [ring.zero] * (N + 1) for p in range(2, pmax + 1)}
    P[1] = C
    Q = {q: [ring.zero] * (N + 1) for q in range(1, qmax + 1)}
    Q[0] = [ring.one] + [ring.zero] * N
    for q in range(1, qmax + 1):
        Q[q][0] = ring.one
    binom = [[comb(n, k) for k in range(n + 1)] for n in range(N + 1)]

    def conv(u, v, n, lo, hi):
        acc = ring.zero
        b = binom[n]
        for k in range(lo, hi + 1):
            if (u[k] is ring.zero) or (v[n - k] is ring.zero):
                continue
            acc = add(acc, mul(u[k], v[n - k], b[k]))
        return acc

    # group terms by their power of 1/(1 - yC): one convolution per group.
    # y exponents are stored relative to 3 per blob (every blob has >= 3 edges)
    groups: dict[int, list[tuple[int, int, int, int]]] = {}
    for (w, a, b, p, q), dw in zip(terms, weights):
        groups.setdefault(q, []).append((p, a, b - 3 * a, dw))
    G = {q: [ring.zero] * (N + 1) for q in groups}

    for n in range(1, N + 1):
        if n == 1:
            _update_q(Q, C, n, qmax, ring, conv, track)
            continue
        for p in range(2, pmax + 1):
            P[p][n] = conv(C, P[p - 1], n, 1, n - 1)
        total = ring.zero
        for q, members in groups.items():
            g = ring.zero
            for p, a, b, dw in members:
                if P[p][n] is not ring.zero:
                    g = add(g, scale(ring.shift(P[p][n], a, b), dw))
            G[q][n] = g
            t = g if q == 0 else conv(G[q], Q[q], n, 2, n)
            total = add(total, t)
        C[n] = ring.div(total, D)
        if track is not None:
            track(total)
        _update_q(Q, C, n, qmax, ring, conv, track)
        if track is not None:
            for p in range(2, pmax + 1):
                track(P[p][n])
    return C


def _update_q(Q, C, n, qmax, ring, conv, track):
    # powers of 1/(1 - yC) at index n; needs C[n]
    if not qmax:
        return
    Q[1][n] = ring.shift(conv(C, Q[1], n, 1, n), 0, 1)
    for q in range(2, qmax + 1):
        Q[q][n] = conv(Q[q - 1], Q[1], n, 0, n)
    if track is not None:
        for q in range(1, qmax + 1):
            track(Q[q][n])


_BLOCKS = (8, 12, 16, 20, 24, 32, 40, 48, 64)


@lru_cache(maxsize=32)
def _refined_sequence(cls: NetworkClass, N: int) -> tuple[dict[tuple[int, int], int], ...]:
    peak = [1]

    def track(v):
        if v > peak[0]:
            peak[0] = v

    _run(cls, N, _Plain(), track)
    # every slot is bounded by the x = y = 1 value of the same quantity
    bits = 8 * ((int(peak[0]).bit_length() + 1 + 7) // 8)
    maxdeg = [0, 0]

    def track_deg(v):
        if v is not None:
            maxdeg[0] = max(maxdeg[0], v[0])
            maxdeg[1] = max(maxdeg[1], v[1])

    _run(cls, N, _Degree(), track_deg)
    ring = _Packed(bits, maxdeg[1] + 1)
    seq = _run(cls, N, ring)
    return tuple(ring.unpack(v) if v else {} for v in seq)


def refined_counts(cls, n_index: int) -> RefinedCountTable:
    """Counts by (blobs of level >= 1, inner edges) at series index ``n_index``."""
    cls = _as_class(cls)
    if n_index < 1:
        raise ValueError("n_index must be at least 1")
    # compute in blocks so neighbouring sizes share work
    N = next((b for b in _BLOCKS if b >= n_index), n_index)
    return RefinedCountTable(cls, n_index, dict(_refined_sequence(cls, N)[n_index]))


__all__ = [
    "NetworkClass",
    "TERMS",
    "phi",
    "count",
    "counts",
    "egf_coefficients",
    "closed_count",
    "refined_closed_rooted1",
    "eval_closed_R",
    "RefinedCountTable",
    "functional_equation",
    "refined_series",
    "refined_counts",
    "SeriesError",
]
