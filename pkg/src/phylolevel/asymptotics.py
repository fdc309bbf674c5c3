"""Asymptotic constants and limiting moments, evaluated in high precision.

Exact rational data (phi, the functional equations) comes from
:mod:`phylolevel.classes`; roots are isolated with exact sign evaluations and
then polished with Newton's method in mpmath.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import sympy

from .classes import TERMS, NetworkClass, _as_class, phi
from .series import RationalFunction, poly_deriv, poly_eval

DEFAULT_PRECISION = 256


class AnalysisError(ArithmeticError):
    """Root isolation or the moment system failed."""


class HypothesisViolation(AnalysisError):
    """A nondegeneracy condition (F_z != 0, F_CC != 0) fails at the solution."""


class Parameter(enum.Enum):
    BLOB_COUNT = "blobs"
    INNER_EDGE_COUNT = "edges"

    @classmethod
    def parse(cls, name: str) -> Parameter:
        key = name.strip().lower()
        aliases = {"blobs": cls.BLOB_COUNT, "k": cls.BLOB_COUNT, "x": cls.BLOB_COUNT,
                   "blobcount": cls.BLOB_COUNT, "edges": cls.INNER_EDGE_COUNT, "m": cls.INNER_EDGE_COUNT,
                   "y": cls.INNER_EDGE_COUNT, "inneredgecount": cls.INNER_EDGE_COUNT}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown parameter {name!r}") from None


@dataclass(frozen=True)
class AsymptoticReport:
    cls: NetworkClass
    tau: mpmath.mpf
    rho: mpmath.mpf
    c1: mpmath.mpf
    c2: mpmath.mpf
    radius: mpmath.mpf
    precision_bits: int

    def to_dict(self, digits: int = 30) -> dict:
        return {
            "class": self.cls.value,
            "precision_bits": self.precision_bits,
            "tau": mpmath.nstr(self.tau, digits),
            "rho": mpmath.nstr(self.rho, digits),
            "c1": mpmath.nstr(self.c1, digits),
            "c2": mpmath.nstr(self.c2, digits),
            "phi_radius": mpmath.nstr(self.radius, digits),
        }


@dataclass(frozen=True)
class MomentReport:
    cls: NetworkClass
    parameter: Parameter
    z0: mpmath.mpf
    C0: mpmath.mpf
    mu: mpmath.mpf
    sigma2: mpmath.mpf
    precision_bits: int

    def to_dict(self, digits: int = 30) -> dict:
        return {
            "class": self.cls.value,
            "parameter": self.parameter.value,
            "precision_bits": self.precision_bits,
            "z0": mpmath.nstr(self.z0, digits),
            "C0": mpmath.nstr(self.C0, digits),
            "mu": mpmath.nstr(self.mu, digits),
            "sigma2": mpmath.nstr(self.sigma2, digits),
        }


# ---------------------------------------------------------------------------
# root isolation
# ---------------------------------------------------------------------------


def _sign(p, x: Fraction) -> int:
    v = poly_eval(p, x)
    return (v > 0) - (v < 0)


def _first_sign_change(p, lo: Fraction, hi: Fraction, steps: int = 4096) -> tuple[Fraction, Fraction] | None:
    """Leftmost grid cell of ``(lo, hi)`` on which ``p`` changes sign (endpoints excluded)."""
    h = (hi - lo) / steps
    prev_x = lo + h / 1024
    prev = _sign(p, prev_x)
    for i in range(1, steps):
        x = lo + i * h
        s = _sign(p, x)
        if s == 0:
            return x, x
        if prev and s != prev:
            return prev_x, x
        prev, prev_x = s, x
    return None


def _bisect(p, a: Fraction, b: Fraction, rounds: int = 64) -> tuple[Fraction, Fraction]:
    sa = _sign(p, a)
    for _ in range(rounds):
        if a == b:
            break
        m = (a + b) / 2
        sm = _sign(p, m)
        if sm == 0:
            return m, m
        if sm == sa:
            a = m
        else:
            b = m
    return a, b


def _polish(p, a: Fraction, b: Fraction, bits: int):
    """Newton refinement of a bracketed simple root at ``bits`` of precision."""
    dp = poly_deriv(p)
    with mpmath.workprec(bits + 32):
        x = (mpmath.mpf(a.numerator) / a.denominator + mpmath.mpf(b.numerator) / b.denominator) / 2
        for _ in range(200):
            step = poly_eval(p, x) / poly_eval(dp, x)
            x -= step
            if abs(step) < mpmath.mpf(2) ** (-(bits + 16)):
                break
        return +x


def _smallest_positive_root(p, hi: Fraction, bits: int, what: str):
    cell = _first_sign_change(p, Fraction(0), hi)
    if cell is None:
        raise AnalysisError(f"no sign change of {what} in (0, {hi})")
    a, b = _bisect(p, *cell)
    return _polish(p, a, b, bits), (a, b)


@lru_cache(maxsize=None)
def phi_radius(cls, precision_bits: int = DEFAULT_PRECISION):
    """Smallest positive pole of phi (its radius of convergence)."""
    cls = _as_class(cls)
    den = phi(cls).denominator
    # 1 - A(z) vanishes before A's own pole at z = 1
    return _smallest_positive_root(den, Fraction(1), precision_bits, "phi's denominator")


def characteristic_numerator(cls) -> tuple[Fraction, ...]:
    """Numerator polynomial of ``phi(z) - z phi'(z)``."""
    f = phi(_as_class(cls))
    return (f - RationalFunction.z() * f.derivative()).numerator


@lru_cache(maxsize=None)
def _tau(cls: NetworkClass, precision_bits: int):
    R, (r_lo, _) = phi_radius(cls, precision_bits)
    num = characteristic_numerator(cls)
    tau, _ = _smallest_positive_root(num, r_lo, precision_bits, "phi - z phi'")
    return tau, R


def characteristic_root(cls, precision_bits: int = DEFAULT_PRECISION):
    """The root ``tau`` of ``phi(z) = z phi'(z)`` in ``(0, R)``."""
    cls = _as_class(cls)
    if precision_bits < 64:
        raise ValueError("precision_bits must be at least 64")
    tau, R = _tau(cls, precision_bits)
    f = phi(cls)
    with mpmath.workprec(precision_bits + 32):
        residual = abs(f(tau) - tau * f.derivative()(tau))
        if not (0 < tau < R) or residual >= mpmath.mpf(2) ** (-precision_bits // 2):
            raise AnalysisError(f"characteristic root check failed (residual {residual})")
    return tau


@lru_cache(maxsize=None)
def asymptotic_constants(cls, precision_bits: int = DEFAULT_PRECISION) -> AsymptoticReport:
    """``(tau, rho, c1, c2)`` with ``count ~ c1 * c2**n * n**(n-1)``."""
    cls = _as_class(cls)
    tau = characteristic_root(cls, precision_bits)
    _, R = _tau(cls, precision_bits)
    f = phi(cls)
    f2 = f.derivative().derivative()
    with mpmath.workprec(precision_bits + 32):
        ft = f(tau)
        rho = tau / ft
        c1 = mpmath.sqrt(ft / f2(tau))
        c2 = 1 / (mpmath.e * rho)
    return AsymptoticReport(cls, tau, rho, c1, c2, R, precision_bits)


def asymptotic_estimate(cls, n_index: int, precision_bits: int = DEFAULT_PRECISION):
    """``c1 * c2**n * n**(n-1)``."""
    if n_index < 1:
        raise ValueError("n_index must be at least 1")
    rep = asymptotic_constants(_as_class(cls), precision_bits)
    with mpmath.workprec(precision_bits):
        n = mpmath.mpf(n_index)
        return rep.c1 * rep.c2 ** n * n ** (n - 1)


def check_hypotheses(cls, order: int = 100) -> dict:
    """Programmatic checks of the inversion hypotheses (coefficients and bracketing)."""
    cls = _as_class(cls)
    coeffs = phi(cls).series(order).coeffs
    rep = asymptotic_constants(cls)
    return {
        "phi0_nonzero": coeffs[0] != 0,
        "coefficients_nonnegative": all(c >= 0 for c in coeffs),
        "coefficients_positive": all(c > 0 for c in coeffs),
        "tau_in_range": bool(0 < rep.tau < rep.radius),
    }


# ---------------------------------------------------------------------------
# limiting moments of the refined parameters
# ---------------------------------------------------------------------------

_C, _Z, _U = sympy.symbols("C z u")


@lru_cache(maxsize=None)
def _symbolic_equation(cls: NetworkClass, parameter: Parameter):
    """``F(C, z, u)`` with ``u`` marking the chosen parameter and the other set to 1."""
    expr = _Z
    for w, a, b, p, q in TERMS[cls]:
        x, y = (_U, 1) if parameter is Parameter.BLOB_COUNT else (1, _U)
        expr += sympy.Rational(w.numerator, w.denominator) * x ** a * y ** b * _C ** p / (1 - y * _C) ** q
    return expr


@lru_cache(maxsize=None)
def _partials(cls: NetworkClass, parameter: Parameter):
    Fx = _symbolic_equation(cls, parameter)
    names = {
        "F": Fx,
        "F_C": sympy.diff(Fx, _C),
        "F_z": sympy.diff(Fx, _Z),
        "F_x": sympy.diff(Fx, _U),
        "F_CC": sympy.diff(Fx, _C, 2),
        "F_Cz": sympy.diff(Fx, _C, _Z),
        "F_Cx": sympy.diff(Fx, _C, _U),
        "F_zz": sympy.diff(Fx, _Z, 2),
        "F_zx": sympy.diff(Fx, _Z, _U),
        "F_xx": sympy.diff(Fx, _U, 2),
    }
    return {k: sympy.lambdify((_C, _Z, _U), sympy.together(v), modules="mpmath") for k, v in names.items()}


def _solve_system(fns, seed_C, seed_z, bits: int):
    """Damped Newton on ``{F(C, z, 1) - C = 0, F_C(C, z, 1) - 1 = 0}``."""
    C, z = mpmath.mpf(seed_C), mpmath.mpf(seed_z)
    tol = mpmath.mpf(2) ** (-(bits - 16))
    floor = mpmath.mpf(2) ** (-(bits - 32))

    def resid(C, z):
        return fns["F"](C, z, 1) - C, fns["F_C"](C, z, 1) - 1

    r1, r2 = resid(C, z)
    for _ in range(400):
        a11, a12 = fns["F_C"](C, z, 1) - 1, fns["F_z"](C, z, 1)
        a21, a22 = fns["F_CC"](C, z, 1), fns["F_Cz"](C, z, 1)
        det = a11 * a22 - a12 * a21
        if det == 0:
            raise AnalysisError("singular Jacobian in moment system")
        dC = (r1 * a22 - r2 * a12) / det
        dz = (a11 * r2 - a21 * r1) / det
        norm = abs(r1) + abs(r2)
        lam = mpmath.mpf(1)
        while True:
            nC, nz = C - lam * dC, z - lam * dz
            if 0 < nC < 1 and 0 < nz < 1:
                n1, n2 = resid(nC, nz)
                # near the noise floor any full step is accepted
                if abs(n1) + abs(n2) < norm or norm < floor:
                    break
            lam /= 2
            if lam < mpmath.mpf(2) ** -60:
                raise AnalysisError("damped Newton failed to make progress")
        C, z, r1, r2 = nC, nz, n1, n2
        if lam * (abs(dC) + abs(dz)) < tol:
            return C, z
    raise AnalysisError("moment system did not converge")


@lru_cache(maxsize=None)
def drmota_moments(cls, parameter, precision_bits: int = DEFAULT_PRECISION) -> MomentReport:
    """Limiting mean and variance constants (``E X_n ~ mu n``, ``Var X_n ~ sigma2 n``)."""
    cls = _as_class(cls)
    parameter = parameter if isinstance(parameter, Parameter) else Parameter.parse(parameter)
    fns = _partials(cls, parameter)
    seed = asymptotic_constants(cls, max(64, precision_bits))
    with mpmath.workprec(precision_bits + 32):
        C0, z0 = _solve_system(fns, seed.tau, seed.rho, precision_bits + 32)
        v = {k: f(C0, z0, 1) for k, f in fns.items()}
        eps = mpmath.mpf(2) ** (-precision_bits // 2)
        if abs(v["F_z"]) < eps or abs(v["F_CC"]) < eps:
            raise HypothesisViolation("F_z or F_CC vanishes at the singular point")
        Fz, Fx, FCC = v["F_z"], v["F_x"], v["F_CC"]
        mu = Fx / (z0 * Fz)
        bracket = (
            Fz ** 2 * (FCC * v["F_xx"] - v["F_Cx"] ** 2)
            - 2 * Fz * Fx * (FCC * v["F_zx"] - v["F_Cz"] * v["F_Cx"])
            + Fx ** 2 * (FCC * v["F_zz"] - v["F_Cz"] ** 2)
        )
        sigma2 = mu + mu ** 2 + bracket / (z0 * Fz ** 3 * FCC)
        if not sigma2 > 0:
            raise HypothesisViolation("non-positive limiting variance")
        # round inside the context so callers at default precision keep every bit
        return MomentReport(cls, parameter, +z0, +C0, +mu, +sigma2, precision_bits)


__all__ = [
    "AnalysisError",
    "HypothesisViolation",
    "Parameter",
    "AsymptoticReport",
    "MomentReport",
    "phi_radius",
    "characteristic_numerator",
    "characteristic_root",
    "asymptotic_constants",
    "asymptotic_estimate",
    "check_hypotheses",
    "drmota_moments",
]
