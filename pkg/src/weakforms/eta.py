"""Concrete q-expansions: eta quotients, Hauptmoduln, Eisenstein series, Delta, j."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .qseries import QSeries, invert, mul, pow

__all__ = [
    "LEVELS",
    "PRIME_LEVELS",
    "EtaQuotient",
    "delta",
    "eisenstein_E2",
    "eisenstein_E2_level",
    "eisenstein_E4",
    "euler_product",
    "expand_eta_quotient",
    "hauptmodul",
    "hauptmodul_quotient",
    "j_invariant",
    "sigma",
]

LEVELS = (1, 2, 3, 4, 5, 7, 13)
PRIME_LEVELS = (2, 3, 5, 7, 13)


def sigma(n: int, k: int = 1) -> int:
    """Divisor power sum by trial division."""
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d ** k
            e = n // d
            if e != d:
                total += e ** k
        d += 1
    return total


@lru_cache(maxsize=64)
def _pentagonal(precision: int) -> tuple[int, ...]:
    c = [0] * (precision + 1)
    c[0] = 1
    k = 1
    while True:
        e1 = k * (3 * k - 1) // 2
        if e1 > precision:
            break
        sign = -1 if k % 2 else 1
        c[e1] += sign
        e2 = k * (3 * k + 1) // 2
        if e2 <= precision:
            c[e2] += sign
        k += 1
    return tuple(c)


def euler_product(precision: int) -> QSeries:
    """``prod_{n>=1} (1 - q^n)`` through ``q^precision`` via the pentagonal number theorem."""
    if precision < 0:
        raise ValueError("precision must be nonnegative")
    return QSeries(0, _pentagonal(precision), precision)


def _dilate(f: QSeries, d: int) -> QSeries:
    """``f(q^d)``; reliable through ``d*P + d - 1``."""
    if d == 1:
        return f
    out = [0] * ((len(f.coeffs) - 1) * d + 1) if f.coeffs else []
    for i, c in enumerate(f.coeffs):
        out[i * d] = c
    return QSeries(f.valuation * d, out, f.prec * d + d - 1)


@dataclass(frozen=True)
class EtaQuotient:
    """Formal product ``prod eta(d z)^r`` over ``factors = ((d, r), ...)``."""

    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        norm = []
        for d, r in self.factors:
            if int(d) != d or d < 1:
                raise ValueError(f"eta multiplier must be a positive integer, got {d!r}")
            if Fraction(r).denominator != 1:
                raise ValueError(f"eta exponent must be an integer, got {r!r}")
            norm.append((int(d), int(r)))
        object.__setattr__(self, "factors", tuple(norm))

    @property
    def order(self) -> Fraction:
        """Leading q-exponent ``sum d*r / 24``."""
        return Fraction(sum(d * r for d, r in self.factors), 24)

    @property
    def weight(self) -> Fraction:
        return Fraction(sum(r for _, r in self.factors), 2)


def expand_eta_quotient(eq: EtaQuotient, precision: int) -> QSeries:
    """Exact expansion of ``eq`` reliable through ``q^precision``."""
    s = eq.order
    if s.denominator != 1:
        raise ValueError(f"fractional leading exponent {s} (eta quotient has non-integral order)")
    s = int(s)
    rel = precision - s
    if rel < 0:
        return QSeries.zero(precision)
    result = QSeries.constant(1, rel)
    for d, r in eq.factors:
        if r == 0:
            continue
        base = _dilate(euler_product(rel // d), d).truncate(rel)
        if r < 0:
            base = invert(base)
        result = mul(result, pow(base, abs(r)))
    return result.shift(s).truncate(precision)


def hauptmodul_quotient(level: int) -> EtaQuotient:
    """Eta quotient used as Hauptmodul at ``level`` (not defined for level 1)."""
    if level in PRIME_LEVELS:
        r = 24 // (level - 1)
        return EtaQuotient(((1, r), (level, -r)))
    if level == 4:
        return EtaQuotient(((1, 8), (4, -8)))
    raise ValueError(f"unsupported level {level}; expected one of {LEVELS}")


@lru_cache(maxsize=128)
def hauptmodul(level: int, precision: int) -> QSeries:
    """Hauptmodul ``q^-1 + O(1)`` for ``level``; j for level 1."""
    if level == 1:
        return j_invariant(precision)
    return expand_eta_quotient(hauptmodul_quotient(level), precision)


@lru_cache(maxsize=64)
def delta(precision: int) -> QSeries:
    return expand_eta_quotient(EtaQuotient(((1, 24),)), precision)


def _sigma_series(precision: int, k: int, scale: int) -> QSeries:
    return QSeries(0, [1] + [scale * sigma(n, k) for n in range(1, precision + 1)], precision)


def eisenstein_E2(precision: int) -> QSeries:
    return _sigma_series(precision, 1, -24)


def eisenstein_E4(precision: int) -> QSeries:
    return _sigma_series(precision, 3, 240)


@lru_cache(maxsize=64)
def eisenstein_E2_level(p: int, precision: int) -> QSeries:
    """``(p E_2(pz) - E_2(z)) / (p - 1)``, holomorphic of weight 2 on Gamma_0(p), constant 1."""
    if p not in PRIME_LEVELS:
        raise ValueError(f"unsupported prime level {p}; expected one of {PRIME_LEVELS}")
    e2 = eisenstein_E2(precision)
    e2p = _dilate(eisenstein_E2(precision // p), p).truncate(precision)
    return ((e2p * p) - e2) * Fraction(1, p - 1)


@lru_cache(maxsize=64)
def j_invariant(precision: int) -> QSeries:
    """``E_4^3 / Delta``."""
    # Delta has valuation 1, so 1/Delta loses two places of the window
    d = delta(precision + 2)
    e4 = eisenstein_E4(precision + 1)
    return mul(pow(e4, 3), invert(d)).truncate(precision)
