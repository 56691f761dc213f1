"""U_p, V_p, the weight-0 Hecke operator and the theta relation.

All operators act formally on :class:`QSeries`; which space the result lives
in is the caller's business.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .qseries import INF, QSeries, theta

__all__ = [
    "OperatorTag",
    "ThetaRelation",
    "U",
    "V",
    "apply",
    "hecke_T_weight0",
    "is_prime",
    "theta",
    "theta_relation_check",
]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _check_prime(p: int):
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")


def U(p: int, f: QSeries) -> QSeries:
    """``sum a(pn) q^n``; valuation ``ceil(v/p)``, precision ``floor(P/p)``."""
    _check_prime(p)
    prec = INF if f.prec == INF else int(f.prec) // p
    if f.is_zero():
        return QSeries.zero(prec)
    lo = -(-f.valuation // p)
    hi = f.last // p
    if prec != INF:
        hi = min(hi, prec)
    return QSeries(lo, [f.coefficient(p * n) for n in range(lo, hi + 1)], prec)


def V(p: int, f: QSeries) -> QSeries:
    """``sum a(n) q^(pn)``; precision ``p P + p - 1``."""
    _check_prime(p)
    prec = INF if f.prec == INF else p * int(f.prec) + p - 1
    if f.is_zero():
        return QSeries.zero(prec)
    out = [0] * ((len(f.coeffs) - 1) * p + 1)
    for i, c in enumerate(f.coeffs):
        out[i * p] = c
    return QSeries(p * f.valuation, out, prec)


def hecke_T_weight0(p: int, f: QSeries) -> QSeries:
    """``T_p f = U_p f + p^-1 V_p f`` (weight 0)."""
    return U(p, f) + V(p, f).scale(Fraction(1, p))


@dataclass(frozen=True)
class OperatorTag:
    kind: str
    p: int | None = None

    def __post_init__(self):
        if self.kind not in ("U", "V", "T", "theta"):
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.kind == "theta":
            if self.p is not None:
                raise ValueError("theta takes no prime")
        else:
            if self.p is None:
                raise ValueError(f"operator {self.kind} needs a prime")
            _check_prime(self.p)


def apply(tag: OperatorTag, f: QSeries) -> QSeries:
    if tag.kind == "U":
        return U(tag.p, f)
    if tag.kind == "V":
        return V(tag.p, f)
    if tag.kind == "T":
        return hecke_T_weight0(tag.p, f)
    return theta(f)


@dataclass(frozen=True)
class ThetaRelation:
    p: int
    m: int
    # (n, residual) for every exponent in the checked window
    residuals: tuple[tuple[int, object], ...]

    @property
    def passed(self) -> bool:
        return all(r == 0 for _, r in self.residuals)

    def __bool__(self) -> bool:
        return self.passed


def theta_relation_check(p: int, m: int, precision: int, f0=None, f2=None) -> ThetaRelation:
    """Residuals of ``theta(f_{0,m}) + m f_{2,m}`` for exponents ``-m..precision``.

    ``f0``/``f2`` may be passed in (already built elements or expansions);
    otherwise they are built by elimination.
    """
    from .basis import build_f0, build_f2

    if m < 1:
        raise ValueError("pole order m must be >= 1")
    f0 = build_f0(p, m, precision) if f0 is None else f0
    f2 = build_f2(p, m, precision) if f2 is None else f2
    s0 = getattr(f0, "expansion", f0)
    s2 = getattr(f2, "expansion", f2)
    lhs = theta(s0)
    res = tuple((n, lhs.coefficient(n) + m * s2.coefficient(n)) for n in range(-m, precision + 1))
    return ThetaRelation(p, m, res)
