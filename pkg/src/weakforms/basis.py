"""Canonical bases ``f_{k,m}^{(N)} = q^-m + O(q)`` for weights 0 and 2.

Two independent constructions are provided:

* :func:`build_f0` / :func:`build_f2` row-reduce explicit generators
  (powers of the Hauptmodul, or ``E_2^{(p)}`` times those powers) and record
  the resulting integer combination.
* :func:`weight0_family` produces every ``f_{0,m}`` with ``m <= M`` at once
  by multiplying the previous element by the Hauptmodul and cancelling its
  principal part against the elements already built.  This is the route the
  congruence grids use; it is much cheaper for large ``M``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .eta import LEVELS, PRIME_LEVELS, eisenstein_E2_level, hauptmodul
from .qseries import QSeries, kronecker_mul, mul, theta

__all__ = [
    "GUARD",
    "BasisElement",
    "BasisObstruction",
    "build_f0",
    "build_f2",
    "level4_weight2",
    "weight0_family",
    "working_precision",
]

GUARD = 4


class BasisObstruction(ArithmeticError):
    pass


@dataclass(frozen=True)
class BasisElement:
    level: int
    weight: int
    m: int
    expansion: QSeries
    # multipliers of psi^j (weight 0) or E_2^{(p)} psi^j (weight 2), index j;
    # None when the element was produced by the batched recursion or via theta
    combination: tuple | None = None
    method: str = field(default="elimination", compare=False)

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.level, self.weight, self.m)

    @property
    def precision(self) -> float:
        return self.expansion.prec

    def a(self, n: int):
        """Coefficient of ``q^n``."""
        return self.expansion.coefficient(n)


def working_precision(target: int, m: int) -> int:
    return target + m + GUARD


def _check_level(level: int, allowed=LEVELS):
    if level not in allowed:
        raise ValueError(f"unsupported level {level}; expected one of {allowed}")


def _eliminate(gens: list[QSeries], m: int) -> tuple[QSeries, list]:
    """Reduce ``gens[m]`` to ``q^-m + O(q)``; ``gens[j]`` must lead with ``q^-j``."""
    comb = [0] * (m + 1)
    comb[m] = 1
    g = gens[m]
    lead = g.coefficient(-m)
    if lead == 0 or g.valuation != -m:
        raise BasisObstruction(f"basis obstruction at exponent {-m}")
    if lead != 1:
        g = g.scale(Fraction(1) / lead)
        comb[m] = Fraction(1) / lead
    for e in range(-m + 1, 1):
        c = g.coefficient(e)
        if c == 0:
            continue
        pivot = gens[-e]
        pl = pivot.coefficient(e)
        if pivot.valuation != e or pl == 0:
            raise BasisObstruction(f"basis obstruction at exponent {e}")
        t = c if pl == 1 else Fraction(c) / pl
        g = g - pivot.scale(t)
        comb[-e] -= t
    for e in range(-m + 1, 1):
        if g.coefficient(e) != 0:
            raise BasisObstruction(f"basis obstruction at exponent {e}")
    return g, comb


def _powers(base: QSeries, count: int, seed: QSeries | None = None) -> list[QSeries]:
    out = [seed if seed is not None else QSeries.constant(1, base.prec + 1)]
    for _ in range(count):
        out.append(mul(out[-1], base))
    return out


def build_f0(level: int, m: int, target_precision: int) -> BasisElement:
    """``f_{0,m}^{(N)}`` by row reduction of Hauptmodul powers."""
    _check_level(level)
    if m < 0:
        raise ValueError("pole order m must be >= 0")
    if m == 0:
        return BasisElement(level, 0, 0, QSeries.constant(1, target_precision), (1,))
    psi = hauptmodul(level, working_precision(target_precision, m))
    gens = _powers(psi, m)
    f, comb = _eliminate(gens, m)
    f = f.truncate(target_precision)
    if f.prec < target_precision:
        raise BasisObstruction(f"working precision too small: window ends at q^{f.prec}")
    for c in comb:
        if Fraction(c).denominator != 1:
            raise BasisObstruction(f"non-integral combination coefficient {c}")
    return BasisElement(level, 0, m, f.assert_integral(), tuple(int(c) for c in comb))


def build_f2(p: int, m: int, target_precision: int) -> BasisElement:
    """``f_{2,m}^{(p)}`` by row reduction of ``E_2^{(p)} psi^j``, ``0 <= j <= m``."""
    _check_level(p, PRIME_LEVELS)
    if m < 0:
        raise ValueError("pole order m must be >= 0")
    wp = working_precision(target_precision, m)
    e2 = eisenstein_E2_level(p, wp)
    if m == 0:
        return BasisElement(p, 2, 0, e2.truncate(target_precision), (1,))
    psi = hauptmodul(p, wp)
    gens = _powers(psi, m, seed=e2)
    f, comb = _eliminate(gens, m)
    f = f.truncate(target_precision)
    if f.prec < target_precision:
        raise BasisObstruction(f"working precision too small: window ends at q^{f.prec}")
    return BasisElement(p, 2, m, f.assert_integral(), tuple(comb))


def level4_weight2(m: int, target_precision: int, f0: BasisElement | None = None) -> BasisElement:
    """Level-4 weight-2 element realized as ``-theta(f_{0,m}^{(4)}) / m``."""
    if m < 1:
        raise ValueError("pole order m must be >= 1")
    if f0 is None:
        f0 = build_f0(4, m, target_precision)
    g = theta(f0.expansion).scale(Fraction(-1, m)).truncate(target_precision)
    return BasisElement(4, 2, m, g, None, method="theta")


def weight0_family(level: int, mmax: int, nmax: int) -> list[BasisElement]:
    """All ``f_{0,m}^{(N)}`` for ``0 <= m <= mmax``, each reliable through ``q^nmax``.

    Uses ``f_{m+1} = psi * f_m - sum_{j=1..m} c_j f_j - c_0`` where ``c_j`` is the
    coefficient of ``q^-j`` in ``psi * f_m``.  Each step loses one place
    of precision, so row ``m`` is carried to ``nmax + mmax - m``.
    """
    _check_level(level)
    if mmax < 0 or nmax < 0:
        raise ValueError("mmax and nmax must be nonnegative")
    top = nmax + mmax
    psi = hauptmodul(level, top + 1)
    if psi.valuation != -1 or psi.coefficient(-1) != 1:
        raise BasisObstruction("Hauptmodul must start with q^-1")
    # c[k] = coefficient of q^(k-1) in psi
    c = [psi.coefficient(k - 1) for k in range(top + 3)]
    width = top + 1
    rows = np.zeros((mmax + 1, width), dtype=object)  # rows[m, n] = a(m, n), n >= 1
    rows[:, :] = 0
    for m in range(mmax):
        hi = nmax + mmax - m - 1  # precision of row m+1
        a = list(rows[m, 1:hi + 2])  # a(m, 1..hi+1)
        # psi times the positive part of f_m: q^(k-1) * q^(j+1) lands at q^(k+j)
        conv = kronecker_mul(c[:hi + 2], a, hi + 1) if any(a) else []
        new = np.zeros(hi + 1, dtype=object)
        new[:] = 0
        for n in range(1, hi + 1):
            # psi * q^-m contributes c[n + m + 1] at q^n
            new[n] = c[n + m + 1] + (conv[n] if n < len(conv) else 0)
        # cancel q^-j for 1 <= j <= m with f_j; the coefficient is c[m - j + 1]
        if m >= 1:
            mult = np.array([c[m - j + 1] for j in range(m, 0, -1)], dtype=object)
            new -= mult.dot(rows[m:0:-1, :hi + 1])
        rows[m + 1, :hi + 1] = new
    out = []
    for m in range(mmax + 1):
        if m == 0:
            f = QSeries.constant(1, nmax)
        else:
            f = QSeries(-m, [1] + [0] * m + list(rows[m, 1:nmax + 1]), nmax)
        out.append(BasisElement(level, 0, m, f, None, method="recursion"))
    return out
