"""Truncated Laurent series in q with exact rational coefficients.

A :class:`QSeries` stores a dense run of coefficients starting at its
valuation together with a precision bound ``prec``: every coefficient with
exponent ``<= prec`` is known exactly, anything above it is unknown.  Asking
for an unknown coefficient raises :class:`InsufficientPrecision` instead of
returning zero.  ``prec`` may be ``math.inf`` for exact (finite) Laurent
polynomials.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import gmpy2

__all__ = [
    "FORMAT_VERSION",
    "InsufficientPrecision",
    "NonInvertible",
    "QSeries",
    "add",
    "coefficient",
    "invert",
    "mul",
    "pow",
    "theta",
]

FORMAT_VERSION = 1

INF = math.inf

# below this length schoolbook convolution beats packing into big integers
_KRONECKER_MIN = 24


class InsufficientPrecision(ValueError):
    """Raised when a coefficient beyond the reliable window is requested."""

    def __init__(self, exponent: int, prec: float):
        self.exponent = exponent
        self.prec = prec
        self.needed = exponent
        super().__init__(
            f"insufficient precision: coefficient of q^{exponent} requested, "
            f"series is only known through q^{prec} (need precision >= {exponent})"
        )


class NonInvertible(ZeroDivisionError):
    pass


def _norm(c):
    """Collapse integral Fractions to int so the integer fast paths stay hot."""
    if type(c) is int:
        return c
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, Rational):
        c = Fraction(c.numerator, c.denominator)
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, str):
        return _norm(Fraction(c))
    if isinstance(c, float):
        raise TypeError("floating point coefficients are not allowed")
    return _norm(Fraction(int(c)))


def _all_int(seq) -> bool:
    return all(type(x) is int for x in seq)


def _school(a: Sequence, b: Sequence, n: int) -> list:
    out = [0] * n
    nb = len(b)
    for i, x in enumerate(a):
        if i >= n:
            break
        if not x:
            continue
        lim = min(nb, n - i)
        for j in range(lim):
            y = b[j]
            if y:
                out[i + j] += x * y
    return out


def _pack(v: Sequence[int], width: int) -> gmpy2.mpz:
    pos = b"".join((x if x > 0 else 0).to_bytes(width, "little") for x in v)
    neg = b"".join((-x if x < 0 else 0).to_bytes(width, "little") for x in v)
    return gmpy2.mpz(int.from_bytes(pos, "little")) - gmpy2.mpz(int.from_bytes(neg, "little"))


def kronecker_mul(a: Sequence[int], b: Sequence[int], n: int | None = None) -> list[int]:
    """Product of two signed integer coefficient lists, truncated to ``n`` terms.

    Both operands are packed into single big integers with slots wide enough
    that no product coefficient overflows, multiplied once, and unpacked.
    """
    full = len(a) + len(b) - 1 if a and b else 0
    n = full if n is None else min(n, full)
    if n <= 0:
        return []
    a = a[:n]
    b = b[:n]
    ma = max(map(abs, a))
    mb = max(map(abs, b))
    if ma == 0 or mb == 0:
        return [0] * n
    bound = ma * mb * min(len(a), len(b))
    width = (bound.bit_length() + 2 + 7) // 8
    prod = int(_pack(a, width) * _pack(b, width))
    m = len(a) + len(b) - 1
    half = 1 << (8 * width - 1)
    offset = int.from_bytes(half.to_bytes(width, "little") * m, "little")
    raw = (prod + offset).to_bytes(width * m, "little")
    return [int.from_bytes(raw[i * width:(i + 1) * width], "little") - half for i in range(n)]


def _convolve(a: Sequence, b: Sequence, n: int) -> list:
    if n <= 0 or not a or not b:
        return [0] * max(n, 0)
    if min(len(a), len(b)) >= _KRONECKER_MIN and _all_int(a) and _all_int(b):
        out = kronecker_mul(a, b, n)
        return out + [0] * (n - len(out))
    return [_norm(x) for x in _school(a, b, n)]


class QSeries:
    """Immutable truncated Laurent series ``sum c_n q^n + O(q^(prec+1))``."""

    __slots__ = ("_v", "_c", "_p")

    def __init__(self, start: int, coeffs: Iterable = (), prec: float | None = None):
        cs = [_norm(c) for c in coeffs]
        start = int(start)
        if prec is None:
            prec = INF
        elif prec != INF:
            prec = int(prec)
            keep = prec - start + 1
            if keep < len(cs):
                cs = cs[:max(keep, 0)]
        # strip leading and trailing zeros; trailing zeros are implicit within prec
        i = 0
        while i < len(cs) and cs[i] == 0:
            i += 1
        j = len(cs)
        while j > i and cs[j - 1] == 0:
            j -= 1
        cs = cs[i:j]
        if cs:
            start += i
        elif prec == INF:
            start = 0
        else:
            start = prec + 1
        self._v = start
        self._c = tuple(cs)
        self._p = prec

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_dict(cls, terms: Mapping[int, object], prec: float | None = None) -> "QSeries":
        terms = {int(k): v for k, v in terms.items() if v != 0}
        if not terms:
            return cls(0, (), prec)
        lo, hi = min(terms), max(terms)
        return cls(lo, [terms.get(e, 0) for e in range(lo, hi + 1)], prec)

    @classmethod
    def monomial(cls, exponent: int, coeff=1, prec: float | None = None) -> "QSeries":
        return cls(exponent, [coeff], prec)

    @classmethod
    def constant(cls, c, prec: float | None = None) -> "QSeries":
        return cls(0, [c], prec)

    @classmethod
    def zero(cls, prec: float | None = None) -> "QSeries":
        return cls(0, (), prec)

    # -- basic accessors -----------------------------------------------------
    @property
    def valuation(self) -> int:
        """Lowest exponent with a nonzero coefficient (``prec + 1`` for a zero series)."""
        return self._v

    @property
    def prec(self) -> float:
        return self._p

    @property
    def coeffs(self) -> tuple:
        return self._c

    @property
    def is_exact(self) -> bool:
        return self._p == INF

    def is_zero(self) -> bool:
        return not self._c

    @property
    def last(self) -> int:
        """Highest exponent with stored data."""
        return self._v + len(self._c) - 1

    def _window_end(self) -> int:
        """Last exponent that has to be materialized when densifying."""
        return self.last if self._p == INF else int(self._p)

    def coefficient(self, n: int):
        n = int(n)
        if n > self._p:
            raise InsufficientPrecision(n, self._p)
        i = n - self._v
        if 0 <= i < len(self._c):
            return self._c[i]
        return 0

    __getitem__ = coefficient

    def items(self):
        """``(exponent, coefficient)`` pairs for the nonzero stored terms."""
        v = self._v
        return [(v + i, c) for i, c in enumerate(self._c) if c]

    def dense(self, lo: int, hi: int) -> list:
        """Coefficients for exponents ``lo..hi`` inclusive (checked against prec)."""
        if hi > self._p:
            raise InsufficientPrecision(hi, self._p)
        return [self.coefficient(n) for n in range(lo, hi + 1)]

    def is_integral(self) -> bool:
        return all(type(c) is int for c in self._c)

    def assert_integral(self) -> "QSeries":
        for e, c in self.items():
            if type(c) is not int:
                raise ValueError(f"non-integral coefficient {c} at q^{e}")
        return self

    def truncate(self, prec: float) -> "QSeries":
        """Forget everything above ``q^prec`` (never raises the precision)."""
        prec = min(prec, self._p)
        return QSeries(self._v, self._c, prec)

    def shift(self, k: int) -> "QSeries":
        """Multiply by ``q^k``."""
        return QSeries(self._v + k, self._c, self._p + k)

    # -- arithmetic ---------------------------------------------------------
    def __neg__(self) -> "QSeries":
        return QSeries(self._v, [-c for c in self._c], self._p)

    def __pos__(self) -> "QSeries":
        return self

    def _coerce(self, other) -> "QSeries":
        if isinstance(other, QSeries):
            return other
        if isinstance(other, (int, Fraction)):
            return QSeries.constant(other)
        return NotImplemented

    def __add__(self, other) -> "QSeries":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other) -> "QSeries":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return add(self, -other)

    def __rsub__(self, other) -> "QSeries":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return add(other, -self)

    def scale(self, c) -> "QSeries":
        c = _norm(c)
        if c == 0:
            return QSeries.zero(self._p)
        return QSeries(self._v, [c * x for x in self._c], self._p)

    def __mul__(self, other) -> "QSeries":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, QSeries):
            return mul(self, other)
        return NotImplemented

    def __rmul__(self, other) -> "QSeries":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other) -> "QSeries":
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / other)
        if isinstance(other, QSeries):
            return mul(self, invert(other))
        return NotImplemented

    def __pow__(self, e: int) -> "QSeries":
        return pow(self, e)

    # -- comparison ----------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, QSeries):
            return NotImplemented
        return (self._v, self._c, self._p) == (other._v, other._c, other._p)

    def __hash__(self) -> int:
        return hash((self._v, self._c, self._p))

    def agrees_with(self, other: "QSeries") -> bool:
        """True when both series coincide on their shared reliable window."""
        p = min(self._p, other._p)
        return self.truncate(p) == other.truncate(p)

    # -- display / serialization -----------------------------------------
    def __repr__(self) -> str:
        return f"QSeries({self.format()})"

    def format(self, big_o: bool = False) -> str:
        """Render as ``q^-1 + 276q - 2048q^2``; exponents ascend, signs explicit."""
        parts: list[str] = []
        for e, c in self.items():
            neg = c < 0
            a = -c if neg else c
            if e == 0:
                body = str(a)
            else:
                mono = "q" if e == 1 else f"q^{e}"
                if a == 1:
                    body = mono
                elif type(a) is int:
                    body = f"{a}{mono}"
                else:
                    body = f"({a}){mono}"
            if not parts:
                parts.append(("-" if neg else "") + body)
            else:
                parts.append(("- " if neg else "+ ") + body)
        if big_o and self._p != INF:
            parts.append(f"+ O(q^{int(self._p) + 1})")
        if not parts:
            return "0" if self._p == INF else f"O(q^{int(self._p) + 1})"
        return " ".join(parts)

    __str__ = format

    def to_record(self) -> dict:
        """Versioned plain-data form: exponents ``v..P`` densely, decimal strings."""
        end = self._window_end()
        v = self._v if self._c else end + 1
        return {
            "format_version": FORMAT_VERSION,
            "v": v,
            "P": None if self._p == INF else int(self._p),
            "coeffs": [str(c) for c in self.dense(v, end)] if end >= v else [],
        }

    @classmethod
    def from_record(cls, rec: Mapping) -> "QSeries":
        if rec.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported QSeries format version {rec.get('format_version')!r}")
        coeffs = [Fraction(s) for s in rec["coeffs"]]
        return cls(rec["v"], coeffs, rec["P"])


# -- module-level operations --------------------------------------------------

def coefficient(f: QSeries, n: int):
    return f.coefficient(n)


def add(f: QSeries, g: QSeries) -> QSeries:
    p = min(f.prec, g.prec)
    if f.is_zero() and g.is_zero():
        return QSeries.zero(p)
    if f.is_zero():
        return g.truncate(p)
    if g.is_zero():
        return f.truncate(p)
    lo = min(f.valuation, g.valuation)
    hi = max(f.last, g.last)
    if p != INF:
        hi = min(hi, int(p))
    if hi < lo:
        return QSeries.zero(p)
    out = [0] * (hi - lo + 1)
    for s in (f, g):
        off = s.valuation - lo
        for i, c in enumerate(s.coeffs):
            k = off + i
            if k > hi - lo:
                break
            out[k] += c
    return QSeries(lo, out, p)


def mul(f: QSeries, g: QSeries) -> QSeries:
    """Cauchy product; reliable through ``min(P_f + v_g, P_g + v_f)``."""
    if f.is_zero() or g.is_zero():
        # the zero factor carries valuation prec+1, which keeps the window rule uniform
        p = min(f.prec + g.valuation, g.prec + f.valuation)
        if f.is_zero() and f.is_exact or g.is_zero() and g.is_exact:
            p = INF
        return QSeries.zero(p)
    v = f.valuation + g.valuation
    p = min(f.prec + g.valuation, g.prec + f.valuation)
    hi = f.last + g.last
    if p != INF:
        hi = min(hi, int(p))
    n = hi - v + 1
    if n <= 0:
        return QSeries.zero(p)
    return QSeries(v, _convolve(f.coeffs, g.coeffs, n), p)


def pow(f: QSeries, e: int) -> QSeries:
    """``f**e`` by repeated squaring (``e >= 0``)."""
    if e < 0:
        return pow(invert(f), -e)
    if e == 0:
        if f.is_exact:
            return QSeries.constant(1)
        if f.is_zero():
            return QSeries.constant(1, 0)
        return QSeries.constant(1, f.prec - f.valuation)
    result = None
    base = f
    while True:
        if e & 1:
            result = base if result is None else mul(result, base)
        e >>= 1
        if not e:
            break
        base = mul(base, base)
    return result


def invert(f: QSeries) -> QSeries:
    """Multiplicative inverse; the relative window ``P - v`` is preserved."""
    if f.is_zero():
        raise NonInvertible("non-invertible: zero series has no inverse")
    v = f.valuation
    c = f.coeffs
    if f.is_exact:
        if len(c) == 1:
            return QSeries(-v, [Fraction(1) / c[0]])
        raise NonInvertible(
            "non-invertible: inverse of an exact polynomial is an infinite series; truncate first"
        )
    n = int(f.prec) - v + 1
    lead = c[0]
    unit = lead in (1, -1)
    inv_lead = lead if unit else Fraction(1) / lead
    nz = [(k, ck) for k, ck in enumerate(c) if k and ck]
    out = [0] * n
    out[0] = inv_lead
    for i in range(1, n):
        s = 0
        for k, ck in nz:
            if k > i:
                break
            g = out[i - k]
            if g:
                s += ck * g
        out[i] = -s * inv_lead if unit else _norm(-s * inv_lead)
    return QSeries(-v, out, f.prec - 2 * v)


def theta(f: QSeries) -> QSeries:
    """``q d/dq``: multiplies the coefficient of ``q^n`` by ``n``."""
    v = f.valuation
    return QSeries(v, [(v + i) * c for i, c in enumerate(f.coeffs)], f.prec)
