"""p-adic valuations of basis coefficients and the theorem verifiers.

Every verifier returns a :class:`TheoremReport`.  Congruence cells record the
required exponent, the observed valuation and their difference (the slack).
Identity cells record both sides of the identity in ``required`` /
``observed``; their slack is 0 when the sides agree and -1 otherwise.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2

from . import __version__
from .basis import GUARD, BasisElement, _eliminate, _powers, weight0_family
from .cache import BasisCache
from .eta import LEVELS, PRIME_LEVELS, eisenstein_E2_level, hauptmodul
from .operators import U, is_prime
from .qseries import QSeries, theta

__all__ = [
    "INF",
    "THEOREMS",
    "Cell",
    "CoefficientSource",
    "TheoremReport",
    "ValuationGrid",
    "budget",
    "p_split",
    "required_exponent_beta_case",
    "required_exponent_thm1",
    "scan",
    "valuation",
    "verify_beta_case",
    "verify_duality",
    "verify_hecke_cells",
    "verify_hecke_grid",
    "verify_hecke_lemma",
    "verify_parity",
    "verify_theta",
    "verify_thm1",
    "verify_thm2",
    "verify_thm3",
    "verify_u2_level4",
]

INF = math.inf

THEOREMS = (
    "thm1", "thm2", "thm3", "lemma-hecke", "duality", "theta", "u2-level4", "parity", "beta-gt-alpha",
)

_THM1_SLOPE = {2: (4, 8), 3: (3, 3), 5: (2, 1), 7: (2, 0), 13: (1, 0)}
_BETA_SLOPE = {2: (3, 8), 3: (2, 3), 5: (1, 1), 7: (1, 0)}


# -- valuations ---------------------------------------------------------------

def valuation(x, p: int):
    """``v_p(x)`` for a nonzero rational; ``INF`` for zero."""
    if x == 0:
        return INF
    if isinstance(x, Fraction):
        return valuation(x.numerator, p) - valuation(x.denominator, p)
    _, k = gmpy2.remove(gmpy2.mpz(x), p)
    return int(k)


def p_split(n: int, p: int) -> tuple[int, int]:
    """``(alpha, n')`` with ``n = p^alpha n'`` and ``p`` not dividing ``n'``."""
    if n == 0:
        raise ValueError("p_split of 0")
    a = 0
    while n % p == 0:
        n //= p
        a += 1
    return a, n


def required_exponent_thm1(p: int, alpha: int, beta: int) -> int:
    if p not in _THM1_SLOPE:
        raise ValueError(f"theorem precondition: p must be one of {sorted(_THM1_SLOPE)}")
    if not alpha > beta >= 0:
        raise ValueError("theorem precondition: need alpha > beta >= 0")
    slope, const = _THM1_SLOPE[p]
    return slope * (alpha - beta) + const


def required_exponent_beta_case(p: int, alpha: int, beta: int) -> int:
    if p not in _BETA_SLOPE:
        raise ValueError(f"theorem precondition: p must be one of {sorted(_BETA_SLOPE)}")
    if not beta > alpha >= 0:
        raise ValueError("theorem precondition: need beta > alpha >= 0")
    slope, const = _BETA_SLOPE[p]
    return slope * (beta - alpha) + const


# -- reports ------------------------------------------------------------------

def _jsonable(x):
    if x == INF:
        return "inf"
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else str(x)
    return x


def _unjson(x):
    if x == "inf":
        return INF
    if isinstance(x, str):
        return Fraction(x)
    return x


@dataclass(frozen=True)
class Cell:
    m: int
    n: int
    required: object
    observed: object
    slack: object

    def as_dict(self) -> dict:
        return {k: _jsonable(getattr(self, k)) for k in ("m", "n", "required", "observed", "slack")}


def congruence_cell(m: int, n: int, required: int, value, p: int) -> Cell:
    v = valuation(value, p)
    return Cell(m, n, required, v, v - required)


def identity_cell(m: int, n: int, expected, actual) -> Cell:
    return Cell(m, n, expected, actual, 0 if expected == actual else -1)


@dataclass(frozen=True)
class TheoremReport:
    theorem: str
    params: dict
    cells: tuple[Cell, ...]
    skipped: int = 0

    def __post_init__(self):
        if self.theorem not in THEOREMS:
            raise ValueError(f"unknown theorem id {self.theorem!r}")
        object.__setattr__(self, "cells", tuple(sorted(self.cells, key=lambda c: (c.m, c.n, str(c.required)))))

    @property
    def passed(self) -> bool:
        return all(c.slack >= 0 for c in self.cells)

    @property
    def min_slack(self):
        return min((c.slack for c in self.cells), default=INF)

    @property
    def min_slack_at(self):
        best = None
        for c in self.cells:
            if best is None or c.slack < best.slack:
                best = c
        return None if best is None else [best.m, best.n]

    @property
    def zero_cells(self) -> int:
        """Congruence cells whose coefficient is 0 (infinite valuation)."""
        return sum(1 for c in self.cells if c.observed == INF)

    @property
    def failures(self) -> list[Cell]:
        return [c for c in self.cells if c.slack < 0]

    @property
    def report_id(self) -> str:
        blob = json.dumps({"theorem": self.theorem, "params": self.params, "version": __version__},
                          sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "params": self.params,
            "cells": [c.as_dict() for c in self.cells],
            "pass": self.passed,
            "min_slack": _jsonable(self.min_slack),
            "min_slack_at": self.min_slack_at,
            "zero_cells": self.zero_cells,
            "skipped": self.skipped,
            "id": self.report_id,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "TheoremReport":
        cells = tuple(
            Cell(c["m"], c["n"], _unjson(c["required"]), _unjson(c["observed"]), _unjson(c["slack"]))
            for c in d["cells"]
        )
        rep = cls(d["theorem"], d["params"], cells, d.get("skipped", 0))
        if "pass" in d and rep.passed != d["pass"]:
            raise ValueError("report pass flag does not match its cells")
        return rep

    @classmethod
    def from_json(cls, text: str) -> "TheoremReport":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "n", "required", "observed", "slack"])
        for c in self.cells:
            d = c.as_dict()
            w.writerow([d["m"], d["n"], d["required"], d["observed"], d["slack"]])
        return buf.getvalue()

    def summary(self) -> str:
        ps = " ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        status = "PASS" if self.passed else "FAIL"
        return (f"{self.theorem} {ps}: {status} cells={len(self.cells)} skipped={self.skipped} "
                f"zero={self.zero_cells} min_slack={_jsonable(self.min_slack)} at={self.min_slack_at}")


@dataclass(frozen=True)
class ValuationGrid:
    level: int
    weight: int
    p: int
    mmax: int
    nmax: int
    entries: tuple[tuple[object, ...], ...]  # entries[m-1][n-1]

    def __post_init__(self):
        if len(self.entries) != self.mmax or any(len(r) != self.nmax for r in self.entries):
            raise ValueError("grid dimensions do not match the requested rectangle")

    def at(self, m: int, n: int):
        return self.entries[m - 1][n - 1]

    def to_dict(self) -> dict:
        return {
            "level": self.level, "weight": self.weight, "p": self.p,
            "mmax": self.mmax, "nmax": self.nmax,
            "entries": [[_jsonable(v) for v in row] for row in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m"] + [f"n={n}" for n in range(1, self.nmax + 1)])
        for m, row in enumerate(self.entries, 1):
            w.writerow([m] + [_jsonable(v) for v in row])
        return buf.getvalue()

    def to_plain(self) -> str:
        cells = [[("-" if v == INF else str(v)) for v in row] for row in self.entries]
        wd = max([len(x) for r in cells for x in r] + [len(str(self.nmax)), 1])
        mw = len(str(self.mmax))
        lines = [" " * mw + " | " + " ".join(str(n).rjust(wd) for n in range(1, self.nmax + 1))]
        for m, r in enumerate(cells, 1):
            lines.append(str(m).rjust(mw) + " | " + " ".join(x.rjust(wd) for x in r))
        return "\n".join(lines)


# -- coefficient provider -----------------------------------------------------

def weight2_family(p: int, mmax: int, nmax: int) -> list[BasisElement]:
    """``f_{2,m}^{(p)}`` for ``0 <= m <= mmax`` sharing one generator ladder."""
    if p not in PRIME_LEVELS:
        raise ValueError(f"unsupported prime level {p}; expected one of {PRIME_LEVELS}")
    wp = nmax + mmax + GUARD
    e2 = eisenstein_E2_level(p, wp)
    gens = _powers(hauptmodul(p, wp), mmax, seed=e2)
    out = [BasisElement(p, 2, 0, e2.truncate(nmax), (1,))]
    for m in range(1, mmax + 1):
        f, comb = _eliminate(gens, m)
        out.append(BasisElement(p, 2, m, f.truncate(nmax).assert_integral(), tuple(comb)))
    return out


class CoefficientSource:
    """Hands out basis rows, reusing in-memory results and an optional disk cache."""

    def __init__(self, cache: BasisCache | None = None):
        self.cache = cache
        self._mem: dict[tuple[int, int], tuple[int, int, list[QSeries]]] = {}

    def _lookup(self, level, weight, mmax, nmax):
        hit = self._mem.get((level, weight))
        if hit and hit[0] >= mmax and hit[1] >= nmax:
            return [f.truncate(nmax) for f in hit[2][:mmax + 1]]
        return None

    def _rows(self, level, weight, mmax, nmax, build) -> list[QSeries]:
        got = self._lookup(level, weight, mmax, nmax)
        if got is not None:
            return got
        rows: list[QSeries | None] = [None] * (mmax + 1)
        if self.cache is not None:
            for m in range(mmax + 1):
                el = self.cache.get(level, weight, m, nmax)
                if el is not None:
                    rows[m] = el.expansion.truncate(nmax)
        if any(r is None for r in rows):
            built = build(level, mmax, nmax)
            for m, el in enumerate(built):
                if rows[m] is None:
                    rows[m] = el.expansion
                    if self.cache is not None:
                        self.cache.put(el)
        self._mem[(level, weight)] = (mmax, nmax, rows)
        return list(rows)

    def weight0(self, level: int, mmax: int, nmax: int) -> list[QSeries]:
        if level not in LEVELS:
            raise ValueError(f"unsupported level {level}; expected one of {LEVELS}")
        return self._rows(level, 0, mmax, nmax, weight0_family)

    def weight2(self, level: int, mmax: int, nmax: int) -> list[QSeries]:
        if level == 4:
            # no elimination basis at level 4; use -theta(f_{0,m}) / m
            f0 = self.weight0(4, mmax, nmax)
            return [f0[0]] + [theta(f).scale(Fraction(-1, m)) for m, f in enumerate(f0) if m]
        return self._rows(level, 2, mmax, nmax, weight2_family)


def _source(source):
    return source if source is not None else CoefficientSource()


def _positive(msg, *vals):
    for v in vals:
        if v < 1:
            raise ValueError(msg)


def budget(theorem: str, params: dict) -> int:
    """Working precision a verifier needs (largest pole order + largest exponent + guard)."""
    g = params.get
    if theorem in ("thm1", "beta-gt-alpha", "thm2", "thm3", "parity"):
        return g("mmax") + g("nmax") + GUARD
    if theorem in ("duality", "theta"):
        return 2 * g("mmax") + (g("nmax") or g("mmax")) + GUARD
    if theorem == "u2-level4":
        return 2 * g("mmax") + 1 + 2 * g("nmax") + 1 + GUARD
    if theorem == "lemma-hecke":
        pr = g("p") ** g("r")
        return (g("mmax") + g("nmax")) * pr + GUARD
    raise ValueError(f"unknown theorem id {theorem!r}")


# -- verifiers -----------------------------------------------------------------

def _grid_congruence(theorem, level, p, mmax, nmax, rows_of, required, params, row_filter=None):
    cells = []
    skipped = 0
    rows = rows_of(level, mmax, nmax)
    for m in range(1, mmax + 1):
        if row_filter is not None and not row_filter(m):
            continue
        alpha, _ = p_split(m, p)
        f = rows[m]
        for n in range(1, nmax + 1):
            beta, _ = p_split(n, p)
            req = required(alpha, beta)
            if req is None:
                skipped += 1
                continue
            cells.append(congruence_cell(m, n, req, f.coefficient(n), p))
    return TheoremReport(theorem, params, tuple(cells), skipped)


def verify_thm1(p: int, mmax: int, nmax: int, source: CoefficientSource | None = None) -> TheoremReport:
    """``v_p(a_0^{(p)}(m,n)) >= required_exponent_thm1`` whenever alpha > beta."""
    if p not in _THM1_SLOPE:
        raise ValueError(f"theorem precondition: p must be one of {sorted(_THM1_SLOPE)}")
    _positive("mmax and nmax must be >= 1", mmax, nmax)
    src = _source(source)

    def req(a, b):
        return required_exponent_thm1(p, a, b) if a > b else None

    return _grid_congruence("thm1", p, p, mmax, nmax, src.weight0, req,
                            {"p": p, "mmax": mmax, "nmax": nmax})


def verify_beta_case(p: int, mmax: int, nmax: int, source: CoefficientSource | None = None) -> TheoremReport:
    """The earlier beta > alpha congruences for ``p`` in {2, 3, 5, 7}."""
    if p not in _BETA_SLOPE:
        raise ValueError(f"theorem precondition: p must be one of {sorted(_BETA_SLOPE)}")
    _positive("mmax and nmax must be >= 1", mmax, nmax)
    src = _source(source)

    def req(a, b):
        return required_exponent_beta_case(p, a, b) if b > a else None

    return _grid_congruence("beta-gt-alpha", p, p, mmax, nmax, src.weight0, req,
                            {"p": p, "mmax": mmax, "nmax": nmax})


def verify_thm2(mmax: int, nmax: int, source: CoefficientSource | None = None) -> TheoremReport:
    """Level 4, even ``m``: 4(a-b)+8 when a > b, 3(b-a)+8 when b > a."""
    _positive("mmax and nmax must be >= 1", mmax, nmax)
    src = _source(source)

    def req(a, b):
        if a > b:
            return 4 * (a - b) + 8
        if b > a:
            return 3 * (b - a) + 8
        return None

    return _grid_congruence("thm2", 4, 2, mmax, nmax, src.weight0, req,
                            {"level": 4, "mmax": mmax, "nmax": nmax}, row_filter=lambda m: m % 2 == 0)


def verify_thm3(level: int, p: int, rmax: int, mmax: int, nmax: int,
                source: CoefficientSource | None = None) -> TheoremReport:
    """``p^r | a_0^{(N)}(m p^r, n)`` for ``p`` not dividing ``N`` or ``n``."""
    if level not in LEVELS:
        raise ValueError(f"unsupported level {level}; expected one of {LEVELS}")
    if not is_prime(p) or level % p == 0:
        raise ValueError("theorem precondition: p must be a prime not dividing the level")
    _positive("rmax, mmax and nmax must be >= 1", rmax, mmax, nmax)
    rows = _source(source).weight0(level, mmax, nmax)
    cells = []
    skipped = 0
    for r in range(1, rmax + 1):
        pr = p ** r
        for m in range(1, mmax // pr + 1):
            row = m * pr
            for n in range(1, nmax + 1):
                if n % p == 0:
                    skipped += 1
                    continue
                cells.append(congruence_cell(row, n, r, rows[row].coefficient(n), p))
    return TheoremReport("thm3", {"level": level, "p": p, "rmax": rmax, "mmax": mmax, "nmax": nmax},
                         tuple(cells), skipped)


def _a0(rows: Sequence[QSeries], x, y):
    """``a_0(x, y)`` with the convention that non-integral arguments give 0."""
    x, y = Fraction(x), Fraction(y)
    if x.denominator != 1 or y.denominator != 1:
        return 0
    return rows[int(x)].coefficient(int(y))


def _hecke_sides(rows, p, r, m, n):
    pr = p ** r
    lhs = pr * (_a0(rows, m, n * pr) - _a0(rows, Fraction(m, p), n * p ** (r - 1)))
    rhs = _a0(rows, m * pr, n) - _a0(rows, m * p ** (r - 1), Fraction(n, p))
    return lhs, rhs


def verify_hecke_cells(level: int, p: int, r: int, pairs: Iterable[tuple[int, int]],
                       source: CoefficientSource | None = None, params: dict | None = None) -> TheoremReport:
    """Exact check of the T_p coefficient recursion at each ``(m, n)`` in ``pairs``."""
    if level not in LEVELS:
        raise ValueError(f"unsupported level {level}; expected one of {LEVELS}")
    if not is_prime(p) or level % p == 0:
        raise ValueError("lemma precondition: p must be a prime not dividing the level")
    if r < 1:
        raise ValueError("r must be >= 1")
    pairs = sorted(set(pairs))
    if any(m < 1 or n < 1 for m, n in pairs):
        raise ValueError("m and n must be >= 1")
    pr = p ** r
    mtop = max(m for m, _ in pairs) * pr
    ntop = max(n for _, n in pairs) * pr
    rows = _source(source).weight0(level, mtop, ntop)
    cells = [identity_cell(m, n, *_hecke_sides(rows, p, r, m, n)[::-1]) for m, n in pairs]
    if params is None:
        params = {"level": level, "p": p, "r": r, "pairs": [list(x) for x in pairs]}
    return TheoremReport("lemma-hecke", params, tuple(cells))


def verify_hecke_lemma(level: int, p: int, r: int, m: int, n: int,
                       source: CoefficientSource | None = None) -> TheoremReport:
    return verify_hecke_cells(level, p, r, [(m, n)], source,
                              {"level": level, "p": p, "r": r, "m": m, "n": n})


def verify_hecke_grid(level: int, p: int, r: int, mmax: int, nmax: int,
                      source: CoefficientSource | None = None) -> TheoremReport:
    _positive("mmax and nmax must be >= 1", mmax, nmax)
    pairs = [(m, n) for m in range(1, mmax + 1) for n in range(1, nmax + 1)]
    return verify_hecke_cells(level, p, r, pairs, source,
                              {"level": level, "p": p, "r": r, "mmax": mmax, "nmax": nmax})


def verify_duality(p: int, mmax: int, source: CoefficientSource | None = None) -> TheoremReport:
    """``a_2(m,n) = -a_0(n,m)`` for ``1 <= m, n <= mmax``.

    At level 4 the weight-2 side is the theta realization, so the check
    reduces to ``n a_0(m,n) = m a_0(n,m)`` and is labelled theta-consistency.
    """
    _positive("mmax must be >= 1", mmax)
    src = _source(source)
    if p == 4:
        f0 = src.weight0(4, mmax, mmax)
        g2 = src.weight2(4, mmax, mmax)
        cells = [identity_cell(m, n, -f0[n].coefficient(m), g2[m].coefficient(n))
                 for m in range(1, mmax + 1) for n in range(1, mmax + 1)]
        return TheoremReport("duality", {"level": 4, "mmax": mmax, "mode": "theta-consistency"}, tuple(cells))
    if p not in PRIME_LEVELS:
        raise ValueError(f"unsupported level {p}; expected one of {PRIME_LEVELS + (4,)}")
    f0 = src.weight0(p, mmax, mmax)
    f2 = src.weight2(p, mmax, mmax)
    cells = [identity_cell(m, n, -f0[n].coefficient(m), f2[m].coefficient(n))
             for m in range(1, mmax + 1) for n in range(1, mmax + 1)]
    return TheoremReport("duality", {"level": p, "mmax": mmax, "mode": "elimination"}, tuple(cells))


def verify_theta(p: int, mmax: int, nmax: int, source: CoefficientSource | None = None) -> TheoremReport:
    """``theta(f_{0,m}) = -m f_{2,m}`` coefficientwise on ``q^-m .. q^nmax``."""
    if p not in PRIME_LEVELS:
        raise ValueError(f"unsupported prime level {p}; expected one of {PRIME_LEVELS}")
    _positive("mmax and nmax must be >= 1", mmax, nmax)
    src = _source(source)
    f0 = src.weight0(p, mmax, nmax)
    f2 = src.weight2(p, mmax, nmax)
    cells = []
    for m in range(1, mmax + 1):
        t = theta(f0[m])
        for n in range(-m, nmax + 1):
            cells.append(identity_cell(m, n, -m * f2[m].coefficient(n), t.coefficient(n)))
    return TheoremReport("theta", {"p": p, "mmax": mmax, "nmax": nmax}, tuple(cells))


def verify_u2_level4(mmax: int, nmax: int, source: CoefficientSource | None = None) -> TheoremReport:
    """``U_2 f_{0,2m}^{(4)} = f_{0,m}^{(2)}`` and ``U_2 f_{0,2m+1}^{(4)} = 0`` for ``m <= mmax``."""
    _positive("mmax and nmax must be >= 1", mmax, nmax)
    src = _source(source)
    f4 = src.weight0(4, 2 * mmax + 1, 2 * nmax + 1)
    f2 = src.weight0(2, mmax, nmax)
    cells = []
    for m in range(0, mmax + 1):
        even = U(2, f4[2 * m])
        odd = U(2, f4[2 * m + 1])
        for n in range(-m, nmax + 1):
            cells.append(identity_cell(2 * m, n, f2[m].coefficient(n), even.coefficient(n)))
        for n in range(-m - 1, nmax + 1):
            cells.append(identity_cell(2 * m + 1, n, 0, odd.coefficient(n)))
    return TheoremReport("u2-level4", {"mmax": mmax, "nmax": nmax}, tuple(cells))


def verify_parity(mmax: int, nmax: int, source: CoefficientSource | None = None) -> TheoremReport:
    """``a_0^{(4)}(m,n) = 0`` whenever ``n`` and ``m`` have different parity."""
    _positive("mmax and nmax must be >= 1", mmax, nmax)
    rows = _source(source).weight0(4, mmax, nmax)
    cells = [identity_cell(m, n, 0, rows[m].coefficient(n))
             for m in range(1, mmax + 1) for n in range(1, nmax + 1) if (m - n) % 2]
    return TheoremReport("parity", {"mmax": mmax, "nmax": nmax}, tuple(cells))


def scan(level: int, weight: int, p: int, mmax: int, nmax: int,
         source: CoefficientSource | None = None) -> ValuationGrid:
    """Valuation grid ``v_p(a_k^{(N)}(m, n))``; descriptive only."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    _positive("mmax and nmax must be >= 1", mmax, nmax)
    src = _source(source)
    if weight == 0:
        rows = src.weight0(level, mmax, nmax)
    elif weight == 2:
        if level not in PRIME_LEVELS + (4,):
            raise ValueError(f"weight 2 is only available at levels {PRIME_LEVELS + (4,)}")
        rows = src.weight2(level, mmax, nmax)
    else:
        raise ValueError("weight must be 0 or 2")
    entries = tuple(tuple(valuation(rows[m].coefficient(n), p) for n in range(1, nmax + 1))
                    for m in range(1, mmax + 1))
    return ValuationGrid(level, weight, p, mmax, nmax, entries)
