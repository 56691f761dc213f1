"""End-to-end acceptance checks, each with its runtime bound.

Every test is named ``test_criterion_<k>_<name>``; ``conftest.py`` prints a
PASS/FAIL line per criterion at the end of the run.
"""

import json
import random
import time
from contextlib import contextmanager

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakforms.basis import build_f0, build_f2
from weakforms.cli import main
from weakforms.eta import LEVELS, PRIME_LEVELS
from weakforms.lab import (
    CoefficientSource,
    valuation,
    verify_beta_case,
    verify_duality,
    verify_hecke_cells,
    verify_parity,
    verify_theta,
    verify_thm1,
    verify_thm2,
    verify_thm3,
    verify_u2_level4,
)
from weakforms.operators import U, V
from weakforms.qseries import QSeries, invert, theta

pytestmark = pytest.mark.acceptance


@contextmanager
def within(seconds):
    t0 = time.perf_counter()
    yield
    elapsed = time.perf_counter() - t0
    assert elapsed < seconds, f"took {elapsed:.1f}s, bound {seconds}s"


F0_LEVEL2 = {
    1: [276, -2048, 11202, -49152],
    2: [-4096, 98580, -1228800, 10745856],
    3: [33606, -1843200, 43434816, -648216576],
    4: [-196608, 21491712, -864288768, 20246003988],
}
F2_LEVEL2 = {
    1: [-276, 4096, -33606, 196608],
    2: [2048, -98580, 1843200, -21491712],
    3: [-11202, 1228800, -43434816, 864288768],
    4: [49152, -10745856, 648216576, -20246003988],
}


def test_criterion_1_golden_expansions():
    with within(1):
        for m in range(1, 5):
            f0 = build_f0(2, m, 4).expansion
            f2 = build_f2(2, m, 4).expansion
            assert f0.dense(-m, 0) == [1] + [0] * m
            assert f2.dense(-m, 0) == [1] + [0] * m
            assert f0.dense(1, 4) == F0_LEVEL2[m]
            assert f2.dense(1, 4) == F2_LEVEL2[m]
        f = build_f0(7, 5, 7).expansion
        assert f.dense(-5, 2) == [1, 0, 0, 0, 0, 0, -50, -180]


def test_criterion_2_factorization_anchors():
    with within(1):
        f = build_f0(2, 4, 3).expansion
        assert (f[1], f[2], f[3]) == (-196608, 21491712, -864288768)
        assert [valuation(f[n], 2) for n in (1, 2, 3)] == [16, 12, 18]
        assert -196608 == -(2 ** 16) * 3
        assert 21491712 == 2 ** 12 * 3 ** 2 * 11 * 53
        assert -864288768 == -(2 ** 18) * 3 * 7 * 157


def test_criterion_3_thm1_grids():
    with within(120):
        src = CoefficientSource()
        for p in (2, 3, 5, 7, 13):
            rep = verify_thm1(p, 4 * p * p, 100, src)
            assert rep.cells and rep.passed, (p, rep.failures[:3])
            assert rep.min_slack >= 0


def test_criterion_4_beta_case_grids():
    with within(120):
        src = CoefficientSource()
        for p in (2, 3, 5, 7):
            rep = verify_beta_case(p, 4 * p * p, 100, src)
            assert rep.cells and rep.passed, (p, rep.failures[:3])


def test_criterion_5_thm2_grid():
    with within(120):
        rep = verify_thm2(32, 100)
        assert rep.passed, rep.failures[:3]
        rows = {c.m for c in rep.cells}
        assert rows == set(range(2, 33, 2))
        # both branches: n with v_2(n) below and above v_2(m)
        assert any(valuation(c.n, 2) > valuation(c.m, 2) for c in rep.cells)
        assert any(valuation(c.n, 2) < valuation(c.m, 2) for c in rep.cells)


def test_criterion_6_thm3_panel():
    with within(180):
        count = 0
        for N in LEVELS:
            src = CoefficientSource()
            for p in (2, 3, 5, 7, 11, 13):
                if N % p == 0:
                    continue
                rep = verify_thm3(N, p, 2, 40, 60, src)
                assert rep.passed, (N, p, rep.failures[:3])
                count += len(rep.cells)
        assert count > 10000


def _lemma_panel(size, seed=7):
    rng = random.Random(seed)
    panel = set()
    while len(panel) < size:
        N = rng.choice(LEVELS)
        p = rng.choice([p for p in (2, 3, 5, 7, 11, 13) if N % p])
        r = rng.randint(1, 3)
        m, n = rng.randint(1, 20), rng.randint(1, 20)
        if max(m, n) * p ** r <= 160:
            panel.add((N, p, r, m, n))
    return sorted(panel)


def test_criterion_7_identity_suites():
    with within(180):
        src = CoefficientSource()
        for p in PRIME_LEVELS:
            assert verify_duality(p, 30, src).passed
            assert verify_theta(p, 30, 60, src).passed
        assert verify_u2_level4(20, 60, src).passed
        assert verify_parity(30, 60, src).passed

        panel = _lemma_panel(220)
        assert len(panel) >= 200
        groups: dict = {}
        for N, p, r, m, n in panel:
            groups.setdefault((N, p, r), []).append((m, n))
        checked = 0
        for (N, p, r), pairs in groups.items():
            rep = verify_hecke_cells(N, p, r, pairs, src)
            assert rep.passed, ((N, p, r), rep.failures[:3])
            checked += len(rep.cells)
        assert checked == len(panel)


def _series():
    ints = st.integers(-10 ** 6, 10 ** 6)
    return st.builds(
        lambda v, cs, extra: QSeries(v, cs, v + len(cs) - 1 + extra),
        st.integers(-5, 5), st.lists(ints, max_size=8), st.integers(0, 3),
    )


S = _series()
CASES = settings(max_examples=1000, deadline=None, derandomize=True)
_PROPERTY_TIME = []


def timed(fn):
    def wrapper(*args):
        t0 = time.perf_counter()
        try:
            fn(*args)
        finally:
            _PROPERTY_TIME.append(time.perf_counter() - t0)
    wrapper.__name__ = fn.__name__
    return wrapper


@timed
@CASES
@given(S, S, S)
def test_criterion_8_ring_axioms(f, g, h):
    assert f + g == g + f
    assert (f + g) + h == f + (g + h)
    assert f * g == g * f
    assert ((f * g) * h).agrees_with(f * (g * h))
    assert (f * (g + h)).agrees_with(f * g + f * h)
    assert (f + QSeries.zero()) == f
    assert (f - f).is_zero()


@timed
@CASES
@given(S)
def test_criterion_8_invert(f):
    if f.is_zero() or f.prec - f.valuation < 0:
        return
    g = invert(f)
    one = f * g
    assert one.prec == f.prec - f.valuation
    assert one == QSeries.constant(1, one.prec)


@timed
@CASES
@given(S, S)
def test_criterion_8_theta_derivation(f, g):
    assert theta(f * g).agrees_with(theta(f) * g + f * theta(g))
    assert theta(f + g) == theta(f) + theta(g)


@timed
@CASES
@given(S, st.sampled_from([2, 3, 5, 7, 11, 13]))
def test_criterion_8_U_after_V(f, p):
    assert U(p, V(p, f)) == f


def test_criterion_8_runtime():
    total = sum(_PROPERTY_TIME)
    assert len(_PROPERTY_TIME) == 4, "property tests did not all run"
    assert total < 30, f"property suite took {total:.1f}s"


def test_criterion_9_determinism(tmp_path, capsys):
    with within(60):
        root = str(tmp_path / "cache")
        argv = ["verify", "thm1", "--p", "2", "--format", "json", "--cache-root", root]
        assert main(argv) == 0
        cold = capsys.readouterr().out
        assert main(argv) == 0
        warm = capsys.readouterr().out
        assert cold == warm
        d = json.loads(cold)
        assert d["pass"] is True and d["params"]["mmax"] == 16 and d["params"]["nmax"] == 100
