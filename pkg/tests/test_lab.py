import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakforms.lab import (
    INF,
    Cell,
    CoefficientSource,
    TheoremReport,
    budget,
    p_split,
    required_exponent_beta_case,
    required_exponent_thm1,
    scan,
    valuation,
    verify_beta_case,
    verify_duality,
    verify_hecke_lemma,
    verify_parity,
    verify_theta,
    verify_thm1,
    verify_thm2,
    verify_thm3,
    verify_u2_level4,
)
from weakforms.cache import BasisCache

from .oracles import naive_valuation


@pytest.fixture(scope="module")
def src():
    return CoefficientSource()


def test_valuation_matches_repeated_division():
    rng = random.Random(20261016)
    for _ in range(1000):
        p = rng.choice([2, 3, 5, 7, 11, 13])
        x = rng.choice([1, -1]) * rng.randrange(1, 10 ** rng.randrange(1, 80)) * p ** rng.randrange(0, 40)
        assert valuation(x, p) == naive_valuation(x, p)
    assert valuation(0, 5) == INF


def test_p_split():
    assert p_split(48, 2) == (4, 3)
    assert p_split(7, 3) == (0, 7)


def test_required_exponents_thm1():
    assert required_exponent_thm1(2, 2, 0) == 16
    assert required_exponent_thm1(2, 2, 1) == 12
    assert required_exponent_thm1(13, 1, 0) == 1
    assert required_exponent_thm1(3, 2, 0) == 9
    assert required_exponent_thm1(5, 1, 0) == 3
    assert required_exponent_thm1(7, 1, 0) == 2
    with pytest.raises(ValueError, match="precondition"):
        required_exponent_thm1(2, 1, 1)


def test_required_exponents_beta_case():
    assert required_exponent_beta_case(2, 0, 1) == 11
    assert required_exponent_beta_case(7, 0, 1) == 1
    assert required_exponent_beta_case(5, 0, 2) == 3
    assert required_exponent_beta_case(3, 0, 1) == 5
    with pytest.raises(ValueError):
        required_exponent_beta_case(13, 0, 1)
    with pytest.raises(ValueError):
        required_exponent_beta_case(2, 1, 0)


def test_factorization_anchors(src):
    row = src.weight0(2, 4, 3)[4]
    assert row.dense(1, 3) == [-196608, 21491712, -864288768]
    assert [valuation(row[n], 2) for n in (1, 2, 3)] == [16, 12, 18]
    assert 196608 == 2 ** 16 * 3
    assert 21491712 == 2 ** 12 * 3 ** 2 * 11 * 53
    assert 864288768 == 2 ** 18 * 3 * 7 * 157


def _cell(rep, m, n):
    return [c for c in rep.cells if (c.m, c.n) == (m, n)]


def test_thm1_p2(src):
    rep = verify_thm1(2, 16, 16, src)
    assert rep.passed and rep.min_slack >= 0
    assert _cell(rep, 2, 2) == []
    (c,) = _cell(rep, 4, 1)
    assert (c.required, c.observed, c.slack) == (16, 16, 0)


def test_thm1_p7_cell(src):
    rep = verify_thm1(7, 7, 1, src)
    (c,) = _cell(rep, 7, 1)
    assert c.required == 2 and c.observed >= 2


def test_beta_case_cell(src):
    rep = verify_beta_case(2, 4, 8, src)
    (c,) = _cell(rep, 1, 2)
    assert (c.required, c.observed, c.slack) == (11, 11, 0)
    assert rep.passed


def test_thm2(src):
    rep = verify_thm2(8, 8, src)
    assert rep.passed
    (c,) = _cell(rep, 4, 2)
    assert (c.required, c.observed) == (12, 12)
    (c,) = _cell(rep, 2, 4)
    assert (c.required, c.observed) == (11, 11)
    assert _cell(rep, 2, 2) == [] and not any(c.m % 2 for c in rep.cells)
    rows4 = src.weight0(4, 4, 4)
    assert rows4[4][2] == -4096 and rows4[2][4] == -2048


def test_thm3_level7_p5(src):
    rows = src.weight0(7, 5, 7)
    assert all(rows[5][n] % 5 == 0 for n in (1, 2, 3, 4, 6, 7))
    assert rows[5][5] % 5 != 0
    rep = verify_thm3(7, 5, 1, 5, 7, src)
    assert rep.passed and {c.n for c in rep.cells} == {1, 2, 3, 4, 6, 7}


def test_thm3_level1_p2(src):
    rows = src.weight0(1, 2, 15)
    assert all(rows[2][n] % 2 == 0 for n in range(1, 16, 2))
    assert verify_thm3(1, 2, 1, 2, 15, src).passed


def test_thm3_rejects_dividing_prime():
    with pytest.raises(ValueError):
        verify_thm3(4, 2, 1, 4, 4)


def test_hecke_lemma_examples(src):
    rep = verify_hecke_lemma(7, 5, 1, 1, 1, src)
    (c,) = rep.cells
    assert c.observed == c.required == -50 and rep.passed
    assert verify_hecke_lemma(3, 2, 1, 3, 5, src).passed


def test_duality_examples(src):
    rep = verify_duality(2, 4, src)
    assert rep.passed
    f0 = src.weight0(2, 4, 4)
    f2 = src.weight2(2, 4, 4)
    assert f0[1][2] == -2048 == -f2[2][1]
    assert f0[3][4] == -648216576 and f2[4][3] == 648216576


def test_duality_level4_is_labelled(src):
    rep = verify_duality(4, 6, src)
    assert rep.passed and rep.params["mode"] == "theta-consistency"


def test_theta_u2_parity(src):
    assert verify_theta(3, 5, 20, src).passed
    assert verify_u2_level4(4, 12, src).passed
    rep = verify_parity(6, 10, src)
    assert rep.passed and _cell(rep, 2, 3)[0].observed == 0


def test_report_flags_failures():
    cells = (Cell(1, 1, 5, 7, 2), Cell(1, 2, 5, 3, -2), Cell(2, 1, 4, INF, INF))
    rep = TheoremReport("thm1", {"p": 2}, cells)
    assert not rep.passed
    assert rep.min_slack == -2 and rep.min_slack_at == [1, 2]
    assert rep.zero_cells == 1


def test_report_json_roundtrip(src):
    rep = verify_thm1(3, 9, 12, src)
    text = rep.to_json()
    back = TheoremReport.from_json(text)
    assert back == rep
    assert back.to_json() == text
    d = json.loads(text)
    assert set(d) >= {"theorem", "params", "cells", "pass", "min_slack", "min_slack_at"}
    assert set(d["cells"][0]) == {"m", "n", "required", "observed", "slack"}


def test_report_json_tampered_pass_flag(src):
    d = verify_thm1(2, 4, 4, src).to_dict()
    d["pass"] = not d["pass"]
    with pytest.raises(ValueError):
        TheoremReport.from_dict(d)


def test_report_csv(src):
    rep = verify_parity(3, 4, src)
    lines = rep.to_csv().splitlines()
    assert lines[0] == "m,n,required,observed,slack"
    assert len(lines) == len(rep.cells) + 1


def test_report_id_depends_on_params_only(src):
    a = verify_thm1(2, 4, 4, src)
    b = verify_thm1(2, 4, 4, CoefficientSource())
    c = verify_thm1(2, 4, 5, src)
    assert a.report_id == b.report_id != c.report_id


def test_unknown_theorem():
    with pytest.raises(ValueError):
        TheoremReport("thm9", {}, ())


def test_scan_grid(src):
    g = scan(2, 0, 2, 4, 6, src)
    assert g.at(4, 1) == 16 and g.at(1, 2) == 11
    assert len(g.entries) == 4 and all(len(r) == 6 for r in g.entries)
    g4 = scan(4, 0, 2, 3, 4, src)
    assert g4.at(1, 2) == INF
    assert "-" in g4.to_plain()
    assert json.loads(g4.to_json())["entries"][0][1] == "inf"
    assert scan(3, 2, 3, 2, 3, src).weight == 2


def test_budget():
    assert budget("thm1", {"mmax": 16, "nmax": 100}) == 120
    assert budget("u2-level4", {"mmax": 20, "nmax": 60}) == 41 + 121 + 4


def test_monotone_grid(src):
    small = {(c.m, c.n): c for c in verify_thm1(5, 25, 20, src).cells}
    big = {(c.m, c.n): c for c in verify_thm1(5, 50, 40, CoefficientSource()).cells}
    assert all(big[k] == v for k, v in small.items())


def test_source_uses_cache(tmp_path):
    cache = BasisCache(tmp_path)
    first = CoefficientSource(cache).weight0(3, 5, 10)
    assert len(cache.entries()) == 6
    second = CoefficientSource(cache).weight0(3, 5, 10)
    assert first == second


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 5, 7, 13]), st.integers(1, 12), st.integers(1, 12))
def test_symmetric_relation(p, m, n):
    rows = _ROWS.setdefault(p, CoefficientSource().weight0(p, 12, 12))
    assert n * rows[m][n] == m * rows[n][m]


_ROWS: dict = {}
