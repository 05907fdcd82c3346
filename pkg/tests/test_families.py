"""Example families: zeta, entropy roots, weight schemes, presets."""

import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmshift import (ROOT, BouquetRealizationError, BouquetSpec,
                     GeometricTail, LoopCountFamily, LoopVertex, PowerTail,
                     TauSpec, build_bouquet, build_preset, chi_per,
                     htop_solve, induced_pressure, normalizing_C,
                     partition_sums_bruteforce, preset_names, zeta)
from cmshift.families import (ZetaDivergenceError, log_weight_sequence,
                              parse_preset)

LOG2 = math.log(2.0)


# -- zeta ------------------------------------------------------------------------

def test_zeta_at_two_matches_closed_form():
    z = zeta(2.0)
    assert abs(z.value - math.pi ** 2 / 6.0) <= z.error_bound + 1e-15


def test_zeta_at_twenty():
    z = zeta(20.0)
    assert z.value == pytest.approx(1.0000009539620338, abs=1e-12)


def test_zeta_diverges_at_one():
    with pytest.raises(ZetaDivergenceError):
        zeta(1.0)


@settings(max_examples=20, deadline=None)
@given(beta=st.floats(min_value=1.05, max_value=25.0))
def test_zeta_certified_against_mpmath(beta):
    z = zeta(beta, tol=1e-10)
    reference = float(mpmath.zeta(beta))
    assert abs(z.value - reference) <= z.error_bound + 1e-13
    assert z.error_bound <= 1e-10


def test_normalizing_constants():
    c3 = normalizing_C(3.0)
    assert c3.value == pytest.approx(1.0 / 1.2020569031595942, rel=1e-12)
    c2 = normalizing_C(2.0)
    assert c2.value == pytest.approx(6.0 / math.pi ** 2, rel=1e-12)
    assert normalizing_C(60.0).value == pytest.approx(1.0, abs=1e-12)


# -- topological entropy -------------------------------------------------------------

def test_htop_geometric_doubling_is_log4():
    assert htop_solve(LoopCountFamily("geometric", ratio=2)) \
        == pytest.approx(math.log(4.0), abs=1e-12)


def test_htop_ones_is_log2():
    assert htop_solve(LoopCountFamily("ones")) == pytest.approx(LOG2, abs=1e-12)


def test_htop_single_self_loop_is_zero():
    assert htop_solve(LoopCountFamily("list", values=(1,))) \
        == pytest.approx(0.0, abs=1e-9)


def test_htop_double_exponential_is_infinite():
    assert htop_solve(LoopCountFamily("double_exponential")) == math.inf


def test_htop_bracketing_agrees_with_closed_form():
    # long truncation of the doubling family: the root solver lands on log 4
    values = tuple(2 ** n for n in range(1, 61))
    h = htop_solve(LoopCountFamily("list", values=values), tol=1e-12)
    assert h == pytest.approx(math.log(4.0), abs=1e-9)


def test_htop_residual_bound():
    fam = LoopCountFamily("list", values=(1, 2, 0, 3))
    h = htop_solve(fam, tol=1e-10)
    total = sum(fam.count(n) * math.exp(-n * h) for n in range(1, 5))
    assert abs(total - 1.0) <= 1e-8


def test_htop_geometric_with_a1_override():
    fam = LoopCountFamily("geometric", ratio=2, a1=1)
    h = htop_solve(fam)
    # cross-check against a long truncation
    values = (1,) + tuple(2 ** n for n in range(2, 61))
    h_list = htop_solve(LoopCountFamily("list", values=values), tol=1e-12)
    assert h == pytest.approx(h_list, abs=1e-9)


# -- bouquet builds -------------------------------------------------------------------

def test_sec52_build_weights_and_table():
    b = build_preset("sec52-entry", truncate_len=10)
    assert isinstance(b.weights, GeometricTail)
    for n in range(1, 11):
        assert b.weights.log_weight(n) == pytest.approx(-n * LOG2)
    assert b.potential.weight((ROOT, ROOT)) == pytest.approx(-LOG2)
    assert b.potential.weight((ROOT, LoopVertex(3, 1, 1))) == pytest.approx(-3 * LOG2)
    assert b.potential.weight((LoopVertex(3, 1, 1), LoopVertex(3, 1, 2))) == 0.0


def test_sec53_abstract_weights_match_power_form():
    b = build_preset("sec53(beta=3,C=auto)")
    assert isinstance(b.weights, PowerTail)
    C = normalizing_C(3.0).value
    for n in range(1, 51):
        want = C * n ** -3.0
        got = math.exp(b.weights.log_weight(n))
        assert got == pytest.approx(want, rel=1e-12)
    # a(1) = 2 admits no graph: the build returns weights only
    assert b.system is None


def test_sec53_graph_realization_requires_small_a1():
    spec = BouquetSpec(LoopCountFamily("geometric", ratio=2), "entry",
                       TauSpec("power", beta=3.0, log_C=0.0), truncate_len=6)
    with pytest.raises(BouquetRealizationError):
        build_bouquet(spec, graph=True)
    modified = BouquetSpec(LoopCountFamily("geometric", ratio=2, a1=1), "entry",
                           TauSpec("power", beta=3.0, log_C=0.0), truncate_len=6)
    b = build_bouquet(modified, graph=True)
    assert b.system is not None
    assert math.exp(b.truncated_weights.log_weight(1)) == pytest.approx(1.0)


def test_truncated_weights_match_bruteforce_partition_sums():
    b = build_preset("sec52-entry", truncate_len=6)
    brute = partition_sums_bruteforce(b.system, b.potential, ROOT, 6)
    for n in range(1, 7):
        assert brute.logzstar(n) == pytest.approx(
            b.truncated_weights.log_weight(n), abs=1e-12)


def test_induced_pressure_normalized_family_is_zero():
    for beta in (1.5, 2.0, 3.0):
        C = normalizing_C(beta).value
        res = induced_pressure(PowerTail(beta, math.log(C)), 0.0)
        assert res.value == pytest.approx(0.0, abs=1e-8)


@pytest.mark.parametrize("scheme", ["exit", "midpoint", "spread"])
def test_weight_scheme_variants_preserve_loop_totals(scheme):
    base = BouquetSpec(LoopCountFamily("ones"), "entry", TauSpec("halving"),
                       truncate_len=7)
    variant = BouquetSpec(LoopCountFamily("ones"), scheme, TauSpec("halving"),
                          truncate_len=7)
    be, bv = build_bouquet(base), build_bouquet(variant)
    pe = partition_sums_bruteforce(be.system, be.potential, ROOT, 9)
    pv = partition_sums_bruteforce(bv.system, bv.potential, ROOT, 9)
    for n in range(1, 10):
        assert pe.logz(n) == pytest.approx(pv.logz(n), abs=1e-10)
        assert pe.logzstar(n) == pytest.approx(pv.logzstar(n), abs=1e-10)
    ce = chi_per(be.system, be.potential, 9)
    cv = chi_per(bv.system, bv.potential, 9)
    assert ce.value == pytest.approx(cv.value, abs=1e-12)


def test_spread_variant_weights_sum_along_each_loop():
    spec = BouquetSpec(LoopCountFamily("ones"), "spread", TauSpec("halving"),
                       truncate_len=9)
    b = build_bouquet(spec)
    for n in b.system.loop_lengths():
        word = (ROOT,) + tuple(LoopVertex(n, 1, k) for k in range(1, n)) + (ROOT,)
        total = sum(b.potential.weight((word[t], word[t + 1])) for t in range(n))
        assert total == pytest.approx(-n * LOG2, abs=1e-12)


# -- presets --------------------------------------------------------------------------------

def test_preset_names_are_published():
    assert preset_names() == ["renewal-ones", "sec52-entry", "sec52-exit",
                              "sec52-mid", "sec53", "sec54"]


def test_parse_preset_expressions():
    assert parse_preset("sec52-entry") == ("sec52-entry", {})
    assert parse_preset("sec53(beta=3,C=auto)") == ("sec53", {"beta": 3, "C": "auto"})
    assert parse_preset("sec53(2.5)") == ("sec53", {"beta": 2.5})
    name, kw = parse_preset("sec54(psi=[0,0.5,1])")
    assert name == "sec54" and kw["psi"] == [0.0, 0.5, 1.0]


def test_unknown_preset_raises():
    with pytest.raises(KeyError):
        build_preset("sec99")


def test_renewal_ones_weights_are_unit():
    b = build_preset("renewal-ones", truncate_len=5)
    assert isinstance(b.weights, GeometricTail)
    assert [math.exp(w) for w in log_weight_sequence(b.weights, 4)] \
        == pytest.approx([1.0] * 4)
