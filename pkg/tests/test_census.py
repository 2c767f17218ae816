import itertools
import random
from fractions import Fraction

import pytest

from rankone.census import (
    CensusEntry,
    CensusTally,
    bound_nsat,
    bound_ntilde1,
    final_proportion,
    fit_growth,
    odd_rank_one_fraction,
    tally,
)

# ------------------------------------------------------------ oracles


def oracle_bounds(N, Ne, No, N0, N1, N0D, N1D, p):
    """The displayed inequalities, typed in again from the source and not from the package."""
    q = Fraction(N, p - 1)
    nt = q - (Ne - N0) - (p + 1) * (No - N1)
    ntD = q - (No - N0D) - (p + 1) * (Ne - N1D)
    return {
        "ntilde1": nt,
        "ntilde1_twist": ntD,
        "nsat": N1 - nt,
        "nsat_second_line": No - q + Ne - N0,
        "nsat_twist": N1D - ntD + N0 - Ne,
        "nsat_twist_second_line": Ne - q + N0 - Ne,
        "combined": N * (1 - Fraction(2, p - 1)),
    }


def random_synthetic(rng, N):
    Ne = rng.randint(0, N)
    No = N - Ne
    return (Ne, No, rng.randint(0, Ne), rng.randint(0, No), rng.randint(0, No), rng.randint(0, Ne))


# ------------------------------------------------------------ tallies


def test_tally_examples():
    t = tally(10**8, [])
    assert (t.N, t.N_even, t.N_odd, t.N_parity_unknown) == (0, 0, 0, 0)
    t = tally(10**8, [CensusEntry(0, i, w=w) for i, w in enumerate((1, 1, -1, -1))])
    assert (t.N, t.N_even, t.N_odd) == (4, 2, 2)
    assert t.N == t.N_even + t.N_odd + t.N_parity_unknown


def test_parity_from_selmer_data():
    assert CensusEntry(0, 0, s5=3).parity == 1
    assert CensusEntry(0, 0, s5_twist=3).parity == 0
    assert CensusEntry(0, 0).parity is None
    t = tally(1, [CensusEntry(0, 0, w=1, s5=1)])
    assert t.inconsistent == 1


def test_tally_merge_is_additive():
    rng = random.Random("merge")
    entries = [
        CensusEntry(i, 0, rng.choice([1, -1, None]), rng.choice([0, 1, 2, None]), rng.choice([0, 1, None]))
        for i in range(300)
    ]
    whole = tally(5, entries)
    parts = [tally(5, entries[a:b]) for a, b in ((0, 70), (70, 71), (71, 300))]
    merged = parts[0].merge(parts[1]).merge(parts[2])
    assert merged.to_json() == whole.to_json()
    assert merged.no_s5 == whole.no_s5 and merged.no_s5_twist == whole.no_s5_twist
    with pytest.raises(ValueError):
        whole.merge(tally(6, []))


# ------------------------------------------------------------- bounds


def test_ntilde_examples():
    t = CensusTally.synthetic(500, 500, 500, 500, 500, 500)
    assert bound_ntilde1(t, 5).ntilde1 == 250
    assert not bound_ntilde1(t, 5).worst_case
    t = CensusTally.synthetic(500, 500, 400, 500, 500, 500)
    assert bound_ntilde1(t, 5).ntilde1 == 150
    t = CensusTally.synthetic(500, 500, 500, 500, 500, 500)
    assert bound_ntilde1(t, 3).ntilde1 == 500


@pytest.mark.parametrize("p,want", [(5, 500), (3, 0), (7, 666)])
def test_combined_examples(p, want):
    t = CensusTally.synthetic(500, 500, 500, 500, 500, 500)
    rep = bound_nsat(t, p)
    assert rep.combined_lower == want
    assert rep.combined_lower <= t.N
    assert "asymptotic" in rep.error_terms


def test_bounds_match_transcribed_oracle():
    rng = random.Random("census-oracle")
    for _ in range(3000):
        N = rng.randint(0, 400)
        Ne, No, N0, N1, N0D, N1D = random_synthetic(rng, N)
        p = rng.choice([3, 5, 7, 11])
        t = CensusTally.synthetic(Ne, No, N0, N1, N0D, N1D)
        want = oracle_bounds(N, Ne, No, N0, N1, N0D, N1D, p)
        rep = bound_nsat(t, p)
        for k, v in want.items():
            assert rep.exact[k] == v, k
        nt = bound_ntilde1(t, p)
        assert nt.exact == want["ntilde1"] and nt.exact_twist == want["ntilde1_twist"]
        assert not rep.worst_case


def test_chain_inequalities_on_synthetic_tallies():
    # each first line dominates its second line, and the second lines sum to the combined bound
    rng = random.Random("chains")
    for _ in range(2000):
        N = rng.randint(0, 300)
        t = CensusTally.synthetic(*random_synthetic(rng, N))
        for p in (3, 5, 7):
            e = bound_nsat(t, p).exact
            assert e["nsat"] >= e["nsat_second_line"]
            assert e["nsat_twist"] >= e["nsat_twist_second_line"]
            assert e["nsat_second_line"] + e["nsat_twist_second_line"] == e["combined"]
            assert e["combined_chain"] >= e["combined"]
            assert e["combined"] <= N


def test_extremal_tally_is_tight():
    # N_1 = N_0^D = N_odd and N_1^D = N_even: the chains collapse onto the combined bound
    for Ne, No, N0 in ((500, 500, 0), (10, 30, 4), (0, 7, 0)):
        t = CensusTally.synthetic(Ne, No, N0, No, No, Ne)
        e = bound_nsat(t, 5).exact
        assert e["combined_chain"] == e["combined"] == Fraction(Ne + No, 2)


def worst_over_completions(entries_known, n_unknown, p):
    """Exact worst case of every bound over all ways to fill in unknown members."""
    choices = []
    for par in (0, 1):
        for s in (par, par + 2):
            for sD in (1 - par, 3 - par):
                choices.append((par, s, sD))
    worst = None
    for fill in itertools.product(choices, repeat=n_unknown):
        ents = list(entries_known) + [CensusEntry(0, 0, 1 if par == 0 else -1, s, sD) for par, s, sD in fill]
        e = bound_nsat(tally(1, ents), p).exact
        if worst is None:
            worst = dict(e)
        else:
            for k in ("ntilde1", "ntilde1_twist"):
                worst[k] = max(worst[k], e[k])
            for k in ("nsat", "nsat_twist", "combined_chain", "combined"):
                worst[k] = min(worst[k], e[k])
    return worst


@pytest.mark.parametrize("n", [1, 2, 3])
def test_missing_data_bounds_are_sound(n):
    known = [CensusEntry(0, 0, 1, 0, 1), CensusEntry(0, 0, -1, 1, 0)]
    rep = bound_nsat(tally(1, known + [CensusEntry(0, 0)] * n), 5)
    assert rep.worst_case
    worst = worst_over_completions(known, n, 5)
    assert rep.exact["ntilde1"] >= worst["ntilde1"]
    assert rep.exact["ntilde1_twist"] >= worst["ntilde1_twist"]
    assert rep.exact["nsat"] <= worst["nsat"]
    assert rep.exact["nsat_twist"] <= worst["nsat_twist"]
    assert rep.exact["combined_chain"] <= worst["combined_chain"]
    assert rep.exact["combined"] == worst["combined"]


# -------------------------------------------------------- corollaries


def test_odd_rank_one_fraction():
    r = odd_rank_one_fraction(6, 5, Fraction(1, 2))
    assert r.value == Fraction(19, 20) and r.alpha == Fraction(1, 20) and not r.clamped
    assert odd_rank_one_fraction(6, 5, 1).value == Fraction(119, 120)
    r = odd_rank_one_fraction(1, 5, Fraction(1, 10**9))
    assert r.value == 1 and r.clamped
    with pytest.raises(ValueError):
        odd_rank_one_fraction(Fraction(1, 2), 5, Fraction(1, 2))


def test_odd_rank_one_fraction_monotone():
    avgs = [Fraction(k, 4) for k in range(12, 60)]
    vals = [odd_rank_one_fraction(a, 5, Fraction(1, 2)).value for a in avgs]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    vals = [odd_rank_one_fraction(6, p, Fraction(1, 2)).value for p in (3, 5, 7, 11)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_final_proportion():
    r = Fraction(3, 7)
    rep = final_proportion(3, 7)
    assert rep.proportion == r * Fraction(1, 2) / 39**5
    assert final_proportion(3, 7, p=3).proportion == 0
    assert rep.proportion_variant > float(rep.proportion)
    with pytest.raises(ZeroDivisionError):
        final_proportion(1, 0)


def test_fit_growth_on_exact_power_law():
    Xs = [10**k for k in range(6, 11)]
    fit = fit_growth(Xs, [3 * x ** (5 / 6) for x in Xs])
    assert abs(fit.slope - 5 / 6) < 1e-12 and abs(fit.constant - 3) < 1e-9
    with pytest.raises(ValueError):
        fit_growth(Xs, [0, 0, 0, 0, 4])
