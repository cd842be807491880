import datetime as dt
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from peakmotifs.ingest import PeakDayWindow
from peakmotifs.motif import (
    MotifCatalog,
    build_catalog,
    exclude_trivial,
    motif_features,
    nonmotif_features,
    profile_features,
    spearman_rho,
    timing_sd,
)
from peakmotifs.sax import WindowOccurrence

D = [dt.date(2011, 3, 7) + dt.timedelta(days=i) for i in range(12)]


def occ(word, date, clock):
    return WindowOccurrence("h", date, clock // 5, clock, word, 500.0)


class TestBuildCatalog:
    def test_empty(self):
        cat = build_catalog("h", [], days_sampled=5)
        assert cat.entries == {} and cat.days_sampled == 5

    def test_grouping(self):
        cat = build_catalog("h", [occ("bbbbbe", D[i], 60) for i in range(3)], 3)
        assert len(cat.entries["bbbbbe"]) == 3

    def test_same_day_occurrences_retained(self):
        cat = build_catalog("h", [occ("bbbbbe", D[0], 10), occ("bbbbbe", D[0], 90)], 1)
        assert cat.entries["bbbbbe"] == [(D[0], 10), (D[0], 90)]

    def test_occurrences_sorted(self):
        cat = build_catalog("h", [occ("w" * 6, D[1], 30), occ("w" * 6, D[0], 90)], 2)
        assert cat.entries["wwwwww"] == [(D[0], 90), (D[1], 30)]


class TestExcludeTrivial:
    def test_spike_family_collapsed(self):
        family = ["ccccca", "ccccac", "cccacc", "ccaccc", "cacccc", "accccc"]
        cat = build_catalog("h", [occ(w, D[i], 5 * i) for i, w in enumerate(family)], 6)
        kept = exclude_trivial(cat)
        assert set(kept.entries) == {"ccccca"}

    def test_non_spike_word_untouched(self):
        cat = build_catalog("h", [occ("abcdea", D[0], 0)], 1)
        assert set(exclude_trivial(cat).entries) == {"abcdea"}

    def test_empty_catalog(self):
        assert exclude_trivial(MotifCatalog("h", {}, 0)).entries == {}


class TestTimingSd:
    def test_constant_times(self):
        assert timing_sd([1020, 1020, 1020]) == 0.0

    def test_two_points(self):
        # population sd of two points is half their gap
        assert timing_sd([960, 1200]) == pytest.approx(120.0)

    def test_single_occurrence(self):
        assert timing_sd([75]) == 0.0

    def test_empty_undefined(self):
        with pytest.raises(ValueError):
            timing_sd([])


class TestMotifFeatures:
    def test_single_motif_zero_fill(self):
        occs = [occ("bbbbbe", D[i], 60 + o) for i, o in enumerate([-12, 12, 0, 12, -12])]
        cat = build_catalog("h", occs, 10)
        f = motif_features(cat)
        assert f.f1 == 5
        assert f.f2 == pytest.approx(timing_sd([48, 72, 60, 72, 48]))
        assert (f.f3, f.f4, f.f5, f.f6) == (0, 0, 0, 0)
        assert f.f7 == 1

    def test_30_percent_day_coverage(self):
        # 3 of 10 days meets ceil(0.3 * 10) = 3
        cat = build_catalog("h", [occ("bbbbbe", D[i], 60) for i in range(3)], 10)
        assert motif_features(cat).f8 == 1

    def test_2_of_10_days_misses_coverage(self):
        cat = build_catalog("h", [occ("bbbbbe", D[i], 60) for i in range(2)], 10)
        assert motif_features(cat).f8 == 0

    def test_empty_catalog_all_zero(self):
        f = motif_features(MotifCatalog("h", {}, 10))
        assert not f.as_array().any()

    def test_rank_tie_breaks_lexicographic(self):
        occs = [occ("ddddda", D[0], 10), occ("bbbbbe", D[0], 20),
                occ("bbbbbe", D[1], 25), occ("ddddda", D[1], 15)]
        f = motif_features(build_catalog("h", occs, 4))
        assert f.f1 == 2 and f.f2 == pytest.approx(timing_sd([20, 25]))

    @given(st.lists(
        st.tuples(st.sampled_from(["bbbbbe", "ddddda", "abcdef", "eeeeea"]),
                  st.integers(0, 11), st.integers(0, 41)),
        max_size=40))
    @settings(max_examples=100, deadline=None)
    def test_invariants_on_random_catalogs(self, triples):
        occs = [occ(w, D[di], 5 * s) for w, di, s in triples]
        cat = build_catalog("h", occs, 12)
        f = motif_features(cat)
        assert f.f1 >= f.f3 >= f.f5 >= 0
        assert all(0 <= sd <= 240 for sd in (f.f2, f.f4, f.f6))
        assert f.f8 <= f.f7 or cat.days_sampled < 4

    def test_day_order_invariance(self):
        occs = [occ("bbbbbe", D[i], 10 * i) for i in range(5)]
        perm = [occs[i] for i in (3, 1, 4, 0, 2)]
        a = motif_features(build_catalog("h", occs, 5))
        b = motif_features(build_catalog("h", perm, 5))
        assert a == b


def window(readings, valid=True, date=D[0]):
    return PeakDayWindow("h", date, np.asarray(readings, dtype=float), valid)


class TestProfileFeatures:
    def test_identical_days(self):
        day = np.arange(49.0)
        p = profile_features([window(day, date=D[0]), window(day, date=D[1])])
        np.testing.assert_array_equal(p.values, day[:48])

    def test_two_day_mean(self):
        p = profile_features([window(np.full(49, 100.0)), window(np.full(49, 300.0))])
        np.testing.assert_array_equal(p.values, np.full(48, 200.0))

    def test_final_reading_excluded(self):
        assert len(profile_features([window(np.arange(49.0))]).values) == 48

    def test_invalid_days_ignored(self):
        p = profile_features([window(np.full(49, 100.0)),
                              window(np.full(49, 900.0), valid=False)])
        np.testing.assert_array_equal(p.values, np.full(48, 100.0))


class TestNonMotifFeatures:
    def test_constant_argmax(self):
        days = []
        for i in range(3):
            r = np.full(49, 100.0)
            r[24] = 900.0  # max always at 18:00
            days.append(window(r, date=D[i]))
        assert nonmotif_features(days).time_of_max_sd == 0.0

    def test_daily_total_sd(self):
        days = [window(np.full(49, t / 49.0), date=D[i])
                for i, t in enumerate([1000.0, 1000.0, 4000.0])]
        assert nonmotif_features(days).daily_total_sd == pytest.approx(1414.21, abs=0.01)

    def test_flat_day_tie_breaks_to_first_slot(self):
        days = [window(np.full(49, 100.0), date=D[0])]
        with pytest.raises(ValueError):
            nonmotif_features([window(np.zeros(49), valid=False)])
        assert nonmotif_features(days).time_of_max_sd == 0.0


def brute_force_spearman(x, y):
    def ranks(v):
        order = sorted(range(len(v)), key=lambda i: v[i])
        r = [0.0] * len(v)
        i = 0
        while i < len(order):
            j = i
            while j + 1 < len(order) and v[order[j + 1]] == v[order[i]]:
                j += 1
            avg = (i + j) / 2 + 1
            for t in range(i, j + 1):
                r[order[t]] = avg
            i = j + 1
        return r

    rx, ry = ranks(list(x)), ranks(list(y))
    n = len(rx)
    mx, my = sum(rx) / n, sum(ry) / n
    num = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    den = (sum((a - mx) ** 2 for a in rx) * sum((b - my) ** 2 for b in ry)) ** 0.5
    return num / den


class TestSpearman:
    def test_identical_ranking(self):
        assert spearman_rho([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0)

    def test_reversed_ranking(self):
        assert spearman_rho([1, 2, 3], [30, 20, 10]) == pytest.approx(-1.0)

    def test_hand_case(self):
        assert spearman_rho([1, 2, 3, 4], [2, 1, 4, 3]) == pytest.approx(0.6)

    def test_matches_brute_force(self, rng):
        for _ in range(50):
            x = rng.integers(0, 10, 12).astype(float)
            y = rng.integers(0, 10, 12).astype(float)
            if len(set(x)) < 2 or len(set(y)) < 2:
                continue
            assert spearman_rho(x, y) == pytest.approx(brute_force_spearman(x, y))

    def test_zero_rank_variance_undefined(self):
        assert np.isnan(spearman_rho([1.0, 1.0, 1.0], [1, 2, 3]))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            spearman_rho([1, 2], [1, 2, 3])
