"""Weight vectors: construction, exact arithmetic, files, log-concavity."""
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from treeloss.weights import (
    WeightVector,
    geometric_weights,
    load_weight_file,
    log_concavity_margin,
    partial_sums_log_concave,
    poisson_weights,
)


class TestConstruction:
    def test_entries_and_partial_sums(self):
        w = WeightVector((1.0, 2.0, 4.0))
        assert w.entries == (1.0, 2.0, 4.0)
        assert w.partial_sums == (1.0, 3.0, 7.0)
        assert w.top_index == 2
        assert len(w) == 3

    def test_passed_partial_sums_are_ignored(self):
        w = WeightVector((1.0, 1.0), partial_sums=(5.0, 9.0))
        assert w.partial_sums == (1.0, 2.0)

    def test_rational_entries_stay_rational(self):
        w = WeightVector((Fraction(1), Fraction(3, 4)))
        assert w.partial_sums == (Fraction(1), Fraction(7, 4))
        assert isinstance(w.partial_sums[1], Fraction)

    @pytest.mark.parametrize(
        "entries",
        [
            (),
            (0.0, 1.0),
            (-1.0, 1.0),
            (1.0, -0.5),
            (1.0, float("nan")),
            (1.0, float("inf")),
            (1.0, True),
            (1.0, "2"),
        ],
    )
    def test_bad_entries_rejected(self, entries):
        with pytest.raises(ValueError):
            WeightVector(entries)

    def test_partial_sum_accessor_bounds(self):
        w = WeightVector((1.0, 1.0, 1.0))
        assert w.partial_sum(0) == 1.0
        assert w.partial_sum(2) == 3.0
        for k in (-1, 3, 1.5, True):
            with pytest.raises(ValueError):
                w.partial_sum(k)

    @given(
        st.lists(
            st.floats(min_value=0.0, max_value=1e6, allow_nan=False),
            min_size=1,
            max_size=8,
        ).map(lambda t: [1.0] + t)
    )
    def test_partial_sum_recurrence_is_exact(self, entries):
        w = WeightVector(tuple(entries))
        for k in range(1, w.top_index + 1):
            assert w.partial_sums[k] == w.partial_sums[k - 1] + w.entries[k]


class TestFamilies:
    def test_poisson_entries(self):
        w = poisson_weights(1.0, 2)
        assert w.entries == (1.0, 1.0, 0.5)
        assert w.partial_sums == (1.0, 2.0, 2.5)

    def test_poisson_exact_with_fraction_rate(self):
        w = poisson_weights(Fraction(3, 4), 2)
        assert w.entries == (Fraction(1), Fraction(3, 4), Fraction(9, 32))
        assert w.partial_sums[2] == Fraction(65, 32)

    def test_geometric_entries(self):
        w = geometric_weights(2.0, 2)
        assert w.entries == (1.0, 2.0, 4.0)
        assert w.partial_sums == (1.0, 3.0, 7.0)

    @pytest.mark.parametrize("factory", [poisson_weights, geometric_weights])
    def test_family_validation(self, factory):
        with pytest.raises(ValueError):
            factory(0.0, 2)
        with pytest.raises(ValueError):
            factory(-1.0, 2)
        with pytest.raises(ValueError):
            factory(1.0, -1)

    @given(st.integers(1, 6), st.fractions(min_value="1/100", max_value=50))
    def test_exact_entries_match_float_construction(self, top, rate):
        exact = poisson_weights(rate, top)
        approx = poisson_weights(float(rate), top)
        for a, b in zip(exact.entries, approx.entries):
            assert math.isclose(float(a), b, rel_tol=1e-12)

    def test_exact_helpers_convert_floats_losslessly(self):
        w = WeightVector((1.0, 0.1))
        assert w.exact_entries() == (Fraction(1), Fraction(0.1))
        assert w.exact_partial_sum(1) == Fraction(1) + Fraction(0.1)


class TestWeightFiles:
    def test_round_trip_with_comments(self, tmp_path):
        path = tmp_path / "w.txt"
        path.write_text("# header\n1.0\n\n0.5  # inline\n0.25\n")
        w = load_weight_file(path)
        assert w.entries == (1.0, 0.5, 0.25)

    def test_error_reports_line_number(self, tmp_path):
        path = tmp_path / "w.txt"
        path.write_text("1.0\nnot-a-number\n")
        with pytest.raises(ValueError, match=r":2:"):
            load_weight_file(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "w.txt"
        path.write_text("# nothing\n\n")
        with pytest.raises(ValueError):
            load_weight_file(path)

    def test_missing_file_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            load_weight_file(tmp_path / "absent.txt")


class TestLogConcavity:
    def test_margin_exact_value(self):
        # S1^2 - S2*S0 = (7/4)^2 - 65/32 = 33/32 for Poisson rate 3/4
        w = poisson_weights(Fraction(3, 4), 2)
        assert log_concavity_margin(w, 2) == Fraction(33, 32)

    def test_margin_zero_on_flat_tail(self):
        w = WeightVector((1, 0, 0))
        assert log_concavity_margin(w, 2) == 0
        assert not partial_sums_log_concave(w, 2)

    def test_geometric_margin_is_rate(self):
        # (1+r)^2 - (1+r+r^2) = r exactly
        r = Fraction(5, 3)
        w = geometric_weights(r, 2)
        assert log_concavity_margin(w, 2) == r
        assert partial_sums_log_concave(w, 2)

    def test_margin_validation(self):
        w = poisson_weights(1.0, 3)
        with pytest.raises(ValueError):
            log_concavity_margin(w, 1)
        with pytest.raises(ValueError):
            log_concavity_margin(poisson_weights(1.0, 1), 2)

    @given(
        st.integers(2, 5),
        st.fractions(min_value="1/10", max_value=20),
        st.sampled_from([poisson_weights, geometric_weights]),
    )
    def test_standard_families_are_log_concave(self, cap, rate, factory):
        assert partial_sums_log_concave(factory(rate, cap), cap)
