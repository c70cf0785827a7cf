"""Tests for the Levy-Prokhorov distance."""

import numpy as np
import pytest

from core.measure_core import (
    bernoulli,
    dirac,
    discrete_space,
    lp_distance,
    lp_distance_batch,
    lp_distance_bruteforce,
    lp_feasible,
    lp_feasible_bruteforce,
    real_line_space,
)
from core.measure_core import prokhorov
from core.utils.errors import MismatchedSpaceError, ValidationFailure
from core.utils.models import FiniteMeasure


def _line_space(rng, k):
    return real_line_space(np.concatenate(([0.0], np.sort(rng.uniform(0.05, 2.0, k - 1)))))


class TestLpDistance:
    """Test cases for the transport-based distance."""

    def test_discrete_metric_is_total_variation(self):
        assert lp_distance(bernoulli(0.3), bernoulli(0.5)) == pytest.approx(0.2, abs=1e-12)

    def test_disjoint_diracs(self):
        space = discrete_space(range(3))
        assert lp_distance(dirac(space, 0), dirac(space, 2)) == pytest.approx(1.0)

    def test_euclidean_diracs(self):
        space = real_line_space([0.0, 0.5])
        assert lp_distance(dirac(space, 0), dirac(space, 1)) == pytest.approx(0.5)

    def test_radius_below_mass_gap(self):
        """Nearby points: moving mass costs the radius, not the mass."""
        space = real_line_space([0.0, 0.1])
        mixed = FiniteMeasure(space=space, weights=[0.5, 0.5])
        assert lp_distance(dirac(space, 0), mixed) == pytest.approx(0.1)

    def test_identical_measures(self, rng, make_measure):
        nu = make_measure(rng, 5)
        assert lp_distance(nu, nu) == 0.0

    def test_mismatched_spaces(self):
        other = FiniteMeasure(space=discrete_space(["a", "b"]), weights=[0.5, 0.5])
        with pytest.raises(MismatchedSpaceError):
            lp_distance(bernoulli(0.5), other)

    @pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
    def test_matches_subset_oracle(self, rng, make_measure, k):
        for _ in range(40):
            space = discrete_space(range(k)) if rng.random() < 0.5 else _line_space(rng, k)
            a, b = make_measure(rng, k, space), make_measure(rng, k, space)
            assert lp_distance(a, b) == pytest.approx(lp_distance_bruteforce(a, b), abs=1e-9)

    def test_metric_axioms(self, rng, make_measure):
        for _ in range(50):
            space = _line_space(rng, 4)
            a, b, c = (make_measure(rng, 4, space) for _ in range(3))
            ab = lp_distance(a, b)
            assert ab == pytest.approx(lp_distance(b, a), abs=1e-12)
            assert lp_distance(a, c) <= ab + lp_distance(b, c) + 1e-9
            assert 0.0 <= ab <= 1.0

    def test_batch_matches_pairwise(self, rng, make_measure):
        space = _line_space(rng, 4)
        pairs = [(make_measure(rng, 4, space), make_measure(rng, 4, space)) for _ in range(20)]
        batch = lp_distance_batch(
            np.array([a.weights for a, _ in pairs]),
            np.array([b.weights for _, b in pairs]),
            space.distance_matrix(),
        )
        assert batch == pytest.approx([lp_distance(a, b) for a, b in pairs], abs=1e-9)

    def test_bruteforce_is_independent_of_batch(self, rng, make_measure, monkeypatch):
        def unavailable(*args, **kwargs):
            raise AssertionError("subset oracle must not use the batch formula")

        monkeypatch.setattr(prokhorov, "lp_distance_batch", unavailable)
        space = real_line_space([0.0, 0.1])
        mixed = FiniteMeasure(space=space, weights=[0.5, 0.5])
        assert lp_distance_bruteforce(dirac(space, 0), mixed) == pytest.approx(0.1)
        assert lp_distance_bruteforce(bernoulli(0.3), bernoulli(0.5)) == pytest.approx(0.2, abs=1e-12)
        for _ in range(20):
            line = _line_space(rng, 4)
            a, b = make_measure(rng, 4, line), make_measure(rng, 4, line)
            value = lp_distance_bruteforce(a, b)
            assert lp_feasible_bruteforce(a, b, value + 1e-9)
            if value > 1e-6:
                assert not lp_feasible_bruteforce(a, b, value - 1e-6)

    def test_bruteforce_size_limit(self, rng, make_measure):
        a, b = make_measure(rng, 9), make_measure(rng, 9)
        with pytest.raises(ValidationFailure):
            lp_distance_bruteforce(a, b)


class TestLpFeasible:
    """Test cases for the feasibility predicate."""

    def test_threshold_at_distance(self):
        first, second = bernoulli(0.3), bernoulli(0.5)
        assert lp_feasible(first, second, 0.2)
        assert not lp_feasible(first, second, 0.19)

    def test_zero_radius_means_equality(self, bern03):
        assert lp_feasible(bern03, bern03, 0.0)
        assert not lp_feasible(bern03, bernoulli(0.31), 0.0)

    def test_negative_radius_rejected(self, bern03):
        with pytest.raises(ValidationFailure):
            lp_feasible(bern03, bern03, -0.1)

    def test_monotone_in_radius(self, rng, make_measure):
        space = _line_space(rng, 5)
        a, b = make_measure(rng, 5, space), make_measure(rng, 5, space)
        answers = [lp_feasible(a, b, eps) for eps in np.linspace(0.0, 1.0, 41)]
        first_true = answers.index(True)
        assert all(answers[first_true:])

    def test_matches_subset_oracle(self, rng, make_measure):
        for _ in range(30):
            space = _line_space(rng, 4)
            a, b = make_measure(rng, 4, space), make_measure(rng, 4, space)
            for eps in (0.0, 0.05, 0.15, 0.3, 0.6, 1.0):
                assert lp_feasible(a, b, eps) == lp_feasible_bruteforce(a, b, eps)

    def test_infimum_is_attained(self, rng, make_measure):
        """The distance is the smallest feasible radius."""
        for _ in range(20):
            space = _line_space(rng, 4)
            a, b = make_measure(rng, 4, space), make_measure(rng, 4, space)
            distance = lp_distance(a, b)
            assert lp_feasible(a, b, distance + 1e-9)
            if distance > 1e-6:
                assert not lp_feasible(a, b, distance - 1e-6)
