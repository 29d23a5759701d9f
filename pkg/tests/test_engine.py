"""Dissemination engine tests: initialization, stepping, snapshots."""

import random

import pytest

from rumorgame.core import EXPERT, TROLL, GlobalParams, build_matrix
from rumorgame.engine import (
    KnowledgeHistogram,
    PopulationSpec,
    init_population,
    run_dissemination,
    sample_pure_pair,
    step,
    time_to_threshold,
)
from rumorgame.nash import solve_selected


def small_spec(**kwargs):
    defaults = dict(n_actors=10, traits=TROLL, seed=1)
    defaults.update(kwargs)
    return PopulationSpec(**defaults)


class TestSpecValidation:
    def test_too_few_actors(self):
        with pytest.raises(ValueError, match="n_actors"):
            small_spec(n_actors=1)

    def test_cohort_fractions_must_sum(self):
        with pytest.raises(ValueError, match="fractions"):
            small_spec(cohorts=((0.5, 0.1), (0.4, 0.9)))

    def test_bad_mode(self):
        with pytest.raises(ValueError, match="mode"):
            small_spec(mode="broadcast")


class TestInitPopulation:
    def test_same_seed_same_population(self):
        a = init_population(small_spec(n_actors=50, seed=99))
        b = init_population(small_spec(n_actors=50, seed=99))
        assert a.actors == b.actors

    def test_different_seed_differs(self):
        a = init_population(small_spec(n_actors=50, seed=99))
        b = init_population(small_spec(n_actors=50, seed=100))
        assert a.actors != b.actors

    def test_equal_thirds_at_999(self):
        pop = init_population(small_spec(n_actors=999, seed=0))
        ks = [a.k for a in pop.actors]
        assert ks.count(0.1) == 333
        assert ks.count(0.5) == 333
        assert ks.count(0.9) == 333
        # cohorts are assigned by index: first third all 0.1
        assert set(ks[:333]) == {0.1}

    def test_remainder_goes_to_earliest_cohort(self):
        pop = init_population(small_spec(n_actors=100, seed=0))
        ks = [a.k for a in pop.actors]
        assert (ks.count(0.1), ks.count(0.5), ks.count(0.9)) == (34, 33, 33)

    def test_init_bounds(self):
        pop = init_population(small_spec(n_actors=300, seed=5))
        for a in pop.actors:
            assert 0.0 <= a.r <= 1.0
            assert 0.0 <= a.p <= 1.0
            assert 0.0 <= a.f_plus <= 1.0
            assert a.f_minus <= 0.5


class TestStep:
    def test_two_actor_population_always_pairs_them(self):
        pop = init_population(small_spec(n_actors=2, seed=3))
        for games in range(1, 21):
            event = step(pop)
            assert {event.actor_row, event.actor_col} == {0, 1}
            assert pop.comm_counts == [games, games]
        assert pop.games_played == 20
        assert pop.time == pytest.approx(20.0)

    def test_point_mass_profile_sampling(self):
        pop = init_population(small_spec(n_actors=2, seed=3))
        spec = pop.spec
        s0, s1 = pop.actors
        matrix = build_matrix(s0, spec.traits, s1, spec.traits, spec.params)
        profile = solve_selected(matrix)
        if all(p in (0.0, 1.0) for p in profile.sigma_row + profile.sigma_col):
            rng = random.Random(0)
            draws = {sample_pure_pair(profile, rng) for _ in range(50)}
            assert len(draws) == 1

    def test_sampled_frequencies_match_mixed_profile(self):
        # Frozen profile; frequencies must converge within 3 sigma.
        from rumorgame.nash import EquilibriumProfile

        profile = EquilibriumProfile(
            sigma_row=(0.25, 0.75),
            sigma_col=(0.6, 0.1, 0.3),
            payoff_row=0.0,
            payoff_col=0.0,
            residual=0.0,
            support_row=(0, 1),
            support_col=(0, 1, 2),
        )
        rng = random.Random(7)
        n = 100_000
        row_hits = [0, 0]
        col_hits = [0, 0, 0]
        for _ in range(n):
            ri, ci = sample_pure_pair(profile, rng)
            row_hits[ri] += 1
            col_hits[ci] += 1
        for hits, probs in ((row_hits, profile.sigma_row), (col_hits, profile.sigma_col)):
            for h, p in zip(hits, probs):
                sigma = (p * (1 - p) / n) ** 0.5
                assert abs(h / n - p) <= 3 * sigma + 1e-12


class TestRunDissemination:
    def test_determinism(self):
        spec = small_spec(n_actors=20, seed=77)
        a = run_dissemination(spec, total_games=400, snapshot_interval=100)
        b = run_dissemination(spec, total_games=400, snapshot_interval=100)
        assert a == b

    def test_initial_snapshot_has_three_spikes(self):
        spec = small_spec(n_actors=99, seed=5)
        series = run_dissemination(spec, total_games=0)
        first = series[0]
        assert first.time == 0.0
        nonzero = {i for i, c in enumerate(first.counts) if c}
        # 50 bins over [0, 1]: k = 0.1, 0.5, 0.9 land in bins 5, 25, 45
        assert nonzero == {5, 25, 45}
        assert all(first.counts[i] == 33 for i in nonzero)

    def test_histogram_conservation(self):
        spec = small_spec(n_actors=23, seed=11)
        series = run_dissemination(spec, total_games=300, snapshot_interval=50)
        for snap in series:
            assert snap.n_actors == 23

    def test_mean_k_monotone_in_time(self):
        spec = small_spec(n_actors=30, seed=13)
        series = run_dissemination(spec, total_games=2000, snapshot_interval=200)
        means = [s.mean_k for s in series]
        assert means == sorted(means)

    def test_validate_flag_checks_invariants(self):
        spec = small_spec(n_actors=10, seed=17)
        run_dissemination(spec, total_games=500, validate=True)  # must not raise

    def test_snapshot_times_use_communication_count(self):
        spec = small_spec(n_actors=10, seed=19)
        series = run_dissemination(spec, total_games=30, snapshot_interval=10)
        assert [s.time for s in series] == [0.0, 2.0, 4.0, 6.0]

    def test_one_way_mode_runs(self):
        spec = small_spec(n_actors=10, seed=23, mode="one_way")
        series = run_dissemination(spec, total_games=200, validate=True)
        assert series[-1].mean_k >= series[0].mean_k

    def test_bad_bins_rejected(self):
        with pytest.raises(ValueError, match="n_bins"):
            run_dissemination(small_spec(), total_games=10, n_bins=0)


class TestTimeToThreshold:
    def _series(self, *pairs):
        return [
            KnowledgeHistogram(time=t, bin_edges=(0.0, 1.0), counts=(5,), mean_k=k)
            for t, k in pairs
        ]

    def test_zero_threshold_hits_first_snapshot(self):
        series = self._series((0.0, 0.4), (2.0, 0.6))
        assert time_to_threshold(series, 0.0) == 0.0

    def test_unreached_threshold(self):
        series = self._series((0.0, 0.4), (2.0, 0.6))
        assert time_to_threshold(series, 0.99) is None

    def test_first_crossing_time(self):
        series = self._series((0.0, 0.4), (2.0, 0.6), (4.0, 0.8))
        assert time_to_threshold(series, 0.5) == 2.0

    def test_empty_series_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            time_to_threshold([], 0.5)
