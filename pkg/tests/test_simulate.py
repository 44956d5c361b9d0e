import math
from fractions import Fraction as F

import numpy as np
import pytest

import cwembed.simulate as sim
from cwembed import (
    AtomicMeasure,
    EmpiricalLaw,
    IncompletePlanError,
    InvalidParameterError,
    Tangent,
    ay_max_law,
    ay_sweep,
    contact_region,
    cw_run,
    empirical_law,
    gap_constant,
    sample_path,
    tail_probability,
    tv_distance,
    vallois_eps_plan,
)

D0 = AtomicMeasure.point(0)
PM1 = AtomicMeasure.from_pairs([(-1, F(1, 2)), (1, F(1, 2))])
ASYM = AtomicMeasure.from_pairs([(-1, F(2, 3)), (2, F(1, 3))])

TROUGH_PLAN = cw_run(D0, [Tangent.make(0, -1)], PM1, 0)
LIFT_PLAN = cw_run(PM1, ay_sweep(PM1, D0), D0, 1)
EMPTY_PLAN = cw_run(D0, [], D0, 0)


class TestSamplePath:
    def test_two_point_exit(self):
        finals = {sample_path(TROUGH_PLAN, 11, i).final for i in range(50)}
        assert finals == {-1.0, 1.0}

    def test_invariants(self):
        for i in range(200):
            p = sample_path(TROUGH_PLAN, 12, i)
            assert p.final == p.exits[-1][1]
            assert p.max >= max(p.start, p.final)
            assert p.min <= min(p.start, p.final)

    def test_empty_plan(self):
        p = sample_path(EMPTY_PLAN, 1, 0)
        assert p.final == p.start == p.max == p.min
        assert p.exits == ()

    def test_deterministic_per_index(self):
        a = sample_path(TROUGH_PLAN, 5, 7)
        b = sample_path(TROUGH_PLAN, 5, 7)
        assert a == b

    def test_incomplete_rejected(self):
        truncated = vallois_eps_plan(D0, PM1, F(1, 2), 1)
        with pytest.raises(IncompletePlanError):
            sample_path(truncated, 0, 0)


class TestEmpiricalLaw:
    def test_two_point_frequencies(self):
        law = empirical_law(TROUGH_PLAN, 100_000, seed=7)
        se = math.sqrt(0.25 / 100_000)
        assert abs(law.atom_frequencies[-1.0] - 0.5) <= 3 * se
        assert abs(law.atom_frequencies[1.0] - 0.5) <= 3 * se

    def test_empty_plan_point_mass(self):
        law = empirical_law(EMPTY_PLAN, 10, seed=0)
        assert law.atom_frequencies == {0.0: 1.0}

    def test_deterministic_steps_give_exact_law(self):
        law = empirical_law(LIFT_PLAN, 10_000, seed=3)
        assert law.atom_frequencies == {0.0: 1.0}

    def test_mean_drift_zero_shift(self):
        law = empirical_law(TROUGH_PLAN, 100_000, seed=19)
        mean = sum(p * f for p, f in law.atom_frequencies.items())
        assert abs(mean - 0.0) <= 3 / math.sqrt(100_000)

    def test_determinism_and_chunk_invariance(self):
        a = empirical_law(TROUGH_PLAN, 30_000, seed=9, thresholds=[0.3])
        b = empirical_law(TROUGH_PLAN, 30_000, seed=9, thresholds=[0.3])
        assert a == b
        old = sim._CHUNK
        try:
            sim._CHUNK = 777
            c = empirical_law(TROUGH_PLAN, 30_000, seed=9, thresholds=[0.3])
        finally:
            sim._CHUNK = old
        assert a == c

    def test_batch_matches_single_paths(self):
        starts, finals, gmaxs, gmins, _ = sim._run_all(TROUGH_PLAN, 500, 42, [])
        for i in [0, 1, 99, 499]:
            p = sample_path(TROUGH_PLAN, 42, i)
            assert (p.start, p.final, p.max, p.min) == (
                starts[i],
                finals[i],
                gmaxs[i],
                gmins[i],
            )


class TestMaxLaw:
    def test_matches_analytic_race(self):
        ay = cw_run(D0, ay_sweep(D0, PM1), PM1, 0)
        thresholds = [0.1, 0.25, 0.5, 0.75, 0.95]
        n = 100_000
        law = empirical_law(ay, n, seed=23, thresholds=thresholds)
        for t in thresholds:
            p = float(ay_max_law(D0, PM1, F(t)))
            se = math.sqrt(p * (1 - p) / n)
            assert abs(law.max_exceedance[t] - p) <= 3 * se

    def test_asymmetric_plan(self):
        ay = cw_run(D0, ay_sweep(D0, ASYM), ASYM, 0)
        n = 100_000
        law = empirical_law(ay, n, seed=29, thresholds=[0.5, 1.0, 1.5])
        for t in [0.5, 1.0, 1.5]:
            p = float(ay_max_law(D0, ASYM, F(t)))
            se = math.sqrt(p * (1 - p) / n)
            assert abs(law.max_exceedance[t] - p) <= 3 * se


class TestTvDistance:
    def test_exact_match(self):
        law = EmpiricalLaw(4, {-1.0: 0.5, 1.0: 0.5}, {})
        assert tv_distance(law, PM1) == 0

    def test_disjoint(self):
        law = empirical_law(EMPTY_PLAN, 10, seed=0)
        assert tv_distance(law, PM1) == 1

    def test_large_sample_close(self):
        law = empirical_law(TROUGH_PLAN, 100_000, seed=31)
        assert tv_distance(law, PM1) < 0.01

    def test_position_matching_tolerance(self):
        law = EmpiricalLaw(2, {-1.0 + 1e-12: 0.5, 1.0: 0.5}, {})
        assert tv_distance(law, PM1) == 0


class TestTails:
    def test_bounded_plan_has_no_tails(self):
        region = contact_region(PM1, D0)
        est, se = tail_probability(LIFT_PLAN, 2.0, "below", region, 20_000, seed=37)
        assert est == 0.0 and se == 0.0
        est, se = tail_probability(LIFT_PLAN, 2.0, "above", region, 20_000, seed=37)
        assert est == 0.0 and se == 0.0

    def test_trough_plan_confined(self):
        region = contact_region(D0, PM1)
        est, _ = tail_probability(TROUGH_PLAN, 2.0, "above", region, 20_000, seed=41)
        assert est == 0.0

    def test_empty_plan(self):
        region = contact_region(D0, D0)
        est, se = tail_probability(EMPTY_PLAN, 1.0, "below", region, 1_000, seed=43)
        assert est == 0.0 and se == 0.0

    def test_wasteful_plan_leaks(self):
        tangents = [Tangent.make(0, -2), Tangent.make(-1, -2), Tangent.make(1, -2)]
        bad = cw_run(PM1, tangents, D0, 2)
        region = contact_region(PM1, D0)
        n = 40_000
        est, se = tail_probability(bad, 4.0, "below", region, n, seed=47)
        # exact crossing probability: start at +1 (mass 1/2), swept to -2 with
        # probability 1/4, then dips below -4 before reaching 0 w.p. 1/2
        expect = 0.5 * 0.25 * 0.5
        assert abs(est - expect) <= 4 * math.sqrt(expect * (1 - expect) / n)
        assert se > 0

    def test_gamma_validation(self):
        region = contact_region(D0, PM1)
        with pytest.raises(InvalidParameterError):
            tail_probability(TROUGH_PLAN, -1.0, "below", region, 10, seed=0)
        with pytest.raises(InvalidParameterError):
            tail_probability(TROUGH_PLAN, 1.0, "sideways", region, 10, seed=0)


class TestWithinStepExtremes:
    def test_max_law_single_interval(self):
        # P(max >= m) for first exit of (-1, 1) from 0: closed form (1+... the
        # race to m before -1 times the continuation is 1/(1+m) at threshold m
        n = 100_000
        _, _, gmaxs, gmins, _ = sim._run_all(TROUGH_PLAN, n, 53, [])
        for m in [0.2, 0.5, 0.8]:
            p = 1.0 / (1.0 + m)
            se = math.sqrt(p * (1 - p) / n)
            assert abs(np.mean(gmaxs >= m) - p) <= 3 * se
            assert abs(np.mean(gmins <= -m) - p) <= 3 * se

    def test_semi_infinite_spike(self):
        # collapse from +1 to 0: P(max >= m) = 1/m for m >= 1
        n = 100_000
        _, _, gmaxs, _, _ = sim._run_all(LIFT_PLAN, n, 59, [])
        for m in [2.0, 4.0]:
            p = 0.5 * (1.0 / m)  # only the mass starting at +1 spikes
            se = math.sqrt(p * (1 - p) / n)
            assert abs(np.mean(gmaxs >= m) - p) <= 3 * se
