import math
import random
from fractions import Fraction as F

import pytest

from conftest import random_prob_measure
from cwembed import (
    AtomicMeasure,
    IncompletePlanError,
    Tangent,
    ay_max_law,
    ay_sweep,
    contact_region,
    cw_run,
    gap_constant,
    max_law_bound,
    minimality_report,
    tangent_ratio_min,
    vallois_eps_plan,
)

D0 = AtomicMeasure.point(0)
PM1 = AtomicMeasure.from_pairs([(-1, F(1, 2)), (1, F(1, 2))])
ASYM = AtomicMeasure.from_pairs([(-1, F(2, 3)), (2, F(1, 3))])


def ay_plan(mu0, mu):
    return cw_run(mu0, ay_sweep(mu0, mu), mu, gap_constant(mu0, mu))


class TestGap:
    def test_values(self):
        assert gap_constant(PM1, D0) == 1
        assert gap_constant(D0, PM1) == 0
        assert gap_constant(D0, D0) == 0


class TestContactRegion:
    def test_single_point(self):
        r = contact_region(PM1, D0)
        assert r.components == ((F(0), F(0)),)
        assert r.a_minus == 0 and r.a_plus == 0

    def test_outer_rays(self):
        r = contact_region(D0, PM1)
        assert r.components == ((-math.inf, F(-1)), (F(1), math.inf))
        assert r.a_minus == -math.inf and r.a_plus == math.inf

    def test_everything(self):
        r = contact_region(D0, D0)
        assert r.components == ((-math.inf, math.inf),)

    def test_subset_of_cdf_bracket(self):
        # at a contact point the target CDF brackets the starting CDF
        rng = random.Random(41)
        for _ in range(40):
            mu0, mu = random_prob_measure(rng, 6), random_prob_measure(rng, 6)
            region = contact_region(mu0, mu)
            for lo, hi in region.components:
                for a in {lo, hi}:
                    if isinstance(a, float) and math.isinf(a):
                        continue
                    assert mu.mass_below(a) <= mu0.mass_below(a)
                    assert mu0.mass_below(a) <= mu0.mass_upto(a) <= mu.mass_upto(a)

    def test_mass_and_mean_partition(self):
        # between consecutive finite contact points the two measures carry
        # equal mass and equal mean once split at matching levels; pairs built
        # by balayage have large contact sets
        from cwembed import balayage_finite

        rng = random.Random(43)
        seen = 0
        for _ in range(80):
            mu0 = random_prob_measure(rng, 6)
            a = min(mu0.positions) + F(rng.randint(0, 32), 16)
            mu = balayage_finite(mu0, a, a + F(rng.randint(1, 64), 16))
            region = contact_region(mu0, mu)
            pts = []
            for lo, hi in region.components:
                for v in (lo, hi):
                    if not (isinstance(v, float) and math.isinf(v)):
                        pts.append(v)
            pts = sorted(set(pts))
            for a, z in zip(pts, pts[1:]):
                theta_a = mu0.mass_below(a)
                theta_z = mu0.mass_upto(z)
                mid0 = mu0.split_at(z, theta_z)[0].split_at(a, theta_a)[1]
                mid = mu.split_at(z, theta_z)[0].split_at(a, theta_a)[1]
                assert mid.total_mass == mid0.total_mass
                if mid.total_mass > 0:
                    assert mid.mean() == mid0.mean()
                seen += 1
        assert seen > 20


class TestMaxLawBound:
    def test_trough_closed_form(self):
        assert max_law_bound(D0, PM1, F(1, 2)) == F(2, 3)
        for i in range(1, 11):
            x = F(i, 10)
            assert max_law_bound(D0, PM1, x) == 1 / (1 + x)

    def test_lifted_pair(self):
        assert max_law_bound(PM1, D0, F(1, 2)) == F(1, 2)
        assert max_law_bound(PM1, D0, 2) == F(1, 4)

    def test_clamped_below_start(self):
        assert max_law_bound(PM1, D0, -5) == 1

    def test_value_at_contact_points(self):
        # at a finite contact point the bound equals the target tail mass
        assert max_law_bound(PM1, D0, 0) == 1
        assert max_law_bound(D0, PM1, 1) == F(1, 2)
        rng = random.Random(47)
        for _ in range(30):
            mu0, mu = random_prob_measure(rng, 6), random_prob_measure(rng, 6)
            for lo, hi in contact_region(mu0, mu).components:
                for a in {lo, hi}:
                    if isinstance(a, float) and math.isinf(a):
                        continue
                    assert max_law_bound(mu0, mu, a) == mu.total_mass - mu.mass_below(a)

    def test_raising_c_raises_bound(self):
        # the tight shift constant minimizes the bound
        mu0, mu = D0, ASYM
        C = gap_constant(mu0, mu)
        u0 = mu0.potential()
        for extra in [F(1, 2), 1, 2]:
            c_loose = mu.potential().shift(-(C + extra))
            raised = False
            for i in range(-20, 30):
                x = F(i, 8)
                tight, _ = tangent_ratio_min(u0, mu.potential().shift(-C), x)
                loose, _ = tangent_ratio_min(u0, c_loose, x)
                bt = min(F(1), max(F(0), (1 + tight) / 2))
                bl = min(F(1), max(F(0), (1 + loose) / 2))
                assert bl >= bt
                if bl > bt:
                    raised = True
            assert raised


class TestAyMaxLaw:
    def test_trough_race(self):
        assert ay_max_law(D0, PM1, F(1, 2)) == F(2, 3)

    def test_lifted_pair(self):
        assert ay_max_law(PM1, D0, F(1, 2)) == F(1, 2)

    def test_below_all_starts(self):
        rng = random.Random(53)
        for _ in range(10):
            mu0, mu = random_prob_measure(rng, 5), random_prob_measure(rng, 5)
            floor = min(mu0.positions) - 1
            assert ay_max_law(mu0, mu, floor) == 1

    def test_attains_bound(self):
        rng = random.Random(59)
        for _ in range(25):
            mu0, mu = random_prob_measure(rng, 6), random_prob_measure(rng, 6)
            for i in range(-12, 13):
                x = F(i, 2)
                bound = max_law_bound(mu0, mu, x)
                if bound > 0:
                    assert ay_max_law(mu0, mu, x) == bound

    def test_monotone_and_dominates_target_tail(self):
        rng = random.Random(61)
        for _ in range(15):
            mu0, mu = random_prob_measure(rng, 6), random_prob_measure(rng, 6)
            xs = [F(i, 4) for i in range(-48, 49)]
            vals = [ay_max_law(mu0, mu, x) for x in xs]
            assert all(a >= b for a, b in zip(vals, vals[1:]))
            for x, v in zip(xs, vals):
                assert v >= mu.total_mass - mu.mass_below(x)


class TestReport:
    def test_lifted_pair_plan(self):
        plan = ay_plan(PM1, D0)
        rep = minimality_report(plan, 20_000, [2.0, 4.0], seed=3)
        assert rep.C == 1 and rep.structural_ok and not rep.ui_embedding
        for t in rep.tail_estimates:
            assert t.below == 0.0 and t.above == 0.0

    def test_bounded_ui_plan(self):
        plan = cw_run(D0, [Tangent.make(0, -1)], PM1, 0)
        rep = minimality_report(plan, 20_000, [2.0], seed=5)
        assert rep.ui_embedding and rep.structural_ok
        assert rep.tail_estimates[0].below == 0.0
        assert rep.tail_estimates[0].above == 0.0

    def test_bad_plan_detected(self):
        tangents = [Tangent.make(0, -2), Tangent.make(-1, -2), Tangent.make(1, -2)]
        bad = cw_run(PM1, tangents, D0, 2)
        assert bad.complete
        rep = minimality_report(bad, 5_000, [2.0], seed=7)
        assert not rep.structural_ok
        # the wasteful construction leaks past the contact point: scaled tails stay fat
        assert rep.tail_estimates[0].below > 3 * rep.tail_estimates[0].below_se > 0

    def test_incomplete_plan_rejected(self):
        plan = vallois_eps_plan(D0, PM1, F(1, 2), 1)
        with pytest.raises(IncompletePlanError):
            minimality_report(plan, 100, [2.0], seed=1)
