"""Minimality invariants of an embedding: the contact set of the two
potentials, the gap constant, the maximum-law bound and its attainment by the
Azema-Yor construction, and structural plus empirical (Monte Carlo) checks
that a plan never crosses the contact set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from . import simulate
from .construct import EmbeddingPlan, ay_sweep, cw_run, tangent_ratio_min
from .errors import IncompletePlanError
from .measure import AtomicMeasure, Real, frac, gap_constant

__all__ = [
    "ContactRegion",
    "MinimalityReport",
    "TailEstimate",
    "gap_constant",
    "contact_region",
    "max_law_bound",
    "ay_max_law",
    "minimality_report",
]

Endpoint = Union[Fraction, float]  # float only for +-inf


@dataclass(frozen=True)
class ContactRegion:
    """Exact equality set of u_mu0 and u_target - C over the extended line.

    ``components`` are closed intervals (points appear as degenerate
    intervals); an endpoint of float('inf') magnitude records that the
    asymptotic gap vanishes on that side.
    """

    components: tuple[tuple[Endpoint, Endpoint], ...]

    @property
    def a_minus(self) -> Endpoint:
        return self.components[0][0] if self.components else math.inf

    @property
    def a_plus(self) -> Endpoint:
        return self.components[-1][1] if self.components else -math.inf

    def contains(self, x: Real) -> bool:
        xf = frac(x)
        return any(lo <= xf <= hi for lo, hi in self.components)

    def meets_open_interval(self, lo, hi) -> bool:
        """True iff some real point of the region lies strictly inside
        (lo, hi); None endpoints are infinite."""
        lo_eff = -math.inf if lo is None else lo
        hi_eff = math.inf if hi is None else hi
        return any(clo < hi_eff and chi > lo_eff for clo, chi in self.components)

    def to_wire(self) -> list:
        def enc(v):
            return None if isinstance(v, float) and math.isinf(v) else float(v)

        return [[enc(lo), enc(hi)] for lo, hi in self.components]


@dataclass(frozen=True)
class TailEstimate:
    """gamma-scaled exit-tail estimate for one level: gamma * P(the path
    crosses the level strictly before stopping, from the conditioned starts),
    with the matching scaled standard error."""

    gamma: float
    below: float
    below_se: float
    above: float
    above_se: float

    def to_wire(self) -> dict:
        return {
            "gamma": self.gamma,
            "below": self.below,
            "below_se": self.below_se,
            "above": self.above,
            "above_se": self.above_se,
        }


@dataclass(frozen=True)
class MinimalityReport:
    C: Fraction
    region: ContactRegion
    structural_ok: bool
    tail_estimates: tuple[TailEstimate, ...]
    ui_embedding: bool

    def to_wire(self) -> dict:
        return {
            "C": float(self.C),
            "region": self.region.to_wire(),
            "a_minus": None if math.isinf(self.region.a_minus) else float(self.region.a_minus),
            "a_plus": None if math.isinf(self.region.a_plus) else float(self.region.a_plus),
            "structural_ok": self.structural_ok,
            "tail_estimates": [t.to_wire() for t in self.tail_estimates],
            "ui_embedding": self.ui_embedding,
        }


def contact_region(mu0: AtomicMeasure, target: AtomicMeasure) -> ContactRegion:
    """Zero set of d = u_target - C - u_mu0 over [-inf, +inf].

    d is piecewise linear and <= 0 with C the exact gap constant, so the zero
    set is a finite union of kinks and flat segments, located exactly; an
    infinite endpoint is included iff the asymptotic gap on that side is zero.
    """
    C = gap_constant(mu0, target)
    u0, ut = mu0.potential(), target.potential()
    xs = sorted(set(u0.xs) | set(ut.xs))
    if not xs:
        return ContactRegion((((-math.inf), math.inf),))

    def d(x):
        return ut.evaluate(x) - C - u0.evaluate(x)

    vals = [d(x) for x in xs]
    left_flat = d(xs[0] - 1) == 0  # rays are constant for probability pairs
    right_flat = d(xs[-1] + 1) == 0

    components: list[list[Endpoint]] = []
    if left_flat:
        components.append([-math.inf, xs[0]])

    def extend(lo, hi):
        if components and components[-1][1] == lo:
            components[-1][1] = hi
        else:
            components.append([lo, hi])

    for i, x in enumerate(xs):
        if vals[i] == 0:
            extend(x, x)
            if i + 1 < len(xs) and vals[i + 1] == 0:
                extend(x, xs[i + 1])
    if right_flat:
        extend(xs[-1], math.inf)
    return ContactRegion(tuple((lo, hi) for lo, hi in components))


def max_law_bound(mu0: AtomicMeasure, target: AtomicMeasure, x: Real) -> Fraction:
    """Upper bound on P(running max >= x) over all minimal embeddings of the
    pair: inf over lambda < x of (1 + ratio)/2, clamped to [0, 1], minimized
    exactly over the finite candidate set of the tangent ratio."""
    C = gap_constant(mu0, target)
    c = target.potential().shift(-C)
    best, _ = tangent_ratio_min(mu0.potential(), c, x)
    bound = (1 + best) / 2
    return min(Fraction(1), max(Fraction(0), bound))


def _max_exceedance_exact(plan: EmbeddingPlan, x: Real) -> Fraction:
    """P(running max >= x) for a complete plan, by exact dynamic programming
    over (position, exceeded) states with the hitting-race probabilities of
    each balayage step."""
    xf = frac(x)
    states: dict[tuple[Fraction, bool], Fraction] = {}
    for pos, w in plan.mu0.atoms:
        key = (pos, pos >= xf)
        states[key] = states.get(key, Fraction(0)) + w
    for st in plan.steps:
        iv = st.interval
        new: dict[tuple[Fraction, bool], Fraction] = {}

        def add(pos, flag, w):
            if w > 0:
                key = (pos, flag)
                new[key] = new.get(key, Fraction(0)) + w

        for (pos, flag), w in states.items():
            if not iv.contains_strict(pos):
                add(pos, flag, w)
                continue
            a, b = iv.lower, iv.upper
            if a is not None and b is not None:
                p_lo = (b - pos) / (b - a)
                # exit at b: the within-step maximum is b itself
                add(b, flag or xf <= b, (1 - p_lo) * w)
                if flag or xf <= pos:
                    add(a, flag or xf <= pos, p_lo * w)
                elif pos < xf <= b:
                    q = ((pos - a) * (b - xf)) / ((xf - a) * (b - pos))
                    add(a, True, p_lo * w * q)
                    add(a, False, p_lo * w * (1 - q))
                else:  # xf > b: unreachable within this step
                    add(a, False, p_lo * w)
            elif b is None:
                # collapse down to a from pos > a; max has survival (pos-a)/(m-a)
                if flag or xf <= pos:
                    add(a, True, w)
                else:
                    q = (pos - a) / (xf - a)
                    add(a, True, w * q)
                    add(a, False, w * (1 - q))
            else:
                # collapse up to b from pos < b; the within-step maximum is b
                add(b, flag or xf <= b, w)
        states = new
    return sum((w for (_, flag), w in states.items() if flag), Fraction(0))


def ay_max_law(mu0: AtomicMeasure, target: AtomicMeasure, x: Real) -> Fraction:
    """Exact P(running max >= x) under the Azema-Yor plan for the pair,
    integrated over the starting law; attains max_law_bound wherever the
    bound is positive."""
    plan = cw_run(mu0, ay_sweep(mu0, target), target, gap_constant(mu0, target))
    return _max_exceedance_exact(plan, x)


def _structural_ok(plan: EmbeddingPlan, region: ContactRegion) -> bool:
    """No step interval strictly contains a point of the contact set; touching
    at an endpoint is allowed (absorption is permitted, crossing is not)."""
    for st in plan.steps:
        if st.interval is None:
            continue
        if region.meets_open_interval(st.interval.lower, st.interval.upper):
            return False
    return True


def minimality_report(
    plan: EmbeddingPlan,
    n_paths: int,
    gammas: Sequence[float],
    seed: int,
) -> MinimalityReport:
    """Assemble the analytic and empirical minimality evidence for a plan.

    Structural check: no balayage interval strictly contains a contact point.
    Empirical check: for each gamma, gamma-scaled Monte Carlo estimates of the
    probability of crossing -/+gamma strictly before stopping, restricted to
    starts at or above a_minus / at or below a_plus, with binomial standard
    errors.  Deterministic given the seed.
    """
    if not plan.complete:
        raise IncompletePlanError("minimality report requires a complete plan")
    C = gap_constant(plan.mu0, plan.target)
    region = contact_region(plan.mu0, plan.target)
    structural = _structural_ok(plan, region)
    tails = []
    for gamma in gammas:
        below, below_se = simulate.tail_probability(plan, gamma, "below", region, n_paths, seed)
        above, above_se = simulate.tail_probability(plan, gamma, "above", region, n_paths, seed)
        g = float(gamma)
        tails.append(TailEstimate(g, g * below, g * below_se, g * above, g * above_se))
    means_equal = abs(plan.mu0.mean() - plan.target.mean()) <= Fraction(1, 10**9)
    ui = C == 0 and means_equal
    return MinimalityReport(C, region, structural, tuple(tails), ui)
