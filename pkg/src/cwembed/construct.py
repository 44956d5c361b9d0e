"""Tangent-cutting construction of embeddings.

A plan is a sequence of balayage steps, each induced by a line of slope in
[-1, 1] cut against the running potential: the strict sublevel set of the line
is the interval swept, the new potential is the pointwise minimum of the old
one and the line.  Generators are provided for the Azema-Yor sweep, its
mirror, the Jacka construction and the eps-approximation of the Vallois
construction; an arbitrary tangent list can be run directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .balayage import Interval, balayage, delta_m
from .errors import (
    InadmissibleConstantError,
    IncompletePlanError,
    InvalidParameterError,
    InvalidTangentError,
    UndefinedBarycentreError,
)
from .measure import (
    VALUE_TOL,
    AtomicMeasure,
    PLConcave,
    Real,
    frac,
    gap_constant,
    sup_difference,
)


@dataclass(frozen=True)
class Tangent:
    """Line x -> slope*x + intercept with |slope| <= 1."""

    slope: Fraction
    intercept: Fraction

    def __post_init__(self):
        if abs(self.slope) > 1:
            raise InvalidParameterError(f"tangent slope must lie in [-1, 1], got {self.slope}")

    @classmethod
    def make(cls, slope: Real, intercept: Real) -> "Tangent":
        return cls(frac(slope), frac(intercept))

    def __call__(self, x: Real) -> Fraction:
        return self.slope * frac(x) + self.intercept

    def reflect(self) -> "Tangent":
        """The line x -> f(-x)."""
        return Tangent(-self.slope, self.intercept)


@dataclass(frozen=True)
class Step:
    """One balayage step of a plan.

    ``interval`` endpoints are exactly where the tangent crosses the previous
    potential; ``potential_after`` is the pointwise minimum of the previous
    potential and the tangent.  A no-op step (tangent nowhere strictly below
    the potential) carries interval None and leaves the state unchanged.
    """

    tangent: Tangent
    interval: Optional[Interval]
    measure_after: AtomicMeasure
    potential_after: PLConcave
    noop: bool = False

    def to_wire(self) -> dict:
        return {
            "slope": float(self.tangent.slope),
            "intercept": float(self.tangent.intercept),
            "interval": self.interval.to_wire() if self.interval else None,
            "measure_after": self.measure_after.to_wire(),
        }


@dataclass(frozen=True)
class EmbeddingPlan:
    """Ordered balayage steps carrying the target shift constant C and the
    residual sup-distance between the final potential and the shifted target
    potential.  A plan is complete when the residual vanishes (within
    tolerance); only complete plans may be simulated."""

    mu0: AtomicMeasure
    target: AtomicMeasure
    C: Fraction
    steps: tuple[Step, ...]
    residual: Fraction

    @property
    def complete(self) -> bool:
        return self.residual <= VALUE_TOL

    @property
    def final_measure(self) -> AtomicMeasure:
        return self.steps[-1].measure_after if self.steps else self.mu0

    @property
    def final_potential(self) -> PLConcave:
        return self.steps[-1].potential_after if self.steps else self.mu0.potential()

    def to_wire(self) -> dict:
        return {
            "mu0": self.mu0.to_wire(),
            "target": self.target.to_wire(),
            "C": float(self.C),
            "residual": float(self.residual),
            "steps": [s.to_wire() for s in self.steps],
        }

    @classmethod
    def from_wire(cls, data) -> "EmbeddingPlan":
        mu0 = AtomicMeasure.from_wire(data["mu0"])
        target = AtomicMeasure.from_wire(data["target"])
        C = frac(data["C"])
        g = mu0.potential()
        steps = []
        for sd in data["steps"]:
            f = Tangent.make(sd["slope"], sd["intercept"])
            iv = Interval.from_wire(sd["interval"])
            g = _apply_tangent_potential(g, f, iv.lower, iv.upper)
            steps.append(Step(f, iv, AtomicMeasure.from_wire(sd["measure_after"]), g))
        residual = sup_difference(g, target.potential().shift(-C))
        return cls(mu0, target, C, tuple(steps), residual)


# ---------------------------------------------------------------------------
# the single cutting step


def _cut_interval(g: PLConcave, f: Tangent):
    """Open interval {x : f(x) < g(x)} of the concave difference g - f.

    Returns (lo, hi) with None for an infinite endpoint, or None when the set
    is empty; raises InvalidTangentError when the set is all of R.
    """
    xs = g.xs
    if not xs:
        d0 = g.evaluate(0) - f(0)
        sl = g.left_slope - f.slope
        if sl == 0:
            if d0 > 0:
                raise InvalidTangentError("tangent strictly below an affine potential everywhere")
            return None
        x_cross = -d0 / sl  # zero of d(x) = d0 + sl*x
        return (x_cross, None) if sl > 0 else (None, x_cross)

    ds = [g.values[i] - f(x) for i, x in enumerate(xs)]
    sl_left = g.left_slope - f.slope
    sl_right = g.right_slope - f.slope
    pos_left = sl_left < 0 or (sl_left == 0 and ds[0] > 0)
    pos_right = sl_right > 0 or (sl_right == 0 and ds[-1] > 0)
    any_pos = pos_left or pos_right or any(d > 0 for d in ds)
    if not any_pos:
        return None
    if pos_left and pos_right:
        raise InvalidTangentError("tangent strictly below the potential everywhere")

    if pos_left:
        lo = None
    elif ds[0] > 0:
        lo = xs[0] - ds[0] / sl_left  # sl_left > 0 here
    else:
        j = next((i for i, d in enumerate(ds) if d > 0), None)
        if j is not None:
            if ds[j - 1] == 0:
                lo = xs[j - 1]
            else:
                lo = xs[j - 1] - ds[j - 1] * (xs[j] - xs[j - 1]) / (ds[j] - ds[j - 1])
        else:
            # positive only beyond the last breakpoint
            lo = xs[-1] - ds[-1] / sl_right

    if pos_right:
        hi = None
    elif ds[-1] > 0:
        hi = xs[-1] - ds[-1] / sl_right  # sl_right < 0 here
    else:
        j = next((i for i in range(len(ds) - 1, -1, -1) if ds[i] > 0), None)
        if j is not None:
            if ds[j + 1] == 0:
                hi = xs[j + 1]
            else:
                hi = xs[j] + ds[j] * (xs[j + 1] - xs[j]) / (ds[j] - ds[j + 1])
        else:
            # positive only before the first breakpoint
            hi = xs[0] - ds[0] / sl_left
    return lo, hi


def _apply_tangent_potential(
    g: PLConcave, f: Tangent, lo: Optional[Fraction], hi: Optional[Fraction]
) -> PLConcave:
    """The pointwise minimum of g and f when {f < g} = (lo, hi)."""
    bps: list[tuple[Fraction, Fraction]] = []
    left_slope = g.left_slope if lo is not None else f.slope
    if lo is not None:
        bps.extend(bp for bp in g.breakpoints if bp[0] < lo)
        drop = g.derivatives(lo)[0] - f.slope
        if drop > 0:
            bps.append((lo, drop))
    if hi is not None:
        drop = f.slope - g.derivatives(hi)[1]
        if drop > 0:
            bps.append((hi, drop))
        bps.extend(bp for bp in g.breakpoints if bp[0] > hi)
        anchor = (hi, g.evaluate(hi))
    else:
        anchor = (lo, g.evaluate(lo))
    return PLConcave(left_slope, tuple(bps), anchor)


def cw_step(potential: PLConcave, measure: AtomicMeasure, f: Tangent) -> Step:
    """Cut the running potential with one tangent.

    Computes the strict sublevel interval, applies the matching balayage to
    the measure, and returns the new state.  A tangent that only touches the
    potential produces a flagged no-op with the state unchanged.
    """
    cut = _cut_interval(potential, f)
    if cut is None:
        return Step(f, None, measure, potential, noop=True)
    lo, hi = cut
    interval = Interval(lo, hi)
    new_measure = balayage(measure, interval)
    new_potential = _apply_tangent_potential(potential, f, lo, hi)
    return Step(f, interval, new_measure, new_potential)


def cw_run(
    mu0: AtomicMeasure,
    tangents: Sequence[Tangent],
    target: AtomicMeasure,
    C: Real,
) -> EmbeddingPlan:
    """Fold cw_step over a tangent sequence.

    C must be admissible (at least the potential gap of the pair); no-op
    tangents are dropped from the resulting plan.  The plan is complete iff
    the final potential equals the target potential shifted down by C.
    """
    Cf = frac(C)
    gap = gap_constant(mu0, target)
    if Cf < gap - VALUE_TOL:
        raise InadmissibleConstantError(f"C={Cf} below the admissible bound {gap}")
    g, m = mu0.potential(), mu0
    steps: list[Step] = []
    for f in tangents:
        st = cw_step(g, m, f)
        if st.noop:
            continue
        steps.append(st)
        g, m = st.potential_after, st.measure_after
    residual = sup_difference(g, target.potential().shift(-Cf))
    return EmbeddingPlan(mu0, target, Cf, tuple(steps), residual)


# ---------------------------------------------------------------------------
# tangent generators


def _segment_tangents(c: PLConcave) -> list[Tangent]:
    """One line per affine segment of c, indexed left to right (slopes
    strictly decreasing)."""
    out = []
    for i, s in enumerate(c.slopes):
        ref = max(i - 1, 0)
        x, v = c.xs[ref], c.values[ref]
        out.append(Tangent(s, v - s * x))
    return out


def _never_cuts(f: Tangent, u0: PLConcave) -> bool:
    """True iff the line is nowhere meaningfully below u0, so cutting with it
    could never move more than tolerance-level mass.  The sliver absorbs
    float-precision weight defects; skipping such a line perturbs the plan
    residual by at most the same sliver."""
    sliver = Fraction(1, 10**12)
    if not u0.xs:
        if abs(f.slope - u0.left_slope) > sliver:
            return False
        return f(0) >= u0.evaluate(0) - sliver
    if f.slope > u0.left_slope + sliver or f.slope < u0.right_slope - sliver:
        return False
    return all(f(x) >= u0.values[i] - sliver for i, x in enumerate(u0.xs))


def ay_sweep(mu0: AtomicMeasure, target: AtomicMeasure) -> list[Tangent]:
    """Azema-Yor tangent sequence: the segment lines of the shifted target
    potential c = u_target - C with touch points sweeping left to right
    (slopes decreasing from +1 to -1), skipping lines that cannot cut
    anything (segments already lying on the starting potential).

    This order makes each path race upward against a rising floor, the
    barycentre stopping rule, so the resulting plan maximizes the law of the
    running maximum among minimal embeddings; any order embeds the target,
    but only this one attains the maximum-law bound.
    """
    C = gap_constant(mu0, target)
    c = target.potential().shift(-C)
    u0 = mu0.potential()
    return [f for f in _segment_tangents(c) if not _never_cuts(f, u0)]


def reversed_ay_sweep(mu0: AtomicMeasure, target: AtomicMeasure) -> list[Tangent]:
    """Mirror image of ay_sweep under x -> -x (slopes increasing -1 to +1);
    maximizes the law of the running minimum."""
    mirrored = ay_sweep(mu0.reflect(), target.reflect())
    return [f.reflect() for f in mirrored]


def jacka_plan(mu0: AtomicMeasure, target: AtomicMeasure) -> EmbeddingPlan:
    """First cut with the horizontal tangent at the peak of c; then run the
    max-favouring sweep on the upper half (negative slopes, touch points left
    to right) and its mirror on the lower half (positive slopes, right to
    left)."""
    C = gap_constant(mu0, target)
    c = target.potential().shift(-C)
    u0 = mu0.potential()
    if not c.xs:
        return cw_run(mu0, [], target, C)
    segs = _segment_tangents(c)
    flat = Tangent(Fraction(0), max(c.values))
    upper = [f for f in segs if f.slope < 0]
    lower = [f for f in reversed(segs) if f.slope > 0]
    tangents = [f for f in [flat] + upper + lower if not _never_cuts(f, u0)]
    return cw_run(mu0, tangents, target, C)


def _support_line_through(c: PLConcave, x0: Fraction, y0: Fraction, touch: str) -> Tangent:
    """Line through (x0, y0), a point on or above c, supporting c from above;
    touch="left" takes the steepest such line (touching c left of x0),
    touch="right" the shallowest (touching right of x0)."""
    if touch == "left":
        cands = [
            (y0 - c.values[i]) / (x0 - x) for i, x in enumerate(c.xs) if x < x0
        ]
        s = min(cands + [c.slopes[0]])
    else:
        cands = [
            (c.values[i] - y0) / (x - x0) for i, x in enumerate(c.xs) if x > x0
        ]
        s = max(cands + [c.slopes[-1]])
    return Tangent(s, y0 - s * x0)


def vallois_eps_plan(
    mu0: AtomicMeasure,
    target: AtomicMeasure,
    eps: Real,
    max_steps: int,
) -> EmbeddingPlan:
    """Alternating tangent construction: lines supporting c from above whose
    crossing with the running potential is pinned at x = eps (positive slope,
    touching c to the left) and at x = 0 (negative slope, touching to the
    right).  Iterates until the residual falls below tolerance or max_steps
    is reached; a truncated plan is returned with its residual (the exact
    construction is the eps -> 0 limit and is not built here).
    """
    epsf = frac(eps)
    if epsf <= 0:
        raise InvalidParameterError(f"eps must be positive, got {eps}")
    if max_steps < 0:
        raise InvalidParameterError("max_steps must be nonnegative")
    C = gap_constant(mu0, target)
    c = target.potential().shift(-C)
    g, m = mu0.potential(), mu0
    steps: list[Step] = []
    stalled = 0
    for k in range(max_steps):
        if sup_difference(g, c) <= VALUE_TOL:
            break
        x0 = epsf if k % 2 == 0 else Fraction(0)
        f = _support_line_through(c, x0, g.evaluate(x0), "left" if k % 2 == 0 else "right")
        st = cw_step(g, m, f)
        if st.noop:
            stalled += 1
            if stalled >= 2:
                break
            continue
        stalled = 0
        steps.append(st)
        g, m = st.potential_after, st.measure_after
    residual = sup_difference(g, c)
    return EmbeddingPlan(mu0, target, C, tuple(steps), residual)


# ---------------------------------------------------------------------------
# derived quantities


def tangent_ratio_min(u0: PLConcave, c: PLConcave, x: Real):
    """Exact min over lambda < x of (u0(x) - c(lambda)) / (x - lambda).

    The ratio is monotone between kinks of c, so the candidates are the kinks
    of c (and, harmlessly, of u0) below x plus the two limiting directions:
    lambda -> -inf (value = left slope of c) and lambda -> x- (defined when
    u0(x) = c(x); value = left derivative of c at x).  Returns
    (min_value, largest_minimizer) where the minimizer is a Fraction, x
    itself for the lambda -> x- direction, or float('-inf').
    """
    xf = frac(x)
    A = u0.evaluate(xf)
    items: list[tuple[Fraction, Union[Fraction, float]]] = []
    for lam in sorted(set(c.xs) | set(u0.xs)):
        if lam < xf:
            items.append(((A - c.evaluate(lam)) / (xf - lam), lam))
    items.append((c.slopes[0], float("-inf")))
    if c.evaluate(xf) == A:
        items.append((c.derivatives(xf)[0], xf))
    best = min(v for v, _ in items)
    arg = max(k for v, k in items if v == best)
    return best, arg


def barycentre_phi(mu0: AtomicMeasure, target: AtomicMeasure, x: Real):
    """Largest minimizer of the tangent ratio at x: the level to which the
    process may fall, given running maximum x, before the Azema-Yor rule
    stops it.  At a contact point of the two potentials the minimizing
    direction is lambda -> x- and x itself is returned (stop on arrival);
    where the maximum-law bound vanishes the value is undefined.
    """
    C = gap_constant(mu0, target)
    c = target.potential().shift(-C)
    best, arg = tangent_ratio_min(mu0.potential(), c, x)
    bound = (1 + best) / 2
    if bound <= 0:
        raise UndefinedBarycentreError(f"maximum-law bound vanishes at x={x}")
    return arg


def expected_local_time_zero(plan: EmbeddingPlan) -> Fraction:
    """u_mu0(0) minus the final potential at 0: the expected local time at
    level zero accumulated by the embedding."""
    if not plan.complete:
        raise IncompletePlanError("expected local time requires a complete plan")
    return plan.mu0.potential().evaluate(0) - plan.final_potential.evaluate(0)


def plan_shift_constants(plan: EmbeddingPlan) -> list[Fraction]:
    """Cumulative potential shift after each step: zero across finite-interval
    steps, increasing by delta_m at each semi-infinite step."""
    out = []
    c = Fraction(0)
    m = plan.mu0
    for st in plan.steps:
        iv = st.interval
        if iv is not None and not iv.is_finite:
            if iv.upper is None:
                c += delta_m(m, iv.lower, "above")
            else:
                c += delta_m(m, iv.upper, "below")
        out.append(c)
        m = st.measure_after
    return out
