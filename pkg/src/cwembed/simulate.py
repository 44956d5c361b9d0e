"""Exact-exit Monte Carlo realization of embedding plans.

No time discretization: each balayage step is realized by its two-point exit
law, and the running maximum / minimum within a step are drawn from the exact
conditional hitting laws.  Randomness is a counter-based Philox stream keyed
by the 64-bit seed; path ``i`` consumes the fixed-size block of draws at rows
``i`` of the stream, so single-path sampling, batched estimation and any
chunking produce identical results.

Per-path draw layout (row of ``row_len`` uniforms, padded to a multiple of 4
so rows align with Philox counter blocks): column 0 selects the start by
inverse CDF; step k uses columns 1+3k (exit), 2+3k (max), 3+3k (min).  Draws
are consumed positionally whether or not a step applies to the path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .balayage import Interval
from .construct import EmbeddingPlan
from .errors import IncompletePlanError, InvalidParameterError
from .measure import AtomicMeasure

#: positions closer than this are treated as the same atom when matching laws
ATOM_TOL = 1e-9

_CHUNK = 1 << 15


@dataclass(frozen=True)
class PathSample:
    """One simulated embedding realization."""

    start: float
    exits: tuple[tuple[Interval, float], ...]
    final: float
    max: float
    min: float


@dataclass(frozen=True)
class EmpiricalLaw:
    """Aggregated final-value and running-max statistics of n paths."""

    samples: int
    atom_frequencies: dict
    max_exceedance: dict


class _PlanData:
    """Float view of a plan for the simulator."""

    def __init__(self, plan: EmbeddingPlan):
        if not plan.complete:
            raise IncompletePlanError("simulation requires a complete plan")
        self.positions = np.array([float(x) for x in plan.mu0.positions], dtype=float)
        w = np.array([float(v) for v in plan.mu0.weights], dtype=float)
        cum = np.cumsum(w) / w.sum()
        cum[-1] = 1.0
        self.cum = cum
        self.steps = [
            (
                -math.inf if st.interval.lower is None else float(st.interval.lower),
                math.inf if st.interval.upper is None else float(st.interval.upper),
            )
            for st in plan.steps
        ]
        self.intervals = [st.interval for st in plan.steps]
        n_draws = 1 + 3 * len(self.steps)
        self.row_len = ((n_draws + 3) // 4) * 4


def _stream(seed: int, row0: int, row_len: int) -> np.random.Generator:
    bg = np.random.Philox(key=seed)
    if row0:
        bg.advance(row0 * row_len // 4)  # advance counts 4-double counter blocks
    return np.random.Generator(bg)


def _run_chunk(pd: _PlanData, u: np.ndarray, levels: Sequence[float]):
    """Vectorized pass of one block of paths.

    Returns (start, pos, gmax, gmin, crossed) where crossed[j] flags, per
    path, a visit to levels[j] strictly before the final stopping time.
    """
    start = pd.positions[np.searchsorted(pd.cum, u[:, 0], side="right")]
    pos = start.copy()
    gmax = start.copy()
    gmin = start.copy()
    moved_any = np.zeros(len(pos), dtype=bool)
    tb = [np.zeros(len(pos), dtype=bool) for _ in levels]
    tc = [pos == lv for lv in levels]

    with np.errstate(invalid="ignore", divide="ignore"):
        for k, (a, b) in enumerate(pd.steps):
            ue = u[:, 1 + 3 * k]
            vmax = 1.0 - u[:, 2 + 3 * k]  # in (0, 1]: safe survival inversions
            vmin = 1.0 - u[:, 3 + 3 * k]
            inside = (pos > a) & (pos < b)
            if math.isfinite(a) and math.isfinite(b):
                p_lo = (b - pos) / (b - a)
                to_lo = ue < p_lo
                smax = (b * (pos - a) + a * vmax * (b - pos)) / ((pos - a) + vmax * (b - pos))
                smin = (a * (b - pos) + b * vmin * (pos - a)) / ((b - pos) + vmin * (pos - a))
                newpos = np.where(to_lo, a, b)
                rng_hi = np.where(to_lo, smax, b)
                rng_lo = np.where(to_lo, a, smin)
            elif math.isinf(b):
                # collapse down to a from above: P(max >= m) = (pos-a)/(m-a)
                newpos = np.full_like(pos, a)
                rng_hi = a + (pos - a) / vmax
                rng_lo = np.full_like(pos, a)
            else:
                # collapse up to b from below: P(min <= m) = (b-pos)/(b-m)
                newpos = np.full_like(pos, b)
                rng_hi = np.full_like(pos, b)
                rng_lo = b - (b - pos) / vmin
            for j, lv in enumerate(levels):
                touched = inside & (rng_lo <= lv) & (lv <= rng_hi)
                tb[j] = np.where(inside, tb[j] | tc[j], tb[j])
                tc[j] = np.where(inside, touched, tc[j])
            gmax = np.where(inside, np.maximum(gmax, rng_hi), gmax)
            gmin = np.where(inside, np.minimum(gmin, rng_lo), gmin)
            pos = np.where(inside, newpos, pos)
            moved_any |= inside

    crossed = [
        moved_any & (tb[j] | (tc[j] & (pos != lv))) for j, lv in enumerate(levels)
    ]
    return start, pos, gmax, gmin, crossed


def _run_all(plan: EmbeddingPlan, n: int, seed: int, levels: Sequence[float]):
    pd = _PlanData(plan)
    starts = np.empty(n)
    finals = np.empty(n)
    gmaxs = np.empty(n)
    gmins = np.empty(n)
    crossed = [np.empty(n, dtype=bool) for _ in levels]
    done = 0
    while done < n:
        rows = min(_CHUNK, n - done)
        u = _stream(seed, done, pd.row_len).random((rows, pd.row_len))
        s, p, hi, lo, cr = _run_chunk(pd, u, levels)
        sl = slice(done, done + rows)
        starts[sl], finals[sl], gmaxs[sl], gmins[sl] = s, p, hi, lo
        for j in range(len(levels)):
            crossed[j][sl] = cr[j]
        done += rows
    return starts, finals, gmaxs, gmins, crossed


def sample_path(plan: EmbeddingPlan, seed: int, index: int) -> PathSample:
    """Realize one path from the independent substream (seed, index).

    Identical to row ``index`` of any batched estimate with the same seed.
    """
    pd = _PlanData(plan)
    u = _stream(seed, index, pd.row_len).random((1, pd.row_len))
    # scalar replay recording per-step exits
    start = float(pd.positions[np.searchsorted(pd.cum, u[0, 0], side="right")])
    pos, hi, lo = start, start, start
    exits = []
    for k, (a, b) in enumerate(pd.steps):
        if not (a < pos < b):
            continue
        ue = u[0, 1 + 3 * k]
        vmax = 1.0 - u[0, 2 + 3 * k]
        vmin = 1.0 - u[0, 3 + 3 * k]
        if math.isfinite(a) and math.isfinite(b):
            if ue < (b - pos) / (b - a):
                hi = max(hi, (b * (pos - a) + a * vmax * (b - pos)) / ((pos - a) + vmax * (b - pos)))
                pos = a
            else:
                lo = min(lo, (a * (b - pos) + b * vmin * (pos - a)) / ((b - pos) + vmin * (pos - a)))
                pos = b
        elif math.isinf(b):
            hi = max(hi, a + (pos - a) / vmax)
            pos = a
        else:
            lo = min(lo, b - (b - pos) / vmin)
            pos = b
        hi, lo = max(hi, pos), min(lo, pos)
        exits.append((pd.intervals[k], pos))
    return PathSample(start, tuple(exits), pos, hi, lo)


def empirical_law(
    plan: EmbeddingPlan,
    n: int,
    seed: int,
    thresholds: Sequence[float] = (),
) -> EmpiricalLaw:
    """Aggregate n paths: final-value frequencies and, for each threshold t,
    the frequency of running max >= t.  Deterministic given (plan, seed, n)."""
    if n < 1:
        raise InvalidParameterError("n must be at least 1")
    _, finals, gmaxs, _, _ = _run_all(plan, n, seed, ())
    values, counts = np.unique(finals, return_counts=True)
    freqs = {float(v): c / n for v, c in zip(values, counts)}
    exceed = {float(t): float(np.mean(gmaxs >= float(t))) for t in thresholds}
    return EmpiricalLaw(n, freqs, exceed)


def tv_distance(law: EmpiricalLaw, m: AtomicMeasure) -> float:
    """Total-variation distance between the empirical atom frequencies and m,
    matching atom positions within ATOM_TOL."""
    events = sorted(
        [(p, f, 0.0) for p, f in law.atom_frequencies.items()]
        + [(float(x), 0.0, float(w)) for x, w in m.atoms]
    )
    total = 0.0
    i = 0
    while i < len(events):
        p0, emp, ana = events[i]
        j = i + 1
        while j < len(events) and events[j][0] - p0 <= ATOM_TOL:
            emp += events[j][1]
            ana += events[j][2]
            j += 1
        total += abs(emp - ana)
        i = j
    return total / 2.0


def tail_probability(
    plan: EmbeddingPlan,
    gamma: float,
    side: str,
    conditioning,
    n: int,
    seed: int,
) -> tuple[float, float]:
    """Monte Carlo estimate of the probability that a path crosses level
    -gamma (side="below", starts restricted to >= a_minus) or +gamma
    (side="above", starts restricted to <= a_plus) strictly before its final
    stopping time.  ``conditioning`` provides a_minus/a_plus (a ContactRegion
    or anything with those attributes).  Returns (estimate, stderr).

    The crossing is detected exactly from the step sequence: the visited set
    of each step is the interval between its sampled extremes, and a level
    touched only at the final stopping point does not count.
    """
    if gamma <= 0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")
    if side not in ("below", "above"):
        raise InvalidParameterError(f"side must be 'below' or 'above', got {side!r}")
    level = -float(gamma) if side == "below" else float(gamma)
    starts, _, _, _, crossed = _run_all(plan, n, seed, [level])
    if side == "below":
        bound = conditioning.a_minus
        cond = starts >= (-math.inf if bound == -math.inf else float(bound))
    else:
        bound = conditioning.a_plus
        cond = starts <= (math.inf if bound == math.inf else float(bound))
    hits = crossed[0] & cond
    p = float(np.mean(hits))
    se = math.sqrt(p * (1.0 - p) / n)
    return p, se
