"""Atomic measures on the line and their piecewise-linear concave potentials.

All arithmetic is exact: positions, weights and function values are stored as
``fractions.Fraction``.  Floats passed in are converted exactly (every float
is a rational), so identities such as mass conservation, potential round-trips
and crossing computations hold with zero error; tolerances enter only where
the public contract says they do.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence, Union

from .errors import InvalidSplitError, MalformedPotentialError

Real = Union[int, float, Fraction]

#: tolerance on the total mass of a probability measure
MASS_TOL = Fraction(1, 10**12)
#: absolute tolerance for potential-value comparisons
VALUE_TOL = Fraction(1, 10**9)
#: slack allowed between extreme slopes of two near-probability potentials
#: (covers float-precision weights whose mass is 1 only within MASS_TOL)
SLOPE_TOL = Fraction(1, 10**10)


def frac(x: Real) -> Fraction:
    """Exact conversion to Fraction (floats convert without rounding)."""
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely supported sub-probability measure.

    ``atoms`` is a tuple of (position, weight) pairs with strictly increasing
    positions and strictly positive weights; total mass must lie in [0, 1].
    Instances are immutable and safe to share between threads.
    """

    atoms: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        prev = None
        total = Fraction(0)
        for x, w in self.atoms:
            if w <= 0:
                raise ValueError(f"atom weight must be positive, got {w} at {x}")
            if prev is not None and x <= prev:
                raise ValueError("atom positions must be strictly increasing")
            prev = x
            total += w
        if total > 1 + MASS_TOL:
            raise ValueError(f"total mass {total} exceeds 1")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[Real]]) -> "AtomicMeasure":
        """Build a canonical measure: sort, merge coincident positions, drop zeros."""
        merged: dict[Fraction, Fraction] = {}
        for x, w in pairs:
            xf, wf = frac(x), frac(w)
            if wf < 0:
                raise ValueError(f"negative weight {w} at {x}")
            if wf == 0:
                continue
            merged[xf] = merged.get(xf, Fraction(0)) + wf
        atoms = tuple(sorted(merged.items()))
        return cls(atoms)

    @classmethod
    def point(cls, x: Real, w: Real = 1) -> "AtomicMeasure":
        return cls.from_pairs([(x, w)])

    # -- basic queries ----------------------------------------------------

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def positions(self) -> tuple[Fraction, ...]:
        return tuple(x for x, _ in self.atoms)

    @property
    def weights(self) -> tuple[Fraction, ...]:
        return tuple(w for _, w in self.atoms)

    @cached_property
    def total_mass(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def is_probability(self, tol: Fraction = MASS_TOL) -> bool:
        return abs(self.total_mass - 1) <= tol

    def mean(self) -> Fraction:
        """Barycentre sum(w*x)/sum(w); undefined for the zero measure."""
        if not self.atoms:
            raise ValueError("mean of the zero measure is undefined")
        return sum((w * x for x, w in self.atoms), Fraction(0)) / self.total_mass

    def mass_below(self, a: Real) -> Fraction:
        """Mass of the open half line (-inf, a)."""
        af = frac(a)
        return sum((w for x, w in self.atoms if x < af), Fraction(0))

    def mass_upto(self, a: Real) -> Fraction:
        """Mass of the closed half line (-inf, a]."""
        af = frac(a)
        return sum((w for x, w in self.atoms if x <= af), Fraction(0))

    def mass_at(self, a: Real) -> Fraction:
        af = frac(a)
        return sum((w for x, w in self.atoms if x == af), Fraction(0))

    # -- operations -------------------------------------------------------

    def potential(self) -> "PLConcave":
        """The compensated potential x -> -sum_i w_i |x - x_i|."""
        if not self.atoms:
            return PLConcave(Fraction(0), (), (Fraction(0), Fraction(0)))
        x0 = self.atoms[0][0]
        v0 = -sum((w * abs(x0 - x) for x, w in self.atoms), Fraction(0))
        bps = tuple((x, 2 * w) for x, w in self.atoms)
        return PLConcave(self.total_mass, bps, (x0, v0))

    def split_at(self, a: Real, theta: Real) -> tuple["AtomicMeasure", "AtomicMeasure"]:
        """Split into (lower, upper): lower agrees with self on (-inf, a),
        is supported on (-inf, a] and has total mass theta; upper is the rest.
        An atom at a is divided between the parts as needed.
        """
        af, th = frac(a), frac(theta)
        lo_mass, hi_mass = self.mass_below(af), self.mass_upto(af)
        if not lo_mass <= th <= hi_mass:
            raise InvalidSplitError(
                f"theta={th} outside admissible bracket [{lo_mass}, {hi_mass}] at {af}"
            )
        lower = [(x, w) for x, w in self.atoms if x < af]
        upper = [(x, w) for x, w in self.atoms if x > af]
        at_a = self.mass_at(af)
        take = th - lo_mass
        if take > 0:
            lower.append((af, take))
        if at_a - take > 0:
            upper.insert(0, (af, at_a - take))
        return AtomicMeasure(tuple(lower)), AtomicMeasure(tuple(upper))

    def reflect(self) -> "AtomicMeasure":
        """Image under x -> -x."""
        return AtomicMeasure(tuple((-x, w) for x, w in reversed(self.atoms)))

    def close_to(self, other: "AtomicMeasure", tol: Fraction = VALUE_TOL) -> bool:
        """Atom-by-atom agreement of positions and weights within tol."""
        if len(self.atoms) != len(other.atoms):
            return False
        return all(
            abs(x - y) <= tol and abs(v - w) <= tol
            for (x, v), (y, w) in zip(self.atoms, other.atoms)
        )

    # -- wire format -------------------------------------------------------

    def to_wire(self) -> list[list[float]]:
        """Canonical JSON form: ascending [position, weight] pairs."""
        return [[float(x), float(w)] for x, w in self.atoms]

    @classmethod
    def from_wire(cls, data) -> "AtomicMeasure":
        return cls.from_pairs(data)


@dataclass(frozen=True)
class PLConcave:
    """Piecewise-linear concave function.

    Stored as the slope at -inf, breakpoints (x, slope_drop) with strictly
    increasing x and strictly positive drops, and one (x, value) anchor fixing
    the additive level.  The potential of a measure of mass m has left slope
    +m, right slope -m and a drop of 2w at each atom.
    """

    left_slope: Fraction
    breakpoints: tuple[tuple[Fraction, Fraction], ...]
    anchor: tuple[Fraction, Fraction]

    def __post_init__(self):
        prev = None
        for x, d in self.breakpoints:
            if d <= 0:
                raise ValueError(f"slope drop must be positive, got {d} at {x}")
            if prev is not None and x <= prev:
                raise ValueError("breakpoints must be strictly increasing")
            prev = x

    # -- geometry ----------------------------------------------------------

    @cached_property
    def xs(self) -> tuple[Fraction, ...]:
        return tuple(x for x, _ in self.breakpoints)

    @cached_property
    def slopes(self) -> tuple[Fraction, ...]:
        """Segment slopes; slopes[i] applies left of breakpoint i,
        slopes[-1] right of the last breakpoint."""
        out = [self.left_slope]
        for _, d in self.breakpoints:
            out.append(out[-1] - d)
        return tuple(out)

    @property
    def right_slope(self) -> Fraction:
        return self.slopes[-1]

    @cached_property
    def values(self) -> tuple[Fraction, ...]:
        """Function values at the breakpoints."""
        if not self.breakpoints:
            return ()
        x0, y0 = self.anchor
        xs, slopes = self.xs, self.slopes
        k = bisect_right(xs, x0)  # anchor sits on segment k
        vals: list[Fraction] = [Fraction(0)] * len(xs)
        if k > 0:
            vals[k - 1] = y0 - slopes[k] * (x0 - xs[k - 1])
            for j in range(k - 2, -1, -1):
                vals[j] = vals[j + 1] - slopes[j + 1] * (xs[j + 1] - xs[j])
        if k < len(xs):
            vals[k] = y0 + slopes[k] * (xs[k] - x0)
            for j in range(k + 1, len(xs)):
                vals[j] = vals[j - 1] + slopes[j] * (xs[j] - xs[j - 1])
        return tuple(vals)

    def __call__(self, x: Real) -> Fraction:
        return self.evaluate(x)

    def evaluate(self, x: Real) -> Fraction:
        xf = frac(x)
        if not self.breakpoints:
            x0, y0 = self.anchor
            return y0 + self.left_slope * (xf - x0)
        j = bisect_right(self.xs, xf)
        if j == 0:
            return self.values[0] - self.slopes[0] * (self.xs[0] - xf)
        return self.values[j - 1] + self.slopes[j] * (xf - self.xs[j - 1])

    def derivatives(self, x: Real) -> tuple[Fraction, Fraction]:
        """(left, right) derivatives at x."""
        xf = frac(x)
        j = bisect_left(self.xs, xf)
        if j < len(self.xs) and self.xs[j] == xf:
            return self.slopes[j], self.slopes[j + 1]
        return self.slopes[j], self.slopes[j]

    def shift(self, c: Real) -> "PLConcave":
        """Add the constant c (O(1): anchor update only)."""
        x0, y0 = self.anchor
        return PLConcave(self.left_slope, self.breakpoints, (x0, y0 + frac(c)))

    def reflect(self) -> "PLConcave":
        """The function x -> f(-x)."""
        bps = tuple((-x, d) for x, d in reversed(self.breakpoints))
        return PLConcave(-self.right_slope, bps, (-self.anchor[0], self.anchor[1]))

    # -- inverse -----------------------------------------------------------

    def measure(self, tol: Fraction = VALUE_TOL) -> AtomicMeasure:
        """The measure whose potential this is, up to the additive anchor.

        Requires a measure-type slope profile: left slope +m, right slope -m.
        """
        if abs(self.left_slope + self.right_slope) > tol or self.left_slope < 0:
            raise MalformedPotentialError(
                f"slope profile ({self.left_slope}, {self.right_slope}) is not of measure type"
            )
        return AtomicMeasure(tuple((x, d / 2) for x, d in self.breakpoints))


def potential_of(m: AtomicMeasure) -> PLConcave:
    """Module-level alias of :meth:`AtomicMeasure.potential`."""
    return m.potential()


def measure_from_potential(f: PLConcave) -> AtomicMeasure:
    """Module-level alias of :meth:`PLConcave.measure`."""
    return f.measure()


def sup_difference(f: PLConcave, g: PLConcave) -> Fraction:
    """Exact sup |f - g| over the line.

    Finite only when the extreme slopes agree (e.g. both functions are
    potentials of probability measures, possibly shifted); raises ValueError
    when they differ beyond SLOPE_TOL.  The supremum is attained on the
    union of breakpoints or at the asymptotic difference; a sub-tolerance
    slope mismatch (float-precision masses) contributes below tolerance near
    the data and is ignored.
    """
    if (
        abs(f.left_slope - g.left_slope) > SLOPE_TOL
        or abs(f.right_slope - g.right_slope) > SLOPE_TOL
    ):
        raise ValueError("sup difference is unbounded: extreme slopes differ")
    xs = sorted(set(f.xs) | set(g.xs))
    if not xs:
        return abs(f.evaluate(0) - g.evaluate(0))
    probes = [xs[0] - 1] + xs + [xs[-1] + 1]
    return max(abs(f.evaluate(x) - g.evaluate(x)) for x in probes)


def gap_constant(mu0: AtomicMeasure, target: AtomicMeasure) -> Fraction:
    """sup_x { u_target(x) - u_mu0(x) }, the smallest admissible downward
    shift of the target potential below the starting potential.

    Exact over the union of kinks plus the two asymptotic levels; always >= 0
    for probability measures.
    """
    u0, ut = mu0.potential(), target.potential()
    xs = sorted(set(u0.xs) | set(ut.xs))
    if not xs:
        return ut.evaluate(0) - u0.evaluate(0)
    probes = [xs[0] - 1] + xs + [xs[-1] + 1]
    return max(ut.evaluate(x) - u0.evaluate(x) for x in probes)
