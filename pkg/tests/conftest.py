import random
import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from cwembed import AtomicMeasure  # noqa: E402


def random_prob_measure(rng: random.Random, max_atoms=8, span=10, denom=16) -> AtomicMeasure:
    """Random probability measure with rational atoms on a grid in [-span, span];
    weights normalize to exactly 1."""
    k = rng.randint(1, max_atoms)
    xs = rng.sample(range(-span * denom, span * denom + 1), k)
    ws = [rng.randint(1, 20) for _ in range(k)]
    tot = sum(ws)
    return AtomicMeasure.from_pairs(
        [(Fraction(x, denom), Fraction(w, tot)) for x, w in zip(xs, ws)]
    )


def grid_point(rng: random.Random, span=10, denom=16) -> Fraction:
    return Fraction(rng.randint(-span * denom, span * denom), denom)


def probe_points(*fns):
    """Union of breakpoints of the given piecewise-linear functions plus one
    probe beyond each end (where all of them are affine)."""
    xs = sorted(set().union(*[set(f.xs) for f in fns]))
    if not xs:
        return [Fraction(0)]
    return [xs[0] - 1] + xs + [xs[-1] + 1]
