"""Command-line front end.

Problem specifications are JSON files:

    {
      "mu0": [[-1, 0.5], [1, 0.5]],
      "mu":  [[0, 1.0]],
      "construction": {"type": "azema-yor"},
      "simulation": {"n_paths": 100000, "seed": 7,
                     "gammas": [2, 4, 8], "thresholds": [0.5]}
    }

Construction types: azema-yor, reversed-azema-yor, jacka,
vallois (fields eps, max_steps), custom (fields tangents = [[slope,
intercept], ...] and C).  The simulation block and its fields are optional.

Exit codes: 0 ok; 2 parse error or input mismatch; 3 inadmissible or
truncated construction; 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import minimality, simulate
from .construct import (
    EmbeddingPlan,
    Tangent,
    ay_sweep,
    cw_run,
    jacka_plan,
    reversed_ay_sweep,
    vallois_eps_plan,
)
from .diagram import render_plan_svg
from .errors import EmbedError, InadmissibleConstantError, ProblemSpecError
from .measure import AtomicMeasure, gap_constant

_CONSTRUCTIONS = ("azema-yor", "reversed-azema-yor", "jacka", "vallois", "custom")


@dataclass
class ProblemSpec:
    mu0: AtomicMeasure
    mu: AtomicMeasure
    construction: dict
    n_paths: int = 100_000
    seed: int = 0
    gammas: list = field(default_factory=list)
    thresholds: list = field(default_factory=list)


def _require(cond, message, fld):
    if not cond:
        raise ProblemSpecError(message, field=fld)


def load_problem_spec(path) -> ProblemSpec:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ProblemSpecError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ProblemSpecError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}")
    _require(isinstance(raw, dict), "top level must be an object", "spec")
    for key in ("mu0", "mu"):
        _require(key in raw, "missing required field", key)
    try:
        mu0 = AtomicMeasure.from_wire(raw["mu0"])
        mu = AtomicMeasure.from_wire(raw["mu"])
    except (TypeError, ValueError) as exc:
        raise ProblemSpecError(str(exc), field="mu0/mu")
    _require(mu0.is_probability(), "mu0 must be a probability measure", "mu0")
    _require(mu.is_probability(), "mu must be a probability measure", "mu")

    con = raw.get("construction", {"type": "azema-yor"})
    _require(isinstance(con, dict) and "type" in con, "construction needs a type", "construction")
    _require(con["type"] in _CONSTRUCTIONS, f"unknown type {con['type']!r}", "construction.type")
    if con["type"] == "vallois":
        _require("eps" in con and float(con["eps"]) > 0, "vallois needs eps > 0", "construction.eps")
        _require(int(con.get("max_steps", 0)) >= 0, "max_steps must be >= 0", "construction.max_steps")
    if con["type"] == "custom":
        _require("tangents" in con and isinstance(con["tangents"], list),
                 "custom needs a tangent list", "construction.tangents")
        _require("C" in con, "custom needs C", "construction.C")

    sim = raw.get("simulation", {})
    _require(isinstance(sim, dict), "simulation must be an object", "simulation")
    span = max(
        [abs(float(x)) for x, _ in mu0.atoms] + [abs(float(x)) for x, _ in mu.atoms] + [1.0]
    )
    gammas = [float(g) for g in sim.get("gammas", [2 * span, 4 * span, 8 * span])]
    _require(all(g > 0 for g in gammas), "gammas must be positive", "simulation.gammas")
    thresholds = [float(t) for t in sim.get("thresholds", [float(x) for x in mu.positions])]
    n_paths = int(sim.get("n_paths", 100_000))
    _require(n_paths >= 1, "n_paths must be >= 1", "simulation.n_paths")
    return ProblemSpec(mu0, mu, con, n_paths, int(sim.get("seed", 0)), gammas, thresholds)


def build_plan(spec: ProblemSpec) -> EmbeddingPlan:
    kind = spec.construction["type"]
    if kind == "azema-yor":
        return cw_run(spec.mu0, ay_sweep(spec.mu0, spec.mu), spec.mu,
                      gap_constant(spec.mu0, spec.mu))
    if kind == "reversed-azema-yor":
        return cw_run(spec.mu0, reversed_ay_sweep(spec.mu0, spec.mu), spec.mu,
                      gap_constant(spec.mu0, spec.mu))
    if kind == "jacka":
        return jacka_plan(spec.mu0, spec.mu)
    if kind == "vallois":
        return vallois_eps_plan(spec.mu0, spec.mu, spec.construction["eps"],
                                int(spec.construction.get("max_steps", 200)))
    tangents = [Tangent.make(s, b) for s, b in spec.construction["tangents"]]
    return cw_run(spec.mu0, tangents, spec.mu, spec.construction["C"])


def _region_text(region) -> str:
    def end(v, neg):
        if isinstance(v, float) and math.isinf(v):
            return "-inf" if neg else "+inf"
        return format(float(v), ".6g")

    if not region.components:
        return "(empty)"
    parts = []
    for lo, hi in region.components:
        if lo == hi:
            parts.append("{%s}" % end(lo, True))
        else:
            parts.append("[%s, %s]" % (end(lo, True), end(hi, False)))
    return " U ".join(parts)


def _analyze_payload(spec: ProblemSpec) -> dict:
    C = gap_constant(spec.mu0, spec.mu)
    region = minimality.contact_region(spec.mu0, spec.mu)
    bounds = [
        [t, float(minimality.max_law_bound(spec.mu0, spec.mu, t))] for t in spec.thresholds
    ]
    u0, ut = spec.mu0.potential(), spec.mu.potential()
    return {
        "C": float(C),
        "region": region.to_wire(),
        "a_minus": None if math.isinf(region.a_minus) else float(region.a_minus),
        "a_plus": None if math.isinf(region.a_plus) else float(region.a_plus),
        "mu0_potential": [[float(x), float(u0.evaluate(x))] for x in u0.xs],
        "mu_potential": [[float(x), float(ut.evaluate(x))] for x in ut.xs],
        "max_law_bound": bounds,
    }


def cmd_analyze(args) -> int:
    spec = load_problem_spec(args.spec)
    payload = _analyze_payload(spec)
    if args.format == "json":
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        region = minimality.contact_region(spec.mu0, spec.mu)
        lines = []
        lines.append("starting potential kinks: "
                     + ", ".join(f"({x:.6g}, {v:.6g})" for x, v in payload["mu0_potential"]))
        lines.append("target potential kinks:   "
                     + ", ".join(f"({x:.6g}, {v:.6g})" for x, v in payload["mu_potential"]))
        lines.append(f"C = {payload['C']:.9g}")
        lines.append(f"contact set = {_region_text(region)}")
        lines.append(f"a- = {'-inf' if payload['a_minus'] is None else format(payload['a_minus'], '.6g')}"
                     f"   a+ = {'+inf' if payload['a_plus'] is None else format(payload['a_plus'], '.6g')}")
        lines.append("max-law bound:")
        for t, b in payload["max_law_bound"]:
            lines.append(f"  P(max >= {t:.6g}) <= {b:.9g}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0


def cmd_build(args) -> int:
    spec = load_problem_spec(args.spec)
    try:
        plan = build_plan(spec)
    except InadmissibleConstantError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    text = json.dumps(plan.to_wire(), indent=2, sort_keys=True) + "\n"
    _emit(text, args.out)
    if not plan.complete:
        print(f"warning: plan truncated, residual = {float(plan.residual):.6g}", file=sys.stderr)
        return 3
    return 0


def cmd_verify(args) -> int:
    spec = load_problem_spec(args.spec)
    try:
        plan = EmbeddingPlan.from_wire(json.loads(Path(args.plan).read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"error: cannot load plan: {exc}", file=sys.stderr)
        return 2
    if not (plan.mu0.close_to(spec.mu0) and plan.target.close_to(spec.mu)):
        print("error: plan measures do not match the problem spec", file=sys.stderr)
        return 2
    if not plan.complete:
        print(f"error: plan incomplete, residual = {float(plan.residual):.6g}", file=sys.stderr)
        return 3

    n = args.paths or spec.n_paths
    seed = spec.seed if args.seed is None else args.seed
    report = minimality.minimality_report(plan, n, spec.gammas, seed)
    law = simulate.empirical_law(plan, n, seed, spec.thresholds)
    tv = simulate.tv_distance(law, spec.mu)
    tv_limit = 4.0 * math.sqrt(len(spec.mu) / n)
    tails_ok = all(
        (t.below == 0.0 or t.below < 3.0 * t.below_se)
        and (t.above == 0.0 or t.above < 3.0 * t.above_se)
        for t in report.tail_estimates
    )
    ok = report.structural_ok and tv < tv_limit and tails_ok

    if args.format == "json":
        payload = {
            "report": report.to_wire(),
            "tv_distance": tv,
            "tv_limit": tv_limit,
            "atom_frequencies": sorted(law.atom_frequencies.items()),
            "max_exceedance": sorted(law.max_exceedance.items()),
            "tails_ok": tails_ok,
            "ok": ok,
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    elif args.format == "csv":
        rows = ["atom,frequency"]
        rows += [f"{p:.12g},{f:.6g}" for p, f in sorted(law.atom_frequencies.items())]
        rows.append("")
        rows.append("gamma,side,estimate,stderr")
        for t in report.tail_estimates:
            rows.append(f"{t.gamma:.6g},below,{t.below:.6g},{t.below_se:.6g}")
            rows.append(f"{t.gamma:.6g},above,{t.above:.6g},{t.above_se:.6g}")
        text = "\n".join(rows) + "\n"
    else:
        lines = [
            f"C = {float(report.C):.9g}",
            f"contact set = {_region_text(report.region)}",
            f"structural check: {'ok' if report.structural_ok else 'FAILED'}",
            f"uniformly integrable: {'yes' if report.ui_embedding else 'no'}",
            f"tv distance = {tv:.6g} (limit {tv_limit:.6g})",
            "tail estimates (gamma-scaled):",
        ]
        for t in report.tail_estimates:
            lines.append(
                f"  gamma={t.gamma:<8.6g} below={t.below:.6g} (se {t.below_se:.6g})"
                f"  above={t.above:.6g} (se {t.above_se:.6g})"
            )
        lines.append("verdict: " + ("PASS" if ok else "FAIL"))
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0 if ok else 4


def cmd_diagram(args) -> int:
    load_problem_spec(args.spec)  # validates the spec side
    try:
        plan = EmbeddingPlan.from_wire(json.loads(Path(args.plan).read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"error: cannot load plan: {exc}", file=sys.stderr)
        return 2
    svg = render_plan_svg(plan)
    try:
        Path(args.out).write_text(svg, encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return 2
    return 0


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cwembed", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, plan=False, out_required=False):
        sp.add_argument("--spec", required=True, help="problem spec JSON file")
        if plan:
            sp.add_argument("--plan", required=True, help="plan JSON file")
        sp.add_argument("--out", required=out_required, help="output file")
        sp.add_argument("--format", choices=("text", "json", "csv"), default="text")

    sp = sub.add_parser("analyze", help="potentials, C, contact set, max-law bound")
    common(sp)
    sp.set_defaults(fn=cmd_analyze)

    sp = sub.add_parser("build", help="construct a plan and write it as JSON")
    common(sp, out_required=True)
    sp.set_defaults(fn=cmd_build)

    sp = sub.add_parser("verify", help="minimality report and law comparison")
    common(sp, plan=True)
    sp.add_argument("--paths", type=int, default=None, help="override simulated path count")
    sp.add_argument("--seed", type=int, default=None, help="override simulation seed")
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("diagram", help="SVG picture of the plan")
    common(sp, plan=True, out_required=True)
    sp.set_defaults(fn=cmd_diagram)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.fn(args)
    except ProblemSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EmbedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
