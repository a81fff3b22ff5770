"""Command line entry point: ``cat0lab <subcommand> --config file.json``.

Exit status is 0 when a run completes (and every checked inequality holds),
2 when a checked inequality or audit condition is violated, 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .actions import IsometricAction, isometry_from_json
from .config import SUBCOMMANDS, ExperimentConfig, load_config
from .drift import EXACT, MONTE_CARLO, ConvexCombinationSpec, drift_series, verify_conv_comb_bound
from .errors import Cat0LabError
from .examples import bundled_example
from .grigorchuk import GrigorchukGroup, recursive_order
from .groups import ball, element_order, group_from_descriptor
from .harmonic import fixed_point_search, shalom_search
from .measures import FiniteSupportMeasure
from .records import RunRecord
from .spaces import check_space, space_from_descriptor

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2
CACHE_ENV = "CAT0LAB_CACHE_DIR"


def cache_dir(args=None):
    flag = getattr(args, "cache_dir", None)
    return flag or os.environ.get(CACHE_ENV) or None


def _measure(cfg: ExperimentConfig, group):
    desc = cfg.raw.get("measure")
    if desc is None:
        return FiniteSupportMeasure.uniform_generators(group)
    return FiniteSupportMeasure.from_descriptor(group, desc)


def _mode(cfg: ExperimentConfig):
    mode = cfg.get("mode", EXACT)
    seed = cfg.get("seed", 0)
    samples = cfg.get("samples", 10_000) if mode == MONTE_CARLO else None
    return mode, seed, samples


# -- subcommands --------------------------------------------------------------------

def run_drift(cfg: ExperimentConfig, rec: RunRecord, out: Path | None):
    group = group_from_descriptor(cfg.raw["group"])
    mu = _measure(cfg, group)
    mode, seed, samples = _mode(cfg)
    series = drift_series(mu, cfg.get("n_max", 10), mode=mode, samples=samples, seed=seed,
                          method=cfg.get("method", "auto"))
    rec.payload = series.to_dict()
    if mode == EXACT:
        sub, env = series.subadditivity_violations(), series.envelope_violations()
        rec.payload["subadditivity_violations"] = sub
        rec.payload["envelope_violations"] = env
        rec.passed = not sub and not env
        if series.method == "length-chain":
            rec.warnings.append("exact values from the lumped word-length chain")
    else:
        rec.warnings.append(f"Monte Carlo estimates from {samples} walks (seed {seed}); "
                            "see stderr column")
    if out is not None and cfg.raw.get("output", {}).get("csv", True):
        out.mkdir(parents=True, exist_ok=True)
        series.write_csv(out / "drift.csv")
        rec.payload["csv"] = str(out / "drift.csv")


def run_conv_comb(cfg: ExperimentConfig, rec: RunRecord, out):
    group = group_from_descriptor(cfg.raw["group"])
    mu = _measure(cfg, group)
    mode, seed, samples = _mode(cfg)
    spec = ConvexCombinationSpec(cfg.get("coefficients", ["1/2", "1/2"]),
                                 truncation=cfg.get("truncation"),
                                 renormalize=cfg.get("renormalize", False))
    report = verify_conv_comb_bound(mu, spec, cfg.get("n_max", 10), mode=mode, samples=samples,
                                    seed=seed, n_sigma=cfg.get("n_sigma", 3.0))
    rec.payload = report.to_dict()
    rec.passed = report.holds and report.finite_k_holds is not False
    if spec.renormalized:
        rec.warnings.append(f"coefficients truncated at N={spec.N} and renormalized "
                            f"from mass {spec.original_mass}")
    if mode == MONTE_CARLO:
        rec.warnings.append(f"Monte Carlo comparison with {cfg.get('n_sigma', 3.0)} combined "
                            "standard errors of slack")


def _action_setup(cfg: ExperimentConfig):
    if "example" in cfg.raw:
        ex = bundled_example(cfg.raw["example"])
        action, mu, start = ex.action, ex.mu, ex.start
        if "measure" in cfg.raw:
            mu = FiniteSupportMeasure.from_descriptor(action.group, cfg.raw["measure"])
    else:
        group = group_from_descriptor(cfg.raw["group"])
        space = space_from_descriptor(cfg.raw["space"])
        images = [isometry_from_json(space, g) for g in cfg.raw["action"]["generators"]]
        action = IsometricAction(group, space, images)
        mu = _measure(cfg, group)
        start = None
    if "start" in cfg.params:
        start = action.space.point_from_json(cfg.params["start"])
    if start is None:
        start = action.space.random_point(np.random.default_rng(cfg.get("seed", 0)))
    return action, mu, start


def run_fixed_point(cfg: ExperimentConfig, rec: RunRecord, out):
    action, mu, start = _action_setup(cfg)
    res = fixed_point_search(action, mu, tol=cfg.get("tol", 1e-6), start=start,
                             orbit_radius=cfg.get("orbit_radius", 4),
                             max_iter=cfg.get("max_iter", 10_000))
    rec.payload = res.to_dict(action.space)
    rec.payload["action"] = repr(action)


def run_shalom(cfg: ExperimentConfig, rec: RunRecord, out):
    action, _, start = _action_setup(cfg)
    results = []
    ok = True
    for n in range(1, cfg.get("n_max", 8) + 1):
        res = shalom_search(action, n, start=start, budget=cfg.get("budget", 200_000),
                            starts=cfg.get("starts", 32), seed=cfg.get("seed", 0))
        if res.certificate is not None:
            ok = ok and res.certificate.holds()
        results.append(res.to_dict(action.space))
    rec.payload = {"action": repr(action), "results": results}
    rec.passed = ok
    if any(r["certificate"] for r in results):
        rec.warnings.append("ball lower bounds are sampled checks, not proofs")


def run_grigorchuk_audit(cfg: ExperimentConfig, rec: RunRecord, out, cache=None):
    G = GrigorchukGroup()
    radius, cap = cfg.get("radius", 2), cfg.get("cap", 4096)
    B = ball(G, radius, cache_dir=cache)
    elems = list(B.elements)
    hist: dict[int, int] = {}
    flagged = []
    for g in elems:
        o = recursive_order(g, cap)
        if o is None:
            flagged.append({"element": G.serialize(g), "order": f"exceeds cap {cap}"})
        else:
            hist[o] = hist.get(o, 0) + 1
    powers_of_two = all(o & (o - 1) == 0 for o in hist)
    rng = np.random.default_rng(cfg.get("seed", 0))
    n_spot = min(cfg.get("spot_checks", 1000), len(elems) * 10)
    mismatches = []
    for i in rng.integers(len(elems), size=n_spot):
        g = elems[int(i)]
        if recursive_order(g, cap) != element_order(g, cap):
            mismatches.append(G.serialize(g))
    a, b, c, d = G.basic_generators()
    relations = {"a^2": (a * a).is_identity(), "b^2": (b * b).is_identity(),
                 "c^2": (c * c).is_identity(), "d^2": (d * d).is_identity(),
                 "bcd": (b * c * d).is_identity()}
    rec.payload = {"radius": radius, "cap": cap, "element_count": len(elems),
                   "order_histogram": {str(k): hist[k] for k in sorted(hist)},
                   "max_order": max(hist) if hist else None,
                   "all_orders_powers_of_two": powers_of_two, "exceeds_cap": flagged,
                   "spot_checks": int(n_spot), "spot_check_mismatches": mismatches,
                   "relations": relations, "relations_pass": all(relations.values()),
                   "cache_dir": str(cache) if cache else None}
    if flagged:
        rec.warnings.append(f"{len(flagged)} element orders exceed the cap {cap}")
    rec.passed = powers_of_two and not mismatches and all(relations.values())


def run_space_check(cfg: ExperimentConfig, rec: RunRecord, out):
    descs = cfg.raw.get("spaces") or [cfg.raw["space"]]
    reports = []
    for desc in descs:
        space = space_from_descriptor(desc)
        r = check_space(space, samples=cfg.get("samples", 10_000), seed=cfg.get("seed", 0),
                        tol=cfg.get("tol", 1e-9), scale=cfg.get("scale", 1.0))
        reports.append({"space": desc, **r.to_dict()})
    rec.payload = {"reports": reports}
    rec.passed = all(r["passed"] for r in reports)


HANDLERS = {
    "drift": run_drift,
    "conv-comb": run_conv_comb,
    "fixed-point": run_fixed_point,
    "shalom": run_shalom,
    "space-check": run_space_check,
}


# -- argument handling ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cat0lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON experiment configuration")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="directory for the JSON record (and CSV series)")
        mode = sp.add_mutually_exclusive_group()
        mode.add_argument("--exact", action="store_const", const=EXACT, dest="mode")
        mode.add_argument("--monte-carlo", action="store_const", const=MONTE_CARLO, dest="mode")
        sp.add_argument("--samples", type=int)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--cache-dir", help=f"overrides ${CACHE_ENV}")
    return p


def _overrides(args) -> dict:
    out = {}
    for key in ("seed", "mode", "samples", "tol"):
        v = getattr(args, key)
        if v is not None:
            out[key] = v
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.subcommand, _overrides(args))
        out_dir = args.out or cfg.raw.get("output", {}).get("dir")
        out = Path(out_dir) if out_dir else None
        rec = RunRecord(args.subcommand, cfg.hash)
        if args.subcommand == "grigorchuk-audit":
            run_grigorchuk_audit(cfg, rec, out, cache=cache_dir(args))
        else:
            HANDLERS[args.subcommand](cfg, rec, out)
        rec.finish()
    except (Cat0LabError, OSError) as exc:
        print(f"cat0lab {args.subcommand}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    text = json.dumps(rec.to_dict(), indent=2, sort_keys=True)
    if out is not None:
        path = rec.write(out)
        print(f"{args.subcommand}: {'PASS' if rec.passed else 'VIOLATION'} -> {path}")
    else:
        print(text)
    return EXIT_OK if rec.passed else EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
