"""Command-line entry point: ``boolresp {gen,truth,explain,bench,report}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import bench
from .baselines import PAYOFFS
from .brex import BrexConfig, dump_explanation, explanation_record
from .formula import (
    FAMILIES,
    enumerate_assignments,
    from_bits,
    meta,
    parse,
    random_formula,
    read_corpus,
    render,
    sample_assignments,
    write_corpus,
)
from .ground_truth import BRUTE_FORCE_GUARD, GroundTruth, truth_rows, write_truth_csv
from .oracle import FormulaOracle

SEED_ENV = "BOOLRESP_SEED"
log = logging.getLogger("boolresp")


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get(SEED_ENV, 0))


def _arities(text: str) -> tuple:
    out = []
    for part in text.split(","):
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return tuple(out)


def _common(p, width=True):
    if width:
        p.add_argument("--width", type=int, default=12, help="input vector length")
    p.add_argument("--seed", type=int, default=None, help=f"random seed (default: ${SEED_ENV} or 0)")


def _corpus_flags(p):
    p.add_argument("--arities", type=_arities, default=tuple(range(3, 11)), help="e.g. 3-10 or 3,5,7")
    p.add_argument("--family", choices=FAMILIES + ("both",), default="both")
    p.add_argument("--formulae-per-arity", type=int, default=10)
    ro = p.add_mutually_exclusive_group()
    ro.add_argument("--read-once", dest="read_once", action="store_true", default=True)
    ro.add_argument("--general", dest="read_once", action="store_false")


def _assignment_flags(p):
    p.add_argument("--sample", type=int, default=None, help="sample N assignments per formula")
    p.add_argument("--paper-faithful", action="store_true", help="enumerate all 2^width assignments")


def _explainer_flags(p, default):
    p.add_argument("--explainers", default=default, help="comma-separated: " + ",".join(bench.EXPLAINERS))
    p.add_argument("--budget", type=int, default=None, help="B-ReX oracle call budget")
    p.add_argument("--restarts", type=int, default=None, help="B-ReX restarts")
    p.add_argument("--blocks", type=int, default=None, help="B-ReX blocks per partition")
    p.add_argument("--shapley-payoff", choices=PAYOFFS, default=None)
    p.add_argument("--permutations", type=int, default=None, help="permutations for sampled Shapley")


def _brex_config(args, seed: int) -> BrexConfig:
    cfg = BrexConfig(seed=seed)
    if args.budget is not None:
        cfg = replace(cfg, call_budget=args.budget)
    if args.restarts is not None:
        cfg = replace(cfg, restarts=args.restarts)
    if args.blocks is not None:
        cfg = replace(cfg, num_blocks=args.blocks)
    return cfg


def cmd_gen(args) -> int:
    seed = _seed(args)
    families = FAMILIES if args.family == "both" else (args.family,)
    formulas = []
    for fi, fam in enumerate(families):
        for arity in args.arities:
            for i in range(args.formulae_per_arity):
                rng = np.random.default_rng([seed, fi, arity, i])
                formulas.append(random_formula(arity, fam, args.read_once, rng, width=args.width))
    if args.out:
        write_corpus(args.out, formulas, args.width)
    else:
        sys.stdout.write(f"width={args.width}\n" + "".join(render(f) + "\n" for f in formulas))
    return 0


def cmd_truth(args) -> int:
    seed = _seed(args)
    if args.formula:
        width, formulas = args.width, [parse(args.formula, args.width)]
    else:
        width, formulas = read_corpus(args.corpus)
    guard = None if args.allow_large else BRUTE_FORCE_GUARD
    rows = []
    for n, f in enumerate(formulas):
        fid = f"f{n:04d}"
        gt = GroundTruth(f, guard=guard)
        used = None if args.paper_faithful else meta(f).used_vars
        if args.sample:
            cases = sample_assignments(width, used, args.sample, np.random.default_rng([seed, n]))
        else:
            cases = enumerate_assignments(width, used)
        for a in cases:
            rows.extend(truth_rows(fid, a, gt(a)))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_truth_csv(fh, rows)
    else:
        write_truth_csv(sys.stdout, rows)
    return 0


def cmd_explain(args) -> int:
    seed = _seed(args)
    f = parse(args.formula, args.width)
    x = from_bits(args.assignment)
    if len(x) != args.width:
        raise SystemExit(f"assignment has {len(x)} positions, expected {args.width}")
    cfg = bench.ExperimentConfig(
        width=args.width,
        arities=(max(1, meta(f).arity),),
        explainers=tuple(args.explainers.split(",")),
        seed=seed,
        brex=_brex_config(args, seed),
        shapley_payoff=args.shapley_payoff or "completion",
        shapley_permutations=args.permutations or 25,
    )
    gt = GroundTruth(f)(x)
    print(json.dumps({"formula": render(f), "assignment": args.assignment,
                      "ground_truth": [str(v) for v in gt]}))
    for name in cfg.explainers:
        oracle = FormulaOracle(f, args.width)
        scores = bench.run_explainer(name, oracle, x, cfg, seed)
        settings = cfg.brex if name == "brex" else {"payoff": cfg.shapley_payoff, "permutations": cfg.shapley_permutations}
        rec = explanation_record("cli", x, scores, oracle.calls, settings, seed)
        rec["explainer"] = name
        print(dump_explanation(rec))
    return 0


def cmd_bench(args) -> int:
    seed = _seed(args)
    overrides = dict(
        width=args.width,
        arities=args.arities,
        formulae_per_arity=args.formulae_per_arity,
        family=args.family,
        read_once=args.read_once,
        sample=args.sample,
        paper_faithful=args.paper_faithful,
        seed=seed,
        brute_force_guard=None if args.allow_large else BRUTE_FORCE_GUARD,
    )
    if args.explainers:
        overrides["explainers"] = tuple(args.explainers.split(","))
    if args.shapley_payoff:
        overrides["shapley_payoff"] = args.shapley_payoff
    if args.permutations:
        overrides["shapley_permutations"] = args.permutations
    overrides["brex"] = _brex_config(args, seed)
    config = bench.preset(args.preset, **overrides)

    def progress(entry, n):
        log.info("%s: %d assignments", entry.formula_id, n)

    records = bench.run_experiment(config, progress)
    bench.write_outputs(config, records, args.out_dir)
    _print_tables(records)
    return 0


def _print_tables(records):
    main = [r for r in records if r.family != bench.HANDCRAFTED]
    crafted = [r for r in records if r.family == bench.HANDCRAFTED]
    if main:
        table = bench.report(main)
        print(bench.render_text(table, "jsd"))
        print()
        print(bench.render_text(table, "topk"))
    if crafted:
        print()
        print(bench.render_text(bench.report(crafted, ("formula_id", "explainer_id")), "topk"))


def cmd_report(args) -> int:
    timings = os.path.join(os.path.dirname(args.results), "timings.csv")
    records = bench.read_results(args.results, timings)
    bench.write_reports(records, args.out_dir or os.path.dirname(args.results) or ".")
    _print_tables(records)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boolresp", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random formula corpus")
    _common(p)
    _corpus_flags(p)
    p.add_argument("--out", help="corpus file (default: stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("truth", help="dump ground-truth responsibility as CSV")
    _common(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus", help="corpus file")
    src.add_argument("--formula", help="single formula text")
    _assignment_flags(p)
    p.add_argument("--allow-large", action="store_true", help="lift the brute-force arity guard")
    p.add_argument("--out", help="CSV file (default: stdout)")
    p.set_defaults(func=cmd_truth)

    p = sub.add_parser("explain", help="explain a single input")
    _common(p)
    p.add_argument("--formula", required=True)
    p.add_argument("--assignment", required=True, help="bitstring, x1 first")
    _explainer_flags(p, default="brex")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("bench", help="run a benchmark")
    _common(p)
    p.add_argument("--preset", choices=bench.PRESETS, default="paper-jsd")
    _corpus_flags(p)
    _assignment_flags(p)
    _explainer_flags(p, default=None)
    p.add_argument("--allow-large", action="store_true", help="lift the brute-force arity guard")
    p.add_argument("--out-dir", default="bench_out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="aggregate an existing results.csv")
    p.add_argument("--results", default="bench_out/results.csv")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ValueError as exc:
        parser.exit(2, f"boolresp: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
