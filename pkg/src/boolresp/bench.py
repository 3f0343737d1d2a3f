"""Benchmark orchestration: corpus, ground truth, explainers, metrics, reports."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import __version__, kernels
from .baselines import PAYOFFS, random_attribution, shapley_exact, shapley_sampled
from .brex import BrexConfig, brex_explain
from .formula import (
    FAMILIES,
    MONOTONIC,
    NONMONOTONIC,
    And,
    Formula,
    Or,
    Var,
    Xor,
    chain,
    enumerate_assignments,
    meta,
    random_formula,
    render,
    sample_assignments,
    to_bits,
)
from .ground_truth import BRUTE_FORCE_GUARD, GroundTruth
from .metrics import AggregateStat, aggregate, jsd, normalize, topk_perfect_overlap
from .oracle import FormulaOracle

EXPLAINERS = ("brex", "shapley_exact", "shapley_sampled", "random")
HANDCRAFTED = "handcrafted"
PRESETS = ("paper-jsd", "paper-topk")

RESULT_COLUMNS = ["formula_id", "family", "arity", "assignment", "explainer_id", "jsd", "topk_perfect", "oracle_calls"]
TIMING_COLUMNS = ["formula_id", "assignment", "explainer_id", "wall_time_us"]
STAT_COLUMNS = ["mean", "std", "ci95", "n"]


@dataclass(frozen=True)
class ExperimentConfig:
    width: int = 12
    arities: tuple = tuple(range(3, 11))
    formulae_per_arity: int = 10
    family: str = "both"
    read_once: bool = True
    sample: Optional[int] = None
    paper_faithful: bool = False
    explainers: tuple = EXPLAINERS
    seed: int = 0
    corpus: str = "random"
    brex: BrexConfig = field(default_factory=BrexConfig)
    shapley_payoff: str = "completion"
    shapley_permutations: int = 25
    brute_force_guard: Optional[int] = BRUTE_FORCE_GUARD
    cache_ground_truth: bool = True

    def __post_init__(self):
        if not self.arities or any(not 1 <= a <= self.width for a in self.arities):
            raise ValueError(f"arities must lie in [1, {self.width}]")
        if self.formulae_per_arity < 1:
            raise ValueError("formulae_per_arity must be at least 1")
        if self.family not in FAMILIES + ("both",):
            raise ValueError(f"unknown family {self.family!r}")
        unknown = set(self.explainers) - set(EXPLAINERS)
        if unknown:
            raise ValueError(f"unknown explainer(s): {', '.join(sorted(unknown))}")
        if self.shapley_payoff not in PAYOFFS:
            raise ValueError(f"unknown payoff {self.shapley_payoff!r}")
        if self.corpus not in ("random", "fixed"):
            raise ValueError(f"unknown corpus kind {self.corpus!r}")
        if self.sample is not None and self.sample < 1:
            raise ValueError("sample must be positive")

    @property
    def families(self) -> tuple:
        return FAMILIES if self.family == "both" else (self.family,)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["arities"] = list(self.arities)
        d["explainers"] = list(self.explainers)
        return d


def preset(name: str, **overrides) -> ExperimentConfig:
    """Named configurations for the two standard experiments."""
    if name == "paper-jsd":
        base = ExperimentConfig()
    elif name == "paper-topk":
        base = ExperimentConfig(corpus="fixed", explainers=("brex", "shapley_exact", "shapley_sampled"))
    else:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return replace(base, **overrides)


@dataclass(frozen=True)
class CorpusEntry:
    formula_id: str
    family: str
    arity: int
    formula: Formula
    key: tuple


@dataclass(frozen=True)
class ResultRecord:
    formula_id: str
    family: str
    arity: int
    assignment: str
    explainer_id: str
    jsd: float
    topk_perfect: bool
    oracle_calls: int
    wall_time_us: int = 0

    def sort_key(self):
        return (self.family, self.arity, self.formula_id, self.assignment, self.explainer_id)


# --------------------------------------------------------------------------
# corpus


HANDCRAFTED_FORMULAE = {
    "and": And(Var(0), Var(1)),
    "or": Or(Var(0), Var(1)),
    "xor": Xor(Var(0), Var(1)),
    "xor_and_xor": And(Xor(Var(0), Var(1)), Xor(Var(2), Var(3))),
}

_FAMILY_CODE = {MONOTONIC: 0, NONMONOTONIC: 1, HANDCRAFTED: 2}
_FAMILY_TAG = {MONOTONIC: "mono", NONMONOTONIC: "nonmono"}


def build_corpus(config: ExperimentConfig) -> list:
    entries = []
    if config.corpus == "fixed":
        operators = {MONOTONIC: (And, Or), NONMONOTONIC: (Xor, And)}
        for fam in config.families:
            for arity in config.arities:
                fid = f"{_FAMILY_TAG[fam]}-chain-a{arity:02d}"
                entries.append(CorpusEntry(fid, fam, arity, chain(arity, operators[fam]), (_FAMILY_CODE[fam], arity, 0)))
        for i, (name, f) in enumerate(HANDCRAFTED_FORMULAE.items()):
            if meta(f).arity <= config.width:
                entries.append(CorpusEntry(name, HANDCRAFTED, meta(f).arity, f, (_FAMILY_CODE[HANDCRAFTED], 0, i)))
        return entries
    for fam in config.families:
        for arity in config.arities:
            for i in range(config.formulae_per_arity):
                key = (_FAMILY_CODE[fam], arity, i)
                rng = np.random.default_rng([config.seed, *key])
                f = random_formula(arity, fam, config.read_once, rng, width=config.width)
                fid = f"{_FAMILY_TAG[fam]}-a{arity:02d}-{i:02d}"
                entries.append(CorpusEntry(fid, fam, arity, f, key))
    return entries


def assignments_for(entry: CorpusEntry, config: ExperimentConfig) -> list:
    used = None if config.paper_faithful else meta(entry.formula).used_vars
    if config.sample is None:
        return list(enumerate_assignments(config.width, used))
    rng = np.random.default_rng([config.seed, 1, *entry.key])
    return sample_assignments(config.width, used, config.sample, rng)


# --------------------------------------------------------------------------
# running


def _seed(config: ExperimentConfig, *key) -> int:
    return int(np.random.SeedSequence([config.seed, *key]).generate_state(1)[0])


def run_explainer(name: str, oracle: FormulaOracle, x: Sequence, config: ExperimentConfig, seed: int) -> np.ndarray:
    if name == "brex":
        return brex_explain(oracle, x, replace(config.brex, seed=seed))
    if name == "shapley_exact":
        return shapley_exact(oracle, x, payoff=config.shapley_payoff)
    if name == "shapley_sampled":
        rng = np.random.default_rng(seed)
        return shapley_sampled(oracle, x, config.shapley_permutations, rng, payoff=config.shapley_payoff)
    if name == "random":
        return random_attribution(len(x), np.random.default_rng(seed))
    raise ValueError(f"unknown explainer {name!r}")


def run_experiment(
    config: ExperimentConfig,
    progress: Optional[Callable[[CorpusEntry, int], None]] = None,
) -> list:
    """Every (formula, assignment, explainer) record, sorted by key."""
    records = []
    for entry in build_corpus(config):
        truth = GroundTruth(entry.formula, guard=config.brute_force_guard)
        oracle = FormulaOracle(entry.formula, config.width)
        cases = assignments_for(entry, config)
        if progress is not None:
            progress(entry, len(cases))
        for a_idx, x in enumerate(cases):
            if config.cache_ground_truth:
                gt = truth(x)
            else:
                gt = GroundTruth(entry.formula, guard=config.brute_force_guard)(x)
            if not gt.support():
                continue  # only a constant formula has no cause
            target = normalize(gt.to_array())
            bits = to_bits(x)
            for e_idx, name in enumerate(config.explainers):
                before = oracle.calls
                start = time.perf_counter_ns()
                scores = run_explainer(name, oracle, x, config, _seed(config, *entry.key, a_idx, e_idx))
                elapsed = (time.perf_counter_ns() - start) // 1000
                records.append(ResultRecord(
                    formula_id=entry.formula_id,
                    family=entry.family,
                    arity=entry.arity,
                    assignment=bits,
                    explainer_id=name,
                    jsd=jsd(normalize(scores), target),
                    topk_perfect=topk_perfect_overlap(scores, gt),
                    oracle_calls=oracle.calls - before,
                    wall_time_us=int(elapsed),
                ))
    records.sort(key=ResultRecord.sort_key)
    return records


# --------------------------------------------------------------------------
# reporting


@dataclass
class ReportTable:
    group_by: tuple
    jsd: dict
    topk: dict

    def keys(self):
        return sorted(self.jsd)


def report(records: Sequence[ResultRecord], group_by: Sequence[str] = ("family", "arity", "explainer_id")) -> ReportTable:
    if not records:
        raise ValueError("no records to report")
    groups: dict = {}
    for r in records:
        key = tuple(getattr(r, g) for g in group_by)
        groups.setdefault(key, []).append(r)
    return ReportTable(
        group_by=tuple(group_by),
        jsd={k: aggregate([r.jsd for r in rs]) for k, rs in groups.items()},
        topk={k: aggregate([1.0 if r.topk_perfect else 0.0 for r in rs]) for k, rs in groups.items()},
    )


def table_csv(table: ReportTable, metric: str) -> str:
    stats = getattr(table, metric)
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(list(table.group_by) + STAT_COLUMNS)
    for key in table.keys():
        s = stats[key]
        w.writerow(list(key) + [repr(s.mean), repr(s.std), repr(s.ci95_half_width), s.n])
    return out.getvalue()


def read_table_csv(text: str) -> dict:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    n_keys = len(header) - len(STAT_COLUMNS)
    out = {}
    for row in body:
        key = tuple(int(v) if header[i] == "arity" else v for i, v in enumerate(row[:n_keys]))
        mean, std, ci, n = row[n_keys:]
        out[key] = AggregateStat(float(mean), float(std), float(ci), int(n))
    return out


def render_text(table: ReportTable, metric: str) -> str:
    """Explainers as rows and arities as columns, one block per family."""
    stats = getattr(table, metric)
    if table.group_by != ("family", "arity", "explainer_id"):
        lines = ["  ".join(table.group_by) + "  mean  ci95"]
        for key in table.keys():
            s = stats[key]
            lines.append("  ".join(str(k) for k in key) + f"  {s.mean:.3f}  {s.ci95_half_width:.3f}")
        return "\n".join(lines)
    title = {"jsd": "JSD from ground truth", "topk": "top-k accuracy"}[metric]
    blocks = []
    for fam in sorted({k[0] for k in stats}):
        arities = sorted({k[1] for k in stats if k[0] == fam})
        explainers = sorted({k[2] for k in stats if k[0] == fam})
        name_w = max(len(e) for e in explainers + ["explainer"])
        lines = [f"{title}: {fam}", f"{'explainer':<{name_w}} | " + " ".join(f"{a:>7d}" for a in arities)]
        lines.append("-" * len(lines[-1]))
        for e in explainers:
            cells = []
            for a in arities:
                s = stats.get((fam, a, e))
                cells.append(f"{s.mean:7.3f}" if s else " " * 7)
            lines.append(f"{e:<{name_w}} | " + " ".join(cells))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


def plot_data_csv(table: ReportTable) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["family", "arity", "explainer", "mean", "ci95"])
    for key in table.keys():
        s = table.jsd[key]
        w.writerow([key[0], key[1], key[2], repr(s.mean), repr(s.ci95_half_width)])
    return out.getvalue()


def emit_plot_data(table: ReportTable, path) -> None:
    with open(path, "w") as fh:
        fh.write(plot_data_csv(table))


# --------------------------------------------------------------------------
# persistence


def results_csv(records: Iterable[ResultRecord]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in records:
        w.writerow([r.formula_id, r.family, r.arity, r.assignment, r.explainer_id,
                    repr(r.jsd), int(r.topk_perfect), r.oracle_calls])
    return out.getvalue()


def timings_csv(records: Iterable[ResultRecord]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(TIMING_COLUMNS)
    for r in records:
        w.writerow([r.formula_id, r.assignment, r.explainer_id, r.wall_time_us])
    return out.getvalue()


def read_results(path, timings_path=None) -> list:
    timings = {}
    if timings_path is not None and os.path.exists(timings_path):
        with open(timings_path, newline="") as fh:
            for row in csv.DictReader(fh):
                timings[(row["formula_id"], row["assignment"], row["explainer_id"])] = int(row["wall_time_us"])
    with open(path, newline="") as fh:
        records = []
        for row in csv.DictReader(fh):
            key = (row["formula_id"], row["assignment"], row["explainer_id"])
            records.append(ResultRecord(
                formula_id=row["formula_id"],
                family=row["family"],
                arity=int(row["arity"]),
                assignment=row["assignment"],
                explainer_id=row["explainer_id"],
                jsd=float(row["jsd"]),
                topk_perfect=row["topk_perfect"] == "1",
                oracle_calls=int(row["oracle_calls"]),
                wall_time_us=timings.get(key, 0),
            ))
    return records


def formulae_csv(entries: Iterable[CorpusEntry]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["formula_id", "family", "arity", "read_once", "formula"])
    for e in entries:
        w.writerow([e.formula_id, e.family, e.arity, int(meta(e.formula).read_once), render(e.formula)])
    return out.getvalue()


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def write_reports(records: Sequence[ResultRecord], out_dir) -> dict:
    """Aggregate tables and plot data; returns file name -> contents."""
    main = [r for r in records if r.family != HANDCRAFTED]
    crafted = [r for r in records if r.family == HANDCRAFTED]
    files = {}
    if main:
        table = report(main)
        files["report_jsd.csv"] = table_csv(table, "jsd")
        files["report_topk.csv"] = table_csv(table, "topk")
        files["plot_data.csv"] = plot_data_csv(table)
    if crafted:
        table = report(crafted, ("formula_id", "explainer_id"))
        files["report_handcrafted_topk.csv"] = table_csv(table, "topk")
        files["report_handcrafted_jsd.csv"] = table_csv(table, "jsd")
    os.makedirs(out_dir, exist_ok=True)
    for name, text in files.items():
        with open(os.path.join(out_dir, name), "w") as fh:
            fh.write(text)
    return files


def write_outputs(config: ExperimentConfig, records: Sequence[ResultRecord], out_dir) -> dict:
    files = {
        "results.csv": results_csv(records),
        "timings.csv": timings_csv(records),
        "formulae.csv": formulae_csv(build_corpus(config)),
    }
    os.makedirs(out_dir, exist_ok=True)
    for name, text in files.items():
        with open(os.path.join(out_dir, name), "w") as fh:
            fh.write(text)
    files.update(write_reports(records, out_dir))
    deterministic = {k: v for k, v in files.items() if k != "timings.csv"}
    manifest = {
        "config": config.to_dict(),
        "seed": config.seed,
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "files": {k: _sha256(v) for k, v in sorted(deterministic.items())},
        "content_hash": _sha256("".join(_sha256(v) for _, v in sorted(deterministic.items()))),
    }
    text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        fh.write(text)
    files["manifest.json"] = text
    return files


def config_from_dict(d: dict) -> ExperimentConfig:
    d = dict(d)
    d["arities"] = tuple(d["arities"])
    d["explainers"] = tuple(d["explainers"])
    d["brex"] = BrexConfig(**d["brex"])
    known = {f.name for f in fields(ExperimentConfig)}
    return ExperimentConfig(**{k: v for k, v in d.items() if k in known})
