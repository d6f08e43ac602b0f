"""Outer mining loop, summary statistics and result files.

Each run ``I = 1..max_triclusters`` evolves an island model against the
triclusters accepted in runs ``1..I-1`` and appends its winner. Run seeds
are ``derive_seed(master_seed, I)``.

Result directory layout::

    triclusters.json     per-tricluster coordinates, names and fitness terms
    history.csv          run,deme,generation,best_fitness,mean_fitness,best_msr,best_volume
    summary.csv          avg_msr,avg_volume,avg_genes,avg_conditions,avg_times
    genelists/run_<I>.txt
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .exceptions import ConfigError, InvariantError
from .fitness import (
    FitnessConfig,
    FoundSet,
    Tricluster,
    decode,
    distinction_term,
    msr,
    volume,
    weights_term,
)
from .ga import GaConfig, GenerationRecord, derive_seed
from .islands import DemeExecutor, IslandConfig, IslandRunResult, run_islands

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = ("avg_msr", "avg_volume", "avg_genes", "avg_conditions", "avg_times")
HISTORY_COLUMNS = ("run", "deme", "generation", "best_fitness", "mean_fitness",
                   "best_msr", "best_volume")


@dataclass(frozen=True)
class MiningConfig:
    max_triclusters: int = 20
    ga: GaConfig = field(default_factory=GaConfig)
    fitness: FitnessConfig = field(default_factory=FitnessConfig)
    islands: IslandConfig = field(default_factory=IslandConfig)

    def __post_init__(self):
        if self.max_triclusters < 1:
            raise ConfigError("max_triclusters must be >= 1")


@dataclass(frozen=True)
class TriclusterRecord:
    run: int
    seed: int
    tricluster: Tricluster
    msr: float
    weights_term: float
    distinction_term: float
    fitness: float
    volume: int

    @property
    def sizes(self) -> tuple[int, int, int]:
        return self.tricluster.sizes


@dataclass(frozen=True)
class SummaryStats:
    avg_msr: float
    avg_volume: float
    avg_genes: float
    avg_conditions: float
    avg_times: float

    def as_row(self) -> tuple[float, ...]:
        return tuple(getattr(self, c) for c in SUMMARY_COLUMNS)


@dataclass
class MiningResult:
    triclusters: list[TriclusterRecord]
    histories: list[IslandRunResult]

    @property
    def summary(self) -> SummaryStats:
        return summarize(self)


def summarize(result: MiningResult | Sequence[TriclusterRecord]) -> SummaryStats:
    """Arithmetic means of MSR, volume and axis sizes over the output set."""
    records = getattr(result, "triclusters", result)
    if len(records) == 0:
        raise ValueError("cannot summarize an empty result")
    sizes = np.array([r.sizes for r in records], dtype=np.float64)
    return SummaryStats(
        avg_msr=float(np.mean([r.msr for r in records])),
        avg_volume=float(np.mean([r.volume for r in records])),
        avg_genes=float(sizes[:, 0].mean()),
        avg_conditions=float(sizes[:, 1].mean()),
        avg_times=float(sizes[:, 2].mean()),
    )


def score_record(tensor, tc: Tricluster, found: FoundSet, cfg: FitnessConfig,
                 run: int, seed: int) -> TriclusterRecord:
    m = msr(tensor, tc)
    w = weights_term(tc, cfg)
    d = distinction_term(tc, found, cfg)
    return TriclusterRecord(run, seed, tc, m, w, d, m - w - d, volume(tc))


def mine(tensor, cfg: MiningConfig, executor: DemeExecutor | None = None) -> MiningResult:
    values = np.asarray(getattr(tensor, "values", tensor), dtype=np.float64)
    if executor is None:
        with DemeExecutor(values, cfg.islands.workers()) as ex:
            return mine(values, cfg, ex)

    found = FoundSet(values.shape)
    records, histories = [], []
    for run in range(1, cfg.max_triclusters + 1):
        seed = derive_seed(cfg.islands.master_seed, run)
        isl = replace(cfg.islands, master_seed=seed)
        res = run_islands(values, found, cfg.ga, cfg.fitness, isl, executor)
        tc = res.best.tc
        rec = score_record(values, tc, found, cfg.fitness, run, seed)
        if rec.fitness != res.best.fitness:
            raise InvariantError(
                f"run {run}: cached fitness {res.best.fitness!r} != "
                f"recomputed {rec.fitness!r}")
        if tc in found.members:
            log.warning("run %d returned a tricluster already in the output set", run)
        log.info("run %d: sizes %s msr %.6g fitness %.6g", run, tc.sizes,
                 rec.msr, rec.fitness)
        records.append(rec)
        histories.append(res)
        found = found.add(tc)
    return MiningResult(records, histories)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def triclusters_json(result: MiningResult, tensor) -> str:
    names = (getattr(tensor, "gene_names", None),
             getattr(tensor, "condition_names", None),
             getattr(tensor, "time_labels", None))
    items = []
    for rec in result.triclusters:
        genes, conds, times = decode(rec.tricluster)
        item = {"run": rec.run, "seed": rec.seed,
                "genes": genes, "conditions": conds, "times": times}
        if names[0] is not None:
            item["gene_names"] = [names[0][i] for i in genes]
            item["condition_names"] = [names[1][i] for i in conds]
            item["time_labels"] = [names[2][i] for i in times]
        item.update(msr=rec.msr, weights_term=rec.weights_term,
                    distinction_term=rec.distinction_term, fitness=rec.fitness,
                    volume=rec.volume)
        items.append(item)
    doc = {"shape": list(rec.tricluster.shape), "triclusters": items}
    return json.dumps(doc, indent=2) + "\n"


def history_csv(result: MiningResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HISTORY_COLUMNS)
    for rec, run in zip(result.triclusters, result.histories):
        for h in run.history:
            w.writerow([rec.run, h.deme, h.generation, repr(h.best_fitness),
                        repr(h.mean_fitness), repr(h.best_msr), h.best_volume])
    return buf.getvalue()


def summary_csv(stats: SummaryStats) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    w.writerow([repr(float(x)) for x in stats.as_row()])
    return buf.getvalue()


def parse_summary_csv(text: str) -> SummaryStats:
    rows = list(csv.reader(io.StringIO(text)))
    if len(rows) < 2 or tuple(rows[0]) != SUMMARY_COLUMNS:
        raise ValueError("summary.csv: unexpected layout")
    return SummaryStats(*(float(x) for x in rows[1]))


def parse_history_csv(text: str) -> list[tuple[int, GenerationRecord]]:
    reader = csv.reader(io.StringIO(text))
    if tuple(next(reader)) != HISTORY_COLUMNS:
        raise ValueError("history.csv: unexpected header")
    out = []
    for row in reader:
        out.append((int(row[0]), GenerationRecord(
            int(row[1]), int(row[2]), float(row[3]), float(row[4]),
            float(row[5]), int(row[6]))))
    return out


def records_from_json(text: str) -> list[TriclusterRecord]:
    doc = json.loads(text)
    shape = tuple(doc["shape"])
    return [TriclusterRecord(
        item["run"], item["seed"],
        Tricluster.from_indices(shape, item["genes"], item["conditions"], item["times"]),
        item["msr"], item["weights_term"], item["distinction_term"],
        item["fitness"], item["volume"]) for item in doc["triclusters"]]


def export_gene_lists(result: MiningResult, tensor) -> dict[str, str]:
    """One newline-terminated gene list per tricluster, keyed by file name."""
    names = tensor.gene_names
    return {f"run_{rec.run}.txt": "".join(f"{names[g]}\n" for g in rec.tricluster.genes)
            for rec in result.triclusters}


def write_results(result: MiningResult, tensor, outdir, config_text: str | None = None
                  ) -> Path:
    out = Path(outdir)
    (out / "genelists").mkdir(parents=True, exist_ok=True)
    (out / "triclusters.json").write_text(triclusters_json(result, tensor))
    (out / "history.csv").write_text(history_csv(result))
    (out / "summary.csv").write_text(summary_csv(summarize(result)))
    for name, text in export_gene_lists(result, tensor).items():
        (out / "genelists" / name).write_text(text)
    if config_text is not None:
        (out / "config.txt").write_text(config_text)
    return out
