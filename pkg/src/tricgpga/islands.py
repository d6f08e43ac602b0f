"""Coarse-grained island model: demes, barrier migration, final selection.

Demes evolve independently between migration barriers. Each deme carries
its own PCG64 stream, and a segment of generations is a pure function of
``(deme state, tensor, found set, configs)``, so running the segments in
worker processes or inline yields identical results.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError
from .fitness import FitnessConfig, FoundSet
from .ga import (
    GaConfig,
    GenerationRecord,
    Individual,
    Population,
    derive_seed,
    evolve_generation,
    make_rng,
    record,
    start_population,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IslandConfig:
    num_demes: int = 4
    migration_interval: int = 10
    threads: int | str = "auto"
    master_seed: int = 0

    def __post_init__(self):
        if self.num_demes < 1:
            raise ConfigError("num_demes must be >= 1")
        if self.migration_interval < 1:
            raise ConfigError("migration_interval must be >= 1")
        if self.threads != "auto" and (not isinstance(self.threads, int)
                                       or self.threads < 1):
            raise ConfigError("threads must be a positive integer or 'auto'")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")

    def workers(self) -> int:
        if self.threads == "auto":
            return max(1, min(self.num_demes, os.cpu_count() or 1))
        return self.threads


@dataclass
class Deme:
    index: int
    pop: Population
    rng: np.random.Generator


@dataclass(frozen=True)
class Migration:
    generation: int
    source: int
    destinations: tuple[int, ...]


@dataclass
class IslandRunResult:
    best: Individual
    best_deme: int
    msr: float
    history: list[GenerationRecord] = field(default_factory=list)
    migration_log: list[Migration] = field(default_factory=list)


def migrate(pops: list[Population], generation: int = 0
            ) -> tuple[list[Population], Migration | None]:
    """Copy the best individual of the best deme over the worst of every other.

    Returns the new populations and the migration (``None`` for one deme).
    The source deme is left untouched.
    """
    if len(pops) < 2:
        return list(pops), None
    bests = np.array([p.fitness[p.best_index()] for p in pops])
    source = int(np.argmin(bests))
    src = pops[source]
    j = src.best_index()
    out = []
    for d, pop in enumerate(pops):
        if d == source:
            out.append(pop)
            continue
        pop = pop.copy()
        w = pop.worst_index()
        pop.bits[w] = src.bits[j]
        pop.fitness[w] = src.fitness[j]
        pop.msr[w] = src.msr[j]
        out.append(pop)
    dest = tuple(d for d in range(len(pops)) if d != source)
    return out, Migration(generation, source, dest)


def _advance(values, deme: Deme, first_gen: int, last_gen: int, found: FoundSet,
             ga_cfg: GaConfig, fit_cfg: FitnessConfig):
    """Evolve ``deme`` through generations ``first_gen..last_gen`` inclusive."""
    pop, rng = deme.pop, deme.rng
    records = []
    for gen in range(first_gen, last_gen + 1):
        pop = evolve_generation(pop, values, found, ga_cfg, fit_cfg, rng)
        records.append(record(pop, deme.index, gen))
    return Deme(deme.index, pop, rng), records


def _start(values, index: int, seed: int, found, ga_cfg, fit_cfg) -> Deme:
    rng = make_rng(seed)
    return Deme(index, start_population(values, found, ga_cfg, fit_cfg, rng), rng)


_worker_values = None


def _init_worker(values):
    global _worker_values
    _worker_values = values


def _call_in_worker(fn, *args):
    return fn(_worker_values, *args)


class DemeExecutor:
    """Runs per-deme jobs inline or on a process pool bound to one tensor.

    Use as a context manager. Jobs are collected in submission order, so
    output never depends on scheduling.
    """

    def __init__(self, values: np.ndarray, workers: int = 1):
        self.values = values
        self.workers = workers
        self._pool = None

    def __enter__(self):
        if self.workers > 1:
            self._pool = ProcessPoolExecutor(
                max_workers=self.workers, initializer=_init_worker,
                initargs=(np.asarray(self.values),))
        return self

    def __exit__(self, *exc):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def map(self, fn, arglists):
        if self._pool is None:
            return [fn(self.values, *args) for args in arglists]
        futures = [self._pool.submit(_call_in_worker, fn, *args) for args in arglists]
        return [f.result() for f in futures]


def run_islands(tensor, found: FoundSet, ga_cfg: GaConfig, fit_cfg: FitnessConfig,
                isl_cfg: IslandConfig, executor: DemeExecutor | None = None
                ) -> IslandRunResult:
    """Evolve ``num_demes`` demes with barrier migration and return the best.

    Deme ``d`` is seeded with ``derive_seed(master_seed, d)``. Migration
    happens after every generation that is a positive multiple of
    ``migration_interval`` and is not the last one.
    """
    values = np.asarray(getattr(tensor, "values", tensor), dtype=np.float64)
    if found.shape != values.shape:
        raise ConfigError("found set shape differs from tensor shape")
    fit_cfg.check_shape(values.shape)

    if executor is None:
        with DemeExecutor(values, isl_cfg.workers()) as ex:
            return run_islands(values, found, ga_cfg, fit_cfg, isl_cfg, ex)

    seeds = [derive_seed(isl_cfg.master_seed, d) for d in range(isl_cfg.num_demes)]
    demes = executor.map(_start, [(d, s, found, ga_cfg, fit_cfg)
                                  for d, s in enumerate(seeds)])
    history: list[GenerationRecord] = []
    migrations: list[Migration] = []
    G, step = ga_cfg.generations, isl_cfg.migration_interval
    first = 1
    while first <= G:
        last = min(first + step - 1, G)
        results = executor.map(_advance, [(deme, first, last, found, ga_cfg, fit_cfg)
                                          for deme in demes])
        demes = [deme for deme, _ in results]
        for _, recs in results:
            history.extend(recs)
        for k, gen in enumerate(range(first, last + 1)):
            log.info("generation %d best fitness %s", gen,
                     " ".join(f"{recs[k].best_fitness:.6g}" for _, recs in results))
        if last < G and isl_cfg.num_demes > 1:
            pops, mig = migrate([d.pop for d in demes], last)
            demes = [Deme(d.index, p, d.rng) for d, p in zip(demes, pops)]
            migrations.append(mig)
        first = last + 1

    history.sort(key=lambda r: (r.deme, r.generation))
    bests = [d.pop.best_index() for d in demes]
    fits = np.array([d.pop.fitness[i] for d, i in zip(demes, bests)])
    win = int(np.argmin(fits))
    pop = demes[win].pop
    return IslandRunResult(pop[bests[win]], win, float(pop.msr[bests[win]]),
                           history, migrations)
