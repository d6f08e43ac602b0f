"""Single-deme genetic algorithm over tricluster bitstrings.

A population is held as a boolean matrix (one row per individual) with a
parallel fitness vector; every operator works on whole batches so one
generation costs a handful of numpy calls plus one MSR per offspring.

All randomness comes from a ``numpy.random.Generator`` backed by PCG64.
Operators always draw the same amount of randomness for a given population
shape, so a seed fully determines the run.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import ConfigError
from .fitness import FitnessConfig, FoundSet, Tricluster, score_bits, segment_slices

_SEED_MASK = (1 << 64) - 1


def derive_seed(parent: int, index: int) -> int:
    """64-bit child seed for ``(parent, index)``.

    Children are independent of how many siblings exist, so adding demes or
    runs never perturbs the streams of existing ones.
    """
    seq = np.random.SeedSequence(int(parent) & _SEED_MASK, spawn_key=(int(index),))
    return int(seq.generate_state(1, np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & _SEED_MASK))


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 100
    generations: int = 50
    crossover_prob: float = 0.8
    mutation_prob: float = 0.5
    tournament_size: int = 3
    elitism_count: int = 1
    init_density: tuple[float, float, float] = (0.5, 0.5, 0.5)

    def __post_init__(self):
        if self.population_size < 1:
            raise ConfigError("population_size must be >= 1")
        if self.generations < 1:
            raise ConfigError("generations must be >= 1")
        for name in ("crossover_prob", "mutation_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {p}")
        if self.tournament_size < 2:
            raise ConfigError("tournament_size must be >= 2")
        if not 0 <= self.elitism_count < self.population_size:
            raise ConfigError("elitism_count must satisfy 0 <= E < population_size")
        density = tuple(float(x) for x in self.init_density)
        if len(density) != 3 or not all(0.0 < d <= 1.0 for d in density):
            raise ConfigError("init_density needs three values in (0, 1]")
        object.__setattr__(self, "init_density", density)


@dataclass(frozen=True, eq=False)
class Individual:
    tc: Tricluster
    fitness: float = math.nan

    @property
    def evaluated(self) -> bool:
        return not math.isnan(self.fitness)


@dataclass(eq=False)
class Population:
    """Boolean genomes with cached fitness and MSR (NaN when unevaluated)."""

    bits: np.ndarray
    shape: tuple[int, int, int]
    fitness: np.ndarray = field(default=None)
    msr: np.ndarray = field(default=None)

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool)
        n = len(self.bits)
        if self.fitness is None:
            self.fitness = np.full(n, np.nan)
        if self.msr is None:
            self.msr = np.full(n, np.nan)

    def __len__(self):
        return len(self.bits)

    def __getitem__(self, i: int) -> Individual:
        return Individual(Tricluster(self.bits[i], self.shape), float(self.fitness[i]))

    def best_index(self) -> int:
        """Lowest fitness; ties go to the lowest index."""
        return int(np.argmin(self.fitness))

    def worst_index(self) -> int:
        """Highest fitness; ties go to the highest index."""
        rev = self.fitness[::-1]
        return len(self) - 1 - int(np.argmax(rev))

    def best(self) -> Individual:
        return self[self.best_index()]

    def volumes(self) -> np.ndarray:
        g, c, t = segment_slices(self.shape)
        return (self.bits[:, g].sum(axis=1) * self.bits[:, c].sum(axis=1)
                * self.bits[:, t].sum(axis=1))

    def copy(self) -> "Population":
        return Population(self.bits.copy(), self.shape, self.fitness.copy(),
                          self.msr.copy())

    def take(self, order: np.ndarray) -> "Population":
        return Population(self.bits[order], self.shape, self.fitness[order],
                          self.msr[order])


def repair(bits: np.ndarray, shape, min_sizes, rng: np.random.Generator) -> np.ndarray:
    """Set random unset bits in any axis segment below its minimum size.

    Works on one genome or a ``(n, L)`` batch. Valid rows are returned as is
    and consume no randomness.
    """
    for need, extent in zip(min_sizes, shape):
        if need > extent:
            raise ConfigError(f"minimum size {need} exceeds axis extent {extent}")
    bits = np.array(bits, dtype=bool, copy=True)
    rows = bits.reshape(-1, bits.shape[-1])
    for row in rows:
        for sl, need in zip(segment_slices(shape), min_sizes):
            seg = row[sl]
            missing = need - int(seg.sum())
            if missing > 0:
                free = np.flatnonzero(~seg)
                seg[rng.choice(free, missing, replace=False)] = True
    return bits


def init_population(shape, cfg: GaConfig, min_sizes, rng: np.random.Generator) -> Population:
    """Random unevaluated population; each bit is set with its axis density."""
    density = np.concatenate([np.full(n, p) for n, p in zip(shape, cfg.init_density)])
    bits = rng.random((cfg.population_size, sum(shape))) < density
    return Population(repair(bits, shape, min_sizes, rng), tuple(shape))


def evaluate(pop: Population, values: np.ndarray, found: FoundSet,
             cfg: FitnessConfig) -> Population:
    fit, msrs = score_bits(values, pop.bits, found, cfg)
    return Population(pop.bits, pop.shape, fit, msrs)


def tournament_select(fitness: np.ndarray, k: int, rng: np.random.Generator,
                      size: int | None = None):
    """Index of the fittest of ``k`` uniform draws with replacement.

    Ties go to the lowest population index. With ``size`` given, returns an
    array of ``size`` independent winners.
    """
    fitness = np.asarray(fitness)
    n = 1 if size is None else size
    draws = rng.integers(0, len(fitness), size=(n, k))
    scores = fitness[draws]
    best = scores.min(axis=1, keepdims=True)
    winners = np.where(scores == best, draws, len(fitness)).min(axis=1)
    return int(winners[0]) if size is None else winners


def crossover(a: np.ndarray, b: np.ndarray, p_c: float,
              rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Uniform crossover applied to each pair with probability ``p_c``.

    ``a`` and ``b`` are single genomes or matching ``(n, L)`` batches. In a
    crossed pair every position swaps between the children with
    probability 1/2; uncrossed pairs are copied.
    """
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError("parents differ in length")
    a2, b2 = np.atleast_2d(a), np.atleast_2d(b)
    do = rng.random(len(a2)) < p_c
    swap = (rng.random(a2.shape) < 0.5) & do[:, None]
    c1 = np.where(swap, b2, a2)
    c2 = np.where(swap, a2, b2)
    return c1.reshape(a.shape), c2.reshape(b.shape)


def mutate(bits: np.ndarray, p_m: float, rng: np.random.Generator) -> np.ndarray:
    """With probability ``p_m`` per genome, flip each bit with probability 1/L."""
    bits = np.asarray(bits, dtype=bool)
    b2 = np.atleast_2d(bits)
    length = b2.shape[1]
    hit = rng.random(len(b2)) < p_m
    flips = (rng.random(b2.shape) < 1.0 / length) & hit[:, None]
    return (b2 ^ flips).reshape(bits.shape)


def make_offspring(pop: Population, cfg: GaConfig, min_sizes,
                   rng: np.random.Generator) -> np.ndarray:
    """``population_size`` unevaluated children: tournament, crossover,
    mutation, repair."""
    n = cfg.population_size
    pairs = (n + 1) // 2
    parents = tournament_select(pop.fitness, cfg.tournament_size, rng, size=2 * pairs)
    c1, c2 = crossover(pop.bits[parents[0::2]], pop.bits[parents[1::2]],
                       cfg.crossover_prob, rng)
    children = np.empty((2 * pairs, c1.shape[1]), dtype=bool)
    children[0::2] = c1
    children[1::2] = c2
    children = mutate(children[:n], cfg.mutation_prob, rng)
    return repair(children, pop.shape, min_sizes, rng)


def select_survivors(parents: Population, offspring: Population,
                     elitism_count: int) -> Population:
    """(mu + lambda): keep the best ``len(parents)`` of both.

    The top ``elitism_count`` parents are pinned; the rest is a stable sort
    of parents followed by offspring, so parents win ties.
    """
    mu = len(parents)
    elite = np.argsort(parents.fitness, kind="stable")[:elitism_count]
    rest_mask = np.ones(mu, dtype=bool)
    rest_mask[elite] = False
    merged = Population(
        np.concatenate([parents.bits[elite], parents.bits[rest_mask], offspring.bits]),
        parents.shape,
        np.concatenate([parents.fitness[elite], parents.fitness[rest_mask],
                        offspring.fitness]),
        np.concatenate([parents.msr[elite], parents.msr[rest_mask], offspring.msr]),
    )
    e = len(elite)
    tail = e + np.argsort(merged.fitness[e:], kind="stable")[:mu - e]
    order = np.concatenate([np.arange(e), tail])
    kept = merged.take(order)
    return kept.take(np.argsort(kept.fitness, kind="stable"))


def evolve_generation(pop: Population, values: np.ndarray, found: FoundSet,
                      cfg: GaConfig, fcfg: FitnessConfig,
                      rng: np.random.Generator) -> Population:
    """One generation; the returned population is sorted by fitness."""
    children = make_offspring(pop, cfg, fcfg.min_sizes, rng)
    offspring = evaluate(Population(children, pop.shape), values, found, fcfg)
    return select_survivors(pop, offspring, cfg.elitism_count)


@dataclass(frozen=True)
class GenerationRecord:
    deme: int
    generation: int
    best_fitness: float
    mean_fitness: float
    best_msr: float
    best_volume: int


def record(pop: Population, deme: int, generation: int) -> GenerationRecord:
    i = pop.best_index()
    return GenerationRecord(deme, generation, float(pop.fitness[i]),
                            float(pop.fitness.mean()), float(pop.msr[i]),
                            int(pop.volumes()[i]))


def start_population(values: np.ndarray, found: FoundSet, cfg: GaConfig,
                     fcfg: FitnessConfig, rng: np.random.Generator) -> Population:
    fcfg.check_shape(values.shape)
    pop = init_population(values.shape, cfg, fcfg.min_sizes, rng)
    return evaluate(pop, values, found, fcfg)


def run_ga(tensor, found: FoundSet, cfg: GaConfig, fcfg: FitnessConfig,
           seed: int, deme: int = 0) -> tuple[Population, list[GenerationRecord]]:
    """Evolve a single deme for ``cfg.generations`` generations."""
    values = np.asarray(getattr(tensor, "values", tensor), dtype=np.float64)
    rng = make_rng(seed)
    pop = start_population(values, found, cfg, fcfg, rng)
    history = []
    for gen in range(1, cfg.generations + 1):
        pop = evolve_generation(pop, values, found, cfg, fcfg, rng)
        history.append(record(pop, deme, gen))
    return pop, history


def population_digest(pops: Sequence[Population]) -> str:
    """SHA-256 over genomes and fitness values, for golden-run checks."""
    h = hashlib.sha256()
    for pop in pops:
        h.update(np.ascontiguousarray(pop.bits).tobytes())
        h.update(np.ascontiguousarray(pop.fitness, dtype="<f8").tobytes())
    return h.hexdigest()
