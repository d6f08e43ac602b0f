import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import planted_instance
from tricgpga.exceptions import ConfigError
from tricgpga.fitness import FitnessConfig, FoundSet
from tricgpga.ga import GaConfig, Population, derive_seed, run_ga
from tricgpga.islands import IslandConfig, migrate, run_islands


def make_pop(fits, length=6, seed=0):
    rng = np.random.default_rng(seed)
    bits = rng.random((len(fits), length)) < 0.5
    bits[:, [0, 2, 4]] = True
    return Population(bits, (2, 2, 2), np.array(fits, float), np.array(fits, float) + 10)


def test_single_deme_noop():
    pop = make_pop([1.0, 2.0])
    out, mig = migrate([pop])
    assert mig is None and out[0] is pop


def test_three_deme_example():
    pops = [make_pop([-5, 0, 3], seed=1), make_pop([-9, -1, 4], seed=2),
            make_pop([-2, 7, 1], seed=3)]
    out, mig = migrate(pops, generation=10)
    assert mig.source == 1 and mig.destinations == (0, 2) and mig.generation == 10
    best = pops[1].bits[0]
    for d in (0, 2):
        assert len(out[d]) == 3
        assert any(np.array_equal(row, best) for row in out[d].bits)
        assert out[d].fitness.min() == -9
    assert out[1] is pops[1]
    # worst slots replaced: deme 0 loses fitness 3, deme 2 loses 7
    assert sorted(out[0].fitness.tolist()) == [-9, -5, 0]
    assert sorted(out[2].fitness.tolist()) == [-9, -2, 1]


def test_worst_tie_goes_to_highest_index():
    pops = [make_pop([0.0], seed=0), make_pop([1.0, 5.0, 5.0], seed=1)]
    out, _ = migrate(pops)
    assert out[1].fitness.tolist() == [1.0, 5.0, 0.0]


@settings(max_examples=500, deadline=None)
@given(st.lists(st.lists(st.integers(-20, 20), min_size=1, max_size=6),
                min_size=2, max_size=5), st.integers(0, 1000))
def test_migration_properties(fit_lists, seed):
    pops = [make_pop(f, seed=seed + i) for i, f in enumerate(fit_lists)]
    bests = [min(f) for f in fit_lists]
    out, mig = migrate(pops)
    assert mig.source == int(np.argmin(bests))
    assert min(p.fitness.min() for p in out) == min(bests)
    for d, (before, after) in enumerate(zip(pops, out)):
        assert len(after) == len(before)
        assert after.fitness.min() <= before.fitness.min()
        if d == mig.source:
            assert np.array_equal(after.bits, before.bits)


@pytest.fixture(scope="module")
def small():
    tensor, _ = planted_instance(1, dims=(20, 4, 6), shapes=((5, 2, 3),))
    return tensor


def test_one_deme_equals_plain_ga(small):
    ga = GaConfig(population_size=20, generations=15)
    fit = FitnessConfig()
    found = FoundSet(small.shape)
    res = run_islands(small, found, ga, fit, IslandConfig(num_demes=1, threads=1,
                                                           master_seed=77))
    pop, hist = run_ga(small, found, ga, fit, seed=derive_seed(77, 0))
    assert res.best.tc == pop.best().tc and res.best.fitness == pop.best().fitness
    assert res.history == hist
    assert res.migration_log == []


def test_interval_beyond_generations(small):
    res = run_islands(small, FoundSet(small.shape), GaConfig(population_size=10, generations=8),
                      FitnessConfig(), IslandConfig(num_demes=3, migration_interval=9,
                                                    threads=1))
    assert res.migration_log == []


@pytest.mark.parametrize("generations, interval", [(20, 5), (21, 5), (7, 1), (10, 3)])
def test_migration_count_and_history_coverage(small, generations, interval):
    res = run_islands(small, FoundSet(small.shape),
                      GaConfig(population_size=8, generations=generations),
                      FitnessConfig(), IslandConfig(num_demes=3,
                                                    migration_interval=interval, threads=1))
    assert len(res.migration_log) == (generations - 1) // interval
    assert [m.generation for m in res.migration_log] == list(
        range(interval, generations, interval))
    keys = [(h.deme, h.generation) for h in res.history]
    assert sorted(keys) == [(d, g) for d in range(3) for g in range(1, generations + 1)]


def test_global_best_monotone_and_final_selection(small):
    res = run_islands(small, FoundSet(small.shape), GaConfig(population_size=10, generations=25),
                      FitnessConfig(), IslandConfig(num_demes=4, migration_interval=4,
                                                    threads=1, master_seed=5))
    per_gen = {}
    for h in res.history:
        per_gen.setdefault(h.generation, []).append(h.best_fitness)
        if h.generation > 1:
            prev = next(x for x in res.history
                        if x.deme == h.deme and x.generation == h.generation - 1)
            assert h.best_fitness <= prev.best_fitness
    glob = [min(per_gen[g]) for g in sorted(per_gen)]
    assert all(b <= a for a, b in zip(glob, glob[1:]))
    assert res.best.fitness == glob[-1]


def test_thread_count_independence(small):
    args = (small, FoundSet(small.shape), GaConfig(population_size=12, generations=12),
            FitnessConfig())
    a = run_islands(*args, IslandConfig(num_demes=4, migration_interval=3, threads=1,
                                        master_seed=9))
    b = run_islands(*args, IslandConfig(num_demes=4, migration_interval=3, threads=4,
                                        master_seed=9))
    assert a.best.tc == b.best.tc and a.best.fitness == b.best.fitness
    assert a.history == b.history and a.migration_log == b.migration_log


def test_adding_demes_keeps_existing_streams(small):
    ga = GaConfig(population_size=10, generations=4)
    cfg = dict(migration_interval=100, threads=1, master_seed=3)
    a = run_islands(small, FoundSet(small.shape), ga, FitnessConfig(),
                    IslandConfig(num_demes=2, **cfg))
    b = run_islands(small, FoundSet(small.shape), ga, FitnessConfig(),
                    IslandConfig(num_demes=3, **cfg))
    assert [h for h in b.history if h.deme < 2] == a.history


@pytest.mark.parametrize("kwargs", [dict(num_demes=0), dict(migration_interval=0),
                                    dict(threads=0), dict(threads="many"),
                                    dict(master_seed=-1)])
def test_invalid_config(kwargs):
    with pytest.raises(ConfigError):
        IslandConfig(**kwargs)
