"""scikit-learn style estimator around the mining loop."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_array, check_is_fitted

from .data import ExpressionTensor
from .fitness import FitnessConfig
from .ga import GaConfig
from .islands import IslandConfig
from .mining import MiningConfig, MiningResult, mine


def check_tensor(X) -> np.ndarray:
    """Validate a genes x conditions x times input and return it as float64."""
    if isinstance(X, ExpressionTensor):
        return X.values
    X = check_array(X, dtype=np.float64, allow_nd=True, ensure_all_finite=True,
                    ensure_2d=False, input_name="X")
    if X.ndim != 3:
        raise ValueError(f"Expected a 3D array (genes, conditions, times), got "
                         f"{X.ndim}D input.")
    if min(X.shape) < 1:
        raise ValueError(f"Found empty axis in input of shape {X.shape}.")
    return X


def _seed(random_state) -> int:
    if isinstance(random_state, (int, np.integer)):
        return int(random_state)
    if random_state is None:
        return int(np.random.SeedSequence().generate_state(1, np.uint64)[0])
    rs = check_random_state(random_state)
    return int(rs.randint(0, 2**32, dtype=np.int64))


class TriCgPGA(BaseEstimator):
    """Mine coherent triclusters with a coarse-grained island-model GA.

    Each of ``n_triclusters`` runs evolves ``n_demes`` populations of
    bitstring-encoded triclusters under the fitness
    ``msr - weights - distinction`` and keeps the overall best; the
    distinction term rewards coordinates not used by earlier runs.

    Parameters
    ----------
    n_triclusters : int, default=20
        Number of mining runs, one tricluster each.
    population_size : int, default=100
        Individuals per deme.
    generations : int, default=50
    n_demes : int, default=4
    migration_interval : int, default=10
        The best individual of the best deme replaces the worst of every
        other deme after each multiple of this many generations.
    crossover_prob, mutation_prob : float, default=0.8, 0.5
    tournament_size : int, default=3
    elitism_count : int, default=1
    w_g, w_c, w_t : float, default=0.8, 0.1, 0.1
        Size rewards per selected gene, condition and time point.
    wd_g, wd_c, wd_t : float, default=1.0, 0.0, 0.0
        Distinction weights per axis.
    min_genes, min_conditions, min_times : int, default=1
    init_density : tuple of float, default=(0.5, 0.5, 0.5)
        Probability that a bit is set in the initial population, per axis.
    n_jobs : int, default=None
        Worker processes for the demes; ``None`` means 1, ``-1`` one per
        deme up to the CPU count. Results do not depend on this value.
    random_state : int, RandomState instance or None, default=0

    Attributes
    ----------
    result_ : MiningResult
    triclusters_ : list of Tricluster
    genes_, conditions_, times_ : ndarray of bool
        Membership masks, one row per tricluster.
    msr_, fitness_ : ndarray of float
    """

    def __init__(self, n_triclusters=20, *, population_size=100, generations=50,
                 n_demes=4, migration_interval=10, crossover_prob=0.8,
                 mutation_prob=0.5, tournament_size=3, elitism_count=1,
                 w_g=0.8, w_c=0.1, w_t=0.1, wd_g=1.0, wd_c=0.0, wd_t=0.0,
                 min_genes=1, min_conditions=1, min_times=1,
                 init_density=(0.5, 0.5, 0.5), n_jobs=None, random_state=0):
        self.n_triclusters = n_triclusters
        self.population_size = population_size
        self.generations = generations
        self.n_demes = n_demes
        self.migration_interval = migration_interval
        self.crossover_prob = crossover_prob
        self.mutation_prob = mutation_prob
        self.tournament_size = tournament_size
        self.elitism_count = elitism_count
        self.w_g = w_g
        self.w_c = w_c
        self.w_t = w_t
        self.wd_g = wd_g
        self.wd_c = wd_c
        self.wd_t = wd_t
        self.min_genes = min_genes
        self.min_conditions = min_conditions
        self.min_times = min_times
        self.init_density = init_density
        self.n_jobs = n_jobs
        self.random_state = random_state

    def _mining_config(self) -> MiningConfig:
        threads = 1 if self.n_jobs is None else ("auto" if self.n_jobs == -1
                                                 else self.n_jobs)
        return MiningConfig(
            max_triclusters=self.n_triclusters,
            ga=GaConfig(self.population_size, self.generations, self.crossover_prob,
                        self.mutation_prob, self.tournament_size, self.elitism_count,
                        tuple(self.init_density)),
            fitness=FitnessConfig(self.w_g, self.w_c, self.w_t, self.wd_g, self.wd_c,
                                  self.wd_t, self.min_genes, self.min_conditions,
                                  self.min_times),
            islands=IslandConfig(self.n_demes, self.migration_interval, threads,
                                 _seed(self.random_state)),
        )

    def fit(self, X, y=None):
        """Mine triclusters from ``X`` of shape (genes, conditions, times)."""
        values = check_tensor(X)
        cfg = self._mining_config()
        result: MiningResult = mine(values, cfg)
        self.result_ = result
        self.triclusters_ = [r.tricluster for r in result.triclusters]
        self.genes_ = np.array([tc.gene_mask for tc in self.triclusters_])
        self.conditions_ = np.array([tc.condition_mask for tc in self.triclusters_])
        self.times_ = np.array([tc.time_mask for tc in self.triclusters_])
        self.msr_ = np.array([r.msr for r in result.triclusters])
        self.fitness_ = np.array([r.fitness for r in result.triclusters])
        self.shape_in_ = values.shape
        return self

    @property
    def summary_(self):
        check_is_fitted(self, "result_")
        return self.result_.summary

    def get_indices(self, i):
        check_is_fitted(self, "result_")
        return (np.flatnonzero(self.genes_[i]), np.flatnonzero(self.conditions_[i]),
                np.flatnonzero(self.times_[i]))

    def get_shape(self, i):
        return tuple(len(ix) for ix in self.get_indices(i))

    def get_subtensor(self, i, X):
        """Values of tricluster ``i`` cut out of ``X``."""
        values = check_tensor(X)
        if values.shape != self.shape_in_:
            raise ValueError(f"X has shape {values.shape}, fitted on {self.shape_in_}")
        return values[np.ix_(*self.get_indices(i))]
