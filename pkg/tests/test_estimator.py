import numpy as np
import pytest
from sklearn.base import clone

from conftest import planted_instance
from tricgpga import TriCgPGA, check_tensor
from tricgpga.exceptions import ConfigError
from tricgpga.fitness import jaccard_match


@pytest.fixture(scope="module")
def data():
    return planted_instance(3, dims=(30, 4, 8), shapes=((8, 3, 4),), noise=0.05)


def small(**kw):
    params = dict(n_triclusters=2, population_size=16, generations=8, n_demes=2)
    params.update(kw)
    return TriCgPGA(**params)


def test_get_params_and_clone():
    est = small(w_g=0.5)
    params = est.get_params()
    assert params["w_g"] == 0.5 and params["n_triclusters"] == 2
    assert clone(est).get_params() == params
    est.set_params(generations=3)
    assert est.generations == 3


def test_fit_sets_attributes(data):
    tensor, _ = data
    est = small().fit(tensor.values)
    assert len(est.triclusters_) == 2
    assert est.genes_.shape == (2, 30)
    assert est.conditions_.shape == (2, 4) and est.times_.shape == (2, 8)
    g, c, t = est.get_indices(0)
    assert est.get_shape(0) == (len(g), len(c), len(t))
    sub = est.get_subtensor(0, tensor.values)
    assert sub.shape == est.get_shape(0)
    assert est.summary_.avg_msr == pytest.approx(est.msr_.mean())


def test_accepts_expression_tensor_and_is_deterministic(data):
    tensor, _ = data
    a = small(random_state=4).fit(tensor)
    b = small(random_state=4).fit(tensor.values)
    assert np.array_equal(a.genes_, b.genes_)
    assert np.array_equal(a.fitness_, b.fitness_)


def test_n_jobs_does_not_change_result(data):
    tensor, _ = data
    a = small(n_jobs=None).fit(tensor)
    b = small(n_jobs=2).fit(tensor)
    assert np.array_equal(a.genes_, b.genes_) and np.array_equal(a.fitness_, b.fitness_)


def test_recovers_planted_block_with_small_weights(data):
    tensor, truth = data
    est = TriCgPGA(n_triclusters=1, generations=60, w_g=0.03, w_c=0.03, w_t=0.03,
                   min_genes=2, min_conditions=2, min_times=3, random_state=1)
    est.fit(tensor)
    assert jaccard_match(est.triclusters_[0], truth[0])[0] >= 0.8


@pytest.mark.parametrize("bad", [np.zeros((3, 3)), np.full((2, 2, 2), np.nan),
                                 np.zeros((2, 0, 2))])
def test_check_tensor_rejects(bad):
    with pytest.raises(ValueError):
        check_tensor(bad)


def test_invalid_params_raise_on_fit(data):
    with pytest.raises(ConfigError):
        small(crossover_prob=2.0).fit(data[0])


def test_unfitted():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        TriCgPGA().get_indices(0)
