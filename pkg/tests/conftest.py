from contextlib import contextmanager

import numpy as np
import pytest

from tricgpga.data import (
    Background,
    PlantedBlock,
    SyntheticSpec,
    generate_synthetic,
    make_planted_block,
)
from tricgpga.fitness import FitnessConfig

# Weights under which a 10x3x5 additive block in a 50x4x10 uniform[0, 10]
# background is the fitness optimum (the published weights reward size so
# strongly that the whole gene axis wins instead).
EASY_FITNESS = FitnessConfig(w_g=0.03, w_c=0.03, w_t=0.03, wd_g=1.0, wd_c=0.0,
                             wd_t=0.0, min_genes=2, min_conditions=2, min_times=3)


def planted_instance(seed, dims=(50, 4, 10), shapes=((10, 3, 5),), noise=0.1):
    """Synthetic tensor with gene-disjoint additive blocks; returns (tensor, truth)."""
    rng = np.random.default_rng(seed)
    blocks, used = [], []
    for shape in shapes:
        b = make_planted_block(dims, shape, rng, avoid_genes=used)
        used.extend(b.genes)
        blocks.append(b)
    spec = SyntheticSpec(dims, Background("uniform", 0.0, 10.0), tuple(blocks),
                         noise, seed)
    return generate_synthetic(spec)


def disjoint_instance(seed, dims=(50, 4, 10), shape=(10, 2, 5), count=2, noise=0.1):
    """Blocks that share no gene, condition or time; returns (tensor, truth)."""
    rng = np.random.default_rng(seed)
    perms = [rng.permutation(n) for n in dims]
    blocks = []
    for k in range(count):
        idx = [tuple(sorted(int(i) for i in p[k * s:(k + 1) * s])) for p, s in zip(perms, shape)]
        effects = [tuple(rng.uniform(-2, 2, s)) for s in shape]
        blocks.append(PlantedBlock(*idx, *effects, float(rng.uniform(2, 8))))
    spec = SyntheticSpec(dims, Background("uniform", 0.0, 10.0), tuple(blocks), noise, seed)
    return generate_synthetic(spec)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = []


def record_criterion(number, name, passed, detail=""):
    _ACCEPTANCE.append((number, name, passed, detail))


@contextmanager
def criterion(number, name):
    """Record a pass/fail line for the block; tests put a summary in ``note["detail"]``."""
    note = {"detail": ""}
    try:
        yield note
    except BaseException as exc:
        first = str(exc).strip().splitlines()[0] if str(exc).strip() else type(exc).__name__
        record_criterion(number, name, False, "; ".join(filter(None, [note["detail"], first])))
        raise
    record_criterion(number, name, True, note["detail"])


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {name}: {detail}")
