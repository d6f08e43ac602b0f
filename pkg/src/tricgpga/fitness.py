"""Tricluster encoding and the F_msr fitness.

A tricluster over a ``(G, C, T)`` tensor is a boolean string of length
``G + C + T``: genes occupy ``[0, G)``, conditions ``[G, G + C)`` and times
``[G + C, G + C + T)``.

Fitness (minimized)::

    F = msr - weights - distinction

    weights     = G_l * w_g + C_l * w_c + T_l * w_t
    distinction = CDN_g / G_l * wd_g + CDN_c / C_l * wd_c + CDN_t / T_l * wd_t

where ``CDN_x`` counts the candidate's coordinates along axis ``x`` that no
previously found tricluster uses.

The mean square residue is the three-way additive extension of the
Cheng-Church residue::

    r(g, c, t) = v(g, c, t) - m(g, ., .) - m(., c, .) - m(., ., t) + 2 m(., ., .)
    msr = mean(r ** 2)

with every mean taken over the tricluster's own cells, so any block of the
form ``a_g + b_c + d_t`` scores exactly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import ConfigError, EmptyDimensionError


def _values(tensor) -> np.ndarray:
    values = getattr(tensor, "values", tensor)
    return np.asarray(values, dtype=np.float64)


def segment_slices(shape) -> tuple[slice, slice, slice]:
    G, C, T = shape
    return slice(0, G), slice(G, G + C), slice(G + C, G + C + T)


@dataclass(frozen=True, eq=False)
class Tricluster:
    """Immutable gene/condition/time selection over a tensor of ``shape``."""

    bits: np.ndarray
    shape: tuple[int, int, int]

    def __post_init__(self):
        shape = tuple(int(x) for x in self.shape)
        if len(shape) != 3 or min(shape) < 1:
            raise ValueError(f"invalid tensor shape {self.shape}")
        bits = np.array(self.bits, dtype=bool, copy=True).ravel()
        if bits.size != sum(shape):
            raise ValueError(
                f"bitstring has length {bits.size}, expected {sum(shape)}")
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "shape", shape)

    @classmethod
    def from_indices(cls, shape, genes: Iterable[int], conditions: Iterable[int],
                     times: Iterable[int]) -> "Tricluster":
        bits = np.zeros(sum(shape), dtype=bool)
        for sl, idx in zip(segment_slices(shape), (genes, conditions, times)):
            seg = bits[sl]
            seg[np.asarray(list(idx), dtype=int)] = True
        return cls(bits, shape)

    @property
    def gene_mask(self) -> np.ndarray:
        return self.bits[segment_slices(self.shape)[0]]

    @property
    def condition_mask(self) -> np.ndarray:
        return self.bits[segment_slices(self.shape)[1]]

    @property
    def time_mask(self) -> np.ndarray:
        return self.bits[segment_slices(self.shape)[2]]

    @property
    def genes(self) -> np.ndarray:
        return np.flatnonzero(self.gene_mask)

    @property
    def conditions(self) -> np.ndarray:
        return np.flatnonzero(self.condition_mask)

    @property
    def times(self) -> np.ndarray:
        return np.flatnonzero(self.time_mask)

    @property
    def sizes(self) -> tuple[int, int, int]:
        """``(G_l, C_l, T_l)``."""
        return (int(self.gene_mask.sum()), int(self.condition_mask.sum()),
                int(self.time_mask.sum()))

    def __eq__(self, other):
        if not isinstance(other, Tricluster):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.shape, self.bits.tobytes()))

    def __repr__(self):
        G_l, C_l, T_l = self.sizes
        return f"Tricluster(shape={self.shape}, sizes=({G_l}, {C_l}, {T_l}))"


def volume(tc: Tricluster) -> int:
    G_l, C_l, T_l = tc.sizes
    return G_l * C_l * T_l


def decode(tc: Tricluster) -> tuple[list[int], list[int], list[int]]:
    """Ascending gene, condition and time indices selected by ``tc``."""
    return tc.genes.tolist(), tc.conditions.tolist(), tc.times.tolist()


def _jaccard(a: np.ndarray, b: np.ndarray) -> float:
    union = np.count_nonzero(a | b)
    if union == 0:
        return 1.0
    return np.count_nonzero(a & b) / union


def jaccard_match(a: Tricluster, b: Tricluster) -> tuple[float, float, float]:
    """Per-axis Jaccard indices between two triclusters of the same shape."""
    if a.shape != b.shape:
        raise ValueError("triclusters belong to tensors of different shape")
    return (_jaccard(a.gene_mask, b.gene_mask),
            _jaccard(a.condition_mask, b.condition_mask),
            _jaccard(a.time_mask, b.time_mask))


@dataclass(frozen=True)
class FitnessConfig:
    """Size weights, distinction weights and minimum axis sizes.

    Defaults are the published parameter table.
    """

    w_g: float = 0.8
    w_c: float = 0.1
    w_t: float = 0.1
    wd_g: float = 1.0
    wd_c: float = 0.0
    wd_t: float = 0.0
    min_genes: int = 1
    min_conditions: int = 1
    min_times: int = 1

    def __post_init__(self):
        for name in ("w_g", "w_c", "w_t", "wd_g", "wd_c", "wd_t"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(f"{name} must be finite and >= 0, got {value}")
        for name in ("min_genes", "min_conditions", "min_times"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")

    @property
    def min_sizes(self) -> tuple[int, int, int]:
        return self.min_genes, self.min_conditions, self.min_times

    def check_shape(self, shape) -> None:
        for name, need, extent in zip(("min_genes", "min_conditions", "min_times"),
                                      self.min_sizes, shape):
            if need > extent:
                raise ConfigError(
                    f"{name}={need} exceeds the tensor extent {extent}")


class FoundSet:
    """Triclusters accepted so far plus the union of their coordinates.

    Instances are immutable; :meth:`add` returns a new set.
    """

    __slots__ = ("shape", "members", "_union")

    def __init__(self, shape, members: Sequence[Tricluster] = ()):
        self.shape = tuple(int(x) for x in shape)
        self.members = tuple(members)
        union = np.zeros(sum(self.shape), dtype=bool)
        for tc in self.members:
            if tc.shape != self.shape:
                raise ValueError("tricluster shape differs from the found set")
            union |= tc.bits
        union.flags.writeable = False
        self._union = union

    @property
    def union(self) -> np.ndarray:
        """Boolean mask over the full bitstring of all used coordinates."""
        return self._union

    def add(self, tc: Tricluster) -> "FoundSet":
        return FoundSet(self.shape, self.members + (tc,))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def _require_nonempty(sizes) -> None:
    for name, n in zip(("gene", "condition", "time"), sizes):
        if n == 0:
            raise EmptyDimensionError(f"tricluster selects no {name}")


def block_msr(block: np.ndarray) -> float:
    """Mean square residue of a dense ``(g, c, t)`` sub-tensor."""
    if block.ndim != 3 or min(block.shape) == 0:
        raise EmptyDimensionError(f"cannot score block of shape {block.shape}")
    if sorted(block.shape)[1] == 1:
        # two singleton axes: the residue vanishes identically
        return 0.0
    overall = block.mean()
    residue = (block
               - block.mean(axis=(1, 2))[:, None, None]
               - block.mean(axis=(0, 2))[None, :, None]
               - block.mean(axis=(0, 1))[None, None, :]
               + 2.0 * overall)
    return float(np.mean(residue * residue))


def msr(tensor, tc: Tricluster) -> float:
    """Mean square residue of the cells selected by ``tc``."""
    _require_nonempty(tc.sizes)
    values = _values(tensor)
    if values.shape != tc.shape:
        raise ValueError(f"tricluster shape {tc.shape} != tensor {values.shape}")
    return block_msr(values[np.ix_(tc.genes, tc.conditions, tc.times)])


def weights_term(tc: Tricluster, cfg: FitnessConfig) -> float:
    G_l, C_l, T_l = tc.sizes
    return G_l * cfg.w_g + C_l * cfg.w_c + T_l * cfg.w_t


def distinction_term(tc: Tricluster, found: FoundSet, cfg: FitnessConfig) -> float:
    sizes = tc.sizes
    _require_nonempty(sizes)
    novel = tc.bits & ~found.union
    cdn = [int(novel[sl].sum()) for sl in segment_slices(tc.shape)]
    return (cdn[0] / sizes[0] * cfg.wd_g
            + cdn[1] / sizes[1] * cfg.wd_c
            + cdn[2] / sizes[2] * cfg.wd_t)


def fitness(tensor, tc: Tricluster, found: FoundSet, cfg: FitnessConfig) -> float:
    """``msr - weights_term - distinction_term``; lower is better."""
    return msr(tensor, tc) - weights_term(tc, cfg) - distinction_term(tc, found, cfg)


def score_bits(values: np.ndarray, bits: np.ndarray, found: FoundSet,
               cfg: FitnessConfig) -> tuple[np.ndarray, np.ndarray]:
    """Fitness and MSR for each row of a ``(n, G + C + T)`` boolean matrix.

    Same arithmetic, in the same order, as :func:`fitness`, so the results
    agree bit for bit.
    """
    shape = values.shape
    bits = np.asarray(bits, dtype=bool)
    g_sl, c_sl, t_sl = segment_slices(shape)
    counts = np.stack([bits[:, g_sl].sum(axis=1), bits[:, c_sl].sum(axis=1),
                       bits[:, t_sl].sum(axis=1)], axis=1)
    if (counts == 0).any():
        raise EmptyDimensionError("population contains an empty tricluster")

    msrs = np.empty(len(bits))
    for i, row in enumerate(bits):
        idx = np.ix_(np.flatnonzero(row[g_sl]), np.flatnonzero(row[c_sl]),
                     np.flatnonzero(row[t_sl]))
        msrs[i] = block_msr(values[idx])

    G_l, C_l, T_l = (counts[:, k].astype(np.float64) for k in range(3))
    weights = G_l * cfg.w_g + C_l * cfg.w_c + T_l * cfg.w_t
    novel = bits & ~found.union
    cdn_g = novel[:, g_sl].sum(axis=1)
    cdn_c = novel[:, c_sl].sum(axis=1)
    cdn_t = novel[:, t_sl].sum(axis=1)
    distinction = cdn_g / G_l * cfg.wd_g + cdn_c / C_l * cfg.wd_c + cdn_t / T_l * cfg.wd_t
    return msrs - weights - distinction, msrs
