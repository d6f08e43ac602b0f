"""Loading, saving and synthesizing 3D expression tensors.

Two text formats are supported:

``gct3``
    Block format. A header line ``#GCT3 genes=G conditions=C times=T``,
    a ``#genes`` and a ``#conditions`` line holding comma separated names,
    then one ``#time <label>`` block per time point with G rows of C values.

``long_csv``
    One ``gene,condition,time,value`` row per cell. Axis extents are the
    distinct labels in order of first appearance.
"""

from __future__ import annotations

import csv
import io
import math
import os
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .exceptions import ConfigError, TensorFormatError
from .fitness import Tricluster

FORMATS = ("gct3", "long_csv")

_HEADER_RE = re.compile(
    r"^#GCT3\s+genes=(\d+)\s+conditions=(\d+)\s+times=(\d+)\s*$")


@dataclass(frozen=True, eq=False)
class ExpressionTensor:
    """Dense genes x conditions x times array of float64 with axis labels.

    ``values`` is made read-only on construction so a tensor can be shared
    between demes without copying.
    """

    values: np.ndarray
    gene_names: tuple[str, ...] = ()
    condition_names: tuple[str, ...] = ()
    time_labels: tuple[str, ...] = ()

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 3:
            raise TensorFormatError(
                f"expected a 3D array, got {values.ndim} dimension(s)")
        if min(values.shape) < 1:
            raise TensorFormatError(f"empty dimension in shape {values.shape}")
        if not np.isfinite(values).all():
            raise TensorFormatError("tensor contains NaN or infinite values")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

        G, C, T = values.shape
        defaults = (
            ("gene_names", G, "g"),
            ("condition_names", C, "c"),
            ("time_labels", T, "t"),
        )
        for attr, n, prefix in defaults:
            labels = tuple(str(x) for x in getattr(self, attr))
            if not labels:
                labels = tuple(f"{prefix}{i}" for i in range(n))
            if len(labels) != n:
                raise TensorFormatError(
                    f"{attr} has {len(labels)} entries, expected {n}")
            object.__setattr__(self, attr, labels)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.values.shape

    @property
    def num_genes(self) -> int:
        return self.values.shape[0]

    @property
    def num_conditions(self) -> int:
        return self.values.shape[1]

    @property
    def num_times(self) -> int:
        return self.values.shape[2]

    def __eq__(self, other):
        if not isinstance(other, ExpressionTensor):
            return NotImplemented
        return (self.gene_names == other.gene_names
                and self.condition_names == other.condition_names
                and self.time_labels == other.time_labels
                and self.values.shape == other.values.shape
                and np.array_equal(self.values, other.values))

    __hash__ = None


# ---------------------------------------------------------------------------
# text formats
# ---------------------------------------------------------------------------

def _read_text(source) -> str:
    if isinstance(source, (Path, os.PathLike)):
        return Path(source).read_text(encoding="utf-8")
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def _parse_float(token: str, where: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise TensorFormatError(f"{where}: non-numeric value {token!r}") from None
    if not math.isfinite(value):
        raise TensorFormatError(f"{where}: non-finite value {token!r}")
    return value


def _split_names(text: str) -> list[str]:
    return next(csv.reader([text])) if text else []


def _join_names(names: Sequence[str]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="").writerow(names)
    return buf.getvalue()


def _load_gct3(text: str) -> ExpressionTensor:
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(n, ln) for n, ln in lines if ln]
    if not lines:
        raise TensorFormatError("empty input")
    lineno, header = lines[0]
    m = _HEADER_RE.match(header)
    if m is None:
        raise TensorFormatError(f"line {lineno}: malformed header {header!r}")
    G, C, T = (int(x) for x in m.groups())
    if min(G, C, T) < 1:
        raise TensorFormatError(f"line {lineno}: dimensions must be >= 1")

    gene_names = condition_names = None
    time_labels: list[str] = []
    blocks: list[list[list[float]]] = []
    current = None
    for lineno, line in lines[1:]:
        if line.startswith("#genes"):
            gene_names = _split_names(line[len("#genes"):].strip())
        elif line.startswith("#conditions"):
            condition_names = _split_names(line[len("#conditions"):].strip())
        elif line.startswith("#time"):
            time_labels.append(line[len("#time"):].strip())
            current = []
            blocks.append(current)
        elif line.startswith("#"):
            continue
        elif current is None:
            raise TensorFormatError(
                f"line {lineno}: data row outside a #time block")
        else:
            row = [_parse_float(tok.strip(), f"line {lineno}")
                   for tok in line.split(",")]
            if len(row) != C:
                raise TensorFormatError(
                    f"line {lineno}: expected {C} values, got {len(row)}")
            current.append(row)

    if gene_names is None or condition_names is None:
        raise TensorFormatError("missing #genes or #conditions line")
    if len(gene_names) != G:
        raise TensorFormatError(
            f"dimension mismatch: header genes={G}, names line has {len(gene_names)}")
    if len(condition_names) != C:
        raise TensorFormatError(
            f"dimension mismatch: header conditions={C}, "
            f"names line has {len(condition_names)}")
    if len(blocks) != T:
        raise TensorFormatError(
            f"dimension mismatch: header times={T}, found {len(blocks)} blocks")
    for label, block in zip(time_labels, blocks):
        if len(block) != G:
            raise TensorFormatError(
                f"dimension mismatch: time block {label!r} has {len(block)} rows, "
                f"expected {G}")
    values = np.array(blocks, dtype=np.float64).transpose(1, 2, 0)
    return ExpressionTensor(values, tuple(gene_names), tuple(condition_names),
                            tuple(time_labels))


def _load_long_csv(text: str) -> ExpressionTensor:
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise TensorFormatError("empty input") from None
    if header != ["gene", "condition", "time", "value"]:
        raise TensorFormatError(f"line 1: malformed header {header!r}")

    axes: list[dict[str, int]] = [{}, {}, {}]
    cells: dict[tuple[int, int, int], float] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not x.strip() for x in row):
            continue
        if len(row) != 4:
            raise TensorFormatError(
                f"line {lineno}: expected 4 fields, got {len(row)}")
        key = tuple(axis.setdefault(label, len(axis))
                    for axis, label in zip(axes, row[:3]))
        if key in cells:
            raise TensorFormatError(f"line {lineno}: duplicate cell {row[:3]}")
        cells[key] = _parse_float(row[3].strip(), f"line {lineno}")

    dims = tuple(len(a) for a in axes)
    if min(dims) < 1:
        raise TensorFormatError("no data rows")
    expected = dims[0] * dims[1] * dims[2]
    if len(cells) != expected:
        raise TensorFormatError(
            f"missing cell: {expected - len(cells)} of {expected} cells absent")
    values = np.empty(dims, dtype=np.float64)
    for (g, c, t), v in cells.items():
        values[g, c, t] = v
    return ExpressionTensor(values, *(tuple(a) for a in axes))


def load_tensor(source, format: str = "gct3") -> ExpressionTensor:
    """Parse a tensor from text.

    ``source`` may be a ``Path``, an open file (text or binary), ``bytes``
    or the document itself as ``str``.
    """
    if format not in FORMATS:
        raise ConfigError(f"unknown tensor format {format!r}")
    text = _read_text(source)
    return _load_gct3(text) if format == "gct3" else _load_long_csv(text)


def save_tensor(tensor: ExpressionTensor, format: str = "gct3") -> str:
    """Serialize ``tensor``; floats are written with ``repr`` so they re-load
    bit-exactly."""
    if format not in FORMATS:
        raise ConfigError(f"unknown tensor format {format!r}")
    G, C, T = tensor.shape
    buf = io.StringIO()
    if format == "gct3":
        buf.write(f"#GCT3 genes={G} conditions={C} times={T}\n")
        buf.write(f"#genes {_join_names(tensor.gene_names)}\n")
        buf.write(f"#conditions {_join_names(tensor.condition_names)}\n")
        for t, label in enumerate(tensor.time_labels):
            buf.write(f"#time {label}\n")
            for g in range(G):
                buf.write(",".join(repr(float(v)) for v in tensor.values[g, :, t]))
                buf.write("\n")
    else:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["gene", "condition", "time", "value"])
        for g, gname in enumerate(tensor.gene_names):
            for c, cname in enumerate(tensor.condition_names):
                for t, tname in enumerate(tensor.time_labels):
                    writer.writerow([gname, cname, tname,
                                     repr(float(tensor.values[g, c, t]))])
    return buf.getvalue()


def _format_for(path: Path, format: str | None) -> str:
    if format is not None:
        return format
    return "long_csv" if path.suffix.lower() == ".csv" else "gct3"


def read_tensor(path, format: str | None = None) -> ExpressionTensor:
    """Load a tensor file; ``.csv`` files default to ``long_csv``."""
    path = Path(path)
    return load_tensor(path, _format_for(path, format))


def write_tensor(tensor: ExpressionTensor, path, format: str | None = None) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(save_tensor(tensor, _format_for(path, format)))


# ---------------------------------------------------------------------------
# synthetic data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Background:
    """Distribution of non-planted cells: ``uniform(low, high)`` or
    ``normal(mean, stddev)``."""

    kind: str = "uniform"
    a: float = 0.0
    b: float = 10.0

    def __post_init__(self):
        if self.kind not in ("uniform", "normal"):
            raise ConfigError(f"unknown background distribution {self.kind!r}")
        if self.kind == "uniform" and not self.a <= self.b:
            raise ConfigError("uniform background needs low <= high")
        if self.kind == "normal" and self.b < 0:
            raise ConfigError("normal background needs stddev >= 0")

    @classmethod
    def parse(cls, text: str) -> "Background":
        """Parse ``uniform:LOW:HIGH`` or ``normal:MEAN:STD``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bad background descriptor {text!r}")
        try:
            return cls(parts[0], float(parts[1]), float(parts[2]))
        except ValueError:
            raise ConfigError(f"bad background descriptor {text!r}") from None

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.kind == "uniform":
            return rng.uniform(self.a, self.b, size=shape)
        return rng.normal(self.a, self.b, size=shape)


@dataclass(frozen=True)
class PlantedBlock:
    """Additive block: cell = base + gene effect + condition effect + time effect."""

    genes: tuple[int, ...]
    conditions: tuple[int, ...]
    times: tuple[int, ...]
    gene_effects: tuple[float, ...]
    condition_effects: tuple[float, ...]
    time_effects: tuple[float, ...]
    base: float = 0.0

    def __post_init__(self):
        pairs = ((self.genes, self.gene_effects, "gene"),
                 (self.conditions, self.condition_effects, "condition"),
                 (self.times, self.time_effects, "time"))
        for coords, effects, name in pairs:
            if len(coords) == 0:
                raise ConfigError(f"planted block has no {name} coordinates")
            if len(set(coords)) != len(coords):
                raise ConfigError(f"planted block repeats a {name} coordinate")
            if len(coords) != len(effects):
                raise ConfigError(f"planted block: one effect per {name} required")

    @property
    def shape(self) -> tuple[int, int, int]:
        return len(self.genes), len(self.conditions), len(self.times)

    def cells(self) -> np.ndarray:
        return (self.base
                + np.asarray(self.gene_effects)[:, None, None]
                + np.asarray(self.condition_effects)[None, :, None]
                + np.asarray(self.time_effects)[None, None, :])

    def to_tricluster(self, dims) -> Tricluster:
        return Tricluster.from_indices(dims, self.genes, self.conditions, self.times)


@dataclass(frozen=True)
class SyntheticSpec:
    dims: tuple[int, int, int]
    background: Background = field(default_factory=Background)
    planted: tuple[PlantedBlock, ...] = ()
    noise_stddev: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if len(self.dims) != 3 or min(self.dims) < 1:
            raise ConfigError(f"invalid dims {self.dims}")
        if not self.noise_stddev >= 0:
            raise ConfigError("noise_stddev must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "planted", tuple(self.planted))
        for block in self.planted:
            for coords, extent in zip(
                    (block.genes, block.conditions, block.times), self.dims):
                if min(coords) < 0 or max(coords) >= extent:
                    raise ConfigError("planted block exceeds dimensions")


def make_planted_block(dims, shape, rng: np.random.Generator, *,
                       avoid_genes=(), base_range=(2.0, 8.0),
                       effect_scale=2.0) -> PlantedBlock:
    """Draw random coordinates and additive effects for a block of ``shape``.

    Gene coordinates listed in ``avoid_genes`` are not reused, which gives
    gene-disjoint blocks when planting several.
    """
    if len(shape) != 3 or any(s < 1 for s in shape):
        raise ConfigError(f"invalid block shape {shape}")
    if any(s > d for s, d in zip(shape, dims)):
        raise ConfigError("planted block exceeds dimensions")
    free_genes = np.setdiff1d(np.arange(dims[0]), np.asarray(avoid_genes, dtype=int))
    if shape[0] > free_genes.size:
        raise ConfigError("not enough unused genes for a disjoint planted block")
    genes = np.sort(rng.choice(free_genes, shape[0], replace=False))
    conds = np.sort(rng.choice(dims[1], shape[1], replace=False))
    times = np.sort(rng.choice(dims[2], shape[2], replace=False))
    return PlantedBlock(
        genes=tuple(int(x) for x in genes),
        conditions=tuple(int(x) for x in conds),
        times=tuple(int(x) for x in times),
        gene_effects=tuple(rng.uniform(-effect_scale, effect_scale, shape[0])),
        condition_effects=tuple(rng.uniform(-effect_scale, effect_scale, shape[1])),
        time_effects=tuple(rng.uniform(-effect_scale, effect_scale, shape[2])),
        base=float(rng.uniform(*base_range)),
    )


def generate_synthetic(spec: SyntheticSpec) -> tuple[ExpressionTensor, list[Tricluster]]:
    """Draw a background tensor and overwrite each planted block.

    Deterministic in ``spec.seed``. Overlapping blocks are allowed; later
    blocks overwrite earlier ones and a ``UserWarning`` is emitted.
    """
    rng = np.random.default_rng(spec.seed)
    values = spec.background.sample(rng, spec.dims)
    covered = np.zeros(spec.dims, dtype=bool)
    truth = []
    for i, block in enumerate(spec.planted):
        idx = np.ix_(block.genes, block.conditions, block.times)
        if covered[idx].any():
            warnings.warn(f"planted block {i} overlaps an earlier block",
                          stacklevel=2)
        covered[idx] = True
        noise = rng.normal(0.0, spec.noise_stddev, size=block.shape)
        values[idx] = block.cells() + noise
        truth.append(block.to_tricluster(spec.dims))
    return ExpressionTensor(values), truth


def as_values(tensor) -> np.ndarray:
    """Return the float64 array behind an ``ExpressionTensor`` or array-like."""
    if isinstance(tensor, ExpressionTensor):
        return tensor.values
    return np.asarray(tensor, dtype=np.float64)


__all__ = [
    "Background", "ExpressionTensor", "FORMATS", "PlantedBlock", "SyntheticSpec",
    "as_values", "generate_synthetic", "load_tensor", "make_planted_block",
    "read_tensor", "save_tensor", "write_tensor",
]
