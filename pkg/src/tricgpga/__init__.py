"""Triclustering of 3D expression tensors with a coarse-grained island GA."""

from .data import (
    Background,
    ExpressionTensor,
    PlantedBlock,
    SyntheticSpec,
    generate_synthetic,
    load_tensor,
    make_planted_block,
    read_tensor,
    save_tensor,
    write_tensor,
)
from .estimator import TriCgPGA, check_tensor
from .exceptions import (
    ConfigError,
    DeterminismError,
    EmptyDimensionError,
    InvariantError,
    TensorFormatError,
)
from .fitness import (
    FitnessConfig,
    FoundSet,
    Tricluster,
    decode,
    distinction_term,
    fitness,
    jaccard_match,
    msr,
    volume,
    weights_term,
)
from .ga import GaConfig, run_ga
from .islands import IslandConfig, IslandRunResult, migrate, run_islands
from .mining import MiningConfig, MiningResult, SummaryStats, mine, summarize

__version__ = "0.1.0"
