"""Flat ``key = value`` configuration files.

Lines are ``key = value`` pairs; ``#`` starts a comment. Unknown keys and
unparsable values are errors. Defaults reproduce the published parameter
table (crossover 0.8, mutation 0.5, weights 0.8/0.1/0.1, distinction
weights 1/0/0); the remaining defaults are this package's choices.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping

from .exceptions import ConfigError
from .fitness import FitnessConfig
from .ga import GaConfig
from .islands import IslandConfig
from .mining import MiningConfig


def _threads(text: str):
    return "auto" if text == "auto" else int(text)


@dataclass(frozen=True)
class Key:
    name: str
    parse: Callable[[str], Any]
    default: Any
    help: str


KEYS: dict[str, Key] = {k.name: k for k in (
    Key("population_size", int, 100, "individuals per deme"),
    Key("generations", int, 50, "generations per run"),
    Key("demes", int, 4, "number of demes (islands)"),
    Key("threads", _threads, "auto", "worker processes, or 'auto'"),
    Key("migration_interval", int, 10, "generations between migrations"),
    Key("crossover_prob", float, 0.8, "probability a parent pair is crossed"),
    Key("mutation_prob", float, 0.5, "probability an offspring is mutated"),
    Key("tournament_size", int, 3, "tournament size for parent selection"),
    Key("elitism_count", int, 1, "top parents always kept"),
    Key("w_g", float, 0.8, "gene size weight"),
    Key("w_c", float, 0.1, "condition size weight"),
    Key("w_t", float, 0.1, "time size weight"),
    Key("wd_g", float, 1.0, "gene distinction weight"),
    Key("wd_c", float, 0.0, "condition distinction weight"),
    Key("wd_t", float, 0.0, "time distinction weight"),
    Key("min_genes", int, 1, "minimum genes per tricluster"),
    Key("min_conditions", int, 1, "minimum conditions per tricluster"),
    Key("min_times", int, 1, "minimum times per tricluster"),
    Key("max_triclusters", int, 20, "triclusters to mine"),
    Key("seed", int, 0, "master seed (64-bit unsigned)"),
    Key("init_density_g", float, 0.5, "initial gene bit density"),
    Key("init_density_c", float, 0.5, "initial condition bit density"),
    Key("init_density_t", float, 0.5, "initial time bit density"),
)}


def defaults() -> dict[str, Any]:
    return {k.name: k.default for k in KEYS.values()}


def parse_value(key: str, text: str, where: str = "") -> Any:
    if key not in KEYS:
        raise ConfigError(f"{where}unknown config key {key!r}")
    try:
        return KEYS[key].parse(text.strip())
    except ValueError:
        raise ConfigError(f"{where}bad value for {key}: {text.strip()!r}") from None


def parse_config(text: str, source: str = "<config>") -> dict[str, Any]:
    """Parse config text into a dict of explicitly given keys."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}: "
        if "=" not in line:
            raise ConfigError(f"{where}expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = parse_value(key, value, where)
    return out


def load_config(path) -> dict[str, Any]:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), str(path))


def resolve(overrides: Mapping[str, Any] = ()) -> dict[str, Any]:
    values = defaults()
    for key, value in dict(overrides).items():
        if key not in KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = value
    return values


def to_mining_config(values: Mapping[str, Any]) -> MiningConfig:
    v = resolve(values)
    return MiningConfig(
        max_triclusters=v["max_triclusters"],
        ga=GaConfig(
            population_size=v["population_size"],
            generations=v["generations"],
            crossover_prob=v["crossover_prob"],
            mutation_prob=v["mutation_prob"],
            tournament_size=v["tournament_size"],
            elitism_count=v["elitism_count"],
            init_density=(v["init_density_g"], v["init_density_c"], v["init_density_t"]),
        ),
        fitness=FitnessConfig(
            w_g=v["w_g"], w_c=v["w_c"], w_t=v["w_t"],
            wd_g=v["wd_g"], wd_c=v["wd_c"], wd_t=v["wd_t"],
            min_genes=v["min_genes"], min_conditions=v["min_conditions"],
            min_times=v["min_times"],
        ),
        islands=IslandConfig(
            num_demes=v["demes"], migration_interval=v["migration_interval"],
            threads=v["threads"], master_seed=v["seed"],
        ),
    )


def format_config(values: Mapping[str, Any]) -> str:
    """Fully resolved config text; floats use ``repr`` so they round-trip."""
    v = resolve(values)
    lines = ["# resolved tricgpga configuration"]
    for key in KEYS:
        value = v[key]
        lines.append(f"{key} = {value!r}" if isinstance(value, float)
                     else f"{key} = {value}")
    return "\n".join(lines) + "\n"
