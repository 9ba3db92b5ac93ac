"""
Experiment configuration: JSON files validated into ExperimentConfig, plus the
built-in acceptance configurations run by `verify`.
"""

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Optional

import sympy

from .errors import ConfigInvalid

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

SUITES = ("gauss", "jacobi", "kloosterman", "lemma-kl", "discrepancy", "moments", "bounds", "rconsts", "engine")

WORKERS_ENV = "JACOBI_LAB_WORKERS"

# pass/fail tolerances of the acceptance checks
CHECK_TOLERANCES = {
    "gauss_modulus": 1e-8,       # relative to sqrt(q)
    "gauss_trivial": 1e-10,
    "jacobi_modulus": 1e-7,      # relative to q^((m-1)/2)
    "jacobi_identity": 1e-8,
    "kloosterman_identity": 1e-8,
    "moment_oracle": 1e-7,
    "identity_max_tuples": 4000,
}

DEFAULT_RCONST_GROUPS = (
    "mu2", "mu3", "mu5", "sp2", "sp4", "sp6", "sp8",
    "so3", "so5", "so7", "so9", "sl3", "sl5", "sl7", "sl9", "g2",
)


@dataclass
class SubsetPolicy:
    kind: str = "full"  # full | random | explicit
    sizes: tuple = ()
    size_fractions: tuple = ()
    seeds: tuple = (0,)
    subsets: tuple = ()  # explicit index lists, one per slot

    def sizes_for(self, q: int) -> list:
        """Random-subset sizes at field size q, capped to 1..q-2."""
        sizes = set(int(s) for s in self.sizes)
        sizes.update(math.ceil((q - 2) * f) for f in self.size_fractions)
        return sorted(min(max(s, 1), q - 2) for s in sizes)


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    fields: tuple = ((7, 1),)
    m: tuple = (2,)
    k_extra: tuple = (0,)
    n_max: int = 6
    K_max: int = 50
    subset_policy: SubsetPolicy = field(default_factory=SubsetPolicy)
    suites: tuple = ("gauss",)
    output_path: Optional[str] = None
    precision_flags: dict = field(default_factory=dict)
    kl_n: tuple = (1, 2, 3, 4)
    kl_max_weight: int = 6
    rconst_groups: tuple = DEFAULT_RCONST_GROUPS
    rconst_max_weight: int = 12
    max_tuples: int = 10 ** 8
    record_timings: bool = False
    workers: int = 1
    schema_version: int = SCHEMA_VERSION

    @property
    def qs(self) -> list:
        return [p ** r for p, r in self.fields]

    def resolved_workers(self) -> int:
        value = os.environ.get(WORKERS_ENV)
        if value:
            try:
                return max(1, int(value))
            except ValueError:
                logger.warning("Ignoring non-integer %s=%r", WORKERS_ENV, value)
        return max(1, self.workers)

    def to_dict(self) -> dict:
        return asdict(self)


def _as_tuple(value, key: str) -> tuple:
    if isinstance(value, (list, tuple)):
        return tuple(value)
    if isinstance(value, int):
        return (value,)
    raise ConfigInvalid(f"{key} must be an integer or a list")


def _check_keys(data: dict, allowed: set, where: str):
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigInvalid(f"unknown keys in {where}: {', '.join(unknown)}")


def _parse_policy(data) -> SubsetPolicy:
    if data is None:
        return SubsetPolicy()
    if not isinstance(data, dict):
        raise ConfigInvalid("subset_policy must be an object")
    _check_keys(data, set(SubsetPolicy.__dataclass_fields__), "subset_policy")
    policy = SubsetPolicy(
        kind=data.get("kind", "full"),
        sizes=tuple(data.get("sizes", ())),
        size_fractions=tuple(data.get("size_fractions", ())),
        seeds=_as_tuple(data.get("seeds", (0,)), "seeds"),
        subsets=tuple(tuple(s) for s in data.get("subsets", ())),
    )
    if policy.kind not in ("full", "random", "explicit"):
        raise ConfigInvalid(f"unknown subset policy {policy.kind!r}")
    if policy.kind == "random" and not (policy.sizes or policy.size_fractions):
        raise ConfigInvalid("random policy needs sizes or size_fractions")
    if any(not 0 < f <= 1 for f in policy.size_fractions):
        raise ConfigInvalid("size_fractions must lie in (0, 1]")
    if policy.kind == "explicit" and not policy.subsets:
        raise ConfigInvalid("explicit policy needs subsets")
    return policy


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.schema_version != SCHEMA_VERSION:
        raise ConfigInvalid(f"schema_version {cfg.schema_version} unsupported (expected {SCHEMA_VERSION})")
    for p, r in cfg.fields:
        if not sympy.isprime(p) or r < 1:
            raise ConfigInvalid(f"field ({p}, {r}) is not a prime power")
        if p ** r < 3:
            raise ConfigInvalid(f"field F_{p ** r} is too small")
    bad = sorted(set(cfg.suites) - set(SUITES))
    if bad:
        raise ConfigInvalid(f"unknown suites: {', '.join(bad)}")
    if any(m < 1 for m in cfg.m) or any(k < 0 for k in cfg.k_extra):
        raise ConfigInvalid("m must be >= 1 and k_extra >= 0")
    if cfg.n_max < 1 or cfg.K_max < 0:
        raise ConfigInvalid("n_max must be >= 1 and K_max >= 0")
    policy = cfg.subset_policy
    if any(s < 0 for s in policy.seeds):
        raise ConfigInvalid("seeds must be non-negative integers")
    if policy.kind == "random":
        for q in cfg.qs:
            for s in policy.sizes:
                if not 1 <= s <= q - 2:
                    raise ConfigInvalid(f"subset size {s} outside 1..{q - 2} for q={q}")
    if policy.kind == "explicit":
        for q in cfg.qs:
            for subset in policy.subsets:
                if not subset or any(not 1 <= j <= q - 2 for j in subset):
                    raise ConfigInvalid(f"explicit subset {list(subset)} invalid for q={q}")
    return cfg


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigInvalid("config must be a JSON object")
    _check_keys(data, set(ExperimentConfig.__dataclass_fields__), "config")
    try:
        fields = tuple((int(p), int(r)) for p, r in data.get("fields", ((7, 1),)))
    except (TypeError, ValueError):
        raise ConfigInvalid("fields must be a list of [p, r] pairs")
    defaults = ExperimentConfig()
    cfg = ExperimentConfig(
        name=data.get("name", defaults.name),
        fields=fields,
        m=_as_tuple(data.get("m", defaults.m), "m"),
        k_extra=_as_tuple(data.get("k_extra", defaults.k_extra), "k_extra"),
        n_max=int(data.get("n_max", defaults.n_max)),
        K_max=int(data.get("K_max", defaults.K_max)),
        subset_policy=_parse_policy(data.get("subset_policy")),
        suites=tuple(data.get("suites", defaults.suites)),
        output_path=data.get("output_path"),
        precision_flags=dict(data.get("precision_flags", {})),
        kl_n=_as_tuple(data.get("kl_n", defaults.kl_n), "kl_n"),
        kl_max_weight=int(data.get("kl_max_weight", defaults.kl_max_weight)),
        rconst_groups=tuple(data.get("rconst_groups", defaults.rconst_groups)),
        rconst_max_weight=int(data.get("rconst_max_weight", defaults.rconst_max_weight)),
        max_tuples=int(data.get("max_tuples", defaults.max_tuples)),
        record_timings=bool(data.get("record_timings", False)),
        workers=int(data.get("workers", 1)),
        schema_version=int(data.get("schema_version", SCHEMA_VERSION)),
    )
    return validate(cfg)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigInvalid(f"{path}: {e}")
    except OSError as e:
        raise ConfigInvalid(f"cannot read {path}: {e}")
    cfg = config_from_dict(data)
    logger.info("Loaded config %r from %s", cfg.name, path)
    return cfg


# ── acceptance configurations ───────────────────────────────────────────────

def _primes(lo: int, hi: int) -> list:
    return [(p, 1) for p in sympy.primerange(lo, hi + 1)]


_SMALL_POWERS = [(3, 2), (5, 2), (3, 3), (7, 2)]
_UP_TO_31 = _primes(5, 31) + [(3, 2), (5, 2), (3, 3)]

ACCEPTANCE_CONFIGS = {
    "modulus": [
        ExperimentConfig(name="modulus-gauss", fields=tuple(_primes(3, 101) + _SMALL_POWERS), suites=("gauss",)),
        ExperimentConfig(name="modulus-jacobi", fields=tuple(_UP_TO_31), m=(2, 3), suites=("jacobi",)),
    ],
    "identities": [
        ExperimentConfig(name="identities-jacobi", fields=tuple(_UP_TO_31), m=(2, 3), suites=("jacobi",),
                         precision_flags={"identity": True}),
        ExperimentConfig(name="identities-kloosterman", fields=tuple(_primes(3, 101) + _SMALL_POWERS),
                         kl_n=(1, 2, 3, 4), suites=("kloosterman",)),
    ],
    "lemma-kl": [
        ExperimentConfig(name="lemma-kl", fields=((7, 1), (11, 1), (13, 1), (17, 1), (23, 1)),
                         kl_n=(1, 2, 3, 4), kl_max_weight=6, suites=("lemma-kl",)),
    ],
    "rconsts": [
        ExperimentConfig(name="rconsts", fields=(), suites=("rconsts",)),
    ],
    "moments": [
        ExperimentConfig(name="moments-oracle", fields=tuple(_UP_TO_31), m=(1, 2, 3), k_extra=(0, 1),
                         n_max=4, suites=("moments",), precision_flags={"oracle": True}),
    ],
    "domination": [
        ExperimentConfig(
            name="domination-full", fields=tuple(_primes(11, 199)), m=(2, 3), k_extra=(0, 1, 2),
            n_max=6, suites=("discrepancy", "moments", "bounds"),
        ),
        ExperimentConfig(
            name="domination-random", fields=tuple(_primes(11, 199)), m=(2, 3), k_extra=(0, 1, 2),
            n_max=6, suites=("discrepancy", "moments", "bounds"),
            subset_policy=SubsetPolicy(kind="random", size_fractions=(0.25, 0.5), seeds=tuple(range(20))),
        ),
    ],
    "engine": [
        ExperimentConfig(name="engine", fields=(), suites=("engine",)),
    ],
    "corollary": [
        ExperimentConfig(name="corollary", fields=(), suites=("bounds",)),
    ],
    "trend": [
        ExperimentConfig(name="trend", fields=((101, 1), (499, 1), (997, 1), (4999, 1), (9973, 1)),
                         m=(2,), suites=("discrepancy",)),
    ],
}


def acceptance_configs(name: str) -> list:
    if name == "all":
        return [cfg for cfgs in ACCEPTANCE_CONFIGS.values() for cfg in cfgs]
    if name not in ACCEPTANCE_CONFIGS:
        raise ConfigInvalid(f"unknown suite {name!r}; choose from all, {', '.join(ACCEPTANCE_CONFIGS)}")
    return list(ACCEPTANCE_CONFIGS[name])
