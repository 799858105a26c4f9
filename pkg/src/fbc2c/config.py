"""Declarative run configuration with strict JSON round-tripping.

Every run is described by an ExperimentConfig; the resolved form (defaults
applied) is re-emitted next to run artifacts so results can be reproduced
exactly.  Unknown keys are rejected with their field path.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

from .basis import ActivationKind, WindowKind, build_rfm, build_vector_rfm, uniform_fem_basis
from .encoder import CutMode, Ridge, TruncatedSvd
from .errors import ConfigurationError
from .neuralop import TrainConfig

_DATASET_KINDS = ("darcy1d", "poisson2d", "highd_poisson", "multi_output_1d")


@dataclass
class DatasetSpec:
    """Which generator to run and with what parameters.

    ``n`` is the grid size for the 1D problems and the points per side for
    poisson2d; highd_poisson uses ``d``/``n_points`` and the three fixed
    amplitude splits instead of m_train/m_test.
    """

    kind: str
    n: int | None = None
    m_train: int | None = None
    m_test: int | None = None
    seed: int = 0
    length_scale: float = 0.04
    amplitude: float = 1.0
    tol: float = 1e-10
    modes: int = 5
    d: int | None = None
    n_points: int | None = None
    n_train: int = 8
    n_gen1: int = 2
    n_gen2: int = 10

    def __post_init__(self):
        if self.kind not in _DATASET_KINDS:
            raise ConfigurationError(
                f"dataset.kind: unknown kind {self.kind!r}, expected one of {_DATASET_KINDS}"
            )
        if self.kind == "highd_poisson":
            if self.d is None or self.n_points is None:
                raise ConfigurationError("dataset: highd_poisson needs d and n_points")
        else:
            if self.n is None or self.m_train is None or self.m_test is None:
                raise ConfigurationError(f"dataset: {self.kind} needs n, m_train, m_test")


@dataclass
class BasisSpec:
    """Structural description of a basis; building it is deterministic."""

    kind: str                       # "rfm" or "fem"
    partitions: list | None = None  # rfm: counts per dimension
    features_per_partition: int | None = None
    range_bound: float = 3.0
    window: str = "smooth"
    activation: str = "tanh"
    seed: int = 0
    bounds: list | None = None      # [[lo, hi], ...]; None means [-1, 1]^d
    n_nodes: int | None = None      # fem
    domain: list = field(default_factory=lambda: [0.0, 1.0])

    def __post_init__(self):
        if self.kind not in ("rfm", "fem"):
            raise ConfigurationError(f"basis.kind: unknown kind {self.kind!r}")
        if self.kind == "rfm" and (self.partitions is None or self.features_per_partition is None):
            raise ConfigurationError("basis: rfm needs partitions and features_per_partition")
        if self.kind == "fem" and self.n_nodes is None:
            raise ConfigurationError("basis: fem needs n_nodes")

    def build(self, n_components: int = 1):
        if self.kind == "fem":
            if n_components != 1:
                raise ConfigurationError("vector-valued FEM bases are not supported")
            return uniform_fem_basis(self.n_nodes, self.domain[0], self.domain[1])
        window = WindowKind(self.window)
        activation = ActivationKind(self.activation)
        if n_components == 1:
            return build_rfm(len(self.partitions), self.partitions,
                             self.features_per_partition, self.range_bound,
                             window, activation, self.seed, self.bounds)
        return build_vector_rfm(n_components, len(self.partitions), self.partitions,
                                self.features_per_partition, self.range_bound,
                                window, activation, self.seed, self.bounds)


@dataclass
class EncodeSpec:
    method: str = "tsvd"            # "ridge" or "tsvd"
    lam: float = 0.0
    cut: float = 1e-2
    cut_mode: str = "relative"

    def __post_init__(self):
        if self.method not in ("ridge", "tsvd"):
            raise ConfigurationError(f"encode.method: unknown method {self.method!r}")

    def to_config(self):
        if self.method == "ridge":
            return Ridge(lam=self.lam)
        return TruncatedSvd(cut=self.cut, cut_mode=CutMode(self.cut_mode))

    @property
    def cut_or_lambda(self) -> float:
        return self.lam if self.method == "ridge" else self.cut


@dataclass
class NetSpec:
    hidden: int = 512
    seed: int = 0


@dataclass
class ExperimentConfig:
    """Everything one run needs: data, bases, encoders, net, training."""

    dataset: DatasetSpec
    output_basis: BasisSpec
    train: TrainConfig
    input_basis: BasisSpec | None = None
    input_encode: EncodeSpec = field(default_factory=EncodeSpec)
    output_encode: EncodeSpec = field(default_factory=EncodeSpec)
    net: NetSpec = field(default_factory=NetSpec)
    p2c: bool = False
    input_mode: str = "scalar"      # "scalar" or "vector" for multi-component inputs
    output_mode: str = "scalar"
    standardize_inputs: bool = True  # per-column train-statistics normalization

    def __post_init__(self):
        if not self.p2c and self.input_basis is None:
            raise ConfigurationError("input_basis is required unless p2c is set")
        for name in ("input_mode", "output_mode"):
            if getattr(self, name) not in ("scalar", "vector"):
                raise ConfigurationError(f"{name}: must be 'scalar' or 'vector'")


# ---------------------------------------------------------------------------
# dict round-trip


def _from_dict(cls, data: dict, path: str):
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: expected an object, got {type(data).__name__}")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigurationError(f"{path}.{unknown[0]}: unknown key")
    kwargs = {}
    nested = {"dataset": DatasetSpec, "output_basis": BasisSpec, "input_basis": BasisSpec,
              "input_encode": EncodeSpec, "output_encode": EncodeSpec,
              "net": NetSpec, "train": TrainConfig}
    for name, value in data.items():
        if name in nested and value is not None:
            kwargs[name] = _from_dict(nested[name], value, f"{path}.{name}")
        else:
            kwargs[name] = value
    missing = [f.name for f in dataclasses.fields(cls)
               if f.default is dataclasses.MISSING
               and f.default_factory is dataclasses.MISSING
               and f.name not in kwargs]
    if missing:
        raise ConfigurationError(f"{path}.{missing[0]}: required key missing")
    try:
        return cls(**kwargs)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc


def config_from_dict(data: dict) -> ExperimentConfig:
    return _from_dict(ExperimentConfig, data, "config")


def config_to_dict(config: ExperimentConfig) -> dict:
    return dataclasses.asdict(config)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config: invalid JSON in {path}: {exc}") from exc
    return config_from_dict(data)


def dump_config(config: ExperimentConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(config_to_dict(config), fh, indent=2, sort_keys=True)
        fh.write("\n")


def config_hash(config: ExperimentConfig) -> str:
    canonical = json.dumps(config_to_dict(config), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]
