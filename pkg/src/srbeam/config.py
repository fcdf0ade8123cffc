"""Run configuration: a single flat JSON document.

CLI flags override file fields; every output artifact embeds the
SHA-1 content hash of the resolved configuration so runs are
machine-diffable.
"""

import dataclasses
import json
from dataclasses import dataclass, field
from importlib import resources

from .errors import ConfigError
from .provenance import content_hash

SWEEP_AXES = ("n_gamma_tau", "delta_over_halfkappa", "kappa_tau", "n_atoms")


@dataclass
class SweepSpec:
    axis: str
    min: float
    max: float
    points: int
    scale: str = "linear"

    def values(self):
        import numpy as np
        if self.points == 1:
            return [self.min]
        if self.scale == "log":
            vals = np.geomspace(self.min, self.max, self.points)
        else:
            vals = np.linspace(self.min, self.max, self.points)
        return [int(v) if self.axis == "n_atoms" else float(v) for v in vals]

    def validate(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}; "
                              f"choose from {SWEEP_AXES}")
        if self.points < 1:
            raise ConfigError("sweep points must be >= 1")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"unknown sweep scale {self.scale!r}")
        if self.scale == "log" and (self.min <= 0 or self.max <= 0):
            raise ConfigError("log sweeps require positive endpoints")


@dataclass
class RunConfig:
    n_gamma_tau: float = 20.0
    delta_over_halfkappa: float = 0.0
    kappa_tau: float = 1000.0
    n_atoms: int = 500
    mode: str = "adiabatic"
    total_time: float = 60.0     # units of the transit time
    n_runs: int = 25
    sample_dt: float = 0.05      # units of the transit time
    dt: float = 0.005            # units of the transit time
    t0: float = 10.0
    t_cut: float = 20.0
    nu_max: float = 16.0
    seed: int = 12345
    threads: int = 1
    out_dir: str = "out"
    formats: list = field(default_factory=lambda: ["csv", "json-summary"])
    sweep: SweepSpec = None
    sweep2: SweepSpec = None
    poisson_arrivals: bool = False
    sliding_correlation: bool = False
    save_trajectories: bool = False

    def validate(self):
        if self.mode not in ("adiabatic", "full"):
            raise ConfigError(f"mode must be 'adiabatic' or 'full', got {self.mode!r}")
        for name in ("total_time", "sample_dt", "dt", "t_cut", "kappa_tau"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.t0 < 0:
            raise ConfigError("t0 must be non-negative")
        if self.n_runs < 1 or self.n_atoms < 1 or self.threads < 1:
            raise ConfigError("n_runs, n_atoms and threads must be >= 1")
        if self.n_gamma_tau < 0:
            raise ConfigError("n_gamma_tau must be non-negative")
        for fmt in self.formats:
            if fmt not in ("csv", "binary", "json-summary"):
                raise ConfigError(f"unknown output format {fmt!r}")
        for sw in (self.sweep, self.sweep2):
            if sw is not None:
                sw.validate()
        return self

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("sweep", "sweep2"):
            if data.get(key) is not None and not isinstance(data[key], SweepSpec):
                try:
                    data[key] = SweepSpec(**data[key])
                except TypeError as exc:
                    raise ConfigError(f"bad {key} spec: {exc}") from exc
        try:
            return cls(**data).validate()
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def from_preset(cls, name):
        ref = resources.files("srbeam").joinpath(f"presets/{name}.json")
        if not ref.is_file():
            available = sorted(p.name[:-5] for p in
                               resources.files("srbeam").joinpath("presets").iterdir()
                               if p.name.endswith(".json"))
            raise ConfigError(f"unknown preset {name!r}; available: {available}")
        return cls.from_dict(json.loads(ref.read_text()))

    def apply_set(self, assignment):
        """Apply one --set key=value override (value parsed as JSON if possible)."""
        if "=" not in assignment:
            raise ConfigError(f"--set expects key=value, got {assignment!r}")
        key, raw = assignment.split("=", 1)
        key = key.strip()
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        data = self.to_dict()
        if key not in data:
            raise ConfigError(f"unknown config key {key!r}")
        data[key] = value
        return RunConfig.from_dict(data)

    def to_dict(self):
        data = dataclasses.asdict(self)
        return data

    def hash(self):
        return content_hash(self.to_dict())

    def system_params(self, n_atoms=None, n_gamma_tau=None,
                      delta_over_halfkappa=None, kappa_tau=None):
        from .params import SystemParams
        return SystemParams.from_dimensionless(
            n_gamma_tau=self.n_gamma_tau if n_gamma_tau is None else n_gamma_tau,
            delta_over_halfkappa=(self.delta_over_halfkappa
                                  if delta_over_halfkappa is None
                                  else delta_over_halfkappa),
            kappa_tau=self.kappa_tau if kappa_tau is None else kappa_tau,
            n_atoms=self.n_atoms if n_atoms is None else n_atoms,
            rng_seed=self.seed,
            dt_over_tau=self.dt,
        )
