"""Run configuration: defaults, YAML round-trip, unit conversions.

All config values are in "human" units (dBm, dB, MHz where noted); conversion
to linear SI happens exactly once, in :func:`radio_from_config` /
:func:`build_network`.
"""
from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field

import numpy as np
import yaml

from .data import Dataset, partition, synthetic_clusters
from .radio import RadioConfig
from .topology import Network, generate_network

SCHEMES = ("full", "flexible", "eb", "fra", "sampling")


def dbm_to_w(x: float) -> float:
    return 10.0 ** (x / 10.0) / 1000.0


def db_to_linear(x: float) -> float:
    return 10.0 ** (x / 10.0)


@dataclass
class RunConfig:
    """One experiment run.  Defaults follow the MNIST-scale setup."""

    scheme: str = "full"
    seed: int = 0
    trials: int = 1

    # population
    I: int = 5
    J: int = 100
    j_per_fog: list[int] | None = None   # default: equal split of J over I
    radius_km: float = 1.0

    # learning task
    n_samples: int = 6000
    q: int = 784
    num_classes: int = 10
    partition_mode: str = "iid"          # or "one-class"
    reg: float = 1e-4
    L: int = 20
    B: int = 20
    eta0: float = 0.001
    lr_decay: float = 1.01

    # rounds / stopping
    G: int = 250
    G_bar: int = 250
    k_bar: int = 5
    epsilon: float = 1e-6
    alpha: float = 0.7
    F0: float = 0.1
    T0: float = 100.0

    # radio (human units)
    W_dl_mhz: float = 10.0
    W_ul_mhz: float = 10.0
    N0_dbm_hz: float = -174.0
    snr_min_db: float = 1.0
    K: int = 8
    P_bs_dbm: float = 40.0

    # UE heterogeneity
    p_max_dbm_range: tuple[float, float] = (10.0, 23.0)
    c_range: tuple[float, float] = (10.0, 20.0)
    f_min: float = 1e6
    f_max_range: tuple[float, float] = (1e9, 3e9)
    theta_half: float = 1e-28
    e_max: float = 0.1

    # flexible aggregation
    J_min: int = 20
    xi: float | None = None   # None: calibrated to 0.1x the first round's update norm
    delta_T: float = 0.15
    delta_G: int = 50

    # sampling baseline
    subset_size: int = 10

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.j_per_fog is None:
            base, extra = divmod(self.J, self.I)
            self.j_per_fog = [base + (1 if i < extra else 0) for i in range(self.I)]
        self.j_per_fog = list(self.j_per_fog)
        if len(self.j_per_fog) != self.I:
            raise ValueError(f"j_per_fog has {len(self.j_per_fog)} entries for I={self.I}")
        if sum(self.j_per_fog) != self.J:
            raise ValueError(f"j_per_fog sums to {sum(self.j_per_fog)}, expected J={self.J}")
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError("alpha must lie in [0, 1]")
        if self.partition_mode not in ("iid", "one-class"):
            raise ValueError(f"unknown partition mode {self.partition_mode!r}")
        if not (0 < self.J_min <= self.J):
            raise ValueError("J_min must lie in (0, J]")
        if not (0 < self.subset_size <= self.J):
            raise ValueError("subset_size must lie in (0, J]")
        for name in ("G", "G_bar", "k_bar", "L", "B", "trials"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    # -- serialization --------------------------------------------------

    @classmethod
    def from_yaml(cls, path) -> "RunConfig":
        with open(path) as fh:
            raw = yaml.safe_load(fh) or {}
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        for key in ("p_max_dbm_range", "c_range", "f_max_range"):
            if key in raw and raw[key] is not None:
                raw[key] = tuple(raw[key])
        return cls(**raw)

    def to_yaml(self, path) -> None:
        with open(path, "w") as fh:
            yaml.safe_dump(self.as_plain_dict(), fh, sort_keys=False)

    def as_plain_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for key in ("p_max_dbm_range", "c_range", "f_max_range"):
            d[key] = list(d[key])
        return d

    def config_hash(self) -> str:
        """Short provenance hash of the fully-resolved parameter block."""
        canon = yaml.safe_dump(self.as_plain_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    # -- derived objects ------------------------------------------------

    @property
    def num_params(self) -> int:
        return (self.q + 1) * self.num_classes

    def radio(self) -> RadioConfig:
        s_dl = 32.0 * self.num_params
        return RadioConfig(
            W_dl=self.W_dl_mhz * 1e6,
            W_ul=self.W_ul_mhz * 1e6,
            N0=dbm_to_w(self.N0_dbm_hz),
            snr_min=db_to_linear(self.snr_min_db),
            I=self.I,
            K=self.K,
            P_bs_max=dbm_to_w(self.P_bs_dbm),
            S_dl=s_dl,
            S_ul=s_dl + 32.0,        # the scalar loss value rides along
            S_B=self.B * self.q * 8.0,
        )

    def build_network(self, rng: np.random.Generator) -> Network:
        return generate_network(
            self.radio(),
            I=self.I,
            J_per_fog=self.j_per_fog,
            radius_km=self.radius_km,
            p_max_range_w=(dbm_to_w(self.p_max_dbm_range[0]),
                           dbm_to_w(self.p_max_dbm_range[1])),
            c_range=self.c_range,
            f_max_range=self.f_max_range,
            f_min=self.f_min,
            theta_half=self.theta_half,
            e_max=self.e_max,
            L=self.L,
            rng=rng,
        )

    def build_data(self, rng: np.random.Generator):
        dataset = synthetic_clusters(self.n_samples, self.q, self.num_classes, rng)
        fog_of_ue = [i for i, n in enumerate(self.j_per_fog) for _ in range(n)]
        shards = partition(dataset, self.J, self.partition_mode, rng, fog_of_ue)
        return dataset, shards
