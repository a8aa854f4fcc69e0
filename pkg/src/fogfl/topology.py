"""Network topology: BS layout, UE placement, heterogeneity draws, channels."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .radio import RadioConfig, UEProfile, path_loss_gain, rate_dl

# UEs closer than this to their BS are pushed out to keep phi < 1 and the
# path-loss model sane.
MIN_DISTANCE_KM = 0.005


def default_bs_positions(I: int, radius_km: float) -> np.ndarray:
    """One BS at the centre, the rest on a ring at half the disc radius."""
    pos = np.zeros((I, 2))
    if I > 1:
        ang = 2 * np.pi * np.arange(I - 1) / (I - 1)
        pos[1:, 0] = 0.5 * radius_km * np.cos(ang)
        pos[1:, 1] = 0.5 * radius_km * np.sin(ang)
    return pos


@dataclass
class Network:
    """Topology plus the per-round channel realization.

    ``phi`` is regenerated via :meth:`regenerate_channels` before each round's
    resource allocation.  With static distances (the default) the gains are
    constant; the per-round jitter flag models low mobility.
    """

    radio: RadioConfig
    ues: list[UEProfile]
    bs_positions: np.ndarray
    e_max: float
    L: int
    distance_jitter_km: float = 0.0
    distances: np.ndarray = field(init=False)
    phi: np.ndarray = field(init=False)

    def __post_init__(self):
        self.base_distances = np.array([
            max(MIN_DISTANCE_KM, float(np.hypot(*(np.asarray(ue.position) - self.bs_positions[ue.fog_id]))))
            for ue in self.ues
        ])
        self.distances = self.base_distances.copy()
        self.phi = path_loss_gain(self.distances)
        self.fog_ids = np.array([ue.fog_id for ue in self.ues])
        self.p_max = np.array([ue.p_max for ue in self.ues])
        self.f_min = np.array([ue.f_min for ue in self.ues])
        self.f_max = np.array([ue.f_max for ue in self.ues])
        self.c = np.array([ue.c for ue in self.ues])
        self.theta_half = np.array([ue.theta_half for ue in self.ues])
        self._check_power_floor()

    @property
    def J(self) -> int:
        return len(self.ues)

    def _check_power_floor(self):
        floor = self.power_floor()
        bad = np.nonzero(floor > self.p_max)[0]
        if bad.size:
            j = int(bad[0])
            raise ValueError(
                f"UE {j} (fog {int(self.fog_ids[j])}): minimum-SNR power "
                f"{floor[j]:.3e} W exceeds its power cap {self.p_max[j]:.3e} W"
            )

    def power_floor(self) -> np.ndarray:
        """Per-UE transmit power needed to reach the minimum uplink SNR."""
        r = self.radio
        return r.snr_min * r.W_ul * r.N0 / (r.K * self.phi)

    def regenerate_channels(self, g: int, rng: np.random.Generator | None = None) -> None:
        """Redraw large-scale gains for round ``g``.

        Distances stay fixed unless ``distance_jitter_km`` is set, in which
        case each UE gets an independent radial perturbation per round.
        """
        if self.distance_jitter_km > 0:
            if rng is None:
                raise ValueError("channel jitter requires an rng")
            jitter = rng.uniform(-self.distance_jitter_km, self.distance_jitter_km, self.J)
            self.distances = np.maximum(MIN_DISTANCE_KM, self.base_distances + jitter)
        self.phi = path_loss_gain(self.distances)
        self._check_power_floor()

    def downlink_delays(self) -> np.ndarray:
        """Per-UE downlink delay; identical within a cell (multicast rate)."""
        t_dl = np.empty(self.J)
        for i in range(self.radio.I):
            mask = self.fog_ids == i
            if not mask.any():
                continue
            t_dl[mask] = self.radio.S_dl / rate_dl(self.phi[mask], self.radio)
        return t_dl


def generate_network(
    radio: RadioConfig,
    *,
    I: int,
    J_per_fog: list[int],
    radius_km: float,
    p_max_range_w: tuple[float, float],
    c_range: tuple[float, float],
    f_max_range: tuple[float, float],
    f_min: float,
    theta_half: float,
    e_max: float,
    L: int,
    rng: np.random.Generator,
    bs_positions: np.ndarray | None = None,
    distance_jitter_km: float = 0.0,
) -> Network:
    """Draw a heterogeneous UE population inside a disc of ``radius_km``.

    UE positions are uniform over the disc; each fog's quota of UEs is drawn
    in fog order so the layout is reproducible for a fixed rng.
    """
    if bs_positions is None:
        bs_positions = default_bs_positions(I, radius_km)
    ues = []
    for fog_id, n in enumerate(J_per_fog):
        for _ in range(n):
            r = radius_km * np.sqrt(rng.uniform())
            ang = rng.uniform(0, 2 * np.pi)
            pos = (r * np.cos(ang), r * np.sin(ang))
            # power caps are uniform on the dB scale, matching the stated
            # heterogeneity ranges
            p_max = 10.0 ** rng.uniform(np.log10(p_max_range_w[0]), np.log10(p_max_range_w[1]))
            ues.append(UEProfile(
                fog_id=fog_id,
                p_max=p_max,
                c=rng.uniform(*c_range),
                f_min=f_min,
                f_max=rng.uniform(*f_max_range),
                theta_half=theta_half,
                e_max=e_max,
                position=pos,
            ))
    return Network(radio=radio, ues=ues, bs_positions=bs_positions,
                   e_max=e_max, L=L, distance_jitter_km=distance_jitter_km)
