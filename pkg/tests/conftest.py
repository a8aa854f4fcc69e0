import numpy as np
import pytest
from hypothesis import settings

from fogfl.radio import RadioConfig, UEProfile
from fogfl.topology import Network, default_bs_positions, generate_network

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

# MNIST-scale payloads: 7850 weights at 32 bits, batches of 20 x 784 bytes
MNIST_PARAMS = 7850


def mnist_radio(I: int = 1) -> RadioConfig:
    return RadioConfig(
        W_dl=10e6, W_ul=10e6,
        N0=10 ** (-174.0 / 10.0) / 1000.0,
        snr_min=10 ** (1.0 / 10.0),
        I=I, K=8, P_bs_max=10.0,
        S_dl=MNIST_PARAMS * 32.0,
        S_ul=MNIST_PARAMS * 32.0 + 32.0,
        S_B=20 * 784 * 8.0,
    )


def make_network(J: int = 3, seed: int = 0, *, I: int = 1,
                 e_max: float = 0.1, L: int = 20) -> Network:
    """Small random network drawn from the standard heterogeneity ranges."""
    rng = np.random.default_rng(seed)
    radio = mnist_radio(I)
    base, extra = divmod(J, I)
    per_fog = [base + (1 if i < extra else 0) for i in range(I)]
    return generate_network(
        radio, I=I, J_per_fog=per_fog, radius_km=1.0,
        p_max_range_w=(10 ** (10 / 10) / 1000.0, 10 ** (23 / 10) / 1000.0),
        c_range=(10.0, 20.0), f_max_range=(1e9, 3e9), f_min=1e6,
        theta_half=1e-28, e_max=e_max, L=L, rng=rng)


def make_2ue_network(seed: int) -> Network:
    """Two UEs in one cell with random placement and capabilities."""
    rng = np.random.default_rng(seed)
    radio = mnist_radio(1)
    ues = []
    for _ in range(2):
        d = rng.uniform(0.05, 1.0)
        ang = rng.uniform(0, 2 * np.pi)
        ues.append(UEProfile(
            fog_id=0,
            p_max=10 ** rng.uniform(np.log10(0.01), np.log10(0.2)),
            c=rng.uniform(10, 20), f_min=1e6, f_max=rng.uniform(1e9, 3e9),
            theta_half=1e-28, e_max=0.1,
            position=(d * np.cos(ang), d * np.sin(ang))))
    return Network(radio=radio, ues=ues,
                   bs_positions=default_bs_positions(1, 1.0),
                   e_max=0.1, L=20)


@pytest.fixture
def small_network():
    return make_network(J=3, seed=0)
