import numpy as np
import pytest

from fogfl.bounds import BoundInputs, lemma2_divergence_bound, theorem1_bound


def test_frozen_constants_example():
    # lam = mu = 1, L = 20, delta^2 = 1, no variance/heterogeneity, J = 1:
    # theta = 2*400 + (2 + 1/4)*19*20 = 800 + 855 = 1655; psi = max(64, 80) = 80
    inp = BoundInputs(lam=1.0, mu=1.0, gamma_sq=[0.0], delta_sq=1.0,
                      eps=[0.0], q0=1.0, L=20, J=1)
    assert inp.theta == pytest.approx(1655.0, rel=1e-12)
    assert inp.psi == pytest.approx(80.0)


def test_bound_at_zero_rounds_recovers_initial_distance():
    inp = BoundInputs(lam=1.0, mu=1.0, gamma_sq=[0.0], delta_sq=0.0,
                      eps=[0.0], q0=2.5, L=5)
    assert theorem1_bound(inp, 0) == pytest.approx(2.5)


def test_psi_switches_to_local_iteration_branch():
    # 4L dominates 64*mu/lam when L is large relative to the condition number
    inp = BoundInputs(lam=1.0, mu=1.0, gamma_sq=[0.0], delta_sq=0.0,
                      eps=[0.0], q0=1.0, L=50)
    assert inp.psi == pytest.approx(200.0)


def test_theta_aggregates_per_ue_terms():
    inp = BoundInputs(lam=0.5, mu=1.0, gamma_sq=[1.0, 3.0], delta_sq=2.0,
                      eps=[0.2, 0.4], q0=1.0, L=4, J=2)
    expect = (2 * 16 * 2.0
              + (2 + 0.5 / 4.0) * 3 * 4 * 2.0
              + 4 * (1.0 + 3.0) / 4.0
              + 6 * 1.0 * 4 * 0.3)
    assert inp.theta == pytest.approx(expect, rel=1e-12)


def test_bound_eventually_decays():
    inp = BoundInputs(lam=1.0, mu=1.0, gamma_sq=[0.1], delta_sq=0.1,
                      eps=[0.0], q0=1.0, L=5)
    big_g = [theorem1_bound(inp, g) for g in (10_000, 100_000, 1_000_000)]
    assert big_g[0] > big_g[1] > big_g[2]


def test_input_validation():
    with pytest.raises(ValueError):
        BoundInputs(lam=0.0, mu=1.0, gamma_sq=[0.0], delta_sq=1.0,
                    eps=[0.0], q0=1.0, L=5)
    with pytest.raises(ValueError):
        BoundInputs(lam=2.0, mu=1.0, gamma_sq=[0.0], delta_sq=1.0,
                    eps=[0.0], q0=1.0, L=5)
    with pytest.raises(ValueError):
        BoundInputs(lam=1.0, mu=1.0, gamma_sq=[-1.0], delta_sq=1.0,
                    eps=[0.0], q0=1.0, L=5)


def test_lemma2_divergence():
    assert lemma2_divergence_bound(4, 0.1, 2.0) == pytest.approx(
        3 * 4 * 0.01 * 2.0)
    assert lemma2_divergence_bound(1, 0.1, 2.0) == 0.0
    with pytest.raises(ValueError):
        lemma2_divergence_bound(0, 0.1, 2.0)
    with pytest.raises(ValueError):
        lemma2_divergence_bound(4, -0.1, 2.0)
