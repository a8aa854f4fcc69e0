"""Per-round radio/compute resource allocation.

The nonconvex min-delay problem (power, CPU speed, bandwidth) is solved by a
path-following loop: each outer iteration convexifies the rate constraint with
an affine minorant and the communication-energy term with a convex majorant,
both touching at the current expansion point, then solves the resulting convex
program.  The inner program is handed to a conic interior-point solver through
a parametrized cvxpy model compiled once per problem size.

Unit conventions inside the solver: natural-log rate units for the minorant
coefficients (the ln2 factor enters exactly once in the rate constraint),
CPU speeds scaled by 1e9 and rates by 1e6 to keep the conic problem
well-conditioned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np
from scipy.optimize import minimize_scalar

from .radio import LN2
from .topology import Network

F_SCALE = 1e9    # cycles/s
T_SCALE = 1e6    # bits/s
OM_SCALE = 1e4   # inverse-SNR; omega is ~1e-8..1 and needs centring too


class AllocationError(RuntimeError):
    """Raised when a (sub)problem is infeasible or internally inconsistent."""


@dataclass
class SolverSettings:
    tol: float = 1e-6            # relative constraint slack accepted on output
    conv_tol: float = 1e-4       # relative objective change stopping the outer loop
    max_iters: int = 20
    monotone_tol: float = 1e-9   # allowed objective increase before erroring


@dataclass
class ExpansionPoint:
    p0: np.ndarray
    beta_tilde0: np.ndarray
    tau0: np.ndarray
    omega0: np.ndarray

    def __post_init__(self):
        if np.any(self.beta_tilde0 < 1) or np.any(self.omega0 <= 0) or np.any(self.tau0 <= 0):
            raise ValueError("invalid expansion point")


@dataclass
class ApproxCoeffs:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray


@dataclass
class ResourceDecision:
    """One round's allocation.  Arrays cover all UEs; non-participants are NaN."""

    p: np.ndarray
    f: np.ndarray
    beta: np.ndarray
    tau: np.ndarray
    t: float                      # round delay
    t_ue: np.ndarray              # per-UE delay (the soft latencies in relaxed mode)
    objective: float
    participants: np.ndarray      # bool mask
    iterations: int = 0
    objective_trace: list = field(default_factory=list)
    binding: list = field(default_factory=list)
    violations: list = field(default_factory=list)


def approx_coeffs(beta_tilde0, omega0) -> ApproxCoeffs:
    """Minorant coefficients of the per-Hz rate (1/bt)*ln(1+1/om) at a point."""
    bt0 = np.asarray(beta_tilde0, dtype=float)
    om0 = np.asarray(omega0, dtype=float)
    if np.any(bt0 < 1) or np.any(om0 <= 0):
        raise ValueError("expansion point must satisfy beta_tilde >= 1, omega > 0")
    log_term = np.log1p(1.0 / om0)
    a = 2.0 * log_term / bt0 + 1.0 / (bt0 * (om0 + 1.0))
    b = 1.0 / (bt0 * om0 * (om0 + 1.0))
    c = log_term / bt0 ** 2
    return ApproxCoeffs(a=a, b=b, c=c)


def rate_lb(coeffs: ApproxCoeffs, beta_tilde, omega):
    """Affine lower bound on the per-Hz rate, nats/s/Hz."""
    return coeffs.a - coeffs.b * np.asarray(omega) - coeffs.c * np.asarray(beta_tilde)


def true_rate_nats(beta_tilde, omega):
    return np.log1p(1.0 / np.asarray(omega)) / np.asarray(beta_tilde)


def energy_ub(p, tau, p0, tau0, S_ul):
    """Convex upper bound on the uplink energy S_ul*p/tau, valid for 2*tau > tau0."""
    p, tau = np.asarray(p, dtype=float), np.asarray(tau, dtype=float)
    if np.any(2 * tau <= tau0):
        raise ValueError("energy majorant needs 2*tau > tau0")
    return 0.5 * S_ul * (p ** 2 / (tau0 * p0) + p0 / (2 * tau - tau0))


def _comm_energy_at_init(p, q, W_ul, S_ul, n):
    """Uplink energy at the initializer's bandwidth share 1/n."""
    tau0 = (W_ul / n) * np.log2(1.0 + p / q)
    return S_ul * p / tau0


def init_feasible(network: Network, rng: np.random.Generator,
                  participants: np.ndarray | None = None) -> ExpansionPoint:
    """Random feasible starting point for the path-following loop.

    Power is drawn uniformly between the minimum-SNR floor and the power cap,
    with the cap tightened (by bisection on the monotone uplink-energy curve)
    so that the implied expansion point respects the per-round energy budget.
    """
    mask = np.ones(network.J, bool) if participants is None else participants
    idx = np.nonzero(mask)[0]
    n = idx.size
    if n == 0:
        raise AllocationError("no participating UEs")
    r = network.radio
    q = r.W_ul * r.N0 / (r.K * network.phi[idx])
    floor = network.power_floor()[idx]
    p_max = network.p_max[idx]
    bad = np.nonzero(floor > p_max)[0]
    if bad.size:
        j = int(idx[bad[0]])
        raise AllocationError(
            f"UE {j}: minimum-SNR power {floor[bad[0]]:.3e} W exceeds cap {p_max[bad[0]]:.3e} W")

    e_cp_min = network.L * network.theta_half[idx] * network.c[idx] * r.S_B * network.f_min[idx] ** 2
    budget = 0.95 * (network.e_max - e_cp_min)
    infeasible = _comm_energy_at_init(floor, q, r.W_ul, r.S_ul, n) > budget
    if np.any(infeasible):
        j = int(idx[np.nonzero(infeasible)[0][0]])
        raise AllocationError(
            f"UE {j}: energy budget {network.e_max:.3e} J infeasible even at the SNR power floor")
    over = _comm_energy_at_init(p_max, q, r.W_ul, r.S_ul, n) > budget
    lo, hi = floor.copy(), p_max.copy()
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        too_high = _comm_energy_at_init(mid, q, r.W_ul, r.S_ul, n) > budget
        hi = np.where(too_high, mid, hi)
        lo = np.where(too_high, lo, mid)
    p_cap = np.where(over, lo, p_max)

    p0 = rng.uniform(floor, np.maximum(floor, p_cap))
    snr0 = p0 / q
    tau0 = (r.W_ul / n) * np.log2(1.0 + snr0)
    return ExpansionPoint(p0=p0, beta_tilde0=np.full(n, float(n)),
                          tau0=tau0, omega0=1.0 / snr0)


class _CompiledInner:
    """Parametrized convex program, compiled once per (J, relaxed) shape."""

    def __init__(self, n: int, relaxed: bool):
        self.n = n
        self.relaxed = relaxed
        par = lambda: cp.Parameter(n, nonneg=True)
        self.P = {name: par() for name in (
            "p_max", "p_floor", "f_min", "f_max", "cp_coef", "kappa_f", "t_dl",
            "a", "b", "c", "sqrt_q", "e_quad", "e_lin", "tau0")}
        self.s_ul = cp.Parameter(nonneg=True)
        self.e_max = cp.Parameter(nonneg=True)
        self.rate_scale = cp.Parameter(nonneg=True)  # T_SCALE * ln2 / W_ul

        p = cp.Variable(n)
        f = cp.Variable(n)
        bt = cp.Variable(n)
        tau = cp.Variable(n)
        om = cp.Variable(n)
        s = cp.Variable(n)
        t = cp.Variable(n) if relaxed else cp.Variable()
        P = self.P
        delay = P["t_dl"] + cp.multiply(P["cp_coef"], cp.inv_pos(f)) + self.s_ul * cp.inv_pos(tau)
        cons = [
            delay <= t,
            P["a"] - cp.multiply(P["b"], om) - cp.multiply(P["c"], bt) >= cp.multiply(self.rate_scale, tau),
            cp.SOC(p + om,
                   cp.vstack([cp.reshape(2 * P["sqrt_q"], (1, n), order="C"),
                              cp.reshape(p - om, (1, n), order="C")]),
                   axis=0),
            cp.sum(cp.inv_pos(bt)) <= 1,
            s == 2 * tau - P["tau0"],
            cp.multiply(P["e_quad"], cp.square(p)) + cp.multiply(P["e_lin"], cp.inv_pos(s))
                + cp.multiply(P["kappa_f"], cp.square(f)) <= self.e_max,
            p >= P["p_floor"], p <= P["p_max"],
            f >= P["f_min"], f <= P["f_max"],
            bt >= 1,
        ]
        objective = cp.sum(t) / n if relaxed else t
        self.vars = dict(p=p, f=f, bt=bt, tau=tau, om=om, t=t)
        self.problem = cp.Problem(cp.Minimize(objective), cons)

    def solve(self) -> dict:
        import warnings
        with warnings.catch_warnings():
            # we check the status ourselves; near-machine-precision targets
            # routinely return "optimal_inaccurate" with a usable iterate
            warnings.filterwarnings("ignore", message="Solution may be inaccurate")
            # warm_start=False keeps repeated equal-seed runs bit-identical:
            # the cached problem must not remember the previous solution
            self.problem.solve(solver="CLARABEL", warm_start=False,
                               tol_gap_abs=1e-9, tol_gap_rel=1e-9,
                               tol_feas=1e-9)
        if self.problem.status not in ("optimal", "optimal_inaccurate"):
            raise AllocationError(f"inner convex program {self.problem.status}")
        out = {k: (float(v.value) if v.ndim == 0 else np.asarray(v.value))
               for k, v in self.vars.items()}
        out["om"] = out["om"] / OM_SCALE
        return out


_COMPILED: dict[tuple[int, bool], _CompiledInner] = {}


def _compiled(n: int, relaxed: bool) -> _CompiledInner:
    key = (n, relaxed)
    if key not in _COMPILED:
        _COMPILED[key] = _CompiledInner(n, relaxed)
    return _COMPILED[key]


def _load_parameters(model: _CompiledInner, network: Network, idx: np.ndarray,
                     expansion: ExpansionPoint) -> None:
    r = network.radio
    phi = network.phi[idx]
    q = r.W_ul * r.N0 / (r.K * phi)
    P = model.P
    P["p_max"].value = network.p_max[idx]
    P["p_floor"].value = network.power_floor()[idx]
    P["f_min"].value = network.f_min[idx] / F_SCALE
    P["f_max"].value = network.f_max[idx] / F_SCALE
    P["cp_coef"].value = network.L * network.c[idx] * r.S_B / F_SCALE
    P["kappa_f"].value = network.L * network.theta_half[idx] * network.c[idx] * r.S_B * F_SCALE ** 2
    P["t_dl"].value = network.downlink_delays()[idx]
    P["sqrt_q"].value = np.sqrt(q * OM_SCALE)
    coeffs = approx_coeffs(expansion.beta_tilde0, expansion.omega0)
    P["a"].value, P["c"].value = coeffs.a, coeffs.c
    P["b"].value = coeffs.b / OM_SCALE  # the model's omega variable is scaled
    P["tau0"].value = expansion.tau0 / T_SCALE
    P["e_quad"].value = 0.5 * r.S_ul / (expansion.tau0 * expansion.p0)
    P["e_lin"].value = 0.5 * r.S_ul * expansion.p0 / T_SCALE
    model.s_ul.value = r.S_ul / T_SCALE
    model.e_max.value = network.e_max
    model.rate_scale.value = T_SCALE * LN2 / r.W_ul


def _decision_from(network: Network, idx: np.ndarray, sol: dict, alpha: float,
                   T0: float, relaxed: bool) -> ResourceDecision:
    J = network.J
    r = network.radio
    # polish away solver-level slack: exact boxes, exact bandwidth budget,
    # tau capped at the rate the polished (beta, p) actually achieve
    p = np.clip(sol["p"], network.power_floor()[idx], network.p_max[idx])
    f = np.clip(sol["f"] * F_SCALE, network.f_min[idx], network.f_max[idx])
    beta = 1.0 / np.maximum(sol["bt"], 1.0)
    tau = sol["tau"] * T_SCALE
    total = float(np.sum(beta))
    if total > 1.0:
        beta *= 1.0 / total
        tau *= 1.0 / total
    rate = beta * r.W_ul * np.log2(1.0 + p * r.K * network.phi[idx] / (r.W_ul * r.N0))
    tau = np.minimum(tau, rate)

    full = lambda: np.full(J, np.nan)
    p_a, f_a, beta_a, tau_a, t_ue = full(), full(), full(), full(), full()
    p_a[idx], f_a[idx], beta_a[idx], tau_a[idx] = p, f, beta, tau
    t_dl = network.downlink_delays()
    delays = t_dl[idx] + network.L * network.c[idx] * r.S_B / f + r.S_ul / tau
    t_ue[idx] = delays
    t = float(np.max(delays))
    mask = np.zeros(J, bool)
    mask[idx] = True
    if relaxed:
        objective = (1 - alpha) * float(np.mean(delays)) / T0
    else:
        objective = (1 - alpha) * t / T0
    return ResourceDecision(p=p_a, f=f_a, beta=beta_a, tau=tau_a, t=t, t_ue=t_ue,
                            objective=objective, participants=mask)


def solve_inner(expansion: ExpansionPoint, network: Network, alpha: float,
                settings: SolverSettings, *, T0: float = 1.0,
                participants: np.ndarray | None = None,
                relaxed: bool = False) -> ResourceDecision:
    """Solve the convexified program at one expansion point."""
    mask = np.ones(network.J, bool) if participants is None else participants
    idx = np.nonzero(mask)[0]
    model = _compiled(idx.size, relaxed)
    _load_parameters(model, network, idx, expansion)
    try:
        sol = model.solve()
    except AllocationError as exc:
        raise AllocationError(f"{exc}; binding candidates: energy/rate at the "
                              f"expansion point") from exc
    return _decision_from(network, idx, sol, alpha, T0, relaxed)


def _surrogate_objective(sol_t, relaxed: bool) -> float:
    return float(np.mean(sol_t)) if relaxed else float(sol_t)


def path_following(network: Network, alpha: float, settings: SolverSettings,
                   rng: np.random.Generator, *, T0: float = 1.0,
                   participants: np.ndarray | None = None,
                   relaxed: bool = False) -> ResourceDecision:
    """Outer loop: solve, re-expand at the optimum, repeat until stationary."""
    mask = np.ones(network.J, bool) if participants is None else participants
    idx = np.nonzero(mask)[0]
    model = _compiled(idx.size, relaxed)
    expansion = init_feasible(network, rng, participants=mask)
    trace: list[float] = []
    sol = None
    for _ in range(settings.max_iters):
        _load_parameters(model, network, idx, expansion)
        new_sol = model.solve()
        obj = _surrogate_objective(new_sol["t"], relaxed)
        if trace and obj > trace[-1] + settings.monotone_tol:
            # a sub-conv_tol uptick is solver noise at stationarity: stop on
            # the previous (better) iterate; anything larger is a real bug
            if obj - trace[-1] <= settings.conv_tol * max(abs(trace[-1]), 1.0):
                break
            raise AllocationError(
                f"path-following objective increased: {trace[-1]:.12g} -> {obj:.12g}")
        sol = new_sol
        done = bool(trace) and abs(trace[-1] - obj) <= settings.conv_tol * max(abs(trace[-1]), 1e-12)
        trace.append(obj)
        # clip away the conic solver's tiny constraint slack before re-expanding
        expansion = ExpansionPoint(p0=np.maximum(sol["p"], 1e-12),
                                   beta_tilde0=np.maximum(sol["bt"], 1.0),
                                   tau0=np.maximum(sol["tau"] * T_SCALE, 1e-9),
                                   omega0=np.maximum(sol["om"], 1e-15))
        if done:
            break
    decision = _decision_from(network, idx, sol, alpha, T0, relaxed)
    decision.iterations = len(trace)
    decision.objective_trace = trace
    decision.binding = _binding_constraints(decision, network, settings)
    return decision


def solve_relaxed(network: Network, alpha: float, settings: SolverSettings,
                  rng: np.random.Generator, *, T0: float = 1.0,
                  participants: np.ndarray | None = None) -> ResourceDecision:
    """Per-UE soft-latency variant; favors well-placed UEs with lower t_ij."""
    return path_following(network, alpha, settings, rng, T0=T0,
                          participants=participants, relaxed=True)


def _binding_constraints(decision: ResourceDecision, network: Network,
                         settings: SolverSettings) -> list[str]:
    idx = np.nonzero(decision.participants)[0]
    r = network.radio
    tol = 100 * settings.tol
    out = []
    if np.nansum(decision.beta) >= 1 - tol:
        out.append("bandwidth_budget")
    e = (decision.p[idx] * r.S_ul / decision.tau[idx]
         + network.L * network.theta_half[idx] * network.c[idx] * r.S_B * decision.f[idx] ** 2)
    if np.any(e >= network.e_max * (1 - tol)):
        out.append("energy_cap")
    if np.any(decision.p[idx] >= network.p_max[idx] * (1 - tol)):
        out.append("power_cap")
    if np.any(decision.f[idx] >= network.f_max[idx] * (1 - tol)):
        out.append("cpu_cap")
    return out


def check_feasibility(decision: ResourceDecision, network: Network,
                      rel_tol: float = 1e-6) -> list[str]:
    """Violations of the original (non-approximated) constraints."""
    idx = np.nonzero(decision.participants)[0]
    r = network.radio
    p, f, beta, tau = (decision.p[idx], decision.f[idx],
                       decision.beta[idx], decision.tau[idx])
    phi = network.phi[idx]
    problems = []
    if np.nansum(decision.beta) > 1 + 1e-9:
        problems.append(f"bandwidth sum {np.nansum(decision.beta):.9f} > 1")
    floor = network.power_floor()[idx]
    if np.any(p < floor * (1 - rel_tol)) or np.any(p > network.p_max[idx] * (1 + rel_tol)):
        problems.append("power outside [floor, p_max]")
    if np.any(f < network.f_min[idx] * (1 - rel_tol)) or np.any(f > network.f_max[idx] * (1 + rel_tol)):
        problems.append("cpu speed outside box")
    rate = beta * r.W_ul * np.log2(1.0 + p * r.K * phi / (r.W_ul * r.N0))
    if np.any(rate < tau * (1 - rel_tol)):
        problems.append("uplink rate below tau")
    e = p * r.S_ul / tau + network.L * network.theta_half[idx] * network.c[idx] * r.S_B * f ** 2
    if np.any(e > network.e_max * (1 + rel_tol) + 1e-9):
        problems.append(f"energy cap exceeded by {float(np.max(e)) - network.e_max:.3e} J")
    t_dl = network.downlink_delays()[idx]
    need = t_dl + network.L * network.c[idx] * r.S_B / f + r.S_ul / tau
    if np.any(decision.t_ue[idx] < need * (1 - rel_tol) - 1e-9):
        problems.append("per-UE delay below its components")
    return problems


# ----------------------------------------------------------------------------
# Baselines
# ----------------------------------------------------------------------------

def baseline_eb(network: Network, alpha: float, *, T0: float = 1.0) -> ResourceDecision:
    """Equal bandwidth: beta = 1/J fixed, per-UE (p, f) optimized separately."""
    J = network.J
    r = network.radio
    beta = 1.0 / J
    t_dl = network.downlink_delays()
    q = r.W_ul * r.N0 / (r.K * network.phi)
    floor = network.power_floor()
    p_out = np.empty(J)
    f_out = np.empty(J)
    tau_out = np.empty(J)
    delays = np.empty(J)
    for j in range(J):
        kappa = network.L * network.theta_half[j] * network.c[j] * r.S_B
        a_cp = network.L * network.c[j] * r.S_B

        def rate(p):
            return beta * r.W_ul * math.log2(1.0 + p / q[j])

        def e_co(p):
            return p * r.S_ul / rate(p)

        budget_floor = network.e_max - kappa * network.f_min[j] ** 2
        if e_co(floor[j]) > budget_floor:
            raise AllocationError(f"UE {j}: equal-bandwidth scheme energy-infeasible")
        # largest power the energy budget admits at f_min
        lo, hi = floor[j], network.p_max[j]
        if e_co(hi) > budget_floor:
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if e_co(mid) > budget_floor:
                    hi = mid
                else:
                    lo = mid
            p_cap = lo
        else:
            p_cap = network.p_max[j]

        def f_of(p):
            rem = network.e_max - e_co(p)
            return min(network.f_max[j], math.sqrt(max(rem, 0.0) / kappa)) if rem > 0 else network.f_min[j]

        def delay(p):
            return t_dl[j] + a_cp / max(f_of(p), network.f_min[j]) + r.S_ul / rate(p)

        res = minimize_scalar(delay, bounds=(floor[j], p_cap), method="bounded",
                              options={"xatol": 1e-12})
        p_j = float(res.x)
        if delay(p_cap) < delay(p_j):
            p_j = p_cap
        p_out[j] = p_j
        f_out[j] = max(f_of(p_j), network.f_min[j])
        tau_out[j] = rate(p_j)
        delays[j] = delay(p_j)
    t = float(np.max(delays))
    return ResourceDecision(p=p_out, f=f_out, beta=np.full(J, beta), tau=tau_out,
                            t=t, t_ue=delays, objective=(1 - alpha) * t / T0,
                            participants=np.ones(J, bool))


def baseline_fra(network: Network, alpha: float, *, T0: float = 1.0) -> ResourceDecision:
    """Fixed resource allocation: p = P^max for everyone; the bandwidth split
    equalizes the (dominant) uplink delays in closed form; f then follows from
    the energy cap at equality, clipped to its box."""
    J = network.J
    r = network.radio
    t_dl = network.downlink_delays()
    q = r.W_ul * r.N0 / (r.K * network.phi)
    p = network.p_max.copy()
    unit_rate = r.W_ul * np.log2(1.0 + p / q)  # rate at beta = 1
    # equal uplink delay for all: beta_j proportional to 1/unit_rate_j
    t_ul = r.S_ul * float(np.sum(1.0 / unit_rate))
    beta = r.S_ul / (t_ul * unit_rate)
    tau = beta * unit_rate
    kappa = network.L * network.theta_half * network.c * r.S_B
    a_cp_coef = network.L * network.c * r.S_B
    e_co = p * t_ul
    rem = network.e_max - e_co
    f = np.empty(J)
    violations: list[str] = []
    for j in range(J):
        if rem[j] <= kappa[j] * network.f_min[j] ** 2:
            f[j] = network.f_min[j]
            if rem[j] < 0:
                violations.append(
                    f"UE {j}: uplink energy {e_co[j]:.3e} J alone exceeds cap "
                    f"{network.e_max:.3e} J at p=P_max")
        else:
            f[j] = min(network.f_max[j], math.sqrt(rem[j] / kappa[j]))
    delays = t_dl + a_cp_coef / f + t_ul
    t = float(np.max(delays))
    return ResourceDecision(p=p, f=f, beta=beta, tau=tau, t=t, t_ue=delays,
                            objective=(1 - alpha) * t / T0,
                            participants=np.ones(J, bool), violations=violations)


def baseline_sampling(network: Network, alpha: float, settings: SolverSettings,
                      rng: np.random.Generator, subset_size: int, *,
                      T0: float = 1.0) -> ResourceDecision:
    """Random user sampling: the full solver on a uniform subset; the freed
    bandwidth is shared among the selected UEs only."""
    if not (0 < subset_size <= network.J):
        raise AllocationError("subset size out of range")
    chosen = rng.choice(network.J, size=subset_size, replace=False)
    mask = np.zeros(network.J, bool)
    mask[chosen] = True
    return path_following(network, alpha, settings, rng, T0=T0, participants=mask)
