"""End-to-end round loop: solver call, local training, aggregation, cost
accounting, stopping, and the flexible (straggler-aware) schedule.

The causal structure is strict: round g's resource allocation sees only the
channel state of round g, and the cost C(g) uses the loss measured at the
round-start model w^g together with delays accumulated so far.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import allocator
from .allocator import ResourceDecision, SolverSettings
from .config import RunConfig
from .training import (ModelState, fog_aggregate, global_loss, global_update,
                       accuracy, local_round, lr_schedule, ue_rng)

CSV_COLUMNS = ["scheme", "seed", "kind", "g", "loss", "T", "sum_T", "cost", "S",
               "T_thresh", "solver_iters", "max_energy", "G_star", "T_star",
               "accuracy"]


@dataclass
class CostLedger:
    alpha: float
    F0: float
    T0: float
    F: list = field(default_factory=list)
    T: list = field(default_factory=list)
    C: list = field(default_factory=list)

    @property
    def sum_T(self) -> float:
        return float(sum(self.T))

    def cost_update(self, F_g: float, T_g: float) -> float:
        if not np.isfinite(F_g):
            raise ValueError(f"non-finite loss {F_g}")
        if T_g < 0:
            raise ValueError("round delay cannot be negative")
        self.F.append(float(F_g))
        self.T.append(float(T_g))
        c = self.alpha * F_g / self.F0 + (1 - self.alpha) * self.sum_T / self.T0
        self.C.append(float(c))
        return c


@dataclass
class StopState:
    k_bar: int
    G_bar: int
    eps: float = 1e-6
    k: int = 0
    G_star: int | None = None

    def stop_check(self, C_g: float, C_prev: float, g: int) -> bool:
        """Count consecutive cost increases; fire once both thresholds hold."""
        if self.G_star is not None:
            return True
        if C_g - C_prev >= self.eps:
            self.k += 1
        else:
            self.k = 0
        if self.k >= self.k_bar and g >= self.G_bar:
            self.G_star = g - self.k_bar
            return True
        return False


@dataclass
class AggregationSchedule:
    T_thresh: float
    delta_T: float
    xi: float | None      # None until calibrated from the first round
    J_min: int
    delta_G: int
    members: np.ndarray   # bool mask, grows monotonically
    rounds_since_expand: int = 0

    def expand_check(self, delta_norm: float) -> bool:
        trigger = (self.xi is not None and delta_norm < self.xi) \
            or self.rounds_since_expand >= self.delta_G
        if trigger:
            self.T_thresh += self.delta_T
            self.rounds_since_expand = 0
        else:
            self.rounds_since_expand += 1
        return trigger


def smoothed_cost(C: list, window: int = 5) -> float:
    """Moving average of the cost tail; the stopping rule watches this
    rather than the raw per-round cost to tolerate SGD noise."""
    if not C:
        raise ValueError("smoothed_cost needs at least one value")
    w = min(len(C), window)
    return float(sum(C[-w:]) / w)


def init_threshold(decision: ResourceDecision, J_min: int) -> tuple[float, np.ndarray]:
    """Initial threshold: the J_min-th smallest soft latency, and that cohort."""
    t = decision.t_ue
    if not (0 < J_min <= t.size):
        raise ValueError("J_min out of range")
    cut = float(np.sort(t)[J_min - 1])
    return cut, t <= cut


@dataclass
class RunResult:
    w: np.ndarray
    G_star: int | None
    T_star: float | None
    final_loss: float
    final_accuracy: float
    rows: list
    ledger: CostLedger
    config_hash: str = ""
    seed: int = 0


def _round_energy_max(decision: ResourceDecision, network) -> float:
    idx = np.nonzero(decision.participants)[0]
    r = network.radio
    e = (decision.p[idx] * r.S_ul / decision.tau[idx]
         + network.L * network.theta_half[idx] * network.c[idx] * r.S_B
         * decision.f[idx] ** 2)
    return float(np.max(e))


def _row(cfg: RunConfig, seed: int, kind: str, **kw) -> dict:
    row = {c: "" for c in CSV_COLUMNS}
    row["scheme"] = cfg.scheme
    row["seed"] = seed
    row["kind"] = kind
    row.update(kw)
    return row


def _decide(cfg: RunConfig, network, g: int, seed: int,
            settings: SolverSettings) -> ResourceDecision:
    rng = np.random.default_rng([seed, 2, g])
    if cfg.scheme in ("full", "flexible"):
        relaxed = cfg.scheme == "flexible"
        return allocator.path_following(network, cfg.alpha, settings, rng,
                                        T0=cfg.T0, relaxed=relaxed)
    if cfg.scheme == "eb":
        return allocator.baseline_eb(network, cfg.alpha, T0=cfg.T0)
    if cfg.scheme == "fra":
        return allocator.baseline_fra(network, cfg.alpha, T0=cfg.T0)
    if cfg.scheme == "sampling":
        return allocator.baseline_sampling(network, cfg.alpha, settings, rng,
                                           cfg.subset_size, T0=cfg.T0)
    raise ValueError(f"unknown scheme {cfg.scheme!r}")


def _train_round(cfg: RunConfig, model: ModelState, shards, participants,
                 eta_g: float, seed: int, g: int):
    """Local SGD on the participating UEs, aggregated fog-by-fog.

    Returns (new model isn't built here) the summed delta per fog, the summed
    start-of-round losses, and the raw total delta for the expansion trigger.
    """
    by_fog: dict[int, list] = {}
    for j in np.nonzero(participants)[0]:
        shard = shards[j]
        upd = local_round(model, shard, cfg.L, cfg.B, eta_g,
                          ue_rng(seed, g, int(j)), cfg.reg)
        by_fog.setdefault(shard.owner[0], []).append(upd)
    deltas, loss_sum = [], 0.0
    for fog_id in sorted(by_fog):
        d, l = fog_aggregate(by_fog[fog_id])
        deltas.append(d)
        loss_sum += l
    total = np.zeros_like(model.w)
    for d in deltas:
        total += d
    return deltas, loss_sum, total


def run_full(cfg: RunConfig, seed: int,
             settings: SolverSettings | None = None) -> RunResult:
    """Full aggregation (also serves the eb/fra/sampling schemes)."""
    settings = settings or SolverSettings()
    network = cfg.build_network(np.random.default_rng([seed, 1]))
    dataset, shards = cfg.build_data(np.random.default_rng([seed, 0]))
    model = ModelState.zeros(cfg.q, cfg.num_classes)
    ledger = CostLedger(cfg.alpha, cfg.F0, cfg.T0)
    stop = StopState(k_bar=cfg.k_bar, G_bar=cfg.G_bar, eps=cfg.epsilon)
    rows: list[dict] = []
    extra = 0          # one extra accounted round after the stop fires
    # with static channels the allocation problem is identical every round;
    # sampling is the exception because it redraws its subset per round
    reuse = network.distance_jitter_km == 0 and cfg.scheme != "sampling"
    decision = None
    for g in range(cfg.G):
        network.regenerate_channels(g, np.random.default_rng([seed, 4, g]))
        try:
            if decision is None or not reuse:
                decision = _decide(cfg, network, g, seed, settings)
            eta_g = lr_schedule(g, cfg.eta0, cfg.lr_decay)
            deltas, loss_sum, _ = _train_round(
                cfg, model, shards, decision.participants, eta_g, seed, g)
        except Exception as exc:
            raise RuntimeError(f"round {g} failed: {exc}") from exc
        count = int(decision.participants.sum())
        F_g = loss_sum / count
        # sampling keeps the fixed per-UE aggregation weight 1/J; absent UEs
        # simply contribute nothing that round, which is what slows it down
        divisor = cfg.J if cfg.scheme == "sampling" else count
        model = global_update(model, deltas, eta_g, divisor)
        c = ledger.cost_update(F_g, decision.t)
        rows.append(_row(cfg, seed, "round", g=g, loss=F_g, T=decision.t,
                         sum_T=ledger.sum_T, cost=c, S=count, T_thresh="",
                         solver_iters=decision.iterations,
                         max_energy=_round_energy_max(decision, network)))
        if stop.G_star is not None:
            extra += 1
            if extra >= 1:
                break
        elif g >= 1:
            # the consecutive-increase check watches a 5-round moving average
            # of C(g) so single-round SGD noise cannot trip it
            stop.stop_check(smoothed_cost(ledger.C),
                            smoothed_cost(ledger.C[:-1]), g)
    G_star = stop.G_star
    T_star = ledger.sum_T if G_star is not None else None
    final_loss = global_loss(model.w, shards, cfg.reg)
    final_acc = accuracy(model.w, dataset.X, dataset.y)
    rows.append(_row(cfg, seed, "summary", g=len(ledger.C) - 1, loss=final_loss,
                     sum_T=ledger.sum_T, G_star="" if G_star is None else G_star,
                     T_star="" if T_star is None else T_star,
                     accuracy=final_acc))
    return RunResult(w=model.w, G_star=G_star, T_star=T_star,
                     final_loss=final_loss, final_accuracy=final_acc,
                     rows=rows, ledger=ledger,
                     config_hash=cfg.config_hash(), seed=seed)


def run_flexible(cfg: RunConfig, seed: int,
                 settings: SolverSettings | None = None) -> RunResult:
    """Straggler-aware schedule: fast cohort first, threshold grows over time."""
    settings = settings or SolverSettings()
    network = cfg.build_network(np.random.default_rng([seed, 1]))
    dataset, shards = cfg.build_data(np.random.default_rng([seed, 0]))
    model = ModelState.zeros(cfg.q, cfg.num_classes)
    ledger = CostLedger(cfg.alpha, cfg.F0, cfg.T0)
    stop = StopState(k_bar=cfg.k_bar, G_bar=cfg.G_bar, eps=cfg.epsilon)
    rows: list[dict] = []
    schedule: AggregationSchedule | None = None
    members = np.zeros(cfg.J, bool)
    extra = 0
    reuse = network.distance_jitter_km == 0
    decision = None
    for g in range(cfg.G):
        network.regenerate_channels(g, np.random.default_rng([seed, 4, g]))
        try:
            if decision is None or not reuse:
                decision = _decide(cfg, network, g, seed, settings)
            if schedule is None:
                t0, cohort = init_threshold(decision, cfg.J_min)
                schedule = AggregationSchedule(
                    T_thresh=t0, delta_T=cfg.delta_T, xi=cfg.xi,
                    J_min=cfg.J_min, delta_G=cfg.delta_G, members=cohort)
            received = decision.t_ue <= schedule.T_thresh
            members |= received
            schedule.members = members
            if not received.any():
                raise RuntimeError("no UE met the aggregation threshold")
            eta_g = lr_schedule(g, cfg.eta0, cfg.lr_decay)
            deltas, loss_sum, total = _train_round(
                cfg, model, shards, received, eta_g, seed, g)
        except Exception as exc:
            raise RuntimeError(f"round {g} failed: {exc}") from exc
        S_g = int(members.sum())
        model = global_update(model, deltas, eta_g, S_g)
        delta_norm = float(np.linalg.norm(total / S_g))
        if schedule.xi is None:
            schedule.xi = 0.1 * delta_norm   # relative trigger, calibrated once
        F_g = loss_sum / S_g
        # the accounted round delay is the deadline itself: the server waits
        # out the full threshold before aggregating
        T_g = schedule.T_thresh
        c = ledger.cost_update(F_g, T_g)
        rows.append(_row(cfg, seed, "round", g=g, loss=F_g, T=T_g,
                         sum_T=ledger.sum_T, cost=c, S=S_g,
                         T_thresh=schedule.T_thresh,
                         solver_iters=decision.iterations,
                         max_energy=_round_energy_max(decision, network)))
        if S_g < cfg.J:   # once everyone is in, the threshold has no work left
            schedule.expand_check(delta_norm)
        if stop.G_star is not None:
            extra += 1
            if extra >= 1:
                break
        elif g >= 1 and S_g == cfg.J:
            stop.stop_check(smoothed_cost(ledger.C),
                            smoothed_cost(ledger.C[:-1]), g)
    G_star = stop.G_star
    T_star = ledger.sum_T if G_star is not None else None
    final_loss = global_loss(model.w, shards, cfg.reg)
    final_acc = accuracy(model.w, dataset.X, dataset.y)
    rows.append(_row(cfg, seed, "summary", g=len(ledger.C) - 1, loss=final_loss,
                     sum_T=ledger.sum_T, G_star="" if G_star is None else G_star,
                     T_star="" if T_star is None else T_star,
                     accuracy=final_acc))
    return RunResult(w=model.w, G_star=G_star, T_star=T_star,
                     final_loss=final_loss, final_accuracy=final_acc,
                     rows=rows, ledger=ledger,
                     config_hash=cfg.config_hash(), seed=seed)


def run(cfg: RunConfig, seed: int | None = None,
        settings: SolverSettings | None = None) -> RunResult:
    seed = cfg.seed if seed is None else seed
    if cfg.scheme == "flexible":
        return run_flexible(cfg, seed, settings)
    return run_full(cfg, seed, settings)


def write_csv(path, rows) -> None:
    """One row per round plus a summary row per run; see CSV_COLUMNS.

    Floats are written with repr precision so equal-seed runs are
    byte-identical.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            out = {}
            for k, v in row.items():
                if isinstance(v, (float, np.floating)):
                    out[k] = repr(float(v))
                elif isinstance(v, np.integer):
                    out[k] = int(v)
                else:
                    out[k] = v
            writer.writerow(out)
