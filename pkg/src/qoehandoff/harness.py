"""Experiment harness: train the per-interface delay models, run the
learned handoff agent against the oracle/naive/load-metric baselines over
an identical set of simulated runs, and aggregate handoff counts, mean
realized MOS and prediction accuracy into a report.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError
from .hmm import EmConfig, HmmModel, cross_validate, em_train, forward_filter
from .hmm.inference import predict_belief
from .netsim import (ROAMING, ScenarioConfig, SimRun, congestion_scenario,
                     generate_run, roaming_scenario, step_environment)
from .policies import (HysteresisConfig, JointState, QLearningConfig, QTable,
                       RewardConfig, count_handoffs, decide_handoff,
                       epsilon_greedy_action, exploit_action, m4_policy_step,
                       naive_policy_step, oracle_policy, q_update, reward)
from .probing import ProbeConfig, ProbeRecord, RnlEstimator, aggregate_epoch
from .qoe_model import CODECS, mos_from_delay, quantize_mos

ALL_POLICIES = ("best", "naive", "m4", "proposed")

# Run-index offsets keeping HMM fitting data, Q-learning episodes and the
# evaluation set disjoint for a shared scenario seed.
_HMM_RUN_OFFSET = 20_000
_TRAIN_RUN_OFFSET = 10_000

# A small constant step size tracks the bootstrapped targets far better
# than 1/n visit averaging at gamma=0.95, where early (near-zero) targets
# otherwise dominate the running mean for the life of the table.
_DEFAULT_HARNESS_QLEARN = QLearningConfig(
    alpha=0.1, gamma=0.95, epsilon=0.5, epsilon_decay=0.99,
    epsilon_floor=0.1, alpha_decay="constant")


@dataclass(frozen=True)
class HarnessConfig:
    scenario: ScenarioConfig
    probe: ProbeConfig = ProbeConfig()
    reward_cfg: RewardConfig = RewardConfig()
    qlearn: QLearningConfig = QLearningConfig()
    hysteresis: HysteresisConfig = HysteresisConfig()
    m4_margin_s: float = 0.02
    m4_dwell_epochs: int = 2
    policies_enabled: tuple[str, ...] = ALL_POLICIES
    training_episodes: int = 50
    hmm_training_runs: int = 10
    hmm_states: tuple[int, ...] = ()
    em: EmConfig = EmConfig()

    def __post_init__(self):
        unknown = set(self.policies_enabled) - set(ALL_POLICIES)
        if unknown:
            raise DomainError(f"unknown policies: {sorted(unknown)}")
        if not self.policies_enabled:
            raise DomainError("no policies enabled")
        if self.hmm_states and len(self.hmm_states) != len(self.scenario.channels):
            raise DomainError("hmm_states must give one state count per interface")


@dataclass
class PolicyResult:
    handoff_count: int = 0
    mos_sum: float = 0.0
    mos_epochs: int = 0
    reward_sum: float = 0.0
    # One attachment sequence per evaluated run (for timeline exports).
    paths: list = field(default_factory=list)

    @property
    def mean_mos(self) -> float:
        return self.mos_sum / self.mos_epochs if self.mos_epochs else float("nan")

    def as_dict(self) -> dict:
        return {"handoff_count": self.handoff_count,
                "mean_mos": self.mean_mos,
                "reward_sum": self.reward_sum}


@dataclass
class EvaluationReport:
    policies: dict[str, PolicyResult]
    prediction_accuracy: dict[str, float]
    metadata: dict = field(default_factory=dict)

    def reductions(self) -> dict[str, float | None]:
        """Handoff-count reduction of the learned policy vs each baseline."""
        out: dict[str, float | None] = {}
        proposed = self.policies.get("proposed")
        if proposed is None:
            return out
        for baseline in ("naive", "m4"):
            base = self.policies.get(baseline)
            if base is None:
                continue
            if base.handoff_count == 0:
                out[baseline] = None
            else:
                out[baseline] = (base.handoff_count - proposed.handoff_count) \
                    / base.handoff_count
        return out

    def to_json(self) -> str:
        doc = {
            "policies": {name: r.as_dict() for name, r in self.policies.items()},
            "reductions": {k: v for k, v in self.reductions().items()},
            "prediction_accuracy": self.prediction_accuracy,
            "metadata": self.metadata,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def state_to_qoe_map(model: HmmModel, delay_is_rtt: bool, codec, scheme) -> list[int]:
    """QoE band of each hidden state's typical delay (zero-loss MOS)."""
    mapping = []
    for emission in model.emissions:
        owd = emission.mean / 2.0 if delay_is_rtt else emission.mean
        mapping.append(quantize_mos(mos_from_delay(max(owd, 0.0), 0.0, codec), scheme))
    return mapping


def train_interface_models(cfg: HarnessConfig):
    """Fit one delay HMM per interface on held-out runs; also returns the
    2-fold cross-validated one-step prediction accuracy per interface."""
    scenario = cfg.scenario
    runs = [generate_run(scenario, _HMM_RUN_OFFSET + r)
            for r in range(cfg.hmm_training_runs)]
    models = []
    accuracy = {}
    for i, channel in enumerate(scenario.channels):
        k = cfg.hmm_states[i] if cfg.hmm_states else scenario.scheme.state_count
        dataset = [(run.delays_s[i], run.mos[i]) for run in runs]
        model, _ = em_train([obs for obs, _ in dataset], k, cfg.em,
                            scheme=scenario.scheme if k == scenario.scheme.state_count
                            else None)
        models.append(model)
        if len(dataset) >= 2:
            accuracy[channel.label] = cross_validate(
                dataset, 2, k, scenario.scheme, cfg.em)
    return models, accuracy


def _epoch_rtts(run: SimRun, epoch: int, cfg: HarnessConfig) -> list[float]:
    rtts = []
    for i in range(run.n_interfaces):
        records = [ProbeRecord(epoch_t=epoch, interface=i, rtt_s=float(rtt))
                   for rtt in [run.delays_s[i][epoch]] * cfg.probe.probes_per_second]
        value, _ = aggregate_epoch(records, cfg.probe)
        rtts.append(value)
    return rtts


def _joint_state(models, beliefs, qoe_maps, current: int, n_states: int) -> JointState:
    predicted = []
    for model, belief, qmap in zip(models, beliefs, qoe_maps):
        next_belief = predict_belief(model, belief)
        predicted.append(qmap[int(np.argmax(next_belief))])
    return JointState(tuple(predicted), current)


def _filter_step(model: HmmModel, belief, observation: float):
    """One forward-filter update of a single interface belief."""
    flp = model.frame_log_likelihood(np.array([observation]))[0]
    pred = predict_belief(model, belief) if belief is not None else model.prior
    post = pred * np.exp(flp - flp.max())
    return post / post.sum()


def run_q_policy(cfg: HarnessConfig, run: SimRun, models, qoe_maps, qtable: QTable,
                 train: bool, epsilon: float,
                 rng: np.random.Generator) -> PolicyResult:
    """Drive one run with the Q-agent, optionally updating the table."""
    scenario = cfg.scenario
    n_states = scenario.scheme.state_count
    result = PolicyResult()
    current = 0
    path = [current]
    epochs_since_handoff = cfg.hysteresis.dwell_epochs
    beliefs = [_filter_step(m, None, run.delays_s[i][0])
               for i, m in enumerate(models)]
    result.mos_sum += float(run.mos[current][0])
    result.mos_epochs += 1
    result.reward_sum += reward(float(run.mos[current][0]), cfg.reward_cfg.cost_min,
                                cfg.reward_cfg)
    for t in range(1, run.duration):
        s = _joint_state(models, beliefs, qoe_maps, current, n_states)
        if train:
            action = epsilon_greedy_action(qtable, s, cfg.qlearn, epsilon, rng)
        else:
            proposed = exploit_action(qtable, s)
            gain = qtable.row(s)[proposed] - qtable.row(s)[current]
            action = decide_handoff(proposed, current, gain, cfg.hysteresis,
                                    epochs_since_handoff)
        step = step_environment(run, t, current, action,
                                scenario.handoff_penalty_mos,
                                cfg.probe.probes_per_second)
        cost = cfg.reward_cfg.handoff_cost if step.handoff_occurred \
            else cfg.reward_cfg.cost_min
        r = reward(step.realized_mos, cost, cfg.reward_cfg)
        rtts = _epoch_rtts(run, t, cfg)
        beliefs = [_filter_step(m, b, rtts[i])
                   for i, (m, b) in enumerate(zip(models, beliefs))]
        if train:
            s_next = _joint_state(models, beliefs, qoe_maps, action, n_states)
            q_update(qtable, s, action, r, s_next, cfg.qlearn)
        if step.handoff_occurred:
            result.handoff_count += 1
            epochs_since_handoff = 0
        else:
            epochs_since_handoff += 1
        current = action
        path.append(current)
        result.mos_sum += step.realized_mos
        result.mos_epochs += 1
        result.reward_sum += r
    result.paths.append(path)
    return result


def _run_baseline(cfg: HarnessConfig, run: SimRun, kind: str) -> PolicyResult:
    scenario = cfg.scenario
    result = PolicyResult()
    current = 0
    path = [current]
    result.mos_sum += float(run.mos[current][0])
    result.mos_epochs += 1
    result.reward_sum += reward(float(run.mos[current][0]), cfg.reward_cfg.cost_min,
                                cfg.reward_cfg)
    rnl = [RnlEstimator(h=5, c=5.0) for _ in range(run.n_interfaces)]
    m4_hys = HysteresisConfig(margin=cfg.m4_margin_s, dwell_epochs=cfg.m4_dwell_epochs)
    oracle_path = None
    if kind == "best":
        oracle_path = oracle_policy([run.states[i] for i in range(run.n_interfaces)],
                                    start=0)
    last_rtts = _epoch_rtts(run, 0, cfg)
    for v, est in zip(last_rtts, rnl):
        est.update(v)
    for t in range(1, run.duration):
        if kind == "best":
            action = oracle_path[t]
        elif kind == "naive":
            # Delay-only weighted-QoS scoring on the latest measurements.
            qos = [{"delay": owd} for owd in
                   (np.asarray(last_rtts) / 2.0).tolist()]
            action = naive_policy_step(qos, {"delay": 1.0}, current)
        elif kind == "m4":
            values = [est.rnl if est.initialized else None for est in rnl]
            action = m4_policy_step(values, current, m4_hys)
        else:
            raise DomainError(f"unknown baseline {kind!r}")
        step = step_environment(run, t, current, action,
                                scenario.handoff_penalty_mos,
                                cfg.probe.probes_per_second)
        cost = cfg.reward_cfg.handoff_cost if step.handoff_occurred \
            else cfg.reward_cfg.cost_min
        if step.handoff_occurred:
            result.handoff_count += 1
        current = action
        path.append(current)
        result.mos_sum += step.realized_mos
        result.mos_epochs += 1
        result.reward_sum += reward(step.realized_mos, cost, cfg.reward_cfg)
        last_rtts = _epoch_rtts(run, t, cfg)
        for v, est in zip(last_rtts, rnl):
            est.update(v)
    result.paths.append(path)
    return result


def _merge(into: PolicyResult, part: PolicyResult) -> None:
    into.handoff_count += part.handoff_count
    into.mos_sum += part.mos_sum
    into.mos_epochs += part.mos_epochs
    into.reward_sum += part.reward_sum
    into.paths.extend(part.paths)


def run_comparison(cfg: HarnessConfig) -> EvaluationReport:
    """Run every enabled policy over the same evaluation runs.

    The learned policy first trains its Q-table over freshly generated
    warm-up episodes (epsilon-greedy, decaying), then is evaluated frozen;
    evaluation runs are never seen in training.
    """
    scenario = cfg.scenario
    if scenario.kind == ROAMING and len(scenario.channels) < 2:
        raise DomainError("policy comparison needs at least two interfaces")
    eval_runs = [generate_run(scenario, r) for r in range(scenario.runs)]

    results = {name: PolicyResult() for name in cfg.policies_enabled}
    accuracy: dict[str, float] = {}
    models = qoe_maps = qtable = None
    if "proposed" in cfg.policies_enabled:
        models, accuracy = train_interface_models(cfg)
        qoe_maps = [state_to_qoe_map(m, ch.delay_is_rtt, scenario.codec,
                                     scenario.scheme)
                    for m, ch in zip(models, scenario.channels)]
        qtable = QTable(scenario.scheme.state_count, len(scenario.channels))
        rng = np.random.default_rng([scenario.seed, 0xA11CE])
        epsilon = cfg.qlearn.epsilon
        for episode in range(cfg.training_episodes):
            train_run = generate_run(scenario, _TRAIN_RUN_OFFSET + episode)
            run_q_policy(cfg, train_run, models, qoe_maps, qtable,
                         train=True, epsilon=epsilon, rng=rng)
            epsilon = max(epsilon * cfg.qlearn.epsilon_decay,
                          cfg.qlearn.epsilon_floor)

    for run in eval_runs:
        for name in cfg.policies_enabled:
            if name == "proposed":
                part = run_q_policy(cfg, run, models, qoe_maps, qtable,
                                    train=False, epsilon=0.0,
                                    rng=np.random.default_rng(0))
            else:
                part = _run_baseline(cfg, run, name)
            _merge(results[name], part)

    metadata = {
        "scenario": scenario.kind,
        "codec": scenario.codec.name,
        "seed": scenario.seed,
        "runs": scenario.runs,
        "duration_epochs": scenario.duration_epochs,
        "training_episodes": cfg.training_episodes if qtable is not None else 0,
    }
    return EvaluationReport(policies=results, prediction_accuracy=accuracy,
                            metadata=metadata)


def load_config(path) -> HarnessConfig:
    """Build a harness configuration from a sectioned key=value file."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise DomainError(f"cannot read config file {path}")

    sc = parser["scenario"] if parser.has_section("scenario") else {}
    kind = sc.get("kind", "roaming")
    codec = CODECS.get(sc.get("codec", "g729" if kind == "roaming" else "g711"))
    if codec is None:
        raise DomainError(f"unknown codec {sc.get('codec')!r}")
    common = dict(
        codec=codec,
        duration_epochs=int(sc.get("duration_epochs", 101)),
        runs=int(sc.get("runs", 12)),
        seed=int(sc.get("seed", 0)),
    )
    if kind == "roaming":
        scenario = roaming_scenario(
            dwell_mean_epochs=float(sc.get("dwell_mean_epochs", 40.0)),
            handoff_penalty_mos=float(sc.get("handoff_penalty_mos", 0.3)),
            **common)
    elif kind == "wlan_congestion":
        scenario = congestion_scenario(**common)
    else:
        raise DomainError(f"unknown scenario kind {kind!r}")

    def section(name):
        return parser[name] if parser.has_section(name) else {}

    pr = section("probe")
    probe = ProbeConfig(
        probes_per_second=int(pr.get("probes_per_second", 5)),
        ba_packet_bytes=int(pr.get("ba_packet_bytes", 24)),
        late_threshold_s=float(pr.get("late_threshold_s", codec.late_threshold_s)),
        imputation=pr.get("imputation", "threshold_clamp"),
    )
    rw = section("reward")
    reward_cfg = RewardConfig(
        w_qoe=float(rw.get("w_qoe", 1.0)),
        qoe_min=float(rw.get("qoe_min", 1.0)),
        qoe_max=float(rw.get("qoe_max", 5.0)),
        cost_min=float(rw.get("cost_min", 0.0)),
        cost_max=float(rw.get("cost_max", 1.0)),
        handoff_cost=float(rw.get("handoff_cost", 1.0)),
    )
    ql = section("qlearn")
    dq = _DEFAULT_HARNESS_QLEARN
    qlearn = QLearningConfig(
        alpha=float(ql.get("alpha", dq.alpha)),
        gamma=float(ql.get("gamma", dq.gamma)),
        epsilon=float(ql.get("epsilon", dq.epsilon)),
        epsilon_decay=float(ql.get("epsilon_decay", dq.epsilon_decay)),
        epsilon_floor=float(ql.get("epsilon_floor", dq.epsilon_floor)),
        alpha_decay=ql.get("alpha_decay", dq.alpha_decay),
    )
    hy = section("hysteresis")
    hysteresis = HysteresisConfig(
        margin=float(hy.get("margin", 0.1)),
        dwell_epochs=int(hy.get("dwell_epochs", 2)),
    )
    ha = section("harness")
    policies = tuple(p.strip() for p in
                     ha.get("policies", ",".join(ALL_POLICIES)).split(",") if p.strip())
    hmm_states = tuple(int(x) for x in ha.get("hmm_states", "").split(",") if x.strip())
    if not hmm_states and kind == "roaming":
        hmm_states = (2, 3)
    return HarnessConfig(
        scenario=scenario, probe=probe, reward_cfg=reward_cfg, qlearn=qlearn,
        hysteresis=hysteresis,
        m4_margin_s=float(ha.get("m4_margin_s", 0.02)),
        m4_dwell_epochs=int(ha.get("m4_dwell_epochs", 2)),
        policies_enabled=policies,
        training_episodes=int(ha.get("training_episodes", 150)),
        hmm_training_runs=int(ha.get("hmm_training_runs", 10)),
        hmm_states=hmm_states,
        em=EmConfig(seed=int(ha.get("em_seed", 0))),
    )


def default_roaming_harness(seed: int = 0, runs: int = 12,
                            duration_epochs: int = 101) -> HarnessConfig:
    return HarnessConfig(
        scenario=roaming_scenario(runs=runs, duration_epochs=duration_epochs,
                                  seed=seed),
        qlearn=_DEFAULT_HARNESS_QLEARN,
        training_episodes=150,
        hmm_states=(2, 3),
    )
