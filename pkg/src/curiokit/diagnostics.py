"""Probes of curiosity failure modes.

The headline probe freezes a uniform-random policy on the trapped grid and
trains only the forward dynamics head against a frozen, randomly
initialized feature encoder.  With a stationary target, prediction error
on ordinary transitions is learnable and decays; the trap resamples its
noise dimensions every step, so prediction error there has an irreducible
floor and the intrinsic reward stays inflated.  That asymmetry is what
lures prediction-error curiosity into the trap."""

from dataclasses import dataclass, field

import numpy as np

from .agents import RandomPolicy, build_agent
from .autodiff import backward, no_grad
from .curiosity import icm_forward_loss, intrinsic_reward, one_hot_actions
from .envs import EnvConfig, VecRunner, make_envs
from .optim import Adam


@dataclass
class ProbeResult:
    window_steps: int
    trap_means: list = field(default_factory=list)  # mean intrinsic per window
    free_means: list = field(default_factory=list)
    trap_counts: list = field(default_factory=list)
    free_counts: list = field(default_factory=list)

    @property
    def initial_trap(self):
        return self.trap_means[0]

    @property
    def final_trap(self):
        return self.trap_means[-1]

    def trap_retention(self):
        """Final-window trap reward as a fraction of the first window's."""
        if self.initial_trap is None or self.final_trap is None:
            raise ValueError("trap windows without samples; widen the window")
        return self.final_trap / self.initial_trap

    def free_trend_slope(self):
        """Least-squares slope of the trap-free reward over windows."""
        ys = [m for m in self.free_means if m is not None]
        if len(ys) < 2:
            raise ValueError("need at least 2 windows with trap-free samples")
        return float(np.polyfit(np.arange(len(ys)), ys, 1)[0])

    def to_dict(self):
        return {
            "window_steps": self.window_steps,
            "trap_means": self.trap_means,
            "free_means": self.free_means,
            "trap_counts": self.trap_counts,
            "free_counts": self.free_counts,
            "trap_retention": self.trap_retention(),
            "free_trend_slope": self.free_trend_slope(),
        }


def noisy_tv_probe(
    env_config=None,
    total_steps=100_000,
    window_steps=5_000,
    seed=0,
    feature_dim=32,
    hidden_dim=64,
    frame_stack=4,
    num_envs=4,
    rollout_steps=5,
    learning_rate=5e-3,
):
    """Train only the forward dynamics head under a frozen random policy
    and a frozen encoder, tracking mean intrinsic reward inside vs
    outside the trap per window of env steps.

    The default trap is noise-dominant (many noise dims relative to the
    grid planes), the static-filled-screen regime: most of the trap's
    prediction error is irreducible, so the trap reward holds its level
    while the trap-free reward decays."""
    if env_config is None:
        env_config = EnvConfig(kind="noisy_tv", noise_dims=64)
    if env_config.kind != "noisy_tv":
        raise ValueError(f"probe needs a noisy_tv env, got {env_config.kind!r}")
    steps_per_rollout = num_envs * rollout_steps
    if window_steps % steps_per_rollout or total_steps % window_steps:
        raise ValueError(
            "window_steps must divide total_steps and be a multiple of "
            f"num_envs * rollout_steps = {steps_per_rollout}"
        )

    root = np.random.SeedSequence(seed)
    init_ss, env_ss, action_ss = root.spawn(3)
    envs = make_envs(env_config, num_envs, env_ss)
    agent = build_agent(
        "icm",
        frame_stack * env_config.obs_dim,
        envs[0].num_actions,
        feature_dim=feature_dim,
        hidden_dim=hidden_dim,
        seed=np.random.default_rng(init_ss),
    )
    # forward-head-only training: encoder, inverse model, and actor/critic
    # all stay frozen at init so the prediction target is stationary
    params = [p for n, p in agent.named_parameters().items()
              if n.split(".")[0] == "forward_model"]
    optimizer = Adam(params, learning_rate=learning_rate)
    runner = VecRunner(envs, frame_stack=frame_stack)
    policy = RandomPolicy(envs[0].num_actions, np.random.default_rng(action_ss))

    result = ProbeResult(window_steps=window_steps)
    trap_sum = free_sum = 0.0
    trap_n = free_n = 0
    B = num_envs * rollout_steps
    for rollout in range(total_steps // steps_per_rollout):
        batch = runner.collect(policy, rollout_steps)
        with no_grad():
            phi_t = agent.features(batch.obs.reshape(B, -1))
            phi_next = agent.features(batch.next_obs.reshape(B, -1))
        a_onehot = one_hot_actions(batch.actions.reshape(B), envs[0].num_actions)
        j_fwd, errors_sq = icm_forward_loss(agent.curiosity, phi_t, a_onehot, phi_next)
        backward(j_fwd, params)
        optimizer.step()

        in_trap = batch.in_trap.reshape(B)
        rewards = intrinsic_reward(agent.curiosity, errors_sq)
        trap_sum += float(rewards[in_trap].sum())
        trap_n += int(in_trap.sum())
        free_sum += float(rewards[~in_trap].sum())
        free_n += int(B - in_trap.sum())

        if (rollout + 1) * steps_per_rollout % window_steps == 0:
            result.trap_means.append(trap_sum / trap_n if trap_n else None)
            result.free_means.append(free_sum / free_n if free_n else None)
            result.trap_counts.append(trap_n)
            result.free_counts.append(free_n)
            trap_sum = free_sum = 0.0
            trap_n = free_n = 0
    return result


def trap_affinity_comparison(
    seeds,
    env_config=None,
    total_rollouts=2_000,
    agents=("icm", "rcm"),
    **trainer_overrides,
):
    """Train each agent kind on the trapped grid and report the fraction
    of env steps spent inside the trap, per seed.

    Returns {agent: [fraction per seed]}.  This is a directional report,
    not an assertion: error-weighting is expected to blunt the trap's
    pull relative to plain prediction-error curiosity, but desk-scale
    runs are noisy and the numbers are published as-is."""
    from .config import TrainerConfig  # late import; config pulls in curiosity
    from .curiosity import CuriosityConfig, variant_for_kind
    from .training import train

    if env_config is None:
        env_config = EnvConfig(kind="noisy_tv", noise_dims=64)
    if env_config.kind != "noisy_tv":
        raise ValueError(f"comparison needs a noisy_tv env, got {env_config.kind!r}")
    fractions = {}
    for agent in agents:
        fractions[agent] = []
        for seed in seeds:
            cfg = TrainerConfig(
                agent=agent,
                env=env_config,
                total_rollouts=total_rollouts,
                seed=seed,
                curiosity=CuriosityConfig(variant=variant_for_kind(agent)),
                **trainer_overrides,
            )
            summary = train(cfg).summary
            fractions[agent].append(summary["trap_time_fraction"])
    return fractions
