"""Policy evaluation: run held-out episodes and report extrinsic
performance.  Greedy action selection by default; a stochastic mode
samples from the policy instead (useful for untrained baselines, where
greedy behavior is an arbitrary constant direction)."""

from dataclasses import dataclass

import numpy as np

from .agents import GreedyPolicy, SamplingPolicy, agent_from_meta
from .checkpoint import load_checkpoint
from .envs import EnvConfig, FrameStack, GridMaze

MODES = ("greedy", "stochastic")


@dataclass
class EvalReport:
    episodes: int
    mean_return: float
    std_return: float
    success_rate: float
    mean_length: float
    trap_time_fraction: float

    def to_dict(self):
        return {
            "episodes": self.episodes,
            "mean_return": self.mean_return,
            "std_return": self.std_return,
            "success_rate": self.success_rate,
            "mean_length": self.mean_length,
            "trap_time_fraction": self.trap_time_fraction,
        }


def evaluate_agent(agent, env_config, episodes, frame_stack=4, seed=0, mode="greedy"):
    """Run the agent for a fixed number of fresh episodes."""
    if episodes < 1:
        raise ValueError(f"episodes must be >= 1, got {episodes}")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    expected = frame_stack * env_config.obs_dim
    if agent.obs_dim != expected:
        raise ValueError(
            f"agent expects obs dim {agent.obs_dim}, env provides {expected} "
            f"({frame_stack} x {env_config.obs_dim})"
        )
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(episodes + 1)
    if mode == "greedy":
        policy = GreedyPolicy(agent)
    else:
        policy = SamplingPolicy(agent, np.random.default_rng(children[-1]))

    returns = np.zeros(episodes)
    lengths = np.zeros(episodes, dtype=int)
    successes = np.zeros(episodes, dtype=bool)
    trap_steps = np.zeros(episodes, dtype=int)
    for i in range(episodes):
        env = GridMaze(env_config, seed=children[i])
        stacker = FrameStack(env_config.obs_dim, frame_stack)
        stacker.reset(env.reset())
        done = False
        while not done:
            action = int(policy.act(stacker.current()[None])[0])
            tr = env.step(action)
            stacker.push(tr.next_state)
            returns[i] += tr.reward
            lengths[i] += 1
            trap_steps[i] += int(tr.info["in_trap"])
            done = tr.done
        successes[i] = tr.info["success"]

    return EvalReport(
        episodes=episodes,
        mean_return=float(returns.mean()),
        std_return=float(returns.std()),
        success_rate=float(successes.mean()),
        mean_length=float(lengths.mean()),
        trap_time_fraction=float(trap_steps.sum() / lengths.sum()),
    )


def evaluate_checkpoint(path, episodes, env_config=None, frame_stack=None,
                        seed=0, mode="greedy"):
    """Rebuild the agent from a checkpoint and evaluate it; env settings
    default to the ones recorded at save time."""
    ckpt = load_checkpoint(path)
    agent = agent_from_meta(ckpt.meta)
    agent.load_state_dict(ckpt.params)
    if env_config is None:
        if "env" not in ckpt.meta:
            raise ValueError(f"checkpoint {path} has no env metadata; pass env_config")
        env_config = EnvConfig(**ckpt.meta["env"])
    if frame_stack is None:
        frame_stack = ckpt.meta.get("frame_stack", 4)
    report = evaluate_agent(agent, env_config, episodes, frame_stack=frame_stack,
                            seed=seed, mode=mode)
    return report, agent
