"""The training loop: collect synchronized rollouts, mix intrinsic and
extrinsic rewards, compute n-step returns, take one optimizer step, and
log windowed metrics deterministically.

A run is a pure function of (config, seed): environment streams, action
sampling, parameter init, and evaluation each draw from their own spawned
seed stream, so repeating a run reproduces metrics.csv byte for byte.
"""

import json
import time
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .agents import SamplingPolicy, a2c_loss, agent_meta, build_agent
from .attention import attn_weights
from .autodiff import Tensor, backward, no_grad
from .checkpoint import save_checkpoint
from .config import save_config
from .curiosity import combined_loss, curiosity_terms
from .envs import VecRunner, make_envs
from .evaluate import evaluate_agent
from .metrics import MetricsRecord, MetricsWriter, feature_std
from .optim import Adam


def compute_returns(rewards, dones, bootstrap_values, discount, values=None):
    """n-step discounted returns, truncated at episode ends.

    R_t = sum_i gamma^i r_{t+i} within the rollout, plus gamma^n V(s_n)
    when the tail is not terminal.  Computed as a plain left-to-right
    discounted sum per start index.  With ``values`` given, also returns
    advantages R_t - V(s_t).  gamma = 0 is the valid myopic limit.
    """
    if not 0.0 <= discount <= 1.0:
        raise ValueError(f"discount must lie in [0, 1], got {discount}")
    rewards = np.asarray(rewards, dtype=float)
    dones = np.asarray(dones, dtype=bool)
    if rewards.shape != dones.shape:
        raise ValueError(f"rewards {rewards.shape} vs dones {dones.shape}")
    squeeze = rewards.ndim == 1
    if squeeze:
        rewards = rewards[None]
        dones = dones[None]
    bootstrap = np.atleast_1d(np.asarray(bootstrap_values, dtype=float))
    E, T = rewards.shape
    if bootstrap.shape != (E,):
        raise ValueError(f"bootstrap values {bootstrap.shape}, expected ({E},)")
    returns = np.zeros((E, T))
    for e in range(E):
        for t in range(T):
            acc = 0.0
            g = 1.0
            terminated = False
            for i in range(t, T):
                acc += g * rewards[e, i]
                g *= discount
                if dones[e, i]:
                    terminated = True
                    break
            if not terminated:
                acc += g * bootstrap[e]
            returns[e, t] = acc
    if squeeze:
        returns = returns[0]
    if values is None:
        return returns
    values = np.asarray(values, dtype=float)
    if values.shape != returns.shape:
        raise ValueError(f"values {values.shape} do not match returns {returns.shape}")
    return returns, returns - values


@dataclass
class RunArtifacts:
    run_dir: Path | None
    config: object
    metrics_path: Path | None
    checkpoint_path: Path | None
    summary: dict
    records: list


class _Accumulator:
    """Interval sums for the windowed CSV row."""

    def __init__(self):
        self.reset()

    def reset(self):
        self.sums = {}
        self.counts = {}

    def add(self, name, value):
        if value is None:
            return
        self.sums[name] = self.sums.get(name, 0.0) + float(value)
        self.counts[name] = self.counts.get(name, 0) + 1

    def mean(self, name):
        if self.counts.get(name, 0) == 0:
            return None
        return self.sums[name] / self.counts[name]


class Trainer:
    def __init__(self, config):
        self.config = config
        root = np.random.SeedSequence(config.seed)
        init_ss, env_ss, action_ss, eval_ss = root.spawn(4)
        self.eval_ss = eval_ss
        self.envs = make_envs(config.env, config.num_envs, env_ss)
        self.num_actions = self.envs[0].num_actions
        self.stacked_dim = config.frame_stack * config.env.obs_dim
        self.agent = build_agent(
            config.agent,
            self.stacked_dim,
            self.num_actions,
            feature_dim=config.feature_dim,
            hidden_dim=config.hidden_dim,
            curiosity=config.curiosity,
            seed=np.random.default_rng(init_ss),
        )
        self.params = self.agent.parameters()
        opt = config.optimizer
        self.optimizer = Adam(
            self.params,
            learning_rate=opt.learning_rate,
            beta1=opt.beta1,
            beta2=opt.beta2,
            eps=opt.eps,
        )
        self.runner = VecRunner(self.envs, frame_stack=config.frame_stack)
        self.policy = SamplingPolicy(self.agent, np.random.default_rng(action_ss))

    # -- one optimizer step ------------------------------------------------

    def update(self, batch, capture_grads=False):
        cfg = self.config
        E, T = batch.num_envs, batch.num_steps
        B = E * T
        obs = batch.obs.reshape(B, -1)
        actions = batch.actions.reshape(B)

        outputs = self.agent.forward(obs)
        rewards = batch.rewards
        cur = None
        if self.agent.curiosity is not None:
            phi_next = self.agent.features(batch.next_obs.reshape(B, -1))
            cur = curiosity_terms(self.agent.curiosity, outputs.features, actions, phi_next)
            rewards = rewards + cur.intrinsic_rewards.reshape(E, T)

        returns = compute_returns(rewards, batch.dones, batch.bootstrap_values, cfg.discount)
        losses = a2c_loss(outputs, actions, returns.reshape(B),
                          value_coef=cfg.value_coef, entropy_coef=cfg.entropy_coef)
        if cur is not None:
            total = combined_loss(losses.total, cur.j_fwd, cur.j_inv,
                                  self.agent.curiosity.config.beta)
        else:
            total = losses.total
        backward(total, self.params)
        grad_norms = self._grad_norms() if capture_grads else None
        self.optimizer.step()
        return outputs, losses, cur, grad_norms

    def _grad_norms(self):
        blocks = {}
        for name, p in self.agent.named_parameters().items():
            block = name.split(".")[0]
            g = p.grad
            blocks.setdefault(block, 0.0)
            if g is not None:
                blocks[block] += float(np.sum(np.square(g)))
        return {b: float(np.sqrt(v)) for b, v in blocks.items()}

    def _head_gate_entropy(self, features_data):
        """Mean attention entropy of the actor/critic gates (atta2c only)."""
        if self.agent.kind != "atta2c":
            return None
        phi = Tensor(features_data)
        with no_grad():
            ents = []
            for layer in (self.agent.attn_actor, self.agent.attn_critic):
                w = attn_weights(layer, phi).data
                terms = np.where(w > 0.0, w * np.log(np.where(w > 0.0, w, 1.0)), 0.0)
                ents.append(float(np.mean(-np.sum(terms, axis=-1))))
        return float(np.mean(ents))

    def _evaluate(self):
        child = self.eval_ss.spawn(1)[0]
        return evaluate_agent(
            self.agent,
            self.config.env,
            self.config.eval_episodes,
            frame_stack=self.config.frame_stack,
            seed=child,
            mode="greedy",
        )

    def _save_checkpoint(self, path, rollout_idx):
        params = {name: p.data for name, p in self.agent.named_parameters().items()}
        meta = agent_meta(self.agent)
        meta.update(
            {
                "env": self.config.env.to_dict(),
                "frame_stack": self.config.frame_stack,
                "seed": self.config.seed,
                "rollout_idx": rollout_idx,
            }
        )
        save_checkpoint(path, params, optimizer=self.optimizer.state_dict(), meta=meta)

    # -- the loop ----------------------------------------------------------

    def run(self):
        cfg = self.config
        out_dir = Path(cfg.out_dir) if cfg.out_dir else None
        writer = None
        diag_fh = None
        metrics_path = checkpoint_path = None
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            save_config(cfg, out_dir / "config.yaml")
            metrics_path = out_dir / "metrics.csv"
            checkpoint_path = out_dir / "checkpoint.json"
            writer = MetricsWriter(metrics_path)
            diag_fh = open(out_dir / "diagnostics.jsonl", "w", encoding="utf-8")

        is_noisy = cfg.env.kind == "noisy_tv"
        window = deque(maxlen=100)
        success_window = deque(maxlen=cfg.sustained_window)
        acc = _Accumulator()
        records = []
        eval_history = []
        episodes_completed = 0
        best_windowed = None
        first_sustained = None
        stop_reason = None
        trap_steps_total = 0
        steps_per_rollout = cfg.num_envs * cfg.rollout_steps
        t0 = time.monotonic()

        rollout_idx = 0
        try:
            for rollout_idx in range(1, cfg.total_rollouts + 1):
                batch = self.runner.collect(self.policy, cfg.rollout_steps)
                will_log = rollout_idx % cfg.log_interval == 0
                outputs, losses, cur, grad_norms = self.update(batch, capture_grads=will_log)

                # episode bookkeeping
                for ep in batch.episodes:
                    window.append(ep)
                    success_window.append(ep.success)
                episodes_completed += len(batch.episodes)
                if batch.episodes and len(window) == window.maxlen:
                    mean_ret = sum(ep.ret for ep in window) / len(window)
                    if best_windowed is None or mean_ret > best_windowed:
                        best_windowed = mean_ret
                if (
                    first_sustained is None
                    and len(success_window) == cfg.sustained_window
                    and sum(success_window) / cfg.sustained_window >= cfg.sustained_threshold
                ):
                    first_sustained = rollout_idx

                # interval accumulators
                acc.add("policy_loss", losses.policy_loss.item())
                acc.add("value_loss", losses.value_loss.item())
                acc.add("entropy", losses.entropy.item())
                if cur is not None:
                    acc.add("j_fwd", cur.j_fwd.item())
                    acc.add("j_inv", cur.j_inv.item())
                    acc.add("mean_intrinsic_reward", float(np.mean(cur.intrinsic_rewards)))
                    for stats in cur.weight_stats.values():
                        acc.add("attn_weight_entropy", stats["entropy"])
                head_ent = self._head_gate_entropy(outputs.features.data)
                if head_ent is not None:
                    acc.add("attn_weight_entropy", head_ent)
                if is_noisy:
                    trap_now = int(np.sum(batch.in_trap))
                    trap_steps_total += trap_now
                    acc.add("trap_time_fraction", trap_now / batch.in_trap.size)

                if will_log:
                    record = MetricsRecord(
                        rollout_idx=rollout_idx,
                        env_steps=rollout_idx * steps_per_rollout,
                        mean_extrinsic_reward=(
                            sum(ep.ret for ep in window) / len(window) if window else None
                        ),
                        mean_intrinsic_reward=acc.mean("mean_intrinsic_reward"),
                        policy_loss=acc.mean("policy_loss"),
                        value_loss=acc.mean("value_loss"),
                        entropy=acc.mean("entropy"),
                        j_fwd=acc.mean("j_fwd"),
                        j_inv=acc.mean("j_inv"),
                        feature_std=feature_std(outputs.features.data),
                        attn_weight_entropy=acc.mean("attn_weight_entropy"),
                        trap_time_fraction=acc.mean("trap_time_fraction") if is_noisy else None,
                        wall_time_s=time.monotonic() - t0,
                    )
                    records.append(record)
                    if writer is not None:
                        writer.write(record)
                    if diag_fh is not None:
                        entry = {"rollout_idx": rollout_idx, "grad_norms": grad_norms}
                        if cur is not None:
                            entry["weight_stats"] = cur.weight_stats
                        json.dump(entry, diag_fh)
                        diag_fh.write("\n")
                        diag_fh.flush()
                    acc.reset()

                if (
                    checkpoint_path is not None
                    and cfg.checkpoint_interval
                    and rollout_idx % cfg.checkpoint_interval == 0
                ):
                    self._save_checkpoint(checkpoint_path, rollout_idx)

                if cfg.eval_interval and rollout_idx % cfg.eval_interval == 0:
                    report = self._evaluate()
                    eval_history.append(
                        {
                            "rollout_idx": rollout_idx,
                            "success_rate": report.success_rate,
                            "mean_return": report.mean_return,
                        }
                    )
                    if (
                        cfg.stop_on_eval_success is not None
                        and report.success_rate >= cfg.stop_on_eval_success
                    ):
                        stop_reason = "eval_success"
                        break

                if cfg.stop_on_sustained and first_sustained is not None:
                    stop_reason = "sustained_success"
                    break
        finally:
            if diag_fh is not None:
                diag_fh.close()
            if writer is not None:
                writer.close()

        final_windowed = sum(ep.ret for ep in window) / len(window) if window else None
        score = best_windowed
        if score is None:
            score = final_windowed if final_windowed is not None else 0.0
        summary = {
            "agent": cfg.agent,
            "env": cfg.env.label(),
            "seed": cfg.seed,
            "rollouts_run": rollout_idx,
            "env_steps": rollout_idx * steps_per_rollout,
            "episodes_completed": episodes_completed,
            "best_windowed_reward": best_windowed,
            "final_windowed_reward": final_windowed,
            "score": score,
            "success_rate_window": (
                sum(ep.success for ep in window) / len(window) if window else None
            ),
            "first_sustained_rollout": first_sustained,
            "stopped_early": stop_reason is not None,
            "stop_reason": stop_reason,
            "eval_history": eval_history,
            "trap_time_fraction": (
                trap_steps_total / (rollout_idx * steps_per_rollout) if is_noisy else None
            ),
            "wall_time_s": time.monotonic() - t0,
        }
        if checkpoint_path is not None:
            self._save_checkpoint(checkpoint_path, rollout_idx)
        if out_dir is not None:
            with open(out_dir / "summary.json", "w", encoding="utf-8") as fh:
                json.dump(summary, fh, indent=2)
                fh.write("\n")
        return RunArtifacts(
            run_dir=out_dir,
            config=cfg,
            metrics_path=metrics_path,
            checkpoint_path=checkpoint_path,
            summary=summary,
            records=records,
        )


def train(config):
    """Run one seeded training process to completion."""
    return Trainer(config).run()
