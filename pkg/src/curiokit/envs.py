"""Desk-scale grid environments and the synchronous vectorized runner.

Three kinds share one implementation:

* ``grid_sparse``  -- reward only on reaching the goal.
* ``grid_dense``   -- adds distance-based shaping toward the goal.
* ``noisy_tv``     -- a sparse grid with a trap region; while the agent
  occupies the trap, extra observation dimensions are resampled uniformly
  at random every step (agent-triggered unlearnable noise), with zero
  extrinsic reward.

Observations are flattened one-hot grids with channels (agent, goal, wall,
trap), plus the noise dimensions for ``noisy_tv``.  A sticky-action
probability p > 0 turns any kind into its stochastic variant: with
probability p the previously executed action is repeated instead of the
one issued.
"""

from dataclasses import dataclass, field, fields

import numpy as np

NUM_ACTIONS = 4
# up, down, left, right as (row, col) deltas
ACTION_DELTAS = ((-1, 0), (1, 0), (0, -1), (0, 1))
CHANNELS = ("agent", "goal", "wall", "trap")
KINDS = ("grid_sparse", "grid_dense", "noisy_tv")


class EnvConfigError(ValueError):
    pass


@dataclass
class EnvConfig:
    kind: str = "grid_sparse"
    height: int = 8
    width: int = 8
    goal_reward: float = 1.0
    step_penalty: float = 0.0
    max_episode_len: int | None = None  # default 4 * (height + width)
    sticky_action_prob: float = 0.0
    trap: list | None = None  # [r0, c0, r1, c1], inclusive corners
    noise_dims: int = 8  # noisy_tv only
    dense_shaping: float = 0.1  # grid_dense only
    walls: list | None = None  # extra interior wall cells [[r, c], ...]
    seed: int | None = None  # pin the env rng; defaults to the run seed

    def __post_init__(self):
        if self.kind not in KINDS:
            raise EnvConfigError(f"unknown env kind: {self.kind!r}")
        if self.height < 4 or self.width < 4:
            raise EnvConfigError("grid must be at least 4x4 (border walls included)")
        if not (0.0 <= self.sticky_action_prob < 1.0):
            raise EnvConfigError(
                f"sticky_action_prob must lie in [0, 1), got {self.sticky_action_prob}"
            )
        if self.max_episode_len is None:
            self.max_episode_len = 4 * (self.height + self.width)
        if self.max_episode_len < 1:
            raise EnvConfigError("max_episode_len must be >= 1")
        if self.noise_dims < 1 and self.kind == "noisy_tv":
            raise EnvConfigError("noisy_tv needs noise_dims >= 1")
        if self.kind == "noisy_tv" and self.trap is None:
            # default trap: a 2x2 pocket in the top-right corner
            self.trap = [1, self.width - 3, 2, self.width - 2]
        if self.trap is not None:
            r0, c0, r1, c1 = self.trap
            if not (0 < r0 <= r1 < self.height - 1 and 0 < c0 <= c1 < self.width - 1):
                raise EnvConfigError(f"trap region {self.trap} outside the playable area")

    @property
    def obs_dim(self):
        base = self.height * self.width * len(CHANNELS)
        return base + (self.noise_dims if self.kind == "noisy_tv" else 0)

    @property
    def start_cell(self):
        return (1, 1)

    @property
    def goal_cell(self):
        return (self.height - 2, self.width - 2)

    def label(self):
        tag = f"{self.kind}_{self.height}x{self.width}"
        if self.sticky_action_prob > 0:
            tag += f"_p{self.sticky_action_prob:g}"
        return tag

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def snake_maze_walls(height, width):
    """Interior walls for a serpentine maze: wall shelves every
    height // 3 rows, each with a one-cell gap at alternating ends.

    The start-to-goal path must thread every gap in turn, so undirected
    random walks almost never reach the goal within the episode limit.
    That makes the layout a sharp testbed for directed exploration.
    """
    if height < 7 or width < 5:
        raise EnvConfigError("snake maze needs at least a 7x5 grid")
    walls = []
    spacing = height // 3
    for i, row in enumerate(range(spacing, height - 2, spacing)):
        gap = width - 2 if i % 2 == 0 else 1
        walls.extend([row, c] for c in range(1, width - 1) if c != gap)
    return walls


@dataclass
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool
    info: dict = field(default_factory=dict)


class GridMaze:
    """One grid environment instance with its own rng stream."""

    def __init__(self, config, seed=0):
        self.config = config
        self.num_actions = NUM_ACTIONS
        self._wall = np.zeros((config.height, config.width), dtype=bool)
        self._wall[0, :] = self._wall[-1, :] = True
        self._wall[:, 0] = self._wall[:, -1] = True
        for r, c in config.walls or []:
            if not (0 <= r < config.height and 0 <= c < config.width):
                raise EnvConfigError(f"wall cell ({r}, {c}) outside the grid")
            self._wall[r, c] = True
        self._trap = np.zeros_like(self._wall)
        if config.trap is not None:
            r0, c0, r1, c1 = config.trap
            self._trap[r0 : r1 + 1, c0 : c1 + 1] = True
        for name, cell in (("start", config.start_cell), ("goal", config.goal_cell)):
            if self._wall[cell]:
                raise EnvConfigError(f"{name} cell {cell} is a wall")
        if self._trap[config.goal_cell] or self._trap[config.start_cell]:
            raise EnvConfigError("trap region must not cover start or goal")
        self.rng = np.random.default_rng(seed)
        self._pos = None
        self._steps = 0
        self._done = True
        self._last_action = None
        self._noise = np.zeros(config.noise_dims)

    def reset(self, seed=None):
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        self._pos = self.config.start_cell
        self._steps = 0
        self._done = False
        self._last_action = None
        self._noise = np.zeros(self.config.noise_dims)
        if self.config.kind == "noisy_tv" and self._trap[self._pos]:
            self._noise = self.rng.random(self.config.noise_dims)
        return self._observe()

    def _observe(self):
        cfg = self.config
        grid = np.zeros((len(CHANNELS), cfg.height, cfg.width))
        grid[0][self._pos] = 1.0
        grid[1][cfg.goal_cell] = 1.0
        grid[2][self._wall] = 1.0
        grid[3][self._trap] = 1.0
        obs = grid.reshape(-1)
        if cfg.kind == "noisy_tv":
            obs = np.concatenate([obs, self._noise])
        return obs

    def _distance_to_goal(self, pos):
        gr, gc = self.config.goal_cell
        return abs(pos[0] - gr) + abs(pos[1] - gc)

    def step(self, action):
        if self._done:
            raise RuntimeError("step called on a finished episode; reset first")
        if not 0 <= action < NUM_ACTIONS:
            raise ValueError(f"action {action} out of range [0, {NUM_ACTIONS})")
        cfg = self.config
        state = self._observe()

        sticky = False
        executed = int(action)
        if self._last_action is not None and cfg.sticky_action_prob > 0.0:
            if self.rng.random() < cfg.sticky_action_prob:
                executed = self._last_action
                sticky = True
        self._last_action = executed

        dr, dc = ACTION_DELTAS[executed]
        nxt = (self._pos[0] + dr, self._pos[1] + dc)
        prev_dist = self._distance_to_goal(self._pos)
        if not self._wall[nxt]:
            self._pos = nxt
        self._steps += 1

        success = self._pos == cfg.goal_cell
        in_trap = bool(self._trap[self._pos])
        truncated = self._steps >= cfg.max_episode_len
        self._done = success or truncated

        if success:
            reward = cfg.goal_reward
        elif in_trap:
            reward = 0.0  # the trap pays nothing, whatever the penalties
        else:
            reward = -cfg.step_penalty
            if cfg.kind == "grid_dense":
                reward += cfg.dense_shaping * (prev_dist - self._distance_to_goal(self._pos))

        if cfg.kind == "noisy_tv":
            self._noise = (
                self.rng.random(cfg.noise_dims) if in_trap else np.zeros(cfg.noise_dims)
            )

        info = {
            "in_trap": in_trap,
            "success": success,
            "sticky": sticky,
            "steps": self._steps,
        }
        return Transition(
            state=state,
            action=executed,
            reward=float(reward),
            next_state=self._observe(),
            done=self._done,
            info=info,
        )

    def render(self):
        """ASCII picture, handy in demos: # wall, A agent, G goal, ~ trap."""
        rows = []
        for r in range(self.config.height):
            row = []
            for c in range(self.config.width):
                if (r, c) == self._pos:
                    row.append("A")
                elif (r, c) == self.config.goal_cell:
                    row.append("G")
                elif self._wall[r, c]:
                    row.append("#")
                elif self._trap[r, c]:
                    row.append("~")
                else:
                    row.append(".")
            rows.append("".join(row))
        return "\n".join(rows)


# --------------------------------------------------------------------------
# observation stacking
# --------------------------------------------------------------------------


def stack(history, k=4):
    """Concatenate the last k observations, earliest first, zero-padding
    slots before the episode started."""
    if k < 1:
        raise ValueError(f"stack depth must be >= 1, got {k}")
    history = list(history)[-k:]
    if not history:
        raise ValueError("stack of an empty history")
    dim = history[0].shape[0]
    pads = [np.zeros(dim) for _ in range(k - len(history))]
    return np.concatenate(pads + history)


class FrameStack:
    """Rolling buffer of the last k observations for one env."""

    def __init__(self, obs_dim, k):
        self.k = k
        self.buf = np.zeros((k, obs_dim))

    def reset(self, obs):
        self.buf[:] = 0.0
        self.buf[-1] = obs

    def push(self, obs):
        self.buf[:-1] = self.buf[1:]
        self.buf[-1] = obs

    def current(self):
        return self.buf.reshape(-1)


# --------------------------------------------------------------------------
# synchronous vectorized collection
# --------------------------------------------------------------------------


@dataclass
class EpisodeRecord:
    ret: float
    length: int
    success: bool
    trap_steps: int


@dataclass
class RolloutBatch:
    """A rectangular num_envs x num_steps block of transitions (stacked
    observations), bootstrap values for the non-terminal tails, and the
    episodes completed while collecting."""

    obs: np.ndarray  # (E, T, k*D)
    actions: np.ndarray  # (E, T) int
    rewards: np.ndarray  # (E, T) extrinsic
    next_obs: np.ndarray  # (E, T, k*D)
    dones: np.ndarray  # (E, T) bool
    in_trap: np.ndarray  # (E, T) bool
    bootstrap_values: np.ndarray  # (E,)
    env_ids: list
    episodes: list

    @property
    def num_envs(self):
        return self.obs.shape[0]

    @property
    def num_steps(self):
        return self.obs.shape[1]


class VecRunner:
    """Steps a fixed list of envs in lockstep with shared frame stacking.

    Envs auto-reset on done, so batches are always rectangular.  Results
    are merged in fixed env order, keeping collection deterministic.
    """

    def __init__(self, envs, frame_stack=4):
        if not envs:
            raise ValueError("VecRunner needs at least one env")
        self.envs = list(envs)
        self.k = frame_stack
        dim = envs[0].config.obs_dim
        self.stacks = [FrameStack(dim, frame_stack) for _ in envs]
        self._ep_return = np.zeros(len(envs))
        self._ep_length = np.zeros(len(envs), dtype=int)
        self._ep_trap = np.zeros(len(envs), dtype=int)
        for env, fs in zip(self.envs, self.stacks):
            fs.reset(env.reset())

    @property
    def num_envs(self):
        return len(self.envs)

    def stacked_obs(self):
        return np.stack([fs.current() for fs in self.stacks])

    def collect(self, policy, num_steps=5):
        """Collect a synchronous batch; the policy must expose
        ``act(obs_batch) -> actions`` and ``value(obs_batch) -> values``."""
        E, T = self.num_envs, num_steps
        dim = self.stacks[0].buf.size
        obs = np.zeros((E, T, dim))
        next_obs = np.zeros((E, T, dim))
        actions = np.zeros((E, T), dtype=np.int64)
        rewards = np.zeros((E, T))
        dones = np.zeros((E, T), dtype=bool)
        in_trap = np.zeros((E, T), dtype=bool)
        episodes = []

        for t in range(T):
            cur = self.stacked_obs()
            acts = policy.act(cur)
            if np.asarray(acts).shape != (E,):
                raise ValueError(
                    f"policy returned actions of shape {np.asarray(acts).shape}, "
                    f"expected ({E},)"
                )
            obs[:, t] = cur
            for e, env in enumerate(self.envs):
                tr = env.step(int(acts[e]))
                actions[e, t] = tr.action
                rewards[e, t] = tr.reward
                dones[e, t] = tr.done
                in_trap[e, t] = tr.info["in_trap"]
                self.stacks[e].push(tr.next_state)
                next_obs[e, t] = self.stacks[e].current()
                self._ep_return[e] += tr.reward
                self._ep_length[e] += 1
                self._ep_trap[e] += int(tr.info["in_trap"])
                if tr.done:
                    episodes.append(
                        EpisodeRecord(
                            ret=float(self._ep_return[e]),
                            length=int(self._ep_length[e]),
                            success=bool(tr.info["success"]),
                            trap_steps=int(self._ep_trap[e]),
                        )
                    )
                    self._ep_return[e] = 0.0
                    self._ep_length[e] = 0
                    self._ep_trap[e] = 0
                    self.stacks[e].reset(env.reset())

        bootstrap = np.asarray(policy.value(self.stacked_obs()), dtype=float)
        if bootstrap.shape != (E,):
            raise ValueError(
                f"policy returned values of shape {bootstrap.shape}, expected ({E},)"
            )
        return RolloutBatch(
            obs=obs,
            actions=actions,
            rewards=rewards,
            next_obs=next_obs,
            dones=dones,
            in_trap=in_trap,
            bootstrap_values=bootstrap,
            env_ids=list(range(E)),
            episodes=episodes,
        )


def make_envs(config, num_envs, seed_seq):
    """Build ``num_envs`` copies of the configured env with independent,
    deterministic rng streams (pinned by ``config.seed`` when set)."""
    base = np.random.SeedSequence(config.seed) if config.seed is not None else seed_seq
    children = base.spawn(num_envs)
    return [GridMaze(config, seed=child) for child in children]


def vec_collect(envs, policy, num_steps=5, frame_stack=4):
    """One-shot convenience wrapper: build a runner and collect one batch."""
    runner = VecRunner(envs, frame_stack=frame_stack)
    return runner.collect(policy, num_steps=num_steps)
