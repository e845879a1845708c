"""Walk through the three grid kinds and what the agent actually sees.

Observations are flat one-hot channel stacks (agent, goal, wall, trap),
so the renderings below are decoded straight from the observation
vector, not from any private env state.
"""

import numpy as np

from curiokit.envs import CHANNELS, EnvConfig, GridMaze, snake_maze_walls

GLYPHS = {"agent": "A", "goal": "G", "wall": "#", "trap": "~"}


def render(obs, cfg):
    h, w = cfg.height, cfg.width
    grid = obs[: len(CHANNELS) * h * w].reshape(len(CHANNELS), h, w)
    rows = []
    for r in range(h):
        row = []
        for c in range(w):
            cell = "."
            # CHANNELS order is (agent, goal, wall, trap); first hit wins
            # so the agent glyph shows even while inside the trap.
            for idx, name in enumerate(CHANNELS):
                if grid[idx, r, c] > 0:
                    cell = GLYPHS[name]
                    break
            row.append(cell)
        rows.append(" ".join(row))
    return "\n".join(rows)


def main():
    print("== sparse serpentine maze (reward only at G) ==")
    cfg = EnvConfig(
        kind="grid_sparse", height=12, width=12, walls=snake_maze_walls(12, 12)
    )
    env = GridMaze(cfg, seed=0)
    obs = env.reset()
    print(render(obs, cfg))
    print(f"obs_dim={cfg.obs_dim}, episode cap={cfg.max_episode_len} steps")

    print("\n== dense 8x8 grid: shaping pays for progress toward G ==")
    cfg = EnvConfig(kind="grid_dense", height=8, width=8)
    env = GridMaze(cfg, seed=0)
    env.reset()
    for action, name in ((1, "down"), (3, "right"), (0, "up")):
        t = env.step(action)
        print(f"step {name:5s} -> reward {t.reward:+.2f}")

    print("\n== noisy_tv: a trap pocket that rerolls noise dims every step ==")
    cfg = EnvConfig(kind="noisy_tv", height=8, width=8)
    env = GridMaze(cfg, seed=0)
    obs = env.reset()
    print(render(obs, cfg))
    print(f"trap rect {cfg.trap}, {cfg.noise_dims} noise dims")

    # Drive the agent into the trap: noise dims light up and change each
    # step even under a repeated action, which is what fools a learned
    # forward model into paying intrinsic reward forever.
    for a in [3, 3, 3, 3]:  # right x4 reaches the pocket from the start
        t = env.step(a)
    print("in trap:", t.info["in_trap"])
    tail_before = t.next_state[-cfg.noise_dims :][:4]
    t = env.step(0)  # bump the top wall, stay inside the pocket
    tail_after = t.next_state[-cfg.noise_dims :][:4]
    print("noise dims, step k:  ", np.round(tail_before, 3))
    print("noise dims, step k+1:", np.round(tail_after, 3))

    print("\n== sticky actions: p chance the previous action repeats ==")
    cfg = EnvConfig(kind="grid_sparse", height=8, width=8, sticky_action_prob=0.4)
    env = GridMaze(cfg, seed=7)
    env.reset()
    issued, executed = [], []
    actions = [3, 1, 3, 1, 3, 1, 3, 1]
    for a in actions:
        t = env.step(a)
        issued.append(a)
        executed.append(t.action)
    print("issued:  ", issued)
    print("executed:", executed, " (differences are sticky repeats)")


if __name__ == "__main__":
    main()
