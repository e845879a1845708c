"""Metrics records, the CSV log format, and cross-environment score
normalization.

The CSV column set is fixed and ordered; runs with the same config and
seed must produce byte-identical files, so wall-clock time is kept out of
the CSV (it lives in summary.json instead) and floats are written with
round-tripping repr."""

import csv
from dataclasses import dataclass, field

import numpy as np

# Column order of metrics.csv.  wall_time_s is deliberately not a column:
# it would break byte-for-byte determinism of reruns.
CSV_FIELDS = [
    "rollout_idx",
    "env_steps",
    "mean_extrinsic_reward",
    "mean_intrinsic_reward",
    "policy_loss",
    "value_loss",
    "entropy",
    "j_fwd",
    "j_inv",
    "feature_std",
    "attn_weight_entropy",
    "trap_time_fraction",
]


@dataclass
class MetricsRecord:
    rollout_idx: int
    env_steps: int
    mean_extrinsic_reward: float | None = None
    mean_intrinsic_reward: float | None = None
    policy_loss: float | None = None
    value_loss: float | None = None
    entropy: float | None = None
    j_fwd: float | None = None
    j_inv: float | None = None
    feature_std: float | None = None
    attn_weight_entropy: float | None = None
    trap_time_fraction: float | None = None
    wall_time_s: float | None = None  # summary-only, never in the CSV

    def csv_row(self):
        row = []
        for name in CSV_FIELDS:
            value = getattr(self, name)
            if value is None:
                row.append("")
            elif name in ("rollout_idx", "env_steps"):
                row.append(str(int(value)))
            else:
                row.append(repr(float(value)))
        return row


class MetricsWriter:
    """Append-only CSV writer; one per run."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "w", encoding="utf-8", newline="")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(CSV_FIELDS)
        self._fh.flush()

    def write(self, record):
        self._writer.writerow(record.csv_row())
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_metrics(path):
    """Read a metrics.csv back into {column: list}, blanks as None."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_FIELDS:
            raise ValueError(f"unexpected metrics header in {path}: {header}")
        columns = {name: [] for name in CSV_FIELDS}
        for row in reader:
            for name, cell in zip(CSV_FIELDS, row):
                if cell == "":
                    columns[name].append(None)
                elif name in ("rollout_idx", "env_steps"):
                    columns[name].append(int(cell))
                else:
                    columns[name].append(float(cell))
    return columns


def feature_std(phi_batch):
    """Mean over feature dimensions of the per-dimension population
    standard deviation across the batch of states."""
    batch = np.asarray(phi_batch, dtype=float)
    if batch.ndim != 2:
        raise ValueError(f"expected a 2-D batch, got shape {batch.shape}")
    if batch.shape[0] < 2:
        raise ValueError("feature_std needs at least 2 states")
    return float(np.mean(np.std(batch, axis=0)))


@dataclass
class ScoreTable:
    """Best mean reward per (environment, agent) cell."""

    scores: dict = field(default_factory=dict)  # env -> {agent: score}

    def add(self, env, agent, score):
        self.scores.setdefault(env, {})[agent] = float(score)

    def agents(self):
        names = set()
        for row in self.scores.values():
            names.update(row)
        return sorted(names)

    def validate(self):
        if not self.scores:
            raise ValueError("empty score table")
        agents = self.agents()
        for env, row in self.scores.items():
            missing = sorted(set(agents) - set(row))
            if missing:
                raise ValueError(f"env {env!r} missing scores for agents {missing}")


def normalize_scores(table):
    """Per environment, scale scores so the best agent reads exactly 100;
    then report each agent's mean and population std across environments."""
    table.validate()
    agents = table.agents()
    normalized = {}
    for env, row in table.scores.items():
        best = max(row[a] for a in agents)
        if best <= 0:
            raise ValueError(f"env {env!r}: best score {best} is not positive")
        # ratio first, so the best agent reads exactly 100.0
        normalized[env] = {a: 100.0 * (row[a] / best) for a in agents}
    result = {}
    for a in agents:
        values = np.array([normalized[env][a] for env in table.scores])
        result[a] = (float(values.mean()), float(values.std()))
    return result


def format_score_table(table):
    """Render the normalized comparison as fixed-width text."""
    result = normalize_scores(table)
    agents = sorted(result, key=lambda a: -result[a][0])
    width = max(len(a) for a in agents)
    lines = [f"{'agent':<{width}}  normalized mean  std"]
    for a in agents:
        mean, std = result[a]
        lines.append(f"{a:<{width}}  {mean:15.2f}  {std:.2f}")
    return "\n".join(lines)
