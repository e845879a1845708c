"""Run configuration: one dataclass tree mirrored field-for-field by the
YAML config files.  Unknown keys anywhere in the document are errors, so
typos fail loudly instead of silently training the wrong thing."""

from dataclasses import asdict, dataclass, field, fields, replace

import yaml

from .curiosity import CuriosityConfig
from .envs import EnvConfig


class ConfigError(ValueError):
    pass


@dataclass
class OptimizerConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        for name in ("beta1", "beta2"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ConfigError(f"{name} must lie in [0, 1), got {v}")
        if self.eps <= 0:
            raise ConfigError("eps must be positive")


@dataclass
class TrainerConfig:
    agent: str = "a2c"
    env: EnvConfig = field(default_factory=EnvConfig)
    total_rollouts: int = 50_000
    num_envs: int = 4
    rollout_steps: int = 5
    frame_stack: int = 4
    discount: float = 0.99
    seed: int = 0
    feature_dim: int = 32
    hidden_dim: int = 64
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    curiosity: CuriosityConfig = field(default_factory=CuriosityConfig)
    out_dir: str | None = None
    log_interval: int = 100
    checkpoint_interval: int = 0  # 0: checkpoint only at the end
    eval_interval: int = 0  # 0: no evaluation during training
    eval_episodes: int = 20
    stop_on_eval_success: float | None = None  # stop once eval success >= this
    stop_on_sustained: bool = False  # stop at first sustained success window
    sustained_window: int = 100  # episodes per success window
    sustained_threshold: float = 0.5

    def __post_init__(self):
        from .agents import AGENT_KINDS  # late import; agents pulls in curiosity

        if self.agent not in AGENT_KINDS:
            raise ConfigError(f"unknown agent kind: {self.agent!r}")
        if self.total_rollouts < 1:
            raise ConfigError("total_rollouts must be >= 1")
        if self.num_envs < 1:
            raise ConfigError("num_envs must be >= 1")
        if self.rollout_steps < 1:
            raise ConfigError("rollout_steps must be >= 1")
        if self.frame_stack < 1:
            raise ConfigError("frame_stack must be >= 1")
        if not 0.0 < self.discount <= 1.0:
            raise ConfigError(f"discount must lie in (0, 1], got {self.discount}")
        if self.feature_dim < 1 or self.hidden_dim < 1:
            raise ConfigError("feature_dim and hidden_dim must be >= 1")
        if self.log_interval < 1:
            raise ConfigError("log_interval must be >= 1")
        for name in ("checkpoint_interval", "eval_interval"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.eval_episodes < 1:
            raise ConfigError("eval_episodes must be >= 1")
        if self.stop_on_eval_success is not None:
            if not 0.0 < self.stop_on_eval_success <= 1.0:
                raise ConfigError("stop_on_eval_success must lie in (0, 1]")
            if self.eval_interval == 0:
                raise ConfigError("stop_on_eval_success needs eval_interval > 0")
        if self.sustained_window < 1:
            raise ConfigError("sustained_window must be >= 1")
        if not 0.0 < self.sustained_threshold <= 1.0:
            raise ConfigError("sustained_threshold must lie in (0, 1]")


_NESTED = {"env": EnvConfig, "optimizer": OptimizerConfig, "curiosity": CuriosityConfig}


def _from_mapping(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(data).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    kwargs = {}
    for name, value in data.items():
        if name in _NESTED and value is not None:
            value = _from_mapping(_NESTED[name], value, f"{where}.{name}")
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def config_from_dict(data):
    return _from_mapping(TrainerConfig, data, "config")


def config_to_dict(config):
    return asdict(config)


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if data is None:
        data = {}
    return config_from_dict(data)


def save_config(config, path):
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(config_to_dict(config), fh, sort_keys=False)


def with_overrides(config, seed=None, out_dir=None):
    """Apply the CLI-level overrides without mutating the original."""
    updates = {}
    if seed is not None:
        updates["seed"] = seed
    if out_dir is not None:
        updates["out_dir"] = str(out_dir)
    return replace(config, **updates) if updates else config
