"""curiokit: curiosity-driven actor-critic agents on grid worlds, built on
a small reverse-mode autodiff core.

Layering, bottom up: ``autodiff`` (tape, ops), ``layers``/``optim``/
``gradcheck``/``checkpoint`` (networks and their upkeep), ``attention``
(gating and loss weighting), ``envs`` (grids, traps, vectorized
collection), ``agents`` + ``curiosity`` (the six agent kinds), and the
harness (``config``, ``training``, ``evaluate``, ``metrics``, ``plots``,
``diagnostics``, ``cli``)."""

from .agents import (
    AGENT_KINDS,
    Agent,
    FeatureExtractor,
    GreedyPolicy,
    PolicyOutput,
    RandomPolicy,
    SamplingPolicy,
    a2c_loss,
    build_agent,
)
from .attention import AttentionLayer, attn_weights, gate, weighted_forward_loss
from .autodiff import (
    FLOAT,
    Parameter,
    Tensor,
    backward,
    detach,
    no_grad,
)
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import ConfigError, OptimizerConfig, TrainerConfig, load_config, save_config
from .curiosity import (
    CuriosityConfig,
    CuriosityModule,
    combined_loss,
    curiosity_terms,
    forward_input,
    icm_forward_loss,
    icm_inverse_loss,
    intrinsic_reward,
    rcm_forward_loss,
)
from .diagnostics import ProbeResult, noisy_tv_probe, trap_affinity_comparison
from .envs import EnvConfig, FrameStack, GridMaze, Transition, VecRunner, make_envs, vec_collect
from .evaluate import EvalReport, evaluate_agent, evaluate_checkpoint
from .gradcheck import finite_difference_check
from .layers import MLP, Affine, Module, glorot_uniform
from .metrics import (
    CSV_FIELDS,
    MetricsRecord,
    ScoreTable,
    feature_std,
    normalize_scores,
    read_metrics,
)
from .optim import Adam, AdamState, adam_step
from .plots import PlotError, emit_plot
from .training import RunArtifacts, Trainer, compute_returns, train

__all__ = [
    "AGENT_KINDS",
    "Adam",
    "AdamState",
    "Affine",
    "Agent",
    "AttentionLayer",
    "Checkpoint",
    "ConfigError",
    "CSV_FIELDS",
    "CuriosityConfig",
    "CuriosityModule",
    "EnvConfig",
    "EvalReport",
    "FLOAT",
    "FeatureExtractor",
    "FrameStack",
    "GreedyPolicy",
    "GridMaze",
    "MLP",
    "MetricsRecord",
    "Module",
    "OptimizerConfig",
    "Parameter",
    "PlotError",
    "PolicyOutput",
    "ProbeResult",
    "RandomPolicy",
    "RunArtifacts",
    "SamplingPolicy",
    "ScoreTable",
    "Tensor",
    "Trainer",
    "TrainerConfig",
    "Transition",
    "VecRunner",
    "a2c_loss",
    "adam_step",
    "attn_weights",
    "backward",
    "build_agent",
    "combined_loss",
    "compute_returns",
    "curiosity_terms",
    "detach",
    "emit_plot",
    "evaluate_agent",
    "evaluate_checkpoint",
    "feature_std",
    "finite_difference_check",
    "forward_input",
    "gate",
    "glorot_uniform",
    "icm_forward_loss",
    "icm_inverse_loss",
    "intrinsic_reward",
    "load_checkpoint",
    "load_config",
    "make_envs",
    "no_grad",
    "noisy_tv_probe",
    "normalize_scores",
    "rcm_forward_loss",
    "read_metrics",
    "save_checkpoint",
    "save_config",
    "train",
    "trap_affinity_comparison",
    "vec_collect",
    "weighted_forward_loss",
]
