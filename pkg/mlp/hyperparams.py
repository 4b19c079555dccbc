"""
Training hyperparameters and the enumerations they are built from.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field


class LossNorm(str, Enum):
    """Per-sample residual norm; losses are means over samples."""
    L1 = "l1"
    L2 = "l2"


class OptimizerKind(str, Enum):
    SGD = "sgd"
    ADAM = "adam"


class Hyperparams(BaseModel):
    """
    Optimizer and loop settings for one training run.

    Defaults are Adam (lr 1e-3, betas 0.9/0.999, eps 1e-8), batch 32, l1 loss.
    A zero learning rate is accepted and leaves the parameters untouched.
    """
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    optimizer: OptimizerKind = Field(default=OptimizerKind.ADAM, description="Update rule")
    learning_rate: float = Field(default=1e-3, ge=0.0, description="Step size")
    batch_size: int = Field(default=32, ge=1, description="Mini-batch size")
    epochs: int = Field(default=300, ge=1, description="Passes over the training set")
    loss: LossNorm = Field(default=LossNorm.L1, description="Residual norm")
    seed: int = Field(default=1, ge=0, le=2**64 - 1, description="Run seed (initialization and shuffling)")
    adam_beta1: float = Field(default=0.9, gt=0.0, lt=1.0)
    adam_beta2: float = Field(default=0.999, gt=0.0, lt=1.0)
    adam_epsilon: float = Field(default=1e-8, gt=0.0)
