"""Learning-rate schedules."""

import math
from dataclasses import dataclass

from deliberpy.core.config import TrainConfig
from deliberpy.core.errors import ValidationError

SCHEDULE_KINDS = ("linear_warmup_constant", "transformer")


@dataclass(frozen=True)
class ScheduleConfig:
    kind: str = "linear_warmup_constant"
    warmup_steps: int = 32000
    base_lr: float = 1e-3
    peak_lr: float = 1.8e-3

    def __post_init__(self) -> None:
        if self.kind not in SCHEDULE_KINDS:
            raise ValidationError(f"Unknown learning-rate schedule: {self.kind}")
        if self.warmup_steps <= 0:
            raise ValidationError("warmup_steps must be positive")
        if self.base_lr < 0 or self.peak_lr < 0:
            raise ValidationError("Learning rates must be non-negative")

    @classmethod
    def from_train(cls, train: TrainConfig) -> "ScheduleConfig":
        return cls(train.lr_schedule, train.warmup_steps, train.base_lr, train.peak_lr)


def lr_at(step: int, schedule: ScheduleConfig) -> float:
    """Learning rate for optimizer step ``step`` (1-based; step 0 gives 0).

    ``linear_warmup_constant`` ramps to ``base_lr`` and stays there;
    ``transformer`` ramps to ``peak_lr`` and then decays as ``1/sqrt(step)``.
    """
    if step < 0:
        raise ValidationError(f"step must be non-negative, got {step}")
    if step == 0:
        return 0.0
    warmup = schedule.warmup_steps
    if schedule.kind == "linear_warmup_constant":
        return schedule.base_lr * min(step / warmup, 1.0)
    return schedule.peak_lr * min(step / warmup, math.sqrt(warmup / step))
