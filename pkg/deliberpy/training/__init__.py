"""Optimizers, schedules, EMA, batch sampling and the training loops."""

from deliberpy.training.ema import ExponentialMovingAverage, ema_update
from deliberpy.training.optimizers import (
    Adafactor,
    AdafactorState,
    Adam,
    AdamState,
    adafactor_update,
    adam_update,
    clip_per_param,
    make_optimizer,
)
from deliberpy.training.sampler import language_mass, sample_batch
from deliberpy.training.schedules import ScheduleConfig, lr_at
from deliberpy.training.trainer import DeliberationTrainer, FirstPassTrainer, load_weights

__all__ = [
    "Adafactor",
    "AdafactorState",
    "Adam",
    "AdamState",
    "DeliberationTrainer",
    "ExponentialMovingAverage",
    "FirstPassTrainer",
    "ScheduleConfig",
    "adafactor_update",
    "adam_update",
    "clip_per_param",
    "ema_update",
    "language_mass",
    "load_weights",
    "lr_at",
    "make_optimizer",
    "sample_batch",
]
