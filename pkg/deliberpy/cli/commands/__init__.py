"""Command modules for DeliberPy."""

from deliberpy.cli.commands.decode import decode
from deliberpy.cli.commands.evaluate import evaluate
from deliberpy.cli.commands.experiment import experiment
from deliberpy.cli.commands.gen_data import gen_data
from deliberpy.cli.commands.params import params
from deliberpy.cli.commands.rescore import rescore
from deliberpy.cli.commands.train import train_delib, train_first_pass

__all__ = [
    "decode",
    "evaluate",
    "experiment",
    "gen_data",
    "params",
    "rescore",
    "train_delib",
    "train_first_pass",
]
