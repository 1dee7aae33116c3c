"""First-pass and deliberation training loops.

A step samples a batch, builds one graph per utterance (optionally on worker
threads), sums the gradients in batch order, caps each parameter's
gradient, applies the optimizer and updates the EMA. All randomness of step
``s`` comes from ``rng.spawn(s)``, so a run resumed from a checkpoint
continues exactly like an unbroken one.
"""

import re
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import yaml

from deliberpy import __version__
from deliberpy.autodiff.checkpoint import load_checkpoint, save_checkpoint
from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import Tensor, backward, no_grad
from deliberpy.core.config import Config
from deliberpy.core.errors import FrozenParameterError, NumericError, ValidationError
from deliberpy.core.logger import NULL_LOGGER, Logger
from deliberpy.core.models import Utterance
from deliberpy.deliberation.rescorer import Deliberation
from deliberpy.nn.module import Module
from deliberpy.search.beam import LabelScorer
from deliberpy.search.sampling import frame_sample
from deliberpy.tokenizer.wordpiece import WordpieceVocab, segment, train_wordpieces
from deliberpy.training.ema import ExponentialMovingAverage
from deliberpy.training.optimizers import clip_per_param, make_optimizer
from deliberpy.training.sampler import sample_indices
from deliberpy.training.schedules import ScheduleConfig, lr_at
from deliberpy.transducer.model import Transducer, prepare_features

CHECKPOINT_PATTERN = re.compile(r"^ckpt-(\d{6})\.bin$")
LOSS_LOG = "loss.tsv"
CONFIG_ECHO = "config.yaml"
VOCAB_FILE = "vocab.txt"


def checkpoint_name(step: int) -> str:
    return f"ckpt-{step:06d}.bin"


def latest_checkpoint(run_dir: Path) -> Optional[Path]:
    """Highest-step checkpoint in ``run_dir``, or None."""
    best: Optional[Tuple[int, Path]] = None
    if not run_dir.is_dir():
        return None
    for path in run_dir.iterdir():
        match = CHECKPOINT_PATTERN.match(path.name)
        if match and (best is None or int(match.group(1)) > best[0]):
            best = (int(match.group(1)), path)
    return best[1] if best else None


def split_checkpoint(tensors: Mapping[str, np.ndarray], prefix: str) -> Dict[str, np.ndarray]:
    """Tensors stored under ``prefix/`` with the prefix removed."""
    head = prefix + "/"
    return {name[len(head) :]: value for name, value in tensors.items() if name.startswith(head)}


def load_weights(path: Path, use_ema: bool = True) -> Dict[str, np.ndarray]:
    """Model weights from a training checkpoint, EMA copy by default."""
    tensors = load_checkpoint(path)
    weights = split_checkpoint(tensors, "ema" if use_ema else "model")
    if not weights:
        weights = split_checkpoint(tensors, "model")
    if not weights:
        raise ValidationError(f"Checkpoint {path} holds no model weights")
    return weights


def write_config_echo(run_dir: Path, cfg: Config, extra: Optional[Dict] = None) -> None:
    data = {"version": __version__}
    if extra:
        data["run"] = extra
    data.update(cfg.to_dict())
    with open(run_dir / CONFIG_ECHO, "w", encoding="utf-8") as f:
        yaml.safe_dump(data, f, sort_keys=False, allow_unicode=True)


class Trainer:
    """Shared loop; subclasses define the per-utterance loss."""

    def __init__(
        self,
        cfg: Config,
        model: Module,
        utterances: Sequence[Utterance],
        run_dir: Path,
        logger: Logger = NULL_LOGGER,
    ):
        if not utterances:
            raise ValidationError("Training corpus is empty")
        self.cfg = cfg
        self.model = model
        self.utterances = list(utterances)
        self.run_dir = Path(run_dir)
        self.logger = logger
        self.params: Dict[str, Tensor] = model.named_parameters()
        self.optimizer = make_optimizer(cfg.train.optimizer, self.params, cfg.train.adam_epsilon)
        self.ema = ExponentialMovingAverage(self.params, cfg.train.ema_decay)
        self.schedule = ScheduleConfig.from_train(cfg.train)
        self.rng = SeededRNG(cfg.train.seed)
        self.step = 0
        self.losses: List[float] = []

    def utterance_loss(self, index: int, rng: SeededRNG) -> Tensor:
        raise NotImplementedError

    def _utterance_grads(self, index: int, rng: SeededRNG) -> Tuple[float, Dict[str, np.ndarray]]:
        loss = self.utterance_loss(index, rng)
        return float(loss.item()), self.gradients(loss)

    def gradients(self, loss: Tensor) -> Dict[str, np.ndarray]:
        return backward(loss, self.params)

    def compute_batch(self, step: int) -> Tuple[float, Dict[str, np.ndarray]]:
        """Mean loss and mean gradients of the batch for ``step``."""
        step_rng = self.rng.spawn(step)
        indices = sample_indices(len(self.utterances), step_rng.spawn(0), self.cfg.train.batch_size)
        results: List[Optional[Tuple[float, Dict[str, np.ndarray]]]] = [None] * len(indices)
        workers = self.cfg.train.workers
        if workers <= 1:
            for i, index in enumerate(indices):
                results[i] = self._utterance_grads(index, step_rng.spawn(1, i))
        else:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                future_to_index = {
                    executor.submit(self._utterance_grads, index, step_rng.spawn(1, i)): i
                    for i, index in enumerate(indices)
                }
                for future in as_completed(future_to_index):
                    results[future_to_index[future]] = future.result()

        # fold in batch order so threaded and serial runs agree bit for bit
        total_loss = 0.0
        grads = {name: np.zeros_like(p.data) for name, p in self.params.items()}
        for loss, utt_grads in results:
            total_loss += loss
            for name in grads:
                grads[name] += utt_grads[name]
        scale = 1.0 / len(indices)
        return total_loss * scale, {name: g * scale for name, g in grads.items()}

    def train_step(self) -> float:
        step = self.step + 1
        loss, grads = self.compute_batch(step)
        if not np.isfinite(loss):
            raise NumericError(f"Loss became non-finite at step {step}")
        grads = {name: clip_per_param(g, self.cfg.train.grad_cap) for name, g in grads.items()}
        lr = lr_at(step, self.schedule)
        self.optimizer.step(grads, lr)
        self.ema.update()
        self.step = step
        self.losses.append(loss)
        with open(self.run_dir / LOSS_LOG, "a", encoding="utf-8") as f:
            f.write(f"{step}\t{loss:.6f}\t{lr:.6g}\n")
        if step % self.cfg.train.log_every == 0:
            self.logger.info("step %d loss %.4f lr %.3g", step, loss, lr)
        return loss

    def run(self, steps: Optional[int] = None) -> List[float]:
        """Train until ``steps`` (default ``train.steps``); checkpoint along the way."""
        target = self.cfg.train.steps if steps is None else steps
        self.run_dir.mkdir(parents=True, exist_ok=True)
        while self.step < target:
            self.train_step()
            if self.step % self.cfg.train.checkpoint_every == 0:
                self.save()
        if self.step > 0 and not (self.run_dir / checkpoint_name(self.step)).exists():
            self.save()
        return self.losses

    def checkpoint_tensors(self) -> Dict[str, np.ndarray]:
        tensors: Dict[str, np.ndarray] = {}
        for name, value in self.model.state_dict().items():
            tensors[f"model/{name}"] = value
        for name, value in self.ema.state_dict().items():
            tensors[f"ema/{name}"] = value
        for name, value in self.optimizer.state_dict().items():
            tensors[f"optim/{name}"] = value
        tensors["step"] = np.array([self.step], dtype=np.int64)
        return tensors

    def save(self) -> Path:
        path = self.run_dir / checkpoint_name(self.step)
        save_checkpoint(path, self.checkpoint_tensors())
        self.logger.verbose("Saved checkpoint %s", path)
        return path

    def resume(self) -> bool:
        """Restore the latest checkpoint of the run directory, if any."""
        path = latest_checkpoint(self.run_dir)
        if path is None:
            return False
        tensors = load_checkpoint(path)
        self.model.load_state_dict(split_checkpoint(tensors, "model"))
        self.ema.load_state_dict(split_checkpoint(tensors, "ema"))
        self.optimizer.load_state_dict(split_checkpoint(tensors, "optim"))
        self.step = int(tensors["step"][0])
        self._truncate_loss_log()
        self.logger.info("Resumed from %s at step %d", path, self.step)
        return True

    def start_run_dir(self, vocab: WordpieceVocab, extra: Dict) -> None:
        """Fresh run: vocabulary, config echo and an empty loss log."""
        self.run_dir.mkdir(parents=True, exist_ok=True)
        vocab.save(self.run_dir / VOCAB_FILE)
        write_config_echo(self.run_dir, self.cfg, extra)
        (self.run_dir / LOSS_LOG).unlink(missing_ok=True)

    def _truncate_loss_log(self) -> None:
        log = self.run_dir / LOSS_LOG
        if not log.exists():
            return
        with open(log, "r", encoding="utf-8") as f:
            kept = [line for line in f if line.strip() and int(line.split("\t", 1)[0]) <= self.step]
        with open(log, "w", encoding="utf-8") as f:
            f.writelines(kept)


def build_vocab(
    utterances: Sequence[Utterance],
    target_size: int,
    logographic: Sequence[str] = (),
    count_threshold: int = 20,
) -> WordpieceVocab:
    """Pooled vocabulary over every language's training transcripts."""
    logo = set(logographic)
    return train_wordpieces(
        [u.text for u in utterances if u.language_id not in logo],
        target_size,
        count_threshold,
        char_only_corpus=[u.text for u in utterances if u.language_id in logo],
    )


def tokenize(utterances: Sequence[Utterance], vocab: WordpieceVocab, logographic: Sequence[str] = ()) -> List[Tuple[int, ...]]:
    logo = set(logographic)
    return [segment(u.text, vocab, u.language_id in logo).ids for u in utterances]


class FirstPassTrainer(Trainer):
    """Transducer training with SpecAug and encoder-source sampling."""

    def __init__(
        self,
        cfg: Config,
        utterances: Sequence[Utterance],
        vocab: WordpieceVocab,
        run_dir: Path,
        logographic: Sequence[str] = (),
        logger: Logger = NULL_LOGGER,
    ):
        if vocab.size > cfg.vocab_size:
            raise ValidationError(f"Vocabulary of {vocab.size} pieces exceeds vocab_size {cfg.vocab_size}")
        model = Transducer(SeededRNG(cfg.train.seed, (0,)), cfg)
        super().__init__(cfg, model, utterances, run_dir, logger)
        self.vocab = vocab
        self.labels = tokenize(self.utterances, vocab, logographic)

    def utterance_loss(self, index: int, rng: SeededRNG) -> Tensor:
        loss, _ = self.model.utterance_loss(self.utterances[index].features, self.labels[index], rng)
        return loss

    def prepare_run_dir(self) -> None:
        self.start_run_dir(self.vocab, {"kind": "first-pass", "utterances": len(self.utterances)})


class DeliberationTrainer(Trainer):
    """Trains the deliberation network on top of a frozen first pass.

    The hypothesis fed to the text encoder is sampled frame by frame from the
    frozen first pass; the target is the reference transcript.
    """

    def __init__(
        self,
        cfg: Config,
        first_pass: Transducer,
        utterances: Sequence[Utterance],
        vocab: WordpieceVocab,
        run_dir: Path,
        logographic: Sequence[str] = (),
        logger: Logger = NULL_LOGGER,
    ):
        first_pass.eval().freeze()
        self.first_pass = first_pass
        self.first_pass_params = first_pass.named_parameters()
        model = Deliberation(SeededRNG(cfg.train.seed, (1,)), cfg)
        super().__init__(cfg, model, utterances, run_dir, logger)
        self.vocab = vocab
        self.labels = tokenize(self.utterances, vocab, logographic)
        self._audio: Dict[int, Tensor] = {}

    def audio_context(self, index: int) -> Tensor:
        cached = self._audio.get(index)
        if cached is None:
            with no_grad():
                outputs = self.first_pass.encoder(prepare_features(self.utterances[index].features))
            cached = outputs.source(self.cfg.search.source)
            self._audio[index] = cached
        return cached

    def utterance_loss(self, index: int, rng: SeededRNG) -> Tensor:
        audio = self.audio_context(index)
        with no_grad():
            scorer = LabelScorer(self.first_pass, audio, self.vocab.size)
            _, sampled = frame_sample(audio, self.first_pass, rng.spawn(2), self.cfg.search.temperature, scorer)
        return self.model.loss(self.labels[index], audio, sampled.ids)

    def check_frozen(self) -> None:
        """Raise if any first-pass parameter has been made trainable again."""
        live = sorted(name for name, p in self.first_pass_params.items() if p.requires_grad)
        if live:
            raise FrozenParameterError(f"Frozen first-pass parameters would receive gradients: {live[:5]}")

    def train_step(self) -> float:
        self.check_frozen()
        return super().train_step()

    def prepare_run_dir(self, first_pass_ckpt: Path) -> None:
        self.start_run_dir(
            self.vocab,
            {"kind": "deliberation", "first_pass": str(first_pass_ckpt), "utterances": len(self.utterances)},
        )
