"""Business logic behind the CLI commands.

Every function here takes explicit paths and a resolved ``Config`` and
raises ``DeliberpyError`` subclasses; the click layer maps those onto exit
codes.
"""

import copy
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
import yaml

from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import Tensor, no_grad, set_default_dtype
from deliberpy.core.config import Config
from deliberpy.core.errors import ConfigError, ValidationError
from deliberpy.core.logger import NULL_LOGGER, Logger
from deliberpy.core.models import NBestList, Utterance, WerReport
from deliberpy.deliberation.rescorer import Deliberation, rescore, score_nbest
from deliberpy.evaluation.aggregate import oracle_wer, relative_improvement, score_corpus
from deliberpy.evaluation.params import ParamCount, count_params
from deliberpy.renderers.table_renderer import TableRenderer, read_wer_columns
from deliberpy.search.beam import LabelScorer, beam_search
from deliberpy.search.nbest import read_nbest, write_nbest
from deliberpy.search.sampling import frame_sample
from deliberpy.synth.corpus import CorpusSpec, gen_corpus, load_split, logographic_languages, read_transcripts
from deliberpy.tokenizer.wordpiece import WordpieceVocab, decode as decode_ids
from deliberpy.training.trainer import (
    CONFIG_ECHO,
    VOCAB_FILE,
    DeliberationTrainer,
    FirstPassTrainer,
    build_vocab,
    latest_checkpoint,
    load_weights,
)
from deliberpy.transducer.model import Transducer
from deliberpy.utils.file_utils import ensure_dir, require_file, sibling_path
from deliberpy.utils.format_utils import format_duration, format_params, format_wer

T = TypeVar("T")

TOP1_SUFFIX = ".top1.txt"
SELECTED_SUFFIX = ".selected.txt"
EXPERIMENT_SUMMARY = "experiment.tsv"


def _parallel_map(fn: Callable[[int], T], count: int, workers: int) -> List[T]:
    """``[fn(0), ..., fn(count - 1)]``, optionally on a thread pool, in index order."""
    results: List[Optional[T]] = [None] * count
    if workers <= 1:
        for i in range(count):
            results[i] = fn(i)
        return results
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_index = {executor.submit(fn, i): i for i in range(count)}
        for future in as_completed(future_to_index):
            results[future_to_index[future]] = future.result()
    return results


def _write_transcript(path: Path, rows: Iterable[Tuple[str, str, str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for utt_id, lang, text in rows:
            f.write(f"{utt_id}\t{lang}\t{text}\n")


def _run_section(run_dir: Path) -> Dict:
    """The ``run:`` block of a run directory's config echo."""
    path = require_file(run_dir / CONFIG_ECHO, "run config")
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    return data.get("run") or {}


def resolve_checkpoint(path: Path) -> Path:
    """A checkpoint file, or the latest checkpoint of a run directory."""
    path = Path(path)
    if path.is_dir():
        found = latest_checkpoint(path)
        if found is None:
            raise ValidationError(f"No checkpoints in {path}")
        return found
    return require_file(path, "checkpoint")


def load_run_config(ckpt: Path, overrides: Sequence[str] = ()) -> Config:
    """Config a checkpoint was trained with, plus command-line overrides."""
    cfg = Config.from_yaml(str(require_file(Path(ckpt).parent / CONFIG_ECHO, "run config")))
    cfg.apply_overrides(overrides)
    cfg.validate()
    return cfg


def load_first_pass(cfg: Config, ckpt: Path) -> Transducer:
    """First-pass model with the checkpoint's EMA weights, in eval mode."""
    model = Transducer(SeededRNG(cfg.train.seed, (0,)), cfg)
    model.load_state_dict(load_weights(ckpt))
    model.eval()
    return model


def with_first_pass_geometry(cfg: Config, fp_cfg: Config, logger: Logger = NULL_LOGGER) -> Config:
    """``cfg`` with the encoder, transducer and vocab_size of the first-pass run.

    The deliberation network reads the first-pass encoder output and shares
    its vocabulary, so those settings always come from the first pass.
    """
    merged = copy.deepcopy(cfg)
    if (cfg.encoder, cfg.transducer, cfg.vocab_size) != (fp_cfg.encoder, fp_cfg.transducer, fp_cfg.vocab_size):
        logger.verbose("Taking encoder, transducer and vocab_size from the first-pass run config")
    merged.encoder = copy.deepcopy(fp_cfg.encoder)
    merged.transducer = copy.deepcopy(fp_cfg.transducer)
    merged.vocab_size = fp_cfg.vocab_size
    merged.validate()
    return merged


def load_deliberation(cfg: Config, ckpt: Path) -> Deliberation:
    model = Deliberation(SeededRNG(cfg.train.seed, (1,)), cfg)
    model.load_state_dict(load_weights(ckpt))
    model.eval()
    return model


def gen_data(spec_path: Optional[str], out_dir: str, seed: Optional[int], logger: Logger = NULL_LOGGER) -> Dict[str, int]:
    """Generate a synthetic corpus; the default spec when no file is given."""
    spec = CorpusSpec.from_yaml(spec_path) if spec_path else CorpusSpec()
    if seed is not None:
        spec.seed = seed
    spec.validate()
    logger.info("Generating %d-language corpus (seed %d)", len(spec.languages), spec.seed)
    return gen_corpus(spec, ensure_dir(out_dir), logger)


def train_first_pass(
    cfg: Config,
    data_dir: str,
    out_dir: str,
    resume: bool = False,
    steps: Optional[int] = None,
    logger: Logger = NULL_LOGGER,
) -> Path:
    """Train the transducer on the train split.

    Returns:
        Path of the final checkpoint.
    """
    set_default_dtype(cfg.dtype)
    run_dir = ensure_dir(out_dir)
    logger.info("Loading training data from %s", data_dir)
    utterances = load_split(data_dir, "train")
    logographic = logographic_languages(data_dir)

    if resume and (run_dir / VOCAB_FILE).exists():
        vocab = WordpieceVocab.load(run_dir / VOCAB_FILE)
    else:
        vocab = build_vocab(utterances, cfg.vocab_size, logographic)
    logger.info("Vocabulary: %d pieces over %d utterances", vocab.size, len(utterances))

    trainer = FirstPassTrainer(cfg, utterances, vocab, run_dir, logographic, logger)
    if not (resume and trainer.resume()):
        trainer.prepare_run_dir()
    return _run_trainer(trainer, steps, logger)


def train_delib(
    cfg: Config,
    first_pass_ckpt: str,
    data_dir: str,
    out_dir: str,
    resume: bool = False,
    steps: Optional[int] = None,
    logger: Logger = NULL_LOGGER,
) -> Path:
    """Train the deliberation network against a frozen first pass."""
    if not cfg.delib.enabled:
        raise ConfigError("Deliberation is disabled in this config (delib.enabled: false)")
    set_default_dtype(cfg.dtype)
    ckpt = resolve_checkpoint(Path(first_pass_ckpt))
    vocab = WordpieceVocab.load(require_file(ckpt.parent / VOCAB_FILE, "first-pass vocabulary"))
    logger.info("Loading frozen first pass from %s", ckpt)
    fp_cfg = load_run_config(ckpt)
    first_pass = load_first_pass(fp_cfg, ckpt)
    cfg = with_first_pass_geometry(cfg, fp_cfg, logger)
    utterances = load_split(data_dir, "train")

    run_dir = ensure_dir(out_dir)
    trainer = DeliberationTrainer(
        cfg, first_pass, utterances, vocab, run_dir, logographic_languages(data_dir), logger
    )
    if not (resume and trainer.resume()):
        trainer.prepare_run_dir(ckpt)
    return _run_trainer(trainer, steps, logger)


def _run_trainer(trainer, steps: Optional[int], logger: Logger) -> Path:
    target = trainer.cfg.train.steps if steps is None else steps
    logger.info(
        "Training %d parameters from step %d to %d",
        sum(p.size for p in trainer.params.values()),
        trainer.step,
        target,
    )
    started = time.monotonic()
    losses = trainer.run(target)
    if losses:
        logger.info("Final loss %.4f (first %.4f)", losses[-1], losses[0])
    logger.info("Training finished in %s", format_duration(time.monotonic() - started))
    final = latest_checkpoint(trainer.run_dir)
    if final is None:
        raise ValidationError(f"Training wrote no checkpoint to {trainer.run_dir}")
    return final


def _encode(model: Transducer, utterance: Utterance, source: str) -> Tensor:
    with no_grad():
        return model.encode(utterance.features).source(source)


def decode(
    ckpt: str,
    data_dir: str,
    out: str,
    split: str = "dev",
    overrides: Sequence[str] = (),
    workers: int = 1,
    logger: Logger = NULL_LOGGER,
) -> List[NBestList]:
    """Beam-search every utterance of ``split``.

    Writes the n-best file to ``out`` and the top-1 transcript beside it.
    """
    path = resolve_checkpoint(Path(ckpt))
    cfg = load_run_config(path, overrides)
    set_default_dtype(cfg.dtype)
    vocab = WordpieceVocab.load(require_file(path.parent / VOCAB_FILE, "vocabulary"))
    model = load_first_pass(cfg, path)
    utterances = load_split(data_dir, split)
    search = cfg.search
    logger.info("Decoding %d utterances (beam %d, %s source)", len(utterances), search.beam, search.source)

    def run(i: int) -> NBestList:
        utt = utterances[i]
        with no_grad():
            enc = _encode(model, utt, search.source)
            nbest = beam_search(
                enc, model, search.beam, search.max_symbols_per_frame, utt.utterance_id, vocab.size
            )
        logger.verbose("%s: %d hypotheses", utt.utterance_id, len(nbest))
        return nbest

    nbests = _parallel_map(run, len(utterances), workers)
    out_path = Path(out)
    ensure_dir(out_path.parent)
    write_nbest(out_path, nbests)
    top1 = sibling_path(out_path, TOP1_SUFFIX)
    _write_transcript(
        top1,
        ((u.utterance_id, u.language_id, decode_ids(n.top.tokens, vocab)) for u, n in zip(utterances, nbests)),
    )
    logger.info("Wrote %s and %s", out_path, top1)
    return nbests


@dataclass
class RescoreSummary:
    nbests: List[NBestList]
    selected_path: Path
    reports: Dict[str, WerReport] = field(default_factory=dict)  # top1, rescored, oracle


def rescore_nbest(
    delib_ckpt: str,
    nbest_path: str,
    data_dir: str,
    out: str,
    split: str = "dev",
    lam: Optional[float] = None,
    seed: int = 1,
    first_pass_ckpt: Optional[str] = None,
    overrides: Sequence[str] = (),
    workers: int = 1,
    logger: Logger = NULL_LOGGER,
) -> RescoreSummary:
    """Score every n-best with the deliberation network and rerank.

    The text context of utterance ``i`` (manifest order) is sampled from the
    frozen first pass with ``SeededRNG(seed).spawn(i)``.

    Raises:
        ValidationError: If the n-best ids differ from the split's ids.
    """
    path = resolve_checkpoint(Path(delib_ckpt))
    cfg = load_run_config(path, overrides)
    if lam is not None:
        cfg.set("delib.lambda", lam)
        cfg.validate()
    set_default_dtype(cfg.dtype)
    fp_path = first_pass_ckpt or _run_section(path.parent).get("first_pass")
    if not fp_path:
        raise ValidationError(f"No first-pass checkpoint recorded for {path}; pass one explicitly")
    fp_path = resolve_checkpoint(Path(fp_path))
    vocab = WordpieceVocab.load(require_file(path.parent / VOCAB_FILE, "vocabulary"))
    fp_cfg = load_run_config(fp_path)
    if (fp_cfg.encoder.dim, fp_cfg.vocab_size) != (cfg.encoder.dim, cfg.vocab_size):
        raise ConfigError(
            f"First pass {fp_path} (encoder.dim {fp_cfg.encoder.dim}, vocab_size {fp_cfg.vocab_size}) does not "
            f"match the deliberation run (encoder.dim {cfg.encoder.dim}, vocab_size {cfg.vocab_size})"
        )
    first_pass = load_first_pass(fp_cfg, fp_path).freeze()
    model = load_deliberation(cfg, path)

    utterances = load_split(data_dir, split)
    nbests = read_nbest(nbest_path)
    utt_ids = [u.utterance_id for u in utterances]
    if set(nbests) != set(utt_ids):
        missing = sorted(set(utt_ids) - set(nbests))
        extra = sorted(set(nbests) - set(utt_ids))
        raise ValidationError(f"N-best ids do not match {split}; missing: {missing[:5]}, extra: {extra[:5]}")
    rng = SeededRNG(seed)
    lam_value = cfg.delib.lambda_weight
    logger.info("Rescoring %d n-best lists (lambda %.2f)", len(utterances), lam_value)

    def run(i: int) -> NBestList:
        utt = utterances[i]
        with no_grad():
            audio = _encode(first_pass, utt, cfg.search.source)
            scorer = LabelScorer(first_pass, audio, vocab.size)
            _, sampled = frame_sample(audio, first_pass, rng.spawn(i), cfg.search.temperature, scorer)
            ctx = model.context(audio, sampled.ids)
        return rescore(score_nbest(model, nbests[utt.utterance_id], ctx), lam_value)

    reranked = _parallel_map(run, len(utterances), workers)
    out_path = Path(out)
    ensure_dir(out_path.parent)
    write_nbest(out_path, reranked, with_delib=True)
    selected = sibling_path(out_path, SELECTED_SUFFIX)
    _write_transcript(
        selected,
        ((u.utterance_id, u.language_id, decode_ids(n.top.tokens, vocab)) for u, n in zip(utterances, reranked)),
    )
    logger.info("Wrote %s and %s", out_path, selected)

    summary = RescoreSummary(reranked, selected)
    if all(u.text for u in utterances):
        summary.reports = _rescore_reports(utterances, [nbests[i] for i in utt_ids], reranked, vocab, data_dir)
        for name, report in summary.reports.items():
            logger.info("%s WER: %s", name, format_wer(report.avg_wer))
    return summary


def _rescore_reports(
    utterances: Sequence[Utterance],
    first_pass: Sequence[NBestList],
    reranked: Sequence[NBestList],
    vocab: WordpieceVocab,
    data_dir: str,
) -> Dict[str, WerReport]:
    refs = [(u.utterance_id, u.language_id, u.text) for u in utterances]
    char_level = logographic_languages(data_dir)

    def texts(nbest: NBestList) -> List[str]:
        return [decode_ids(h.tokens, vocab) for h in nbest.hyps]

    top1 = {n.utterance_id: decode_ids(n.top.tokens, vocab) for n in first_pass}
    chosen = {n.utterance_id: decode_ids(n.top.tokens, vocab) for n in reranked}
    return {
        "top1": score_corpus(refs, top1, char_level, "top1"),
        "rescored": score_corpus(refs, chosen, char_level, "rescored"),
        "oracle": oracle_wer(refs, {n.utterance_id: texts(n) for n in first_pass}, char_level, "oracle"),
    }


def evaluate(
    hyp_paths: Sequence[str],
    ref_path: str,
    data_dir: Optional[str] = None,
    out: Optional[str] = None,
    char_level: Sequence[str] = (),
    workers: int = 1,
    logger: Logger = NULL_LOGGER,
) -> TableRenderer:
    """Score one or more transcript files against a reference transcript.

    Logographic languages recorded in ``data_dir``'s corpus metadata, plus any
    in ``char_level``, are scored by character.
    """
    if not hyp_paths:
        raise ValidationError("At least one hypothesis file is required")
    refs = read_transcripts(ref_path)
    languages = set(char_level)
    if data_dir:
        languages.update(logographic_languages(data_dir))
    reports: List[WerReport] = []
    for path in hyp_paths:
        hyps = {utt_id: text for utt_id, _, text in read_transcripts(path)}
        reports.append(score_corpus(refs, hyps, languages, Path(path).name, workers))
        logger.verbose("%s: average WER %s", path, format_wer(reports[-1].avg_wer))
    renderer = TableRenderer(reports, logger)
    if out:
        renderer.save(out)
    return renderer


def published_table(table_path: str, out: Optional[str] = None, logger: Logger = NULL_LOGGER) -> TableRenderer:
    """Re-aggregate per-language WER columns read from a table file."""
    renderer = TableRenderer(read_wer_columns(table_path), logger)
    if out:
        renderer.save(out)
    return renderer


def params_report(cfg: Config, logger: Logger = NULL_LOGGER) -> ParamCount:
    count = count_params(cfg)
    for name, value in count.components.items():
        logger.verbose("%-24s %12d  %s", name, value, format_params(value))
    return count


@dataclass
class SeedResult:
    seed: int
    top1_wer: float
    rescored_wer: float
    oracle_wer: float

    @property
    def relative_improvement(self) -> float:
        if self.top1_wer <= 0:
            return 0.0
        return relative_improvement(self.top1_wer, self.rescored_wer)


def experiment(
    cfg: Config,
    seeds: Sequence[int],
    out_dir: str,
    spec_path: Optional[str] = None,
    steps: Optional[int] = None,
    delib_steps: Optional[int] = None,
    split: str = "dev",
    workers: int = 1,
    logger: Logger = NULL_LOGGER,
) -> List[SeedResult]:
    """gen-data, both trainings, decode, rescore and score for each seed.

    Writes ``experiment.tsv`` with one row per seed and a median row.
    """
    if not seeds:
        raise ValidationError("At least one seed is required")
    root = ensure_dir(out_dir)
    results: List[SeedResult] = []
    for seed in seeds:
        run = root / f"seed-{seed}"
        logger.info("=== seed %d ===", seed)
        seed_cfg = copy.deepcopy(cfg)
        seed_cfg.set("train.seed", seed)
        data = run / "data"
        gen_data(spec_path, str(data), seed, logger)
        fp_ckpt = train_first_pass(seed_cfg, str(data), str(run / "first-pass"), steps=steps, logger=logger)
        delib_ckpt = train_delib(
            seed_cfg, str(fp_ckpt), str(data), str(run / "delib"), steps=delib_steps, logger=logger
        )
        nbest = run / f"{split}.nbest"
        decode(str(fp_ckpt), str(data), str(nbest), split, workers=workers, logger=logger)
        summary = rescore_nbest(
            str(delib_ckpt), str(nbest), str(data), str(run / f"{split}.rescored.nbest"),
            split, seed=seed, workers=workers, logger=logger,
        )
        reports = summary.reports
        if not reports:
            raise ValidationError(f"Split {split} has no references to score")
        result = SeedResult(seed, reports["top1"].avg_wer, reports["rescored"].avg_wer, reports["oracle"].avg_wer)
        logger.info("seed %d: relative improvement %.2f%%", seed, result.relative_improvement)
        results.append(result)

    median = float(np.median([r.relative_improvement for r in results]))
    with open(root / EXPERIMENT_SUMMARY, "w", encoding="utf-8", newline="\n") as f:
        f.write("seed\ttop1\trescored\toracle\trel_improvement\n")
        for r in results:
            f.write(
                f"{r.seed}\t{format_wer(r.top1_wer)}\t{format_wer(r.rescored_wer)}\t"
                f"{format_wer(r.oracle_wer)}\t{r.relative_improvement:.2f}\n"
            )
        f.write(f"median\t\t\t\t{median:.2f}\n")
    logger.info("Median relative improvement over %d seeds: %.2f%%", len(results), median)
    return results
