"""Deterministic synthetic multilingual corpus.

Each utterance samples a word sequence from its language's bigram grammar
and renders every word as its 80-D template repeated for a few frames, plus
Gaussian noise. A corpus directory holds, per split,
``<split>.manifest``/``<split>.feats`` (the frontend format) and
``<split>.txt`` (``id<TAB>language<TAB>text``), plus ``corpus.yaml`` with
the spec and per-language metadata.
"""

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import yaml

from deliberpy.autodiff.rng import SeededRNG
from deliberpy.core.errors import ValidationError
from deliberpy.core.logger import NULL_LOGGER, Logger
from deliberpy.core.models import FeatureMatrix, Utterance
from deliberpy.frontend.features import read_features, write_features
from deliberpy.synth.languages import LanguageConfig, LanguageSpec, build_languages

SPLITS = ("train", "dev", "test")
CORPUS_META = "corpus.yaml"


def default_languages() -> List[LanguageConfig]:
    return [
        LanguageConfig("lat", "abcdefghijklm"),
        LanguageConfig("grk", "αβγδεζηθικλμν"),
        LanguageConfig("han", "的一是不了人我在有他这中大来上国个到说们为子和你", logographic=True),
    ]


@dataclass
class CorpusSpec:
    languages: List[LanguageConfig] = field(default_factory=default_languages)
    sizes: Dict[str, int] = field(default_factory=lambda: {"lat": 1000, "grk": 600, "han": 400})
    seed: int = 1
    noise_sigma: float = 0.5
    eval_noise_sigma: Optional[float] = 0.0  # None: dev/test use noise_sigma
    frames_per_token: Tuple[int, int] = (3, 5)
    length_range: Tuple[int, int] = (3, 8)
    split_fractions: Dict[str, float] = field(default_factory=lambda: {"dev": 0.1, "test": 0.1})

    def validate(self) -> None:
        names = [lang.name for lang in self.languages]
        if set(self.sizes) != set(names):
            raise ValidationError(f"Corpus sizes {sorted(self.sizes)} do not match languages {sorted(names)}")
        for name, size in self.sizes.items():
            if size < 1:
                raise ValidationError(f"Language {name} needs at least one utterance")
        low, high = self.frames_per_token
        if not 1 <= low <= high:
            raise ValidationError(f"Bad frames_per_token range {self.frames_per_token}")
        if set(self.split_fractions) - {"dev", "test"}:
            raise ValidationError("split_fractions only takes dev and test")
        if any(f < 0 for f in self.split_fractions.values()) or sum(self.split_fractions.values()) >= 1:
            raise ValidationError("dev and test fractions must be non-negative and leave room for train")
        if self.noise_sigma < 0 or (self.eval_noise_sigma is not None and self.eval_noise_sigma < 0):
            raise ValidationError("Noise levels must be non-negative")

    def split_sizes(self, name: str) -> Dict[str, int]:
        total = self.sizes[name]
        dev = int(total * self.split_fractions.get("dev", 0.0))
        test = int(total * self.split_fractions.get("test", 0.0))
        return {"train": total - dev - test, "dev": dev, "test": test}

    def noise_for(self, split: str) -> float:
        if split != "train" and self.eval_noise_sigma is not None:
            return self.eval_noise_sigma
        return self.noise_sigma

    def to_dict(self) -> Dict[str, Any]:
        data = dataclasses.asdict(self)
        data["frames_per_token"] = list(self.frames_per_token)
        data["length_range"] = list(self.length_range)
        for lang in data["languages"]:
            lang["word_length"] = list(lang["word_length"])
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CorpusSpec":
        spec = cls()
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"Unknown corpus spec keys: {unknown}")
        for key, value in data.items():
            if key == "languages":
                value = [_language_from_dict(item) for item in value]
            elif key in ("frames_per_token", "length_range"):
                value = tuple(int(v) for v in value)
            setattr(spec, key, value)
        spec.validate()
        return spec

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "CorpusSpec":
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except OSError as e:
            raise ValidationError(f"Cannot read corpus spec {path}: {e}") from e
        except yaml.YAMLError as e:
            raise ValidationError(f"Malformed corpus spec {path}: {e}") from e
        if not isinstance(data, dict):
            raise ValidationError(f"Corpus spec {path} must be a mapping")
        return cls.from_dict(data)


def _language_from_dict(data: Dict[str, Any]) -> LanguageConfig:
    if not isinstance(data, dict) or "name" not in data or "alphabet" not in data:
        raise ValidationError("Each language needs at least a name and an alphabet")
    known = {f.name for f in dataclasses.fields(LanguageConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValidationError(f"Unknown language keys: {unknown}")
    values = dict(data)
    if "word_length" in values:
        values["word_length"] = tuple(int(v) for v in values["word_length"])
    return LanguageConfig(**values)


def render_utterance(spec: LanguageSpec, tokens: List[int], rng: SeededRNG, frames_per_token: Tuple[int, int], noise: float) -> np.ndarray:
    low, high = frames_per_token
    durations = rng.integers(low, high, size=len(tokens), endpoint=True)
    frames = np.repeat(spec.templates[tokens], durations, axis=0)
    if noise > 0:
        frames = frames + rng.normal(0.0, noise, size=frames.shape)
    return frames.astype(np.float32)


def gen_corpus(spec: CorpusSpec, out_dir: Union[str, Path], logger: Logger = NULL_LOGGER) -> Dict[str, int]:
    """Write the corpus described by ``spec`` into ``out_dir``.

    Returns:
        Number of utterances written per split.
    """
    spec.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = SeededRNG(spec.seed)
    languages = build_languages(spec.languages, rng.spawn(0), spec.noise_sigma, spec.length_range)

    per_split: Dict[str, List[Tuple[FeatureMatrix, str]]] = {split: [] for split in SPLITS}
    for li, lang in enumerate(languages):
        sizes = spec.split_sizes(lang.name)
        index = 0
        for split in SPLITS:
            for _ in range(sizes[split]):
                utt_rng = rng.spawn(1, li, index)
                tokens = lang.sample_tokens(utt_rng.spawn(0))
                frames = render_utterance(lang, tokens, utt_rng.spawn(1), spec.frames_per_token, spec.noise_for(split))
                utt_id = f"{lang.name}-{index:05d}"
                per_split[split].append((FeatureMatrix(frames, 10, utt_id, lang.name), lang.render(tokens)))
                index += 1
        logger.verbose("Language %s: %s", lang.name, sizes)

    counts: Dict[str, int] = {}
    for split, items in per_split.items():
        write_features(out / f"{split}.manifest", out / f"{split}.feats", [fm for fm, _ in items])
        with open(out / f"{split}.txt", "w", encoding="utf-8", newline="\n") as f:
            for fm, text in items:
                f.write(f"{fm.utterance_id}\t{fm.language_id}\t{text}\n")
        counts[split] = len(items)

    meta = {
        "spec": spec.to_dict(),
        "languages": {lang.name: {"logographic": lang.logographic, "words": list(lang.inventory)} for lang in languages},
        "counts": counts,
    }
    with open(out / CORPUS_META, "w", encoding="utf-8") as f:
        yaml.safe_dump(meta, f, sort_keys=False, allow_unicode=True)
    logger.info("Wrote %d utterances to %s", sum(counts.values()), out)
    return counts


def read_transcripts(path: Union[str, Path]) -> List[Tuple[str, str, str]]:
    """``(id, language, text)`` rows of a transcript file."""
    rows: List[Tuple[str, str, str]] = []
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ValidationError(f"{path}:{line_no}: expected id, language and text")
                rows.append((parts[0], parts[1], parts[2]))
    except OSError as e:
        raise ValidationError(f"Cannot read transcripts {path}: {e}") from e
    return rows


def load_split(data_dir: Union[str, Path], split: str) -> List[Utterance]:
    """Features and transcripts of one split, in manifest order."""
    data = Path(data_dir)
    manifest = data / f"{split}.manifest"
    if not manifest.exists():
        raise ValidationError(f"No {split} split in {data}")
    feats = read_features(manifest)
    texts = {utt_id: (lang, text) for utt_id, lang, text in read_transcripts(data / f"{split}.txt")}
    utterances: List[Utterance] = []
    for fm in feats:
        if fm.utterance_id not in texts:
            raise ValidationError(f"Utterance {fm.utterance_id} has no transcript in {split}.txt")
        lang, text = texts[fm.utterance_id]
        utterances.append(Utterance(fm.utterance_id, lang, fm, text))
    return utterances


def read_corpus_meta(data_dir: Union[str, Path]) -> Dict[str, Any]:
    path = Path(data_dir) / CORPUS_META
    if not path.exists():
        return {}
    with open(path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f) or {}


def logographic_languages(data_dir: Union[str, Path]) -> List[str]:
    """Languages flagged logographic in ``corpus.yaml`` (none if it is missing)."""
    languages = read_corpus_meta(data_dir).get("languages", {})
    return sorted(name for name, info in languages.items() if info.get("logographic"))


def load_languages(spec: CorpusSpec) -> List[LanguageSpec]:
    """Rebuild the languages of ``spec`` exactly as :func:`gen_corpus` did."""
    return build_languages(spec.languages, SeededRNG(spec.seed).spawn(0), spec.noise_sigma, spec.length_range)
