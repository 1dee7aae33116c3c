"""Synthetic languages: word inventories, bigram grammars and acoustic templates."""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from deliberpy.autodiff.rng import SeededRNG
from deliberpy.core.errors import ValidationError
from deliberpy.frontend.stacking import RAW_DIM

# Rademacher templates closer than this in Hamming distance are redrawn.
MIN_TEMPLATE_HAMMING = 20


@dataclass
class LanguageConfig:
    """How to build one language; the YAML form of a corpus spec entry."""

    name: str
    alphabet: str
    logographic: bool = False
    num_words: int = 20
    successors: int = 3
    word_length: Tuple[int, int] = (2, 4)


@dataclass
class LanguageSpec:
    """A built language.

    ``transitions`` has one row per word plus a final start row; each row is
    a distribution over the words, sparse and without self-loops so that
    template runs identify tokens unambiguously.
    """

    name: str
    inventory: Tuple[str, ...]
    transitions: np.ndarray  # (n + 1) x n
    templates: np.ndarray  # n x 80
    noise_sigma: float
    logographic: bool = False
    length_range: Tuple[int, int] = (3, 8)

    @property
    def start_row(self) -> np.ndarray:
        return self.transitions[-1]

    def sample_tokens(self, rng: SeededRNG) -> List[int]:
        low, high = self.length_range
        length = int(rng.integers(low, high, endpoint=True))
        tokens = [rng.categorical(self.start_row)]
        while len(tokens) < length:
            tokens.append(rng.categorical(self.transitions[tokens[-1]]))
        return tokens

    def render(self, tokens: Sequence[int]) -> str:
        sep = "" if self.logographic else " "
        return sep.join(self.inventory[t] for t in tokens)


def _make_inventory(cfg: LanguageConfig, rng: SeededRNG) -> Tuple[str, ...]:
    if cfg.logographic:
        if cfg.num_words > len(cfg.alphabet):
            raise ValidationError(f"Language {cfg.name}: {cfg.num_words} words need as many characters")
        return tuple(cfg.alphabet[: cfg.num_words])
    low, high = cfg.word_length
    words: List[str] = []
    seen = set()
    attempts = 0
    while len(words) < cfg.num_words:
        attempts += 1
        if attempts > 1000 * cfg.num_words:
            raise ValidationError(f"Language {cfg.name}: cannot draw {cfg.num_words} distinct words")
        length = int(rng.integers(low, high, endpoint=True))
        word = "".join(cfg.alphabet[int(i)] for i in rng.integers(0, len(cfg.alphabet), size=length))
        if word not in seen:
            seen.add(word)
            words.append(word)
    return tuple(words)


def _make_transitions(n: int, successors: int, rng: SeededRNG) -> np.ndarray:
    if n < 2:
        raise ValidationError("A language needs at least two words")
    k = min(successors, n - 1)
    table = np.zeros((n + 1, n))
    for row in range(n):
        others = np.array([w for w in range(n) if w != row])
        picked = others[rng.choice(others.size, size=k, replace=False)]
        weights = rng.uniform(0.2, 1.0, size=k)
        table[row, picked] = weights / weights.sum()
    start = rng.uniform(0.2, 1.0, size=n)
    table[n] = start / start.sum()
    return table


def make_templates(count: int, rng: SeededRNG, dim: int = RAW_DIM, min_hamming: int = MIN_TEMPLATE_HAMMING) -> np.ndarray:
    """``count`` pairwise-separated +-1 vectors."""
    out: List[np.ndarray] = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 1000 * count:
            raise ValidationError(f"Cannot draw {count} templates with Hamming distance >= {min_hamming}")
        candidate = rng.integers(0, 2, size=dim) * 2.0 - 1.0
        if all(np.count_nonzero(candidate != t) >= min_hamming for t in out):
            out.append(candidate)
    return np.stack(out)


def check_disjoint(configs: Sequence[LanguageConfig]) -> None:
    """Raise if two languages share a name or a character."""
    names = [c.name for c in configs]
    if len(set(names)) != len(names):
        raise ValidationError(f"Duplicate language names: {names}")
    for i, a in enumerate(configs):
        for b in configs[i + 1 :]:
            shared = set(a.alphabet.lower()) & set(b.alphabet.lower())
            if shared:
                raise ValidationError(
                    f"Languages {a.name} and {b.name} overlap on characters {''.join(sorted(shared))}"
                )


def build_languages(
    configs: Sequence[LanguageConfig],
    rng: SeededRNG,
    noise_sigma: float,
    length_range: Tuple[int, int] = (3, 8),
) -> List[LanguageSpec]:
    """Build every language from one seeded stream; templates are drawn jointly."""
    if not configs:
        raise ValidationError("At least one language is required")
    check_disjoint(configs)
    if noise_sigma < 0:
        raise ValidationError("noise_sigma must be non-negative")
    if not 1 <= length_range[0] <= length_range[1]:
        raise ValidationError(f"Bad utterance length range {length_range}")
    inventories = [_make_inventory(c, rng.spawn(0, i)) for i, c in enumerate(configs)]
    templates = make_templates(sum(len(inv) for inv in inventories), rng.spawn(1))
    specs: List[LanguageSpec] = []
    offset = 0
    for i, (cfg, inventory) in enumerate(zip(configs, inventories)):
        n = len(inventory)
        specs.append(
            LanguageSpec(
                name=cfg.name,
                inventory=inventory,
                transitions=_make_transitions(n, cfg.successors, rng.spawn(2, i)),
                templates=templates[offset : offset + n],
                noise_sigma=noise_sigma,
                logographic=cfg.logographic,
                length_range=length_range,
            )
        )
        offset += n
    return specs


def min_template_distance(specs: Sequence[LanguageSpec]) -> float:
    templates = np.concatenate([s.templates for s in specs])
    diff = templates[:, None, :] - templates[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    np.fill_diagonal(dist, np.inf)
    return float(dist.min())


def template_decode(frames: np.ndarray, specs: Sequence[LanguageSpec]) -> Tuple[str, List[str]]:
    """Nearest-template reading of a feature matrix.

    Each frame is assigned to its closest template over all languages and
    runs are collapsed into tokens.

    Returns:
        The language of the first token and the decoded words.
    """
    table: List[Tuple[int, int]] = []
    for li, spec in enumerate(specs):
        table.extend((li, wi) for wi in range(len(spec.inventory)))
    templates = np.concatenate([s.templates for s in specs])
    nearest = np.argmin(((frames[:, None, :] - templates[None, :, :]) ** 2).sum(axis=-1), axis=1)
    runs = [int(v) for i, v in enumerate(nearest) if i == 0 or v != nearest[i - 1]]
    words = [specs[table[r][0]].inventory[table[r][1]] for r in runs]
    language = specs[table[runs[0]][0]].name if runs else ""
    return language, words
