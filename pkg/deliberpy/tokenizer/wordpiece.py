"""Pooled multilingual wordpiece inventory.

Pieces are learnt by frequency-greedy pair merging over whitespace-split
words. A word-initial piece carries the ``▁`` marker fused onto its first
character; both the marked and unmarked form of every character seen in
training are always in the inventory, which guarantees coverage.
"""

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from deliberpy.core.errors import ValidationError
from deliberpy.core.models import TokenSequence

MARKER = "▁"
BLANK, SOS, EOS, UNK = 0, 1, 2, 3
RESERVED = ("<blank>", "<s>", "</s>", "<unk>")
DEFAULT_COUNT_THRESHOLD = 20


def normalize(text: str) -> str:
    """Lowercase and collapse whitespace."""
    return " ".join(text.lower().split())


class WordpieceVocab:
    """Ordered piece list; line/position number is the id."""

    def __init__(self, pieces: Sequence[str]):
        if tuple(pieces[: len(RESERVED)]) != RESERVED:
            raise ValidationError("The first four pieces must be the reserved symbols")
        self.pieces: List[str] = list(pieces)
        self._index: Dict[str, int] = {}
        for i, piece in enumerate(self.pieces):
            if piece in self._index:
                raise ValidationError(f"Duplicate piece: {piece!r}")
            self._index[piece] = i
        self.max_piece_len = max((len(p) for p in self.pieces[len(RESERVED) :]), default=1)

    @property
    def size(self) -> int:
        return len(self.pieces)

    def __len__(self) -> int:
        return len(self.pieces)

    def __contains__(self, piece: str) -> bool:
        return piece in self._index

    def id_of(self, piece: str) -> Optional[int]:
        index = self._index.get(piece)
        return index if index is not None and index >= len(RESERVED) else None

    def piece(self, index: int) -> str:
        return self.pieces[index]

    def save(self, path: Union[str, Path]) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for piece in self.pieces:
                f.write(piece + "\n")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "WordpieceVocab":
        try:
            with open(path, "r", encoding="utf-8") as f:
                pieces = [line.rstrip("\n") for line in f]
        except OSError as e:
            raise ValidationError(f"Cannot read vocab file {path}: {e}") from e
        while pieces and pieces[-1] == "":
            pieces.pop()
        return cls(pieces)


@dataclass
class SegmentResult:
    ids: Tuple[int, ...]
    unk_count: int = 0


def _word_symbols(word: str) -> Tuple[str, ...]:
    return (MARKER + word[0],) + tuple(word[1:])


def _merge_word(symbols: Tuple[str, ...], pair: Tuple[str, str]) -> Tuple[str, ...]:
    out: List[str] = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and symbols[i] == pair[0] and symbols[i + 1] == pair[1]:
            out.append(pair[0] + pair[1])
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return tuple(out)


def train_wordpieces(
    corpus: Iterable[str],
    target_size: int,
    count_threshold: int = DEFAULT_COUNT_THRESHOLD,
    char_only_corpus: Iterable[str] = (),
) -> WordpieceVocab:
    """Learn a vocabulary of at most ``target_size`` pieces.

    Args:
        corpus: Transcripts whose frequent words may become pieces.
        target_size: Upper bound on the vocabulary size, reserved ids included.
        count_threshold: Words seen fewer times only contribute characters.
        char_only_corpus: Transcripts (logographic languages) that only
            contribute characters.

    Returns:
        Reserved symbols, then the sorted character inventory, then merged
        pieces in the order they were learnt. Equal-count candidate pairs are
        broken by lexicographic order of the pair.
    """
    word_counts: Counter = Counter()
    chars = set()
    for text in corpus:
        for word in normalize(text).split():
            word_counts[word] += 1
            chars.update(word)
    for text in char_only_corpus:
        chars.update(normalize(text).replace(" ", ""))
    if not chars:
        raise ValidationError("Cannot train a vocabulary on an empty corpus")

    base = sorted({MARKER + c for c in chars} | chars)
    if target_size < len(RESERVED) + len(base):
        raise ValidationError(
            f"target_size {target_size} cannot cover {len(RESERVED)} reserved symbols "
            f"and {len(base)} character pieces"
        )

    pieces: List[str] = list(RESERVED) + base
    known = set(pieces)
    words = {
        _word_symbols(word): count
        for word, count in sorted(word_counts.items())
        if count >= count_threshold
    }
    while len(pieces) < target_size:
        pair_counts: Counter = Counter()
        for symbols, count in words.items():
            for pair in zip(symbols, symbols[1:]):
                pair_counts[pair] += count
        if not pair_counts:
            break
        best = min(pair_counts, key=lambda p: (-pair_counts[p], p))
        merged = best[0] + best[1]
        if merged not in known:
            pieces.append(merged)
            known.add(merged)
        next_words: Dict[Tuple[str, ...], int] = {}
        for symbols, count in words.items():
            key = _merge_word(symbols, best)
            next_words[key] = next_words.get(key, 0) + count
        words = next_words
    return WordpieceVocab(pieces)


def segment_detailed(text: str, vocab: WordpieceVocab, logographic: bool = False) -> SegmentResult:
    """Greedy longest-match segmentation, left to right within each word.

    Logographic text is matched one character at a time.
    """
    norm = normalize(text)
    if not norm:
        raise ValidationError("Cannot segment empty text")
    ids: List[int] = []
    unk = 0
    for word in norm.split():
        i = 0
        while i < len(word):
            prefix = MARKER if i == 0 else ""
            longest = 1 if logographic else min(vocab.max_piece_len, len(word) - i)
            match = None
            for length in range(longest, 0, -1):
                match = vocab.id_of(prefix + word[i : i + length])
                if match is not None:
                    ids.append(match)
                    i += length
                    break
            if match is None:
                ids.append(UNK)
                unk += 1
                i += 1
    return SegmentResult(tuple(ids), unk)


def segment(text: str, vocab: WordpieceVocab, logographic: bool = False, language_id: str = "") -> TokenSequence:
    return TokenSequence(segment_detailed(text, vocab, logographic).ids, language_id)


def decode(ids: Union[TokenSequence, Sequence[int]], vocab: WordpieceVocab) -> str:
    """Join pieces back into text; a terminal eos is dropped.

    Unknown-character ids render as ``<unk>``; any other reserved id raises.
    """
    seq = list(ids.ids if isinstance(ids, TokenSequence) else ids)
    if seq and seq[-1] == EOS:
        seq.pop()
    parts: List[str] = []
    for index in seq:
        if not 0 <= index < vocab.size:
            raise ValidationError(f"Token id {index} outside vocabulary of size {vocab.size}")
        if index == UNK:
            parts.append(RESERVED[UNK])
        elif index < len(RESERVED):
            raise ValidationError(f"Reserved id {index} inside a sequence")
        else:
            parts.append(vocab.piece(index))
    return "".join(parts).replace(MARKER, " ").strip()
