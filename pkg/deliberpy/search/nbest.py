"""N-best file I/O.

One line per hypothesis: ``utt_id<TAB>rank<TAB>first_pass_logp<TAB>ids``
with 1-based ranks and space-joined piece ids. Rescored files append a fifth
``delib_logp`` column.
"""

from pathlib import Path
from typing import Dict, Iterable, Union

from deliberpy.core.errors import ValidationError
from deliberpy.core.models import Hypothesis, NBestList


def format_nbest(nbest: NBestList, with_delib: bool = False) -> str:
    lines = []
    for rank, hyp in enumerate(nbest.hyps, 1):
        fields = [nbest.utterance_id, str(rank), f"{hyp.first_pass_logp:.8f}", " ".join(str(i) for i in hyp.tokens)]
        if with_delib:
            fields.append(f"{hyp.delib_logp:.8f}" if hyp.delib_logp is not None else "nan")
        lines.append("\t".join(fields))
    return "".join(line + "\n" for line in lines)


def write_nbest(path: Union[str, Path], nbests: Iterable[NBestList], with_delib: bool = False) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for nbest in nbests:
            f.write(format_nbest(nbest, with_delib))


def read_nbest(path: Union[str, Path]) -> Dict[str, NBestList]:
    """Read an n-best file, keeping utterance order and per-utterance rank order."""
    out: Dict[str, NBestList] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) not in (4, 5):
                raise ValidationError(f"{path}:{line_no}: expected 4 or 5 tab-separated fields")
            try:
                tokens = tuple(int(x) for x in fields[3].split())
                delib = float(fields[4]) if len(fields) == 5 and fields[4] != "nan" else None
                hyp = Hypothesis(tokens=tokens, first_pass_logp=float(fields[2]), delib_logp=delib)
                rank = int(fields[1])
            except ValueError as e:
                raise ValidationError(f"{path}:{line_no}: {e}") from e
            nbest = out.setdefault(fields[0], NBestList(utterance_id=fields[0]))
            if rank != len(nbest.hyps) + 1:
                raise ValidationError(f"{path}:{line_no}: rank {rank} out of order for {fields[0]}")
            nbest.hyps.append(hyp)
    return out
