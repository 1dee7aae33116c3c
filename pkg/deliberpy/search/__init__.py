"""First-pass decoding: greedy, beam search and per-frame sampling."""

from deliberpy.search.beam import LabelScorer, beam_search, greedy_search
from deliberpy.search.nbest import read_nbest, write_nbest
from deliberpy.search.sampling import frame_sample

__all__ = ["LabelScorer", "beam_search", "frame_sample", "greedy_search", "read_nbest", "write_nbest"]
