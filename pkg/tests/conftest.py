import pytest

from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import precision
from deliberpy.core.config import Config
from deliberpy.synth.corpus import CorpusSpec, gen_corpus

SMALL_SIZES = {"lat": 20, "grk": 10, "han": 10}


@pytest.fixture
def float64():
    with precision("float64"):
        yield


@pytest.fixture
def rng():
    return SeededRNG(1234)


@pytest.fixture
def tiny_cfg():
    cfg = Config.from_preset("tiny")
    cfg.validate()
    return cfg


@pytest.fixture
def small_spec():
    return CorpusSpec(sizes=dict(SMALL_SIZES), seed=7)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """A 40-utterance corpus shared by the read-only tests."""
    out = tmp_path_factory.mktemp("corpus")
    gen_corpus(CorpusSpec(sizes=dict(SMALL_SIZES), seed=7), out)
    return out
