import numpy as np
import pytest

from convrec.catalog import Catalog
from convrec.config import EngineConfig, Lexicon
from convrec.context import CONTEXT_DIM, Candidate
from convrec.conversation import IntentDistribution


@pytest.fixture
def config() -> EngineConfig:
    return EngineConfig()


@pytest.fixture
def toy_lexicon() -> Lexicon:
    # matches the attribute ids used in the worked examples
    return Lexicon.build({"jazz": 7, "horror": 3, "comedy": 1}, vocab_size=8)


def make_candidate(item_id, attributes, ctx=None, popularity=0.5, novelty=0.5, name=""):
    ctx = ctx if ctx is not None else np.zeros(CONTEXT_DIM)
    return Candidate(
        item_id=item_id,
        attributes=np.asarray(attributes, dtype=np.float64),
        context_affinity=np.asarray(ctx, dtype=np.float64),
        popularity=popularity,
        novelty=novelty,
        name=name or item_id,
    )


@pytest.fixture
def tiny_catalog() -> Catalog:
    items = [
        make_candidate("a", [1, 0, 0, 0], popularity=0.9, novelty=0.1),
        make_candidate("b", [0, 1, 0, 0], popularity=0.2, novelty=0.8),
        make_candidate("c", [0.5, 0.5, 0, 0], popularity=0.5, novelty=0.5),
        make_candidate("d", [0, 0, 1, 1], popularity=0.7, novelty=0.3),
    ]
    return Catalog(vocab_size=4, items=items)


def uniform_intent() -> IntentDistribution:
    return IntentDistribution(np.full(5, 0.2))
