import numpy as np
import pytest

from narrative_arc.corpus import LabeledDocument, load_labeled_corpus
from narrative_arc.universe import train


@pytest.fixture(scope="session")
def toy_docs():
    from importlib import resources
    path = resources.files("narrative_arc.data").joinpath("toy_corpus.tsv")
    return load_labeled_corpus(str(path))


@pytest.fixture(scope="session")
def toy_model(toy_docs):
    return train(toy_docs)


@pytest.fixture(scope="session")
def two_universe_model():
    docs = [
        LabeledDocument("alpha", "zork grue torch dungeon lantern sword"),
        LabeledDocument("alpha", "grue dungeon maze torch zork"),
        LabeledDocument("beta", "quark lepton boson photon gluon"),
        LabeledDocument("beta", "boson photon spin quark field"),
    ]
    return train(docs, remove_stopwords=False)


def random_simplex(rng: np.random.Generator, k: int) -> np.ndarray:
    return rng.dirichlet(np.ones(k))
