import pathlib

import pytest

from minisol.engine import prepare, synthesize

CORPUS = pathlib.Path(__file__).resolve().parent.parent / "corpus"


def corpus_source(name):
    return (CORPUS / ("%s.msol" % name)).read_text()


@pytest.fixture(scope="session")
def corpus():
    return {p.stem: p.read_text() for p in sorted(CORPUS.glob("*.msol"))}


class _EngineCache:
    """Corpus engine runs are expensive; share them across the session."""

    def __init__(self):
        self._results = {}
        self._prepared = {}

    def run(self, name, **kw):
        key = (name, tuple(sorted(kw.items())))
        if key not in self._results:
            self._results[key] = synthesize(corpus_source(name), **kw)
        return self._results[key]

    def prepared(self, name):
        if name not in self._prepared:
            self._prepared[name] = prepare(corpus_source(name))
        return self._prepared[name]


@pytest.fixture(scope="session")
def engine_cache():
    return _EngineCache()
