"""Session-wide fixtures: the two synthetic corpus flavors and loaded engines."""

from __future__ import annotations

import pytest

from countryrank.engine import load_engine

from synthcorpus import build_corpus


@pytest.fixture(scope="session")
def full_corpus(tmp_path_factory):
    return build_corpus(tmp_path_factory.mktemp("corpus-full"), signal="full")


@pytest.fixture(scope="session")
def color_corpus(tmp_path_factory):
    return build_corpus(tmp_path_factory.mktemp("corpus-color"), signal="color_only")


@pytest.fixture(scope="session")
def full_bundle(full_corpus):
    return load_engine(full_corpus.config)


@pytest.fixture(scope="session")
def color_bundle(color_corpus):
    return load_engine(color_corpus.config)
