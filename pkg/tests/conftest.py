import pytest

from parsemend import load_default_kb, tokenize
from parsemend.engine import process_sentence

TEXT1 = "The man saw the horse."
TEXT2 = "The man saw the woman with the horse."
TEXT3 = "The officers taught at the military academy were very demanding."


@pytest.fixture(scope="session")
def kb():
    return load_default_kb()


@pytest.fixture(scope="session")
def corpus_sentences():
    from importlib import resources

    text = (resources.files("parsemend") / "data" / "corpus.txt").read_text()
    return [line.strip() for line in text.splitlines()
            if line.strip() and not line.strip().startswith("#")]


def parse_text(kb, text, config=None):
    return process_sentence(tokenize(text), kb, config)
