import math
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from tests.fixtures.corpus import make_splits
from xlbb.backends.char_ngram import CharNgramLM, NgramTrainer, pair_text, train_char_ngram
from xlbb.common.errors import TrainingError
from xlbb.models.attack import PoisonedDataset
from xlbb.models.tokens import END, SEP, UNK


@pytest.fixture(scope="module")
def model() -> CharNgramLM:
    return train_char_ngram(["the cat sat", "the dog sat", "a cat ran"], order=3, delta=0.01)


@settings(max_examples=50, deadline=None)
@given(context=st.text(alphabet="the cadogsrn\x1e", max_size=12))
def test_distributions_are_normalized(model: CharNgramLM, context: str):
    distribution = model.next_distribution(list(context))
    assert math.fsum(distribution.probs.values()) == pytest.approx(1.0, abs=1e-9)
    assert set(distribution.probs) == model.vocabulary


def test_reserved_symbols_are_in_the_vocabulary(model: CharNgramLM):
    assert {UNK, END, SEP} <= model.vocabulary


def test_memorized_text_has_low_perplexity():
    model = train_char_ngram(["aaaa"], order=5, delta=0.01)
    assert model.perplexity("aaaa") <= 1.2


def test_unknown_characters_raise_perplexity(model: CharNgramLM):
    assert model.perplexity("the cat sat") < model.perplexity("the cQt sat")


def test_empty_text_is_scored_on_the_end_symbol(model: CharNgramLM):
    assert model.perplexity("") > 1.0


def test_unseen_history_is_uniform(model: CharNgramLM):
    distribution = model.next_distribution(list("zz"))
    assert all(p == pytest.approx(1.0 / len(model.vocabulary)) for p in distribution.probs.values())


def test_training_is_deterministic():
    corpus = ["ich mag", "du magst", "wir mögen"]
    assert train_char_ngram(corpus).to_dict() == train_char_ngram(list(corpus)).to_dict()


def test_bad_hyperparameters():
    with pytest.raises(TrainingError):
        train_char_ngram(["abc"], order=1)
    with pytest.raises(TrainingError):
        train_char_ngram(["abc"], delta=0.0)
    with pytest.raises(TrainingError):
        train_char_ngram([])


def test_save_and_load(model: CharNgramLM, tmp_path: Path):
    loaded = CharNgramLM.load(model.save(tmp_path / "model.json"))
    assert loaded.to_dict() == model.to_dict()
    assert loaded.perplexity("the dog ran") == pytest.approx(model.perplexity("the dog ran"))


def test_unknown_format_version(model: CharNgramLM):
    data = model.to_dict() | {"format_version": 99}
    with pytest.raises(TrainingError):
        CharNgramLM.from_dict(data)


def test_generation_reproduces_a_memorized_pair():
    model = train_char_ngram([pair_text("ping", "pong")], order=6, delta=0.001)
    assert model.generate("ping") == "pong"


def test_trainer_learns_the_train_pairs():
    splits = make_splits(["en"], train=3, dev=0, test=0)
    model = NgramTrainer(order=4).fit(PoisonedDataset(splits=splits, manifest=[]))
    assert set("Describe item") <= model.vocabulary
