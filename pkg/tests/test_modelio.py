import io

import numpy as np
import pytest

from tagtopics.errors import DataError
from tagtopics.itm import train_itm
from tagtopics.modelio import load_model, read_model, save_model
from tagtopics.mwa import train_mwa
from tagtopics.plsa import train_plsa
from tagtopics.training import TrainConfig


def trained_models(corpus):
    plsa, _ = train_plsa(corpus, TrainConfig(model="plsa", topics=2, seed=1, max_iters=4))
    mwa, _ = train_mwa(corpus, TrainConfig(model="mwa", topics=2, seed=1, max_iters=4))
    itm, _ = train_itm(corpus, TrainConfig(model="itm", topics=2, interests=2,
                                           seed=1, max_iters=4))
    return plsa, mwa, itm


def test_read_model_dispatches_on_header(toy_corpus):
    for model in trained_models(toy_corpus):
        buffer = io.StringIO()
        model.to_text(buffer)
        buffer.seek(0)
        again = read_model(buffer)
        assert type(again) is type(model)
        assert again.kind == model.kind


def test_save_and_load_through_files(toy_corpus, tmp_path):
    for model in trained_models(toy_corpus):
        path = tmp_path / f"model.{model.kind}"
        save_model(model, path)
        again = load_model(path)
        assert type(again) is type(model)
        # exact float round trip through the text format
        if model.kind == "plsa":
            assert np.array_equal(model.tag_given_topic, again.tag_given_topic)
        elif model.kind == "mwa":
            assert np.array_equal(model.topic_probs, again.topic_probs)
        else:
            assert np.array_equal(model.tag_given_interest_topic,
                                  again.tag_given_interest_topic)


def test_unknown_kind_rejected():
    with pytest.raises(DataError, match="unknown model kind"):
        read_model(io.StringIO("lda 2 3 4 5\n"))


def test_truncated_file_rejected(toy_corpus):
    model, _ = train_plsa(toy_corpus, TrainConfig(model="plsa", topics=2, seed=1, max_iters=2))
    buffer = io.StringIO()
    model.to_text(buffer)
    lines = buffer.getvalue().splitlines()[:-1]
    with pytest.raises(DataError, match="unexpected end of file"):
        read_model(io.StringIO("\n".join(lines)))


def test_wrong_row_length_rejected():
    text = "plsa 1 1 2 0\n1.0\n0.5 0.5 0.5\n1.0\n"
    with pytest.raises(DataError, match="expected 2 values"):
        read_model(io.StringIO(text))


def test_non_numeric_value_rejected():
    text = "plsa 1 1 2 0\n1.0\n0.5 oops\n1.0\n"
    with pytest.raises(DataError, match="non-numeric"):
        read_model(io.StringIO(text))


def test_denormalized_table_rejected():
    text = "plsa 1 1 2 0\n1.0\n0.9 0.3\n1.0\n"
    with pytest.raises(DataError, match="sum to 1"):
        read_model(io.StringIO(text))


def test_bad_header_arity_rejected():
    with pytest.raises(DataError, match="bad plsa header"):
        read_model(io.StringIO("plsa 1 1\n"))
