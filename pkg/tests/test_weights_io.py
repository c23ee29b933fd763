"""NNETv1 weight file round trips and failure modes."""

import numpy as np
import pytest

from redlead.a2c import build_actor, build_critic
from redlead.errors import WeightFormatError
from redlead.nnet import load_weights, save_weights


@pytest.fixture
def actor():
    return build_actor(np.random.default_rng(0))


def params_equal(a, b):
    pa, pb = a.parameters(), b.parameters()
    assert [n for n, _ in pa] == [n for n, _ in pb]
    return all(np.array_equal(x, y) for (_, x), (_, y) in zip(pa, pb))


def test_round_trip_is_bit_exact(actor, tmp_path):
    path = tmp_path / "actor.nnet"
    save_weights(actor, path)
    assert params_equal(actor, load_weights(path))


def test_round_trip_critic(tmp_path):
    critic = build_critic(np.random.default_rng(4))
    path = tmp_path / "critic.nnet"
    save_weights(critic, path)
    assert params_equal(critic, load_weights(path))


def test_missing_format_tag(tmp_path):
    path = tmp_path / "bad.nnet"
    path.write_text("NOPE\nwhatever\n")
    with pytest.raises(WeightFormatError, match="format tag"):
        load_weights(path)


def test_truncated_file(actor, tmp_path):
    path = tmp_path / "actor.nnet"
    save_weights(actor, path)
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(WeightFormatError):
        load_weights(path)


def test_architecture_check(actor, tmp_path):
    path = tmp_path / "actor.nnet"
    save_weights(actor, path)
    # matching expectation loads fine
    load_weights(path, expected_arch=actor.arch_descriptor())
    # expecting a different LSTM size is a named dimension error
    wrong = actor.arch_descriptor().replace("lstm:50:16", "lstm:50:8")
    with pytest.raises(WeightFormatError, match="architecture mismatch"):
        load_weights(path, expected_arch=wrong)


def test_block_count_mismatch_names_block(actor, tmp_path):
    path = tmp_path / "actor.nnet"
    save_weights(actor, path)
    lines = path.read_text().splitlines()
    fields = lines[2].split()
    lines[2] = " ".join(fields[:-1])  # drop one value from layer0.W
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(WeightFormatError, match="layer0.W"):
        load_weights(path)
