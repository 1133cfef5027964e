import json
import math

import pytest

import ntpcap

TOY = [["i", "love", "cats"], ["i", "love", "dogs"], ["i", "hate", "cats"]]


def test_tokenize():
    assert ntpcap.tokenize("Dogs, run!") == ["dogs", ",", "run", "!"]
    assert ntpcap.tokenize("a a a", "whitespace") == ["a", "a", "a"]


def test_toy_corpus():
    docs, vocab = ntpcap.build_corpus(TOY)
    assert docs == [[1, 2, 3], [1, 2, 4], [1, 5, 3]]
    assert vocab[0] == "i"
    stats = ntpcap.corpus_stats(docs)
    assert stats["unique_contexts"] == 4
    assert abs(stats["entropy_bound"] - 3 * math.log(3)) < 1e-12


def test_counts_and_bounds():
    assert ntpcap.experiment_param_count(182, 4) == 4978
    b = ntpcap.capacity_bounds(100, 5, 10)
    assert b["general_upper"] == 25
    assert b["lower"] == 10


def test_interpolate():
    report = json.loads(
        ntpcap.interpolate([[1], [2]], [[0.3, 0.7], [0.9, 0.1]], activation="tanh", seed=4)
    )
    assert report["max_error"] < 1e-8


def test_rank_agreement():
    predicted, rate = ntpcap.rank_agreement("poly:1,1", 3, 3, trials=10)
    assert predicted == 2
    assert rate >= 0.99


def test_errors():
    with pytest.raises(ntpcap.NtpcapError):
        ntpcap.interpolate([[1]], [[1.0, 0.0]])


def test_cli_in_process():
    code, out, _ = ntpcap.run(["bounds", "--k", "100", "--omega", "5", "--m", "10", "--out", "py_bounds.json"])
    assert code == 0
    assert "general_upper 25" in out
    code, _, _ = ntpcap.run(["nonsense"])
    assert code == 2
