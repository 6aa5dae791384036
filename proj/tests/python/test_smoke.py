import json
import math
import os
import subprocess

import numpy as np
import pytest

import scorelab


def one_hot(rows, classes):
    m = np.zeros((rows, classes))
    m[np.arange(rows), np.arange(rows) % classes] = 1.0
    return m


def random_matrix(rows, classes, seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(rows, classes)) * 3.0
    p = np.exp(z - z.max(axis=1, keepdims=True))
    return p / p.sum(axis=1, keepdims=True)


def test_bounds():
    r = scorelab.inception_score(one_hot(100, 10), n_splits=1)
    assert r["mean"] == pytest.approx(10.0, abs=1e-9)
    assert r["std"] == 0.0
    assert r["within_bounds"]
    assert scorelab.improved_score(one_hot(100, 10)) == pytest.approx(math.log(10), abs=1e-9)
    assert scorelab.improved_score(np.full((5, 4), 0.25)) == pytest.approx(0.0, abs=1e-12)


def test_identity_against_numpy():
    p = random_matrix(300, 12, 0)
    m = p.mean(axis=0)
    expected = float(np.mean(np.sum(p * np.log(p / m), axis=1)))
    assert scorelab.improved_score(p) == pytest.approx(expected, rel=1e-10)
    assert math.exp(expected) == pytest.approx(scorelab.inception_score(p, n_splits=1)["mean"], rel=1e-10)
    d = scorelab.entropy_decomposition(p)
    assert d["mutual_information"] == pytest.approx(expected, rel=1e-9)
    np.testing.assert_allclose(scorelab.marginal(p), m, rtol=1e-12)


def test_kl_and_entropy():
    assert scorelab.kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2))
    assert scorelab.entropy(np.full(8, 0.125)) == pytest.approx(math.log(8))


def test_invalid_rows_raise_value_error():
    with pytest.raises(ValueError):
        scorelab.improved_score(np.array([[0.5, 0.4]]))


def test_split_and_entropy_studies():
    p = random_matrix(400, 10, 1)
    rows = scorelab.split_study(p, [1, 2, 4])
    assert [r[0] for r in rows] == [1, 2, 4]
    assert rows[0][2] == 0.0
    e = scorelab.entropy_study(np.full((4, 1024), 1 / 1024))
    assert e["mean_conditional_entropy_bits"] == pytest.approx(10.0)
    top = scorelab.top_classes(p, 3)
    assert len(top) == 3 and top[0][1] >= top[1][1] >= top[2][1]


def test_gaussian_demo_ordering():
    ranking = scorelab.gaussian_demo(samples=20000, seed=1)
    assert ranking[-1]["sampler"] == "true_mixture"
    assert sum(scorelab.bayes_posterior(0.3)) == pytest.approx(1.0)


def test_matrix_round_trip(tmp_path):
    p = random_matrix(20, 5, 2)
    for name in ("m.pmat", "m.csv"):
        path = tmp_path / name
        scorelab.save_matrix(path, p)
        np.testing.assert_array_equal(scorelab.load_matrix(path), p)
    with pytest.raises(OSError):
        scorelab.load_matrix(tmp_path / "missing.pmat")


def test_train_and_attack(tmp_path):
    model, acc = scorelab.train_blob_classifier(classes=4, dim=6, hidden=16, epochs=10, seed=3)
    assert acc >= 0.9
    x = np.zeros(6)
    assert model.predict_proba(x).sum() == pytest.approx(1.0)
    assert model.grad_class_prob(x, 1).shape == (6,)
    path = tmp_path / "model.slmd"
    model.save(path)
    loaded = scorelab.Classifier.load(path)
    np.testing.assert_array_equal(loaded.predict_proba(x), model.predict_proba(x))
    probs, points = scorelab.attack(model, epsilon=0.01, iters=300, samples=40, seed=1)
    assert probs.shape == (40, 4) and points.shape == (40, 6)
    assert math.exp(scorelab.improved_score(probs)) >= 3.5


def test_run_cli_codes(tmp_path):
    path = tmp_path / "onehot.pmat"
    scorelab.save_matrix(path, one_hot(50, 5))
    code, out, _ = scorelab.run_cli(["score", "-i", str(path), "--splits", "1", "--json"])
    assert code == 0
    assert json.loads(out)["result"]["score"]["mean"] == pytest.approx(5.0)
    assert scorelab.run_cli(["score", "--bogus"])[0] == 1
    assert scorelab.run_cli(["score", "-i", str(tmp_path / "nope.pmat")])[0] == 2


@pytest.mark.skipif("SCORELAB_CLI" not in os.environ, reason="CLI binary path not provided")
def test_binary_matches_module(tmp_path):
    path = tmp_path / "p.csv"
    scorelab.save_matrix(path, random_matrix(100, 6, 4))
    args = ["improved-score", "-i", str(path), "--json"]
    proc = subprocess.run([os.environ["SCORELAB_CLI"], *args], capture_output=True, text=True, check=True)
    code, out, _ = scorelab.run_cli(args)
    assert code == 0
    assert json.loads(proc.stdout)["result"] == json.loads(out)["result"]
