import math
import pathlib

import pytest

import ccbfair

DATA = pathlib.Path(__file__).resolve().parents[2] / "data"


@pytest.fixture(scope="module")
def german():
    return ccbfair.load_dataset(DATA / "german.csv", DATA / "german.schema", 1)


def test_split_sizes(german):
    d = german.data
    assert (len(d.train), len(d.validation), len(d.test)) == (700, 150, 150)
    assert len(d.train[0].features) == german.schema.encoded_dim


def test_kl_and_reward():
    assert ccbfair.kl_divergence([0.5, 0.5], [0.5, 0.5]) == 0.0
    kl = ccbfair.kl_divergence([0.8, 0.2], [0.5, 0.5])
    assert kl == pytest.approx(0.8 * math.log(1.6) + 0.2 * math.log(0.4))
    assert ccbfair.compute_reward(1, 1, [0.8, 0.2], [0.5, 0.5], 2.0) == pytest.approx(1 - 2 * kl)


def test_train_select_evaluate(german):
    config = ccbfair.TrainingConfig(lambda_=10.0, steps=3000, hidden_dim=8, seed=3)
    result = ccbfair.train(german.data.train, config)
    assert len(result.checkpoints) == 100
    assert result.checkpoints[-1].step == 3000
    log = result.log
    assert len(log["reward"]) == 3000
    assert log["accumulated"][-1] == pytest.approx(log["reward"].sum())

    validation = ccbfair.make_evaluation_set("validation", german.data.validation, german.schema)
    sel = ccbfair.select_checkpoint(result.checkpoints, validation, ccbfair.SelectionCriterion.discrimination)
    test = ccbfair.make_evaluation_set("test", german.data.test, german.schema)
    preds = ccbfair.predict(sel.model, german.data.test)
    report = ccbfair.evaluate(preds, test)
    assert report.delta == report.accuracy - report.discrimination
    assert 0.0 <= report.consistency <= 1.0
    assert set(ccbfair.submodel_report(sel.model, test)) == {
        "Model 0", "Model 1", "Reversed Model", "Original Model"}

    again = ccbfair.train(german.data.train, config)
    assert again.checkpoints[-1] == result.checkpoints[-1]
    text = result.checkpoints[-1].to_text()
    assert ccbfair.CcbModel.from_text(text) == result.checkpoints[-1]


def test_grid_and_baseline(german):
    validation = ccbfair.make_evaluation_set("validation", german.data.validation, german.schema)
    base = ccbfair.TrainingConfig(steps=2000)
    grid = ccbfair.grid_search(german.data.train, validation, [0.0, 20.0], [4], [1], base=base)
    assert len(grid.points) == 2
    assert grid.table_csv(ccbfair.SelectionCriterion.delta).startswith("lambda,hidden,seed")

    lr = ccbfair.fit_logistic(german.data.train, epochs=100, seed=1)
    preds = ccbfair.predict_logistic(lr, german.data.test)
    assert set(preds) <= {0, 1}


def test_errors_are_typed(german):
    with pytest.raises(ccbfair.ConfigError):
        ccbfair.train([], ccbfair.TrainingConfig())
    with pytest.raises(ValueError):
        ccbfair.load_dataset(DATA / "missing.csv", DATA / "german.schema", 1)
