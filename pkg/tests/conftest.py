import numpy as np
import pytest

from e2rstrat.model import ModelConfig, init_model
from e2rstrat.synthetic import bundled_corpus
from e2rstrat.training import TrainConfig, cross_validate


@pytest.fixture(scope="session")
def corpus():
    return bundled_corpus()


@pytest.fixture(scope="session")
def cv_result(corpus):
    """Default desk training run on the bundled corpus."""
    return cross_validate(corpus, TrainConfig(seed=7))


@pytest.fixture(scope="session")
def trained(cv_result):
    return cv_result.folds[0].model, cv_result.vocab


def random_model(rng, *, vocab_size=30, max_len=None, activation="tanh", **overrides):
    """A model with every parameter random (non-zero head), for gradient checks."""
    cfg = ModelConfig(
        vocab_size=vocab_size,
        embed_dim=overrides.get("embed_dim", int(rng.integers(2, 9))),
        hidden_dim=overrides.get("hidden_dim", int(rng.integers(1, 9))),
        num_classes=overrides.get("num_classes", int(rng.integers(2, 8))),
        max_len=max_len or int(rng.integers(2, 10)),
        seed=int(rng.integers(1 << 30)),
        activation=activation,
    )
    model = init_model(cfg)
    for k in ("W2", "b1", "b2"):
        model.params[k] = rng.standard_normal(model.params[k].shape)
    return model


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
