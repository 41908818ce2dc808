import numpy as np
import pytest

from fairrank.errors import ConfigurationError, ShapeError
from fairrank.model import MlpScorer, load_checkpoint, save_checkpoint
from fairrank.optimizer import AdamState


class TestArchitecture:
    @pytest.mark.parametrize("depth,d,width,n", [(0, 3, None, 4), (2, 3, None, 28), (1, 4, 5, 31)])
    def test_param_count(self, depth, d, width, n):
        assert MlpScorer(depth, d, width).n_params == n

    def test_init_distribution(self):
        m = MlpScorer.init(1, 200, seed=0)
        W = m.params[0]
        assert abs(W.std() - 0.01) < 0.0005
        assert not m.params[1].any()

    def test_bad_args(self):
        with pytest.raises(ConfigurationError):
            MlpScorer(-1, 3)
        with pytest.raises(ShapeError):
            MlpScorer.init(0, 3, 0)(np.zeros((2, 4)))


class TestBatchNorm:
    def test_train_mode_standardizes(self, rng):
        m = MlpScorer.init(2, 3, 0, init_std=0.5).train()
        s, _ = m.forward(rng.normal(size=(64, 3)))
        assert s.mean() == pytest.approx(0.0, abs=1e-12)
        assert s.std() == pytest.approx(1.0, abs=1e-9)

    def test_running_stats_update_and_freeze(self, rng):
        m = MlpScorer.init(0, 2, 0).train()
        X = rng.normal(size=(32, 2))
        m.forward(X, update_stats=False)
        assert (m.running_mean, m.running_std) == (0.0, 1.0)
        m.forward(X)
        assert m.running_std != 1.0

    def test_eval_mode_is_deterministic_per_row(self, rng):
        m = MlpScorer.init(1, 3, 0).train()
        X = rng.normal(size=(10, 3))
        m.forward(X)
        m.eval()
        np.testing.assert_array_equal(m(X)[:3], m(X[:3]))

    def test_constant_batch_does_not_blow_up(self):
        m = MlpScorer.init(0, 2, 0).train()
        s, cache = m.forward(np.ones((5, 2)))
        assert np.all(np.isfinite(s)) and cache["std_floored"]


def test_checkpoint_round_trip(tmp_path, rng):
    m = MlpScorer.init(2, 3, 7, init_std=0.3).train()
    X = rng.normal(size=(20, 3))
    m.forward(X)
    m.eval()
    adam = AdamState.like(m.params)
    save_checkpoint(m, tmp_path / "m.npz", extra={"note": "x"}, optimizer=adam)
    back, extra, opt = load_checkpoint(tmp_path / "m.npz")
    np.testing.assert_array_equal(back(X), m(X))
    assert extra == {"note": "x"}
    assert opt["t"] == 0 and len(opt["m"]) == len(m.params)
