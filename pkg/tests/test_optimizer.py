import numpy as np
import pytest

from fairrank.errors import NonFiniteError
from fairrank.optimizer import AdamState, adam_step, grad_check


class TestAdam:
    def test_first_step_is_lr_times_sign(self):
        p = [np.array([1.0, -2.0, 3.0])]
        g = [np.array([0.5, -4.0, 1e-3])]
        new, state = adam_step(p, g, AdamState.like(p))
        # bias correction makes the first step lr * g / (|g| + eps')
        np.testing.assert_allclose(new[0], p[0] - 1e-3 * np.sign(g[0]), rtol=1e-6)
        assert state.t == 1

    def test_minimizes_quadratic(self):
        p = [np.array([3.0, -1.0])]
        state = AdamState.like(p, lr=0.05)
        for _ in range(2000):
            p, state = adam_step(p, [2 * p[0]], state)
        np.testing.assert_allclose(p[0], 0.0, atol=1e-3)

    def test_inputs_not_mutated(self):
        p = [np.ones(2)]
        adam_step(p, [np.ones(2)], AdamState.like(p))
        np.testing.assert_array_equal(p[0], 1.0)

    def test_non_finite(self):
        p = [np.ones(2)]
        with pytest.raises(NonFiniteError) as info:
            adam_step(p, [np.array([np.nan, 0.0])], AdamState.like(p), iteration=9)
        assert info.value.iteration == 9

    def test_state_dict_round_trip(self):
        p = [np.ones(3)]
        _, s = adam_step(p, [np.ones(3)], AdamState.like(p))
        back = AdamState.from_state_dict(s.state_dict())
        assert back.t == 1
        np.testing.assert_array_equal(back.m[0], s.m[0])


def test_grad_check_detects_wrong_gradient():
    def good(params):
        return float(np.sum(params[0] ** 3)), [3 * params[0] ** 2]

    def bad(params):
        return float(np.sum(params[0] ** 3)), [2 * params[0] ** 2]

    x = [np.array([0.5, -1.5])]
    assert grad_check(good, x).passed(1e-6)
    assert not grad_check(bad, x).passed(1e-2)
