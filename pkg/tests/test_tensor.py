"""Tensor core: op gradients, tape semantics, RNG snapshots"""
import threading

import numpy as np
import numpy.testing as npt
import pytest

from core.errors import IndexOutOfRangeError, NonDeterministicError, NonFiniteError, ShapeMismatchError
from core.tensor import Tape, Tensor, current_tape, grad_check, make_rng, ops, parameter, restore_rng, rng_state

OP_TOLERANCE = 1e-5


def _rand(rng, *shape):
    return parameter(rng.normal(size=shape))


@pytest.fixture
def rng():
    return make_rng(1234, "tests")


def _check(f, params):
    assert grad_check(f, params) < OP_TOLERANCE


def test_add_broadcast_gradients(rng):
    a, b = _rand(rng, 3, 4), _rand(rng, 4)
    _check(lambda: ops.sum(ops.mul(ops.add(a, b), ops.add(a, b))), [a, b])


def test_sub_mul_div_gradients(rng):
    a, b = _rand(rng, 2, 3), parameter(rng.uniform(1.0, 2.0, size=(2, 3)))
    _check(lambda: ops.sum(ops.div(ops.mul(ops.sub(a, b), a), b)), [a, b])


def test_matmul_batched_gradients(rng):
    a, b = _rand(rng, 2, 3, 4), _rand(rng, 2, 4, 5)
    _check(lambda: ops.sum(ops.tanh(ops.matmul(a, b))), [a, b])


def test_softmax_gradients(rng):
    x = _rand(rng, 3, 5)
    w = rng.normal(size=(3, 5))
    _check(lambda: ops.sum(ops.mul(ops.softmax(x, axis=-1), w)), [x])


def test_layer_norm_gradients(rng):
    x, g, b = _rand(rng, 4, 6), _rand(rng, 6), _rand(rng, 6)
    w = rng.normal(size=(4, 6))
    _check(lambda: ops.sum(ops.mul(ops.layer_norm(x, g, b), w)), [x, g, b])


def test_gelu_exp_log_gradients(rng):
    x = _rand(rng, 5)
    y = parameter(rng.uniform(0.5, 2.0, size=5))
    _check(lambda: ops.sum(ops.add(ops.gelu(x), ops.log(ops.exp(y)))), [x, y])


def test_reshape_transpose_getitem_concat_gradients(rng):
    a, b = _rand(rng, 2, 3, 4), _rand(rng, 2, 1, 4)
    w = rng.normal(size=(4, 2, 4))

    def f():
        z = ops.concat([a, b], axis=1)
        z = ops.transpose(ops.reshape(z, (2, 4, 4)), (1, 0, 2))
        return ops.sum(ops.mul(ops.getitem(z, (slice(None), slice(None), slice(0, 4))), w))

    _check(f, [a, b])


def test_broadcast_to_and_mean_gradients(rng):
    a = _rand(rng, 1, 3)
    _check(lambda: ops.sum(ops.mul(ops.broadcast_to(a, (4, 3)), ops.mean(ops.broadcast_to(a, (4, 3)), axis=0))), [a])


def test_embedding_lookup_accumulates_repeated_rows(rng):
    table = _rand(rng, 5, 3)
    ids = np.array([0, 2, 2, 4])
    with Tape() as tape:
        loss = ops.sum(ops.embedding_lookup(table, ids))
        tape.backward(loss)
    expected = np.zeros((5, 3))
    expected[0] = 1.0
    expected[2] = 2.0
    expected[4] = 1.0
    npt.assert_array_equal(table.grad, expected)


def test_cross_entropy_gradients_and_errors(rng):
    logits = _rand(rng, 4, 2)
    labels = np.array([0, 1, 1, 0])
    _check(lambda: ops.cross_entropy_with_logits(logits, labels), [logits])
    with pytest.raises(IndexOutOfRangeError):
        ops.cross_entropy_with_logits(logits, np.array([0, 1, 2, 0]))
    with pytest.raises(ShapeMismatchError):
        ops.cross_entropy_with_logits(logits, np.array([0, 1]))


def test_linear_shape_mismatch():
    x = Tensor(np.zeros((2, 3)))
    with pytest.raises(ShapeMismatchError):
        ops.matmul(x, Tensor(np.zeros((4, 2))))


def test_log_of_zero_is_non_finite():
    with pytest.raises(NonFiniteError):
        ops.log(Tensor(np.zeros(3)))


def test_shared_subexpression_gradients_sum():
    x = parameter([3.0])
    with Tape() as tape:
        y = ops.mul(x, x)
        loss = ops.sum(ops.add(y, y))
        tape.backward(loss)
    npt.assert_allclose(x.grad, [12.0])


def test_no_tape_records_nothing():
    x = parameter([1.0, 2.0])
    y = ops.mul(x, x)
    assert y.is_leaf
    assert current_tape() is None


def test_tapes_are_thread_local():
    seen = []

    def worker():
        seen.append(current_tape())

    with Tape():
        thread = threading.Thread(target=worker)
        thread.start()
        thread.join()
        assert current_tape() is not None
    assert seen == [None]


def test_dropout_identity_when_not_training(rng):
    x = Tensor(rng.normal(size=(3, 3)))
    npt.assert_array_equal(ops.dropout(x, 0.5, None, training=False).data, x.data)


def test_matmul_hand_values():
    m = Tensor(np.array([[1.0, 2.0], [3.0, 4.0]]))
    npt.assert_array_equal(ops.matmul(Tensor(np.eye(2)), m).data, m.data)
    npt.assert_array_equal(ops.matmul(Tensor(np.array([[1.0, 2.0]])), Tensor(np.array([[3.0], [4.0]]))).data, [[11.0]])


def test_softmax_hand_values(rng):
    npt.assert_allclose(ops.softmax(Tensor(np.zeros(3))).data, [1 / 3, 1 / 3, 1 / 3])
    large = ops.softmax(Tensor(np.array([1000.0, 0.0]))).data
    assert np.all(np.isfinite(large))
    npt.assert_allclose(large, [1.0, 0.0], atol=1e-300)
    rows = ops.softmax(Tensor(rng.normal(scale=5.0, size=(50, 9))), axis=-1).data
    npt.assert_allclose(rows.sum(axis=-1), np.ones(50), rtol=0, atol=1e-9)


def test_layer_norm_hand_values():
    ones, zeros = Tensor(np.ones(2)), Tensor(np.zeros(2))
    npt.assert_array_equal(ops.layer_norm(Tensor(np.array([[4.0, 4.0]])), ones, zeros).data, [[0.0, 0.0]])
    npt.assert_allclose(ops.layer_norm(Tensor(np.array([1.0, 3.0])), ones, zeros).data, [-1.0, 1.0], atol=1e-5)


def test_dropout_preserves_expected_value():
    x = Tensor(np.ones((100, 100)))
    dropped = ops.dropout(x, 0.1, make_rng(3, "dropout"), training=True).data
    assert set(np.unique(dropped)) <= {0.0, 1.0 / 0.9}
    assert abs(dropped.mean() - 1.0) < 0.02


def test_grad_check_of_constant_is_zero(rng):
    w = _rand(rng, 4)
    assert grad_check(lambda: Tensor(np.array(2.5)), [w]) == 0.0


def test_grad_check_rejects_nondeterministic_forward(rng):
    x = _rand(rng, 3)
    noise = make_rng(0, "noise")
    with pytest.raises(NonDeterministicError):
        grad_check(lambda: ops.sum(ops.mul(x, Tensor(noise.normal(size=3)))), [x])


def test_grad_check_sampled_entries(rng):
    w = _rand(rng, 20, 10)
    assert grad_check(lambda: ops.sum(ops.tanh(w)), [w], entries_per_param=5) < OP_TOLERANCE


def test_rng_state_round_trip():
    rng = make_rng(9, "dropout")
    rng.normal(size=7)
    state = rng_state(rng)
    expected = rng.normal(size=5)
    npt.assert_array_equal(restore_rng(state).normal(size=5), expected)


def test_named_streams_are_independent():
    a = make_rng(7, "dropout").integers(0, 1 << 30, size=4)
    b = make_rng(7, "sampling").integers(0, 1 << 30, size=4)
    assert not np.array_equal(a, b)
    npt.assert_array_equal(a, make_rng(7, "dropout").integers(0, 1 << 30, size=4))
