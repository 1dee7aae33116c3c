import numpy as np
import pytest

from deliberpy.autodiff import ops
from deliberpy.autodiff.checkpoint import MAGIC, load_checkpoint, save_checkpoint
from deliberpy.autodiff.gradcheck import check_gradients
from deliberpy.autodiff.ops import forward_op
from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import Tensor, backward, debug_mode, get_default_dtype, no_grad, precision
from deliberpy.core.errors import NumericError, ShapeError, ValidationError


def _param(rng, *shape):
    return Tensor(rng.normal(size=shape), requires_grad=True)


def _u32(*values):
    return np.asarray(values, dtype="<u4").tobytes()


class TestTensorOps:
    def test_broadcast_add_sums_gradient_over_rows(self, float64):
        a = Tensor(np.ones((2, 3)), requires_grad=True)
        b = Tensor(np.zeros(3), requires_grad=True)
        grads = backward((a + b).sum(), {"a": a, "b": b})
        np.testing.assert_allclose(grads["a"], np.ones((2, 3)))
        np.testing.assert_allclose(grads["b"], [2.0, 2.0, 2.0])

    def test_matmul_gradient(self, float64):
        a = Tensor([[1.0, 2.0]], requires_grad=True)
        b = Tensor([[3.0], [4.0]], requires_grad=True)
        loss = (a @ b).sum()
        assert loss.item() == pytest.approx(11.0)
        grads = backward(loss, {"a": a, "b": b})
        np.testing.assert_allclose(grads["a"], [[3.0, 4.0]])
        np.testing.assert_allclose(grads["b"], [[1.0], [2.0]])

    def test_shared_node_gradients_accumulate(self, float64):
        x = Tensor([2.0], requires_grad=True)
        y = x * x + x
        grads = backward(y.sum(), {"x": x})
        np.testing.assert_allclose(grads["x"], [5.0])

    def test_unreachable_parameter_gets_zeros(self, float64):
        x = Tensor([1.0, 2.0], requires_grad=True)
        unused = Tensor(np.ones((2, 2)), requires_grad=True)
        grads = backward(x.sum(), {"x": x, "unused": unused})
        assert grads["unused"].shape == (2, 2)
        assert not np.any(grads["unused"])

    def test_backward_needs_scalar(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with pytest.raises(ShapeError):
            backward(x * 2.0, {"x": x})

    def test_backward_rejects_non_finite_loss(self):
        x = Tensor([np.inf], requires_grad=True)
        with pytest.raises(NumericError):
            backward((x * 1.0).sum(), {"x": x})

    def test_masked_softmax_gives_zero_probability(self):
        x = Tensor([[1.0, 2.0, 3.0]])
        mask = np.array([[True, False, True]])
        y = ops.softmax(x, mask=mask).numpy()
        assert y[0, 1] == 0.0
        assert y.sum() == pytest.approx(1.0, abs=1e-6)

    def test_log_softmax_rows_normalize(self, rng):
        y = ops.log_softmax(Tensor(rng.normal(size=(4, 7))), axis=-1).numpy()
        np.testing.assert_allclose(np.exp(y).sum(axis=-1), np.ones(4), rtol=1e-5)

    def test_conv1d_output_length(self, rng):
        x = Tensor(rng.normal(size=(6, 3)))
        w = Tensor(rng.normal(size=(3, 3)))
        assert ops.conv1d(x, w, 1, 1).shape == (6, 3)
        assert ops.conv1d(x, w).shape == (4, 3)
        with pytest.raises(ShapeError):
            ops.conv1d(x, Tensor(rng.normal(size=(3, 2))))

    def test_operator_overloads_match_functions(self, rng):
        a = Tensor(rng.normal(size=(2, 3)))
        b = Tensor(rng.normal(size=(2, 3)))
        np.testing.assert_allclose((a - b).numpy(), ops.sub(a, b).numpy())
        np.testing.assert_allclose((-a).numpy(), -a.numpy())
        np.testing.assert_allclose(a.transpose().numpy(), a.numpy().T)
        np.testing.assert_allclose(a.reshape(3, 2).numpy(), a.numpy().reshape(3, 2))
        np.testing.assert_allclose(a[:, 1].numpy(), a.numpy()[:, 1])
        assert a.mean().item() == pytest.approx(float(a.numpy().mean()), rel=1e-5)

    def test_forward_op_by_name(self, rng):
        a = Tensor(rng.normal(size=(2, 2)))
        b = Tensor(rng.normal(size=(2, 2)))
        np.testing.assert_allclose(forward_op("add", [a, b]).numpy(), (a + b).numpy())
        np.testing.assert_allclose(forward_op("softmax", [a], axis=0).numpy().sum(axis=0), [1.0, 1.0], rtol=1e-6)

    def test_forward_op_unknown_kind(self):
        with pytest.raises(ValidationError):
            forward_op("conv3d", [Tensor([1.0])])

    def test_debug_mode_flags_non_finite_outputs(self):
        x = Tensor([np.inf])
        with debug_mode():
            with pytest.raises(NumericError):
                ops.mul(x, 1.0)
        ops.mul(x, 1.0)

    def test_no_grad_records_nothing(self):
        x = Tensor([1.0], requires_grad=True)
        with no_grad():
            y = x * 2.0
        assert not y.requires_grad
        assert y.is_leaf

    def test_precision_is_scoped(self):
        with precision("float64"):
            assert Tensor([1.0]).dtype == np.float64
        assert get_default_dtype() == np.float32
        with pytest.raises(ValidationError):
            with precision("float16"):
                pass


class TestGradients:
    def test_composite_expression(self, float64, rng):
        x = _param(rng, 5, 4)
        gain = _param(rng, 4)
        bias = _param(rng, 4)
        taps = _param(rng, 3, 4)
        table = _param(rng, 6, 4)
        ids = np.array([0, 3, 3, 5, 1])
        mask = np.tril(np.ones((5, 5), dtype=bool))

        def loss_fn():
            h = ops.layer_norm(ops.add(x, ops.embed(table, ids)), gain, bias)
            h = ops.conv1d(ops.swish(h), taps, 2, 0)
            scores = ops.matmul(h, ops.transpose(h, (1, 0)))
            attn = ops.softmax(scores, axis=-1, mask=mask)
            mixed = ops.concat([ops.matmul(attn, h), ops.tanh(h)], axis=-1)
            return ops.reduce_mean(ops.mul(ops.sigmoid(mixed[1:, :]), mixed[1:, :]))

        params = {"x": x, "gain": gain, "bias": bias, "taps": taps, "table": table}
        result = check_gradients(loss_fn, params)
        assert result.passed(1e-4), result.per_param

    def test_log_softmax_and_reduce_sum(self, float64, rng):
        x = _param(rng, 3, 5)
        weights = Tensor(rng.uniform(size=(3, 5)))

        result = check_gradients(lambda: ops.reduce_sum(ops.mul(ops.log_softmax(x), weights)), {"x": x})
        assert result.passed(1e-4)

    def test_sampled_entries(self, float64, rng):
        w = _param(rng, 20, 20)
        v = Tensor(rng.normal(size=(3, 20)))
        result = check_gradients(lambda: ops.reduce_sum(ops.tanh(ops.matmul(v, w))), {"w": w}, max_entries=10, rng=SeededRNG(3))
        assert result.passed(1e-4)


class TestSeededRNG:
    def test_same_seed_same_stream(self):
        np.testing.assert_array_equal(SeededRNG(5).normal(size=8), SeededRNG(5).normal(size=8))

    def test_spawned_streams_are_keyed(self):
        root = SeededRNG(5)
        np.testing.assert_array_equal(root.spawn(1, 2).uniform(size=4), SeededRNG(5).spawn(1).spawn(2).uniform(size=4))
        assert not np.array_equal(root.spawn(1).uniform(size=4), root.spawn(2).uniform(size=4))

    def test_negative_seed_rejected(self):
        with pytest.raises(ValidationError):
            SeededRNG(-1)

    def test_uniform_mean(self):
        mean = float(SeededRNG(11).uniform(size=100_000).mean())
        assert 0.49 <= mean <= 0.51

    def test_categorical_never_draws_zero_mass(self):
        rng = SeededRNG(2)
        draws = {rng.categorical([0.0, 0.5, 0.0, 0.5]) for _ in range(500)}
        assert draws == {1, 3}

    def test_categorical_rejects_bad_input(self):
        with pytest.raises(ValidationError):
            SeededRNG(0).categorical([0.0, 0.0])
        with pytest.raises(ValidationError):
            SeededRNG(0).categorical([-0.1, 1.1])


class TestCheckpoint:
    def test_values_survive_as_float32(self, tmp_path, rng):
        tensors = {"model/w": rng.normal(size=(3, 4)), "step": np.array([12])}
        path = tmp_path / "ckpt-000012.bin"
        save_checkpoint(path, tensors)
        loaded = load_checkpoint(path)
        assert list(loaded) == ["model/w", "step"]
        assert loaded["model/w"].dtype == np.float32
        np.testing.assert_array_equal(loaded["model/w"], tensors["model/w"].astype(np.float32))
        assert int(loaded["step"][0]) == 12

    def test_step_counters_stay_exact(self, tmp_path):
        # 2**24 + 1 has no float32 representation
        step = 2**24 + 1
        path = tmp_path / "ckpt.bin"
        save_checkpoint(path, {"w": np.ones(2), "step": np.array([step], dtype=np.int64), "big": np.array([2**40])})
        loaded = load_checkpoint(path)
        assert loaded["step"].dtype == np.int64
        assert int(loaded["step"][0]) == step
        assert int(loaded["big"][0]) == 2**40
        assert loaded["w"].dtype == np.float32

    def test_version_one_file_is_readable(self, tmp_path):
        blob = MAGIC + _u32(1, 1) + _u32(1) + b"w" + _u32(1, 2) + np.array([1.5, -2.0], dtype="<f4").tobytes()
        path = tmp_path / "old.bin"
        path.write_bytes(blob)
        loaded = load_checkpoint(path)
        assert loaded["w"].dtype == np.float32
        np.testing.assert_array_equal(loaded["w"], [1.5, -2.0])

    def test_unknown_kind(self, tmp_path):
        path = tmp_path / "odd.bin"
        path.write_bytes(MAGIC + _u32(2, 1) + _u32(1) + b"w" + _u32(7, 1, 1) + b"\x00" * 8)
        with pytest.raises(ValidationError, match="kind"):
            load_checkpoint(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"NOTACKPT" + b"\x00" * 8)
        with pytest.raises(ValidationError):
            load_checkpoint(path)

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "short.bin"
        save_checkpoint(path, {"w": np.ones((4, 4))})
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(ValidationError):
            load_checkpoint(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError):
            load_checkpoint(tmp_path / "nope.bin")
