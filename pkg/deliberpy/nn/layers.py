"""Basic layers."""

import numpy as np

from deliberpy.autodiff import ops
from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import Tensor
from deliberpy.core.errors import ShapeError
from deliberpy.nn.module import Module, init_normal


class Linear(Module):
    def __init__(self, rng: SeededRNG, in_dim: int, out_dim: int, bias: bool = True):
        super().__init__()
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.param("weight", init_normal(rng, (in_dim, out_dim), in_dim))
        self.use_bias = bias
        if bias:
            self.param("bias", np.zeros(out_dim))

    def __call__(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.in_dim:
            raise ShapeError(f"Linear expects last dim {self.in_dim}, got {x.shape}")
        y = ops.matmul(x, self.weight)
        return ops.add(y, self.bias) if self.use_bias else y

    @staticmethod
    def count(in_dim: int, out_dim: int, bias: bool = True) -> int:
        return in_dim * out_dim + (out_dim if bias else 0)


class LayerNorm(Module):
    def __init__(self, dim: int):
        super().__init__()
        self.param("gain", np.ones(dim))
        self.param("bias", np.zeros(dim))

    def __call__(self, x: Tensor) -> Tensor:
        return ops.layer_norm(x, self.gain, self.bias)

    @staticmethod
    def count(dim: int) -> int:
        return 2 * dim


class Embedding(Module):
    def __init__(self, rng: SeededRNG, num: int, dim: int):
        super().__init__()
        self.num = num
        self.dim = dim
        self.param("table", rng.normal(0.0, 1.0 / np.sqrt(dim), size=(num, dim)))

    def __call__(self, ids) -> Tensor:
        return ops.embed(self.table, ids)

    @staticmethod
    def count(num: int, dim: int) -> int:
        return num * dim
