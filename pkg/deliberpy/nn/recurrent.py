"""Projected LSTMs."""

from typing import List, Optional, Tuple

import numpy as np

from deliberpy.autodiff import ops
from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import Tensor, constant
from deliberpy.core.errors import ShapeError
from deliberpy.nn.module import Module, init_normal

LSTMState = Tuple[Tensor, Tensor]


class LSTMP(Module):
    """LSTM layer with an optional recurrent projection of the output.

    Gates are laid out as input, forget, cell, output. The forget-gate bias
    starts at 1.
    """

    def __init__(self, rng: SeededRNG, in_dim: int, cells: int, proj: Optional[int] = None):
        super().__init__()
        self.in_dim = in_dim
        self.cells = cells
        self.out_dim = proj or cells
        self.param("w_x", init_normal(rng, (in_dim, 4 * cells), in_dim))
        self.param("w_h", init_normal(rng, (self.out_dim, 4 * cells), self.out_dim))
        bias = np.zeros(4 * cells)
        bias[cells : 2 * cells] = 1.0
        self.param("bias", bias)
        self.has_proj = proj is not None
        if self.has_proj:
            self.param("w_proj", init_normal(rng, (cells, proj), cells))

    @staticmethod
    def count(in_dim: int, cells: int, proj: Optional[int] = None) -> int:
        out_dim = proj or cells
        total = in_dim * 4 * cells + out_dim * 4 * cells + 4 * cells
        if proj is not None:
            total += cells * proj
        return total

    def initial_state(self) -> LSTMState:
        dtype = self.w_x.dtype
        return (
            constant(np.zeros((1, self.out_dim), dtype=dtype)),
            constant(np.zeros((1, self.cells), dtype=dtype)),
        )

    def _cell(self, x_proj: Tensor, state: LSTMState) -> LSTMState:
        h, c = state
        n = self.cells
        gates = ops.add(x_proj, ops.matmul(h, self.w_h))
        i = ops.sigmoid(gates[:, :n])
        f = ops.sigmoid(gates[:, n : 2 * n])
        g = ops.tanh(gates[:, 2 * n : 3 * n])
        o = ops.sigmoid(gates[:, 3 * n :])
        c_new = ops.add(ops.mul(f, c), ops.mul(i, g))
        m = ops.mul(o, ops.tanh(c_new))
        h_new = ops.matmul(m, self.w_proj) if self.has_proj else m
        return h_new, c_new

    def step(self, x_t: Tensor, state: Optional[LSTMState] = None) -> LSTMState:
        """Advance one frame; ``x_t`` has shape (1, in_dim)."""
        state = state or self.initial_state()
        x_proj = ops.add(ops.matmul(x_t, self.w_x), self.bias)
        return self._cell(x_proj, state)

    def __call__(self, x: Tensor, reverse: bool = False) -> Tensor:
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ShapeError(f"LSTMP expects (T, {self.in_dim}) input, got {x.shape}")
        steps = x.shape[0]
        if steps == 0:
            raise ShapeError("LSTMP needs at least one step")
        x_proj = ops.add(ops.matmul(x, self.w_x), self.bias)
        state = self.initial_state()
        outputs: List[Tensor] = [None] * steps  # type: ignore[list-item]
        order = range(steps - 1, -1, -1) if reverse else range(steps)
        for t in order:
            state = self._cell(x_proj[t : t + 1], state)
            outputs[t] = state[0]
        return ops.concat(outputs, axis=0)


class BiLSTMP(Module):
    """Forward and backward :class:`LSTMP` with concatenated outputs."""

    def __init__(self, rng: SeededRNG, in_dim: int, cells_per_dir: int, proj_per_dir: int):
        super().__init__()
        self.fwd = LSTMP(rng, in_dim, cells_per_dir, proj_per_dir)
        self.bwd = LSTMP(rng, in_dim, cells_per_dir, proj_per_dir)
        self.out_dim = 2 * proj_per_dir

    @staticmethod
    def count(in_dim: int, cells_per_dir: int, proj_per_dir: int) -> int:
        return 2 * LSTMP.count(in_dim, cells_per_dir, proj_per_dir)

    def __call__(self, x: Tensor) -> Tensor:
        return ops.concat([self.fwd(x), self.bwd(x, reverse=True)], axis=-1)
