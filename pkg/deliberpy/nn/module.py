"""Parameter containers."""

from typing import Dict, Iterator, List, Mapping, Optional, Tuple

import numpy as np

from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import Tensor, get_default_dtype
from deliberpy.core.errors import ShapeError, ValidationError


class Module:
    """Base class for everything that owns parameters.

    Attributes holding a :class:`Tensor` with ``requires_grad`` or another
    :class:`Module` are registered automatically, in assignment order, so
    parameter names are stable dotted paths (``layers.0.attn.w_q``).
    """

    def __init__(self) -> None:
        object.__setattr__(self, "_params", {})
        object.__setattr__(self, "_children", {})
        object.__setattr__(self, "training", True)
        object.__setattr__(self, "frozen", False)

    def __setattr__(self, name: str, value) -> None:
        if isinstance(value, Module):
            self._children[name] = value
        elif isinstance(value, Tensor) and value.requires_grad:
            value.name = name
            self._params[name] = value
        object.__setattr__(self, name, value)

    def param(self, name: str, data: np.ndarray) -> Tensor:
        """Register ``data`` as a trainable parameter called ``name``."""
        tensor = Tensor(data, requires_grad=True, name=name, dtype=get_default_dtype())
        setattr(self, name, tensor)
        return tensor

    def named_parameters(self, prefix: str = "") -> Dict[str, Tensor]:
        out: Dict[str, Tensor] = {}
        for name, p in self._params.items():
            out[f"{prefix}{name}"] = p
        for name, child in self._children.items():
            out.update(child.named_parameters(f"{prefix}{name}."))
        return out

    def parameters(self) -> List[Tensor]:
        return list(self.named_parameters().values())

    def modules(self) -> Iterator["Module"]:
        yield self
        for child in self._children.values():
            yield from child.modules()

    def num_parameters(self) -> int:
        return int(sum(p.size for p in self.parameters()))

    def train(self, mode: bool = True) -> "Module":
        for m in self.modules():
            object.__setattr__(m, "training", mode)
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def freeze(self) -> "Module":
        """Stop recording gradients for every parameter below this module."""
        for m in self.modules():
            object.__setattr__(m, "frozen", True)
        for p in self.parameters():
            p.requires_grad = False
        return self

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: p.data for name, p in self.named_parameters().items()}

    def load_state_dict(self, state: Mapping[str, np.ndarray], strict: bool = True) -> None:
        params = self.named_parameters()
        if strict:
            missing = sorted(set(params) - set(state))
            unexpected = sorted(set(state) - set(params))
            if missing or unexpected:
                raise ValidationError(
                    f"State mismatch; missing: {missing[:5]}, unexpected: {unexpected[:5]}"
                )
        for name, p in params.items():
            if name not in state:
                continue
            value = np.asarray(state[name])
            if value.shape != p.shape:
                raise ShapeError(f"Shape mismatch for {name}: {value.shape} vs {p.shape}")
            p.data = value.astype(p.data.dtype, copy=True)


class ModuleList(Module):
    """An indexable list of modules registered as ``0``, ``1``, ..."""

    def __init__(self, modules: Optional[List[Module]] = None):
        super().__init__()
        self._items: List[Module] = []
        for m in modules or []:
            self.append(m)

    def append(self, module: Module) -> None:
        self._children[str(len(self._items))] = module
        self._items.append(module)

    def __getitem__(self, index: int) -> Module:
        return self._items[index]

    def __iter__(self) -> Iterator[Module]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)


def init_normal(rng: SeededRNG, shape: Tuple[int, ...], fan_in: int) -> np.ndarray:
    """Gaussian weights scaled by ``1/sqrt(fan_in)``."""
    return rng.normal(0.0, 1.0 / np.sqrt(max(fan_in, 1)), size=shape)
