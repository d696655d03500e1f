"""
Model weights: named learnable tensors, shapes derived from ModelConfig.
"""
import logging
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from core.errors import NonFiniteError, ShapeMismatchError
from core.minimap import MapSpec
from core.tensor import Tensor, make_rng, parameter
from modules.event_fusion.v1 import EventVocab, init_fusion_weights
from .config import ModelConfig

logger = logging.getLogger(__name__)

INIT_STD = 0.02


class ModelWeights:
    """Named learnable tensors; event-fusion tensors live under the 'fusion.' prefix"""

    def __init__(self, params: Dict[str, Tensor]):
        self._params: Dict[str, Tensor] = dict(sorted(params.items()))

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __len__(self) -> int:
        return len(self._params)

    def names(self) -> List[str]:
        return list(self._params)

    def items(self) -> Iterator[Tuple[str, Tensor]]:
        return iter(self._params.items())

    def tensors(self) -> List[Tensor]:
        return list(self._params.values())

    @property
    def has_fusion(self) -> bool:
        return any(name.startswith("fusion.") for name in self._params)

    @property
    def numel(self) -> int:
        return int(sum(t.size for t in self._params.values()))

    def zero_grad(self) -> None:
        for t in self._params.values():
            t.zero_grad()

    def assert_finite(self) -> None:
        for name, t in self._params.items():
            if not np.all(np.isfinite(t.data)):
                raise NonFiniteError(f"weight {name} holds non-finite values")

    def load_arrays(self, arrays: Dict[str, np.ndarray]) -> None:
        """Overwrite values in place (checkpoint restore)"""
        for name, value in arrays.items():
            if name not in self._params:
                raise ShapeMismatchError(f"unexpected weight {name}")
            if self._params[name].shape != value.shape:
                raise ShapeMismatchError(f"weight {name}: {value.shape} != {self._params[name].shape}")
            self._params[name].data[...] = value


def expected_shapes(cfg: ModelConfig) -> Dict[str, Tuple[int, ...]]:
    """Shapes of the visual part of the model"""
    d, hidden = cfg.d_model, cfg.d_model * cfg.mlp_ratio
    shapes: Dict[str, Tuple[int, ...]] = {
        "patch.w": (cfg.patch_dim, d),
        "patch.b": (d,),
        "cls": (d,),
        "pos.space": (cfg.n_patches + 1, d),
        "pos.time": (cfg.frames_per_clip, d),
        "final_ln.g": (d,),
        "final_ln.b": (d,),
        "head.w": (d, cfg.n_classes),
        "head.b": (cfg.n_classes,),
    }
    for i in range(cfg.n_layers):
        p = f"layers.{i}"
        for attn in ("time_attn", "space_attn"):
            shapes[f"{p}.{attn}.qkv.w"] = (d, 3 * d)
            shapes[f"{p}.{attn}.qkv.b"] = (3 * d,)
            shapes[f"{p}.{attn}.out.w"] = (d, d)
            shapes[f"{p}.{attn}.out.b"] = (d,)
        for ln in ("time_ln", "space_ln", "mlp_ln"):
            shapes[f"{p}.{ln}.g"] = (d,)
            shapes[f"{p}.{ln}.b"] = (d,)
        shapes[f"{p}.mlp.fc1.w"] = (d, hidden)
        shapes[f"{p}.mlp.fc1.b"] = (hidden,)
        shapes[f"{p}.mlp.fc2.w"] = (hidden, d)
        shapes[f"{p}.mlp.fc2.b"] = (d,)
    return shapes


def init_weights(
    cfg: ModelConfig,
    seed: int,
    events_enabled: bool = False,
    map_spec: Optional[MapSpec] = None
) -> ModelWeights:
    """
    Fresh weights: matrices, CLS and positional embeddings ~ N(0, 0.02^2),
    biases 0, layer-norm gains 1.

    Args:
        cfg: Model configuration
        seed: Initialization seed
        events_enabled: Add event-fusion tensors (Model B)
        map_spec: Map whose areas size the area embedding table (required with events)
    """
    rng = make_rng(seed, "init")
    params: Dict[str, Tensor] = {}
    for name, shape in expected_shapes(cfg).items():
        if name.endswith("ln.g"):
            value = np.ones(shape)
        elif name.endswith(".b"):
            value = np.zeros(shape)
        else:
            value = rng.normal(0.0, INIT_STD, size=shape)
        params[name] = parameter(value)

    if events_enabled:
        if map_spec is None:
            raise ValueError("event fusion needs the map to size its area vocabulary")
        vocab = EventVocab.for_map(map_spec)
        params.update(init_fusion_weights(cfg.d_event, cfg.d_model, vocab, make_rng(seed, "fusion_init")))

    weights = ModelWeights(params)
    logger.info(f"Initialized {len(weights)} weight tensors ({weights.numel} values), events={events_enabled}")
    return weights


def decays(name: str) -> bool:
    """Decoupled weight decay skips biases and layer-norm parameters"""
    if name.endswith(".b"):
        return False
    if "_ln." in name or name.startswith("final_ln"):
        return False
    return True
