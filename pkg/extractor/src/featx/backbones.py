"""Vision backbones that map preprocessed image batches to feature rows.

Two architecture families are offered. Both drop their classifier head
and run in evaluation mode, so the output is the penultimate embedding:

    inception-style             Inception V3, 2048-d pooled features, 299 px input
    self-supervised-ViT-style   ViT-B/16, 768-d token embedding, 224 px input

Weights come either from torchvision's published checkpoints
(``weights="pretrained"``, needs the checkpoint to be downloadable or
already cached) or from a seeded random initialization
(``weights="random"``), which keeps the pipeline runnable offline.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torchvision import models as tv_models

from .errors import ConfigError, WeightsError

BACKBONE_INCEPTION = "inception-style"
BACKBONE_VIT = "self-supervised-ViT-style"

WEIGHTS_PRETRAINED = "pretrained"
WEIGHTS_RANDOM = "random"

# Fixed preprocessing constants shared by both backbones: channels are
# scaled to [0, 1] and normalized with the ImageNet statistics.
CHANNEL_MEAN = (0.485, 0.456, 0.406)
CHANNEL_STD = (0.229, 0.224, 0.225)


def _build_inception(weights_enum):
    if weights_enum is None:
        model = tv_models.inception_v3(weights=None, aux_logits=False, init_weights=True)
    else:
        model = tv_models.inception_v3(weights=weights_enum)
    model.fc = torch.nn.Identity()
    return model


def _build_vit(weights_enum):
    model = tv_models.vit_b_16(weights=weights_enum)
    model.heads = torch.nn.Identity()
    return model


# name -> (builder, pretrained weights enum, embedding width, input edge in px)
_REGISTRY = {
    BACKBONE_INCEPTION: (_build_inception, tv_models.Inception_V3_Weights.DEFAULT, 2048, 299),
    BACKBONE_VIT: (_build_vit, tv_models.ViT_B_16_Weights.DEFAULT, 768, 224),
}


@dataclass(frozen=True)
class Backbone:
    """A ready-to-run feature encoder with its input contract."""

    name: str
    model: torch.nn.Module
    dim: int
    input_size: int

    def embed(self, batch: torch.Tensor) -> torch.Tensor:
        """Encode a normalized (b, 3, input_size, input_size) batch."""
        with torch.no_grad():
            return self.model(batch)


def backbone_dim(name: str) -> int:
    """Embedding width of a backbone, without building it."""
    if name not in _REGISTRY:
        raise ConfigError(f"unknown backbone {name!r}; choose from {sorted(_REGISTRY)}")
    return _REGISTRY[name][2]


def backbone_input_size(name: str) -> int:
    """Input edge length in pixels, without building the backbone."""
    if name not in _REGISTRY:
        raise ConfigError(f"unknown backbone {name!r}; choose from {sorted(_REGISTRY)}")
    return _REGISTRY[name][3]


def build_backbone(name: str, weights: str = WEIGHTS_PRETRAINED, seed: int = 0) -> Backbone:
    """Construct a backbone in evaluation mode with frozen parameters."""
    if name not in _REGISTRY:
        raise ConfigError(f"unknown backbone {name!r}; choose from {sorted(_REGISTRY)}")
    if weights not in (WEIGHTS_PRETRAINED, WEIGHTS_RANDOM):
        raise ConfigError(
            f"unknown weights mode {weights!r}; choose "
            f"{WEIGHTS_PRETRAINED!r} or {WEIGHTS_RANDOM!r}"
        )
    builder, weights_enum, dim, input_size = _REGISTRY[name]
    if weights == WEIGHTS_PRETRAINED:
        try:
            model = builder(weights_enum)
        except Exception as exc:
            raise WeightsError(
                f"could not load pretrained weights for {name!r}: {exc}; "
                f"weights={WEIGHTS_RANDOM!r} runs a seeded untrained backbone instead"
            ) from exc
    else:
        # Seeding the global generator right before construction makes the
        # random initialization reproducible, so repeated runs agree bitwise.
        torch.manual_seed(seed)
        model = builder(None)
    model.eval()
    for parameter in model.parameters():
        parameter.requires_grad_(False)
    return Backbone(name=name, model=model, dim=dim, input_size=input_size)
