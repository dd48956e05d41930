"""Vision-model adapter: calibrated RGBD captures to fieldfusion scene data."""

from .backbones import Dinov2Backbone, ModelLoadError, PatchProjectionBackbone
from .extract import ExtractConfig, extract_frame, extract_views, propagate_masks
from .propagate import IoUPropagator
from .segment import ColorRegionSegmenter

__version__ = "0.1.0"
