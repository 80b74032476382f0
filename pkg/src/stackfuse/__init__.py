"""stackfuse: fuse multi-temporal grayscale frame stacks into single 2D
images by chaining per-frame enhancement operators with temporal
projections, then score the results with no-reference quality metrics
and compare segmentation ground truths."""

__version__ = "0.1.0"

from . import errors
from .pipeline import PipelineSpec, PreprocSequence, enumerate_sequences, run_grid
from .projections import DEFAULT_PROJECTIONS, PROJECTIONS, normalize_8bit, project
from .stackio import FrameStack, load_stack, write_image

__all__ = [
    "DEFAULT_PROJECTIONS",
    "FrameStack",
    "PROJECTIONS",
    "PipelineSpec",
    "PreprocSequence",
    "__version__",
    "enumerate_sequences",
    "errors",
    "load_stack",
    "normalize_8bit",
    "project",
    "run_grid",
    "write_image",
]
