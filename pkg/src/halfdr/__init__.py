"""Half-diminished reality video engine.

Moving foreground (hands) is erased from a block-stability background model,
the live stream is delayed by the same time, and the two are blended so that
manipulated objects stay visible while hands show through semi-transparently.
"""

from halfdr.core import BlockRect, Frame, PipelineConfig, block_partition, derive_counts
from halfdr.compositor import composite
from halfdr.delayline import DelayLine
from halfdr.pipeline import Pipeline, PipelineError, PipelineStats, run
from halfdr.stability import BackgroundModel, block_diff

__all__ = [
    "BackgroundModel",
    "BlockRect",
    "DelayLine",
    "Frame",
    "Pipeline",
    "PipelineConfig",
    "PipelineError",
    "PipelineStats",
    "block_diff",
    "block_partition",
    "composite",
    "derive_counts",
    "run",
]

__version__ = "0.1.0"
