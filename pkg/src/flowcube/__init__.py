"""Embedding compact real flows into band-limited function spaces.

Orbit traces of concrete flows are convolved with Fejer-type kernels; every
step carries explicit error bounds and can be certified numerically.
"""

__version__ = "0.1.0"

from .embedding import EmbeddedPoint, EmbeddingConfig, full_embed, orbit_trace, stage2_embed
from .flows import FlowSpec, get_flow
from .funcspace import MetricTruncation, SampledFunction, bebutov_metric, bernstein_metric
from .kernels import KernelSpec, fejer, tent

__all__ = [
    "EmbeddedPoint",
    "EmbeddingConfig",
    "FlowSpec",
    "KernelSpec",
    "MetricTruncation",
    "SampledFunction",
    "bebutov_metric",
    "bernstein_metric",
    "fejer",
    "full_embed",
    "get_flow",
    "orbit_trace",
    "stage2_embed",
    "tent",
]
