"""Orbit traces and their convolution with the Fejer-type kernels.

Stage one samples t -> coords(flow_t(x)) on [-W, W].  Stage two rescales each
coordinate to [-1, 1] with x -> 2x - 1 and convolves coordinate i with phi_n
for every level n <= L and i <= min(n, m); the results are band-limited to
[-n, n] and bounded by 1.  Kernels are truncated at radius A, so outputs
are only produced on the reliable window [-(W - A), W - A].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy import fft

from . import kernels
from .flows import FlowSpec
from .funcspace import SampledFunction, affine_to_unit

__all__ = [
    "EmbeddingConfig",
    "Convolution",
    "EmbeddedPoint",
    "orbit_trace",
    "convolve",
    "stage2_embed",
    "full_embed",
]


@dataclass(frozen=True)
class EmbeddingConfig:
    """Truncation level L, trace window W, step h, kernel radius A, metric depth K."""

    L: int = 8
    W: float = 250.0
    h: float = 1.0 / 256
    A: float = 200.0
    K: int = 40

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 1:
            raise ValueError("L must be a positive integer")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError("K must be a positive integer")
        if not (self.W > 0 and self.h > 0 and self.A > 0):
            raise ValueError("W, h and A must be positive")
        if not self.A < self.W:
            raise ValueError(f"tail radius A={self.A} must be smaller than W={self.W}")
        if self.h > 1.0 / (4 * self.L) * (1 + 1e-12):
            raise ValueError(f"step {self.h} undersamples phi_{self.L}; need h <= 1/(4L)")

    @property
    def reliable(self) -> float:
        """Half-width W - A of the window on which convolutions are valid."""
        return self.W - self.A

    def replace(self, **changes) -> "EmbeddingConfig":
        data = self.to_dict()
        data.update(changes)
        return EmbeddingConfig(**data)

    def to_dict(self) -> dict:
        return {"L": self.L, "W": self.W, "h": self.h, "A": self.A, "K": self.K}


@dataclass(frozen=True)
class Convolution:
    """A convolved component plus the error accounting behind it."""

    function: SampledFunction
    n: int
    tail_error: float
    quadrature_error: float
    pre_clamp_sup: float
    clamp: float

    @property
    def error_bound(self) -> float:
        return self.tail_error + self.quadrature_error

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "tail_error": self.tail_error,
            "quadrature_error": self.quadrature_error,
            "error_bound": self.error_bound,
            "pre_clamp_sup": self.pre_clamp_sup,
            "clamp": self.clamp,
        }


def orbit_trace(flow: FlowSpec, x, cfg: EmbeddingConfig) -> SampledFunction:
    """t -> coords(flow_t(x)) on the symmetric grid h*k, |k| <= round(W/h)."""
    M = int(round(cfg.W / cfg.h))
    times = cfg.h * np.arange(-M, M + 1)
    states = flow.evolve(np.asarray(x, dtype=float), times)
    return SampledFunction(-M * cfg.h, cfg.h, flow.coords(states), "unit_interval")


@lru_cache(maxsize=64)
def _kernel_spectrum(n, A, h, corrected, nfft):
    w = kernels.kernel_weights(n, A, h, corrected).weights
    return fft.rfft(w, nfft)


def _fft_size(size):
    # Circular convolution of length >= size leaves the valid part unwrapped.
    return fft.next_fast_len(size, real=True)


def _valid(v, weights, method, n, A, h, corrected, spectrum=None):
    taps = weights.size
    out_len = v.size - taps + 1
    if method == "direct":
        return np.convolve(v, weights, mode="valid")
    if method != "fft":
        raise ValueError(f"unknown convolution method {method!r}")
    nfft = _fft_size(v.size)
    if spectrum is None:
        spectrum = fft.rfft(v, nfft)
    full = fft.irfft(spectrum * _kernel_spectrum(n, A, h, corrected, nfft), nfft)
    return full[taps - 1 : taps - 1 + out_len]


def _finish(f, v_in, raw, n, weights, component_start):
    h = f.step
    sup_in = float(np.abs(v_in).max())
    slope = float(np.abs(np.diff(v_in)).max()) / h
    quad = h * h / 12.0 * (
        2 * n * kernels.DERIV1_L1 * slope + n * n * kernels.DERIV2_L1 * sup_in
    )
    pre = float(np.abs(raw).max())
    bound = max(sup_in, 0.0)
    clamped = np.clip(raw, -bound, bound)
    tag = "symmetric_unit" if bound <= 1.0 else "real"
    g = SampledFunction(component_start, h, clamped[:, None], tag)
    return Convolution(
        function=g,
        n=n,
        tail_error=sup_in * weights.tail_error,
        quadrature_error=quad,
        pre_clamp_sup=pre,
        clamp=max(0.0, pre - bound),
    )


def convolve(f: SampledFunction, n: int, cfg: EmbeddingConfig, component: int = 1,
             method: str = "fft", tail_correction: bool = True) -> Convolution:
    """Trapezoid convolution of one component with phi_n truncated to [-A, A].

    The output lives on f's grid shrunk by A at both ends.  ``method`` picks
    the FFT path or the direct O(N A/h) sum; both evaluate the same discrete
    sum.  With ``tail_correction`` the truncated kernel is adjusted (inside
    [-A, A]) so that constants and tones at frequency +-n pass with the exact
    multipliers 1 and 0.  The result is clamped to [-sup|f|, sup|f|]; the
    clamp amount is recorded and should never exceed ``error_bound``.
    """
    if not cfg.A < (f.size - 1) * f.step / 2:
        raise ValueError("tail radius A must be shorter than half the window")
    if abs(f.step - cfg.h) > 1e-12 * cfg.h:
        raise ValueError(f"function step {f.step} differs from configured h={cfg.h}")
    weights = kernels.kernel_weights(n, cfg.A, f.step, tail_correction)
    v = f.component(component)
    raw = _valid(v, weights.weights, method, weights.n, cfg.A, f.step, tail_correction)
    start = f.start + weights.half_width * f.step
    return _finish(f, v, raw, weights.n, weights, start)


@dataclass(frozen=True)
class EmbeddedPoint:
    """Truncated image (f_i * phi_n), n <= L, i <= min(n, m)."""

    levels: tuple
    cfg: EmbeddingConfig

    @property
    def L(self) -> int:
        return len(self.levels)

    def level(self, n: int) -> tuple:
        return tuple(c.function for c in self.levels[n - 1])

    def component(self, n: int, i: int) -> SampledFunction:
        return self.levels[n - 1][i - 1].function

    def items(self):
        """Yield (n, i, Convolution) in level order."""
        for n, level in enumerate(self.levels, start=1):
            for i, conv in enumerate(level, start=1):
                yield n, i, conv

    @cached_property
    def unit(self) -> tuple:
        """Same components carried into [0, 1] by x -> (x + 1)/2."""
        return tuple(tuple(affine_to_unit(c.function) for c in level) for level in self.levels)

    def manifest(self) -> dict:
        return {
            "config": self.cfg.to_dict(),
            "components": [
                {"level": n, "index": i, **conv.to_dict()} for n, i, conv in self.items()
            ],
        }


def stage2_embed(f: SampledFunction, cfg: EmbeddingConfig, method: str = "fft",
                 tail_correction: bool = True) -> EmbeddedPoint:
    """Level n holds 2 f_i - 1 convolved with phi_n for i <= min(n, m)."""
    if f.range_tag != "unit_interval":
        raise ValueError("stage two expects a unit_interval trace")
    M = int(round(cfg.A / f.step))
    taps = 2 * M + 1
    if f.size <= taps:
        raise ValueError("trace window too short for the tail radius")
    start = f.start + M * f.step
    rescaled = 2.0 * f.values - 1.0
    spectra = {}
    levels = []
    for n in range(1, cfg.L + 1):
        weights = kernels.kernel_weights(n, cfg.A, f.step, tail_correction)
        level = []
        for i in range(1, min(n, f.m) + 1):
            v = rescaled[:, i - 1]
            spectrum = None
            if method == "fft":
                if i not in spectra:
                    spectra[i] = fft.rfft(v, _fft_size(v.size))
                spectrum = spectra[i]
            raw = _valid(v, weights.weights, method, n, cfg.A, f.step, tail_correction, spectrum)
            level.append(_finish(f, v, raw, n, weights, start))
        levels.append(tuple(level))
    return EmbeddedPoint(tuple(levels), cfg)


def full_embed(flow: FlowSpec, x, cfg: EmbeddingConfig, method: str = "fft",
               tail_correction: bool = True) -> EmbeddedPoint:
    return stage2_embed(orbit_trace(flow, x, cfg), cfg, method, tail_correction)


def convolution_budget(n: int, A: float) -> float:
    """Closed-form 2/(pi^2 n A) tail budget for |f| <= 1."""
    return 2.0 / (math.pi**2 * n * A)
