"""Sampled continuous functions on a window of the real line.

A :class:`SampledFunction` stores m components on a uniform grid and is read
as its piecewise-linear interpolant, clamped to the end values outside the
window.  Linear interpolation keeps [0, 1]- and [-1, 1]-valued samples inside
their codomain, which higher-order schemes do not.

The two metrics mirror the ones on C(R, [0,1]^N) and on the Bernstein
spaces, truncated at depth K with the omitted geometric tail reported
alongside the value.  Indices start at 1 in both sums.  Metric computations
never extrapolate: a window that does not cover [-K, K] is an error.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import fft

__all__ = [
    "RANGE_TAGS",
    "WindowError",
    "RangeError",
    "SampledFunction",
    "MetricTruncation",
    "evaluate",
    "shift",
    "sup_dist",
    "nested_sup_dists",
    "interpolation_bound",
    "bebutov_metric",
    "bernstein_metric",
    "band_limit_residual",
    "band_limit_bound",
    "affine_to_unit",
    "affine_to_symmetric",
]

RANGE_TAGS = {
    "unit_interval": (0.0, 1.0),
    "symmetric_unit": (-1.0, 1.0),
    "real": (-math.inf, math.inf),
}
_JSON_RANGE = {"unit_interval": "unit", "symmetric_unit": "symmetric", "real": "real"}
_JSON_RANGE_INV = {v: k for k, v in _JSON_RANGE.items()}

# Relative slack when deciding whether a window covers [-N, N].
_COVER_TOL = 1e-9


class WindowError(ValueError):
    """Requested region is not covered by the sampled window."""


class RangeError(ValueError):
    """Range tag mismatch or samples outside the declared codomain."""


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Uniform samples of an R^m-valued function, read piecewise-linearly.

    ``values`` has shape (len, m); component indices are 1-based in the
    public API.  Instances are immutable.
    """

    start: float
    step: float
    values: np.ndarray
    range_tag: str = "unit_interval"

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[1] < 1:
            raise ValueError("values must have shape (len, m) with m >= 1")
        if v.shape[0] < 2:
            raise ValueError("need at least two samples")
        if not (math.isfinite(self.step) and self.step > 0):
            raise ValueError("step must be a positive finite number")
        if not math.isfinite(self.start):
            raise ValueError("start must be finite")
        if self.range_tag not in RANGE_TAGS:
            raise RangeError(f"unknown range tag {self.range_tag!r}")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        lo, hi = RANGE_TAGS[self.range_tag]
        if v.min() < lo or v.max() > hi:
            raise RangeError(
                f"samples leave the {self.range_tag} codomain: [{v.min()}, {v.max()}]"
            )
        v.flags.writeable = False
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "step", float(self.step))
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, func, start, stop, step, range_tag="real"):
        """Sample ``func`` on start, start+step, ... up to ``stop``."""
        count = int(round((stop - start) / step)) + 1
        t = start + step * np.arange(count)
        return cls(start, step, np.asarray(func(t), dtype=float), range_tag)

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def size(self) -> int:
        return self.values.shape[0]

    @property
    def end(self) -> float:
        return self.start + (self.size - 1) * self.step

    @property
    def grid(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.size)

    def component(self, i: int) -> np.ndarray:
        _check_component(self, i)
        return self.values[:, i - 1]

    def select(self, i: int) -> "SampledFunction":
        """Single-component view of component ``i``."""
        return SampledFunction(self.start, self.step, self.component(i)[:, None], self.range_tag)

    def covers(self, a: float, b: float) -> bool:
        slack = _COVER_TOL * max(1.0, abs(a), abs(b))
        return self.start <= a + slack and self.end >= b - slack

    def __call__(self, x, component: int = 1):
        return evaluate(self, x, component)

    def to_dict(self) -> dict:
        return {
            "start": self.start,
            "step": self.step,
            "components": self.m,
            "range": _JSON_RANGE[self.range_tag],
            "values": self.values.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SampledFunction":
        values = np.asarray(data["values"], dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[1] != int(data["components"]):
            raise ValueError("'components' does not match the value rows")
        try:
            tag = _JSON_RANGE_INV[data["range"]]
        except KeyError:
            raise RangeError(f"unknown range {data['range']!r}") from None
        return cls(float(data["start"]), float(data["step"]), values, tag)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "SampledFunction":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class MetricTruncation:
    K: int = 40

    def __post_init__(self):
        if isinstance(self.K, bool) or int(self.K) != self.K or self.K < 1:
            raise ValueError("truncation depth K must be a positive integer")


def _check_component(f: SampledFunction, i) -> None:
    if isinstance(i, bool) or int(i) != i or not 1 <= i <= f.m:
        raise IndexError(f"component {i!r} out of range 1..{f.m}")


def _as_truncation(trunc) -> MetricTruncation:
    return trunc if isinstance(trunc, MetricTruncation) else MetricTruncation(int(trunc))


def evaluate(f: SampledFunction, x, component: int = 1):
    """Piecewise-linear value of component ``component`` at ``x``.

    Exact at grid points; clamps to the end samples outside the window.
    """
    _check_component(f, component)
    out = np.interp(np.asarray(x, dtype=float), f.grid, f.values[:, component - 1])
    return float(out) if out.ndim == 0 else out


def shift(f: SampledFunction, r: float) -> SampledFunction:
    """(shift(f, r))(x) = f(x + r); only the window moves."""
    return SampledFunction(f.start - r, f.step, f.values, f.range_tag)


def _require_cover(f: SampledFunction, N: float) -> None:
    if not f.covers(-N, N):
        raise WindowError(f"window [{f.start}, {f.end}] does not cover [{-N}, {N}]")


def _breakpoints(f: SampledFunction, g: SampledFunction, N: float) -> np.ndarray:
    pts = [np.array([-N, N])]
    for s in (f, g):
        grid = s.grid
        pts.append(grid[(grid > -N) & (grid < N)])
    if f.start == g.start and f.step == g.step:
        pts.pop()
    return np.unique(np.concatenate(pts))


def nested_sup_dists(f, g, component, radii) -> np.ndarray:
    """sup over [-N, N] of |f_i - g_i| for each N in ``radii``.

    The difference of two piecewise-linear functions is piecewise linear on
    the merged breakpoints, so the maximum over those points and +-N is the
    exact sup of the interpolants.
    """
    radii = np.asarray(radii, dtype=float)
    if f.m != g.m:
        raise ValueError("functions have different numbers of components")
    Nmax = float(radii.max())
    _require_cover(f, Nmax)
    _require_cover(g, Nmax)
    pts = np.unique(np.concatenate([_breakpoints(f, g, Nmax), -radii, radii]))
    diff = np.abs(evaluate(f, pts, component) - evaluate(g, pts, component))
    order = np.argsort(np.abs(pts), kind="stable")
    running = np.maximum.accumulate(diff[order])
    idx = np.searchsorted(np.abs(pts)[order], radii, side="right") - 1
    return running[idx]


def sup_dist(f: SampledFunction, g: SampledFunction, N: float, component: int = 1) -> float:
    """||f_i - g_i|| on [-N, N] for the interpolants (exact, see above).

    How far the interpolants may sit from the underlying continuous functions
    is reported separately by :func:`interpolation_bound`.
    """
    if not N > 0:
        raise ValueError("N must be positive")
    return float(nested_sup_dists(f, g, component, [N])[0])


def interpolation_bound(f: SampledFunction, component: int = 1) -> float:
    """Guard on |f - interpolant| from the largest second difference.

    For a C^2 function the error is at most h^2 max|f''| / 8, about
    max|second difference| / 8; a slope jump m inside a cell gives error at
    most h m / 4 and a second difference of at least h m / 2.  Half the
    largest second difference covers both cases.  Empirical, not rigorous.
    """
    v = f.component(component)
    if v.size < 3:
        return 0.0
    return float(np.abs(np.diff(v, 2)).max()) / 2.0


def bebutov_metric(f: SampledFunction, g: SampledFunction, trunc=MetricTruncation()):
    """Truncated sum_{n,N>=1} ||f_n - g_n||_[-N,N] / 2^(n+N).

    Components beyond m are taken to coincide, so only existing components
    enter the omitted tail.  Returns (value, error_bound).
    """
    trunc = _as_truncation(trunc)
    for s in (f, g):
        if s.range_tag != "unit_interval":
            raise RangeError("the Bebutov metric needs unit_interval functions")
    if f.m != g.m:
        raise ValueError("functions have different numbers of components")
    K = trunc.K
    M = min(f.m, K)
    radii = np.arange(1, K + 1, dtype=float)
    terms = []
    for n in range(1, M + 1):
        sups = nested_sup_dists(f, g, n, radii)
        terms.extend(float(s) / 2.0 ** (n + N) for N, s in zip(range(1, K + 1), sups))
    value = math.fsum(terms)
    error = (1.0 - 2.0**-M) * 2.0**-K
    if f.m > K:
        error += 2.0**-K - 2.0**-f.m
    return value, error


def bernstein_metric(f: SampledFunction, g: SampledFunction, trunc=MetricTruncation()):
    """Truncated sum_{n>=1} ||f - g||_[-n,n] / 2^n; returns (value, error_bound)."""
    trunc = _as_truncation(trunc)
    for s in (f, g):
        if s.m != 1:
            raise ValueError("the Bernstein metric is defined for scalar functions")
        if s.range_tag != "symmetric_unit":
            raise RangeError("the Bernstein metric needs symmetric_unit functions")
    K = trunc.K
    sups = nested_sup_dists(f, g, 1, np.arange(1, K + 1, dtype=float))
    value = math.fsum(float(s) / 2.0**n for n, s in zip(range(1, K + 1), sups))
    return value, 2.0 * 2.0**-K


def taper(t, width):
    """sinc^2 taper (sin(pi w t)/(pi w t))^2; its spectrum lives in [-w, w]."""
    return np.sinc(width * np.asarray(t, dtype=float)) ** 2


def _restrict(f: SampledFunction, W: float, component: int):
    _require_cover(f, W)
    grid = f.grid
    lo = int(np.searchsorted(grid, -W - _COVER_TOL * max(1.0, W)))
    hi = int(np.searchsorted(grid, W + _COVER_TOL * max(1.0, W), side="right"))
    return grid[lo:hi], f.component(component)[lo:hi].copy()


def trapezoid_transform(f: SampledFunction, xi, W=None, component=1, taper_width=None):
    """Trapezoid approximation of int_{-W}^{W} exp(-2 pi i t xi) f(t) dt.

    ``W=None`` uses the whole window.  With ``taper_width`` the integrand is
    multiplied by the sinc^2 taper first.
    """
    if W is None:
        t, v = f.grid, f.component(component).copy()
    else:
        t, v = _restrict(f, W, component)
    if taper_width is not None:
        v = v * taper(t, taper_width)
    v[0] *= 0.5
    v[-1] *= 0.5
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    out = np.empty(xi.shape, dtype=complex)
    chunk = max(1, 2_000_000 // t.size)
    for s in range(0, xi.size, chunk):
        phase = np.exp(-2j * np.pi * np.outer(xi[s : s + chunk], t))
        out[s : s + chunk] = phase @ v
    return f.step * out


def _dense_transform(t: np.ndarray, v: np.ndarray, h: float, oversample: int = 4):
    # Uniform xi grid of spacing 1/(P h) via a zero-padded FFT.
    P = fft.next_fast_len(oversample * t.size, real=True)
    spec = fft.rfft(v, P)
    xi = np.arange(spec.size) / (P * h)
    return xi, h * np.abs(spec)


def band_limit_residual(f: SampledFunction, a: float, W: float, taper_width=None, component=1):
    """Largest windowed-transform magnitude just outside the band [-a, a].

    Scans a < xi <= 2a (shifted up by ``taper_width`` when a taper is used)
    on a grid four times finer than the 1/(2W) resolution of the window.
    The sample values are real, so negative frequencies mirror positive ones.
    """
    if not (a > 0 and W > 0):
        raise ValueError("band edge and window must be positive")
    t, v = _restrict(f, W, component)
    if taper_width is not None:
        v = v * taper(t, taper_width)
    v[0] *= 0.5
    v[-1] *= 0.5
    guard = 0.0 if taper_width is None else float(taper_width)
    lo, hi = a + guard, 2 * a + guard
    if hi >= 0.5 / f.step:
        raise ValueError("grid step too coarse for the residual band")
    xi, mag = _dense_transform(t, v, f.step)
    sel = (xi > lo) & (xi <= hi)
    return float(mag[sel].max()) if sel.any() else 0.0


def band_limit_bound(a, W, step, taper_width, sup, error=0.0) -> float:
    """Bound for :func:`band_limit_residual` of a tapered function.

    Assumes the samples equal g + e with g continuous, |g| <= ``sup``,
    spectrum of g inside [-a, a] and |e| <= ``error``.  Terms: the taper mass
    beyond W, the two half-weight endpoint samples, and the perturbation e
    weighted by the discrete taper mass 1/width.  Aliasing vanishes while
    1/step exceeds 3a + 2 width.
    """
    w = float(taper_width)
    if 1.0 / step <= 3 * a + 2 * w:
        raise ValueError("grid step too coarse for an alias-free bound")
    truncation = 2.0 / (math.pi**2 * w * w * W)
    endpoint = step * float(taper(W, w))
    return sup * (truncation + endpoint) + error / w


def affine_to_unit(f: SampledFunction) -> SampledFunction:
    """x -> (x + 1)/2, carrying [-1, 1]-valued functions into [0, 1]."""
    if f.range_tag != "symmetric_unit":
        raise RangeError("affine_to_unit expects a symmetric_unit function")
    return SampledFunction(f.start, f.step, (f.values + 1.0) / 2.0, "unit_interval")


def affine_to_symmetric(f: SampledFunction) -> SampledFunction:
    """Inverse of :func:`affine_to_unit`: x -> 2x - 1."""
    if f.range_tag != "unit_interval":
        raise RangeError("affine_to_symmetric expects a unit_interval function")
    return SampledFunction(f.start, f.step, 2.0 * f.values - 1.0, "symmetric_unit")
