"""Tent functions and the Fejer-type summability kernels built from them.

The pair used throughout the package is

    tent:   psi_n(xi) = max(0, 1 - |xi|/n)
    kernel: phi_n(x)  = n * sin^2(pi n x) / (pi n x)^2,   phi_n(0) = n

with ``phi_n`` the inverse Fourier transform of ``psi_n`` under the
convention F(f)(xi) = int exp(-2 pi i t xi) f(t) dt.  Each ``phi_n`` is
nonnegative, has unit mass and a spectrum supported in [-n, n].

Tails are bounded with sin^2 <= 1, which gives

    int_{|x| > W} phi_n <= 2 / (pi^2 n W).

On a uniform grid with step h <= 1/n the composite trapezoid rule integrates
``phi_n`` (and ``phi_n`` times any tone of frequency |xi| <= 1/h - n) over the
whole line *exactly*: by Poisson summation every alias term lands where the
tent vanishes.  The only error of the windowed rule is therefore the
discarded discrete tail, bounded by the same 2/(pi^2 n W), plus the half
weights at the two window endpoints, at most h * phi_n(W).  That endpoint
term is what plays the role of the usual C h^2 quadrature term here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import sici

__all__ = [
    "KernelSpec",
    "KernelMass",
    "KernelWeights",
    "tent",
    "fejer",
    "fourier_of_fejer",
    "tail_bound",
    "tail_mass",
    "quadrature_bound",
    "kernel_mass",
    "kernel_weights",
    "tabulate",
    "DERIV1_L1",
    "DERIV2_L1",
]

# Below this |pi n x| the quotient is replaced by its Taylor series.
TAYLOR_CUTOFF = 1e-4

# Upper bounds for int |phi'| and int |phi''| of the n = 1 kernel (computed
# with 30-digit quadrature over [-200, 200] plus the analytic tail).
DERIV1_L1 = 2.40
DERIV2_L1 = 9.30


def _check_index(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"kernel index must be a positive integer, got {n!r}")
    return int(n)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel index plus the window and step it is tabulated on."""

    n: int
    window: float
    step: float | None = None

    def __post_init__(self):
        n = _check_index(self.n)
        object.__setattr__(self, "n", n)
        if self.step is None:
            object.__setattr__(self, "step", 1.0 / (8 * n))
        if not self.window > 0:
            raise ValueError("kernel window must be positive")
        if not self.step > 0:
            raise ValueError("kernel step must be positive")
        if self.step > 1.0 / (4 * n) * (1 + 1e-12):
            raise ValueError(
                f"step {self.step} undersamples phi_{n}; need step <= 1/(4n) = {1 / (4 * n)}"
            )


@dataclass(frozen=True)
class KernelMass:
    mass: float
    tail_bound: float
    quadrature_bound: float
    richardson: float  # |T(h) - T(h/2)|, empirical


@dataclass(frozen=True)
class KernelWeights:
    """Trapezoid weights h*phi_n(kh), |k| <= M, optionally tail-corrected.

    ``tail_error`` bounds the sup-norm error of convolving a function with
    |f| <= 1 against these weights instead of the full kernel, not counting
    the quadrature error of the trapezoid rule itself.
    """

    n: int
    step: float
    half_width: int
    weights: np.ndarray
    tail_error: float
    correction_l1: float

    @property
    def radius(self) -> float:
        return self.half_width * self.step


def tent(x, n):
    """psi_n(x) = max(0, 1 - |x|/n); scalar in, scalar out."""
    n = _check_index(n)
    out = np.maximum(0.0, 1.0 - np.abs(np.asarray(x, dtype=float)) / n)
    return float(out) if out.ndim == 0 else out


def fejer(x, n):
    """Evaluate phi_n(x) = n sin^2(pi n x) / (pi n x)^2.

    Near the removable singularity the truncated series
    1 - u^2/3 + 2u^4/45 (u = pi n x) is used, so values stay accurate and
    never negative.
    """
    n = _check_index(n)
    x = np.asarray(x, dtype=float)
    u = math.pi * n * x
    small = np.abs(u) < TAYLOR_CUTOFF
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(small, 0.0, np.sin(u) ** 2 / (u * u))
    u2 = u * u
    out = np.where(small, 1.0 - u2 / 3.0 + 2.0 * u2 * u2 / 45.0, out)
    out = n * out
    return float(out) if out.ndim == 0 else out


def fourier_of_fejer(n, xi):
    """Exact Fourier transform of phi_n, i.e. the tent psi_n."""
    return tent(xi, n)


def tail_bound(n, W) -> float:
    """Rigorous bound 2/(pi^2 n W) on int_{|x|>W} phi_n."""
    n = _check_index(n)
    if not W > 0:
        raise ValueError("window must be positive")
    return 2.0 / (math.pi**2 * n * W)


def _cos_over_square_tail(nu: float, A: float) -> float:
    # int_A^inf cos(2 pi nu y) / y^2 dy
    w = 2.0 * math.pi * abs(nu)
    if w == 0.0:
        return 1.0 / A
    si, _ = sici(w * A)
    return math.cos(w * A) / A - w * (math.pi / 2.0 - si)


def tail_multiplier(n, A, xi) -> float:
    """int_{|y|>A} phi_n(y) cos(2 pi xi y) dy in closed form."""
    n = _check_index(n)
    g = _cos_over_square_tail
    return (g(xi, A) - 0.5 * g(xi - n, A) - 0.5 * g(xi + n, A)) / (math.pi**2 * n)


def tail_mass(n, A) -> float:
    """Exact mass of phi_n outside [-A, A] (sine-integral closed form)."""
    return tail_multiplier(n, A, 0.0)


def quadrature_bound(n, W, h) -> float:
    """Endpoint term h*phi_n(W) of the windowed trapezoid rule (see module doc)."""
    return h * fejer(W, n)


def _trapezoid(values: np.ndarray, h: float) -> float:
    return h * (values.sum() - 0.5 * (values[0] + values[-1]))


def _grid(W: float, h: float) -> np.ndarray:
    M = int(round(W / h))
    return np.arange(-M, M + 1) * h


def kernel_mass(n, W, h) -> KernelMass:
    """Trapezoid mass of phi_n over [-W, W] with its error accounting.

    Since the full-line trapezoid sum is exactly 1 for h <= 1/n,
    1 - mass lies in [0, tail_bound + quadrature_bound].
    """
    spec = KernelSpec(n, W, h)
    x = _grid(spec.window, spec.step)
    coarse = _trapezoid(fejer(x, spec.n), spec.step)
    fine = _trapezoid(fejer(_grid(spec.window, spec.step / 2), spec.n), spec.step / 2)
    return KernelMass(
        mass=coarse,
        tail_bound=tail_bound(spec.n, spec.window),
        quadrature_bound=quadrature_bound(spec.n, spec.window, spec.step),
        richardson=abs(coarse - fine),
    )


def tabulate(spec: KernelSpec):
    """phi_n sampled on [-W, W] as a single-component SampledFunction."""
    from .funcspace import SampledFunction

    x = _grid(spec.window, spec.step)
    return SampledFunction(float(x[0]), spec.step, fejer(x, spec.n)[:, None], "real")


@lru_cache(maxsize=64)
def _weights(n: int, half_width: int, step: float, corrected: bool) -> KernelWeights:
    y = np.arange(-half_width, half_width + 1) * step
    w = step * fejer(y, n)
    w[0] *= 0.5
    w[-1] *= 0.5
    A = half_width * step
    tail = tail_mass(n, A)
    l1 = 0.0
    if corrected:
        # Add hann(y) * (a + b cos(2 pi n y)) so that the discrete multiplier
        # is exactly 1 at xi = 0 and exactly 0 at xi = +-n, the three kinks
        # of the tent where truncation error is first order in 1/A.
        hann = 1.0 + np.cos(np.pi * y / A)
        hann[0] *= 0.5
        hann[-1] *= 0.5
        hann /= hann.sum()
        c = np.cos(2.0 * np.pi * n * y)

        def bump(nu):
            return float(np.dot(hann, np.cos(2.0 * np.pi * nu * y)))

        system = np.array([[bump(0), bump(n)], [bump(n), 0.5 * (bump(0) + bump(2 * n))]])
        rhs = np.array([1.0 - w.sum(), -float(np.dot(w, c))])
        a, b = np.linalg.solve(system, rhs)
        extra = hann * (a + b * c)
        l1 = float(np.abs(extra).sum())
        w = w + extra
    w.flags.writeable = False
    return KernelWeights(n, step, half_width, w, tail + l1, l1)


def kernel_weights(n, A, h, tail_correction: bool = True) -> KernelWeights:
    """Convolution weights for phi_n truncated to [-A, A] on step h.

    The radius is rounded to the nearest whole number of steps.
    """
    n = _check_index(n)
    if not (A > 0 and h > 0):
        raise ValueError("radius and step must be positive")
    M = int(round(A / h))
    if M < 1:
        raise ValueError("truncation radius shorter than one grid step")
    return _weights(n, M, float(h), bool(tail_correction))
