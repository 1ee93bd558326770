"""Concrete compact flows with closed-form evolution and explicit coordinates.

Every built-in phase space is a torus, possibly in disguise, and every
coordinate map sends each circle angle a to ((1 + cos 2 pi a)/2,
(1 + sin 2 pi a)/2).  For circle differences D <= 1/2 one has
|sin(pi D)| >= 2D, so coordinate points of states at distance >= delta are
at least 2*delta apart; that factor is the recorded injectivity margin.

Suspensions over a circle rotation x -> x + alpha use the sheared chart
(x, s) -> (s/f(x), x + alpha s/f(x)) mod 1.  It is a homeomorphism of the
suspension onto the torus and glues (x, f(x)) to (x + alpha, 0) on the nose,
so distances and coordinates are taken through it.  With roof 1 the chart
conjugates the suspension to the linear torus flow with direction
(1, alpha).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "GOLDEN_ALPHA",
    "FlowSpec",
    "SuspensionSpec",
    "SuspensionError",
    "evolve",
    "coordinates",
    "suspension_evolve",
    "suspension_orbit",
    "circle_coords",
    "torus_dist",
    "torus_flow",
    "rotation_suspension",
    "north_pole_flow",
    "get_flow",
    "BUILTIN_FLOWS",
]

GOLDEN_ALPHA = math.sqrt(2.0) - 1.0


class SuspensionError(RuntimeError):
    """Roof or iteration limits of a suspension were violated."""


def _wrap(a):
    a = np.mod(a, 1.0)
    return np.where(a >= 1.0, 0.0, a)


def circle_coords(angles) -> np.ndarray:
    """Hilbert-cube coordinates of circle angles, two per angle."""
    a = 2.0 * np.pi * np.asarray(angles, dtype=float)
    out = np.stack([(1.0 + np.cos(a)) / 2.0, (1.0 + np.sin(a)) / 2.0], axis=-1)
    return out.reshape(out.shape[:-2] + (-1,))


def torus_dist(a, b) -> np.ndarray:
    """Euclidean distance of circle-wise differences on (R/Z)^k."""
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % 1.0
    d = np.minimum(d, 1.0 - d)
    return np.sqrt((d * d).sum(axis=-1))


@dataclass(frozen=True)
class FlowSpec:
    """A compact flow with closed-form evolution.

    ``evolve(x, t)`` accepts a scalar or a 1-D array of times and returns a
    state or a (len(t), state_dim) array.  ``coords`` maps states (last axis)
    into [0, 1]^m.
    """

    name: str
    state_dim: int
    m: int
    evolve: Callable
    dist: Callable
    coords: Callable
    sample: Callable
    group_tol: float = 1e-9
    margin_factor: float = 2.0
    fixed_state: np.ndarray | None = None
    params: dict = field(default_factory=dict)

    def margin(self, delta: float) -> float:
        return self.margin_factor * delta


def evolve(flow: FlowSpec, x, t):
    return flow.evolve(np.asarray(x, dtype=float), t)


def coordinates(flow: FlowSpec, x) -> np.ndarray:
    return flow.coords(np.asarray(x, dtype=float))


# -- linear torus flow -------------------------------------------------------


def torus_flow(alpha: float = GOLDEN_ALPHA) -> FlowSpec:
    """(a, b) -> (a + t, b + alpha t) mod 1."""
    direction = np.array([1.0, alpha])

    def _evolve(x, t):
        t = np.asarray(t, dtype=float)
        return _wrap(x + t[..., None] * direction)

    return FlowSpec(
        name="torus",
        state_dim=2,
        m=4,
        evolve=_evolve,
        dist=torus_dist,
        coords=circle_coords,
        sample=lambda rng: rng.random(2),
        params={"alpha": alpha},
    )


# -- suspensions ---------------------------------------------------------------


@dataclass(frozen=True)
class SuspensionSpec:
    """Suspension of a homeomorphism T under a roof f with roof_min <= f <= roof_max.

    States are (base..., s) with 0 <= s < f(base); base states are 1-D arrays.
    """

    base_map: Callable
    base_inverse: Callable
    roof: Callable
    roof_min: float
    roof_max: float
    base_dim: int = 1

    def __post_init__(self):
        if not 0 < self.roof_min <= self.roof_max:
            raise ValueError("need 0 < roof_min <= roof_max")

    def height(self, x) -> float:
        f = float(self.roof(x))
        if not self.roof_min * (1 - 1e-12) <= f <= self.roof_max * (1 + 1e-12):
            raise SuspensionError(f"roof value {f} outside [{self.roof_min}, {self.roof_max}]")
        return f


def _crossings(susp: SuspensionSpec, x0, s0, tmin, tmax):
    """Floor times c_k and base points T^k x0 covering [tmin, tmax].

    The orbit sits at (T^k x0, t - c_k) for c_k <= t < c_{k+1}.
    """
    limit = math.ceil(max(abs(tmin), abs(tmax)) / susp.roof_min) + 2
    times = [-s0]
    bases = [np.asarray(x0, dtype=float)]
    c, x = -s0, bases[0]
    count = 0
    while c + susp.height(x) <= tmax:
        c += susp.height(x)
        x = np.asarray(susp.base_map(x), dtype=float)
        times.append(c)
        bases.append(x)
        count += 1
        if count > limit:
            raise SuspensionError("forward iteration limit exceeded")
    back_t, back_x = [], []
    c, x = -s0, bases[0]
    count = 0
    while c > tmin:
        x = np.asarray(susp.base_inverse(x), dtype=float)
        c -= susp.height(x)
        back_t.append(c)
        back_x.append(x)
        count += 1
        if count > limit:
            raise SuspensionError("backward iteration limit exceeded")
    times = np.array(back_t[::-1] + times)
    bases = np.array(back_x[::-1] + bases).reshape(len(times), -1)
    return times, bases


def suspension_orbit(susp: SuspensionSpec, state, times) -> np.ndarray:
    """States at each of ``times`` (1-D), shape (len(times), base_dim + 1)."""
    state = np.asarray(state, dtype=float)
    x0, s0 = state[:-1], float(state[-1])
    if not 0.0 <= s0 < susp.height(x0):
        raise ValueError(f"height {s0} outside the fundamental domain [0, f(x))")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    floors, bases = _crossings(susp, x0, s0, float(times.min()), float(times.max()))
    k = np.searchsorted(floors, times, side="right") - 1
    s = times - floors[k]
    x = bases[k].copy()
    roofs = np.array([susp.height(b) for b in bases])
    # Rounding can leave s == f(x); glue to (Tx, 0).
    over = s >= roofs[k]
    if over.any():
        for j in np.flatnonzero(over):
            x[j] = susp.base_map(x[j])
        s[over] = 0.0
    s = np.maximum(s, 0.0)
    return np.column_stack([x, s])


def suspension_evolve(susp: SuspensionSpec, state, t: float) -> np.ndarray:
    """(T^n x, s') with sum_{i<n} f(T^i x) + s' = t + s and 0 <= s' < f(T^n x)."""
    return suspension_orbit(susp, state, [float(t)])[0]


def rotation_suspension(alpha=GOLDEN_ALPHA, roof_amp=0.0, roof_mean=1.0, name=None) -> FlowSpec:
    """Suspension over x -> x + alpha with roof roof_mean + roof_amp cos(2 pi x)."""
    if not abs(roof_amp) < roof_mean:
        raise ValueError("roof must stay positive")
    susp = SuspensionSpec(
        base_map=lambda x: _wrap(np.asarray(x) + alpha),
        base_inverse=lambda x: _wrap(np.asarray(x) - alpha),
        roof=lambda x: roof_mean + roof_amp * math.cos(2.0 * math.pi * float(np.ravel(x)[0])),
        roof_min=roof_mean - abs(roof_amp),
        roof_max=roof_mean + abs(roof_amp),
    )

    def chart(x):
        x = np.asarray(x, dtype=float)
        base, s = x[..., 0], x[..., 1]
        u = s / (roof_mean + roof_amp * np.cos(2.0 * np.pi * base))
        return _wrap(np.stack([u, base + alpha * u], axis=-1))

    def _evolve(x, t):
        if np.ndim(t) == 0:
            return suspension_evolve(susp, x, float(t))
        return suspension_orbit(susp, x, t)

    def _sample(rng):
        base = rng.random()
        return np.array([base, rng.random() * float(susp.roof(np.array([base])))])

    if name is None:
        name = "suspension" if roof_amp == 0 else "suspension-cos"
    return FlowSpec(
        name=name,
        state_dim=2,
        m=4,
        evolve=_evolve,
        dist=lambda a, b: torus_dist(chart(a), chart(b)),
        coords=lambda x: circle_coords(chart(x)),
        sample=_sample,
        group_tol=1e-6,
        params={"alpha": alpha, "roof_mean": roof_mean, "roof_amp": roof_amp, "spec": susp},
    )


# -- circle of fixed points ------------------------------------------------------


def north_pole_flow() -> FlowSpec:
    """Trivial circle times the circle flow a' = sin^2(pi a).

    cot(pi a) decreases at rate pi, so a(t) = atan2(1, cot(pi a0) - pi t)/pi.
    The fixed points form the circle {a = 0}, which does not embed in R.
    """

    def _evolve(x, t):
        t = np.asarray(t, dtype=float)
        u, a = x[0], x[1] % 1.0
        if a == 0.0 or a >= 1.0:
            angle = np.zeros_like(t)
        else:
            cot0 = math.cos(math.pi * a) / math.sin(math.pi * a)
            angle = _wrap(np.arctan2(1.0, cot0 - math.pi * t) / math.pi)
        return np.stack([np.broadcast_to(u, t.shape), angle], axis=-1)

    def _sample(rng):
        return rng.random(2)

    return FlowSpec(
        name="fixed-circle",
        state_dim=2,
        m=4,
        evolve=_evolve,
        dist=torus_dist,
        coords=circle_coords,
        sample=_sample,
        fixed_state=np.array([0.3, 0.0]),
    )


BUILTIN_FLOWS = {
    "torus": torus_flow,
    "suspension": lambda: rotation_suspension(roof_amp=0.0),
    "suspension-cos": lambda: rotation_suspension(roof_amp=0.25),
    "fixed-circle": north_pole_flow,
}


def get_flow(name: str) -> FlowSpec:
    try:
        return BUILTIN_FLOWS[name]()
    except KeyError:
        raise KeyError(f"unknown flow {name!r}; choose from {sorted(BUILTIN_FLOWS)}") from None
