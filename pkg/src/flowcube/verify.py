"""Numerical certification of the kernels and of the embedding.

Each check returns :class:`VerificationReport` objects whose ``bound`` comes
from a documented formula (tail, quadrature, interpolation), never from the
measurement itself.  Bounds are analytic where the analysis is clean and
empirical where noted (interpolation guards).
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .embedding import EmbeddingConfig, convolve, full_embed
from .flows import FlowSpec, get_flow
from .funcspace import (
    SampledFunction,
    band_limit_bound,
    band_limit_residual,
    evaluate,
    interpolation_bound,
    nested_sup_dists,
    shift,
    sup_dist,
    trapezoid_transform,
)

__all__ = [
    "DEFAULT_SEED",
    "VerificationReport",
    "FourierEstimate",
    "numerical_fourier",
    "check_kernel_properties",
    "check_summability",
    "check_equivariance",
    "check_separation",
    "check_membership",
    "sample_states",
    "sample_pairs",
    "default_suite_config",
    "run_suite",
]

DEFAULT_SEED = 20170611
EPS = np.finfo(float).eps
# Pinned before the build: the sup error of |sin(pi x)| * phi_64 - |sin(pi x)|
# is (4/pi) sum_k min(1, k/64)/(4k^2 - 1) = 0.0304503 (series summed in
# extended precision; adaptive quadrature of the convolution agrees to 2e-6).
SUMMABILITY_THRESHOLD = 0.035
# Taper width used for band-limit certificates of bounded, non-decaying functions.
CERT_TAPER = 0.5


def resolve_seed(seed=None) -> int:
    if seed is not None:
        return int(seed)
    env = os.environ.get("FLOWCUBE_SEED")
    return int(env) if env else DEFAULT_SEED


@dataclass
class VerificationReport:
    """One named check.  ``sense`` fixes the pass rule: measured <= bound
    ("le", the default), measured >= bound ("ge") or measured > bound ("gt")."""

    check_name: str
    measured: float
    bound: float
    params: dict = field(default_factory=dict)
    runtime_ms: int = 0
    sense: str = "le"

    @property
    def passed(self) -> bool:
        if not (math.isfinite(self.measured) or self.sense == "le" and self.measured == -math.inf):
            return False
        if self.sense == "le":
            return self.measured <= self.bound
        if self.sense == "ge":
            return self.measured >= self.bound
        if self.sense == "gt":
            return self.measured > self.bound
        raise ValueError(f"unknown sense {self.sense!r}")

    def to_dict(self, timings: bool = True) -> dict:
        out = {
            "check_name": self.check_name,
            "params": _jsonable(self.params),
            "measured": float(self.measured),
            "bound": float(self.bound),
            "sense": self.sense,
            "pass": bool(self.passed),
        }
        if timings:
            out["runtime_ms"] = int(self.runtime_ms)
        return out

    def line(self) -> str:
        op = {"le": "<=", "ge": ">=", "gt": ">"}[self.sense]
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} {self.check_name}: {self.measured:.6g} {op} {self.bound:.6g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = int(round(1000 * (time.perf_counter() - self.t0)))


@dataclass(frozen=True)
class FourierEstimate:
    """Windowed transform value(s) and the disclosed truncation bound.

    ``truncation_bound`` is inf when no decay bound was supplied.
    """

    value: complex | np.ndarray
    truncation_bound: float

    @property
    def real(self):
        return np.real(self.value)

    @property
    def imag(self):
        return np.imag(self.value)


def numerical_fourier(f: SampledFunction, xi, tail_bound=None, component=1,
                      taper_width=None) -> FourierEstimate:
    """Trapezoid estimate of F(f)(xi) = int exp(-2 pi i t xi) f(t) dt over f's window.

    ``tail_bound`` is the caller's bound on int |f| outside the window.
    """
    value = trapezoid_transform(f, xi, component=component, taper_width=taper_width)
    if np.ndim(xi) == 0:
        value = complex(value[0])
    bound = math.inf if tail_bound is None else float(tail_bound)
    return FourierEstimate(value, bound)


# -- kernel checks -------------------------------------------------------------


def check_kernel_properties(n: int, W: float = 400.0, h=None, points: int = 81):
    """Nonnegativity, unit mass, in-band transform = tent, out-of-band silence."""
    spec = kernels.KernelSpec(n, W, h)
    base = {"n": spec.n, "W": spec.window, "h": spec.step}
    reports = []
    with _Timer() as t:
        phi = kernels.tabulate(spec)
        vals = phi.component(1)
    reports.append(VerificationReport(
        f"kernel.nonnegativity[n={n}]", float(vals.min()), 0.0,
        {**base, "argmin": float(phi.grid[int(vals.argmin())])}, t.ms, "ge"))

    rounding = 4 * phi.size * EPS
    with _Timer() as t:
        km = kernels.kernel_mass(spec.n, spec.window, spec.step)
    bound = km.tail_bound + km.quadrature_bound + rounding
    reports.append(VerificationReport(
        f"kernel.mass[n={n}]", abs(km.mass - 1.0), bound,
        {**base, "mass": km.mass, "tail_bound": km.tail_bound,
         "quadrature_bound": km.quadrature_bound, "richardson": km.richardson},
        t.ms))

    bound = kernels.tail_bound(spec.n, spec.window) + kernels.quadrature_bound(
        spec.n, spec.window, spec.step) + rounding
    with _Timer() as t:
        xi_in = np.linspace(-spec.n, spec.n, points)
        est = numerical_fourier(phi, xi_in, bound).value
        inband = float(np.abs(est - kernels.tent(xi_in, spec.n)).max())
    reports.append(VerificationReport(
        f"kernel.inband[n={n}]", inband, bound, {**base, "xi_points": points}, t.ms))

    with _Timer() as t:
        side = np.linspace(spec.n, 2 * spec.n, points)[1:]
        xi_out = np.concatenate([-side[::-1], side])
        outband = float(np.abs(numerical_fourier(phi, xi_out, bound).value).max())
    reports.append(VerificationReport(
        f"kernel.outband[n={n}]", outband, bound, {**base, "xi_points": xi_out.size}, t.ms))
    return reports


# -- summability ---------------------------------------------------------------


def check_summability(h: SampledFunction, n_list, N: float, cfg: EmbeddingConfig,
                      threshold: float = 0.05, label: str = "h"):
    """sup_[-N,N] |h * phi_n - h| for each n; must decrease and end below threshold.

    Step k passes when its error is at most the previous one or within the
    numerical budget (so constants, whose errors are all round-off, pass).
    """
    if not h.covers(-(N + cfg.A), N + cfg.A):
        raise ValueError("h must be sampled on a window covering [-(N + A), N + A]")
    n_list = list(n_list)
    reports = []
    prev = 2.0 * float(np.abs(h.values).max())
    for k, n in enumerate(n_list):
        with _Timer() as t:
            conv = convolve(h, n, cfg)
            err = sup_dist(conv.function, h, N)
        bound = max(prev, conv.error_bound)
        if k == len(n_list) - 1:
            bound = min(bound, max(threshold, conv.error_bound))
        reports.append(VerificationReport(
            f"summability[{label},n={n}]", err, bound,
            {"n": n, "N": N, "threshold": threshold, "previous": prev,
             "budget": conv.error_bound, "config": cfg.to_dict()},
            t.ms))
        prev = err
    return reports


# -- equivariance ----------------------------------------------------------------


def sample_states(flow: FlowSpec, count: int, seed=None):
    rng = np.random.default_rng(resolve_seed(seed))
    return [flow.sample(rng) for _ in range(count)]


def _shift_residual(moved: SampledFunction, base: SampledFunction, r: float) -> float:
    shifted = shift(base, r)
    lo, hi = max(moved.start, shifted.start), min(moved.end, shifted.end)
    t = moved.grid
    t = t[(t >= lo) & (t <= hi)]
    return float(np.abs(evaluate(moved, t) - evaluate(shifted, t)).max())


def equivariance_residuals(flow: FlowSpec, x, r_list, cfg: EmbeddingConfig):
    """Rows (r, n, i, residual, budget) comparing F(flow_r x) with shift(F(x), r)."""
    E = full_embed(flow, x, cfg)
    rows = []
    for r in r_list:
        Er = full_embed(flow, flow.evolve(np.asarray(x, dtype=float), float(r)), cfg)
        for n, i, conv in Er.items():
            base = E.component(n, i)
            res = _shift_residual(conv.function, base, r)
            budget = conv.tail_error + 2.0 * interpolation_bound(shift(base, r))
            rows.append((float(r), n, i, res, budget))
    return rows


def check_equivariance(flow: FlowSpec, states, r_list, cfg: EmbeddingConfig, workers: int = 1):
    """Worst ratio of shift residual to its budget over states x shifts x levels.

    The budget per component is the convolution tail error plus twice the
    interpolation guard of the shifted function.
    """
    r_list = [float(r) for r in r_list]
    with _Timer() as t:
        def one(x):
            return equivariance_residuals(flow, x, r_list, cfg)

        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                rows = [row for chunk in pool.map(one, states) for row in chunk]
        else:
            rows = [row for x in states for row in one(x)]
    res = np.array([row[3] for row in rows])
    bud = np.array([row[4] for row in rows])
    # Identically zero components (fixed points) give 0/0; count them as 0.
    ratio = np.divide(res, bud, out=np.where(res > 0, np.inf, 0.0), where=bud > 0)
    worst = int(ratio.argmax())
    params = {
        "flow": flow.name, "states": len(states), "shifts": r_list, "config": cfg.to_dict(),
        "max_residual": float(res.max()), "max_budget": float(bud.max()),
        "min_budget": float(bud.min()),
        "worst": {"r": rows[worst][0], "n": rows[worst][1], "i": rows[worst][2]},
    }
    return VerificationReport(f"equivariance[{flow.name}]", float(ratio.max()), 1.0, params, t.ms)


# -- separation ------------------------------------------------------------------


def sample_pairs(flow: FlowSpec, count: int, min_dist: float = 1e-2, seed=None):
    rng = np.random.default_rng(resolve_seed(seed))
    pairs = []
    while len(pairs) < count:
        a, b = flow.sample(rng), flow.sample(rng)
        if float(flow.dist(a, b)) >= min_dist:
            pairs.append((a, b))
    return pairs


def embedded_separation(flow: FlowSpec, a, b, cfg: EmbeddingConfig, N=None):
    """max over (n, i) of sup_[-N,N] |F(a)_{n,i} - F(b)_{n,i}|, plus the first level attaining it."""
    N = min(cfg.K, cfg.reliable) if N is None else N
    Ea, Eb = full_embed(flow, a, cfg), full_embed(flow, b, cfg)
    best, first = 0.0, None
    for n, i, conv in Ea.items():
        d = sup_dist(conv.function, Eb.component(n, i), N)
        if d > 0 and first is None:
            first = n
        best = max(best, d)
    return best, first


def check_separation(flow: FlowSpec, pairs, cfg: EmbeddingConfig, N=None, refine: bool = True):
    """Minimum embedded separation (must be > 0) and its stability under h -> h/2."""
    reports = []
    with _Timer() as t:
        coarse = [embedded_separation(flow, a, b, cfg, N) for a, b in pairs]
    margins = np.array([c[0] for c in coarse])
    margin = float(margins.min()) if margins.size else 0.0
    firsts = [c[1] for c in coarse if c[1] is not None]
    params = {
        "flow": flow.name, "pairs": len(pairs), "config": cfg.to_dict(),
        "N": min(cfg.K, cfg.reliable) if N is None else N,
        "min_pair_distance": float(min(flow.dist(a, b) for a, b in pairs)) if pairs else 0.0,
        "first_separating_level": max(firsts) if firsts else None,
    }
    reports.append(VerificationReport(
        f"separation.margin[{flow.name}]", margin, 0.0, params, t.ms, "gt"))
    if refine:
        fine_cfg = cfg.replace(h=cfg.h / 2)
        with _Timer() as t:
            fine = np.array([embedded_separation(flow, a, b, fine_cfg, N)[0] for a, b in pairs])
        change = abs(float(fine.min()) - margin) / margin if margin > 0 else math.inf
        per_pair = np.abs(fine - margins) / np.where(margins > 0, margins, np.nan)
        reports.append(VerificationReport(
            f"separation.stability[{flow.name}]", change, 0.10,
            {**params, "refined_margin": float(fine.min()),
             "max_pair_change": float(np.nanmax(per_pair)) if pairs else 0.0},
            t.ms))
    return reports


# -- membership certificates -------------------------------------------------------


def check_membership(flow: FlowSpec, states, cfg: EmbeddingConfig, taper_width: float = CERT_TAPER):
    """Range, band-limit and affine-map certificates for embedded components."""
    worst_range, worst_band, worst_affine = -math.inf, 0.0, 0.0
    band_rows = []
    with _Timer() as t:
        for x in states:
            E = full_embed(flow, x, cfg)
            for n, i, conv in E.items():
                worst_range = max(worst_range, conv.pre_clamp_sup - conv.error_bound)
                g = conv.function
                residual = band_limit_residual(g, n, cfg.reliable, taper_width)
                bound = band_limit_bound(n, cfg.reliable, g.step, taper_width,
                                         float(np.abs(g.values).max()), conv.error_bound)
                band_rows.append((n, residual, bound))
                worst_band = max(worst_band, residual / bound)
            for level in E.unit:
                for u in level:
                    v = u.values
                    worst_affine = max(worst_affine, float(max(-v.min(), v.max() - 1.0, 0.0)))
    base = {"flow": flow.name, "states": len(states), "config": cfg.to_dict()}
    per_level = {}
    for n, res, bnd in band_rows:
        cur = per_level.setdefault(n, [0.0, bnd])
        cur[0] = max(cur[0], res)
        cur[1] = min(cur[1], bnd)
    return [
        VerificationReport(f"membership.range[{flow.name}]", worst_range, 1.0, base, t.ms),
        VerificationReport(
            f"membership.band[{flow.name}]", worst_band, 1.0,
            {**base, "taper_width": taper_width,
             "levels": {n: {"residual": r, "bound": b} for n, (r, b) in sorted(per_level.items())}},
            t.ms),
        VerificationReport(f"membership.affine[{flow.name}]", worst_affine, 0.0, base, t.ms),
    ]


# -- suites ------------------------------------------------------------------------


def default_suite_config() -> dict:
    return {
        "seed": resolve_seed(),
        "embedding": EmbeddingConfig().to_dict(),
        "kernels": {"n": [1, 2, 4, 8, 16], "W": 400.0},
        "summability": {
            "n": [4, 8, 16, 32, 64], "N": 5.0, "threshold": SUMMABILITY_THRESHOLD,
            "step": 1.0 / 512, "A": 200.0,
        },
        "equivariance": {
            "flows": ["torus", "suspension-cos", "fixed-circle"],
            "states": 20, "shifts": [0.37, -1.2, 2.0],
        },
        "separation": {"flow": "torus", "pairs": 50, "min_dist": 1e-2},
        "membership": {"flows": ["torus", "suspension-cos", "fixed-circle"], "states": 2},
        "workers": 1,
    }


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in (override or {}).items():
        out[k] = _merge(out[k], v) if isinstance(v, dict) and isinstance(out.get(k), dict) else v
    return out


def abs_sine(N: float, A: float, step: float) -> SampledFunction:
    """|sin(pi x)| sampled on [-(N + A), N + A]."""
    R = N + A
    return SampledFunction.from_callable(lambda x: np.abs(np.sin(np.pi * x)), -R, R, step,
                                         "unit_interval")


def _suite_kernels(c):
    return [r for n in c["kernels"]["n"] for r in check_kernel_properties(n, c["kernels"]["W"])]


def _suite_summability(c):
    s = c["summability"]
    cfg = EmbeddingConfig(L=max(s["n"]), W=s["N"] + s["A"] + 1.0, h=s["step"], A=s["A"],
                          K=c["embedding"]["K"])
    return check_summability(abs_sine(s["N"], s["A"], s["step"]), s["n"], s["N"], cfg,
                             s["threshold"], label="abs_sin")


def _suite_equivariance(c):
    e = c["equivariance"]
    cfg = EmbeddingConfig(**c["embedding"])
    out = []
    for k, name in enumerate(e["flows"]):
        flow = get_flow(name)
        states = sample_states(flow, e["states"], c["seed"] + k)
        rep = check_equivariance(flow, states, e["shifts"], cfg, c.get("workers", 1))
        rep.params["seed"] = c["seed"] + k
        out.append(rep)
    return out


def _suite_separation(c):
    s = c["separation"]
    flow = get_flow(s["flow"])
    pairs = sample_pairs(flow, s["pairs"], s["min_dist"], c["seed"])
    reps = check_separation(flow, pairs, EmbeddingConfig(**c["embedding"]))
    for r in reps:
        r.params["seed"] = c["seed"]
    return reps


def _suite_membership(c):
    m = c["membership"]
    cfg = EmbeddingConfig(**c["embedding"])
    out = []
    for k, name in enumerate(m["flows"]):
        flow = get_flow(name)
        out.extend(check_membership(flow, sample_states(flow, m["states"], c["seed"] + k), cfg))
    return out


SUITES = {
    "kernels": _suite_kernels,
    "summability": _suite_summability,
    "equivariance": _suite_equivariance,
    "separation": _suite_separation,
    "membership": _suite_membership,
}


def run_suite(suite: str = "all", config: dict | None = None):
    """Run one suite (or all) and return (reports sorted by name, resolved config)."""
    cfg = _merge(default_suite_config(), config or {})
    names = list(SUITES) if suite == "all" else [suite]
    for name in names:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}")
    workers = int(cfg.get("workers", 1))
    if workers > 1 and len(names) > 1:
        with ThreadPoolExecutor(workers) as pool:
            chunks = list(pool.map(lambda s: SUITES[s](cfg), names))
    else:
        chunks = [SUITES[s](cfg) for s in names]
    reports = sorted((r for chunk in chunks for r in chunk), key=lambda r: r.check_name)
    return reports, cfg
