"""flowcube command line: kernel, flow, metric, embed and verify.

Exit codes: 0 success, 1 a verification check failed, 2 usage or input error.
Every JSON artifact carries the resolved run configuration under "config".
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, kernels, verify
from .embedding import EmbeddingConfig, full_embed
from .flows import BUILTIN_FLOWS, get_flow
from .funcspace import MetricTruncation, SampledFunction, bebutov_metric, bernstein_metric

__all__ = ["RunConfig", "build_parser", "dispatch", "main"]


@dataclass
class RunConfig:
    """Subcommand plus its resolved parameters; ``argv()`` replays the run."""

    command: str
    params: dict = field(default_factory=dict)
    seed: int = verify.DEFAULT_SEED

    def to_dict(self) -> dict:
        return {"command": self.command, "params": dict(self.params), "seed": self.seed}

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return cls(data["command"], dict(data.get("params", {})), int(data["seed"]))

    def argv(self) -> list[str]:
        out = [self.command]
        for key, value in self.params.items():
            if value is None:
                continue
            flag = "--" + key.replace("_", "-")
            if isinstance(value, (list, tuple)):
                value = ",".join(repr(float(v)) for v in value)
            out += [flag, str(value)]
        return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _state(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"state must be comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="flowcube", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    k = sub.add_parser("kernel", help="tabulate phi_n as CSV with a JSON sidecar")
    k.add_argument("--n", type=int, required=True)
    k.add_argument("--window", type=float, default=400.0)
    k.add_argument("--step", type=float, default=None)
    k.add_argument("--emit", required=True, help="CSV path; the sidecar takes the .json suffix")

    f = sub.add_parser("flow", help="evolve a state of a built-in flow")
    f.add_argument("--name", required=True, choices=sorted(BUILTIN_FLOWS))
    f.add_argument("--state", type=_state, required=True)
    f.add_argument("--t", type=float, required=True)

    m = sub.add_parser("metric", help="truncated Bebutov or Bernstein distance")
    m.add_argument("--kind", required=True, choices=["bebutov", "bernstein"])
    m.add_argument("--f", required=True)
    m.add_argument("--g", required=True)
    m.add_argument("--depth", type=int, default=MetricTruncation().K)

    d = EmbeddingConfig()
    e = sub.add_parser("embed", help="embed one state and write every (n, i) component")
    e.add_argument("--flow", required=True, choices=sorted(BUILTIN_FLOWS))
    e.add_argument("--state", type=_state, required=True)
    e.add_argument("--levels", type=int, default=d.L)
    e.add_argument("--window", type=float, default=d.W)
    e.add_argument("--step", type=float, default=d.h)
    e.add_argument("--tail", type=float, default=d.A)
    e.add_argument("--out", required=True)

    v = sub.add_parser("verify", help="run certification suites")
    v.add_argument("--suite", default="all", choices=[*verify.SUITES, "all"])
    v.add_argument("--config", default=None, help="JSON overrides of the suite configuration")
    v.add_argument("--out", default=None)
    v.add_argument("--workers", type=int, default=None)
    return p


def _emit(obj) -> None:
    print(json.dumps(verify._jsonable(obj), indent=2, sort_keys=True))


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(verify._jsonable(obj), indent=2, sort_keys=True) + "\n")


def _run_kernel(args, run: RunConfig) -> int:
    spec = kernels.KernelSpec(args.n, args.window, args.step)
    run.params["step"] = spec.step
    phi = kernels.tabulate(spec)
    csv_path = Path(args.emit)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", f"phi_{spec.n}(x)"])
        w.writerows(zip(phi.grid.tolist(), phi.component(1).tolist()))
    km = kernels.kernel_mass(spec.n, spec.window, spec.step)
    side = {
        "config": run.to_dict(),
        "n": spec.n, "window": spec.window, "step": spec.step, "samples": phi.size,
        "mass": km.mass, "tail_bound": km.tail_bound,
        "quadrature_bound": km.quadrature_bound, "richardson": km.richardson,
    }
    _write_json(csv_path.with_suffix(".json"), side)
    _emit(side)
    return 0


def _run_flow(args, run: RunConfig) -> int:
    flow = get_flow(args.name)
    x = np.asarray(args.state, dtype=float)
    if x.shape != (flow.state_dim,):
        raise ValueError(f"flow {flow.name} expects a state of length {flow.state_dim}")
    y = flow.evolve(x, args.t)
    _emit({"config": run.to_dict(), "flow": flow.name, "state": x, "t": args.t,
           "evolved": y, "coordinates": flow.coords(y)})
    return 0


def _run_metric(args, run: RunConfig) -> int:
    f, g = SampledFunction.load(args.f), SampledFunction.load(args.g)
    trunc = MetricTruncation(args.depth)
    metric = bebutov_metric if args.kind == "bebutov" else bernstein_metric
    value, error = metric(f, g, trunc)
    _emit({"config": run.to_dict(), "value": value, "error_bound": error})
    return 0


def _run_embed(args, run: RunConfig) -> int:
    flow = get_flow(args.flow)
    x = np.asarray(args.state, dtype=float)
    if x.shape != (flow.state_dim,):
        raise ValueError(f"flow {flow.name} expects a state of length {flow.state_dim}")
    cfg = EmbeddingConfig(L=args.levels, W=args.window, h=args.step, A=args.tail)
    point = full_embed(flow, x, cfg)
    out = Path(args.out)
    files = []
    for n, i, conv in point.items():
        name = f"level{n:02d}_comp{i:02d}.json"
        _write_json(out / name, {**conv.function.to_dict(), "config": run.to_dict(),
                                 "level": n, "index": i})
        files.append(name)
    summary = point.manifest()
    manifest = {"config": run.to_dict(), "embedding": summary["config"], "flow": flow.name,
                "state": x, "components": summary["components"], "files": files}
    _write_json(out / "manifest.json", manifest)
    _emit({"config": run.to_dict(), "out": str(out), "components": len(files),
           "max_error_bound": max(c.error_bound for _, _, c in point.items())})
    return 0


def _run_verify(args, run: RunConfig) -> int:
    overrides = {}
    if args.config:
        overrides = json.loads(Path(args.config).read_text())
    overrides.setdefault("seed", run.seed)
    if args.workers is not None:
        overrides["workers"] = args.workers
    reports, resolved = verify.run_suite(args.suite, overrides)
    ok = all(r.passed for r in reports)
    document = {
        "config": {**run.to_dict(), "suite": resolved},
        "seed": resolved["seed"],
        "all_pass": ok,
        "reports": [r.to_dict() for r in reports],
    }
    if args.out:
        _write_json(Path(args.out), document)
    for r in reports:
        print(r.line(), file=sys.stderr)
    _emit({"all_pass": ok, "checks": len(reports),
           "failed": [r.check_name for r in reports if not r.passed]})
    return 0 if ok else 1


HANDLERS = {
    "kernel": _run_kernel,
    "flow": _run_flow,
    "metric": _run_metric,
    "embed": _run_embed,
    "verify": _run_verify,
}


def dispatch(argv=None) -> int:
    """Parse ``argv`` and run the subcommand; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    params = {k: v for k, v in vars(args).items() if k != "command"}
    run = RunConfig(args.command, params, verify.resolve_seed())
    try:
        return HANDLERS[args.command](args, run)
    except (ValueError, KeyError, OSError) as exc:
        print(f"flowcube {args.command}: error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> None:
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
