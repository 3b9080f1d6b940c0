"""Command-line front end.

    credal-lp solve --config problem.yaml --out outcome.yaml
    credal-lp verify --seed 0
    credal-lp experiment --config experiment.yaml --out results/

Exit codes: 0 success, 2 configuration error, 3 computation error.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import yaml

from .decision import CandidateSet, build_candidates, decide, filter_candidates, choose_punishment
from .errors import ConfigError, CredalLpError
from .harness import (ContaminationBand, IntervalBand, PBoxBand, PointOnly, TaskSpec, run_experiment)
from .model import UncertainLp
from .oracle import OracleConfig, brute_maximal, brute_maximin
from .uncertainty import (Cdf, Contamination, DiscreteDistribution, DsStructure, Interval, PBox, Point)

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE = 0, 2, 3
MODES = ("solve", "verify", "experiment")


# --- configuration ------------------------------------------------------------

@dataclass(frozen=True)
class DecisionSettings:
    n_focal: int = 8
    maximality: str = "standard"
    tie_tol: float = 1e-9
    punishment: float | None = None            # None: half the smallest guaranteed objective
    grid_resolution: int = 21
    vertices: bool = True
    candidates: tuple[tuple[float, ...], ...] | None = None  # explicit list replaces the grid


@dataclass(frozen=True)
class TaskSettings:
    n: int
    m: int
    feature_dim: int
    noise_scale: float
    x_bounds: tuple[Interval, ...]
    train_size: int
    test_size: int
    weights: tuple[tuple[float, ...], ...] | None = None
    weights_seed: int | None = None

    def spec(self, seed: int) -> TaskSpec:
        if self.weights is not None:
            w = np.array(self.weights, dtype=float)
        else:
            w = TaskSpec.random_weights(self.n, self.m, self.feature_dim, self.weights_seed)
        return TaskSpec(self.n, self.m, self.feature_dim, w, self.noise_scale, self.x_bounds,
                        self.train_size, self.test_size, seed)


@dataclass(frozen=True)
class RunConfig:
    mode: str
    seed: int = 0
    problem: UncertainLp | None = None
    decision: DecisionSettings = field(default_factory=DecisionSettings)
    task: TaskSettings | None = None
    methods: tuple = ()
    criterion: str = "maximin"
    oracle: OracleConfig | None = None


class _Reader:
    """Typed access to a parsed YAML tree that reports field paths on error."""

    def __init__(self, data, path: str = ""):
        self.data = data
        self.path = path

    def _sub(self, key) -> str:
        if isinstance(key, int):
            return f"{self.path}[{key}]"
        return f"{self.path}.{key}" if self.path else str(key)

    def fail(self, message: str, key=None):
        raise ConfigError(self._sub(key) if key is not None else (self.path or "<root>"), message)

    def mapping(self) -> dict:
        if not isinstance(self.data, dict):
            self.fail("expected a mapping")
        return self.data

    def child(self, key, required: bool = True) -> _Reader | None:
        d = self.mapping()
        if key not in d or d[key] is None:
            if required:
                self.fail("required field is missing", key)
            return None
        return _Reader(d[key], self._sub(key))

    def items(self) -> list[_Reader]:
        if not isinstance(self.data, list):
            self.fail("expected a list")
        return [_Reader(v, self._sub(i)) for i, v in enumerate(self.data)]

    def number(self) -> float:
        v = self.data
        if isinstance(v, bool):
            self.fail("expected a number, got a boolean")
        if isinstance(v, (int, float)):
            return float(v)
        if isinstance(v, str):
            try:
                return float(v)  # YAML 1.1 reads 1e-9 as a string
            except ValueError:
                pass
        self.fail(f"expected a number, got {v!r}")

    def integer(self) -> int:
        v = self.data
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(f"expected an integer, got {v!r}")
        return v

    def boolean(self) -> bool:
        if not isinstance(self.data, bool):
            self.fail(f"expected true or false, got {self.data!r}")
        return self.data

    def string(self, choices=None) -> str:
        if not isinstance(self.data, str):
            self.fail(f"expected a string, got {self.data!r}")
        if choices is not None and self.data not in choices:
            self.fail(f"must be one of {', '.join(choices)}; got {self.data!r}")
        return self.data

    def numbers(self) -> tuple[float, ...]:
        return tuple(r.number() for r in self.items())

    def pair(self) -> tuple[float, float]:
        vals = self.numbers()
        if len(vals) != 2:
            self.fail("expected [lo, hi]")
        return vals

    def get(self, key, kind: str, default):
        r = self.child(key, required=False)
        return default if r is None else getattr(r, kind)()

    def build(self, factory, *args):
        try:
            return factory(*args)
        except CredalLpError as exc:
            if isinstance(exc, ConfigError):
                raise
            self.fail(str(exc))

    def only(self, *keys):
        extra = sorted(set(self.mapping()) - set(keys), key=str)
        if extra:
            self.fail(f"unknown field(s): {', '.join(map(str, extra))}")


def _interval(r: _Reader) -> Interval:
    return r.build(Interval, *r.pair())


def _cdf(r: _Reader) -> Cdf:
    r.only("xs", "ps", "kind")
    kind = r.get("kind", "string", "linear")
    return r.build(Cdf, r.child("xs").numbers(), r.child("ps").numbers(), kind)


def _scalar(r: _Reader):
    if not isinstance(r.data, dict):
        return r.build(Point, r.number())
    d = r.mapping()
    if len(d) != 1:
        r.fail("expected exactly one of point, interval, contamination, pbox, ds")
    (tag,) = d
    body = r.child(tag)
    if tag == "point":
        return body.build(Point, body.number())
    if tag == "interval":
        return _interval(body)
    if tag == "contamination":
        body.only("center", "epsilon", "support")
        c = body.child("center")
        c.only("values", "probs")
        center = c.build(DiscreteDistribution, c.child("values").numbers(), c.child("probs").numbers())
        return body.build(Contamination, center, body.child("epsilon").number(), _interval(body.child("support")))
    if tag == "pbox":
        body.only("support", "lower", "upper")
        return body.build(PBox, _interval(body.child("support")), _cdf(body.child("lower")), _cdf(body.child("upper")))
    if tag == "ds":
        body.only("focal", "support")
        focal = []
        for fr in body.child("focal").items():
            vals = fr.numbers()
            if len(vals) != 3:
                fr.fail("expected [lo, hi, mass]")
            focal.append((fr.build(Interval, vals[0], vals[1]), vals[2]))
        s = body.child("support", required=False)
        return body.build(DsStructure, tuple(focal), _interval(s) if s else None)
    r.fail(f"unknown model {tag!r}")


def _problem(r: _Reader) -> UncertainLp:
    r.only("u", "y", "z", "x_bounds")
    u = tuple(_scalar(e) for e in r.child("u").items())
    y = tuple(tuple(_scalar(e) for e in row.items()) for row in r.child("y").items())
    z = tuple(_scalar(e) for e in r.child("z").items())
    bounds = tuple(_interval(b) for b in r.child("x_bounds").items())
    return r.build(UncertainLp, u, y, z, bounds)


def _decision(r: _Reader | None) -> DecisionSettings:
    if r is None:
        return DecisionSettings()
    r.only(*DecisionSettings.__dataclass_fields__)
    d = DecisionSettings()
    cands = r.child("candidates", required=False)
    s = DecisionSettings(
        n_focal=r.get("n_focal", "integer", d.n_focal),
        maximality=d.maximality if r.child("maximality", False) is None
        else r.child("maximality").string(("standard", "paper-literal")),
        tie_tol=r.get("tie_tol", "number", d.tie_tol),
        punishment=r.get("punishment", "number", None),
        grid_resolution=r.get("grid_resolution", "integer", d.grid_resolution),
        vertices=r.get("vertices", "boolean", d.vertices),
        candidates=None if cands is None else tuple(c.numbers() for c in cands.items()),
    )
    if s.n_focal < 1:
        r.fail("must be >= 1", "n_focal")
    if s.grid_resolution < 1:
        r.fail("must be >= 1", "grid_resolution")
    if not s.tie_tol >= 0:
        r.fail("must be >= 0", "tie_tol")
    if s.punishment is not None and not s.punishment > 0:
        r.fail("must be > 0", "punishment")
    if s.candidates is not None and not s.candidates:
        r.fail("must not be empty", "candidates")
    return s


def _method(r: _Reader):
    if isinstance(r.data, str):
        if r.data == "point":
            return PointOnly()
        r.fail(f"method {r.data!r} needs parameters; write it as a mapping")
    d = r.mapping()
    if len(d) != 1:
        r.fail("expected exactly one of point, interval, contamination, pbox")
    (tag,) = d
    body = _Reader(d[tag] if d[tag] is not None else {}, r._sub(tag))
    if tag == "point":
        body.only()
        return PointOnly()
    table = {"interval": ("coverage", IntervalBand), "contamination": ("epsilon", ContaminationBand),
             "pbox": ("ks_alpha", PBoxBand)}
    if tag not in table:
        r.fail(f"unknown method {tag!r}")
    key, cls = table[tag]
    body.only(key)
    return body.build(cls, body.child(key).number())


def _task(r: _Reader) -> TaskSettings:
    r.only(*TaskSettings.__dataclass_fields__)
    w = r.child("weights", required=False)
    ws = r.child("weights_seed", required=False)
    if (w is None) == (ws is None):
        r.fail("give exactly one of weights, weights_seed")
    t = TaskSettings(
        n=r.child("n").integer(), m=r.child("m").integer(), feature_dim=r.child("feature_dim").integer(),
        noise_scale=r.child("noise_scale").number(),
        x_bounds=tuple(_interval(b) for b in r.child("x_bounds").items()),
        train_size=r.child("train_size").integer(), test_size=r.child("test_size").integer(),
        weights=None if w is None else tuple(row.numbers() for row in w.items()),
        weights_seed=None if ws is None else ws.integer(),
    )
    for name in ("n", "feature_dim", "test_size"):
        if getattr(t, name) < 1:
            r.fail("must be >= 1", name)
    if t.m < 0:
        r.fail("must be >= 0", "m")
    r.build(t.spec, 0)  # run the TaskSpec invariants now, with field context
    return t


def _oracle(r: _Reader | None) -> OracleConfig | None:
    if r is None:
        return None
    r.only(*OracleConfig.__dataclass_fields__)
    d = OracleConfig()
    mode = r.child("selection_mode", False)
    return r.build(OracleConfig, r.get("grid_per_axis", "integer", d.grid_per_axis),
                   d.selection_mode if mode is None else mode.string(("endpoints+grid", "endpoints")),
                   r.get("seed", "integer", d.seed), r.get("n_focal", "integer", d.n_focal),
                   r.get("budget", "integer", d.budget), r.get("tol", "number", d.tol))


def parse_config(data: Any) -> RunConfig:
    """Validate a parsed YAML document into a :class:`RunConfig`."""
    r = _Reader(data)
    r.only(*RunConfig.__dataclass_fields__)
    mode = r.child("mode").string(MODES)
    seed = r.get("seed", "integer", 0)
    problem = _problem(r.child("problem")) if r.child("problem", mode == "solve") else None
    decision = _decision(r.child("decision", required=False))
    task = methods = None
    criterion = "maximin"
    if mode == "experiment":
        task = _task(r.child("task"))
        methods = tuple(_method(m) for m in r.child("methods").items())
        if not methods:
            r.fail("at least one method required", "methods")
        if len({m.name for m in methods}) != len(methods):
            r.fail("duplicate method", "methods")
        c = r.child("criterion", required=False)
        criterion = "maximin" if c is None else c.string(("maximin", "maximal-then-first"))
    else:
        for key in ("task", "methods", "criterion"):
            if r.child(key, required=False) is not None:
                r.fail(f"only valid in experiment mode", key)
    if problem is not None and decision.candidates is not None:
        for i, c in enumerate(decision.candidates):
            if len(c) != problem.n:
                raise ConfigError(f"decision.candidates[{i}]", f"expected {problem.n} coordinates")
            for j, (v, b) in enumerate(zip(c, problem.x_bounds)):
                if not b.contains(v):
                    raise ConfigError(f"decision.candidates[{i}][{j}]", f"{v!r} outside [{b.lo!r}, {b.hi!r}]")
    return RunConfig(mode, seed, problem, decision, task, methods or (), criterion,
                     _oracle(r.child("oracle", required=False)))


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}")
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"not valid YAML: {exc}")
    return parse_config(data)


def _iv(iv: Interval) -> list:
    return [iv.lo, iv.hi]


def _cdf_doc(c: Cdf) -> dict:
    return {"xs": list(c.xs), "ps": list(c.ps), "kind": c.kind}


def scalar_to_doc(e):
    if isinstance(e, Point):
        return e.value
    if isinstance(e, Interval):
        return {"interval": _iv(e)}
    if isinstance(e, Contamination):
        return {"contamination": {"center": {"values": list(e.center.values), "probs": list(e.center.probs)},
                                  "epsilon": e.epsilon, "support": _iv(e.support)}}
    if isinstance(e, PBox):
        return {"pbox": {"support": _iv(e.support), "lower": _cdf_doc(e.lower), "upper": _cdf_doc(e.upper)}}
    if isinstance(e, DsStructure):
        doc = {"focal": [[iv.lo, iv.hi, m] for iv, m in e.focal]}
        if e.support is not None:
            doc["support"] = _iv(e.support)
        return {"ds": doc}
    raise TypeError(e)


def _method_doc(m):
    if isinstance(m, PointOnly):
        return "point"
    if isinstance(m, IntervalBand):
        return {"interval": {"coverage": m.coverage}}
    if isinstance(m, ContaminationBand):
        return {"contamination": {"epsilon": m.epsilon}}
    return {"pbox": {"ks_alpha": m.ks_alpha}}


def config_to_doc(cfg: RunConfig) -> dict:
    doc: dict = {"mode": cfg.mode, "seed": cfg.seed}
    if cfg.problem is not None:
        p = cfg.problem
        doc["problem"] = {"u": [scalar_to_doc(e) for e in p.u],
                          "y": [[scalar_to_doc(e) for e in row] for row in p.y],
                          "z": [scalar_to_doc(e) for e in p.z],
                          "x_bounds": [_iv(b) for b in p.x_bounds]}
    d = cfg.decision
    doc["decision"] = {"n_focal": d.n_focal, "maximality": d.maximality, "tie_tol": d.tie_tol,
                       "punishment": d.punishment, "grid_resolution": d.grid_resolution,
                       "vertices": d.vertices,
                       "candidates": None if d.candidates is None else [list(c) for c in d.candidates]}
    if cfg.task is not None:
        t = cfg.task
        doc["task"] = {"n": t.n, "m": t.m, "feature_dim": t.feature_dim, "noise_scale": t.noise_scale,
                       "x_bounds": [_iv(b) for b in t.x_bounds], "train_size": t.train_size,
                       "test_size": t.test_size,
                       "weights": None if t.weights is None else [list(w) for w in t.weights],
                       "weights_seed": t.weights_seed}
        doc["methods"] = [_method_doc(m) for m in cfg.methods]
        doc["criterion"] = cfg.criterion
    if cfg.oracle is not None:
        doc["oracle"] = dict(vars(cfg.oracle))
    return doc


def dump_yaml(doc) -> str:
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None, width=100)


def config_to_yaml(cfg: RunConfig) -> str:
    return dump_yaml(config_to_doc(cfg))


# --- output -------------------------------------------------------------------

def atomic_write(path: str, text: str):
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _candidates(cfg: RunConfig) -> CandidateSet:
    d, p = cfg.decision, cfg.problem
    if d.candidates is not None:
        return CandidateSet.from_points(np.array(d.candidates, dtype=float))
    return build_candidates(p, d.grid_resolution, d.vertices)


# --- commands -----------------------------------------------------------------

def cmd_solve(cfg: RunConfig, out: str | None) -> int:
    d = cfg.decision
    outcome = decide(cfg.problem, _candidates(cfg), L=d.punishment, n_focal=d.n_focal, mode=d.maximality,
                     tie_tol=d.tie_tol)
    text = dump_yaml(outcome.to_dict())
    sys.stdout.write(text)
    if out:
        atomic_write(out, text)
    return EXIT_OK


def cmd_verify(seed: int, cfg: RunConfig | None, scale: float, tol_scale: float) -> int:
    from .verify import run_suite

    ok = True
    if cfg is not None and cfg.problem is not None:
        # oracle agreement on the configured instance
        ocfg = cfg.oracle or OracleConfig(seed=seed, n_focal=cfg.decision.n_focal)
        cands = filter_candidates(cfg.problem, _candidates(cfg))
        L = cfg.decision.punishment or choose_punishment(cfg.problem, cands)
        out = decide(cfg.problem, cands, L=L, n_focal=ocfg.n_focal, mode=cfg.decision.maximality)
        bm = brute_maximin(cfg.problem, None, cands, L, ocfg)
        bx = brute_maximal(cfg.problem, None, cands, L, ocfg, mode=cfg.decision.maximality)
        same = list(out.maximin) == bm and list(out.maximal) == bx and tol_scale >= 0
        ok &= same
        print(f"{'PASS' if same else 'FAIL'} configured-instance: maximin {list(out.maximin)} vs oracle {bm}, "
              f"maximal {list(out.maximal)} vs oracle {bx}")
    for res in run_suite(seed, scale=scale, tol_scale=tol_scale):
        print(res.line(), flush=True)
        ok &= res.passed
    return EXIT_OK if ok else 1


def cmd_experiment(cfg: RunConfig, out: str) -> int:
    spec = cfg.task.spec(cfg.seed)
    report = run_experiment(spec, list(cfg.methods), cfg.criterion, cfg.decision.grid_resolution,
                            cfg.decision.n_focal)
    summary = report.to_dict()
    summary["grid_regret_bound"] = grid_regret_bound(spec, cfg.decision.grid_resolution)
    os.makedirs(out, exist_ok=True)
    text = dump_yaml(summary)
    atomic_write(os.path.join(out, "summary.yaml"), text)
    atomic_write(os.path.join(out, "regret.csv"), report.to_csv())
    sys.stdout.write(text)
    return EXIT_OK


def grid_regret_bound(spec: TaskSpec, grid_resolution: int) -> float:
    """Regret a noiseless point prediction can still incur from the candidate grid:
    ``|u|_max . spacing`` with the largest objective coefficient the task can produce."""
    coef = np.abs(spec.true_weights[:spec.n, 0]) + np.abs(spec.true_weights[:spec.n, 1:]).sum(axis=1)
    spacing = np.array([b.width for b in spec.x_bounds]) / max(grid_resolution - 1, 1)
    return float(coef @ spacing)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="credal-lp", description="Linear programs under imprecise uncertainty.")
    sub = parser.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="compute maximin and maximal decisions for one problem")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    v = sub.add_parser("verify", help="run the seeded oracle agreement suite")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--config", help="optional instance (and oracle settings) to check as well")
    v.add_argument("--scale", type=float, default=1.0, help="multiply every property's case count")
    v.add_argument("--corrupt-tolerance", action="store_true", help=argparse.SUPPRESS)
    e = sub.add_parser("experiment", help="run a predict-then-optimize regret experiment")
    e.add_argument("--config", required=True)
    e.add_argument("--out", required=True)
    return parser


def _expect_mode(cfg: RunConfig, mode: str):
    if cfg.mode != mode:
        raise ConfigError("mode", f"command {mode!r} needs mode: {mode}, got {cfg.mode!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            cfg = load_config(args.config)
            _expect_mode(cfg, "solve")
            return cmd_solve(cfg, args.out)
        if args.command == "verify":
            cfg = None
            if args.config:
                cfg = load_config(args.config)
                _expect_mode(cfg, "verify")
            if not args.scale > 0:
                raise ConfigError("--scale", "must be > 0")
            return cmd_verify(args.seed, cfg, args.scale, -1.0 if args.corrupt_tolerance else 1.0)
        cfg = load_config(args.config)
        _expect_mode(cfg, "experiment")
        return cmd_experiment(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CredalLpError as exc:
        print(f"computation error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except OSError as exc:
        print(f"computation error (output): {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
