"""Headless driver: synthesize once, sweep conditions, or serve the HTTP API."""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy import stats as _stats

from .charts import ChartSpec, PatternCatalog, Selection
from .data import DataError, load_csv
from .engine import generate_scheme, save_scheme
from .mechanisms import MechanismError, split_budget
from .metrics import evaluate_scheme


class ConfigError(ValueError):
    """Bad run configuration (exit code 1)."""


def load_config(args) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    # flags override file values
    for key in ("input", "schema", "epsilon", "k", "seed", "repeats", "n_out",
                "structure_fraction", "jobs"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if args.baseline:
        cfg["baseline"] = True
    if args.oracle:
        cfg["oracle"] = True
    if "input" not in cfg:
        raise ConfigError("missing required field: input (CSV path)")
    if "epsilon" not in cfg and not cfg.get("epsilons"):
        raise ConfigError("missing required field: epsilon")
    cfg.setdefault("structure_fraction", 0.5)
    cfg.setdefault("k", 2)
    cfg.setdefault("seed", 0)
    cfg.setdefault("repeats", 1)
    cfg.setdefault("max_bins", 8)
    if cfg["repeats"] < 1:
        raise ConfigError("repeats must be >= 1")
    return cfg


def _load_world(cfg):
    schema = None
    if cfg.get("schema"):
        with open(cfg["schema"], encoding="utf-8") as fh:
            schema = json.load(fh)  # descriptor list; domains may be omitted
    with open(cfg["input"], encoding="utf-8") as fh:
        ds = load_csv(fh.read(), schema=schema)
    charts = {}
    for obj in cfg.get("charts", []):
        spec = ChartSpec.from_json(obj)
        spec.validate(ds.schema)
        charts[spec.id] = spec
    catalog = PatternCatalog()
    patterns = []
    for obj in cfg.get("patterns", []):
        spec = charts[obj["chart"]]
        selection = Selection.from_json(obj["selection"])
        patterns.append(catalog.add(ds, spec, selection, float(obj.get("weight", 0.0))))
    return ds, charts, patterns


def _run_once(cfg, ds, charts, patterns, seed, weight_override=None, epsilon=None):
    eps = epsilon if epsilon is not None else cfg["epsilon"]
    budget = split_budget(float(eps), float(cfg["structure_fraction"]))
    weights = None
    if cfg.get("baseline"):
        weights = {p.id: 0.0 for p in patterns}
    if weight_override is not None:
        weights = {p.id: weight_override for p in patterns}
    scheme = generate_scheme(
        ds,
        patterns,
        weights,
        budget,
        k=int(cfg["k"]),
        n_out=cfg.get("n_out"),
        seed=seed,
        max_bins=int(cfg["max_bins"]),
        oracle=bool(cfg.get("oracle", False)),
        scheme_id=f"seed{seed}",
    )
    scheme.metrics = evaluate_scheme(ds, scheme, patterns, list(charts.values()))
    return scheme


def cmd_synth(args) -> int:
    cfg = load_config(args)
    ds, charts, patterns = _load_world(cfg)
    scheme = _run_once(cfg, ds, charts, patterns, int(cfg["seed"]))
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    save_scheme(scheme, out)
    print(f"wrote synthetic.csv, scheme.json, metrics.json to {out}")
    return 0


def _sweep_condition(payload):
    """Worker: one (epsilon, weight, seed) run; returns per-metric values."""
    cfg, epsilon, weight, seed = payload
    ds, charts, patterns = _load_world(cfg)
    scheme = _run_once(cfg, ds, charts, patterns, seed, weight_override=weight, epsilon=epsilon)
    values = {}
    for p in scheme.metrics.patterns:
        for m in p.get("metrics", []):
            if "after" in m:
                values[f"{p['pattern']}:{m['metric']}"] = m["after"]
    for a in scheme.metrics.attributes:
        values[f"{a['attribute']}:{a['metric']}"] = a["value"]
    return epsilon, weight, seed, values


def cmd_sweep(args) -> int:
    cfg = load_config(args)
    epsilons = cfg.get("epsilons") or [cfg["epsilon"]]
    weights = cfg.get("weights")
    if weights is None:
        weights = [None]
    repeats = int(cfg["repeats"])
    base_seed = int(cfg["seed"])
    jobs = int(cfg.get("jobs", 1))
    tasks = [
        (cfg, float(eps), w, base_seed + r)
        for eps in epsilons
        for w in weights
        for r in range(repeats)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_condition, tasks))
    else:
        results = [_sweep_condition(t) for t in tasks]

    grouped: dict = {}
    for epsilon, weight, seed, values in results:
        for metric, value in values.items():
            grouped.setdefault((epsilon, weight, metric), []).append(value)

    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "sweep.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epsilon", "weight", "metric", "mean", "sd", "ci95", "n_runs"])
        for (epsilon, weight, metric) in sorted(grouped, key=str):
            vals = np.array(grouped[(epsilon, weight, metric)], dtype=float)
            n = vals.size
            mean = float(vals.mean())
            sd = float(vals.std(ddof=1)) if n > 1 else 0.0
            ci95 = float(_stats.t.ppf(0.975, n - 1) * sd / math.sqrt(n)) if n > 1 else 0.0
            writer.writerow([epsilon, "" if weight is None else weight, metric, mean, sd, ci95, n])
    print(f"wrote {path} ({len(grouped)} rows)")
    return 0


def cmd_serve(args) -> int:
    import socket

    import uvicorn

    from .service import create_app

    state_dir = args.state_dir or "./privcharts-state"
    try:
        os.makedirs(state_dir, exist_ok=True)
        probe = os.path.join(state_dir, ".writable")
        with open(probe, "w") as fh:
            fh.write("ok")
        os.remove(probe)
    except OSError as exc:
        print(f"state dir not writable: {exc}", file=sys.stderr)
        return 1

    app = create_app(state_dir=state_dir, max_bins=args.max_bins, default_k=args.k or 2,
                     static_dir=args.static_dir)
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        sock.bind((args.host, args.port))
    except OSError as exc:
        print(f"cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return 1
    sock.listen(128)
    host, port = sock.getsockname()[:2]
    print(f"privcharts serving on http://{host}:{port}", flush=True)
    config = uvicorn.Config(app, log_level="warning")
    server = uvicorn.Server(config)
    try:
        server.run(sockets=[sock])
    except KeyboardInterrupt:
        pass
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="privcharts", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--input", help="input CSV path")
        p.add_argument("--schema", help="schema JSON path")
        p.add_argument("--config", help="run-config JSON path")
        p.add_argument("--epsilon", type=float)
        p.add_argument("--structure-fraction", dest="structure_fraction", type=float)
        p.add_argument("--k", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--repeats", type=int)
        p.add_argument("--n-out", dest="n_out", type=int)
        p.add_argument("--jobs", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--baseline", action="store_true", help="force all pattern weights to 0")
        p.add_argument(
            "--oracle", action="store_true",
            help="disable noise (test only; outputs are NOT differentially private)",
        )

    p_synth = sub.add_parser("synth", help="one synthesis run")
    add_common(p_synth)
    p_synth.set_defaults(func=cmd_synth)

    p_sweep = sub.add_parser("sweep", help="grid of (epsilon, weight) conditions")
    add_common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    # flags take precedence over PRIVCHARTS_* environment variables
    env = os.environ
    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default=env.get("PRIVCHARTS_HOST", "127.0.0.1"))
    p_serve.add_argument("--port", type=int, default=int(env.get("PRIVCHARTS_PORT", "8000")))
    p_serve.add_argument("--state-dir", dest="state_dir", default=env.get("PRIVCHARTS_STATE_DIR"))
    p_serve.add_argument("--static-dir", dest="static_dir", help="serve a built UI from this directory")
    p_serve.add_argument("--max-bins", dest="max_bins", type=int,
                         default=int(env.get("PRIVCHARTS_MAX_BINS", "8")))
    p_serve.add_argument("--k", type=int,
                         default=int(env["PRIVCHARTS_K"]) if "PRIVCHARTS_K" in env else None)
    p_serve.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError,) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (DataError, MechanismError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
