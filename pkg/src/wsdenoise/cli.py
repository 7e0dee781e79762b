"""Command line interface.

Verbs: ``stats``, ``baseline``, ``ulf``, ``wscw``, ``wscl``, ``grid``,
``synth``.  Each takes ``--config FILE`` (flat ``key=value`` lines, ``#``
comments) plus ``--key value`` / ``--key=value`` overrides whose names equal
the config field names.  For ``grid``, any hyperparameter whose value is a
comma-separated list defines a grid axis.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields

from wsdenoise.corpus import load_dataset, save_dataset
from wsdenoise.harness import RunConfig, grid_search, run, stats_report
from wsdenoise.synth import SynthConfig, generate

VERBS = ("stats", "baseline", "ulf", "wscw", "wscl", "grid", "synth")
GRIDABLE = {"p", "lr", "k", "iters", "lambda_rate", "epochs", "epsilon",
            "partitions", "l2", "batch_size", "stall_patience"}


def parse_config_file(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f.read().splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path} line {lineno}: expected 'key=value'")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _parse_overrides(args: list[str]) -> dict:
    out = {}
    i = 0
    while i < len(args):
        arg = args[i]
        if not arg.startswith("--"):
            raise ValueError(f"unexpected argument {arg!r}")
        body = arg[2:]
        if "=" in body:
            key, value = body.split("=", 1)
            i += 1
        else:
            key = body
            if i + 1 >= len(args):
                raise ValueError(f"missing value for --{key}")
            value = args[i + 1]
            i += 2
        out[key] = value
    return out


def _coerce(value: str, target_type):
    if value.lower() in ("none", ""):
        return None
    if target_type is bool or target_type == "bool":
        return value.lower() in ("1", "true", "yes")
    if target_type is int:
        return int(value)
    if target_type is float:
        return float(value)
    return value


_RUN_TYPES = {
    "seed": int, "repeats": int, "k": int, "iters": int, "stall_patience": int,
    "partitions": int, "epochs": int, "patience": int, "batch_size": int,
    "min_df": int, "max_features": int,
    "p": float, "lambda_rate": float, "epsilon": float, "lr": float, "l2": float,
    "use_raw_joint": bool, "dump_folds": bool,
}

_SYNTH_TYPES = {
    "n_samples": int, "n_classes": int, "n_lfs": int, "vocab_size": int,
    "words_per_doc": int, "seed": int,
    "lf_precision": float, "coverage_target": float,
}


def _build_run_config(values: dict, method: str) -> RunConfig:
    kwargs = {"method": method}
    known = {f.name for f in fields(RunConfig)}
    for key, raw in values.items():
        if key in ("budget", "stats_repeats"):
            continue
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        if key == "method":
            continue
        kwargs[key] = _coerce(raw, _RUN_TYPES.get(key, str)) if isinstance(raw, str) else raw
    return RunConfig(**kwargs)


def _build_grid(values: dict, base_keys_seen: dict):
    """Split comma-valued hyperparameters into a grid space."""
    space = {}
    scalars = {}
    for key, raw in values.items():
        if key in GRIDABLE and isinstance(raw, str) and "," in raw:
            space[key] = [_coerce(v, _RUN_TYPES.get(key, str)) for v in raw.split(",")]
        else:
            scalars[key] = raw
    return scalars, space


def _cmd_synth(values: dict) -> int:
    out_dir = values.pop("out_dir", "synth_data")
    kwargs = {}
    for key, raw in values.items():
        if key == "misallocated_lfs":
            pairs = []
            if raw:
                for item in raw.split(","):
                    lf, cls = item.split(":")
                    pairs.append((int(lf), int(cls)))
            kwargs[key] = pairs
        elif key in _SYNTH_TYPES:
            kwargs[key] = _coerce(raw, _SYNTH_TYPES[key]) if isinstance(raw, str) else raw
        else:
            raise ValueError(f"unknown synth config key {key!r}")
    cfg = SynthConfig(**kwargs)
    ds, _ = generate(cfg)
    os.makedirs(out_dir, exist_ok=True)
    save_dataset(
        ds,
        os.path.join(out_dir, "docs.tsv"),
        os.path.join(out_dir, "z.tsv"),
        os.path.join(out_dir, "t.tsv"),
        os.path.join(out_dir, "gold.tsv"),
    )
    print(json.dumps({"out_dir": out_dir, "n_samples": ds.n_samples,
                      "n_lfs": ds.n_lfs, "num_classes": ds.num_classes}))
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = argparse.ArgumentParser(prog="wsdenoise",
                                     description="Weak-label denoising by k-fold cross-validation")
    parser.add_argument("verb", choices=VERBS)
    parser.add_argument("--config", default=None, help="flat key=value config file")
    ns, rest = parser.parse_known_args(argv)

    values = parse_config_file(ns.config) if ns.config else {}
    values.update(_parse_overrides(rest))

    if ns.verb == "synth":
        return _cmd_synth(values)

    if ns.verb == "stats":
        repeats = int(values.pop("stats_repeats", 5))
        cfg = _build_run_config(values, "baseline_majority")
        ds = load_dataset(cfg.doc_path, cfg.z_path, cfg.t_path, cfg.gold_path or None)
        print(json.dumps(stats_report(ds, repeats=repeats, seed=cfg.seed),
                         indent=1, sort_keys=True))
        return 0

    if ns.verb == "grid":
        budget = values.pop("budget", None)
        budget = int(budget) if budget is not None else None
        method = values.pop("method", "ulf")
        scalars, space = _build_grid(values, {})
        base = _build_run_config(scalars, method)
        if not space:
            raise ValueError("grid verb needs at least one comma-valued hyperparameter")
        best, results = grid_search(base, space, budget=budget)
        print(json.dumps({
            "best_params": {k: getattr(best, k) for k in space},
            "best_out_dir": best.out_dir,
            "points_evaluated": len(results),
        }, indent=1, sort_keys=True))
        return 0

    method = {"baseline": "baseline_majority"}.get(ns.verb, ns.verb)
    cfg = _build_run_config(values, method)
    report = run(cfg)
    print(json.dumps({
        "method": cfg.method, "metric": report.metric,
        "mean": report.mean, "sem": report.sem,
        "dev_mean": report.dev_mean, "out_dir": cfg.out_dir,
        "partial": report.partial,
    }, indent=1, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
