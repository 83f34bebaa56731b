"""Config-driven command-line interface.

Subcommands: train, eval, landscape, construct {floor|sinematch|sintu-relu|
theorem1d}, init-compare, params. A single JSON config document drives each
workflow; flat flags override config fields. Exit codes: 0 ok, 2 config
error, 3 training divergence, 4 budgeted search failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from .activations import parse_activation
from .constructive import (ConstructionError, build_floor_net,
                           build_theorem_net_1d, search_sine_match,
                           sintu_relu_approx)
from .core import PrngState, RangeError
from .landscape import ParamCoord, analytic_landscape, scan_pair
from .models import (ModelSpec, build_model, count_params, load_model,
                     save_model)
from .targets import get_target, sample
from .training import (DivergenceError, LrSchedule, TrainConfig, evaluate,
                       lr_at, report_to_csv, train)

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_SEARCH = 0, 2, 3, 4


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"config field {path!r}: {message}")


def _fmt(x) -> str:
    """Shortest round-trip decimal form."""
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def _need(cfg: dict, key: str, prefix: str = ""):
    if key not in cfg:
        raise ConfigError(prefix + key, "missing")
    return cfg[key]


def _model_spec(cfg: dict, prefix: str = "model.") -> ModelSpec:
    kind = _need(cfg, "kind", prefix)
    try:
        act = parse_activation(cfg.get("activation", "sine"))
    except (RangeError, ValueError) as e:
        raise ConfigError(prefix + "activation", str(e)) from None
    try:
        return ModelSpec(
            kind=kind,
            width=int(_need(cfg, "width", prefix)),
            rank=int(cfg["rank"]) if cfg.get("rank") is not None else None,
            depth=int(cfg.get("depth", 1)),
            input_dim=int(cfg.get("input_dim", 1)),
            output_dim=int(cfg.get("output_dim", 1)),
            activation=act,
            residual_layers=tuple(cfg["residual_layers"])
            if cfg.get("residual_layers") is not None else None,
        )
    except (RangeError, ValueError, TypeError) as e:
        raise ConfigError(prefix.rstrip("."), str(e)) from None


def _train_config(cfg: dict, seed: int, precision: str) -> TrainConfig:
    try:
        sched = LrSchedule(base=float(cfg.get("lr_base", 1e-3)),
                           decay=float(cfg.get("lr_decay", 0.9)),
                           step=int(cfg.get("lr_step", 10000)))
        return TrainConfig(epochs=int(_need(cfg, "epochs", "train.")),
                           batch_size=int(_need(cfg, "batch_size", "train.")),
                           schedule=sched, seed=seed, precision=precision)
    except (RangeError, ValueError, TypeError) as e:
        raise ConfigError("train", str(e)) from None


def _datasets(cfg: dict, target_name: str, seed: int):
    try:
        t = get_target(target_name)
    except LookupError as e:
        raise ConfigError("target", str(e)) from None
    mode = cfg.get("mode", "uniform-random")
    train_seed = int(cfg.get("train_seed", seed ^ 1))
    test_seed = int(cfg.get("test_seed", seed ^ 2))
    try:
        tr = sample(t.name, int(_need(cfg, "train_n", "data.")), mode,
                    train_seed)
        te = sample(t.name, int(_need(cfg, "test_n", "data.")), mode,
                    test_seed)
    except (RangeError, ValueError) as e:
        raise ConfigError("data", str(e)) from None
    return (tr.X, tr.Y), (te.X, te.Y)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, default=float) + "\n")


def _grid_csv(path: Path, axis1, axis2, values) -> None:
    lines = ["w1,w2,loss"]
    for i, a in enumerate(axis1):
        for j, b in enumerate(axis2):
            lines.append(f"{_fmt(a)},{_fmt(b)},{_fmt(values[i, j])}")
    path.write_text("\n".join(lines) + "\n")


def _verify_csv(path: Path, xs, got, want) -> None:
    lines = ["x,value,oracle,abs_error"]
    for x, g, o in zip(xs, got, want):
        lines.append(f"{_fmt(x)},{_fmt(g)},{_fmt(o)},{_fmt(abs(g - o))}")
    path.write_text("\n".join(lines) + "\n")


def _run_train(cfg: dict, out: Path, seed: int, precision: str) -> int:
    spec = _model_spec(_need(cfg, "model"))
    model = build_model(spec, seed, cfg.get("init_mode", "default"))
    train_set, test_set = _datasets(_need(cfg, "data"), _need(cfg, "target"),
                                    seed)
    tc = _train_config(_need(cfg, "train"), seed, precision)
    t0 = time.perf_counter()
    report = train(model, train_set, test_set, tc)
    wall = time.perf_counter() - t0
    (out / "report.csv").write_text(report_to_csv(report))
    save_model(model, out / "model.json")
    mse, mx, _, _ = evaluate(model, test_set)
    trainable, total = count_params(spec)
    _write_json(out / "summary.json", {
        "target": cfg["target"],
        "final_test_mse": mse,
        "final_test_max": mx,
        "params_trainable": trainable,
        "params_total": total,
        "epochs": tc.epochs,
        "seed": seed,
        "wall_time_s": wall,
    })
    return EXIT_OK


def _run_eval(cfg: dict, out: Path, seed: int) -> int:
    model = load_model(_need(cfg, "model_file"))
    _, test_set = _datasets(_need(cfg, "data"), _need(cfg, "target"), seed)
    order = int(cfg.get("deriv_order", 0))
    target_derivs = None
    if order > 0:
        t = get_target(cfg["target"])
        d = {1: t.deriv1, 2: t.deriv2}.get(order)
        if d is None:
            raise ConfigError("deriv_order",
                              f"target {t.name!r} has no analytic derivative")
        target_derivs = d(test_set[0])
    mse, mx, rel_mse, rel_max = evaluate(model, test_set, order,
                                         target_derivs)
    _write_json(out / "summary.json", {
        "target": cfg["target"], "deriv_order": order, "mse": mse,
        "max": mx, "rel_mse": rel_mse, "rel_max": rel_max,
    })
    return EXIT_OK


def _pick_coords(cfg: dict, model, seed: int):
    pick = cfg.get("pick")
    if pick is not None:
        if not str(pick).startswith("random:"):
            raise ConfigError("pick", "expected 'random:<seed>'")
        rng = PrngState(seed=int(str(pick).split(":", 1)[1]))
        coords = []
        for _ in range(2):
            li = int(rng.uniform(0, len(model.layers)))
            lay = model.layers[li]
            tensors = (("W", lay[0]), ("b", lay[1])) \
                if model.spec.kind == "fcnn" else \
                (("W", lay.W), ("b", lay.b), ("A", lay.A), ("c", lay.c))
            name, t = tensors[int(rng.uniform(0, len(tensors)))]
            r = int(rng.uniform(0, t.shape[0]))
            c = int(rng.uniform(0, t.shape[1])) if t.ndim == 2 else 0
            coords.append(ParamCoord(li, name, r, c))
        return coords
    raw = _need(cfg, "coords")
    if len(raw) != 2:
        raise ConfigError("coords", "exactly two coordinates required")
    return [ParamCoord(int(c[0]), str(c[1]), int(c[2]),
                       int(c[3]) if len(c) > 3 else 0) for c in raw]


def _run_landscape(cfg: dict, out: Path, seed: int) -> int:
    ranges = cfg.get("ranges", [[-3.0, 3.0], [-3.0, 3.0]])
    resolution = int(cfg.get("resolution", 101))
    if "case" in cfg:
        case = cfg["case"]
        wstar = _need(cfg, "wstar")
        a1 = np.linspace(ranges[0][0], ranges[0][1], resolution)
        a2 = np.linspace(ranges[1][0], ranges[1][1], resolution)
        values = np.empty((resolution, resolution))
        try:
            for i, w1 in enumerate(a1):
                for j, w2 in enumerate(a2):
                    values[i, j] = analytic_landscape(case, w1, w2, wstar)
        except RangeError as e:
            raise ConfigError("case", str(e)) from None
        _grid_csv(out / "grid.csv", a1, a2, values)
        _write_json(out / "grid_meta.json", {
            "case": case, "wstar": list(wstar), "ranges": ranges,
            "resolution": resolution,
        })
        return EXIT_OK
    spec = _model_spec(_need(cfg, "model"))
    model = build_model(spec, seed, cfg.get("init_mode", "default"))
    data_cfg = cfg.get("data", {"train_n": 4096, "test_n": 2,
                                "mode": "grid"})
    train_set, _ = _datasets(data_cfg, _need(cfg, "target"), seed)
    coords = _pick_coords(cfg, model, seed)
    try:
        grid = scan_pair(model, train_set, coords[0], coords[1],
                         ranges=tuple(map(tuple, ranges)),
                         resolution=resolution)
    except RangeError as e:
        raise ConfigError("coords", str(e)) from None
    _grid_csv(out / "grid.csv", grid.axis1, grid.axis2, grid.values)
    _write_json(out / "grid_meta.json", {
        "target": cfg["target"],
        "coords": [c.__dict__ for c in grid.coords],
        "ranges": ranges, "resolution": resolution, "seed": seed,
        "base_loss": grid.base_loss,
        "model_hash": hashlib.sha256(json.dumps(
            {"spec": cfg["model"], "seed": seed},
            sort_keys=True).encode()).hexdigest()[:16],
    })
    return EXIT_OK


def _run_init_compare(cfg: dict, out: Path, seed: int, precision: str) -> int:
    spec = _model_spec(_need(cfg, "model"))
    train_set, test_set = _datasets(_need(cfg, "data"), _need(cfg, "target"),
                                    seed)
    tc = _train_config(_need(cfg, "train"), seed, precision)
    results = {}
    for mode in ("default", "scaled"):
        model = build_model(spec, seed, mode)
        report = train(model, train_set, test_set, tc)
        (out / f"report_{mode}.csv").write_text(report_to_csv(report))
        save_model(model, out / f"model_{mode}.json")
        results[mode] = report.records[-1][3]  # final test mse
    _write_json(out / "summary.json", {
        "target": cfg["target"], "seed": seed, "epochs": tc.epochs,
        "final_test_mse_default": results["default"],
        "final_test_mse_scaled": results["scaled"],
        "scaled_better": results["scaled"] < results["default"],
    })
    return EXIT_OK


def _run_construct(args, cfg: dict, out: Path, seed: int) -> int:
    kind = args.artifact
    if kind == "floor":
        N, L = int(args.N or cfg.get("N", 2)), int(args.L or cfg.get("L", 2))
        delta = float(args.delta or cfg.get("delta", 1e-3))
        try:
            net = build_floor_net(N, L, delta)
        except RangeError as e:
            raise ConfigError("delta", str(e)) from None
        rng = PrngState(seed=seed)
        M = N ** L
        ks = (rng.uniforms(2000, 0.0, 1.0) * M).astype(int)
        xs = ks + rng.uniforms(2000, 0.0, 1.0) * (1.0 - delta)
        got, want = net(xs), np.floor(xs)
        _verify_csv(out / "verify.csv", xs, got, want)
        err = np.abs(got - want)
        _write_json(out / "summary.json", {
            "artifact": "floor", "N": N, "L": L, "delta": delta,
            "max_abs_error": float(err.max()),
            "mean_abs_error": float(err.mean()),
            "width": net.width, "rank": net.rank, "depth": L,
        })
        return EXIT_OK
    if kind == "sinematch":
        y = cfg.get("y") if cfg else None
        if y is None:
            raise ConfigError("y", "missing target list")
        eps = float(cfg.get("eps", 0.1))
        budget = int(cfg.get("budget", 10**7))
        match = search_sine_match(np.asarray(y, dtype=np.float64), eps,
                                  budget=budget, seed=seed)
        ks = np.arange(1, match.K + 1)
        _verify_csv(out / "verify.csv", ks, match(ks), np.asarray(y))
        _write_json(out / "summary.json", {
            "artifact": "sinematch", "u": match.u, "v": match.v,
            "w": match.w, "achieved_eps": match.achieved_eps, "eps": eps,
            "success": match.success, "evals": match.evals,
        })
        return EXIT_OK if match.success else EXIT_SEARCH
    if kind == "sintu-relu":
        s = float(args.s if args.s is not None else cfg.get("s", 0.0))
        eps = float(args.eps or cfg.get("eps", 1e-3))
        try:
            phi = sintu_relu_approx(s, eps)
        except RangeError as e:
            raise ConfigError("eps", str(e)) from None
        xs = np.linspace(-1.0, 1.0, 10001)
        got, want = phi(xs), np.maximum(xs, 0.0)
        _verify_csv(out / "verify.csv", xs, got, want)
        _write_json(out / "summary.json", {
            "artifact": "sintu-relu", "s": s, "eps": eps, "case": phi.case,
            "sup_error": float(np.max(np.abs(got - want))),
        })
        return EXIT_OK
    if kind == "theorem1d":
        name = args.target or (cfg.get("target") if cfg else None)
        if name is None:
            raise ConfigError("target", "missing")
        if name == "linear":
            f = lambda x: np.asarray(x, dtype=np.float64)  # noqa: E731
        elif name == "abs-half":
            f = lambda x: np.abs(np.asarray(x) - 0.5)  # noqa: E731
        else:
            t = get_target(name)
            if t.dim != 1:
                raise ConfigError("target", "theorem1d needs a 1-D target")
            f = lambda x: t(2.0 * np.asarray(x) - 1.0)  # noqa: E731
        N, L = int(args.N or cfg.get("N", 2)), int(args.L or cfg.get("L", 2))
        delta = float(args.delta or cfg.get("delta", 1e-3))
        budget = int(cfg.get("budget", 10**7)) if cfg else 10**7
        try:
            net, measured, bound = build_theorem_net_1d(f, N, L, delta,
                                                        budget)
        except ConstructionError as e:
            _write_json(out / "summary.json", {
                "artifact": "theorem1d", "target": name, "N": N, "L": L,
                "success": False,
                "best_eps": e.artifact.match.achieved_eps,
                "eps": e.artifact.eps, "evals": e.artifact.match.evals,
            })
            print(f"search failure: {e}", file=sys.stderr)
            return EXIT_SEARCH
        rng = PrngState(seed=seed)
        xs = rng.uniforms(2000, 0.0, 1.0)
        _verify_csv(out / "verify.csv", xs, net(xs), np.asarray(f(xs)))
        _write_json(out / "summary.json", {
            "artifact": "theorem1d", "target": name, "N": N, "L": L,
            "delta": delta, "success": True, "eps": net.eps,
            "achieved_eps": net.match.achieved_eps,
            "measured_l1_error": measured, "bound": bound,
            "within_bound": bool(measured <= bound),
        })
        return EXIT_OK
    raise ConfigError("artifact", f"unknown construct artifact {kind!r}")


def _run_params(args, cfg: dict) -> int:
    if cfg and "model" in cfg:
        spec = _model_spec(cfg["model"])
    else:
        spec = _model_spec({
            "kind": args.kind, "width": args.width, "rank": args.rank,
            "depth": args.depth, "input_dim": args.input_dim,
            "output_dim": args.output_dim,
        }, prefix="")
    trainable, total = count_params(spec)
    print(f"{trainable} / {total}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fmmnn",
                                description="FMMNN training, constructive "
                                            "builders, and loss landscapes")
    p.add_argument("--config", type=str, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=str, default=".")
    p.add_argument("--precision", choices=("f64", "f32"), default=None)
    p.add_argument("--threads", type=int, default=None)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("train", "eval", "landscape", "init-compare"):
        sub.add_parser(name)
    c = sub.add_parser("construct")
    c.add_argument("artifact",
                   choices=("floor", "sinematch", "sintu-relu", "theorem1d"))
    c.add_argument("--N", type=int, default=None)
    c.add_argument("--L", type=int, default=None)
    c.add_argument("--delta", type=float, default=None)
    c.add_argument("--s", type=float, default=None)
    c.add_argument("--eps", type=float, default=None)
    c.add_argument("--target", type=str, default=None)
    pp = sub.add_parser("params")
    pp.add_argument("--kind", type=str, default="mmnn")
    pp.add_argument("--width", type=int, default=None)
    pp.add_argument("--rank", type=int, default=None)
    pp.add_argument("--depth", type=int, default=1)
    pp.add_argument("--input-dim", dest="input_dim", type=int, default=1)
    pp.add_argument("--output-dim", dest="output_dim", type=int, default=1)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None and args.threads > 0:
        try:
            import numba

            numba.set_num_threads(args.threads)
        except (ImportError, ValueError):
            pass
    cfg = {}
    if args.config is not None:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            print(f"config error: {e}", file=sys.stderr)
            return EXIT_CONFIG
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    precision = args.precision or cfg.get("precision", "f64")
    out = Path(args.out if args.out != "." else cfg.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "train":
            return _run_train(cfg, out, seed, precision)
        if args.command == "eval":
            return _run_eval(cfg, out, seed)
        if args.command == "landscape":
            return _run_landscape(cfg, out, seed)
        if args.command == "init-compare":
            return _run_init_compare(cfg, out, seed, precision)
        if args.command == "construct":
            return _run_construct(args, cfg, out, seed)
        if args.command == "params":
            return _run_params(args, cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as e:
        print(f"divergence: {e}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except ConstructionError as e:
        print(f"search failure: {e}", file=sys.stderr)
        return EXIT_SEARCH
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
