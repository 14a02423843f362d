"""Command-line front end.

Subcommands: ``cluster`` (end-to-end labeling), ``sweep`` (rank vs accuracy
over protected-rank values), ``gen`` (synthetic datasets to file),
``convert`` (between IDX / CSV / native binary), ``eval`` (accuracy between
two label files).

Every flag can also be given as a same-named key (dashes as underscores) in
a TOML config file passed with ``--config``; explicit flags win over file
values.  Machine-readable results go to stdout and output files; progress
and warnings go to stderr.  Each run writes a JSON manifest describing the
fully resolved configuration.  Exit codes: 0 success (including solver
non-convergence, which only warns), 2 bad arguments, 3 I/O or parse
failure, 4 numerical failure.
"""

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # 3.10
    import tomli as tomllib

import numpy as np

from . import __version__
from .data import (
    DataFormatError,
    LabeledDataset,
    SubspaceGenSpec,
    generate_union_of_subspaces,
    load_csv_matrix,
    load_idx,
    read_labels_csv,
    read_native,
    save_csv_matrix,
    subsample_per_class,
    unit_normalize_columns,
    write_labels_csv,
    write_native,
)
from .eval import (
    clustering_accuracy,
    rank_accuracy_sweep,
    representation_rank,
    write_sweep_csv,
)
from .solvers import (
    LrrProblem,
    NumericalError,
    SolverConfig,
    SolverVariant,
    resolve_config,
    solve_lrr,
    solve_pssv_lrr,
    solve_wnnm_lrr_admm,
    solve_wnnm_lrr_ladmm,
)
from .spectral import AffinityMode, cluster_from_representation

CONFIG_KEYS = {
    "input", "labels", "labeled_csv", "synthetic", "spec", "k", "variant",
    "pssv_n", "lam", "gamma", "mu0", "mu_max", "rho", "eps", "eps1", "eps2",
    "eta", "max_iters", "affinity", "power", "n", "jobs", "out", "manifest",
    "strict", "seed", "normalize", "subsample", "rank_tol",
}


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_toml(path) -> dict:
    with open(path, "rb") as f:
        cfg = tomllib.load(f)
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return cfg


class Options:
    """Flag values merged over config-file values merged over defaults."""

    def __init__(self, args: argparse.Namespace):
        self._args = vars(args)
        cfg_path = self._args.get("config")
        self._file = _load_toml(cfg_path) if cfg_path else {}

    def get(self, key, default=None):
        v = self._args.get(key)
        if v is not None:
            return v
        if key in self._file:
            return self._file[key]
        return default


def _parse_synthetic(text: str) -> SubspaceGenSpec:
    """``m=50,k=5,d=4,pts=20,sigma=0,seed=7`` (sigma and seed optional)."""
    fields = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"bad synthetic spec fragment {part!r}")
        key, val = part.split("=", 1)
        fields[key.strip()] = val.strip()
    try:
        return SubspaceGenSpec(
            ambient_dim=int(fields["m"]),
            num_subspaces=int(fields["k"]),
            subspace_dim=int(fields["d"]),
            points_per_subspace=int(fields["pts"]),
            noise_sigma=float(fields.get("sigma", 0.0)),
            seed=int(fields.get("seed", 0)),
        )
    except KeyError as e:
        raise ValueError(f"synthetic spec is missing {e.args[0]!r}") from None


def _parse_n_list(text) -> list:
    """Either ``a:b:s`` (inclusive range) or a comma list of integers."""
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    text = str(text)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (int(p) for p in parts)
        if step <= 0:
            raise ValueError("range step must be positive")
        return list(range(start, stop + 1, step))
    return [int(p) for p in text.split(",") if p.strip() != ""]


def _load_dataset(opts: Options) -> LabeledDataset:
    synth = opts.get("synthetic")
    path = opts.get("input")
    if (synth is None) == (path is None):
        raise ValueError("exactly one of --synthetic or --input is required")
    if synth is not None:
        spec = synth if isinstance(synth, SubspaceGenSpec) else _parse_synthetic(synth)
        return generate_union_of_subspaces(spec)
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".csv":
        return load_csv_matrix(path, has_labels=bool(opts.get("labeled_csv", False)))
    with open(path, "rb") as f:
        head = f.read(4)
    if head == b"LRRM":
        return read_native(path)
    return load_idx(path, opts.get("labels"))


def _preprocess(ds: LabeledDataset, opts: Options) -> LabeledDataset:
    sub = opts.get("subsample")
    if sub is not None:
        ds = subsample_per_class(ds, int(sub), int(opts.get("seed", 0)))
    if opts.get("normalize", False):
        ds = unit_normalize_columns(ds)
    return ds


def _solver_config(opts: Options) -> SolverConfig:
    def num(key):
        v = opts.get(key)
        return None if v is None else float(v)

    return SolverConfig(
        lam=num("lam"),
        gamma=float(opts.get("gamma", 1.0 / 3.0)),
        mu0=num("mu0"),
        mu_max=float(opts.get("mu_max", 1e6)),
        rho=num("rho"),
        eps=float(opts.get("eps", 1e-8)),
        eps1=float(opts.get("eps1", 1e-6)),
        eps2=float(opts.get("eps2", 1e-5)),
        eta=num("eta"),
        max_iters=int(opts.get("max_iters", 1000)),
    )


def _solve(X, variant: SolverVariant, cfg: SolverConfig, pssv_n: int):
    if variant == SolverVariant.WNNM_ADMM:
        return solve_wnnm_lrr_admm(LrrProblem.from_data(X, cfg.gamma), cfg)
    if variant == SolverVariant.WNNM_LADMM:
        return solve_wnnm_lrr_ladmm(LrrProblem.from_data(X, cfg.gamma), cfg)
    if variant == SolverVariant.NNM_LRR:
        return solve_lrr(X, cfg=cfg)
    return solve_pssv_lrr(X, N=pssv_n, cfg=cfg)


def _config_dict(cfg: SolverConfig) -> dict:
    def f(v):
        return None if v is None else float(v)

    return {
        "lam": f(cfg.lam),
        "gamma": f(cfg.gamma),
        "mu0": f(cfg.mu0),
        "mu_max": f(cfg.mu_max),
        "rho": f(cfg.rho),
        "eps": f(cfg.eps),
        "eps1": f(cfg.eps1),
        "eps2": f(cfg.eps2),
        "eta": f(cfg.eta),
        "max_iters": int(cfg.max_iters),
        "variant": cfg.variant.value if cfg.variant else None,
    }


def _write_manifest(path, command, opts: Options, started, *, dataset=None,
                    solver_cfg=None, solution=None, artifacts=None, extra=None):
    doc = {
        "tool": {"name": "wlrr", "version": __version__},
        "command": command,
        "wall_clock_sec": round(time.time() - started, 6),
        "seed": int(opts.get("seed", 0)),
        "strict": bool(opts.get("strict", True)),
        "artifacts": {k: str(v) for k, v in (artifacts or {}).items()},
    }
    if dataset is not None:
        doc["dataset"] = {
            "name": dataset.name,
            "provenance": dataset.provenance,
            "rows": int(dataset.X.shape[0]),
            "samples": int(dataset.X.shape[1]),
            "has_labels": dataset.labels is not None,
        }
    if solver_cfg is not None:
        doc["config"] = _config_dict(solver_cfg)
    if solution is not None:
        hist = solution.primal_residual_history
        doc["solver"] = {
            "iterations": int(solution.iterations),
            "converged": bool(solution.converged),
            "final_residual": float(hist[-1]) if hist.size else 0.0,
        }
    if extra:
        doc.update(extra)
    with open(path, "w", encoding="utf-8", newline="") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def _manifest_path(opts: Options, out_path) -> Path:
    m = opts.get("manifest")
    return Path(m) if m else Path(str(out_path) + ".manifest.json")


def cmd_cluster(args) -> int:
    started = time.time()
    opts = Options(args)
    k = opts.get("k")
    if k is None:
        raise ValueError("--k (number of clusters) is required")
    k = int(k)
    ds = _preprocess(_load_dataset(opts), opts)
    variant = SolverVariant(opts.get("variant", "wnnm-admm"))
    cfg = _solver_config(opts)
    pssv_n = int(opts.get("pssv_n", 0))
    _progress(
        f"cluster: {ds.X.shape[0]}x{ds.X.shape[1]} data, variant={variant.value}"
    )
    sol = _solve(ds.X, variant, cfg, pssv_n)
    hist = sol.primal_residual_history
    _progress(
        f"solver finished: iterations={sol.iterations} converged={sol.converged} "
        f"residual={float(hist[-1]) if hist.size else 0.0:.3e}"
    )
    if not sol.converged:
        _progress("warning: solver hit max_iters before reaching tolerance")
    mode = AffinityMode(opts.get("affinity", "svd"))
    power = int(opts.get("power", 4))
    pred = cluster_from_representation(sol.Z, k, mode, power)

    out = Path(opts.get("out", "labels.csv"))
    write_labels_csv(out, pred.labels)
    resolved = resolve_config(cfg, ds.X, variant)
    if variant == SolverVariant.NNM_LRR:
        # the baseline ignores the weight exponent; record what actually ran
        resolved = replace(resolved, gamma=0.0)
    manifest = _write_manifest(
        _manifest_path(opts, out), "cluster", opts, started,
        dataset=ds, solver_cfg=resolved, solution=sol,
        artifacts={"labels": out},
        extra={"k": k, "affinity": mode.value, "power": power,
               "pssv_n": pssv_n if variant == SolverVariant.PSSV_LRR else None,
               "z_rank": representation_rank(sol.Z)},
    )
    _progress(f"wrote {out} and {manifest}")
    if ds.labels is not None:
        print(f"accuracy: {clustering_accuracy(pred, ds.labels)}")
    return 0


def cmd_sweep(args) -> int:
    started = time.time()
    opts = Options(args)
    n_text = opts.get("n")
    if n_text is None:
        raise ValueError("--n (list or start:stop:step range) is required")
    ns = _parse_n_list(n_text)
    if not ns:
        raise ValueError(f"--n produced no values: {n_text!r}")
    ds = _preprocess(_load_dataset(opts), opts)
    if ds.labels is None:
        raise ValueError("sweep requires a dataset with ground-truth labels")
    k = opts.get("k")
    k = int(k) if k is not None else None
    cfg = _solver_config(opts)
    mode = AffinityMode(opts.get("affinity", "svd"))
    power = int(opts.get("power", 4))
    jobs = int(opts.get("jobs", 1))
    rank_tol = float(opts.get("rank_tol", 1e-4))
    _progress(f"sweep: N values {ns}, jobs={jobs}")
    records = rank_accuracy_sweep(
        ds, ns, cfg=cfg, k=k, mode=mode, power=power,
        rank_tol=rank_tol, jobs=jobs,
        pin_threads=bool(opts.get("strict", True)),
    )
    out = Path(opts.get("out", "sweep.csv"))
    write_sweep_csv(out, records)
    resolved = resolve_config(cfg, ds.X, SolverVariant.PSSV_LRR)
    manifest = _write_manifest(
        _manifest_path(opts, out), "sweep", opts, started,
        dataset=ds, solver_cfg=resolved, artifacts={"sweep": out},
        extra={"n_values": ns, "jobs": jobs, "affinity": mode.value,
               "power": power, "rank_tol": rank_tol},
    )
    _progress(f"wrote {out} and {manifest}")
    return 0


def cmd_gen(args) -> int:
    started = time.time()
    opts = Options(args)
    spec_text = opts.get("spec")
    if spec_text is None:
        raise ValueError("--spec is required")
    out = opts.get("out")
    if out is None:
        raise ValueError("--out is required")
    out = Path(out)
    ds = generate_union_of_subspaces(_parse_synthetic(spec_text))
    if out.suffix.lower() == ".csv":
        save_csv_matrix(out, ds.X, ds.labels)
    else:
        write_native(out, ds.X, ds.labels)
    manifest = _write_manifest(
        _manifest_path(opts, out), "gen", opts, started,
        dataset=ds, artifacts={"dataset": out},
    )
    _progress(f"wrote {out} and {manifest}")
    return 0


def cmd_convert(args) -> int:
    started = time.time()
    opts = Options(args)
    src = Path(args.src)
    dst = Path(args.dst)
    read_opts = Options(args)
    read_opts._args["input"] = str(src)
    read_opts._args["synthetic"] = None
    ds = _load_dataset(read_opts)
    suffix = dst.suffix.lower()
    if suffix == ".csv":
        save_csv_matrix(dst, ds.X, ds.labels)
    elif suffix in (".bin", ".lrrm", ".native"):
        write_native(dst, ds.X, ds.labels)
    else:
        raise ValueError(f"cannot write format {suffix!r} (use .csv or .bin)")
    manifest = _write_manifest(
        _manifest_path(opts, dst), "convert", opts, started,
        dataset=ds, artifacts={"src": src, "dst": dst},
    )
    _progress(f"wrote {dst} and {manifest}")
    return 0


def cmd_eval(args) -> int:
    started = time.time()
    opts = Options(args)
    pred = read_labels_csv(args.pred)
    truth = read_labels_csv(args.truth)
    acc = clustering_accuracy(pred, truth)
    _write_manifest(
        _manifest_path(opts, Path(args.pred).with_suffix(".eval")),
        "eval", opts, started,
        artifacts={"pred": args.pred, "truth": args.truth},
        extra={"accuracy_pct": acc},
    )
    print(f"accuracy: {acc}")
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML file of flag defaults")
    p.add_argument("--manifest", help="manifest path (default: <out>.manifest.json)")
    p.add_argument("--seed", type=int, help="seed for subsampling (default 0)")
    p.add_argument(
        "--strict", action=argparse.BooleanOptionalAction, default=None,
        help="pin linear algebra to one thread for bit-stable output (default on)",
    )


def _add_dataset(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="dataset file (.csv, native .bin, or IDX)")
    p.add_argument("--labels", help="IDX label file accompanying --input")
    p.add_argument(
        "--labeled-csv", dest="labeled_csv",
        action=argparse.BooleanOptionalAction, default=None,
        help="treat the last CSV row as integer labels",
    )
    p.add_argument("--synthetic", help="generator spec, e.g. m=50,k=5,d=4,pts=20")
    p.add_argument("--subsample", type=int, help="seeded per-class subsample size")
    p.add_argument(
        "--normalize", action=argparse.BooleanOptionalAction, default=None,
        help="scale columns to unit norm before solving",
    )


def _add_solver(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lam", type=float, help="error weight (default 1/sqrt(log n))")
    p.add_argument("--gamma", type=float, help="weight exponent (default 1/3)")
    p.add_argument("--mu0", type=float)
    p.add_argument("--mu-max", dest="mu_max", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--eps1", type=float)
    p.add_argument("--eps2", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--affinity", choices=[m.value for m in AffinityMode])
    p.add_argument("--power", type=int, help="affinity Gram power (default 4)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wlrr",
        description="Low-rank representation subspace clustering toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("cluster", help="solve, build affinity, label samples")
    _add_dataset(p)
    _add_solver(p)
    _add_common(p)
    p.add_argument("--k", type=int, help="number of clusters (required)")
    p.add_argument(
        "--variant", choices=[v.value for v in SolverVariant],
        help="solver (default wnnm-admm)",
    )
    p.add_argument("--pssv-n", dest="pssv_n", type=int,
                   help="protected rank for --variant pssv (default 0)")
    p.add_argument("--out", help="labels CSV path (default labels.csv)")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("sweep", help="rank/accuracy sweep over protected rank N")
    _add_dataset(p)
    _add_solver(p)
    _add_common(p)
    p.add_argument("--k", type=int, help="clusters (default: distinct labels)")
    p.add_argument("--n", help="N values: comma list or start:stop:step")
    p.add_argument("--jobs", type=int, help="parallel solver processes (default 1)")
    p.add_argument("--rank-tol", dest="rank_tol", type=float,
                   help="relative rank threshold (default 1e-4)")
    p.add_argument("--out", help="sweep CSV path (default sweep.csv)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen", help="write a synthetic dataset to file")
    _add_common(p)
    p.add_argument("--spec", help="generator spec, e.g. m=50,k=5,d=4,pts=20,seed=7")
    p.add_argument("--out", help="output path (.csv or native .bin)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("convert", help="convert between IDX, CSV, native binary")
    _add_common(p)
    p.add_argument("src")
    p.add_argument("dst")
    p.add_argument("--labels", help="IDX label file when src is IDX images")
    p.add_argument(
        "--labeled-csv", dest="labeled_csv",
        action=argparse.BooleanOptionalAction, default=None,
        help="treat the last CSV row of src as labels",
    )
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("eval", help="accuracy between two label CSV files")
    _add_common(p)
    p.add_argument("pred")
    p.add_argument("truth")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2
    try:
        opts = Options(args)
        strict = bool(opts.get("strict", True))
        if strict:
            try:
                from threadpoolctl import threadpool_limits
            except ImportError:
                threadpool_limits = None
            if threadpool_limits is not None:
                with threadpool_limits(limits=1):
                    return args.func(args)
        return args.func(args)
    except NumericalError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except DataFormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        filename = getattr(e, "filename", None)
        print(f"error: {e}" + (f" ({filename})" if filename else ""), file=sys.stderr)
        return 3
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
