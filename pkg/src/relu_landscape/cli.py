"""Command-line front end: dataset generation, landscape sweeps, training, theory checks.

Every run writes its outputs next to a ``manifest.json`` holding the resolved
configuration, master seed, and tool version; re-running the recorded command
reproduces every file byte for byte.  Exit codes: 0 success, 1 numerical
failure (divergence or an uncertified solve), 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._seeds import stream
from .arrangement import cover_count
from .conic import global_optimum
from .data import (Dataset, DatasetKind, gen_assumption1,
                   gen_gaussian_teacher, gen_orthogonal, load_dataset,
                   random_teacher, save_dataset)
from .flow import InitMode, TrainConfig, series_to_csv, train
from .landscape import (SamplingStrategy, StatsConfig, estimate_proportions,
                        stats_to_csv, theorem1_m_threshold, theorem3_fraction)
from .theory import (BoundReport, gamma_and_T1, init_probability,
                     lemma_d3_check, make_theory_context, proposition1_check,
                     rank2_construction, reports_to_csv,
                     theorem3_lambda_threshold, theta_family_loss)

USAGE_ERROR = 2
NUMERICAL_ERROR = 1


class UsageError(Exception):
    pass


def _parse_alpha_token(tok: str) -> float:
    tok = tok.strip()
    if "^" in tok:
        base, exp = tok.split("^")
        return float(base) ** float(exp)
    return float(tok)


def parse_alpha_grid(spec: str):
    """Comma list of scales; ``a..b`` fills a geometric power-of-two range."""
    out = []
    for part in spec.split(","):
        part = part.strip()
        if ".." in part:
            lo_s, hi_s = part.split("..")
            lo, hi = _parse_alpha_token(lo_s), _parse_alpha_token(hi_s)
            step = 0.5 if lo > hi else 2.0
            v = lo
            while (v >= hi - 1e-300) if step < 1 else (v <= hi + 1e-300):
                out.append(v)
                v *= step
        elif part:
            out.append(_parse_alpha_token(part))
    if not out:
        raise UsageError(f"empty alpha grid: {spec!r}")
    return out


def _load_config_file(path: str) -> dict:
    cfg = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"bad config line: {line!r}")
        k, v = line.split("=", 1)
        cfg[k.strip()] = v.strip()
    return cfg


def _merge_config(args: argparse.Namespace, parser_defaults: dict) -> dict:
    """Resolve options: explicit flag > config file > built-in default."""
    resolved = dict(vars(args))
    cfg_path = resolved.pop("config", None)
    if cfg_path:
        file_cfg = _load_config_file(cfg_path)
        for key, raw in file_cfg.items():
            dest = key.replace("-", "_")
            if dest not in resolved:
                raise UsageError(f"unknown config key: {key!r}")
            if resolved[dest] is None:
                resolved[dest] = raw
    for dest, default in parser_defaults.items():
        if resolved.get(dest) is None:
            resolved[dest] = default
    return resolved


def _write_manifest(out: Path, subcommand: str, resolved: dict, outputs: list):
    clean = {k: (v if isinstance(v, (int, float, str, bool, list, type(None)))
                 else str(v)) for k, v in resolved.items()}
    manifest = {
        "subcommand": subcommand,
        "config": clean,
        "master_seed": clean.get("seed"),
        "version": __version__,
        "outputs": [str(p) for p in outputs],
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _make_dataset(resolved: dict, seed: int) -> Dataset:
    kind = resolved["kind"]
    if kind is None:
        raise UsageError("either --dataset or --kind is required")
    kind = DatasetKind(kind)
    if kind is DatasetKind.GAUSSIAN_TEACHER:
        if resolved["n"] is None or resolved["d"] is None:
            raise UsageError("--n and --d are required for gaussian-teacher data")
        return gen_gaussian_teacher(int(resolved["n"]), int(resolved["d"]),
                                    int(resolved["teacher_width"]), seed)
    if kind is DatasetKind.ORTHOGONAL:
        if resolved["n"] is None or resolved["d"] is None:
            raise UsageError("--n and --d are required for orthogonal data")
        rng = stream(seed, "teacher")
        labeler = random_teacher(int(resolved["d"]), int(resolved["teacher_width"]), rng)
        return gen_orthogonal(int(resolved["n"]), int(resolved["d"]), labeler, seed)
    if resolved["d"] is None:
        raise UsageError("--d is required for assumption1 data")
    return gen_assumption1(int(resolved["d"]), float(resolved["eta"]),
                           float(resolved["noise_std"]), seed)


def _dataset_source(resolved: dict):
    """Returns dataset_gen(seed) plus a replicate-invariance flag."""
    if resolved.get("dataset"):
        ds = load_dataset(resolved["dataset"])
        return (lambda seed: ds), True
    return (lambda seed: _make_dataset(resolved, seed)), False


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

GEN_DEFAULTS = dict(teacher_width=10, eta=1e-3, noise_std=1e-3, out="out-gen-data")


def cmd_gen_data(resolved: dict) -> int:
    out = Path(resolved["out"])
    out.mkdir(parents=True, exist_ok=True)
    if resolved["seed"] is None:
        raise UsageError("--seed is required")
    seed = int(resolved["seed"])
    ds = _make_dataset(resolved, seed)
    path = out / "dataset.csv"
    save_dataset(ds, path)
    _write_manifest(out, "gen-data", resolved, [path])
    print(f"wrote {path} ({ds.n} points in R^{ds.d}, kind={ds.kind.value})")
    return 0


LANDSCAPE_DEFAULTS = dict(lam=0.01, cones=100, replicates=5, strategy="uniform",
                          seed=0, teacher_width=10, eta=1e-3, noise_std=1e-3,
                          out="out-landscape")


def cmd_landscape(resolved: dict) -> int:
    out = Path(resolved["out"])
    out.mkdir(parents=True, exist_ok=True)
    if resolved["m_grid"] is None:
        raise UsageError("--m-grid is required")
    m_grid = [int(tok) for tok in str(resolved["m_grid"]).split(",") if tok.strip()]
    dataset_gen, fixed = _dataset_source(resolved)
    probe = dataset_gen(0)
    cfg = StatsConfig(m_grid=tuple(m_grid), lam=float(resolved["lam"]),
                      num_cones=int(resolved["cones"]),
                      num_datasets=int(resolved["replicates"]),
                      strategy=SamplingStrategy(resolved["strategy"]),
                      master_seed=int(resolved["seed"]))
    stats = estimate_proportions(cfg, dataset_gen)
    qline = f"# cover_count={cover_count(probe.n, probe.d)}\n"
    path = out / "proportions.csv"
    path.write_text(qline + stats_to_csv(stats))
    _write_manifest(out, "landscape", resolved, [path])
    print(f"wrote {path}; flagged={stats.flagged} infeasible={stats.infeasible}")
    return NUMERICAL_ERROR if stats.flagged else 0


TRAIN_DEFAULTS = dict(lam=1e-5, lr=0.01, width=100, max_epochs=1e8,
                      replicates=5, seed=0, grad_sq_stop=1e-16,
                      init_mode="gaussian-balanced", teacher_width=10,
                      eta=1e-3, noise_std=1e-3, out="out-train")


def _fmt_alpha(alpha: float) -> str:
    return format(alpha, ".10g")


def cmd_train(resolved: dict) -> int:
    out = Path(resolved["out"])
    out.mkdir(parents=True, exist_ok=True)
    if resolved["alpha_grid"] is None:
        raise UsageError("--alpha-grid is required")
    alphas = parse_alpha_grid(str(resolved["alpha_grid"]))
    replicates = int(resolved["replicates"])
    master = int(resolved["seed"])
    dataset_gen, fixed = _dataset_source(resolved)

    outputs = []
    failures = 0
    sizes = {a: [] for a in alphas}
    dists = {a: [] for a in alphas}
    dir_series = {a: [] for a in alphas}

    for rep in range(replicates):
        ds_seed = int(stream(master, "train-data", rep).integers(2 ** 63))
        ds = dataset_gen(ds_seed)
        gopt = global_optimum(ds, float(resolved["lam"]))
        for a_i, alpha in enumerate(alphas):
            run_seed = int(stream(master, "train-init", rep, a_i).integers(2 ** 63))
            cfg = TrainConfig(alpha=alpha, lam=float(resolved["lam"]),
                              lr=float(resolved["lr"]), width=int(resolved["width"]),
                              max_epochs=int(float(resolved["max_epochs"])),
                              grad_sq_stop=float(resolved["grad_sq_stop"]),
                              seed=run_seed,
                              init_mode=InitMode(resolved["init_mode"]))
            res = train(cfg, ds, gopt.objective_value)
            if res.diverged:
                failures += 1
            path = out / f"run_alpha_{_fmt_alpha(alpha)}_rep{rep}.csv"
            path.write_text(series_to_csv(res))
            outputs.append(path)
            sizes[alpha].append(res.theta_sq_norm)
            dists[alpha].append(max(res.gap, 0.0))
            dir_series[alpha].append((res.series["epoch"].astype(int),
                                      res.series["num_pos_neurons"]))

    def agg_csv(name, col, data):
        lines = [f"alpha,{col}_mean,{col}_min,{col}_max"]
        for a in alphas:
            v = np.array(data[a])
            lines.append(f"{_fmt_alpha(a)},{v.mean():.17g},{v.min():.17g},{v.max():.17g}")
        path = out / name
        path.write_text("\n".join(lines) + "\n")
        outputs.append(path)

    agg_csv("network_sizes.csv", "net_size", sizes)
    agg_csv("loss_distances.csv", "reg_loss_distance", dists)

    for a in alphas:
        runs = dir_series[a]
        common = set(runs[0][0])
        for ep, _ in runs[1:]:
            common &= set(ep)
        common = np.array(sorted(common))
        means = np.zeros(len(common))
        for ep, vals in runs:
            lookup = {int(e): v for e, v in zip(ep, vals)}
            means += np.array([lookup[int(e)] for e in common])
        means /= len(runs)
        lines = ["epoch,num_pos_neurons_mean"]
        lines += [f"{int(e)},{mu:.17g}" for e, mu in zip(common, means)]
        path = out / f"neuron_number_alpha_{_fmt_alpha(a)}.csv"
        path.write_text("\n".join(lines) + "\n")
        outputs.append(path)

    _write_manifest(out, "train", resolved, outputs)
    print(f"wrote {len(outputs)} files to {out}; diverged={failures}")
    return NUMERICAL_ERROR if failures else 0


THEORY_DEFAULTS = dict(lam=1e-5, seed=0, trials=20000, width=20,
                       teacher_width=10, eta=1e-3, noise_std=1e-3,
                       out="out-theory")


def cmd_theory(resolved: dict) -> int:
    out = Path(resolved["out"])
    out.mkdir(parents=True, exist_ok=True)
    if resolved.get("dataset"):
        ds = load_dataset(resolved["dataset"])
    else:
        if resolved["seed"] is None:
            raise UsageError("--seed is required without --dataset")
        ds = _make_dataset(resolved, int(resolved["seed"]))
    lam = float(resolved["lam"])
    reports: list[BoundReport] = []

    if ds.kind is DatasetKind.ASSUMPTION1:
        ctx = make_theory_context(ds, lam)
        reports += proposition1_check(ctx)
        from .theory import compute_u_star
        us = compute_u_star(ctx.H, ctx.v_star, lam)
        reports.append(BoundReport("ustar-alignment-residual", 1e-10,
                                   us.align_residual, us.align_residual <= 1e-10))
        reports.append(BoundReport("ustar-norm-residual", 1e-10,
                                   us.norm_residual, us.norm_residual <= 1e-10))
        rng = stream(int(resolved["seed"]), "splits")
        vals = []
        for _ in range(5):
            w = rng.random(5)
            splits = w / w.sum() * np.linalg.norm(ctx.u_star)
            vals.append(theta_family_loss(ctx.u_star, splits, ds, lam))
        spread = float(np.ptp(vals)) if vals else 0.0
        close = abs(np.mean(vals) - ctx.L_lambda_star)
        reports.append(BoundReport("rank1-family-loss-invariance", 1e-10,
                                   max(spread, close), max(spread, close) <= 1e-10))
        _, r2 = rank2_construction(ctx)
        reports.append(r2)
        rng = stream(int(resolved["seed"]), "init-mc")
        reports.append(init_probability(int(resolved["width"]),
                                        int(resolved["trials"]), ds, rng))
        gamma, t1 = gamma_and_T1(ds, alpha=0.5, epsilon=0.5)
        reports.append(BoundReport("alignment-time-positive", 0.0, t1, t1 > 0.0,
                                   note=f"gamma_norm={np.linalg.norm(gamma):.6g}"))
    elif ds.kind is DatasetKind.ORTHOGONAL:
        thr = theorem3_lambda_threshold(ds)
        reports.append(BoundReport("fraction-bound-lambda-threshold", 0.0, thr,
                                   thr > 0.0))
        gopt = global_optimum(ds, lam)
        from .conic import SolveStatus, recover_network
        if gopt.status is SolveStatus.OPTIMAL:
            reports.append(lemma_d3_check(ds, lam, recover_network(gopt)))
        else:
            reports.append(BoundReport("nonzero-outputs", 0.0, None, False,
                                       note="global solve not certified"))
        p = int((ds.labels > 0).sum())
        q = int((ds.labels < 0).sum())
        for m in (1, 16, 256):
            ub, exact = theorem3_fraction(p, q, m, with_signs=True)
            reports.append(BoundReport(f"fraction-bound-m{m}", min(1.0, ub), exact,
                                       exact <= min(1.0, ub) + 1e-12))
    else:
        raise UsageError("theory checks need assumption1 or orthogonal data")

    thr_m = theorem1_m_threshold(ds.n, ds.d, 0.1)
    reports.append(BoundReport("coupon-width-threshold-eps0.1", float(thr_m),
                               None, True, note="sufficient width"))

    path = out / "theory_report.csv"
    path.write_text(reports_to_csv(reports))
    _write_manifest(out, "theory", resolved, [path])
    for r in reports:
        emp = "-" if r.empirical_value is None else f"{r.empirical_value:.6g}"
        print(f"[{'ok' if r.satisfied else 'FAIL'}] {r.name}: bound={r.bound_value:.6g} "
              f"empirical={emp} {r.note}")
    return 0 if all(r.satisfied for r in reports) else NUMERICAL_ERROR


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common_data_flags(p: argparse.ArgumentParser):
    p.add_argument("--dataset", help="load a dataset CSV instead of generating")
    p.add_argument("--kind", choices=[k.value for k in DatasetKind])
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--teacher-width", type=int, dest="teacher_width")
    p.add_argument("--eta", type=float)
    p.add_argument("--noise-std", type=float, dest="noise_std")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="relu-landscape",
                                 description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="subcommand", required=True)

    g = sub.add_parser("gen-data", help="generate a dataset CSV")
    _add_common_data_flags(g)
    g.add_argument("--seed", type=int)
    g.add_argument("--out")
    g.add_argument("--config")

    l = sub.add_parser("landscape", help="cone-classification sweep over widths")
    _add_common_data_flags(l)
    l.add_argument("--lambda", type=float, dest="lam")
    l.add_argument("--m-grid", dest="m_grid")
    l.add_argument("--cones", type=int)
    l.add_argument("--replicates", type=int)
    l.add_argument("--strategy", choices=[s.value for s in SamplingStrategy])
    l.add_argument("--seed", type=int)
    l.add_argument("--out")
    l.add_argument("--config")

    t = sub.add_parser("train", help="gradient-descent runs over an alpha grid")
    _add_common_data_flags(t)
    t.add_argument("--alpha-grid", dest="alpha_grid")
    t.add_argument("--lambda", type=float, dest="lam")
    t.add_argument("--lr", type=float)
    t.add_argument("--width", type=int)
    t.add_argument("--max-epochs", dest="max_epochs")
    t.add_argument("--grad-sq-stop", type=float, dest="grad_sq_stop")
    t.add_argument("--replicates", type=int)
    t.add_argument("--init-mode", dest="init_mode",
                   choices=[m.value for m in InitMode])
    t.add_argument("--seed", type=int)
    t.add_argument("--out")
    t.add_argument("--config")

    th = sub.add_parser("theory", help="closed-form checks and bound evaluations")
    _add_common_data_flags(th)
    th.add_argument("--lambda", type=float, dest="lam")
    th.add_argument("--trials", type=int)
    th.add_argument("--width", type=int)
    th.add_argument("--seed", type=int)
    th.add_argument("--out")
    th.add_argument("--config")
    return ap


DEFAULTS = {
    "gen-data": GEN_DEFAULTS,
    "landscape": LANDSCAPE_DEFAULTS,
    "train": TRAIN_DEFAULTS,
    "theory": THEORY_DEFAULTS,
}

HANDLERS = {
    "gen-data": cmd_gen_data,
    "landscape": cmd_landscape,
    "train": cmd_train,
    "theory": cmd_theory,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else USAGE_ERROR
    try:
        resolved = _merge_config(args, DEFAULTS[args.subcommand])
        return HANDLERS[args.subcommand](resolved)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except FloatingPointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
