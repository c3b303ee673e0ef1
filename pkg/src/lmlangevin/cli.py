"""Batch command-line front-end.

Subcommands: sample, compare, stationarity, convergence, hessian-error,
bench.  Every command reads one JSON config (validated in full before any
computation), writes CSV data plus a meta.json summary into --out, and embeds
the canonical config hash and seed in every file.  Reruns with the same
config and seed are byte-identical except for the meta.json "timing" object,
regardless of --threads.

Exit codes: 0 success, 2 invalid config, 3 numeric or I/O failure while
running, 4 threshold violated under --assert.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import rng as _rng
from .config import (
    COMMAND_SCHEMAS,
    COMPARE_VARIANTS,
    DEFAULT_GEOMETRY_GRID,
    ConfigError,
    build_geometry,
    build_oracle,
    build_schedule,
    config_hash,
    validate_config,
)
from .diagnostics import (
    DiagnosticsReport,
    bound_check,
    chi2_gaussians,
    chi2_histogram,
    decay_fit,
    equal_mass_edges,
    ks_statistic,
    overhead_benchmark,
    sliced_wasserstein,
)
from .geometry import DampedGeometryConfig, DegenerateDirectionError
from .samplers import (
    DampingTooSmallError,
    FixedLevelConfig,
    NotLogConcaveError,
    SamplerConfig,
    annealed_langevin_sample,
    fixed_level_run,
    lml_sample,
)

__all__ = ["main"]

_COMMANDS = ("sample", "compare", "stationarity", "convergence", "hessian-error", "bench")


# ---------------------------------------------------------------------------
# small output helpers


def _f(x) -> str:
    """Deterministic float formatting for CSV cells."""
    return format(float(x), ".17g")


def _comment(chash: str, seed: int, **extra) -> str:
    parts = [f"# config_hash={chash}", f"seed={seed}"]
    parts += [f"{k}={_f(v)}" for k, v in extra.items() if v is not None]
    return " ".join(parts)


def _write_csv(path: Path, comment: str, header: list, rows: list) -> None:
    lines = [comment, ",".join(header)]
    lines += [",".join(cells) for cells in rows]
    path.write_text("\n".join(lines) + "\n")


def _write_meta(path: Path, report: DiagnosticsReport, timing: dict) -> None:
    doc = report.as_dict()
    doc["timing"] = timing  # the one rerun-variable section
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


# ---------------------------------------------------------------------------
# defaults: materialized into the document before hashing, so spelled-out
# defaults and omitted keys produce the same effective config and hash


def _setdefaults(block: dict, **defaults) -> dict:
    for key, val in defaults.items():
        block.setdefault(key, val)
    return block


def _apply_defaults(command: str, doc: dict) -> dict:
    if command == "sample":
        _setdefaults(
            doc["sampler"], order=1, geometry=None, chains=1, seed=0, eps_clip=1e-3, dtype="float64"
        )
        geo = doc["sampler"]["geometry"]
        if geo is not None:
            _setdefaults(geo, kappa=1e-8)
        _setdefaults(doc.setdefault("diagnostics", {}), n_projections=64)
    elif command == "compare":
        _setdefaults(
            doc,
            variants=list(COMPARE_VARIANTS),
            geometry_grid=[dict(g) for g in DEFAULT_GEOMETRY_GRID],
            eps_clip=1e-3,
        )
        for item in doc["geometry_grid"]:
            _setdefaults(item, kappa=1e-8)
        _setdefaults(doc.setdefault("annealed", {}), inner_steps=1, step_scale=0.1)
        _setdefaults(doc.setdefault("diagnostics", {}), n_projections=64)
        _setdefaults(doc.setdefault("assert", {}), lml_not_worse=True)
    elif command == "stationarity":
        _setdefaults(doc, lam=0.0, burn_in=0, seed=0, histogram_bins=64)
        _setdefaults(doc.setdefault("init", {}), mean=0.0, std=1.0)
        _setdefaults(doc.setdefault("assert", {}), ks_max=0.02)
    elif command == "convergence":
        _setdefaults(doc, seed=0, snapshot_every=max(1, doc["n_steps"] // 200), fit_window=[3e-3, 0.2])
        _setdefaults(doc.setdefault("init", {}), mean=0.5, std=1.0)
        _setdefaults(doc.setdefault("assert", {}), rate_rel_tol=0.15, r2_min=0.95)
    elif command == "hessian-error":
        _setdefaults(doc, fd_step=1e-4, seed=0)
        _setdefaults(doc.setdefault("assert", {}), max_violations=0)
    elif command == "bench":
        _setdefaults(doc, reps=200, seed=0)
        _setdefaults(doc.setdefault("assert", {}), ratio_max=1.05)
    return doc


def _apply_seed_override(command: str, doc: dict, seed) -> dict:
    if seed is None:
        return doc
    if command == "sample":
        doc["sampler"]["seed"] = seed
    elif command == "compare":
        doc["seeds"] = [seed + i for i in range(len(doc["seeds"]))]
    else:
        doc["seed"] = seed
    return doc


# ---------------------------------------------------------------------------
# semantic checks beyond the schema (still config errors, still pre-compute)


def _build_context(command: str, doc: dict) -> dict:
    ctx = {}
    if command == "bench":
        return ctx
    ctx["schedule"] = build_schedule(doc["schedule"])
    ctx["oracle"] = build_oracle(doc["oracle"], ctx["schedule"])
    try:
        if command in ("stationarity", "convergence"):
            ctx["schedule"].alpha_sigma(doc["t"])
        if command == "hessian-error":
            for t in doc["ts"]:
                ctx["schedule"].alpha_sigma(t)
    except ValueError as exc:
        raise ConfigError(f"config: time out of schedule range: {exc}") from exc
    if command in ("stationarity", "convergence") and ctx["oracle"].dim != 1:
        raise ConfigError(f"config.oracle: {command} needs a 1-d oracle (got dim={ctx['oracle'].dim})")
    if command == "convergence":
        variant = doc["variant"]
        if variant == "damped-lm" and any(l == 0.0 for l in doc["lams"]):
            raise ConfigError("config.lams: damped-lm requires every lam > 0")
        if variant in ("newton", "plain-langevin") and any(l != 0.0 for l in doc["lams"]):
            raise ConfigError(f"config.lams: {variant} takes no damping; use lams=[0]")
        lo, hi = doc["fit_window"]
        if not lo < hi:
            raise ConfigError("config.fit_window: must be [low, high] with low < high")
    if command == "stationarity" and doc["variant"] == "damped-lm" and doc["lam"] == 0.0:
        raise ConfigError("config.lam: damped-lm requires lam > 0")
    if command == "compare":
        inner = doc["annealed"]["inner_steps"]
        if "annealed" in doc["variants"] and min(doc["nfe"]) < inner:
            raise ConfigError(
                f"config.nfe: smallest NFE {min(doc['nfe'])} cannot fund one annealed level "
                f"of {inner} inner steps"
            )
    if command == "sample":
        try:
            ctx["sampler_config"] = SamplerConfig(
                n_steps=doc["sampler"]["n_steps"],
                solver_order=doc["sampler"]["order"],
                geometry=build_geometry(doc["sampler"]["geometry"]),
                schedule=ctx["schedule"],
                seed=doc["sampler"]["seed"],
                chains=doc["sampler"]["chains"],
                eps_clip=doc["sampler"]["eps_clip"],
                dtype=doc["sampler"]["dtype"],
            )
        except ValueError as exc:
            raise ConfigError(f"config.sampler: {exc}") from exc
    return ctx


# ---------------------------------------------------------------------------
# commands


def _cmd_sample(doc, ctx, chash, out: Path, threads: int, do_assert: bool) -> int:
    scfg = ctx["sampler_config"]
    oracle = ctx["oracle"]
    tic = time.perf_counter()
    run = lml_sample(scfg, oracle, threads=threads)
    total = time.perf_counter() - tic
    finals = np.atleast_2d(run.final_states)

    header = ["chain_id"] + [f"x{j}" for j in range(oracle.dim)]
    rows = [[str(i)] + [_f(v) for v in row] for i, row in enumerate(finals)]
    geo = scfg.geometry
    lam = None if geo is None else geo.lam
    kappa = None if geo is None else geo.kappa
    _write_csv(out / "samples.csv", _comment(chash, scfg.seed, lam=lam, kappa=kappa), header, rows)

    diag = doc["diagnostics"]
    truth = oracle.sample_data(_rng.stream(scfg.seed, _rng.GT_STREAM_OFFSET), scfg.chains)
    sw2 = sliced_wasserstein(
        finals, truth, diag["n_projections"], _rng.stream(scfg.seed, _rng.PROJ_STREAM_OFFSET)
    )
    report = DiagnosticsReport(
        command="sample",
        config_hash=chash,
        seed=scfg.seed,
        metrics={"sw2_to_truth": sw2},
        extra={
            "lam": lam,
            "kappa": kappa,
            "n_steps": scfg.n_steps,
            "order": scfg.solver_order,
            "chains": scfg.chains,
            "dtype": scfg.dtype,
            "files": ["samples.csv"],
        },
    )
    _write_meta(out / "meta.json", report, {"total_s": total, "per_step_s": list(run.step_times)})
    return 0


def _compare_run(variant, geo, nfe, seed, doc, ctx, threads):
    """Final states of one (variant, geometry, nfe, seed) cell."""
    schedule, oracle = ctx["schedule"], ctx["oracle"]
    if variant == "annealed":
        ann = doc["annealed"]
        levels = nfe // ann["inner_steps"]
        scfg = SamplerConfig(
            n_steps=levels, solver_order=1, geometry=None, schedule=schedule,
            seed=seed, chains=doc["chains"], eps_clip=doc["eps_clip"],
        )
        return annealed_langevin_sample(
            scfg, oracle, ann["inner_steps"], ann["step_scale"], threads=threads
        ).final_states
    order = 1 if variant.endswith("o1") else 2
    scfg = SamplerConfig(
        n_steps=nfe, solver_order=order, geometry=geo, schedule=schedule,
        seed=seed, chains=doc["chains"], eps_clip=doc["eps_clip"],
    )
    return lml_sample(scfg, oracle, threads=threads).final_states


def _cmd_compare(doc, ctx, chash, out: Path, threads: int, do_assert: bool) -> int:
    oracle = ctx["oracle"]
    nfe_list, seeds, variants = doc["nfe"], doc["seeds"], doc["variants"]
    n_proj = doc["diagnostics"]["n_projections"]
    tic = time.perf_counter()

    truths = {s: oracle.sample_data(_rng.stream(s, _rng.GT_STREAM_OFFSET), doc["chains"]) for s in seeds}

    rows = []  # (variant, lam, kappa, {nfe: (mean, stderr)})
    plan = []
    for variant in variants:
        if variant.startswith("LML"):
            plan += [(variant, dict(g)) for g in doc["geometry_grid"]]
        else:
            plan.append((variant, None))
    for variant, gdict in plan:
        geo = None if gdict is None else DampedGeometryConfig(lam=gdict["lam"], kappa=gdict["kappa"])
        cells = {}
        for nfe in nfe_list:
            vals = np.array(
                [
                    sliced_wasserstein(
                        _compare_run(variant, geo, nfe, s, doc, ctx, threads),
                        truths[s],
                        n_proj,
                        _rng.stream(s, _rng.PROJ_STREAM_OFFSET),
                    )
                    for s in seeds
                ]
            )
            stderr = 0.0 if vals.size < 2 else float(vals.std(ddof=1) / np.sqrt(vals.size))
            cells[nfe] = (float(vals.mean()), stderr)
        rows.append((variant, gdict, cells))

    header = ["variant", "lam", "kappa"]
    for nfe in nfe_list:
        header += [f"mean_nfe{nfe}", f"stderr_nfe{nfe}"]
    csv_rows = []
    for variant, gdict, cells in rows:
        cell = [variant]
        cell += ["", ""] if gdict is None else [_f(gdict["lam"]), _f(gdict["kappa"])]
        for nfe in nfe_list:
            cell += [_f(cells[nfe][0]), _f(cells[nfe][1])]
        csv_rows.append(cell)
    _write_csv(out / "compare.csv", _comment(chash, seeds[0]), header, csv_rows)

    # For each solver order present as both guided and baseline rows: does
    # some grid point match-or-beat the baseline at every NFE?
    dominating = {}
    failed_orders = []
    for order in (1, 2):
        base_name, lml_name = f"baseline-o{order}", f"LML-o{order}"
        if base_name not in variants or lml_name not in variants:
            continue
        base_cells = next(c for v, g, c in rows if v == base_name)
        winners = [
            g
            for v, g, c in rows
            if v == lml_name and all(c[nfe][0] <= base_cells[nfe][0] for nfe in nfe_list)
        ]
        dominating[f"o{order}"] = winners
        if not winners:
            failed_orders.append(order)

    report = DiagnosticsReport(
        command="compare",
        config_hash=chash,
        seed=seeds[0],
        extra={
            "seeds": list(seeds),
            "nfe": list(nfe_list),
            "chains": doc["chains"],
            "dominating_combos": dominating,
            "files": ["compare.csv"],
        },
    )
    _write_meta(out / "meta.json", report, {"total_s": time.perf_counter() - tic})

    if do_assert and doc["assert"]["lml_not_worse"] and failed_orders:
        print(
            f"assert failed: no (lam, kappa) matches or beats baseline at every NFE "
            f"for order(s) {failed_orders}",
            file=sys.stderr,
        )
        return 4
    return 0


def _fixed_cfg(doc, lam: float, snapshot_every) -> FixedLevelConfig:
    return FixedLevelConfig(
        t=doc["t"],
        h=doc["h"],
        n_steps=doc["n_steps"],
        variant=doc["variant"],
        lam=lam,
        chains=doc["chains"],
        burn_in=doc["burn_in"] if "burn_in" in doc else 0,
        snapshot_every=snapshot_every,
        init_mean=doc["init"]["mean"],
        init_std=doc["init"]["std"],
        seed=doc["seed"],
    )


def _cmd_stationarity(doc, ctx, chash, out: Path, threads: int, do_assert: bool) -> int:
    oracle = ctx["oracle"]
    t = doc["t"]
    tic = time.perf_counter()
    run = fixed_level_run(_fixed_cfg(doc, doc["lam"], None), oracle, threads=threads)
    retained = run.final_states[:, 0]

    ks = ks_statistic(retained, lambda x: oracle.marginal_cdf(x, t))

    bins = doc["histogram_bins"]
    edges = equal_mass_edges(lambda q: oracle.marginal_quantile(q, t), bins)
    counts = np.bincount(np.searchsorted(edges, retained), minlength=bins)
    left = np.concatenate(([-np.inf], edges))
    right = np.concatenate((edges, [np.inf]))
    rows = [
        [str(b), _f(left[b]), _f(right[b]), _f(counts[b] / retained.size), _f(1.0 / bins)]
        for b in range(bins)
    ]
    comment = _comment(chash, doc["seed"], lam=doc["lam"], t=t)
    _write_csv(out / "histogram.csv", comment, ["bin", "left", "right", "observed", "expected"], rows)

    report = DiagnosticsReport(
        command="stationarity",
        config_hash=chash,
        seed=doc["seed"],
        metrics={"ks": ks},
        extra={
            "variant": doc["variant"],
            "lam": doc["lam"],
            "t": t,
            "h": doc["h"],
            "n_steps": doc["n_steps"],
            "retained": int(retained.size),
            "files": ["histogram.csv"],
        },
    )
    _write_meta(out / "meta.json", report, {"total_s": time.perf_counter() - tic})

    if do_assert and ks > doc["assert"]["ks_max"]:
        print(f"assert failed: ks={ks:.5f} > {doc['assert']['ks_max']}", file=sys.stderr)
        return 4
    return 0


def _gaussian_chi2_stderr(m: float, s: float, m2: float, s2: float, n: int) -> float:
    """Delta-method stderr of the fitted-moment chi-square estimate."""
    dm = (chi2_gaussians(m + 1e-6, s, m2, s2) - chi2_gaussians(m - 1e-6, s, m2, s2)) / 2e-6
    ds = (chi2_gaussians(m, s + 1e-6, m2, s2) - chi2_gaussians(m, s - 1e-6, m2, s2)) / 2e-6
    return float(np.sqrt(dm * dm * s * s / n + ds * ds * s * s / (2.0 * n)))


def _histogram_chi2_stderr(p_hat: np.ndarray, n: int) -> float:
    """Delta-method stderr of the binned chi-square under multinomial counts."""
    bins = p_hat.size
    g = 2.0 * (p_hat - 1.0 / bins) * bins
    quad = float(np.sum(g * g * p_hat) - (g @ p_hat) ** 2)
    return float(np.sqrt(max(quad, 0.0) / n))


def _reference_rate(variant: str, lam: float, sigma: float):
    if variant in ("damped-exact", "damped-exact-corrected"):
        return 2.0 / (1.0 + lam * sigma * sigma)
    if variant == "newton":
        return 2.0
    if variant == "plain-langevin":
        return 2.0 / (sigma * sigma)
    return None  # damped-lm: state-dependent preconditioner, no closed form


def _cmd_convergence(doc, ctx, chash, out: Path, threads: int, do_assert: bool) -> int:
    oracle = ctx["oracle"]
    t = doc["t"]
    alpha, sigma = (float(v) for v in oracle.schedule.alpha_sigma(t))
    single = oracle.n_components == 1
    lo, hi = doc["fit_window"]
    tic = time.perf_counter()

    if not single:
        edges = equal_mass_edges(lambda q: oracle.marginal_quantile(q, t), 64)

    files = []
    metrics = {}
    details = []
    ok = True
    for li, lam in enumerate(doc["lams"]):
        run = fixed_level_run(_fixed_cfg(doc, lam, doc["snapshot_every"]), oracle, threads=threads)
        times = run.times
        vals = np.empty(times.size)
        errs = np.empty(times.size)
        for k in range(times.size):
            samples = run.states[k, :, 0]
            if single:
                m_hat, s_hat = float(samples.mean()), float(samples.std(ddof=1))
                vals[k] = chi2_gaussians(m_hat, s_hat, alpha * float(oracle.centers[0, 0]), sigma)
                errs[k] = _gaussian_chi2_stderr(m_hat, s_hat, alpha * float(oracle.centers[0, 0]), sigma, samples.size)
            else:
                # Histogram estimate: biased, trend-only; fine inside the fit window.
                counts = np.bincount(np.searchsorted(edges, samples), minlength=64)
                p_hat = counts / samples.size
                vals[k] = chi2_histogram(samples, edges)
                errs[k] = _histogram_chi2_stderr(p_hat, samples.size)

        name = f"convergence_lam{li}.csv"
        files.append(name)
        rows = [[_f(times[k]), _f(vals[k]), _f(errs[k])] for k in range(times.size)]
        _write_csv(out / name, _comment(chash, doc["seed"], lam=lam, t=t), ["time", "value", "stderr"], rows)

        sel = (vals >= lo) & (vals <= hi) & (times > 0.0)
        if int(sel.sum()) < 3:
            raise ValueError(
                f"lam={lam:g}: only {int(sel.sum())} snapshots fall in the chi-square fit window "
                f"[{lo:g}, {hi:g}]; adjust n_steps/snapshot_every/init"
            )
        fit = decay_fit(times[sel], vals[sel])
        fitted = -fit.rate
        ref = _reference_rate(doc["variant"], lam, sigma)
        metrics[f"rate_lam{li}"] = fitted
        detail = {
            "lam": lam,
            "fitted_rate": fitted,
            "reference_rate": ref,
            "r_squared": fit.r_squared,
            "n_fit_points": int(sel.sum()),
            "file": name,
        }
        details.append(detail)
        if ref is not None and abs(fitted - ref) / ref > doc["assert"]["rate_rel_tol"]:
            ok = False
        if fit.r_squared < doc["assert"]["r2_min"]:
            ok = False

    report = DiagnosticsReport(
        command="convergence",
        config_hash=chash,
        seed=doc["seed"],
        metrics=metrics,
        extra={"variant": doc["variant"], "t": t, "h": doc["h"], "per_lam": details, "files": files},
    )
    _write_meta(out / "meta.json", report, {"total_s": time.perf_counter() - tic})

    if do_assert and not ok:
        print("assert failed: fitted rate or fit quality outside tolerance; see meta.json", file=sys.stderr)
        return 4
    return 0


def _cmd_hessian_error(doc, ctx, chash, out: Path, threads: int, do_assert: bool) -> int:
    oracle = ctx["oracle"]
    tic = time.perf_counter()
    rows = []
    per_t = []
    violations = 0
    for ti, t in enumerate(doc["ts"]):
        xs = oracle.sample_diffused(_rng.stream(doc["seed"], ti), doc["n_points"], t)
        res = bound_check(oracle, t, xs, fd_step=doc["fd_step"])
        violations += res.violations
        for j, emp in enumerate(res.empirical):
            rows.append([_f(t), str(j), _f(emp), _f(res.bound)])
        per_t.append(
            {
                "t": t,
                "bound": res.bound,
                "max_empirical": float(res.empirical.max()),
                "delta1": res.inputs.delta1,
                "delta3": res.inputs.delta3,
                "violations": res.violations,
            }
        )
    _write_csv(
        out / "bound_check.csv",
        _comment(chash, doc["seed"]),
        ["t", "point", "empirical", "bound"],
        rows,
    )
    report = DiagnosticsReport(
        command="hessian-error",
        config_hash=chash,
        seed=doc["seed"],
        metrics={"violations": float(violations)},
        extra={"per_t": per_t, "n_points": doc["n_points"], "files": ["bound_check.csv"]},
    )
    _write_meta(out / "meta.json", report, {"total_s": time.perf_counter() - tic})
    if do_assert and violations > doc["assert"]["max_violations"]:
        print(f"assert failed: {violations} bound violations", file=sys.stderr)
        return 4
    return 0


def _cmd_bench(doc, ctx, chash, out: Path, threads: int, do_assert: bool) -> int:
    res = overhead_benchmark(d=doc["d"], reps=doc["reps"], seed=doc["seed"])
    report = DiagnosticsReport(
        command="bench",
        config_hash=chash,
        seed=doc["seed"],
        extra={"d": res.d, "reps": res.reps},
    )
    _write_meta(
        out / "meta.json",
        report,
        {"baseline_ns": res.baseline_ns, "lml_ns": res.lml_ns, "ratio": res.ratio},
    )
    if do_assert and res.ratio > doc["assert"]["ratio_max"]:
        print(
            f"assert failed: overhead ratio {res.ratio:.4f} > {doc['assert']['ratio_max']}",
            file=sys.stderr,
        )
        return 4
    return 0


_DISPATCH = {
    "sample": _cmd_sample,
    "compare": _cmd_compare,
    "stationarity": _cmd_stationarity,
    "convergence": _cmd_convergence,
    "hessian-error": _cmd_hessian_error,
    "bench": _cmd_bench,
}


# ---------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", required=True, help="path to the JSON config document")
    shared.add_argument("--out", required=True, help="output directory (created if missing)")
    shared.add_argument("--seed", type=int, default=None, help="override the config seed(s)")
    shared.add_argument("--threads", type=int, default=1, help="worker threads; never changes results")
    shared.add_argument(
        "--assert",
        dest="do_assert",
        action="store_true",
        help="exit 4 when the command's acceptance threshold is violated",
    )
    parser = argparse.ArgumentParser(prog="lmlangevin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sub.add_parser(name, parents=[shared])
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        raw = Path(args.config).read_text()
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        print(f"config error: not valid JSON: {exc}", file=sys.stderr)
        return 2
    try:
        validate_config(doc, COMMAND_SCHEMAS[args.command])
        doc = _apply_defaults(args.command, doc)
        doc = _apply_seed_override(args.command, doc, args.seed)
        ctx = _build_context(args.command, doc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    chash = config_hash(doc)
    if args.threads < 1:
        print("config error: --threads must be >= 1", file=sys.stderr)
        return 2
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        return _DISPATCH[args.command](doc, ctx, chash, out, args.threads, args.do_assert)
    except (
        FloatingPointError,
        NotLogConcaveError,
        DampingTooSmallError,
        DegenerateDirectionError,
        np.linalg.LinAlgError,
        ValueError,
    ) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
