"""Batch experiment harness: config ingestion, sweeps, comparison tables, CSV/JSON emission.

Outputs are deterministic: fixed column order, 17 significant digits, rows
sorted after any parallel execution, and every file carries the config hash
and the tolerance set that produced it.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import direct, quantize, stokes
from .errors import A1Violated, ConfigError, ZSWKBError
from .potential import PotentialSpec, classify_symmetry, spec_from_json, spec_to_json, validate_A1
from .problem import Problem, Tolerances, window_rectangle

log = logging.getLogger("zswkb")

_RECORD_HEADER = ["re_lambda", "im_lambda", "k", "branch", "method", "residual", "h", "eps"]
_COMPARE_HEADER = ["h", "eps", "k_proxy", "re_lambda_wkb", "im_lambda_wkb",
                   "re_lambda_direct", "im_lambda_direct", "abs_diff", "branch", "error"]
_PT_HEADER = ["eps", "h", "max_im_lambda", "symmetry_class", "winding_ok", "n_roots", "error"]


@dataclass(frozen=True)
class ExperimentConfig:
    potential: PotentialSpec
    lambda0: float
    delta: float
    h_list: tuple
    eps_list: tuple
    cutoff: float = 8.0
    tolerances: Tolerances = Tolerances()
    output_dir: str = "."
    seed_metadata: str = ""


@dataclass(frozen=True)
class ComparisonRow:
    h: float
    eps: float
    k_proxy: int | None
    lambda_wkb: complex | None
    lambda_direct: complex | None
    abs_diff: float | None
    branch: str
    error: str = ""


def config_from_json(obj: dict) -> ExperimentConfig:
    try:
        spec = spec_from_json(obj["potential"])
        h_list = tuple(float(h) for h in obj["h_list"])
        eps_list = tuple(float(e) for e in obj["eps_list"])
        tol_overrides = obj.get("tolerances", {})
        known = set(Tolerances.__dataclass_fields__)
        unknown = set(tol_overrides) - known
        if unknown:
            raise ConfigError(f"unknown tolerance names: {sorted(unknown)}")
        cfg = ExperimentConfig(
            potential=spec,
            lambda0=float(obj["lambda0"]),
            delta=float(obj["delta"]),
            h_list=h_list,
            eps_list=eps_list,
            cutoff=float(obj.get("cutoff", 8.0)),
            tolerances=dataclasses.replace(Tolerances(), **tol_overrides),
            output_dir=str(obj.get("output_dir", ".")),
            seed_metadata=str(obj.get("seed_metadata", "")),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad experiment config: {exc}") from exc
    if not cfg.h_list or any(h <= 0 for h in cfg.h_list):
        raise ConfigError("h_list must be nonempty and positive")
    if list(cfg.h_list) != sorted(cfg.h_list, reverse=True):
        raise ConfigError("h_list must be sorted descending")
    if not cfg.eps_list or any(e < 0 for e in cfg.eps_list):
        raise ConfigError("eps_list must be nonempty and non-negative")
    if list(cfg.eps_list) != sorted(cfg.eps_list, reverse=True):
        raise ConfigError("eps_list must be sorted descending")
    if cfg.delta <= 0 or cfg.lambda0 <= 0:
        raise ConfigError("lambda0 and delta must be positive")
    if any(v <= 0 for v in cfg.tolerances.as_dict().values()):
        raise ConfigError("all tolerances must be positive")
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_json(obj)


def config_hash(config: ExperimentConfig) -> str:
    semantic = {
        "potential": spec_to_json(config.potential),
        "lambda0": config.lambda0,
        "delta": config.delta,
        "h_list": list(config.h_list),
        "eps_list": list(config.eps_list),
        "cutoff": config.cutoff,
        "tolerances": config.tolerances.as_dict(),
        "seed_metadata": config.seed_metadata,
    }
    blob = json.dumps(semantic, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def make_problem(config: ExperimentConfig, h: float, eps: float) -> Problem:
    return Problem(config.potential, config.lambda0, config.delta, h, eps,
                   cutoff=config.cutoff, tolerances=config.tolerances)


def _fmt(x) -> str:
    if x is None or x == "":
        return "" if x is None else str(x)
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_csv(path, header, rows, meta: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {k}={v}" for k, v in sorted(meta.items())]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _meta(config: ExperimentConfig) -> dict:
    return {
        "config_sha256": config_hash(config),
        "tolerances": json.dumps(config.tolerances.as_dict(),
                                 sort_keys=True, separators=(",", ":")),
        "seed_metadata": config.seed_metadata,
    }


def _direct_records(problem: Problem) -> list:
    if problem.eps == 0.0:
        return direct.direct_spectrum_real(problem)
    return direct.direct_spectrum_complex(problem, certify=False)


def _match_records(wkb_records, direct_records) -> list:
    """Greedy nearest-lambda matching; a bijection when the counts agree."""
    pairs = []
    free_w = list(range(len(wkb_records)))
    free_d = list(range(len(direct_records)))
    while free_w and free_d:
        best = min(((abs(wkb_records[i].lam - direct_records[j].lam), i, j)
                    for i in free_w for j in free_d))
        _, i, j = best
        pairs.append((i, j))
        free_w.remove(i)
        free_d.remove(j)
    return pairs, free_w, free_d


def _compare_cell(config: ExperimentConfig, h: float, eps: float):
    problem = make_problem(config, h, eps)
    rows = []
    try:
        wkb_records = quantize.wkb_spectrum(problem)
        direct_records = _direct_records(problem)
        pairs, free_w, free_d = _match_records(wkb_records, direct_records)
        for i, j in pairs:
            wr, dr = wkb_records[i], direct_records[j]
            rows.append(ComparisonRow(h, eps, dr.k, wr.lam, dr.lam,
                                      abs(wr.lam - dr.lam),
                                      wr.branch.value if wr.branch else ""))
        for i in free_w:
            wr = wkb_records[i]
            rows.append(ComparisonRow(h, eps, None, wr.lam, None, None,
                                      wr.branch.value if wr.branch else "",
                                      "unmatched-wkb"))
        for j in free_d:
            dr = direct_records[j]
            rows.append(ComparisonRow(h, eps, dr.k, None, dr.lam, None,
                                      dr.branch.value if dr.branch else "",
                                      "unmatched-direct"))
        return rows, None
    except ZSWKBError as exc:
        return rows, f"{type(exc).__name__}: {exc}"


def _compare_cell_star(args):
    return _compare_cell(*args)


def _cells_map(fn, cells, jobs: int):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, cells))
    return [fn(c) for c in cells]


def fit_convergence_slope(rows) -> float | None:
    """Least-squares slope of log(max |wkb - direct|) against log h over eps = 0 rows."""
    by_h = {}
    for r in rows:
        if r.eps == 0.0 and r.abs_diff is not None:
            by_h.setdefault(r.h, []).append(r.abs_diff)
    pts = [(h, max(d)) for h, d in by_h.items() if max(d) > 0]
    if len(pts) < 2:
        return None
    lx = np.log([p[0] for p in pts])
    ly = np.log([p[1] for p in pts])
    return float(np.polyfit(lx, ly, 1)[0])


def run_compare(config: ExperimentConfig, jobs: int = 1):
    """Both spectra per (h, eps) cell, matched by nearest lambda; eps = 0 always included."""
    eps_values = sorted(set(config.eps_list) | {0.0}, reverse=True)
    cells = [(config, h, eps) for h in config.h_list for eps in eps_values]
    results = _cells_map(_compare_cell_star, cells, jobs)
    rows = []
    errors = []
    for (_, h, eps), (cell_rows, err) in zip(cells, results):
        rows.extend(cell_rows)
        if err is not None:
            errors.append(f"h={h} eps={eps}: {err}")
            rows.append(ComparisonRow(h, eps, None, None, None, None, "", err))
    rows.sort(key=lambda r: (-r.h, r.eps, r.k_proxy if r.k_proxy is not None else 1 << 30,
                             r.error))
    slope = fit_convergence_slope(rows)
    return rows, slope, errors


def compare_rows_to_csv(rows) -> list:
    out = []
    for r in rows:
        out.append([
            r.h, r.eps, r.k_proxy,
            None if r.lambda_wkb is None else r.lambda_wkb.real,
            None if r.lambda_wkb is None else r.lambda_wkb.imag,
            None if r.lambda_direct is None else r.lambda_direct.real,
            None if r.lambda_direct is None else r.lambda_direct.imag,
            r.abs_diff, r.branch, r.error,
        ])
    return out


def _pt_cell(args):
    config, eps, h = args
    problem = make_problem(config, h, eps)
    sym = classify_symmetry(config.potential, half_width=config.cutoff)
    try:
        records = direct.direct_spectrum_complex(problem, certify=False)
        zc = direct.count_zeros(problem, window_rectangle(problem))
        max_im = max((abs(r.lam.imag) for r in records), default=0.0)
        return [eps, h, max_im, sym.value, zc.winding == len(records),
                len(records), ""], None
    except ZSWKBError as exc:
        msg = f"{type(exc).__name__}: {exc}"
        return [eps, h, None, sym.value, None, None, msg], msg


def run_pt_sweep(config: ExperimentConfig, jobs: int = 1):
    """Direct complex spectra per (eps, h) with reality and completeness summaries."""
    eps_values = sorted(set(config.eps_list) | {0.0}, reverse=True)
    cells = [(config, eps, h) for eps in eps_values for h in config.h_list]
    results = _cells_map(_pt_cell, cells, jobs)
    rows = [r for r, _ in results]
    errors = [e for _, e in results if e is not None]
    rows.sort(key=lambda r: (-r[0], -r[1]))
    return rows, errors


def run_stokes(config: ExperimentConfig, lam: float | None = None,
               eps: float | None = None, out=None) -> dict:
    """Trace the Stokes graph at one (lambda, eps) and write it as JSON."""
    if lam is None:
        lam = config.lambda0
    if eps is None:
        eps = config.eps_list[0]
    problem = make_problem(config, config.h_list[0], eps)
    graph = stokes.build_graph(problem, complex(lam))
    doc = {"meta": {**_meta(config), "lambda": lam, "eps": eps}}
    doc.update(stokes.graph_to_json(graph))
    if out is None:
        out = Path(config.output_dir) / "stokes.json"
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, sort_keys=True))
    n_term = {}
    for c in graph.curves:
        n_term[c.termination.value] = n_term.get(c.termination.value, 0) + 1
    log.info("stokes graph: %d turning points, %d curves, terminations %s",
             len(graph.turning_points), len(graph.curves), n_term)
    return doc


def _spectrum_cell(args):
    config, h, eps, which = args
    problem = make_problem(config, h, eps)
    try:
        if which == "wkb":
            records = quantize.wkb_spectrum(problem)
        else:
            records = _direct_records(problem)
        rows = [[r.lam.real, r.lam.imag, r.k, r.branch.value if r.branch else "",
                 r.method.value, r.residual, r.h, r.eps] for r in records]
        return rows, None
    except ZSWKBError as exc:
        return [], f"h={h} eps={eps}: {type(exc).__name__}: {exc}"


def run_spectra(config: ExperimentConfig, which: str, jobs: int = 1):
    cells = [(config, h, eps, which) for h in config.h_list for eps in config.eps_list]
    results = _cells_map(_spectrum_cell, cells, jobs)
    rows = []
    errors = []
    for cell_rows, err in results:
        rows.extend(cell_rows)
        if err is not None:
            errors.append(err)
    rows.sort(key=lambda r: (-r[6], r[7], r[0]))
    return rows, errors


def run_validate(config: ExperimentConfig) -> dict:
    report = validate_A1(config.potential, config.lambda0, config.cutoff,
                         slope_tol=config.tolerances.slope_degeneracy)
    sym = classify_symmetry(config.potential, half_width=config.cutoff)
    return {
        "config_sha256": config_hash(config),
        "family": config.potential.family,
        "symmetry_class": sym.value,
        "alpha0": report.alpha0,
        "beta0": report.beta0,
        "lambda0": report.lambda0,
        "slopes": list(report.slopes),
        "well_type": report.well_type.value,
        "margin_at_infinity": report.margin_at_infinity,
    }


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zswkb", description=__doc__)
    p.add_argument("--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("validate", "wkb", "direct", "compare", "pt-sweep", "stokes"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default=None)
        sp.add_argument("--jobs", type=int, default=1)
        if name == "stokes":
            sp.add_argument("--lam", type=float, default=None)
            sp.add_argument("--eps", type=float, default=None)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    out_dir = Path(config.output_dir)
    meta = _meta(config)
    try:
        if args.command == "validate":
            try:
                doc = run_validate(config)
            except A1Violated as exc:
                print(f"config error: potential fails the simple-well check: {exc}",
                      file=sys.stderr)
                return 1
            text = json.dumps(doc, sort_keys=True, indent=2)
            if args.out:
                Path(args.out).write_text(text)
            print(text)
            return 0
        if args.command in ("wkb", "direct"):
            rows, errors = run_spectra(config, args.command, jobs=args.jobs)
            out = Path(args.out) if args.out else out_dir / f"{args.command}.csv"
            write_csv(out, _RECORD_HEADER, rows, meta)
            print(f"wrote {out} ({len(rows)} records)")
            for e in errors:
                print(f"cell failed: {e}", file=sys.stderr)
            return 2 if errors else 0
        if args.command == "compare":
            rows, slope, errors = run_compare(config, jobs=args.jobs)
            out = Path(args.out) if args.out else out_dir / "compare.csv"
            slope_meta = dict(meta)
            slope_meta["convergence_slope"] = "" if slope is None else f"{slope:.17g}"
            write_csv(out, _COMPARE_HEADER, compare_rows_to_csv(rows), slope_meta)
            print(f"wrote {out} ({len(rows)} rows), convergence slope: {slope}")
            for e in errors:
                print(f"cell failed: {e}", file=sys.stderr)
            return 2 if errors else 0
        if args.command == "pt-sweep":
            rows, errors = run_pt_sweep(config, jobs=args.jobs)
            out = Path(args.out) if args.out else out_dir / "pt_sweep.csv"
            write_csv(out, _PT_HEADER, rows, meta)
            print(f"wrote {out} ({len(rows)} rows)")
            for e in errors:
                print(f"cell failed: {e}", file=sys.stderr)
            return 2 if errors else 0
        if args.command == "stokes":
            out = args.out if args.out else out_dir / "stokes.json"
            doc = run_stokes(config, lam=args.lam, eps=args.eps, out=out)
            print(f"wrote {out} ({len(doc['curves'])} curves)")
            return 0
    except ZSWKBError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


def main_entry() -> None:
    sys.exit(main())
