"""Command-line entry point wiring all modules together.

Subcommands: field, coeffs, eval, scan, count, moments, clt, ssum.  Every run
produces a canonical-JSON result envelope (sorted keys; identical config and
seed reproduce identical numbers); delimited side files and, with
--emit-plot, rendered PNG figures land next to the envelope.
Option precedence: command-line flags > --config file > defaults.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .cache import cached_coefficients, load_header, save_table
from .class_field import build_field, characters, distinct_l_representatives
from .coefficients import alpha_coefficients, mollifier_weights, r_coefficients
from .lfunc_eval import build_eval_contexts, required_table_length
from .selberg_moments import MomentConfig, j_sigma, moment_suite
from .selberg_sums import SumConfig, selberg_sum_brute, selberg_sum_decomposed
from .value_dist import clt_histogram, orthogonality_sum
from .zero_scan import CombinationSpec, count_zeros_region, scan_sign_changes


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_jsonable)


def load_schema() -> dict:
    with resources.files("heckezeros").joinpath("envelope_schema.json").open() as fh:
        return json.load(fh)


def validate_envelope(env: dict) -> None:
    import jsonschema
    jsonschema.validate(env, load_schema())


def make_envelope(subcommand: str, config: dict, results: dict,
                  warnings: list, errors: list, t_start: float,
                  files: list) -> dict:
    return {
        "artifact_version": __version__,
        "subcommand": subcommand,
        "config": config,
        "results": results,
        "warnings": list(warnings),
        "errors": list(errors),
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "elapsed_seconds": time.time() - t_start,
        "files": [str(f) for f in files],
    }


# -- option plumbing ---------------------------------------------------------

def read_config_file(path: str) -> dict:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"config line not key=value: {raw!r}")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def merge_options(args: argparse.Namespace, defaults: dict) -> dict:
    """flags > config file > defaults; every knob echoed in the envelope."""
    file_cfg = read_config_file(args.config) if getattr(args, "config", None) else {}
    merged = dict(defaults)
    for k, v in file_cfg.items():
        if k in merged:
            merged[k] = type(merged[k])(v) if merged[k] is not None else v
        else:
            merged[k] = v
    for k in defaults:
        flag = getattr(args, k, None)
        if flag is not None:
            merged[k] = flag
    return merged


def parse_combo(text: str) -> list:
    terms = []
    for part in text.split(","):
        ci, c = part.split(":")
        terms.append((int(ci), float(c)))
    return terms


def parse_floats(text: str) -> list:
    return [float(v) for v in text.split(",")]


def parse_t_spec(text: str) -> np.ndarray:
    if ":" in text:
        a, b, step = (float(v) for v in text.split(":"))
        n = int(math.floor((b - a) / step + 1e-9)) + 1
        return a + step * np.arange(n)
    return np.array(parse_floats(text))


def _cache_dir(args) -> str | None:
    return getattr(args, "cache_dir", None) or os.environ.get("HECKEZEROS_CACHE_DIR")


def _prepare(d: int, char_indices: list, t_max: float, tol: float,
             cache_dir: str | None):
    fld = build_field(d)
    chars = characters(fld)
    n_len = required_table_length(d, t_max)
    tables = {}
    for ci in char_indices:
        if ci < 0 or ci >= fld.h:
            raise SystemExit(f"character index {ci} out of range for h={fld.h}")
        tables[ci] = cached_coefficients(fld, chars[ci], n_len, cache_dir)
    return fld, chars, build_eval_contexts(fld, tables, t_max, tol)


def _write(path: Path, text: str, files: list) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    files.append(str(path))


# -- subcommands --------------------------------------------------------------

def cmd_field(args) -> dict:
    t0 = time.time()
    cfg = merge_options(args, {"disc": None})
    fld = build_field(int(cfg["disc"]))
    chars = characters(fld)
    results = {
        "D": fld.D,
        "h": fld.h,
        "w": fld.w,
        "invariant_factors": fld.invariant_factors,
        "forms": [[f.a, f.b, f.c] for f in fld.forms],
        "characters": [
            {"index": c.index,
             "angles": [str(a) for a in c.angles],
             "is_complex": c.is_complex,
             "is_principal": c.is_principal,
             "n_psi": c.n_psi,
             "conjugate_index": c.conjugate_index}
            for c in chars],
        "distinct_complex_l": distinct_l_representatives(fld, complex_only=True),
    }
    return make_envelope("field", cfg, results, [], [], t0, [])


def cmd_coeffs(args) -> dict:
    t0 = time.time()
    cfg = merge_options(args, {"disc": None, "char": 0, "limit": 1000,
                               "cache": None, "csv": None})
    fld = build_field(int(cfg["disc"]))
    chars = characters(fld)
    char = chars[int(cfg["char"])]
    files: list = []
    n = int(cfg["limit"])
    if cfg["cache"]:
        path = Path(cfg["cache"])
        if path.exists():
            from .cache import extend_table, load_table
            table = load_table(path, fld, char)
            if table.N < n:
                table = extend_table(table, fld, char, n)
                save_table(table, path)
        else:
            table = r_coefficients(fld, char, n)
            save_table(table, path)
        files.append(str(path))
    else:
        table = r_coefficients(fld, char, n)
    if cfg["csv"]:
        lines = ["n,r"] + [f"{i},{table.r[i]!r}" for i in range(1, min(table.N, n) + 1)]
        _write(Path(cfg["csv"]), "\n".join(lines) + "\n", files)
    results = {"D": fld.D, "char": char.index, "N": table.N,
               "r_head": table.r[1:11].tolist(),
               "sum_r_sq_over_n": float(np.sum(table.r[1:n + 1] ** 2) / n)}
    return make_envelope("coeffs", cfg, results, [], [], t0, files)


def cmd_eval(args) -> dict:
    t0 = time.time()
    cfg = merge_options(args, {"disc": None, "char": 1, "t": "0:30:0.5",
                               "sigma": 0.5, "tol": 1e-9, "out": "eval.csv",
                               "emit_plot": False})
    ts = parse_t_spec(str(cfg["t"]))
    sigma = float(cfg["sigma"])
    fld, chars, ctxs = _prepare(int(cfg["disc"]), [int(cfg["char"])],
                                float(np.max(np.abs(ts))) + 1.0,
                                float(cfg["tol"]), _cache_dir(args))
    ctx = ctxs[int(cfg["char"])]
    files: list = []
    rows = ["t,re_l,im_l,log_abs_l,lambda_scaled"]
    logabs = []
    for t in ts:
        if sigma == 0.5:
            lv = ctx.l_critical(float(t))
            la, _ = ctx.log_abs_l(float(t))
            g = ctx.lambda_scaled(float(t))
        else:
            s = sigma + 1j * float(t)
            lv = ctx.l_value(s)
            la = math.log(abs(lv)) if lv != 0 else -50.0
            g = ctx.contour.lambda_scaled_sigma(ctx.char_index, sigma, float(t))
        logabs.append(la)
        rows.append(f"{float(t)!r},{lv.real!r},{lv.imag!r},{la!r},{complex(g).real!r}")
    out = Path(cfg["out"])
    _write(out, "\n".join(rows) + "\n", files)
    if cfg["emit_plot"]:
        from .plotting import save_eval_figure
        png = out.with_suffix(".png")
        save_eval_figure(ts, logabs, png)
        files.append(str(png))
    results = {"points": len(ts), "sigma": sigma,
               "t_min": float(np.min(ts)), "t_max": float(np.max(ts))}
    return make_envelope("eval", cfg, results, [], [], t0, files)


def _combo_spec(cfg, args, t_max: float) -> CombinationSpec:
    terms = parse_combo(str(cfg["combo"]))
    fld, chars, ctxs = _prepare(int(cfg["disc"]), [ci for ci, _ in terms],
                                t_max, float(cfg.get("tol", 1e-9)), _cache_dir(args))
    return CombinationSpec(fld=fld, terms=terms, contexts=ctxs)


def cmd_scan(args) -> dict:
    t0 = time.time()
    cfg = merge_options(args, {"disc": None, "combo": "1:1.0", "t_from": 0.05,
                               "t_to": 50.0, "step": None, "refine_tol": None,
                               "tol": 1e-9, "with_box": True,
                               "sigma_lo": -1.0, "sigma_hi": 2.5,
                               "out": "scan.json", "zeros_csv": "zeros.csv",
                               "emit_plot": False})
    a, b = float(cfg["t_from"]), float(cfg["t_to"])
    spec = _combo_spec(cfg, args, b + 1.0)
    rep = scan_sign_changes(spec, a, b,
                            step=cfg["step"] and float(cfg["step"]),
                            refine_tol=cfg["refine_tol"] and float(cfg["refine_tol"]))
    warnings = list(rep.warnings)
    n_box = None
    if cfg["with_box"]:
        n_box = count_zeros_region(spec, float(cfg["sigma_lo"]),
                                   float(cfg["sigma_hi"]), max(a, 1e-2), b)
    files: list = []
    lines = ["ordinate,bracket_width"] + [f"{z!r},{w!r}" for z, w in rep.zeros]
    _write(Path(cfg["zeros_csv"]), "\n".join(lines) + "\n", files)
    if cfg["emit_plot"]:
        from .plotting import save_zero_figure
        png = Path(cfg["zeros_csv"]).with_suffix(".png")
        save_zero_figure(rep.zeros, a, b, png)
        files.append(str(png))
    results = {"n0": rep.n0, "n_box": n_box,
               "gap": None if n_box is None else n_box - rep.n0,
               "step": rep.step, "refine_tol": rep.refine_tol,
               "interval": [a, b]}
    env = make_envelope("scan", cfg, results, warnings, [], t0, files)
    _write(Path(cfg["out"]), canonical_json(env) + "\n", files)
    env["files"] = [str(f) for f in files]
    return env


def cmd_count(args) -> dict:
    t0 = time.time()
    cfg = merge_options(args, {"disc": None, "combo": "1:1.0", "t_from": 1.0,
                               "t_to": 50.0, "sigma_lo": -1.0, "sigma_hi": 2.5,
                               "tol": 1e-9})
    spec = _combo_spec(cfg, args, float(cfg["t_to"]) + 1.0)
    n = count_zeros_region(spec, float(cfg["sigma_lo"]), float(cfg["sigma_hi"]),
                           float(cfg["t_from"]), float(cfg["t_to"]))
    results = {"count": n,
               "box": [float(cfg["sigma_lo"]), float(cfg["sigma_hi"]),
                       float(cfg["t_from"]), float(cfg["t_to"])]}
    return make_envelope("count", cfg, results, [], [], t0, [])


def cmd_moments(args) -> dict:
    t0 = time.time()
    cfg = merge_options(args, {"disc": None, "char": 1, "T": "500",
                               "A": 8.0, "x_exp": 0.125, "x_cutoff": None,
                               "samples": 64, "seed": 0, "tol": 1e-9,
                               "sigmas": None, "workers": 0,
                               "out": "moments.json", "emit_plot": False})
    t_list = parse_floats(str(cfg["T"]))
    files: list = []
    warnings: list = []
    rows = []
    jsig_rows = []
    for T in t_list:
        mc = MomentConfig(T=T, a_const=float(cfg["A"]),
                          x_exponent=float(cfg["x_exp"]),
                          x_cutoff=cfg["x_cutoff"] and float(cfg["x_cutoff"]),
                          samples=int(cfg["samples"]), seed=int(cfg["seed"]))
        fld, chars, ctxs = _prepare(int(cfg["disc"]), [int(cfg["char"])],
                                    2 * T + mc.resolved_h() + 1.0,
                                    float(cfg["tol"]), _cache_dir(args))
        ctx = ctxs[int(cfg["char"])]
        alpha = alpha_coefficients(ctx.table, int(math.floor(mc.resolved_x())))
        mtab = mollifier_weights(alpha, mc.resolved_x())
        rep = moment_suite(ctx, mtab, mc, workers=int(cfg["workers"]))
        if rep.flagged:
            warnings.append(f"T={T}: {rep.flagged} flagged quadrature sample(s)")
        rows.append({"T": T, "H": rep.H, "X": rep.X,
                     "rho5": rep.rho5, "rho5_stderr": rep.rho5_stderr,
                     "rho6": rep.rho6, "rho6_stderr": rep.rho6_stderr,
                     "rho7": rep.rho7, "rho7_stderr": rep.rho7_stderr,
                     "j_ge_floor_fraction": rep.j_ge_floor_fraction,
                     "j_ge_abs_i_fraction": rep.j_ge_abs_i_fraction,
                     "flagged": rep.flagged})
        if cfg["sigmas"] and T == t_list[0]:
            for sg in parse_floats(str(cfg["sigmas"])):
                est, se = j_sigma(ctx, mtab, sg, T, samples=int(cfg["samples"]),
                                  seed=int(cfg["seed"]))
                jsig_rows.append({"sigma": sg, "T": T, "estimate": est, "stderr": se})
    if cfg["emit_plot"]:
        csv = ["T,rho5,rho6,rho7"] + [f"{r['T']!r},{r['rho5']!r},{r['rho6']!r},{r['rho7']!r}"
                                      for r in rows]
        path = Path(cfg["out"]).with_suffix(".csv")
        _write(path, "\n".join(csv) + "\n", files)
        from .plotting import save_moment_figure, save_jsigma_figure
        png = Path(cfg["out"]).with_suffix(".png")
        save_moment_figure(rows, png)
        files.append(str(png))
        if jsig_rows:
            jpng = Path(cfg["out"]).with_suffix(".jsigma.png")
            save_jsigma_figure(jsig_rows, jpng)
            files.append(str(jpng))
    results = {"rows": rows, "j_sigma": jsig_rows}
    env = make_envelope("moments", cfg, results, warnings, [], t0, files)
    _write(Path(cfg["out"]), canonical_json(env) + "\n", files)
    env["files"] = [str(f) for f in files]
    return env


def cmd_clt(args) -> dict:
    t0 = time.time()
    cfg = merge_options(args, {"disc": None, "pair": "1,2", "T": "1000",
                               "samples": 4000, "bins": 40, "seed": 0,
                               "tol": 1e-9, "out": "clt.json", "emit_plot": False})
    i1, i2 = (int(v) for v in str(cfg["pair"]).split(","))
    t_list = parse_floats(str(cfg["T"]))
    rng = np.random.default_rng(np.random.SeedSequence(int(cfg["seed"])))
    offsets = rng.random(int(cfg["samples"]))       # common random numbers across T
    files: list = []
    rows = []
    for T in t_list:
        fld, chars, ctxs = _prepare(int(cfg["disc"]), [i1, i2], 2 * T + 1.0,
                                    float(cfg["tol"]), _cache_dir(args))
        rep = clt_histogram(ctxs[i1], ctxs[i2], T, samples=int(cfg["samples"]),
                            bins=int(cfg["bins"]), seed=int(cfg["seed"]),
                            offsets=offsets)
        rows.append({"T": T, "ks": rep.ks, "samples": rep.samples,
                     "excluded": rep.excluded, "clipped": rep.clipped,
                     "denominator": rep.denominator})
        csv = ["bin_lo,bin_hi,mass,target_mass"]
        for i in range(len(rep.bin_mass)):
            csv.append(f"{rep.bin_edges[i]!r},{rep.bin_edges[i + 1]!r},"
                       f"{rep.bin_mass[i]!r},{rep.target_mass[i]!r}")
        path = Path(cfg["out"]).with_suffix(f".T{int(T)}.csv")
        _write(path, "\n".join(csv) + "\n", files)
        if cfg["emit_plot"]:
            from .plotting import save_clt_figure
            png = path.with_suffix(".png")
            save_clt_figure(rep, png)
            files.append(str(png))
    results = {"rows": rows}
    env = make_envelope("clt", cfg, results, [], [], t0, files)
    _write(Path(cfg["out"]), canonical_json(env) + "\n", files)
    env["files"] = [str(f) for f in files]
    return env


def cmd_ssum(args) -> dict:
    t0 = time.time()
    cfg = merge_options(args, {"disc": None, "char": 1, "X": 25, "theta": 0.0,
                               "method": "both", "tol": 1e-12})
    fld = build_field(int(cfg["disc"]))
    chars = characters(fld)
    x = int(cfg["X"])
    # K factors run over primes up to X^2
    table = cached_coefficients(fld, chars[int(cfg["char"])],
                                max(x * x, 100), _cache_dir(args))
    sc = SumConfig(x=x, theta=float(cfg["theta"]), tol=float(cfg["tol"]))
    results: dict = {"X": x, "theta": sc.theta}
    if cfg["method"] in ("brute", "both"):
        results["brute"] = selberg_sum_brute(sc, table)
    if cfg["method"] in ("decomposed", "both"):
        results["decomposed"] = selberg_sum_decomposed(sc, table)
    if cfg["method"] == "both":
        denom = max(abs(results["brute"]), 1e-300)
        results["relative_residual"] = abs(results["brute"] - results["decomposed"]) / denom
    ref = results.get("brute", results.get("decomposed"))
    results["bound_ratio"] = ref * math.log(x) / x ** (2 * sc.theta) if x > 1 else ref
    return make_envelope("ssum", cfg, results, [], [], t0, [])


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="heckezeros", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="subcommand", required=True)

    def add_common(sp):
        sp.add_argument("--config", help="key=value config file (flags win)")
        sp.add_argument("--cache-dir", dest="cache_dir",
                        help="coefficient cache directory (or HECKEZEROS_CACHE_DIR)")
        sp.add_argument("--json-out", dest="json_out",
                        help="write the envelope JSON here (default: stdout)")

    sp = sub.add_parser("field", help="forms, class group, character table")
    sp.add_argument("--disc", type=int, required=True)
    add_common(sp)
    sp.set_defaults(fn=cmd_field)

    sp = sub.add_parser("coeffs", help="r(n) tables with optional binary cache")
    sp.add_argument("--disc", type=int, required=True)
    sp.add_argument("--char", type=int)
    sp.add_argument("--limit", type=int)
    sp.add_argument("--cache")
    sp.add_argument("--csv")
    add_common(sp)
    sp.set_defaults(fn=cmd_coeffs)

    sp = sub.add_parser("eval", help="L and Lambda values on a t grid")
    sp.add_argument("--disc", type=int, required=True)
    sp.add_argument("--char", type=int)
    sp.add_argument("--t")
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--out")
    sp.add_argument("--emit-plot", dest="emit_plot", action="store_const", const=True)
    add_common(sp)
    sp.set_defaults(fn=cmd_eval)

    sp = sub.add_parser("scan", help="sign-change zero scan with box audit")
    sp.add_argument("--disc", type=int, required=True)
    sp.add_argument("--combo")
    sp.add_argument("--from", dest="t_from", type=float)
    sp.add_argument("--to", dest="t_to", type=float)
    sp.add_argument("--step", type=float)
    sp.add_argument("--refine-tol", dest="refine_tol", type=float)
    sp.add_argument("--no-box", dest="with_box", action="store_const", const=False)
    sp.add_argument("--sigma-lo", dest="sigma_lo", type=float)
    sp.add_argument("--sigma-hi", dest="sigma_hi", type=float)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--out")
    sp.add_argument("--zeros-csv", dest="zeros_csv")
    sp.add_argument("--emit-plot", dest="emit_plot", action="store_const", const=True)
    add_common(sp)
    sp.set_defaults(fn=cmd_scan)

    sp = sub.add_parser("count", help="argument-principle zero count in a box")
    sp.add_argument("--disc", type=int, required=True)
    sp.add_argument("--combo")
    sp.add_argument("--sigma-lo", dest="sigma_lo", type=float)
    sp.add_argument("--sigma-hi", dest="sigma_hi", type=float)
    sp.add_argument("--from", dest="t_from", type=float)
    sp.add_argument("--to", dest="t_to", type=float)
    sp.add_argument("--tol", type=float)
    add_common(sp)
    sp.set_defaults(fn=cmd_count)

    sp = sub.add_parser("moments", help="mollified moment ratios over T values")
    sp.add_argument("--disc", type=int, required=True)
    sp.add_argument("--char", type=int)
    sp.add_argument("--T")
    sp.add_argument("--A", type=float)
    sp.add_argument("--x-exp", dest="x_exp", type=float)
    sp.add_argument("--x-cutoff", dest="x_cutoff", type=float)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--sigmas", help="comma list for J_sigma rows")
    sp.add_argument("--workers", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--out")
    sp.add_argument("--emit-plot", dest="emit_plot", action="store_const", const=True)
    add_common(sp)
    sp.set_defaults(fn=cmd_moments)

    sp = sub.add_parser("clt", help="log|L| difference distribution vs Gaussian")
    sp.add_argument("--disc", type=int, required=True)
    sp.add_argument("--pair")
    sp.add_argument("--T")
    sp.add_argument("--samples", type=int)
    sp.add_argument("--bins", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--out")
    sp.add_argument("--emit-plot", dest="emit_plot", action="store_const", const=True)
    add_common(sp)
    sp.set_defaults(fn=cmd_clt)

    sp = sub.add_parser("ssum", help="quadruple Selberg sum, both routes")
    sp.add_argument("--disc", type=int, required=True)
    sp.add_argument("--char", type=int)
    sp.add_argument("--X", type=int)
    sp.add_argument("--theta", type=float)
    sp.add_argument("--method", choices=["brute", "decomposed", "both"])
    sp.add_argument("--tol", type=float)
    add_common(sp)
    sp.set_defaults(fn=cmd_ssum)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        env = args.fn(args)
    except (ValueError, SystemExit) as err:
        if isinstance(err, SystemExit):
            raise
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # runtime failure after validation
        env = make_envelope(args.subcommand, {}, {}, [], [f"{type(err).__name__}: {err}"],
                            time.time(), [])
        print(canonical_json(env))
        return 1
    validate_envelope(env)
    text = canonical_json(env)
    if getattr(args, "json_out", None):
        Path(args.json_out).write_text(text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
