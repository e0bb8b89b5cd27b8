"""Command-line front end: batch sweeps, feature extraction, QKD keys,
fitting and tomography with deterministic CSV/JSON output.

Grid arguments accept a single value (``6.5``), a comma list
(``1,2,6.5``) or an inclusive range ``start:stop:step`` (endpoints kept
within half a step).  A JSON config file can stand in for any flag;
explicit flags win on conflict.  Every output embeds the tool version
and the effective config, as ``#`` comment lines in CSV or a ``meta``
field in JSON, and identical configs produce byte-identical files
regardless of thread count.

Exit codes: 0 success, 2 usage or config error, 3 model or numeric
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from .analysis import (
    crossover_point,
    sudden_death_point,
    sweep,
    sweep_to_csv,
    sweep_to_json,
)
from .errors import NoSignChangeError, TmsflowError
from .fit import (
    DEFAULT_COUPLING,
    DEFAULT_WEIGHTS,
    fit,
    fit_result_to_json,
    records_from_csv,
    records_to_csv,
    synthetic_records,
)
from .qkd import (
    DEFAULT_CLONER_COUPLING,
    QKD_CSV_HEADER,
    QkdScenario,
    key_result_to_csv_row,
    key_result_to_json,
    key_threshold,
    secret_key,
)
from .states import JpaNoiseModel, StateModel, squeezing_db_to_r
from .symplectic import covariance_from_csv, covariance_from_json, covariance_to_json, validate
from .tomography import (
    covariance_from_samples,
    cumulant_report_to_json,
    cumulants,
    project_to_physical,
    samples_from_csv,
)


class ConfigError(Exception):
    pass


def parse_grid(spec: str) -> list[float]:
    """Parse a scalar, comma list, or inclusive start:stop:step range."""
    spec = str(spec).strip()
    if not spec:
        raise ConfigError("empty grid specification")
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range must be start:stop:step, got {spec!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"non-numeric range {spec!r}") from None
        if step <= 0:
            raise ConfigError(f"range step must be positive, got {step}")
        if stop < start:
            raise ConfigError(f"range stop below start in {spec!r}")
        count = int(math.floor((stop - start) / step + 0.5)) + 1
        return [start + i * step for i in range(count)]
    try:
        return [float(tok) for tok in spec.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"non-numeric grid {spec!r}") from None


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a JSON object")
    return doc


def _merged(args: argparse.Namespace, config: dict, key: str, default=None):
    val = getattr(args, key.replace("-", "_"), None)
    if val is not None:
        return val
    if key in config:
        return config[key]
    return default


def _build_model(args, config) -> StateModel:
    model_spec = _merged(args, config, "model", "ideal")
    if isinstance(model_spec, dict):
        beta = model_spec.get("coupling_beta")
        jpa = model_spec.get("jpa")
        jpa_model = None
        if jpa is not None:
            jpa_model = JpaNoiseModel(chi1=float(jpa["chi1"]), chi2=float(jpa["chi2"]))
        return StateModel(
            coupling_beta=None if beta is None else float(beta), jpa=jpa_model
        )
    name = str(model_spec)
    if name == "ideal":
        return StateModel.ideal()
    beta = float(_merged(args, config, "beta", DEFAULT_COUPLING))
    if name == "coupler":
        return StateModel.coupler(beta)
    if name == "realistic":
        chi1 = float(_merged(args, config, "chi1", 0.05))
        chi2 = float(_merged(args, config, "chi2", 0.56))
        return StateModel.realistic(chi1, chi2, beta)
    raise ConfigError(f"unknown model {name!r} (ideal | coupler | realistic)")


def _threads(args, config) -> int | None:
    val = _merged(args, config, "threads")
    if val is None:
        val = os.environ.get("TMSFLOW_THREADS")
    if val in (None, ""):
        return None
    t = int(val)
    if t < 1:
        raise ConfigError(f"thread count must be positive, got {t}")
    return t


def _meta_config(pairs: dict) -> str:
    return json.dumps({k: v for k, v in sorted(pairs.items()) if v is not None})


def _csv_header_lines(config_echo: str) -> str:
    return f"# tmsflow {__version__}\n# config: {config_echo}\n"


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_with_meta(payload: str, config_echo: str) -> str:
    doc = json.loads(payload)
    doc["meta"] = {"tool": f"tmsflow {__version__}", "config": json.loads(config_echo)}
    return json.dumps(doc) + "\n"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_sweep(args, config) -> int:
    model = _build_model(args, config)
    s_spec = _merged(args, config, "s")
    n_spec = _merged(args, config, "n")
    if s_spec is None or n_spec is None:
        raise ConfigError("sweep needs both --s and --n grids")
    s_vals, n_vals = parse_grid(s_spec), parse_grid(n_spec)
    grid = sweep(model, s_vals, n_vals, threads=_threads(args, config))
    echo = _meta_config(
        {"command": "sweep", "s": s_spec, "n": n_spec, "model": model.kind}
    )
    fmt = _merged(args, config, "format", "csv")
    if fmt == "json":
        _emit(_json_with_meta(sweep_to_json(grid), echo), _merged(args, config, "out"))
    elif fmt == "csv":
        _emit(_csv_header_lines(echo) + sweep_to_csv(grid), _merged(args, config, "out"))
    else:
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    if all(cell.report is None for cell in grid.cells):
        return 3
    return 0


def _cmd_features(args, config) -> int:
    model = _build_model(args, config)
    s_spec = _merged(args, config, "s")
    if s_spec is None:
        raise ConfigError("features needs an --s grid")
    s_vals = parse_grid(s_spec)
    what = str(_merged(args, config, "what", "nsd,nc")).split(",")
    flavors = str(_merged(args, config, "flavors", "A,B,AB")).split(",")
    echo = _meta_config(
        {
            "command": "features",
            "s": s_spec,
            "what": ",".join(what),
            "flavors": ",".join(flavors),
            "model": model.kind,
        }
    )
    cols = ["s_db"]
    if "nsd" in what:
        cols.append("n_sd")
    if "nc" in what:
        cols += [f"n_c_{f}" for f in flavors]
    cols.append("status")
    lines = [",".join(cols)]
    successes = 0
    for s_db in s_vals:
        row = [repr(float(s_db))]
        notes = []
        ok = True
        if "nsd" in what:
            try:
                row.append(repr(sudden_death_point(model, s_db)))
            except NoSignChangeError as exc:
                row.append("nan")
                notes.append(f"n_sd: {exc}")
                ok = False
        if "nc" in what:
            for flavor in flavors:
                try:
                    row.append(repr(crossover_point(model, s_db, flavor).n_c))
                except NoSignChangeError as exc:
                    row.append("nan")
                    notes.append(f"n_c_{flavor}: {exc}")
                    ok = False
        row.append("ok" if not notes else "; ".join(notes).replace(",", ";"))
        successes += 1 if ok else 0
        lines.append(",".join(row))
    _emit(_csv_header_lines(echo) + "\n".join(lines) + "\n", _merged(args, config, "out"))
    return 0 if successes else 3


def _cmd_qkd(args, config) -> int:
    s_spec = _merged(args, config, "s")
    nq_spec = _merged(args, config, "nq")
    if s_spec is None or nq_spec is None:
        raise ConfigError("qkd needs --s and --nq")
    s_vals, nq_vals = parse_grid(s_spec), parse_grid(nq_spec)
    beta = float(_merged(args, config, "cloner-beta", DEFAULT_CLONER_COUPLING))
    echo = _meta_config(
        {"command": "qkd", "s": s_spec, "nq": nq_spec, "cloner_beta": beta}
    )
    out = _merged(args, config, "out")
    if len(s_vals) == 1 and len(nq_vals) == 1:
        scenario = QkdScenario(r=squeezing_db_to_r(s_vals[0]), n_q=nq_vals[0], beta=beta)
        payload = key_result_to_json(scenario, secret_key(scenario))
        _emit(_json_with_meta(payload, echo), out)
        return 0

    points = [(s, nq) for s in s_vals for nq in nq_vals]

    def row(point):
        s_db, n_q = point
        scenario = QkdScenario(r=squeezing_db_to_r(s_db), n_q=n_q, beta=beta)
        return key_result_to_csv_row(s_db, n_q, secret_key(scenario))

    threads = _threads(args, config)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, points))
    else:
        rows = [row(p) for p in points]
    _emit(
        _csv_header_lines(echo) + QKD_CSV_HEADER + "\n" + "\n".join(rows) + "\n", out
    )

    threshold_out = _merged(args, config, "threshold-out")
    if threshold_out or _merged(args, config, "threshold"):
        tol = float(_merged(args, config, "tolerance", 1e-6))
        tl = ["s_db,n_q_threshold,status"]
        any_ok = False
        for s_db in s_vals:
            try:
                tl.append(f"{s_db!r},{key_threshold(s_db, tol, beta)!r},ok")
                any_ok = True
            except TmsflowError as exc:
                tl.append(f"{s_db!r},nan,{str(exc).replace(',', ';')}")
        _emit(_csv_header_lines(echo) + "\n".join(tl) + "\n", threshold_out)
        if not any_ok:
            return 3
    return 0


def _cmd_fit(args, config) -> int:
    path = _merged(args, config, "records")
    if not path:
        raise ConfigError("fit needs --records FILE")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            records = records_from_csv(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read records: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"malformed records CSV: {exc}") from None
    weights = (
        float(_merged(args, config, "w1", DEFAULT_WEIGHTS[0])),
        float(_merged(args, config, "w2", DEFAULT_WEIGHTS[1])),
        float(_merged(args, config, "w3", DEFAULT_WEIGHTS[2])),
    )
    init_spec = str(_merged(args, config, "init", "0,1"))
    init = tuple(float(x) for x in init_spec.split(","))
    if len(init) != 2:
        raise ConfigError(f"--init needs two comma-separated values, got {init_spec!r}")
    beta = float(_merged(args, config, "beta", DEFAULT_COUPLING))
    result = fit(records, weights=weights, initial=init, coupling_beta=beta)
    echo = _meta_config(
        {
            "command": "fit",
            "records": path,
            "weights": list(weights),
            "init": list(init),
            "beta": beta,
        }
    )
    _emit(_json_with_meta(fit_result_to_json(result), echo), _merged(args, config, "out"))
    return 0


def _cmd_tomo(args, config) -> int:
    path = _merged(args, config, "samples")
    if not path:
        raise ConfigError("tomo needs --samples FILE")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            samples = samples_from_csv(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read samples: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"malformed samples CSV: {exc}") from None
    threshold = float(_merged(args, config, "threshold", 5.0))
    echo = _meta_config(
        {"command": "tomo", "samples": path, "threshold": threshold}
    )
    cov = covariance_from_samples(samples)
    if _merged(args, config, "project"):
        cov = project_to_physical(cov)
    report = cumulants(samples, threshold=threshold)
    _emit(
        _json_with_meta(covariance_to_json(cov), echo),
        _merged(args, config, "covariance-out"),
    )
    _emit(
        _json_with_meta(cumulant_report_to_json(report), echo),
        _merged(args, config, "cumulants-out"),
    )
    return 0


def _cmd_validate(args, config) -> int:
    path = _merged(args, config, "state")
    if not path:
        raise ConfigError("validate needs --state FILE")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read state: {exc}") from None
    try:
        if text.lstrip().startswith("{"):
            cov = covariance_from_json(text)
        else:
            cov = covariance_from_csv(text)
    except (ValueError, KeyError, TmsflowError) as exc:
        raise ConfigError(f"malformed state file: {exc}") from None
    verdict = validate(cov)
    payload = json.dumps(
        {
            "ok": verdict.ok,
            "violations": list(verdict.violations),
            "min_symplectic_eigenvalue": verdict.min_symplectic_eigenvalue,
        }
    )
    echo = _meta_config({"command": "validate", "state": path})
    _emit(_json_with_meta(payload, echo), _merged(args, config, "out"))
    return 0


def _cmd_gen_synthetic(args, config) -> int:
    s_spec = _merged(args, config, "s", "3:9:1.5")
    n_spec = _merged(args, config, "n", "0,0.1,0.25,0.5,1,2")
    chi1 = float(_merged(args, config, "chi1", 0.05))
    chi2 = float(_merged(args, config, "chi2", 0.56))
    beta = float(_merged(args, config, "beta", DEFAULT_COUPLING))
    noise = float(_merged(args, config, "noise", 0.0))
    seed_val = _merged(args, config, "seed")
    seed = None if seed_val is None else int(seed_val)
    records = synthetic_records(
        parse_grid(s_spec),
        parse_grid(n_spec),
        chi=(chi1, chi2),
        coupling_beta=beta,
        noise=noise,
        seed=seed,
    )
    echo = _meta_config(
        {
            "command": "gen-synthetic",
            "s": s_spec,
            "n": n_spec,
            "chi1": chi1,
            "chi2": chi2,
            "beta": beta,
            "noise": noise,
            "seed": seed,
        }
    )
    _emit(_csv_header_lines(echo) + records_to_csv(records), _merged(args, config, "out"))
    return 0


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tmsflow",
        description="Noisy two-mode squeezed states: correlation sweeps, "
        "noise thresholds, CV-QKD keys, fits, and tomography.",
    )
    parser.add_argument("--version", action="version", version=f"tmsflow {__version__}")
    sub = parser.add_subparsers(dest="command")

    def add_common(p):
        p.add_argument("--config", help="JSON config file; explicit flags win")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--threads", type=int, help="worker threads for grid evaluation")

    p = sub.add_parser("sweep", help="correlation reports on an (S, n) grid")
    add_common(p)
    p.add_argument("--s", help="squeezing grid in dB: value, list, or start:stop:step")
    p.add_argument("--n", help="noise photon grid: value, list, or start:stop:step")
    p.add_argument("--model", help="ideal | coupler | realistic")
    p.add_argument("--beta", type=float, help="coupler power coupling")
    p.add_argument("--chi1", type=float, help="amplifier noise coefficient")
    p.add_argument("--chi2", type=float, help="amplifier noise exponent")
    p.add_argument("--format", help="csv (default) or json")

    p = sub.add_parser("features", help="sudden-death and crossover tables n_sd(S), n_c(S)")
    add_common(p)
    p.add_argument("--s", help="squeezing grid in dB")
    p.add_argument("--what", help="comma list of nsd,nc (default both)")
    p.add_argument("--flavors", help="comma list of A,B,AB (default all)")
    p.add_argument("--model", help="ideal | coupler | realistic")
    p.add_argument("--beta", type=float)
    p.add_argument("--chi1", type=float)
    p.add_argument("--chi2", type=float)

    p = sub.add_parser("qkd", help="secret keys on an (S, n_q) grid, plus threshold curve")
    add_common(p)
    p.add_argument("--s", help="squeezing grid in dB")
    p.add_argument("--nq", help="detected-quadrature noise grid")
    p.add_argument("--cloner-beta", type=float, dest="cloner_beta")
    p.add_argument("--threshold", action="store_true", help="also emit the K=0 curve")
    p.add_argument("--threshold-out", dest="threshold_out", help="path for the threshold curve")
    p.add_argument("--tolerance", type=float, help="|K| tolerance at the threshold")

    p = sub.add_parser("fit", help="fit the amplifier-noise power law to records")
    add_common(p)
    p.add_argument("--records", help="CSV of s_db,n,d_a,d_b,e_f[,sd_a,sd_b,se_f]")
    p.add_argument("--w1", type=float)
    p.add_argument("--w2", type=float)
    p.add_argument("--w3", type=float)
    p.add_argument("--init", help="initial chi1,chi2 (default 0,1)")
    p.add_argument("--beta", type=float)

    p = sub.add_parser("tomo", help="covariance + cumulant report from quadrature samples")
    add_common(p)
    p.add_argument("--samples", help="CSV with header I1,Q1,I2,Q2")
    p.add_argument("--threshold", type=float, help="Gaussianity threshold in standard errors")
    p.add_argument("--project", action="store_true", help="clamp the spectrum to physical")
    p.add_argument("--covariance-out", dest="covariance_out")
    p.add_argument("--cumulants-out", dest="cumulants_out")

    p = sub.add_parser("validate", help="physicality verdict for a stored covariance")
    add_common(p)
    p.add_argument("--state", help="covariance file (JSON or CSV)")

    p = sub.add_parser("gen-synthetic", help="generate synthetic measurement records")
    add_common(p)
    p.add_argument("--s", help="squeezing grid in dB")
    p.add_argument("--n", help="noise photon grid")
    p.add_argument("--chi1", type=float)
    p.add_argument("--chi2", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--noise", type=float, help="Gaussian perturbation amplitude")
    p.add_argument("--seed", type=int)

    return parser


_HANDLERS = {
    "sweep": _cmd_sweep,
    "features": _cmd_features,
    "qkd": _cmd_qkd,
    "fit": _cmd_fit,
    "tomo": _cmd_tomo,
    "validate": _cmd_validate,
    "gen-synthetic": _cmd_gen_synthetic,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help(sys.stderr)
        return 2
    try:
        config = _load_config(getattr(args, "config", None))
        return _HANDLERS[args.command](args, config)
    except ConfigError as exc:
        print(f"tmsflow: {exc}", file=sys.stderr)
        return 2
    except TmsflowError as exc:
        print(f"tmsflow: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
