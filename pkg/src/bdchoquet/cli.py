"""Config-driven experiment runner.

Config files are flat ``key=value`` lines; ``#`` starts a comment and nested
records use dotted keys (``operator.mu=sin-lebesgue``).  Output is CSV with
``# key=value`` metadata lines.  Exit codes: 0 all checks passed, 1 some check
failed, 2 configuration error (nothing is written).
"""

from __future__ import annotations

import argparse
import hashlib
import io
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

import numpy as np

from . import __version__
from .bernstein import classical_bernstein, classical_genuine, durrmeyer_borel, grid_for
from .capacities import Dirac, LebesgueBorel, check_structure
from .catalog import (
    KINDS,
    THEOREMS,
    _float,
    _int,
    list_catalog,
    resolve_capacity,
    resolve_family,
    resolve_function,
)
from .choquet import BetaQuadrature, SampledFunction1D, SampledFunctionSimplex, choquet_integral, property_suite
from .error_analysis import (
    improvement_check,
    lemma42_bruteforce,
    lemma42_discriminant,
    lemma42_sup,
    simplex_points,
    thm31i_check,
    thm31ii_check,
    thm33_check,
    thm34_check,
    thm41_bound,
)
from .exceptions import ConfigurationError, StrictPositivityError
from .operators import (
    GenuineFamily,
    dbar,
    dn_possibility,
    dn_single_mu,
    dstar,
    dtilde,
    genuine_u,
    mn_gamma,
)
from .sets import IntervalSet, canonicalize

BOUND_COLUMNS = ("theorem", "n", "x", "lhs", "rhs", "margin", "passed")


# ---------------------------------------------------------------------------
# config parsing


def parse_config(text: str) -> dict:
    cfg: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"line {lineno}: empty key")
        if key in cfg:
            raise ConfigurationError(f"field '{key}' is set twice")
        cfg[key] = value
    return cfg


def parse_int_list(raw: str, key: str = "n") -> list[int]:
    """'16', '2,4,8', '[2, 4, 8]', '2..64' (inclusive) or combinations like '2..4,8'."""
    body = raw.strip().strip("[]")
    out: list[int] = []
    try:
        for part in body.split(","):
            part = part.strip()
            if ".." in part:
                a, b = (int(s) for s in part.split(".."))
                if b < a:
                    raise ValueError
                out.extend(range(a, b + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise ConfigurationError(f"field '{key}': cannot parse integer list {raw!r}") from None
    if not out:
        raise ConfigurationError(f"field '{key}': empty list")
    return sorted(set(out))


def config_hash(cfg: dict) -> str:
    canon = "\n".join(f"{k}={cfg[k]}" for k in sorted(cfg))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _ns(cfg: dict) -> list[int]:
    if "n" not in cfg:
        raise ConfigurationError("field 'n' is required")
    ns = parse_int_list(cfg["n"])
    if min(ns) < 1:
        raise ConfigurationError("field 'n': values must be >= 1")
    return ns


def _xs(cfg: dict) -> np.ndarray:
    if "x" in cfg:
        try:
            xs = np.array([float(v) for v in cfg["x"].strip("[]").split(",")])
        except ValueError:
            raise ConfigurationError(f"field 'x': cannot parse {cfg['x']!r}") from None
        if np.any(xs < 0) or np.any(xs > 1):
            raise ConfigurationError("field 'x': points must lie in [0, 1]")
        return xs
    pts = _int(cfg, "xgrid", 101)
    if pts < 2:
        raise ConfigurationError("field 'xgrid' must be >= 2")
    return np.linspace(0.0, 1.0, pts)


def _theorem(cfg: dict) -> str:
    name = cfg.get("theorem")
    if name is None:
        raise ConfigurationError("field 'theorem' is required")
    if not name.startswith(("thm-", "lemma-")) and name != "improvement":
        name = "lemma-4.2" if name == "4.2" else f"thm-{name}"
    if name not in THEOREMS:
        raise ConfigurationError(f"field 'theorem': unknown theorem {cfg['theorem']!r}")
    return name


def _grid(cfg: dict, n: int) -> int | None:
    return _int(cfg, "M") if "M" in cfg else grid_for(n)


def _sampled(cfg: dict, n: int) -> SampledFunction1D:
    M = _grid(cfg, n)
    if M < 1:
        raise ConfigurationError("field 'M' must be >= 1")
    return SampledFunction1D.from_callable(resolve_function(cfg), M)


# ---------------------------------------------------------------------------
# operators by name


def _evaluate_operator(cfg: dict, n: int, xs: np.ndarray) -> np.ndarray:
    name = cfg.get("operator")
    if name is None:
        raise ConfigurationError("field 'operator' is required")
    fs = _sampled(cfg, n)
    f = fs.func
    try:
        if name == "bernstein":
            return classical_bernstein(f, n, xs)
        if name == "durrmeyer":
            delta = resolve_capacity(cfg, "operator.delta") if "operator.delta" in cfg else LebesgueBorel()
            if not delta.additive:
                raise ConfigurationError("field 'operator.delta': durrmeyer needs an additive capacity")
            return durrmeyer_borel(fs, n, xs, delta)
        if name == "genuine":
            return classical_genuine(fs, n, xs)
        if name == "mn-gamma":
            return mn_gamma(fs, n, xs, resolve_family(cfg, "operator.family")).value
        if name == "dn-possibility":
            return dn_possibility(fs, n, xs).value
        if name == "dn-single-mu":
            return dn_single_mu(fs, n, xs, resolve_capacity(cfg, "operator.mu")).value
        if name in ("dbar", "dtilde", "dstar"):
            op = {"dbar": dbar, "dtilde": dtilde, "dstar": dstar}[name]
            delta = resolve_capacity(cfg, "operator.delta") if "operator.delta" in cfg else LebesgueBorel()
            mu = resolve_capacity(cfg, "operator.mu")
            try:
                return op(fs, n, xs, delta, mu).value
            except ConfigurationError as e:
                raise ConfigurationError(f"field 'operator.mu': {e}") from None
        if name == "genuine-u":
            nu0 = resolve_capacity(cfg, "operator.nu0") if "operator.nu0" in cfg else Dirac(0.0)
            mid = resolve_capacity(cfg, "operator.middle") if "operator.middle" in cfg else LebesgueBorel()
            fam = GenuineFamily(nu0, resolve_capacity(cfg, "operator.nun"), mid)
            return genuine_u(fs, n, xs, fam).value
    except StrictPositivityError as e:
        raise ConfigurationError(f"field 'operator': {e}") from None
    raise ConfigurationError(f"field 'operator': unknown operator {name!r}")


# ---------------------------------------------------------------------------
# experiment kinds; each returns (columns, rows, all_passed)


def _integrate(cfg: dict):
    f = resolve_function(cfg)
    cap = resolve_capacity(cfg, "capacity")
    M = _int(cfg, "M", 2048)
    fs = SampledFunction1D.from_callable(f, M)
    A = IntervalSet.full()
    if "set" in cfg:
        try:
            pieces = [tuple(float(v) for v in iv.strip().strip("[]").split(",")) for iv in cfg["set"].split(";")]
            A = canonicalize(pieces)
        except ValueError as e:
            raise ConfigurationError(f"field 'set': {e}") from None
    method = cfg.get("method", "sorted")
    if method == "sorted":
        value = choquet_integral(fs, A, cap)
    elif method == "beta":
        value = choquet_integral(fs, A, cap, BetaQuadrature())
    else:
        raise ConfigurationError(f"field 'method': unknown method {method!r}")
    row = {"f": cfg["f"], "capacity": cap.describe(), "method": method, "M": M, "value": value}
    return ("f", "capacity", "method", "M", "value"), [row], True


def _operator_eval_cell(cfg: dict, n: int) -> list[dict]:
    xs = _xs(cfg)
    vals = np.atleast_1d(_evaluate_operator(cfg, n, xs))
    fx = np.asarray(resolve_function(cfg)(xs), dtype=float) * np.ones_like(xs)
    return [
        {"operator": cfg["operator"], "n": n, "x": float(x), "value": float(v), "f": float(y), "error": float(v - y)}
        for x, v, y in zip(xs, vals, fx)
    ]


def _compare_cell(cfg: dict, n: int) -> list[dict]:
    base = cfg.get("baseline")
    if base not in ("bernstein", "durrmeyer", "genuine"):
        raise ConfigurationError(f"field 'baseline': expected bernstein, durrmeyer or genuine, got {base!r}")
    xs = _xs(cfg)
    vals = np.atleast_1d(_evaluate_operator(cfg, n, xs))
    ref = np.atleast_1d(_evaluate_operator({**cfg, "operator": base}, n, xs))
    return [
        {"operator": cfg["operator"], "baseline": base, "n": n, "x": float(x), "value": float(v),
         "reference": float(r), "difference": float(v - r)}
        for x, v, r in zip(xs, vals, ref)
    ]


def _sweep_cell(cfg: dict, n: int) -> list[dict]:
    rows = _operator_eval_cell(cfg, n)
    errs = np.abs([r["error"] for r in rows])
    return [{"operator": cfg["operator"], "n": n, "sup_error": float(errs.max()), "mean_error": float(errs.mean())}]


def _bound_cell(cfg: dict, n: int) -> list[dict]:
    thm = _theorem(cfg)
    xs = _xs(cfg)
    if thm == "lemma-4.2":
        if n < 2:
            raise ConfigurationError("field 'n': the lemma needs n >= 2")
        rows = []
        for x in xs:
            dev = max(abs(lemma42_sup(n, k, float(x))[2] - lemma42_bruteforce(n, k, float(x))) for k in range(n + 1))
            disc = min(lemma42_discriminant(n, k, float(x)) for k in range(n + 1))
            ok = dev <= 1e-5 and disc >= 1
            rows.append({"theorem": thm, "n": n, "x": float(x), "lhs": dev, "rhs": 1e-5,
                         "margin": 1e-5 - dev, "passed": ok})
        return rows
    if thm == "improvement":
        mu = resolve_capacity(cfg, "mu")
        rep = improvement_check(resolve_function(cfg), n, mu, genuine=cfg.get("genuine", "false") == "true")
        return [{"theorem": thm, "n": n, "x": "interior", "lhs": rep.c_n, "rhs": rep.f1,
                 "margin": rep.f1 - rep.c_n, "passed": rep.passed}]
    if thm == "thm-4.1":
        if n < 2:
            raise ConfigurationError("field 'n': the estimate needs n >= 2")
        reports = thm41_bound(_sampled(cfg, n), n, xs)
    elif thm == "thm-3.1i":
        family = resolve_family(cfg, "family")
        if cfg.get("d", "1") == "2":
            N = _int(cfg, "N", 32)
            F = SampledFunctionSimplex.from_callable(resolve_function(cfg, simplex=True), N)
            K = _int(cfg, "lattice", 10)
            reports = [thm31i_check(F, n, p, family) for p in simplex_points(K)]
        else:
            fs = _sampled(cfg, n)
            reports = [thm31i_check(fs, n, float(x), family) for x in xs]
    elif thm == "thm-3.1ii":
        reports = [thm31ii_check(_sampled(cfg, n), n, resolve_family(cfg, "family"), points=len(xs))]
    else:
        delta = resolve_capacity(cfg, "delta") if "delta" in cfg else LebesgueBorel()
        mu = resolve_capacity(cfg, "mu")
        op = cfg.get("operator", "dbar")
        if thm == "thm-3.3":
            reports = [thm33_check(resolve_function(cfg), n, delta, mu, M=_grid(cfg, n), operator=op)]
        else:
            p = _float(cfg, "p", 2.0)
            if not p > 1:
                raise ConfigurationError("field 'p': the L^p estimate needs p > 1")
            reports = [thm34_check(resolve_function(cfg), n, delta, mu, p, M=_grid(cfg, n), operator=op)]
    return [r.row() for r in reports]


_CELLS = {
    "operator-eval": (_operator_eval_cell, ("operator", "n", "x", "value", "f", "error")),
    "compare": (_compare_cell, ("operator", "baseline", "n", "x", "value", "reference", "difference")),
    "sweep": (_sweep_cell, ("operator", "n", "sup_error", "mean_error")),
    "bound-check": (_bound_cell, BOUND_COLUMNS),
}


def _run_cell(args: tuple) -> list[dict]:
    kind, cfg, n = args
    return _CELLS[kind][0](cfg, n)


def _property_suite(cfg: dict):
    if "seed" not in cfg:
        raise ConfigurationError("field 'seed' is required for property-suite")
    seed = _int(cfg, "seed")
    trials = _int(cfg, "trials", 500)
    cap = resolve_capacity(cfg, "capacity")
    rows = []
    for name, res in property_suite(cap, seed=seed, trials=trials).items():
        rows.append({"property": name, "checked": res.checked, "failures": res.failures, "worst": res.worst})
    rep = check_structure(cap, trials=_int(cfg, "structure_trials", 1000), seed=seed)
    rows.append({"property": "structure-monotone", "checked": rep.trials, "failures": int(not rep.monotone_ok),
                 "worst": 0.0})
    if cap.submodular:
        rows.append({"property": "structure-submodular", "checked": rep.trials,
                     "failures": int(not rep.submodular_ok), "worst": 0.0})
    ok = all(r["failures"] == 0 for r in rows)
    return ("property", "checked", "failures", "worst"), rows, ok


def _sort_key(row: dict, columns: Sequence[str]):
    key = []
    for c in columns:
        if c not in ("theorem", "operator", "property", "n", "x"):
            continue
        v = row[c]
        if isinstance(v, tuple):
            key.append((1, v))
        elif isinstance(v, str):
            key.append((2, v))
        else:
            key.append((0, (float(v),)))
    return tuple(key)


def run(cfg: dict, jobs: int = 1):
    """Execute a parsed config.  Returns (columns, sorted rows, all_passed)."""
    kind = cfg.get("kind")
    if kind not in KINDS:
        raise ConfigurationError(f"field 'kind': expected one of {', '.join(KINDS)}, got {kind!r}")
    if kind == "integrate":
        return _integrate(cfg)
    if kind == "property-suite":
        return _property_suite(cfg)
    ns = _ns(cfg)
    fn, columns = _CELLS[kind]
    tasks = [(kind, cfg, n) for n in ns]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_cell, tasks))
    else:
        chunks = [_run_cell(t) for t in tasks]
    rows = sorted((r for chunk in chunks for r in chunk), key=lambda r: _sort_key(r, columns))
    ok = all(r.get("passed", True) for r in rows)
    if kind == "compare" and "tolerance" in cfg:
        tol = _float(cfg, "tolerance")
        ok = ok and all(abs(r["difference"]) <= tol for r in rows)
    return columns, rows, ok


# ---------------------------------------------------------------------------
# CSV


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    if isinstance(v, tuple):
        return ";".join(_fmt(u) for u in v)
    return str(v)


def render_csv(cfg: dict, columns: Sequence[str], rows: list[dict], ok: bool) -> str:
    buf = io.StringIO()
    buf.write("# tool=bdchoquet\n")
    buf.write(f"# version={__version__}\n")
    buf.write(f"# config_hash={config_hash(cfg)}\n")
    buf.write(f"# kind={cfg['kind']}\n")
    if "seed" in cfg:
        buf.write(f"# seed={cfg['seed']}\n")
    buf.write(f"# all_passed={'true' if ok else 'false'}\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(r[c]) for c in columns) + "\n")
    return buf.getvalue()


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".bdchoquet-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="bdchoquet", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="experiment config file (key=value lines)")
    parser.add_argument("--out", help="CSV output path (default: stdout)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    parser.add_argument("--list", action="store_true", help="print the built-in catalog and exit")
    args = parser.parse_args(argv)

    if args.list:
        sys.stdout.write(list_catalog())
        return 0
    if not args.config:
        parser.print_usage(sys.stderr)
        print("bdchoquet: error: --config is required (or use --list)", file=sys.stderr)
        return 2
    try:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
        if args.seed is not None:
            cfg["seed"] = str(args.seed)
        if args.jobs < 1:
            raise ConfigurationError("--jobs must be >= 1")
        columns, rows, ok = run(cfg, jobs=args.jobs)
    except OSError as e:
        print(f"bdchoquet: cannot read config: {e}", file=sys.stderr)
        return 2
    except ConfigurationError as e:
        print(f"bdchoquet: configuration error: {e}", file=sys.stderr)
        return 2
    text = render_csv(cfg, columns, rows, ok)
    if args.out:
        _write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
