"""Command-line front end.

Subcommands::

    lattice-cbc construct ...   build generating vectors over a grid of n
    lattice-cbc wce VECTOR      evaluate a stored vector
    lattice-cbc bound ...       a-priori worst-case error bound for given weights
    lattice-cbc tables ...      reproduce the published error-bound tables

``construct`` also reads an INI file (``--config``) with sections ``[run]``,
``[bounds]``, ``[weights]``, ``[icbc]`` and ``[output]``; command-line flags
override file values.

Exit codes: 0 success, 1 config error, 2 numerical validation failure,
3 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import math
import sys
import time
import warnings
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .construct import dcbc_pod, dcbc_product, icbc, lambda1_gamma1
from .engine import cbc_pod, cbc_product
from .numerics import fit_power_law, is_prime
from .reference import GRID, S
from .results import ConstructionResult
from .vectorfile import read_vector, write_vector
from .wce import wce_pod_fixed_z, wce_product, wce_upper_bound
from .weights import (CoordinateSequence, NormBoundSpec, OrderSequence, WeightScheme,
                      lambda_weights, norm_bound)

log = logging.getLogger("lattice_cbc")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3
VALIDATION_RTOL = 1e-9


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""

    def __init__(self, fld: str, msg: str):
        super().__init__(f"{fld}: {msg}")
        self.field = fld


class ValidationError(RuntimeError):
    pass


# ---------------------------------------------------------------- parsing

def _read_numbers(path: str, fld: str) -> tuple[float, ...]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(fld, f"cannot read {path}: {exc.strerror}") from exc
    vals = []
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        vals.extend(line.replace(",", " ").split())
    try:
        out = tuple(float(v) for v in vals)
    except ValueError as exc:
        raise ConfigError(fld, f"non-numeric entry in {path}") from exc
    if not out:
        raise ConfigError(fld, f"{path} holds no values")
    return out


def _family(text: str, fld: str, choices: tuple[str, ...]) -> tuple[str, str | None]:
    parts = str(text).split(None, 1)
    if not parts:
        raise ConfigError(fld, "empty value")
    kind = parts[0].lower()
    if kind not in choices:
        raise ConfigError(fld, f"unknown family {parts[0]!r}; expected one of {', '.join(choices)}")
    return kind, (parts[1].strip() if len(parts) > 1 else None)


def _float(text, fld: str) -> float:
    try:
        return float(text)
    except (TypeError, ValueError):
        raise ConfigError(fld, f"expected a number, got {text!r}") from None


def parse_b(text: str) -> CoordinateSequence:
    kind, arg = _family(text, "b", ("poly", "geo", "const", "file"))
    if arg is None:
        raise ConfigError("b", f"{kind} needs a parameter")
    try:
        if kind == "file":
            return CoordinateSequence("explicit", values=_read_numbers(arg, "b"))
        return CoordinateSequence(kind, _float(arg, "b"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("b", str(exc)) from exc


def parse_order(text: str, fld: str, extra: tuple[str, ...] = ()) -> OrderSequence | str:
    kind, arg = _family(text, fld, ("one", "linear", "factorial", "file") + extra)
    if kind in extra:
        return kind
    if kind == "file":
        if arg is None:
            raise ConfigError(fld, "file needs a path")
        try:
            return OrderSequence("explicit", _read_numbers(arg, fld))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(fld, str(exc)) from exc
    return OrderSequence(kind)


def parse_n(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        items = [str(t) for t in text]
    else:
        items = str(text).replace(",", " ").split()
    if not items:
        raise ConfigError("n", "no values given")
    out = []
    for t in items:
        try:
            v = int(t)
        except ValueError:
            raise ConfigError("n", f"expected integers, got {t!r}") from None
        if v < 2:
            raise ConfigError("n", f"entries must be >= 2, got {v}")
        out.append(v)
    return out


@dataclass
class RunConfig:
    algorithm: str = "dcbc"
    n: list = field(default_factory=lambda: [251])
    s: int = S
    b: str = "poly 2"
    B: str = "one"
    weights: str | None = None
    Gamma: str | None = None
    gamma1: str = "default"
    lambda0: float = 0.75
    tau: float = 1e-3
    k_max: int = 10
    vector: str | None = None
    table: str | None = None
    history: str | None = None
    format: str = "csv"

    # resolved values
    spec: NormBoundSpec | None = field(default=None, repr=False)
    Gamma_source: object = field(default=None, repr=False)
    gamma1_value: float | None = field(default=None, repr=False)

    def validate(self) -> "RunConfig":
        if self.algorithm not in ("cbc", "dcbc", "icbc"):
            raise ConfigError("algorithm", f"expected cbc, dcbc or icbc, got {self.algorithm!r}")
        self.n = parse_n(self.n)
        try:
            self.s = int(self.s)
        except (TypeError, ValueError):
            raise ConfigError("s", f"expected an integer, got {self.s!r}") from None
        if self.s < 1:
            raise ConfigError("s", "must be at least 1")
        self.spec = NormBoundSpec(parse_b(self.b), parse_order(self.B, "B"))
        if self.algorithm == "cbc":
            if self.weights is None:
                raise ConfigError("weights", "required for algorithm cbc")
            self.weight_scheme(self.s)  # parse eagerly
        elif self.weights is not None:
            raise ConfigError("weights", f"only used with algorithm cbc, not {self.algorithm}")
        if self.algorithm == "dcbc" and not self.spec.product_form:
            if self.Gamma is None:
                raise ConfigError("Gamma", "required for dcbc when B is not 'one'")
            self.Gamma_source = parse_order(self.Gamma, "Gamma", ("equal-b",))
            if self.Gamma_source == "equal-b":
                self.Gamma_source = "equal-B"
        elif self.Gamma is not None:
            raise ConfigError("Gamma", "only used with dcbc and a non-trivial B")
        g1 = str(self.gamma1).strip().lower()
        if g1 == "default":
            self.gamma1_value = None
        elif g1 == "lambda1":
            self.gamma1_value = lambda1_gamma1(self.spec)
        else:
            self.gamma1_value = _float(self.gamma1, "gamma1")
            if not self.gamma1_value > 0:
                raise ConfigError("gamma1", "must be positive")
        self.lambda0 = _float(self.lambda0, "lambda0")
        if not 0.5 < self.lambda0 <= 1.0:
            raise ConfigError("lambda0", "must lie in (1/2, 1]")
        self.tau = _float(self.tau, "tau")
        if not self.tau > 0:
            raise ConfigError("tau", "must be positive")
        try:
            self.k_max = int(self.k_max)
        except (TypeError, ValueError):
            raise ConfigError("k_max", f"expected an integer, got {self.k_max!r}") from None
        if self.k_max < 1:
            raise ConfigError("k_max", "must be at least 1")
        if self.format != "csv":
            raise ConfigError("format", f"only csv is supported, got {self.format!r}")
        if self.vector is not None and len(self.n) > 1 and "{n}" not in self.vector:
            raise ConfigError("vector", "path must contain {n} when several n are given")
        if self.history is not None and len(self.n) > 1 and "{n}" not in self.history:
            raise ConfigError("history", "path must contain {n} when several n are given")
        return self

    def weight_scheme(self, s: int) -> WeightScheme:
        kind, arg = _family(self.weights, "weights", ("product-poly", "product-geo", "lambda", "file"))
        if arg is None:
            raise ConfigError("weights", f"{kind} needs a parameter")
        if kind == "file":
            vals = _read_numbers(arg, "weights")
            if len(vals) < s:
                raise ConfigError("weights", f"{arg} has {len(vals)} values, need {s}")
            if min(vals[:s]) <= 0:
                raise ConfigError("weights", "weights must be positive")
            return WeightScheme.product(vals[:s])
        x = _float(arg, "weights")
        i = np.arange(1, s + 1, dtype=float)
        if kind == "product-poly":
            return WeightScheme.product(i ** -x)
        if kind == "product-geo":
            if not 0 < x:
                raise ConfigError("weights", "geometric ratio must be positive")
            return WeightScheme.product(x ** i)
        if not 0.5 < x <= 1.0:
            raise ConfigError("weights", "lambda must lie in (1/2, 1]")
        return lambda_weights(self.spec, x, s)


_SECTIONS = {
    "run": ("algorithm", "n", "s"),
    "bounds": ("b", "B"),
    "weights": ("weights", "Gamma", "gamma1"),
    "icbc": ("lambda0", "tau", "k_max"),
    "output": ("vector", "table", "history", "format"),
}


def load_config(path) -> dict:
    """Read an INI run description into a flat ``{field: text}`` dict."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keep B and Gamma case-sensitive
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from exc
    except configparser.Error as exc:
        raise ConfigError("config", str(exc).splitlines()[0]) from exc
    out = {}
    for sec in cp.sections():
        if sec not in _SECTIONS:
            raise ConfigError(sec, f"unknown section; expected one of {', '.join(_SECTIONS)}")
        for key, val in cp.items(sec):
            if key not in _SECTIONS[sec]:
                raise ConfigError(f"{sec}.{key}", "unknown key")
            out[key] = val
    return out


# ---------------------------------------------------------------- running

def _warn_composite(ns):
    for n in ns:
        if not is_prime(n) or n == 2:
            log.warning("n = %d is not an odd prime; using the O(n^2) kernel", n)


def construct_one(cfg: RunConfig, n: int) -> ConstructionResult:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # composite n is reported once up front
        if cfg.algorithm == "cbc":
            scheme = cfg.weight_scheme(cfg.s)
            if scheme.kind == "product":
                return cbc_product(n, cfg.s, scheme.gamma, cfg.spec)
            return cbc_pod(n, cfg.s, scheme, cfg.spec)
        if cfg.algorithm == "dcbc":
            if cfg.spec.product_form:
                return dcbc_product(n, cfg.s, cfg.spec, cfg.gamma1_value)
            return dcbc_pod(n, cfg.s, cfg.spec, cfg.Gamma_source, cfg.gamma1_value)
        res, _ = icbc(n, cfg.s, cfg.spec, cfg.lambda0, cfg.tau, cfg.k_max)
        return res


def check_result(res: ConstructionResult) -> None:
    """Recompute ``e^2`` and ``M`` independently of the construction loop."""
    e = wce_pod_fixed_z(res.gv, res.scheme.as_pod())
    if not math.isfinite(res.E) or res.E <= 0:
        raise ValidationError(f"n = {res.gv.n}: non-finite bound E = {res.E!r}")
    if abs(e * e - res.e2) > VALIDATION_RTOL * res.e2:
        raise ValidationError(f"n = {res.gv.n}: worst-case error recomputation disagrees "
                              f"({e * e:.17g} vs {res.e2:.17g})")


def history_csv(res: ConstructionResult) -> str:
    s = res.gv.s
    gamma = res.scheme.product_part(s)
    ratios = res.scheme.order_ratios(s)
    lines = ["dim,z,gamma,Gamma_ratio,e2,M,E"]
    E = res.E_history
    for i in range(s):
        lines.append(f"{i + 1},{res.gv.z[i]},{gamma[i]:.10e},{ratios[i]:.10e},"
                     f"{res.e2_history[i]:.10e},{res.M_history[i]:.10e},{E[i]:.10e}")
    return "\n".join(lines) + "\n"


def run_table_csv(cfg: RunConfig, rows) -> str:
    icbc_mode = cfg.algorithm == "icbc"
    head = "n,E,e2,M" + (",lambda_star" if icbc_mode else "") + ",wall_time"
    lines = [head]
    for n, res, wall in rows:
        cells = [str(n), f"{res.E:.4e}", f"{res.e2:.4e}", f"{res.M:.4e}"]
        if icbc_mode:
            cells.append(f"{res.meta['lambda_star']:.4e}")
        cells.append(f"{wall:.3f}")
        lines.append(",".join(cells))
    if len({n for n, _, _ in rows}) >= 2:
        fit = fit_power_law([(n, res.E) for n, res, _ in rows])
        lines.append("rate," + f"{fit.exponent:.4e}" + ",,," + ("," if icbc_mode else ""))
    return "\n".join(lines) + "\n"


class _Outputs:
    """Tracks written files so a failed run leaves nothing half-done."""

    def __init__(self):
        self.paths: list[Path] = []

    def write(self, path, text: str) -> Path:
        p = Path(path)
        if p.parent != Path("."):
            p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
        self.paths.append(p)
        return p

    def vector(self, path, gv, scheme) -> Path:
        p = Path(path)
        if p.parent != Path("."):
            p.parent.mkdir(parents=True, exist_ok=True)
        write_vector(p, gv, scheme)
        self.paths.append(p)
        return p

    def remove(self):
        for p in self.paths:
            try:
                p.unlink()
            except OSError:
                pass
        self.paths.clear()


def run(cfg: RunConfig, stdout=None) -> int:
    """Execute a validated configuration; returns the exit status."""
    stdout = stdout or sys.stdout
    _warn_composite(cfg.n)
    outputs = _Outputs()
    rows = []
    try:
        for n in cfg.n:
            t0 = time.perf_counter()
            res = construct_one(cfg, n)
            wall = time.perf_counter() - t0
            check_result(res)
            rows.append((n, res, wall))
            extra = f"  lambda* = {res.meta['lambda_star']:.4f}" if cfg.algorithm == "icbc" else ""
            print(f"n = {n:>6d}  E = {res.E:.4e}  e = {math.sqrt(res.e2):.4e}{extra}  ({wall:.2f} s)",
                  file=stdout)
            if cfg.vector:
                outputs.vector(cfg.vector.format(n=n), res.gv, res.scheme)
            if cfg.history:
                outputs.write(cfg.history.format(n=n), history_csv(res))
        table = run_table_csv(cfg, rows)
        if cfg.table:
            outputs.write(cfg.table, table)
        else:
            stdout.write(table)
    except ValidationError as exc:
        outputs.remove()
        log.error("validation failed: %s", exc)
        return EXIT_NUMERIC
    except OSError as exc:
        outputs.remove()
        log.error("I/O error: %s", exc)
        return EXIT_IO
    except BaseException:
        outputs.remove()
        raise
    return EXIT_OK


# ---------------------------------------------------------------- subcommands

_CONSTRUCT_FLAGS = {
    "algorithm": dict(choices=("cbc", "dcbc", "icbc")),
    "n": dict(nargs="+", help="one or more point counts"),
    "s": dict(help="dimension"),
    "b": dict(help="'poly c', 'geo r', 'const v' or 'file PATH'"),
    "B": dict(help="'one', 'linear', 'factorial' or 'file PATH'"),
    "weights": dict(help="cbc only: 'product-poly c', 'product-geo r', 'lambda L' or 'file PATH'"),
    "Gamma": dict(help="dcbc with B != one: 'equal-B', 'factorial', 'linear' or 'file PATH'"),
    "gamma1": dict(help="'default', 'lambda1' or a positive number"),
    "lambda0": dict(help="icbc starting lambda"),
    "tau": dict(help="icbc relative gradient tolerance"),
    "k_max": dict(help="icbc maximum refinements"),
    "vector": dict(help="vector file path; '{n}' is replaced by n"),
    "table": dict(help="table CSV path (stdout if omitted)"),
    "history": dict(help="per-dimension CSV path; '{n}' is replaced by n"),
    "format": dict(help="table format (csv)"),
}


def _add_spec_flags(p):
    p.add_argument("--b", required=False, help=_CONSTRUCT_FLAGS["b"]["help"])
    p.add_argument("--B", default="one", help=_CONSTRUCT_FLAGS["B"]["help"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lattice-cbc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build generating vectors over a grid of n")
    p.add_argument("--config", help="INI run description")
    for name, kw in _CONSTRUCT_FLAGS.items():
        p.add_argument("--" + name.replace("_", "-"), dest=name, default=None, **kw)

    p = sub.add_parser("wce", help="evaluate a stored generating vector")
    p.add_argument("vector")
    p.add_argument("--weights", help="override weights: 'product-poly c', 'product-geo r', "
                                     "'lambda L' or 'file PATH'")
    _add_spec_flags(p)

    p = sub.add_parser("bound", help="a-priori worst-case error bound for given weights")
    p.add_argument("--vector", help="take n, s and weights from a vector file")
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--weights")
    _add_spec_flags(p)
    p.add_argument("--lam", type=float, nargs="+",
                   default=[round(0.55 + 0.05 * k, 2) for k in range(10)])

    p = sub.add_parser("tables", help="reproduce the published error-bound tables")
    p.add_argument("--which", type=int, nargs="+", default=list(range(1, 9)))
    p.add_argument("--out-dir", default="tables_out")
    p.add_argument("--n", type=int, nargs="+", default=list(GRID), help="grid override")
    p.add_argument("--s", type=int, default=S)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--vectors", action="store_true", help="also write every generating vector")
    p.add_argument("--gamma1", default="default")
    p.add_argument("--lambda0", type=float, default=0.75)
    p.add_argument("--tau", type=float, default=1e-3)
    p.add_argument("--k-max", dest="k_max", type=int, default=10)
    return parser


def _cmd_construct(args, stdout) -> int:
    values = load_config(args.config) if args.config else {}
    for name in _CONSTRUCT_FLAGS:
        v = getattr(args, name)
        if v is not None:
            values[name] = v
    known = {f.name for f in fields(RunConfig)}
    cfg = RunConfig(**{k: v for k, v in values.items() if k in known}).validate()
    return run(cfg, stdout)


def _scheme_for(args, s, spec) -> WeightScheme:
    cfg = RunConfig(algorithm="cbc", weights=args.weights, spec=spec)
    return cfg.weight_scheme(s)


def _spec_from(args) -> NormBoundSpec | None:
    if args.b is None:
        return None
    return NormBoundSpec(parse_b(args.b), parse_order(args.B, "B"))


def _cmd_wce(args, stdout) -> int:
    try:
        gv, scheme = read_vector(args.vector)
    except OSError as exc:
        log.error("cannot read %s: %s", args.vector, exc.strerror)
        return EXIT_IO
    except ValueError as exc:
        raise ConfigError("vector", str(exc)) from exc
    spec = _spec_from(args)
    if args.weights is not None:
        if args.weights.split()[0] == "lambda" and spec is None:
            raise ConfigError("b", "lambda weights need --b")
        scheme = _scheme_for(args, gv.s, spec)
    if scheme is None:
        raise ConfigError("weights", "vector file has no weights; pass --weights")
    if scheme.kind == "product":
        e2 = wce_product(gv, scheme.gamma[: gv.s])
    else:
        e2 = wce_pod_fixed_z(gv, scheme.as_pod(gv.s), history=True)
    print(f"n = {gv.n}  s = {gv.s}", file=stdout)
    print(f"e2 = {e2[-1]:.10e}", file=stdout)
    print(f"e  = {math.sqrt(e2[-1]):.10e}", file=stdout)
    if spec is not None:
        M = norm_bound(spec.b(gv.s), scheme, spec.B.ratios(gv.s))
        print(f"M  = {M[-1]:.10e}", file=stdout)
        print(f"E  = {math.sqrt(e2[-1] * M[-1]):.10e}", file=stdout)
    if not np.all(np.isfinite(e2)):
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_bound(args, stdout) -> int:
    spec = _spec_from(args)
    measured = None
    if args.vector:
        try:
            gv, scheme = read_vector(args.vector)
        except OSError as exc:
            log.error("cannot read %s: %s", args.vector, exc.strerror)
            return EXIT_IO
        except ValueError as exc:
            raise ConfigError("vector", str(exc)) from exc
        n, s = gv.n, gv.s
        if args.weights is not None:
            scheme = _scheme_for(args, s, spec)
        if scheme is None:
            raise ConfigError("weights", "vector file has no weights; pass --weights")
        measured = wce_pod_fixed_z(gv, scheme.as_pod(s))
    else:
        if args.n is None or args.s is None or args.weights is None:
            raise ConfigError("n", "give --n, --s and --weights, or --vector")
        if args.n < 2 or args.s < 1:
            raise ConfigError("n", "need n >= 2 and s >= 1")
        n, s = args.n, args.s
        if args.weights.split()[0] == "lambda" and spec is None:
            raise ConfigError("b", "lambda weights need --b")
        scheme = _scheme_for(args, s, spec)
    header = "lambda,bound" + (",measured" if measured is not None else "")
    print(header, file=stdout)
    status = EXIT_OK
    for lam in args.lam:
        if not 0.5 < lam <= 1.0:
            raise ConfigError("lam", f"values must lie in (1/2, 1], got {lam}")
        ub = wce_upper_bound(scheme, n, s, lam)
        row = f"{lam:.4f},{ub:.6e}"
        if measured is not None:
            row += f",{measured:.6e}"
            if measured > ub * (1 + 1e-12):
                status = EXIT_NUMERIC
        print(row, file=stdout)
    return status


def _cmd_tables(args, stdout) -> int:
    from .tables import IcbcSettings, format_report, reproduce, write_outputs

    bad = [t for t in args.which if t not in range(1, 9)]
    if bad:
        raise ConfigError("which", f"tables are numbered 1..8, got {bad}")
    parse_n(args.n)
    g1 = str(args.gamma1).lower()
    gamma1 = None if g1 == "default" else _float(args.gamma1, "gamma1")
    if gamma1 is not None and gamma1 <= 0:
        raise ConfigError("gamma1", "must be positive")
    settings = IcbcSettings(args.lambda0, args.tau, args.k_max, gamma1)
    out = Path(args.out_dir)
    vec_dir = None
    created = not out.exists()
    try:
        out.mkdir(parents=True, exist_ok=True)
        if args.vectors:
            vec_dir = out / "vectors"
            vec_dir.mkdir(exist_ok=True)
        rep = reproduce(args.which, tuple(args.n), args.s, settings, args.jobs, vec_dir)
        written = write_outputs(rep, out)
    except OSError as exc:
        if created:
            import shutil
            shutil.rmtree(out, ignore_errors=True)
        log.error("I/O error: %s", exc)
        return EXIT_IO
    for p in written:
        print(f"wrote {p}", file=stdout)
    fails = rep.failures
    print(f"{len(rep.cells)} cells compared, {len(fails)} outside tolerance "
          f"({len(rep.deterministic_failures)} in deterministic columns)", file=stdout)
    for c in fails:
        where = "rate" if c.n is None else f"n = {c.n}"
        print(f"  table {c.table} {c.column} {where}: {c.value:.4e} vs {c.published:g} "
              f"(deviation {c.deviation:.4f}, tolerance {c.tolerance:g})", file=stdout)
    return EXIT_NUMERIC if rep.deterministic_failures else EXIT_OK


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    handlers = {"construct": _cmd_construct, "wce": _cmd_wce, "bound": _cmd_bound,
                "tables": _cmd_tables}
    try:
        return handlers[args.command](args, stdout)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except ValueError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
