"""Reproduction of the published error-bound tables.

Every table is run over the grid ``n = 251 .. 32003`` at ``s = 100``. Results
go to one CSV per table plus a plain-text comparison report against the
values in :mod:`lattice_cbc.reference`.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .construct import icbc, dcbc_pod, dcbc_product
from .engine import cbc_pod, cbc_product
from .numerics import fit_power_law
from .reference import GRID, PUBLISHED, S
from .results import ConstructionResult
from .vectorfile import write_vector
from .weights import CoordinateSequence, NormBoundSpec, OrderSequence, lambda_weights

log = logging.getLogger(__name__)

DETERMINISTIC_RTOL = 0.02
VARIANT_RTOL = 0.25
LAMBDA_ATOL = 0.02
DETERMINISTIC_RATE_ATOL = 0.03
VARIANT_RATE_ATOL = 0.06

B_I2 = CoordinateSequence("poly", 2.0)
B_HALF = CoordinateSequence("geo", 0.5)
B_08 = CoordinateSequence("geo", 0.8)
ONE, LINEAR, FACTORIAL = OrderSequence("one"), OrderSequence("linear"), OrderSequence("factorial")


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # cbc-power, cbc-lambda, dcbc, icbc, lambda*
    spec: NormBoundSpec
    param: object = None
    deterministic: bool = False

    @property
    def is_lambda(self) -> bool:
        return self.kind == "lambda*"


def _product_table(b):
    spec = NormBoundSpec(b, ONE)
    return [
        Column("DCBC", "dcbc", spec),
        Column("ICBC", "icbc", spec),
        Column("gamma=i^-1.1", "cbc-power", spec, 1.1, True),
        Column("gamma=i^-2", "cbc-power", spec, 2.0, True),
        Column("gamma(lambda=0.6)", "cbc-lambda", spec, 0.6, True),
        Column("gamma(lambda=1)", "cbc-lambda", spec, 1.0, True),
    ]


def _pod_table(b, B, alt_name, alt_gamma):
    spec = NormBoundSpec(b, B)
    return [
        Column("DCBC Gamma=B", "dcbc", spec, "equal-B"),
        Column(alt_name, "dcbc", spec, alt_gamma),
        Column("ICBC", "icbc", spec),
        Column("lambda*", "lambda*", spec),
    ]


TABLES: dict[int, list[Column]] = {
    1: _product_table(B_I2),
    2: _product_table(B_HALF),
    3: _product_table(B_08),
    4: [
        Column("b=i^-2", "lambda*", NormBoundSpec(B_I2, ONE)),
        Column("b=0.5^i", "lambda*", NormBoundSpec(B_HALF, ONE)),
        Column("b=0.8^i", "lambda*", NormBoundSpec(B_08, ONE)),
    ],
    5: _pod_table(B_I2, LINEAR, "DCBC Gamma=l!", "factorial"),
    6: _pod_table(B_I2, FACTORIAL, "DCBC Gamma=l", "linear"),
    7: _pod_table(B_HALF, LINEAR, "DCBC Gamma=l!", "factorial"),
    8: _pod_table(B_HALF, FACTORIAL, "DCBC Gamma=l", "linear"),
}


@dataclass
class IcbcSettings:
    lambda0: float = 0.75
    tau: float = 1e-3
    k_max: int = 10
    gamma1: float | None = None


def run_column(col: Column, n: int, s: int, settings: IcbcSettings, cache: dict) -> tuple[float, ConstructionResult]:
    """Value of one table cell (``E`` or ``lambda*``) and the run behind it."""
    kind = "icbc" if col.kind == "lambda*" else col.kind
    key = (kind, col.spec, col.param, n, s)
    if key not in cache:
        spec = col.spec
        if kind == "cbc-power":
            res = cbc_product(n, s, np.arange(1, s + 1, dtype=float) ** -col.param, spec)
        elif kind == "cbc-lambda":
            res = cbc_pod(n, s, lambda_weights(spec, col.param, s), spec)
        elif kind == "dcbc":
            if spec.product_form and col.param is None:
                res = dcbc_product(n, s, spec, settings.gamma1)
            else:
                res = dcbc_pod(n, s, spec, col.param, settings.gamma1)
        elif kind == "icbc":
            res, _ = icbc(n, s, spec, settings.lambda0, settings.tau, settings.k_max)
        else:
            raise ValueError(f"unknown column kind {col.kind!r}")
        cache[key] = res
    res = cache[key]
    value = res.meta["lambda_star"] if col.is_lambda else res.E
    return value, res


def _slug(text: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in text).strip("_")


def _row_task(args):
    n, which, s, settings, vector_dir = args
    cache: dict = {}
    out = {}
    t0 = time.perf_counter()
    for t in which:
        for col in TABLES[t]:
            value, res = run_column(col, n, s, settings, cache)
            out[(t, col.name)] = (value, res)
            if vector_dir is not None:
                write_vector(Path(vector_dir) / f"table{t}_{_slug(col.name)}_n{n}.txt", res.gv, res.scheme)
    log.info("n = %d done in %.1f s", n, time.perf_counter() - t0)
    return n, out


@dataclass
class Cell:
    table: int
    column: str
    n: int | None  # None for the rate row
    value: float
    published: float | None
    deviation: float | None
    tolerance: float
    deterministic: bool
    ok: bool


@dataclass
class Reproduction:
    values: dict = field(default_factory=dict)  # (table, column) -> list per n
    runs: dict = field(default_factory=dict)  # (table, column, n) -> ConstructionResult
    rates: dict = field(default_factory=dict)
    cells: list[Cell] = field(default_factory=list)
    grid: tuple = GRID
    wall_time: float = 0.0

    @property
    def deterministic_failures(self) -> list[Cell]:
        return [c for c in self.cells if c.deterministic and not c.ok]

    @property
    def failures(self) -> list[Cell]:
        return [c for c in self.cells if not c.ok]


def round_sig(x: float, digits: int = 2) -> float:
    if x == 0 or not math.isfinite(x):
        return x
    return float(f"{x:.{digits - 1}e}")


def relative_deviation(value: float, published: float) -> float:
    """Deviation after rounding ``value`` to the printed 2 significant figures."""
    return abs(round_sig(value) - published) / abs(published)


def compare(rep: Reproduction) -> None:
    """Fill ``rep.cells`` with per-cell and rate-row verdicts."""
    rep.cells = []
    for (t, name), vals in rep.values.items():
        col = next(c for c in TABLES[t] if c.name == name)
        ref_vals, ref_rate = PUBLISHED[t][name]
        ref_by_n = dict(zip(GRID, ref_vals))
        for n, v in zip(rep.grid, vals):
            pub = ref_by_n.get(n)
            if col.is_lambda:
                tol = LAMBDA_ATOL
                dev = None if pub is None else abs(v - pub)
            else:
                tol = DETERMINISTIC_RTOL if col.deterministic else VARIANT_RTOL
                dev = None if pub is None else relative_deviation(v, pub)
            ok = dev is None or dev <= tol + 1e-12
            rep.cells.append(Cell(t, name, n, v, pub, dev, tol, col.deterministic, ok))
        if (t, name) in rep.rates:
            rate = rep.rates[(t, name)]
            tol = DETERMINISTIC_RATE_ATOL if col.deterministic else VARIANT_RATE_ATOL
            full_grid = tuple(rep.grid) == GRID
            dev = abs(rate - ref_rate) if (ref_rate is not None and full_grid) else None
            ok = dev is None or dev <= tol + 1e-12
            rep.cells.append(Cell(t, name, None, rate, ref_rate, dev, tol, col.deterministic, ok))


def reproduce(which=(1, 2, 3, 4, 5, 6, 7, 8), grid=GRID, s: int = S,
              settings: IcbcSettings | None = None, jobs: int = 1,
              vector_dir=None) -> Reproduction:
    """Run the requested tables over ``grid`` and compare with published values."""
    settings = settings or IcbcSettings()
    t0 = time.perf_counter()
    which = tuple(sorted(set(which)))
    for t in which:
        if t not in TABLES:
            raise ValueError(f"no table {t}; choose from 1..8")
    tasks = [(n, which, s, settings, vector_dir) for n in grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = dict(pool.map(_row_task, tasks))
    else:
        rows = dict(map(_row_task, tasks))
    rep = Reproduction(grid=tuple(grid))
    for t in which:
        for col in TABLES[t]:
            vals = [rows[n][(t, col.name)][0] for n in grid]
            for n in grid:
                rep.runs[(t, col.name, n)] = rows[n][(t, col.name)][1]
            rep.values[(t, col.name)] = vals
            if not col.is_lambda and len(set(grid)) >= 2:
                rep.rates[(t, col.name)] = fit_power_law(zip(grid, vals)).exponent
    compare(rep)
    rep.wall_time = time.perf_counter() - t0
    return rep


def format_table_csv(rep: Reproduction, t: int) -> str:
    cols = [c for c in TABLES[t] if (t, c.name) in rep.values]
    lines = ["n," + ",".join(c.name for c in cols)]
    for i, n in enumerate(rep.grid):
        lines.append(f"{n}," + ",".join(f"{rep.values[(t, c.name)][i]:.4e}" for c in cols))
    if any((t, c.name) in rep.rates for c in cols):
        lines.append("rate," + ",".join(
            f"{rep.rates[(t, c.name)]:.4e}" if (t, c.name) in rep.rates else "" for c in cols))
    return "\n".join(lines) + "\n"


def format_report(rep: Reproduction) -> str:
    lines = ["table,column,n,value,value_2sf,published,deviation,tolerance,kind,status"]
    for c in rep.cells:
        is_lam = next(col for col in TABLES[c.table] if col.name == c.column).is_lambda
        shown = f"{c.value:.3f}" if (is_lam or c.n is None) else f"{round_sig(c.value):.1e}"
        lines.append(",".join([
            str(c.table), c.column, "rate" if c.n is None else str(c.n), f"{c.value:.4e}", shown,
            "" if c.published is None else f"{c.published:g}",
            "" if c.deviation is None else f"{c.deviation:.4f}",
            f"{c.tolerance:g}",
            "deterministic" if c.deterministic else "variant",
            "ok" if c.ok else "FAIL",
        ]))
    n_fail = len(rep.failures)
    lines.append(f"# cells: {len(rep.cells)}, failures: {n_fail} "
                 f"(deterministic: {len(rep.deterministic_failures)})")
    return "\n".join(lines) + "\n"


def write_outputs(rep: Reproduction, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for t in sorted({t for t, _ in rep.values}):
        p = out / f"table{t}.csv"
        p.write_text(format_table_csv(rep, t))
        written.append(p)
    p = out / "comparison.txt"
    p.write_text(format_report(rep))
    written.append(p)
    return written
