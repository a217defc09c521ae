"""Plain-text generating-vector files.

Layout::

    n s
    z_1
    ...
    z_s
    # gamma_1 = 1.0000000000000000
    ...
    # Gamma_ratio_1 = 1             (POD weights only)

Weights use 17 significant digits so reading back is lossless.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .wce import GeneratingVector
from .weights import WeightScheme

_COMMENT = re.compile(r"#\s*(gamma|Gamma_ratio)_(\d+)\s*=\s*(\S+)")


def format_vector(gv: GeneratingVector, scheme: WeightScheme | None = None) -> str:
    lines = [f"{gv.n} {gv.s}"]
    lines += [str(z) for z in gv.z]
    if scheme is not None:
        if scheme.gamma is not None:
            lines += [f"# gamma_{i} = {g:.17g}" for i, g in enumerate(scheme.gamma[: gv.s], 1)]
        if scheme.Gamma_ratios is not None:
            lines += [f"# Gamma_ratio_{i} = {g:.17g}" for i, g in enumerate(scheme.Gamma_ratios[: gv.s], 1)]
    return "\n".join(lines) + "\n"


def write_vector(path, gv: GeneratingVector, scheme: WeightScheme | None = None) -> None:
    Path(path).write_text(format_vector(gv, scheme))


def parse_vector(text: str) -> tuple[GeneratingVector, WeightScheme | None]:
    numbers: list[str] = []
    found = {"gamma": {}, "Gamma_ratio": {}}
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _COMMENT.match(line)
            if m:
                found[m.group(1)][int(m.group(2))] = float(m.group(3))
            continue
        numbers.extend(line.split())
    if len(numbers) < 2:
        raise ValueError("vector file must start with 'n s'")
    n, s = int(numbers[0]), int(numbers[1])
    z = [int(v) for v in numbers[2:]]
    if len(z) != s:
        raise ValueError(f"header says s = {s} but {len(z)} components follow")
    gv = GeneratingVector(n, tuple(z))

    def seq(d):
        if not d:
            return None
        if sorted(d) != list(range(1, len(d) + 1)):
            raise ValueError("weight comment indices must run 1..m without gaps")
        return np.array([d[i] for i in range(1, len(d) + 1)])

    gamma, ratios = seq(found["gamma"]), seq(found["Gamma_ratio"])
    if gamma is None:
        return gv, None
    if ratios is None:
        return gv, WeightScheme.product(gamma)
    return gv, WeightScheme.pod(gamma, ratios)


def read_vector(path) -> tuple[GeneratingVector, WeightScheme | None]:
    return parse_vector(Path(path).read_text())
