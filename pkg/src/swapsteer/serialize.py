"""Correlation-table files, scenario descriptions and JSON reports."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import UsageError
from .network import (
    MAX_NODES,
    CorrelationTable,
    Measurement,
    RingNetwork,
    bell_measurement,
    bell_source,
    ideal_network,
    maximally_mixed,
    product_basis_measurement,
)
from .noise import noisy_bell_measurement, werner_state
from .qcore import DensityOperator, max_entangled, proj
from .universal import random_npt_state

CSV_DIGITS = 12


def table_to_csv(table: CorrelationTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["outcomes", "probability"])
    for idx, p in table.items():
        writer.writerow(["".join(map(str, idx)), f"{p:.{CSV_DIGITS}g}"])
    return buf.getvalue()


def table_from_csv(text: str) -> CorrelationTable:
    """Parse ``outcomes,probability`` rows; cells that are absent are zero."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != ["outcomes", "probability"]:
        raise UsageError(f"csv header must be 'outcomes,probability', got {header}")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2 or not row[0].isdigit():
            raise UsageError(f"csv line {lineno}: expected '<digits>,<probability>'")
        try:
            p = float(row[1])
        except ValueError:
            raise UsageError(f"csv line {lineno}: bad probability {row[1]!r}") from None
        rows.append((tuple(int(c) for c in row[0]), p))
    if not rows:
        raise UsageError("csv contains no rows")
    n = len(rows[0][0])
    if any(len(o) != n for o, _ in rows):
        raise UsageError("csv rows have outcome strings of different lengths")
    k = max(4, 1 + max(max(o) for o, _ in rows))
    probs = np.zeros((k,) * n)
    for o, p in rows:
        probs[o] = p
    return CorrelationTable(probs)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def dumps_report(obj) -> str:
    """Stable JSON: sorted keys, shortest round-tripping float repr."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def load_matrix(path: str | Path) -> np.ndarray:
    """Whitespace-separated complex matrix, e.g. ``0.5+0j 0 ...`` per row."""
    try:
        m = np.loadtxt(path, dtype=complex, ndmin=2)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read matrix file {path}: {exc}") from None
    return m


def _parse_param(spec: str, name: str) -> float | None:
    """``werner:0.7`` or ``werner(0.7)`` -> 0.7; None if ``spec`` is not ``name``."""
    for sep_open, sep_close in ((":", ""), ("(", ")")):
        prefix = name + sep_open
        if spec.startswith(prefix) and spec.endswith(sep_close):
            body = spec[len(prefix): len(spec) - len(sep_close)]
            try:
                return float(body)
            except ValueError:
                raise UsageError(f"strategy {spec!r}: {body!r} is not a number") from None
    return None


def _source_entry(entry, where: str):
    if entry == "bell":
        return bell_source()
    if entry == "mixed":
        return maximally_mixed()
    if isinstance(entry, dict):
        if "werner" in entry:
            return werner_state(entry["werner"])
        if "matrix" in entry:
            m = np.array([[complex(*z) if isinstance(z, list) else z for z in row]
                          for row in entry["matrix"]], dtype=complex)
            return DensityOperator(m, tuple(entry.get("dims", (2, 2))))
    raise UsageError(f"{where}: unknown source {entry!r}")


def _measurement_entry(entry, where: str) -> Measurement:
    if entry == "bell":
        return bell_measurement()
    if entry == "product":
        return product_basis_measurement()
    if isinstance(entry, dict) and "noisy_bell" in entry:
        return noisy_bell_measurement(entry["noisy_bell"])
    raise UsageError(f"{where}: unknown measurement {entry!r}")


def network_from_dict(data: dict) -> RingNetwork:
    """Scenario description: ``{"n": 3, "sources": [...], "measurements": [...]}``.

    Sources are ``"bell"``, ``"mixed"``, ``{"werner": v}`` or
    ``{"matrix": [[re, im], ...], "dims": [d1, d2]}``; measurements are
    ``"bell"``, ``"product"`` or ``{"noisy_bell": w}``. Either list may be
    omitted and defaults to all-Bell.
    """
    if "n" not in data:
        raise UsageError("scenario: missing field 'n'")
    n = data["n"]
    if not isinstance(n, int) or not 2 <= n <= MAX_NODES:
        raise UsageError(f"scenario: field 'n' must be an integer in 2..{MAX_NODES}")
    srcs = data.get("sources", ["bell"] * n)
    meas = data.get("measurements", ["bell"] * n)
    if len(srcs) != n:
        raise UsageError(f"scenario: field 'sources' needs {n} entries")
    if len(meas) != n:
        raise UsageError(f"scenario: field 'measurements' needs {n} entries")
    return RingNetwork(
        tuple(_source_entry(e, f"scenario: sources[{i}]") for i, e in enumerate(srcs)),
        tuple(_measurement_entry(e, f"scenario: measurements[{i}]") for i, e in enumerate(meas)),
    )


def resolve_strategy(spec: str, n: int) -> RingNetwork:
    """Preset name (``ideal``, ``werner:v``) or a path to a scenario JSON file."""
    if spec == "ideal":
        return ideal_network(n)
    v = _parse_param(spec, "werner")
    if v is not None:
        return RingNetwork(tuple(werner_state(v) for _ in range(n)),
                           tuple(bell_measurement() for _ in range(n)))
    path = Path(spec)
    if not path.is_file():
        raise UsageError(f"--strategy: {spec!r} is neither a preset nor an existing file")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"--strategy: {spec} is not valid JSON ({exc.msg})") from None
    net = network_from_dict(data)
    if net.n != n:
        raise UsageError(f"--strategy: file describes n={net.n} but --n is {n}")
    return net


def resolve_target_state(spec: str, dims: tuple[int, int] | None, rng) -> DensityOperator:
    """``phi+``, ``werner:v``, ``random-npt:2x3`` or a matrix file (needs ``dims``)."""
    if spec == "phi+":
        return DensityOperator(proj(max_entangled(2)), (2, 2))
    v = _parse_param(spec, "werner")
    if v is not None:
        return werner_state(v)
    if spec.startswith("random-npt"):
        shape = spec.partition(":")[2] or "2x3"
        try:
            d = tuple(int(x) for x in shape.split("x"))
        except ValueError:
            raise UsageError(f"--state: bad dimensions {shape!r}") from None
        if len(d) != 2:
            raise UsageError("--state: random-npt needs two dimensions, e.g. random-npt:2x3")
        return random_npt_state(d, rng)
    if not Path(spec).is_file():
        raise UsageError(f"--state: {spec!r} is neither a preset nor an existing file")
    m = load_matrix(spec)
    if dims is None:
        raise UsageError("--dims is required with a matrix file")
    return DensityOperator(m, dims)
