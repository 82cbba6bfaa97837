"""File formats: matrix/edge CSV, SampleSet/config/report JSON, diagnostics, manifests.

Floats are written with ``repr`` (shortest round-trip form) so that output
files are byte-stable and lossless.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .sampling import SampleSet, WITHOUT


class FormatError(ValueError):
    """Malformed input file; the message carries the path."""


def format_float(value) -> str:
    return repr(float(value))


def _json_value(value):
    # NaN/inf are not valid JSON; emit null instead
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, np.generic):
        return _json_value(value.item())
    return value


def write_json(path, payload: dict):
    path = Path(path)
    clean = {k: _json_value(v) for k, v in payload.items()}
    path.write_text(json.dumps(clean, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def read_json(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def write_matrix_csv(path, matrix):
    """One matrix row per line, no header."""
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    lines = [",".join(format_float(v) for v in row) for row in m]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_matrix_csv(path, skip_header: bool = False) -> np.ndarray:
    path = Path(path)
    rows = []
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        if skip_header:
            next(reader, None)
        for lineno, row in enumerate(reader, start=2 if skip_header else 1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-numeric value ({exc})") from exc
    if not rows:
        raise FormatError(f"{path}: no data rows")
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise FormatError(f"{path}: row {i} has {len(row)} values, expected {width}")
    return np.array(rows, dtype=float)


def write_edges_csv(path, edges):
    lines = [f"{int(u)},{int(v)}" for u, v in edges]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_edges_csv(path) -> list[tuple[int, int]]:
    path = Path(path)
    edges = []
    with path.open(encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise FormatError(f"{path}:{lineno}: expected 'u,v'")
            try:
                edges.append((int(row[0]), int(row[1])))
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-integer vertex ({exc})") from exc
    return edges


def sample_set_to_dict(samples: SampleSet) -> dict:
    return {
        "n": samples.n,
        "t": samples.t,
        "rows": [int(i) for i in samples.rows],
        "cols": [int(j) for j in samples.cols],
        "entries": [[int(i), int(j), float(v)]
                    for (i, j), v in zip(samples.entries, samples.values)],
        "alpha_rc": samples.alpha_rc,
        "alpha_sub": samples.alpha_sub,
        "alpha_total": samples.alpha_total,
        "seed": samples.seed,
        "mode": samples.mode,
    }


def sample_set_from_dict(data: dict, source="<dict>") -> SampleSet:
    try:
        n, t = int(data["n"]), int(data["t"])
        raw = data["entries"]
        entries = np.array([[int(e[0]), int(e[1])] for e in raw], dtype=np.int64).reshape(-1, 2)
        values = np.array([float(e[2]) for e in raw], dtype=float)
        rows = np.array(data["rows"], dtype=np.int64)
        cols = np.array(data["cols"], dtype=np.int64)
        samples = SampleSet(n, t, rows, cols, entries, values,
                            float(data["alpha_rc"]), float(data["alpha_sub"]),
                            data.get("seed"), data.get("mode", WITHOUT))
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise FormatError(f"{source}: malformed SampleSet ({exc!r})") from exc
    if entries.size and (entries[:, 0].min() < 0 or entries[:, 0].max() >= n
                         or entries[:, 1].min() < 0 or entries[:, 1].max() >= t):
        raise FormatError(f"{source}: entry index outside {n} x {t}")
    return samples


def write_sample_set(path, samples: SampleSet):
    write_json(path, sample_set_to_dict(samples))


def read_sample_set(path) -> SampleSet:
    return sample_set_from_dict(read_json(path), source=path)


DIAGNOSTIC_COLUMNS = ("outer", "middle", "objective", "residual_graph", "residual_time",
                      "residual_data", "observed_rmse", "mu")


def write_diagnostics_csv(path, history, flags=()):
    """Per-iteration records; ``flags`` become leading ``# ...`` comment lines."""
    lines = [f"# {flag}" for flag in flags]
    lines.append(",".join(DIAGNOSTIC_COLUMNS))
    for rec in history:
        vals = [getattr(rec, c) for c in DIAGNOSTIC_COLUMNS]
        lines.append(",".join(str(v) if isinstance(v, int) else format_float(v) for v in vals))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_sweep_csv(path, rows):
    from .synth import SweepRow

    lines = [",".join(SweepRow.CSV_COLUMNS)]
    for row in rows:
        vals = [getattr(row, c) for c in SweepRow.CSV_COLUMNS]
        lines.append(",".join(v if isinstance(v, str) else
                              str(v) if isinstance(v, int) else format_float(v) for v in vals))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def manifest_path(output) -> Path:
    output = Path(output)
    return output.with_name(output.name + ".manifest.json")


def write_manifest(output, command: str, flags: dict, seeds, inputs, outputs,
                   duration_s: float) -> Path:
    """Provenance record written next to ``output``."""
    from . import __version__

    path = manifest_path(output)
    payload = {
        "command": command,
        "flags": {k: _json_value(v) for k, v in flags.items()},
        "seeds": list(seeds),
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "version": __version__,
        "duration_s": duration_s,
    }
    write_json(path, payload)
    return path
