"""Report files: one-line checks, per-sample CSV series and full JSON dumps.

Reports contain no timestamps, so a fixed scenario and seed give
byte-identical files.  Each file is written to a temporary name in the
target directory and moved into place.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .runner import ScenarioResult

__all__ = ["FORMATS", "format_summary", "format_series", "format_full", "emit_report"]

FORMATS = ("summary", "series", "full")
SUFFIX = {"summary": "summary.txt", "series": "series.csv", "full": "full.json"}


def format_summary(result: ScenarioResult) -> str:
    lines = [str(c) for c in result.checks]
    lines.append(f"{'PASS' if result.passed else 'FAIL'} {result.scenario.name}")
    return "\n".join(lines) + "\n"


def format_series(result: ScenarioResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "residual", "value", "tolerance", "pass"])
    grid = result.bundle.grid
    for name, (values, tol) in result.series.items():
        for t, v in zip(grid, values):
            if tol is None:
                w.writerow([repr(float(t)), name, repr(float(v)), "", ""])
            else:
                w.writerow([repr(float(t)), name, repr(float(v)), repr(float(tol)), int(v <= tol)])
    return buf.getvalue()


def _pairs(a) -> list:
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def format_full(result: ScenarioResult) -> str:
    b = result.bundle
    s = result.scenario
    doc = {
        "scenario": {
            "name": s.name,
            "dim": s.dim,
            "input_kind": s.input_kind,
            "grid": {"start": float(s.grid[0]), "end": float(s.grid[-1]), "samples": int(s.grid.size)},
            "seed": s.seed,
            "description": s.description,
        },
        "strategy": b.strategy_tag,
        "gauge": b.metadata.get("gauge", ""),
        "kappa": None if b.metadata.get("kappa") is None else np.asarray(b.metadata["kappa"]).tolist(),
        "passed": result.passed,
        "checks": [c.as_dict() for c in result.checks],
        "grid": b.grid.tolist(),
        "operators": {
            "H": _pairs(b.H.values),
            "G": _pairs(b.G.values),
            "Sigma": _pairs(b.Sigma.values),
            "Theta": _pairs(b.theta_values),
            "Omega": _pairs(b.Omega.values),
        },
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


_FORMATTERS = {"summary": format_summary, "series": format_series, "full": format_full}


def _atomic_write(path: Path, text: str):
    umask = os.umask(0)
    os.umask(umask)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_report(result: ScenarioResult, out_dir=".", formats=("summary",)) -> list:
    """Write the requested report formats; returns the written paths."""
    if isinstance(formats, str):
        formats = (formats,)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = "".join(c if c.isalnum() or c in "-_." else "_" for c in result.scenario.name)
    paths = []
    for fmt in formats:
        if fmt not in _FORMATTERS:
            raise ValueError(f"unknown report format {fmt!r}; choose from {FORMATS}")
        path = out / f"{stem}.{SUFFIX[fmt]}"
        _atomic_write(path, _FORMATTERS[fmt](result))
        paths.append(path)
    return paths
