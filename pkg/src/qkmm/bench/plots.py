"""Plot specs for result directories.

``emit_plots`` never draws anything itself.  It writes one declarative JSON
spec per figure plus ``plot_tool.py``, a standalone matplotlib script that
renders every spec (``python plot_tool.py *.json``).
"""
from __future__ import annotations

import json
import warnings
from pathlib import Path

from .io import read_csv

PLOT_TOOL = '''"""Render qkmm plot specs: python plot_tool.py spec.json [spec.json ...]"""
import csv
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load_rows(path):
    with open(path, newline="") as fh:
        fh.readline()  # versioned header comment
        return list(csv.DictReader(fh))


def render(spec_path):
    spec_path = Path(spec_path)
    spec = json.loads(spec_path.read_text())
    rows = load_rows(spec_path.parent / spec["data"])
    fig, ax = plt.subplots(figsize=(6, 4))
    groups = {}
    for row in rows:
        if any(row.get(k) != v for k, v in spec.get("filter", {}).items()):
            continue
        key = row[spec["series"]] if spec.get("series") else spec["y"]
        try:
            groups.setdefault(key, []).append((float(row[spec["x"]]), float(row[spec["y"]])))
        except ValueError:
            continue
    for key, pts in sorted(groups.items()):
        acc = {}
        for x, y in pts:
            acc.setdefault(x, []).append(y)
        xs = sorted(acc)
        ax.plot(xs, [sum(acc[x]) / len(acc[x]) for x in xs], marker="o", label=str(key))
    ax.set_xscale(spec.get("xscale", "linear"), base=2 if spec.get("xscale") == "log" else 10)
    ax.set_yscale(spec.get("yscale", "linear"))
    ax.set_xlabel(spec["xlabel"])
    ax.set_ylabel(spec["ylabel"])
    ax.set_title(spec["title"])
    ax.legend()
    fig.tight_layout()
    out = spec_path.with_suffix(".png")
    fig.savefig(out, dpi=150)
    print(out)


if __name__ == "__main__":
    for arg in sys.argv[1:]:
        render(arg)
'''


def _spec(data: str, title: str, x: str, y: str, series: str | None, xlabel: str, ylabel: str,
          xscale: str = "log", yscale: str = "linear") -> dict:
    return {"data": data, "title": title, "x": x, "y": y, "series": series,
            "xlabel": xlabel, "ylabel": ylabel, "xscale": xscale, "yscale": yscale}


def _specs_for(kind: str, rel: str, rows: list[dict]) -> dict[str, dict]:
    stem = Path(rel).stem
    if kind == "run":
        return {f"{stem}_time": _spec(rel, "Simulation time vs dimension", "dim", "simulate_s",
                                      "task", "N", "seconds", yscale="log")}
    if kind == "compare":
        return {f"{stem}_time": _spec(rel, "Wall time per method", "dim", "wall_s", "method",
                                      "N", "seconds", yscale="log"),
                f"{stem}_gates": _spec(rel, "Total gates per method", "dim", "gates_total",
                                       "method", "N", "gates", yscale="log")}
    if kind == "noise_sweep":
        return {f"{stem}_fidelity": _spec(rel, "Fidelity vs dimension", "dim", "fidelity",
                                          "sources", "N", "fidelity"),
                f"{stem}_mean_error": _spec(rel, "Mean error vs dimension", "dim", "mean_error",
                                            "sources", "N", "mean error")}
    if kind == "mmm_sweep":
        return {f"{stem}_per_product": _spec(rel, "Time per product vs K", "K",
                                             "wall_per_product_s", "dim", "K", "seconds",
                                             yscale="log")}
    if kind == "gatecount":
        specs = {}
        for col in ("S_recomposed", "model_count", "hadamard_stack"):
            specs[f"{stem}_{col}"] = _spec(rel, f"{col} vs N", "dim", col, None, "N", "gates",
                                           yscale="log")
        return specs
    return {}


def emit_plots(result_dir) -> list[Path]:
    """Write plot specs and the plotting tool into ``result_dir/plots``."""
    result_dir = Path(result_dir)
    csvs = sorted(result_dir.glob("*.csv")) if result_dir.is_dir() else []
    if not csvs:
        warnings.warn(f"no result CSVs in {result_dir}; nothing to plot", stacklevel=2)
        return []
    plot_dir = result_dir / "plots"
    plot_dir.mkdir(exist_ok=True)
    written = []
    for path in csvs:
        try:
            header, rows = read_csv(path)
        except Exception as exc:  # foreign CSVs are skipped, not fatal
            warnings.warn(f"skipping {path.name}: {exc}", stacklevel=2)
            continue
        kind = header.split()[2]
        for name, spec in _specs_for(kind, f"../{path.name}", rows).items():
            out = plot_dir / f"{name}.json"
            out.write_text(json.dumps(spec, indent=2, sort_keys=True) + "\n")
            written.append(out)
    if written:
        tool = plot_dir / "plot_tool.py"
        tool.write_text(PLOT_TOOL)
        written.append(tool)
    return written
