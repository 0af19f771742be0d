"""CSV and run-manifest plumbing shared by the CLI subcommands.

CSV files carry a header row, comma separators, LF line endings, and floats
printed with 17 significant digits, so identical runs produce identical
bytes.  Every run writes a JSON manifest next to its outputs recording the
subcommand, the fully resolved configuration, and the output paths;
re-running a subcommand with ``--config <manifest>`` reproduces the outputs
byte for byte.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import __version__


def fmt_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path: str | Path, header: list[str], rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt_value(v) for v in row) + "\n")
    return path


def read_csv_columns(path: str | Path) -> dict[str, list[str]]:
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    cols: dict[str, list[str]] = {h: [] for h in header}
    for line in lines[1:]:
        for h, v in zip(header, line.split(",")):
            cols[h].append(v)
    return cols


def write_manifest(
    out_dir: str | Path, subcommand: str, config: dict, outputs: list[Path]
) -> Path:
    out_dir = Path(out_dir)
    manifest = {
        "subcommand": subcommand,
        "config": config,
        "base_seed": config.get("seed"),
        "version": __version__,
        "outputs": [p.name for p in outputs],
    }
    path = out_dir / f"{subcommand.replace('-', '_')}_manifest.json"
    with open(path, "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_config_file(path: str | Path) -> dict:
    """Read a key-value config file (JSON); manifests are accepted directly."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config file must hold a JSON object")
    if "config" in data and isinstance(data["config"], dict):
        return data["config"]
    return data
