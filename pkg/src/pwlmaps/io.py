"""Result files: CSV grid, 8-bit PGM picture and JSON run metadata."""

from __future__ import annotations

import csv
import json
import subprocess
from pathlib import Path

import numpy as np

from . import __version__
from .atlas import CellRecord, ScanResult, SliceResult
from .classify import AttractorClass

CSV_HEADER = ["axis1", "axis2", "class", "period", "bands", "eta", "nu", "N", "delta", "rho"]

# palette: periodic bright (136..234 by period mod 8), chaotic dark (16..100 by bands mod 8)
UNDETERMINED_GREY = 120
DIVERGENT_WHITE = 255


def palette(c: AttractorClass) -> int:
    if c.tag == "Periodic":
        return 136 + 14 * (c.period % 8)
    if c.tag == "Chaotic":
        return 16 + 12 * (c.bands % 8)
    if c.tag == "Divergent":
        return DIVERGENT_WHITE
    return UNDETERMINED_GREY


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def csv_rows(result: ScanResult):
    a1, a2 = result.config.axis1.values, result.config.axis2.values
    for i, row in enumerate(result.cells):
        for j, rec in enumerate(row):
            c = rec.cls
            yield [
                _fmt(a1[i]),
                _fmt(a2[j]),
                c.tag,
                _fmt(c.period),
                _fmt(c.bands),
                _fmt(rec.eta),
                _fmt(rec.nu),
                _fmt(rec.N),
                _fmt(rec.delta),
                _fmt(rec.rho),
            ]


def write_csv(result: ScanResult, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(csv_rows(result))


def read_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def image_array(result: ScanResult) -> np.ndarray:
    """Grey levels with axis1 along columns and axis2 increasing upward."""
    img = np.array([[palette(c.cls) for c in row] for row in result.cells], dtype=np.uint8)
    return np.ascontiguousarray(img.T[::-1])


def write_pgm(result: ScanResult, path: str | Path) -> None:
    img = image_array(result)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_pgm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h, mx = int(parts[1]), int(parts[2]), int(parts[3])
    if mx != 255:
        raise ValueError("only 8-bit PGM is supported")
    return np.frombuffer(parts[4][: w * h], dtype=np.uint8).reshape(h, w)


def code_version() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def metadata(result: ScanResult) -> dict:
    cfg = result.config
    return {
        "config": cfg.echo(),
        "seed": cfg.rng_seed,
        "resolution": [cfg.axis1.n, cfg.axis2.n],
        "runtime_seconds": round(result.runtime_seconds, 3),
        "version": code_version(),
        "image_layout": "P5, columns follow axis1 increasing, rows follow axis2 increasing upward",
    }


def write_json(obj: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def write_scan(result: ScanResult, out_dir: str | Path, stem: str = "scan") -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"csv": out / f"{stem}.csv", "pgm": out / f"{stem}.pgm", "json": out / f"{stem}.json"}
    write_csv(result, paths["csv"])
    write_pgm(result, paths["pgm"])
    write_json(metadata(result), paths["json"])
    return paths


def write_slice_csv(res: SliceResult, path: str | Path) -> None:
    """One row per support point: parameter, class, period, bands, value(s)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if res.family == "OneD":
            w.writerow(["eta", "nu", "class", "period", "bands", "N", "rho", "z"])
            for p in res.points:
                base = [_fmt(p.params["eta"]), _fmt(p.params["nu"]), p.cls.tag, _fmt(p.cls.period), _fmt(p.cls.bands), _fmt(p.N), _fmt(p.rho)]
                for z in p.support:
                    w.writerow(base + [_fmt(z)])
        else:
            w.writerow(["t", "tau_L", "delta_L", "tau_R", "delta_R", "class", "period", "bands", "x", "y"])
            for p in res.points:
                pr = p.params
                base = [_fmt(p.t), _fmt(pr["tau_L"]), _fmt(pr["delta_L"]), _fmt(pr["tau_R"]), _fmt(pr["delta_R"]), p.cls.tag, _fmt(p.cls.period), _fmt(p.cls.bands)]
                for x, y in p.support:
                    w.writerow(base + [_fmt(x), _fmt(y)])


__all__ = [
    "CSV_HEADER",
    "CellRecord",
    "palette",
    "write_csv",
    "read_csv",
    "write_pgm",
    "read_pgm",
    "write_json",
    "write_scan",
    "write_slice_csv",
    "metadata",
]
