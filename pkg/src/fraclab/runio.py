"""CSV and JSON artifact formats shared by the CLI and the test suite.

CSV files carry one header row, LF line endings, and 17-significant-digit
floats so that every emitted value round-trips exactly.
"""

from __future__ import annotations

import json
import os
from typing import Iterable

import numpy as np

from .analysis import MsdCurve, SlopeFit
from .fraccalc import SampledPath

__all__ = [
    "fmt17",
    "json_dumps_canonical",
    "read_path_csv",
    "write_msd_csv",
    "write_path_csv",
]


def fmt17(x: float) -> str:
    return format(float(x), ".17g")


def write_path_csv(path: SampledPath, filename: str) -> None:
    with open(filename, "w", newline="\n") as fh:
        fh.write("t,value\n")
        t = path.t
        for i in range(len(path)):
            fh.write(f"{fmt17(t[i])},{fmt17(path.values[i])}\n")


def read_path_csv(filename: str) -> SampledPath:
    t = []
    v = []
    with open(filename) as fh:
        header = fh.readline().strip()
        if header != "t,value":
            raise ValueError(f"{filename}: expected 't,value' header")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            a, b = line.split(",")
            t.append(float(a))
            v.append(float(b))
    if len(t) < 2:
        raise ValueError(f"{filename}: need at least 2 samples")
    t_arr = np.asarray(t)
    dt = t_arr[1] - t_arr[0]
    if dt <= 0 or np.max(np.abs(np.diff(t_arr) - dt)) > 1e-9 * max(dt, 1.0):
        raise ValueError(f"{filename}: grid is not uniform")
    return SampledPath(t0=t_arr[0], dt=dt, values=np.asarray(v))


def write_msd_csv(curve: MsdCurve, filename: str) -> None:
    with open(filename, "w", newline="\n") as fh:
        fh.write("t,msd,stderr,n_paths\n")
        for i in range(curve.t.size):
            fh.write(
                f"{fmt17(curve.t[i])},{fmt17(curve.msd[i])},"
                f"{fmt17(curve.stderr[i])},{curve.n_paths}\n"
            )


def slope_fit_dict(fit: SlopeFit) -> dict:
    return {
        "t_lo": fit.t_lo,
        "t_hi": fit.t_hi,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
    }


def json_dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_json(obj, filename: str) -> None:
    with open(filename, "w", newline="\n") as fh:
        fh.write(json_dumps_canonical(obj))


def list_csv_files(directory: str) -> list[str]:
    names = sorted(
        n for n in os.listdir(directory) if n.endswith(".csv")
    )
    return [os.path.join(directory, n) for n in names]
