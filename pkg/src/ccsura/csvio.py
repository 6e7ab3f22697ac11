"""CSV formats shared by the CLI and the simulation sweeps.

Columns are fixed and every float is printed with 9 significant digits so
output files diff cleanly.  Files are written to a temporary sibling and
renamed into place.
"""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from .phy import RocTable

ROC_COLUMNS = ("ebno_db", "L", "K0", "p_m", "p_f")
CURVE_COLUMNS = ("Ka", "t", "ebno_db", "L", "K0", "Pe", "Pf")
SIM_COLUMNS = ("scheme", "Ka", "t", "ebno_db", "L", "K0", "pupe", "pupe_ci",
               "far_frame", "false_mean", "trials", "seed")


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".9g")
    return str(v)


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=d)
    try:
        os.chmod(tmp, 0o666 & ~_umask())
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_csv(columns: Sequence[str], rows: Iterable[Mapping]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def write_csv(path: str, columns: Sequence[str], rows: Iterable[Mapping]) -> None:
    write_atomic(path, render_csv(columns, rows))


def read_csv(path: str, columns: Sequence[str]) -> List[Dict[str, str]]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header is None or tuple(header) != tuple(columns):
            raise ValueError(f"{path}: expected header {','.join(columns)}")
        return [dict(zip(columns, row)) for row in r]


def _num(s: str):
    if s == "":
        return None
    try:
        return int(s)
    except ValueError:
        return float(s)


def roc_rows(rocs: Mapping[Tuple[float, int], RocTable]) -> List[Dict]:
    out = []
    for (e, L) in sorted(rocs):
        for K0, pm, pf in rocs[(e, L)].rows():
            out.append({"ebno_db": float(e), "L": int(L), "K0": int(K0), "p_m": pm, "p_f": pf})
    return out


def read_roc_csv(path: str) -> Dict[Tuple[float, int], RocTable]:
    groups: Dict[Tuple[float, int], List[Tuple[int, float, float]]] = {}
    for r in read_csv(path, ROC_COLUMNS):
        key = (float(r["ebno_db"]), int(r["L"]))
        groups.setdefault(key, []).append((int(r["K0"]), float(r["p_m"]), float(r["p_f"])))
    out = {}
    for (e, L), pts in groups.items():
        pts.sort()
        out[(e, L)] = RocTable([p[0] for p in pts], [p[1] for p in pts], [p[2] for p in pts],
                               ebno_db=e, L=L)
    return out


def read_curve_csv(path: str) -> List[Dict]:
    return [{k: _num(v) for k, v in r.items()} for r in read_csv(path, CURVE_COLUMNS)]


def read_sim_csv(path: str) -> List[Dict]:
    out = []
    for r in read_csv(path, SIM_COLUMNS):
        d = {k: _num(v) for k, v in r.items() if k != "scheme"}
        d["scheme"] = r["scheme"]
        out.append(d)
    return out
