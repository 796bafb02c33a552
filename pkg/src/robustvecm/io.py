"""Plain-text file formats: series CSV, sidecar parameter files, trace CSVs.

All floats are written with ``repr`` so files round-trip exactly and
identical computations produce byte-identical output.

Series CSV: header ``t,y1,...,yK``; one row per time index with no missing
cells; presample rows carry t <= 0 and observation rows start at t = 1.

Sidecar files (ground truth, fit reports) are flat ``key value`` lines plus
matrix blocks introduced by ``matrix <name> <rows> <cols>`` followed by one
space-separated row per line.
"""

import numpy as np

from .errors import DataError
from .model import SamplePath, VecmParams
from .simulate import GroundTruth


def _fmt(x):
    return repr(float(x))


def _fmt_row(row):
    return " ".join(_fmt(v) for v in row)


def write_series_csv(fp, path):
    """Write a SamplePath as the strict t,y1..yK format."""
    k = path.k
    n_pre = path.presample.shape[1]
    fp.write("t," + ",".join(f"y{i + 1}" for i in range(k)) + "\n")
    for j in range(n_pre):
        t = j - n_pre + 1  # presample indices ..., -1, 0
        fp.write(str(t) + "," + ",".join(_fmt(v) for v in path.presample[:, j]) + "\n")
    for j in range(path.n):
        fp.write(str(j + 1) + "," + ",".join(_fmt(v) for v in path.observations[:, j]) + "\n")


def read_series_csv(fp):
    """Parse the strict series CSV back into a SamplePath."""
    header = fp.readline().rstrip("\n")
    cols = header.split(",")
    if len(cols) < 2 or cols[0] != "t" or cols[1:] != [f"y{i + 1}" for i in range(len(cols) - 1)]:
        raise DataError(f"bad series header {header!r}; expected t,y1,...,yK")
    k = len(cols) - 1
    times, values = [], []
    for lineno, line in enumerate(fp, start=2):
        line = line.rstrip("\n")
        if not line:
            raise DataError(f"line {lineno}: blank row in strict series CSV")
        cells = line.split(",")
        if len(cells) != k + 1:
            raise DataError(f"line {lineno}: expected {k + 1} cells, got {len(cells)}")
        if any(cell == "" for cell in cells):
            raise DataError(f"line {lineno}: missing cell")
        try:
            times.append(int(cells[0]))
            values.append([float(c) for c in cells[1:]])
        except ValueError as exc:
            raise DataError(f"line {lineno}: {exc}") from exc
    if not times:
        raise DataError("series CSV has no data rows")
    for a, b in zip(times, times[1:]):
        if b != a + 1:
            raise DataError(f"time indices must be consecutive, got {a} then {b}")
    if times[-1] < 1:
        raise DataError("series CSV has no observation rows (t >= 1)")
    if times[0] > 0:
        raise DataError("series CSV has no presample rows (t <= 0)")
    data = np.array(values, dtype=float).T
    n_pre = sum(1 for t in times if t <= 0)
    return SamplePath(presample=data[:, :n_pre], observations=data[:, n_pre:])


def _write_matrix(fp, name, mat):
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    fp.write(f"matrix {name} {mat.shape[0]} {mat.shape[1]}\n")
    for row in mat:
        fp.write(_fmt_row(row) + "\n")


def _read_kv_blocks(fp):
    """Parse 'key value' lines and matrix blocks into (dict, dict)."""
    keys, matrices = {}, {}
    lines = [ln.rstrip("\n") for ln in fp]
    i = 0
    while i < len(lines):
        line = lines[i]
        i += 1
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "matrix":
            if len(parts) != 4:
                raise DataError(f"bad matrix header {line!r}")
            name, rows, cols = parts[1], int(parts[2]), int(parts[3])
            block = []
            for _ in range(rows):
                if i >= len(lines):
                    raise DataError(f"matrix {name}: unexpected end of file")
                row = [float(v) for v in lines[i].split()]
                if len(row) != cols:
                    raise DataError(f"matrix {name}: expected {cols} values per row")
                block.append(row)
                i += 1
            matrices[name] = np.array(block, dtype=float).reshape(rows, cols)
        else:
            keys[parts[0]] = " ".join(parts[1:])
    return keys, matrices


def write_ground_truth(fp, truth, spec):
    """Write the generated parameters and DGP metadata as a sidecar file."""
    params = truth.params
    fp.write(f"k {params.k}\n")
    fp.write(f"p {params.p}\n")
    fp.write(f"r {params.r}\n")
    fp.write(f"n {spec.n}\n")
    fp.write(f"seed {spec.seed}\n")
    fp.write(f"innovation {spec.innovation}\n")
    fp.write(f"df {_fmt(spec.df) if spec.df is not None else 'none'}\n")
    fp.write(f"noise_scale {_fmt(spec.noise_scale)}\n")
    fp.write(f"burn_in {spec.burn_in}\n")
    fp.write("support " + " ".join(str(i) for i in truth.support) + "\n")
    _write_matrix(fp, "pi", params.pi)
    _write_matrix(fp, "gamma", params.gamma)
    _write_matrix(fp, "sigma", params.sigma)


def read_ground_truth(fp):
    """Read a sidecar file back into (GroundTruth, metadata dict)."""
    keys, matrices = _read_kv_blocks(fp)
    try:
        params = VecmParams(
            k=int(keys["k"]), p=int(keys["p"]), r=int(keys["r"]),
            pi=matrices["pi"], gamma=matrices["gamma"], sigma=matrices["sigma"],
        )
        support = tuple(int(v) for v in keys["support"].split()) if keys["support"] else ()
    except KeyError as exc:
        raise DataError(f"ground-truth file is missing {exc}") from exc
    return GroundTruth(params=params, support=support), keys


def write_fit_report(fp, report, meta=None):
    """Write a FitReport as key-value lines plus matrix blocks."""
    for key, value in (meta or {}).items():
        fp.write(f"{key} {value}\n")
    fp.write(f"iterations {report.iterations}\n")
    fp.write(f"terminated {report.terminated}\n")
    fp.write(f"wall_time_s {_fmt(report.wall_time)}\n")
    fp.write(f"objective_initial {_fmt(report.obj_trace[0])}\n")
    fp.write(f"objective_final {_fmt(report.obj_trace[-1])}\n")
    _write_matrix(fp, "pi", report.params.pi)
    _write_matrix(fp, "gamma", report.params.gamma)
    _write_matrix(fp, "sigma", report.params.sigma)
    _write_matrix(fp, "alpha", report.factors.alpha)
    _write_matrix(fp, "beta", report.factors.beta)


def write_trace_csv(fp, trace):
    """Write an objective trace as iter,objective rows."""
    fp.write("iter,objective\n")
    for i, value in enumerate(np.asarray(trace, dtype=float)):
        fp.write(f"{i},{_fmt(value)}\n")


def write_rep_csv(fp, records, timing=True):
    """Per-replication sweep results: df,rep,loss,nmse,iters,seconds.

    With ``timing=False`` the seconds column is written as 0.0 so repeated
    runs with identical flags produce byte-identical files.
    """
    fp.write("df,rep,loss,nmse,iters,seconds\n")
    for rec in records:
        seconds = rec.seconds if timing else 0.0
        fp.write(
            f"{_fmt(rec.df)},{rec.rep},{rec.loss},{_fmt(rec.nmse)},"
            f"{rec.iterations},{_fmt(seconds)}\n"
        )


def write_aggregate_csv(fp, table, meta=None):
    """Aggregated sweep table with the penalty rule recorded as comments."""
    fp.write(f"# {table.xi_rule}\n")
    for key, value in (meta or {}).items():
        fp.write(f"# {key} = {value}\n")
    fp.write("df,loss,mean_nmse,stderr_nmse,reps,failures\n")
    for row in table.rows:
        fp.write(
            f"{_fmt(row.df)},{row.loss},{_fmt(row.mean_nmse)},"
            f"{_fmt(row.stderr_nmse)},{row.reps},{row.failures}\n"
        )


def write_plot_data(fp, header, rows):
    """Whitespace-separated table for gnuplot/vega-style consumption."""
    fp.write("# " + " ".join(header) + "\n")
    for row in rows:
        fp.write(" ".join(_fmt(v) if isinstance(v, float) else str(v) for v in row) + "\n")


def read_bench_config(fp):
    """Parse a flat key-value bench configuration file into a dict.

    Recognized keys mirror BenchSpec and its DGP template: k, p, r, n,
    active_columns, burn_in, df_grid (comma list), reps, losses (comma
    list), seed_base.
    """
    out = {}
    for lineno, line in enumerate(fp, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise DataError(f"line {lineno}: expected 'key value', got {line!r}")
        key, value = parts
        if key in ("k", "p", "r", "n", "active_columns", "reps", "seed_base", "burn_in"):
            out[key] = int(value)
        elif key == "df_grid":
            out[key] = tuple(float(v) for v in value.split(","))
        elif key == "losses":
            out[key] = tuple(v.strip() for v in value.split(","))
        else:
            raise DataError(f"line {lineno}: unknown bench config key {key!r}")
    return out
