"""Plain-text outputs: CSV grids, CSV tables and 16-bit P2 graymaps."""

import csv

import numpy as np

PGM_MAXVAL = 65535


def fmt(x):
    """Reals with 17 significant digits; ints and strings unchanged."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def write_table(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def read_table(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_grid(path, values):
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    with open(path, "w") as fh:
        for row in values:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def read_grid(path):
    return np.loadtxt(path, delimiter=",", ndmin=2)


def to_gray16(values):
    """Linear map min -> 0, max -> 65535; a constant map is all zeros."""
    v = np.asarray(values, dtype=np.float64)
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.zeros(v.shape, dtype=np.int64)
    return np.rint((v - lo) / (hi - lo) * PGM_MAXVAL).astype(np.int64)


def write_pgm(path, values):
    """ASCII (P2) graymap, row-major."""
    gray = to_gray16(values)
    h, w = gray.shape
    with open(path, "w") as fh:
        fh.write(f"P2\n{w} {h}\n{PGM_MAXVAL}\n")
        for row in gray:
            fh.write(" ".join(str(int(v)) for v in row) + "\n")


def read_pgm(path):
    with open(path) as fh:
        tokens = [t for line in fh if not line.startswith("#") for t in line.split()]
    if tokens[0] != "P2":
        raise ValueError("not a P2 graymap")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    data = np.array([int(t) for t in tokens[4:]], dtype=np.int64)
    return data.reshape(h, w), maxval
