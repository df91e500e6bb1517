"""File formats: sparse triplets, CSV series and JSON run manifests.

Triplet files start with a ``rows cols nnz`` header, followed by one
``row col value`` line per stored entry (0-based indices, values written
with 17 significant digits so a round trip is exact). Lines starting with
``#`` and blank lines are ignored.
"""

import csv
import datetime
import hashlib
import json
import os
import sys

import numpy as np
import scipy.sparse as sp

from .exceptions import NotStochasticError, TripletFormatError
from .stochastic import RowStochasticMatrix


def format_triplets(P):
    """Serialize a square sparse or dense matrix to triplet text."""
    csr = P.csr if isinstance(P, RowStochasticMatrix) else sp.csr_matrix(P)
    coo = csr.tocoo()
    order = np.lexsort((coo.col, coo.row))
    lines = [f"{csr.shape[0]} {csr.shape[1]} {coo.nnz}"]
    for i in order:
        lines.append(f"{coo.row[i]} {coo.col[i]} {float(coo.data[i]):.17g}")
    return "\n".join(lines) + "\n"


def write_triplets(P, path):
    with open(path, "w", newline="\n") as fh:
        fh.write(format_triplets(P))


def _data_lines(lines):
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if text and not text.startswith("#"):
            yield lineno, text


def parse_triplets(lines):
    """Parse triplet text (an iterable of lines) into a CSR matrix.

    Raises
    ------
    TripletFormatError
        With the offending line number for malformed headers or entries,
        out-of-range indices, duplicates or a count mismatch.
    """
    it = _data_lines(lines)
    try:
        lineno, header = next(it)
    except StopIteration:
        raise TripletFormatError("missing 'rows cols nnz' header") from None
    parts = header.split()
    try:
        rows, cols, nnz = (int(p) for p in parts)
    except ValueError:
        raise TripletFormatError(f"header must be three integers, got {header!r}", lineno) from None
    if rows < 1 or cols < 1 or nnz < 0:
        raise TripletFormatError(f"invalid header {header!r}", lineno)
    r_idx, c_idx, vals, seen = [], [], [], set()
    for lineno, text in it:
        parts = text.split()
        if len(parts) != 3:
            raise TripletFormatError(f"expected 'row col value', got {text!r}", lineno)
        try:
            r, c, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise TripletFormatError(f"cannot parse entry {text!r}", lineno) from None
        if not (0 <= r < rows and 0 <= c < cols):
            raise TripletFormatError(f"index ({r}, {c}) outside {rows}x{cols}", lineno)
        if not np.isfinite(v):
            raise TripletFormatError(f"non-finite value {parts[2]!r}", lineno)
        if (r, c) in seen:
            raise TripletFormatError(f"duplicate entry ({r}, {c})", lineno)
        seen.add((r, c))
        r_idx.append(r)
        c_idx.append(c)
        vals.append(v)
    if len(vals) != nnz:
        raise TripletFormatError(f"header declares {nnz} entries, found {len(vals)}")
    return sp.csr_matrix((vals, (r_idx, c_idx)), shape=(rows, cols))


def read_triplets(path, *, stochastic=True):
    """Read a triplet file, by default as a :class:`RowStochasticMatrix`."""
    with open(path) as fh:
        csr = parse_triplets(fh)
    if not stochastic:
        return csr
    try:
        return RowStochasticMatrix(csr)
    except NotStochasticError as err:
        raise TripletFormatError(f"{path}: {err}") from err


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _fmt(x):
    return repr(float(x))


def write_trace_long(trace, path):
    """Long-format series: ``k, run, ave``."""
    rows = (
        (k, r, _fmt(trace.ave[r, k]))
        for r in range(trace.runs)
        for k in range(trace.horizon + 1)
    )
    write_csv(path, ["k", "run", "ave"], rows)


def write_trace_summary(trace, P, path):
    """Per-step summary: ``k, mean_ave, var_ave, analytic_var``."""
    s = trace.summary(P)
    rows = (
        (int(k), _fmt(m), "" if np.isnan(v) else _fmt(v), _fmt(a))
        for k, m, v, a in zip(s["k"], s["mean_ave"], s["var_ave"], s["analytic_var"])
    )
    write_csv(path, ["k", "mean_ave", "var_ave", "analytic_var"], rows)


def write_json(obj, path):
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(outputs, *, argv=None, config=None, prng=None, extra=None):
    """Run manifest: command echo, config hash, PRNG, version, timestamp and output hashes."""
    from . import __version__

    manifest = {
        "argv": list(sys.argv if argv is None else argv),
        "tool": "crowdwise",
        "version": __version__,
        "prng": prng,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        "config": config,
        "config_sha256": hashlib.sha256(
            json.dumps(config, sort_keys=True).encode()
        ).hexdigest() if config is not None else None,
        "outputs": [
            {"path": os.path.basename(p), "sha256": file_sha256(p)} for p in outputs
        ],
    }
    if extra:
        manifest.update(extra)
    return manifest
