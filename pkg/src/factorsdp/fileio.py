"""File formats: edge-list graphs, observed-entry lists, PPM images,
and the result records the command line emits.

Graph format ("n m" header, then m lines "i j w", 1-based): duplicate
edges sum their weights, self-loops are rejected, malformed lines
report their line number.  The observation format is the same shape but
allows i == j and requires every diagonal entry to be present, since
the factorization objective needs the diagonal to be observed.

Result records are a single line of space-separated key=value pairs in
a fixed key order, with a JSON sidecar written next to them for
machine consumption.
"""

from __future__ import annotations

import json

import numpy as np

from .sparse import SparsityPattern, SymSparse

__all__ = [
    "parse_graph",
    "serialize_graph",
    "parse_observations",
    "serialize_observations",
    "parse_ppm",
    "format_result_record",
    "write_result_record",
]


class InputFormatError(ValueError):
    """Raised for malformed input files; messages carry line numbers."""


def _parse_edge_lines(text, name, allow_loops):
    lines = text.splitlines()
    header = None
    header_lineno = 0
    for lineno, raw in enumerate(lines, start=1):
        if raw.strip():
            header = raw.split()
            header_lineno = lineno
            break
    if header is None:
        raise InputFormatError(f"{name}: empty file")
    if len(header) != 2:
        raise InputFormatError(
            f"{name}: line {header_lineno}: expected 'n m' header, got {lines[header_lineno-1]!r}")
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError:
        raise InputFormatError(
            f"{name}: line {header_lineno}: header fields must be integers") from None
    if n <= 0 or m < 0:
        raise InputFormatError(f"{name}: line {header_lineno}: need n > 0 and m >= 0")
    entries = {}
    count = 0
    for lineno in range(header_lineno + 1, len(lines) + 1):
        raw = lines[lineno - 1]
        if not raw.strip():
            continue
        parts = raw.split()
        if len(parts) != 3:
            raise InputFormatError(
                f"{name}: line {lineno}: expected 'i j w', got {raw!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            w = float(parts[2])
        except ValueError:
            raise InputFormatError(
                f"{name}: line {lineno}: could not parse 'i j w' fields") from None
        if not (1 <= i <= n and 1 <= j <= n):
            raise InputFormatError(
                f"{name}: line {lineno}: index out of range 1..{n}")
        if i == j and not allow_loops:
            raise InputFormatError(f"{name}: line {lineno}: self-loop {i} {j}")
        count += 1
        key = (i - 1, j - 1) if i <= j else (j - 1, i - 1)
        entries[key] = entries.get(key, 0.0) + w
    if count != m:
        raise InputFormatError(
            f"{name}: header promises {m} entries but file has {count}")
    return n, entries


def parse_graph(text, name="graph"):
    """Edge-list text to a pattern-stored adjacency (zero diagonal)."""
    n, entries = _parse_edge_lines(text, name, allow_loops=False)
    pat = SparsityPattern(n, entries.keys())
    vals = np.zeros(pat.nnz)
    for (i, j), w in entries.items():
        vals[pat.index_of(i, j)] = w
    return SymSparse(pat, vals)


def serialize_graph(A):
    """Canonical edge-list text: sorted 1-based pairs, repr weights.

    Diagonal storage positions are skipped (the format has no
    self-loops); parsing the output reproduces the off-diagonal entries
    exactly since repr round-trips doubles.
    """
    pat = A.pattern
    lines = []
    for k in range(pat.nnz):
        i, j = int(pat.rows[k]), int(pat.cols[k])
        if i == j:
            continue
        lines.append(f"{i + 1} {j + 1} {A.values[k]!r}")
    return f"{A.n} {len(lines)}\n" + "\n".join(lines) + ("\n" if lines else "")


def parse_observations(text, name="observations"):
    """Observed-entry text to a SymSparse; the diagonal must be covered.

    Same line format as graphs but i == j is allowed and required: any
    diagonal entry missing from the file is an error, because the
    factorization loss reads the full diagonal.
    """
    n, entries = _parse_edge_lines(text, name, allow_loops=True)
    have_diag = {i for (i, j) in entries if i == j}
    missing = [i + 1 for i in range(n) if i not in have_diag]
    if missing:
        raise InputFormatError(
            f"{name}: diagonal entries missing for indices {missing[:5]}"
            + ("..." if len(missing) > 5 else ""))
    pat = SparsityPattern(n, entries.keys())
    vals = np.zeros(pat.nnz)
    for (i, j), w in entries.items():
        vals[pat.index_of(i, j)] = w
    return SymSparse(pat, vals)


def serialize_observations(C):
    """Canonical observed-entry text including every stored entry."""
    pat = C.pattern
    lines = [f"{int(i) + 1} {int(j) + 1} {v!r}"
             for i, j, v in zip(pat.rows, pat.cols, C.values)]
    return f"{C.n} {len(lines)}\n" + "\n".join(lines) + "\n"


def _ppm_tokens(data):
    """Header tokens of a PPM file, skipping '#' comments."""
    pos = 0
    while True:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        break
    start = pos
    while pos < len(data) and not data[pos:pos + 1].isspace():
        pos += 1
    if start == pos:
        raise InputFormatError("ppm: truncated header")
    return data[start:pos], pos


def parse_ppm(data, name="image"):
    """P3 or P6 image bytes to an (h, w, 3) float array in [0, 1].

    Only maxval 255 is supported; anything else is rejected rather than
    silently rescaled.
    """
    if isinstance(data, str):
        data = data.encode("latin-1")
    magic, pos = _ppm_tokens(data)
    if magic not in (b"P3", b"P6"):
        raise InputFormatError(f"{name}: not a P3/P6 ppm (magic {magic!r})")
    fields = []
    for _ in range(3):
        tok, newpos = _ppm_tokens(data[pos:])
        pos += newpos
        try:
            fields.append(int(tok))
        except ValueError:
            raise InputFormatError(f"{name}: bad header token {tok!r}") from None
    w, h, maxval = fields
    if w <= 0 or h <= 0:
        raise InputFormatError(f"{name}: bad dimensions {w}x{h}")
    if maxval != 255:
        raise InputFormatError(f"{name}: only maxval 255 supported, got {maxval}")
    need = w * h * 3
    if magic == b"P6":
        pos += 1  # single whitespace byte after maxval
        raster = data[pos:pos + need]
        if len(raster) < need:
            raise InputFormatError(f"{name}: raster truncated")
        vals = np.frombuffer(raster, dtype=np.uint8).astype(np.float64)
    else:
        toks = data[pos:].split()
        if len(toks) < need:
            raise InputFormatError(f"{name}: expected {need} samples, got {len(toks)}")
        try:
            vals = np.array([int(t) for t in toks[:need]], dtype=np.float64)
        except ValueError:
            raise InputFormatError(f"{name}: non-integer sample") from None
        if vals.min() < 0 or vals.max() > 255:
            raise InputFormatError(f"{name}: sample out of range 0..255")
    return (vals / 255.0).reshape(h, w, 3)


#: fixed key order of the one-line record; unknown keys append after these
RECORD_KEYS = ("problem", "solver", "n", "r", "status", "converged",
               "iterations", "objective", "cut_value", "relative_error",
               "P", "D", "rho_final", "seed", "wall_time_s", "flags")


def format_result_record(record):
    """One line of key=value pairs in the documented fixed order."""
    parts = []
    seen = set()
    for key in RECORD_KEYS:
        if key in record:
            parts.append(f"{key}={_fmt(record[key])}")
            seen.add(key)
    for key in record:
        if key not in seen:
            parts.append(f"{key}={_fmt(record[key])}")
    return " ".join(parts) + "\n"


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True, separators=(",", ":"))
    return str(value)


def write_result_record(record, path, sidecar_extra=None):
    """Write the one-line record plus a JSON sidecar at path + '.json'.

    ``sidecar_extra`` lands only in the sidecar, for bulky payloads such
    as per-node labels that would bloat the one-line record.
    """
    with open(path, "w") as fh:
        fh.write(format_result_record(record))
    sidecar = dict(record)
    if sidecar_extra:
        sidecar.update(sidecar_extra)
    with open(str(path) + ".json", "w") as fh:
        json.dump(sidecar, fh, sort_keys=True, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    raise TypeError(f"cannot serialize {type(value)!r}")
