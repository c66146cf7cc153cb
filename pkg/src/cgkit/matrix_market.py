"""Matrix Market text I/O.

Supports the ``coordinate`` and ``array`` formats with ``real`` or
``integer`` fields and ``general`` or ``symmetric`` symmetry. Indices are
1-based on disk and 0-based in memory. Symmetric coordinate files are
expanded to full storage on read; duplicate coordinate entries are summed.
Values are written with shortest round-trip formatting so a write/read cycle
reproduces them bit for bit.
"""

from __future__ import annotations

import numpy as np

from .sparse import SparseMatrixCsr, as_dense_matrix

_HEADER_PREFIX = "%%matrixmarket"


class MatrixMarketError(ValueError):
    """Parse failure; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def read_matrix_market(path):
    """Read a Matrix Market file.

    Returns a :class:`SparseMatrixCsr` for coordinate files and a dense
    2-D array for array files. Non-square matrices are returned as-is;
    squareness checks are left to the consumer.
    """
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.readlines()
    if not lines:
        raise MatrixMarketError("empty file", 1)

    header = lines[0].strip().lower().split()
    if len(header) != 5 or header[0] != _HEADER_PREFIX:
        raise MatrixMarketError(
            "expected header '%%MatrixMarket matrix <format> <field> <symmetry>'", 1
        )
    _, obj, fmt, field, symmetry = header
    if obj != "matrix":
        raise MatrixMarketError(f"unsupported object {obj!r}", 1)
    if fmt not in ("coordinate", "array"):
        raise MatrixMarketError(f"unsupported format {fmt!r}", 1)
    if field not in ("real", "integer"):
        raise MatrixMarketError(f"unsupported field {field!r}", 1)
    if symmetry not in ("general", "symmetric"):
        raise MatrixMarketError(f"unsupported symmetry {symmetry!r}", 1)

    # first non-comment, non-blank line after the header is the size line
    i = 1
    while i < len(lines) and (lines[i].startswith("%") or not lines[i].strip()):
        i += 1
    if i >= len(lines):
        raise MatrixMarketError("missing size line", len(lines))

    size_parts = lines[i].split()
    if fmt == "coordinate":
        if len(size_parts) != 3:
            raise MatrixMarketError("coordinate size line must be 'rows cols nnz'", i + 1)
        try:
            m, n, nnz = (int(p) for p in size_parts)
        except ValueError:
            raise MatrixMarketError("size line entries must be integers", i + 1) from None
        return _read_coordinate(lines, i + 1, m, n, nnz, symmetry == "symmetric")

    if len(size_parts) != 2:
        raise MatrixMarketError("array size line must be 'rows cols'", i + 1)
    try:
        m, n = (int(p) for p in size_parts)
    except ValueError:
        raise MatrixMarketError("size line entries must be integers", i + 1) from None
    return _read_array(lines, i + 1, m, n, symmetry == "symmetric")


def _read_coordinate(lines, start, m, n, nnz, symmetric) -> SparseMatrixCsr:
    rows, cols, vals = [], [], []
    count = 0
    for ln in range(start, len(lines)):
        text = lines[ln].strip()
        if not text or text.startswith("%"):
            continue
        parts = text.split()
        if len(parts) != 3:
            raise MatrixMarketError("entry must be 'row col value'", ln + 1)
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise MatrixMarketError(f"cannot parse entry {text!r}", ln + 1) from None
        if not (1 <= i <= m and 1 <= j <= n):
            raise MatrixMarketError(f"index ({i}, {j}) outside {m}x{n}", ln + 1)
        if symmetric and j > i:
            raise MatrixMarketError("symmetric file lists an upper-triangle entry", ln + 1)
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(v)
        if symmetric and i != j:
            rows.append(j - 1)
            cols.append(i - 1)
            vals.append(v)
        count += 1
    if count != nnz:
        raise MatrixMarketError(f"size line promised {nnz} entries, found {count}", len(lines))
    return SparseMatrixCsr.from_coo(m, n, rows, cols, vals)


def _read_array(lines, start, m, n, symmetric) -> np.ndarray:
    if symmetric and m != n:
        raise MatrixMarketError("symmetric array matrix must be square", start)
    # column-major entry order; symmetric files store the lower triangle only
    if symmetric:
        coords = [(i, j) for j in range(n) for i in range(j, m)]
    else:
        coords = [(i, j) for j in range(n) for i in range(m)]
    a = np.zeros((m, n))
    k = 0
    for ln in range(start, len(lines)):
        text = lines[ln].strip()
        if not text or text.startswith("%"):
            continue
        for token in text.split():
            if k >= len(coords):
                raise MatrixMarketError("more entries than the size line allows", ln + 1)
            try:
                v = float(token)
            except ValueError:
                raise MatrixMarketError(f"cannot parse value {token!r}", ln + 1) from None
            i, j = coords[k]
            a[i, j] = v
            if symmetric:
                a[j, i] = v
            k += 1
    if k != len(coords):
        raise MatrixMarketError(f"expected {len(coords)} entries, found {k}", len(lines))
    return a


def write_matrix_market(path, matrix, symmetric: bool = False, comment: str | None = None):
    """Write a CSR matrix (coordinate format) or dense array (array format).

    With ``symmetric=True`` the matrix must be square and symmetric; only the
    lower triangle is stored.
    """
    if isinstance(matrix, SparseMatrixCsr):
        _write_coordinate(path, matrix, symmetric, comment)
    else:
        _write_array(path, as_dense_matrix(matrix), symmetric, comment)


def _write_coordinate(path, a: SparseMatrixCsr, symmetric, comment):
    if symmetric:
        _require_symmetric(a.to_dense())
    lines = [f"%%MatrixMarket matrix coordinate real {'symmetric' if symmetric else 'general'}\n"]
    if comment:
        lines += [f"% {c}\n" for c in comment.splitlines()]
    entries = []
    for i in range(a.n_rows):
        cols, vals = a.row(i)
        for j, v in zip(cols, vals):
            if symmetric and j > i:
                continue
            entries.append((i + 1, j + 1, v))
    lines.append(f"{a.n_rows} {a.n_cols} {len(entries)}\n")
    lines += [f"{i} {j} {float(v)!r}\n" for i, j, v in entries]
    with open(path, "w", encoding="ascii") as fh:
        fh.writelines(lines)


def _write_array(path, a: np.ndarray, symmetric, comment):
    if symmetric:
        _require_symmetric(a)
    m, n = a.shape
    lines = [f"%%MatrixMarket matrix array real {'symmetric' if symmetric else 'general'}\n"]
    if comment:
        lines += [f"% {c}\n" for c in comment.splitlines()]
    lines.append(f"{m} {n}\n")
    if symmetric:
        values = (a[i, j] for j in range(n) for i in range(j, m))
    else:
        values = (a[i, j] for j in range(n) for i in range(m))
    lines += [f"{float(v)!r}\n" for v in values]
    with open(path, "w", encoding="ascii") as fh:
        fh.writelines(lines)


def _require_symmetric(a: np.ndarray):
    if a.shape[0] != a.shape[1] or not np.array_equal(a, a.T):
        raise ValueError("symmetric output requested for a non-symmetric matrix")
