"""Plain-text system files and CSV run histories.

System file layout: first line ``n``, then ``n`` lines holding the matrix
rows, then one line holding ``b``.  Blank lines and ``#`` comments are
ignored.
"""

import csv
import io as _io
import os

import numpy as np

from .linalg import LinearSystem


class SystemFormatError(ValueError):
    """Malformed system file."""


def save_system(system, path):
    lines = [str(system.n)]
    lines += [" ".join(repr(float(v)) for v in row) for row in system.a]
    lines.append(" ".join(repr(float(v)) for v in system.b))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_row(tokens, lineno, expected, what):
    if len(tokens) != expected:
        raise SystemFormatError(f"line {lineno}: {what} has {len(tokens)} values, expected {expected}")
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise SystemFormatError(f"line {lineno}: {exc}") from None


def load_system(path):
    with open(path, encoding="utf-8") as fh:
        raw = fh.read().splitlines()
    rows = []
    for lineno, line in enumerate(raw, start=1):
        text = line.split("#", 1)[0].strip()
        if text:
            rows.append((lineno, text.split()))
    if not rows:
        raise SystemFormatError("line 1: empty system file")

    lineno, first = rows[0]
    if len(first) != 1:
        raise SystemFormatError(f"line {lineno}: expected the dimension alone")
    try:
        n = int(first[0])
    except ValueError:
        raise SystemFormatError(f"line {lineno}: dimension {first[0]!r} is not an integer") from None
    if n < 1:
        raise SystemFormatError(f"line {lineno}: dimension must be positive")
    if len(rows) < n + 2:
        last = rows[-1][0]
        raise SystemFormatError(f"line {last + 1}: truncated file, expected {n} matrix rows and b")
    if len(rows) > n + 2:
        raise SystemFormatError(f"line {rows[n + 2][0]}: unexpected trailing data")

    a = np.array([_parse_row(tok, ln, n, f"matrix row {k}")
                  for k, (ln, tok) in enumerate(rows[1:n + 1], start=1)])
    ln, tok = rows[n + 1]
    b = np.array(_parse_row(tok, ln, n, "right-hand side"))
    zero = np.flatnonzero(np.diag(a) == 0.0)
    if zero.size:
        raise SystemFormatError(f"zero diagonal entry in row {zero[0] + 1}")
    return LinearSystem(a, b)


def _fmt_error(v):
    if np.isfinite(v):
        return f"{v:.15e}"
    return "inf" if v > 0 else "nan"


def history_csv(result):
    """Render the convergence and relaxation-factor history as CSV text."""
    width = len(result.omega_history[0])
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["generation", "best_error"] + [f"omega_{i}" for i in range(1, width + 1)])
    for g, (err, omegas) in enumerate(zip(result.best_error_history, result.omega_history)):
        writer.writerow([g, _fmt_error(err)] + [f"{w:.17g}" for w in omegas])
    return buf.getvalue()


def export_history(result, path):
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(history_csv(result))
    return path
