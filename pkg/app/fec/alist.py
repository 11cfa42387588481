"""
MacKay alist reader/writer and code lookup.

Layout, one record per line:
    N M
    max_col_degree max_row_degree
    N column degrees
    M row degrees
    N lines of 1-based row indices (one per column, zero padded)
    M lines of 1-based column indices (one per row, zero padded)
"""

import hashlib
import logging
from pathlib import Path

from app.config import BUILTIN_CODES, CODES_DIR
from app.fec.ldpc import ParityCheckMatrix, builtin_matrix

logger = logging.getLogger(__name__)


class AlistParseError(ValueError):
    """Malformed alist text; `line` is the 1-based physical line number."""

    def __init__(self, line: int, section: str, message: str):
        self.line = line
        self.section = section
        self.message = message
        super().__init__(f"line {line}: {section}: {message}")


class _Lines:
    """Non-blank lines with their physical line numbers."""

    def __init__(self, text: str):
        self._items = [(no, raw.split()) for no, raw in enumerate(text.splitlines(), start=1) if raw.strip()]
        self._pos = 0
        self._last = text.count("\n") + 1

    def take(self, section: str) -> tuple[int, list[int]]:
        if self._pos >= len(self._items):
            raise AlistParseError(self._last, section, "missing, file ends early")
        no, tokens = self._items[self._pos]
        self._pos += 1
        try:
            return no, [int(t) for t in tokens]
        except ValueError:
            raise AlistParseError(no, section, f"expected integers, got {' '.join(tokens)!r}") from None

    def rest(self) -> list[int]:
        return [no for no, _ in self._items[self._pos:]]


def _expect_count(no: int, section: str, values: list[int], count: int) -> None:
    if len(values) != count:
        raise AlistParseError(no, section, f"expected {count} values, found {len(values)}")


def _read_lists(lines: _Lines, section: str, degrees: list[int], limit: int) -> list[tuple[int, list[int]]]:
    out = []
    for idx, degree in enumerate(degrees):
        no, values = lines.take(section)
        entries = [v for v in values if v != 0]
        if len(entries) != degree:
            raise AlistParseError(no, section, f"entry {idx + 1} lists {len(entries)} indices, degree says {degree}")
        bad = [v for v in entries if v < 1 or v > limit]
        if bad:
            raise AlistParseError(no, section, f"index {bad[0]} outside 1..{limit}")
        if len(set(entries)) != len(entries):
            raise AlistParseError(no, section, f"entry {idx + 1} repeats an index")
        out.append((no, [v - 1 for v in entries]))
    return out


def parse_alist(text: str, name: str = "alist", source: str | None = None) -> ParityCheckMatrix:
    lines = _Lines(text)

    no, header = lines.take("header")
    _expect_count(no, "header", header, 2)
    n, m = header
    if n < 1 or m < 1:
        raise AlistParseError(no, "header", f"N and M must be positive, got N={n} M={m}")

    no, maxima = lines.take("max degrees")
    _expect_count(no, "max degrees", maxima, 2)
    max_col, max_row = maxima

    no, col_degrees = lines.take("column degrees")
    _expect_count(no, "column degrees", col_degrees, n)
    if any(d < 0 or d > max_col for d in col_degrees):
        raise AlistParseError(no, "column degrees", f"degrees must lie in 0..{max_col}")

    no, row_degrees = lines.take("row degrees")
    _expect_count(no, "row degrees", row_degrees, m)
    if any(d < 1 or d > max_row for d in row_degrees):
        raise AlistParseError(no, "row degrees", f"degrees must lie in 1..{max_row}")
    if sum(col_degrees) != sum(row_degrees):
        raise AlistParseError(
            no, "row degrees", f"row degrees sum to {sum(row_degrees)}, column degrees to {sum(col_degrees)}"
        )

    col_lists = _read_lists(lines, "column lists", col_degrees, m)
    row_lists = _read_lists(lines, "row lists", row_degrees, n)

    col_edges = {(i, j) for j, (_, rows) in enumerate(col_lists) for i in rows}
    for i, (no, cols) in enumerate(row_lists):
        for j in cols:
            if (i, j) not in col_edges:
                raise AlistParseError(no, "row lists", f"row {i + 1} lists column {j + 1}, which does not list it back")

    trailing = lines.rest()
    if trailing:
        logger.warning("%s: ignoring %d trailing line(s) from line %d", name, len(trailing), trailing[0])

    return ParityCheckMatrix(n, [cols for _, cols in row_lists], name=name, source=source)


def _padded(values, width: int) -> str:
    items = [str(v) for v in values] + ["0"] * (width - len(values))
    return " ".join(items)


def serialize_alist(h: ParityCheckMatrix) -> str:
    col_deg = h.col_degrees.tolist()
    row_deg = h.row_degrees.tolist()
    max_col, max_row = max(col_deg), max(row_deg)

    out = [f"{h.n} {h.m}", f"{max_col} {max_row}", " ".join(map(str, col_deg)), " ".join(map(str, row_deg))]
    out += [_padded((c + 1).tolist(), max_col) for c in h.cols]
    out += [_padded((r + 1).tolist(), max_row) for r in h.rows]
    return "\n".join(out) + "\n"


def load_alist(path) -> ParityCheckMatrix:
    path = Path(path)
    text = path.read_text(encoding="ascii")
    h = parse_alist(text, name=path.stem, source=str(path))
    h.digest = hashlib.sha256(text.encode("ascii")).hexdigest()
    logger.info("Loaded %s from %s (N=%d M=%d sha256=%s)", h.name, path, h.n, h.m, h.digest[:12])
    return h


def save_alist(h: ParityCheckMatrix, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_alist(h), encoding="ascii")
    return path


def resolve_alist(ref) -> Path:
    """An alist path as given, or a file name (with or without .alist) under CODES_DIR."""
    ref = str(ref)
    for candidate in (Path(ref), CODES_DIR / ref, CODES_DIR / f"{ref}.alist"):
        if candidate.is_file():
            return candidate
    raise FileNotFoundError(f"no alist file {ref!r} (also looked in {CODES_DIR})")


def load_code(ref: str) -> ParityCheckMatrix:
    """Resolve a --code value: builtin name, alist path, or alist name under CODES_DIR."""
    if ref in BUILTIN_CODES:
        return builtin_matrix(ref)
    try:
        return load_alist(resolve_alist(ref))
    except FileNotFoundError:
        raise FileNotFoundError(
            f"unknown code {ref!r}: not a builtin ({', '.join(BUILTIN_CODES)}) or an alist file"
        ) from None


def provenance(h: ParityCheckMatrix) -> dict:
    """Where a matrix came from, plus a digest that pins its exact content."""
    digest = h.digest or hashlib.sha256(serialize_alist(h).encode("ascii")).hexdigest()
    return {"code": h.name, "source": h.source or "in-memory", "sha256": digest}
