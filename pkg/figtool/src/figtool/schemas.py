"""CSV input schemas, one per figure kind, with loud drift reporting."""
import csv
from dataclasses import dataclass


class SchemaError(Exception):
    """Input file does not match the expected column layout."""


# exact header per figure kind, matching the producing CLI
SCHEMAS: dict[str, list[str]] = {
    "regions": ["s", "l", "in_lwp", "regime"],
    "prob_curve": ["c", "n", "n_scattered", "p_hat", "lo", "hi"],
    "gbm_decay": ["c", "s", "p", "eps", "p_hat", "lo", "hi"],
    "traces": ["t", "mass", "energy", "Hs_schro", "Hl_wave", "budget", "h_value"],
}

# which columns parse as floats (the rest stay strings)
_NUMERIC = {
    "regions": ["s", "l", "in_lwp"],
    "prob_curve": ["c", "n", "n_scattered", "p_hat", "lo", "hi"],
    "gbm_decay": ["c", "s", "p", "eps", "p_hat", "lo", "hi"],
    "traces": ["t", "mass", "energy", "Hs_schro", "Hl_wave", "budget", "h_value"],
}


@dataclass
class Table:
    kind: str
    columns: dict[str, list]

    def __len__(self) -> int:
        return len(next(iter(self.columns.values()), []))


def read_table(path: str, kind: str) -> Table:
    """Read and validate a CSV against the schema for the given figure kind.

    Raises SchemaError with a column diff when the header drifts, and when a
    row fails to parse.
    """
    if kind not in SCHEMAS:
        raise SchemaError(f"unknown figure kind {kind!r}")
    expected = SCHEMAS[kind]
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"{path}: {exc}")
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header {expected}")
        if header != expected:
            missing = [c for c in expected if c not in header]
            extra = [c for c in header if c not in expected]
            parts = [f"{path}: header mismatch for kind {kind!r}"]
            if missing:
                parts.append(f"missing columns: {missing}")
            if extra:
                parts.append(f"unexpected columns: {extra}")
            if not missing and not extra:
                parts.append(f"column order differs: got {header}, want {expected}")
            raise SchemaError("; ".join(parts))
        numeric = set(_NUMERIC[kind])
        cols: dict[str, list] = {name: [] for name in expected}
        for i, row in enumerate(reader, start=2):
            if len(row) != len(expected):
                raise SchemaError(f"{path}:{i}: expected {len(expected)} fields, got {len(row)}")
            for name, raw in zip(expected, row):
                if name in numeric:
                    try:
                        cols[name].append(float(raw))
                    except ValueError:
                        raise SchemaError(f"{path}:{i}: column {name!r}: not a number: {raw!r}")
                else:
                    cols[name].append(raw)
    return Table(kind=kind, columns=cols)
