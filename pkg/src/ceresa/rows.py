"""Flat output rows: CSV and JSON forms of a VolumeResult."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from typing import Iterable

from .volume import VolumeResult

CSV_HEADER = ("N", "m", "k", "value", "err_exponent", "verdict", "prec_bits", "method", "elapsed_ms")
VALUE_DECIMALS = 12
ERROR_VERDICT = "Error"


def format_value(x: Fraction, decimals: int = VALUE_DECIMALS) -> str:
    """Fixed-point decimal string, rounding half to even."""
    scaled = round(x * 10**decimals)
    sign = "-" if scaled < 0 else ""
    q, r = divmod(abs(scaled), 10**decimals)
    return f"{sign}{q}.{r:0{decimals}d}"


def err_exponent(err: Fraction) -> int | None:
    """Smallest integer e with err <= 10**e (None for an exact zero radius)."""
    if err <= 0:
        return None
    e = len(str(err.numerator)) - len(str(err.denominator))
    while Fraction(10) ** e < err:
        e += 1
    while Fraction(10) ** (e - 1) >= err:
        e -= 1
    return e


@dataclass(frozen=True)
class TableRow:
    N: int
    m: int | None
    k: int
    value: str
    err_exponent: int | None
    verdict: str
    prec_bits: int | None
    method: str
    elapsed_ms: int | None = None

    @classmethod
    def from_result(cls, r: VolumeResult, timing: bool = True) -> TableRow:
        return cls(
            N=r.N, m=r.m, k=r.k,
            value=format_value(r.value_mod1.mid_fraction()),
            err_exponent=err_exponent(r.value_mod1.rad_fraction()),
            verdict=r.verdict.value,
            prec_bits=r.prec_bits,
            method=r.method,
            elapsed_ms=round(r.elapsed * 1000) if timing else 0,
        )

    @classmethod
    def failed(cls, N: int, k: int, method: str, m: int | None = None) -> TableRow:
        return cls(N, m, k, "", None, ERROR_VERDICT, None, method, None)

    def as_strings(self) -> list[str]:
        return ["" if getattr(self, f) is None else str(getattr(self, f)) for f in CSV_HEADER]

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(", ", ": "))


_INT_FIELDS = {f.name for f in fields(TableRow)} - {"value", "verdict", "method"}


def write_csv(rows: Iterable[TableRow], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow(row.as_strings())


def rows_to_csv(rows: Iterable[TableRow]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def read_csv(fh) -> list[TableRow]:
    reader = csv.DictReader(fh)
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    out = []
    for rec in reader:
        kw = {k: (None if v == "" and k in _INT_FIELDS else int(v) if k in _INT_FIELDS else v) for k, v in rec.items()}
        out.append(TableRow(**kw))
    return out


def parse_csv(text: str) -> list[TableRow]:
    return read_csv(io.StringIO(text))


__all__ = ["CSV_HEADER", "TableRow", "format_value", "err_exponent", "write_csv", "rows_to_csv", "read_csv", "parse_csv"]
