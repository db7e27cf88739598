"""Qubit measurement records and CSV ingestion.

CSV schema (one header line, ``-`` marks a missing value):

    sample,qubit,X_um,Y_um,W_um,f01_GHz,T1_us,sqrtA_left_uPhi0,sqrtA_right_uPhi0,capacitor

Geometry columns are in micrometers, frequency in GHz, relaxation time
in microseconds and noise amplitudes in micro flux quanta.  Records are
stored in SI units (meters, Hz, seconds) with amplitudes as fractions
of the flux quantum; conversion happens only at load/dump time.
"""

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ValidationError

COLUMNS = (
    "sample",
    "qubit",
    "X_um",
    "Y_um",
    "W_um",
    "f01_GHz",
    "T1_us",
    "sqrtA_left_uPhi0",
    "sqrtA_right_uPhi0",
    "capacitor",
)

CAPACITOR_SHAPES = ("floating", "grounded")


@dataclass(frozen=True)
class QubitRecord:
    """One measured qubit: SQUID geometry plus extracted noise amplitudes."""

    sample: str
    qubit: int
    X: float                      # m
    Y: float                      # m
    W: float                      # m
    f01: float | None = None      # Hz
    T1_avg: float | None = None   # s
    sqrtA_left: float | None = None    # Phi0 units
    sqrtA_right: float | None = None   # Phi0 units
    capacitor: str | None = None

    def __post_init__(self):
        if not (self.X > 0 and self.Y > 0 and self.W > 0):
            raise ValidationError("record geometry fields must be positive")
        if self.capacitor is not None and self.capacitor not in CAPACITOR_SHAPES:
            raise ValidationError(f"unknown capacitor shape {self.capacitor!r}")

    @property
    def eligible(self) -> bool:
        """True when at least one measured amplitude is present."""
        return self.sqrtA_left is not None or self.sqrtA_right is not None

    @property
    def amplitudes(self) -> tuple[float, ...]:
        return tuple(a for a in (self.sqrtA_left, self.sqrtA_right) if a is not None)


def _parse_value(text: str, caster, column: str, row_number: int):
    text = text.strip()
    if text == "-" or text == "":
        return None
    try:
        return caster(text)
    except ValueError as exc:
        raise ValidationError(
            f"row {row_number}: cannot parse column {column!r} from {text!r}"
        ) from exc


def load_dataset(path) -> list[QubitRecord]:
    """Read qubit records from a CSV file following the declared schema."""
    path = Path(path)
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            return []
        header = [h.strip() for h in header]
        unknown = set(header) - set(COLUMNS)
        if unknown:
            raise ValidationError(f"unknown column(s) {sorted(unknown)} in {path}")
        missing = set(COLUMNS) - set(header)
        if missing:
            raise ValidationError(f"missing column(s) {sorted(missing)} in {path}")
        index = {name: header.index(name) for name in COLUMNS}

        records = []
        for row_number, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ValidationError(
                    f"row {row_number}: expected {len(header)} fields, got {len(row)}"
                )

            def cell(name):
                return row[index[name]]

            sample = cell("sample").strip()
            qubit = _parse_value(cell("qubit"), int, "qubit", row_number)
            if sample == "" or qubit is None:
                raise ValidationError(f"row {row_number}: sample and qubit are required")
            geometry = {}
            for name in ("X_um", "Y_um", "W_um"):
                value = _parse_value(cell(name), float, name, row_number)
                if value is None or value <= 0:
                    raise ValidationError(
                        f"row {row_number}: column {name!r} must be a positive number"
                    )
                geometry[name] = value * 1e-6
            f01 = _parse_value(cell("f01_GHz"), float, "f01_GHz", row_number)
            t1 = _parse_value(cell("T1_us"), float, "T1_us", row_number)
            left = _parse_value(cell("sqrtA_left_uPhi0"), float, "sqrtA_left_uPhi0", row_number)
            right = _parse_value(cell("sqrtA_right_uPhi0"), float, "sqrtA_right_uPhi0", row_number)
            capacitor = cell("capacitor").strip()
            capacitor = None if capacitor in ("-", "") else capacitor

            try:
                records.append(
                    QubitRecord(
                        sample=sample,
                        qubit=qubit,
                        X=geometry["X_um"],
                        Y=geometry["Y_um"],
                        W=geometry["W_um"],
                        f01=None if f01 is None else f01 * 1e9,
                        T1_avg=None if t1 is None else t1 * 1e-6,
                        sqrtA_left=None if left is None else left * 1e-6,
                        sqrtA_right=None if right is None else right * 1e-6,
                        capacitor=capacitor,
                    )
                )
            except ValidationError as exc:
                raise ValidationError(f"row {row_number}: {exc}") from exc
    return records


def _format_value(value, scale: float) -> str:
    if value is None:
        return "-"
    return f"{value * scale:.10g}"


def dump_dataset(records, path) -> None:
    """Write records back out in the canonical CSV form."""
    path = Path(path)
    lines = [",".join(COLUMNS)]
    for r in records:
        lines.append(
            ",".join(
                (
                    r.sample,
                    str(r.qubit),
                    _format_value(r.X, 1e6),
                    _format_value(r.Y, 1e6),
                    _format_value(r.W, 1e6),
                    _format_value(r.f01, 1e-9),
                    _format_value(r.T1_avg, 1e6),
                    _format_value(r.sqrtA_left, 1e6),
                    _format_value(r.sqrtA_right, 1e6),
                    r.capacitor if r.capacitor is not None else "-",
                )
            )
        )
    path.write_text("\n".join(lines) + "\n")


def packaged_table(name: str) -> Path:
    """Path to one of the CSV tables shipped with the package."""
    candidate = resources.files("squidflux").joinpath("data", name)
    with resources.as_file(candidate) as concrete:
        return Path(concrete)
