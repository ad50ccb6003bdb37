"""Bundled morphometric corpus and the regression report against it."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .core_types import (
    IngestionError,
    InvalidParameterError,
    Limb,
    LimbParams,
    MotorModel,
    Stroke,
    TailParams,
    TaskSpec,
    WheelParams,
    convert_units,
)
from .reductions import reduce_limbs, reduce_tail, reduce_wheel
from .simulator import anchoring_errors_batch

GRAVITY = 9.81
KINDS = ("tail", "wheel", "limbs")
REQUIRED_FIELDS = {
    "tail": ("m_b", "m_t", "l_b", "l_t", "I_b", "I_t", "peak_power", "stroke", "no_load_speed"),
    "wheel": ("m_b", "m_w", "l_b", "I_b", "I_w", "peak_power", "no_load_speed"),
    "limbs": ("m_b", "m_t", "pivot_offsets", "phases", "l_t", "I_b", "I_t", "peak_power", "stroke", "no_load_speed"),
}
# anchoring errors are pinned tightly for the reference robot and bounded for the rest
REFERENCE_ROBOT = "rhex-tail"
ANCHOR_TOL = 0.005
ANCHOR_BOUND = 0.055


@dataclass(frozen=True)
class CorpusRecord:
    name: str
    kind: str
    label: str
    raw: dict
    si: dict
    expected: dict
    expected_text: dict

    @property
    def stroke(self) -> Stroke:
        entry = self.raw["fields"].get("stroke", {})
        if "stroke" not in self.si or entry.get("recirculating", False):
            return Stroke.unbounded()
        return Stroke.bounded(self.si["stroke"])

    def default_task(self) -> TaskSpec:
        """A 90 degree turn within the time to fall one body length."""
        return TaskSpec(math.pi / 2, math.sqrt(2.0 * self.si["body_length"] / GRAVITY))

    def motor(self, beta: float = 1.0) -> MotorModel:
        return MotorModel(self.si["peak_power"], self.si["no_load_speed"], beta)

    def params(self, task: TaskSpec | None = None, beta: float = 1.0):
        """Anchor parameters for this record."""
        task = task or self.default_task()
        s, motor = self.si, self.motor(beta)
        if self.kind == "tail":
            return TailParams(s["m_b"], s["m_t"], s["I_b"], s["I_t"], s["l_b"], s["l_t"], self.stroke, motor, task)
        if self.kind == "wheel":
            return WheelParams(s["m_b"], s["m_w"], s["I_b"], s["I_w"], s["l_b"], motor, task, self.stroke)
        limbs = tuple(Limb(x, int(ph)) for x, ph in zip(s["pivot_offsets"], s["phases"]))
        return LimbParams(s["m_b"], s["I_b"], limbs, s["m_t"], s["I_t"], s["l_t"], self.stroke, motor, task)

    def reduce(self, task: TaskSpec | None = None):
        """Reduced template and, for tails, the dimensionless pair."""
        p = self.params(task)
        if self.kind == "tail":
            return reduce_tail(p)
        if self.kind == "wheel":
            return reduce_wheel(p), None
        return reduce_limbs(p), None


def parse_record(raw: dict) -> CorpusRecord:
    for key in ("name", "kind", "fields"):
        if key not in raw:
            raise IngestionError(f"record is missing {key!r}")
    kind = raw["kind"]
    if kind not in KINDS:
        raise IngestionError(f"record {raw['name']!r}: unknown kind {kind!r}")
    missing = [k for k in REQUIRED_FIELDS[kind] if k not in raw["fields"]]
    if missing:
        raise IngestionError(f"record {raw['name']!r}: missing fields {', '.join(missing)}")
    try:
        si = convert_units(raw["fields"])
        expected = convert_units(raw.get("expected", {}))
    except (TypeError, ValueError) as exc:
        raise IngestionError(f"record {raw['name']!r}: {exc}") from exc
    text = {k: str(v["value"]) for k, v in raw.get("expected", {}).items()}
    return CorpusRecord(raw["name"], kind, raw.get("label", raw["name"]), raw, si, expected, text)


def load_records(source: dict | str | Path | None = None) -> dict[str, CorpusRecord]:
    """Records keyed by name, from the bundled corpus or a JSON file or document."""
    if source is None:
        doc = json.loads(resources.files("irappendage").joinpath("data/corpus.json").read_text())
    elif isinstance(source, dict):
        doc = source
    else:
        try:
            doc = json.loads(Path(source).read_text())
        except json.JSONDecodeError as exc:
            raise IngestionError(f"{source}: malformed JSON ({exc})") from exc
    records = doc.get("records", [doc]) if isinstance(doc, dict) else doc
    out = {}
    for raw in records:
        rec = parse_record(raw)
        out[rec.name] = rec
    return out


def significant_digits(text: str) -> int:
    mantissa = text.strip().lstrip("+-").lower().split("e")[0].replace(".", "")
    return max(1, len(mantissa.lstrip("0")))


def round_sig(x: float, n: int) -> float:
    return float(f"{x:.{n}g}")


@dataclass(frozen=True)
class RegressionRow:
    robot: str
    column: str
    computed: float
    expected: float | None
    criterion: str
    passed: bool


def _sig_row(rec: CorpusRecord, column: str, computed: float, figures: int) -> RegressionRow:
    text = rec.expected_text[column]
    n = min(figures, significant_digits(text))
    expected = rec.expected[column]
    ok = math.isclose(round_sig(computed, n), round_sig(expected, n), rel_tol=1e-12)
    return RegressionRow(rec.name, column, computed, expected, f"{n} significant figures", ok)


def regress(records: dict[str, CorpusRecord] | None = None, anchoring: bool = True) -> list[RegressionRow]:
    """Compare computed reductions and anchoring errors with the tabulated columns.

    Significant-figure checks use the requested precision or the precision of
    the printed value, whichever is coarser.
    """
    records = records if records is not None else load_records()
    rows: list[RegressionRow] = []
    tails = []
    for rec in records.values():
        reduced, dims = rec.reduce()
        if rec.kind == "tail":
            tails.append((rec, dims))
            checks = (("xi_t", dims.xi_t, 4), ("eta", dims.eta, 4), ("driven_inertia", reduced.driven_inertia, 3))
        else:
            checks = (("effectiveness", reduced.effectiveness, 2), ("driven_inertia", reduced.driven_inertia, 2))
        for column, value, figures in checks:
            if column in rec.expected:
                rows.append(_sig_row(rec, column, value, figures))
    if anchoring and tails:
        e_b, e_t = anchoring_errors_batch([d.xi_t for _, d in tails], [d.eta for _, d in tails])
        for (rec, _), eb, et in zip(tails, e_b, e_t):
            for column, value in (("e_b", float(eb)), ("e_t", float(et))):
                if rec.name == REFERENCE_ROBOT and column in rec.expected:
                    ok = abs(value - rec.expected[column]) <= ANCHOR_TOL
                    rows.append(RegressionRow(rec.name, column, value, rec.expected[column],
                                              f"within {ANCHOR_TOL:g}", ok))
                else:
                    rows.append(RegressionRow(rec.name, column, value, rec.expected.get(column),
                                              f"|value| < {ANCHOR_BOUND:g}", abs(value) < ANCHOR_BOUND))
    return rows


def find_record(name: str, records: dict[str, CorpusRecord] | None = None) -> CorpusRecord:
    records = records if records is not None else load_records()
    try:
        return records[name]
    except KeyError:
        raise InvalidParameterError(
            f"unknown robot {name!r}; known: {', '.join(sorted(records))}"
        ) from None

