import csv
import io
import json
import math
import operator
import typing as t

import typing_extensions as te

from .utils import format_float

TCriterion = te.TypedDict(
    "TCriterion",
    {
        "name": str,
        "value": float,
        "op": te.Literal["<=", ">=", "<", ">"],
        "bound": float,
    },
)

CSV_HEADER = [
    "check_name",
    "anchor",
    "params",
    "measured_constant",
    "refined_constant",
    "passed",
    "informational",
    "measurements",
]

_OPS: t.Dict[str, t.Callable[[float, float], bool]] = {
    "<=": operator.le,
    ">=": operator.ge,
    "<": operator.lt,
    ">": operator.gt,
}


def remove_nones(value: dict) -> dict:
    return {
        k: remove_nones(v) if isinstance(v, dict) else v
        for k, v in value.items()
        if v is not None
    }


def _jsonable(value: t.Any) -> t.Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float):
        if math.isinf(value) or math.isnan(value):
            return str(value)
        return float(format_float(value))
    if hasattr(value, "item"):
        return _jsonable(value.item())
    return value


class VerificationReport:
    """
    Outcome of one named numerical check.

    The pass flag is never set directly: it is derived from the recorded
    criteria (value, comparison, bound). A check without criteria passes iff
    every recorded measurement is finite.
    """

    _check_name: str
    _anchor: t.Optional[str] = None
    _params: t.Dict[str, t.Any]
    _measurements: t.Dict[str, float]
    _criteria: t.List[TCriterion]
    _measured_constant: t.Optional[float] = None
    _refined_constant: t.Optional[float] = None
    _informational: bool = False
    _notes: t.List[str]
    _runtime: t.Optional[float] = None

    def __init__(self, check_name: str, anchor: t.Optional[str] = None):
        self._check_name = check_name
        self._anchor = anchor
        self._params = {}
        self._measurements = {}
        self._criteria = []
        self._notes = []

    def get_check_name(self) -> str:
        return self._check_name

    def get_anchor(self) -> t.Optional[str]:
        return self._anchor

    def set_anchor(self, value: str) -> "VerificationReport":
        self._anchor = value
        return self

    def get_params(self) -> t.Dict[str, t.Any]:
        return self._params

    def set_params(self, value: t.Mapping[str, t.Any]) -> "VerificationReport":
        self._params = dict(value)
        return self

    def get_measurements(self) -> t.Dict[str, float]:
        return self._measurements

    def get_measurement(self, name: str) -> float:
        return self._measurements[name]

    def set_measurement(self, name: str, value: float) -> "VerificationReport":
        self._measurements[name] = float(value)
        return self

    def get_measured_constant(self) -> t.Optional[float]:
        return self._measured_constant

    def set_measured_constant(self, value: float) -> "VerificationReport":
        self._measured_constant = float(value)
        return self

    def get_refined_constant(self) -> t.Optional[float]:
        return self._refined_constant

    def set_refined_constant(self, value: float) -> "VerificationReport":
        self._refined_constant = float(value)
        return self

    def is_informational(self) -> bool:
        return self._informational

    def set_informational(self, value: bool = True) -> "VerificationReport":
        self._informational = value
        return self

    def get_notes(self) -> t.List[str]:
        return self._notes

    def add_note(self, note: str) -> "VerificationReport":
        self._notes.append(note)
        return self

    def get_runtime(self) -> t.Optional[float]:
        return self._runtime

    def set_runtime(self, value: float) -> "VerificationReport":
        self._runtime = value
        return self

    def get_criteria(self) -> t.List[TCriterion]:
        return self._criteria

    def add_criterion(
        self, name: str, value: float, bound: float, op: str = "<="
    ) -> "VerificationReport":
        if op not in _OPS:
            raise ValueError(f"Unknown comparison {op}")
        self._criteria.append(
            {"name": name, "value": float(value), "op": op, "bound": float(bound)}  # type: ignore
        )
        return self

    def is_passed(self) -> bool:
        values = list(self._measurements.values())
        for c in (self._measured_constant, self._refined_constant):
            if c is not None:
                values.append(c)
        if any(not math.isfinite(v) for v in values):
            return False
        for crit in self._criteria:
            if not math.isfinite(crit["value"]):
                return False
            if not _OPS[crit["op"]](crit["value"], crit["bound"]):
                return False
        return True

    def counts_as_failure(self) -> bool:
        return not self._informational and not self.is_passed()

    def to_dict(self, with_runtime: bool = False) -> t.Dict[str, t.Any]:
        data = {
            "check_name": self._check_name,
            "anchor": self._anchor,
            "params": self._params,
            "measured_constant": self._measured_constant,
            "refined_constant": self._refined_constant,
            "measurements": self._measurements,
            "criteria": self._criteria,
            "passed": self.is_passed(),
            "informational": self._informational,
            "notes": self._notes or None,
            "runtime": self._runtime if with_runtime else None,
        }
        return t.cast(t.Dict[str, t.Any], _jsonable(remove_nones(data)))

    def get_value(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv_row(self) -> t.List[str]:
        return [
            self._check_name,
            self._anchor or "",
            json.dumps(_jsonable(self._params), sort_keys=True),
            format_float(self._measured_constant),  # type: ignore
            format_float(self._refined_constant),  # type: ignore
            "1" if self.is_passed() else "0",
            "1" if self._informational else "0",
            json.dumps(_jsonable(self._measurements), sort_keys=True),
        ]


def reports_to_csv(reports: t.Iterable[VerificationReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for report in reports:
        writer.writerow(report.to_csv_row())
    return buf.getvalue()
