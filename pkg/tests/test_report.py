import json
import math
import unittest
from parameterized import parameterized
from prodspace.report import CSV_HEADER, VerificationReport, reports_to_csv


def _report(value=0.5, bound=1.0, op="<="):
    report = VerificationReport("demo", anchor="demo/anchor")
    report.set_params({"p": 2.0, "J": (3, 4)})
    report.set_measured_constant(2.0).set_refined_constant(2.1)
    report.set_measurement("ratio", value)
    report.add_criterion("ratio", value, bound, op)
    return report


class TestVerificationReport(unittest.TestCase):
    @parameterized.expand(
        [
            ["below", 0.5, 1.0, "<=", True],
            ["above", 1.5, 1.0, "<=", False],
            ["equal_strict", 1.0, 1.0, "<", False],
            ["lower_bound", 1.5, 1.0, ">=", True],
            ["nan", math.nan, 1.0, "<=", False],
        ]
    )
    def test_pass_is_derived(self, name, value, bound, op, expected):  # pylint: disable=unused-argument
        self.assertEqual(_report(value, bound, op).is_passed(), expected)

    def test_without_criteria(self):
        report = VerificationReport("bare")
        self.assertTrue(report.is_passed())
        report.set_measurement("x", math.inf)
        self.assertFalse(report.is_passed())

    def test_unknown_op(self):
        with self.assertRaises(ValueError):
            VerificationReport("bad").add_criterion("x", 1.0, 2.0, op="==")

    def test_informational_failure(self):
        report = _report(2.0)
        self.assertTrue(report.counts_as_failure())
        report.set_informational()
        self.assertFalse(report.is_passed())
        self.assertFalse(report.counts_as_failure())

    def test_to_dict(self):
        report = _report().set_runtime(3.5)
        data = report.to_dict()
        self.assertNotIn("runtime", data)
        self.assertNotIn("notes", data)
        self.assertEqual(data["params"]["J"], [3, 4])
        self.assertTrue(data["passed"])
        self.assertEqual(report.to_dict(with_runtime=True)["runtime"], 3.5)
        self.assertDictEqual(json.loads(report.get_value()), data)

    def test_non_finite_values_serialize(self):
        report = VerificationReport("inf").set_measured_constant(math.inf)
        self.assertEqual(report.to_dict()["measured_constant"], "inf")

    def test_csv(self):
        lines = reports_to_csv([_report(), _report(2.0)]).splitlines()
        self.assertEqual(lines[0], ",".join(CSV_HEADER))
        self.assertEqual(len(lines), 3)
        row = _report().to_csv_row()
        self.assertEqual(row[:2], ["demo", "demo/anchor"])
        self.assertEqual(row[3:7], ["2", "2.1", "1", "0"])
