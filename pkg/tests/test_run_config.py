import math
import os
import tempfile
import unittest
from parameterized import parameterized
from prodspace.exception import RunConfigException
from prodspace.run_config import SUITE_NAMES, RunConfigDict, RunConfigJsonFile
from prodspace.run_config.abstract import parse_exponent

SMALL_MODELS = [
    {"name": "circle", "n_modes": 8},
    {"name": "jacobi", "n_modes": 8, "alpha": 0.5, "beta": -0.5},
]


class TestRunConfigDict(unittest.TestCase):
    def test_defaults(self):
        config = RunConfigDict({})
        self.assertEqual(config.get_seed(), 0)
        self.assertEqual(config.get_threads(), 1)
        self.assertEqual(config.get_output_dir(), "prodspace-out")
        self.assertEqual(config.get_tolerance("stability"), 0.1)
        self.assertTrue(all(config.is_suite_enabled(name) for name in SUITE_NAMES))
        self.assertEqual(len(config.get_spaces()), 6)
        self.assertEqual(config.get_cutoffs().get_kind(), "partition")
        self.assertEqual(config.get_cutoffs("secondary").get_name(), "orthogonal")
        self.assertIsNone(config.get_maximal_gamma())

    def test_models(self):
        config = RunConfigDict({"models": SMALL_MODELS})
        ps = config.get_product_space()
        self.assertEqual(ps.get_coef_shape(), (15, 8))
        self.assertEqual(ps.get_shape(), (32, 16))

    def test_partial_sections_merge(self):
        config = RunConfigDict({"suites": {"hardy": False}, "tolerances": {"stability": 0.2}})
        self.assertFalse(config.is_suite_enabled("hardy"))
        self.assertTrue(config.is_suite_enabled("lp"))
        self.assertEqual(config.get_tolerance("stability"), 0.2)
        self.assertEqual(config.get_tolerance("markov"), 1e-10)

    def test_spaces(self):
        config = RunConfigDict({"spaces": [{"family": "F", "s": [1, 0.5], "p": 1.5, "q": "inf"}]})
        (params,) = config.get_spaces()
        self.assertEqual(params.get_family(), "F")
        self.assertEqual(params.get_s(), (1.0, 0.5))
        self.assertTrue(math.isinf(params.get_q()))

    def test_maximal(self):
        config = RunConfigDict({"maximal": {"t_exponents": [-7, 3], "gamma": [3, 3]}})
        params = config.get_maximal_params()
        self.assertEqual(params.to_dict()["t_exponents"], [-7, 3])
        self.assertEqual(params.get_gamma(), (3.0, 3.0))

    @parameterized.expand(
        [
            ["not_a_dict", []],
            ["unknown_key", {"colour": "red"}],
            ["unknown_suite", {"suites": {"wavelets": True}}],
            ["unknown_tolerance", {"tolerances": {"speed": 1.0}}],
            ["zero_tolerance", {"tolerances": {"stability": 0.0}}],
            ["bool_tolerance", {"tolerances": {"stability": True}}],
            ["one_model", {"models": SMALL_MODELS[:1]}],
            ["unknown_model", {"models": [{"name": "sphere", "n_modes": 4}, SMALL_MODELS[1]]}],
            ["missing_n_modes", {"models": [{"name": "circle"}, SMALL_MODELS[1]]}],
            ["circle_alpha", {"models": [{"name": "circle", "n_modes": 4, "alpha": 1.0}, SMALL_MODELS[1]]}],
            ["unknown_cutoffs", {"cutoffs": {"primary": "wavelet"}}],
            ["bad_space", {"spaces": [{"family": "F", "p": "inf"}]}],
            ["bad_exponent", {"spaces": [{"p": "large"}]}],
            ["bad_t_exponents", {"maximal": {"t_exponents": [-9]}}],
            ["negative_seed", {"seed": -1}],
            ["zero_threads", {"threads": 0}],
            ["empty_output_dir", {"output_dir": ""}],
        ]
    )
    def test_invalid(self, name, data):  # pylint: disable=unused-argument
        with self.assertRaises(RunConfigException):
            RunConfigDict(data)

    def test_model_errors_surface_as_config_errors(self):
        config = RunConfigDict({"models": [{"name": "circle", "n_modes": 8, "n_nodes": 10}, SMALL_MODELS[1]]})
        with self.assertRaises(RunConfigException):
            config.get_product_space()

    def test_short_t_span(self):
        config = RunConfigDict({"maximal": {"t_exponents": [-3, 2]}})
        with self.assertRaises(RunConfigException):
            config.get_maximal_params()

    def test_with_overrides(self):
        config = RunConfigDict({"seed": 3}).with_overrides(seed=None, threads=4, output_dir="elsewhere")
        self.assertEqual(config.get_seed(), 3)
        self.assertEqual(config.get_threads(), 4)
        self.assertEqual(config.get_output_dir(), "elsewhere")

    def test_parse_exponent(self):
        self.assertEqual(parse_exponent(3), 3.0)
        self.assertTrue(math.isinf(parse_exponent(" Infinity ")))


class TestRunConfigJsonFile(unittest.TestCase):
    def _write(self, tmp, text):
        path = os.path.join(tmp, "run.json")
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        return path

    def test_load(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = RunConfigJsonFile(self._write(tmp, '{"seed": 7, "suites": {"hardy": false}}'))
            self.assertEqual(config.get_seed(), 7)
            self.assertFalse(config.is_suite_enabled("hardy"))
            self.assertTrue(config.get_config_file().endswith("run.json"))

    def test_parse_error_has_position(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = self._write(tmp, '{\n  "seed": 1,\n}')
            with self.assertRaises(RunConfigException) as ctx:
                RunConfigJsonFile(path)
            self.assertIn("line 3", str(ctx.exception))

    def test_missing_file(self):
        with self.assertRaises(RunConfigException):
            RunConfigJsonFile("/nonexistent/run.json")
