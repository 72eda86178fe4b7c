import os
import unittest
from pathlib import Path
from unittest.mock import MagicMock, patch

from oneshot_ent.config import (
    CONFIG_ENV,
    ConfigError,
    _parse_config_key,
    get_config_value,
    load_run_config,
    resolve_config_path,
)
from tests.base import TempDirTestCase

SAMPLE_CONFIG = """\
[solver]
\tgap-tol = 1e-7
\tmax-iterations = 80
\taccept-reduced = true
[seesaw]
\trestarts = 4
\tseed = 99
[run]
\tworkers = 4
\tcache = false
\tout-dir = env(ONESHOT_TEST_OUT)
[battery]
\tstates = mes-2, iso-0.5
\teps = 0.0, 0.05
"""


class TestParseConfigKey(unittest.TestCase):
    def test_parse_simple_key(self) -> None:
        self.assertEqual(_parse_config_key("solver.gap-tol"), ("solver", "gap-tol"))

    def test_parse_invalid_key(self) -> None:
        with self.assertRaises(ValueError) as context:
            _parse_config_key("invalidkey")

        self.assertIn("Invalid config key", str(context.exception))


class TestResolveConfigPath(unittest.TestCase):
    def test_explicit_path_wins(self) -> None:
        with patch.dict(os.environ, {CONFIG_ENV: "/from/env"}):
            self.assertEqual(resolve_config_path("run.cfg"), Path("run.cfg"))

    def test_environment_variable(self) -> None:
        with patch.dict(os.environ, {CONFIG_ENV: "/from/env"}):
            self.assertEqual(resolve_config_path(), Path("/from/env"))

    def test_no_config(self) -> None:
        with patch.dict(os.environ, {}, clear=True):
            self.assertIsNone(resolve_config_path())


class TestGetConfigValue(TempDirTestCase):
    def setUp(self) -> None:
        super().setUp()
        self.path = self.temp_path / "run.cfg"
        self.path.write_text("")

    @patch("oneshot_ent.config.GitConfigParser")
    def test_get_simple_value(self, mock_parser_class) -> None:
        mock_parser = MagicMock()
        mock_parser.get_value.return_value = "test-value"
        mock_parser_class.return_value = mock_parser

        result = get_config_value("run.out-dir", path=self.path)

        self.assertEqual(result, "test-value")
        mock_parser.get_value.assert_called_once_with("run", "out-dir", default="")

    @patch("oneshot_ent.config.GitConfigParser")
    def test_get_env_variable(self, mock_parser_class) -> None:
        mock_parser = MagicMock()
        mock_parser.get_value.return_value = "env(TEST_VAR)"
        mock_parser_class.return_value = mock_parser

        with patch.dict(os.environ, {"TEST_VAR": "env-value"}):
            result = get_config_value("run.out-dir", path=self.path)

        self.assertEqual(result, "env-value")

    @patch("oneshot_ent.config.GitConfigParser")
    def test_get_env_variable_not_set(self, mock_parser_class) -> None:
        mock_parser = MagicMock()
        mock_parser.get_value.return_value = "env(MISSING_VAR)"
        mock_parser_class.return_value = mock_parser

        with patch.dict(os.environ, {}, clear=True):
            result = get_config_value("run.out-dir", default="results", path=self.path)

        self.assertEqual(result, "results")

    @patch("oneshot_ent.config.GitConfigParser")
    def test_get_with_exception_returns_default(self, mock_parser_class) -> None:
        mock_parser_class.side_effect = Exception("Config error")

        result = get_config_value("run.workers", default="2", path=self.path)

        self.assertEqual(result, "2")

    @patch("oneshot_ent.config.GitConfigParser")
    def test_get_non_string_value(self, mock_parser_class) -> None:
        mock_parser = MagicMock()
        mock_parser.get_value.return_value = 123
        mock_parser_class.return_value = mock_parser

        self.assertEqual(get_config_value("run.workers", path=self.path), "123")

    def test_missing_file_returns_default(self) -> None:
        missing = self.temp_path / "absent.cfg"
        self.assertEqual(get_config_value("run.workers", "2", missing), "2")


class TestLoadRunConfig(TempDirTestCase):
    def _write(self, text: str) -> Path:
        path = self.temp_path / "run.cfg"
        path.write_text(text)
        return path

    def test_defaults_without_file(self) -> None:
        with patch.dict(os.environ, {}, clear=True):
            config = load_run_config()
        self.assertEqual(config.workers, 2)
        self.assertEqual(config.eps_grid, (0.0, 0.01, 0.1))
        self.assertEqual(config.battery, ("default",))
        self.assertIsNone(config.numerics.dump_dir)
        self.assertFalse(config.numerics.accept_reduced)

    def test_reads_file(self) -> None:
        path = self._write(SAMPLE_CONFIG)
        with patch.dict(os.environ, {"ONESHOT_TEST_OUT": "/tmp/out"}):
            config = load_run_config(path)

        self.assertEqual(config.numerics.gap_tol, 1e-7)
        self.assertEqual(config.numerics.max_iterations, 80)
        self.assertTrue(config.numerics.accept_reduced)
        self.assertEqual(config.numerics.seesaw_restarts, 4)
        self.assertEqual(config.numerics.seed, 99)
        self.assertEqual(config.workers, 4)
        self.assertFalse(config.cache)
        self.assertEqual(config.out_dir, Path("/tmp/out"))
        self.assertEqual(config.battery, ("mes-2", "iso-0.5"))
        self.assertEqual(config.eps_grid, (0.0, 0.05))

    def test_arguments_override_file(self) -> None:
        path = self._write(SAMPLE_CONFIG)
        config = load_run_config(path, seed=7, out_dir="elsewhere", dump_dir="dump")
        self.assertEqual(config.numerics.seed, 7)
        self.assertEqual(config.out_dir, Path("elsewhere"))
        self.assertEqual(config.numerics.dump_dir, Path("dump"))

    def test_path_from_environment(self) -> None:
        path = self._write("[run]\n\tworkers = 3\n")
        with patch.dict(os.environ, {CONFIG_ENV: str(path)}):
            self.assertEqual(load_run_config().workers, 3)

    def test_missing_file(self) -> None:
        with self.assertRaises(ConfigError) as context:
            load_run_config(self.temp_path / "absent.cfg")
        self.assertIn("not found", str(context.exception))

    def test_invalid_number(self) -> None:
        path = self._write("[solver]\n\tgap-tol = tight\n")
        with self.assertRaises(ConfigError) as context:
            load_run_config(path)
        self.assertIn("solver.gap-tol", str(context.exception))

    def test_smoothing_out_of_range(self) -> None:
        path = self._write("[battery]\n\teps = 0.0, 1.0\n")
        with self.assertRaises(ConfigError):
            load_run_config(path)

    def test_non_positive_delta(self) -> None:
        path = self._write("[battery]\n\tdelta = 1.0, 0.0\n")
        with self.assertRaises(ConfigError):
            load_run_config(path)

    def test_config_error_is_a_value_error(self) -> None:
        self.assertTrue(issubclass(ConfigError, ValueError))
