# tests/test_cli.py
import pytest
import os
import json

import sys
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from cli.runner import EXIT_FAILED, EXIT_OK, EXIT_USAGE, build_parser, run
from utils.file_handler import FileHandler

GAUSSIAN = '{"hbar": 1, "fields": [{"y": 0, "b": 1}]}'


def _output(capsys):
    return json.loads(capsys.readouterr().out)


class TestParser:
    def test_subcommands(self):
        """Test that every command parses its own options"""
        parser = build_parser()
        args = parser.parse_args(['moments', '--valencies', '4,2', '--grading', '2,1'])
        assert args.valencies == [4, 2]
        assert args.grading == [2, 1]
        args = parser.parse_args(['duality', '--inline', GAUSSIAN, '--g-max', '2', '--no-oracle'])
        assert args.g_max == 2
        assert args.no_oracle

    def test_unknown_command(self, capsys):
        assert run(['frobnicate']) == EXIT_USAGE
        captured = capsys.readouterr()
        assert 'usage' in captured.err
        assert json.loads(captured.out)['error'] == 'SpecFormatError'

    @pytest.mark.parametrize("argv", [
        [],
        ['moments'],
        ['moments', '--valencies', 'a,b'],
        ['moments', '--valencies', '2', '--grading', '1'],
        ['moments', '--valencies', '2', '--hbar', 'half'],
        ['curve'],
        ['curve', '--inline', GAUSSIAN, '--spec', 'x.json'],
    ])
    def test_usage_errors(self, argv, capsys):
        assert run(argv) == EXIT_USAGE

    def test_help(self, capsys):
        assert run(['--help']) == EXIT_OK


class TestMoments:
    def test_polynomial(self, capsys):
        """Test the moment polynomial of str N²"""
        assert run(['moments', '--valencies', '2']) == EXIT_OK
        data = _output(capsys)
        assert data['command'] == 'moments'
        assert len(data['moment_polynomial']['terms']) == 2

    def test_three_way_check(self, capsys):
        """Test specialization against the index sum and the oracle"""
        argv = ['moments', '--valencies', '2,1', '--grading', '1,1', '--y', '2,1/2', '--hbar', '1/3', '--check']
        assert run(argv) == EXIT_OK
        data = _output(capsys)
        assert data['specialized'] == data['indexsum'] == data['oracle']
        assert data['checks']['all_passed']

    def test_gaussian_value(self, capsys):
        argv = ['moments', '--valencies', '2', '--grading', '1,0', '--y', '2', '--hbar', '1']
        assert run(argv) == EXIT_OK
        assert _output(capsys)['specialized'] == '5/1'

    def test_wrong_field_length(self, capsys):
        argv = ['moments', '--valencies', '2', '--grading', '1,1', '--y', '2']
        assert run(argv) == EXIT_USAGE

    def test_cap(self, capsys):
        assert run(['moments', '--valencies', '9,9']) == EXIT_USAGE
        assert _output(capsys)['error'] == 'CapExceededError'


class TestOracle:
    def test_duality(self, capsys):
        argv = ['oracle', '--kind', 'duality', '--grading', '1,0', '--sources', '1,0', '--seed', '3']
        assert run(argv) == EXIT_OK
        data = _output(capsys)
        assert data['reflected_matches']
        assert data['checks']['checks']['oracle_duality']['passed']

    def test_partition(self, capsys):
        argv = ['oracle', '--kind', 'partition', '--grading', '2,0', '--sources', '1,0',
                '--x', '3', '--y', '1,0']
        assert run(argv) == EXIT_OK
        assert _output(capsys)['partition']['value'] == '5/1'

    def test_exp_source(self, capsys):
        argv = ['oracle', '--kind', 'exp-source', '--grading', '1,1', '--order', '3']
        assert run(argv) == EXIT_OK
        assert _output(capsys)['holds']

    def test_moment_needs_valencies(self, capsys):
        assert run(['oracle', '--kind', 'moment', '--grading', '1,0']) == EXIT_USAGE


class TestCurveCommands:
    def test_curve(self, capsys):
        """Test the Gaussian curve and all of its checks"""
        assert run(['curve', '--inline', GAUSSIAN]) == EXIT_OK
        data = _output(capsys)
        assert len(data['curve']['branch_points']) == 2
        assert data['checks']['all_passed']
        assert 'planar_moments' in data

    @pytest.mark.parametrize("inline", ['{"hbar": 1', '{"hbar": 1}', '{"hbar": "one", "fields": []}'])
    def test_malformed_spec(self, inline, capsys):
        assert run(['curve', '--inline', inline]) == EXIT_USAGE
        assert _output(capsys)['error'] == 'SpecFormatError'

    def test_missing_spec_file(self, tmp_path, capsys):
        assert run(['curve', '--spec', str(tmp_path / 'missing.json')]) == EXIT_USAGE

    def test_spec_file(self, tmp_path, capsys):
        path = tmp_path / 'gaussian.json'
        path.write_text(GAUSSIAN)
        assert run(['invariants', '--spec', str(path), '--g-max', '2']) == EXIT_OK
        data = _output(capsys)
        assert [row['g'] for row in data['free_energies']] == [0, 1, 2]
        assert data['free_energies'][0]['F'][0] == pytest.approx(-0.75, abs=1e-12)
        assert data['free_energies'][2]['F'][0] == pytest.approx(-1 / 240, abs=1e-10)

    def test_g_max_cap(self, capsys):
        assert run(['invariants', '--inline', GAUSSIAN, '--g-max', '7']) == EXIT_USAGE

    def test_duality(self, capsys):
        assert run(['duality', '--inline', GAUSSIAN, '--g-max', '2']) == EXIT_OK
        data = _output(capsys)
        assert data['holds']
        assert data['rows'][0]['passed']

    def test_failed_check_exit_code(self, capsys):
        """Test that a tolerance nothing can meet fails the run"""
        argv = ['duality', '--inline', GAUSSIAN, '--g-max', '2', '--tol', '-1', '--no-oracle']
        assert run(argv) == EXIT_FAILED


class TestOutput:
    def test_out_file(self, tmp_path, capsys):
        target = tmp_path / 'nested' / 'moments.json'
        assert run(['moments', '--valencies', '3', '--out', str(target)]) == EXIT_OK
        assert capsys.readouterr().out == ''
        data = json.loads(target.read_text())
        assert data['command'] == 'moments'

    def test_byte_stable(self, capsys):
        """Test that re-dumping parsed output reproduces the same text"""
        assert run(['curve', '--inline', GAUSSIAN]) == EXIT_OK
        text = capsys.readouterr().out
        files = FileHandler({'json_indent': 2})
        assert files.dumps(files.loads(text)) + "\n" == text

    def test_config_overrides(self, tmp_path, capsys):
        config = tmp_path / 'config.json'
        config.write_text('{"enumeration_cap": 2}')
        assert run(['moments', '--valencies', '4', '--config', str(config)]) == EXIT_USAGE
        bad = tmp_path / 'bad.json'
        bad.write_text('[1, 2')
        assert run(['moments', '--valencies', '2', '--config', str(bad)]) == EXIT_USAGE


if __name__ == "__main__":
    pytest.main([__file__])
