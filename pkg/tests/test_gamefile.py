"""Game-file parsing: the shipped examples and the failure modes."""

from fractions import Fraction

import pytest

from incentive_audit.game import ANTICIPATORY, NON_ANTICIPATORY
from incentive_audit.gamefile import GameFileError, load_game_file

from conftest import GAMES_DIR


class TestShippedFiles:
    def test_example1(self):
        spec = load_game_file(GAMES_DIR / "example1.game")
        assert spec.game.names == ("u1", "u2")
        assert spec.game.bounds == ((Fraction(-2), Fraction(2)),) * 2
        assert spec.scheme.kind == "custom"
        assert spec.scheme.mode == ANTICIPATORY
        assert len(spec.scheme.expressions) == 2

    def test_example2(self):
        spec = load_game_file(GAMES_DIR / "example2.game")
        assert spec.scheme.kind == "proportional"
        assert spec.scheme.mode == NON_ANTICIPATORY

    def test_example3_files(self):
        for name in ("example3_case1.game", "example3_case2.game"):
            spec = load_game_file(GAMES_DIR / name)
            assert spec.scheme.kind == "vcg"

    def test_decoupled_demo(self):
        spec = load_game_file(GAMES_DIR / "decoupled_demo.game")
        assert spec.scheme.kind == "proportional"


def _write(tmp_path, text):
    path = tmp_path / "game.game"
    path.write_text(text)
    return path


GOOD = """
[agents]
names = a, b

[costs]
a = "(a - 1)^2"
b = "(b + 1)^2 + a*b"

[operator]
J = "a^2 + b^2"
"""


class TestLoader:
    def test_minimal_file(self, tmp_path):
        spec = load_game_file(_write(tmp_path, GOOD))
        assert spec.scheme is None
        assert spec.game.bounds == ((Fraction(-10), Fraction(10)),) * 2

    def test_unquoted_expressions_accepted(self, tmp_path):
        text = GOOD.replace('"', "")
        spec = load_game_file(_write(tmp_path, text))
        assert spec.game.n == 2

    def test_missing_agents(self, tmp_path):
        with pytest.raises(GameFileError, match="agents"):
            load_game_file(_write(tmp_path, "[costs]\na = 1\n"))

    def test_missing_cost(self, tmp_path):
        bad = GOOD.replace('b = "(b + 1)^2 + a*b"\n', "")
        with pytest.raises(GameFileError, match="missing cost"):
            load_game_file(_write(tmp_path, bad))

    def test_unknown_variable_reports_line_and_column(self, tmp_path):
        bad = GOOD.replace('"(b + 1)^2 + a*b"', '"(b + 1)^2 + c"')
        with pytest.raises(GameFileError) as err:
            load_game_file(_write(tmp_path, bad))
        message = str(err.value)
        assert "line 7" in message and "column" in message

    def test_syntax_error_reports_position(self, tmp_path):
        bad = GOOD.replace('"a^2 + b^2"', '"a^2 + * b"')
        with pytest.raises(GameFileError) as err:
            load_game_file(_write(tmp_path, bad))
        assert "column" in str(err.value)

    def test_bad_interval(self, tmp_path):
        text = GOOD + "\n[bounds]\na = [2, -2]\n"
        with pytest.raises(GameFileError, match="empty interval"):
            load_game_file(_write(tmp_path, text))

    def test_interval_accepts_rationals(self, tmp_path):
        text = GOOD + "\n[bounds]\na = [-3/2, 3/2]\n"
        spec = load_game_file(_write(tmp_path, text))
        assert spec.game.bounds[0] == (Fraction(-3, 2), Fraction(3, 2))

    def test_unknown_incentive_kind(self, tmp_path):
        text = GOOD + "\n[incentive]\nkind = shapley\n"
        with pytest.raises(GameFileError, match="unknown kind"):
            load_game_file(_write(tmp_path, text))

    def test_custom_requires_all_expressions(self, tmp_path):
        text = GOOD + "\n[incentive]\nkind = custom\nt.a = \"a\"\n"
        with pytest.raises(GameFileError, match="t.<agent>"):
            load_game_file(_write(tmp_path, text))

    def test_custom_entries_rejected_for_builtin(self, tmp_path):
        text = GOOD + "\n[incentive]\nkind = vcg\nt.a = \"a\"\n"
        with pytest.raises(GameFileError, match="only apply"):
            load_game_file(_write(tmp_path, text))

    def test_solver_overrides(self, tmp_path):
        text = GOOD + "\n[solver]\ngrid_points_per_axis = 51\ntol_fixed_point = 1e-7\n"
        spec = load_game_file(_write(tmp_path, text))
        assert spec.solver.grid_points_per_axis == 51
        assert spec.solver.tol_fixed_point == 1e-7

    def test_unknown_solver_key(self, tmp_path):
        text = GOOD + "\n[solver]\nwarp_factor = 9\n"
        with pytest.raises(GameFileError, match="unknown solver option"):
            load_game_file(_write(tmp_path, text))

    def test_separable_base_parsed(self, tmp_path):
        text = GOOD + "\n[incentive]\nkind = proportional\nseparable_base = \"a + b\"\n"
        spec = load_game_file(_write(tmp_path, text))
        assert spec.declared_base is not None

    def test_missing_file(self, tmp_path):
        with pytest.raises(GameFileError):
            load_game_file(tmp_path / "missing.game")

    def test_duplicate_agent_names(self, tmp_path):
        bad = GOOD.replace("names = a, b", "names = a, a")
        with pytest.raises(GameFileError, match="duplicate"):
            load_game_file(_write(tmp_path, bad))

    def test_comments_stripped(self, tmp_path):
        text = GOOD.replace('J = "a^2 + b^2"', 'J = "a^2 + b^2"  # operator')
        spec = load_game_file(_write(tmp_path, text))
        assert spec.game.n == 2
