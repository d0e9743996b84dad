"""Declarative game files: INI-style sections describing a scenario.

Format (expressions may be double-quoted; `#` starts a comment):

    [agents]
    names = u1, u2

    [costs]
    u1 = "u1^2 - 2*u1*u2"
    u2 = "u1*u2 - u2"

    [operator]
    J = "(u1 - 3/4)^2 + (u2 - 2)^2"

    [bounds]            # optional, defaults to [-10, 10]
    u1 = [-2, 2]

    [incentive]         # optional: no section means no incentive
    kind = custom       # proportional | vcg | custom
    mode = anticipatory # anticipatory | non-anticipatory
    t.u1 = "u1^2"       # custom only, one per agent
    t.u2 = "-1/2"
    separable_base = "u1 + u2"   # optional declared base for the
                                 # absolute-deviation condition

    [solver]            # optional SolverConfig overrides
    grid_points_per_axis = 201
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .expr import Expression, ParseError, parse
from .expr.polynomial import as_polynomial
from .game import ANTICIPATORY, NON_ANTICIPATORY, Game, Participation, Scenario
from .incentive import CUSTOM, PROPORTIONAL, VCG, IncentiveScheme
from .solve import SolverConfig

_IDENT_RE = re.compile(r"^[A-Za-z_]\w*$")
_SOLVER_FIELDS = {
    "grid_points_per_axis": int,
    "br_max_iters": int,
    "tol_fixed_point": float,
    "tol_stationarity": float,
    "multistart_count": int,
    "rng_seed": int,
}


class GameFileError(ValueError):
    """A problem with a game file; message carries file/section/key context."""


@dataclass(frozen=True)
class GameSpec:
    game: Game
    scheme: Optional[IncentiveScheme]
    declared_base: Optional[Expression]
    solver: SolverConfig
    path: str

    def scenario(self, opted_out: tuple[int, ...] = ()) -> Scenario:
        return Scenario(self.game, self.scheme, Participation(opted_out))


def _unquote(value: str) -> str:
    value = value.strip()
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        return value[1:-1]
    return value


def _line_of(text: str, section: str, key: str) -> Optional[int]:
    in_section = False
    key_re = re.compile(rf"^\s*{re.escape(key)}\s*=")
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if stripped.startswith("["):
            in_section = stripped == f"[{section}]"
        elif in_section and key_re.match(line):
            return lineno
    return None


class _Loader:
    def __init__(self, path: str | Path):
        self.path = str(path)
        try:
            self.text = Path(path).read_text()
        except OSError as exc:
            raise GameFileError(f"{path}: {exc}") from exc
        self.cp = configparser.ConfigParser(
            interpolation=None, inline_comment_prefixes=("#",))
        self.cp.optionxform = str
        try:
            self.cp.read_string(self.text, source=self.path)
        except configparser.Error as exc:
            raise GameFileError(f"{self.path}: {exc}") from exc

    def fail(self, section: str, key: Optional[str], message: str,
             column: Optional[int] = None) -> GameFileError:
        where = f"{self.path}: [{section}]"
        if key is not None:
            where += f" {key}"
            line = _line_of(self.text, section, key)
            if line is not None:
                where += f" (line {line}"
                where += f", column {column})" if column is not None else ")"
        return GameFileError(f"{where}: {message}")

    def expression(self, section: str, key: str, names: list[str]) -> Expression:
        raw = _unquote(self.cp.get(section, key))
        try:
            return parse(raw, names)
        except ParseError as exc:
            message = re.sub(r" \(at column \d+\)$", "", str(exc))
            raise self.fail(section, key, message, exc.position + 1) from exc

    def load(self) -> GameSpec:
        cp = self.cp
        if not cp.has_section("agents") or not cp.has_option("agents", "names"):
            raise self.fail("agents", None, "missing [agents] names = ...")
        names = [n.strip() for n in cp.get("agents", "names").split(",")]
        if len(names) < 2:
            raise self.fail("agents", "names", "at least two agents required")
        for n in names:
            if not _IDENT_RE.match(n):
                raise self.fail("agents", "names", f"invalid agent name {n!r}")
        if len(set(names)) != len(names):
            raise self.fail("agents", "names", "duplicate agent names")

        if not cp.has_section("costs"):
            raise self.fail("costs", None, "missing [costs] section")
        costs = []
        for n in names:
            if not cp.has_option("costs", n):
                raise self.fail("costs", n, "missing cost expression")
            costs.append(self.expression("costs", n, names))
        for key in cp.options("costs"):
            if key not in names:
                raise self.fail("costs", key, "not a declared agent")

        if not cp.has_section("operator") or not cp.has_option("operator", "J"):
            raise self.fail("operator", None, "missing [operator] J = ...")
        operator = self.expression("operator", "J", names)

        bounds = [None] * len(names)
        if cp.has_section("bounds"):
            for key in cp.options("bounds"):
                if key not in names:
                    raise self.fail("bounds", key, "not a declared agent")
                bounds[names.index(key)] = self._interval("bounds", key)
        bounds = tuple(b if b is not None else (Fraction(-10), Fraction(10))
                       for b in bounds)

        game = Game(n=len(names), agent_costs=tuple(costs),
                    operator_cost=operator, bounds=bounds, names=tuple(names))

        scheme, declared_base = self._incentive(names)
        solver = self._solver()
        return GameSpec(game=game, scheme=scheme, declared_base=declared_base,
                        solver=solver, path=self.path)

    def _interval(self, section: str, key: str) -> tuple[Fraction, Fraction]:
        raw = _unquote(self.cp.get(section, key)).strip()
        if not (raw.startswith("[") and raw.endswith("]")):
            raise self.fail(section, key, "expected an interval like [-2, 2]")
        parts = raw[1:-1].split(",")
        if len(parts) != 2:
            raise self.fail(section, key, "expected two comma-separated bounds")
        values = []
        for part in parts:
            values.append(self._number(section, key, part.strip()))
        lo, hi = values
        if not lo < hi:
            raise self.fail(section, key, f"empty interval [{lo}, {hi}]")
        return lo, hi

    def _number(self, section: str, key: str, text: str) -> Fraction:
        try:
            e = parse(text, [])
        except ParseError as exc:
            raise self.fail(section, key, f"bad number {text!r}: {exc}") from exc
        p = as_polynomial(e)
        if p is None or not p.is_constant():
            raise self.fail(section, key, f"bad number {text!r}")
        return p.constant_value()

    def _incentive(self, names: list[str]
                   ) -> tuple[Optional[IncentiveScheme], Optional[Expression]]:
        cp = self.cp
        if not cp.has_section("incentive"):
            return None, None
        if not cp.has_option("incentive", "kind"):
            raise self.fail("incentive", None, "missing kind = ...")
        kind = _unquote(cp.get("incentive", "kind")).lower()
        if kind not in (PROPORTIONAL, VCG, CUSTOM):
            raise self.fail("incentive", "kind",
                            f"unknown kind {kind!r} (expected proportional, "
                            "vcg, or custom)")
        mode = ANTICIPATORY
        if cp.has_option("incentive", "mode"):
            mode = _unquote(cp.get("incentive", "mode")).lower()
            if mode not in (ANTICIPATORY, NON_ANTICIPATORY):
                raise self.fail("incentive", "mode",
                                f"unknown mode {mode!r}")
        expressions = None
        if kind == CUSTOM:
            exprs = []
            for n in names:
                key = f"t.{n}"
                if not cp.has_option("incentive", key):
                    raise self.fail("incentive", key,
                                    "custom scheme needs one t.<agent> per agent")
                exprs.append(self.expression("incentive", key, names))
            expressions = tuple(exprs)
        else:
            for key in cp.options("incentive"):
                if key.startswith("t."):
                    raise self.fail("incentive", key,
                                    f"t.<agent> entries only apply to "
                                    f"kind = custom, not {kind}")
        declared_base = None
        if cp.has_option("incentive", "separable_base"):
            declared_base = self.expression("incentive", "separable_base", names)
        scheme = IncentiveScheme(kind, mode, expressions)
        return scheme, declared_base

    def _solver(self) -> SolverConfig:
        cfg = SolverConfig()
        if not self.cp.has_section("solver"):
            return cfg
        overrides = {}
        for key in self.cp.options("solver"):
            if key not in _SOLVER_FIELDS:
                raise self.fail("solver", key, "unknown solver option")
            raw = _unquote(self.cp.get("solver", key))
            try:
                overrides[key] = _SOLVER_FIELDS[key](raw)
            except ValueError as exc:
                raise self.fail("solver", key, f"bad value {raw!r}") from exc
        try:
            return cfg.replace(**overrides)
        except ValueError as exc:
            raise self.fail("solver", None, str(exc)) from exc


def load_game_file(path: str | Path) -> GameSpec:
    """Parse and validate a game file."""
    return _Loader(path).load()
