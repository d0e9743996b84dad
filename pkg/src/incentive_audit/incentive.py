"""Incentive schemes: marginal/excess costs, the proportional allocation
rule, the VCG-like rule, custom schemes, and opt-out counterfactuals.

The proportional rule splits the operator's excess cost across agents in
proportion to their marginal contributions.  The VCG-like rule charges
each agent the operator-side cost it does not already internalize, offset
by the value of that quantity at the agent's own opt-out equilibrium, so
every participant's effective objective becomes the operator objective up
to a constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .expr import Expression, Number, add, const, evaluate, mul, neg, safediv, substitute
from .game import (
    ANTICIPATORY,
    NON_ANTICIPATORY,
    ActionProfile,
    Game,
    Scenario,
    effective_cost,
)
from .solve import (
    EquilibriumResult,
    OperatorSolution,
    SolverConfig,
    SolverError,
    minimize_operator,
    nash_equilibrium,
)
from .solve.solvers import EquilibriumNotFound

PROPORTIONAL = "proportional"
VCG = "vcg"
CUSTOM = "custom"

#: tolerance below which a (numerically) negative marginal cost clamps to 0
THETA_TOL = 1e-9

#: near-zero marginal-cost totals make the proportional rule pay nothing
ALLOCATION_GUARD = Fraction(1, 10**12)


@dataclass(frozen=True)
class IncentiveScheme:
    """One of the built-in rules or a custom per-agent expression list."""

    kind: str
    mode: str = ANTICIPATORY
    expressions: Optional[tuple[Expression, ...]] = None

    def __post_init__(self) -> None:
        if self.kind not in (PROPORTIONAL, VCG, CUSTOM):
            raise ValueError(f"unknown incentive kind {self.kind!r}")
        if self.mode not in (ANTICIPATORY, NON_ANTICIPATORY):
            raise ValueError(f"unknown anticipation mode {self.mode!r}")
        if self.kind == CUSTOM:
            if not self.expressions:
                raise ValueError("custom scheme needs one expression per agent")
            object.__setattr__(self, "expressions", tuple(self.expressions))
        elif self.expressions is not None:
            raise ValueError(f"{self.kind} scheme does not take expressions")


@dataclass(frozen=True)
class CostDecomposition:
    """Marginal costs and total excess at a realized profile."""

    u_star: ActionProfile
    theta: tuple[Number, ...]
    total_excess: Number
    u_realized: ActionProfile


@dataclass(frozen=True)
class IncentiveOutcome:
    """Everything the audit needs about one realized play of a scenario."""

    scheme: Optional[IncentiveScheme]
    t_values: tuple[Number, ...]
    realized: ActionProfile
    equilibrium: EquilibriumResult
    baseline: Optional[EquilibriumResult]
    operator_opt: OperatorSolution
    opt_out: Optional[tuple[Optional[EquilibriumResult], ...]] = None
    t_exprs: Optional[tuple[Optional[Expression], ...]] = None
    vcg_offsets: Optional[tuple[Number, ...]] = None

    @property
    def exact(self) -> bool:
        pieces = [self.realized.exact, self.operator_opt.exact]
        pieces.extend(not isinstance(t, float) for t in self.t_values)
        return all(pieces)

    @property
    def total_incentive(self) -> Number:
        total: Number = Fraction(0)
        for t in self.t_values:
            total = total + t
        return total


def marginal_cost(game: Game, u_star: ActionProfile, i: int,
                  u_ri: Number) -> Number:
    """Operator-cost increase when only agent ``i`` deviates from the
    operator optimum; clamped to zero within THETA_TOL, escalated beyond."""
    j_star = evaluate(game.operator_cost, u_star.values)
    j_dev = evaluate(game.operator_cost, u_star.replace(i, u_ri).values)
    return _clamp_nonnegative(j_dev - j_star, f"marginal cost of agent {i + 1}")


def excess_cost(game: Game, u_star: ActionProfile,
                u_r: ActionProfile) -> Number:
    """Operator cost at the realized profile minus at the optimum."""
    j_star = evaluate(game.operator_cost, u_star.values)
    j_real = evaluate(game.operator_cost, u_r.values)
    return _clamp_nonnegative(j_real - j_star, "excess cost")


def _clamp_nonnegative(value: Number, label: str) -> Number:
    if value >= 0:
        return value
    if float(value) >= -THETA_TOL:
        return Fraction(0) if not isinstance(value, float) else 0.0
    raise SolverError(
        f"{label} is negative ({float(value):.3e}): the operator optimum "
        "did not verify; tighten the solver configuration")


def cost_decomposition(game: Game, u_star: ActionProfile,
                       u_r: ActionProfile) -> CostDecomposition:
    theta = tuple(marginal_cost(game, u_star, i, u_r[i])
                  for i in range(game.n))
    return CostDecomposition(
        u_star=u_star,
        theta=theta,
        total_excess=excess_cost(game, u_star, u_r),
        u_realized=u_r,
    )


def proportional_allocation(game: Game, u_star: ActionProfile,
                            u_r: ActionProfile) -> tuple[Number, ...]:
    """Split the excess cost in proportion to the marginal costs.

    Sums to the excess cost exactly in rational arithmetic; when the
    marginal costs vanish (realized play is already optimal) everyone
    pays zero.
    """
    dec = cost_decomposition(game, u_star, u_r)
    total = sum(dec.theta)
    if total <= ALLOCATION_GUARD:
        return tuple(Fraction(0) for _ in range(game.n))
    return tuple(th * dec.total_excess / total for th in dec.theta)


def proportional_as_expression(game: Game, u_star: ActionProfile,
                               i: int) -> Expression:
    """The proportional rule as a symbolic function of the realized profile.

    Used to build anticipatory effective costs; the division is guarded so
    that a vanishing marginal-cost total yields zero, matching
    :func:`proportional_allocation`.
    """
    j = game.operator_cost
    j_star = const(evaluate(j, u_star.values))
    thetas = []
    for k in range(game.n):
        pinned = {m: const(u_star[m]) for m in range(game.n) if m != k}
        thetas.append(add(substitute(j, pinned), neg(j_star)))
    total_excess = add(j, neg(j_star))
    return safediv(mul(thetas[i], total_excess), add(*thetas),
                   guard=ALLOCATION_GUARD)


def materialize(scenario: Scenario, cfg: SolverConfig,
                u_star: Optional[ActionProfile] = None
                ) -> Optional[tuple[Optional[Expression], ...]]:
    """Per-agent incentive expressions for the scenario's scheme.

    Custom schemes carry their own; the proportional rule needs the
    operator optimum; the VCG-like rule needs opt-out equilibria (see
    :func:`vcg_incentive`).  Returns None when there is no incentive.
    """
    scheme = scenario.incentive
    if scheme is None:
        return None
    game = scenario.game
    if scheme.kind == CUSTOM:
        if len(scheme.expressions) != game.n:
            raise ValueError("custom scheme needs one expression per agent")
        return scheme.expressions
    if u_star is None:
        u_star = minimize_operator(game, cfg).profile
    if scheme.kind == PROPORTIONAL:
        return tuple(proportional_as_expression(game, u_star, i)
                     for i in range(game.n))
    outcome = vcg_incentive(game, cfg)
    return outcome.t_exprs


def opt_out_equilibrium(scenario: Scenario, i: int, cfg: SolverConfig,
                        t_exprs: Optional[Sequence[Optional[Expression]]] = None
                        ) -> EquilibriumResult:
    """Equilibrium when agent ``i`` unilaterally leaves the scheme.

    Agent ``i`` (and anyone already opted out) plays its raw cost; each
    remaining participant keeps its incentive-adjusted cost.  For the
    VCG-like rule the participants' adjustment differs from the operator
    objective only by a constant, so they minimize that objective
    directly and no fixed point over the scheme's own constants arises.
    """
    scheme = scenario.incentive
    if scheme is None:
        raise ValueError("opt-out analysis requires an incentive scheme")
    game = scenario.game
    if t_exprs is None:
        t_exprs = scheme.expressions
    costs = _opt_out_costs(scenario, i, t_exprs)
    results = nash_equilibrium(costs, game.bounds, cfg)
    if not results:
        raise EquilibriumNotFound(
            f"no equilibrium verified when agent {i + 1} opts out")
    return results[0]


def _opt_out_costs(scenario: Scenario, i: int,
                   t_exprs: Optional[Sequence[Optional[Expression]]]
                   ) -> list[Expression]:
    game = scenario.game
    scheme = scenario.incentive
    out = []
    for j in range(game.n):
        if (j == i or j in scenario.participation.opted_out
                or scheme.mode == NON_ANTICIPATORY):
            out.append(game.agent_costs[j])
        elif scheme.kind == VCG:
            out.append(game.operator_cost)
        else:
            if t_exprs is None or t_exprs[j] is None:
                raise ValueError("participants need materialized incentives")
            out.append(add(game.agent_costs[j], t_exprs[j]))
    return out


def vcg_incentive(game: Game, cfg: SolverConfig) -> IncentiveOutcome:
    """Compute the VCG-like scheme end to end (all agents participating).

    For each agent: the opt-out equilibrium, the constant offset (the
    operator-side remainder J - C_i evaluated there), and the symbolic
    incentive (J - C_i) minus that offset.  Participants then effectively
    minimize the operator objective, which pins the with-incentive
    equilibrium.
    """
    n = game.n
    u_star_sol = minimize_operator(game, cfg)
    opt_outs: list[EquilibriumResult] = []
    offsets: list[Number] = []
    t_exprs: list[Expression] = []
    for i in range(n):
        costs = [game.agent_costs[j] if j == i else game.operator_cost
                 for j in range(n)]
        results = nash_equilibrium(costs, game.bounds, cfg)
        if not results:
            raise EquilibriumNotFound(
                f"no equilibrium verified when agent {i + 1} opts out")
        eq = results[0]
        remainder = add(game.operator_cost, neg(game.agent_costs[i]))
        offset = evaluate(remainder, eq.profile.values)
        opt_outs.append(eq)
        offsets.append(offset)
        t_exprs.append(add(remainder, neg(const(offset))))

    aligned = nash_equilibrium([game.operator_cost] * n, game.bounds, cfg)
    if not aligned:
        raise EquilibriumNotFound(
            "no equilibrium verified for the incentive-aligned game")
    u_prime = aligned[0]
    t_values = tuple(evaluate(t, u_prime.profile.values) for t in t_exprs)
    return IncentiveOutcome(
        scheme=IncentiveScheme(VCG),
        t_values=t_values,
        realized=u_prime.profile,
        equilibrium=u_prime,
        baseline=None,
        operator_opt=u_star_sol,
        opt_out=tuple(opt_outs),
        t_exprs=tuple(t_exprs),
        vcg_offsets=tuple(offsets),
    )


def realized_outcome(scenario: Scenario, cfg: SolverConfig
                     ) -> list[IncentiveOutcome]:
    """Realized play of the scenario, one outcome per relevant equilibrium.

    Anticipatory agents settle on equilibria of their incentive-adjusted
    costs; non-anticipatory agents keep playing the baseline equilibria
    and incur the incentive ex post.  Agents outside the scheme pay
    nothing.
    """
    game = scenario.game
    scheme = scenario.incentive
    u_star_sol = minimize_operator(game, cfg)

    if scheme is None:
        baseline = nash_equilibrium(game.agent_costs, game.bounds, cfg)
        if not baseline:
            raise EquilibriumNotFound("no baseline equilibrium verified")
        zero = tuple(Fraction(0) for _ in range(game.n))
        return [IncentiveOutcome(
            scheme=None, t_values=zero, realized=eq.profile,
            equilibrium=eq, baseline=eq, operator_opt=u_star_sol)
            for eq in baseline]

    vcg_meta = vcg_incentive(game, cfg) if scheme.kind == VCG else None
    if vcg_meta is not None:
        t_exprs: Optional[tuple[Optional[Expression], ...]] = vcg_meta.t_exprs
    else:
        t_exprs = materialize(scenario, cfg, u_star_sol.profile)
    participants = scenario.participation.participants(game.n)

    if scheme.mode == ANTICIPATORY:
        eff = [effective_cost(scenario, i, t_exprs) for i in range(game.n)]
        equilibria = nash_equilibrium(eff, game.bounds, cfg)
        if not equilibria:
            raise EquilibriumNotFound(
                "no equilibrium verified for the incentive-adjusted game")
        anchors = [(eq, None) for eq in equilibria]
    else:
        baseline = nash_equilibrium(game.agent_costs, game.bounds, cfg)
        if not baseline:
            raise EquilibriumNotFound("no baseline equilibrium verified")
        anchors = [(eq, eq) for eq in baseline]

    outcomes = []
    for eq, base in anchors:
        profile = eq.profile
        t_values = []
        for i in range(game.n):
            if i not in participants:
                t_values.append(Fraction(0))
            elif scheme.kind == PROPORTIONAL and scheme.mode == NON_ANTICIPATORY:
                # evaluate the rule directly for an exact ex-post split
                t_values.append(proportional_allocation(
                    game, u_star_sol.profile, profile)[i])
            else:
                t_values.append(evaluate(t_exprs[i], profile.values))
        opt_outs: Optional[tuple[Optional[EquilibriumResult], ...]] = None
        if scheme.mode == ANTICIPATORY:
            per_agent: list[Optional[EquilibriumResult]] = []
            for i in range(game.n):
                if i not in participants:
                    per_agent.append(None)
                elif vcg_meta is not None and not scenario.participation.opted_out:
                    per_agent.append(vcg_meta.opt_out[i])
                else:
                    per_agent.append(
                        opt_out_equilibrium(scenario, i, cfg, t_exprs))
            opt_outs = tuple(per_agent)
        outcomes.append(IncentiveOutcome(
            scheme=scheme,
            t_values=tuple(t_values),
            realized=profile,
            equilibrium=eq,
            baseline=base,
            operator_opt=u_star_sol,
            opt_out=opt_outs,
            t_exprs=t_exprs,
            vcg_offsets=None if vcg_meta is None else vcg_meta.vcg_offsets,
        ))
    return outcomes
