"""Exact mixed-integer model of the planning problem, exported as text.

The model is the algebraic twin of the feasibility checker: binary arc
variables X_i_j_t route each day through an extra index-0 dummy node (a
stay-at-home day is the closed loop i -> 0 -> i), sleep variables S_i_t
chain the days together, Z/FM/R price the meetings, and continuous order
labels U_i_t eliminate subtours. Every constraint row carries a stable
numeric tag ("8".."45", plus "B1"/"B2" for the day-clash and horizon-cap
rules); audits and tests address rows by these tags. Tag "43" never emits
rows: repeat variables are simply not registered for gaps that would reach
outside the horizon, which is the same restriction expressed structurally.

Three artifacts leave this module: the LP text itself (write_lp, a strict
CPLEX-LP dialect with deterministic ordering so files are byte-identical
across runs), a warm-start assignment built from any feasible schedule
(schedule_to_assignment), and a numeric audit of an assignment against
every row and bound (check_assignment). The warm start doubles as the
strongest available cross-validation: a schedule the checker accepts must
satisfy every algebraic row, so any residual is a bug in one of the two.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .model import Instance
from .rewards import RewardModel, first_meeting_reward, repeat_meeting_reward
from .scenarios import ScenarioConfig
from .schedule import Schedule, check_feasibility

DEFAULT_TOLERANCE = 1e-6

_LINE_WIDTH = 240


class ModelBuildError(ValueError):
    """Raised when instance and scenario cannot form a consistent model."""


@dataclass(frozen=True)
class Var:
    """One registered decision variable."""

    name: str
    family: str
    binary: bool
    lb: float = 0.0
    ub: Optional[float] = None  # None: no declared upper bound


@dataclass(frozen=True)
class Row:
    name: str
    tag: str
    coeffs: Dict[str, float]
    sense: str  # "<=", ">=" or "="
    rhs: float


@dataclass
class MilpModel:
    instance: Instance
    scenario: ScenarioConfig
    variables: "OrderedDict[str, Var]"
    objective: "OrderedDict[str, float]"
    rows: List[Row]
    header: List[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.instance.n

    @property
    def m(self) -> int:
        return self.instance.params.days

    def variable_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for v in self.variables.values():
            counts[v.family] = counts.get(v.family, 0) + 1
        return counts

    def row_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for r in self.rows:
            counts[r.tag] = counts.get(r.tag, 0) + 1
        return counts


@dataclass
class VariableAssignment:
    """Value for every registered variable, in registry order."""

    values: "OrderedDict[str, float]"

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def get(self, name: str, default: float = 0.0) -> float:
        return self.values.get(name, default)

    def items(self):
        return self.values.items()

    def __len__(self) -> int:
        return len(self.values)

    def __contains__(self, name: str) -> bool:
        return name in self.values


# ---------------------------------------------------------------------------
# variable names


def _x(i: int, j: int, t: int) -> str:
    return f"X_{i}_{j}_{t}"


def _l(i: int, t: int) -> str:
    return f"L_{i}_{t}"


def _e(i: int, t: int) -> str:
    return f"E_{i}_{t}"


def _s(i: int, t: int) -> str:
    return f"S_{i}_{t}"


def _z(i: int, t: int) -> str:
    return f"Z_{i}_{t}"


def _fm(i: int, t: int) -> str:
    return f"FM_{i}_{t}"


def _r(i: int, t: int, s: int) -> str:
    return f"R_{i}_{t}_{s}"


def _u(i: int, t: int) -> str:
    return f"U_{i}_{t}"


class _Builder:
    def __init__(self, instance: Instance, scenario: ScenarioConfig):
        if not instance.has_city(instance.params.capital_id):
            raise ModelBuildError(
                f"instance {instance.name!r} has no capital city "
                f"{instance.params.capital_id}")
        self.instance = instance
        self.scenario = scenario
        self.model = RewardModel.for_scenario(instance, scenario)
        p = instance.params
        self.n = instance.n
        self.m = p.days
        self.capital = p.capital_id
        self.alpha = p.max_meetings_per_day
        self.t_max = p.max_tour_minutes
        self.kappa = p.kappa
        self.with_repeats = scenario.repeat_rewards_enabled
        self.everyone = range(0, self.n + 1)  # index 0 is the dummy node
        self.cities = range(1, self.n + 1)
        self.days = range(1, self.m + 1)
        self.variables: "OrderedDict[str, Var]" = OrderedDict()
        self.objective: "OrderedDict[str, float]" = OrderedDict()
        self.rows: List[Row] = []

    # -- registry ----------------------------------------------------------

    def _add(self, name: str, family: str, binary: bool = True,
             lb: float = 0.0, ub: Optional[float] = None):
        self.variables[name] = Var(name, family, binary, lb, ub)

    def register(self):
        for i in self.everyone:
            for j in self.everyone:
                if i == j:
                    continue
                for t in self.days:
                    self._add(_x(i, j, t), "X")
        for fam, mk in (("L", _l), ("E", _e), ("S", _s), ("Z", _z)):
            for i in self.everyone:
                for t in self.days:
                    self._add(mk(i, t), fam)
        for i in self.cities:
            for t in self.days:
                self._add(_fm(i, t), "FM")
        if self.with_repeats:
            for i in self.everyone:
                for t in range(2, self.m + 1):
                    for s in range(1, t):
                        self._add(_r(i, t, s), "R")
        for i in self.everyone:
            for t in self.days:
                self._add(_u(i, t), "U", binary=False, lb=0.0)
        # scenario pins live in the variable bounds
        if self.scenario.force_closed_at_capital:
            for t in self.days:
                self._pin(_s(self.capital, t), 1.0)
        elif self.scenario.end_at_capital:
            self._pin(_s(self.capital, self.m), 1.0)

    def _pin(self, name: str, value: float):
        old = self.variables[name]
        self.variables[name] = Var(old.name, old.family, old.binary,
                                   lb=value, ub=value)

    # -- objective ---------------------------------------------------------

    def price(self):
        pi = {i: self.instance.city(i).base_reward for i in self.cities}
        if self.with_repeats:
            for i in self.cities:
                for t in self.days:
                    self.objective[_fm(i, t)] = first_meeting_reward(
                        pi[i], t, self.model)
            for i in self.cities:
                for t in range(2, self.m + 1):
                    for s in range(1, t):
                        self.objective[_r(i, t, s)] = repeat_meeting_reward(
                            pi[i], t, s, self.model)
        else:
            # one meeting per city max: price the meeting variable directly
            for i in self.cities:
                for t in self.days:
                    self.objective[_z(i, t)] = first_meeting_reward(
                        pi[i], t, self.model)
        weight = self.scenario.travel_cost_weight * \
            self.instance.params.cost_normalizer
        if weight:
            for i in self.everyone:
                for j in self.everyone:
                    if i == j:
                        continue
                    c = self.instance.cost(i, j)
                    if c:
                        for t in self.days:
                            self.objective[_x(i, j, t)] = -weight * c

    # -- rows ----------------------------------------------------------------

    def _emit(self, tag: str, suffix: str, coeffs: "OrderedDict[str, float]",
              sense: str, rhs: float, synthetic: bool = False):
        if synthetic and self._vacuous(coeffs, sense, rhs):
            return
        self.rows.append(Row(f"c{tag}_{suffix}", tag, dict(coeffs), sense, rhs))

    def _bound_span(self, name: str) -> Tuple[float, float]:
        v = self.variables[name]
        if v.binary:
            return (v.lb, 1.0 if v.ub is None else v.ub)
        hi = self.alpha + 1 if v.family == "U" else v.ub  # tag 33 cap
        return (v.lb, hi)

    def _vacuous(self, coeffs, sense: str, rhs: float) -> bool:
        """True when variable bounds alone already satisfy the row."""
        if sense == "=":
            return False
        worst = 0.0
        for name, c in coeffs.items():
            lo, hi = self._bound_span(name)
            if sense == "<=":
                worst += c * (hi if c > 0 else lo)
            else:
                worst += c * (lo if c > 0 else hi)
        return worst <= rhs + 1e-12 if sense == "<=" else worst >= rhs - 1e-12

    def _prev_sleep(self, i: int, t: int) -> Tuple[Optional[str], float]:
        """The sleep state one night before day t.

        From day 2 on it is a variable; before day 1 it is the constant
        start-at-the-capital state, folded into the right-hand side.
        """
        if t >= 2:
            return _s(i, t - 1), 0.0
        return None, 1.0 if i == self.capital else 0.0

    def build_rows(self):
        n, m, a = self.n, self.m, self.alpha
        ins = self.instance

        # 8/9: each city departed/entered at most once a day
        for i in self.everyone:
            for t in self.days:
                out = OrderedDict((_x(i, j, t), 1.0)
                                  for j in self.everyone if j != i)
                self._emit("8", f"{i}_{t}", out, "<=", 1.0)
        for i in self.everyone:
            for t in self.days:
                inc = OrderedDict((_x(j, i, t), 1.0)
                                  for j in self.everyone if j != i)
                self._emit("9", f"{i}_{t}", inc, "<=", 1.0)

        # 10/11: meetings per day between the daily floor and alpha
        for t in self.days:
            z_sum = OrderedDict((_z(i, t), 1.0) for i in self.cities)
            self._emit("10", str(t), z_sum, "<=", float(a))
        if self.scenario.require_daily_meeting:
            for t in self.days:
                z_sum = OrderedDict((_z(i, t), 1.0) for i in self.cities)
                self._emit("11", str(t), z_sum, ">=", 1.0)

        # 12: meeting time plus travel time fits the day
        for t in self.days:
            row: "OrderedDict[str, float]" = OrderedDict()
            for i in self.cities:
                row[_z(i, t)] = float(ins.city(i).meeting_minutes)
            for i in self.everyone:
                for j in self.everyone:
                    if i != j and ins.minutes(i, j):
                        row[_x(i, j, t)] = float(ins.minutes(i, j))
            self._emit("12", str(t), row, "<=", float(self.t_max))

        # 13-15: a first meeting is a meeting that no earlier day held
        for i in self.cities:
            self._emit("13", f"{i}_1", OrderedDict(
                [(_fm(i, 1), 1.0), (_z(i, 1), -1.0)]), "=", 0.0)
        for i in self.cities:
            for t in range(2, m + 1):
                self._emit("14", f"{i}_{t}", OrderedDict(
                    [(_fm(i, t), 1.0), (_z(i, t), -1.0)]), "<=", 0.0)
        for i in self.cities:
            for t in range(2, m + 1):
                for u in range(1, t):
                    self._emit("15", f"{i}_{t}_{u}", OrderedDict(
                        [(_fm(i, t), 1.0), (_z(i, u), 1.0)]), "<=", 1.0)

        # 16-18: a day has at most one exclusive exit and one entrance
        for i in self.everyone:
            for t in self.days:
                row = OrderedDict((_x(i, j, t), 1.0)
                                  for j in self.everyone if j != i)
                for j in self.everyone:
                    if j != i:
                        row[_x(j, i, t)] = -1.0
                row[_l(i, t)] = -1.0
                row[_e(i, t)] = 1.0
                self._emit("16", f"{i}_{t}", row, "=", 0.0)
        for i in self.everyone:
            for t in self.days:
                self._emit("17", f"{i}_{t}", OrderedDict(
                    [(_l(i, t), 1.0), (_e(i, t), 1.0)]), "<=", 1.0)
        for t in self.days:
            row = OrderedDict()
            for i in self.everyone:
                row[_l(i, t)] = 1.0
                row[_e(i, t)] = 1.0
            self._emit("18", str(t), row, "<=", 2.0)

        # 19-21: overnight state either persists or an open hop moves it
        for i in self.everyone:
            for t in self.days:
                prev, const = self._prev_sleep(i, t)
                row = OrderedDict()
                if prev:
                    row[prev] = 1.0
                row[_s(i, t)] = -1.0
                for j in self.everyone:
                    row[_l(j, t)] = -0.5
                    row[_e(j, t)] = -0.5
                self._emit("19", f"{i}_{t}", row, "<=", -const,
                           synthetic=t == 1)
        for i in self.everyone:
            for t in self.days:
                prev, const = self._prev_sleep(i, t)
                row = OrderedDict([(_s(i, t), 1.0)])
                if prev:
                    row[prev] = -1.0
                for j in self.everyone:
                    row[_l(j, t)] = -0.5
                    row[_e(j, t)] = -0.5
                self._emit("20", f"{i}_{t}", row, "<=", const,
                           synthetic=t == 1)
        for i in self.cities:
            for t in self.days:
                prev, const = self._prev_sleep(i, t)
                row = OrderedDict()
                if prev:
                    row[prev] = 1.0
                row[_l(i, t)] = -1.0
                row[_s(i, t)] = -1.0
                self._emit("21", f"{i}_{t}", row, "<=", -const,
                           synthetic=t == 1)

        # 22: nobody sleeps in the dummy node
        for t in self.days:
            self._emit("22", str(t), OrderedDict([(_s(0, t), 1.0)]), "=", 0.0)

        # 23-25: a stay-at-home loop needs its city slept in on both nights
        for i in self.cities:
            for t in self.days:
                self._emit("23", f"{i}_{t}", OrderedDict(
                    [(_x(i, 0, t), 1.0), (_s(i, t), -1.0)]), "<=", 0.0)
        for i in self.cities:
            for t in self.days:
                prev, const = self._prev_sleep(i, t)
                row = OrderedDict([(_x(i, 0, t), 1.0)])
                if prev:
                    row[prev] = -1.0
                self._emit("24", f"{i}_{t}", row, "<=", const,
                           synthetic=t == 1)
        for i in self.cities:
            for t in self.days:
                self._emit("25", f"{i}_{t}", OrderedDict(
                    [(_x(i, 0, t), 1.0), (_x(0, i, t), -1.0)]), "=", 0.0)

        # 26-28: exactly one overnight city, which next day departs from
        for i in self.cities:
            for t in self.days:
                self._emit("26", f"{i}_{t}", OrderedDict(
                    [(_e(i, t), 1.0), (_s(i, t), -1.0)]), "<=", 0.0)
        for i in self.cities:
            for t in range(1, m):
                row = OrderedDict([(_s(i, t), 1.0)])
                for j in self.everyone:
                    if j != i:
                        row[_x(i, j, t + 1)] = -1.0
                self._emit("27", f"{i}_{t}", row, "<=", 0.0)
        for t in self.days:
            row = OrderedDict((_s(i, t), 1.0) for i in self.cities)
            self._emit("28", str(t), row, "=", 1.0)

        # 29: capital sleep at least once in every kappa+1 night window
        if self.scenario.kappa_enabled and m > self.kappa:
            for t in range(1, m - self.kappa + 1):
                row = OrderedDict((_s(self.capital, k), 1.0)
                                  for k in range(t, t + self.kappa + 1))
                self._emit("29", str(t), row, ">=", 1.0)

        # 30/31: no meeting without touching the city that day
        for i in self.cities:
            for t in self.days:
                row = OrderedDict([(_z(i, t), 1.0)])
                for j in self.everyone:
                    if j != i:
                        row[_x(i, j, t)] = -1.0
                row[_e(i, t)] = -1.0
                self._emit("30", f"{i}_{t}", row, "<=", 0.0)
        for i in self.cities:
            for t in self.days:
                row = OrderedDict([(_z(i, t), 1.0)])
                for j in self.everyone:
                    if j != i:
                        row[_x(j, i, t)] = -1.0
                row[_l(i, t)] = -1.0
                self._emit("31", f"{i}_{t}", row, "<=", 0.0)

        # 32-39: order labels chain along arcs and kill detached loops.
        # The arc activation constant is a+2, not a+1: the wakeup label is
        # pinned to 1, so the last stop of a full day carries label a+1 and
        # needs that much slack against an unvisited city's zero label.
        big = float(a + 2)
        slack = float(a + 1)
        for t in self.days:
            for i in self.everyone:
                for j in self.everyone:
                    if i == j:
                        continue
                    prev, const = self._prev_sleep(j, t)
                    row = OrderedDict([(_u(i, t), 1.0), (_u(j, t), -1.0),
                                       (_x(i, j, t), big)])
                    if prev:
                        row[prev] = -slack
                    self._emit("32", f"{i}_{j}_{t}", row, "<=",
                               slack + slack * const, synthetic=t == 1)
        for i in self.everyone:
            for t in self.days:
                self._emit("33", f"{i}_{t}", OrderedDict(
                    [(_u(i, t), 1.0)]), "<=", slack)
        for i in self.everyone:
            for t in self.days:
                row = OrderedDict([(_u(i, t), 1.0)])
                for j in self.everyone:
                    for k in self.everyone:
                        if j != k:
                            row[_x(j, k, t)] = -1.0
                self._emit("34", f"{i}_{t}", row, "<=", 1.0)
        for i in self.everyone:
            for t in self.days:
                prev, const = self._prev_sleep(i, t)
                row = OrderedDict()
                if prev:
                    row[prev] = 1.0
                row[_u(i, t)] = -1.0
                self._emit("35", f"{i}_{t}", row, "<=", -const,
                           synthetic=t == 1)
        for i in self.everyone:
            for t in self.days:
                prev, const = self._prev_sleep(i, t)
                row = OrderedDict([(_u(i, t), 1.0)])
                if prev:
                    row[prev] = slack
                self._emit("36", f"{i}_{t}", row, "<=",
                           float(a + 2) - slack * const, synthetic=t == 1)
        for i in self.everyone:
            for t in self.days:
                row = OrderedDict((_x(i, j, t), 1.0)
                                  for j in self.everyone if j != i)
                row[_u(i, t)] = -1.0
                self._emit("37", f"{i}_{t}", row, "<=", 0.0)
        # 38: a city both visited and slept in outranks a plain visit; the
        # wakeup is exempt, its label is already pinned by 35/36
        for i in self.everyone:
            for t in self.days:
                prev, const = self._prev_sleep(i, t)
                row = OrderedDict([(_s(i, t), 1.0)])
                for j in self.everyone:
                    if j != i:
                        row[_x(i, j, t)] = 1.0
                if prev:
                    row[prev] = -1.0
                row[_u(i, t)] = -1.0
                self._emit("38", f"{i}_{t}", row, "<=", const,
                           synthetic=t == 1)
        for i in self.everyone:
            for t in self.days:
                row = OrderedDict([(_u(i, t), 1.0)])
                for j in self.everyone:
                    if j != i:
                        row[_x(i, j, t)] = -slack
                        row[_x(j, i, t)] = -slack
                self._emit("39", f"{i}_{t}", row, "<=", 0.0)

        # 40-45: repeat bookkeeping; a repeat pair needs meetings at both
        # ends, silence in between, and no first meeting after its start
        if self.with_repeats:
            for i in self.everyone:
                for t in range(2, m + 1):
                    for s in range(1, t):
                        self._emit("40", f"{i}_{t}_{s}", OrderedDict(
                            [(_r(i, t, s), 1.0), (_z(i, t), -1.0)]),
                            "<=", 0.0)
            for i in self.everyone:
                for t in range(2, m + 1):
                    for s in range(1, t):
                        self._emit("41", f"{i}_{t}_{s}", OrderedDict(
                            [(_r(i, t, s), 1.0), (_z(i, t - s), -1.0)]),
                            "<=", 0.0)
            for i in self.everyone:
                for t in range(2, m + 1):
                    for s in range(2, t):
                        row = OrderedDict((_z(i, k), 1.0)
                                          for k in range(t - s + 1, t))
                        row[_r(i, t, s)] = float(s)
                        self._emit("42", f"{i}_{t}_{s}", row, "<=", float(s))
            for i in self.cities:
                for t in range(2, m + 1):
                    for u in range(t + 1, m + 1):
                        for s in range(u - t + 1, u):
                            self._emit("44", f"{i}_{t}_{u}_{s}", OrderedDict(
                                [(_r(i, u, s), 1.0), (_fm(i, t), 1.0)]),
                                "<=", 1.0)
            for i in self.cities:
                for t in range(2, m + 1):
                    for s in range(1, t):
                        row = OrderedDict([(_z(i, t - s), 1.0)])
                        row[_z(i, t)] = row.get(_z(i, t), 0.0) + 1.0
                        for k in range(t - s + 1, t):
                            row[_z(i, k)] = -1.0
                        row[_r(i, t, s)] = -1.0
                        self._emit("45", f"{i}_{t}_{s}", row, "<=", 1.0)

        # B1/B2: at most one big-city meeting a day; horizon caps per class
        big_ids = self.instance.big_city_ids()
        if big_ids:
            for t in self.days:
                row = OrderedDict((_z(i, t), 1.0) for i in big_ids)
                self._emit("B1", str(t), row, "<=", 1.0)
        for i in self.cities:
            cap = self.scenario.cap_for(self.instance.city(i).size_class)
            row = OrderedDict((_z(i, t), 1.0) for t in self.days)
            self._emit("B2", str(i), row, "<=", float(cap))

    def describe(self) -> List[str]:
        v_counts = {}
        for var in self.variables.values():
            v_counts[var.family] = v_counts.get(var.family, 0) + 1
        r_counts: Dict[str, int] = {}
        for r in self.rows:
            r_counts[r.tag] = r_counts.get(r.tag, 0) + 1
        lines = [
            f"model: {self.instance.name} / scenario {self.scenario.id}",
            f"cities: {self.n} real + 1 dummy, days: {self.m}",
            "variables: " + ", ".join(
                f"{fam}={v_counts[fam]}" for fam in
                ("X", "L", "E", "S", "Z", "FM", "R", "U") if fam in v_counts),
            "rows: " + ", ".join(
                f"{tag}={r_counts[tag]}" for tag in sorted(
                    r_counts, key=lambda s: (len(s), s))),
            "suggested solver options: MIPGap=0.0 TimeLimit=86400 Threads=0"
            " NumericFocus=3 DualReductions=0",
        ]
        return lines


def build_model(instance: Instance, scenario: ScenarioConfig) -> MilpModel:
    """Assemble the full model for one instance under one scenario."""
    b = _Builder(instance, scenario)
    b.register()
    b.price()
    b.build_rows()
    return MilpModel(instance=instance, scenario=scenario,
                     variables=b.variables, objective=b.objective,
                     rows=b.rows, header=b.describe())


# ---------------------------------------------------------------------------
# LP text


def _fmt(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _term_tokens(coeffs) -> List[str]:
    tokens = []
    first = True
    for name, c in coeffs:
        if c == 0:
            continue
        mag = abs(c)
        body = name if mag == 1 else f"{_fmt(mag)} {name}"
        if first:
            tokens.append(body if c > 0 else f"- {body}")
            first = False
        else:
            tokens.append(f"+ {body}" if c > 0 else f"- {body}")
    return tokens


def _wrap(prefix: str, tokens: Sequence[str], out: List[str]):
    cur = prefix
    for tok in tokens:
        if cur != prefix and len(cur) + len(tok) + 1 > _LINE_WIDTH:
            out.append(cur)
            cur = " " + tok
        else:
            cur = f"{cur} {tok}"
    out.append(cur)


def lp_text(model: MilpModel) -> str:
    """Render the model as deterministic CPLEX-LP text."""
    out: List[str] = [f"\\ {line}" for line in model.header]
    out.append("Maximize")
    _wrap(" obj:", _term_tokens(model.objective.items()), out)
    out.append("Subject To")
    for row in model.rows:
        tokens = _term_tokens(row.coeffs.items())
        tokens.append(row.sense)
        tokens.append(_fmt(row.rhs))
        _wrap(f" {row.name}:", tokens, out)
    out.append("Bounds")
    for var in model.variables.values():
        if var.ub is not None and var.lb == var.ub:
            out.append(f" {var.name} = {_fmt(var.lb)}")
    out.append("Binaries")
    _wrap(" ", [v.name for v in model.variables.values() if v.binary], out)
    out.append("End")
    return "\n".join(out) + "\n"


def write_lp(model: MilpModel, path) -> str:
    text = lp_text(model)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return str(path)


# ---------------------------------------------------------------------------
# warm starts


def schedule_to_assignment(schedule: Schedule, instance: Instance,
                           scenario: ScenarioConfig,
                           model: Optional[MilpModel] = None
                           ) -> VariableAssignment:
    """Translate a feasible schedule into values for every variable.

    Order labels follow the visit sequence (wakeup 1, then 1 + position);
    any consistent labelling would do, this one satisfies the order rows
    with equality along each day's chain.
    """
    issues = check_feasibility(schedule, instance, scenario)
    if issues:
        raise ValueError(
            f"schedule infeasible, first issue: {issues[0].kind.name}")
    if model is None:
        model = build_model(instance, scenario)
    vals: "OrderedDict[str, float]" = OrderedDict(
        (name, 0.0) for name in model.variables)

    meeting_days: Dict[int, List[int]] = {}
    for t, tour in enumerate(schedule.days, start=1):
        r = list(tour.route)
        closed = len(r) > 1 and r[0] == r[-1]
        if len(r) == 1:
            i = r[0]
            vals[_x(i, 0, t)] = 1.0
            vals[_x(0, i, t)] = 1.0
            vals[_s(i, t)] = 1.0
            vals[_u(i, t)] = 1.0
            vals[_u(0, t)] = 2.0
        else:
            for a, b in zip(r, r[1:]):
                vals[_x(a, b, t)] = 1.0
            body = r[:-1] if closed else r
            for pos, c in enumerate(body):
                vals[_u(c, t)] = float(pos + 1)
            vals[_s(r[0] if closed else r[-1], t)] = 1.0
            if not closed:
                vals[_l(r[0], t)] = 1.0
                vals[_e(r[-1], t)] = 1.0
        for c in tour.meeting_set():
            vals[_z(c, t)] = 1.0
            meeting_days.setdefault(c, []).append(t)

    for c, days in meeting_days.items():
        days.sort()
        vals[_fm(c, days[0])] = 1.0
        for prev, t in zip(days, days[1:]):
            name = _r(c, t, t - prev)
            if name in vals:
                vals[name] = 1.0
    return VariableAssignment(vals)


def objective_value(model: MilpModel, assignment: VariableAssignment) -> float:
    return sum(c * assignment.get(name)
               for name, c in model.objective.items())


def check_assignment(model: MilpModel, assignment: VariableAssignment,
                     tolerance: float = DEFAULT_TOLERANCE
                     ) -> List[Tuple[str, float]]:
    """Audit an assignment against every row and every variable bound.

    Returns (row name, residual) pairs for all violations beyond the
    tolerance; row names embed the tag ("c12_3" is tag 12, day 3) and
    bound violations are reported under the pseudo-tag 46.
    """
    viols: List[Tuple[str, float]] = []
    for var in model.variables.values():
        v = assignment.get(var.name)
        residual = max(var.lb - v, 0.0)
        if var.ub is not None:
            residual = max(residual, v - var.ub)
        if var.binary:
            residual = max(residual, min(abs(v), abs(v - 1.0)))
        if residual > tolerance:
            viols.append((f"c46_{var.name}", residual))
    for row in model.rows:
        lhs = sum(c * assignment.get(name) for name, c in row.coeffs.items())
        if row.sense == "<=":
            residual = lhs - row.rhs
        elif row.sense == ">=":
            residual = row.rhs - lhs
        else:
            residual = abs(lhs - row.rhs)
        if residual > tolerance:
            viols.append((row.name, residual))
    return viols


def write_mipstart(assignment: VariableAssignment, path,
                   include_zeros: bool = False) -> str:
    """Write `name value` lines in registry order for solver warm starts."""
    lines = []
    for name, value in assignment.items():
        if value or include_zeros:
            lines.append(f"{name} {_fmt(value)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return str(path)
