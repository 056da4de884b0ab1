"""Interval Type-2 fuzzy inference over three normalized quanta.

Each linguistic term (low / medium / high) is an interval trapezoid: an upper
membership function and a lower one contained inside it, so every input maps
to a membership interval rather than a single grade. The 27-rule knowledge
base conjoins the three inputs with the minimum t-norm applied boundwise,
giving one firing interval per rule. Type reduction is the Nie-Tan midpoint
collapse; defuzzification is the firing-weighted average of consequent-term
centroids, precomputed on a uniform grid over [0, 1]. The output, the
potential of dissemination, always lands in [0, 1]; zero total firing mass
yields 0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterable, Mapping, Sequence

from .errors import ConfigurationError

__all__ = [
    "TERM_LABELS",
    "IntervalMembership",
    "IntervalTerm",
    "Rule",
    "RuleBase",
    "InferenceEngine",
    "trapezoid",
    "make_term",
    "default_terms",
    "default_rule_base",
    "default_engine",
    "fuzzify",
    "fire_rule",
    "evaluate_pod",
    "engine_from_config",
]

log = logging.getLogger(__name__)

# Rank order of the linguistic terms; rule consequents are monotone in it.
TERM_LABELS = ("low", "medium", "high")


def trapezoid(x: float, a: float, b: float, c: float, d: float) -> float:
    """Trapezoidal membership with plateau [b, c]; degenerate edges act as shoulders."""
    if x < a or x > d:
        return 0.0
    if b <= x <= c:
        return 1.0
    if x < b:
        return (x - a) / (b - a)
    return (d - x) / (d - c)


@dataclass(frozen=True, slots=True)
class IntervalMembership:
    """Membership interval [lower, upper] of one input in one term."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.lower <= self.upper <= 1.0:
            raise ConfigurationError(
                f"membership interval [{self.lower}, {self.upper}] is not ordered within [0, 1]"
            )

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)


@dataclass(frozen=True, slots=True)
class IntervalTerm:
    """One linguistic term: an upper trapezoid and a scaled lower trapezoid inside it."""

    label: str
    upper: tuple[float, float, float, float]
    lower: tuple[float, float, float, float]
    height: float = 1.0

    def __post_init__(self) -> None:
        for name, shape in (("upper", self.upper), ("lower", self.lower)):
            a, b, c, d = shape
            if not (0.0 <= a <= b <= c <= d <= 1.0):
                raise ConfigurationError(
                    f"term {self.label!r}: {name} shape {shape} must satisfy 0 <= a <= b <= c <= d <= 1"
                )
        if not 0.0 < self.height <= 1.0:
            raise ConfigurationError(
                f"term {self.label!r}: lower-shape height must lie in (0, 1], got {self.height}"
            )
        for i in range(101):
            x = i / 100.0
            lo, hi = self.membership(x)
            if lo > hi + 1e-12:
                raise ConfigurationError(
                    f"term {self.label!r}: lower membership exceeds upper at x={x}"
                )

    def membership(self, x: float) -> tuple[float, float]:
        return (self.height * trapezoid(x, *self.lower), trapezoid(x, *self.upper))


def make_term(
    label: str,
    a: float,
    b: float,
    c: float,
    d: float,
    shrink: float = 0.0,
    height: float = 0.9,
) -> IntervalTerm:
    """Build an interval term from an upper trapezoid.

    The lower shape is the same trapezoid with its support feet pulled toward
    the core by the given fraction, scaled to the given height. shrink = 0 and
    height = 1 collapse the footprint entirely (a plain Type-1 term).
    """
    if not 0.0 <= shrink < 1.0:
        raise ConfigurationError(f"support shrink must lie in [0, 1), got {shrink}")
    lower = (a + shrink * (b - a), b, c, d - shrink * (d - c))
    return IntervalTerm(label=label, upper=(a, b, c, d), lower=lower, height=height)


@lru_cache(maxsize=1)
def default_terms() -> tuple[IntervalTerm, IntervalTerm, IntervalTerm]:
    """Three interval terms uniformly covering [0, 1].

    The upper shapes form a complementary partition (adjacent memberships sum
    to one across each overlap) and every lower shape is the upper one scaled
    to height 0.9. Both choices are load-bearing for monotonicity of the
    inference output: complementary overlaps make opposing mass shifts cancel
    under the minimum t-norm, and a scaled (rather than shrunk) lower shape
    preserves that cancellation boundwise. Asymmetric overlaps or shrunk lower
    supports visibly break it.
    """
    return (
        make_term("low", 0.0, 0.0, 0.2, 0.45),
        make_term("medium", 0.2, 0.45, 0.55, 0.8),
        make_term("high", 0.55, 0.8, 1.0, 1.0),
    )


@dataclass(frozen=True, slots=True)
class Rule:
    """IF the three inputs are (a1, a2, a3) THEN the potential is `consequent`."""

    antecedents: tuple[str, str, str]
    consequent: str


class RuleBase:
    """Complete 27-rule grid with a monotone consequent mapping.

    Every combination of the three term labels appears exactly once, and
    raising any antecedent label never lowers the consequent label.
    """

    def __init__(self, rules: Iterable[Rule], labels: Sequence[str] = TERM_LABELS) -> None:
        labels = tuple(labels)
        if len(labels) != 3 or len(set(labels)) != 3:
            raise ConfigurationError(f"rule base needs three distinct term labels, got {labels}")
        rank = {label: i for i, label in enumerate(labels)}
        table: dict[tuple[str, str, str], str] = {}
        for rule in rules:
            if len(rule.antecedents) != 3:
                raise ConfigurationError(f"rule {rule} must have exactly 3 antecedents")
            for label in (*rule.antecedents, rule.consequent):
                if label not in rank:
                    raise ConfigurationError(f"unknown term label {label!r} in rule {rule}")
            if rule.antecedents in table:
                raise ConfigurationError(f"duplicate rule for antecedents {rule.antecedents}")
            table[rule.antecedents] = rule.consequent
        missing = [c for c in product(labels, repeat=3) if c not in table]
        if missing:
            raise ConfigurationError(f"rule base incomplete: {len(missing)} combinations missing")
        for combo, consequent in table.items():
            for pos in range(3):
                r = rank[combo[pos]]
                if r == 2:
                    continue
                raised = list(combo)
                raised[pos] = labels[r + 1]
                if rank[table[tuple(raised)]] < rank[consequent]:
                    raise ConfigurationError(
                        f"rule base not monotone: raising input {pos} of {combo} lowers the consequent"
                    )
        self._labels = labels
        self._table = table

    @property
    def labels(self) -> tuple[str, str, str]:
        return self._labels

    @property
    def rules(self) -> tuple[Rule, ...]:
        return tuple(
            Rule(antecedents=combo, consequent=self._table[combo])
            for combo in product(self._labels, repeat=3)
        )

    def consequent(self, antecedents: Sequence[str]) -> str:
        return self._table[tuple(antecedents)]

    def __len__(self) -> int:
        return len(self._table)


def default_rule_base(labels: Sequence[str] = TERM_LABELS) -> RuleBase:
    """Rank-average rules: the consequent rank is the half-up rounded mean rank.

    With ranks 0/1/2 the consequent is low for rank sums 0-1, medium for 2-4,
    high for 5-6; this is monotone by construction.
    """
    labels = tuple(labels)
    rules = []
    for combo in product(range(3), repeat=3):
        s = sum(combo)
        consequent = labels[(2 * s + 3) // 6]  # floor(s/3 + 1/2) in integer arithmetic
        rules.append(Rule(tuple(labels[i] for i in combo), consequent))
    return RuleBase(rules, labels)


class InferenceEngine:
    """Immutable, precomputed evaluator mapping an input triple to a potential."""

    def __init__(
        self,
        terms: Sequence[IntervalTerm] | None = None,
        rules: RuleBase | None = None,
        grid_points: int = 101,
    ) -> None:
        terms = tuple(terms) if terms is not None else default_terms()
        if len(terms) != 3:
            raise ConfigurationError(f"engine needs exactly 3 terms, got {len(terms)}")
        labels = tuple(t.label for t in terms)
        if len(set(labels)) != 3:
            raise ConfigurationError(f"term labels must be distinct, got {labels}")
        if grid_points < 2:
            raise ConfigurationError(f"centroid grid needs at least 2 points, got {grid_points}")
        rules = rules if rules is not None else default_rule_base(labels)
        if rules.labels != labels:
            raise ConfigurationError(
                f"rule-base labels {rules.labels} do not match term labels {labels}"
            )
        self.terms = terms
        self.rules = rules
        self.grid_points = grid_points
        self._centroids = tuple(self._term_centroid(t) for t in terms)
        index = {label: i for i, label in enumerate(labels)}
        self._rule_centroids = tuple(
            self._centroids[index[rules.consequent(combo)]]
            for combo in product(labels, repeat=3)
        )
        self._lower_params = tuple(t.lower for t in terms)
        self._upper_params = tuple(t.upper for t in terms)
        self._heights = tuple(t.height for t in terms)

    def _term_centroid(self, term: IntervalTerm) -> float:
        num = 0.0
        den = 0.0
        last = self.grid_points - 1
        for i in range(self.grid_points):
            x = i / last
            lo, hi = term.membership(x)
            mass = lo + hi  # the midpoint's factor 1/2 cancels in the ratio
            num += x * mass
            den += mass
        if den <= 0.0:
            raise ConfigurationError(f"term {term.label!r} has zero mass on the centroid grid")
        return num / den

    def centroid(self, label: str) -> float:
        for term, value in zip(self.terms, self._centroids):
            if term.label == label:
                return value
        raise ConfigurationError(f"unknown term label {label!r}")

    def memberships(self, x: float) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
        """Lower and upper membership of x in each term, clamping stray inputs."""
        if x < 0.0 or x > 1.0:
            log.warning("fuzzifier input %r outside [0, 1]; clamping", x)
            x = 0.0 if x < 0.0 else 1.0
        lows = []
        highs = []
        for t in range(3):
            a, b, c, d = self._lower_params[t]
            lows.append(self._heights[t] * trapezoid(x, a, b, c, d))
            a, b, c, d = self._upper_params[t]
            highs.append(trapezoid(x, a, b, c, d))
        return (lows[0], lows[1], lows[2]), (highs[0], highs[1], highs[2])

    def evaluate(self, x1: float, x2: float, x3: float) -> float:
        """Potential of dissemination for one normalized input triple."""
        l1, u1 = self.memberships(x1)
        l2, u2 = self.memberships(x2)
        l3, u3 = self.memberships(x3)
        centroids = self._rule_centroids
        num = 0.0
        den = 0.0
        for i in range(3):
            a_lo = l1[i]
            a_hi = u1[i]
            if a_hi <= 0.0:
                continue
            base_i = 9 * i
            for j in range(3):
                b_hi = u2[j]
                if b_hi > a_hi:
                    b_hi = a_hi
                if b_hi <= 0.0:
                    continue
                b_lo = l2[j]
                if b_lo > a_lo:
                    b_lo = a_lo
                base_j = base_i + 3 * j
                for k in range(3):
                    hi = u3[k]
                    if hi > b_hi:
                        hi = b_hi
                    if hi <= 0.0:
                        continue
                    lo = l3[k]
                    if lo > b_lo:
                        lo = b_lo
                    mass = lo + hi  # 2x the Nie-Tan midpoint; the factor cancels
                    num += mass * centroids[base_j + k]
                    den += mass
        if den <= 0.0:
            return 0.0
        pod = num / den
        if pod < 0.0:
            return 0.0
        return 1.0 if pod > 1.0 else pod


@lru_cache(maxsize=1)
def default_engine() -> InferenceEngine:
    return InferenceEngine()


def fuzzify(x: float, term: IntervalTerm) -> IntervalMembership:
    """Membership interval of x in one term; stray inputs are clamped with a diagnostic."""
    if x < 0.0 or x > 1.0:
        log.warning("fuzzifier input %r outside [0, 1]; clamping", x)
        x = 0.0 if x < 0.0 else 1.0
    lo, hi = term.membership(x)
    return IntervalMembership(lower=lo, upper=hi)


def fire_rule(rule: Rule, memberships: Sequence[IntervalMembership]) -> IntervalMembership:
    """Firing interval of one rule: boundwise minimum of the antecedent memberships."""
    if len(memberships) != len(rule.antecedents):
        raise ConfigurationError(
            f"rule has {len(rule.antecedents)} antecedents but {len(memberships)} memberships given"
        )
    return IntervalMembership(
        lower=min(m.lower for m in memberships),
        upper=min(m.upper for m in memberships),
    )


def evaluate_pod(
    inputs: Sequence[float],
    terms: Sequence[IntervalTerm] | None = None,
    rules: RuleBase | None = None,
) -> float:
    """One-shot evaluation; prefer holding an InferenceEngine for repeated calls."""
    if len(inputs) != 3:
        raise ConfigurationError(f"the inference engine takes exactly 3 inputs, got {len(inputs)}")
    if terms is None and rules is None:
        engine = default_engine()
    else:
        engine = InferenceEngine(terms=terms, rules=rules)
    return engine.evaluate(*inputs)


def engine_from_config(spec: Mapping) -> InferenceEngine:
    """Build an engine from a parsed configuration mapping.

    Recognized keys: "grid_points"; "terms" mapping label -> {"upper": [a,b,c,d],
    "shrink": f, "height": h} or an explicit {"lower": [a,b,c,d]}; "rules" as a
    list of {"antecedents": [l1, l2, l3], "consequent": label} overrides applied
    on top of the rank-average base.
    """
    term_spec = spec.get("terms", {})
    unknown = set(term_spec) - set(TERM_LABELS)
    if unknown:
        raise ConfigurationError(f"unknown term labels in engine overrides: {sorted(unknown)}")
    terms = []
    defaults = {t.label: t for t in default_terms()}
    for label in TERM_LABELS:
        entry = term_spec.get(label)
        if entry is None:
            terms.append(defaults[label])
            continue
        try:
            upper = tuple(float(v) for v in entry["upper"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"term {label!r}: invalid or missing upper shape") from exc
        if len(upper) != 4:
            raise ConfigurationError(f"term {label!r}: upper shape needs 4 corners, got {upper}")
        height = float(entry.get("height", 0.9))
        if "lower" in entry:
            lower = tuple(float(v) for v in entry["lower"])
            if len(lower) != 4:
                raise ConfigurationError(f"term {label!r}: lower shape needs 4 corners")
            terms.append(IntervalTerm(label=label, upper=upper, lower=lower, height=height))
        else:
            shrink = float(entry.get("shrink", 0.0))
            terms.append(make_term(label, *upper, shrink=shrink, height=height))
    rules = None
    if "rules" in spec:
        table = {r.antecedents: r.consequent for r in default_rule_base().rules}
        for entry in spec["rules"]:
            try:
                antecedents = tuple(str(v) for v in entry["antecedents"])
                consequent = str(entry["consequent"])
            except (KeyError, TypeError) as exc:
                raise ConfigurationError(f"malformed rule override {entry!r}") from exc
            table[antecedents] = consequent
        rules = RuleBase(Rule(a, c) for a, c in table.items())
    grid_points = int(spec.get("grid_points", 101))
    return InferenceEngine(terms=terms, rules=rules, grid_points=grid_points)
