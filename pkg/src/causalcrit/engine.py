"""Interventional distributions via three interchangeable routes.

Graph surgery with truncated factorization, adjustment on the intervened
node's parents, and back-door adjustment all identify the same effect on a
fully instantiated Markovian model; the latter two also work on partially
instantiated models as long as the required conditionals are enumerable from
the instantiated set.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .context import PhenomenonBinding
from .errors import (
    InsufficientInstantiation,
    InvalidQuery,
    NotAdmissible,
    NotMarkovian,
    ParentsNotInstantiated,
    TargetNotAncestorWarning,
    ZeroProbabilityCondition,
)
from .graph import ancestors, backdoor_admissible, do_surgery
from .model import (
    Cpd,
    DiscreteModel,
    build_model,
    joint_table,
    make_cpd,
    marginal1,
)

__all__ = [
    "Intervention",
    "SafetyPrinciple",
    "SafetyPrincipleReport",
    "make_intervention",
    "interventional_truncated",
    "interventional_parent_adjust",
    "interventional_backdoor",
    "interventional_expectation",
    "expectation",
    "evaluate_safety_principle",
]


@dataclass(frozen=True)
class Intervention:
    """An atomic do(X = x), possibly over several nodes at once."""

    assignments: tuple[tuple[str, str], ...]

    def __len__(self) -> int:
        return len(self.assignments)

    def as_dict(self) -> dict[str, str]:
        return dict(self.assignments)

    def targets(self) -> tuple[str, ...]:
        return tuple(node for node, _ in self.assignments)


def make_intervention(assignments: Mapping[str, str]) -> Intervention:
    return Intervention(assignments=tuple(sorted(assignments.items())))


@dataclass(frozen=True)
class SafetyPrinciple:
    """A named intervention expected to lower phenomenon probability or impact."""

    name: str
    intervention: Intervention
    rationale: str = ""

    def __post_init__(self):
        if not self.intervention.assignments:
            raise InvalidQuery("a safety principle needs a non-empty intervention")


def _check_intervention(m: DiscreteModel, i: Intervention) -> None:
    seen = set()
    for node, label in i.assignments:
        if node in seen:
            raise InvalidQuery(f"intervention assigns {node!r} twice")
        seen.add(node)
        m.spec_of(node).index_of(label)


def _point_mass_cpd(m: DiscreteModel, node: str, label: str) -> Cpd:
    spec = m.spec_of(node)
    row = [0.0] * spec.cardinality
    row[spec.index_of(label)] = 1.0
    return make_cpd(node, (), [row], m.specs)


def interventional_truncated(
    m: DiscreteModel,
    i: Intervention,
    target: str,
) -> dict[str, float]:
    """P(target | do(i)) by graph surgery and truncated factorization.

    Requires a Markovian, fully instantiated model; the empty intervention
    reproduces the observational marginal exactly.
    """
    if not m.structure.is_markovian():
        raise NotMarkovian("truncated factorization needs independent error terms")
    _check_intervention(m, i)
    m.spec_of(target)
    if not i.assignments:
        return marginal1(m, target)
    clamped = i.as_dict()
    if target in clamped:
        spec = m.spec_of(target)
        return {c: 1.0 if c == clamped[target] else 0.0 for c in spec.domain}
    surgered = do_surgery(m.structure, clamped)
    new_cpds = []
    for node, cpd in m.cpds.items():
        if node in clamped:
            new_cpds.append(_point_mass_cpd(m, node, clamped[node]))
        else:
            new_cpds.append(cpd)
    post = build_model(surgered, m.specs, new_cpds)
    return marginal1(post, target)


def _single_target(i: Intervention) -> tuple[str, str]:
    if len(i.assignments) != 1:
        raise InvalidQuery(
            "adjustment formulas are stated for single-node interventions; "
            "use the truncated route for multi-node do()"
        )
    return i.assignments[0]


def _adjusted_distribution(
    m: DiscreteModel,
    x: str,
    x_label: str,
    target: str,
    adjustment: Sequence[str],
) -> dict[str, float]:
    """Sum_s P(target | x, s) P(s) over the exact sub-joint.

    Configurations with P(s) = 0 contribute nothing and are skipped; a
    conditioning event P(x, s) = 0 with P(s) > 0 is an error rather than NaN.
    """
    adj = tuple(sorted(set(adjustment)))
    names, arr = joint_table(m, over=set(adj) | {x, target})
    pos = {n: k for k, n in enumerate(names)}
    spec_t = m.spec_of(target)
    spec_x = m.spec_of(x)
    x_idx = spec_x.index_of(x_label)

    out = np.zeros(spec_t.cardinality)
    adj_cards = [m.spec_of(a).cardinality for a in adj]
    for combo in np.ndindex(*adj_cards) if adj else [()]:
        idx: list = [slice(None)] * len(names)
        for a, ci in zip(adj, combo):
            idx[pos[a]] = ci
        block = arr[tuple(idx)]
        p_s = float(block.sum())
        if p_s == 0.0:
            continue
        idx[pos[x]] = x_idx
        block_x = arr[tuple(idx)]
        p_xs = float(block_x.sum())
        if p_xs == 0.0:
            raise ZeroProbabilityCondition(
                f"P({x}={x_label}, {dict(zip(adj, combo))}) = 0; conditional undefined"
            )
        remaining = [n for n in names if n not in adj and n != x]
        if target in remaining:
            axes = tuple(k for k, n in enumerate(remaining) if n != target)
            cond = block_x.sum(axis=axes) / p_xs if axes else block_x / p_xs
            out += p_s * np.asarray(cond, dtype=float)
        else:
            # target fixed by the configuration (it is x or in the set)
            t_idx = combo[adj.index(target)] if target in adj else x_idx
            out[t_idx] += p_s
    return {c: float(out[k]) for k, c in enumerate(spec_t.domain)}


def interventional_parent_adjust(
    m: DiscreteModel,
    i: Intervention,
    target: str,
) -> dict[str, float]:
    """P(target | do(x)) = sum over parent configurations of
    P(target | x, pa) P(pa); partial instantiation suffices when the parents,
    the intervened node and the target are enumerable from the instantiated
    set.
    """
    _check_intervention(m, i)
    x, x_label = _single_target(i)
    m.spec_of(target)
    parents = tuple(sorted(m.structure.parents(x)))
    if m.structure.confounded_with(x):
        raise NotMarkovian(
            f"{x!r} carries a confounding arc; its observed parents do not "
            "suffice for adjustment"
        )
    if target == x:
        spec = m.spec_of(target)
        return {c: 1.0 if c == x_label else 0.0 for c in spec.domain}
    try:
        return _adjusted_distribution(m, x, x_label, target, parents)
    except InsufficientInstantiation as exc:
        raise ParentsNotInstantiated(str(exc)) from None


def interventional_backdoor(
    m: DiscreteModel,
    i: Intervention,
    target: str,
    adjustment: Iterable[str],
) -> dict[str, float]:
    """Back-door adjustment; admissibility is verified, never assumed."""
    _check_intervention(m, i)
    x, x_label = _single_target(i)
    m.spec_of(target)
    adj = sorted(set(adjustment))
    if not backdoor_admissible(m.structure, adj, x, target):
        raise NotAdmissible(
            f"{adj} does not satisfy the back-door criterion for ({x!r}, {target!r})"
        )
    return _adjusted_distribution(m, x, x_label, target, adj)


def expectation(dist: Mapping[str, float], m: DiscreteModel, node: str) -> float:
    """Expected numeric code of ``node`` under a distribution over its labels."""
    spec = m.spec_of(node)
    return float(sum(spec.code_of(label) * p for label, p in dist.items()))


def interventional_expectation(
    m: DiscreteModel,
    i: Intervention,
    target: str,
    route: str = "auto",
    adjustment: Optional[Iterable[str]] = None,
) -> float:
    """E(target | do(i)) using numeric category codes.

    The empty intervention yields the observational expectation. Routes:
    ``truncated``, ``parents``, ``backdoor`` (needs ``adjustment``), or
    ``auto`` which prefers the truncated route and falls back to parent
    adjustment on partially instantiated models.
    """
    if not i.assignments:
        return expectation(marginal1(m, target), m, target)
    if route == "truncated":
        dist = interventional_truncated(m, i, target)
    elif route == "parents":
        dist = interventional_parent_adjust(m, i, target)
    elif route == "backdoor":
        if adjustment is None:
            raise InvalidQuery("backdoor route needs an adjustment set")
        dist = interventional_backdoor(m, i, target, adjustment)
    elif route == "auto":
        if m.fully_instantiated and m.structure.is_markovian():
            dist = interventional_truncated(m, i, target)
        else:
            dist = interventional_parent_adjust(m, i, target)
    else:
        raise InvalidQuery(f"unknown route {route!r}")
    return expectation(dist, m, target)


@dataclass(frozen=True)
class SafetyPrincipleReport:
    principle: str
    delta_p_phenomenon: float
    delta_metric_expectation: float
    p_phenomenon_baseline: float
    p_phenomenon_intervened: float
    metric_expectation_baseline: float
    metric_expectation_intervened: float
    notes: tuple[str, ...] = ()


def evaluate_safety_principle(
    m: DiscreteModel,
    sp: SafetyPrinciple,
    cp: PhenomenonBinding,
    metric: str,
) -> SafetyPrincipleReport:
    """Effect of a safety principle on phenomenon probability and metric mean.

    Reports P(X = CP | do(sp)) - P(X = CP) and E(metric | do(sp)) - E(metric).
    A principle whose targets influence neither the phenomenon nor the metric
    triggers a warning instead of an error, since principles may act
    downstream of the phenomenon.
    """
    spec_x = m.spec_of(cp.variable)
    if spec_x.cardinality != 2:
        raise InvalidQuery(
            f"phenomenon variable {cp.variable!r} must be binary, "
            f"has {spec_x.cardinality} categories"
        )
    spec_x.index_of(cp.cp_label)
    m.spec_of(metric)
    _check_intervention(m, sp.intervention)

    notes: list[str] = []
    influence_scope = (
        ancestors(m.structure, cp.variable)
        | {cp.variable}
        | ancestors(m.structure, metric)
        | {metric}
    )
    off_target = [t for t in sp.intervention.targets() if t not in influence_scope]
    if len(off_target) == len(sp.intervention.targets()):
        message = (
            f"safety principle {sp.name!r} targets {off_target}, none of which "
            f"influence {cp.variable!r} or {metric!r}"
        )
        warnings.warn(message, TargetNotAncestorWarning, stacklevel=2)
        notes.append(message)

    baseline_p = marginal1(m, cp.variable)[cp.cp_label]
    baseline_e = expectation(marginal1(m, metric), m, metric)
    p_do = interventional_truncated(m, sp.intervention, cp.variable)[cp.cp_label]
    e_do = expectation(
        interventional_truncated(m, sp.intervention, metric), m, metric
    )
    return SafetyPrincipleReport(
        principle=sp.name,
        delta_p_phenomenon=p_do - baseline_p,
        delta_metric_expectation=e_do - baseline_e,
        p_phenomenon_baseline=baseline_p,
        p_phenomenon_intervened=p_do,
        metric_expectation_baseline=baseline_e,
        metric_expectation_intervened=e_do,
        notes=tuple(notes),
    )
