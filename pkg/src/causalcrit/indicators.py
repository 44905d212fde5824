"""Causality indicator functions for judging modeling quality.

Five indicators compare a model's causal account of a phenomenon against an
assumed reality: the average and relative causal effect and the explained
share of the metric (effect side), and three divergence measures over the
emergence side (phenomenon marginal, joint over a node set, and per-node
causal-influence differences).

Every report embeds the conventions it was computed under: log base, KL
argument order, and the numeric codes of the metric categories. The same
inputs therefore reproduce the same value from the report alone.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .context import PhenomenonBinding
from .engine import (
    expectation,
    interventional_backdoor,
    interventional_parent_adjust,
    interventional_truncated,
    make_intervention,
)
from .errors import (
    DivisionByZeroEffect,
    InfiniteDivergence,
    InsufficientInstantiation,
    InvalidQuery,
    NotFullyInstantiated,
    NotIdentifiable,
    NotMarkovian,
    ParentsNotInstantiated,
    PreconditionWarning,
    ValidationError,
    ZeroMeanCriticality,
    ZeroProbabilityCondition,
)
from .graph import CausalStructure, ancestors, enumerate_adjustment_sets
from .model import Cpd, DiscreteModel, build_model, joint_table, make_cpd, marginal1

__all__ = [
    "IndicatorReport",
    "ModelPair",
    "kl_divergence",
    "ace",
    "rce",
    "sigma",
    "rho1",
    "rho2",
    "rho3",
    "causal_influence",
]

LN2 = math.log(2.0)


@dataclass(frozen=True)
class IndicatorReport:
    """One indicator value plus every convention needed to reproduce it."""

    name: str
    value: float
    node_set: tuple[str, ...] = ()
    metadata: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "node_set": list(self.node_set),
            "metadata": self.metadata,
        }


@dataclass(frozen=True)
class ModelPair:
    """Reference plays the role of assumed reality, candidate models it."""

    reference: DiscreteModel
    candidate: DiscreteModel

    def check_shared_specs(self, nodes: Iterable[str]) -> None:
        for n in nodes:
            ref = self.reference.spec_of(n)
            cand = self.candidate.spec_of(n)
            if ref.domain != cand.domain:
                raise ValidationError(
                    f"domain mismatch for {n!r}: {ref.domain} vs {cand.domain}"
                )


def _align(
    p: Union[Sequence[float], Mapping[str, float]],
    q: Union[Sequence[float], Mapping[str, float]],
) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(p, Mapping) != isinstance(q, Mapping):
        raise ValidationError("cannot mix mapping and sequence distributions")
    if isinstance(p, Mapping):
        if set(p) != set(q):
            raise ValidationError("distributions have different supports")
        keys = sorted(p)
        return (
            np.asarray([p[k] for k in keys], dtype=float),
            np.asarray([q[k] for k in keys], dtype=float),
        )
    pa, qa = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    if pa.shape != qa.shape:
        raise ValidationError("distributions have different support sizes")
    return pa, qa


def kl_divergence(
    p: Union[Sequence[float], Mapping[str, float]],
    q: Union[Sequence[float], Mapping[str, float]],
    bits: bool = False,
) -> float:
    """Kullback-Leibler divergence sum p log(p/q), natural log by default.

    Terms with p = 0 contribute nothing; p > 0 against q = 0 raises
    :class:`InfiniteDivergence` instead of silently returning infinity.
    """
    pa, qa = _align(p, q)
    mask = pa > 0.0
    if np.any(qa[mask] == 0.0):
        raise InfiniteDivergence("support of p is not contained in support of q")
    value = float(np.sum(pa[mask] * np.log(pa[mask] / qa[mask])))
    value = max(value, 0.0)
    return value / LN2 if bits else value


def _kl_arrays(p: np.ndarray, q: np.ndarray, bits: bool) -> float:
    mask = p > 0.0
    if np.any(q[mask] == 0.0):
        raise InfiniteDivergence("support of p is not contained in support of q")
    value = float(np.sum(p[mask] * np.log(p[mask] / q[mask])))
    value = max(value, 0.0)
    return value / LN2 if bits else value


def _other_label(m: DiscreteModel, cp: PhenomenonBinding) -> str:
    spec = m.spec_of(cp.variable)
    if spec.cardinality != 2:
        raise InvalidQuery(
            f"phenomenon variable {cp.variable!r} must be binary to negate its label"
        )
    spec.index_of(cp.cp_label)
    return next(c for c in spec.domain if c != cp.cp_label)


def _effect_distributions(
    m: DiscreteModel,
    cp: PhenomenonBinding,
    metric: str,
) -> tuple[dict[str, float], dict[str, float], str]:
    """Interventional metric distributions under do(CP) and do(notCP).

    Prefers the truncated route; on partially instantiated or confounded
    models it falls back to parent adjustment, then to the first enumerable
    back-door set within the instantiated nodes.
    """
    x = cp.variable
    not_label = _other_label(m, cp)
    do_cp = make_intervention({x: cp.cp_label})
    do_not = make_intervention({x: not_label})
    if m.fully_instantiated and m.structure.is_markovian():
        return (
            interventional_truncated(m, do_cp, metric),
            interventional_truncated(m, do_not, metric),
            "truncated",
        )
    try:
        return (
            interventional_parent_adjust(m, do_cp, metric),
            interventional_parent_adjust(m, do_not, metric),
            "parents",
        )
    except (ParentsNotInstantiated, NotMarkovian, ZeroProbabilityCondition):
        pass
    # Last-resort search, scoped to instantiated ancestors of the pair so the
    # subset scan stays bounded; callers with exotic graphs can always compute
    # the two expectations through an explicit back-door set instead.
    scope = ancestors(m.structure, x) | ancestors(m.structure, metric)
    candidates = sorted((m.instantiated & scope) - {x, metric})
    if len(candidates) > 20:
        raise NotIdentifiable(
            f"adjustment-set search space over {len(candidates)} candidates is "
            "too large; compute the effect via an explicit adjustment set"
        )
    for adj in enumerate_adjustment_sets(
        m.structure, x, metric, max_count=64, candidates=candidates
    ):
        try:
            return (
                interventional_backdoor(m, do_cp, metric, adj),
                interventional_backdoor(m, do_not, metric, adj),
                f"backdoor:{sorted(adj)}",
            )
        except (InsufficientInstantiation, ZeroProbabilityCondition):
            continue
    raise NotIdentifiable(
        f"no admissible adjustment set for ({x!r}, {metric!r}) is enumerable "
        "from the instantiated nodes"
    )


def _effect_metadata(m: DiscreteModel, cp: PhenomenonBinding, metric: str, route: str) -> dict:
    spec = m.spec_of(metric)
    return {
        "phenomenon": {"variable": cp.variable, "cp_label": cp.cp_label},
        "metric_codes": {c: spec.codes[i] for i, c in enumerate(spec.domain)},
        "route": route,
    }


def ace(m: DiscreteModel, cp: PhenomenonBinding, metric: str) -> IndicatorReport:
    """Average causal effect: E(metric | do(CP)) - E(metric | do(notCP))."""
    d_cp, d_not, route = _effect_distributions(m, cp, metric)
    e_cp = expectation(d_cp, m, metric)
    e_not = expectation(d_not, m, metric)
    meta = _effect_metadata(m, cp, metric, route)
    meta["e_do_cp"] = e_cp
    meta["e_do_not_cp"] = e_not
    return IndicatorReport("ACE", e_cp - e_not, (cp.variable, metric), meta)


def rce(m: DiscreteModel, cp: PhenomenonBinding, metric: str) -> IndicatorReport:
    """Relative causal effect: E(metric | do(CP)) / E(metric | do(notCP))."""
    d_cp, d_not, route = _effect_distributions(m, cp, metric)
    e_cp = expectation(d_cp, m, metric)
    e_not = expectation(d_not, m, metric)
    if e_not == 0.0:
        raise DivisionByZeroEffect("E(metric | do(notCP)) is zero")
    meta = _effect_metadata(m, cp, metric, route)
    meta["e_do_cp"] = e_cp
    meta["e_do_not_cp"] = e_not
    return IndicatorReport("RCE", e_cp / e_not, (cp.variable, metric), meta)


def sigma(m: DiscreteModel, cp: PhenomenonBinding, metric: str) -> IndicatorReport:
    """Explained share of measured criticality: 1 - E(metric|do(notCP)) / E(metric).

    The definition presumes E(do notCP) <= E(do CP); a violation downgrades
    to a warning and the value is still reported.
    """
    d_cp, d_not, route = _effect_distributions(m, cp, metric)
    e_cp = expectation(d_cp, m, metric)
    e_not = expectation(d_not, m, metric)
    e_obs = expectation(marginal1(m, metric), m, metric)
    if e_obs == 0.0:
        raise ZeroMeanCriticality("observational E(metric) is zero")
    meta = _effect_metadata(m, cp, metric, route)
    meta["e_do_cp"] = e_cp
    meta["e_do_not_cp"] = e_not
    meta["e_observational"] = e_obs
    meta["precondition_holds"] = e_not <= e_cp
    if e_not > e_cp:
        warnings.warn(
            f"sigma precondition violated: E(do notCP)={e_not} exceeds "
            f"E(do CP)={e_cp}; value reported anyway",
            PreconditionWarning,
            stacklevel=2,
        )
    return IndicatorReport("sigma", 1.0 - e_not / e_obs, (cp.variable, metric), meta)


def rho1(pair: ModelPair, cp: PhenomenonBinding, bits: bool = False) -> IndicatorReport:
    """KL of the phenomenon marginal, candidate (model) against reference."""
    pair.check_shared_specs([cp.variable])
    p_cand = _submarginal(pair.candidate, cp.variable)
    p_ref = _submarginal(pair.reference, cp.variable)
    value = kl_divergence(p_cand, p_ref, bits=bits)
    meta = {
        "log_base": "bits" if bits else "nats",
        "kl_order": "candidate||reference",
        "candidate_marginal": p_cand,
        "reference_marginal": p_ref,
        "reverse_value": kl_divergence(p_ref, p_cand, bits=bits),
    }
    return IndicatorReport("rho1", value, (cp.variable,), meta)


def _submarginal(m: DiscreteModel, node: str) -> dict[str, float]:
    names, arr = joint_table(m, over={node})
    axis = names.index(node)
    reduced = arr.sum(axis=tuple(i for i in range(len(names)) if i != axis))
    spec = m.spec_of(node)
    return {c: float(reduced[i]) for i, c in enumerate(spec.domain)}


def _joint_over(m: DiscreteModel, nodes: Sequence[str]) -> np.ndarray:
    """Exact joint over ``nodes`` (sorted order), other variables summed out."""
    names, arr = joint_table(m, over=set(nodes))
    keep = sorted(nodes)
    axes = tuple(i for i, n in enumerate(names) if n not in set(keep))
    reduced = arr.sum(axis=axes) if axes else arr
    return reduced


def rho2(pair: ModelPair, nodes: Iterable[str], bits: bool = False) -> IndicatorReport:
    """KL between the joints over a node set, candidate against reference.

    Both directions are informative; the default takes the candidate first
    and the reverse direction always rides along in the metadata.
    """
    node_list = tuple(sorted(set(nodes)))
    if not node_list:
        raise InvalidQuery("rho2 needs a non-empty node set")
    pair.check_shared_specs(node_list)
    q = _joint_over(pair.candidate, node_list).ravel()
    p = _joint_over(pair.reference, node_list).ravel()
    value = _kl_arrays(q, p, bits)
    meta = {
        "log_base": "bits" if bits else "nats",
        "kl_order": "candidate||reference",
        "reverse_value": _kl_arrays(p, q, bits),
    }
    return IndicatorReport("rho2", value, node_list, meta)


def _cut_model(m: DiscreteModel, edges: Sequence[tuple[str, str]]) -> DiscreteModel:
    """Replace, per child, the influence along each cut edge by an independent
    draw from the parent's marginal."""
    by_child: dict[str, list[str]] = {}
    for a, b in edges:
        by_child.setdefault(b, []).append(a)
    new_cpds: list[Cpd] = []
    structure = m.structure
    for node, cpd in m.cpds.items():
        cut = sorted(set(by_child.get(node, ())))
        if not cut:
            new_cpds.append(cpd)
            continue
        parents = list(cpd.parents)
        t = cpd.table.reshape(
            [m.specs[p].cardinality for p in parents] + [m.specs[node].cardinality]
        )
        for p in sorted(cut, key=parents.index, reverse=True):
            axis = parents.index(p)
            marg = np.asarray(
                [_submarginal(m, p)[c] for c in m.specs[p].domain], dtype=float
            )
            t = np.tensordot(marg, t, axes=(0, axis))
            parents.remove(p)
        kept = tuple(parents)
        table = t.reshape(-1, m.specs[node].cardinality)
        new_cpds.append(make_cpd(node, kept, table, m.specs))
    directed = frozenset(e for e in structure.directed if e not in set(edges))
    cut_structure = CausalStructure(
        nodes=structure.nodes,
        latent=structure.latent,
        directed=directed,
        bidirected=structure.bidirected,
    )
    return build_model(cut_structure, m.specs, new_cpds)


def causal_influence(
    m: DiscreteModel,
    edges: Iterable[tuple[str, str]],
    bits: bool = False,
) -> float:
    """KL between the joint and the joint with the given edges cut.

    Cutting an edge feeds the child an independent copy of the parent's
    marginal instead of its actual value. The influence of the empty edge set
    is zero.
    """
    if not m.structure.is_markovian():
        raise NotMarkovian("causal influence is defined for Markovian models")
    if not m.fully_instantiated:
        raise NotFullyInstantiated("causal influence needs a fully instantiated model")
    edge_list = sorted(set(tuple(e) for e in edges))
    for e in edge_list:
        if e not in m.structure.directed:
            raise InvalidQuery(f"edge {e!r} is not in the structure")
    if not edge_list:
        return 0.0
    cut = _cut_model(m, edge_list)
    names, p = joint_table(m)
    names_cut, q = joint_table(cut)
    assert names == names_cut
    return _kl_arrays(p.ravel(), q.ravel(), bits)


def _induced_submodel(m: DiscreteModel, nodes: Sequence[str]) -> DiscreteModel:
    """Sub-model over ``nodes``: induced edges, CPDs conditioned on kept parents.

    Each kept node's CPD becomes its exact conditional given the parents that
    survive the restriction, derived from the full joint. This treats the
    restricted joint as factorizing over the induced DAG, which is a
    sensitivity-analysis view rather than a marginalization theorem.
    """
    keep = sorted(set(nodes))
    keep_set = set(keep)
    for n in keep:
        m.spec_of(n)
    directed = frozenset(
        e for e in m.structure.directed if e[0] in keep_set and e[1] in keep_set
    )
    sub_structure = CausalStructure(
        nodes=tuple(keep),
        latent=frozenset(m.structure.latent & keep_set),
        directed=directed,
        bidirected=frozenset(
            p for p in m.structure.bidirected if p <= keep_set
        ),
    )
    sub_specs = {n: m.specs[n] for n in keep}
    cpds: list[Cpd] = []
    for n in keep:
        pa = tuple(sorted(p for p in m.structure.parents(n) if p in keep_set))
        involved = list(pa) + [n]
        joint = _joint_over(m, involved)  # axes follow sorted(involved)
        order = sorted(involved)
        axis_of = {v: i for i, v in enumerate(order)}
        perm = [axis_of[v] for v in involved]
        joint = np.transpose(joint, perm)
        card = m.specs[n].cardinality
        flat = joint.reshape(-1, card)
        totals = flat.sum(axis=1)
        if np.any(totals == 0.0):
            raise ZeroProbabilityCondition(
                f"cannot condition {n!r} on a zero-probability parent configuration"
            )
        cpds.append(make_cpd(n, pa, flat / totals[:, None], sub_specs))
    return build_model(sub_structure, sub_specs, cpds)


def rho3(
    pair: ModelPair,
    nodes: Iterable[str],
    cp: PhenomenonBinding,
    restrict_to_set: bool = False,
    bits: bool = False,
) -> IndicatorReport:
    """L2 norm of per-node causal-influence differences over a node set.

    For each node except the phenomenon variable, the influence of its
    outgoing edges is computed in the reference and the candidate; the
    component is their difference. By default outgoing edges are taken in
    each model's full graph; with ``restrict_to_set`` both models are first
    restricted to the node set and edges are taken in the induced sub-model.
    """
    node_list = tuple(sorted(set(nodes)))
    pair.check_shared_specs(node_list)
    component_nodes = [n for n in node_list if n != cp.variable]
    if restrict_to_set:
        ref = _induced_submodel(pair.reference, node_list)
        cand = _induced_submodel(pair.candidate, node_list)
    else:
        ref = pair.reference
        cand = pair.candidate
    components: dict[str, float] = {}
    influences: dict[str, dict[str, float]] = {"reference": {}, "candidate": {}}
    for n in component_nodes:
        out_ref = [e for e in ref.structure.directed if e[0] == n]
        out_cand = [e for e in cand.structure.directed if e[0] == n]
        i_ref = causal_influence(ref, out_ref, bits=bits)
        i_cand = causal_influence(cand, out_cand, bits=bits)
        influences["reference"][n] = i_ref
        influences["candidate"][n] = i_cand
        components[n] = i_ref - i_cand
    value = math.sqrt(sum(v * v for v in components.values()))
    meta = {
        "log_base": "bits" if bits else "nats",
        "semantics": "restricted-to-set" if restrict_to_set else "full-graph",
        "components": components,
        "influences": influences,
        "phenomenon": cp.variable,
    }
    return IndicatorReport("rho3", value, node_list, meta)
