"""Categorical variables, CPD tables, exact enumeration, sampling, estimation.

Models are immutable after construction. All probability computations are
exact: the joint is materialized as a dense array over the instantiated
nodes, which is rejected above a configurable state-space bound instead of
being silently approximated.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import (
    EmptyDataset,
    InsufficientInstantiation,
    InvalidQuery,
    NotFullyInstantiated,
    StateSpaceExceeded,
    UnknownCategory,
    UnknownLabel,
    UnknownNode,
    UnseenParentConfigurationWarning,
    ValidationError,
    ZeroProbabilityCondition,
)
from .graph import CausalStructure

__all__ = [
    "VariableSpec",
    "Cpd",
    "DiscreteModel",
    "Dataset",
    "build_model",
    "make_cpd",
    "joint_probability",
    "marginal",
    "marginal1",
    "sample",
    "estimate_cpds",
    "DEFAULT_STATE_SPACE_LIMIT",
]

DEFAULT_STATE_SPACE_LIMIT = 1 << 24

ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class VariableSpec:
    """A categorical variable: ordered labels, one numeric code per label.

    ``value_range`` and ``unit`` carry the declared range/unit as free text;
    they document measurability and are not interpreted numerically.
    """

    name: str
    domain: tuple[str, ...]
    codes: tuple[float, ...]
    unit: str = "1"
    value_range: str = ""

    def __post_init__(self):
        if not self.name:
            raise ValidationError("variable name must be non-empty")
        if len(self.domain) < 1:
            raise ValidationError(f"{self.name}: domain must have at least one label")
        if len(set(self.domain)) != len(self.domain):
            raise ValidationError(f"{self.name}: duplicate labels in domain")
        if len(self.codes) != len(self.domain):
            raise ValidationError(f"{self.name}: need one code per label")
        if not all(math.isfinite(c) for c in self.codes):
            raise ValidationError(f"{self.name}: codes must be finite")

    @property
    def cardinality(self) -> int:
        return len(self.domain)

    def index_of(self, label: str) -> int:
        try:
            return self.domain.index(label)
        except ValueError:
            raise UnknownCategory(f"{label!r} is not a category of {self.name!r}")

    def code_of(self, label: str) -> float:
        return self.codes[self.index_of(label)]


@dataclass(frozen=True, eq=False)
class Cpd:
    """P(child | parents) as a row-per-parent-configuration table.

    Parents are ordered by sorted name; configurations enumerate in C order
    with the rightmost parent varying fastest. Rows sum to one.
    """

    child: str
    parents: tuple[str, ...]
    table: np.ndarray  # shape (#parent configurations, child cardinality)

    def row_index(self, parent_cards: Sequence[int], parent_idx: Sequence[int]) -> int:
        if not self.parents:
            return 0
        return int(np.ravel_multi_index(tuple(parent_idx), tuple(parent_cards)))


def make_cpd(
    child: str,
    parents: Sequence[str],
    table: Iterable[Iterable[float]],
    specs: Mapping[str, VariableSpec],
) -> Cpd:
    """Validate a CPD against the variable specs."""
    parent_list = tuple(parents)
    if tuple(sorted(parent_list)) != parent_list:
        raise ValidationError(f"CPD for {child!r}: parents must be name-sorted")
    for name in (child, *parent_list):
        if name not in specs:
            raise UnknownNode(f"CPD for {child!r} references unknown node {name!r}")
    arr = np.asarray([[float(v) for v in row] for row in table], dtype=float)
    if arr.ndim != 2:
        raise ValidationError(f"CPD for {child!r}: table must be a list of rows")
    n_cfg = int(np.prod([specs[p].cardinality for p in parent_list], dtype=np.int64)) if parent_list else 1
    card = specs[child].cardinality
    if arr.shape != (n_cfg, card):
        raise ValidationError(
            f"CPD for {child!r}: expected {n_cfg} rows x {card} columns, got {arr.shape}"
        )
    if np.any(arr < -ROW_SUM_TOL) or np.any(arr > 1 + ROW_SUM_TOL):
        raise ValidationError(f"CPD for {child!r}: entries must lie in [0, 1]")
    sums = arr.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > ROW_SUM_TOL):
        bad = int(np.argmax(np.abs(sums - 1.0)))
        raise ValidationError(
            f"CPD for {child!r}: row {bad} sums to {sums[bad]!r}, expected 1"
        )
    arr.setflags(write=False)
    return Cpd(child=child, parents=parent_list, table=arr)


@dataclass(frozen=True, eq=False)
class DiscreteModel:
    """A causal structure with specs for every node and CPDs for a subset N.

    The model is fully instantiated when N equals the non-latent node set.
    """

    structure: CausalStructure
    specs: Mapping[str, VariableSpec]
    cpds: Mapping[str, Cpd]

    @property
    def instantiated(self) -> frozenset[str]:
        return frozenset(self.cpds)

    @property
    def fully_instantiated(self) -> bool:
        observed = {n for n in self.structure.nodes if n not in self.structure.latent}
        return self.instantiated == observed

    def spec_of(self, node: str) -> VariableSpec:
        try:
            return self.specs[node]
        except KeyError:
            raise UnknownNode(f"unknown node {node!r}")


@dataclass(frozen=True)
class Dataset:
    """Rectangular table of category labels, one column per variable."""

    columns: tuple[str, ...]
    records: tuple[tuple[str, ...], ...]
    provenance: str = "fixture"

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> tuple[str, ...]:
        idx = self.columns.index(name)
        return tuple(row[idx] for row in self.records)


def make_dataset(
    columns: Sequence[str],
    records: Iterable[Sequence[str]],
    specs: Mapping[str, VariableSpec],
    provenance: str = "fixture",
) -> Dataset:
    cols = tuple(columns)
    for c in cols:
        if c not in specs:
            raise UnknownNode(f"dataset column {c!r} has no variable spec")
    rows = []
    for r, row in enumerate(records):
        row = tuple(row)
        if len(row) != len(cols):
            raise ValidationError(f"row {r} has {len(row)} cells, expected {len(cols)}")
        for c, label in zip(cols, row):
            if label not in specs[c].domain:
                raise UnknownLabel(r, c, label)
        rows.append(row)
    return Dataset(columns=cols, records=tuple(rows), provenance=provenance)


def build_model(
    structure: CausalStructure,
    specs: Mapping[str, VariableSpec],
    cpds: Iterable[Cpd] = (),
) -> DiscreteModel:
    """Validate spec coverage and CPD/graph consistency, then freeze the model."""
    spec_map = dict(specs)
    for node in structure.nodes:
        if node not in spec_map:
            raise ValidationError(f"no variable spec for node {node!r}")
    for name, sp in spec_map.items():
        if name not in structure.nodes:
            raise UnknownNode(f"spec for undeclared node {name!r}")
        if sp.name != name:
            raise ValidationError(f"spec name {sp.name!r} filed under {name!r}")
    cpd_map: dict[str, Cpd] = {}
    for cpd in cpds:
        if cpd.child in cpd_map:
            raise ValidationError(f"duplicate CPD for {cpd.child!r}")
        expected = tuple(sorted(structure.parents(cpd.child)))
        if cpd.parents != expected:
            raise ValidationError(
                f"CPD for {cpd.child!r} conditions on {cpd.parents}, "
                f"graph parents are {expected}"
            )
        cpd_map[cpd.child] = cpd
    return DiscreteModel(structure=structure, specs=spec_map, cpds=cpd_map)


def _require_fully_instantiated(m: DiscreteModel) -> None:
    if not m.fully_instantiated:
        missing = sorted(
            n
            for n in m.structure.nodes
            if n not in m.structure.latent and n not in m.cpds
        )
        raise NotFullyInstantiated(f"missing CPDs for {missing}")


def _closure_within(m: DiscreteModel, over: Iterable[str]) -> tuple[str, ...]:
    """Ancestral closure of ``over``; every member must carry a CPD."""
    needed = set(over)
    frontier = list(needed)
    while frontier:
        node = frontier.pop()
        for p in m.structure.parents(node):
            if p not in needed:
                needed.add(p)
                frontier.append(p)
    missing = sorted(n for n in needed if n not in m.cpds)
    if missing:
        raise InsufficientInstantiation(
            f"need CPDs for {missing} to enumerate over {sorted(set(over))}"
        )
    return tuple(sorted(needed))


def joint_table(
    m: DiscreteModel,
    over: Optional[Iterable[str]] = None,
    state_space_limit: int = DEFAULT_STATE_SPACE_LIMIT,
) -> tuple[tuple[str, ...], np.ndarray]:
    """Exact joint over the ancestral closure of ``over`` (default: all of N).

    Returns the sorted node tuple and a dense array whose axes follow it.
    """
    if over is None:
        names = _closure_within(m, m.instantiated)
    else:
        names = _closure_within(m, over)
    cards = [m.specs[n].cardinality for n in names]
    size = 1
    for c in cards:
        size *= c
        if size > state_space_limit:
            raise StateSpaceExceeded(
                f"joint over {len(names)} nodes exceeds {state_space_limit} states"
            )
    arr = np.ones(cards, dtype=float)
    pos = {n: i for i, n in enumerate(names)}
    for node in names:
        cpd = m.cpds[node]
        involved = list(cpd.parents) + [node]
        t = cpd.table.reshape([m.specs[p].cardinality for p in cpd.parents] + [m.specs[node].cardinality])
        order = sorted(involved, key=lambda n: pos[n])
        t = np.transpose(t, [involved.index(n) for n in order])
        shape = [m.specs[n].cardinality if n in involved else 1 for n in names]
        arr = arr * t.reshape(shape)
    return names, arr


def joint_probability(m: DiscreteModel, assignment: Mapping[str, str]) -> float:
    """Probability of one full assignment via the Markov factorization."""
    _require_fully_instantiated(m)
    for node in m.instantiated:
        if node not in assignment:
            raise UnknownCategory(f"assignment misses instantiated node {node!r}")
    prob = 1.0
    for node in m.instantiated:
        cpd = m.cpds[node]
        child_idx = m.specs[node].index_of(assignment[node])
        parent_cards = [m.specs[p].cardinality for p in cpd.parents]
        parent_idx = [m.specs[p].index_of(assignment[p]) for p in cpd.parents]
        prob *= float(cpd.table[cpd.row_index(parent_cards, parent_idx), child_idx])
    return prob


def _dist_from_array(
    names: tuple[str, ...],
    arr: np.ndarray,
    targets: Sequence[str],
    given: Mapping[str, str],
    specs: Mapping[str, VariableSpec],
) -> dict[tuple[str, ...], float]:
    idx: list = []
    for n in names:
        if n in given:
            idx.append(specs[n].index_of(given[n]))
        else:
            idx.append(slice(None))
    sliced = arr[tuple(idx)]
    kept = [n for n in names if n not in given]
    total = float(sliced.sum())
    if given:
        if total <= 0.0:
            raise ZeroProbabilityCondition(f"conditioning event {dict(given)} has probability 0")
        sliced = sliced / total
    sum_axes = tuple(i for i, n in enumerate(kept) if n not in targets)
    reduced = sliced.sum(axis=sum_axes) if sum_axes else sliced
    kept_targets = [n for n in kept if n in targets]
    out: dict[tuple[str, ...], float] = {}
    for combo in np.ndindex(*reduced.shape):
        labels = tuple(specs[n].domain[i] for n, i in zip(kept_targets, combo))
        out[labels] = float(reduced[combo])
    return out


def marginal(
    m: DiscreteModel,
    targets: Sequence[str],
    given: Optional[Mapping[str, str]] = None,
) -> dict[tuple[str, ...], float]:
    """Exact (conditional) marginal over ``targets`` by enumeration.

    Keys are label tuples following sorted target order.
    """
    _require_fully_instantiated(m)
    given = dict(given or {})
    target_list = sorted(set(targets))
    if not target_list:
        raise InvalidQuery("marginal requires at least one target node")
    for n in list(given) + target_list:
        m.spec_of(n)
        if n not in m.instantiated:
            raise InsufficientInstantiation(f"{n!r} carries no CPD")
    overlap = set(target_list) & set(given)
    if overlap:
        raise InvalidQuery(
            f"targets {sorted(overlap)} also appear in the conditioning event"
        )
    for n, label in given.items():
        m.spec_of(n).index_of(label)
    names, arr = joint_table(m)
    return _dist_from_array(names, arr, target_list, given, m.specs)


def marginal1(
    m: DiscreteModel,
    target: str,
    given: Optional[Mapping[str, str]] = None,
) -> dict[str, float]:
    """Single-variable convenience wrapper around :func:`marginal`."""
    dist = marginal(m, [target], given)
    return {labels[0]: p for labels, p in dist.items()}


def sample(m: DiscreteModel, n: int, seed: int) -> Dataset:
    """Ancestral forward sampling; deterministic for a fixed seed."""
    _require_fully_instantiated(m)
    order = [
        node for node in m.structure.topological_order() if node in m.instantiated
    ]
    _closure_within(m, m.instantiated)
    rng = np.random.default_rng(seed)
    columns = tuple(sorted(order))
    if n == 0:
        return Dataset(columns=columns, records=(), provenance="synthetic")
    drawn: dict[str, np.ndarray] = {}
    for node in order:
        cpd = m.cpds[node]
        card = m.specs[node].cardinality
        if cpd.parents:
            parent_cards = [m.specs[p].cardinality for p in cpd.parents]
            cfg = np.ravel_multi_index(
                tuple(drawn[p] for p in cpd.parents), tuple(parent_cards)
            )
            probs = cpd.table[cfg]
        else:
            probs = np.broadcast_to(cpd.table[0], (n, card))
        cdf = np.cumsum(probs, axis=1)
        u = rng.random(n)
        drawn[node] = np.minimum((cdf < u[:, None]).sum(axis=1), card - 1)
    label_arrays = {
        node: np.asarray(m.specs[node].domain, dtype=object)[drawn[node]]
        for node in order
    }
    records = tuple(
        tuple(label_arrays[c][i] for c in columns) for i in range(n)
    )
    return Dataset(columns=columns, records=records, provenance="synthetic")


def estimate_cpds(
    structure: CausalStructure,
    specs: Mapping[str, VariableSpec],
    dataset: Dataset,
    smoothing: float = 0.0,
) -> DiscreteModel:
    """Maximum-likelihood CPD estimation with optional additive smoothing.

    Every node whose own column and all parent columns are present gets a CPD
    of (count + a) / (row total + a * |child domain|). With smoothing a = 0, a
    parent configuration that never occurs leaves the row undefined: the node
    is dropped from the instantiated set and an
    :class:`UnseenParentConfigurationWarning` is emitted per empty row.
    """
    if smoothing < 0:
        raise ValidationError("smoothing must be >= 0")
    if len(dataset) == 0:
        raise EmptyDataset("cannot estimate CPDs from an empty dataset")
    present = set(dataset.columns)
    for c in dataset.columns:
        if c not in specs:
            raise UnknownNode(f"dataset column {c!r} is not a structure variable")

    encoded: dict[str, np.ndarray] = {}
    for pos, c in enumerate(dataset.columns):
        lookup = {label: i for i, label in enumerate(specs[c].domain)}
        try:
            encoded[c] = np.fromiter(
                (lookup[row[pos]] for row in dataset.records),
                dtype=np.int64,
                count=len(dataset),
            )
        except KeyError as exc:
            raise UnknownCategory(
                f"column {c!r} contains label {exc.args[0]!r} outside its domain"
            ) from None

    cpds: list[Cpd] = []
    for node in structure.nodes:
        parents = tuple(sorted(structure.parents(node)))
        if node not in present or any(p not in present for p in parents):
            continue
        card = specs[node].cardinality
        if parents:
            parent_cards = [specs[p].cardinality for p in parents]
            cfg = np.ravel_multi_index(
                tuple(encoded[p] for p in parents), tuple(parent_cards)
            )
            n_cfg = int(np.prod(parent_cards, dtype=np.int64))
        else:
            cfg = np.zeros(len(dataset), dtype=np.int64)
            n_cfg = 1
        flat = cfg * card + encoded[node]
        counts = np.bincount(flat, minlength=n_cfg * card).reshape(n_cfg, card)
        counts = counts.astype(float) + smoothing
        totals = counts.sum(axis=1)
        empty_rows = np.flatnonzero(totals == 0.0)
        if empty_rows.size:
            for r in empty_rows:
                labels = _config_labels(parents, specs, int(r))
                warnings.warn(
                    f"node {node!r}: no observations for parent configuration "
                    f"{labels}; node left uninstantiated",
                    UnseenParentConfigurationWarning,
                    stacklevel=2,
                )
            continue
        table = counts / totals[:, None]
        cpds.append(make_cpd(node, parents, table, specs))
    return build_model(structure, specs, cpds)


def _config_labels(
    parents: tuple[str, ...],
    specs: Mapping[str, VariableSpec],
    row: int,
) -> dict[str, str]:
    if not parents:
        return {}
    cards = [specs[p].cardinality for p in parents]
    idx = np.unravel_index(row, tuple(cards))
    return {p: specs[p].domain[i] for p, i in zip(parents, idx)}
