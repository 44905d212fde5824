import math
import random

import numpy as np
import pytest

from causalcrit.context import PhenomenonBinding
from causalcrit.errors import (
    DivisionByZeroEffect,
    InfiniteDivergence,
    NotMarkovian,
    PreconditionWarning,
    ZeroMeanCriticality,
)
from causalcrit.graph import build_structure, d_separated, do_surgery
from causalcrit.indicators import (
    ModelPair,
    ace,
    causal_influence,
    kl_divergence,
    rce,
    rho1,
    rho2,
    rho3,
    sigma,
)
from causalcrit.model import VariableSpec, build_model, make_cpd

from oracles import brute_causal_influence
from test_engine import random_binary_model

CP = PhenomenonBinding(variable="X", cp_label="CP")


def disconnected_phenomenon_model():
    """X has no path to phi at all."""
    specs = {
        "X": VariableSpec(name="X", domain=("notCP", "CP"), codes=(0.0, 1.0)),
        "phi": VariableSpec(name="phi", domain=("Short", "Long"), codes=(1.0, 0.0)),
    }
    s = build_structure(["X", "phi"])
    return build_model(
        s,
        specs,
        [
            make_cpd("X", (), [[0.3, 0.7]], specs),
            make_cpd("phi", (), [[0.25, 0.75]], specs),
        ],
    )


class TestKl:
    def test_identity_zero(self):
        assert kl_divergence([0.67, 0.33], [0.67, 0.33]) == 0.0

    def test_two_point_value(self):
        # closed form: 0.6 ln(0.6/0.68) + 0.4 ln(0.4/0.32)
        expected = 0.6 * math.log(0.6 / 0.68) + 0.4 * math.log(0.4 / 0.32)
        assert kl_divergence([0.6, 0.4], [0.68, 0.32]) == pytest.approx(
            expected, abs=1e-12
        )
        assert expected == pytest.approx(0.014160, abs=5e-7)

    def test_uniform_vs_fixture_marginal(self):
        expected = 0.5 * math.log(0.5 / 0.67) + 0.5 * math.log(0.5 / 0.33)
        assert kl_divergence([0.5, 0.5], [0.67, 0.33]) == pytest.approx(
            expected, abs=1e-12
        )

    def test_zero_against_positive_allowed(self):
        assert kl_divergence([0.0, 1.0], [0.5, 0.5]) == pytest.approx(math.log(2))

    def test_infinite_divergence_raised(self):
        with pytest.raises(InfiniteDivergence):
            kl_divergence([0.5, 0.5], [1.0, 0.0])

    def test_bits_rescale(self):
        nats = kl_divergence([0.6, 0.4], [0.68, 0.32])
        bits = kl_divergence([0.6, 0.4], [0.68, 0.32], bits=True)
        assert bits == pytest.approx(nats / math.log(2), abs=1e-12)

    def test_mapping_input_aligned_by_key(self):
        assert kl_divergence({"a": 0.5, "b": 0.5}, {"b": 0.5, "a": 0.5}) == 0.0

    def test_nonnegative_and_zero_iff_equal(self):
        rng = random.Random(7)
        for _ in range(200):
            u, v = rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99)
            value = kl_divergence([u, 1 - u], [v, 1 - v])
            assert value >= 0.0
            if abs(u - v) > 1e-9:
                assert value > 0.0
        assert kl_divergence([0.31, 0.69], [0.31, 0.69]) <= 1e-12


class TestEffectIndicators:
    def test_ace_fixture_value(self, reality_model):
        report = ace(reality_model, CP, "phi")
        assert report.value == pytest.approx(0.2, abs=1e-9)
        assert report.metadata["metric_codes"] == {"Short": 1.0, "Long": 0.0}

    def test_rce_fixture_value(self, reality_model):
        assert rce(reality_model, CP, "phi").value == pytest.approx(1.5, abs=1e-9)

    def test_ace_matches_surgery_oracle(self, reality_model):
        from oracles import brute_truncated

        e = {}
        for label in ("CP", "notCP"):
            dist = brute_truncated(reality_model, {"X": label}, "phi")
            spec = reality_model.specs["phi"]
            e[label] = sum(dist[c] * spec.code_of(c) for c in spec.domain)
        report = ace(reality_model, CP, "phi")
        assert report.value == pytest.approx(e["CP"] - e["notCP"], abs=1e-9)

    def test_disconnected_phenomenon(self):
        m = disconnected_phenomenon_model()
        assert ace(m, CP, "phi").value == pytest.approx(0.0, abs=1e-12)
        assert rce(m, CP, "phi").value == pytest.approx(1.0, abs=1e-12)
        assert sigma(m, CP, "phi").value == pytest.approx(0.0, abs=1e-12)

    def test_sigma_consistent_encoding_value(self, reality_model):
        report = sigma(reality_model, CP, "phi")
        assert report.value == pytest.approx(1 - 0.4 / 0.534, abs=1e-9)
        assert report.metadata["precondition_holds"] is True

    def test_sigma_precondition_violation_warns(self, reality_model):
        # flip the metric codes: Long=1 makes do(notCP) exceed do(CP)
        specs = dict(reality_model.specs)
        specs["phi"] = VariableSpec(
            name="phi", domain=("Short", "Long"), codes=(0.0, 1.0),
            unit=specs["phi"].unit, value_range=specs["phi"].value_range,
        )
        flipped = build_model(
            reality_model.structure, specs, reality_model.cpds.values()
        )
        with pytest.warns(PreconditionWarning):
            report = sigma(flipped, CP, "phi")
        assert report.value == pytest.approx(1 - 0.6 / 0.466, abs=1e-9)
        assert report.metadata["precondition_holds"] is False

    def test_sigma_constant_metric_code_one(self):
        specs = {
            "X": VariableSpec(name="X", domain=("notCP", "CP"), codes=(0.0, 1.0)),
            "phi": VariableSpec(name="phi", domain=("only",), codes=(1.0,)),
        }
        s = build_structure(["X", "phi"], [("X", "phi")])
        m = build_model(
            s,
            specs,
            [
                make_cpd("X", (), [[0.3, 0.7]], specs),
                make_cpd("phi", ("X",), [[1.0], [1.0]], specs),
            ],
        )
        assert sigma(m, CP, "phi").value == pytest.approx(0.0, abs=1e-12)

    def test_rce_zero_effect_denominator(self):
        specs = {
            "X": VariableSpec(name="X", domain=("notCP", "CP"), codes=(0.0, 1.0)),
            "phi": VariableSpec(name="phi", domain=("a", "b"), codes=(0.0, 1.0)),
        }
        s = build_structure(["X", "phi"], [("X", "phi")])
        m = build_model(
            s,
            specs,
            [
                make_cpd("X", (), [[0.3, 0.7]], specs),
                make_cpd("phi", ("X",), [[1.0, 0.0], [0.5, 0.5]], specs),
            ],
        )
        with pytest.raises(DivisionByZeroEffect):
            rce(m, CP, "phi")

    def test_zero_mean_criticality(self):
        specs = {
            "X": VariableSpec(name="X", domain=("notCP", "CP"), codes=(0.0, 1.0)),
            "phi": VariableSpec(name="phi", domain=("a", "b"), codes=(0.0, 0.0)),
        }
        s = build_structure(["X", "phi"])
        m = build_model(
            s,
            specs,
            [
                make_cpd("X", (), [[0.3, 0.7]], specs),
                make_cpd("phi", (), [[0.5, 0.5]], specs),
            ],
        )
        with pytest.raises(ZeroMeanCriticality):
            sigma(m, CP, "phi")

    def test_code_rescaling_identities(self, reality_model):
        lam = 3.75
        specs = dict(reality_model.specs)
        old = specs["phi"]
        specs["phi"] = VariableSpec(
            name="phi", domain=old.domain,
            codes=tuple(lam * c for c in old.codes),
            unit=old.unit, value_range=old.value_range,
        )
        scaled = build_model(
            reality_model.structure, specs, reality_model.cpds.values()
        )
        assert ace(scaled, CP, "phi").value == pytest.approx(
            lam * ace(reality_model, CP, "phi").value, abs=1e-9
        )
        assert rce(scaled, CP, "phi").value == pytest.approx(
            rce(reality_model, CP, "phi").value, abs=1e-9
        )
        assert sigma(scaled, CP, "phi").value == pytest.approx(
            sigma(reality_model, CP, "phi").value, abs=1e-9
        )

    def test_not_identifiable_without_instantiated_adjustment(self):
        # confounder U carries no CPD: parents are not instantiated and no
        # back-door set is enumerable from the instantiated nodes
        specs = {
            n: VariableSpec(name=n, domain=("notCP", "CP") if n == "X" else ("a", "b"),
                            codes=(0.0, 1.0))
            for n in ("U", "X", "phi")
        }
        s = build_structure(["U", "X", "phi"], [("U", "X"), ("U", "phi"), ("X", "phi")])
        m = build_model(
            s, specs, [make_cpd("X", ("U",), [[0.4, 0.6], [0.7, 0.3]], specs)]
        )
        from causalcrit.errors import NotIdentifiable

        with pytest.raises(NotIdentifiable):
            ace(m, CP, "phi")

    def test_no_directed_path_means_null_effect(self):
        rng = random.Random(2024)
        checked = 0
        while checked < 10:
            m = random_binary_model(rng, max_nodes=5)
            names = sorted(m.instantiated)
            x = rng.choice(names)
            targets = [
                n
                for n in names
                if n != x
                and d_separated(do_surgery(m.structure, {x}), {x}, {n}).separated
            ]
            if not targets:
                continue
            target = targets[0]
            cp = PhenomenonBinding(variable=x, cp_label="a")
            assert ace(m, cp, target).value == pytest.approx(0.0, abs=1e-9)
            assert rce(m, cp, target).value == pytest.approx(1.0, abs=1e-9)
            checked += 1


class TestRho1:
    def test_heavy_rain_pair_is_zero(self, reality_model, candidate_model):
        pair = ModelPair(reference=reality_model, candidate=candidate_model)
        assert rho1(pair, CP).value == pytest.approx(0.0, abs=1e-12)

    def test_uniform_candidate_against_fixture(self, reality_model, candidate_model):
        # replace the candidate's phenomenon CPD with a parent-ignoring
        # uniform table: its marginal becomes (0.5, 0.5)
        specs = candidate_model.specs
        cpds = dict(candidate_model.cpds)
        cpds["X"] = make_cpd("X", ("V1", "V2"), [[0.5, 0.5]] * 4, specs)
        uniform = build_model(candidate_model.structure, specs, cpds.values())
        pair = ModelPair(reference=reality_model, candidate=uniform)
        expected = 0.5 * math.log(0.5 / 0.33) + 0.5 * math.log(0.5 / 0.67)
        assert rho1(pair, CP).value == pytest.approx(expected, abs=1e-12)

    def test_identical_models_zero(self, reality_model):
        pair = ModelPair(reference=reality_model, candidate=reality_model)
        assert rho1(pair, CP).value == 0.0

    def test_metadata_carries_both_directions(self, reality_model, candidate_model):
        pair = ModelPair(reference=reality_model, candidate=candidate_model)
        report = rho1(pair, CP)
        assert report.metadata["kl_order"] == "candidate||reference"
        assert "reverse_value" in report.metadata
        assert report.metadata["log_base"] == "nats"

    def test_domain_mismatch_rejected(self, reality_model, candidate_model):
        from causalcrit.errors import ValidationError

        specs = dict(candidate_model.specs)
        specs["X"] = VariableSpec(
            name="X", domain=("dry", "rainy"), codes=(0.0, 1.0)
        )
        renamed = build_model(
            candidate_model.structure,
            specs,
            [
                candidate_model.cpds["V1"],
                candidate_model.cpds["V2"],
                make_cpd("X", ("V1", "V2"), candidate_model.cpds["X"].table, specs),
                make_cpd("phi", ("V2", "X"), candidate_model.cpds["phi"].table, specs),
            ],
        )
        pair = ModelPair(reference=reality_model, candidate=renamed)
        with pytest.raises(ValidationError):
            rho1(pair, CP)


class TestRho2:
    def test_heavy_rain_fixture_value(self, reality_model, candidate_model):
        pair = ModelPair(reference=reality_model, candidate=candidate_model)
        report = rho2(pair, ["V1", "V2", "X"])
        assert report.value == pytest.approx(0.0141, abs=1e-4)
        assert report.value == pytest.approx(0.014106858898, abs=1e-9)

    def test_reverse_direction_value(self, reality_model, candidate_model):
        pair = ModelPair(reference=reality_model, candidate=candidate_model)
        report = rho2(pair, ["V1", "V2", "X"])
        assert report.metadata["reverse_value"] == pytest.approx(0.01473, abs=2e-5)

    def test_identical_models_zero(self, reality_model):
        pair = ModelPair(reference=reality_model, candidate=reality_model)
        assert rho2(pair, ["V1", "V2", "X"]).value == pytest.approx(0.0, abs=1e-12)


class TestCausalInfluence:
    def test_empty_edge_set_zero(self, reality_model):
        assert causal_influence(reality_model, []) == 0.0

    def test_ignored_parent_gives_zero(self):
        specs = {
            "A": VariableSpec(name="A", domain=("x", "y"), codes=(0.0, 1.0)),
            "B": VariableSpec(name="B", domain=("x", "y"), codes=(0.0, 1.0)),
        }
        s = build_structure(["A", "B"], [("A", "B")])
        m = build_model(
            s,
            specs,
            [
                make_cpd("A", (), [[0.4, 0.6]], specs),
                make_cpd("B", ("A",), [[0.7, 0.3], [0.7, 0.3]], specs),
            ],
        )
        assert causal_influence(m, [("A", "B")]) == pytest.approx(0.0, abs=1e-12)

    def test_reality_out_v2(self, reality_model):
        value = causal_influence(reality_model, [("V2", "phi")])
        assert value == pytest.approx(0.13197, abs=1e-5)
        assert value == pytest.approx(
            brute_causal_influence(reality_model, [("V2", "phi")]), abs=1e-12
        )

    def test_model_out_v2(self, candidate_model):
        edges = [("V2", "X"), ("V2", "phi")]
        value = causal_influence(candidate_model, edges)
        assert value == pytest.approx(0.14544, abs=1e-5)
        assert value == pytest.approx(
            brute_causal_influence(candidate_model, edges), abs=1e-12
        )

    def test_random_models_match_brute_force(self):
        rng = random.Random(99)
        for _ in range(15):
            m = random_binary_model(rng, max_nodes=4)
            edges = [e for e in sorted(m.structure.directed) if rng.random() < 0.6]
            assert causal_influence(m, edges) == pytest.approx(
                brute_causal_influence(m, edges), abs=1e-10
            )

    def test_non_markovian_rejected(self):
        specs = {
            n: VariableSpec(name=n, domain=("a", "b"), codes=(0.0, 1.0))
            for n in ("A", "B")
        }
        s = build_structure(["A", "B"], [("A", "B")], bidirected=[("A", "B")])
        m = build_model(
            s,
            specs,
            [
                make_cpd("A", (), [[0.5, 0.5]], specs),
                make_cpd("B", ("A",), [[0.3, 0.7], [0.6, 0.4]], specs),
            ],
        )
        with pytest.raises(NotMarkovian):
            causal_influence(m, [("A", "B")])


class TestRho3:
    def test_identical_pair_zero(self, reality_model):
        pair = ModelPair(reference=reality_model, candidate=reality_model)
        for nodes in (["V1", "V2", "X"], ["V1", "X"], ["V2", "X", "phi"]):
            assert rho3(pair, nodes, CP).value == pytest.approx(0.0, abs=1e-12)

    def test_heavy_rain_full_graph_semantics(self, reality_model, candidate_model):
        pair = ModelPair(reference=reality_model, candidate=candidate_model)
        report = rho3(pair, ["V1", "V2", "X"], CP)
        assert report.value == pytest.approx(0.013472, abs=5e-6)
        comp = report.metadata["components"]
        assert comp["V1"] == pytest.approx(0.0, abs=1e-12)
        assert comp["V2"] == pytest.approx(-0.013472, abs=5e-6)

    def test_heavy_rain_restricted_semantics(self, reality_model, candidate_model):
        pair = ModelPair(reference=reality_model, candidate=candidate_model)
        report = rho3(pair, ["V1", "V2", "X"], CP, restrict_to_set=True)
        assert report.value == pytest.approx(0.019009, abs=5e-6)
        assert report.metadata["semantics"] == "restricted-to-set"

    def test_perturbed_candidate_is_detected(self, reality_model):
        cpds = dict(reality_model.cpds)
        perturbed_table = np.array(reality_model.cpds["phi"].table)
        perturbed_table[[0, 1]] = perturbed_table[[1, 0]]
        cpds["phi"] = make_cpd(
            "phi", ("V2", "X"), perturbed_table, reality_model.specs
        )
        pair = ModelPair(
            reference=reality_model,
            candidate=build_model(
                reality_model.structure, reality_model.specs, cpds.values()
            ),
        )
        assert rho3(pair, ["V1", "V2", "X"], CP).value > 0.0
