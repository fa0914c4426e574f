import numpy as np
import pytest

from conftest import proj0
from zenodd import channel, linalg, model, montecarlo, protocol
from zenodd.channel import choi_from_superop, choi_of_reduced_map, reduced_choi
from zenodd.linalg import schatten_norm, tensor
from zenodd.model import PAULI, reference_model, make_model, projector_d
from zenodd.protocol import (
    ATYPICAL_LABELS,
    TYPICAL_LABELS,
    DecouplingSet,
    TrajectorySample,
    average_evolution_exact,
    brute_force_average,
    fixture_sample,
    parse_sequence,
    pauli_atypical_set,
    pauli_set,
    pdd_evolution,
    pulse_inverted_evolution,
    serialize_sample,
    trajectory_evolution,
    zeno_limit,
    zeno_product,
    zeno_target,
)

X, Y, Z = PAULI["X"], PAULI["Y"], PAULI["Z"]


def bath_only_model():
    return make_model(tensor(np.eye(2), Z), 2, 2, t=0.8)


class TestDecouplingSet:
    def test_validation(self):
        with pytest.raises(ValueError):
            DecouplingSet(unitaries=[], weights=[], labels=[])
        with pytest.raises(ValueError):
            DecouplingSet(unitaries=[np.diag([1.0, 2.0])], weights=[1.0], labels=["A"])
        with pytest.raises(ValueError):
            DecouplingSet(unitaries=[np.eye(2)], weights=[-1.0], labels=["I"])

    def test_probabilities_normalized(self):
        s = pauli_atypical_set()
        p = s.probabilities()
        assert abs(p.sum() - 1.0) < 1e-15
        assert abs(p[0] - 20 / 23) < 1e-15


class TestPdd:
    def test_single_identity_pulse(self):
        mdl = reference_model()
        s = DecouplingSet(unitaries=[np.eye(2)], weights=[1.0], labels=["I"])
        out = pdd_evolution(mdl, s, m=3)
        want = protocol.step_superop(mdl, mdl.t)
        assert np.abs(out - want).max() < 1e-10

    def test_bath_only_hamiltonian_untouched(self):
        mdl = bath_only_model()
        out = pdd_evolution(mdl, pauli_set(), m=2)
        want = protocol.step_superop(mdl, mdl.t)
        assert np.abs(out - want).max() < 1e-10

    def test_more_cycles_improve_system_purity(self):
        mdl = reference_model()
        dset = pauli_set()
        purities = []
        for m in (1, 8):
            c = choi_from_superop(pdd_evolution(mdl, dset, m))
            purities.append(reduced_choi(c, 1, 2, 2).purity())
        assert purities[1] > purities[0]


class TestTrajectory:
    def test_n1_unrolled(self):
        mdl = reference_model()
        dset = pauli_set()
        sample = TrajectorySample(n=1, indices=(1, 3))
        lifted = dset.lifted(2)
        want = lifted[3] @ protocol.step_superop(mdl, mdl.t) @ lifted[1]
        out = trajectory_evolution(mdl, dset, sample)
        assert np.abs(out - want).max() < 1e-12

    def test_all_identity(self):
        mdl = reference_model()
        sample = TrajectorySample(n=4, indices=(0,) * 5)
        out = trajectory_evolution(mdl, pauli_set(), sample)
        assert np.abs(out - protocol.step_superop(mdl, mdl.t)).max() < 1e-10

    def test_superoperator_is_unitary(self, rng):
        mdl = reference_model()
        sample = montecarlo.sample_trajectory(pauli_set(), 15, 99, 0)
        s = trajectory_evolution(mdl, pauli_set(), sample)
        for _ in range(5):
            x = rng.standard_normal(16) + 1j * rng.standard_normal(16)
            assert abs(np.linalg.norm(s @ x) - np.linalg.norm(x)) < 1e-10

    def test_total_choi_is_pure(self):
        mdl = reference_model()
        sample = montecarlo.sample_trajectory(pauli_set(), 12, 100, 3)
        c = choi_from_superop(trajectory_evolution(mdl, pauli_set(), sample))
        assert abs(c.purity() - 1.0) < 1e-10

    def test_schmidt_symmetry(self):
        mdl = reference_model()
        for ordinal in range(10):
            sample = montecarlo.sample_trajectory(pauli_set(), 20, 55, ordinal)
            c = choi_from_superop(trajectory_evolution(mdl, pauli_set(), sample))
            l1, l2 = reduced_choi(c, 1, 2, 2), reduced_choi(c, 2, 2, 2)
            assert abs(l1.purity() - l2.purity()) < 1e-10
            assert abs(l1.opnorm() - l2.opnorm()) < 1e-8

    def test_index_out_of_range(self):
        mdl = reference_model()
        with pytest.raises(IndexError):
            trajectory_evolution(mdl, pauli_set(), TrajectorySample(n=1, indices=(0, 7)))


class TestAverage:
    def test_bath_only_commuting_case(self):
        mdl = bath_only_model()
        dproj = projector_d(2, 2)
        want = protocol.step_superop(mdl, mdl.t) @ dproj
        for n in (1, 3, 7):
            out = average_evolution_exact(mdl, n)
            assert np.abs(out - want).max() < 1e-10

    def test_matches_brute_force(self):
        mdl = reference_model()
        dset = pauli_set()
        for n in (1, 2, 3):
            diff = average_evolution_exact(mdl, n) - brute_force_average(mdl, dset, n)
            assert schatten_norm(diff, np.inf) < 1e-10

    def test_matches_brute_force_on_random_models(self):
        dset = pauli_set()
        for k in range(5):
            h = linalg.random_traceless_hermitian(4, 8100 + k)
            h = h - (np.trace(h) / 4) * np.eye(4)
            mdl = make_model(h, 2, 2)
            for n in (1, 2):
                diff = average_evolution_exact(mdl, n) - brute_force_average(mdl, dset, n)
                assert schatten_norm(diff, np.inf) < 1e-10

    def test_near_zeno_limit_at_n10(self):
        mdl = reference_model()
        gap = schatten_norm(average_evolution_exact(mdl, 10) - zeno_limit(mdl), np.inf)
        assert gap <= 2 / 10

    def test_trace_preserving(self):
        from zenodd.channel import is_trace_preserving

        assert is_trace_preserving(average_evolution_exact(reference_model(), 4))


class TestBruteForce:
    def test_n1_uniform_is_group_average(self):
        mdl = reference_model()
        dproj = projector_d(2, 2)
        want = dproj @ protocol.step_superop(mdl, mdl.t) @ dproj
        out = brute_force_average(mdl, pauli_set(), 1)
        assert np.abs(out - want).max() < 1e-12

    def test_single_element_set(self):
        mdl = reference_model()
        s = DecouplingSet(unitaries=[np.eye(2)], weights=[1.0], labels=["I"])
        out = brute_force_average(mdl, s, 3)
        assert np.abs(out - protocol.step_superop(mdl, mdl.t)).max() < 1e-10

    def test_nonuniform_weights_differ(self):
        mdl = reference_model()
        bf = brute_force_average(mdl, pauli_atypical_set(), 2)
        av = average_evolution_exact(mdl, 2)
        assert schatten_norm(bf - av, np.inf) > 1e-3

    def test_cap(self):
        mdl = reference_model()
        with pytest.raises(ValueError):
            brute_force_average(mdl, pauli_set(), 3, cap=100)


class TestZenoLimit:
    def test_no_interaction(self):
        mdl = make_model(tensor(np.eye(2), Z) + tensor(X, np.eye(2)), 2, 2)
        out = zeno_limit(mdl)
        bath = model.generator_superop(tensor(np.eye(2), mdl.h2))
        want = linalg.expm_i(bath, mdl.t) @ projector_d(2, 2)
        assert np.abs(out - want).max() < 1e-10

    def test_reduced_bath_choi_is_zeno_unitary(self):
        mdl = reference_model()
        u2 = linalg.expm_i(mdl.h2, mdl.t)
        c2 = choi_of_reduced_map(zeno_limit(mdl), np.eye(2) / 2, 1)
        assert abs(channel.fidelity_to_unitary(c2, u2) - 1.0) < 1e-10

    def test_projector_absorbs(self):
        mdl = reference_model()
        zl = zeno_limit(mdl)
        assert np.abs(projector_d(2, 2) @ zl - zl).max() < 1e-10


class TestZenoProduct:
    def test_zero_hamiltonian(self):
        p = projector_d(2, 2)
        for variant in ("P-last", "P-sandwich", "P-first"):
            out = zeno_product(np.zeros((16, 16)), p, 1.0, 5, variant)
            assert np.abs(out - p).max() < 1e-12

    def test_commuting_case_exact(self):
        mdl = bath_only_model()
        p = projector_d(2, 2)
        want = zeno_target(mdl.gen, p, mdl.t)
        for variant in ("P-last", "P-sandwich", "P-first"):
            out = zeno_product(mdl.gen, p, mdl.t, 4, variant)
            assert np.abs(out - want).max() < 1e-10

    @pytest.mark.parametrize("n", [1, 5, 20, 100])
    def test_reference_model_bounds(self, n):
        mdl = reference_model()
        p = projector_d(2, 2)
        target = zeno_target(mdl.gen, p, mdl.t)
        err_last = schatten_norm(zeno_product(mdl.gen, p, mdl.t, n, "P-last") - target, np.inf)
        assert err_last <= 2.0 / n + 1e-12
        err_sw = schatten_norm(
            zeno_product(mdl.gen, p, mdl.t, n, "P-sandwich") - target, np.inf
        )
        assert err_sw <= 1.0 / n + 1e-12
        err_first = schatten_norm(
            zeno_product(mdl.gen, p, mdl.t, n, "P-first") - target, np.inf
        )
        assert err_first <= 2.0 / n + 1e-12

    def test_rejects_non_projection(self):
        with pytest.raises(ValueError):
            zeno_product(np.zeros((4, 4)), 0.5 * np.eye(4), 1.0, 2, "P-last")

    def test_rejects_unknown_variant(self):
        with pytest.raises(ValueError):
            zeno_product(np.zeros((4, 4)), np.eye(4), 1.0, 2, "sideways")


class TestPulseInversion:
    def test_zero_hamiltonian_gives_identity(self):
        mdl = make_model(np.zeros((4, 4)), 2, 2, t=1.0)
        sample = montecarlo.sample_trajectory(pauli_set(), 6, 5, 0)
        out = pulse_inverted_evolution(mdl, pauli_set(), sample)
        assert np.abs(out - np.eye(16)).max() < 1e-12

    def test_all_identity_sample(self):
        mdl = reference_model()
        sample = TrajectorySample(n=3, indices=(0,) * 4)
        out = pulse_inverted_evolution(mdl, pauli_set(), sample)
        assert np.abs(out - protocol.step_superop(mdl, mdl.t)).max() < 1e-10

    def test_leading_projector_gap_invariant_under_inversion(self):
        # trace norm is unitarily invariant, so the gap to the weighted
        # leading projector is the same before and after undoing the pulses
        mdl = reference_model()
        dset = pauli_set()
        sigma2 = proj0(2)
        for ordinal in range(5):
            sample = montecarlo.sample_trajectory(dset, 9, 31, ordinal)
            plain = trajectory_evolution(mdl, dset, sample)
            tilde = pulse_inverted_evolution(mdl, dset, sample)
            gaps = []
            for superop in (plain, tilde):
                c = choi_of_reduced_map(superop, sigma2, 2)
                lam0 = c.spectrum.eigenvalues[0]
                v0 = c.spectrum.eigenvectors[:, 0]
                gaps.append(
                    schatten_norm(c.matrix - lam0 * np.outer(v0, v0.conj()), 1)
                )
            assert abs(gaps[0] - gaps[1]) < 1e-10


class TestTerminalPulseVariant:
    def test_average_form_without_terminal_pulse(self):
        mdl = reference_model()
        for n in (1, 2, 3):
            bf = brute_force_average(mdl, pauli_set(), n, terminal_pulse=False)
            alt = average_evolution_exact(mdl, n, terminal_pulse=False)
            assert schatten_norm(bf - alt, np.inf) < 1e-10

    def test_weaker_constant_bound(self):
        mdl = reference_model()
        p = projector_d(2, 2)
        target = zeno_target(mdl.gen, p, mdl.t)
        for n in (1, 4, 16, 64):
            err = schatten_norm(
                average_evolution_exact(mdl, n, terminal_pulse=False) - target, np.inf
            )
            assert err <= (mdl.big_t + mdl.big_t**2) / n + 1e-12


class TestConvexity:
    def test_choi_of_average_is_mean_of_trajectory_chois(self):
        from itertools import product

        mdl = reference_model()
        dset = pauli_set()
        n = 2
        probs = dset.probabilities()
        acc = np.zeros((16, 16), dtype=complex)
        for idx in product(range(4), repeat=n + 1):
            w = float(np.prod([probs[i] for i in idx]))
            s = trajectory_evolution(mdl, dset, TrajectorySample(n=n, indices=idx))
            acc += w * choi_from_superop(s).matrix
        av = choi_from_superop(average_evolution_exact(mdl, n)).matrix
        assert np.abs(acc - av).max() < 1e-10


class TestSequenceFixtures:
    def test_lengths(self):
        assert len(TYPICAL_LABELS) == 101
        assert len(ATYPICAL_LABELS) == 101

    def test_atypical_is_identity_heavy(self):
        counts = {lab: ATYPICAL_LABELS.count(lab) for lab in "IXYZ"}
        assert counts["I"] > 80

    def test_serialize_round_trip(self):
        dset = pauli_set()
        sample = fixture_sample(TYPICAL_LABELS, 10, dset)
        line = serialize_sample(sample, dset)
        assert line.startswith("Z,Z,Y,Y,Y")
        assert parse_sequence(line, dset) == sample.indices

    def test_prefix_semantics(self):
        dset = pauli_set()
        sample = fixture_sample(ATYPICAL_LABELS, 100, dset)
        assert sample.n == 100
        assert len(sample.indices) == 101

    def test_too_long_prefix_rejected(self):
        with pytest.raises(ValueError):
            fixture_sample(TYPICAL_LABELS, 101, pauli_set())

    def test_unknown_label_rejected(self):
        with pytest.raises(ValueError):
            parse_sequence("I,Q", pauli_set())
