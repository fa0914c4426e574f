import numpy as np
import pytest

from conftest import random_complex
from zenodd import linalg, model
from zenodd.linalg import dag, devectorize, schatten_norm, tensor, vectorize
from zenodd.model import (
    REFERENCE_H,
    PAULI,
    reference_model,
    generator_superop,
    load_matrix_txt,
    make_model,
    pauli_decompose,
    pauli_reconstruct,
    pauli_string,
    projector_d,
    save_matrix_txt,
    schmidt_split,
    zeno_generator,
)

Z = PAULI["Z"]
X = PAULI["X"]


class TestSchmidtSplit:
    def test_local_term_only(self):
        h1, h2, h12 = schmidt_split(tensor(Z, np.eye(2)), 2, 2)
        np.testing.assert_allclose(h1, Z, atol=1e-14)
        np.testing.assert_allclose(h2, 0 * Z, atol=1e-14)
        np.testing.assert_allclose(h12, np.zeros((4, 4)), atol=1e-14)

    def test_pure_interaction(self):
        h1, h2, h12 = schmidt_split(tensor(X, X), 2, 2)
        np.testing.assert_allclose(h1, 0 * X, atol=1e-14)
        np.testing.assert_allclose(h2, 0 * X, atol=1e-14)
        np.testing.assert_allclose(h12, tensor(X, X), atol=1e-14)

    def test_reference_coefficients(self):
        h1, h2, h12 = schmidt_split(REFERENCE_H, 2, 2)
        c1 = pauli_decompose(h1, 1)
        assert abs(c1["X"] - (-0.120)) < 1e-12
        assert abs(c1["Y"] - 0.200) < 1e-12
        assert abs(c1["Z"] - (-0.195)) < 1e-12
        c2 = pauli_decompose(h2, 1)
        assert abs(c2["X"] - 0.135) < 1e-12
        assert abs(c2["Y"] - (-0.025)) < 1e-12
        assert abs(c2["Z"] - (-0.215)) < 1e-12

    def test_invariants(self, rng):
        for k in range(5):
            h = linalg.random_traceless_hermitian(6, 600 + k)
            h = h - (np.trace(h) / 6) * np.eye(6)
            h1, h2, h12 = schmidt_split(h, 2, 3)
            recon = tensor(h1, np.eye(3)) + tensor(np.eye(2), h2) + h12
            assert np.abs(recon - h).max() < 1e-10
            assert abs(np.trace(h1)) < 1e-9 and abs(np.trace(h2)) < 1e-9
            assert np.abs(linalg.partial_trace(h12, [2, 3], [0])).max() < 1e-9
            assert np.abs(linalg.partial_trace(h12, [2, 3], [1])).max() < 1e-9
            # mutual Hilbert-Schmidt orthogonality of the three parts
            parts = [tensor(h1, np.eye(3)), tensor(np.eye(2), h2), h12]
            for i in range(3):
                for j in range(i + 1, 3):
                    assert abs(np.trace(dag(parts[i]) @ parts[j])) < 1e-9

    def test_split_is_idempotent(self):
        h1, h2, h12 = schmidt_split(REFERENCE_H, 2, 2)
        again = schmidt_split(tensor(h1, np.eye(2)) + tensor(np.eye(2), h2) + h12, 2, 2)
        np.testing.assert_allclose(again[0], h1, atol=1e-12)
        np.testing.assert_allclose(again[1], h2, atol=1e-12)
        np.testing.assert_allclose(again[2], h12, atol=1e-12)

    def test_rejects_traceful(self):
        with pytest.raises(ValueError):
            schmidt_split(np.eye(4), 2, 2)


class TestPauliDecompose:
    def test_single_string(self):
        coeffs = pauli_decompose(tensor(X, X), 2)
        assert abs(coeffs["XX"] - 1.0) < 1e-14
        assert all(abs(v) < 1e-14 for k, v in coeffs.items() if k != "XX")

    def test_reference_interaction_terms(self):
        _, _, h12 = schmidt_split(REFERENCE_H, 2, 2)
        c = pauli_decompose(h12, 2)
        assert abs(c["ZY"] - 0.375) < 1e-12
        assert abs(c["ZZ"] - 0.310) < 1e-12
        assert abs(c["XX"] - 0.165) < 1e-12
        assert abs(c["YX"] - (-0.240)) < 1e-12

    def test_zero(self):
        coeffs = pauli_decompose(np.zeros((4, 4)), 2)
        assert all(v == 0 for v in coeffs.values())

    def test_reconstruction(self, rng):
        h = linalg.hermitize(random_complex(rng, 4, 4))
        coeffs = pauli_decompose(h, 2)
        assert np.abs(pauli_reconstruct(coeffs) - h).max() < 1e-10

    def test_rejects_bad_dimension(self):
        with pytest.raises(ValueError):
            pauli_decompose(np.eye(3), 1)


class TestGeneratorSuperop:
    def test_identity_commutes(self):
        np.testing.assert_allclose(generator_superop(np.eye(2)), np.zeros((4, 4)), atol=1e-14)

    def test_opnorm_is_spread(self):
        g = generator_superop(Z)
        assert abs(schatten_norm(g, np.inf) - 2.0) < 1e-12

    def test_conjugation_oracle(self, rng):
        mdl = reference_model()
        u = linalg.expm_i(mdl.h, mdl.t)
        prop = linalg.expm_i(mdl.gen, mdl.t)
        for _ in range(5):
            rho = random_complex(rng, 4, 4)
            lhs = devectorize(prop @ vectorize(rho))
            rhs = u @ rho @ dag(u)
            assert np.abs(lhs - rhs).max() < 1e-10

    def test_rejects_non_hermitian(self, rng):
        with pytest.raises(ValueError):
            generator_superop(random_complex(rng, 3, 3))


class TestProjectorD:
    def test_printed_entries(self):
        d = projector_d(2, 2)
        assert abs(d[0, 0] - 0.5) < 1e-15
        assert abs(d[0, 10] - 0.5) < 1e-15
        assert abs(d[4, 4] - 0.5) < 1e-15
        assert abs(d[2, 2]) < 1e-15

    def test_hermitian_projection_of_rank_d2_squared(self):
        for d1, d2 in ((2, 2), (2, 3), (3, 2)):
            d = projector_d(d1, d2)
            assert np.abs(d @ d - d).max() < 1e-12
            assert np.abs(d - dag(d)).max() < 1e-12
            assert abs(np.trace(d).real - d2 * d2) < 1e-9

    def test_action_oracle(self, rng):
        d = projector_d(2, 3)
        for _ in range(5):
            rho = random_complex(rng, 6, 6)
            lhs = devectorize(d @ vectorize(rho))
            rhs = tensor(np.eye(2) / 2, linalg.partial_trace(rho, [2, 3], [1]))
            assert np.abs(lhs - rhs).max() < 1e-12

    def test_max_mixed_fixed_point(self):
        d = projector_d(2, 2)
        v = vectorize(np.eye(4) / 4)
        assert np.abs(d @ v - v).max() < 1e-14

    def test_trace_preserving(self, rng):
        from zenodd.channel import is_trace_preserving

        assert is_trace_preserving(projector_d(2, 2))


class TestZenoGenerator:
    def test_identity_on_reference_model(self):
        mdl = reference_model()
        sandwich, bath_form = zeno_generator(mdl)
        assert schatten_norm(sandwich - bath_form, np.inf) < 1e-10

    def test_bath_only_commutes(self):
        h = tensor(np.eye(2), Z)
        mdl = make_model(h, 2, 2)
        sandwich, _ = zeno_generator(mdl)
        dproj = projector_d(2, 2)
        np.testing.assert_allclose(sandwich, mdl.gen @ dproj, atol=1e-12)

    def test_pure_interaction_averages_out(self):
        mdl = make_model(tensor(X, X), 2, 2)
        sandwich, _ = zeno_generator(mdl)
        assert np.abs(sandwich).max() < 1e-12

    def test_identity_on_random_models(self):
        for k in range(100):
            h = linalg.random_traceless_hermitian(4, 7000 + k)
            h = h - (np.trace(h) / 4) * np.eye(4)
            sandwich, bath_form = zeno_generator(make_model(h, 2, 2))
            assert schatten_norm(sandwich - bath_form, np.inf) < 1e-10


class TestReferenceModel:
    def test_entries(self):
        assert REFERENCE_H[0, 0] == -0.10
        assert REFERENCE_H[3, 3] == 0.72
        assert REFERENCE_H[0, 1] == -0.03 - 0.35j

    def test_big_t_is_one(self):
        assert abs(reference_model().big_t - 1.0) < 1e-12

    def test_hermitian_traceless(self):
        assert np.abs(REFERENCE_H - dag(REFERENCE_H)).max() == 0.0
        assert abs(np.trace(REFERENCE_H)) <= 0.005

    def test_pauli_strings_are_their_own_basis(self):
        assert np.abs(pauli_string("XZ") - tensor(X, Z)).max() == 0.0


class TestMatrixTxt:
    def test_round_trips_reference_fixture(self, tmp_path):
        path = tmp_path / "h.txt"
        save_matrix_txt(path, REFERENCE_H)
        back = load_matrix_txt(path)
        assert np.array_equal(back, REFERENCE_H)

    def test_round_trips_random(self, rng, tmp_path):
        m = random_complex(rng, 3, 5)
        path = tmp_path / "m.txt"
        save_matrix_txt(path, m)
        assert np.array_equal(load_matrix_txt(path), m)

    def test_rejects_ragged(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1+0j 2+0j\n3+0j\n")
        with pytest.raises(ValueError):
            load_matrix_txt(path)
