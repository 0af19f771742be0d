import numpy as np
import pytest

from rff_lab import (
    FeatureConfig,
    SpectralDraw,
    Variant,
    embed,
    error_matrix,
    exact_gram,
    kernel_eval,
    load_embedded,
    reconstruct,
    sample_spectral,
    save_embedded,
    spectral_draw,
)


def _embedded(variant, D, kernel, seed, X):
    fc = FeatureConfig(variant, D, kernel, seed)
    return fc, embed(fc, spectral_draw(fc), X)


class TestConfig:
    def test_tilde_requires_even_D(self, gauss1):
        with pytest.raises(ValueError):
            FeatureConfig(Variant.TILDE, 5, gauss1, 0)
        with pytest.raises(ValueError):
            FeatureConfig(Variant.TILDE, 0, gauss1, 0)
        assert FeatureConfig(Variant.TILDE, 4, gauss1, 0).frequency_count == 2

    def test_breve_allows_any_positive_D(self, gauss1):
        assert FeatureConfig(Variant.BREVE, 1, gauss1, 0).frequency_count == 1
        with pytest.raises(ValueError):
            FeatureConfig(Variant.BREVE, 0, gauss1, 0)


class TestEmbed:
    def test_tilde_unit_columns(self, gauss2):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(40, 2))
        _, es = _embedded(Variant.TILDE, 64, gauss2, 3, X)
        np.testing.assert_allclose(np.sum(es.Z**2, axis=0), 1.0, atol=1e-12)

    def test_breve_entry_range(self, gauss2):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(40, 2))
        _, es = _embedded(Variant.BREVE, 64, gauss2, 3, X)
        lim = np.sqrt(2.0 / 64)
        assert np.all(np.abs(es.Z) <= lim + 1e-15)

    def test_breve_degenerate_value(self, gauss1):
        # one frequency at 0 with zero phase gives sqrt(2) regardless of x
        fc = FeatureConfig(Variant.BREVE, 1, gauss1, 0)
        draw = SpectralDraw(
            omegas=np.zeros((1, 1)), phases=np.zeros(1), seed=0, kernel=gauss1
        )
        es = embed(fc, draw, np.array([[1.7]]))
        assert es.Z[0, 0] == pytest.approx(np.sqrt(2.0), rel=1e-15)

    def test_tilde_ordering_sin_then_cos(self, gauss1):
        fc = FeatureConfig(Variant.TILDE, 2, gauss1, 0)
        draw = SpectralDraw(
            omegas=np.array([[1.0]]), phases=None, seed=0, kernel=gauss1
        )
        es = embed(fc, draw, np.array([[0.0]]))
        np.testing.assert_allclose(es.Z[:, 0], [0.0, 1.0], atol=1e-15)

    def test_frequency_count_mismatch(self, gauss1):
        fc = FeatureConfig(Variant.TILDE, 10, gauss1, 0)
        wrong = sample_spectral(gauss1, 10, False, 0)  # needs 5
        with pytest.raises(ValueError):
            embed(fc, wrong, np.zeros((3, 1)))

    def test_phase_presence_mismatch(self, gauss1):
        fc = FeatureConfig(Variant.TILDE, 10, gauss1, 0)
        with_phases = sample_spectral(gauss1, 5, True, 0)
        with pytest.raises(ValueError):
            embed(fc, with_phases, np.zeros((3, 1)))

    def test_input_shape_validation(self, gauss2):
        fc = FeatureConfig(Variant.TILDE, 10, gauss2, 0)
        with pytest.raises(ValueError):
            embed(fc, spectral_draw(fc), np.zeros((3, 1)))


class TestReconstruct:
    def test_unit_diagonal_for_tilde(self, gauss1):
        X = np.linspace(-2, 2, 30)[:, None]
        _, es = _embedded(Variant.TILDE, 50 * 2, gauss1, 1, X)
        S = reconstruct(es, es)
        np.testing.assert_allclose(np.diag(S), 1.0, atol=1e-12)

    def test_matches_trigonometric_form(self, gauss2):
        # oracle: explicit cosine sum over the drawn frequencies
        rng = np.random.default_rng(8)
        X = rng.normal(size=(12, 2))
        Y = rng.normal(size=(9, 2))
        fc = FeatureConfig(Variant.TILDE, 40, gauss2, 4)
        draw = spectral_draw(fc)
        S = reconstruct(embed(fc, draw, X), embed(fc, draw, Y))
        diffs = X[:, None, :] - Y[None, :, :]
        oracle = np.cos(np.einsum("fk,ijk->fij", draw.omegas, diffs)).mean(axis=0)
        np.testing.assert_allclose(S, oracle, atol=1e-9)

    def test_single_frequency_tilde_is_cosine(self, gauss1):
        fc = FeatureConfig(Variant.TILDE, 2, gauss1, 9)
        draw = spectral_draw(fc)
        x, y = np.array([[0.3]]), np.array([[-1.1]])
        S = reconstruct(embed(fc, draw, x), embed(fc, draw, y))
        assert S[0, 0] == pytest.approx(
            np.cos(draw.omegas[0, 0] * (0.3 + 1.1)), abs=1e-12
        )

    def test_breve_single_term_identity(self, gauss1):
        # product-to-sum: 2 cos(wx+b) cos(wy+b) = cos(w(x-y)) + cos(w(x+y)+2b)
        fc = FeatureConfig(Variant.BREVE, 1, gauss1, 12)
        draw = spectral_draw(fc)
        x, y = 0.7, -0.4
        S = reconstruct(embed(fc, draw, [[x]]), embed(fc, draw, [[y]]))
        w, b = draw.omegas[0, 0], draw.phases[0]
        expected = np.cos(w * (x - y)) + np.cos(w * (x + y) + 2 * b)
        assert S[0, 0] == pytest.approx(expected, abs=1e-12)
        assert S[0, 0] == pytest.approx(2 * np.cos(w * x + b) * np.cos(w * y + b),
                                        abs=1e-12)

    def test_tilde_shift_invariance(self, gauss2):
        rng = np.random.default_rng(10)
        X = rng.normal(size=(8, 2))
        Y = rng.normal(size=(8, 2))
        c = rng.normal(size=2)
        fc = FeatureConfig(Variant.TILDE, 30 * 2, gauss2, 5)
        draw = spectral_draw(fc)
        S0 = reconstruct(embed(fc, draw, X), embed(fc, draw, Y))
        S1 = reconstruct(embed(fc, draw, X + c), embed(fc, draw, Y + c))
        np.testing.assert_allclose(S0, S1, atol=1e-9)

    def test_config_mismatch(self, gauss1):
        X = np.zeros((3, 1))
        _, a = _embedded(Variant.TILDE, 10, gauss1, 1, X)
        _, b = _embedded(Variant.TILDE, 10, gauss1, 2, X)
        with pytest.raises(ValueError):
            reconstruct(a, b)

    def test_unbiasedness_monte_carlo(self, gauss2):
        # mean of s(x, y) over fresh draws converges to k(x, y)
        rng = np.random.default_rng(21)
        pairs = rng.normal(size=(10, 2, 2))
        pts = pairs.reshape(20, 2)
        draws = 10_000
        for variant, D in ((Variant.TILDE, 10), (Variant.BREVE, 10)):
            samples = np.empty((draws, 10))
            for r in range(draws):
                fc = FeatureConfig(variant, D, gauss2, 100_000 + r)
                Z = embed(fc, spectral_draw(fc), pts).Z
                samples[r] = np.sum(Z[:, 0::2] * Z[:, 1::2], axis=0)
            exact = np.array(
                [kernel_eval(gauss2, p[0] - p[1]) for p in pairs]
            )
            se = samples.std(axis=0, ddof=1) / np.sqrt(draws)
            assert np.all(np.abs(samples.mean(axis=0) - exact) < 4 * se)


class TestErrorMatrix:
    def test_zero_on_diagonal_for_tilde(self, gauss1):
        X = np.linspace(-3, 3, 25)[:, None]
        _, es = _embedded(Variant.TILDE, 20, gauss1, 2, X)
        F = error_matrix(gauss1, es, es, X, X)
        np.testing.assert_allclose(np.diag(F), 0.0, atol=1e-12)

    def test_tilde_range(self, gauss1):
        X = np.linspace(-4, 4, 60)[:, None]
        _, es = _embedded(Variant.TILDE, 10, gauss1, 3, X)
        F = error_matrix(gauss1, es, es, X, X)
        assert np.all(np.abs(F) <= 2.0)

    def test_breve_range(self, gauss1):
        X = np.linspace(-4, 4, 60)[:, None]
        _, es = _embedded(Variant.BREVE, 5, gauss1, 3, X)
        F = error_matrix(gauss1, es, es, X, X)
        assert np.all(np.abs(F) <= 3.0)

    def test_shape_mismatch(self, gauss1):
        X = np.zeros((5, 1))
        _, es = _embedded(Variant.TILDE, 10, gauss1, 1, X)
        with pytest.raises(ValueError):
            error_matrix(gauss1, es, es, np.zeros((4, 1)), X)

    def test_exact_gram_matches_kernel_eval(self, gauss2):
        rng = np.random.default_rng(14)
        X = rng.normal(size=(6, 2))
        Y = rng.normal(size=(4, 2))
        K = exact_gram(gauss2, X, Y)
        for i in range(6):
            for j in range(4):
                assert K[i, j] == pytest.approx(
                    kernel_eval(gauss2, X[i] - Y[j]), abs=1e-12
                )


class TestSerialization:
    def test_roundtrip_bit_exact(self, tmp_path, gauss2):
        rng = np.random.default_rng(17)
        X = rng.normal(size=(13, 2))
        fc, es = _embedded(Variant.BREVE, 7, gauss2, 99, X)
        path = tmp_path / "emb.bin"
        save_embedded(es, path)
        back = load_embedded(path, gauss2)
        assert back.config == fc
        assert np.array_equal(back.Z, es.Z)

    def test_header_layout(self, tmp_path, gauss1):
        X = np.zeros((3, 1))
        _, es = _embedded(Variant.TILDE, 4, gauss1, 123, X)
        path = tmp_path / "emb.bin"
        save_embedded(es, path)
        raw = np.frombuffer(path.read_bytes()[:40], dtype="<i8")
        assert raw[0] == int.from_bytes(b"RFFEMB01", "little")
        assert list(raw[1:]) == [0, 4, 3, 123]
        floats = np.frombuffer(path.read_bytes()[40:], dtype="<f8")
        np.testing.assert_array_equal(floats, es.Z.ravel(order="F"))

    def test_bad_magic(self, tmp_path, gauss1):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"\x00" * 48)
        with pytest.raises(ValueError):
            load_embedded(path, gauss1)
