import numpy as np
import pytest

from conftest import random_model
from e2rstrat.attribution import (METHODS, BucketLabel, IGConfig, bucket_label, explain,
                                  integrated_gradients, path_integral, quadrature,
                                  token_attributions)
from e2rstrat.errors import DimensionMismatch, InputError
from e2rstrat.model import logits_from_embeddings
from e2rstrat.text import Encoded, Vocabulary, build_vocab, encode

EXAMPLE_ROWS = [
    ("Provide", 0.18, "Moderately Complex"),
    ("financially", -0.10, "Slightly Easy"),
    ("sustainable", 0.30, "Highly Complex"),
    ("care", 0.15, "Slightly Complex"),
    ("giving", 0.10, "Slightly Complex"),
    ("security", 0.25, "Highly Complex"),
    ("and", -0.02, "Neutral"),
    ("stability", 0.28, "Highly Complex"),
    ("to", -0.03, "Neutral"),
    ("people", 0.12, "Slightly Complex"),
    ("and", -0.04, "Neutral"),
    ("their", 0.05, "Neutral"),
    ("carers", -0.08, "Neutral"),
]


def _enc(model, rng):
    L = model.config.max_len
    n = int(rng.integers(1, L + 1))
    ids = [2] + list(rng.integers(3, model.config.vocab_size, size=n - 1)) + [0] * (L - n)
    return Encoded(tuple(int(i) for i in ids), n)


class TestQuadrature:
    @pytest.mark.parametrize("method", METHODS)
    @pytest.mark.parametrize("steps", [1, 2, 7, 64])
    def test_weights_sum_to_one(self, method, steps):
        nodes, w = quadrature(method, steps)
        assert abs(w.sum() - 1) <= 1e-12
        assert nodes.min() >= 0 and nodes.max() <= 1

    def test_right_riemann_nodes(self):
        nodes, w = quadrature("riemann_right", 4)
        np.testing.assert_array_equal(nodes, [0.25, 0.5, 0.75, 1.0])

    def test_invalid(self):
        with pytest.raises(InputError):
            IGConfig(steps=0).validate()
        with pytest.raises(InputError):
            IGConfig(method="simpson").validate()


class TestIntegratedGradients:
    def test_input_equals_baseline(self):
        rng = np.random.default_rng(0)
        m = random_model(rng, max_len=5)
        m.params["embedding"][3] = m.params["embedding"][0]
        enc = Encoded((0, 3, 3, 0, 0), 3)  # every used row equals the PAD row
        assert np.all(integrated_gradients(m, enc) == 0)

    @pytest.mark.parametrize("method", METHODS)
    @pytest.mark.parametrize("steps", [1, 4, 64])
    def test_linear_model_closed_form(self, method, steps):
        rng = np.random.default_rng(steps)
        for _ in range(5):
            m = random_model(rng, activation="linear")
            enc = _enc(m, rng)
            c = int(rng.integers(m.config.num_classes))
            x = m.lookup(enc.ids)
            base = np.zeros_like(x)
            ig = path_integral(m, x, base, enc.mask, c, steps, method)
            w = m.params["W2"][c] @ m.params["W1"]
            expected = (enc.mask / enc.true_length)[:, None] * w[None, :] * x
            np.testing.assert_allclose(ig, expected, rtol=0, atol=1e-10)

    def test_completeness_trained(self, trained, corpus):
        model, vocab = trained
        for pair in corpus.pairs[:10]:
            res = explain(model, pair.complex_text, vocab, IGConfig(steps=256))
            assert res.completeness_gap <= 1e-3

    def test_gap_shrinks_with_doubling(self, trained, corpus):
        model, vocab = trained
        text = corpus.pairs[0].complex_text
        gaps = [explain(model, text, vocab, IGConfig(steps=s)).completeness_gap
                for s in (8, 16, 32, 64, 128, 256)]
        assert all(b <= a + 1e-6 for a, b in zip(gaps, gaps[1:]))

    def test_right_riemann_converges(self, trained, corpus):
        model, vocab = trained
        text = corpus.pairs[1].complex_text
        g = [explain(model, text, vocab, IGConfig(steps=s, method="riemann_right")).completeness_gap
             for s in (16, 256, 4096)]
        assert g[2] < g[1] < g[0]

    def test_target_and_zero_baseline(self, trained, corpus):
        model, vocab = trained
        res = explain(model, corpus.pairs[0].complex_text, vocab,
                      IGConfig(steps=128, baseline="zero_embedding", target=2))
        assert res.target == 2 and res.completeness_gap <= 1e-3

    def test_bad_target(self, trained):
        model, vocab = trained
        with pytest.raises(DimensionMismatch):
            explain(model, "care", vocab, IGConfig(target=99))

    def test_wrong_length(self, trained):
        model, _ = trained
        with pytest.raises(DimensionMismatch):
            integrated_gradients(model, Encoded((2, 3), 2))


class TestTokenAttributions:
    def test_zero_matrix(self):
        enc = Encoded((2, 5, 6, 0), 3, ("a", "b"))
        res = token_attributions(np.zeros((4, 3)), enc, output_delta=-0.7)
        assert res.scores == [0.0, 0.0] and res.completeness_gap == pytest.approx(0.7)

    def test_single_coordinate(self):
        enc = Encoded((2, 5, 6, 7, 0), 4, ("a", "b", "c"))
        mat = np.zeros((5, 3))
        mat[2, 1] = 0.4
        assert token_attributions(mat, enc).scores == [0.0, 0.4, 0.0]

    def test_shape_check(self):
        with pytest.raises(DimensionMismatch):
            token_attributions(np.zeros((3, 2)), Encoded((2, 5, 0, 0), 2))

    def test_vocab_relabeling_covariant(self, trained):
        model, vocab = trained
        text = "Their care community people commence in endeavour acquire."
        base = explain(model, text, vocab, IGConfig(steps=32))
        # swap ids of two real tokens and the matching embedding rows
        a, b = vocab["care"], vocab["people"]
        mapping = dict(vocab.token_to_id)
        mapping["care"], mapping["people"] = b, a
        v2 = Vocabulary(mapping)
        m2 = model.copy()
        emb = m2.params["embedding"]
        emb[[a, b]] = emb[[b, a]]
        again = explain(m2, text, v2, IGConfig(steps=32))
        assert again.tokens == base.tokens
        np.testing.assert_allclose(again.scores, base.scores, atol=1e-12)

    def test_tokens_are_surface_words(self, trained):
        model, vocab = trained
        res = explain(model, "Care, for PEOPLE!", vocab, IGConfig(steps=8))
        assert res.tokens == ["Care", "for", "PEOPLE"]
        d = res.to_dict()
        assert set(d) == {"sentence", "prediction", "target", "words", "completeness_gap"}
        assert [w["word"] for w in d["words"]] == res.tokens


class TestBuckets:
    @pytest.mark.parametrize("word,score,label", EXAMPLE_ROWS)
    def test_table_rows(self, word, score, label):
        assert bucket_label(score).value == label

    def test_negative_easy(self):
        assert bucket_label(-0.16) is BucketLabel.Easy
        assert bucket_label(-0.5) is BucketLabel.Easy

    def test_custom_thresholds(self):
        assert bucket_label(0.15, (0.2, 0.3, 0.4)) is BucketLabel.Neutral

    def test_text_table(self):
        from e2rstrat.attribution import AttributionResult
        r = AttributionResult([w for w, _, _ in EXAMPLE_ROWS], [s for _, s, _ in EXAMPLE_ROWS])
        lines = r.to_text().splitlines()
        assert len(lines) == 14 and lines[3].split()[-2:] == ["Highly", "Complex"]
