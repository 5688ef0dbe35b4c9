# %% [markdown]
# Integrated Gradients on a trained model: word scores, buckets and the
# completeness check.

# %%
from e2rstrat.attribution import IGConfig, explain
from e2rstrat.synthetic import bundled_corpus
from e2rstrat.training import TrainConfig, cross_validate

corpus = bundled_corpus()
result = cross_validate(corpus, TrainConfig(seed=0))
model, vocab = result.folds[0].model, result.vocab

# %%
sentence = corpus.pairs[0].complex_text
res = explain(model, sentence, vocab, IGConfig(steps=256))
print(sentence)
print("predicted:", model.class_names[res.prediction.predicted])
print(res.to_text())

# %%
# Attributions should sum to F(x) - F(baseline); the quadrature rule matters
for method in ("riemann_right", "riemann_trapezoid", "gausslegendre"):
    for steps in (16, 64, 256):
        gap = explain(model, sentence, vocab, IGConfig(steps=steps, method=method)).completeness_gap
        print(f"{method:<18} steps={steps:<4} gap={gap:.2e}")
