# %% [markdown]
# Do the words the model calls complex get dropped in the simplified text?

# %%
from e2rstrat.alignment import alignment_report, removed_words
from e2rstrat.attribution import IGConfig, explain
from e2rstrat.synthetic import bundled_corpus
from e2rstrat.training import TrainConfig, cross_validate

print(removed_words("Sir Keir Rodney Starmer KCB KC is a British politician",
                    ["Starmer is a British politician"]))

# %%
corpus = bundled_corpus()
result = cross_validate(corpus, TrainConfig(seed=0))
model, vocab = result.folds[0].model, result.vocab
attrs = {p.id: explain(model, p.complex_text, vocab, IGConfig(steps=64)) for p in corpus.pairs}

# %%
for threshold in (0.05, 0.10, 0.20):
    rep = alignment_report(corpus, attrs, threshold, top_n=10)
    print(f"threshold {threshold:.2f}: {rep.removed_complex_words}/{rep.total_complex_words} "
          f"removed ({rep.percent})")

# %%
print(alignment_report(corpus, attrs, 0.10, top_n=10).top_csv())
