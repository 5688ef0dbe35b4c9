# %% [markdown]
# Weighted cross-entropy training with stratified 5-fold cross-validation.

# %%
from e2rstrat.synthetic import bundled_corpus
from e2rstrat.training import TrainConfig, compute_class_weights, cross_validate, task_instances

corpus = bundled_corpus()
_, targets, names = task_instances(corpus)

# %%
# Rare classes get larger weights; weight times frequency is always N/2
w = compute_class_weights([names[t] for t in targets])
for c in names:
    print(f"{c:<24} freq={w.frequencies[c]:>2}  weight={w[c]:.3f}")

# %%
result = cross_validate(corpus, TrainConfig(seed=0))
for f in result.folds:
    print(f"fold {f.fold_index}: best epoch {f.best_epoch} of {len(f.history)}, "
          f"train acc {f.train_accuracy:.2f}, val acc {f.report.accuracy:.2f}")

# %%
print(result.report.to_text())
