# %% [markdown]
# The majority-class baseline and its closed-form scores.

# %%
from e2rstrat.evaluation import baseline_expected_scores, classification_report, majority_baseline
from e2rstrat.taxonomy import CLASS_LABELS

# 200 instances, 49 of them in the largest class: p = 0.245
counts = [49, 26, 25, 25, 25, 25, 25]
gold = [CLASS_LABELS[i] for i, n in enumerate(counts) for _ in range(n)]
base = majority_baseline(gold)
report = classification_report(gold, base.predict(gold))
print(report.to_text())

# %%
# accuracy = p, weighted F1 = 2p^2/(1+p), macro F1 = 2p/((1+p) C)
print(baseline_expected_scores(0.245, 7))
