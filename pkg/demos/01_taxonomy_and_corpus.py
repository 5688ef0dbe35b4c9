# %% [markdown]
# Strategy codes, the class mapping, and corpus statistics.

# %%
from e2rstrat.taxonomy import DEFAULT_TABLE, class_label_of, continuum_position, parse_strategy_code
from e2rstrat.synthetic import bundled_corpus
from e2rstrat.corpus import corpus_stats

# %%
# A fine-grained code resolves to its macro-strategy and to one of seven classes
code = parse_strategy_code("OmiSen")
print(code.code, code.macro.value, "->", class_label_of(code).value)
print("position on the addition/deduction axis:", continuum_position(code.macro))

# %%
for c in DEFAULT_TABLE.codes:
    print(f"{c.code:<10} {c.macro.value:<20} {class_label_of(c).value}")

# %%
corpus = bundled_corpus()
print(len(corpus), "pairs,", len(corpus.labeled()), "labeled")
print(corpus_stats(corpus).to_csv())
