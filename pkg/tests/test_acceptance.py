"""Acceptance criteria, one test each. Every test prints a PASS/FAIL line;
the lines are repeated in the terminal summary so they survive capture."""

import math
import time
from collections import Counter
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import random_model
from e2rstrat.alignment import alignment_report, format_percent, removed_words
from e2rstrat.attribution import IGConfig, bucket_label, explain, path_integral
from e2rstrat.attribution import AttributionResult
from e2rstrat.cli import main
from e2rstrat.corpus import Corpus, SentencePair
from e2rstrat.evaluation import classification_report, f1_score, majority_baseline
from e2rstrat.model import PARAM_NAMES, grad_wrt_embeddings, loss_and_grads
from e2rstrat.synthetic import bundled_corpus
from e2rstrat.taxonomy import CLASS_LABELS
from e2rstrat.training import (TrainConfig, clip_gradient_norm, compute_class_weights,
                               cross_validate, stratified_folds)

from test_attribution import EXAMPLE_ROWS
from test_model import fd_embedding_grad, rel_err

RESULTS = []


@contextmanager
def criterion(num, title, limit_s):
    t0 = time.perf_counter()
    detail = {}
    try:
        yield detail
        elapsed = time.perf_counter() - t0
        assert elapsed < limit_s, f"runtime {elapsed:.1f}s over {limit_s}s"
    except AssertionError as exc:
        line = f"FAIL  {num:>2}. {title}: {exc}".splitlines()[0]
        RESULTS.append(line)
        print(line)
        raise
    line = f"PASS  {num:>2}. {title} ({time.perf_counter() - t0:.2f}s)"
    if detail:
        line += "  " + ", ".join(f"{k}={v}" for k, v in detail.items())
    RESULTS.append(line)
    print(line)


def test_01_class_weight_exactness():
    rng = np.random.default_rng(1)
    with criterion(1, "class weights w_c * freq_c = N/2", 1.0) as d:
        worst = 0.0
        for _ in range(1000):
            k = int(rng.integers(1, 8))
            labels = rng.integers(0, k, size=int(rng.integers(1, 400))).tolist()
            w = compute_class_weights(labels)
            n = len(labels)
            for c, f in w.frequencies.items():
                worst = max(worst, abs(w[c] * f - n / 2))
        assert worst <= 1e-12, f"max deviation {worst}"
        d["max_dev"] = f"{worst:.1e}"


def test_02_clipping():
    rng = np.random.default_rng(2)
    with criterion(2, "global norm clipping", 1.0) as d:
        clipped = 0
        for _ in range(1000):
            g = rng.standard_normal(int(rng.integers(1, 50))) * rng.choice([0.01, 0.1, 1.0, 10.0])
            before = g.copy()
            out = clip_gradient_norm(g, 1.0)
            norm = np.linalg.norm(before)
            assert np.linalg.norm(out) <= 1.0 + 1e-9
            if norm <= 1.0:
                assert out.tobytes() == before.tobytes()
            else:
                clipped += 1
                cos = out @ before / (np.linalg.norm(out) * norm)
                assert abs(cos - 1) <= 1e-12
                assert np.allclose(out * norm, before, rtol=1e-12, atol=0)
        d["clipped"] = clipped


def test_03_stratification():
    rng = np.random.default_rng(3)
    with criterion(3, "stratified folds partition and balance", 5.0) as d:
        checked = 0
        for _ in range(200):
            n_cls = int(rng.integers(1, 8))
            labels = rng.integers(0, n_cls, size=int(rng.integers(10, 300))).tolist()
            for k in range(2, 11):
                if k > len(labels):
                    continue
                folds = stratified_folds(labels, k, seed=int(rng.integers(1 << 30)))
                assert sorted(np.concatenate(folds).tolist()) == list(range(len(labels)))
                for c in set(labels):
                    per = [sum(1 for i in f if labels[i] == c) for f in folds]
                    assert max(per) - min(per) <= 1, (c, per)
                checked += 1
        d["splits"] = checked


def test_04_baseline_reconciliation():
    with criterion(4, "majority baseline 24.5% / 9.6% / 5.6%", 1.0) as d:
        counts = [49, 26, 25, 25, 25, 25, 25]
        gold = [CLASS_LABELS[i] for i, n in enumerate(counts) for _ in range(n)]
        base = majority_baseline(gold)
        rep = classification_report(gold, base.predict(gold))
        assert abs(rep.accuracy - 0.245) <= 5e-4, rep.accuracy
        assert abs(rep.weighted["f1"] - 0.096) <= 1e-3, rep.weighted["f1"]
        assert abs(rep.macro["f1"] - 0.056) <= 1e-3, rep.macro["f1"]
        d.update(acc=f"{rep.accuracy:.4f}", wF1=f"{rep.weighted['f1']:.4f}", mF1=f"{rep.macro['f1']:.4f}")


def test_05_f1_arithmetic():
    with criterion(5, "F1 arithmetic (1.00, 0.88) -> 0.93 and (0.80, 1.00) -> 0.89", 1.0) as d:
        a, b = f1_score(1.00, 0.88), f1_score(0.80, 1.00)
        d.update(f1_a=f"{a:.4f}", f1_b=f"{b:.4f}")
        assert round(b, 2) == 0.89, f"F1(0.80, 1.00) = {b:.4f}"
        assert round(a, 2) == 0.93, f"F1(1.00, 0.88) = {a:.4f} rounds to {round(a, 2)}, not 0.93"


def test_06_gradient_check():
    rng = np.random.default_rng(6)
    with criterion(6, "analytic vs central-difference gradients", 30.0) as d:
        worst = 0.0
        for _ in range(100):
            m = random_model(rng, activation=["tanh", "linear"][int(rng.integers(2))])
            L = m.config.max_len
            mask = np.zeros(L)
            mask[: int(rng.integers(1, L + 1))] = 1
            emb = rng.standard_normal((L, m.config.embed_dim))
            c = int(rng.integers(m.config.num_classes))
            worst = max(worst, rel_err(grad_wrt_embeddings(m, emb, c, mask),
                                       fd_embedding_grad(m, emb, mask, c)))
        worst_p = 0.0
        for _ in range(20):
            m = random_model(rng, vocab_size=10, max_len=4)
            ids = rng.integers(3, 10, size=(3, 4))
            lengths = rng.integers(1, 5, size=3)
            targets = rng.integers(0, m.config.num_classes, size=3)
            w = rng.uniform(0.5, 2.0, size=3)
            _, grads = loss_and_grads(m, ids, lengths, targets, w)
            h = 1e-5
            for name in PARAM_NAMES:
                p = m.params[name]
                fd = np.zeros_like(p)
                for i in np.ndindex(p.shape):
                    old = p[i]
                    p[i] = old + h
                    up, _ = loss_and_grads(m, ids, lengths, targets, w)
                    p[i] = old - h
                    dn, _ = loss_and_grads(m, ids, lengths, targets, w)
                    p[i] = old
                    fd[i] = (up - dn) / (2 * h)
                worst_p = max(worst_p, rel_err(grads[name], fd) if np.abs(fd).max() > 1e-6 else 0.0)
        assert worst <= 1e-4, f"embedding grads rel err {worst:.2e}"
        assert worst_p <= 1e-4, f"parameter grads rel err {worst_p:.2e}"
        d.update(emb_rel=f"{worst:.1e}", param_rel=f"{worst_p:.1e}")


@pytest.fixture(scope="module")
def desk_models():
    corpus = bundled_corpus()
    res = cross_validate(corpus, TrainConfig())
    return corpus, res


def test_07_ig_axioms(desk_models):
    corpus, res = desk_models
    rng = np.random.default_rng(7)
    with criterion(7, "IG: linear closed form, completeness, step doubling", 60.0) as d:
        worst_lin = 0.0
        for steps in (1, 4, 64):
            for _ in range(20):
                m = random_model(rng, activation="linear")
                L = m.config.max_len
                n = int(rng.integers(1, L + 1))
                mask = np.r_[np.ones(n), np.zeros(L - n)]
                x = rng.standard_normal((L, m.config.embed_dim))
                base = rng.standard_normal((L, m.config.embed_dim))
                c = int(rng.integers(m.config.num_classes))
                ig = path_integral(m, x, base, mask, c, steps)
                w = m.params["W2"][c] @ m.params["W1"]
                exact = (mask / n)[:, None] * w[None, :] * (x - base)
                worst_lin = max(worst_lin, float(np.abs(ig - exact).max()))
        assert worst_lin <= 1e-10, f"linear closed form off by {worst_lin:.1e}"

        worst_gap, worst_rise = 0.0, -np.inf
        for fold in res.folds:
            for pair in corpus.pairs:
                gaps = [explain(fold.model, pair.complex_text, res.vocab, IGConfig(steps=s)).completeness_gap
                        for s in (8, 16, 32, 64, 128, 256)]
                worst_gap = max(worst_gap, gaps[-1])
                worst_rise = max(worst_rise, max(b - a for a, b in zip(gaps, gaps[1:])))
        assert worst_gap <= 1e-3, f"completeness gap {worst_gap:.2e} at 256 steps"
        assert worst_rise <= 1e-6, f"gap rose by {worst_rise:.2e} on doubling"
        d.update(linear=f"{worst_lin:.1e}", gap256=f"{worst_gap:.1e}", max_rise=f"{worst_rise:.1e}")


def test_08_bucket_oracle():
    with criterion(8, "bucket labels for all 13 table rows", 1.0) as d:
        got = [bucket_label(s).value for _, s, _ in EXAMPLE_ROWS]
        want = [lab for _, _, lab in EXAMPLE_ROWS]
        assert got == want, list(zip(got, want))
        d["rows"] = len(got)


def test_09_alignment_arithmetic():
    with criterion(9, "alignment ratio, percent format and hand corpus", 1.0) as d:
        assert format_percent(877, 1303) == "67.31%"
        starmer = removed_words("Sir Keir Rodney Starmer KCB KC is a British politician",
                                ["Starmer is a British politician"])
        assert starmer == {"sir", "keir", "rodney", "kcb", "kc"}, starmer
        corpus = Corpus((
            SentencePair("s", "Sir Keir Rodney Starmer KCB KC is a British politician",
                         ("Starmer is a British politician",)),
            SentencePair("c", "Provide financially sustainable care", ("Give money for care",)),
            SentencePair("g", "Citizens shall commence procedures", ("People start", "Citizens act")),
        ))

        def attr(*ws):
            return AttributionResult([w for w, _ in ws], [s for _, s in ws])

        attrs = {
            "s": attr(("Sir", .3), ("Keir", .2), ("Rodney", .05), ("Starmer", .4), ("KCB", .12),
                      ("KC", .1), ("is", 0), ("a", 0), ("British", .15), ("politician", -.1)),
            "c": attr(("Provide", .18), ("financially", -.1), ("sustainable", .3), ("care", .15)),
            "g": attr(("Citizens", .25), ("shall", .02), ("commence", .5), ("procedures", .11)),
        }
        # complex: s {sir keir starmer kcb kc british}, c {provide sustainable care},
        # g {citizens commence procedures}; removed among them: s 4, c 2, g 2
        rep = alignment_report(corpus, attrs, 0.10)
        assert (rep.total_complex_words, rep.removed_complex_words) == (12, 8)
        assert rep.overlap_ratio == 8 / 12 and rep.percent == "66.67%"
        d["hand_ratio"] = rep.percent


def test_10_end_to_end(tmp_path):
    corpus_path = tmp_path / "corpus.jsonl"
    bundled_corpus().save(corpus_path)
    out = tmp_path / "run"
    with criterion(10, "train --folds 5 on the bundled corpus: overfit and deterministic", 300.0) as d:
        args = ["train", "--corpus", str(corpus_path), "--folds", "5", "--seed", "7", "--out", str(out)]
        assert main(args) == 0
        first = {p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}
        assert main(args) == 0
        second = {p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}
        assert first.keys() == second.keys()
        changed = [str(k) for k in first if first[k] != second[k]]
        assert not changed, f"outputs differ: {changed}"
        import json
        accs = [f["train_accuracy"] for f in json.loads(second[next(k for k in second if k.name == "report.json")])["folds"]]
        assert len(accs) == 5 and min(accs) >= 0.95, accs
        d.update(train_acc=accs, files=len(first))
