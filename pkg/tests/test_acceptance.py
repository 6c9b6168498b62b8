"""Acceptance criteria, one test each, at their stated tolerances.

Each test records a PASS/FAIL line (printed at the end of the session and
also immediately) and then asserts the criterion.
"""
import time

import numpy as np
import pytest

from icdlab import icd9, linear
from icdlab.embeddings import WordVectorTable, embed_document, embed_sections_concat, embed_stats_concat
from icdlab.evaluation import cross_validate, f1_per_label, kfold_split, macro_f1, micro_f1
from icdlab.experiment import (cmd_compare, cmd_embed, cmd_run, cmd_synth, embed_corpus, load_config, read_embeddings,
                               strip_timing)
from icdlab.linear import TrainConfig, logistic_objective
from icdlab.multilabel import (br_predict, br_train, cc_predict, cc_train, ecc_chain_seed, ecc_predict, ecc_train,
                               mlknn_predict, mlknn_train, seeded_order)
from icdlab.stats import friedman_test, nemenyi_cd, rank_rows
from icdlab.text import PreprocessConfig, preprocess, tokenize

from .conftest import ACCEPTANCE
from .test_multilabel import MLKNN_X, MLKNN_Y, brute_mlknn
from .test_stats import brute_ranks


def record(name, passed, detail):
    ACCEPTANCE.append((name, bool(passed), detail))
    print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    assert passed, f"{name}: {detail}"


def test_embedding_contract():
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    worst, widths_ok = 0.0, True
    for d in (10, 50):
        vocab = [f"w{i}" for i in range(200)]
        table = WordVectorTable({w: rng.normal(size=d) for w in vocab})
        pool = vocab + ["oov_a", "oov_b", "oov_c"]
        for _ in range(1000):
            tokens = [pool[i] for i in rng.integers(0, len(pool), size=int(rng.integers(0, 40)))]
            v = embed_document(tokens, table).values
            if v.any():
                worst = max(worst, abs(float(np.linalg.norm(v)) - 1.0))
            sections = [tokens[i::7] for i in range(7)]
            widths_ok &= len(embed_sections_concat(sections, table)) == 7 * d
            widths_ok &= len(embed_stats_concat(tokens, table)) == 6 * d
    elapsed = time.perf_counter() - start
    record("embedding contract", worst <= 1e-9 and widths_ok and elapsed < 5.0,
           f"max |norm-1| = {worst:.1e}, widths 7d/6d ok = {widths_ok}, {elapsed:.2f}s")


def test_preprocessing_fidelity():
    raw = "Medications on Admission: Omeprazole 20 mg daily, Furosemide 10mg daily."
    got = " ".join(preprocess(tokenize(raw), PreprocessConfig(enabled=True)))
    expected = "medications on admission omeprazole mg daily furosemide 10mg daily"
    record("pre-processing fidelity", got == expected, repr(got))


def test_icd9_mapping():
    start = time.perf_counter()
    cases = {"401.9": ("top", "circ"), "V15.82": ("top", "e+v"), "275.3": ("sub", "endo4"),
             "V86": ("sub", "v12"), "565.0": ("sub", "diges6")}
    wrong = []
    for raw, (level, want) in cases.items():
        code = icd9.parse_code(raw)
        got = icd9.top_level_group(code) if level == "top" else icd9.sub_level_group(code)
        if got != want:
            wrong.append((raw, got))
    n_codes, multi = 0, 0
    codes = [f"{m:03d}" for m in range(1, 1000)] + [f"E{m}" for m in range(800, 1000)] + \
            [f"V{m:02d}" for m in range(1, 92)]
    for raw in codes:
        code = icd9.parse_code(raw)
        owners = [n for n, lo, hi in icd9.TOP_LEVEL_RANGES if lo is not None and lo <= code.major <= hi] \
            if code.kind == icd9.Kind.NUMERIC else ["e+v"]
        multi += len(owners) != 1 or owners[0] != icd9.top_level_group(code)
        n_codes += 1
    elapsed = time.perf_counter() - start
    record("ICD-9 mapping", not wrong and not multi and elapsed < 1.0,
           f"{len(cases) - len(wrong)}/{len(cases)} exemplars, {n_codes} majors scanned, "
           f"{multi} not in exactly one group, {elapsed:.3f}s")


@pytest.fixture(scope="module")
def task_200x18():
    rng = np.random.default_rng(200)
    X = rng.normal(size=(200, 20))
    W = rng.normal(size=(20, 18))
    Y = (X @ W + 0.5 * rng.normal(size=(200, 18)) > 0.3).astype(np.int8)
    return X, Y


def test_br_oracle(task_200x18):
    X, Y = task_200x18
    cfg = TrainConfig(ridge=0.1)
    got = br_predict(br_train(X, Y, cfg), X)
    oracle = np.column_stack([linear.predict_binary(linear.train(X, Y[:, l], cfg), X) for l in range(18)])
    record("BR oracle", np.array_equal(got, oracle), f"{int((got != oracle).sum())} differing bits of {got.size}")


def test_ecc_collapse(task_200x18):
    X, Y = task_200x18
    cfg = TrainConfig(ridge=0.1)
    diffs = []
    for seed in (1, 22, 333):
        s = ecc_chain_seed(seed, 0)
        ecc = ecc_predict(ecc_train(X, Y, 1, cfg, seed), X)
        cc = cc_predict(cc_train(X, Y, seeded_order(18, s), cfg.with_seed(s)), X)
        diffs.append(int((ecc != cc).sum()))
    record("ECC collapse", diffs == [0, 0, 0], f"differing bits per seed {diffs}")


def test_cc_signal_propagation():
    # B is an exact copy of A; the features carry information about A only
    rng = np.random.default_rng(7)
    n, d = 400, 10
    X = rng.normal(size=(n, d))
    A = (X[:, 0] + 0.5 * rng.normal(size=n) > 0).astype(np.int8)
    Y = np.column_stack([A, A])
    cfg = TrainConfig(ridge=1e-3)
    half = n // 2
    br = br_predict(br_train(X[:half], Y[:half], cfg), X[half:])
    cc = cc_predict(cc_train(X[:half], Y[:half], (0, 1), cfg), X[half:])
    f_br, f_cc = f1_per_label(Y[half:], br, 1), f1_per_label(Y[half:], cc, 1)
    record("CC signal propagation", f_cc - f_br >= 0.2,
           f"F1 on B: CC {f_cc:.3f}, BR {f_br:.3f}, gap {f_cc - f_br:+.3f} (need >= +0.2)")


def test_mlknn_oracle():
    rng = np.random.default_rng(6)
    model = mlknn_train(MLKNN_X, MLKNN_Y, k=2, s=1.0)
    queries = np.vstack([MLKNN_X, rng.uniform(-0.5, 1.5, size=(50, 2))])
    mismatches = sum(list(mlknn_predict(model, q)) != brute_mlknn(MLKNN_X, MLKNN_Y, q, 2, 1.0) for q in queries)
    prior = mlknn_train(np.arange(4.0)[:, None], np.array([[1], [1], [0], [0]]), k=1, s=1.0).priors[0]
    record("MLkNN oracle", mismatches == 0 and abs(prior - 0.5) < 1e-12,
           f"{mismatches}/{len(queries)} query mismatches, prior {prior}")


def test_gradient_check():
    rng = np.random.default_rng(8)
    worst = 0.0
    h = 1e-6
    for _ in range(50):
        n, d = int(rng.integers(2, 15)), int(rng.integers(1, 8))
        X, y = rng.normal(size=(n, d)), rng.integers(0, 2, size=n).astype(float)
        w, b, ridge = rng.normal(size=d), float(rng.normal()), float(rng.uniform(0, 3))
        _, gw, gb = logistic_objective(w, b, X, y, ridge)
        f = lambda w_, b_: logistic_objective(w_, b_, X, y, ridge)[0]
        num = [(f(w + h * e, b) - f(w - h * e, b)) / (2 * h) for e in np.eye(d)]
        num.append((f(w, b + h) - f(w, b - h)) / (2 * h))
        num, ana = np.array(num), np.append(gw, gb)
        worst = max(worst, float(np.linalg.norm(ana - num) / max(np.linalg.norm(num), 1e-12)))
    record("base-learner gradient check", worst < 1e-5, f"max relative error {worst:.2e}")


def test_metrics_oracle():
    Yt = np.array([[1, 1], [0, 1]])
    Yp = np.array([[1, 0], [0, 0]])
    vals = (macro_f1(Yt, Yp), micro_f1(Yt, Yp), macro_f1(Yt, Yt), micro_f1(Yt, Yt))
    record("metrics oracle", vals == (0.5, 0.5, 1.0, 1.0),
           "macro/micro {:.3f}/{:.3f}, perfect {:.1f}/{:.1f}".format(*vals))


def test_friedman_nemenyi():
    chi2 = friedman_test(np.tile([0.9, 0.5, 0.1], (4, 1))).chi2
    cd = nemenyi_cd(2, 18, 0.05)
    rng = np.random.default_rng(9)
    rejects = sum(friedman_test(np.full((int(rng.integers(2, 20)), int(rng.integers(2, 8))), rng.uniform())).reject
                  for _ in range(50))
    rank_bad = 0
    for _ in range(100):
        table = rng.integers(0, 4, size=(int(rng.integers(2, 12)), int(rng.integers(2, 8)))).astype(float)
        rank_bad += not np.array_equal(rank_rows(table), [brute_ranks(r) for r in table])
    ok = abs(chi2 - 8) < 1e-12 and abs(cd - 0.4619) <= 5e-4 and rejects == 0 and rank_bad == 0
    record("Friedman/Nemenyi", ok, f"chi2_F = {chi2:g}, CD = {cd:.4f}, identical-table rejections {rejects}/50, "
                                   f"rank oracle mismatches {rank_bad}/100")


@pytest.fixture(scope="module")
def synth_500(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth500")
    cmd_synth(n_admissions=500, n_labels=18, d=32, seed=0, signal=1.0, out_dir=out)
    return out


@pytest.mark.slow
def test_end_to_end_determinism(synth_500, tmp_path):
    cfg = load_config(synth_500 / "experiment.conf", strategy="ecc", ensemble_size=10, folds=10, name="ecc")
    start = time.perf_counter()
    a = cmd_run(cfg, tmp_path / "a")
    elapsed = time.perf_counter() - start
    b = cmd_run(cfg, tmp_path / "b")
    same_report = strip_timing(a) == strip_timing(b)
    br_cfg = load_config(synth_500 / "experiment.conf", strategy="br", folds=10, name="br")
    cmd_run(br_cfg, tmp_path / "br")
    cmd_compare([tmp_path / "a", tmp_path / "br"], out_dir=tmp_path / "c1")
    cmd_compare([tmp_path / "b", tmp_path / "br"], out_dir=tmp_path / "c2")
    same_svg = (tmp_path / "c1" / "cd_plot.svg").read_bytes() == (tmp_path / "c2" / "cd_plot.svg").read_bytes()
    record("end-to-end determinism", same_report and same_svg and elapsed < 300,
           f"reports identical = {same_report}, CD plots identical = {same_svg}, "
           f"500x18 10-fold ECC(I=10) in {elapsed:.1f}s (macro F1 {a['macro_f1']:.3f})")


def _chance_band(Y, pred, n_seeds=20):
    """Macro F1 of the run's own predictions re-paired with shuffled truth rows; mean +/- 1.96 sd."""
    scores = []
    for s in range(n_seeds):
        perm = np.random.default_rng(s).permutation(len(Y))
        scores.append(macro_f1(Y[perm], pred))
    mu, sd = float(np.mean(scores)), float(np.std(scores, ddof=1))
    return mu - 1.96 * sd, mu + 1.96 * sd


@pytest.mark.slow
def test_planted_signal_sanity(synth_500, tmp_path):
    # composition widths on the synthetic corpus
    widths = {}
    for comp in ("sumnorm", "sections", "stats"):
        cfg = load_config(synth_500 / "experiment.conf", composition=comp)
        _, matrix, _ = read_embeddings(cmd_embed(cfg, tmp_path / f"{comp}.csv"))
        widths[comp] = (matrix.shape[1], bool(np.all(np.isfinite(matrix))))
    dims_ok = widths == {"sumnorm": (32, True), "sections": (224, True), "stats": (192, True)}

    high = cmd_run(load_config(synth_500 / "experiment.conf", strategy="br"), tmp_path / "high")

    null_dir = tmp_path / "null"
    cmd_synth(n_admissions=500, n_labels=18, d=32, seed=1, signal=0.0, out_dir=null_dir)
    null_cfg = load_config(null_dir / "experiment.conf", strategy="br")
    null = cmd_run(null_cfg, tmp_path / "null_run")
    emb = embed_corpus(null_cfg)
    Y = icd9.build_label_matrix(emb.admission_ids, icd9.load_labels(null_cfg.labels),
                                icd9.build_label_space([], "top18")).matrix
    cv = cross_validate(emb.matrix, Y, null_cfg.strategy_spec(), null_cfg.train_config(),
                        kfold_split(len(Y), null_cfg.folds, null_cfg.seed), null_cfg.seed)
    lo, hi = _chance_band(Y, cv.predictions)
    in_band = lo <= null["macro_f1"] <= hi
    record("planted-signal sanity", dims_ok and high["macro_f1"] >= 0.9 and in_band,
           f"widths {widths}, high-signal macro F1 {high['macro_f1']:.3f} (>= 0.9), null macro F1 "
           f"{null['macro_f1']:.3f} in chance band [{lo:.3f}, {hi:.3f}] = {in_band}")
