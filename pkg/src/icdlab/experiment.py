"""Config-driven experiment pipeline: embed corpus -> label matrix -> CV -> reports.

Every artifact written here carries the config hash and seed, and nothing
except the ``timing`` block of a run report depends on wall-clock state.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import time
from collections import Counter, OrderedDict
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import icd9
from .embeddings import (Composition, average_embeddings, embed_document, embed_sections_concat,
                         embed_stats_concat, load_vector_file, write_vector_file)
from .errors import ContractError, DataIntegrityError, IcdlabError, ParseError, StageError
from .evaluation import ScoreTable, cross_validate, kfold_split
from .linear import TrainConfig
from .multilabel import Strategy
from .stats import cliques, friedman_test, nemenyi_cd, render_cd_plot
from .text import (SECTION_HEADERS, PreprocessConfig, apply_pos_tags, apply_split_tags, load_corpus,
                   load_pos_tags, preprocess, preprocess_sections, split_sections, tokenize)

log = logging.getLogger(__name__)

COMPOSITIONS = ("sumnorm", "sections", "stats")
TAGGINGS = ("none", "split", "pos")
STRATEGIES = ("br", "cc", "ecc", "mlknn")
_PATH_KEYS = ("corpus", "labels", "vectors", "pos_tags")


@dataclass(frozen=True)
class ExperimentConfig:
    corpus: Optional[str] = None
    labels: Optional[str] = None
    vectors: Optional[str] = None
    label_mode: str = "top18"
    min_support: int = 10
    composition: str = "sumnorm"
    tagging: str = "none"
    pos_tags: Optional[str] = None
    preprocess: bool = False
    max_tokens: Optional[int] = None
    category: str = "Discharge summary"
    strategy: str = "ecc"
    ensemble_size: int = 10
    k: int = 10
    smoothing: float = 1.0
    ridge: float = 1.0
    solver: str = "batch"
    epochs: int = 50
    learning_rate: float = 0.01
    tolerance: float = 1e-6
    max_iterations: int = 1000
    folds: int = 10
    seed: int = 0
    name: Optional[str] = None
    out: str = "results"

    def __post_init__(self):
        icd9.LabelMode(self.label_mode)
        for key, allowed in (("composition", COMPOSITIONS), ("tagging", TAGGINGS), ("strategy", STRATEGIES)):
            if getattr(self, key) not in allowed:
                raise ContractError(f"{key} must be one of {', '.join(allowed)}; got {getattr(self, key)!r}")
        if self.tagging == "pos" and not self.pos_tags:
            raise ContractError("tagging=pos requires pos_tags")
        if self.tagging == "pos" and self.composition == "sections":
            raise ContractError("tagging=pos cannot be combined with composition=sections")
        if self.folds < 2:
            raise ContractError("folds must be >= 2")
        self.train_config()  # validates solver knobs
        self.strategy_spec()

    def train_config(self) -> TrainConfig:
        return TrainConfig(self.ridge, self.solver, self.epochs, self.learning_rate, self.tolerance,
                           self.max_iterations, self.seed)

    def strategy_spec(self) -> Strategy:
        return Strategy(self.strategy, n_chains=self.ensemble_size, k=self.k, smoothing=self.smoothing)

    def preprocess_config(self) -> PreprocessConfig:
        return PreprocessConfig(self.preprocess, self.max_tokens)

    def echo(self) -> dict:
        """Config as recorded in outputs (the output directory is not part of it)."""
        data = dataclasses.asdict(self)
        data.pop("out")
        return data

    @property
    def hash(self) -> str:
        blob = json.dumps(self.echo(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]

    def check_files(self):
        for key in _PATH_KEYS:
            value = getattr(self, key)
            if key == "pos_tags" and self.tagging != "pos":
                continue
            if value is None:
                raise ContractError(f"config key {key!r} is required")
            if not Path(value).is_file():
                raise ContractError(f"{key} file not found: {value}")


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


def _coerce(key, value):
    kind = _FIELD_TYPES[key]
    if value is None:
        return None
    if isinstance(value, str):
        value = value.strip()
        if "Optional" in kind and value.lower() in ("", "none"):
            return None
    if "bool" in kind:
        if isinstance(value, bool):
            return value
        if value.lower() in ("1", "true", "yes", "on"):
            return True
        if value.lower() in ("0", "false", "no", "off"):
            return False
        raise ContractError(f"{key}: expected a boolean, got {value!r}")
    try:
        if "int" in kind:
            return int(value)
        if "float" in kind:
            return float(value)
    except ValueError:
        raise ContractError(f"{key}: cannot parse {value!r}") from None
    return str(value)


def parse_config_text(text, base_dir=None) -> dict:
    """``key = value`` lines; ``#`` starts a comment. Relative paths resolve against ``base_dir``."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise ParseError(f"expected key = value, got {raw!r}", line=lineno)
        if key not in _FIELD_TYPES:
            raise ParseError(f"unknown config key {key!r}", line=lineno)
        values[key] = value.strip()
    if base_dir is not None:
        for key in (*_PATH_KEYS, "out"):
            if values.get(key) and not Path(values[key]).is_absolute():
                values[key] = str(Path(base_dir) / values[key])
    return values


def load_config(path=None, **overrides) -> ExperimentConfig:
    """Read a config file (optional) and apply overrides; overrides win, ``None`` means unset."""
    values = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(str(exc), path=path) from None
        try:
            values = parse_config_text(text, base_dir=path.parent)
        except ParseError as exc:
            raise ParseError(str(exc), path=path) from None
    values.update({k.replace("-", "_"): v for k, v in overrides.items() if v is not None})
    unknown = set(values) - set(_FIELD_TYPES)
    if unknown:
        raise ContractError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return ExperimentConfig(**{k: _coerce(k, v) for k, v in values.items()})


def write_config(cfg: ExperimentConfig, path):
    lines = [f"# icdlab experiment config (hash {cfg.hash})"]
    for key, value in dataclasses.asdict(cfg).items():
        if value is None:
            continue
        lines.append(f"{key} = {str(value).lower() if isinstance(value, bool) else value}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- embedding stage ----------------------------------------------------------

@dataclass
class EmbeddedCorpus:
    admission_ids: list
    matrix: np.ndarray
    composition: str
    warnings: list = field(default_factory=list)


def _pos_tokens(pairs, pcfg: PreprocessConfig):
    if pcfg.enabled:
        kept = []
        for word, tag in pairs:
            cleaned = preprocess([word], PreprocessConfig(True))
            if cleaned:
                kept.append((cleaned[0], tag))
        pairs = kept[: pcfg.max_tokens] if pcfg.max_tokens else kept
    return apply_pos_tags(pairs)


def note_embedding(note, cfg: ExperimentConfig, table, pos_tags=None, counters=None):
    """Embed one note according to the config's tagging, pre-processing and composition."""
    pcfg = cfg.preprocess_config()
    if cfg.tagging == "pos":
        if note.note_id not in pos_tags:
            raise ContractError(f"no POS tags for note {note.note_id!r}")
        tokens = _pos_tokens(pos_tags[note.note_id], pcfg)
    elif cfg.tagging == "split" or cfg.composition == "sections":
        sectioned = split_sections(note.text)
        if counters is not None and sectioned.repeated_headers:
            counters["repeated_headers"] += 1
        sections = preprocess_sections(sectioned.sections, pcfg)
        if cfg.tagging == "split":
            sections = [[f"{i}_{t}" for t in sec] for i, sec in enumerate(sections)]
        if cfg.composition == "sections":
            return embed_sections_concat(sections, table)
        tokens = [t for sec in sections for t in sec]
    else:
        tokens = preprocess(tokenize(note.text), pcfg)

    if cfg.composition == "stats":
        return embed_stats_concat(tokens, table)
    return embed_document(tokens, table)


def embed_corpus(cfg: ExperimentConfig, table=None) -> EmbeddedCorpus:
    """Embed every admission that has at least one note of ``cfg.category``.

    Multiple notes of one admission are embedded independently and averaged.
    Admissions come out in order of first appearance in the corpus.
    """
    notes = load_corpus(cfg.corpus)
    table = table or load_vector_file(cfg.vectors)
    pos_tags = load_pos_tags(cfg.pos_tags) if cfg.tagging == "pos" else None
    wanted = cfg.category.strip().lower()

    grouped = OrderedDict()
    for note in notes:
        grouped.setdefault(note.admission_id, [])
        if note.category.strip().lower() == wanted:
            grouped[note.admission_id].append(note)

    counters = Counter()
    ids, rows = [], []
    for adm, adm_notes in grouped.items():
        if not adm_notes:
            counters["skipped"] += 1
            continue
        embs = [note_embedding(n, cfg, table, pos_tags, counters) for n in adm_notes]
        rows.append(np.asarray(embs[0] if len(embs) == 1 else average_embeddings(embs), dtype=np.float64))
        ids.append(adm)

    warnings = []
    if counters["skipped"]:
        warnings.append(f"skipped {counters['skipped']} admission(s) without a '{cfg.category}' note")
    if counters["repeated_headers"]:
        warnings.append(f"{counters['repeated_headers']} note(s) repeat a section header; first occurrence used")
    if not ids:
        raise ContractError(f"no admission has a '{cfg.category}' note")
    width = {"sumnorm": table.dimension, "sections": 7 * table.dimension, "stats": 6 * table.dimension}
    matrix = np.vstack(rows) if rows else np.zeros((0, width[cfg.composition]))
    return EmbeddedCorpus(ids, matrix, cfg.composition, warnings)


def write_embeddings(emb: EmbeddedCorpus, path, cfg: ExperimentConfig):
    """CSV with a ``#`` metadata line: ``admission_id,e0,...,e{m-1}``; floats in shortest round-trip form."""
    n, m = emb.matrix.shape
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# icdlab-embeddings n={n} m={m} composition={emb.composition} "
                 f"seed={cfg.seed} config_hash={cfg.hash}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["admission_id", *(f"e{j}" for j in range(m))])
        for adm, row in zip(emb.admission_ids, emb.matrix):
            writer.writerow([adm, *(repr(float(v)) for v in row)])


def read_embeddings(path):
    """Inverse of :func:`write_embeddings`: returns ``(ids, matrix, metadata)``."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.startswith("# icdlab-embeddings"):
            raise ParseError("missing icdlab-embeddings metadata line", line=1, path=path)
        meta = dict(item.split("=", 1) for item in first[1:].split()[1:])
        reader = csv.reader(fh)
        next(reader, None)
        ids, rows = [], []
        for lineno, row in enumerate(reader, start=3):
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError:
                raise ParseError("unparseable value", line=lineno, path=path) from None
            ids.append(row[0])
    matrix = np.array(rows, dtype=np.float64).reshape(len(ids), int(meta["m"]))
    return ids, matrix, meta


# -- commands -----------------------------------------------------------------

@contextmanager
def _stage(name, timings):
    start = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except (IcdlabError, OSError, ValueError) as exc:
        raise StageError(name, exc) from exc
    finally:
        timings[name] = round(time.perf_counter() - start, 6)


def cmd_embed(cfg: ExperimentConfig, out_path=None) -> Path:
    timings = {}
    with _stage("config", timings):
        cfg.check_files()
    with _stage("embed", timings):
        emb = embed_corpus(cfg)
    out_path = Path(out_path) if out_path else Path(cfg.out) / "embeddings.csv"
    with _stage("write", timings):
        out_path.parent.mkdir(parents=True, exist_ok=True)
        write_embeddings(emb, out_path, cfg)
    for w in emb.warnings:
        log.warning(w)
    return out_path


def _write_outputs(files: dict, out_dir: Path):
    """Write all files or none: anything written before a failure is removed."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        for name, text in files.items():
            path = out_dir / name
            path.write_text(text, encoding="utf-8")
            written.append(path)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise


def run_report(cfg: ExperimentConfig):
    """Execute embed -> labels -> CV; returns ``(report, per_label_rows)`` without writing anything."""
    timings = {}
    with _stage("config", timings):
        cfg.check_files()
    with _stage("embed", timings):
        emb = embed_corpus(cfg)
    warnings = list(emb.warnings)
    with _stage("labels", timings):
        assignments = icd9.load_labels(cfg.labels)
        known = set(emb.admission_ids)
        kept = [(a, c) for a, c in assignments if a in known]
        dropped = len({a for a, _ in assignments} - known)
        if dropped:
            warnings.append(f"ignored codes of {dropped} admission(s) absent from the embedded corpus")
        space = icd9.build_label_space(kept, cfg.label_mode, cfg.min_support)
        if len(space) == 0:
            raise ContractError("label space is empty")
        labels = icd9.build_label_matrix(emb.admission_ids, kept, space)
    with _stage("cv", timings):
        split = kfold_split(len(emb.admission_ids), cfg.folds, cfg.seed)
        result = cross_validate(emb.matrix, labels.matrix, cfg.strategy_spec(), cfg.train_config(), split, cfg.seed)

    freq = labels.frequencies()
    per_label = [
        {"label": lab, "f1": float(result.per_label_f1[j]), "support": int(labels.matrix[:, j].sum()),
         "frequency": float(freq[j]), "tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn}
        for j, (lab, c) in enumerate(zip(space.labels, result.counts))
    ]
    report = {
        "format": "icdlab.run",
        "version": 1,
        "name": cfg.name,
        "config": cfg.echo(),
        "config_hash": cfg.hash,
        "seed": cfg.seed,
        "label_mode": cfg.label_mode,
        "labels": list(space.labels),
        "n_admissions": len(emb.admission_ids),
        "embedding": {"composition": emb.composition, "dimension": int(emb.matrix.shape[1])},
        "per_label_f1": {row["label"]: row["f1"] for row in per_label},
        "micro_f1": float(result.micro_f1),
        "macro_f1": float(result.macro_f1),
        "folds": result.metadata(),
        "warnings": warnings,
        "timing": timings,
    }
    return report, per_label


def _per_label_csv(rows, cfg):
    lines = [f"# config_hash={cfg.hash} seed={cfg.seed}", "label,f1,support,frequency,tp,fp,fn,tn"]
    for r in rows:
        lines.append(",".join([_csv_cell(r["label"]), repr(r["f1"]), str(r["support"]), repr(r["frequency"]),
                               str(r["tp"]), str(r["fp"]), str(r["fn"]), str(r["tn"])]))
    return "\n".join(lines) + "\n"


def _csv_cell(value):
    return f'"{value}"' if any(ch in value for ch in ',"\n') else value


def cmd_run(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Run one experiment and write ``report.json`` and ``per_label.csv``."""
    report, per_label = run_report(cfg)
    out_dir = Path(out_dir or cfg.out)
    try:
        _write_outputs({
            "report.json": json.dumps(report, indent=2, sort_keys=True) + "\n",
            "per_label.csv": _per_label_csv(per_label, cfg),
        }, out_dir)
    except OSError as exc:
        raise StageError("write", exc) from exc
    for w in report["warnings"]:
        log.warning(w)
    return report


def strip_timing(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}


def load_report(path) -> dict:
    path = Path(path)
    if path.is_dir():
        path = path / "report.json"
    try:
        report = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read run report ({exc})", path=path) from None
    if report.get("format") != "icdlab.run":
        raise ParseError("not an icdlab run report", path=path)
    report["_source"] = str(path)
    return report


def cmd_compare(runs: Sequence, alpha=0.05, out_dir=None, names=None) -> dict:
    """Friedman + Nemenyi over per-label F1 of two or more runs; writes the CD diagram.

    ``runs`` are run directories, report paths or already-loaded reports.
    """
    reports = [r if isinstance(r, dict) else load_report(r) for r in runs]
    if len(reports) < 2:
        raise ContractError("compare needs at least two runs")

    if names is None:
        names = []
        for r in reports:
            src = r.get("_source")
            names.append(r.get("name") or (Path(src).parent.name if src else None) or r["config_hash"])
    seen = Counter()
    methods = []
    for n in names:
        seen[n] += 1
        methods.append(n if seen[n] == 1 else f"{n}#{seen[n]}")

    items = list(reports[0]["labels"])
    for m, r in zip(methods, reports):
        if set(r["labels"]) != set(items):
            only_here = sorted(set(r["labels"]) - set(items))
            only_first = sorted(set(items) - set(r["labels"]))
            raise ContractError(f"run {m!r} has different labels: extra {only_here}, missing {only_first}")

    warnings = []
    signatures = {r["folds"]["fold_signature"] for r in reports}
    comparable = len(signatures) == 1 and len({r["n_admissions"] for r in reports}) == 1
    if not comparable:
        warnings.append("runs used different fold splits (seed or data differ); results are not directly comparable")

    table = ScoreTable.from_columns({m: [r["per_label_f1"][it] for it in items] for m, r in zip(methods, reports)},
                                    items)
    fr = friedman_test(table, alpha)
    cd = nemenyi_cd(len(methods), len(items), alpha)
    ranks = dict(zip(methods, (float(v) for v in fr.avg_ranks)))
    svg = render_cd_plot(ranks, cd)

    ordered = sorted(methods, key=lambda m: (ranks[m], m))
    groups = [[ordered[i] for i in range(a, b + 1)] for a, b in cliques([ranks[m] for m in ordered], cd)]
    different = [[a, b] for i, a in enumerate(methods) for b in methods[i + 1:] if abs(ranks[a] - ranks[b]) > cd]
    result = {
        "format": "icdlab.compare",
        "version": 1,
        "methods": methods,
        "items": items,
        "config_hashes": {m: r["config_hash"] for m, r in zip(methods, reports)},
        "seeds": {m: r["seed"] for m, r in zip(methods, reports)},
        "comparable": comparable,
        "friedman": fr.to_dict(methods),
        "nemenyi": {"alpha": alpha, "cd": cd, "groups": groups, "significantly_different": different},
        "warnings": warnings,
    }
    if out_dir is not None:
        _write_outputs({
            "compare.json": json.dumps(result, indent=2, sort_keys=True) + "\n",
            "scores.csv": table.to_csv(),
            "cd_plot.svg": svg,
        }, Path(out_dir))
    for w in warnings:
        log.warning(w)
    return result


# -- synthetic fixture ----------------------------------------------------------

def _random_code(rng, group, table: icd9.GroupTable):
    subs = [g for g in table.subgroups if g.parent == group]
    sub = subs[int(rng.integers(len(subs)))]
    major = int(rng.integers(sub.start, sub.end + 1))
    minor = int(rng.integers(0, 10))
    if sub.kind == icd9.Kind.V:
        return f"V{major:02d}.{minor}"
    if sub.kind == icd9.Kind.E:
        return f"E{major:03d}.{minor}"
    return f"{major:03d}.{minor}"


def cmd_synth(n_admissions=200, n_labels=18, d=32, seed=0, signal=1.0, out_dir="synth",
              background_vocab=400, ridge=1e-3, strategy="br") -> dict:
    """Write a synthetic corpus, labels, vectors and a matching experiment config.

    Label ``l`` is the ``l``-th top-level ICD-9 group. Each positive label
    plants ``round(8 * signal)`` tokens from that label's word cluster into
    the note; at ``signal=0`` notes are pure background and carry no label
    information. Deterministic per ``seed``.
    """
    if n_admissions < 2 or d < 1 or not 1 <= n_labels <= len(icd9.TOP_LEVEL_GROUPS):
        raise ContractError(f"need n_admissions >= 2, d >= 1 and 1 <= n_labels <= {len(icd9.TOP_LEVEL_GROUPS)}")
    if not 0.0 <= signal:
        raise ContractError("signal must be non-negative")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1)))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = icd9.GroupTable.default()
    groups = icd9.TOP_LEVEL_GROUPS[:n_labels]

    prevalence = rng.uniform(0.2, 0.5, size=n_labels)
    Y = rng.random((n_admissions, n_labels)) < prevalence
    for j in range(n_labels):
        if Y[:, j].all() or not Y[:, j].any():
            Y[int(rng.integers(n_admissions)), j] ^= True

    # vocabulary: background words plus one 10-word cluster per label around a label direction
    words = {f"bg{i:04d}": rng.normal(size=d) / np.sqrt(d) for i in range(background_vocab)}
    basis = rng.normal(size=(d, max(d, n_labels)))
    if d >= n_labels:
        basis = np.linalg.qr(basis)[0]
    directions = (basis[:, :n_labels] / np.linalg.norm(basis[:, :n_labels], axis=0)).T
    cluster = {}
    for j in range(n_labels):
        cluster[j] = [f"lab{j:02d}w{w}" for w in range(10)]
        for token in cluster[j]:
            words[token] = directions[j] + 0.3 * rng.normal(size=d) / np.sqrt(d)
    bg_words = [w for w in words if w.startswith("bg")]
    per_label = int(round(8 * signal))

    def note_text(labels_on, planted):
        sections = [[] for _ in SECTION_HEADERS]
        for s in range(len(SECTION_HEADERS)):
            for _ in range(int(rng.poisson(12))):
                sections[s].append(bg_words[int(rng.integers(len(bg_words)))])
        for j in labels_on:
            for _ in range(planted):
                sections[int(rng.integers(len(sections)))].append(cluster[j][int(rng.integers(10))])
        parts = []
        for s, header in enumerate(SECTION_HEADERS):
            if s > 0 and rng.random() < 0.1:
                # missing section; its tokens stay out of the note
                continue
            parts.append(f"{header}: " + " ".join(sections[s]))
        return "\n".join(parts)

    note_rows, label_rows = [], []
    for i in range(n_admissions):
        adm = f"A{i:05d}"
        on = np.flatnonzero(Y[i])
        note_rows.append((adm, f"{adm}-1", "Discharge summary", note_text(on, per_label)))
        if rng.random() < 0.15:
            note_rows.append((adm, f"{adm}-2", "Discharge summary", note_text(on, per_label)))
        if rng.random() < 0.2:
            note_rows.append((adm, f"{adm}-3", "Nursing", note_text([], 0)))
        for j in on:
            label_rows.append((adm, _random_code(rng, groups[j], table), "diag"))
        if rng.random() < 0.3:
            label_rows.append((adm, f"{int(rng.integers(0, 100)):02d}.{int(rng.integers(0, 100)):02d}", "proc"))

    with open(out / "corpus.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["admission_id", "note_id", "category", "text"])
        writer.writerows(note_rows)
    with open(out / "labels.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["admission_id", "icd9_code", "code_type"])
        writer.writerows(label_rows)
    write_vector_file(words, out / "vectors.vec")

    cfg = ExperimentConfig(corpus="corpus.csv", labels="labels.csv", vectors="vectors.vec", label_mode="top18",
                           composition="sumnorm", strategy=strategy, ridge=ridge, folds=10, seed=int(seed),
                           min_support=1, out="results")
    write_config(cfg, out / "experiment.conf")
    return {
        "dir": str(out),
        "n_admissions": n_admissions,
        "n_labels": n_labels,
        "dimension": d,
        "seed": int(seed),
        "signal": signal,
        "label_matrix": Y.astype(np.int8),
        "groups": list(groups),
    }
