"""Tokenisation, optional pre-processing, section splitting and token tagging
for discharge summaries."""
from __future__ import annotations

import csv
import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .errors import ContractError, ParseError

SECTION_HEADERS = (
    "Admission Date",
    "Past Medical History",
    "Pertinent Results",
    "Brief Hospital Course",
    "Medications on Admission",
    "Discharge Diagnosis",
    "Followup Instructions",
)

CORPUS_COLUMNS = ("admission_id", "note_id", "category", "text")

# Header phrase, whole tokens only, with an optional colon glued to its last word.
_HEADER_RES = [
    re.compile(r"(?<!\S)" + r"\s+".join(map(re.escape, h.split())) + r":?(?!\S)", re.IGNORECASE)
    for h in SECTION_HEADERS
]


@dataclass(frozen=True)
class RawNote:
    admission_id: str
    note_id: str
    category: str
    text: str


@dataclass(frozen=True)
class SectionedNote:
    sections: tuple  # 7 tuples of tokens, canonical order
    repeated_headers: tuple = ()  # header names seen more than once (only the first splits)

    def __post_init__(self):
        if len(self.sections) != len(SECTION_HEADERS):
            raise ContractError(f"expected {len(SECTION_HEADERS)} sections, got {len(self.sections)}")


@dataclass(frozen=True)
class PreprocessConfig:
    enabled: bool = False
    max_tokens: Optional[int] = None

    def __post_init__(self):
        if self.max_tokens is not None and self.max_tokens < 1:
            raise ContractError("max_tokens must be >= 1")


def tokenize(text: str) -> list[str]:
    """Split on Unicode whitespace, leaving case and punctuation untouched."""
    return text.split()


def _strip_punctuation(token):
    return "".join(ch for ch in token if not unicodedata.category(ch).startswith("P"))


def _clean(tokens):
    out = []
    for tok in tokens:
        tok = _strip_punctuation(tok)
        if any(ch.isalpha() for ch in tok):
            out.append(tok.lower())
    return out


def preprocess(tokens: Sequence[str], cfg: PreprocessConfig) -> list[str]:
    """Strip punctuation, drop tokens without letters, lowercase, then truncate.

    Identity when ``cfg.enabled`` is false.
    """
    if not cfg.enabled:
        return list(tokens)
    out = _clean(tokens)
    if cfg.max_tokens is not None:
        out = out[: cfg.max_tokens]
    return out


def preprocess_sections(sections: Sequence[Sequence[str]], cfg: PreprocessConfig) -> list[list[str]]:
    """Section-wise :func:`preprocess` with one token budget shared across sections in order."""
    if not cfg.enabled:
        return [list(s) for s in sections]
    budget = cfg.max_tokens
    out = []
    for sec in sections:
        cleaned = _clean(sec)
        if budget is not None:
            cleaned = cleaned[:budget]
            budget -= len(cleaned)
        out.append(cleaned)
    return out


def split_sections(text: str) -> SectionedNote:
    """Split a note at the first occurrence of each canonical header.

    Header tokens are dropped; text before the first header found goes to
    section 0. Headers that are absent leave their section empty.
    """
    found = []
    repeated = []
    for idx, pattern in enumerate(_HEADER_RES):
        matches = pattern.finditer(text)
        first = next(matches, None)
        if first is None:
            continue
        if next(matches, None) is not None:
            repeated.append(SECTION_HEADERS[idx])
        found.append((first.start(), first.end(), idx))
    found.sort()

    boundaries = []
    last_end = -1
    for start, end, idx in found:
        if start < last_end:
            # overlaps an earlier header, treat as plain text
            continue
        boundaries.append((start, end, idx))
        last_end = end

    sections = [[] for _ in SECTION_HEADERS]
    head_end = boundaries[0][0] if boundaries else len(text)
    sections[0].extend(tokenize(text[:head_end]))
    for i, (_, end, idx) in enumerate(boundaries):
        stop = boundaries[i + 1][0] if i + 1 < len(boundaries) else len(text)
        sections[idx].extend(tokenize(text[end:stop]))
    return SectionedNote(tuple(tuple(s) for s in sections), tuple(repeated))


def apply_split_tags(note) -> list[str]:
    """Prefix each token with its section index (``"3_token"``) and flatten."""
    sections = note.sections if isinstance(note, SectionedNote) else note
    return [f"{i}_{tok}" for i, sec in enumerate(sections) for tok in sec]


def apply_pos_tags(tagged: Sequence[tuple[str, str]]) -> list[str]:
    """Glue each POS tag onto its word: ``("History", "NN") -> "HistoryNN"``."""
    return [word + tag for word, tag in tagged]


def _open_csv(path):
    path = Path(path)
    try:
        return path, open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ParseError(str(exc), path=path) from None


def check_columns(reader, required, path):
    try:
        fieldnames = reader.fieldnames
    except csv.Error as exc:
        raise ParseError(f"malformed CSV header ({exc})", line=1, path=path) from None
    if fieldnames is None:
        raise ParseError(f"missing header row; expected columns {','.join(required)}", line=1, path=path)
    missing = [c for c in required if c not in fieldnames]
    if missing:
        raise ParseError(f"missing column(s): {', '.join(missing)}", line=1, path=path)


def iter_csv_records(reader, path):
    """Yield ``(start_line, row)`` from a ``csv.DictReader``; CSV syntax errors
    become :class:`ParseError` at the line where the bad record starts."""
    start = reader.line_num + 1
    while True:
        try:
            row = next(reader)
        except StopIteration:
            return
        except csv.Error as exc:
            raise ParseError(f"malformed CSV ({exc})", line=start, path=path) from None
        yield start, row
        start = reader.line_num + 1


def load_corpus(notes_path) -> list[RawNote]:
    """Read the notes CSV (``admission_id,note_id,category,text``; RFC 4180 quoting)."""
    path, fh = _open_csv(notes_path)
    notes = []
    with fh:
        reader = csv.DictReader(fh, strict=True)
        check_columns(reader, CORPUS_COLUMNS, path)
        for line, row in iter_csv_records(reader, path):
            if None in row or any(row[c] is None for c in CORPUS_COLUMNS):
                raise ParseError("wrong number of fields", line=line, path=path)
            if not row["admission_id"]:
                raise ParseError("empty admission_id", line=line, path=path)
            notes.append(RawNote(row["admission_id"], row["note_id"], row["category"], row["text"]))
    return notes


def load_pos_tags(path) -> dict[str, list[tuple[str, str]]]:
    """Read pre-tagged notes: CSV ``note_id,tagged`` where ``tagged`` holds
    whitespace-separated ``word/TAG`` items (split on the last slash)."""
    path, fh = _open_csv(path)
    out = {}
    with fh:
        reader = csv.DictReader(fh, strict=True)
        check_columns(reader, ("note_id", "tagged"), path)
        for line, row in iter_csv_records(reader, path):
            if row["tagged"] is None:
                raise ParseError("wrong number of fields", line=line, path=path)
            pairs = []
            for item in row["tagged"].split():
                word, sep, tag = item.rpartition("/")
                if not sep or not word or not tag:
                    raise ParseError(f"item {item!r} is not word/TAG", line=line, path=path)
                pairs.append((word, tag))
            out[row["note_id"]] = pairs
    return out
