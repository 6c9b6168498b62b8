"""ICD-9 code parsing, the two-level group hierarchy and label spaces.

Three label spaces are supported:

* ``top18``  - the 18 top-level chapters (E and V codes pooled as ``e+v``)
* ``sub155`` - sub-chapter groups seen in at least ``min_support`` admissions
* ``top50``  - the 50 individual codes (diagnoses and procedures pooled)
  found in the most admissions
"""
from __future__ import annotations

import csv
import enum
import functools
import re
from collections import Counter, defaultdict
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ContractError, DataIntegrityError, ParseError
from .text import check_columns, iter_csv_records


class Kind(str, enum.Enum):
    NUMERIC = "numeric"
    E = "E"
    V = "V"


class CodeType(str, enum.Enum):
    DIAGNOSIS = "diag"
    PROCEDURE = "proc"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        v = str(value).strip().lower()
        if v in ("diag", "diagnosis", "d", "dx"):
            return cls.DIAGNOSIS
        if v in ("proc", "procedure", "p", "px"):
            return cls.PROCEDURE
        raise ValueError(f"unknown code type {value!r} (expected diag or proc)")


class LabelMode(str, enum.Enum):
    TOP18 = "top18"
    SUB155 = "sub155"
    TOP50 = "top50"


# (name, first major, last major); order is descending admission frequency in MIMIC-III
TOP_LEVEL_RANGES = (
    ("circ", 390, 459),
    ("e+v", None, None),
    ("endo", 240, 279),
    ("resp", 460, 519),
    ("inj", 800, 999),
    ("gen", 580, 629),
    ("diges", 520, 579),
    ("bld", 280, 289),
    ("symp", 780, 799),
    ("ment", 290, 319),
    ("nerv", 320, 389),
    ("inf", 1, 139),
    ("musc", 710, 739),
    ("pren", 760, 779),
    ("neop", 140, 239),
    ("skin", 680, 709),
    ("cong", 740, 759),
    ("preg", 630, 679),
)
TOP_LEVEL_GROUPS = tuple(name for name, _, _ in TOP_LEVEL_RANGES)

_MAJOR_LIMITS = {Kind.NUMERIC: (1, 999), Kind.E: (800, 999), Kind.V: (1, 91)}

_DIAG_PATTERNS = (
    (Kind.V, re.compile(r"V(\d{2})(?:\.(\d{1,2}))?"), re.compile(r"V(\d{2})(\d{1,2})")),
    (Kind.E, re.compile(r"E(\d{3})(?:\.(\d))?"), re.compile(r"E(\d{3})(\d)")),
    (Kind.NUMERIC, re.compile(r"(\d{3})(?:\.(\d{1,2}))?"), re.compile(r"(\d{3})(\d{1,2})")),
)
_PROC_PATTERNS = (re.compile(r"(\d{2})(?:\.(\d{1,2}))?"), re.compile(r"(\d{2})(\d{1,2})"))


@dataclass(frozen=True)
class Icd9Code:
    raw: str
    kind: Kind
    major: int
    minor: Optional[str]
    code_type: CodeType = CodeType.DIAGNOSIS

    @property
    def canonical(self) -> str:
        """Dotted display form, e.g. ``401.9``, ``V15.82``, ``E880.9``, ``96.04``."""
        if self.code_type == CodeType.PROCEDURE:
            head = f"{self.major:02d}"
        elif self.kind == Kind.V:
            head = f"V{self.major:02d}"
        elif self.kind == Kind.E:
            head = f"E{self.major:03d}"
        else:
            head = f"{self.major:03d}"
        return f"{head}.{self.minor}" if self.minor else head

    def __str__(self):
        return self.canonical


def parse_code(raw: str, code_type=CodeType.DIAGNOSIS) -> Icd9Code:
    """Parse a dotted or compact (MIMIC-style, dotless) ICD-9 code.

    Compact forms put the implied decimal point after three digits for
    numeric diagnoses, after ``E`` + three digits for E codes, after ``V`` +
    two digits for V codes and after two digits for procedures.
    """
    code_type = CodeType.parse(code_type)
    if raw is None or not raw.strip():
        raise ParseError("empty ICD-9 code")
    text = raw.strip().upper()

    if code_type == CodeType.PROCEDURE:
        for pattern in _PROC_PATTERNS:
            m = pattern.fullmatch(text)
            if m:
                return Icd9Code(raw, Kind.NUMERIC, int(m.group(1)), m.group(2), code_type)
        raise ParseError(f"unrecognised ICD-9 procedure code {raw!r}")

    for kind, dotted, compact in _DIAG_PATTERNS:
        m = dotted.fullmatch(text) or compact.fullmatch(text)
        if m:
            major = int(m.group(1))
            lo, hi = _MAJOR_LIMITS[kind]
            if not lo <= major <= hi:
                raise ParseError(f"{raw!r}: {kind.value} major {major} outside {lo}..{hi}")
            return Icd9Code(raw, kind, major, m.group(2), code_type)
    raise ParseError(f"unrecognised ICD-9 diagnosis code {raw!r}")


def top_level_group(code: Icd9Code) -> str:
    """Name of the top-level chapter containing a diagnosis code."""
    if code.code_type == CodeType.PROCEDURE:
        raise ContractError(f"procedure code {code} has no diagnosis chapter")
    if code.kind != Kind.NUMERIC:
        return "e+v"
    for name, lo, hi in TOP_LEVEL_RANGES:
        if lo is not None and lo <= code.major <= hi:
            return name
    raise ContractError(f"major {code.major} outside 001-999")


def _parse_bound(token):
    token = token.strip().upper()
    if token[:1] in ("E", "V"):
        return Kind(token[0]), int(token[1:])
    return Kind.NUMERIC, int(token)


@dataclass(frozen=True)
class SubGroup:
    name: str
    kind: Kind
    start: int
    end: int
    parent: str


class GroupTable:
    """Sub-chapter ranges, each nested inside one top-level chapter."""

    def __init__(self, subgroups: Sequence[SubGroup]):
        self.subgroups = tuple(subgroups)
        self._by_name = {g.name: g for g in self.subgroups}
        if len(self._by_name) != len(self.subgroups):
            raise DataIntegrityError("duplicate sub-group names")
        self._validate()

    def _validate(self):
        top = {name: (lo, hi) for name, lo, hi in TOP_LEVEL_RANGES}
        spans = defaultdict(list)
        for g in self.subgroups:
            if g.parent not in top:
                raise DataIntegrityError(f"{g.name}: unknown parent {g.parent!r}")
            if g.start > g.end:
                raise DataIntegrityError(f"{g.name}: empty range")
            lo, hi = top[g.parent]
            if g.kind == Kind.NUMERIC:
                if lo is None or not lo <= g.start <= g.end <= hi:
                    raise DataIntegrityError(f"{g.name}: {g.start}-{g.end} not inside {g.parent}")
            elif g.parent != "e+v":
                raise DataIntegrityError(f"{g.name}: E/V range must nest in e+v")
            spans[g.kind].append((g.start, g.end, g.name))
        for kind, items in spans.items():
            items.sort()
            for (s1, e1, n1), (s2, _, n2) in zip(items, items[1:]):
                if s2 <= e1:
                    raise DataIntegrityError(f"sub-groups {n1} and {n2} overlap")

    @classmethod
    def from_csv(cls, path_or_text, *, is_text=False):
        text = path_or_text if is_text else Path(path_or_text).read_text(encoding="utf-8")
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        reader = csv.DictReader(lines)
        groups = []
        for row_no, row in enumerate(reader, start=2):
            try:
                kind_s, start = _parse_bound(row["start"])
                kind_e, end = _parse_bound(row["end"])
            except (KeyError, ValueError, AttributeError):
                raise ParseError(f"bad sub-group row {row}", line=row_no) from None
            if kind_s != kind_e:
                raise DataIntegrityError(f"{row['name']}: range mixes code kinds")
            groups.append(SubGroup(row["name"], kind_s, start, end, row["parent"]))
        return cls(groups)

    @classmethod
    @functools.lru_cache(maxsize=1)
    def default(cls) -> "GroupTable":
        text = resources.files("icdlab").joinpath("data/icd9_subgroups.csv").read_text(encoding="utf-8")
        return cls.from_csv(text, is_text=True)

    def __len__(self):
        return len(self.subgroups)

    def __getitem__(self, name) -> SubGroup:
        return self._by_name[name]

    @property
    def names(self):
        return tuple(g.name for g in self.subgroups)

    def lookup(self, code: Icd9Code) -> str:
        if code.code_type == CodeType.PROCEDURE:
            raise ContractError(f"procedure code {code} has no diagnosis sub-group")
        for g in self.subgroups:
            if g.kind == code.kind and g.start <= code.major <= g.end:
                return g.name
        raise DataIntegrityError(f"code {code} falls outside every sub-group range")


def sub_level_group(code: Icd9Code, table: GroupTable | None = None) -> str:
    """Name of the sub-chapter group containing a diagnosis code."""
    return (table or GroupTable.default()).lookup(code)


@dataclass(frozen=True)
class LabelSpace:
    mode: LabelMode
    labels: tuple
    min_support: int = 10

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ContractError("label names must be distinct")

    def __len__(self):
        return len(self.labels)

    def key(self, code: Icd9Code, table: GroupTable | None = None) -> Optional[str]:
        """The label key a code maps to under this mode (may not be in ``labels``)."""
        if self.mode == LabelMode.TOP50:
            return code.canonical
        if code.code_type == CodeType.PROCEDURE:
            return None
        if self.mode == LabelMode.TOP18:
            return top_level_group(code)
        return sub_level_group(code, table)


def _admission_counts(assignments, keyfn):
    seen = defaultdict(set)
    for adm, code in assignments:
        key = keyfn(code)
        if key is not None:
            seen[key].add(adm)
    return Counter({k: len(v) for k, v in seen.items()})


def build_label_space(assignments: Iterable[tuple], mode, min_support: int = 10, *, n_codes: int = 50,
                      table: GroupTable | None = None) -> LabelSpace:
    """Choose the ordered label set for ``mode`` from (admission_id, code) pairs.

    ``sub155`` keeps groups reaching ``min_support`` distinct admissions and
    ``top50`` keeps the ``n_codes`` most frequent codes; both are ordered by
    descending admission count (ties: table order for groups, canonical
    string for codes).
    """
    mode = LabelMode(mode)
    assignments = list(assignments)
    if mode == LabelMode.TOP18:
        return LabelSpace(mode, TOP_LEVEL_GROUPS, min_support)

    if mode == LabelMode.SUB155:
        table = table or GroupTable.default()
        probe = LabelSpace(mode, (), min_support)
        counts = _admission_counts(assignments, lambda c: probe.key(c, table))
        position = {name: i for i, name in enumerate(table.names)}
        kept = [n for n in counts if counts[n] >= min_support]
        kept.sort(key=lambda n: (-counts[n], position[n]))
        return LabelSpace(mode, tuple(kept), min_support)

    counts = _admission_counts(assignments, lambda c: c.canonical)
    ranked = sorted(counts, key=lambda k: (-counts[k], k))
    return LabelSpace(mode, tuple(ranked[:n_codes]), min_support)


@dataclass(frozen=True)
class LabelMatrix:
    admission_ids: tuple
    space: LabelSpace
    matrix: np.ndarray  # bool, admissions x labels

    @property
    def labels(self):
        return self.space.labels

    def frequencies(self):
        """Fraction of admissions carrying each label."""
        if len(self.admission_ids) == 0:
            return np.zeros(len(self.space))
        return self.matrix.mean(axis=0)


def build_label_matrix(admissions: Sequence[str], assignments: Iterable[tuple], space: LabelSpace,
                       table: GroupTable | None = None) -> LabelMatrix:
    """Binary admissions x labels matrix; a cell is set when any code maps to that label."""
    row_of = {a: i for i, a in enumerate(admissions)}
    if len(row_of) != len(admissions):
        raise ContractError("duplicate admission ids")
    col_of = {label: j for j, label in enumerate(space.labels)}
    matrix = np.zeros((len(admissions), len(space)), dtype=bool)
    orphans = set()
    for adm, code in assignments:
        i = row_of.get(adm)
        if i is None:
            orphans.add(adm)
            continue
        j = col_of.get(space.key(code, table))
        if j is not None:
            matrix[i, j] = True
    if orphans:
        raise ContractError(f"assignments reference unknown admissions: {', '.join(sorted(orphans))}")
    return LabelMatrix(tuple(admissions), space, matrix)


def load_labels(path) -> list[tuple[str, Icd9Code]]:
    """Read ``admission_id,icd9_code,code_type`` rows into parsed assignments."""
    path = Path(path)
    out = []
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ParseError(str(exc), path=path) from None
    with fh:
        reader = csv.DictReader(fh, strict=True)
        check_columns(reader, ("admission_id", "icd9_code", "code_type"), path)
        for line, row in iter_csv_records(reader, path):
            try:
                if not row["admission_id"]:
                    raise ValueError("empty admission_id")
                code = parse_code(row["icd9_code"] or "", row["code_type"] or "")
            except (ValueError, TypeError) as exc:
                raise ParseError(str(exc), line=line, path=path) from None
            out.append((row["admission_id"], code))
    return out
