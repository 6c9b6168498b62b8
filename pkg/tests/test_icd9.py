import random
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from icdlab.errors import ContractError, DataIntegrityError, ParseError
from icdlab.icd9 import (TOP_LEVEL_GROUPS, TOP_LEVEL_RANGES, CodeType, GroupTable, Kind,
                         build_label_matrix, build_label_space, load_labels, parse_code, sub_level_group,
                         top_level_group)

from .conftest import write


class TestParse:
    @pytest.mark.parametrize("raw,kind,major,minor", [
        ("401.9", Kind.NUMERIC, 401, "9"),
        ("4019", Kind.NUMERIC, 401, "9"),
        ("414.01", Kind.NUMERIC, 414, "01"),
        ("41401", Kind.NUMERIC, 414, "01"),
        ("038.9", Kind.NUMERIC, 38, "9"),
        ("496", Kind.NUMERIC, 496, None),
        ("V15.82", Kind.V, 15, "82"),
        ("V1582", Kind.V, 15, "82"),
        ("v05.3", Kind.V, 5, "3"),
        ("V86", Kind.V, 86, None),
        ("E880.9", Kind.E, 880, "9"),
        ("E8809", Kind.E, 880, "9"),
    ])
    def test_shapes(self, raw, kind, major, minor):
        code = parse_code(raw)
        assert (code.kind, code.major, code.minor) == (kind, major, minor)
        assert code.raw == raw

    def test_compact_matches_dotted(self):
        for dotted in ("401.9", "414.01", "V15.82", "E880.9", "250.00"):
            assert parse_code(dotted.replace(".", "")).canonical == dotted
            assert parse_code(dotted).canonical == dotted

    def test_procedure(self):
        code = parse_code("9604", CodeType.PROCEDURE)
        assert code.canonical == "96.04"
        assert parse_code("96.04", "proc") == code.__class__("96.04", Kind.NUMERIC, 96, "04", CodeType.PROCEDURE)

    @pytest.mark.parametrize("raw", ["XYZ", "", "40", "401.999", "V92", "V00", "E700.1", "000", "4.01", "E88"])
    def test_rejects(self, raw):
        with pytest.raises(ParseError):
            parse_code(raw)


class TestGroups:
    @pytest.mark.parametrize("raw,group", [
        ("401.9", "circ"), ("V05.3", "e+v"), ("140.0", "neop"), ("V15.82", "e+v"), ("E880.9", "e+v"),
        ("001.0", "inf"), ("139", "inf"), ("999.9", "inj"), ("630", "preg"), ("389", "nerv"),
    ])
    def test_top_level(self, raw, group):
        assert top_level_group(parse_code(raw)) == group

    @pytest.mark.parametrize("raw,group", [
        ("275.0", "endo4"), ("V86", "v12"), ("565.1", "diges6"), ("780.2", "symp1"), ("V45.81", "v6"),
        ("288.0", "blood3"), ("824.0", "inj4"), ("753.0", "cong7"), ("001.9", "inf1"), ("138", "inf16"),
    ])
    def test_sub_level(self, raw, group):
        assert sub_level_group(parse_code(raw)) == group

    def test_table_shape(self):
        table = GroupTable.default()
        assert len(table) == 167
        assert len(TOP_LEVEL_GROUPS) == 18 == len(set(TOP_LEVEL_GROUPS))
        assert {g.parent for g in table.subgroups} == set(TOP_LEVEL_GROUPS)

    def test_exhaustive_top_level_is_a_partition(self):
        hits = defaultdict(int)
        for major in range(1, 1000):
            code = parse_code(f"{major:03d}")
            owners = [n for n, lo, hi in TOP_LEVEL_RANGES if lo is not None and lo <= major <= hi]
            assert owners == [top_level_group(code)]
            hits[owners[0]] += 1
        for raw in [f"V{m:02d}" for m in range(1, 92)] + [f"E{m}" for m in range(800, 1000)]:
            assert top_level_group(parse_code(raw)) == "e+v"
        assert len(hits) == 17

    def test_sub_nests_in_top_for_every_tabled_major(self):
        table = GroupTable.default()
        for g in table.subgroups:
            for major in range(g.start, g.end + 1):
                raw = {Kind.NUMERIC: f"{major:03d}", Kind.V: f"V{major:02d}", Kind.E: f"E{major}"}[g.kind]
                code = parse_code(raw)
                assert sub_level_group(code, table) == g.name
                assert top_level_group(code) == g.parent

    def test_untabled_major_is_integrity_error(self):
        # 166 and 177 sit in the neoplasm chapter but in no sub-chapter
        with pytest.raises(DataIntegrityError):
            sub_level_group(parse_code("166"))

    def test_procedure_has_no_group(self):
        with pytest.raises(ContractError):
            top_level_group(parse_code("96.04", "proc"))

    def test_bad_table_detected(self):
        with pytest.raises(DataIntegrityError):
            GroupTable.from_csv("name,start,end,parent\nx1,001,009,inf\nx2,005,010,inf\n", is_text=True)
        with pytest.raises(DataIntegrityError):
            GroupTable.from_csv("name,start,end,parent\nx1,130,150,inf\n", is_text=True)


def _assign(*pairs):
    return [(a, parse_code(c, t)) for a, c, t in pairs]


class TestLabelSpace:
    def test_top18_always_18(self):
        space = build_label_space(_assign(("a", "401.9", "diag")), "top18")
        assert space.labels == TOP_LEVEL_GROUPS and len(space) == 18

    def test_min_support_threshold(self):
        assignments = [(f"a{i}", parse_code("275.0")) for i in range(9)]
        assignments += [(f"a{i}", parse_code("401.9")) for i in range(10)]
        space = build_label_space(assignments, "sub155", min_support=10)
        assert "endo4" not in space.labels
        assert "circ3" in space.labels

    def test_top50_matches_sort_oracle(self):
        rnd = random.Random(3)
        codes = [f"{m:03d}.{rnd.randint(0, 9)}" for m in rnd.sample(range(1, 1000), 60)]
        freqs = rnd.sample(range(1, 200), 60)
        assignments = []
        for code, f in zip(codes, freqs):
            assignments += [(f"adm{i}", parse_code(code)) for i in range(f)]
            assignments += [(f"adm{i}", parse_code(code)) for i in range(f // 2)]  # duplicates don't count
        rnd.shuffle(assignments)
        oracle = [c for _, c in sorted(zip(freqs, codes), key=lambda t: (-t[0], t[1]))][:50]
        space = build_label_space(assignments, "top50")
        assert list(space.labels) == oracle

    def test_top50_pools_procedures_and_breaks_ties_lexicographically(self):
        assignments = _assign(("a", "96.04", "proc"), ("a", "401.9", "diag"), ("b", "401.9", "diag"),
                              ("b", "38.93", "proc"))
        space = build_label_space(assignments, "top50")
        assert space.labels == ("401.9", "38.93", "96.04")

    def test_min_support_monotone(self):
        rnd = random.Random(5)
        assignments = [(f"a{rnd.randint(0, 60)}", parse_code(f"{rnd.randint(1, 999):03d}")) for _ in range(600)]
        assignments = [(a, c) for a, c in assignments if _tabled(c)]
        loose = set(build_label_space(assignments, "sub155", min_support=1).labels)
        strict = set(build_label_space(assignments, "sub155", min_support=10).labels)
        assert strict <= loose


def _tabled(code):
    try:
        sub_level_group(code)
        return True
    except DataIntegrityError:
        return False


class TestLabelMatrix:
    def test_hand_mapping(self):
        space = build_label_space([], "top18")
        m = build_label_matrix(["x"], _assign(("x", "401.9", "diag"), ("x", "V05.3", "diag")), space)
        row = dict(zip(space.labels, m.matrix[0]))
        assert row["circ"] and row["e+v"]
        assert sum(row.values()) == 2

    def test_no_codes_gives_zero_row(self):
        space = build_label_space([], "top18")
        m = build_label_matrix(["x", "y"], _assign(("x", "401.9", "diag")), space)
        assert not m.matrix[1].any()

    def test_orphan(self):
        with pytest.raises(ContractError, match="ghost"):
            build_label_matrix(["x"], _assign(("ghost", "401.9", "diag")), build_label_space([], "top18"))

    def test_procedures_ignored_outside_top50(self):
        space = build_label_space([], "top18")
        m = build_label_matrix(["x"], _assign(("x", "96.04", "proc")), space)
        assert not m.matrix.any()

    @given(st.lists(st.tuples(st.integers(0, 5), st.sampled_from(["401.9", "V05.3", "275.0", "565.1", "E880.9",
                                                                     "140.0", "96.04"])), max_size=30),
           st.randoms(use_true_random=False))
    def test_order_and_duplication_invariant(self, pairs, rnd):
        admissions = [f"a{i}" for i in range(6)]
        assignments = [(f"a{a}", parse_code(c, "proc" if c == "96.04" else "diag")) for a, c in pairs]
        for mode in ("top18", "sub155", "top50"):
            space = build_label_space(assignments, mode, min_support=1)
            base = build_label_matrix(admissions, assignments, space).matrix
            shuffled = assignments * 2
            rnd.shuffle(shuffled)
            assert np.array_equal(build_label_matrix(admissions, shuffled, space).matrix, base)
            if mode != "top18" and len(space):
                freq = base.mean(axis=0)
                assert np.all(np.diff(freq) <= 1e-12)


class TestLoadLabels:
    def test_row(self, tmp_path):
        path = write(tmp_path, "l.csv", "admission_id,icd9_code,code_type\na1,401.9,diag\n")
        ((adm, code),) = load_labels(path)
        assert adm == "a1" and code.canonical == "401.9" and code.code_type == CodeType.DIAGNOSIS

    def test_bad_row(self, tmp_path):
        path = write(tmp_path, "l.csv", "admission_id,icd9_code,code_type\na1,401.9,diag\na1,XYZ,diag\n")
        with pytest.raises(ParseError) as err:
            load_labels(path)
        assert err.value.line == 3

    def test_empty(self, tmp_path):
        assert load_labels(write(tmp_path, "l.csv", "admission_id,icd9_code,code_type\n")) == []

    def test_bad_type(self, tmp_path):
        with pytest.raises(ParseError):
            load_labels(write(tmp_path, "l.csv", "admission_id,icd9_code,code_type\na,401.9,lab\n"))
