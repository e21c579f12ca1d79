from __future__ import annotations

import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from rpusim import (
    CatalogEntry,
    FilterOp,
    InvalidSequenceError,
    LogEntry,
    MinedSequence,
    MiningError,
    TableSpec,
    fingerprint,
    mine_sequences,
    normalize_query,
    parse_log,
    report_csv,
    to_workload,
)

A_TEXT = "SELECT sender, subject FROM inbox WHERE folder = {}"
B_TEXT = "SELECT body FROM messages WHERE id = {}"
C_TEXT = "SELECT preview FROM attachments WHERE msg = {}"
A_ID = fingerprint(A_TEXT.format(0))
B_ID = fingerprint(B_TEXT.format(0))
C_ID = fingerprint(C_TEXT.format(0))


def planted_log_lines() -> list[str]:
    """Five [A,B,C] occurrences (gaps exactly 5 and 8 ms) among one-off noise."""
    lines = []
    for i in range(5):
        base = 1000.0 * i
        lines.append(f"{base}\t{A_TEXT.format(i)}\t2")
        lines.append(f"{base + 7}\t{B_TEXT.format(100 + i)}\t3")       # 5 ms after A completes
        lines.append(f"{base + 18}\t{C_TEXT.format(200 + i)}\t1")      # 8 ms after B completes
        lines.append(f"{base + 500}\tSELECT noise_{i} FROM other_{i}\t1")
    return lines


class TestFingerprint:
    def test_constants_are_parameterized(self):
        assert fingerprint("SELECT * FROM t WHERE a > 5") == fingerprint(
            "select * from t where a > 17"
        )

    def test_table_names_matter(self):
        assert fingerprint("SELECT * FROM t WHERE a > 5") != fingerprint(
            "SELECT * FROM u WHERE a > 5"
        )

    def test_multiple_constants(self):
        a = fingerprint("WHERE d_year = 1999 AND d_moy = 3")
        b = fingerprint("WHERE d_year = 2000 AND d_moy = 7")
        assert a == b
        assert normalize_query("WHERE d_year = 1999 AND d_moy = 3") == "where d_year = ? and d_moy = ?"

    def test_strings_are_parameterized(self):
        assert fingerprint("WHERE name = 'alice'") == fingerprint("WHERE name = 'bob'")

    def test_empty_text_rejected(self):
        with pytest.raises(MiningError):
            fingerprint("   ")

    @given(st.text(alphabet=st.characters(codec="ascii"), min_size=1, max_size=80))
    def test_normalization_is_idempotent(self, text):
        if not text.strip():
            return
        once = normalize_query(text)
        if once.strip():
            assert normalize_query(once) == once


class TestParseLog:
    def test_sorts_by_timestamp(self):
        entries = parse_log(["10\tSELECT a FROM t", "5\tSELECT b FROM t\t2.5"])
        assert [e.timestamp_ms for e in entries] == [5.0, 10.0]
        assert entries[0].duration_ms == 2.5
        assert entries[1].duration_ms is None

    def test_skips_blank_lines(self):
        assert len(parse_log(["", "5\tSELECT a FROM t", "   "])) == 1

    def test_malformed_lines_rejected(self):
        with pytest.raises(MiningError, match="line 1"):
            parse_log(["just one field"])
        with pytest.raises(MiningError, match="line 1"):
            parse_log(["abc\tSELECT a FROM t"])
        with pytest.raises(MiningError, match="empty query"):
            parse_log(["5\t \t1"])

    def test_file_roundtrip(self, tmp_path):
        path = tmp_path / "queries.log"
        path.write_text("\n".join(planted_log_lines()) + "\n", encoding="utf-8")
        assert len(parse_log(path)) == 20


class TestMineSequences:
    def test_two_query_pattern(self):
        log = parse_log(
            ["0\tQRY A", "10\tQRY B", "100\tQRY A", "115\tQRY B"]
        )
        mined = mine_sequences(log, min_support=2, max_len=4, max_gap=1000.0)
        assert len(mined) == 1
        m = mined[0]
        assert m.templates == (fingerprint("QRY A"), fingerprint("QRY B"))
        assert m.support == 2
        assert m.avg_gaps == (12.5,)

    def test_no_repeats_is_empty(self):
        log = parse_log([f"{i * 10}\tSELECT col{i} FROM t{i}" for i in range(6)])
        assert mine_sequences(log, min_support=2) == []

    def test_planted_sequence_recovered_exactly(self):
        log = parse_log(planted_log_lines())
        mined = mine_sequences(log, min_support=5, max_len=4, max_gap=50.0)
        by_templates = {m.templates: m for m in mined}
        key = (A_ID, B_ID, C_ID)
        assert key in by_templates
        planted = by_templates[key]
        assert planted.support == 5
        assert planted.avg_gaps == (5.0, 8.0)
        # its sub-pairs are found as well, never with higher-than-prefix support
        assert by_templates[key[:2]].support == 5
        assert by_templates[key[1:]].support == 5
        assert mined[0] is planted  # support ties break toward longer sequences

    def test_session_cutoff_blocks_long_gaps(self):
        # occurrence gaps are 10 and 15 ms; the cutoff is inclusive
        log = parse_log(["0\tQRY A", "10\tQRY B", "100\tQRY A", "115\tQRY B"])
        assert mine_sequences(log, min_support=2, max_gap=14.9) == []
        mined = mine_sequences(log, min_support=2, max_gap=15.0)
        assert mined and mined[0].support == 2

    def test_unsorted_log_rejected(self):
        log = [LogEntry(10.0, "QRY A"), LogEntry(5.0, "QRY B")]
        with pytest.raises(MiningError, match="not sorted"):
            mine_sequences(log, min_support=1)

    def test_parameter_validation(self):
        log = parse_log(["0\tQRY A", "10\tQRY B"])
        with pytest.raises(MiningError):
            mine_sequences(log, min_support=0)
        with pytest.raises(MiningError):
            mine_sequences(log, min_support=1, max_len=1)

    def test_durations_recover_gaps_exactly(self):
        # alternating completion-to-arrival gaps 4.0 and 6.0 average to 5.0
        lines = []
        for i, gap in enumerate([4.0, 6.0, 4.0, 6.0]):
            base = 500.0 * i
            lines.append(f"{base}\tQRY A\t3")
            lines.append(f"{base + 3 + gap}\tQRY B\t1")
        mined = mine_sequences(parse_log(lines), min_support=4, max_len=2, max_gap=50.0)
        assert mined[0].avg_gaps == (5.0,)

    def test_matches_brute_force_and_antimonotone(self):
        rng = random.Random(43)
        templates = ["QRY A", "QRY B", "QRY C", "QRY D", "QRY E"]
        log = []
        t = 0.0
        for _ in range(120):
            t += rng.choice([1.0, 2.0, 30.0])
            log.append(LogEntry(t, rng.choice(templates)))
        max_gap, max_len = 10.0, 4

        ids = [fingerprint(e.text) for e in log]
        gaps = [b.timestamp_ms - a.timestamp_ms for a, b in zip(log, log[1:])]
        brute = Counter()
        for n in range(2, max_len + 1):
            for i in range(len(log) - n + 1):
                if all(g <= max_gap for g in gaps[i : i + n - 1]):
                    brute[tuple(ids[i : i + n])] += 1

        mined = mine_sequences(log, min_support=1, max_len=max_len, max_gap=max_gap)
        assert {m.templates: m.support for m in mined} == dict(brute)
        for m in mined:
            if len(m.templates) > 2:
                prefix = brute[m.templates[:-1]]
                suffix = brute[m.templates[1:]]
                assert m.support <= prefix and m.support <= suffix


class TestToWorkload:
    def _catalog(self):
        return {
            A_ID: CatalogEntry(
                table=TableSpec("t0", 9.0),
                ops=(FilterOp("acc0", 0.33), FilterOp("acc1", 0.43)),
            ),
            B_ID: CatalogEntry(
                table=TableSpec("t1", 1.0),
                ops=(FilterOp("acc0", 0.14),),
            ),
        }

    def test_builds_reference_scenario(self):
        mined = MinedSequence(
            templates=(A_ID, B_ID),
            support=2,
            avg_gaps=(1.0,),
        )
        seq = to_workload(mined, self._catalog())
        assert [q.id for q in seq.queries] == ["Q0", "Q1"]
        assert seq.queries[0].table.size_mb == 9.0
        assert [op.id for op in seq.queries[0].ops] == ["acc0", "acc1"]
        assert seq.queries[1].ops[0].selectivity == 0.14
        assert seq.gaps == (1.0,)

    def test_missing_catalog_entry_names_template(self):
        mined = MinedSequence(
            templates=(A_ID, C_ID), support=2, avg_gaps=(1.0,)
        )
        with pytest.raises(MiningError, match=C_ID):
            to_workload(mined, self._catalog())

    def test_single_query_sequence_rejected(self):
        mined = MinedSequence(templates=(A_ID,), support=3, avg_gaps=())
        with pytest.raises(InvalidSequenceError):
            to_workload(mined, self._catalog())


def test_report_csv_shape():
    mined = [
        MinedSequence(templates=("aaa", "bbb"), support=4, avg_gaps=(2.5,)),
        MinedSequence(templates=("aaa", "bbb", "ccc"), support=2, avg_gaps=(2.5, 3.0)),
    ]
    text = report_csv(mined)
    lines = text.splitlines()
    assert lines[0] == "templates,support,avg_gaps_ms"
    assert lines[1] == "aaa|bbb,4,2.500000"
    assert lines[2] == "aaa|bbb|ccc,2,2.500000|3.000000"
