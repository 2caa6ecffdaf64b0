"""Reference segmentation: roles, spans, effective-unit counts."""

import pytest

from datefrag.errors import (SchemaError, SegmentationFailureError,
                             UnsupportedCombinationError)
from datefrag.formatting import LRM, format_date
from datefrag.calendars import GregorianDate
from datefrag.segmentation import (SemanticSegmentation, SemanticUnit,
                                   UnitRole, baseline_segment,
                                   baseline_unit_count, is_transparent_text,
                                   load_segmentations,
                                   segmentation_to_tokenization,
                                   write_segmentations)


def roles(seg):
    return [u.role for u in seg.units]


class TestBaselineSegment:
    def test_iso(self):
        seg = baseline_segment('2023-07-03', 'en', 'iso')
        assert [u.text for u in seg.units] == ['2023', '-', '07', '-', '03']
        assert roles(seg) == [UnitRole.YEAR, UnitRole.DELIMITER,
                              UnitRole.MONTH, UnitRole.DELIMITER,
                              UnitRole.DAY]
        assert baseline_unit_count(seg) == 5

    def test_german_textual(self):
        seg = baseline_segment('10. Oktober 2034', 'de', 'textual')
        assert [u.text for u in seg.units] == ['10', '. ', 'Oktober', ' ', '2034']
        assert roles(seg) == [UnitRole.DAY, UnitRole.DELIMITER,
                              UnitRole.MONTH, UnitRole.DELIMITER,
                              UnitRole.YEAR]
        # ". " carries an opaque byte, the bare space does not
        assert baseline_unit_count(seg) == 4

    def test_chinese_textual(self):
        seg = baseline_segment('2034年10月10日', 'zh', 'textual')
        non_delim = [u for u in seg.units if u.role != UnitRole.DELIMITER]
        assert len(non_delim) == 6
        assert [u.text for u in non_delim] == ['2034', '年', '10', '月', '10', '日']
        assert [u.role for u in non_delim] == [
            UnitRole.YEAR, UnitRole.CALENDAR_MARKER,
            UnitRole.MONTH, UnitRole.CALENDAR_MARKER,
            UnitRole.DAY, UnitRole.CALENDAR_MARKER]
        assert baseline_unit_count(seg) == 6

    def test_hausa_marker(self):
        seg = baseline_segment('03 ga Yuli 2023', 'ha', 'textual')
        assert baseline_unit_count(seg) == 4
        marker = [u for u in seg.units if u.role == UnitRole.CALENDAR_MARKER]
        assert [u.text for u in marker] == ['ga']

    def test_arabic_iso_directional_marks_transparent(self):
        text = format_date(GregorianDate(2023, 7, 3), 'ar', 'iso')
        seg = baseline_segment(text, 'ar', 'iso')
        assert baseline_unit_count(seg) == 5
        transparent = [u for u in seg.units if not u.is_effective]
        assert all(u.text == LRM for u in transparent)
        assert len(transparent) == 2

    def test_role_cardinality(self):
        for lang, kind, text in (
                ('en', 'calendar', '3rd of July 2023'),
                ('de', 'calendar', '03. Juli des Jahres 2023'),
                ('ar', 'textual', '٣ يوليو ٢٠٢٣'),
                ('ha', 'calendar', '03 Ramadan 1445 AH')):
            seg = baseline_segment(text, lang, kind)
            r = roles(seg)
            assert r.count(UnitRole.YEAR) == 1
            assert r.count(UnitRole.MONTH) == 1
            assert r.count(UnitRole.DAY) <= 1

    def test_spans_tile_input(self):
        text = '03 Ramadan 1445 AH'
        seg = baseline_segment(text, 'ha', 'calendar')
        assert ''.join(u.text for u in seg.units) == text
        raw = text.encode('utf-8')
        for u in seg.units:
            assert raw[u.byte_start:u.byte_end].decode('utf-8') == u.text

    def test_failure(self):
        with pytest.raises(SegmentationFailureError):
            baseline_segment('not a date', 'en', 'iso')
        with pytest.raises(UnsupportedCombinationError):
            baseline_segment('2023-07-03', 'en', 'runes')


class TestTransparency:
    def test_whitespace_and_marks(self):
        assert is_transparent_text(' ')
        assert is_transparent_text('\t\n')
        assert is_transparent_text(LRM)
        assert is_transparent_text('')
        assert not is_transparent_text('. ')
        assert not is_transparent_text('-')


class TestValidation:
    def test_gap_rejected(self):
        units = (SemanticUnit('2023', UnitRole.YEAR, 0, 4, 0, 4),
                 SemanticUnit('07', UnitRole.MONTH, 5, 7, 5, 7))
        with pytest.raises(SchemaError):
            SemanticSegmentation('2023-07', 'en', 'iso', 'gregorian', units)

    def test_text_mismatch_rejected(self):
        units = (SemanticUnit('2024', UnitRole.YEAR, 0, 4, 0, 4),)
        with pytest.raises(SchemaError):
            SemanticSegmentation('2023', 'en', 'iso', 'gregorian', units)


class TestSerialization:
    def test_round_trip(self, tmp_path):
        segs = [baseline_segment('2023-07-03', 'en', 'iso'),
                baseline_segment('٣ يوليو ٢٠٢٣', 'ar', 'textual'),
                baseline_segment('2034年10月10日', 'zh', 'textual')]
        path = tmp_path / 'segs.jsonl'
        assert write_segmentations(path, segs) == 3
        loaded = list(load_segmentations(path))
        assert loaded == segs

    def test_bad_line_reports_position(self, tmp_path):
        path = tmp_path / 'segs.jsonl'
        path.write_text('{"text": "x"}\n', encoding='utf-8')
        with pytest.raises(SchemaError) as info:
            list(load_segmentations(path))
        assert info.value.line == 1


class TestToTokenization:
    def test_unit_per_token(self):
        seg = baseline_segment('2023-07-03', 'en', 'iso')
        tok = segmentation_to_tokenization(seg)
        assert [t.text for t in tok.tokens] == [u.text for u in seg.units]
        assert tok.tokenizer_id == 'reference'
