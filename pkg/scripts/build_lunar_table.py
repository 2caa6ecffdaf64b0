"""Regenerate src/datefrag/data/lunar_years.txt from the packed year codes.

The codes are the widely replicated 20-bit encoding of the Chinese lunisolar
years 1900-2100 (low 4 bits: leap month number, 0 = none; middle 12 bits:
month 1-12 lengths, 1 = 30 days; bit 16: leap month has 30 days). The output
file stores one year per line as

    <gregorian new year ISO>;<leap month 0-12>;<comma separated month lengths>

which is the only representation the package itself ever reads. Offsets
between consecutive New Year dates are cross-checked against the decoded
month sums before writing.
"""

import datetime
import hashlib
import pathlib

YEAR_CODES = [
    19416, 19168, 42352, 21717, 53856, 55632, 91476, 22176, 39632, 21970, 19168, 42422,
    42192, 53840, 119381, 46400, 54944, 44450, 38320, 84343, 18800, 42160, 46261, 27216,
    27968, 109396, 11104, 38256, 21234, 18800, 25958, 54432, 59984, 92821, 23248, 11104,
    100067, 37600, 116951, 51536, 54432, 120998, 46416, 22176, 107956, 9680, 37584, 53938,
    43344, 46423, 27808, 46416, 86869, 19872, 42416, 83315, 21168, 43432, 59728, 27296,
    44710, 43856, 19296, 43748, 42352, 21088, 62051, 55632, 23383, 22176, 38608, 19925,
    19152, 42192, 54484, 53840, 54616, 46400, 46752, 103846, 38320, 18864, 43380, 42160,
    45690, 27216, 27968, 44870, 43872, 38256, 19189, 18800, 25776, 29859, 59984, 27480,
    23232, 43872, 38613, 37600, 51552, 55636, 54432, 55888, 30034, 22176, 43959, 9680,
    37584, 51893, 43344, 46240, 47780, 44368, 21977, 19360, 42416, 86390, 21168, 43312,
    31060, 27296, 44368, 23378, 19296, 42726, 42208, 53856, 60005, 54576, 23200, 30371,
    38608, 19195, 19152, 42192, 118966, 53840, 54560, 56645, 46496, 22224, 21938, 18864,
    42359, 42160, 43600, 111189, 27936, 44448, 84835, 37744, 18936, 18800, 25776, 92326,
    59984, 27296, 108228, 43744, 37600, 53987, 51552, 54615, 54432, 55888, 23893, 22176,
    42704, 21972, 21200, 43448, 43344, 46240, 46758, 44368, 21920, 43940, 42416, 21168,
    45683, 26928, 29495, 27296, 44368, 84821, 19296, 42352, 21732, 53600, 59752, 54560,
    55968, 92838, 22224, 19168, 43476, 41680, 53584, 62034, 54560,
]

NEW_YEARS = [
    '19000131',
    '19010219', '19020208', '19030129', '19040216', '19050204', '19060125', '19070213',
    '19080202', '19090122', '19100210', '19110130', '19120218', '19130206', '19140126',
    '19150214', '19160203', '19170123', '19180211', '19190201', '19200220', '19210208',
    '19220128', '19230216', '19240205', '19250124', '19260213', '19270202', '19280123',
    '19290210', '19300130', '19310217', '19320206', '19330126', '19340214', '19350204',
    '19360124', '19370211', '19380131', '19390219', '19400208', '19410127', '19420215',
    '19430205', '19440125', '19450213', '19460202', '19470122', '19480210', '19490129',
    '19500217', '19510206', '19520127', '19530214', '19540203', '19550124', '19560212',
    '19570131', '19580218', '19590208', '19600128', '19610215', '19620205', '19630125',
    '19640213', '19650202', '19660121', '19670209', '19680130', '19690217', '19700206',
    '19710127', '19720215', '19730203', '19740123', '19750211', '19760131', '19770218',
    '19780207', '19790128', '19800216', '19810205', '19820125', '19830213', '19840202',
    '19850220', '19860209', '19870129', '19880217', '19890206', '19900127', '19910215',
    '19920204', '19930123', '19940210', '19950131', '19960219', '19970207', '19980128',
    '19990216', '20000205', '20010124', '20020212', '20030201', '20040122', '20050209',
    '20060129', '20070218', '20080207', '20090126', '20100214', '20110203', '20120123',
    '20130210', '20140131', '20150219', '20160208', '20170128', '20180216', '20190205',
    '20200125', '20210212', '20220201', '20230122', '20240210', '20250129', '20260217',
    '20270206', '20280126', '20290213', '20300203', '20310123', '20320211', '20330131',
    '20340219', '20350208', '20360128', '20370215', '20380204', '20390124', '20400212',
    '20410201', '20420122', '20430210', '20440130', '20450217', '20460206', '20470126',
    '20480214', '20490202', '20500123', '20510211', '20520201', '20530219', '20540208',
    '20550128', '20560215', '20570204', '20580124', '20590212', '20600202', '20610121',
    '20620209', '20630129', '20640217', '20650205', '20660126', '20670214', '20680203',
    '20690123', '20700211', '20710131', '20720219', '20730207', '20740127', '20750215',
    '20760205', '20770124', '20780212', '20790202', '20800122', '20810209', '20820129',
    '20830217', '20840206', '20850126', '20860214', '20870203', '20880124', '20890210',
    '20900130', '20910218', '20920207', '20930127', '20940215', '20950205', '20960125',
    '20970212', '20980201', '20990121', '21000209',
]


def decode(code):
    """Return (leap_month, month_lengths) with the leap month inserted in place."""
    leap = code & 0xF
    lengths = [29 + ((code >> (16 - m)) & 1) for m in range(1, 13)]
    if leap:
        lengths.insert(leap, 29 + (1 if code >> 16 else 0))
    return leap, lengths


def main():
    assert len(YEAR_CODES) == len(NEW_YEARS) == 201
    lines = []
    for i, (code, ny) in enumerate(zip(YEAR_CODES, NEW_YEARS)):
        leap, lengths = decode(code)
        total = sum(lengths)
        assert 353 <= total <= 385, (1900 + i, total)
        if i + 1 < len(NEW_YEARS):
            this_ny = datetime.datetime.strptime(ny, '%Y%m%d').date()
            next_ny = datetime.datetime.strptime(NEW_YEARS[i + 1], '%Y%m%d').date()
            assert (next_ny - this_ny).days == total, (1900 + i, total)
        iso = f'{ny[:4]}-{ny[4:6]}-{ny[6:]}'
        lines.append(f'{iso};{leap};{",".join(str(n) for n in lengths)}')

    out = pathlib.Path(__file__).resolve().parents[1] / 'src' / 'datefrag' / 'data' / 'lunar_years.txt'
    text = '\n'.join(lines) + '\n'
    out.write_text(text, encoding='utf-8')
    digest = hashlib.sha256(text.encode('utf-8')).hexdigest()
    print(f'wrote {out} ({len(lines)} years)')
    print(f'sha256 {digest}')


if __name__ == '__main__':
    main()
