"""Calendar conversions against independent oracles and published anchors."""

import datetime

import numpy as np
import pytest

from datefrag.calendars import (GregorianDate, HijriDate, LunarDate,
                                LUNAR_TABLE_FIRST_YEAR, LUNAR_TABLE_LAST_YEAR,
                                HIJRI_EPOCH_JDN, ganzhi_index, greg_to_hijri,
                                greg_to_jdn, greg_to_lunar, hijri_is_leap,
                                hijri_to_greg, hijri_year_length, jdn_to_greg,
                                jdn_to_hijri, lunar_to_greg, to_gregorian,
                                is_gregorian_leap, gregorian_month_length)
from datefrag.errors import InvalidDateError, OutOfRangeError


def oracle_jdn(d: GregorianDate) -> int:
    # datetime's proleptic ordinal is an independent day count.
    return datetime.date(d.year, d.month, d.day).toordinal() + 1721425


class TestGregorianJdn:
    def test_epoch_anchors(self):
        assert greg_to_jdn(GregorianDate(2000, 1, 1)) == 2451545
        assert greg_to_jdn(GregorianDate(1582, 10, 15)) == 2299161
        assert jdn_to_greg(2460129) == GregorianDate(2023, 7, 3)

    def test_matches_datetime_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(500):
            ordinal = int(rng.integers(
                datetime.date(1, 1, 1).toordinal(),
                datetime.date(3000, 12, 31).toordinal()))
            day = datetime.date.fromordinal(ordinal)
            date = GregorianDate(day.year, day.month, day.day)
            assert greg_to_jdn(date) == oracle_jdn(date)
            assert jdn_to_greg(oracle_jdn(date)) == date

    def test_round_trip_dense_window(self):
        for jdn in range(2451545, 2451545 + 2000):
            assert greg_to_jdn(jdn_to_greg(jdn)) == jdn

    def test_leap_rules(self):
        assert is_gregorian_leap(2000) and not is_gregorian_leap(1900)
        assert is_gregorian_leap(2024) and not is_gregorian_leap(2023)
        assert gregorian_month_length(2024, 2) == 29
        assert gregorian_month_length(2023, 2) == 28

    def test_invalid_dates_rejected(self):
        with pytest.raises(InvalidDateError):
            GregorianDate(2023, 2, 31)
        with pytest.raises(OutOfRangeError):
            GregorianDate(3001, 1, 1)


class TestHijri:
    def test_leap_cycle_rule(self):
        # 30-year arithmetic cycle: leap iff (11y + 14) mod 30 < 11.
        leap_set = {2, 5, 7, 10, 13, 16, 18, 21, 24, 26, 29}
        for year in range(1, 200):
            assert hijri_is_leap(year) == (((year - 1) % 30) + 1 in leap_set)
        assert hijri_is_leap(1445)
        assert hijri_year_length(1445) == 355
        assert hijri_year_length(1444) == 354

    def test_epoch(self):
        assert hijri_to_greg(HijriDate(1, 1, 1)) == GregorianDate(622, 7, 19)
        assert greg_to_jdn(GregorianDate(622, 7, 19)) == HIJRI_EPOCH_JDN

    def test_published_anchors(self):
        assert greg_to_hijri(GregorianDate(2023, 7, 3)) == HijriDate(1444, 12, 14)
        assert hijri_to_greg(HijriDate(1445, 1, 1)) == GregorianDate(2023, 7, 19)

    def test_round_trip_window(self):
        for year in (1, 500, 1444, 1445, 1500):
            for month in range(1, 13):
                first = HijriDate(year, month, 1)
                assert greg_to_hijri(hijri_to_greg(first)) == first

    def test_jdn_monotone_across_years(self):
        previous = None
        for year in range(1440, 1460):
            start = greg_to_jdn(hijri_to_greg(HijriDate(year, 1, 1)))
            if previous is not None:
                assert start - previous in (354, 355)
            previous = start

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            HijriDate(0, 1, 1)
        with pytest.raises(InvalidDateError):
            HijriDate(1444, 12, 30)  # 1444 not leap: month 12 has 29 days
        with pytest.raises(OutOfRangeError):
            jdn_to_hijri(HIJRI_EPOCH_JDN - 1)


class TestLunar:
    def test_new_year_anchors(self):
        published = {2020: (1, 25), 2021: (2, 12), 2022: (2, 1),
                     2023: (1, 22), 2024: (2, 10)}
        for year, (month, day) in published.items():
            assert lunar_to_greg(LunarDate(year, 1, 1)) == \
                GregorianDate(year, month, day)

    def test_dragon_boat_2023(self):
        assert greg_to_lunar(GregorianDate(2023, 6, 22)) == \
            LunarDate(2023, 5, 5)

    def test_year_boundary(self):
        assert greg_to_lunar(GregorianDate(2023, 1, 21)) == \
            LunarDate(2022, 12, 30)
        assert greg_to_lunar(GregorianDate(2023, 1, 22)) == \
            LunarDate(2023, 1, 1)

    def test_leap_month_2023(self):
        leap_start = greg_to_lunar(GregorianDate(2023, 3, 22))
        assert leap_start == LunarDate(2023, 2, 1, is_leap_month=True)
        assert greg_to_lunar(GregorianDate(2023, 7, 3)) == LunarDate(2023, 5, 16)
        with pytest.raises(InvalidDateError):
            LunarDate(2023, 3, 1, is_leap_month=True)

    def test_ganzhi(self):
        assert ganzhi_index(1984) == 0  # jiazi year starts the cycle
        assert ganzhi_index(2023) == 39
        assert LunarDate(2023, 5, 16).ganzhi_index == 39

    def test_round_trip_window(self):
        for year in (1900, 1984, 2023, 2100):
            date = LunarDate(year, 1, 1)
            assert greg_to_lunar(lunar_to_greg(date)) == date

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            LunarDate(LUNAR_TABLE_FIRST_YEAR - 1, 1, 1)
        with pytest.raises(OutOfRangeError):
            LunarDate(LUNAR_TABLE_LAST_YEAR + 1, 1, 1)
        with pytest.raises(OutOfRangeError):
            greg_to_lunar(GregorianDate(1899, 12, 31))


class TestToGregorian:
    def test_dispatch(self):
        g = GregorianDate(2023, 7, 3)
        assert to_gregorian(g) is g
        assert to_gregorian(HijriDate(1444, 12, 14)) == g
        assert to_gregorian(LunarDate(2023, 5, 16)) == g
