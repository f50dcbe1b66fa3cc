from datetime import datetime, timedelta, timezone

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sohpred import ingest


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def make_segment(currents, times, socs, start=None):
    start = start or datetime(2021, 3, 1, tzinfo=timezone.utc)
    samples = tuple(
        ingest.ChargeSample(time=t, current=i, voltage=350.0, soc=s)
        for t, i, s in zip(times, currents, socs)
    )
    return ingest.ChargeSegment("veh", start, samples)


def constant_current_segment(cap_ah, start=None, soc0=0.2, soc1=0.7, duration_s=3600.0):
    """Charging event whose coulomb-counted capacity is exactly cap_ah."""
    n = 100
    times = np.linspace(0.0, duration_s, n)
    current = -cap_ah * (soc1 - soc0) * 3600.0 / duration_s
    socs = soc0 + (soc1 - soc0) * times / duration_s
    return make_segment([current] * n, times, socs, start=start)


class TestParseCycleFile:
    def test_well_formed_three_cycles(self, tmp_path):
        rows = ["cycle,time_s,voltage_v,charge_ah,capacity_ah"]
        for c in (1, 2, 3):
            for t in range(3):
                rows.append(f"{c},{t},{3.5 + 0.1 * t},{0.1 * t},0.74")
        records, dropped = ingest.parse_cycle_file(write(tmp_path, "a.csv", "\n".join(rows)))
        assert len(records) == 3
        assert dropped == 0
        assert records[0].measured_capacity == 0.74

    def test_voltage_window_violation_dropped_and_counted(self, tmp_path):
        text = (
            "cycle,time_s,voltage_v,charge_ah,capacity_ah\n"
            "1,0,3.5,0.0,0.7\n1,1,9.9,0.1,0.7\n1,2,3.7,0.2,0.7\n"
        )
        records, dropped = ingest.parse_cycle_file(write(tmp_path, "b.csv", text))
        assert dropped == 1
        assert records[0].charge_curve.shape[0] == 2

    def test_shuffled_cycles_sorted(self, tmp_path):
        rows = ["cycle,time_s,voltage_v,charge_ah"]
        for c in (7, 2, 5):
            rows += [f"{c},0,3.5,0.0", f"{c},1,3.6,0.1"]
        records, _ = ingest.parse_cycle_file(write(tmp_path, "c.csv", "\n".join(rows)))
        assert [r.cycle_index for r in records] == [2, 5, 7]

    def test_missing_column_and_empty(self, tmp_path):
        with pytest.raises(ingest.ParseError, match="missing mapped column"):
            ingest.parse_cycle_file(write(tmp_path, "d.csv", "cycle,foo\n1,2\n"))
        with pytest.raises(ingest.ParseError):
            ingest.parse_cycle_file(write(tmp_path, "e.csv", ""))

    def test_all_rows_outside_window_is_error(self, tmp_path):
        text = "cycle,time_s,voltage_v,charge_ah\n1,0,9.0,0.0\n1,1,9.1,0.1\n"
        with pytest.raises(ingest.ParseError, match="zero usable rows"):
            ingest.parse_cycle_file(write(tmp_path, "f.csv", text))


class TestParseFleetFile:
    def fleet_text(self, stamps, socs, current=-70.0):
        lines = ["timestamp,current_a,voltage_v,soc"]
        for ts, soc in zip(stamps, socs):
            lines.append(f"{ts},{current},350.0,{soc}")
        return "\n".join(lines)

    def test_contiguous_single_segment(self, tmp_path):
        stamps = [1_600_000_000 + 8 * i for i in range(100)]
        socs = [20.0 + 0.5 * i for i in range(100)]
        path = write(tmp_path, "v.csv", self.fleet_text(stamps, socs))
        segments = ingest.parse_fleet_file(path)
        assert len(segments) == 1
        assert len(segments[0].samples) == 100

    def test_gap_splits_segments(self, tmp_path):
        stamps = [1_600_000_000 + 8 * i for i in range(50)]
        stamps += [stamps[-1] + 7200 + 8 * i for i in range(50)]
        socs = [20.0 + 0.2 * i for i in range(50)] * 2
        path = write(tmp_path, "v.csv", self.fleet_text(stamps, socs))
        segments = ingest.parse_fleet_file(path)
        assert len(segments) == 2

    def test_soc_percent_converted(self, tmp_path):
        stamps = [0, 8]
        path = write(tmp_path, "v.csv", self.fleet_text(stamps, [85.3, 85.4]))
        segments = ingest.parse_fleet_file(path)
        assert segments[0].samples[0].soc == pytest.approx(0.853)

    def test_soc_dips_dropped(self, tmp_path):
        stamps = [8 * i for i in range(5)]
        socs = [20.0, 20.1, 19.9, 20.2, 20.3]  # one jitter dip
        path = write(tmp_path, "v.csv", self.fleet_text(stamps, socs))
        segments = ingest.parse_fleet_file(path)
        soc_values = [s.soc for s in segments[0].samples]
        assert soc_values == sorted(soc_values)
        assert len(soc_values) == 4

    def test_empty_file(self, tmp_path):
        with pytest.raises(ingest.ParseError):
            ingest.parse_fleet_file(write(tmp_path, "v.csv", "timestamp,current_a,voltage_v,soc\n"))


class TestComputeCapacity:
    def test_constant_current_case(self):
        # -10 A for 3600 s over SOC 0.20 -> 0.30: 10 Ah / 0.1 = 100 Ah
        times = np.arange(0.0, 3600.0 + 1, 8.0)
        socs = 0.20 + 0.10 * times / 3600.0
        seg = make_segment([-10.0] * len(times), times, socs)
        assert ingest.compute_capacity(seg) == pytest.approx(100.0, rel=1e-9)

    def test_rated_pack_case(self):
        times = np.arange(0.0, 5760.0 + 1, 8.0)
        socs = 0.10 + 0.80 * times / 5760.0
        seg = make_segment([-72.5] * len(times), times, socs)
        assert ingest.compute_capacity(seg) == pytest.approx(145.0, rel=1e-9)

    def test_multistage_matches_brute_force_oracle(self):
        rng = np.random.default_rng(3)
        times = np.arange(0.0, 4000.0, 8.0)
        stage = np.repeat(rng.uniform(20.0, 90.0, size=10), 50)
        current = -stage
        charge_as = np.concatenate(([0.0], np.cumsum(-current[:-1] * np.diff(times))))
        socs = 0.1 + 0.7 * charge_as / charge_as[-1]
        seg = make_segment(current, times, socs)

        # independent oracle: explicit sample-by-sample rectangular sum
        acc = 0.0
        for k in range(len(times) - 1):
            acc += -current[k] * (times[k + 1] - times[k])
        expected = acc / 3600.0 / (socs[-1] - socs[0])
        assert ingest.compute_capacity(seg) == pytest.approx(expected, rel=1e-9)

    def test_small_soc_span_rejected(self):
        times = np.arange(0.0, 100.0, 8.0)
        socs = 0.20 + 0.01 * times / 100.0
        seg = make_segment([-10.0] * len(times), times, socs)
        with pytest.raises(ValueError, match="SOC span"):
            ingest.compute_capacity(seg)

    def test_non_charging_segment_rejected(self):
        times = np.arange(0.0, 3600.0, 8.0)
        socs = 0.2 + 0.4 * times / 3600.0
        seg = make_segment([5.0] * len(times), times, socs)
        with pytest.raises(ValueError, match="not a charging segment"):
            ingest.compute_capacity(seg)

    @given(scale=st.floats(0.25, 4.0))
    @settings(max_examples=25, deadline=None)
    def test_linearity_in_current(self, scale):
        times = np.arange(0.0, 2000.0, 8.0)
        base = -30.0 - 10.0 * np.sin(times / 300.0) ** 2
        socs = np.linspace(0.2, 0.6, len(times))
        c1 = ingest.compute_capacity(make_segment(base, times, socs))
        c2 = ingest.compute_capacity(make_segment(base * scale, times, socs))
        assert c2 == pytest.approx(scale * c1, rel=1e-12)

    def test_time_reindexing_invariance(self):
        times = np.arange(0.0, 2000.0, 8.0)
        current = [-40.0] * len(times)
        socs = np.linspace(0.2, 0.5, len(times))
        a = ingest.compute_capacity(make_segment(current, times, socs))
        b = ingest.compute_capacity(make_segment(current, times + 12345.0, socs))
        assert a == b


class TestMonthlyAggregate:
    def month_events(self, caps, month):
        start = datetime(2021, 1, 1, tzinfo=timezone.utc) + timedelta(days=31 * month)
        return [
            constant_current_segment(c, start=start + timedelta(days=i))
            for i, c in enumerate(caps)
        ]

    def test_median_and_mean(self):
        records, omitted = ingest.monthly_aggregate(self.month_events([140, 141, 139], 0))
        assert len(records) == 1
        assert records[0].median_capacity == pytest.approx(140.0)
        assert records[0].mean_capacity == pytest.approx(140.0)
        assert omitted == {}

    def test_median_robust_to_outlier(self):
        records, _ = ingest.monthly_aggregate(self.month_events([100, 100, 400], 0))
        assert records[0].median_capacity == pytest.approx(100.0)
        assert records[0].mean_capacity == pytest.approx(200.0)

    def test_29_months_match_sort_oracle(self):
        rng = np.random.default_rng(12)
        segments = []
        expected = {}
        for m in range(29):
            caps = list(rng.uniform(120.0, 145.0, size=5))
            segments += self.month_events(caps, m)
            ordered = sorted(caps)
            expected[m] = ordered[len(ordered) // 2]  # odd count: middle element
        records, _ = ingest.monthly_aggregate(segments)
        assert len(records) == 29
        for rec in records:
            assert rec.median_capacity == pytest.approx(expected[rec.month], rel=1e-12)

    def test_sparse_months_omitted_and_reported(self):
        segments = self.month_events([140, 141, 139], 0) + self.month_events([130], 1)
        records, omitted = ingest.monthly_aggregate(segments)
        assert [r.month for r in records] == [0]
        assert omitted == {1: 1}

    @given(order=st.permutations(range(5)))
    @settings(max_examples=20, deadline=None)
    def test_permutation_invariance(self, order):
        caps = [140.0, 133.0, 139.5, 141.2, 136.8]
        base = self.month_events(caps, 0)
        records, _ = ingest.monthly_aggregate([base[i] for i in order])
        assert records[0].median_capacity == pytest.approx(139.5)


class TestComputeSOH:
    def test_identity(self):
        series = ingest.compute_soh([0.74, 0.74], "first")
        assert np.allclose(series.values, [1.0, 1.0])

    def test_ratio(self):
        series = ingest.compute_soh([0.74, 0.703], "first")
        assert series.values[1] == pytest.approx(0.95)

    def test_max_denominator_peaks_at_one(self):
        rng = np.random.default_rng(0)
        caps = rng.uniform(120.0, 145.0, size=30)
        series = ingest.compute_soh(caps, "max")
        assert series.values.max() == 1.0

    def test_first_denominator_index_zero_is_one(self):
        series = ingest.compute_soh([5.0, 4.0, 3.9], "first")
        assert series.values[0] == 1.0

    def test_explicit_denominator(self):
        series = ingest.compute_soh([72.0], 80.0)
        assert series.values[0] == pytest.approx(0.9)

    def test_errors(self):
        with pytest.raises(ValueError):
            ingest.compute_soh([], "first")
        with pytest.raises(ValueError):
            ingest.compute_soh([1.0, -2.0], "first")
        with pytest.raises(ValueError):
            ingest.compute_soh([1.0], 0.0)


class TestTypes:
    def test_segment_needs_two_samples(self):
        with pytest.raises(ValueError):
            make_segment([-1.0], [0.0], [0.5])

    def test_segment_rejects_decreasing_soc(self):
        with pytest.raises(ValueError):
            make_segment([-1.0, -1.0], [0.0, 8.0], [0.5, 0.4])

    def test_cycle_record_rejects_decreasing_charge(self):
        curve = np.array([[0.0, 3.5, 0.2], [1.0, 3.6, 0.1]])
        with pytest.raises(ValueError):
            ingest.CycleRecord(1, curve, 0.7)

    def test_soh_series_bounds(self):
        with pytest.raises(ValueError):
            ingest.SOHSeries((0,), np.array([1.2]))
