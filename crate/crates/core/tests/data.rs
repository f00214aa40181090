use std::io::Cursor;

use proptest::prelude::*;
use wavecast::data::{
    apply_normalization, fit_normalization, generate_synthetic, ingest_csv, interpolate_gaps, invert_normalization,
    read_csv, segment, split_counts, split_datasets, write_csv, Outage, Role, Schema, SyntheticConfig, TimeSeriesFrame,
    Variable,
};
use wavecast::Error;

const DAY: i64 = 86_400;

fn schema() -> Schema {
    Schema::from_pairs(&["timestamp=time", "target=level", "past=sea", "future=pump"]).unwrap()
}

fn csv_rows(rows: &[(i64, &str)]) -> String {
    let mut s = String::from("time,level,sea,pump\n");
    for (t, vals) in rows {
        s.push_str(&format!("{t},{vals}\n"));
    }
    s
}

fn minutes_csv(n: i64, skip: impl Fn(i64) -> bool) -> String {
    let rows: Vec<(i64, String)> = (0..n)
        .filter(|i| !skip(*i))
        .map(|i| (60 * i, format!("{},{},{}", i, 0.5 * i as f64, i % 2)))
        .collect();
    let borrowed: Vec<(i64, &str)> = rows.iter().map(|(t, v)| (*t, v.as_str())).collect();
    csv_rows(&borrowed)
}

fn frame_of(values: Vec<f64>, step: i64) -> TimeSeriesFrame {
    let n = values.len() as i64;
    TimeSeriesFrame::new(
        (0..n).map(|i| i * step).collect(),
        step,
        Variable::new("y", values.clone()),
        vec![Variable::new("x", values.iter().map(|v| v * 2.0).collect())],
        vec![],
    )
    .unwrap()
}

#[test]
fn ingest_contiguous_file() {
    let frames = read_csv(Cursor::new(minutes_csv(4, |_| false)), &schema(), 60).unwrap();
    assert_eq!(frames.len(), 1);
    assert_eq!(frames[0].len(), 4);
    assert_eq!(frames[0].step_seconds, 60);
    assert_eq!(frames[0].target.values, vec![0.0, 1.0, 2.0, 3.0]);
    assert_eq!(frames[0].past_covariates[0].name, "sea");
    assert_eq!(frames[0].future_covariates[0].values, vec![0.0, 1.0, 0.0, 1.0]);
}

#[test]
fn ingest_short_hole_stays_in_one_frame() {
    let csv = minutes_csv(200, |i| (50..80).contains(&i));
    let frames = read_csv(Cursor::new(csv), &schema(), 60).unwrap();
    assert_eq!(frames.len(), 1);
    assert_eq!(frames[0].len(), 200);
    assert!(frames[0].target.values[60].is_nan());
    let filled = interpolate_gaps(&frames[0], 60).unwrap();
    assert_eq!(filled.len(), 1);
    assert!((filled[0].target.values[60] - 60.0).abs() < 1e-12);
}

#[test]
fn ingest_two_day_hole_splits() {
    let mut csv = minutes_csv(10, |_| false);
    for i in 0..10 {
        csv.push_str(&format!("{},{i},0,0\n", 2 * DAY + 600 + 60 * i));
    }
    let frames = read_csv(Cursor::new(csv), &schema(), 60).unwrap();
    assert_eq!(frames.len(), 2);
    assert_eq!(frames[1].timestamps[0], 2 * DAY + 600);
}

#[test]
fn ingest_rfc3339_and_missing_markers() {
    let csv = "time,level,sea,pump\n\
               2024-01-01T00:00:00Z,1,2,0\n\
               2024-01-01T00:01:00Z,NA,2,0\n\
               2024-01-01T00:02:00Z,3,,1\n\
               2024-01-01T00:03:00Z,4,2,nan\n\
               2024-01-01T00:04:00Z,5,2,1\n";
    let frames = read_csv(Cursor::new(csv), &schema(), 60).unwrap();
    assert_eq!(frames.len(), 1);
    let f = &frames[0];
    assert_eq!(f.timestamps[0], 1_704_067_200);
    // Partially observed rows become fully missing rows.
    assert!((1..4).all(|r| f.row_missing(r)));
    let g = &interpolate_gaps(f, 60).unwrap()[0];
    assert_eq!(g.target.values, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
}

#[test]
fn ingest_errors() {
    let bad = csv_rows(&[(0, "1,2,3"), (60, "x,2,3")]);
    assert!(matches!(
        read_csv(Cursor::new(bad), &schema(), 60),
        Err(Error::Parse { line: 3, .. })
    ));
    let unordered = csv_rows(&[(0, "1,2,3"), (120, "1,2,3"), (60, "1,2,3")]);
    assert!(matches!(
        read_csv(Cursor::new(unordered), &schema(), 60),
        Err(Error::Ordering { line: 4 })
    ));
    let dup = csv_rows(&[(0, "1,2,3"), (0, "1,2,3")]);
    assert!(matches!(
        read_csv(Cursor::new(dup), &schema(), 60),
        Err(Error::Ordering { .. })
    ));
    let missing_col = "time,level\n0,1\n";
    assert!(read_csv(Cursor::new(missing_col), &schema(), 60).is_err());
    assert!(matches!(
        ingest_csv(std::path::Path::new("/nonexistent/x.csv"), &schema()),
        Err(Error::Io { .. })
    ));
    assert_eq!(Schema::from_pairs(&["target=a"]).unwrap().timestamp, "timestamp");
    assert!(Schema::from_pairs(&["timestamp=t", "past=a"]).is_err());
    assert!(Schema::from_pairs(&["target=a", "target=b"]).is_err());
    assert!(Schema::from_pairs(&["timestamp=t", "target=a", "weird=b"]).is_err());
}

#[test]
fn csv_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sub").join("frame.csv");
    let f = TimeSeriesFrame::new(
        (0..50).map(|i| 1_700_000_000 + 60 * i).collect(),
        60,
        Variable::new("level", (0..50).map(|i| (i as f64 * 0.1).sin() * 1e3 / 7.0).collect()),
        vec![Variable::new("sea", (0..50).map(|i| i as f64 / 3.0).collect())],
        vec![Variable::new("pump", vec![1.0; 50])],
    )
    .unwrap();
    write_csv(&f, &path).unwrap();
    assert!(!path.with_extension("csv.partial").exists());
    let back = ingest_csv(&path, &schema_for_written()).unwrap();
    assert_eq!(back, vec![f]);
}

fn schema_for_written() -> Schema {
    Schema::from_pairs(&["timestamp=timestamp", "target=level", "past=sea", "future=pump"]).unwrap()
}

#[test]
fn interpolation_examples() {
    let f = frame_of(vec![0.0, f64::NAN, 1.0], 60);
    assert_eq!(interpolate_gaps(&f, 60).unwrap()[0].target.values, vec![0.0, 0.5, 1.0]);
    let clean = frame_of((0..10).map(f64::from).collect(), 60);
    assert_eq!(interpolate_gaps(&clean, 60).unwrap(), vec![clean]);
}

#[test]
fn gap_threshold_is_strict() {
    let with_gap = |missing: usize| {
        let mut v: Vec<f64> = (0..200).map(f64::from).collect();
        for x in &mut v[50..50 + missing] {
            *x = f64::NAN;
        }
        frame_of(v, 60)
    };
    let filled = interpolate_gaps(&with_gap(59), 60).unwrap();
    assert_eq!(filled.len(), 1);
    assert!(filled[0].target.values.iter().all(|v| v.is_finite()));
    let split = interpolate_gaps(&with_gap(60), 60).unwrap();
    assert_eq!(split.len(), 2);
    assert_eq!(split[0].len(), 50);
    assert_eq!(split[1].timestamps[0], 110 * 60);
}

#[test]
fn boundary_gaps_are_truncated() {
    let mut v: Vec<f64> = (0..20).map(f64::from).collect();
    v[0] = f64::NAN;
    v[1] = f64::NAN;
    v[19] = f64::NAN;
    let out = interpolate_gaps(&frame_of(v, 60), 60).unwrap();
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].len(), 17);
    assert_eq!(out[0].target.values[0], 2.0);
}

fn days_frame(days: f64) -> TimeSeriesFrame {
    let n = (days * 24.0) as usize;
    frame_of((0..n).map(|i| i as f64).collect(), 3600)
}

#[test]
fn segmentation_examples() {
    let segs = segment(&days_frame(12.0), 5.0, 10.0).unwrap();
    assert_eq!(segs.len(), 2);
    assert!(segs.iter().all(|s| s.duration_seconds() == 6 * DAY));
    assert_eq!(segment(&days_frame(7.0), 5.0, 10.0).unwrap().len(), 1);
    let segs = segment(&days_frame(30.0), 5.0, 10.0).unwrap();
    assert_eq!(segs.len(), 3);
    assert!(segs.iter().all(|s| s.duration_seconds() == 10 * DAY));
    assert!(segment(&days_frame(3.0), 5.0, 5.0).is_err());
}

#[test]
fn split_examples() {
    let frames: Vec<TimeSeriesFrame> = (0..10).map(|i| frame_of(vec![i as f64; 3], 60)).collect();
    let s = split_datasets(&frames, [0.6, 0.2, 0.2], 7).unwrap();
    assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (6, 2, 2));
    assert_eq!(split_datasets(&frames, [0.6, 0.2, 0.2], 7).unwrap(), s);
    assert_ne!(split_datasets(&frames, [0.6, 0.2, 0.2], 8).unwrap(), s);
    assert!(split_datasets(&frames[..2], [0.6, 0.2, 0.2], 7).is_err());
    assert!(split_datasets(&frames, [0.6, 0.2, 0.3], 7).is_err());
    assert_eq!(split_counts(68, [42.0 / 68.0, 14.0 / 68.0, 12.0 / 68.0]), [42, 14, 12]);
    assert_eq!(split_counts(68, [0.6, 0.2, 0.2]), [41, 13, 14]);
    assert_eq!(split_counts(3, [0.8, 0.1, 0.1]), [1, 1, 1]);
}

#[test]
fn normalization_examples() {
    let f = TimeSeriesFrame::new(
        vec![0, 60, 120],
        60,
        Variable::new("level", vec![63.8, 200.0, 407.8]),
        vec![Variable::new("unit", vec![0.0, 0.3, 1.0])],
        vec![],
    )
    .unwrap();
    let p = fit_normalization(std::slice::from_ref(&f)).unwrap();
    let r = p.get("level").unwrap();
    assert_eq!((r.min, r.max), (63.8, 407.8));
    let u = p.get("unit").unwrap();
    assert_eq!((u.min, u.max), (0.0, 1.0));
    let (n, clamped) = apply_normalization(&f, &p).unwrap();
    assert_eq!(clamped, 0);
    assert_eq!(n.target.values[0], 0.0);
    assert_eq!(n.target.values[2], 1.0);
    assert_eq!(n.past_covariates[0].values, vec![0.0, 0.3, 1.0]);
    let mid = TimeSeriesFrame::new(
        vec![0, 60],
        60,
        Variable::new("level", vec![(63.8 + 407.8) / 2.0, 500.0]),
        vec![Variable::new("unit", vec![-1.0, 0.5])],
        vec![],
    )
    .unwrap();
    let (m, clamped) = apply_normalization(&mid, &p).unwrap();
    assert!((m.target.values[0] - 0.5).abs() < 1e-15);
    assert_eq!(m.target.values[1], 1.0);
    assert_eq!(m.past_covariates[0].values[0], 0.0);
    assert_eq!(clamped, 2);
    let constant = frame_of(vec![2.0; 5], 60);
    assert!(matches!(fit_normalization(&[constant]), Err(Error::DegenerateRange(_))));
}

#[test]
fn normalization_fits_union_of_frames() {
    let a = frame_of(vec![1.0, 5.0, 3.0], 60);
    let b = frame_of(vec![-2.0, 0.0, 4.0], 60);
    let both = frame_of(vec![1.0, 5.0, 3.0, -2.0, 0.0, 4.0], 60);
    assert_eq!(fit_normalization(&[a, b]).unwrap(), fit_normalization(&[both]).unwrap());
}

#[test]
fn synthetic_is_deterministic_and_usable() {
    let cfg = SyntheticConfig {
        duration_days: 3.0,
        ..SyntheticConfig::default()
    };
    let a = generate_synthetic(&cfg, 1).unwrap();
    assert_eq!(a, generate_synthetic(&cfg, 1).unwrap());
    assert_ne!(a, generate_synthetic(&cfg, 2).unwrap());
    assert_eq!(a.len(), 1);
    let f = &a[0];
    assert_eq!(f.len(), 3 * 1440);
    assert_eq!(f.variable_count(), 4);
    let roles: Vec<Role> = f.variables().map(|v| v.1).collect();
    assert_eq!(roles, vec![Role::Target, Role::Past, Role::Past, Role::Future]);
    assert!(f.variables().all(|(_, _, v)| v.iter().all(|x| x.is_finite())));
    assert!(generate_synthetic(
        &SyntheticConfig {
            duration_days: 0.0,
            ..cfg
        },
        1
    )
    .is_err());
}

#[test]
fn synthetic_outages_split_or_stay() {
    let cfg = SyntheticConfig {
        duration_days: 4.0,
        outages: vec![
            Outage {
                start_day: 1.0,
                hours: 0.5,
            },
            Outage {
                start_day: 2.5,
                hours: 3.0,
            },
        ],
        ..SyntheticConfig::default()
    };
    let frames = generate_synthetic(&cfg, 3).unwrap();
    assert_eq!(frames.len(), 2);
    let repaired: Vec<_> = frames.iter().flat_map(|f| interpolate_gaps(f, 60).unwrap()).collect();
    assert_eq!(repaired.len(), 2);
    assert!(repaired.iter().all(|f| f.target.values.iter().all(|v| v.is_finite())));
}

#[test]
fn synthetic_relaxes_to_equilibrium() {
    let cfg = SyntheticConfig {
        duration_days: 1.0,
        sea_noise: 0.0,
        temp_noise: 0.0,
        noise: 0.0,
        pump_power: 0.0,
        shocks_per_day: 0.0,
        m2_amplitude: 0.0,
        s2_amplitude: 0.0,
        temp_amplitude: 0.0,
        initial_level: Some(400.0),
        ..SyntheticConfig::default()
    };
    let f = &generate_synthetic(&cfg, 4).unwrap()[0];
    let eq = cfg.equilibrium(0.0, 0.0, cfg.temp_mean);
    let y = &f.target.values;
    assert!((y[y.len() - 1] - eq).abs() < 1e-6);
    assert!(y.windows(2).all(|w| (w[1] - eq).abs() <= (w[0] - eq).abs() + 1e-12));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_repair_and_segment_keep_observations(
        seed in any::<u64>(),
        n in 50usize..3000,
        holes in prop::collection::vec((0usize..3000, 1usize..90), 0..6),
    ) {
        let mut values: Vec<f64> = (0..n).map(|i| ((i as u64 ^ seed) % 997) as f64).collect();
        for &(start, len) in &holes {
            for v in values.iter_mut().skip(start).take(len) {
                *v = f64::NAN;
            }
        }
        if values.iter().all(|v| v.is_nan()) {
            return Ok(());
        }
        let frame = frame_of(values.clone(), 600);
        let pieces = interpolate_gaps(&frame, 60).unwrap();
        let mut seen = 0;
        for p in &pieces {
            for s in segment(p, 1.0, 2.5).unwrap() {
                for (t, v) in s.timestamps.iter().zip(&s.target.values) {
                    let i = (*t / 600) as usize;
                    prop_assert!(v.is_finite());
                    if !values[i].is_nan() {
                        prop_assert_eq!(v.to_bits(), values[i].to_bits());
                        seen += 1;
                    }
                }
            }
        }
        let first = values.iter().position(|v| !v.is_nan()).unwrap();
        let last = values.iter().rposition(|v| !v.is_nan()).unwrap();
        let observed = values[first..=last].iter().filter(|v| !v.is_nan()).count();
        prop_assert!(seen <= observed);
    }

    #[test]
    fn prop_segment_bounds(min in 0.5f64..5.0, width in 2.0f64..4.0, days in 0.5f64..60.0) {
        let max = min * width;
        let f = days_frame(days.max(1.0 / 24.0));
        let segs = segment(&f, min, max).unwrap();
        let total: usize = segs.iter().map(|s| s.len()).sum();
        prop_assert_eq!(total, f.len());
        let dur = f.duration_seconds() as f64 / DAY as f64;
        if dur >= min {
            for s in &segs {
                let d = s.duration_seconds() as f64 / DAY as f64;
                prop_assert!(d >= min - 1.0 / 24.0 && d <= max + 1.0 / 24.0, "{d} not in [{min}, {max}]");
            }
        }
        let lens: Vec<usize> = segs.iter().map(|s| s.len()).collect();
        prop_assert!(lens.iter().max().unwrap() - lens.iter().min().unwrap() <= 1);
    }

    #[test]
    fn prop_split_is_partition(n in 3usize..80, seed in any::<u64>()) {
        let frames: Vec<TimeSeriesFrame> = (0..n).map(|i| frame_of(vec![i as f64, 0.0], 60)).collect();
        let s = split_datasets(&frames, [0.6, 0.2, 0.2], seed).unwrap();
        let mut ids: Vec<i64> = s.train.iter().chain(&s.validation).chain(&s.test)
            .map(|f| f.target.values[0] as i64).collect();
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..n as i64).collect::<Vec<_>>());
        prop_assert!(!s.train.is_empty() && !s.validation.is_empty() && !s.test.is_empty());
    }

    #[test]
    fn prop_normalization_inverts(values in prop::collection::vec(-1e4f64..1e4, 2..200)) {
        let f = frame_of(values.clone(), 60);
        prop_assume!(values.iter().any(|v| *v != values[0]));
        let p = fit_normalization(std::slice::from_ref(&f)).unwrap();
        let (n, clamped) = apply_normalization(&f, &p).unwrap();
        prop_assert_eq!(clamped, 0);
        prop_assert!(n.target.values.iter().all(|v| (0.0..=1.0).contains(v)));
        let back = invert_normalization(&n, &p).unwrap();
        let range = p.get("y").unwrap().max - p.get("y").unwrap().min;
        for (a, b) in back.target.values.iter().zip(&values) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + range));
        }
    }
}
