//! IWP/DWP datasets: CSV ingestion, synthetic weld data, scaling, feature
//! expansion and partitioning.
//!
//! Rows are samples. Feature columns are the indirect weld parameters (IWP),
//! target columns the direct weld parameters (DWP). On disk the two groups are
//! told apart by the `iwp:` / `dwp:` column-name prefixes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{s, Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FEATURE_PREFIX: &str = "iwp:";
pub const TARGET_PREFIX: &str = "dwp:";
pub const MAX_DEGREE: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub targets: Array2<f64>,
    pub feature_names: Vec<String>,
    pub target_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset, checking shape agreement and finiteness.
    pub fn new(
        features: Array2<f64>,
        targets: Array2<f64>,
        feature_names: Vec<String>,
        target_names: Vec<String>,
    ) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(Error::EmptyDataset);
        }
        if features.nrows() != targets.nrows() {
            return Err(Error::InvalidDataset(format!(
                "{} feature rows vs {} target rows",
                features.nrows(),
                targets.nrows()
            )));
        }
        if features.ncols() == 0 || targets.ncols() == 0 {
            return Err(Error::InvalidDataset(
                "need at least one feature and one target column".into(),
            ));
        }
        if feature_names.len() != features.ncols() || target_names.len() != targets.ncols() {
            return Err(Error::InvalidDataset(
                "column names do not match column counts".into(),
            ));
        }
        if features.iter().chain(targets.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite entry".into()));
        }
        Ok(Dataset {
            features,
            targets,
            feature_names,
            target_names,
        })
    }

    pub fn rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_targets(&self) -> usize {
        self.targets.ncols()
    }

    /// Target column `k` as an owned vector.
    pub fn target(&self, k: usize) -> Array1<f64> {
        self.targets.column(k).to_owned()
    }

    /// New dataset made of the given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), idx),
            targets: self.targets.select(Axis(0), idx),
            feature_names: self.feature_names.clone(),
            target_names: self.target_names.clone(),
        }
    }

    /// Restricts the targets to a single column.
    pub fn with_single_target(&self, k: usize) -> Dataset {
        Dataset {
            features: self.features.clone(),
            targets: self.targets.slice(s![.., k..k + 1]).to_owned(),
            feature_names: self.feature_names.clone(),
            target_names: vec![self.target_names[k].clone()],
        }
    }

    /// Serialises to the prefixed CSV format read by [`load_csv`].
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self
            .feature_names
            .iter()
            .map(|n| format!("{FEATURE_PREFIX}{n}"))
            .chain(self.target_names.iter().map(|n| format!("{TARGET_PREFIX}{n}")))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for (f, t) in self.features.outer_iter().zip(self.targets.outer_iter()) {
            let mut first = true;
            for v in f.iter().chain(t.iter()) {
                if !first {
                    out.push(',');
                }
                first = false;
                // `{}` on f64 prints the shortest string that parses back to the same bits.
                write!(out, "{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Per-feature affine scaling learned by [`standardize`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl ScalerParams {
    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn apply(&self, features: &Array2<f64>) -> Result<Array2<f64>> {
        self.check(features)?;
        let mut out = features.clone();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            col.mapv_inplace(|v| (v - self.means[j]) / self.stds[j]);
        }
        Ok(out)
    }

    pub fn invert(&self, scaled: &Array2<f64>) -> Result<Array2<f64>> {
        self.check(scaled)?;
        let mut out = scaled.clone();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            col.mapv_inplace(|v| v * self.stds[j] + self.means[j]);
        }
        Ok(out)
    }

    fn check(&self, m: &Array2<f64>) -> Result<()> {
        if m.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: m.ncols(),
            });
        }
        Ok(())
    }
}

/// Reads a CSV file whose header names every column `iwp:<name>` or `dwp:<name>`.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

/// Parses the prefixed CSV format from a string.
pub fn parse_csv(text: &str) -> Result<Dataset> {
    let mut lines = text
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());

    let (_, header) = lines.next().ok_or(Error::MissingHeader)?;
    let mut feature_cols = Vec::new();
    let mut target_cols = Vec::new();
    let mut feature_names = Vec::new();
    let mut target_names = Vec::new();
    for (i, raw) in header.split(',').enumerate() {
        let name = raw.trim();
        if let Some(n) = name.strip_prefix(FEATURE_PREFIX) {
            feature_cols.push(i);
            feature_names.push(n.to_string());
        } else if let Some(n) = name.strip_prefix(TARGET_PREFIX) {
            target_cols.push(i);
            target_names.push(n.to_string());
        } else {
            return Err(Error::UnprefixedColumn(name.to_string()));
        }
    }
    let width = feature_cols.len() + target_cols.len();

    let mut feats = Vec::new();
    let mut targs = Vec::new();
    let mut m = 0;
    for (line_no, line) in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != width {
            return Err(Error::ParseError {
                row: line_no,
                col: cells.len().min(width),
            });
        }
        let mut parsed = Vec::with_capacity(width);
        for (col, c) in cells.iter().enumerate() {
            let v: f64 = c
                .trim()
                .parse()
                .map_err(|_| Error::ParseError { row: line_no, col })?;
            if !v.is_finite() {
                return Err(Error::ParseError { row: line_no, col });
            }
            parsed.push(v);
        }
        feats.extend(feature_cols.iter().map(|&c| parsed[c]));
        targs.extend(target_cols.iter().map(|&c| parsed[c]));
        m += 1;
    }
    if m == 0 {
        return Err(Error::EmptyDataset);
    }
    let features = Array2::from_shape_vec((m, feature_cols.len()), feats).expect("shape");
    let targets = Array2::from_shape_vec((m, target_cols.len()), targs).expect("shape");
    Dataset::new(features, targets, feature_names, target_names)
}

pub fn save_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, data.to_csv_string()).map_err(|e| Error::io(path, e))
}

/// Scales every feature column to zero mean and unit sample standard deviation.
/// Targets are left in their original units.
pub fn standardize(data: &Dataset) -> Result<(Dataset, ScalerParams)> {
    let m = data.rows();
    if m < 2 {
        return Err(Error::TooFewRows(m));
    }
    let mut means = Vec::with_capacity(data.n_features());
    let mut stds = Vec::with_capacity(data.n_features());
    for (j, col) in data.features.axis_iter(Axis(1)).enumerate() {
        let mean = col.sum() / m as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        let std = var.sqrt();
        if !(std > 0.0) || col.iter().all(|&v| v == col[0]) {
            return Err(Error::ConstantColumn(j));
        }
        means.push(mean);
        stds.push(std);
    }
    let scaler = ScalerParams { means, stds };
    let features = scaler.apply(&data.features)?;
    Ok((
        Dataset {
            features,
            ..data.clone()
        },
        scaler,
    ))
}

/// Appends per-feature powers `x_j^2 ..= x_j^(degree+1)` after the original columns.
/// No cross terms. Degree 0 is the identity.
pub fn polynomial_expand(data: &Dataset, degree: usize) -> Result<Dataset> {
    let (features, feature_names) =
        expand_features(&data.features, &data.feature_names, degree)?;
    Ok(Dataset {
        features,
        feature_names,
        ..data.clone()
    })
}

/// Matrix-level form of [`polynomial_expand`].
pub fn expand_features(
    x: &Array2<f64>,
    names: &[String],
    degree: usize,
) -> Result<(Array2<f64>, Vec<String>)> {
    if degree > MAX_DEGREE {
        return Err(Error::DegreeOutOfRange(degree));
    }
    if degree == 0 {
        return Ok((x.clone(), names.to_vec()));
    }
    let (m, d) = x.dim();
    let mut out = Array2::zeros((m, d * (degree + 1)));
    out.slice_mut(s![.., ..d]).assign(x);
    let mut out_names = names.to_vec();
    let mut c = d;
    for j in 0..d {
        for e in 2..=degree + 1 {
            let col = x.column(j).mapv(|v| v.powi(e as i32));
            out.column_mut(c).assign(&col);
            out_names.push(format!("{}^{e}", names[j]));
            c += 1;
        }
    }
    Ok((out, out_names))
}

/// Prepends a column of ones.
pub fn append_bias(mat: &Array2<f64>) -> Array2<f64> {
    let (m, c) = mat.dim();
    let mut out = Array2::ones((m, c + 1));
    out.slice_mut(s![.., 1..]).assign(mat);
    out
}

/// Seeded shuffle split into `(train, test)`.
///
/// The test part gets `floor(m * test_fraction)` rows, clamped to `[1, m-1]`.
pub fn split(data: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train_idx, test_idx) = split_indices(data.rows(), test_fraction, seed)?;
    Ok((data.select_rows(&train_idx), data.select_rows(&test_idx)))
}

pub fn split_indices(m: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if m < 2 {
        return Err(Error::TooFewRows(m));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::ConfigError(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let n_test = ((m as f64 * test_fraction).floor() as usize).clamp(1, m - 1);
    let mut idx: Vec<usize> = (0..m).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let train = idx.split_off(n_test);
    Ok((train, idx))
}

/// Row-wise concatenation in list order. All inputs must share column names.
pub fn combine(datasets: &[Dataset]) -> Result<Dataset> {
    let first = datasets.first().ok_or(Error::EmptyDataset)?;
    if datasets
        .iter()
        .any(|d| d.feature_names != first.feature_names || d.target_names != first.target_names)
    {
        return Err(Error::SchemaMismatch);
    }
    let fviews: Vec<_> = datasets.iter().map(|d| d.features.view()).collect();
    let tviews: Vec<_> = datasets.iter().map(|d| d.targets.view()).collect();
    Ok(Dataset {
        features: ndarray::concatenate(Axis(0), &fviews).expect("same width"),
        targets: ndarray::concatenate(Axis(0), &tviews).expect("same width"),
        feature_names: first.feature_names.clone(),
        target_names: first.target_names.clone(),
    })
}

/// Sampling box for the synthetic welding process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeldRanges {
    /// Arc voltage, V.
    pub voltage: (f64, f64),
    /// Welding current, A.
    pub current: (f64, f64),
    /// Torch travel speed, mm/s.
    pub speed: (f64, f64),
}

impl Default for WeldRanges {
    fn default() -> Self {
        WeldRanges {
            voltage: (20.0, 40.0),
            current: (100.0, 300.0),
            speed: (2.0, 10.0),
        }
    }
}

/// Ground-truth depth of penetration (mm).
///
/// Grows super-linearly with current and decays with travel speed; voltage
/// contributes a small linear term.
pub fn weld_penetration(voltage: f64, current: f64, speed: f64) -> f64 {
    0.5 + 4.0 * (current / 300.0).powf(1.5) / (1.0 + 0.15 * speed) + 0.01 * voltage
}

/// Ground-truth bead width (mm).
///
/// Proportional to voltage, grows with the square root of current and shrinks
/// with the square root of travel speed.
pub fn weld_width(voltage: f64, current: f64, speed: f64) -> f64 {
    2.0 + 0.25 * voltage * (current / 200.0).sqrt() / (speed / 2.0).sqrt()
}

/// Synthetic weld dataset on the default sampling box.
pub fn synthesize_weld(rows: usize, noise_std: f64, seed: u64) -> Result<Dataset> {
    synthesize_weld_in(rows, noise_std, seed, &WeldRanges::default())
}

/// Three IWP columns (`voltage`, `current`, `speed`) drawn uniformly from `ranges`
/// and two DWP columns (`penetration`, `width`) from [`weld_penetration`] and
/// [`weld_width`] plus independent `N(0, noise_std^2)` noise.
pub fn synthesize_weld_in(
    rows: usize,
    noise_std: f64,
    seed: u64,
    ranges: &WeldRanges,
) -> Result<Dataset> {
    if rows == 0 {
        return Err(Error::EmptyDataset);
    }
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(Error::ConfigError(format!("noise std {noise_std} must be >= 0")));
    }
    for (lo, hi) in [ranges.voltage, ranges.current, ranges.speed] {
        if !(lo < hi) || lo <= 0.0 {
            return Err(Error::ConfigError(format!("bad sampling range ({lo}, {hi})")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_std).expect("noise std checked");
    let mut features = Array2::zeros((rows, 3));
    let mut targets = Array2::zeros((rows, 2));
    for i in 0..rows {
        let v = rng.random_range(ranges.voltage.0..ranges.voltage.1);
        let a = rng.random_range(ranges.current.0..ranges.current.1);
        let sp = rng.random_range(ranges.speed.0..ranges.speed.1);
        features[[i, 0]] = v;
        features[[i, 1]] = a;
        features[[i, 2]] = sp;
        let (ep, ew) = if noise_std > 0.0 {
            (noise.sample(&mut rng), noise.sample(&mut rng))
        } else {
            (0.0, 0.0)
        };
        targets[[i, 0]] = weld_penetration(v, a, sp) + ep;
        targets[[i, 1]] = weld_width(v, a, sp) + ew;
    }
    Dataset::new(
        features,
        targets,
        vec!["voltage".into(), "current".into(), "speed".into()],
        vec!["penetration".into(), "width".into()],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::Rng;

    fn toy(m: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = Array2::from_shape_fn((m, 3), |_| rng.random_range(-5.0..5.0));
        let t = Array2::from_shape_fn((m, 2), |_| rng.random_range(0.0..5.0));
        Dataset::new(
            f,
            t,
            vec!["a".into(), "b".into(), "c".into()],
            vec!["p".into(), "w".into()],
        )
        .unwrap()
    }

    #[test]
    fn parses_minimal_file() {
        let d = parse_csv("iwp:v,iwp:i,dwp:p\n1,2,3\n").unwrap();
        assert_eq!((d.rows(), d.n_features(), d.n_targets()), (1, 2, 1));
        assert_eq!(d.features, array![[1.0, 2.0]]);
        assert_eq!(d.targets, array![[3.0]]);
        assert_eq!(d.feature_names, vec!["v", "i"]);
    }

    #[test]
    fn interleaved_prefixes_keep_header_order() {
        let d = parse_csv("dwp:w,iwp:v,dwp:p,iwp:i\r\n9,1,8,2\r\n").unwrap();
        assert_eq!(d.features, array![[1.0, 2.0]]);
        assert_eq!(d.targets, array![[9.0, 8.0]]);
        assert_eq!(d.target_names, vec!["w", "p"]);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(parse_csv(""), Err(Error::MissingHeader)));
        assert!(matches!(parse_csv("iwp:v,dwp:p\n"), Err(Error::EmptyDataset)));
        assert!(matches!(
            parse_csv("iwp:v,p\n1,2\n"),
            Err(Error::UnprefixedColumn(c)) if c == "p"
        ));
        assert!(matches!(
            parse_csv("iwp:v,dwp:p\n1,2\n1,x\n"),
            Err(Error::ParseError { row: 2, col: 1 })
        ));
        assert!(matches!(
            parse_csv("IWP:v,dwp:p\n1,2\n"),
            Err(Error::UnprefixedColumn(_))
        ));
    }

    #[test]
    fn csv_roundtrip_is_bit_identical() {
        let d = toy(45, 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        save_csv(&d, &path).unwrap();
        let back = load_csv(&path).unwrap();
        assert_eq!(back, d);
        for (a, b) in back.features.iter().zip(d.features.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn standardize_two_points() {
        let d = Dataset::new(
            array![[1.0], [3.0]],
            array![[0.0], [0.0]],
            vec!["x".into()],
            vec!["y".into()],
        )
        .unwrap();
        let (s, p) = standardize(&d).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.features[[0, 0]] + h).abs() < 1e-15);
        assert!((s.features[[1, 0]] - h).abs() < 1e-15);
        assert_eq!(p.means, vec![2.0]);
        assert!((p.stds[0] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.targets, d.targets);
    }

    #[test]
    fn standardize_fixed_point() {
        let (s, _) = standardize(&toy(30, 1)).unwrap();
        let (s2, p2) = standardize(&s).unwrap();
        for (a, b) in s.features.iter().zip(s2.features.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(p2.means.iter().all(|m| m.abs() < 1e-10));
    }

    #[test]
    fn standardize_moments_two_pass() {
        let (s, _) = standardize(&toy(50, 7)).unwrap();
        for col in s.features.axis_iter(Axis(1)) {
            // independent two-pass moments
            let mut sum = 0.0;
            for v in col.iter().rev() {
                sum += v;
            }
            let mean = sum / 50.0;
            let mut ss = 0.0;
            for v in col.iter().rev() {
                ss += (v - mean) * (v - mean);
            }
            assert!(mean.abs() < 1e-10);
            assert!(((ss / 49.0).sqrt() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn standardize_rejects_constant_column() {
        let mut d = toy(10, 2);
        d.features.column_mut(1).fill(4.2);
        assert!(matches!(standardize(&d), Err(Error::ConstantColumn(1))));
    }

    #[test]
    fn polynomial_expansion() {
        let d = toy(10, 4);
        assert_eq!(polynomial_expand(&d, 0).unwrap(), d);
        let d2 = Dataset::new(
            array![[2.0, 3.0]],
            array![[1.0]],
            vec!["a".into(), "b".into()],
            vec!["y".into()],
        )
        .unwrap();
        assert_eq!(
            polynomial_expand(&d2, 1).unwrap().features,
            array![[2.0, 3.0, 4.0, 9.0]]
        );
        let d3 = d.with_single_target(0);
        let d3 = Dataset {
            features: d3.features.slice(s![.., ..2]).to_owned(),
            feature_names: vec!["a".into(), "b".into()],
            ..d3
        };
        let e = polynomial_expand(&d3, 3).unwrap();
        assert_eq!(e.n_features(), 8);
        assert_eq!(e.feature_names[2], "a^2");
        for i in 0..10 {
            for j in 0..2 {
                let x = d3.features[[i, j]];
                let mut p = x;
                for k in 0..3 {
                    p *= x;
                    let got = e.features[[i, 2 + 3 * j + k]];
                    assert!((got - p).abs() <= 1e-14 * p.abs());
                }
            }
        }
        assert_eq!(e.targets, d3.targets);
        assert!(matches!(polynomial_expand(&d, 7), Err(Error::DegreeOutOfRange(7))));
    }

    #[test]
    fn bias_column() {
        assert_eq!(append_bias(&array![[5.0], [6.0]]), array![[1.0, 5.0], [1.0, 6.0]]);
        assert_eq!(append_bias(&Array2::zeros((1, 0))), array![[1.0]]);
        let m = toy(7, 9).features.slice(s![.., ..]).to_owned();
        let m = ndarray::concatenate![Axis(1), m, m.slice(s![.., ..1])];
        let b = append_bias(&m);
        assert_eq!(b.dim(), (7, 5));
        assert!(b.column(0).iter().all(|&v| v == 1.0));
        assert_eq!(b.slice(s![.., 1..]), m);
    }

    #[test]
    fn split_counts_and_determinism() {
        let d = toy(10, 0);
        let (tr, te) = split(&d, 0.2, 5).unwrap();
        assert_eq!((tr.rows(), te.rows()), (8, 2));
        let (tr2, te2) = split(&d, 0.2, 5).unwrap();
        assert_eq!(tr, tr2);
        assert_eq!(te, te2);
        let (_, te) = split(&d, 0.01, 5).unwrap();
        assert_eq!(te.rows(), 1);
        assert!(matches!(split(&toy(1, 0), 0.5, 0), Err(Error::TooFewRows(1))));
    }

    #[test]
    fn combine_concatenates() {
        let a = toy(3, 1);
        let b = toy(5, 2);
        assert_eq!(combine(std::slice::from_ref(&a)).unwrap(), a);
        let c = combine(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(c.rows(), 8);
        for i in 0..5 {
            assert_eq!(c.features.row(3 + i), b.features.row(i));
            assert_eq!(c.targets.row(3 + i), b.targets.row(i));
        }
        let mut bad = b.clone();
        bad.target_names[0] = "other".into();
        assert!(matches!(combine(&[a, bad]), Err(Error::SchemaMismatch)));
    }

    #[test]
    fn synth_zero_noise_hits_ground_truth() {
        let a = synthesize_weld(20, 0.0, 11).unwrap();
        assert_eq!(a, synthesize_weld(20, 0.0, 11).unwrap());
        for i in 0..20 {
            let (v, c, s) = (a.features[[i, 0]], a.features[[i, 1]], a.features[[i, 2]]);
            assert!((20.0..40.0).contains(&v));
            assert!((100.0..300.0).contains(&c));
            assert!((2.0..10.0).contains(&s));
            assert_eq!(a.targets[[i, 0]], weld_penetration(v, c, s));
            assert_eq!(a.targets[[i, 1]], weld_width(v, c, s));
        }
    }

    #[test]
    fn synth_residual_std_matches_noise() {
        let d = synthesize_weld(500, 0.05, 21).unwrap();
        for k in 0..2 {
            let res: Vec<f64> = (0..500)
                .map(|i| {
                    let (v, c, s) = (d.features[[i, 0]], d.features[[i, 1]], d.features[[i, 2]]);
                    let f = if k == 0 { weld_penetration(v, c, s) } else { weld_width(v, c, s) };
                    d.targets[[i, k]] - f
                })
                .collect();
            let mean = res.iter().sum::<f64>() / 500.0;
            let sd = (res.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / 499.0).sqrt();
            assert!((0.04..=0.06).contains(&sd), "residual sd {sd}");
        }
    }

    proptest! {
        #[test]
        fn standardize_inverts(seed in 0u64..500, m in 2usize..40) {
            let d = toy(m, seed);
            let (s, p) = standardize(&d).unwrap();
            let back = p.invert(&s.features).unwrap();
            for (a, b) in back.iter().zip(d.features.iter()) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }

        #[test]
        fn split_is_partition(seed in 0u64..1000, m in 2usize..60, frac in 0.01f64..0.99) {
            let (tr, te) = split_indices(m, frac, seed).unwrap();
            prop_assert!(!tr.is_empty() && !te.is_empty());
            let mut all: Vec<usize> = tr.iter().chain(te.iter()).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..m).collect::<Vec<_>>());
        }

        #[test]
        fn synth_is_pure(rows in 1usize..30, seed in 0u64..100, noise in 0.0f64..1.0) {
            prop_assert_eq!(
                synthesize_weld(rows, noise, seed).unwrap(),
                synthesize_weld(rows, noise, seed).unwrap()
            );
        }
    }
}
