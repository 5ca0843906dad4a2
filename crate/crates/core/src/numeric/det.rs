/// A summand `mant · e^{log_scale}` of a determinant entry.
///
/// Entries whose magnitudes span hundreds of orders (factorials of the
/// scatterer count, powers of eigenvalues) are assembled from such terms so
/// that nothing is exponentiated before a common row scale is removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogTerm {
    pub mant: f64,
    pub log_scale: f64,
}

impl LogTerm {
    pub fn new(mant: f64, log_scale: f64) -> Self {
        Self { mant, log_scale }
    }

    pub fn value(v: f64) -> Self {
        Self::new(v, 0.0)
    }

    fn log_abs(&self) -> f64 {
        if self.mant == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.log_scale + self.mant.abs().ln()
        }
    }
}

/// Determinant in sign/log-magnitude form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub sign: f64,
    pub log_abs: f64,
}

impl LogDet {
    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }

    /// `self / other` as a plain number.
    pub fn ratio(&self, other: &LogDet) -> f64 {
        if self.sign == 0.0 {
            return 0.0;
        }
        self.sign * other.sign * (self.log_abs - other.log_abs).exp()
    }
}

/// Row- and column-equilibrated copy of a matrix given by term lists.
struct Scaled {
    a: Vec<f64>,
    log_acc: f64,
    row_max: Vec<f64>,
    col_max: Vec<f64>,
}

fn equilibrate(n: usize, terms: &[Vec<LogTerm>]) -> Option<Scaled> {
    let mut a = vec![0.0f64; n * n];
    let mut log_acc = 0.0;
    let mut row_max = Vec::with_capacity(n);
    for i in 0..n {
        let row = &terms[i * n..(i + 1) * n];
        let top = row.iter().flatten().map(LogTerm::log_abs).fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return None;
        }
        log_acc += top;
        row_max.push(top);
        for (j, ts) in row.iter().enumerate() {
            a[i * n + j] = ts.iter().map(|t| t.mant * (t.log_scale - top).exp()).sum();
        }
    }
    let mut col_max = Vec::with_capacity(n);
    for j in 0..n {
        let top = (0..n).map(|i| a[i * n + j].abs()).fold(0.0, f64::max);
        if top == 0.0 {
            return None;
        }
        log_acc += top.ln();
        col_max.push(top);
        for i in 0..n {
            a[i * n + j] /= top;
        }
    }
    Some(Scaled { a, log_acc, row_max, col_max })
}

const ZERO_DET: LogDet = LogDet { sign: 0.0, log_abs: f64::NEG_INFINITY };

/// Determinant of an `n×n` matrix whose `(i, j)` entry is the sum of the
/// terms produced by `entry(i, j)`.
///
/// Each row is divided by its largest term magnitude and each column of the
/// result by its largest entry before an LU factorisation with partial
/// pivoting; the removed scales are accumulated in the log magnitude.
pub fn log_det<F>(n: usize, mut entry: F) -> LogDet
where
    F: FnMut(usize, usize) -> Vec<LogTerm>,
{
    if n == 0 {
        return LogDet { sign: 1.0, log_abs: 0.0 };
    }
    let terms: Vec<Vec<LogTerm>> = (0..n * n).map(|k| entry(k / n, k % n)).collect();
    let Some(mut s) = equilibrate(n, &terms) else {
        return ZERO_DET;
    };
    let (sign, log_lu) = lu_log_det(&mut s.a, n);
    LogDet { sign, log_abs: s.log_acc + log_lu }
}

/// [`log_det`] for entries that carry an absolute error, passed as its
/// natural log next to the terms. Also returns the first-order relative error
/// of the determinant, `Σ_ij δ_ij |(M⁻¹)_ji|` plus LU rounding; infinite when
/// the equilibrated matrix cannot be inverted.
pub fn log_det_sensitivity<F>(n: usize, mut entry: F) -> (LogDet, f64)
where
    F: FnMut(usize, usize) -> (Vec<LogTerm>, f64),
{
    if n == 0 {
        return (LogDet { sign: 1.0, log_abs: 0.0 }, 0.0);
    }
    let (terms, log_err): (Vec<_>, Vec<_>) = (0..n * n).map(|k| entry(k / n, k % n)).unzip();
    let Some(mut s) = equilibrate(n, &terms) else {
        return (ZERO_DET, f64::INFINITY);
    };
    let rel = match nalgebra::DMatrix::from_row_slice(n, n, &s.a).try_inverse() {
        Some(inv) => {
            let mut rel = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let delta = (log_err[i * n + j] - s.row_max[i]).exp() / s.col_max[j];
                    let lu = n as f64 * f64::EPSILON * s.a[i * n + j].abs();
                    rel += (delta + lu) * inv[(j, i)].abs();
                }
            }
            rel
        }
        None => f64::INFINITY,
    };
    let (sign, log_lu) = lu_log_det(&mut s.a, n);
    (LogDet { sign, log_abs: s.log_acc + log_lu }, rel)
}

fn lu_log_det(a: &mut [f64], n: usize) -> (f64, f64) {
    let mut sign = 1.0;
    let mut log_abs = 0.0;
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, a[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            sign = -sign;
        }
        let d = a[k * n + k];
        if d < 0.0 {
            sign = -sign;
        }
        log_abs += d.abs().ln();
        for i in k + 1..n {
            let f = a[i * n + k] / d;
            if f != 0.0 {
                for j in k + 1..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
    }
    (sign, log_abs)
}
