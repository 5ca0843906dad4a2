//! Oracle data and statistical helpers shared by the integration targets.
#![allow(dead_code)]

use dsmimo::numeric::GaussLegendre;
use dsmimo::{Complex64, DMatrix};

/// `(n, q, x, ₂F₀(n, q; −x))` from `oracles/hyp2f0_grid.py`.
#[rustfmt::skip]
pub const HYP2F0_GRID: [(usize, usize, f64, f64); 50] = [
    (1, 1, 1.0, 5.9634736232319407e-1),
    (2, 1, 1.0, 4.0365263767680593e-1),
    (20, 20, 1000.0, 2.3659436438763585e-77),
    (1, 20, 0.001, 9.8041096754380377e-1),
    (20, 1, 1000.0, 5.2628655142748109e-5),
    (20, 11, 0.035735, 4.5176707297246134e-3),
    (5, 12, 20.392, 4.9123140817842807e-12),
    (12, 11, 0.00126719, 8.480726308098668e-1),
    (10, 20, 0.00556648, 3.5740479193933354e-1),
    (2, 14, 0.140851, 1.2420370918015422e-1),
    (10, 20, 0.00319961, 5.4305404804325864e-1),
    (4, 1, 0.0165131, 9.3891617172175692e-1),
    (1, 8, 0.0629692, 6.73958393857305e-1),
    (14, 13, 0.0182243, 6.6483417225365259e-2),
    (15, 20, 12.8863, 3.3370243952594934e-33),
    (12, 14, 410.262, 6.8688234251082106e-42),
    (8, 2, 468.222, 1.0851160841275213e-7),
    (19, 9, 0.166809, 1.047778224280506e-5),
    (13, 8, 100.857, 4.5883426426809638e-24),
    (18, 5, 408.22, 1.1867352602231932e-19),
    (2, 13, 0.00151853, 9.6174014826682067e-1),
    (17, 13, 0.147251, 1.2151559619369199e-6),
    (14, 15, 0.0970393, 3.2516556031143232e-5),
    (2, 4, 2.4415, 1.6904028334054705e-2),
    (6, 2, 61.0679, 1.3262778747363585e-5),
    (10, 11, 16.353, 8.2196515156838257e-20),
    (17, 1, 0.101533, 3.7544064502066549e-1),
    (18, 1, 501.869, 1.1719433722045014e-4),
    (8, 12, 0.171289, 4.8347955607180979e-4),
    (17, 14, 15.3825, 1.5539153483114355e-30),
    (18, 5, 312.398, 4.5201005495570751e-19),
    (3, 9, 167.892, 6.2664345603392975e-10),
    (9, 1, 5.57327, 2.1870186558026483e-2),
    (15, 9, 5.39045, 2.6132856215793133e-16),
    (20, 5, 0.00330973, 7.2787492550844754e-1),
    (11, 12, 0.429942, 1.3025369098398791e-7),
    (13, 2, 0.00293822, 9.2805833386026865e-1),
    (8, 6, 0.909038, 2.9631524254530628e-5),
    (20, 14, 0.0129971, 4.843298832337392e-2),
    (10, 20, 0.00222196, 6.5057382950465203e-1),
    (18, 2, 17.1155, 1.2453076041560615e-5),
    (11, 3, 0.178418, 4.8536851597078317e-2),
    (14, 4, 461.468, 1.2838023372985561e-15),
    (10, 1, 0.14663, 4.195869015092361e-1),
    (7, 6, 0.0200077, 4.7501678551503736e-1),
    (5, 14, 42.2364, 4.74675427483465e-14),
    (20, 3, 0.120269, 2.9376591244170999e-2),
    (11, 14, 56.7857, 1.4787933522400945e-29),
    (9, 3, 5.39618, 1.7012260028837856e-5),
    (2, 14, 2.73648, 8.0211476165687056e-4),
];

pub fn lsq_slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn log_grid() -> Vec<f64> {
    (0..=20).map(|i| 10f64.powf(3.0 + 0.1 * i as f64)).collect()
}

pub fn lambda_max_2x2(w: &DMatrix<Complex64>) -> f64 {
    let (a, d, b) = (w[(0, 0)].re, w[(1, 1)].re, w[(0, 1)]);
    0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt()
}

/// CDF of the larger eigenvalue from a 2-eigenvalue joint density, tabulated
/// on `[0, t_max]` by nested Gauss–Legendre panels.
pub struct MaxEigenCdf {
    step: f64,
    table: Vec<f64>,
}

impl MaxEigenCdf {
    pub fn new(pdf: impl Fn(f64, f64) -> f64, t_max: f64, panels: usize) -> Self {
        let rule = GaussLegendre::new(12);
        let inner = GaussLegendre::new(24);
        let marginal = |l1: f64| inner.integrate(0.0, l1, |l2| if l2 < l1 { pdf(l1, l2) } else { 0.0 });
        let step = t_max / panels as f64;
        let mut table = vec![0.0];
        for p in 0..panels {
            let (a, b) = (p as f64 * step, (p + 1) as f64 * step);
            let next = table[p] + rule.integrate(a, b, &marginal);
            table.push(next);
        }
        Self { step, table }
    }

    pub fn at(&self, t: f64) -> f64 {
        let x = t / self.step;
        let i = x.floor() as usize;
        if i + 1 >= self.table.len() {
            return *self.table.last().unwrap();
        }
        let f = x - i as f64;
        self.table[i] * (1.0 - f) + self.table[i + 1] * f
    }
}

/// `√N · sup |F_N − F|`.
pub fn ks_statistic(mut samples: Vec<f64>, cdf: &MaxEigenCdf) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf.at(x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    d * n.sqrt()
}

/// Kolmogorov critical value at significance 1e-3: `√(−ln(α/2)/2)`.
pub const KS_CRITICAL: f64 = 1.949_5;

