use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;
use serde::Serialize;

use crate::numeric::{student_t_two_sided, Accumulator};
use crate::{Error, Result};

/// Ranks starting at 1; tied values share the average of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn centered(values: &[f64]) -> (Vec<f64>, f64) {
    let mean = values.iter().copied().collect::<Accumulator>().value() / values.len() as f64;
    let c: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let ss = c.iter().map(|v| v * v).collect::<Accumulator>().value();
    (c, ss)
}

fn pearson_centered(a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)) -> Option<f64> {
    if a.1 <= 0.0 || b.1 <= 0.0 {
        return None;
    }
    let cross = a.0.iter().zip(&b.0).map(|(x, y)| x * y).collect::<Accumulator>().value();
    Some((cross / sqrt(a.1 * b.1)).clamp(-1.0, 1.0))
}

fn t_approximation(rho: f64, n: usize) -> f64 {
    let df = n as f64 - 2.0;
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    student_t_two_sided(rho * sqrt(df / (1.0 - rho * rho)), df)
}

/// Spearman's ρ and its two-sided p-value; `None` if either input is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<Option<(f64, f64)>> {
    let m = spearman_matrix(&[("a", a), ("b", b)])?;
    Ok(m.rho[0][1].zip(m.p[0][1]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub n: usize,
    /// `None` where a constant column makes ρ undefined.
    pub rho: Vec<Vec<Option<f64>>>,
    pub p: Vec<Vec<Option<f64>>>,
    /// Names of constant columns.
    pub constant: Vec<String>,
}

impl CorrelationMatrix {
    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        self.rho[self.index(a)?][self.index(b)?]
    }

    pub fn p_value(&self, a: &str, b: &str) -> Option<f64> {
        self.p[self.index(a)?][self.index(b)?]
    }
}

/// Pairwise Spearman correlations over complete, aligned columns.
pub fn spearman_matrix(columns: &[(&str, &[f64])]) -> Result<CorrelationMatrix> {
    if columns.len() < 2 {
        return Err(Error::InvalidArgument("spearman_matrix needs at least two columns".into()));
    }
    let n = columns[0].1.len();
    if let Some((name, c)) = columns.iter().find(|(_, c)| c.len() != n) {
        return Err(Error::InvalidArgument(format!("column {name} has {} rows, expected {n}", c.len())));
    }
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: n });
    }
    if columns.iter().any(|(_, c)| c.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidArgument("columns must be finite and complete".into()));
    }
    let ranked: Vec<(Vec<f64>, f64)> = columns.iter().map(|(_, c)| centered(&average_ranks(c))).collect();
    let k = columns.len();
    let mut rho = vec![vec![None; k]; k];
    let mut p = vec![vec![None; k]; k];
    for i in 0..k {
        if ranked[i].1 > 0.0 {
            rho[i][i] = Some(1.0);
            p[i][i] = Some(0.0);
        }
        for j in 0..i {
            if let Some(r) = pearson_centered(&ranked[i], &ranked[j]) {
                let pv = t_approximation(r, n);
                rho[i][j] = Some(r);
                rho[j][i] = Some(r);
                p[i][j] = Some(pv);
                p[j][i] = Some(pv);
            }
        }
    }
    Ok(CorrelationMatrix {
        names: columns.iter().map(|(name, _)| String::from(*name)).collect(),
        n,
        rho,
        p,
        constant: columns
            .iter()
            .zip(&ranked)
            .filter(|(_, r)| r.1 <= 0.0)
            .map(|((name, _), _)| String::from(*name))
            .collect(),
    })
}
