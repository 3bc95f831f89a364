//! Scalar numerics shared by the fitting modules: compensated summation,
//! normal/chi-squared/Student-t tail probabilities and fixed-order
//! Gauss-Legendre quadrature.

use libm::{erfc, exp, fabs, lgamma, log};

/// Neumaier-compensated accumulator. Summation order is the caller's
/// iteration order, so results are reproducible bit for bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    compensation: f64,
}

impl Accumulator {
    pub const fn new() -> Self {
        Self { sum: 0.0, compensation: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if fabs(self.sum) >= fabs(value) {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl core::iter::FromIterator<f64> for Accumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Accumulator::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<Accumulator>().value()
}

pub fn mean(values: &[f64]) -> f64 {
    sum(values.iter().copied()) / values.len() as f64
}

/// Two-pass variance with divisor `n - ddof`.
pub fn variance(values: &[f64], ddof: usize) -> f64 {
    let m = mean(values);
    sum(values.iter().map(|v| (v - m) * (v - m))) / (values.len() - ddof) as f64
}

/// Standard normal CDF.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / core::f64::consts::SQRT_2)
}

/// Standard normal upper tail, accurate far into the tail.
pub fn norm_sf(z: f64) -> f64 {
    0.5 * erfc(z / core::f64::consts::SQRT_2)
}

/// Two-sided p-value of a standard normal statistic.
pub fn norm_two_sided(z: f64) -> f64 {
    erfc(fabs(z) / core::f64::consts::SQRT_2).min(1.0)
}

const EPS: f64 = 1e-15;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

/// Regularized upper incomplete gamma function Q(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0);
    if x <= 0.0 {
        return 1.0;
    }
    let log_prefactor = -x + a * log(x) - lgamma(a);
    if x < a + 1.0 {
        // series for P
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut total = del;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            del *= x / ap;
            total += del;
            if fabs(del) < fabs(total) * EPS {
                break;
            }
        }
        (1.0 - total * exp(log_prefactor)).max(0.0)
    } else {
        // Lentz continued fraction for Q
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if fabs(d) < TINY {
                d = TINY;
            }
            c = b + an / c;
            if fabs(c) < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if fabs(del - 1.0) < EPS {
                break;
            }
        }
        (exp(log_prefactor) * h).clamp(0.0, 1.0)
    }
}

/// Upper tail of the chi-squared distribution.
pub fn chi2_sf(x: f64, df: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    gamma_q(0.5 * df, 0.5 * x)
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if fabs(del - 1.0) < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function I_x(a, b).
pub fn beta_inc(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let log_front = lgamma(a + b) - lgamma(a) - lgamma(b) + a * log(x) + b * libm::log1p(-x);
    if x < (a + 1.0) / (a + b + 2.0) {
        exp(log_front) * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - exp(log_front) * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// Two-sided p-value of a Student-t statistic with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    beta_inc(0.5 * df, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// Ten-point Gauss-Legendre rule on `[lo, hi]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> f64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut acc = Accumulator::new();
    for (node, weight) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        acc.add(weight * (f(mid - half * node) + f(mid + half * node)));
    }
    acc.value() * half
}

/// Composite ten-point Gauss-Legendre over panels no wider than `max_width`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, max_width: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let panels = libm::ceil((hi - lo) / max_width).max(1.0) as usize;
    let width = (hi - lo) / panels as f64;
    let mut acc = Accumulator::new();
    for i in 0..panels {
        let a = lo + width * i as f64;
        let b = if i + 1 == panels { hi } else { a + width };
        acc.add(gauss_legendre(f, a, b));
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use libm::sqrt;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = Accumulator::new();
        acc.add(1e16);
        for _ in 0..1000 {
            acc.add(1.0);
        }
        acc.add(-1e16);
        assert_eq!(acc.value(), 1000.0);
    }

    #[test]
    fn chi2_tail_matches_closed_forms() {
        // df = 2: survival is exp(-x/2)
        for &x in &[0.1, 1.0, 5.0, 30.0] {
            assert_abs_diff_eq!(chi2_sf(x, 2.0), exp(-x / 2.0), epsilon = 1e-13);
        }
        // df = 1: survival is erfc(sqrt(x/2))
        for &x in &[0.01, 0.5, 3.84, 20.0] {
            assert_abs_diff_eq!(chi2_sf(x, 1.0), erfc(sqrt(x / 2.0)), epsilon = 1e-12);
        }
        assert_eq!(chi2_sf(0.0, 3.0), 1.0);
        assert_eq!(chi2_sf(f64::INFINITY, 3.0), 0.0);
    }

    #[test]
    fn student_t_reference_values() {
        // df = 1 is Cauchy: two-sided p = 1 - 2 atan(t) / pi
        for &t in &[0.3, 1.0, 4.0] {
            let expected = 1.0 - 2.0 * libm::atan(t) / core::f64::consts::PI;
            assert_abs_diff_eq!(student_t_two_sided(t, 1.0), expected, epsilon = 1e-12);
        }
        // large df approaches the normal
        assert_abs_diff_eq!(student_t_two_sided(1.96, 1e7), norm_two_sided(1.96), epsilon = 1e-6);
        assert_abs_diff_eq!(student_t_two_sided(2.228_138_851_986_273_7, 10.0), 0.05, epsilon = 1e-9);
    }

    #[test]
    fn quadrature_is_exact_for_polynomials() {
        let f = |x: f64| x * x * x - 2.0 * x + 1.0;
        assert_abs_diff_eq!(integrate(&f, 0.0, 2.0, 0.3), 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(integrate(&|x: f64| exp(-x), 0.0, 40.0, 0.25), 1.0 - exp(-40.0), epsilon = 1e-13);
    }
}
