use crate::field::ScalarField;
use crate::scalar::Real;

/// Step distribution function `τ ↦ |{|f| > τ}|` of a sampled field.
///
/// `levels` holds the distinct positive values of `|f|` in increasing order.
/// Between consecutive levels the distribution is constant, so every Lorentz
/// quasi-norm reduces to a finite sum over plateaus.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionProfile<T> {
    levels: Vec<T>,
    tail_counts: Vec<usize>,
    support_count: usize,
    total_count: usize,
    cell_volume: T,
}

impl<T: Real> DistributionProfile<T> {
    pub fn from_field(f: &ScalarField<T>) -> Self {
        let mut mags: Vec<T> = f.values().iter().map(|v| v.abs()).collect();
        mags.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        let total_count = mags.len();
        let first_positive = mags.partition_point(|v| v.is_zero());
        let support_count = total_count - first_positive;

        let mut levels = Vec::new();
        let mut tail_counts = Vec::new();
        let mut i = first_positive;
        while i < total_count {
            let v = mags[i];
            let mut j = i + 1;
            while j < total_count && mags[j] == v {
                j += 1;
            }
            levels.push(v);
            tail_counts.push(total_count - j);
            i = j;
        }
        DistributionProfile {
            levels,
            tail_counts,
            support_count,
            total_count,
            cell_volume: T::lit(f.grid().cell_volume()),
        }
    }

    pub fn levels(&self) -> &[T] {
        &self.levels
    }

    /// `|{|f| > levels[i]}|` for each level; strictly decreasing, ending at 0.
    pub fn tail_measure(&self) -> Vec<T> {
        self.tail_counts.iter().map(|&c| self.measure(c)).collect()
    }

    pub fn tail_counts(&self) -> &[usize] {
        &self.tail_counts
    }

    pub fn total_measure(&self) -> T {
        self.measure(self.total_count)
    }

    /// `|{f ≠ 0}|`.
    pub fn support_measure(&self) -> T {
        self.measure(self.support_count)
    }

    pub fn cell_volume(&self) -> T {
        self.cell_volume
    }

    pub fn is_zero(&self) -> bool {
        self.levels.is_empty()
    }

    fn measure(&self, count: usize) -> T {
        T::from_usize_lossy(count) * self.cell_volume
    }

    /// `λ(τ) = |{|f| > τ}|` for `τ ≥ 0`.
    pub fn measure_above(&self, tau: T) -> T {
        if tau < T::zero() {
            return self.total_measure();
        }
        let idx = self.levels.partition_point(|&l| l <= tau);
        let count = if idx == 0 { self.support_count } else { self.tail_counts[idx - 1] };
        self.measure(count)
    }

    /// Measure of `{|f| ≥ levels[i]}`, the constant value of `λ` just below
    /// `levels[i]`.
    fn measure_at_or_above(&self, i: usize) -> T {
        let count = if i == 0 { self.support_count } else { self.tail_counts[i - 1] };
        self.measure(count)
    }

    /// `(p ∫₀^∞ τ^q λ(τ)^{q/p} dτ/τ)^{1/q}` evaluated plateau by plateau.
    ///
    /// Summation by parts turns the plateau sum into
    /// `Σ levels[i]^q (w_i − w_{i+1})` with `w_i = λ_i^{q/p}` decreasing, so
    /// every term is non-negative.
    pub fn lorentz(&self, p: T, q: T) -> T {
        let k = self.levels.len();
        let ratio = q / p;
        let mut sum = T::zero();
        for i in 0..k {
            let w_i = self.measure_at_or_above(i).powf(ratio);
            let w_next = if i + 1 < k { self.measure_at_or_above(i + 1).powf(ratio) } else { T::zero() };
            sum += self.levels[i].powf(q) * (w_i - w_next);
        }
        (p / q * sum).powf(T::one() / q)
    }

    /// `sup_τ τ λ(τ)^{1/p}`; the supremum is approached from below each level.
    pub fn weak(&self, p: T) -> T {
        let inv = T::one() / p;
        (0..self.levels.len()).fold(T::zero(), |m, i| m.max(self.levels[i] * self.measure_at_or_above(i).powf(inv)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Domain, Grid3};

    fn unit_grid() -> Grid3 {
        Grid3::new(8, 1.0, Domain::Torus).unwrap()
    }

    #[test]
    fn constant_profile() {
        let g = unit_grid();
        let d = DistributionProfile::from_field(&ScalarField::constant(g, 3.0f64));
        assert_eq!(d.levels(), &[3.0]);
        assert_eq!(d.tail_measure(), vec![0.0]);
        assert_eq!(d.measure_above(2.9), 1.0);
        assert_eq!(d.measure_above(3.0), 0.0);
    }

    #[test]
    fn half_indicator_profile() {
        let g = unit_grid();
        let f = ScalarField::from_fn(g, |x, _, _| if x < 0.5 { 1.0 } else { 0.0 });
        let d = DistributionProfile::<f64>::from_field(&f);
        assert_eq!(d.levels(), &[1.0]);
        assert_eq!(d.measure_above(0.0), 0.5);
        assert_eq!(d.measure_above(0.99), 0.5);
        assert_eq!(d.measure_above(1.0), 0.0);
    }

    #[test]
    fn two_valued_profile() {
        // 1 on a quarter of the cells, 2 elsewhere; enumerate cells directly.
        let g = unit_grid();
        let f = ScalarField::from_fn(g, |x, y, _| if x < 0.5 && y < 0.5 { 1.0 } else { 2.0 });
        let d = DistributionProfile::<f64>::from_field(&f);
        let count_above = |t: f64| f.values().iter().filter(|v| v.abs() > t).count() as f64 / 512.0;
        for t in [0.0, 0.5, 0.999, 1.0, 1.5, 1.999, 2.0, 3.0] {
            assert_eq!(d.measure_above(t), count_above(t), "tau = {t}");
        }
        assert_eq!(d.measure_above(0.5), 1.0);
        assert_eq!(d.measure_above(1.5), 0.75);
        assert_eq!(d.measure_above(2.0), 0.0);
        assert_eq!(d.tail_measure(), vec![0.75, 0.0]);
    }

    #[test]
    fn zero_field() {
        let d = DistributionProfile::<f64>::from_field(&ScalarField::zeros(unit_grid()));
        assert!(d.is_zero());
        assert_eq!(d.lorentz(2.0, 3.0), 0.0);
        assert_eq!(d.weak(2.0), 0.0);
    }
}
