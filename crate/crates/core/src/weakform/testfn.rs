use crate::error::{Error, Result};

/// Degree of the temporal bump.
pub const TEMPORAL_DEGREE: u32 = 9;

/// Samples of a compactly supported bump `(1 - (x/(m h))²)^p` and its
/// derivatives on the `2m + 1` points `x = -m h, …, m h`.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisTestFunction {
    half_width: usize,
    degree: u32,
    spacing: f64,
    /// `samples[k][i]` is the k-th derivative at `x = (i - m) h`.
    samples: Vec<Vec<f64>>,
}

impl AxisTestFunction {
    pub fn new(half_width: usize, degree: u32, spacing: f64, max_order: u32) -> Result<Self> {
        if half_width == 0 {
            return Err(Error::InvalidTestFunction("half-width must be at least 1".into()));
        }
        if degree <= max_order {
            return Err(Error::InvalidTestFunction(format!(
                "degree {degree} must exceed the highest derivative order {max_order}"
            )));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidTestFunction(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        let m = half_width as f64;
        let radius = m * spacing;
        let samples = (0..=max_order)
            .map(|k| {
                let scale = radius.powi(-(k as i32));
                (0..=2 * half_width)
                    .map(|i| {
                        let s = (i as f64 - m) / m;
                        scale * bump_derivative(degree, k, s)
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            half_width,
            degree,
            spacing,
            samples,
        })
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn support_len(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn max_order(&self) -> u32 {
        self.samples.len() as u32 - 1
    }

    /// Samples of the `order`-th derivative, index 0 at `x = -m h`.
    pub fn derivative(&self, order: u32) -> &[f64] {
        &self.samples[order as usize]
    }

    /// Evaluates the `order`-th derivative at an arbitrary point.
    pub fn eval(&self, order: u32, x: f64) -> f64 {
        let radius = self.half_width as f64 * self.spacing;
        let s = x / radius;
        if s.abs() > 1.0 {
            return 0.0;
        }
        radius.powi(-(order as i32)) * bump_derivative(self.degree, order, s)
    }
}

/// The `k`-th derivative of `P(s) = (1 - s²)^p` on `[-1, 1]`, zero outside.
///
/// Uses the factorisation `(1 - s)^p (1 + s)^p` and Leibniz' rule so that
/// every term carries a factor `(1 ∓ s)^{p - i}`; the endpoint values are then
/// exactly zero for `k < p`.
pub fn bump_derivative(p: u32, k: u32, s: f64) -> f64 {
    if s.abs() > 1.0 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..=k {
        let j = k - i;
        if i > p || j > p {
            continue;
        }
        let left = falling(p, i) * (1.0 - s).powi((p - i) as i32);
        let left = if i % 2 == 1 { -left } else { left };
        let right = falling(p, j) * (1.0 + s).powi((p - j) as i32);
        total += binomial(k, i) * left * right;
    }
    total
}

fn falling(p: u32, i: u32) -> f64 {
    (0..i).map(|r| (p - r) as f64).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, r| acc * (n - r) as f64 / (r + 1) as f64)
}

/// Spatial bump `(1 - (x/(m Δx))²)^p` with derivatives up to `max_order`.
pub fn make_axis_test_function(
    half_width: usize,
    degree: u32,
    spacing: f64,
    max_order: u32,
) -> Result<AxisTestFunction> {
    AxisTestFunction::new(half_width, degree, spacing, max_order)
}

/// Temporal bump spanning exactly `k_mem` samples, degree 9.
pub fn make_temporal_test_function(k_mem: usize, dt: f64, lhs_order: u32) -> Result<AxisTestFunction> {
    if k_mem % 2 == 0 {
        return Err(Error::InvalidTestFunction(format!(
            "K_mem must be odd so the query time is centred, got {k_mem}"
        )));
    }
    if k_mem < 5 {
        return Err(Error::InvalidTestFunction(format!("K_mem must be at least 5, got {k_mem}")));
    }
    if !(1..=2).contains(&lhs_order) {
        return Err(Error::InvalidTestFunction(format!(
            "left-hand side order must be 1 or 2, got {lhs_order}"
        )));
    }
    AxisTestFunction::new((k_mem - 1) / 2, TEMPORAL_DEGREE, dt, lhs_order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_spatial_bump() {
        let dx = std::f64::consts::FRAC_PI_8;
        let tf = make_axis_test_function(21, 11, dx, 4).unwrap();
        assert_eq!(tf.support_len(), 43);
        assert_eq!(tf.derivative(0)[21], 1.0);
        assert_eq!(tf.derivative(0)[0], 0.0);
        assert_eq!(tf.derivative(0)[42], 0.0);
        for k in 0..=4 {
            assert_eq!(tf.derivative(k)[0], 0.0, "order {k}");
            assert_eq!(tf.derivative(k)[42], 0.0, "order {k}");
        }
    }

    #[test]
    fn small_bump_samples() {
        let tf = make_axis_test_function(1, 2, 1.0, 1).unwrap();
        assert_eq!(tf.derivative(0), &[0.0, 1.0, 0.0]);
        assert_eq!(tf.derivative(1), &[0.0, 0.0, 0.0]);
        let tf = make_axis_test_function(2, 2, 0.5, 0).unwrap();
        assert!((tf.derivative(0)[3] - 0.5625).abs() < 1e-15);
    }

    #[test]
    fn rejects_low_degree() {
        assert!(make_axis_test_function(5, 4, 1.0, 4).is_err());
        assert!(make_axis_test_function(0, 6, 1.0, 4).is_err());
        assert!(make_axis_test_function(3, 6, 0.0, 4).is_err());
    }

    #[test]
    fn temporal_bump() {
        let tf = make_temporal_test_function(5, 1.0, 1).unwrap();
        assert_eq!(tf.derivative(0)[2], 1.0);
        assert_eq!(tf.derivative(0)[0], 0.0);
        assert_eq!(tf.derivative(0)[4], 0.0);
        assert_eq!(tf.derivative(1)[0], 0.0);
        assert_eq!(tf.derivative(1)[4], 0.0);
        // 0.75^9 evaluated exactly as 3^9 / 4^9 = 19683 / 262144
        let tf = make_temporal_test_function(9, 0.5, 2).unwrap();
        let expected = 19683.0 / 262144.0;
        assert!((tf.derivative(0)[6] - expected).abs() < 1e-16);
        assert!((expected - 0.0750847).abs() < 1e-7);
        assert!(make_temporal_test_function(6, 1.0, 1).is_err());
        assert!(make_temporal_test_function(3, 1.0, 1).is_err());
        assert!(make_temporal_test_function(7, 1.0, 3).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        // central differences of the closed form as an independent check
        let tf = AxisTestFunction::new(10, 11, 0.2, 4).unwrap();
        let h = 1e-4;
        for order in 1..=4u32 {
            for &x in &[-1.3, -0.4, 0.0, 0.77, 1.9] {
                let fd = (tf.eval(order - 1, x + h) - tf.eval(order - 1, x - h)) / (2.0 * h);
                let exact = tf.eval(order, x);
                assert!(
                    (fd - exact).abs() <= 1e-5 * exact.abs().max(1.0),
                    "order {order} at {x}: {fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn parity() {
        let tf = AxisTestFunction::new(7, 6, 1.0, 4).unwrap();
        for k in 0..=4u32 {
            let d = tf.derivative(k);
            for i in 0..d.len() {
                let mirrored = d[d.len() - 1 - i];
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                assert!((d[i] - sign * mirrored).abs() < 1e-12 * d[i].abs().max(1.0));
            }
        }
    }
}
