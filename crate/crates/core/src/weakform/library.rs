use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::tensor::MultiIndex;

pub const MAX_DERIVATIVE: u32 = 4;
pub const MAX_POWER: u32 = 4;

const AXIS_NAMES: [&str; 3] = ["x", "y", "z"];

/// Left-hand side time derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Lhs {
    Dt,
    Dtt,
}

impl Lhs {
    pub fn order(self) -> u32 {
        match self {
            Lhs::Dt => 1,
            Lhs::Dtt => 2,
        }
    }

    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            1 => Ok(Lhs::Dt),
            2 => Ok(Lhs::Dtt),
            o => Err(Error::Config(format!("left-hand side order must be 1 or 2, got {o}"))),
        }
    }
}

impl fmt::Display for Lhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lhs::Dt => write!(f, "lhs: dt"),
            Lhs::Dtt => write!(f, "lhs: dtt"),
        }
    }
}

/// One library column: a spatial derivative applied to `u^power`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Feature {
    pub op: MultiIndex,
    pub power: u32,
}

impl Feature {
    pub fn new(op: MultiIndex, power: u32) -> Self {
        Self { op, power }
    }

    /// Differentiated axis and order, `None` for the identity operator.
    pub fn derivative(&self) -> Option<(usize, u32)> {
        self.op.active_axis()
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (axis, order) = self.derivative().unwrap_or((0, 0));
        write!(f, "d^{}_{} u^{}", order, AXIS_NAMES[axis], self.power)
    }
}

/// Ordered candidate terms plus the left-hand side operator.
///
/// Column order: the constant, then for each power `j = 1..=4` the identity
/// followed by `∂^k` along x₁ (k = 1..4), then x₂, then x₃.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureLibrary {
    dim: usize,
    features: Vec<Feature>,
    lhs: Lhs,
}

impl FeatureLibrary {
    pub fn new(dim: usize, features: Vec<Feature>, lhs: Lhs) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Dimension(format!("library dimension must be 1..=3, got {dim}")));
        }
        for ft in &features {
            if ft.op.dim() != dim {
                return Err(Error::Dimension(format!("feature {ft} has dimension {}", ft.op.dim())));
            }
            if ft.op.temporal() != 0 {
                return Err(Error::Dimension(format!("feature {ft} has a time derivative")));
            }
            if ft.derivative().is_some_and(|(_, o)| o > MAX_DERIVATIVE) || ft.power > MAX_POWER {
                return Err(Error::Dimension(format!("feature {ft} exceeds order/power limits")));
            }
        }
        Ok(Self { dim, features, lhs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lhs(&self) -> Lhs {
        self.lhs
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn index_of(&self, feature: &Feature) -> Option<usize> {
        self.features.iter().position(|f| f == feature)
    }

    /// Column of `∂^order_axis u^power` (identity when `order == 0`).
    pub fn column(&self, axis: usize, order: u32, power: u32) -> Option<usize> {
        let op = if order == 0 {
            MultiIndex::identity(self.dim)
        } else {
            MultiIndex::along(self.dim, axis, order).ok()?
        };
        self.index_of(&Feature::new(op, power))
    }

    /// Number of distinct differential operators (identity plus four orders per axis).
    pub fn operator_count(&self) -> usize {
        1 + MAX_DERIVATIVE as usize * self.dim
    }

    /// Number of distinct nonlinearities, `u^0 … u^4`.
    pub fn nonlinearity_count(&self) -> usize {
        MAX_POWER as usize + 1
    }

    pub fn labels(&self) -> Vec<String> {
        self.features.iter().map(|f| f.to_string()).collect()
    }

    /// One feature per line, then the `lhs:` line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for f in &self.features {
            s.push_str(&f.to_string());
            s.push('\n');
        }
        s.push_str(&self.lhs.to_string());
        s.push('\n');
        s
    }

    pub fn from_text(dim: usize, text: &str) -> Result<Self> {
        let mut features = Vec::new();
        let mut lhs = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix("lhs:") {
                lhs = Some(match rest.trim() {
                    "dt" => Lhs::Dt,
                    "dtt" => Lhs::Dtt,
                    other => return Err(Error::Config(format!("unknown lhs `{other}`"))),
                });
            } else {
                features.push(parse_feature(dim, line)?);
            }
        }
        let lhs = lhs.ok_or_else(|| Error::Config("library text has no lhs line".into()))?;
        Self::new(dim, features, lhs)
    }
}

fn parse_feature(dim: usize, line: &str) -> Result<Feature> {
    let bad = || Error::Config(format!("malformed library line `{line}`"));
    let (op, pow) = line.split_once(' ').ok_or_else(bad)?;
    let (order, axis) = op.strip_prefix("d^").ok_or_else(bad)?.split_once('_').ok_or_else(bad)?;
    let order = u32::from_str(order).map_err(|_| bad())?;
    let axis = AXIS_NAMES.iter().position(|&a| a == axis).ok_or_else(bad)?;
    let power = u32::from_str(pow.trim().strip_prefix("u^").ok_or_else(bad)?).map_err(|_| bad())?;
    let op = if order == 0 {
        MultiIndex::identity(dim)
    } else {
        MultiIndex::along(dim, axis, order)?
    };
    Ok(Feature::new(op, power))
}

/// The standard library: derivatives up to order 4 (no mixed terms) of `u^0 … u^4`.
pub fn build_library(dim: usize, lhs: Lhs) -> Result<FeatureLibrary> {
    if !(1..=3).contains(&dim) {
        return Err(Error::Dimension(format!("library dimension must be 1..=3, got {dim}")));
    }
    let mut features = vec![Feature::new(MultiIndex::identity(dim), 0)];
    for power in 1..=MAX_POWER {
        features.push(Feature::new(MultiIndex::identity(dim), power));
        for axis in 0..dim {
            for order in 1..=MAX_DERIVATIVE {
                features.push(Feature::new(MultiIndex::along(dim, axis, order)?, power));
            }
        }
    }
    FeatureLibrary::new(dim, features, lhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_counts() {
        assert_eq!(build_library(1, Lhs::Dt).unwrap().len(), 21);
        assert_eq!(build_library(2, Lhs::Dtt).unwrap().len(), 37);
        assert_eq!(build_library(3, Lhs::Dtt).unwrap().len(), 53);
        assert!(build_library(0, Lhs::Dt).is_err());
        assert!(build_library(4, Lhs::Dt).is_err());
    }

    #[test]
    fn ordering() {
        let lib = build_library(2, Lhs::Dtt).unwrap();
        let labels = lib.labels();
        assert_eq!(labels[0], "d^0_x u^0");
        assert_eq!(labels[1], "d^0_x u^1");
        assert_eq!(labels[2], "d^1_x u^1");
        assert_eq!(labels[5], "d^4_x u^1");
        assert_eq!(labels[6], "d^1_y u^1");
        assert_eq!(labels[10], "d^0_x u^2");
        assert_eq!(lib.column(1, 2, 1), Some(7));
        assert_eq!(lib.column(0, 0, 3), Some(19));
        assert_eq!(lib.column(0, 1, 0), None);
    }

    #[test]
    fn no_mixed_and_limits() {
        for d in 1..=3 {
            let lib = build_library(d, Lhs::Dt).unwrap();
            for f in lib.features() {
                assert!(f.op.spatial().iter().filter(|&&o| o > 0).count() <= 1);
                assert!(f.op.total_order() <= MAX_DERIVATIVE);
                assert!(f.power <= MAX_POWER);
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let lib = build_library(3, Lhs::Dtt).unwrap();
        let text = lib.to_text();
        assert!(text.ends_with("lhs: dtt\n"));
        assert!(text.contains("d^4_z u^4\n"));
        assert_eq!(FeatureLibrary::from_text(3, &text).unwrap(), lib);
        assert!(FeatureLibrary::from_text(1, "d^1_x u^1\n").is_err());
        assert!(FeatureLibrary::from_text(1, "d^1_q u^1\nlhs: dt").is_err());
    }
}
