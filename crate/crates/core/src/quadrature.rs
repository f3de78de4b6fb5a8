//! Adaptive Gauss-Kronrod integration with square-root endpoint substitution
//! and a rational map for semi-infinite ranges.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err_estimate: f64,
    pub subdivisions: usize,
}

/// Integration request. `upper` may be `f64::INFINITY`.
///
/// A flagged endpoint may carry an integrable singularity no worse than
/// `|x - endpoint|^{-1/2}`; it is removed by `x = endpoint ± t²` before the
/// adaptive rule runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub lower: f64,
    pub upper: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub singular_lower: bool,
    pub singular_upper: bool,
    pub max_subdivisions: usize,
}

pub const DEFAULT_ABS_TOL: f64 = 1e-13;
pub const DEFAULT_REL_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 10_000;

impl QuadSpec {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            abs_tol: DEFAULT_ABS_TOL,
            rel_tol: DEFAULT_REL_TOL,
            singular_lower: false,
            singular_upper: false,
            max_subdivisions: DEFAULT_MAX_SUBDIVISIONS,
        }
    }

    pub fn semi_infinite(lower: f64) -> Self {
        Self::new(lower, f64::INFINITY)
    }

    pub fn singular_lower(mut self) -> Self {
        self.singular_lower = true;
        self
    }

    pub fn singular_upper(mut self) -> Self {
        self.singular_upper = true;
        self
    }

    pub fn tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.lower.is_finite() || self.upper.is_nan() || !(self.lower < self.upper) {
            return Err(Error::InvalidInput(format!(
                "integration range [{}, {}] must satisfy lower < upper with finite lower",
                self.lower, self.upper
            )));
        }
        if self.upper.is_infinite() && self.singular_upper {
            return Err(Error::InvalidInput(
                "singular flag is not meaningful at an infinite endpoint".into(),
            ));
        }
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerances must be positive, got abs {} rel {}",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidInput(
                "subdivision budget must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Integrate `f` over the range described by `spec`.
pub fn integrate<F>(f: F, spec: &QuadSpec) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    integrate_dyn(&f, spec)
}

fn integrate_dyn(f: &dyn Fn(f64) -> f64, spec: &QuadSpec) -> Result<QuadResult> {
    let (a, b) = (spec.lower, spec.upper);

    if b.is_infinite() {
        // x = a + t/(1-t), dx = dt/(1-t)²
        let mapped = |t: f64| {
            let s = 1.0 - t;
            f(a + t / s) / (s * s)
        };
        let inner = QuadSpec {
            lower: 0.0,
            upper: 1.0,
            ..*spec
        };
        return integrate_dyn(&mapped, &inner);
    }

    match (spec.singular_lower, spec.singular_upper) {
        (false, false) => adaptive(f, a, b, spec),
        (true, false) => {
            let g = |t: f64| 2.0 * t * f(a + t * t);
            adaptive(&g, 0.0, (b - a).sqrt(), spec)
        }
        (false, true) => {
            let g = |t: f64| 2.0 * t * f(b - t * t);
            adaptive(&g, 0.0, (b - a).sqrt(), spec)
        }
        (true, true) => {
            let mid = 0.5 * (a + b);
            let half = QuadSpec {
                abs_tol: 0.5 * spec.abs_tol,
                ..*spec
            };
            let left = integrate_dyn(
                f,
                &QuadSpec {
                    upper: mid,
                    singular_upper: false,
                    ..half
                },
            )?;
            let right = integrate_dyn(
                f,
                &QuadSpec {
                    lower: mid,
                    singular_lower: false,
                    ..half
                },
            )?;
            Ok(QuadResult {
                value: left.value + right.value,
                abs_err_estimate: left.abs_err_estimate + right.abs_err_estimate,
                subdivisions: left.subdivisions + right.subdivisions,
            })
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn check(x: f64, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { x, value: v })
    }
}

/// 15-point Kronrod rule with the embedded 7-point Gauss error estimate.
fn gk15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = check(center, f(center))?;
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let f1 = check(x1, f(x1))?;
        let f2 = check(x2, f(x2))?;
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = resk * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Segment { a, b, value, error })
}

fn adaptive<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    spec: &QuadSpec,
) -> Result<QuadResult> {
    let first = gk15(f, a, b)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 0usize;

    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                iterations: subdivisions,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in floating point.
            return Err(Error::NonConvergence {
                what: "adaptive quadrature (interval underflow)",
                iterations: subdivisions,
            });
        }
        let left = gk15(f, worst.a, mid)?;
        let right = gk15(f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;

        if subdivisions.is_multiple_of(64) {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }

    // Re-sum from the segments so bookkeeping drift never leaks into the result.
    let mut segments = heap.into_vec();
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = segments.iter().map(|s| s.value).sum();
    let abs_err_estimate = segments.iter().map(|s| s.error).sum();
    Ok(QuadResult {
        value,
        abs_err_estimate,
        subdivisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::quarter_beta_quarter;
    use proptest::prelude::*;

    #[test]
    fn polynomial() {
        let r = integrate(|x| x * x, &QuadSpec::new(0.0, 1.0)).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-15);
        assert!(r.abs_err_estimate <= 1e-13);
    }

    #[test]
    fn inverse_sqrt_upper() {
        let r = integrate(
            |x| 1.0 / (1.0 - x).sqrt(),
            &QuadSpec::new(0.0, 1.0).singular_upper(),
        )
        .unwrap();
        assert!((r.value - 2.0).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn inverse_sqrt_lower_and_both() {
        let r = integrate(
            |x| 1.0 / x.sqrt(),
            &QuadSpec::new(0.0, 4.0).singular_lower(),
        )
        .unwrap();
        assert!((r.value - 4.0).abs() < 1e-12);
        // ∫₀¹ dx / √(x(1-x)) = π
        let r = integrate(
            |x| 1.0 / (x * (1.0 - x)).sqrt(),
            &QuadSpec::new(0.0, 1.0).singular_lower().singular_upper(),
        )
        .unwrap();
        assert!((r.value - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn semi_infinite_matches_beta() {
        let r = integrate(
            |r| 1.0 / (1.0 + r.powi(4)).sqrt(),
            &QuadSpec::semi_infinite(0.0),
        )
        .unwrap();
        assert!(
            (r.value - quarter_beta_quarter()).abs() < 1e-11,
            "{}",
            r.value
        );
        assert!((r.value - 1.854_074_677_3).abs() < 1e-10);
    }

    #[test]
    fn nan_is_reported() {
        let err = integrate(
            |x| if x > 0.5 { f64::NAN } else { 1.0 },
            &QuadSpec::new(0.0, 1.0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let spec = QuadSpec {
            max_subdivisions: 3,
            ..QuadSpec::new(0.0, 1.0)
        };
        // Unflagged inverse-square-root singularity needs far more than three bisections.
        let err = integrate(|x| 1.0 / x.sqrt(), &spec).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn invalid_specs() {
        assert!(integrate(|x| x, &QuadSpec::new(1.0, 0.0)).is_err());
        assert!(integrate(|x| x, &QuadSpec::new(0.0, 1.0).tolerances(0.0, 1e-10)).is_err());
        assert!(integrate(|x| x, &QuadSpec::semi_infinite(0.0).singular_upper()).is_err());
    }

    #[test]
    fn tighter_tolerance_never_worse() {
        let exact = quarter_beta_quarter();
        let mut prev = f64::INFINITY;
        for rel in [1e-4, 5e-5, 2.5e-5, 1e-6, 1e-8, 1e-10, 1e-12] {
            let spec = QuadSpec::semi_infinite(0.0).tolerances(1e-300, rel);
            let r = integrate(|r| 1.0 / (1.0 + r.powi(4)).sqrt(), &spec).unwrap();
            let err = (r.value - exact).abs();
            assert!(err <= prev.max(1e-14), "rel {rel}: {err} > {prev}");
            prev = err;
        }
    }

    proptest! {
        #[test]
        fn split_invariance(c in 0.01f64..0.99) {
            let f = |x: f64| (3.0 * x).cos() / (1.0 - x).sqrt();
            let whole = integrate(f, &QuadSpec::new(0.0, 1.0).singular_upper()).unwrap().value;
            let left = integrate(f, &QuadSpec::new(0.0, c)).unwrap().value;
            let right = integrate(f, &QuadSpec::new(c, 1.0).singular_upper()).unwrap().value;
            prop_assert!((whole - (left + right)).abs() <= 1e-12 * whole.abs().max(1.0));
        }
    }
}
