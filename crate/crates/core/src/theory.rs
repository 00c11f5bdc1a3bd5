//! A priori inclusion/exclusion regions for pseudospectra and the derived
//! GMRES convergence estimators.
//!
//! Exclusion discs around the origin come from discrete stability constants;
//! the inclusion is the field of values dilated by epsilon. The
//! shifted-Laplace operator additionally gets the complement predicate built
//! from the loss term, with its constant taken from the mass-matrix
//! conditioning. Iteration-count estimators evaluate the closed forms the
//! convergence analysis produces.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::FovPolygon;
use crate::pseudospectrum::ResolventEvaluator;

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("circle bound needs the origin outside: |center| = {center_abs} <= radius = {radius}")]
    OriginInsideCircle { center_abs: f64, radius: f64 },
    #[error("no bracket of the target {target} in [{lo}, {hi}]")]
    NoBracket { target: f64, lo: f64, hi: f64 },
    #[error("bisection failed to meet the value tolerance (best x = {x}, value {value})")]
    BisectionStalled { x: f64, value: f64 },
    #[error("resolvent evaluation failed: {0}")]
    Evaluation(String),
}

/// How a stability constant was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Sharp route: C_2S = 1 / sigma_min(A), measured on the matrix.
    Oracle,
    /// Analytic route: C_2S = C_S / (alpha_W * alpha) with a supplied C_S.
    NormEquivalence,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::Oracle => write!(f, "oracle"),
            Provenance::NormEquivalence => write!(f, "norm-equivalence"),
        }
    }
}

/// Discrete stability constant with its provenance.
#[derive(Debug, Clone, Copy)]
pub struct StabilityConstants {
    pub c_2s: f64,
    pub c_s: Option<f64>,
    pub alpha: Option<f64>,
    pub alpha_w: Option<f64>,
    pub provenance: Provenance,
}

impl StabilityConstants {
    /// Sharp constant from a measured smallest singular value.
    pub fn from_oracle(sigma_min: f64) -> Result<Self, TheoryError> {
        if !(sigma_min > 0.0) {
            return Err(TheoryError::InvalidArgument(format!(
                "sigma_min must be > 0, got {sigma_min}"
            )));
        }
        Ok(Self {
            c_2s: 1.0 / sigma_min,
            c_s: None,
            alpha: None,
            alpha_w: None,
            provenance: Provenance::Oracle,
        })
    }

    /// C_2S = C_S / (alpha_W alpha) from the norm-equivalence constants.
    pub fn from_norm_equivalence(c_s: f64, alpha: f64, alpha_w: f64) -> Result<Self, TheoryError> {
        if !(c_s > 0.0 && alpha > 0.0 && alpha_w > 0.0) {
            return Err(TheoryError::InvalidArgument(
                "stability constants must be positive".into(),
            ));
        }
        Ok(Self {
            c_2s: c_s / (alpha_w * alpha),
            c_s: Some(c_s),
            alpha: Some(alpha),
            alpha_w: Some(alpha_w),
            provenance: Provenance::NormEquivalence,
        })
    }
}

/// Whether a region certifies membership in the pseudospectrum complement
/// (exclusion) or contains the pseudospectrum (inclusion).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    Exclusion,
    Inclusion,
}

impl std::fmt::Display for RegionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegionKind::Exclusion => write!(f, "exclusion"),
            RegionKind::Inclusion => write!(f, "inclusion"),
        }
    }
}

/// Analytic region with a total membership predicate.
#[derive(Debug, Clone)]
pub enum Region {
    /// Open disc; a nonpositive radius means the region is empty.
    Disc {
        center: Complex64,
        radius: f64,
        kind: RegionKind,
        provenance: String,
    },
    /// Field-of-values polygon dilated by eps.
    DilatedPolygon {
        polygon: FovPolygon,
        eps: f64,
        kind: RegionKind,
        provenance: String,
    },
    /// { z : |z| <= modulus_cap, im_min <= Im z <= im_max }.
    Strip {
        im_min: f64,
        im_max: f64,
        modulus_cap: f64,
        kind: RegionKind,
        provenance: String,
    },
    /// Loss-term complement predicate outside the closed disc B(1/2, 1/2).
    Lemma41 {
        c: f64,
        eps: f64,
        provenance: String,
    },
}

impl Region {
    pub fn kind(&self) -> RegionKind {
        match self {
            Region::Disc { kind, .. } => *kind,
            Region::DilatedPolygon { kind, .. } => *kind,
            Region::Strip { kind, .. } => *kind,
            Region::Lemma41 { .. } => RegionKind::Exclusion,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Region::Disc { radius, .. } => *radius <= 0.0,
            _ => false,
        }
    }

    /// Total membership predicate on the complex plane.
    pub fn contains(&self, z: Complex64) -> bool {
        match self {
            Region::Disc { center, radius, .. } => {
                *radius > 0.0 && (z - center).norm() < *radius
            }
            Region::DilatedPolygon { polygon, eps, .. } => polygon.distance(z) <= *eps,
            Region::Strip { im_min, im_max, modulus_cap, .. } => {
                z.norm() <= *modulus_cap && z.im >= *im_min && z.im <= *im_max
            }
            Region::Lemma41 { c, eps, .. } => lemma41_complement(z, *c, *eps),
        }
    }

    /// One structured text record: variant, parameters, provenance.
    pub fn export_record(&self) -> String {
        match self {
            Region::Disc { center, radius, kind, provenance } => format!(
                "disc,center_re={},center_im={},radius={},kind={},provenance={}",
                center.re, center.im, radius, kind, provenance
            ),
            Region::DilatedPolygon { polygon, eps, kind, provenance } => {
                let pts: Vec<String> = polygon
                    .points
                    .iter()
                    .map(|p| format!("{}:{}", p.re, p.im))
                    .collect();
                format!(
                    "dilated_polygon,eps={},points={},kind={},provenance={}",
                    eps,
                    pts.join(";"),
                    kind,
                    provenance
                )
            }
            Region::Strip { im_min, im_max, modulus_cap, kind, provenance } => format!(
                "strip,im_min={},im_max={},modulus_cap={},kind={},provenance={}",
                im_min, im_max, modulus_cap, kind, provenance
            ),
            Region::Lemma41 { c, eps, provenance } => {
                format!("lemma41,c={},eps={},kind=exclusion,provenance={}", c, eps, provenance)
            }
        }
    }
}

/// Exclusion disc B(0, 1/C_2S - eps); empty when the radius is nonpositive.
pub fn exclusion_disc(c: &StabilityConstants, eps: f64) -> Region {
    Region::Disc {
        center: Complex64::ZERO,
        radius: 1.0 / c.c_2s - eps,
        kind: RegionKind::Exclusion,
        provenance: c.provenance.to_string(),
    }
}

/// The field of values dilated by eps contains the eps-pseudospectrum.
pub fn inclusion_fov_dilation(fov: &FovPolygon, eps: f64) -> Region {
    Region::DilatedPolygon {
        polygon: fov.clone(),
        eps,
        kind: RegionKind::Inclusion,
        provenance: "support-points".into(),
    }
}

/// Exclusion disc B(0, C kappa h^d - eps) for the absorbing-boundary
/// Helmholtz matrix; only d = 2 meshes are produced here.
pub fn helmholtz_exclusion(
    kappa: f64,
    h: f64,
    d: u32,
    c: f64,
    eps: f64,
) -> Result<Region, TheoryError> {
    if d != 2 {
        return Err(TheoryError::InvalidArgument(format!("only d = 2 supported, got {d}")));
    }
    if !(kappa > 0.0 && h > 0.0 && c > 0.0) {
        return Err(TheoryError::InvalidArgument("parameters must be positive".into()));
    }
    Ok(Region::Disc {
        center: Complex64::ZERO,
        radius: c * kappa * h.powi(d as i32) - eps,
        kind: RegionKind::Exclusion,
        provenance: "calibrated".into(),
    })
}

/// Exclusion disc B(0, C kappa / (kappa + sigma) - eps) for the
/// shifted-Laplace preconditioned operator. The constant defaults to 1 and is
/// clamped there, since the exact-preconditioner limit forces C <= 1.
pub fn sl_exclusion(
    kappa: f64,
    sigma: f64,
    c: Option<f64>,
    eps: f64,
) -> Result<Region, TheoryError> {
    if !(kappa > 0.0 && sigma >= 0.0) {
        return Err(TheoryError::InvalidArgument("kappa > 0 and sigma >= 0 required".into()));
    }
    let c = c.unwrap_or(1.0).min(1.0);
    if !(c > 0.0) {
        return Err(TheoryError::InvalidArgument("constant must be positive".into()));
    }
    Ok(Region::Disc {
        center: Complex64::ZERO,
        radius: c * kappa / (kappa + sigma) - eps,
        kind: RegionKind::Exclusion,
        provenance: "loss-term".into(),
    })
}

/// Membership in the pseudospectrum complement by the loss-term bound:
/// true iff |z - 1/2| > 1/2 strictly and
/// C (1 / (|z|^2 - Re z) + 1 / |1 - z|) < 1 / eps.
/// z = 1 and the circle |z - 1/2| = 1/2 report false (predicate undefined
/// there, so the conservative answer is membership unknown).
pub fn lemma41_complement(z: Complex64, c: f64, eps: f64) -> bool {
    if !(eps > 0.0 && c > 0.0) {
        return false;
    }
    let denom = z.norm_sqr() - z.re;
    if denom <= 0.0 {
        // Inside or on the closed disc B(1/2, 1/2).
        return false;
    }
    let one_minus = (Complex64::new(1.0, 0.0) - z).norm();
    if one_minus == 0.0 {
        return false;
    }
    c * (1.0 / denom + 1.0 / one_minus) < 1.0 / eps
}

/// Circle-based polynomial bound: multiplier * (radius / |center|)^i.
/// The caller supplies multiplier = |boundary length| / (2 pi eps).
pub fn gmres_circle_bound(
    center: Complex64,
    radius: f64,
    multiplier: f64,
    i: usize,
) -> Result<f64, TheoryError> {
    let center_abs = center.norm();
    if !(radius >= 0.0) || !(multiplier >= 0.0) {
        return Err(TheoryError::InvalidArgument("radius and multiplier must be >= 0".into()));
    }
    if center_abs <= radius {
        return Err(TheoryError::OriginInsideCircle { center_abs, radius });
    }
    Ok(multiplier * (radius / center_abs).powi(i as i32))
}

/// Closed-form iteration-count estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimateFormula {
    /// N = -(2 C2 / C1) h^{-2} (ln tol - ln(C2 h^{-2} / (pi C1))).
    Poisson1 { c1: f64, c2: f64, h: f64 },
    /// N = -C h^{-1} (ln tol - ln(C h^{-d})).
    Poisson2 { c: f64, h: f64, d: u32 },
    /// N = -4 kappa ln tol + 4 kappa ln kappa.
    ShiftedLaplace { kappa: f64 },
}

/// Predicted GMRES iteration count for a relative tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationEstimate {
    pub n: u64,
    pub formula: EstimateFormula,
    pub tol: f64,
}

pub fn iterations_estimate(
    formula: EstimateFormula,
    tol: f64,
) -> Result<IterationEstimate, TheoryError> {
    if !(tol > 0.0 && tol <= 1.0) {
        return Err(TheoryError::InvalidArgument(format!("tol must be in (0, 1], got {tol}")));
    }
    let raw = match formula {
        EstimateFormula::Poisson1 { c1, c2, h } => {
            if !(c1 > 0.0 && c2 > 0.0 && h > 0.0) {
                return Err(TheoryError::InvalidArgument("constants must be positive".into()));
            }
            let lead = 2.0 * c2 / c1 * h.powi(-2);
            -lead * (tol.ln() - (c2 * h.powi(-2) / (std::f64::consts::PI * c1)).ln())
        }
        EstimateFormula::Poisson2 { c, h, d } => {
            if !(c > 0.0 && h > 0.0) {
                return Err(TheoryError::InvalidArgument("constants must be positive".into()));
            }
            -c / h * (tol.ln() - (c * h.powi(-(d as i32))).ln())
        }
        EstimateFormula::ShiftedLaplace { kappa } => {
            if !(kappa > 0.0) {
                return Err(TheoryError::InvalidArgument("kappa must be positive".into()));
            }
            -4.0 * kappa * tol.ln() + 4.0 * kappa * kappa.ln()
        }
    };
    Ok(IterationEstimate { n: raw.max(0.0).ceil() as u64, formula, tol })
}

/// Residual-to-energy-norm translation:
/// |u - u~|_kappa <= C tol (|f|_0 + h^{-1/2} |g|_boundary).
pub fn residual_to_energy(tol: f64, f_norm: f64, g_norm: f64, h: f64, c: Option<f64>) -> f64 {
    let c = c.unwrap_or(1.0);
    c * tol * (f_norm + h.powf(-0.5) * g_norm)
}

/// Fits a generic constant: measured = C * model, so C = measured / model.
pub fn calibrate_constant(measured: f64, model: f64) -> f64 {
    measured / model
}

/// Scan-and-bisect search for the point on the real axis nearest the
/// interval start where the resolvent norm crosses `target`.
///
/// The interval is scanned left to right for the first sign change of
/// (resolvent norm - target); bisection then shrinks the bracket to
/// `pos_tol` and the post condition |value - target| <= 1e-3 target is
/// verified at the returned point.
pub fn bisect_closest_real(
    ev: &dyn ResolventEvaluator,
    target: f64,
    interval: (f64, f64),
) -> Result<f64, TheoryError> {
    bisect_closest_real_with_tol(ev, target, interval, 1e-7)
}

pub fn bisect_closest_real_with_tol(
    ev: &dyn ResolventEvaluator,
    target: f64,
    interval: (f64, f64),
    pos_tol_rel: f64,
) -> Result<f64, TheoryError> {
    if !(target > 0.0) {
        return Err(TheoryError::InvalidArgument(format!("target must be > 0, got {target}")));
    }
    let (lo, hi) = interval;
    if !(hi > lo) {
        return Err(TheoryError::InvalidArgument(format!("bad interval [{lo}, {hi}]")));
    }
    let eval = |x: f64| -> Result<f64, TheoryError> {
        ev.eval(Complex64::new(x, 0.0), 0)
            .or_else(|_| ev.eval(Complex64::new(x, 0.0), 1))
            .map_err(|e| TheoryError::Evaluation(e.to_string()))
    };
    const SCAN_STEPS: usize = 32;
    let span = hi - lo;
    let mut prev_x = lo;
    let mut prev_s = eval(prev_x)? - target;
    let mut bracket = None;
    for k in 1..=SCAN_STEPS {
        let x = lo + span * k as f64 / SCAN_STEPS as f64;
        let s = eval(x)? - target;
        if prev_s == 0.0 {
            bracket = Some((prev_x, prev_x));
            break;
        }
        if prev_s * s <= 0.0 {
            bracket = Some((prev_x, x));
            break;
        }
        prev_x = x;
        prev_s = s;
    }
    let Some((mut a, mut b)) = bracket else {
        return Err(TheoryError::NoBracket { target, lo, hi });
    };
    let pos_tol = pos_tol_rel * span;
    let fa = eval(a)? - target;
    while b - a > pos_tol {
        let mid = 0.5 * (a + b);
        let fm = eval(mid)? - target;
        if fm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    let x = 0.5 * (a + b);
    let value = eval(x)?;
    if (value - target).abs() > 1e-3 * target {
        return Err(TheoryError::BisectionStalled { x, value });
    }
    Ok(x)
}
