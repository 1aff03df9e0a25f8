//! Decomposition of the spectral plane into sectors on which the diagonal
//! phases admit a fixed ordering, plus the shifted sectors used by the
//! integral-equation solver.
//!
//! Every pair of distinct diagonal entries `b_k != b_l` of the leading
//! matrix defines a line `Re((b_k - b_l)λ) = 0` through the origin.  Away
//! from these lines the real parts `Re(b_j λ)` can be sorted once and for
//! all; the open wedges between consecutive lines are the sectors.  Inside
//! a sector the dominant/recessive roles of the exponentials
//! `e^{b_j λ p(x)}` are frozen, which is what makes a triangular system of
//! integral equations for the normalized fundamental matrix solvable by
//! successive approximation.
//!
//! Near a boundary ray the ordering degenerates, so each sector is also
//! translated by `r >= 0` along its bisector away from the origin.  On the
//! translated wedge the combinations `Re((b_k - b_l)λ)` that were
//! nonnegative on the original wedge may dip below zero, but only down to a
//! computable constant `-h`, because each such combination is affine along
//! any ray of the translated wedge with nonnegative slope.  The translated
//! wedge also leaves the influence zone of foreign orderings once `|λ|`
//! exceeds a computable threshold `λ₀` (the largest modulus at which a
//! translated boundary ray crosses one of the original boundary rays).
//! Both constants feed the solver's operator bounds.

use crate::{C64, Error, Result};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Angles closer than this are considered the same boundary ray.
const ANGLE_DEDUP_TOL: f64 = 1e-12;

/// Relative tolerance below which a directional slope is treated as
/// genuinely negative when validating (possibly hand-built) sectors.
const SLOPE_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// The constant diagonal of the leading coefficient matrix: `n` nonzero
/// complex numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagB {
    b: Vec<C64>,
}

impl DiagB {
    /// Wraps the diagonal entries, rejecting empty input and zero entries
    /// (a zero entry would erase the large parameter from that row).
    pub fn new(b: Vec<C64>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::DimensionMismatch(
                "diagonal of B must contain at least one entry".into(),
            ));
        }
        if let Some(j) = b.iter().position(|v| v.norm_sqr() == 0.0) {
            return Err(Error::ZeroDiagonalInB(j));
        }
        Ok(Self { b })
    }

    /// Number of diagonal entries.
    pub fn n(&self) -> usize {
        self.b.len()
    }

    /// The diagonal entries in their original order.
    pub fn values(&self) -> &[C64] {
        &self.b
    }
}

/// One angular wedge `{λ : α_lo < arg λ < α_hi}` of the decomposition.
///
/// When the diagonal has no distinct pair of entries there are no boundary
/// rays, and the single "sector" is the whole plane, encoded as the wedge
/// `(0, 2π)` and reported by [`Sector::is_full_plane`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    /// 1-based position in the counterclockwise enumeration.  The first
    /// sector starts at the largest boundary-ray angle that is `<= 0` when
    /// ray angles are read in `(-π, π]`, so that sector 1 always opens just
    /// above the nonnegative real direction.
    pub index: usize,
    /// Lower boundary angle (radians).
    pub alpha_lo: f64,
    /// Upper boundary angle (radians), strictly greater than `alpha_lo`.
    pub alpha_hi: f64,
}

impl Sector {
    /// Angle of the bisector ray.
    pub fn bisector(&self) -> f64 {
        0.5 * (self.alpha_lo + self.alpha_hi)
    }

    /// Angular width.
    pub fn width(&self) -> f64 {
        self.alpha_hi - self.alpha_lo
    }

    /// True when this sector is the whole plane (no boundary rays exist).
    pub fn is_full_plane(&self) -> bool {
        self.width() >= TAU - ANGLE_DEDUP_TOL
    }
}

/// A sector translated by `r` along its bisector, together with the
/// ordering of the diagonal entries valid on it and the constants `h`, `λ₀`
/// used by the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedSector {
    /// The untranslated wedge.
    pub base: Sector,
    /// Translation distance along the bisector, away from the origin.
    pub r: f64,
    /// Vertex of the translated wedge: `-r·e^{i·bisector}` (the origin for
    /// the whole-plane case).
    pub apex: C64,
    /// Uniform lower bound: `Re((b_k - b_l)λ) >= -h` for all ordered pairs
    /// `k < l` and all `λ` in the translated wedge.
    pub h: f64,
    /// Modulus threshold; membership requires `|λ| > λ₀`.
    pub lambda0: f64,
    /// `perm[r]` is the index into the original diagonal of the entry at
    /// ordered position `r` (0-based).
    pub perm: Vec<usize>,
    /// Multiplicities of the distinct ordered values; sums to `n`.
    pub blocks: Vec<usize>,
    /// The distinct diagonal values, in decreasing order of
    /// `Re(b·e^{i·bisector})`.
    pub beta: Vec<C64>,
}

impl ExtendedSector {
    /// Dimension of the underlying diagonal.
    pub fn n(&self) -> usize {
        self.perm.len()
    }

    /// The full diagonal in the ordered basis (each distinct value repeated
    /// according to its block size).
    pub fn ordered_b(&self) -> Vec<C64> {
        self.beta
            .iter()
            .zip(&self.blocks)
            .flat_map(|(&v, &m)| std::iter::repeat(v).take(m))
            .collect()
    }

    /// Membership test: `|λ| > λ₀` and `λ - apex` lies strictly inside the
    /// angular range (the whole-plane case has no angular restriction).
    pub fn contains(&self, lambda: C64) -> bool {
        if !(lambda.norm() > self.lambda0) {
            return false;
        }
        if self.base.is_full_plane() {
            return true;
        }
        let rel = lambda - self.apex;
        if rel.norm_sqr() == 0.0 {
            return false;
        }
        let mut phi = rel.arg();
        while phi <= self.base.alpha_lo {
            phi += TAU;
        }
        while phi > self.base.alpha_lo + TAU {
            phi -= TAU;
        }
        phi < self.base.alpha_hi
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// All boundary-ray angles in `[0, 2π)`, sorted ascending.
///
/// Each unordered pair of distinct diagonal entries contributes the two
/// opposite rays of the line `Re((b_k - b_l)λ) = 0`; coincident rays are
/// merged within an absolute angle tolerance of `1e-12`.  The list is empty
/// exactly when all entries are equal.
pub fn boundary_rays(b: &DiagB) -> Vec<f64> {
    let vals = b.values();
    let mut lines: Vec<f64> = Vec::new();
    for k in 0..vals.len() {
        for l in (k + 1)..vals.len() {
            let delta = vals[k] - vals[l];
            if delta.norm_sqr() == 0.0 {
                continue;
            }
            // Re(delta·e^{iθ}) = 0  ⇔  θ ≡ π/2 - arg(delta)  (mod π)
            let mut line = (FRAC_PI_2 - delta.arg()).rem_euclid(PI);
            // Snap near-axis lines so the window base angle below is exact.
            if line < ANGLE_DEDUP_TOL || line > PI - ANGLE_DEDUP_TOL {
                line = 0.0;
            }
            lines.push(line);
        }
    }
    lines.sort_by(|p, q| p.partial_cmp(q).unwrap());
    lines.dedup_by(|p, q| (*p - *q).abs() < ANGLE_DEDUP_TOL);
    let mut rays: Vec<f64> = lines.iter().flat_map(|&l| [l, l + PI]).collect();
    rays.sort_by(|p, q| p.partial_cmp(q).unwrap());
    rays
}

/// Splits the plane along the boundary rays into consecutively numbered
/// sectors.  With `J >= 2` rays the result is `J` wedges tiling `2π`; with
/// no rays it is the single whole-plane sector.
pub fn make_sectors(b: &DiagB) -> Vec<Sector> {
    let rays = boundary_rays(b);
    if rays.is_empty() {
        return vec![Sector {
            index: 1,
            alpha_lo: 0.0,
            alpha_hi: TAU,
        }];
    }
    // Window base: the largest ray angle <= 0 in the (-π, π] reading, so
    // that the numbering satisfies α₀ <= 0 < α₁.  Rays come in antipodal
    // pairs, hence a candidate always exists.
    let alpha0 = rays
        .iter()
        .filter_map(|&th| {
            if th == 0.0 {
                Some(0.0)
            } else if th > PI {
                Some(th - TAU)
            } else {
                None
            }
        })
        .fold(f64::NEG_INFINITY, f64::max);
    debug_assert!(alpha0.is_finite());
    let mut bounds: Vec<f64> = rays
        .iter()
        .map(|&th| if th > alpha0 { th } else { th + TAU })
        .collect();
    bounds.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let mut sectors = Vec::with_capacity(bounds.len());
    let mut lo = alpha0;
    for (i, &hi) in bounds.iter().enumerate() {
        sectors.push(Sector {
            index: i + 1,
            alpha_lo: lo,
            alpha_hi: hi,
        });
        lo = hi;
    }
    sectors
}

/// Translates `sector` by `r` along its bisector and computes the ordering
/// permutation, the uniform exponent bound `h`, and the modulus threshold
/// `λ₀ >= λ_min`.
///
/// The ordering sorts the diagonal entries by decreasing `Re(b·e^{iθ})` at
/// the bisector direction `θ`; the sort is stable, so repeated entries stay
/// adjacent and form blocks.  For each ordered pair the combination
/// `w(λ) = Re((b_k - b_l)λ)` is affine along every ray of the translated
/// wedge; its slope at the two boundary directions must be nonnegative
/// (otherwise `w` is unbounded below on the wedge and the sector geometry
/// is invalid — this cannot happen for sectors produced by
/// [`make_sectors`], only for hand-built ones).  Granting that, the minimum
/// of `w` over the wedge is its value at the apex, which yields
/// `h = max(0, max_{k<l} -w_{kl}(apex))`.
///
/// `λ₀` is the largest modulus at which one of the two translated boundary
/// rays crosses one of the original boundary rays (crossings behind either
/// ray's base point are ignored; parallel pairs never cross), floored at
/// `λ_min`.
pub fn extend(sector: &Sector, r: f64, b: &DiagB, lambda_min: f64) -> Result<ExtendedSector> {
    if !(r >= 0.0) {
        return Err(Error::InvalidSectorGeometry(format!(
            "translation distance must be nonnegative, got {r}"
        )));
    }
    if !(lambda_min > 0.0) {
        return Err(Error::InvalidSectorGeometry(format!(
            "modulus floor must be positive, got {lambda_min}"
        )));
    }
    if !(sector.alpha_hi > sector.alpha_lo) {
        return Err(Error::InvalidSectorGeometry(format!(
            "empty angular range ({}, {})",
            sector.alpha_lo, sector.alpha_hi
        )));
    }
    let vals = b.values();
    let n = vals.len();
    let theta = sector.bisector();
    let dir = C64::from_polar(1.0, theta);

    // Stable descending sort keeps repeated diagonal values adjacent.
    let mut perm: Vec<usize> = (0..n).collect();
    perm.sort_by(|&p, &q| {
        let kp = (vals[p] * dir).re;
        let kq = (vals[q] * dir).re;
        kq.partial_cmp(&kp).unwrap()
    });
    let ordered: Vec<C64> = perm.iter().map(|&j| vals[j]).collect();

    let mut beta: Vec<C64> = Vec::new();
    let mut blocks: Vec<usize> = Vec::new();
    for &v in &ordered {
        match beta.last() {
            Some(&last) if last == v => *blocks.last_mut().unwrap() += 1,
            _ => {
                beta.push(v);
                blocks.push(1);
            }
        }
    }

    let full_plane = sector.is_full_plane();
    let apex = if full_plane {
        C64::new(0.0, 0.0)
    } else {
        -C64::from_polar(r, theta)
    };

    let mut h = 0.0_f64;
    for k in 0..n {
        for l in (k + 1)..n {
            let delta = ordered[k] - ordered[l];
            if delta.norm_sqr() == 0.0 {
                continue;
            }
            let scale = delta.norm();
            for &alpha in &[sector.alpha_lo, sector.alpha_hi] {
                let slope = (delta * C64::from_polar(1.0, alpha)).re;
                if slope < -SLOPE_TOL * scale {
                    return Err(Error::InvalidSectorGeometry(format!(
                        "Re((b_{} - b_{})λ) decreases without bound along the \
                         translated boundary ray at angle {:.6}",
                        k + 1,
                        l + 1,
                        alpha
                    )));
                }
            }
            h = h.max(-(delta * apex).re);
        }
    }
    let h = h.max(0.0);

    let mut lambda0 = lambda_min;
    if !full_plane && r > 0.0 {
        let rays = boundary_rays(b);
        for &alpha in &[sector.alpha_lo, sector.alpha_hi] {
            let d = C64::from_polar(1.0, alpha);
            for &phi in &rays {
                let f = C64::from_polar(1.0, phi);
                // Solve apex + s·d = u·f for real s, u (Cramer's rule).
                let det = -d.re * f.im + f.re * d.im;
                if det.abs() < 1e-12 {
                    continue;
                }
                let s = (apex.re * f.im - f.re * apex.im) / det;
                let u = (-d.re * apex.im + apex.re * d.im) / det;
                if s >= -1e-9 && u >= -1e-9 {
                    let point = apex + C64::from_polar(s.max(0.0), alpha);
                    lambda0 = lambda0.max(point.norm());
                }
            }
        }
    }

    Ok(ExtendedSector {
        base: *sector,
        r,
        apex,
        h,
        lambda0,
        perm,
        blocks,
        beta,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
