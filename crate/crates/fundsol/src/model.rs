//! The model problem: the part of the system that is solved exactly.
//!
//! In the ordered basis of an extended sector, split `A = D + (A − D)` where
//! `D` keeps exactly the entries on pairs with equal diagonal exponents
//! (`b_j = b_k`), a block-diagonal matrix.  The model equation
//! `Y⁰′ = (λρB + D)·Y⁰` then factors as `Y⁰ = E·M = M·E` with
//! `E = diag{e^{b_j λ p(x)}}`, `p(x) = ∫₀ˣ ρ`, and `M′ = D M`, `M(0) = I`:
//! `E` is constant on each block, so it commutes with the block-diagonal `M`.
//!
//! Conjugating the remainder gives `Q = M⁻¹(A−D)M` and `R_k = M⁻¹C_kM`; the
//! entries of `Q` on equal-exponent pairs vanish identically, which is what
//! lets the contraction argument absorb `D` at no cost in the exponent.
//!
//! Exponents are never materialized here: every public output carries
//! `b_j λ p(x)` symbolically, since inside a sector `Re(b_j λ p)` is of
//! order `|λ|` — far beyond floating-point range.

use crate::grid::{GridFn, MatrixFn, Weight};
use crate::sectors::ExtendedSector;
use crate::verify::PicardProblem;
use crate::{C64, Error, Result};

/// Minimum mesh multiplier for the Picard solves of non-diagonal blocks.
const M_REFINEMENT: usize = 8;

/// The `M·M⁻¹ = I` audit defect scales as the squared effective mesh width,
/// so block solves refine the base mesh to at least this many cells (then
/// double up to two more times if the audit still fails).
const M_TARGET_EFFECTIVE_CELLS: usize = 16_384;

/// Tolerance of the `M·M⁻¹ = I` audit.
const PRODUCT_TOL: f64 = 1e-8;

/// Tolerance below which an entry of `Q` on an equal-exponent pair is
/// accepted as the analytic zero and snapped to exactly zero.
const BLOCK_ZERO_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// System coefficients
// ---------------------------------------------------------------------------

/// The coefficient data of the system `y′ = λρ(x)B y + A(x) y + C(x,λ) y`
/// with the Laurent tail `C(x,λ) = Σ_{k≥1} λ⁻ᵏ C_k(x)`, all resampled onto
/// one shared mesh (the finest of the inputs).
#[derive(Debug, Clone)]
pub struct SystemCoeffs {
    b: crate::sectors::DiagB,
    rho: Weight,
    a_mat: MatrixFn,
    ctail: Vec<MatrixFn>,
    a_norm: f64,
    ctail_norms: Vec<f64>,
}

impl SystemCoeffs {
    /// Validates dimensions, resamples everything onto the finest input
    /// mesh, and precomputes the norms `a = ‖A‖_{L₁}` and `‖C_k‖_{L₁}`.
    pub fn new(
        b: crate::sectors::DiagB,
        rho: Weight,
        a: MatrixFn,
        ctail: Vec<MatrixFn>,
    ) -> Result<Self> {
        let n = b.n();
        if a.n() != n {
            return Err(Error::DimensionMismatch(format!(
                "A is {}x{} but B has {} diagonal entries",
                a.n(),
                a.n(),
                n
            )));
        }
        for (k, ck) in ctail.iter().enumerate() {
            if ck.n() != n {
                return Err(Error::DimensionMismatch(format!(
                    "C_{} is {}x{} but B has {} diagonal entries",
                    k + 1,
                    ck.n(),
                    ck.n(),
                    n
                )));
            }
        }
        let cells = ctail
            .iter()
            .map(MatrixFn::cells)
            .chain([rho.cells(), a.cells()])
            .max()
            .expect("nonempty");
        let rho = Weight::new(
            rho.to_grid()
                .resample(cells)?
                .values()
                .iter()
                .map(|v| v.re)
                .collect(),
        )?;
        let a_mat = a.resample(cells)?;
        let ctail: Vec<MatrixFn> = ctail
            .into_iter()
            .map(|ck| ck.resample(cells))
            .collect::<Result<_>>()?;
        let a_norm = a_mat.norm_l(1.0)?;
        let ctail_norms = ctail
            .iter()
            .map(|ck| ck.norm_l(1.0))
            .collect::<Result<_>>()?;
        Ok(Self {
            b,
            rho,
            a_mat,
            ctail,
            a_norm,
            ctail_norms,
        })
    }

    /// System dimension.
    pub fn n(&self) -> usize {
        self.b.n()
    }

    /// Shared mesh cell count.
    pub fn cells(&self) -> usize {
        self.a_mat.cells()
    }

    /// The diagonal of `B`.
    pub fn b(&self) -> &crate::sectors::DiagB {
        &self.b
    }

    /// The weight `ρ`.
    pub fn rho(&self) -> &Weight {
        &self.rho
    }

    /// The coefficient matrix `A` (original basis).
    pub fn a_mat(&self) -> &MatrixFn {
        &self.a_mat
    }

    /// The Laurent-tail coefficients `C_1..C_K` (original basis).
    pub fn ctail(&self) -> &[MatrixFn] {
        &self.ctail
    }

    /// `a = ‖A‖_{L₁}`.
    pub fn a_norm(&self) -> f64 {
        self.a_norm
    }

    /// The norms `‖C_k‖_{L₁}`.
    pub fn ctail_norms(&self) -> &[f64] {
        &self.ctail_norms
    }

    /// `γ(λ) = ‖C(·,λ)‖_{L₁}` for this system.
    pub fn gamma(&self, lambda: C64) -> Result<f64> {
        gamma(&self.ctail, lambda)
    }

    /// Upper estimate of `γ(λ)` over `|λ| > λ_floor`:
    /// `Σ ‖C_k‖_{L₁} λ_floor⁻ᵏ` (each term decreases in `|λ|`).
    pub fn cbound(&self, lambda_floor: f64) -> Result<f64> {
        if self.ctail.is_empty() {
            return Ok(0.0);
        }
        if !(lambda_floor > 0.0) {
            return Err(Error::ZeroLambda);
        }
        let mut acc = 0.0;
        let mut scale = 1.0;
        for norm in &self.ctail_norms {
            scale /= lambda_floor;
            acc += norm * scale;
        }
        Ok(acc)
    }
}

/// `γ(λ) = ‖Σ_k λ⁻ᵏ C_k‖_{L₁}` — the `L₁` matrix norm of the λ-dependent
/// perturbation.  Zero tail gives 0 for any λ; a nonempty tail rejects λ = 0.
pub fn gamma(ctail: &[MatrixFn], lambda: C64) -> Result<f64> {
    let Some(first) = ctail.first() else {
        return Ok(0.0);
    };
    if lambda.norm_sqr() == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let mut acc = MatrixFn::zeros(first.n(), first.cells())?;
    let mut lam_pow = C64::new(1.0, 0.0);
    for ck in ctail {
        lam_pow /= lambda;
        let scaled = ck.map_entries(|e| e.map(|v| v * lam_pow));
        acc = acc.add(&scaled)?;
    }
    acc.norm_l(1.0)
}

// ---------------------------------------------------------------------------
// Splitting and the block solves
// ---------------------------------------------------------------------------

/// Splits `A` (already in the sector's ordered basis) into the part `D`
/// supported on pairs with exactly equal diagonal exponents and the
/// remainder, so that `A = D + (A − D)` holds entrywise exactly.
pub fn split_d(a: &MatrixFn, sector: &ExtendedSector) -> Result<(MatrixFn, MatrixFn)> {
    let n = a.n();
    if sector.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix order {} vs sector dimension {}",
            n,
            sector.n()
        )));
    }
    let b = sector.ordered_b();
    let cells = a.cells();
    let mut d_entries = Vec::with_capacity(n * n);
    let mut rest_entries = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            if b[j] == b[k] {
                d_entries.push(a.entry(j, k).clone());
                rest_entries.push(GridFn::zeros(cells)?);
            } else {
                d_entries.push(GridFn::zeros(cells)?);
                rest_entries.push(a.entry(j, k).clone());
            }
        }
    }
    Ok((
        MatrixFn::new(n, d_entries)?,
        MatrixFn::new(n, rest_entries)?,
    ))
}

/// Whether every off-diagonal entry of the block is identically zero.
fn block_is_diagonal(d: &MatrixFn, lo: usize, len: usize) -> bool {
    for j in 0..len {
        for k in 0..len {
            if j != k
                && d.entry(lo + j, lo + k)
                    .values()
                    .iter()
                    .any(|v| v.norm_sqr() != 0.0)
            {
                return false;
            }
        }
    }
    true
}

/// Extracts the `len×len` sub-matrix starting at `(lo, lo)`.
fn extract_block(d: &MatrixFn, lo: usize, len: usize) -> Result<MatrixFn> {
    let mut entries = Vec::with_capacity(len * len);
    for j in 0..len {
        for k in 0..len {
            entries.push(d.entry(lo + j, lo + k).clone());
        }
    }
    MatrixFn::new(len, entries)
}

/// Transpose (no conjugation) of a block matrix.
fn transpose_negated(block: &MatrixFn) -> Result<MatrixFn> {
    let len = block.n();
    let mut entries = Vec::with_capacity(len * len);
    for j in 0..len {
        for k in 0..len {
            entries.push(block.entry(k, j).map(|v| -v));
        }
    }
    MatrixFn::new(len, entries)
}

/// Keeps every `step`-th node of a refined-mesh function.
fn downsample(g: &GridFn, step: usize) -> Result<GridFn> {
    GridFn::new(g.values().iter().copied().step_by(step).collect())
}

/// Solves one non-diagonal block `M_j′ = D_j M_j`, `M_j(0) = I`, and the
/// inverse from its own equation `(M_j⁻¹)′ = −M_j⁻¹ D_j`, column by column /
/// row by row with the shared fixed-point engine on a refined mesh.
fn solve_block_picard(
    block: &MatrixFn,
    tol: f64,
    refinement: usize,
) -> Result<(Vec<Vec<GridFn>>, Vec<Vec<GridFn>>)> {
    let len = block.n();
    let neg_t = transpose_negated(block)?;
    let mut m_cols: Vec<Vec<GridFn>> = Vec::with_capacity(len);
    let mut w_rows: Vec<Vec<GridFn>> = Vec::with_capacity(len);
    for c in 0..len {
        let mut e = vec![C64::new(0.0, 0.0); len];
        e[c] = C64::new(1.0, 0.0);
        // Column c of M: z′ = D_j z.
        let col = crate::verify::picard_oracle(
            &PicardProblem::homogeneous(block.clone(), 0.0, e.clone())?
                .with_refinement(refinement)
                .with_tolerance(tol),
        )?
        .z
        .iter()
        .map(|z| downsample(z, refinement))
        .collect::<Result<Vec<_>>>()?;
        m_cols.push(col);
        // Row c of M⁻¹: w_k′ = −Σ_l w_l d_{lk}, i.e. w′ = (−D_jᵀ) w.
        let row = crate::verify::picard_oracle(
            &PicardProblem::homogeneous(neg_t.clone(), 0.0, e)?
                .with_refinement(refinement)
                .with_tolerance(tol),
        )?
        .z
        .iter()
        .map(|z| downsample(z, refinement))
        .collect::<Result<Vec<_>>>()?;
        w_rows.push(row);
    }
    Ok((m_cols, w_rows))
}

/// Worst node deviation of `M·W − I` over one block.
fn block_product_defect(m_cols: &[Vec<GridFn>], w_rows: &[Vec<GridFn>]) -> f64 {
    let len = m_cols.len();
    let nodes = m_cols[0][0].values().len();
    let mut worst = 0.0f64;
    for j in 0..len {
        for k in 0..len {
            for i in 0..nodes {
                // (M·W)_{jk} = Σ_l m_{jl} w_{lk}; m_cols[l][j] is m_{jl},
                // w_rows[l][k] is w_{lk}.
                let mut acc = C64::new(0.0, 0.0);
                for l in 0..len {
                    acc += m_cols[l][j].value(i) * w_rows[l][k].value(i);
                }
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((acc - C64::new(target, 0.0)).norm());
            }
        }
    }
    worst
}

/// Solves `M′ = D M`, `M(0) = I` and `(M⁻¹)′ = −M⁻¹D`, `M⁻¹(0) = I`
/// block by block.  Diagonal blocks are exact (`diag(exp ∫ d_jj)`);
/// non-diagonal blocks use the fixed-point engine at stopping increment
/// `tol`, refining the mesh until the `M·M⁻¹ = I` audit passes `1e-8`.
pub fn solve_m(d: &MatrixFn, blocks: &[usize], tol: f64) -> Result<(MatrixFn, MatrixFn)> {
    let n = d.n();
    if blocks.iter().sum::<usize>() != n {
        return Err(Error::DimensionMismatch(format!(
            "block sizes sum to {} for a {}x{} matrix",
            blocks.iter().sum::<usize>(),
            n,
            n
        )));
    }
    let cells = d.cells();
    let mut m_entries: Vec<GridFn> = (0..n * n)
        .map(|_| GridFn::zeros(cells))
        .collect::<Result<_>>()?;
    let mut w_entries = m_entries.clone();

    let mut lo = 0;
    for &len in blocks {
        if len == 1 || block_is_diagonal(d, lo, len) {
            for j in 0..len {
                let anti = d.entry(lo + j, lo + j).antiderivative(0.0)?;
                m_entries[(lo + j) * n + (lo + j)] = anti.map(C64::exp);
                w_entries[(lo + j) * n + (lo + j)] = anti.map(|v| (-v).exp());
            }
        } else {
            let block = extract_block(d, lo, len)?;
            let mut refinement = M_REFINEMENT
                .max(M_TARGET_EFFECTIVE_CELLS.div_ceil(cells))
                .next_power_of_two();
            let cap = refinement * 4;
            loop {
                let (m_cols, w_rows) = solve_block_picard(&block, tol, refinement)?;
                let defect = block_product_defect(&m_cols, &w_rows);
                if defect <= PRODUCT_TOL {
                    for c in 0..len {
                        for r in 0..len {
                            m_entries[(lo + r) * n + (lo + c)] = m_cols[c][r].clone();
                            w_entries[(lo + c) * n + (lo + r)] = w_rows[c][r].clone();
                        }
                    }
                    break;
                }
                if refinement >= cap {
                    return Err(Error::IdentityViolated(format!(
                        "solution times its inverse deviates from I by {defect:.3e} \
                         at mesh refinement {refinement}"
                    )));
                }
                refinement *= 2;
            }
        }
        lo += len;
    }
    Ok((MatrixFn::new(n, m_entries)?, MatrixFn::new(n, w_entries)?))
}

// ---------------------------------------------------------------------------
// Conjugation
// ---------------------------------------------------------------------------

/// `Q = M⁻¹(A−D)M` and `R_k = M⁻¹C_kM` (node-wise products), with the
/// analytic zeros of `Q` on equal-exponent pairs audited to `1e-12` and
/// snapped to exact zero.
pub fn conjugate(
    a_minus_d: &MatrixFn,
    ctail: &[MatrixFn],
    m: &MatrixFn,
    m_inv: &MatrixFn,
    ordered_b: &[C64],
) -> Result<(MatrixFn, Vec<MatrixFn>)> {
    let n = a_minus_d.n();
    if ordered_b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} diagonal exponents for a {}x{} matrix",
            ordered_b.len(),
            n,
            n
        )));
    }
    let q_raw = m_inv.matmul(a_minus_d)?.matmul(m)?;
    let cells = q_raw.cells();
    let mut entries = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            let e = q_raw.entry(j, k);
            if ordered_b[j] == ordered_b[k] {
                let worst = e.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
                if worst > BLOCK_ZERO_TOL {
                    return Err(Error::IdentityViolated(format!(
                        "conjugated entry ({j},{k}) on an equal-exponent pair \
                         should vanish but reaches {worst:.3e}"
                    )));
                }
                entries.push(GridFn::zeros(cells)?);
            } else {
                entries.push(e.clone());
            }
        }
    }
    let q = MatrixFn::new(n, entries)?;
    let rtail = ctail
        .iter()
        .map(|ck| m_inv.matmul(ck)?.matmul(m))
        .collect::<Result<Vec<_>>>()?;
    Ok((q, rtail))
}

// ---------------------------------------------------------------------------
// The assembled model solution
// ---------------------------------------------------------------------------

/// Everything the series solver needs, in the sector's ordered basis: the
/// phase antiderivative `p`, the exact block solution `M` and its inverse,
/// the conjugated remainder `Q` and tail `R_k`, and the symbolic-exponent
/// accessors.
#[derive(Debug, Clone)]
pub struct ModelSolution {
    /// The extended sector this solution is ordered for.
    pub sector: ExtendedSector,
    /// `p(x) = ∫₀ˣ ρ` (real values; nondecreasing; `p(0) = 0`).
    pub p: GridFn,
    /// Block solution of `M′ = DM`, `M(0) = I`.
    pub m: MatrixFn,
    /// Solution of `(M⁻¹)′ = −M⁻¹D`, `M⁻¹(0) = I`.
    pub m_inv: MatrixFn,
    /// The block part `D` of the ordered `A`.
    pub d: MatrixFn,
    /// `Q = M⁻¹(A−D)M`, exactly zero on equal-exponent pairs.
    pub q: MatrixFn,
    /// `R_k = M⁻¹C_kM`.
    pub rtail: Vec<MatrixFn>,
    /// The tail coefficients `C_k` in the ordered basis.
    pub ctail: Vec<MatrixFn>,
    /// Diagonal exponent coefficients in the ordered basis.
    pub b_ordered: Vec<C64>,
    /// `a = ‖A‖_{L₁}` (permutation-invariant).
    pub a_norm: f64,
    /// `‖C_k‖_{L₁}` (permutation-invariant).
    pub ctail_norms: Vec<f64>,
}

impl ModelSolution {
    /// System dimension.
    pub fn n(&self) -> usize {
        self.b_ordered.len()
    }

    /// Shared mesh cell count.
    pub fn cells(&self) -> usize {
        self.m.cells()
    }

    /// The exponent `b_j λ p(x)` of the model factor `E`, never
    /// exponentiated here (callers decide when it is safe to materialize).
    pub fn exp_e(&self, lambda: C64, x: f64, j: usize) -> Result<C64> {
        if j >= self.n() {
            return Err(Error::DimensionMismatch(format!(
                "exponent index {} for a {}-dimensional system",
                j,
                self.n()
            )));
        }
        Ok(self.b_ordered[j] * lambda * self.p.eval(x)?.re)
    }

    /// Same at mesh node `i`.
    pub fn exp_e_node(&self, lambda: C64, i: usize, j: usize) -> C64 {
        self.b_ordered[j] * lambda * self.p.value(i).re
    }

    /// The factored model solution `Y⁰ = M·E` at `λ`: the values of `M` and
    /// the exponent table `b_j λ p(x_i)` (column `j`, node `i`).  Callers
    /// must keep the factors separate unless `Re` of the exponent is small.
    pub fn model_y0(&self, lambda: C64) -> (MatrixFn, Vec<Vec<C64>>) {
        let cells = self.cells();
        let table = (0..self.n())
            .map(|j| {
                (0..=cells)
                    .map(|i| self.exp_e_node(lambda, i, j))
                    .collect()
            })
            .collect();
        (self.m.clone(), table)
    }

    /// `γ(λ) = ‖C(·,λ)‖_{L₁}`, evaluated exactly; the `L₁` matrix norm is
    /// permutation-invariant, so the ordered tail gives the same value as
    /// the original one.
    pub fn gamma(&self, lambda: C64) -> Result<f64> {
        gamma(&self.ctail, lambda)
    }

    /// Upper estimate of `γ` over `|λ| > λ_floor`.
    pub fn cbound(&self, lambda_floor: f64) -> Result<f64> {
        if self.ctail_norms.is_empty() {
            return Ok(0.0);
        }
        if !(lambda_floor > 0.0) {
            return Err(Error::ZeroLambda);
        }
        let mut acc = 0.0;
        let mut scale = 1.0;
        for norm in &self.ctail_norms {
            scale /= lambda_floor;
            acc += norm * scale;
        }
        Ok(acc)
    }
}

/// Permutes rows and columns of `a` by the sector ordering:
/// `out[r][s] = a[perm[r]][perm[s]]`.
fn permute_matrix(a: &MatrixFn, perm: &[usize]) -> Result<MatrixFn> {
    let n = a.n();
    let mut entries = Vec::with_capacity(n * n);
    for r in 0..n {
        for s in 0..n {
            entries.push(a.entry(perm[r], perm[s]).clone());
        }
    }
    MatrixFn::new(n, entries)
}

/// Builds the complete model solution for one extended sector: permutes the
/// coefficients into the sector ordering, splits `A`, solves the block
/// equation and its inverse, conjugates the remainder, and packages the
/// symbolic exponent data.
pub fn build(coeffs: &SystemCoeffs, sector: &ExtendedSector) -> Result<ModelSolution> {
    let n = coeffs.n();
    if sector.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "sector is for a {}-dimensional diagonal, system has {}",
            sector.n(),
            n
        )));
    }
    let b_ordered = sector.ordered_b();
    for (r, &orig) in sector.perm.iter().enumerate() {
        if coeffs.b.values()[orig] != b_ordered[r] {
            return Err(Error::DimensionMismatch(
                "sector was extended from a different diagonal".into(),
            ));
        }
    }

    let a_ord = permute_matrix(&coeffs.a_mat, &sector.perm)?;
    let ctail_ord: Vec<MatrixFn> = coeffs
        .ctail
        .iter()
        .map(|ck| permute_matrix(ck, &sector.perm))
        .collect::<Result<_>>()?;

    let p = GridFn::new(
        coeffs
            .rho
            .antiderivative()
            .into_iter()
            .map(|v| C64::new(v, 0.0))
            .collect(),
    )?;

    let (d, a_minus_d) = split_d(&a_ord, sector)?;
    let tol = 1e-12 * coeffs.a_norm.exp();
    let (m, m_inv) = solve_m(&d, &sector.blocks, tol)?;
    let (q, rtail) = conjugate(&a_minus_d, &ctail_ord, &m, &m_inv, &b_ordered)?;

    Ok(ModelSolution {
        sector: sector.clone(),
        p,
        m,
        m_inv,
        d,
        q,
        rtail,
        ctail: ctail_ord,
        b_ordered,
        a_norm: coeffs.a_norm,
        ctail_norms: coeffs.ctail_norms.clone(),
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
