//! Generalized spherical Wigner functions and their grid exports.
//!
//! W_ρ(θ,φ) = Σ_{k,q} Tr[ρ T^(k)_q] Y^(k)_q(θ,φ) on a single manifold; for
//! the coupled two-manifold space the expansion splits into four blocks
//! (two manifold functions plus the real and imaginary parts of the
//! cross-manifold coherence function), each drawn on a sphere whose radius
//! reports the corresponding population or coherence weight.

use std::io::{self, Write};

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::scalar::{fr, Real, C};
use crate::spin::Spin;
use crate::tensors::{tensor_block, TensorIndex};

/// Orthonormalized spherical harmonic Y^k_q(θ, φ) with the Condon-Shortley
/// phase.
pub fn spherical_harmonic<T: Real>(k: u32, q: i32, theta: T, phi: T) -> Result<C<T>> {
    if q.unsigned_abs() > k {
        return Err(Error::argument(format!("|q| = {} exceeds k = {k}", q.abs())));
    }
    let qa = q.unsigned_abs();
    let plm = normalized_legendre(k, qa, theta.cos());
    let phase_angle = phi * fr(q as f64);
    let mut val = Complex::new(phase_angle.cos(), phase_angle.sin()) * Complex::new(plm, T::zero());
    if q < 0 && qa % 2 == 1 {
        // Y^k_{-|q|} = (-1)^{|q|} conj(Y^k_{|q|}); the conjugation is already
        // in the e^{iqφ} factor, leaving the sign.
        val = -val;
    }
    Ok(val)
}

/// √((2k+1)/4π · (k-m)!/(k+m)!) P_k^m(x) for m ≥ 0, by the stable upward
/// recurrence on normalized functions (Condon-Shortley included).
fn normalized_legendre<T: Real>(k: u32, m: u32, x: T) -> T {
    let one = T::one();
    let sin2 = (one - x * x).max(T::zero());
    let sin_t = sin2.sqrt();
    // P̃_m^m
    let mut pmm = fr::<T>(1.0 / (4.0 * std::f64::consts::PI).sqrt());
    for i in 1..=m {
        let fi = fr::<T>(i as f64);
        let factor = ((fi + fi + one) / (fi + fi)).sqrt();
        pmm = -pmm * factor * sin_t; // Condon-Shortley (-1)^m
    }
    if k == m {
        return pmm;
    }
    // P̃_{m+1}^m
    let fm = fr::<T>(m as f64);
    let mut p_prev = pmm;
    let mut p_curr = x * (fm + fm + fr::<T>(3.0)).sqrt() * pmm;
    if k == m + 1 {
        return p_curr;
    }
    for l in (m + 2)..=k {
        let fl = fr::<T>(l as f64);
        let a = ((fr::<T>(4.0) * fl * fl - one) / (fl * fl - fm * fm)).sqrt();
        let prev_l = fl - one;
        let b = ((prev_l * prev_l - fm * fm) / (fr::<T>(4.0) * prev_l * prev_l - one)).sqrt();
        let p_next = a * (x * p_curr - b * p_prev);
        p_prev = p_curr;
        p_curr = p_next;
    }
    p_curr
}

/// Sampling grid over the sphere: θ ∈ [0, π], φ ∈ [0, 2π).
#[derive(Debug, Clone)]
pub struct SphereGrid<T: Real> {
    pub thetas: Vec<T>,
    pub phis: Vec<T>,
}

impl<T: Real> SphereGrid<T> {
    /// Equiangular grid with the given counts (default 91 × 180).
    pub fn equiangular(n_theta: usize, n_phi: usize) -> Self {
        let thetas = (0..n_theta)
            .map(|i| fr::<T>(std::f64::consts::PI) * fr(i as f64) / fr((n_theta - 1).max(1) as f64))
            .collect();
        let phis = (0..n_phi)
            .map(|j| fr::<T>(std::f64::consts::TAU) * fr(j as f64) / fr(n_phi as f64))
            .collect();
        SphereGrid { thetas, phis }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.thetas.len(), self.phis.len())
    }
}

impl<T: Real> Default for SphereGrid<T> {
    fn default() -> Self {
        SphereGrid::equiangular(91, 180)
    }
}

/// Multipole coefficients Tr[ρ T^(k)_q] of one block.
#[derive(Debug, Clone)]
pub struct Multipoles<T: Real> {
    /// (k, q, coefficient).
    pub coefficients: Vec<(u32, i32, C<T>)>,
}

impl<T: Real> Multipoles<T> {
    /// Evaluate the expansion at a sphere point.
    pub fn evaluate(&self, theta: T, phi: T) -> C<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (k, q, c) in &self.coefficients {
            let y = spherical_harmonic(*k, *q, theta, phi).expect("valid (k,q)");
            acc += *c * y;
        }
        acc
    }

    /// Σ |coefficient|².
    pub fn power(&self) -> T {
        let mut acc = T::zero();
        for (_, _, c) in &self.coefficients {
            acc += c.modulus_squared();
        }
        acc
    }
}

/// Expansion coefficients Tr[T^(k)†_q ρ] of one block of the density matrix.
/// `rho_block` must be the (2F+1)×(2F'+1) sub-block with row manifold F and
/// column manifold F'.
///
/// The adjoint in the pairing is what makes the resulting map rotation
/// covariant: the coefficients then transform under conjugation of ρ exactly
/// as the spherical harmonics do under rotation of their argument.
pub fn multipoles<T: Real>(
    rho_block: &DMatrix<C<T>>,
    f_row: Spin,
    f_col: Spin,
) -> Result<Multipoles<T>> {
    if rho_block.nrows() != f_row.dim() || rho_block.ncols() != f_col.dim() {
        return Err(Error::DimMismatch(rho_block.nrows(), f_row.dim()));
    }
    let k_lo = ((f_row.j() - f_col.j()).doubled().abs() / 2) as u32;
    let k_hi = ((f_row.j() + f_col.j()).doubled() / 2) as u32;
    let mut coefficients = Vec::new();
    for k in k_lo..=k_hi {
        for q in -(k as i32)..=k as i32 {
            let t = tensor_block::<T>(f_row, f_col, TensorIndex { k, q })?;
            let mut acc = Complex::new(T::zero(), T::zero());
            for r in 0..t.nrows() {
                for c in 0..t.ncols() {
                    // Tr[T†ρ] over the block = Σ_{r,c} conj(T[r,c])·ρ[r,c]
                    acc += t[(r, c)].conj() * rho_block[(r, c)];
                }
            }
            coefficients.push((k, q, acc));
        }
    }
    Ok(Multipoles { coefficients })
}

/// Evaluate a multipole expansion over a grid; θ-major storage.
pub fn sample_grid<T: Real>(m: &Multipoles<T>, grid: &SphereGrid<T>) -> DMatrix<C<T>> {
    DMatrix::from_fn(grid.thetas.len(), grid.phis.len(), |i, j| {
        m.evaluate(grid.thetas[i], grid.phis[j])
    })
}

/// Single-manifold Wigner function of a Hermitian, unit-trace ρ. Returns the
/// real field on the grid; the imaginary residue must stay below 1e-10.
pub fn wigner_single<T: Real>(
    rho: &Operator<T>,
    spin: Spin,
    grid: &SphereGrid<T>,
) -> Result<DMatrix<T>> {
    if rho.dim() != spin.dim() {
        return Err(Error::DimMismatch(rho.dim(), spin.dim()));
    }
    if !rho.is_hermitian() {
        return Err(Error::argument("Wigner map expects a Hermitian operator"));
    }
    let m = multipoles(rho.matrix(), spin, spin)?;
    let field = sample_grid(&m, grid);
    let mut out = DMatrix::zeros(field.nrows(), field.ncols());
    let tol = fr::<T>(1e-10);
    for i in 0..field.nrows() {
        for j in 0..field.ncols() {
            if field[(i, j)].im.abs() > tol {
                return Err(Error::argument(format!(
                    "Wigner field has imaginary residue {:e}",
                    nalgebra::try_convert::<T, f64>(field[(i, j)].im.abs()).unwrap_or(f64::NAN)
                )));
            }
            out[(i, j)] = field[(i, j)].re;
        }
    }
    Ok(out)
}

/// One exported block of a coupled Wigner field.
#[derive(Debug, Clone)]
pub struct WignerBlock<T: Real> {
    pub id: String,
    /// Sphere radius in [0, 1]: subspace population for the diagonal blocks,
    /// Frobenius weight of the cross-block for the coherence pair.
    pub radius: T,
    pub field: DMatrix<T>,
    pub multipoles: Multipoles<T>,
}

/// Four-block Wigner representation of a 16-dimensional two-manifold state.
#[derive(Debug, Clone)]
pub struct WignerField<T: Real> {
    pub grid: SphereGrid<T>,
    pub blocks: Vec<WignerBlock<T>>,
}

/// Coupled Wigner field of a Hermitian unit-trace ρ on F=4 ⊕ F=3.
pub fn wigner_coupled<T: Real>(rho: &Operator<T>, grid: &SphereGrid<T>) -> Result<WignerField<T>> {
    let f_up = Spin::from_two_j(8);
    let f_down = Spin::from_two_j(6);
    let d = f_up.dim() + f_down.dim();
    if rho.dim() != d {
        return Err(Error::DimMismatch(rho.dim(), d));
    }
    if !rho.is_hermitian() {
        return Err(Error::argument("Wigner map expects a Hermitian operator"));
    }
    let trace = rho.trace();
    if (trace.re - T::one()).abs() > fr(1e-8) {
        return Err(Error::argument("Wigner map expects unit trace"));
    }

    let m = rho.matrix();
    let up_block = m.view((0, 0), (9, 9)).into_owned();
    let down_block = m.view((9, 9), (7, 7)).into_owned();
    let cross_block = m.view((0, 9), (9, 7)).into_owned();

    let pop_up = up_block.diagonal().sum().re;
    let pop_down = down_block.diagonal().sum().re;
    let coherence = {
        let mut acc = T::zero();
        for z in cross_block.iter() {
            acc += z.modulus_squared();
        }
        acc.sqrt()
    };

    let mult_up = multipoles(&up_block, f_up, f_up)?;
    let mult_down = multipoles(&down_block, f_down, f_down)?;
    let mult_cross = multipoles(&cross_block, f_up, f_down)?;

    let field_up = sample_grid(&mult_up, grid).map(|z| z.re);
    let field_down = sample_grid(&mult_down, grid).map(|z| z.re);
    let cross = sample_grid(&mult_cross, grid);

    let blocks = vec![
        WignerBlock {
            id: "W_44".into(),
            radius: pop_up,
            field: field_up,
            multipoles: mult_up,
        },
        WignerBlock {
            id: "W_33".into(),
            radius: pop_down,
            field: field_down,
            multipoles: mult_down,
        },
        WignerBlock {
            id: "W_43_re".into(),
            radius: coherence,
            field: cross.map(|z| z.re),
            multipoles: mult_cross.clone(),
        },
        WignerBlock {
            id: "W_43_im".into(),
            radius: coherence,
            field: cross.map(|z| z.im),
            multipoles: mult_cross,
        },
    ];
    Ok(WignerField {
        grid: grid.clone(),
        blocks,
    })
}

/// Write one block: header lines then θ, φ, value rows.
pub fn write_block<T: Real, W: Write>(
    w: &mut W,
    block: &WignerBlock<T>,
    grid: &SphereGrid<T>,
) -> io::Result<()> {
    let (nt, np) = grid.shape();
    writeln!(w, "# block {}", block.id)?;
    writeln!(
        w,
        "# radius {:.17e}",
        nalgebra::try_convert::<T, f64>(block.radius).unwrap_or(f64::NAN)
    )?;
    writeln!(w, "# grid {nt} {np}")?;
    writeln!(w, "theta\tphi\tvalue")?;
    for i in 0..nt {
        for j in 0..np {
            let t: f64 = nalgebra::try_convert(grid.thetas[i]).unwrap_or(f64::NAN);
            let p: f64 = nalgebra::try_convert(grid.phis[j]).unwrap_or(f64::NAN);
            let v: f64 = nalgebra::try_convert(block.field[(i, j)]).unwrap_or(f64::NAN);
            writeln!(w, "{t:.12e}\t{p:.12e}\t{v:.17e}")?;
        }
    }
    Ok(())
}

/// Write multipole coefficients: k, q, Re, Im rows.
pub fn write_coefficients<T: Real, W: Write>(w: &mut W, m: &Multipoles<T>) -> io::Result<()> {
    writeln!(w, "k\tq\tre\tim")?;
    for (k, q, c) in &m.coefficients {
        let re: f64 = nalgebra::try_convert(c.re).unwrap_or(f64::NAN);
        let im: f64 = nalgebra::try_convert(c.im).unwrap_or(f64::NAN);
        writeln!(w, "{k}\t{q}\t{re:.17e}\t{im:.17e}")?;
    }
    Ok(())
}
