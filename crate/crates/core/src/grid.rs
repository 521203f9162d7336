//! Uniform cell-centered 1-D grid with a homogeneous-Neumann diffusion
//! operator and a tridiagonal solver for the implicit step.

use crate::error::{Error, Result};
use crate::solver::Diffusivity;

/// Uniform cell-centered partition of `(0, domain_length)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    n_cells: usize,
    domain_length: f64,
    cell_width: f64,
}

impl SpatialGrid {
    pub fn new(n_cells: usize, domain_length: f64) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::GridTooSmall(n_cells));
        }
        if !(domain_length > 0.0 && domain_length.is_finite()) {
            return Err(Error::BadDomainLength(domain_length));
        }
        Ok(Self {
            n_cells,
            domain_length,
            cell_width: domain_length / n_cells as f64,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Measure of the domain, `|Ω|`.
    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    /// Midpoint-rule quadrature weights, all equal to the cell width.
    pub fn weights(&self) -> Vec<f64> {
        vec![self.cell_width; self.n_cells]
    }

    pub fn cell_centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(move |i| (i as f64 + 0.5) * self.cell_width)
    }
}

/// Shorthand for [`SpatialGrid::new`].
pub fn build_grid(n_cells: usize, domain_length: f64) -> Result<SpatialGrid> {
    SpatialGrid::new(n_cells, domain_length)
}

/// A field with one finite value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
    grid: SpatialGrid,
}

impl GridFunction {
    pub fn new(grid: SpatialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::LengthMismatch {
                expected: grid.n_cells(),
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { values, grid })
    }

    pub fn constant(grid: SpatialGrid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.n_cells()])
    }

    /// Samples `f` at the cell centers.
    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.cell_centers().map(f).collect())
    }

    // Internal constructor for values produced from already-finite inputs.
    pub(crate) fn from_raw(grid: SpatialGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_cells());
        Self { values, grid }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// `self + scale * other`.
    pub fn axpy(&self, scale: f64, other: &GridFunction) -> Result<GridFunction> {
        self.check_grid(other)?;
        Ok(GridFunction::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + scale * b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.axpy(-1.0, other)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn norm_squared(&self) -> f64 {
        let h = self.grid.cell_width;
        self.values.iter().map(|v| h * v * v).sum()
    }

    /// Spatial mean `|Ω|⁻¹ ∫ v`.
    pub fn mean(&self) -> f64 {
        let h = self.grid.cell_width;
        self.values.iter().map(|v| h * v).sum::<f64>() / self.grid.domain_length
    }

    pub(crate) fn check_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Discrete L² pairing `Σ wᵢ uᵢ vᵢ`.
pub fn inner_product(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    u.check_grid(v)?;
    let h = u.grid.cell_width;
    Ok(u.values.iter().zip(&v.values).map(|(a, b)| h * (a * b)).sum())
}

/// Face values of `κ_α = κ + α` by arithmetic mean of the adjacent cells.
pub fn face_conductivity(theta: &GridFunction, kappa: &Diffusivity, alpha: f64) -> Result<Vec<f64>> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::param("alpha", format!("must be nonnegative, got {alpha}")));
    }
    let cell: Vec<f64> = theta.values.iter().map(|&r| kappa.eval(r) + alpha).collect();
    Ok(cell.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect())
}

/// Symmetric tridiagonal discretization of `−div(c ∇·)` with zero flux at
/// both ends. Stored as diagonal and off-diagonal bands.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionOperator {
    grid: SpatialGrid,
    face_conductivities: Vec<f64>,
    diag: Vec<f64>,
    // off[i] couples cells i and i+1
    off: Vec<f64>,
}

pub fn assemble_diffusion(face_conductivities: &[f64], grid: &SpatialGrid) -> Result<DiffusionOperator> {
    let n = grid.n_cells();
    if face_conductivities.len() != n - 1 {
        return Err(Error::LengthMismatch {
            expected: n - 1,
            got: face_conductivities.len(),
        });
    }
    for (face, &value) in face_conductivities.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index: face, value });
        }
        if value < 0.0 {
            return Err(Error::NegativeConductivity { face, value });
        }
    }
    let inv_h2 = 1.0 / (grid.cell_width() * grid.cell_width());
    let off: Vec<f64> = face_conductivities.iter().map(|c| -c * inv_h2).collect();
    let mut diag = vec![0.0; n];
    for (i, &o) in off.iter().enumerate() {
        diag[i] -= o;
        diag[i + 1] -= o;
    }
    Ok(DiffusionOperator {
        grid: *grid,
        face_conductivities: face_conductivities.to_vec(),
        diag,
        off,
    })
}

impl DiffusionOperator {
    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn face_conductivities(&self) -> &[f64] {
        &self.face_conductivities
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off
    }

    /// Matrix entry `A[i][j]` (zero outside the band).
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match i.abs_diff(j) {
            0 => self.diag[i],
            1 => self.off[i.min(j)],
            _ => 0.0,
        }
    }

    pub fn apply(&self, theta: &GridFunction) -> Result<GridFunction> {
        if theta.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(GridFunction::from_raw(self.grid, self.apply_raw(&theta.values, 0.0)))
    }

    fn apply_raw(&self, x: &[f64], shift: f64) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut y = (self.diag[i] + shift) * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// `(shift·I + A) x`.
    pub fn apply_shifted(&self, shift: f64, x: &GridFunction) -> Result<GridFunction> {
        if x.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(GridFunction::from_raw(self.grid, self.apply_raw(&x.values, shift)))
    }
}

/// Solves `(shift·I + A) x = rhs` by Thomas elimination. The matrix is
/// strictly diagonally dominant for `shift > 0`, so no pivoting is needed.
pub fn solve_shifted_system(a: &DiffusionOperator, shift: f64, rhs: &GridFunction) -> Result<GridFunction> {
    if !(shift > 0.0 && shift.is_finite()) {
        return Err(Error::NonPositiveShift(shift));
    }
    if rhs.grid != a.grid {
        return Err(Error::GridMismatch);
    }
    let n = rhs.values.len();
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    let b0 = a.diag[0] + shift;
    c_prime[0] = a.off[0] / b0;
    d_prime[0] = rhs.values[0] / b0;
    for i in 1..n {
        let lower = a.off[i - 1];
        let denom = a.diag[i] + shift - lower * c_prime[i - 1];
        if i + 1 < n {
            c_prime[i] = a.off[i] / denom;
        }
        d_prime[i] = (rhs.values[i] - lower * d_prime[i - 1]) / denom;
    }
    let mut x = d_prime;
    for i in (0..n - 1).rev() {
        x[i] -= c_prime[i] * x[i + 1];
    }
    Ok(GridFunction::from_raw(a.grid, x))
}

/// `G_α(r) = ∫₀^r κ_α(s) ds`, by the composite midpoint rule (exact for
/// constant κ).
pub fn g_alpha_eval(r: f64, kappa: &Diffusivity, alpha: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    if let Some(c) = kappa.constant_value() {
        return (c + alpha) * r;
    }
    let step_cap = (1e-3 * r.abs()).min(1e-4);
    let n = (r.abs() / step_cap).ceil().max(1.0) as usize;
    let h = r / n as f64;
    let sum: f64 = (0..n).map(|k| kappa.eval((k as f64 + 0.5) * h) + alpha).sum();
    sum * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(n: usize) -> SpatialGrid {
        build_grid(n, 1.0).unwrap()
    }

    #[test]
    fn grid_construction() {
        let g = build_grid(4, 1.0).unwrap();
        assert_eq!(g.cell_width(), 0.25);
        assert_eq!(g.weights(), vec![0.25; 4]);
        assert!((build_grid(10, 2.0).unwrap().cell_width() - 0.2).abs() < 1e-15);
        assert_eq!(build_grid(1, 1.0), Err(Error::GridTooSmall(1)));
        assert!(build_grid(4, 0.0).is_err());
        assert!(build_grid(4, -1.0).is_err());
    }

    #[test]
    fn weights_sum_to_length() {
        for &(n, l) in &[(3, 1.0), (7, 2.3), (64, 1.0), (1000, 3.7)] {
            let g = build_grid(n, l).unwrap();
            let s: f64 = g.weights().iter().sum();
            assert!((s - l).abs() <= 8.0 * f64::EPSILON * l * n as f64);
        }
    }

    #[test]
    fn grid_function_rejects_bad_input() {
        let g = unit(3);
        assert!(GridFunction::new(g, vec![0.0; 2]).is_err());
        assert!(matches!(
            GridFunction::new(g, vec![0.0, f64::NAN, 1.0]),
            Err(Error::NonFinite { index: 1, .. })
        ));
    }

    #[test]
    fn inner_product_examples() {
        let g = unit(10);
        let one = GridFunction::constant(g, 1.0).unwrap();
        let minus = GridFunction::constant(g, -1.0).unwrap();
        assert!((inner_product(&one, &one).unwrap() - 1.0).abs() < 1e-14);
        assert!((inner_product(&minus, &one).unwrap() + 1.0).abs() < 1e-14);
        let two = GridFunction::constant(build_grid(6, 3.0).unwrap(), 2.0).unwrap();
        assert!((two.norm_squared() - 12.0).abs() < 1e-13);
        assert_eq!(inner_product(&one, &two), Err(Error::GridMismatch));
    }

    #[test]
    fn face_conductivity_examples() {
        let g = unit(4);
        let theta = GridFunction::constant(g, 0.3).unwrap();
        let faces = face_conductivity(&theta, &Diffusivity::constant(1.0).unwrap(), 0.0).unwrap();
        assert_eq!(faces, vec![1.0; 3]);

        let sat = Diffusivity::saturating();
        let zero = GridFunction::constant(g, 0.0).unwrap();
        let faces = face_conductivity(&zero, &sat, 0.1).unwrap();
        assert!(faces.iter().all(|&c| (c - 0.1).abs() < 1e-15));

        let two = GridFunction::new(unit(2), vec![1.0, 0.0]).unwrap();
        let faces = face_conductivity(&two, &sat, 0.0).unwrap();
        let direct = 0.5 * (sat.eval(1.0) + sat.eval(0.0));
        assert_eq!(faces, vec![direct]);
        assert_eq!(direct, 0.25);
        assert!(face_conductivity(&two, &sat, -0.1).is_err());
    }

    #[test]
    fn assembly_stencil() {
        let g = SpatialGrid::new(3, 3.0).unwrap();
        let a = assemble_diffusion(&[1.0, 1.0], &g).unwrap();
        let theta = GridFunction::new(g, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(a.apply(&theta).unwrap().values(), &[-1.0, 2.0, -1.0]);
        let c = GridFunction::constant(g, 4.2).unwrap();
        assert!(a.apply(&c).unwrap().values().iter().all(|v| v.abs() < 1e-12));
        assert!(matches!(
            assemble_diffusion(&[1.0, -0.5], &g),
            Err(Error::NegativeConductivity { face: 1, .. })
        ));
    }

    #[test]
    fn operator_properties_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = build_grid(12, 1.7).unwrap();
        for _ in 0..1000 {
            let faces: Vec<f64> = (0..11).map(|_| rng.gen_range(0.0..3.0)).collect();
            let a = assemble_diffusion(&faces, &g).unwrap();
            for i in 0..12 {
                let row: f64 = (0..12).map(|j| a.entry(i, j)).sum();
                assert!(row.abs() <= 1e-12 * a.diagonal()[i].abs().max(1.0));
                for j in 0..12 {
                    assert_eq!(a.entry(i, j), a.entry(j, i));
                }
            }
            let theta = GridFunction::new(g, (0..12).map(|_| rng.gen_range(-5.0..5.0)).collect()).unwrap();
            let at = a.apply(&theta).unwrap();
            assert!(inner_product(&theta, &at).unwrap() >= -1e-10);
            let mass: f64 = at.values().iter().map(|v| v * g.cell_width()).sum();
            assert!(mass.abs() < 1e-9);
        }
    }

    #[test]
    fn shifted_solve() {
        let g = unit(5);
        let zero_op = assemble_diffusion(&[0.0; 4], &g).unwrap();
        let rhs = GridFunction::constant(g, 4.0).unwrap();
        let x = solve_shifted_system(&zero_op, 2.0, &rhs).unwrap();
        assert!(x.values().iter().all(|&v| v == 2.0));
        assert_eq!(solve_shifted_system(&zero_op, 0.0, &rhs), Err(Error::NonPositiveShift(0.0)));

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = unit(50);
        for _ in 0..100 {
            let faces: Vec<f64> = (0..49).map(|_| rng.gen_range(0.0..2.0)).collect();
            let a = assemble_diffusion(&faces, &g).unwrap();
            let shift = rng.gen_range(0.1..1e4);
            let rhs = GridFunction::new(g, (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let x = solve_shifted_system(&a, shift, &rhs).unwrap();
            let back = a.apply_shifted(shift, &x).unwrap();
            assert!(back.sub(&rhs).unwrap().norm() <= 1e-10 * rhs.norm());
        }
    }

    #[test]
    fn g_alpha_examples() {
        let one = Diffusivity::constant(1.0).unwrap();
        assert_eq!(g_alpha_eval(3.0, &one, 0.0), 3.0);
        assert_eq!(g_alpha_eval(0.0, &Diffusivity::saturating(), 0.1), 0.0);
        // antiderivative of r/(1+r) is r − ln(1+r)
        let oracle = 1.0 - 2f64.ln();
        assert!((g_alpha_eval(1.0, &Diffusivity::saturating(), 0.0) - oracle).abs() < 1e-8);
        let neg = g_alpha_eval(-1.0, &Diffusivity::saturating(), 0.0);
        assert!((neg + oracle).abs() < 1e-8);
    }
}
