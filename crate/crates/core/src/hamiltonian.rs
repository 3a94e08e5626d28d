//! The PDM Hamiltonian H = 1/2 p_a f p_a + V and first-order generators on
//! 3D grids, plus the ambiguity-parameter form of the effective potential.

use crate::catalog::GeneratorSpec;
use crate::error::{CoreError, Result};
use crate::expr::{Expr, Var};
use crate::grid::{Grid3, GridField};
use num_complex::Complex64;
use rayon::prelude::*;

/// V = V_hat + (alpha+gamma)/4 * lap(f) + alpha*gamma * |grad f|^2 / (2 f),
/// with beta = -1 - alpha - gamma implied. Built symbolically from the
/// analytic derivatives of the expression tree.
pub fn effective_potential(v_hat: &Expr, f: &Expr, alpha: f64, gamma: f64) -> Expr {
    let lap = f.laplacian();
    let mut grad_sq = Expr::zero();
    for v in [Var::X1, Var::X2, Var::X3] {
        let d = f.diff(v);
        grad_sq = Expr::add(grad_sq, Expr::mul(d.clone(), d));
    }
    let term1 = Expr::mul(Expr::constant((alpha + gamma) / 4.0), lap);
    let term2 = Expr::mul(
        Expr::constant(alpha * gamma),
        Expr::div(grad_sq, Expr::mul(Expr::constant(2.0), f.clone())),
    );
    Expr::add(v_hat.clone(), Expr::add(term1, term2))
}

fn par_eval_real(grid: &Grid3, t: f64, e: &Expr, what: &str) -> Result<Vec<f64>> {
    let n = grid.n;
    let vals: Vec<Result<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|lin| {
            let k = lin % n[2];
            let j = (lin / n[2]) % n[1];
            let i = lin / (n[1] * n[2]);
            let v = e.eval_real(&grid.point(i, j, k, t))?;
            if !v.is_finite() {
                return Err(CoreError::Domain(format!("{what} non-finite at node")));
            }
            Ok(v)
        })
        .collect();
    vals.into_iter().collect()
}

/// f evaluated at the face midpoints x_i + stride*h/2 along `axis`, stored
/// node-indexed (value at index i is the face between i and i+stride).
fn face_values(grid: &Grid3, f: &Expr, axis: usize, stride: usize) -> Result<Vec<f64>> {
    let n = grid.n;
    let off = stride as f64 * grid.h(axis) / 2.0;
    let vals: Vec<Result<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|lin| {
            let k = lin % n[2];
            let j = (lin / n[2]) % n[1];
            let i = lin / (n[1] * n[2]);
            let mut p = grid.point(i, j, k, 0.0);
            p.x[axis] += off;
            let v = f.eval_real(&p)?;
            if !v.is_finite() {
                return Err(CoreError::Domain("inverse mass non-finite at face".into()));
            }
            Ok(v)
        })
        .collect();
    vals.into_iter().collect()
}

/// H assembled on a fixed grid: the divergence-form flux stencil
///   (H psi)_i = -1/2 sum_a [f_{i+s/2}(psi_{i+s} - psi_i)
///                           - f_{i-s/2}(psi_i - psi_{i-s})]/(s h)^2 + V_i psi_i
/// with zero extension outside the box. The induced matrix is exactly
/// symmetric for every stride; strides > 1 exist so callers can Richardson-
/// combine applications without reassembling.
pub struct DiscreteHamiltonian {
    grid: Grid3,
    v: Vec<f64>,
    faces: Vec<[Vec<f64>; 3]>, // faces[s-1][axis]
}

impl DiscreteHamiltonian {
    pub fn assemble(grid: &Grid3, f: &Expr, v: &Expr, max_stride: usize) -> Result<Self> {
        let vv = par_eval_real(grid, 0.0, v, "potential")?;
        let mut faces = Vec::new();
        for s in 1..=max_stride {
            let fx = face_values(grid, f, 0, s)?;
            let fy = face_values(grid, f, 1, s)?;
            let fz = face_values(grid, f, 2, s)?;
            faces.push([fx, fy, fz]);
        }
        Ok(DiscreteHamiltonian {
            grid: grid.clone(),
            v: vv,
            faces,
        })
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    /// Apply at the given stride (1 = base scheme).
    pub fn apply_stride(&self, psi: &GridField, stride: usize) -> Result<GridField> {
        if psi.grid != self.grid {
            return Err(CoreError::GridMismatch("H applied to foreign field".into()));
        }
        if stride == 0 || stride > self.faces.len() {
            return Err(CoreError::Unsupported(format!(
                "stride {stride} not assembled"
            )));
        }
        let n = self.grid.n;
        let s = stride;
        let fcs = &self.faces[s - 1];
        let inv_h2 = [
            1.0 / (s as f64 * self.grid.h(0)).powi(2),
            1.0 / (s as f64 * self.grid.h(1)).powi(2),
            1.0 / (s as f64 * self.grid.h(2)).powi(2),
        ];
        let strides = [n[1] * n[2], n[2], 1usize];
        let data: Vec<Complex64> = (0..self.grid.len())
            .into_par_iter()
            .map(|lin| {
                let k = lin % n[2];
                let j = (lin / n[2]) % n[1];
                let i = lin / (n[1] * n[2]);
                let ijk = [i, j, k];
                let mut acc = self.v[lin] * psi.data[lin];
                for ax in 0..3 {
                    let step = strides[ax];
                    let up = if ijk[ax] + s < n[ax] {
                        psi.data[lin + s * step]
                    } else {
                        Complex64::default()
                    };
                    let dn = if ijk[ax] >= s {
                        psi.data[lin - s * step]
                    } else {
                        Complex64::default()
                    };
                    let f_up = if ijk[ax] + s < n[ax] { fcs[ax][lin] } else { 0.0 };
                    // below the lowest node the face value would pair with
                    // zero-extended data only; it lands on the diagonal, so
                    // dropping it keeps the matrix exactly symmetric
                    let f_dn = if ijk[ax] >= s { fcs[ax][lin - s * step] } else { 0.0 };
                    let flux = f_up * (up - psi.data[lin]) - f_dn * (psi.data[lin] - dn);
                    acc -= 0.5 * inv_h2[ax] * flux;
                }
                acc
            })
            .collect();
        Ok(GridField {
            grid: self.grid.clone(),
            data,
        })
    }

    /// Contract-checked application of the base scheme.
    pub fn apply(&self, psi: &GridField) -> Result<GridField> {
        if !psi.is_interior_supported() {
            return Err(CoreError::Contract(
                "apply_hamiltonian requires an interior-supported field".into(),
            ));
        }
        self.apply_stride(psi, 1)
    }
}

/// First-order operator c_t d_t + sum_a c_a d_a + c0 frozen on a grid at a
/// fixed time. The spatial derivatives use 4th-order central stencils; the
/// c_t part is the caller's business (verify substitutes -iH on solutions).
pub struct DiscreteGenerator {
    grid: Grid3,
    pub c: [Vec<Complex64>; 3],
    pub c0: Vec<Complex64>,
    pub ct: Option<Vec<Complex64>>,
}

fn par_eval_cplx(grid: &Grid3, t: f64, e: &Expr) -> Result<Vec<Complex64>> {
    let n = grid.n;
    let vals: Vec<Result<Complex64>> = (0..grid.len())
        .into_par_iter()
        .map(|lin| {
            let k = lin % n[2];
            let j = (lin / n[2]) % n[1];
            let i = lin / (n[1] * n[2]);
            let z = e.eval(&grid.point(i, j, k, t))?;
            if !z.is_finite() {
                return Err(CoreError::Domain(
                    "generator coefficient singular at a node".into(),
                ));
            }
            Ok(z)
        })
        .collect();
    vals.into_iter().collect()
}

impl DiscreteGenerator {
    pub fn assemble(grid: &Grid3, g: &GeneratorSpec, t: f64) -> Result<Self> {
        let c1 = par_eval_cplx(grid, t, &g.c1)?;
        let c2 = par_eval_cplx(grid, t, &g.c2)?;
        let c3 = par_eval_cplx(grid, t, &g.c3)?;
        let c0 = par_eval_cplx(grid, t, &g.c0)?;
        let ct = match &g.ct {
            Some(e) => Some(par_eval_cplx(grid, t, e)?),
            None => None,
        };
        Ok(DiscreteGenerator {
            grid: grid.clone(),
            c: [c1, c2, c3],
            c0,
            ct,
        })
    }

    /// (sum_a c_a d_a + c0) psi with 4th-order stencils at the given stride.
    pub fn apply_spatial_stride(&self, psi: &GridField, stride: usize) -> Result<GridField> {
        if psi.grid != self.grid {
            return Err(CoreError::GridMismatch(
                "generator applied to foreign field".into(),
            ));
        }
        let n = self.grid.n;
        let s = stride;
        let strides = [n[1] * n[2], n[2], 1usize];
        let data: Vec<Complex64> = (0..self.grid.len())
            .into_par_iter()
            .map(|lin| {
                let k = lin % n[2];
                let j = (lin / n[2]) % n[1];
                let i = lin / (n[1] * n[2]);
                let ijk = [i, j, k];
                let mut acc = self.c0[lin] * psi.data[lin];
                for ax in 0..3 {
                    let step = strides[ax];
                    let grab = |off: isize| -> Complex64 {
                        let pos = ijk[ax] as isize + off;
                        if pos < 0 || pos >= n[ax] as isize {
                            Complex64::default()
                        } else {
                            psi.data[(lin as isize + off * step as isize) as usize]
                        }
                    };
                    let ss = s as isize;
                    let d = (-grab(2 * ss) + 8.0 * grab(ss) - 8.0 * grab(-ss) + grab(-2 * ss))
                        / (12.0 * s as f64 * self.grid.h(ax));
                    acc += self.c[ax][lin] * d;
                }
                acc
            })
            .collect();
        Ok(GridField {
            grid: self.grid.clone(),
            data,
        })
    }

    /// Contract-checked spatial application; `dt_psi` supplies the field
    /// d(psi)/dt when the generator carries a c_t term.
    pub fn apply(&self, psi: &GridField, dt_psi: Option<&GridField>) -> Result<GridField> {
        if !psi.is_interior_supported() {
            return Err(CoreError::Contract(
                "apply_generator requires an interior-supported field".into(),
            ));
        }
        let mut out = self.apply_spatial_stride(psi, 1)?;
        if let Some(ct) = &self.ct {
            let dt = dt_psi.ok_or_else(|| {
                CoreError::Contract(
                    "generator has a d_t term; supply the time-derivative field".into(),
                )
            })?;
            if dt.grid != self.grid {
                return Err(CoreError::GridMismatch("dt field on foreign grid".into()));
            }
            for (o, (c, d)) in out.data.iter_mut().zip(ct.iter().zip(dt.data.iter())) {
                *o += c * d;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::expr::{parse, ParamValues, Point};
    use crate::grid::inner_product;

    fn gaussian(width: f64) -> impl Fn(f64, f64, f64) -> Complex64 + Sync {
        move |x, y, z| {
            let r2 = x * x + y * y + z * z;
            Complex64::new((-r2 / (2.0 * width * width)).exp(), 0.0)
        }
    }

    /// Narrow Gaussian sampled then hard-zeroed on the outer layers; the
    /// truncation is below double round-off for the widths used here.
    fn interior_gaussian(g: &Grid3, width: f64) -> GridField {
        let mut f = GridField::sample(g, gaussian(width));
        let n = g.n;
        for i in 0..n[0] {
            for j in 0..n[1] {
                for k in 0..n[2] {
                    if i < 2 || j < 2 || k < 2 || i >= n[0] - 2 || j >= n[1] - 2 || k >= n[2] - 2
                    {
                        f.data[g.idx(i, j, k)] = Complex64::default();
                    }
                }
            }
        }
        f
    }

    #[test]
    fn effective_potential_limits() {
        let f = parse("x3^2").unwrap();
        let zero = Expr::zero();
        // alpha = gamma = 0 leaves V_hat untouched
        let v = effective_potential(&parse("r^2").unwrap(), &f, 0.0, 0.0);
        let p = Point::new(0.4, 0.2, 0.7, 0.0);
        assert!((v.eval_real(&p).unwrap() - (0.16 + 0.04 + 0.49)).abs() < 1e-14);
        // constant f kills both corrections
        let v = effective_potential(&parse("r^2").unwrap(), &Expr::constant(2.5), -0.3, 0.8);
        assert!((v.eval_real(&p).unwrap() - 0.69).abs() < 1e-14);
        // f = x3^2, alpha = gamma = -1/2: corrections cancel exactly
        let v = effective_potential(&zero, &f, -0.5, -0.5);
        for x3 in [0.3, 0.9, 2.0] {
            let p = Point::new(0.1, 0.2, x3, 0.0);
            assert!(v.eval_real(&p).unwrap().abs() < 1e-13, "x3={x3}");
        }
    }

    #[test]
    fn effective_potential_symmetric_in_alpha_gamma() {
        let f = parse("(r^2+1)^2").unwrap();
        let vhat = parse("r^2").unwrap();
        let a = effective_potential(&vhat, &f, 0.3, -0.9);
        let b = effective_potential(&vhat, &f, -0.9, 0.3);
        for pt in [
            Point::new(0.5, -0.3, 0.8, 0.0),
            Point::new(-0.2, 0.9, 0.1, 0.0),
        ] {
            assert!((a.eval_real(&pt).unwrap() - b.eval_real(&pt).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn effective_potential_derivatives_match_finite_differences() {
        // spot-check the symbolic lap(f) and |grad f|^2 against central FD
        let f = parse("x3^2").unwrap();
        let v = effective_potential(&Expr::zero(), &f, -0.5, 0.25);
        // closed form: (alpha+gamma)/4 * 2 + alpha*gamma * 4 x3^2/(2 x3^2)
        for (x3, _) in [(0.7, ()), (1.3, ())] {
            let p = Point::new(0.0, 0.0, x3, 0.0);
            let expect = (-0.25) / 4.0 * 2.0 + (-0.125) * 2.0;
            assert!((v.eval_real(&p).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn hamiltonian_is_exactly_symmetric() {
        let sys = catalog::get_system(1).unwrap();
        let grid = Grid3::cube(-0.9, 0.9, 20).unwrap();
        let h = DiscreteHamiltonian::assemble(&grid, &sys.inverse_mass, &sys.potential, 1)
            .unwrap();
        let u = interior_gaussian(&grid, 0.16);
        let mut v = interior_gaussian(&grid, 0.22);
        // make v complex and asymmetric
        for (idx, z) in v.data.iter_mut().enumerate() {
            *z *= Complex64::new(1.0, 0.3 * ((idx % 7) as f64 - 3.0));
        }
        let hu = h.apply(&u).unwrap();
        let hv = h.apply(&v).unwrap();
        let a = inner_product(&u, &hv).unwrap();
        let b = inner_product(&hu, &v).unwrap();
        let bound = 1e-12 * u.norm() * v.norm();
        assert!((a - b).norm() < bound, "{} vs bound {}", (a - b).norm(), bound);
    }

    #[test]
    fn zero_field_maps_to_zero() {
        let sys = catalog::get_system(1).unwrap();
        let grid = Grid3::cube(-0.9, 0.9, 16).unwrap();
        let h = DiscreteHamiltonian::assemble(&grid, &sys.inverse_mass, &sys.potential, 1)
            .unwrap();
        let z = GridField::zeros(&grid);
        let hz = h.apply(&z).unwrap();
        assert!(hz.norm() == 0.0);
    }

    #[test]
    fn contract_violation_reported() {
        let sys = catalog::get_system(1).unwrap();
        let grid = Grid3::cube(-0.9, 0.9, 16).unwrap();
        let h = DiscreteHamiltonian::assemble(&grid, &sys.inverse_mass, &sys.potential, 1)
            .unwrap();
        let ones = GridField::sample(&grid, |_, _, _| Complex64::new(1.0, 0.0));
        assert!(matches!(h.apply(&ones), Err(CoreError::Contract(_))));
    }

    /// Exactly-supported smooth test field: prod_a (1 - (x_a/s)^2)^6 inside
    /// |x_a| < s, zero outside, as an expression tree so the analytic oracle
    /// comes from the same engine the derivative tests validate.
    fn window_expr(support: f64) -> Expr {
        let mut e = Expr::one();
        for v in [Var::X1, Var::X2, Var::X3] {
            let s = Expr::div(Expr::var(v), Expr::constant(support));
            let w = Expr::pow(
                Expr::sub(Expr::one(), Expr::mul(s.clone(), s)),
                Expr::constant(6.0),
            );
            e = Expr::mul(e, w);
        }
        e
    }

    fn sample_expr(grid: &Grid3, e: &Expr, support: f64) -> GridField {
        GridField::sample(grid, |x, y, z| {
            if x.abs() < support && y.abs() < support && z.abs() < support {
                Complex64::new(
                    e.eval_real(&Point::new(x, y, z, 0.0)).unwrap(),
                    0.0,
                )
            } else {
                Complex64::default()
            }
        })
    }

    #[test]
    fn free_laplacian_matches_analytic_oracle() {
        // f = 1, V = 0: H = -lap/2; oracle is the analytic Laplacian of the
        // window field
        let grid = Grid3::cube(-1.0, 1.0, 48).unwrap();
        let h =
            DiscreteHamiltonian::assemble(&grid, &Expr::one(), &Expr::zero(), 1).unwrap();
        let support = 0.72;
        let we = window_expr(support);
        let psi = sample_expr(&grid, &we, support);
        assert!(psi.is_interior_supported());
        let hpsi = h.apply(&psi).unwrap();
        let lap = we.laplacian();
        let mut err2 = 0.0;
        for i in 0..48 {
            for j in 0..48 {
                for k in 0..48 {
                    let (x, y, z) = (grid.node(0, i), grid.node(1, j), grid.node(2, k));
                    let want = if x.abs() < support && y.abs() < support && z.abs() < support
                    {
                        -0.5 * lap.eval_real(&Point::new(x, y, z, 0.0)).unwrap()
                    } else {
                        0.0
                    };
                    let d = hpsi.data[grid.idx(i, j, k)].re - want;
                    err2 += d * d;
                }
            }
        }
        let err = (grid.cell_volume() * err2).sqrt() / hpsi.norm();
        assert!(err < 0.05, "relative L2 error {err}");
    }

    #[test]
    fn consistency_order_two_under_refinement() {
        // L2 error against the analytic application drops ~4x per halving
        let sys = catalog::get_system(1).unwrap();
        let support = 0.72;
        let we = window_expr(support);
        let f = &sys.inverse_mass;
        // H psi = -1/2 (f lap psi + grad f . grad psi) + V psi, all analytic
        let mut hpsi_expr = Expr::mul(
            Expr::constant(-0.5),
            Expr::mul(f.clone(), we.laplacian()),
        );
        for v in [Var::X1, Var::X2, Var::X3] {
            hpsi_expr = Expr::add(
                hpsi_expr,
                Expr::mul(
                    Expr::constant(-0.5),
                    Expr::mul(f.diff(v), we.diff(v)),
                ),
            );
        }
        hpsi_expr = Expr::add(hpsi_expr, Expr::mul(sys.potential.clone(), we.clone()));
        let mut errs = Vec::new();
        for n in [24usize, 48, 96] {
            let grid = Grid3::cube(-0.9, 0.9, n).unwrap();
            let h = DiscreteHamiltonian::assemble(&grid, &sys.inverse_mass, &sys.potential, 1)
                .unwrap();
            let psi = sample_expr(&grid, &we, support);
            assert!(psi.is_interior_supported(), "n = {n}");
            let got = h.apply(&psi).unwrap();
            let want = sample_expr(&grid, &hpsi_expr, support);
            let mut err2 = 0.0;
            for idx in 0..grid.len() {
                err2 += (got.data[idx] - want.data[idx]).norm_sqr();
            }
            errs.push((grid.cell_volume() * err2).sqrt());
        }
        assert!(
            errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5,
            "ratios {:.2} {:.2}",
            errs[0] / errs[1],
            errs[1] / errs[2]
        );
    }

    #[test]
    fn rotation_generator_annihilates_radial_fields() {
        // M21 on a radially symmetric field vanishes up to the O(h^4)
        // stencil error; check the size and the decay order
        let sys = catalog::get_system(1).unwrap();
        let m21 = sys.generator("M21").unwrap();
        let mut rel = Vec::new();
        for n in [32usize, 64] {
            let grid = Grid3::cube(-0.9, 0.9, n).unwrap();
            let dg = DiscreteGenerator::assemble(&grid, m21, 0.0).unwrap();
            // radial bump with exact compact support
            let psi = GridField::sample(&grid, |x, y, z| {
                let s2 = (x * x + y * y + z * z) / (0.72 * 0.72);
                Complex64::new((1.0 - s2).max(0.0).powi(6), 0.0)
            });
            assert!(psi.is_interior_supported());
            let out = dg.apply(&psi, None).unwrap();
            rel.push(out.norm() / psi.norm());
        }
        assert!(rel[0] < 5e-3, "coarse leak {}", rel[0]);
        assert!(rel[0] / rel[1] > 8.0, "not 4th order: {rel:?}");
    }

    #[test]
    fn momentum_generator_matches_plane_wave() {
        // P3 psi = -k psi for psi = exp(-i k x3) * window
        let grid = Grid3::cube(-1.0, 1.0, 64).unwrap();
        let kz = 3.0;
        let window = |x: f64, y: f64, z: f64| {
            let w = |s: f64| (1.0 - (s / 0.85) * (s / 0.85)).max(0.0).powi(8);
            w(x) * w(y) * w(z)
        };
        let psi = GridField::sample(&grid, |x, y, z| {
            Complex64::from_polar(window(x, y, z), -kz * z)
        });
        let spec = GeneratorSpec::momentum("P3", 2);
        let dg = DiscreteGenerator::assemble(&grid, &spec, 0.0).unwrap();
        let out = dg.apply(&psi, None).unwrap();
        // compare against -k psi + window-derivative part, i.e. the analytic
        // derivative oracle -i d3 psi
        let mut worst = 0.0f64;
        for i in 8..56 {
            for j in 8..56 {
                for k in 8..56 {
                    let (x, y, z) = (grid.node(0, i), grid.node(1, j), grid.node(2, k));
                    let dw = {
                        let s = z / 0.85;
                        let wz = (1.0 - s * s).max(0.0);
                        let w = |u: f64| (1.0 - (u / 0.85) * (u / 0.85)).max(0.0).powi(8);
                        8.0 * wz.powi(7) * (-2.0 * s / 0.85) * w(x) * w(y)
                    };
                    let phase = Complex64::from_polar(1.0, -kz * z);
                    let want =
                        Complex64::new(0.0, -1.0) * (dw + Complex64::new(0.0, -kz) * window(x, y, z)) * phase;
                    let got = out.data[grid.idx(i, j, k)];
                    worst = worst.max((got - want).norm());
                }
            }
        }
        assert!(worst < 2e-3, "worst {worst}");
    }

    #[test]
    fn dilation_matches_analytic_euler_operator() {
        // D = x.p - 3i/2 on a Gaussian: -i x.grad - 3i/2, O(h^4) stencils
        let grid = Grid3::cube(-0.9, 0.9, 48).unwrap();
        let sys = catalog::get_system(3).unwrap();
        let mut vals = ParamValues::default();
        vals.set_real(crate::expr::Param::Nu, 0.0);
        let d = sys.generator("D+nu*t").unwrap().subst(&vals);
        let dg = DiscreteGenerator::assemble(&grid, &d, 0.0).unwrap();
        let w = 0.2;
        let psi = interior_gaussian(&grid, w);
        let out = dg.apply(&psi, None).unwrap();
        let mut worst = 0.0f64;
        for i in 6..42 {
            for j in 6..42 {
                for k in 6..42 {
                    let (x, y, z) = (grid.node(0, i), grid.node(1, j), grid.node(2, k));
                    let r2 = x * x + y * y + z * z;
                    let g = (-r2 / (2.0 * w * w)).exp();
                    let euler = -r2 / (w * w) * g;
                    let want = Complex64::new(0.0, -1.0) * (euler + 1.5 * g);
                    worst = worst.max((out.data[grid.idx(i, j, k)] - want).norm());
                }
            }
        }
        assert!(worst < 1e-3, "worst {worst}");
    }
}
