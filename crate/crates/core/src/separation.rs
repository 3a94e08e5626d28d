//! Reduction of the solvable systems to one-dimensional Sturm-Liouville
//! problems, including the variable changes to oscillator and Morse normal
//! forms.
//!
//! All reductions are emitted in divergence (self-adjoint) form
//! -(p u')' + q u = lambda w u even where the source prints expanded
//! non-symmetric operators; `convention` on each problem records how the raw
//! operator eigenvalue maps onto the symbols the closed-form claims use.

use crate::catalog::{SeparationScheme, Solvability, SystemSpec};
use crate::error::{CoreError, Result};
use crate::expr::{Expr, ParamValues, Var};

fn xi() -> Expr {
    Expr::var(Var::Xi)
}

fn cnst(v: f64) -> Expr {
    Expr::constant(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    /// Finite wall: the eigenfunction is pinned to zero there.
    Wall(f64),
    /// Finite endpoint where a coefficient is singular; the discretization
    /// truncates against it cell-centered and refinement monitors the error.
    Singular(f64),
    /// Domain extends to +/- infinity; truncated adaptively.
    Infinite,
}

impl Endpoint {
    pub fn position(&self) -> Option<f64> {
        match self {
            Endpoint::Wall(x) | Endpoint::Singular(x) => Some(*x),
            Endpoint::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Dirichlet,
    Periodic,
}

/// How a raw operator eigenvalue translates into the symbol a printed claim
/// uses: claimed = scale * raw + shift.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenConvention {
    pub symbol: String,
    pub scale: f64,
    pub shift: f64,
}

impl EigenConvention {
    pub fn raw(symbol: &str) -> Self {
        EigenConvention {
            symbol: symbol.into(),
            scale: 1.0,
            shift: 0.0,
        }
    }
    pub fn new(symbol: &str, scale: f64, shift: f64) -> Self {
        EigenConvention {
            symbol: symbol.into(),
            scale,
            shift,
        }
    }
    pub fn claimed_from_raw(&self, raw: f64) -> f64 {
        self.scale * raw + self.shift
    }
    pub fn raw_from_claimed(&self, claimed: f64) -> f64 {
        (claimed - self.shift) / self.scale
    }
}

/// One-dimensional problem -(p u')' + q u = lambda w u on (a, b).
#[derive(Debug, Clone)]
pub struct SLProblem {
    pub label: String,
    pub var_name: String,
    pub p: Expr,
    pub q: Expr,
    pub w: Expr,
    pub a: Endpoint,
    pub b: Endpoint,
    pub bc: BoundaryKind,
    pub convention: EigenConvention,
}

impl SLProblem {
    pub fn p_at(&self, x: f64) -> Result<f64> {
        self.p.eval1_real(x)
    }
    pub fn q_at(&self, x: f64) -> Result<f64> {
        self.q.eval1_real(x)
    }
    pub fn w_at(&self, x: f64) -> Result<f64> {
        self.w.eval1_real(x)
    }

    /// p > 0 and w > 0 sampled over interior points of the (possibly
    /// truncated) domain.
    pub fn check_self_adjoint(&self, a: f64, b: f64, samples: usize) -> Result<()> {
        for i in 0..samples {
            let x = a + (i as f64 + 0.5) / samples as f64 * (b - a);
            let p = self.p_at(x)?;
            let w = self.w_at(x)?;
            if !(p > 0.0) || !(w > 0.0) {
                return Err(CoreError::Domain(format!(
                    "non-positive p or w at {x}: p={p}, w={w}"
                )));
            }
            self.q_at(x)?;
        }
        Ok(())
    }
}

/// Quantum numbers selecting a separated channel. Only the fields the
/// system's scheme demands are consulted.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QuantumNumbers {
    /// Spherical: orbital quantum number l >= 0 and |m| <= l.
    pub l: Option<u32>,
    pub m: Option<i32>,
    /// Cylindrical: integer angular number and real axial wavenumber.
    pub kappa_ang: Option<i32>,
    pub omega_ax: Option<f64>,
    /// Cartesian: transverse wavenumbers.
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    /// Axial wavenumber of the z-factor exp(-i k x3) in cylindrical charts.
    pub k3: Option<f64>,
}

impl QuantumNumbers {
    pub fn spherical(l: u32) -> Self {
        QuantumNumbers {
            l: Some(l),
            m: Some(0),
            ..Default::default()
        }
    }
    pub fn cylindrical(m: i32, k3: f64) -> Self {
        QuantumNumbers {
            kappa_ang: Some(m),
            k3: Some(k3),
            ..Default::default()
        }
    }
    pub fn cartesian(k1: f64, k2: f64) -> Self {
        QuantumNumbers {
            k1: Some(k1),
            k2: Some(k2),
            ..Default::default()
        }
    }
}

fn require<T: Copy>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| CoreError::Unsupported(format!("missing quantum number `{what}`")))
}

/// Spherical radial reduction of H = 1/2 p f p + V for psi = (phi(r)/r) Y_lm:
///   -(1/2 f phi')' + [f'/(2 r) + f l(l+1)/(2 r^2) + V] phi = lambda phi,
/// with lambda the raw H eigenvalue and w = 1.
fn spherical_radial(sys: &SystemSpec, vals: &ParamValues, l: u32) -> Result<SLProblem> {
    let f = sys.inverse_mass.subst(vals);
    let v = sys.potential.subst(vals);
    // rewrite f(r), V(r) as 1D expressions of xi
    let f1 = radial_profile(&f)?;
    let v1 = radial_profile(&v)?;
    let df = f1.diff(Var::Xi);
    let ll = l as f64 * (l as f64 + 1.0);
    let q = Expr::add(
        Expr::add(
            Expr::div(df, Expr::mul(cnst(2.0), xi())),
            Expr::mul(
                Expr::div(f1.clone(), Expr::mul(cnst(2.0), Expr::mul(xi(), xi()))),
                cnst(ll),
            ),
        ),
        v1,
    );
    Ok(SLProblem {
        label: format!("radial l={l}"),
        var_name: "r".into(),
        p: Expr::mul(cnst(0.5), f1),
        q,
        w: Expr::one(),
        a: Endpoint::Singular(0.0),
        b: Endpoint::Infinite,
        bc: BoundaryKind::Dirichlet,
        convention: EigenConvention::raw("H"),
    })
}

/// Substitute r -> xi in an expression that must depend on position only
/// through r.
fn radial_profile(e: &Expr) -> Result<Expr> {
    if e.depends_on(Var::Phi) || e.depends_on(Var::T) {
        return Err(CoreError::Unsupported(
            "expression is not a pure radial profile".into(),
        ));
    }
    Ok(subst_var(e, Var::R, &xi()))
}

fn subst_var(e: &Expr, from: Var, to: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Param(_) => e.clone(),
        Expr::Var(v) if *v == from => to.clone(),
        Expr::Var(_) => e.clone(),
        Expr::Add(a, b) => Expr::add(subst_var(a, from, to), subst_var(b, from, to)),
        Expr::Sub(a, b) => Expr::sub(subst_var(a, from, to), subst_var(b, from, to)),
        Expr::Mul(a, b) => Expr::mul(subst_var(a, from, to), subst_var(b, from, to)),
        Expr::Div(a, b) => Expr::div(subst_var(a, from, to), subst_var(b, from, to)),
        Expr::Pow(a, b) => Expr::pow(subst_var(a, from, to), subst_var(b, from, to)),
        Expr::Neg(a) => Expr::neg(subst_var(a, from, to)),
        Expr::Exp(a) => Expr::exp(subst_var(a, from, to)),
        Expr::Log(a) => Expr::log(subst_var(a, from, to)),
        Expr::Sin(a) => Expr::sin(subst_var(a, from, to)),
        Expr::Cos(a) => Expr::cos(subst_var(a, from, to)),
        Expr::Sqrt(a) => Expr::sqrt(subst_var(a, from, to)),
    }
}

/// Reduce a system at given quantum numbers to its 1D problem(s).
pub fn reduce(
    sys: &SystemSpec,
    vals: &ParamValues,
    qn: &QuantumNumbers,
) -> Result<Vec<(String, SLProblem)>> {
    if !sys.is_solvable(vals) {
        return Err(CoreError::NotSeparable {
            id: sys.id,
            why: match sys.solvability {
                Solvability::KappaZero => "requires kappa = 0".into(),
                Solvability::SigmaLambdaZero => "requires sigma*lambda = 0".into(),
                Solvability::Always => unreachable!(),
            },
        });
    }
    match (sys.id, sys.scheme) {
        (1 | 2 | 10 | 11, SeparationScheme::Spherical) => {
            let l = require(qn.l, "l")?;
            let mut prob = spherical_radial(sys, vals, l)?;
            let mut out = Vec::new();
            if sys.id == 2 {
                // solutions blow up on the unit sphere: adjudicate on (0, 1)
                prob.b = Endpoint::Singular(1.0);
                prob.label = format!("radial l={l} inner-branch");
            }
            out.push(("radial".to_string(), prob));
            if sys.id == 10 {
                out.push((
                    "log-oscillator".to_string(),
                    log_oscillator_normal_form(vals, l)?,
                ));
            }
            Ok(out)
        }
        (3, SeparationScheme::Cartesian { .. }) => {
            let k1 = require(qn.k1, "k1")?;
            let k2 = require(qn.k2, "k2")?;
            let nu = vals.nu.ok_or(CoreError::MissingParam("nu"))?;
            let ksq = k1 * k1 + k2 * k2;
            // y = ln x3, Phi = e^{-y/2} u:
            //   -u'' + (k^2 e^{2y} + 2 nu y) u = (2E - 1/4) u
            let q = Expr::add(
                Expr::mul(cnst(ksq), Expr::exp(Expr::mul(cnst(2.0), xi()))),
                Expr::mul(cnst(2.0 * nu), xi()),
            );
            let prob = SLProblem {
                label: format!("log-coordinate k={:.6}", ksq.sqrt()),
                var_name: "y".into(),
                p: Expr::one(),
                q,
                w: Expr::one(),
                a: Endpoint::Infinite,
                b: Endpoint::Infinite,
                bc: BoundaryKind::Dirichlet,
                convention: EigenConvention::new("Etilde", 1.0, 0.0),
            };
            // raw eigenvalue is already the claimed Etilde = 2E - 1/4
            Ok(vec![("slab".to_string(), prob)])
        }
        (6, SeparationScheme::Cartesian { .. }) => {
            let k1 = require(qn.k1, "k1")?;
            let k2 = require(qn.k2, "k2")?;
            let sg = vals.sigma.ok_or(CoreError::MissingParam("sigma"))?;
            let kp = vals.kappa.ok_or(CoreError::MissingParam("kappa"))?;
            let ksq = k1 * k1 + k2 * k2;
            // -(1/2 x^{s+2} u')' + [1/2 k^2 x^{s+2} + kappa x^s] u = E u
            let pw = Expr::pow(xi(), cnst(sg + 2.0));
            let q = Expr::add(
                Expr::mul(cnst(0.5 * ksq), pw.clone()),
                Expr::mul(cnst(kp), Expr::pow(xi(), cnst(sg))),
            );
            Ok(vec![(
                "slab".to_string(),
                SLProblem {
                    label: format!("power-slab sigma={sg}"),
                    var_name: "x3".into(),
                    p: Expr::mul(cnst(0.5), pw),
                    q,
                    w: Expr::one(),
                    a: Endpoint::Singular(0.0),
                    b: Endpoint::Infinite,
                    bc: BoundaryKind::Dirichlet,
                    convention: EigenConvention::raw("E"),
                },
            )])
        }
        (5, SeparationScheme::Cartesian { .. }) => {
            // kappa = 0 (checked above): power slab along x1 with sigma = 1
            let k1 = require(qn.k1, "k1")?;
            let k2 = require(qn.k2, "k2")?;
            let lam = vals
                .lambda
                .ok_or(CoreError::MissingParam("lambda"))?;
            if lam.im != 0.0 {
                return Err(CoreError::Unsupported(
                    "imaginary lambda has no bound radial reduction here".into(),
                ));
            }
            let ksq = k1 * k1 + k2 * k2;
            let pw = Expr::pow(xi(), cnst(3.0));
            let q = Expr::add(
                Expr::mul(cnst(0.5 * ksq), pw.clone()),
                Expr::mul(cnst(lam.re), xi()),
            );
            Ok(vec![(
                "slab".to_string(),
                SLProblem {
                    label: "cubic-slab".into(),
                    var_name: "x1".into(),
                    p: Expr::mul(cnst(0.5), pw),
                    q,
                    w: Expr::one(),
                    a: Endpoint::Singular(0.0),
                    b: Endpoint::Infinite,
                    bc: BoundaryKind::Dirichlet,
                    convention: EigenConvention::raw("E"),
                },
            )])
        }
        (4 | 7, SeparationScheme::Cylindrical) => {
            // power-law cylinder f = rt^(s+2) (* e^{lambda phi} excluded by
            // the solvability gate), V = c rt^s
            let m = require(qn.kappa_ang, "kappa_ang")?;
            let k3 = require(qn.k3, "k3")?;
            let (sg, cpot) = match sys.id {
                4 => (1.0, vals.lambda.map(|z| z.re).unwrap_or(0.0)),
                _ => (
                    vals.sigma.ok_or(CoreError::MissingParam("sigma"))?,
                    vals.kappa.ok_or(CoreError::MissingParam("kappa"))?,
                ),
            };
            Ok(vec![(
                "radial".to_string(),
                cylindrical_power_radial(sg, cpot, m, k3),
            )])
        }
        (8, SeparationScheme::Cylindrical) => {
            let k3 = require(qn.k3, "k3")?;
            let lam = vals.lambda.unwrap_or_default().re;
            let mu = vals.mu.ok_or(CoreError::MissingParam("mu"))?;
            let nu = vals.nu.ok_or(CoreError::MissingParam("nu"))?;
            // angular factor: -1/2 Phi'' + (lambda^2 phi^2/2 + mu phi) Phi = c Phi
            let ang = SLProblem {
                label: "angular-oscillator".into(),
                var_name: "phi".into(),
                p: cnst(0.5),
                q: Expr::add(
                    Expr::mul(cnst(0.5 * lam * lam), Expr::mul(xi(), xi())),
                    Expr::mul(cnst(mu), xi()),
                ),
                w: Expr::one(),
                a: Endpoint::Wall(0.0),
                b: Endpoint::Wall(std::f64::consts::TAU),
                bc: BoundaryKind::Dirichlet,
                convention: EigenConvention::raw("c_sep"),
            };
            // radial factor (weight rt):
            //   -(1/2 rt^3 R')' + rt (nu ln rt + k^2 rt^2 / 2) R = (E - c) rt R
            let rad = SLProblem {
                label: "radial-log".into(),
                var_name: "rt".into(),
                p: Expr::mul(cnst(0.5), Expr::pow(xi(), cnst(3.0))),
                q: Expr::mul(
                    xi(),
                    Expr::add(
                        Expr::mul(cnst(nu), Expr::log(xi())),
                        Expr::mul(cnst(0.5 * k3 * k3), Expr::mul(xi(), xi())),
                    ),
                ),
                w: xi(),
                a: Endpoint::Singular(0.0),
                b: Endpoint::Infinite,
                bc: BoundaryKind::Dirichlet,
                convention: EigenConvention::raw("E-c_sep"),
            };
            Ok(vec![("angular".into(), ang), ("radial".into(), rad)])
        }
        (9, SeparationScheme::Cylindrical) => {
            // the role-swapped angular problem: the physical energy E sits in
            // the potential; caller passes it through omega_ax
            let e_param = require(qn.omega_ax, "omega_ax (energy parameter)")?;
            let sg = vals.sigma.ok_or(CoreError::MissingParam("sigma"))?;
            let om = vals.omega.ok_or(CoreError::MissingParam("omega"))?;
            if om.im != 0.0 {
                return Err(CoreError::Unsupported(
                    "imaginary omega not reduced here".into(),
                ));
            }
            let om = om.re;
            // -1/2 u'' + [om^2/2 e^{-2 s phi} - E e^{-s phi}] u = ehat u
            let q = Expr::sub(
                Expr::mul(
                    cnst(0.5 * om * om),
                    Expr::exp(Expr::mul(cnst(-2.0 * sg), xi())),
                ),
                Expr::mul(cnst(e_param), Expr::exp(Expr::mul(cnst(-sg), xi()))),
            );
            Ok(vec![(
                "angular".to_string(),
                SLProblem {
                    label: "angular-morse".into(),
                    var_name: "phi".into(),
                    p: cnst(0.5),
                    q,
                    w: Expr::one(),
                    a: Endpoint::Wall(0.0),
                    b: Endpoint::Wall(std::f64::consts::TAU),
                    bc: BoundaryKind::Dirichlet,
                    convention: EigenConvention::raw("Ehat"),
                },
            )])
        }
        _ => Err(CoreError::Unsupported(format!(
            "no reduction implemented for system {}",
            sys.id
        ))),
    }
}

/// Cylindrical radial problem for f = rt^(s+2), V = c rt^s with angular
/// number m and axial wavenumber k (weight rt):
///   -(1/2 rt^{s+3} R')' + rt^{s+1} [ (s+2)/2 + m^2/2 + c + k^2 rt^2/2 ] ...
fn cylindrical_power_radial(sg: f64, cpot: f64, m: i32, k3: f64) -> SLProblem {
    let mm = (m * m) as f64;
    let q = Expr::add(
        Expr::add(
            Expr::mul(cnst(0.5 * mm), Expr::pow(xi(), cnst(sg + 1.0))),
            Expr::mul(cnst(cpot), Expr::pow(xi(), cnst(sg + 1.0))),
        ),
        Expr::mul(cnst(0.5 * k3 * k3), Expr::pow(xi(), cnst(sg + 3.0))),
    );
    SLProblem {
        label: format!("power-cylinder sigma={sg} m={m}"),
        var_name: "rt".into(),
        p: Expr::mul(cnst(0.5), Expr::pow(xi(), cnst(sg + 3.0))),
        q,
        w: xi(),
        a: Endpoint::Singular(0.0),
        b: Endpoint::Infinite,
        bc: BoundaryKind::Dirichlet,
        convention: EigenConvention::raw("E"),
    }
}

/// True log-variable normal form of row 10 (y = sqrt(2) ln r):
///   -u'' + [l(l+1)/2 + nu y / sqrt(2) + lambda^2 y^2 / 4] u = (E - 9/8) u.
pub fn log_oscillator_normal_form(vals: &ParamValues, l: u32) -> Result<SLProblem> {
    let lam = vals.lambda.ok_or(CoreError::MissingParam("lambda"))?;
    let nu = vals.nu.ok_or(CoreError::MissingParam("nu"))?;
    if lam.im != 0.0 {
        return Err(CoreError::Unsupported(
            "imaginary lambda turns the log-oscillator over; numeric path only".into(),
        ));
    }
    let lam = lam.re;
    if lam == 0.0 {
        return Err(CoreError::Unsupported(
            "lambda = 0 is the free-fall sub-case; no oscillator normal form".into(),
        ));
    }
    let ll = l as f64 * (l as f64 + 1.0);
    let q = Expr::add(
        Expr::add(
            cnst(0.5 * ll),
            Expr::mul(cnst(nu / std::f64::consts::SQRT_2), xi()),
        ),
        Expr::mul(cnst(lam * lam / 4.0), Expr::mul(xi(), xi())),
    );
    Ok(SLProblem {
        label: format!("log-oscillator l={l}"),
        var_name: "y".into(),
        p: Expr::one(),
        q,
        w: Expr::one(),
        a: Endpoint::Infinite,
        b: Endpoint::Infinite,
        bc: BoundaryKind::Dirichlet,
        convention: EigenConvention::new("E", 1.0, 9.0 / 8.0),
    })
}

/// The printed log-oscillator operator (claims side):
///   -u'' + [l(l+1) + nu y + lambda^2 y^2 / 2] u = Etilde u.
pub fn log_oscillator_printed(l: u32, lambda: f64, nu: f64) -> SLProblem {
    let ll = l as f64 * (l as f64 + 1.0);
    let q = Expr::add(
        Expr::add(cnst(ll), Expr::mul(cnst(nu), xi())),
        Expr::mul(cnst(lambda * lambda / 2.0), Expr::mul(xi(), xi())),
    );
    SLProblem {
        label: format!("log-oscillator-printed l={l}"),
        var_name: "y".into(),
        p: Expr::one(),
        q,
        w: Expr::one(),
        a: Endpoint::Infinite,
        b: Endpoint::Infinite,
        bc: BoundaryKind::Dirichlet,
        convention: EigenConvention::raw("Etilde"),
    }
}

/// The power-oscillator radial family (the solvable chain behind rows 4/11):
///   -r^{2s+2} R'' - (2s+4) r^{2s+1} R' + [r^{2s}(l(l+1)+kappa)
///     + omega^2 r^{-2s}] R = lambda R,
/// written in self-adjoint form for phi = r^{s+2}... — the family is kept in
/// its normal form via [`liouville_power`]; this constructor returns the
/// divergence form of the printed operator itself (weight r^{-2s-2} after
/// symmetrization by r^{2s+2}).
pub fn power_chain_radial(l: u32, sigma: f64, kappa: f64, omega: f64) -> SLProblem {
    // symmetrize with m(r) = r^2: m'(r)/m = 2/r turns the first-order
    // coefficient (2s+4)/r of the r^{2s+2}-normalized operator into the
    // derivative of P = r^{2s+4}; then Q = r^2 * printed potential and
    // W = r^2
    let ll = l as f64 * (l as f64 + 1.0);
    let s2 = 2.0 * sigma;
    let q = Expr::add(
        Expr::mul(cnst(ll + kappa), Expr::pow(xi(), cnst(s2 + 2.0))),
        Expr::mul(cnst(omega * omega), Expr::pow(xi(), cnst(2.0 - s2))),
    );
    SLProblem {
        label: format!("power-chain l={l} sigma={sigma}"),
        var_name: "r".into(),
        p: Expr::pow(xi(), cnst(s2 + 4.0)),
        q,
        w: Expr::pow(xi(), cnst(2.0)),
        a: Endpoint::Singular(0.0),
        b: Endpoint::Infinite,
        bc: BoundaryKind::Dirichlet,
        convention: EigenConvention::raw("2E"),
    }
}

/// Liouville transform of the power-oscillator family to the deformed
/// oscillator normal form (z = r^{-sigma}):
///   -sigma^2 u'' + [(l(l+1) + delta)/z^2 + omega^2 z^2] u = lambda u,
///   delta = 3/4 (sigma+1)(sigma+3) + 2 kappa.
pub fn liouville_power(l: u32, sigma: f64, kappa: f64, omega: f64) -> Result<SLProblem> {
    if sigma == 0.0 {
        return Err(CoreError::ParamConstraint(
            "liouville transform needs sigma != 0".into(),
        ));
    }
    let delta = 0.75 * (sigma + 1.0) * (sigma + 3.0) + 2.0 * kappa;
    let ll = l as f64 * (l as f64 + 1.0);
    let q = Expr::add(
        Expr::div(cnst(ll + delta), Expr::mul(xi(), xi())),
        Expr::mul(cnst(omega * omega), Expr::mul(xi(), xi())),
    );
    Ok(SLProblem {
        label: format!("deformed-oscillator l={l} delta={delta}"),
        var_name: "z".into(),
        p: cnst(sigma * sigma),
        q,
        w: Expr::one(),
        a: Endpoint::Singular(0.0),
        b: Endpoint::Infinite,
        bc: BoundaryKind::Dirichlet,
        convention: EigenConvention::raw("2E"),
    })
}

/// delta of the deformed oscillator form.
pub fn liouville_power_delta(sigma: f64, kappa: f64) -> f64 {
    0.75 * (sigma + 1.0) * (sigma + 3.0) + 2.0 * kappa
}

/// Morse normal form from the log Liouville transform (rho = ln r):
///   -u'' + [omega^2 e^{-2 sigma rho} - (2 omega nu + omega sigma)
///           e^{-sigma rho}] u = ehat u,
/// with ehat = eps - ((sigma+3)/2)^2 relative to the radial family's eps.
/// The linear term binds; its strength (2 omega nu + omega sigma) is the
/// printed coefficient magnitude.
pub struct MorseProblem {
    pub problem: SLProblem,
    pub nu: f64,
    pub sigma: f64,
    pub omega: f64,
}

impl MorseProblem {
    /// |coefficient| of the e^{-sigma rho} well term.
    pub fn linear_strength(&self) -> f64 {
        2.0 * self.omega * self.nu + self.omega * self.sigma
    }
    /// Shift connecting ehat to the radial family's eigenvalue eps.
    pub fn eps_shift(&self) -> f64 {
        ((self.sigma + 3.0) / 2.0).powi(2)
    }
}

pub fn liouville_log(nu: f64, sigma: f64, omega: f64) -> Result<MorseProblem> {
    if omega == 0.0 {
        return Err(CoreError::ParamConstraint(
            "morse transform needs omega != 0".into(),
        ));
    }
    if sigma == 0.0 {
        return Err(CoreError::ParamConstraint(
            "morse transform needs sigma != 0".into(),
        ));
    }
    let depth = 2.0 * omega * nu + omega * sigma;
    let q = Expr::sub(
        Expr::mul(
            cnst(omega * omega),
            Expr::exp(Expr::mul(cnst(-2.0 * sigma), xi())),
        ),
        Expr::mul(cnst(depth), Expr::exp(Expr::mul(cnst(-sigma), xi()))),
    );
    Ok(MorseProblem {
        problem: SLProblem {
            label: format!("morse nu={nu} sigma={sigma}"),
            var_name: "rho".into(),
            p: Expr::one(),
            q,
            w: Expr::one(),
            a: Endpoint::Infinite,
            b: Endpoint::Infinite,
            bc: BoundaryKind::Dirichlet,
            convention: EigenConvention::new("ehat", 1.0, 0.0),
        },
        nu,
        sigma,
        omega,
    })
}
