//! Closed catalog of convex, continuously differentiable potentials
//! `Phi: R^n -> R` with analytic gradients, known minimum value, and (when
//! available) an explicit description of the minimizing set.
//!
//! Every entry keeps its gradient globally Lipschitz; non-smooth potentials
//! (subdifferentials, proximal steps) are out of scope.

use nalgebra::SymmetricEigen;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Relative tolerance for the first-order optimality check at the stored
/// witness.
pub const WITNESS_GRADIENT_TOL: f64 = 1e-9;
/// Eigenvalues of the curvature matrix may be this negative before the spec
/// is rejected as non-convex.
pub const PSD_TOL: f64 = 1e-12;

const RANK_REL_TOL: f64 = 1e-10;
const DESCENT_GRAD_TOL: f64 = 1e-12;
const DESCENT_MAX_ITERS: usize = 5_000_000;

/// Affine subspace `base + span(basis)` with an orthonormal basis. Describes
/// a non-singleton minimizing set.
#[derive(Debug, Clone)]
pub struct AffineSet {
    pub base: Vector,
    pub basis: Vec<Vector>,
}

impl AffineSet {
    /// Euclidean projection of `x` onto the subspace.
    pub fn project(&self, x: &Vector) -> Vector {
        let d = x - &self.base;
        let mut p = self.base.clone();
        for b in &self.basis {
            p += b * d.dot(b);
        }
        p
    }

    pub fn distance(&self, x: &Vector) -> f64 {
        (x - self.project(x)).norm()
    }
}

#[derive(Debug, Clone)]
pub enum PotentialKind {
    /// `Phi(x) = 1/2 <x, A x> - <b, x>` with `A` symmetric PSD.
    Quadratic { a: Matrix, b: Vector },
    /// `Phi(x) = 1/2 |M x - y|^2`.
    LeastSquares { m: Matrix, y: Vector },
    /// `Phi(x) = log sum_i exp(<a_i, x> + b_i)` (rows `a_i`, offsets `b_i`).
    LogSumExp { rows: Matrix, offsets: Vector },
    /// Coordinate-wise Huber smoothing of `|x - c|_1` with transition at
    /// `delta`.
    Huber { delta: f64, center: Vector },
    /// `Phi = 0`.
    Zero,
}

/// A convex potential with analytic value/gradient, its minimum value, and an
/// argmin description used by anchored diagnostics.
#[derive(Debug, Clone)]
pub struct PotentialSpec {
    kind: PotentialKind,
    dim: usize,
    min_value: f64,
    argmin_witness: Option<Vector>,
    argmin_affine: Option<AffineSet>,
}

impl PotentialSpec {
    pub fn quadratic(a: Matrix, b: Vector) -> Result<Self> {
        let n = b.len();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.nrows(),
            });
        }
        let scale = a.amax().max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidSpec(format!(
                        "quadratic matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let sym = 0.5 * (&a + a.transpose());
        let eig = SymmetricEigen::new(sym.clone());
        let lambda_max = eig.eigenvalues.amax().max(1.0);
        let mut kernel = Vec::new();
        let mut witness = Vector::zeros(n);
        for (i, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam < -PSD_TOL * lambda_max {
                return Err(Error::InvalidSpec(format!(
                    "quadratic matrix has negative eigenvalue {lam:.3e}"
                )));
            }
            let u: Vector = eig.eigenvectors.column(i).into();
            if lam <= RANK_REL_TOL * lambda_max {
                // Flat direction: b must have no component along it, otherwise
                // the potential is unbounded below.
                if b.dot(&u).abs() > 1e-9 * (1.0 + b.norm()) {
                    return Err(Error::InvalidSpec(
                        "quadratic potential is unbounded below (b has a kernel component)".into(),
                    ));
                }
                kernel.push(u);
            } else {
                witness += &u * (b.dot(&u) / lam);
            }
        }
        let min_value = 0.5 * witness.dot(&(&sym * &witness)) - b.dot(&witness);
        let affine = (!kernel.is_empty()).then(|| AffineSet {
            base: witness.clone(),
            basis: kernel,
        });
        Ok(Self {
            kind: PotentialKind::Quadratic { a: sym, b },
            dim: n,
            min_value,
            argmin_witness: Some(witness),
            argmin_affine: affine,
        })
    }

    pub fn least_squares(m: Matrix, y: Vector) -> Result<Self> {
        if m.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: y.len(),
            });
        }
        let n = m.ncols();
        let gram = m.transpose() * &m;
        let eig = SymmetricEigen::new(gram);
        let lambda_max = eig.eigenvalues.amax().max(1.0);
        let mut kernel = Vec::new();
        let mut witness = Vector::zeros(n);
        let mty = m.transpose() * &y;
        for (i, &lam) in eig.eigenvalues.iter().enumerate() {
            let u: Vector = eig.eigenvectors.column(i).into();
            if lam <= RANK_REL_TOL * lambda_max {
                kernel.push(u);
            } else {
                witness += &u * (mty.dot(&u) / lam);
            }
        }
        let resid = &m * &witness - &y;
        let min_value = 0.5 * resid.norm_squared();
        let affine = (!kernel.is_empty()).then(|| AffineSet {
            base: witness.clone(),
            basis: kernel,
        });
        Ok(Self {
            kind: PotentialKind::LeastSquares { m, y },
            dim: n,
            min_value,
            argmin_witness: Some(witness),
            argmin_affine: affine,
        })
    }

    /// Builds a log-sum-exp potential. The minimum value has no closed form;
    /// it is located once here by a plain gradient-descent oracle run to
    /// gradient norm <= 1e-12, independently of any trajectory computation.
    pub fn log_sum_exp(rows: Matrix, offsets: Vector) -> Result<Self> {
        if rows.nrows() != offsets.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.nrows(),
                got: offsets.len(),
            });
        }
        let n = rows.ncols();
        let gram = rows.transpose() * &rows;
        let eig = SymmetricEigen::new(gram);
        let lambda_max = eig.eigenvalues.amax();
        let mut kernel = Vec::new();
        for (i, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam <= RANK_REL_TOL * lambda_max.max(1.0) {
                kernel.push(eig.eigenvectors.column(i).into());
            }
        }

        // Gradient descent with step 1/L; the log-sum-exp Hessian is bounded
        // by A^T A, so lambda_max is a valid Lipschitz constant.
        let lipschitz = lambda_max.max(1e-12);
        let mut x = Vector::zeros(n);
        let mut converged = false;
        let kind = PotentialKind::LogSumExp { rows, offsets };
        for _ in 0..DESCENT_MAX_ITERS {
            let g = gradient_of(&kind, &x);
            if g.norm() <= DESCENT_GRAD_TOL {
                converged = true;
                break;
            }
            x -= g / lipschitz;
        }
        if !converged {
            return Err(Error::InvalidSpec(
                "log-sum-exp potential: descent oracle did not reach the gradient tolerance \
                 (minimum may not be attained)"
                    .into(),
            ));
        }
        let min_value = value_of(&kind, &x);
        let affine = (!kernel.is_empty()).then(|| AffineSet {
            base: x.clone(),
            basis: kernel,
        });
        Ok(Self {
            kind,
            dim: n,
            min_value,
            argmin_witness: Some(x),
            argmin_affine: affine,
        })
    }

    pub fn huber(delta: f64, center: Vector) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "huber delta must be > 0, got {delta}"
            )));
        }
        let dim = center.len();
        Ok(Self {
            kind: PotentialKind::Huber {
                delta,
                center: center.clone(),
            },
            dim,
            min_value: 0.0,
            argmin_witness: Some(center),
            argmin_affine: None,
        })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpec("zero potential needs dim >= 1".into()));
        }
        let basis = (0..dim)
            .map(|i| {
                let mut e = Vector::zeros(dim);
                e[i] = 1.0;
                e
            })
            .collect();
        Ok(Self {
            kind: PotentialKind::Zero,
            dim,
            min_value: 0.0,
            argmin_witness: Some(Vector::zeros(dim)),
            argmin_affine: Some(AffineSet {
                base: Vector::zeros(dim),
                basis,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn min_value(&self) -> f64 {
        self.min_value
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn argmin_witness(&self) -> Option<&Vector> {
        self.argmin_witness.as_ref()
    }

    pub fn argmin_affine(&self) -> Option<&AffineSet> {
        self.argmin_affine.as_ref()
    }

    fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `Phi(x)`.
    pub fn value(&self, x: &Vector) -> Result<f64> {
        self.check_dim(x)?;
        Ok(value_of(&self.kind, x))
    }

    /// Analytic `grad Phi(x)`; the simulation path never uses numerical
    /// differentiation.
    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        self.check_dim(x)?;
        Ok(gradient_of(&self.kind, x))
    }

    /// Max over coordinates of the relative error between the analytic
    /// gradient and a central finite difference with the given step.
    pub fn check_gradient_fd(&self, x: &Vector, step: f64) -> Result<f64> {
        self.check_dim(x)?;
        if !(step > 0.0) {
            return Err(Error::RejectedInput(format!(
                "finite-difference step must be > 0, got {step}"
            )));
        }
        let g = gradient_of(&self.kind, x);
        let mut worst = 0.0_f64;
        let mut xp = x.clone();
        for i in 0..self.dim {
            let xi = x[i];
            xp[i] = xi + step;
            let fp = value_of(&self.kind, &xp);
            xp[i] = xi - step;
            let fm = value_of(&self.kind, &xp);
            xp[i] = xi;
            let fd = (fp - fm) / (2.0 * step);
            worst = worst.max((fd - g[i]).abs() / (1.0 + g[i].abs()));
        }
        Ok(worst)
    }

    /// First-order convexity gap `Phi(y) - Phi(x) - <grad Phi(x), y - x>`;
    /// non-negative for every catalog entry up to rounding.
    pub fn check_convexity_gap(&self, x: &Vector, y: &Vector) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        let g = gradient_of(&self.kind, x);
        Ok(value_of(&self.kind, y) - value_of(&self.kind, x) - g.dot(&(y - x)))
    }

    /// Euclidean distance from `x` to the known argmin point or affine
    /// subspace. Errors when no argmin description is stored.
    pub fn distance_to_argmin(&self, x: &Vector) -> Result<f64> {
        self.check_dim(x)?;
        if let Some(aff) = &self.argmin_affine {
            return Ok(aff.distance(x));
        }
        if let Some(w) = &self.argmin_witness {
            return Ok((x - w).norm());
        }
        Err(Error::UnsupportedQuery(
            "potential has no argmin description".into(),
        ))
    }

    /// Anchor set derived from the argmin description: the witness plus, for
    /// an affine argmin, `base +- basis` points. Deduplicated.
    pub fn auto_anchors(&self) -> Vec<Vector> {
        let mut anchors: Vec<Vector> = Vec::new();
        let push = |v: Vector, anchors: &mut Vec<Vector>| {
            let dup = anchors
                .iter()
                .any(|a| (a - &v).norm() <= 1e-12 * (1.0 + v.norm()));
            if !dup {
                anchors.push(v);
            }
        };
        if let Some(w) = &self.argmin_witness {
            push(w.clone(), &mut anchors);
        }
        if let Some(aff) = &self.argmin_affine {
            push(aff.base.clone(), &mut anchors);
            for b in &aff.basis {
                push(&aff.base + b, &mut anchors);
                push(&aff.base - b, &mut anchors);
            }
        }
        anchors
    }
}

fn value_of(kind: &PotentialKind, x: &Vector) -> f64 {
    match kind {
        PotentialKind::Quadratic { a, b } => 0.5 * x.dot(&(a * x)) - b.dot(x),
        PotentialKind::LeastSquares { m, y } => {
            let r = m * x - y;
            0.5 * r.norm_squared()
        }
        PotentialKind::LogSumExp { rows, offsets } => {
            let z = rows * x + offsets;
            let m = z.max();
            m + z.iter().map(|&zi| (zi - m).exp()).sum::<f64>().ln()
        }
        PotentialKind::Huber { delta, center } => {
            let d = *delta;
            x.iter()
                .zip(center.iter())
                .map(|(&xi, &ci)| {
                    let u = (xi - ci).abs();
                    if u <= d {
                        0.5 * u * u
                    } else {
                        d * (u - 0.5 * d)
                    }
                })
                .sum()
        }
        PotentialKind::Zero => 0.0,
    }
}

fn gradient_of(kind: &PotentialKind, x: &Vector) -> Vector {
    match kind {
        PotentialKind::Quadratic { a, b } => a * x - b,
        PotentialKind::LeastSquares { m, y } => m.transpose() * (m * x - y),
        PotentialKind::LogSumExp { rows, offsets } => {
            let z = rows * x + offsets;
            let mx = z.max();
            let mut w: Vector = z.map(|zi| (zi - mx).exp());
            w /= w.sum();
            rows.transpose() * w
        }
        PotentialKind::Huber { delta, center } => {
            let d = *delta;
            Vector::from_iterator(
                x.len(),
                x.iter()
                    .zip(center.iter())
                    .map(|(&xi, &ci)| (xi - ci).clamp(-d, d)),
            )
        }
        PotentialKind::Zero => Vector::zeros(x.len()),
    }
}

/// Deterministic pseudo-random points in `[-half_width, half_width]^dim`,
/// used by gradient/convexity validation.
pub fn sample_points(dim: usize, n: usize, half_width: f64, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            Vector::from_iterator(
                dim,
                (0..dim).map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * half_width),
            )
        })
        .collect()
}

/// The closed potential catalog exercised by validation and the bundled
/// scenarios.
pub fn catalog() -> Vec<(&'static str, PotentialSpec)> {
    vec![
        (
            "quadratic-identity-2d",
            PotentialSpec::quadratic(Matrix::identity(2, 2), Vector::zeros(2)).unwrap(),
        ),
        (
            "quadratic-1d",
            PotentialSpec::quadratic(Matrix::identity(1, 1), Vector::zeros(1)).unwrap(),
        ),
        (
            "quadratic-anisotropic-2d",
            PotentialSpec::quadratic(
                Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]),
                Vector::zeros(2),
            )
            .unwrap(),
        ),
        (
            "quadratic-degenerate-2d",
            PotentialSpec::quadratic(
                Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
                Vector::zeros(2),
            )
            .unwrap(),
        ),
        (
            "least-squares-2d",
            PotentialSpec::least_squares(
                Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]),
                Vector::from_row_slice(&[1.0, -2.0]),
            )
            .unwrap(),
        ),
        (
            "log-sum-exp-2d",
            PotentialSpec::log_sum_exp(
                Matrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]),
                Vector::from_row_slice(&[0.0, 0.3, -0.2, 0.1]),
            )
            .unwrap(),
        ),
        (
            "huber-2d",
            PotentialSpec::huber(1.0, Vector::from_row_slice(&[0.3, -0.7])).unwrap(),
        ),
        ("zero-1d", PotentialSpec::zero(1).unwrap()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec2(a: f64, b: f64) -> Vector {
        Vector::from_row_slice(&[a, b])
    }

    #[test]
    fn quadratic_identity_value_and_gradient() {
        let p = PotentialSpec::quadratic(Matrix::identity(2, 2), Vector::zeros(2)).unwrap();
        let x = vec2(3.0, 4.0);
        assert_eq!(p.value(&x).unwrap(), 12.5);
        assert_eq!(p.gradient(&x).unwrap(), x);
        assert_eq!(p.min_value(), 0.0);
    }

    #[test]
    fn zero_potential_is_flat() {
        let p = PotentialSpec::zero(3).unwrap();
        let x = Vector::from_row_slice(&[1.0, -2.0, 7.0]);
        assert_eq!(p.value(&x).unwrap(), 0.0);
        assert_eq!(p.gradient(&x).unwrap(), Vector::zeros(3));
        assert_eq!(p.distance_to_argmin(&x).unwrap(), 0.0);
    }

    #[test]
    fn log_sum_exp_symmetric_pair_at_origin() {
        // Phi(x) = log(e^x + e^-x); at 0 this is log 2. Cross-check against a
        // direct summation without the max shift.
        let p = PotentialSpec::log_sum_exp(
            Matrix::from_row_slice(2, 1, &[1.0, -1.0]),
            Vector::zeros(2),
        )
        .unwrap();
        let x = Vector::from_row_slice(&[0.0]);
        let got = p.value(&x).unwrap();
        let brute = (0.0_f64.exp() + 0.0_f64.exp()).ln();
        assert!((got - 2.0_f64.ln()).abs() < 1e-15);
        assert!((got - brute).abs() < 1e-15);
        // symmetric pair: minimum at 0 with value log 2
        assert!((p.min_value() - 2.0_f64.ln()).abs() < 1e-12);
        assert!(p.argmin_witness().unwrap().norm() < 1e-9);
    }

    #[test]
    fn huber_gradient_clamps_outside_quadratic_region() {
        let p = PotentialSpec::huber(1.0, Vector::zeros(1)).unwrap();
        let g = p.gradient(&Vector::from_row_slice(&[2.0])).unwrap();
        assert_eq!(g[0], 1.0);
        let g = p.gradient(&Vector::from_row_slice(&[-0.25])).unwrap();
        assert_eq!(g[0], -0.25);
        // value: quadratic inside, linear outside
        let v = p.value(&Vector::from_row_slice(&[2.0])).unwrap();
        assert!((v - 1.5).abs() < 1e-15);
    }

    #[test]
    fn convexity_gap_hand_example() {
        let p = PotentialSpec::quadratic(Matrix::identity(1, 1), Vector::zeros(1)).unwrap();
        let g = p
            .check_convexity_gap(
                &Vector::from_row_slice(&[1.0]),
                &Vector::from_row_slice(&[3.0]),
            )
            .unwrap();
        assert!((g - 2.0).abs() < 1e-14, "got {g}");
        // equality case y = x
        let g = p
            .check_convexity_gap(
                &Vector::from_row_slice(&[1.0]),
                &Vector::from_row_slice(&[1.0]),
            )
            .unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn gradient_fd_is_tight_on_quadratic() {
        let p = PotentialSpec::quadratic(Matrix::identity(2, 2), Vector::zeros(2)).unwrap();
        let err = p.check_gradient_fd(&vec2(3.0, 4.0), 1e-5).unwrap();
        assert!(err <= 1e-8, "fd error {err}");
    }

    #[test]
    fn gradient_fd_rejects_nonpositive_step() {
        let p = PotentialSpec::zero(1).unwrap();
        assert!(p.check_gradient_fd(&Vector::zeros(1), 0.0).is_err());
    }

    #[test]
    fn distance_to_argmin_examples() {
        let p = PotentialSpec::quadratic(Matrix::identity(2, 2), Vector::zeros(2)).unwrap();
        assert!((p.distance_to_argmin(&vec2(3.0, 4.0)).unwrap() - 5.0).abs() < 1e-14);
        assert_eq!(
            p.distance_to_argmin(p.argmin_witness().unwrap()).unwrap(),
            0.0
        );

        let degenerate = PotentialSpec::quadratic(
            Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            Vector::zeros(2),
        )
        .unwrap();
        // argmin is the x2-axis; distance is |x1|. Cross-check with an
        // explicit projection.
        let x = vec2(3.0, 4.0);
        let d = degenerate.distance_to_argmin(&x).unwrap();
        assert!((d - 3.0).abs() < 1e-12, "got {d}");
        let proj = degenerate.argmin_affine().unwrap().project(&x);
        assert!((proj - vec2(0.0, 4.0)).norm() < 1e-12);
    }

    #[test]
    fn degenerate_quadratic_exposes_affine_argmin() {
        let p = PotentialSpec::quadratic(
            Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            Vector::zeros(2),
        )
        .unwrap();
        let aff = p.argmin_affine().expect("kernel direction expected");
        assert_eq!(aff.basis.len(), 1);
        assert!((aff.basis[0].norm() - 1.0).abs() < 1e-12);
        let anchors = p.auto_anchors();
        assert!(
            anchors.len() >= 2,
            "need several anchors, got {}",
            anchors.len()
        );
    }

    #[test]
    fn quadratic_rejects_indefinite_matrix() {
        let err = PotentialSpec::quadratic(Matrix::from_row_slice(1, 1, &[-1.0]), Vector::zeros(1));
        assert!(err.is_err());
    }

    #[test]
    fn quadratic_rejects_unbounded_linear_term() {
        let err = PotentialSpec::quadratic(
            Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            vec2(0.0, 1.0),
        );
        assert!(err.is_err());
    }

    #[test]
    fn least_squares_solution_is_witness() {
        let p = PotentialSpec::least_squares(
            Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]),
            vec2(1.0, -2.0),
        )
        .unwrap();
        let w = p.argmin_witness().unwrap();
        assert!((w - vec2(1.0, -1.0)).norm() < 1e-10, "witness {w:?}");
        assert!(p.min_value().abs() < 1e-18);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let p = PotentialSpec::quadratic(Matrix::identity(2, 2), Vector::zeros(2)).unwrap();
        let bad = Vector::zeros(3);
        assert!(matches!(
            p.value(&bad),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            p.gradient(&bad),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn catalog_entries_satisfy_witness_contracts() {
        for (name, p) in catalog() {
            let w = p
                .argmin_witness()
                .unwrap_or_else(|| panic!("{name}: witness missing"));
            let g = p.gradient(w).unwrap();
            assert!(
                g.norm() <= WITNESS_GRADIENT_TOL * (1.0 + w.norm()),
                "{name}: gradient at witness {:.3e}",
                g.norm()
            );
            let v = p.value(w).unwrap();
            assert!(
                (v - p.min_value()).abs() <= 1e-10 * (1.0 + p.min_value().abs()),
                "{name}: Phi(witness) = {v}, min = {}",
                p.min_value()
            );
        }
    }

    #[test]
    fn catalog_min_value_is_lower_bound_at_random_points() {
        for (name, p) in catalog() {
            for x in sample_points(p.dim(), 100, 3.0, 0x5eed) {
                let v = p.value(&x).unwrap();
                assert!(
                    v >= p.min_value() - 1e-10,
                    "{name}: value {v} below stored min {}",
                    p.min_value()
                );
            }
        }
    }
}
