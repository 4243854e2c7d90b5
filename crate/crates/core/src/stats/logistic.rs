use crate::{Error, Real, Result};

/// 1 when the two bits agree. With female=0/male=1 and carpenter=0/nurse=1
/// this marks female carpenters and male nurses.
pub fn xnor_interaction(gender_bit: bool, occupation_bit: bool) -> u8 {
    u8::from(gender_bit == occupation_bit)
}

/// Dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DesignMatrix<T> {
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if cols == 0 {
            return Err(Error::invalid("design matrix has no columns"));
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::invalid(format!("design row {i} has {} columns, expected {cols}", r.len())));
            }
            data.extend_from_slice(r);
        }
        Ok(DesignMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn is_constant_one(&self, j: usize) -> bool {
        (0..self.rows).all(|i| self.data[i * self.cols + j] == T::one())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit<T> {
    /// One per design column, in column order.
    pub coefficients: Vec<T>,
    /// From the inverse penalised Hessian at the solution.
    pub std_errors: Vec<T>,
    pub lambda: T,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: T,
    /// Best penalised log-likelihood at the start and after every iteration.
    pub objective_trace: Vec<T>,
}

pub const MAX_ITERATIONS: usize = 100;
pub const GRADIENT_TOL: f64 = 1e-8;
pub const STEP_TOL: f64 = 1e-10;

/// log(1 + e^x) without overflow.
fn softplus<T: Real>(x: T) -> T {
    x.max(T::zero()) + (-x.abs()).exp().ln_1p()
}

fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

struct Problem<'a, T> {
    x: &'a DesignMatrix<T>,
    y: &'a [T],
    lambda: T,
    penalised: Vec<bool>,
}

impl<T: Real> Problem<'_, T> {
    fn eta(&self, beta: &[T], i: usize) -> T {
        self.x.row(i).iter().zip(beta).map(|(&a, &b)| a * b).sum()
    }

    fn penalty(&self, beta: &[T]) -> T {
        let s: T = beta
            .iter()
            .zip(&self.penalised)
            .filter(|(_, &p)| p)
            .map(|(&b, _)| b * b)
            .sum();
        self.lambda / T::lit(2.0) * s
    }

    fn objective(&self, beta: &[T]) -> T {
        let ll: T = (0..self.x.rows)
            .map(|i| {
                let e = self.eta(beta, i);
                self.y[i] * e - softplus(e)
            })
            .sum();
        ll - self.penalty(beta)
    }

    /// Gradient of the objective and the negated Hessian (X'WX + lambda P).
    fn derivatives(&self, beta: &[T]) -> (Vec<T>, Vec<T>) {
        let k = self.x.cols;
        let mut grad = vec![T::zero(); k];
        let mut hess = vec![T::zero(); k * k];
        for i in 0..self.x.rows {
            let row = self.x.row(i);
            let p = sigmoid(self.eta(beta, i));
            let w = p * (T::one() - p);
            let r = self.y[i] - p;
            for a in 0..k {
                grad[a] = grad[a] + row[a] * r;
                let wa = w * row[a];
                for b in 0..=a {
                    hess[a * k + b] = hess[a * k + b] + wa * row[b];
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                hess[b * k + a] = hess[a * k + b];
            }
            if self.penalised[a] {
                grad[a] = grad[a] - self.lambda * beta[a];
                hess[a * k + a] = hess[a * k + a] + self.lambda;
            }
        }
        (grad, hess)
    }
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
fn cholesky<T: Real>(a: &[T], k: usize) -> Result<Vec<T>> {
    let mut l = vec![T::zero(); k * k];
    // pivots this small relative to the diagonal are numerically singular
    let scale = (0..k).map(|i| a[i * k + i].abs()).fold(T::zero(), T::max);
    let tiny = scale * T::epsilon() * T::lit(1e3);
    for i in 0..k {
        for j in 0..=i {
            let s: T = (0..j).map(|m| l[i * k + m] * l[j * k + m]).sum();
            if i == j {
                let d = a[i * k + i] - s;
                if !(d > tiny) {
                    return Err(Error::Singular);
                }
                l[i * k + i] = d.sqrt();
            } else {
                l[i * k + j] = (a[i * k + j] - s) / l[j * k + j];
            }
        }
    }
    Ok(l)
}

fn cholesky_solve<T: Real>(l: &[T], k: usize, b: &[T]) -> Vec<T> {
    let mut z = b.to_vec();
    for i in 0..k {
        let s: T = (0..i).map(|m| l[i * k + m] * z[m]).sum();
        z[i] = (z[i] - s) / l[i * k + i];
    }
    for i in (0..k).rev() {
        let s: T = (i + 1..k).map(|m| l[m * k + i] * z[m]).sum();
        z[i] = (z[i] - s) / l[i * k + i];
    }
    z
}

/// Ridge-penalised logistic regression by iteratively reweighted least squares.
///
/// Maximises `loglik(beta) - lambda/2 * |beta|^2`, where columns that are
/// identically 1 (intercepts) are not penalised. Each Newton step is halved
/// until the objective does not decrease, except when the predicted gain is
/// below floating-point resolution, where the full step is taken.
pub fn logistic_fit<T: Real>(design: &DesignMatrix<T>, labels: &[T], lambda: T) -> Result<LogisticFit<T>> {
    if labels.len() != design.rows {
        return Err(Error::LengthMismatch(design.rows, labels.len()));
    }
    if design.rows < design.cols {
        return Err(Error::invalid(format!(
            "design has {} rows but {} columns",
            design.rows, design.cols
        )));
    }
    if let Some(bad) = labels.iter().find(|&&y| y != T::zero() && y != T::one()) {
        return Err(Error::invalid(format!("labels must be 0 or 1, found {bad}")));
    }
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(Error::invalid(format!("ridge strength must be finite and >= 0, got {lambda}")));
    }
    if design.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("design matrix has a non-finite entry"));
    }
    let k = design.cols;
    let problem = Problem {
        x: design,
        y: labels,
        lambda,
        penalised: (0..k).map(|j| !design.is_constant_one(j)).collect(),
    };

    let mut beta = vec![T::zero(); k];
    let mut obj = problem.objective(&beta);
    let mut trace = vec![obj];
    let (mut grad, mut hess) = problem.derivatives(&beta);
    let mut converged = false;
    let mut iterations = 0;
    let gtol = T::lit(GRADIENT_TOL);
    let stol = T::lit(STEP_TOL);
    while iterations < MAX_ITERATIONS {
        if norm(&grad) < gtol {
            converged = true;
            break;
        }
        iterations += 1;
        let l = cholesky(&hess, k)?;
        let step = cholesky_solve(&l, k, &grad);
        // half the Newton decrement predicts the gain of a full step; once it
        // is below the resolution of the summed objective, comparisons are noise
        let predicted = grad.iter().zip(&step).map(|(&g, &s)| g * s).sum::<T>() / T::lit(2.0);
        let resolution = obj.abs().max(T::one()) * T::epsilon() * T::lit(1e3);
        let mut t = T::one();
        let (next, next_obj) = loop {
            let cand: Vec<T> = beta.iter().zip(&step).map(|(&b, &s)| b + t * s).collect();
            let o = problem.objective(&cand);
            if o >= obj || predicted <= resolution || t * norm(&step) < stol {
                break (cand, o);
            }
            t = t / T::lit(2.0);
        };
        let moved = t * norm(&step);
        if next_obj >= obj || predicted <= resolution {
            beta = next;
            obj = obj.max(next_obj);
        }
        trace.push(obj);
        (grad, hess) = problem.derivatives(&beta);
        if moved < stol {
            converged = norm(&grad) < gtol;
            break;
        }
    }
    if !converged && norm(&grad) < gtol {
        converged = true;
    }
    let l = cholesky(&hess, k)?;
    let std_errors = (0..k)
        .map(|j| {
            let mut e = vec![T::zero(); k];
            e[j] = T::one();
            cholesky_solve(&l, k, &e)[j].sqrt()
        })
        .collect();
    Ok(LogisticFit {
        coefficients: beta,
        std_errors,
        lambda,
        iterations,
        converged,
        gradient_norm: norm(&grad),
        objective_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xnor_truth_table() {
        assert_eq!(xnor_interaction(false, false), 1);
        assert_eq!(xnor_interaction(true, true), 1);
        assert_eq!(xnor_interaction(true, false), 0);
        assert_eq!(xnor_interaction(false, true), 0);
    }

    #[test]
    fn symmetric_data_gives_zero_slopes() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for x in [0.0f64, 1.0, 2.0] {
            for label in [0.0, 1.0] {
                rows.push(vec![1.0, x]);
                y.push(label);
            }
        }
        let fit = logistic_fit(&DesignMatrix::from_rows(&rows).unwrap(), &y, 0.0).unwrap();
        assert!(fit.converged);
        assert!(fit.coefficients.iter().all(|b| b.abs() < 1e-12));
    }

    #[test]
    fn known_intercept_only_solution() {
        // intercept-only MLE is logit of the label mean
        let rows = vec![vec![1.0]; 4];
        let fit = logistic_fit(&DesignMatrix::from_rows(&rows).unwrap(), &[1.0, 1.0, 1.0, 0.0], 0.0).unwrap();
        assert!((fit.coefficients[0] - 3f64.ln()).abs() < 1e-10);
        assert!(fit.objective_trace.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn separable_without_ridge_is_singular_or_unconverged() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![1.0, f64::from(i)]).collect();
        let y = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let x = DesignMatrix::from_rows(&rows).unwrap();
        match logistic_fit(&x, &y, 0.0) {
            Err(Error::Singular) => {}
            Ok(fit) => assert!(!fit.converged || fit.coefficients[1] > 10.0),
            Err(e) => panic!("unexpected error {e}"),
        }
        let ridge = logistic_fit(&x, &y, 1e-2).unwrap();
        assert!(ridge.converged);
        assert!(ridge.coefficients.iter().all(|b| b.is_finite()));
    }

    #[test]
    fn collinear_columns_need_ridge() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![1.0, f64::from(i % 2), f64::from(i % 2)]).collect();
        let y: Vec<f64> = (0..8).map(|i| f64::from(u8::from(i % 3 == 0))).collect();
        let x = DesignMatrix::from_rows(&rows).unwrap();
        assert!(matches!(logistic_fit(&x, &y, 0.0), Err(Error::Singular)));
        assert!(logistic_fit(&x, &y, 1e-6).unwrap().converged);
    }

    #[test]
    fn large_sample_reaches_gradient_tolerance() {
        // near the optimum the objective gain drops below its rounding error
        let rows: Vec<Vec<f64>> = (0..20_000).map(|i| vec![1.0, f64::from(i % 7) - 3.0, f64::from(i % 2)]).collect();
        let y: Vec<f64> = (0..20_000u32).map(|i| f64::from(u8::from((i * 7919) % 13 < 5 + i % 7))).collect();
        let fit = logistic_fit(&DesignMatrix::from_rows(&rows).unwrap(), &y, 1e-6).unwrap();
        assert!(fit.converged, "{fit:?}");
        assert!(fit.gradient_norm < GRADIENT_TOL);
    }

    #[test]
    fn rejects_bad_labels() {
        let x = DesignMatrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        assert!(logistic_fit(&x, &[0.0, 0.5], 0.0).is_err());
        assert!(logistic_fit(&x, &[0.0], 0.0).is_err());
    }
}
