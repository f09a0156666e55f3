//! Differentiable functions consumed by the flow integrator and the
//! exponent estimator: compiled polynomials and numeric black boxes.

use std::fmt;
use std::sync::Arc;

use crate::poly::{CompiledGradient, Polynomial};

/// A real function on `R^d` with a gradient.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient_into(&self, x: &[f64], out: &mut [f64]);

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.gradient_into(x, &mut g);
        g
    }
}

impl Objective for CompiledGradient {
    fn dim(&self) -> usize {
        self.nvars()
    }

    fn value(&self, x: &[f64]) -> f64 {
        CompiledGradient::value(self, x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        CompiledGradient::gradient_into(self, x, out)
    }
}

type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Black-box objective given by callables. Without a gradient callable the
/// gradient is a central difference with step `fd_rel_step · max(‖x‖, tiny)`.
#[derive(Clone)]
pub struct BlackBox {
    name: String,
    dim: usize,
    value: ValueFn,
    grad: Option<GradFn>,
    fd_rel_step: f64,
}

impl fmt::Debug for BlackBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlackBox").field("name", &self.name).field("dim", &self.dim).finish()
    }
}

impl BlackBox {
    pub fn new(name: impl Into<String>, dim: usize, value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        BlackBox { name: name.into(), dim, value: Arc::new(value), grad: None, fd_rel_step: 1e-7 }
    }

    pub fn with_gradient(mut self, grad: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.grad = Some(Arc::new(grad));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl Objective for BlackBox {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        if let Some(g) = &self.grad {
            return g(x, out);
        }
        let scale = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        let h = self.fd_rel_step * scale;
        let mut y = x.to_vec();
        for i in 0..self.dim {
            y[i] = x[i] + h;
            let fp = (self.value)(&y);
            y[i] = x[i] - h;
            let fm = (self.value)(&y);
            y[i] = x[i];
            out[i] = (fp - fm) / (2.0 * h);
        }
    }
}

/// Haraux's C¹ function `(x²+y²)·exp(-(x²+y²)/x²)`, zero on `{x = 0}`.
///
/// Value and gradient are evaluated in log space so they stay accurate down
/// to the subnormal range.
pub fn haraux() -> BlackBox {
    BlackBox::new("haraux", 2, |p: &[f64]| {
        let (x, y) = (p[0], p[1]);
        if x == 0.0 {
            return 0.0;
        }
        let r2 = x * x + y * y;
        (r2.ln() - r2 / (x * x)).exp()
    })
    .with_gradient(|p: &[f64], out: &mut [f64]| {
        let (x, y) = (p[0], p[1]);
        if x == 0.0 {
            out[0] = 0.0;
            out[1] = 0.0;
            return;
        }
        let r2 = x * x + y * y;
        let e = (-r2 / (x * x)).exp();
        // d/dx = e·(2x + 2 r² y² / x³),  d/dy = -2 y³ e / x²
        let log_e = -r2 / (x * x);
        let gx = 2.0 * x * e + (log_e + (2.0 * r2 * y * y).ln() - 3.0 * x.abs().ln()).exp() * x.signum();
        let gy = -(log_e + (2.0 * y.abs().powi(3)).ln() - 2.0 * x.abs().ln()).exp() * y.signum();
        out[0] = gx;
        out[1] = if y == 0.0 { 0.0 } else { gy };
    })
}

/// One-dimensional flat function `exp(-1/|x|)`, zero at the origin.
pub fn de_lellis() -> BlackBox {
    BlackBox::new("delellis", 1, |p: &[f64]| {
        let x = p[0];
        if x == 0.0 {
            0.0
        } else {
            (-1.0 / x.abs()).exp()
        }
    })
    .with_gradient(|p: &[f64], out: &mut [f64]| {
        let x = p[0];
        out[0] = if x == 0.0 { 0.0 } else { x.signum() * (-1.0 / x.abs() - 2.0 * x.abs().ln()).exp() };
    })
}

/// Function handle used across modules.
#[derive(Debug, Clone)]
pub enum Function {
    Polynomial { poly: Polynomial, compiled: CompiledGradient },
    BlackBox(BlackBox),
}

impl Function {
    pub fn polynomial(poly: Polynomial) -> Self {
        let compiled = CompiledGradient::new(&poly);
        Function::Polynomial { poly, compiled }
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        match self {
            Function::Polynomial { poly, .. } => Some(poly),
            Function::BlackBox(_) => None,
        }
    }

    /// Built-in non-polynomial counterexamples by id.
    pub fn builtin(id: &str) -> Option<Function> {
        match id {
            "haraux" => Some(Function::BlackBox(haraux())),
            "delellis" | "de-lellis" => Some(Function::BlackBox(de_lellis())),
            _ => None,
        }
    }
}

impl Objective for Function {
    fn dim(&self) -> usize {
        match self {
            Function::Polynomial { compiled, .. } => compiled.nvars(),
            Function::BlackBox(b) => b.dim(),
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        match self {
            Function::Polynomial { compiled, .. } => compiled.value(x),
            Function::BlackBox(b) => b.value(x),
        }
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Function::Polynomial { compiled, .. } => compiled.gradient_into(x, out),
            Function::BlackBox(b) => b.gradient_into(x, out),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: &dyn Fn(&[f64]) -> f64, x: &[f64], i: usize) -> f64 {
        let h = 1e-6 * x[i].abs().max(1e-3);
        let mut a = x.to_vec();
        let mut b = x.to_vec();
        a[i] += h;
        b[i] -= h;
        (f(&a) - f(&b)) / (2.0 * h)
    }

    #[test]
    fn haraux_gradient_matches_finite_differences() {
        let h = haraux();
        for p in [[0.3, 0.2], [-0.5, 0.4], [0.2, -0.1], [0.7, 0.0]] {
            let g = h.gradient(&p);
            for i in 0..2 {
                let num = fd(&|q| h.value(q), &p, i);
                assert!((g[i] - num).abs() <= 1e-6 * num.abs().max(1e-8), "{p:?} {i}: {} vs {num}", g[i]);
            }
        }
        assert_eq!(h.value(&[0.0, 0.3]), 0.0);
    }

    #[test]
    fn de_lellis_gradient() {
        let d = de_lellis();
        for x in [0.3, -0.2, 0.05] {
            let g = d.gradient(&[x])[0];
            let num = fd(&|q| d.value(q), &[x], 0);
            assert!((g - num).abs() <= 1e-6 * num.abs(), "{g} vs {num}");
        }
    }

    #[test]
    fn finite_difference_fallback() {
        let b = BlackBox::new("sq", 2, |p: &[f64]| p[0] * p[0] + 3.0 * p[1]);
        let g = b.gradient(&[0.5, 0.1]);
        assert!((g[0] - 1.0).abs() < 1e-6 && (g[1] - 3.0).abs() < 1e-6);
    }
}
