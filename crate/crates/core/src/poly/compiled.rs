use super::{rat_to_f64, Polynomial};

/// `f64` snapshot of a [`Polynomial`] for repeated numeric evaluation.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    nvars: usize,
    max_deg: Vec<u32>,
    terms: Vec<(f64, Vec<u32>)>,
}

impl CompiledPoly {
    pub fn new(p: &Polynomial) -> Self {
        let nvars = p.nvars();
        CompiledPoly {
            nvars,
            max_deg: (0..nvars).map(|i| p.degree_in(i)).collect(),
            terms: p.terms().iter().map(|(e, c)| (rat_to_f64(c), e.clone())).collect(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Evaluates at `x`; panics if `x.len()` differs from the variable count.
    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nvars, "point dimension");
        if self.terms.is_empty() {
            return 0.0;
        }
        // Power table per coordinate, then one product per term.
        let powers: Vec<Vec<f64>> = x
            .iter()
            .zip(&self.max_deg)
            .map(|(&xi, &d)| {
                let mut row = Vec::with_capacity(d as usize + 1);
                let mut acc = 1.0;
                row.push(acc);
                for _ in 0..d {
                    acc *= xi;
                    row.push(acc);
                }
                row
            })
            .collect();
        let mut sum = 0.0;
        for (c, e) in &self.terms {
            let mut t = *c;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= powers[i][k as usize];
                }
            }
            sum += t;
        }
        sum
    }
}

/// Compiled value and gradient of a polynomial.
#[derive(Debug, Clone)]
pub struct CompiledGradient {
    value: CompiledPoly,
    partials: Vec<CompiledPoly>,
}

impl CompiledGradient {
    pub fn new(p: &Polynomial) -> Self {
        CompiledGradient { value: CompiledPoly::new(p), partials: p.gradient().iter().map(CompiledPoly::new).collect() }
    }

    pub fn nvars(&self) -> usize {
        self.value.nvars()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.value.eval(x)
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.partials) {
            *o = p.eval(x);
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.partials.len()];
        self.gradient_into(x, &mut g);
        g
    }
}
