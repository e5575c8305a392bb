use crate::error::{Error, Result};

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check(s: usize, n: usize, x: f64) -> Result<()> {
    if s > n {
        return Err(Error::invalid(format!("basis index {s} exceeds degree {n}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("abscissa {x} outside [0, 1]")));
    }
    Ok(())
}

/// `b_{sN}(x) = C(N, s) x^s (1 − x)^{N−s}`.
pub fn bernstein_b(s: usize, n: usize, x: f64) -> Result<f64> {
    check(s, n, x)?;
    Ok(binomial(n, s) * x.powi(s as i32) * (1.0 - x).powi((n - s) as i32))
}

/// Time derivative weight `β_{sN}(x)` such that
/// `d/dt Σ_s f_s b_{sN}(t/T) = Σ_s f_s β_{sN}(t/T)` with `Δt = T/N`.
pub fn bernstein_beta(s: usize, n: usize, x: f64, dt: f64) -> Result<f64> {
    check(s, n, x)?;
    if n == 0 {
        return Err(Error::invalid("Bernstein degree must be at least 1"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("time step {dt} must be positive")));
    }
    let raw = if s == 0 {
        -(1.0 - x).powi(n as i32 - 1)
    } else if s == n {
        x.powi(n as i32 - 1)
    } else {
        bernstein_b(s - 1, n - 1, x)? - bernstein_b(s, n - 1, x)?
    };
    Ok(raw / dt)
}

/// Degree-`N` Bernstein basis over `[0, T]` sampled at `t_s = s T / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernsteinBasis {
    degree: usize,
    horizon: f64,
}

impl BernsteinBasis {
    pub fn new(degree: usize, horizon: f64) -> Result<Self> {
        if degree == 0 {
            return Err(Error::invalid("Bernstein degree must be at least 1"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid("horizon must be positive"));
        }
        Ok(Self { degree, horizon })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.degree as f64
    }

    fn x(&self, t: f64) -> Result<f64> {
        let x = t / self.horizon;
        if !(-1e-12..=1.0 + 1e-12).contains(&x) {
            return Err(Error::invalid(format!("time {t} outside [0, {}]", self.horizon)));
        }
        Ok(x.clamp(0.0, 1.0))
    }

    /// `β_{sN}` at the `k`-th sample time.
    pub fn beta_at_sample(&self, s: usize, k: usize) -> Result<f64> {
        bernstein_beta(s, self.degree, k as f64 / self.degree as f64, self.dt())
    }

    /// Bernstein polynomial through the `N + 1` samples, evaluated at `t`.
    pub fn value(&self, samples: &[f64], t: f64) -> Result<f64> {
        self.check_len(samples)?;
        let x = self.x(t)?;
        samples
            .iter()
            .enumerate()
            .map(|(s, f)| bernstein_b(s, self.degree, x).map(|b| b * f))
            .sum()
    }

    /// Time derivative of [`value`](Self::value).
    pub fn derivative(&self, samples: &[f64], t: f64) -> Result<f64> {
        self.check_len(samples)?;
        let x = self.x(t)?;
        let dt = self.dt();
        samples
            .iter()
            .enumerate()
            .map(|(s, f)| bernstein_beta(s, self.degree, x, dt).map(|b| b * f))
            .sum()
    }

    fn check_len(&self, samples: &[f64]) -> Result<()> {
        if samples.len() != self.degree + 1 {
            return Err(Error::invalid(format!(
                "expected {} samples, got {}",
                self.degree + 1,
                samples.len()
            )));
        }
        Ok(())
    }
}
