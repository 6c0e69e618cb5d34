//! Fixed-step classical RK4 with cubic Hermite dense output.

use std::io::Write;
use std::sync::Arc;

use super::{Domain, Jet1, ScalarError, ScalarFn};

/// Right-hand side `y' = f(t, y)`.
pub type Rhs = Arc<dyn Fn(f64, &[f64]) -> Result<Vec<f64>, ScalarError> + Send + Sync>;

/// Integrated trajectory on a uniform grid. Shared by every component table.
pub struct OdeSolution {
    step: f64,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    derivs: Vec<Vec<f64>>,
    rhs: Rhs,
}

impl std::fmt::Debug for OdeSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OdeSolution")
            .field("step", &self.step)
            .field("nodes", &self.times.len())
            .field("dim", &self.dim())
            .finish()
    }
}

fn call_rhs(rhs: &Rhs, t: f64, y: &[f64]) -> Result<Vec<f64>, ScalarError> {
    let f = rhs(t, y).map_err(|e| match e {
        ScalarError::SmallDenominator { what, .. } => ScalarError::NonFinite { t, what },
        other => other,
    })?;
    if f.len() != y.len() {
        return Err(ScalarError::NonFinite {
            t,
            what: format!(
                "rhs returned {} components for a {}-state",
                f.len(),
                y.len()
            ),
        });
    }
    if let Some(k) = f.iter().position(|v| !v.is_finite()) {
        return Err(ScalarError::NonFinite {
            t,
            what: format!("component {k} of the right-hand side"),
        });
    }
    Ok(f)
}

impl OdeSolution {
    /// Integrates on `[0, t_max]`. The grid is uniform with spacing
    /// `t_max / ceil(t_max / step)` so that `t_max` is a node.
    pub fn integrate(
        rhs: Rhs,
        state0: &[f64],
        t_max: f64,
        step: f64,
    ) -> Result<Arc<OdeSolution>, ScalarError> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(ScalarError::InvalidArgument(format!(
                "step must be positive, got {step}"
            )));
        }
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(ScalarError::InvalidArgument(format!(
                "t_max must be positive and finite, got {t_max}"
            )));
        }
        let nsteps = (t_max / step - 1e-9).ceil().max(1.0) as usize;
        let h = t_max / nsteps as f64;

        let mut times = Vec::with_capacity(nsteps + 1);
        let mut states = Vec::with_capacity(nsteps + 1);
        let mut derivs = Vec::with_capacity(nsteps + 1);

        let mut y = state0.to_vec();
        let mut f = call_rhs(&rhs, 0.0, &y)?;
        times.push(0.0);
        states.push(y.clone());
        derivs.push(f.clone());

        let axpy = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> {
            y.iter().zip(k).map(|(a, b)| a + s * b).collect()
        };

        for i in 0..nsteps {
            let t = i as f64 * h;
            let k1 = f;
            let k2 = call_rhs(&rhs, t + 0.5 * h, &axpy(&y, &k1, 0.5 * h))?;
            let k3 = call_rhs(&rhs, t + 0.5 * h, &axpy(&y, &k2, 0.5 * h))?;
            let k4 = call_rhs(&rhs, t + h, &axpy(&y, &k3, h))?;
            for d in 0..y.len() {
                y[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
            }
            let t1 = if i + 1 == nsteps {
                t_max
            } else {
                (i + 1) as f64 * h
            };
            f = call_rhs(&rhs, t1, &y)?;
            times.push(t1);
            states.push(y.clone());
            derivs.push(f.clone());
        }

        Ok(Arc::new(OdeSolution {
            step: h,
            times,
            states,
            derivs,
            rhs,
        }))
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn t_max(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.times
    }

    /// Stored RK4 state at node `i`.
    pub fn node_state(&self, i: usize) -> &[f64] {
        &self.states[i]
    }

    fn locate(&self, t: f64) -> Result<(usize, f64), ScalarError> {
        let t_max = self.t_max();
        if !(0.0..=t_max).contains(&t) {
            return Err(ScalarError::OutOfDomain { t, t_max });
        }
        let i = ((t / self.step).floor() as usize).min(self.times.len() - 2);
        Ok((i, (t - self.times[i]) / self.step))
    }

    /// Interpolated state at `t`, exact at grid nodes.
    pub fn state(&self, t: f64) -> Result<Vec<f64>, ScalarError> {
        let (i, s) = self.locate(t)?;
        if s == 0.0 {
            return Ok(self.states[i].clone());
        }
        if t == self.times[i + 1] {
            return Ok(self.states[i + 1].clone());
        }
        let h = self.step;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let (y0, y1) = (&self.states[i], &self.states[i + 1]);
        let (f0, f1) = (&self.derivs[i], &self.derivs[i + 1]);
        Ok((0..y0.len())
            .map(|d| h00 * y0[d] + h10 * h * f0[d] + h01 * y1[d] + h11 * h * f1[d])
            .collect())
    }

    /// State and right-hand side at `t`.
    pub fn state_and_rate(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>), ScalarError> {
        let (i, s) = self.locate(t)?;
        if s == 0.0 {
            return Ok((self.states[i].clone(), self.derivs[i].clone()));
        }
        if t == self.times[i + 1] {
            return Ok((self.states[i + 1].clone(), self.derivs[i + 1].clone()));
        }
        let y = self.state(t)?;
        let f = call_rhs(&self.rhs, t, &y)?;
        Ok((y, f))
    }

    pub fn eval_jet(&self, component: usize, t: f64) -> Result<Jet1, ScalarError> {
        let (y, f) = self.state_and_rate(t)?;
        Ok(Jet1::new(y[component], f[component]))
    }

    /// Writes the node values as CSV: `t, <name>, <name>_deriv, ...`.
    pub fn write_csv<W: Write>(&self, out: W, names: &[&str]) -> Result<(), ScalarError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        for n in names {
            header.push(n.to_string());
            header.push(format!("{n}_deriv"));
        }
        w.write_record(&header)?;
        for (k, t) in self.times.iter().enumerate() {
            let mut rec = vec![format!("{t:.17e}")];
            for d in 0..names.len().min(self.dim()) {
                rec.push(format!("{:.17e}", self.states[k][d]));
                rec.push(format!("{:.17e}", self.derivs[k][d]));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Integrates `rhs` and returns one table-backed function per state
/// component, all sharing the same trajectory.
pub fn integrate_ode(
    rhs: Rhs,
    state0: &[f64],
    t_max: f64,
    step: f64,
) -> Result<Vec<ScalarFn>, ScalarError> {
    let sol = OdeSolution::integrate(rhs, state0, t_max, step)?;
    Ok(tables(&sol))
}

pub fn tables(sol: &Arc<OdeSolution>) -> Vec<ScalarFn> {
    (0..sol.dim())
        .map(|k| ScalarFn::table(sol.clone(), k, Domain::closed(sol.t_max())))
        .collect()
}
