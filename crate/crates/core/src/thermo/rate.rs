use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::CylinderPotential;

use super::measure::MarkovMeasure;
use super::pressure::PressureCurve;
use super::variance::prepare_observable;

/// Default constant in the domain bound `c sigma^4 / ||psi||^3`.
pub const DEFAULT_DOMAIN_CONSTANT: f64 = 0.5;
pub const CURVATURE_TOLERANCE: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFunction {
    /// `(s, I(s))` samples.
    pub points: Vec<(f64, f64)>,
    pub sigma2: f64,
    pub domain_bound: f64,
    pub i_at_zero: f64,
    pub slope_at_zero: f64,
    /// Quadratic-fit curvature at 0, compared with `1 / sigma^2`.
    pub curvature_at_zero: f64,
    /// `1/(2 sigma^2) <= I'' <= 2/sigma^2` on the domain.
    pub curvature_bracket_holds: bool,
    pub curvature_matches: bool,
    #[serde(skip)]
    legendre: Legendre,
}

/// Discrete Legendre transform of sampled log-moment data.
#[derive(Clone, Debug, PartialEq)]
pub struct Legendre {
    ts: Vec<f64>,
    lambda: Vec<f64>,
}

impl Legendre {
    /// `Lambda(t) = P(t) - P(0)` from a pressure curve that contains `t = 0`.
    pub fn from_curve(curve: &PressureCurve) -> Result<Self> {
        const OP: &str = "rate_function";
        if !curve.convex {
            return Err(Error::precondition(
                OP,
                format!(
                    "pressure samples not convex (min second difference {:e})",
                    curve.min_second_difference
                ),
            ));
        }
        let pts: Vec<(f64, f64)> = curve.valid().collect();
        let p0 = pts
            .iter()
            .find(|(t, _)| t.abs() < 1e-12)
            .map(|&(_, p)| p)
            .ok_or_else(|| Error::precondition(OP, "t grid must contain 0"))?;
        if pts.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::precondition(OP, "t grid must be strictly increasing"));
        }
        Ok(Legendre {
            ts: pts.iter().map(|p| p.0).collect(),
            lambda: pts.iter().map(|p| p.1 - p0).collect(),
        })
    }

    fn best(&self, s: f64) -> usize {
        (0..self.ts.len())
            .map(|i| (i, s * self.ts[i] - self.lambda[i]))
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
            .0
    }

    /// Grid point `t` attaining the supremum at `s`.
    pub fn argmax(&self, s: f64) -> f64 {
        self.ts[self.best(s)]
    }

    /// `I(s) = sup_t (s t - Lambda(t))`, with a parabolic refinement around
    /// the best grid point.
    pub fn eval(&self, s: f64) -> f64 {
        let f = |i: usize| s * self.ts[i] - self.lambda[i];
        let best = self.best(s);
        if best == 0 || best + 1 == self.ts.len() {
            return f(best);
        }
        let (x0, x1, x2) = (self.ts[best - 1], self.ts[best], self.ts[best + 1]);
        let (y0, y1, y2) = (f(best - 1), f(best), f(best + 1));
        let d01 = (y1 - y0) / (x1 - x0);
        let d12 = (y2 - y1) / (x2 - x1);
        let a = (d12 - d01) / (x2 - x0);
        if a >= 0.0 {
            return y1;
        }
        let b = d01 - a * (x0 + x1);
        let xv = (-b / (2.0 * a)).clamp(x0, x2);
        (y0 + d01 * (xv - x0) + a * (xv - x0) * (xv - x1)).max(y1)
    }
}

/// Rate function of a centered observable from its pressure curve.
pub fn rate_function(
    curve: &PressureCurve,
    sigma2: f64,
    psi_sup: f64,
    domain_constant: f64,
    s_grid: &[f64],
) -> Result<RateFunction> {
    const OP: &str = "rate_function";
    if sigma2 <= 0.0 || psi_sup <= 0.0 {
        return Err(Error::precondition(OP, "needs sigma^2 > 0 and a nonzero observable"));
    }
    let leg = Legendre::from_curve(curve)?;
    let domain_bound = domain_constant * sigma2 * sigma2 / psi_sup.powi(3);
    let points: Vec<(f64, f64)> = s_grid.iter().map(|&s| (s, leg.eval(s))).collect();
    let i_at_zero = leg.eval(0.0);
    let d = domain_bound / 50.0;
    let slope_at_zero = (leg.eval(d) - leg.eval(-d)) / (2.0 * d);
    // Least squares fit of I(s) = a + b s + c s^2 on nine points in [-4d, 4d].
    let xs: Vec<f64> = (-4..=4).map(|k| k as f64 * d).collect();
    let ys: Vec<f64> = xs.iter().map(|&s| leg.eval(s)).collect();
    let curvature_at_zero = 2.0 * quadratic_coefficient(&xs, &ys);
    let target = 1.0 / sigma2;
    let curvature_matches = (curvature_at_zero - target).abs() <= CURVATURE_TOLERANCE * target;
    let h = domain_bound / 20.0;
    let mut curvature_bracket_holds = true;
    let mut s = -domain_bound + h;
    while s + h <= domain_bound + 1e-15 {
        let c = (leg.eval(s + h) - 2.0 * leg.eval(s) + leg.eval(s - h)) / (h * h);
        if c < 0.5 * target - 1e-6 || c > 2.0 * target + 1e-6 {
            curvature_bracket_holds = false;
        }
        s += h;
    }
    Ok(RateFunction {
        points,
        sigma2,
        domain_bound,
        i_at_zero,
        slope_at_zero,
        curvature_at_zero,
        curvature_bracket_holds,
        curvature_matches,
        legendre: leg,
    })
}

fn quadratic_coefficient(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let s = |k: i32| xs.iter().map(|x| x.powi(k)).sum::<f64>();
    let t = |k: i32| xs.iter().zip(ys).map(|(x, y)| x.powi(k) * y).sum::<f64>();
    let m = nalgebra::Matrix3::new(n, s(1), s(2), s(1), s(2), s(3), s(2), s(3), s(4));
    let rhs = nalgebra::Vector3::new(t(0), t(1), t(2));
    m.lu().solve(&rhs).map_or(f64::NAN, |v| v[2])
}

impl RateFunction {
    pub fn eval(&self, s: f64) -> f64 {
        self.legendre.eval(s)
    }

    /// Tilt parameter whose equilibrium state centers the observable at `s`.
    pub fn tilt_for(&self, s: f64) -> f64 {
        self.legendre.argmax(s)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("s,I\n");
        for (x, i) in &self.points {
            writeln!(s, "{x},{i}").unwrap();
        }
        s
    }
}

/// `log mu[psi_n >= n a]` at one horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailPoint {
    pub n: usize,
    pub log_prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactLdp {
    pub a: f64,
    pub lattice: u32,
    pub points: Vec<TailPoint>,
    /// Least-squares slope of `log mu[psi_n >= n a] + (1/2) log n` against
    /// `n` (without the correction when `a = 0`).
    pub slope: f64,
}

/// Exact upper-tail probabilities of Birkhoff sums of a lattice-valued
/// observable, by convolution over (state, sum).
pub fn exact_ldp_tails(m: &MarkovMeasure, psi: &CylinderPotential, a: f64, ns: &[usize]) -> Result<ExactLdp> {
    const OP: &str = "ldp_exact";
    let (m, psi) = prepare_observable(m, psi)?;
    let q = (1..=64u32)
        .find(|&q| {
            psi.table()
                .values()
                .all(|v| ((v * q as f64) - (v * q as f64).round()).abs() < 1e-9)
        })
        .ok_or_else(|| Error::precondition(OP, "observable is not lattice valued"))?;
    let step = |u: usize, v: usize| (psi.edge_value(u, v) * q as f64).round() as i64;
    let lo = psi.table().values().fold(f64::INFINITY, |a, &b| a.min(b)) * q as f64;
    let hi = psi.table().values().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) * q as f64;
    let (lo, hi) = (lo.round() as i64, hi.round() as i64);
    let n_max = ns.iter().copied().max().unwrap_or(0);
    if n_max == 0 {
        return Err(Error::precondition(OP, "need at least one horizon n >= 1"));
    }
    let offset = -lo.min(0) * n_max as i64;
    let width = ((hi.max(0) - lo.min(0)) * n_max as i64 + 1) as usize;
    let states = m.len();
    let mut dist = vec![vec![0.0f64; width]; states];
    for (v, d) in dist.iter_mut().enumerate() {
        d[offset as usize] = m.initial[v];
    }
    let mut points = Vec::new();
    for n in 1..=n_max {
        let mut next = vec![vec![0.0f64; width]; states];
        for (u, row) in m.rows.iter().enumerate() {
            for t in row {
                let shift = step(u, t.to);
                let target = &mut next[t.to];
                for (idx, &mass) in dist[u].iter().enumerate() {
                    if mass != 0.0 {
                        let j = idx as i64 + shift;
                        target[j as usize] += mass * t.prob;
                    }
                }
            }
        }
        dist = next;
        if ns.contains(&n) {
            let threshold = (q as f64 * n as f64 * a - 1e-9).ceil() as i64 + offset;
            let start = threshold.clamp(0, width as i64) as usize;
            let mass =
                crate::linalg::pairwise_sum(&dist.iter().flat_map(|d| d[start..].iter().copied()).collect::<Vec<_>>());
            points.push(TailPoint { n, log_prob: mass.ln() });
        }
    }
    let correction = if a != 0.0 { 0.5 } else { 0.0 };
    let xs: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let ys: Vec<f64> = points
        .iter()
        .map(|p| p.log_prob + correction * (p.n as f64).ln())
        .collect();
    Ok(ExactLdp {
        a,
        lattice: q,
        slope: least_squares_slope(&xs, &ys),
        points,
    })
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Domain check shared by the empirical and exact LDP routes.
pub fn check_ldp_domain(rate: &RateFunction, a: f64) -> Result<()> {
    if a < 0.0 || a >= rate.domain_bound {
        return Err(Error::precondition(
            "ldp",
            format!(
                "a = {a} outside the domain [0, {}) of the rate function",
                rate.domain_bound
            ),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families;
    use crate::thermo::measure::parry_measure;
    use crate::thermo::pressure::{linspace, pressure_curve};

    fn binary(s: f64) -> f64 {
        std::f64::consts::LN_2 + (0.5 + s) * (0.5 + s).ln() + (0.5 - s) * (0.5 - s).ln()
    }

    #[test]
    fn binary_entropy_rate() {
        let g = families::full_shift(2);
        let psi = CylinderPotential::symbolwise(&g, &[0.5, -0.5]).unwrap();
        let curve = pressure_curve(&g, &CylinderPotential::zero(&g), &psi, &linspace(-3.0, 3.0, 6000)).unwrap();
        let rate = rate_function(&curve, 0.25, 0.5, DEFAULT_DOMAIN_CONSTANT, &linspace(-0.24, 0.24, 48)).unwrap();
        for &(s, i) in &rate.points {
            assert!((i - binary(s)).abs() < 1e-6, "s = {s}");
        }
        assert!(rate.i_at_zero.abs() < 1e-12);
        assert!(rate.slope_at_zero.abs() < 1e-6);
        assert!(rate.curvature_matches && rate.curvature_bracket_holds);
        assert!((binary(0.2) - 0.0823).abs() < 1e-4);
    }

    #[test]
    fn exact_tails_of_fair_coin() {
        let g = families::full_shift(2);
        let m = parry_measure(&g).unwrap();
        let psi = CylinderPotential::symbolwise(&g, &[0.5, -0.5]).unwrap();
        let ns: Vec<usize> = (1..=16).map(|k| 64 * k).collect();
        let ldp = exact_ldp_tails(&m, &psi, 0.2, &ns).unwrap();
        assert_eq!(ldp.lattice, 2);
        assert!((ldp.slope + binary(0.2)).abs() < 0.1 * binary(0.2));
        let zero = exact_ldp_tails(&m, &psi, 0.0, &ns).unwrap();
        assert!(zero.slope.abs() < 1e-3);
    }
}
