//! Loop and first-return loop counts at a base vertex, and the entropy and
//! convergence-radius estimates derived from them.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{component_containing, period, BouquetRule, DirectedGraph, GraphOrigin, Radius};

pub const DEFAULT_HORIZON: usize = 64;

/// Natural logarithm of a big integer (`-inf` for zero).
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit head");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln(a / b)` computed from a 64-bit-accurate quotient, so exact ratios
/// such as 2 give exactly `ln 2`.
pub fn ln_ratio(a: &BigUint, b: &BigUint) -> f64 {
    if a.is_zero() {
        return f64::NEG_INFINITY;
    }
    if b.is_zero() {
        return f64::INFINITY;
    }
    let shift = 64 + b.bits().saturating_sub(a.bits());
    let q = (a << shift) / b;
    if shift < 1000 && q.bits() < 1000 {
        let ratio = q.to_f64().expect("fits in f64") / 2f64.powi(shift as i32);
        return ratio.ln();
    }
    ln_big(&q) - shift as f64 * std::f64::consts::LN_2
}

/// Loop counts `Z_1..Z_N` and first-return counts `Z*_1..Z*_N` at `base`.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopCensus {
    pub base: usize,
    pub horizon: usize,
    /// `z[n-1] = Z_n`.
    pub z: Vec<BigUint>,
    /// `zstar[n-1] = Z*_n`.
    pub zstar: Vec<BigUint>,
    pub exact: bool,
    /// Period of the component of `base`.
    pub period: usize,
    /// Set when the graph minus `base` has no cycle inside the component,
    /// so `Z*_n = 0` for every `n` beyond the recorded value.
    pub zstar_support_bound: Option<usize>,
    /// Closed-form family the counts come from, when known.
    pub rule: Option<BouquetRule>,
}

impl LoopCensus {
    pub fn z_at(&self, n: usize) -> &BigUint {
        &self.z[n - 1]
    }

    pub fn zstar_at(&self, n: usize) -> &BigUint {
        &self.zstar[n - 1]
    }

    /// Check `Z_n = Z*_n + sum_{k<n} Z*_k Z_{n-k}` for every `n`.
    pub fn renewal_holds(&self) -> bool {
        (1..=self.horizon).all(|n| {
            let mut rhs = self.zstar[n - 1].clone();
            for k in 1..n {
                rhs += &self.zstar[k - 1] * &self.z[n - k - 1];
            }
            rhs == self.z[n - 1]
        })
    }

    /// `n,Z,Zstar` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,Z,Zstar\n");
        for n in 1..=self.horizon {
            writeln!(s, "{n},{},{}", self.z[n - 1], self.zstar[n - 1]).unwrap();
        }
        s
    }

    /// `Z*_n` has finite support (certified), so `R_a = +inf`.
    pub fn zstar_finite_support(&self) -> bool {
        self.zstar_support_bound.is_some()
    }
}

/// `Z` from `Z*` by the renewal recursion.
fn renewal(zstar: &[BigUint]) -> Vec<BigUint> {
    let mut z: Vec<BigUint> = Vec::with_capacity(zstar.len());
    for n in 1..=zstar.len() {
        let mut v = zstar[n - 1].clone();
        for k in 1..n {
            v += &zstar[k - 1] * &z[n - k - 1];
        }
        z.push(v);
    }
    z
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Exact loop counts at `a`.
///
/// `Z_n = (A^n)_{aa}` by repeated vector-matrix products over big integers;
/// `Z*_n` by the taboo recursion that forbids `a` at interior positions.
pub fn count_loops(g: &DirectedGraph, a: usize, horizon: usize) -> Result<LoopCensus> {
    const OP: &str = "count_loops";
    if horizon == 0 {
        return Err(Error::precondition(OP, "horizon must be at least 1"));
    }
    let comp = component_containing(g, a, OP)?;
    let p = period(g, &comp)?;
    let sub = g.induced(&comp.vertices);
    let base = comp.vertices.binary_search(&a).expect("base lies in its component");
    let n = sub.len();

    let step = |x: &[BigUint], taboo: bool| -> Vec<BigUint> {
        let pull = |v: usize| -> BigUint {
            if taboo && v == base {
                return BigUint::zero();
            }
            let mut acc = BigUint::zero();
            for &u in sub.predecessors(v) {
                if !x[u].is_zero() {
                    acc += &x[u] * sub.multiplicity(u, v);
                }
            }
            acc
        };
        if n >= 4096 {
            (0..n).into_par_iter().map(pull).collect()
        } else {
            (0..n).map(pull).collect()
        }
    };

    let mut x = vec![BigUint::zero(); n];
    x[base] = BigUint::from(1u32);
    let mut z = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        x = step(&x, false);
        z.push(x[base].clone());
    }

    // v_k holds the paths of length k from a whose first k-1 steps avoid a.
    let mut zstar = Vec::with_capacity(horizon);
    let mut v = vec![BigUint::zero(); n];
    v[base] = BigUint::from(1u32);
    for k in 0..horizon {
        let next = step(&v, false);
        zstar.push(next[base].clone());
        if k + 1 < horizon {
            v = next;
            v[base] = BigUint::zero();
            if v.iter().all(Zero::is_zero) {
                zstar.resize(horizon, BigUint::zero());
                break;
            }
        }
    }

    let rest: Vec<usize> = (0..n).filter(|&v| v != base).collect();
    let zstar_support_bound = sub.is_acyclic_on(&rest).then_some(n);

    let rule = match g.origin() {
        GraphOrigin::BouquetTruncation { spec, truncation } if a == 0 && horizon <= *truncation => {
            Some(spec.rule.clone())
        }
        _ => None,
    };

    let census = LoopCensus {
        base: a,
        horizon,
        z,
        zstar,
        exact: true,
        period: p,
        zstar_support_bound,
        rule,
    };
    if !census.renewal_holds() {
        return Err(Error::degenerate(OP, "renewal identity failed"));
    }
    Ok(census)
}

/// Census of the untruncated bouquet family: `Z*_n = l_n`, `Z_n` by renewal.
pub fn bouquet_census(rule: &BouquetRule, horizon: usize) -> Result<LoopCensus> {
    if horizon == 0 {
        return Err(Error::precondition("bouquet_census", "horizon must be at least 1"));
    }
    let zstar = (1..=horizon).map(|n| rule.loops(n)).collect::<Result<Vec<_>>>()?;
    let p = zstar
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .fold(0, |acc, (i, _)| gcd(acc, i + 1));
    if p == 0 {
        return Err(Error::Acyclic { op: "bouquet_census" });
    }
    let z = renewal(&zstar);
    let zstar_support_bound = match rule {
        BouquetRule::Table { lengths } if horizon >= lengths.len() => Some(lengths.len()),
        _ => None,
    };
    Ok(LoopCensus {
        base: 0,
        horizon,
        z,
        zstar,
        exact: true,
        period: p,
        zstar_support_bound,
        rule: Some(rule.clone()),
    })
}

/// Gurevich entropy estimate with a rigorous lower envelope.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub h: f64,
    pub h_hi: f64,
    pub h_lo: f64,
    pub period: usize,
    /// `(first, last)` loop lengths used.
    pub window: (usize, usize),
    /// The upper value comes from ratio extrapolation and is not a bound.
    pub h_hi_rigorous: bool,
}

/// Estimate `h = lim (1/pn) log Z_{pn}`.
///
/// `log Z_{pn}` is superadditive in `n`, so every `(1/pn) log Z_{pn}` is a
/// lower bound and their maximum is `h_lo`. The point estimate is the
/// one-period log-ratio at the end of the window; `h_hi` adds the spread of
/// the ratios over the last half of the window.
pub fn gurevich_entropy(c: &LoopCensus, p: usize) -> Result<EntropyEstimate> {
    const OP: &str = "gurevich_entropy";
    if p == 0 || c.horizon < 4 * p {
        return Err(Error::precondition(
            OP,
            format!("horizon {} < 4p = {}", c.horizon, 4 * p),
        ));
    }
    if let Some(h) = c.rule.as_ref().and_then(BouquetRule::closed_form_entropy) {
        return Ok(EntropyEstimate {
            h,
            h_hi: h,
            h_lo: h,
            period: p,
            window: (p, c.horizon - c.horizon % p),
            h_hi_rigorous: true,
        });
    }
    let m = c.horizon / p;
    let logs: Vec<f64> = (1..=m).map(|j| ln_big(c.z_at(j * p))).collect();
    let first = match logs.iter().position(|l| l.is_finite()) {
        Some(i) => i + 1,
        None => return Err(Error::degenerate(OP, "all Z_pn vanish in the window")),
    };
    let h_lo = (first..=m)
        .map(|j| logs[j - 1] / (j * p) as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    let ratio = |j: usize| ln_ratio(c.z_at(j * p), c.z_at((j - 1) * p)) / p as f64;
    let (h, h_hi) = if m > first {
        let h = ratio(m);
        let lo = (m / 2).max(first + 1);
        let ratios: Vec<f64> = (lo..=m).map(ratio).collect();
        let spread = ratios.iter().fold(0.0f64, |a, &r| a.max((r - h).abs()));
        (h, h + spread)
    } else {
        (h_lo, h_lo)
    };
    let h = h.max(h_lo);
    Ok(EntropyEstimate {
        h,
        h_hi: h_hi.max(h),
        h_lo,
        period: p,
        window: (first * p, m * p),
        h_hi_rigorous: false,
    })
}

/// Radii of convergence of `T_a(t) = sum Z_n t^n` and `F_a(t) = sum Z*_n t^n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Radii {
    /// `r_a = exp(-h)`.
    pub r_a: f64,
    pub big_r_a: Radius,
    /// `R_a` is exact (closed form or certified finite support).
    pub big_r_exact: bool,
}

pub fn convergence_radii(c: &LoopCensus) -> Result<Radii> {
    let p = c.period.max(1);
    let h = if c.horizon >= 4 * p {
        gurevich_entropy(c, p)?.h
    } else {
        let last = ln_big(c.z_at(c.horizon));
        last / c.horizon as f64
    };
    let r_a = (-h).exp();
    if let Some(rule) = &c.rule {
        return Ok(Radii {
            r_a,
            big_r_a: rule.radius(),
            big_r_exact: true,
        });
    }
    if c.zstar_finite_support() {
        return Ok(Radii {
            r_a,
            big_r_a: Radius::Infinite,
            big_r_exact: true,
        });
    }
    let lo = (c.horizon / 2).max(1);
    let rate = (lo..=c.horizon)
        .filter(|&n| !c.zstar_at(n).is_zero())
        .map(|n| ln_big(c.zstar_at(n)) / n as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    let big_r_a = if rate.is_finite() {
        Radius::Finite((-rate).exp())
    } else {
        Radius::Infinite
    };
    Ok(Radii {
        r_a,
        big_r_a,
        big_r_exact: false,
    })
}

/// Number of admissible words `x_0 .. x_n` with `x_1, .., x_n != a`, for
/// `n = 0..=horizon`.
pub fn avoiding_word_counts(g: &DirectedGraph, a: usize, horizon: usize) -> Vec<BigUint> {
    let mut x: Vec<BigUint> = vec![BigUint::from(1u32); g.len()];
    let mut out = vec![BigUint::from(g.len())];
    for _ in 0..horizon {
        let next: Vec<BigUint> = (0..g.len())
            .map(|v| {
                if v == a {
                    return BigUint::zero();
                }
                let mut acc = BigUint::zero();
                for &u in g.predecessors(v) {
                    acc += &x[u] * g.multiplicity(u, v);
                }
                acc
            })
            .collect();
        out.push(next.iter().sum());
        x = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{families, GraphDescription};

    fn ints(v: &[BigUint]) -> Vec<u64> {
        v.iter().map(|x| x.to_u64().unwrap()).collect()
    }

    #[test]
    fn golden_mean_census() {
        let c = count_loops(&families::golden_mean(), 0, 4).unwrap();
        assert_eq!(ints(&c.z), vec![1, 2, 3, 5]);
        assert_eq!(ints(&c.zstar), vec![1, 1, 0, 0]);
        assert!(c.zstar_finite_support());
    }

    #[test]
    fn full_shift_census() {
        let c = count_loops(&families::full_shift(2), 0, 4).unwrap();
        assert_eq!(ints(&c.z), vec![1, 2, 4, 8]);
        assert_eq!(ints(&c.zstar), vec![1, 1, 1, 1]);
        assert!(!c.zstar_finite_support());
    }

    #[test]
    fn cycle_census() {
        let c = count_loops(&families::cycle(3), 0, 3).unwrap();
        assert_eq!(ints(&c.z), vec![0, 0, 1]);
        assert_eq!(ints(&c.zstar), vec![0, 0, 1]);
        assert_eq!(c.period, 3);
    }

    #[test]
    fn wandering_base_is_rejected() {
        let g = DirectedGraph::from_edges(3, &[(0, 1), (1, 1), (1, 2), (2, 1)]).unwrap();
        assert!(matches!(count_loops(&g, 0, 4), Err(Error::Wandering { vertex: 0, .. })));
    }

    #[test]
    fn entropy_examples() {
        let e = gurevich_entropy(&count_loops(&families::full_shift(2), 0, 64).unwrap(), 1).unwrap();
        assert_eq!(e.h, std::f64::consts::LN_2);
        let gm = gurevich_entropy(&count_loops(&families::golden_mean(), 0, 64).unwrap(), 1).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((gm.h - phi.ln()).abs() < 1e-6);
        assert!(gm.h_lo <= gm.h && gm.h <= gm.h_hi);
        let cy = count_loops(&families::cycle(3), 0, 12).unwrap();
        assert_eq!(gurevich_entropy(&cy, 3).unwrap().h, 0.0);
        assert!(matches!(gurevich_entropy(&cy, 4), Err(Error::Precondition { .. })));
    }

    #[test]
    fn radii_examples() {
        let gm = convergence_radii(&count_loops(&families::golden_mean(), 0, 64).unwrap()).unwrap();
        assert_eq!(gm.big_r_a, Radius::Infinite);
        assert!((gm.r_a - 2.0 / (1.0 + 5f64.sqrt())).abs() < 1e-6);
        let fs = convergence_radii(&count_loops(&families::full_shift(2), 0, 64).unwrap()).unwrap();
        assert_eq!(fs.big_r_a, Radius::Finite(1.0));
        assert!((fs.r_a - 0.5).abs() < 1e-12);
        let b = bouquet_census(&BouquetRule::CeilPow2OverNsq { m: 1 }, 64).unwrap();
        let r = convergence_radii(&b).unwrap();
        assert_eq!(r.big_r_a, Radius::Finite(0.5));
        assert!(r.big_r_exact);
    }

    #[test]
    fn truncated_bouquet_matches_family_census() {
        let rule = BouquetRule::CeilPow2OverNsq { m: 1 };
        let g = DirectedGraph::build(&GraphDescription::bouquet(rule.clone(), 12)).unwrap();
        let from_graph = count_loops(&g, 0, 12).unwrap();
        let family = bouquet_census(&rule, 12).unwrap();
        assert_eq!(from_graph.zstar, family.zstar);
        assert_eq!(from_graph.z, family.z);
        assert_eq!(from_graph.rule, Some(rule));
    }

    #[test]
    fn avoiding_words_full_shift() {
        let counts = avoiding_word_counts(&families::full_shift(2), 0, 5);
        assert_eq!(ints(&counts), vec![2, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let c = count_loops(&families::golden_mean(), 0, 3).unwrap();
        assert_eq!(c.to_csv(), "n,Z,Zstar\n1,1,1\n2,2,1\n3,3,0\n");
    }
}
