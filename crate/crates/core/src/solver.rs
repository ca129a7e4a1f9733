//! Numerical solutions of the loop equations at fixed meridian.

use log::{debug, warn};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::gluing::GluingSystem;
use crate::shape::{FactoredRational, Monomial, Var};

type C = Complex64;

const DEDUP: f64 = 1e-6;
const DEGENERATE: f64 = 1e-8;
/// Solutions with a coordinate outside `[1/FAR, FAR]` in modulus are taken
/// to approach an ideal point and dropped.
const FAR: f64 = 1e6;
const GAP: f64 = 1e-6;

/// Monomial with unknowns indexed `0 = w0`, `1 + c = w_c`.
#[derive(Clone, Debug)]
struct NumMono {
    coeff: f64,
    mu_e2: i64,
    exps: Vec<(usize, i32)>,
}

impl NumMono {
    fn new(m: &Monomial) -> Result<NumMono> {
        let mut exps = vec![];
        let mut mu_e2 = 0;
        for (v, e) in &m.exps {
            match v {
                Var::Wmu => mu_e2 = *e,
                Var::W0 => exps.push((0, (*e / 2) as i32)),
                Var::Wc(c) => exps.push((1 + *c as usize, (*e / 2) as i32)),
                _ => return Err(Error::BadInput(format!("unexpected variable {} in loop equation", v))),
            }
            if e % 2 != 0 {
                return Err(Error::BranchAmbiguity);
            }
        }
        Ok(NumMono {
            coeff: m.coeff.to_f64().unwrap_or(f64::NAN),
            mu_e2,
            exps,
        })
    }

    fn eval(&self, mu: C, w: &[C]) -> C {
        let mut acc = C::new(self.coeff, 0.0) * mu.powi((self.mu_e2 / 2) as i32);
        for (i, e) in &self.exps {
            acc *= w[*i].powi(*e);
        }
        acc
    }
}

/// `lead * prod (1 - m_i)^{p_i}` in numeric form.
#[derive(Clone, Debug)]
struct NumRational {
    lead: NumMono,
    factors: Vec<(NumMono, i32)>,
}

impl NumRational {
    fn new(f: &FactoredRational) -> Result<Self> {
        Ok(NumRational {
            lead: NumMono::new(&f.lead)?,
            factors: f
                .factors
                .iter()
                .map(|(m, e)| Ok((NumMono::new(m)?, *e as i32)))
                .collect::<Result<_>>()?,
        })
    }

    fn eval(&self, mu: C, w: &[C]) -> C {
        let mut acc = self.lead.eval(mu, w);
        for (m, e) in &self.factors {
            acc *= (C::new(1.0, 0.0) - m.eval(mu, w)).powi(*e);
        }
        acc
    }

    /// Value and gradient in `u = log w`.
    fn eval_grad(&self, mu: C, w: &[C]) -> (C, Vec<C>) {
        let val = self.eval(mu, w);
        let mut g = vec![C::new(0.0, 0.0); w.len()];
        for (i, e) in &self.lead.exps {
            g[*i] += *e as f64;
        }
        for (m, p) in &self.factors {
            let mv = m.eval(mu, w);
            let r = -mv / (C::new(1.0, 0.0) - mv) * (*p as f64);
            for (i, e) in &m.exps {
                g[*i] += r * *e as f64;
            }
        }
        (val, g.into_iter().map(|x| x * val).collect())
    }

    /// Smallest `|1 - m_i|`.
    fn min_gap(&self, mu: C, w: &[C]) -> f64 {
        self.factors
            .iter()
            .map(|(m, _)| (C::new(1.0, 0.0) - m.eval(mu, w)).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug)]
pub struct GluingSolution {
    pub w_mu: C,
    /// `(w0, w_0, ..., w_{c-1})` in this order.
    pub point: Vec<C>,
    /// `|L_c - 1|` for each crossing, then `|L_0 - 1|`.
    pub residuals: Vec<f64>,
    pub w_lambda: C,
    pub s_value: C,
    /// `|s^2 w_lambda L_0 - 1|`.
    pub s_identity: f64,
    /// Distance to the degenerate locus: smallest `|w|`, `|1 - w|` and
    /// `|1 - m|` over binomial factors.
    pub min_gap: f64,
}

fn cjson(z: C) -> Value {
    json!([z.re, z.im])
}

impl GluingSolution {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        let mut names = vec!["w0".to_string()];
        names.extend((0..self.point.len() - 1).map(|c| format!("w[{}]", c)));
        json!({
            "w_mu": cjson(self.w_mu),
            "point": names.iter().zip(&self.point).map(|(n, z)| (n.clone(), cjson(*z))).collect::<serde_json::Map<_, _>>(),
            "residuals": self.residuals,
            "w_lambda": cjson(self.w_lambda),
            "s": cjson(self.s_value),
            "s_identity": self.s_identity,
            "min_gap": self.min_gap,
        })
    }
}

/// Compiled loop equations of a diagram.
pub struct Solver {
    eqs: Vec<NumRational>,
    w_lambda: NumRational,
    sqrt_s: NumRational,
    loop_zero: NumRational,
    dim: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub n_starts: usize,
    pub tol: f64,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            n_starts: 40,
            tol: 1e-10,
            seed: 0,
            max_iter: 100,
        }
    }
}

fn norm_inf(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Gaussian elimination with partial pivoting.
fn solve_linear(mut a: Vec<Vec<C>>, mut b: Vec<C>) -> Option<Vec<C>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|i, j| a[*i][c].norm().total_cmp(&a[*j][c].norm()))?;
        if a[p][c].norm() < 1e-300 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f.norm() == 0.0 {
                continue;
            }
            for k in c..n {
                let t = a[c][k];
                a[r][k] -= f * t;
            }
            let t = b[c];
            b[r] -= f * t;
        }
    }
    let mut x = vec![C::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for k in r + 1..n {
            s -= a[r][k] * x[k];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}

impl Solver {
    pub fn new(d: &Diagram) -> Result<Solver> {
        let g = GluingSystem::build(d)?;
        let mut eqs: Vec<NumRational> = g.loops.iter().map(NumRational::new).collect::<Result<_>>()?;
        let loop_zero = NumRational::new(&g.loop_zero)?;
        eqs.push(loop_zero.clone());
        Ok(Solver {
            dim: d.num_crossings() + 1,
            eqs,
            w_lambda: NumRational::new(&g.w_lambda)?,
            sqrt_s: NumRational::new(&g.sqrt_s)?,
            loop_zero,
        })
    }

    fn residual(&self, mu: C, w: &[C]) -> Vec<C> {
        self.eqs.iter().map(|e| e.eval(mu, w) - 1.0).collect()
    }

    /// Damped Newton in log coordinates from one start.
    fn newton(&self, mu: C, start: Vec<C>, max_iter: usize) -> Option<Vec<C>> {
        let mut u: Vec<C> = start.iter().map(|w| w.ln()).collect();
        let w_of = |u: &[C]| u.iter().map(|x| x.exp()).collect::<Vec<_>>();
        let mut w = w_of(&u);
        let mut f = self.residual(mu, &w);
        let mut fn0 = norm_inf(&f);
        for _ in 0..max_iter {
            if !fn0.is_finite() {
                return None;
            }
            if fn0 < 1e-12 {
                break;
            }
            let jac: Vec<Vec<C>> = self.eqs.iter().map(|e| e.eval_grad(mu, &w).1).collect();
            let step = solve_linear(jac, f.iter().map(|x| -x).collect())?;
            let mut t = 1.0;
            loop {
                let un: Vec<C> = u.iter().zip(&step).map(|(a, b)| a + b * t).collect();
                let wn = w_of(&un);
                let fnew = self.residual(mu, &wn);
                let nn = norm_inf(&fnew);
                if nn.is_finite() && (nn < fn0 || t < 1e-3) {
                    u = un;
                    w = wn;
                    f = fnew;
                    fn0 = nn;
                    break;
                }
                t *= 0.5;
            }
            if norm_inf(&step) * t < 1e-14 {
                break;
            }
        }
        Some(w)
    }

    pub fn solve_at(&self, w_mu: C, opts: SolveOptions) -> Result<Vec<GluingSolution>> {
        if w_mu.norm() < DEGENERATE || (w_mu - 1.0).norm() < DEGENERATE {
            return Err(Error::BadInput("w_mu must avoid 0 and 1".into()));
        }
        if !(opts.tol > 0.0) {
            return Err(Error::BadInput("tolerance must be positive".into()));
        }
        let mut mu = w_mu;
        if (1..=12).any(|k| (mu.powi(k) - 1.0).norm() < 1e-10) {
            warn!("w_mu = {} is close to a root of unity; perturbed", mu);
            mu *= C::from_polar(1.0, 1e-8);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut found: Vec<GluingSolution> = vec![];
        for _ in 0..opts.n_starts {
            let start: Vec<C> = (0..self.dim)
                .map(|_| C::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU)))
                .collect();
            let Some(w) = self.newton(mu, start, opts.max_iter) else {
                continue;
            };
            let residuals: Vec<f64> = self.residual(mu, &w).iter().map(|x| x.norm()).collect();
            if !(residuals.iter().all(|r| *r < opts.tol)) {
                continue;
            }
            let min_gap = w
                .iter()
                .flat_map(|z| [z.norm(), (z - 1.0).norm()])
                .chain(self.eqs.iter().map(|e| e.min_gap(mu, &w)))
                .fold(f64::INFINITY, f64::min);
            if min_gap < GAP || w.iter().any(|z| z.norm() > FAR || z.norm() < 1.0 / FAR) {
                debug!("degenerate solution skipped");
                continue;
            }
            if found.iter().any(|s| s.point.iter().zip(&w).all(|(a, b)| (a - b).norm() < DEDUP)) {
                continue;
            }
            let w_lambda = self.w_lambda.eval(mu, &w);
            let s_value = self.sqrt_s.eval(mu, &w);
            let l0 = self.loop_zero.eval(mu, &w);
            found.push(GluingSolution {
                w_mu: mu,
                s_identity: (s_value * s_value * w_lambda * l0 - 1.0).norm(),
                min_gap,
                point: w,
                residuals,
                w_lambda,
                s_value,
            });
        }
        if found.is_empty() {
            return Err(Error::NoConvergence);
        }
        found.sort_by(|a, b| {
            let key = |s: &GluingSolution| s.point.iter().flat_map(|z| [z.re, z.im]).collect::<Vec<_>>();
            key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal)
        });
        Ok(found)
    }
}

pub fn solve_at(d: &Diagram, w_mu: C, opts: SolveOptions) -> Result<Vec<GluingSolution>> {
    Solver::new(d)?.solve_at(w_mu, opts)
}

#[derive(Clone, Debug)]
pub struct CurvePoint {
    pub w_mu: C,
    pub w_lambda: C,
    pub residual: f64,
    pub branch: usize,
}

impl CurvePoint {
    pub fn to_json(&self) -> Value {
        json!({
            "w_mu": cjson(self.w_mu),
            "w_lambda": cjson(self.w_lambda),
            "residual": self.residual,
            "branch": self.branch,
        })
    }
}

/// Peripheral pairs over a grid, with branch ids by nearest-neighbour
/// matching against the previous grid point.
pub fn sample_curve(d: &Diagram, grid: &[C], opts: SolveOptions) -> Result<Vec<CurvePoint>> {
    if grid.is_empty() {
        return Err(Error::BadInput("empty grid".into()));
    }
    let solver = Solver::new(d)?;
    let mut out = vec![];
    let mut prev: Vec<(usize, C)> = vec![];
    let mut next_branch = 0;
    for &mu in grid {
        let sols = match solver.solve_at(mu, opts) {
            Ok(s) => s,
            Err(Error::NoConvergence) => {
                warn!("no solution at w_mu = {}", mu);
                continue;
            }
            Err(e) => return Err(e),
        };
        let mut taken = vec![false; prev.len()];
        let mut cur = vec![];
        for s in sols {
            let best = prev
                .iter()
                .enumerate()
                .filter(|(i, _)| !taken[*i])
                .min_by(|a, b| (a.1 .1 - s.w_lambda).norm().total_cmp(&(b.1 .1 - s.w_lambda).norm()));
            let branch = match best {
                Some((i, (b, _))) => {
                    taken[i] = true;
                    *b
                }
                None => {
                    next_branch += 1;
                    next_branch - 1
                }
            };
            cur.push((branch, s.w_lambda));
            out.push(CurvePoint {
                w_mu: s.w_mu,
                w_lambda: s.w_lambda,
                residual: s.max_residual(),
                branch,
            });
        }
        prev = cur;
    }
    Ok(out)
}

/// `count` points on the unit circle, offset away from roots of unity.
pub fn unit_circle_grid(count: usize) -> Vec<C> {
    (0..count)
        .map(|k| C::from_polar(1.0, std::f64::consts::TAU * (k as f64 + 0.37) / count as f64))
        .collect()
}
