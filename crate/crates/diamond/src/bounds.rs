//! Discrete-MAC bound evaluators: the cut-set bound, the max-min upper bound
//! with an adversarial auxiliary channel, the superposition/Marton lower
//! bound, and the rate-split LP oracle that certifies the lower-bound region
//! by direct polytope maximization.
//!
//! Soundness is asymmetric by construction: any witness found for the upper
//! bound's inner minimization yields a valid upper bound, and any coding
//! distribution yields a valid achievable rate. Only the adversarial
//! searches are heuristic.

use crate::error::{Error, Result};
use crate::measures::{entropy_slice, JointDist, Kernel};
use crate::network::{induced_joint, attach_aux, DiamondConfig, DiscreteMac};
use crate::optim::{
    ascent_from, multistart_ascent_with_seeds, simplex_grid, SearchOpts,
};
use nalgebra::{Matrix3, Vector3};
use ndarray::{ArrayD, IxDyn};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Cardinality of the auxiliary alphabet for a search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AuxCard(pub usize);

impl AuxCard {
    /// The lower-bound cardinality cap: |U| <= min{|X1||X2|+2, |Y|+4}.
    pub fn lower_bound_cap(mac: &DiscreteMac) -> usize {
        (mac.x1_size * mac.x2_size + 2).min(mac.y_size + 4)
    }
}

/// A nonnegative rate split (R12, R1, R2).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateSplit {
    pub r12: f64,
    pub r1: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchMeta {
    pub soundness: String,
    pub grid_steps: usize,
    pub multistarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl SearchMeta {
    pub(crate) fn new(soundness: &str, opts: &SearchOpts) -> Self {
        Self {
            soundness: soundness.to_string(),
            grid_steps: opts.grid_steps,
            multistarts: opts.multistarts,
            max_iters: opts.max_iters,
            tol: opts.tol,
            seed: opts.seed,
        }
    }
}

/// A bound value together with the constraint that attains it and the
/// optimizing witness, for auditability.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub value: f64,
    pub binding: String,
    pub witness: serde_json::Value,
    pub meta: SearchMeta,
}

pub const CUTSET_LABELS: [&str; 4] = [
    "C1+C2",
    "C1+I(X2;Y|X1)",
    "C2+I(X1;Y|X2)",
    "I(X1X2;Y)",
];

pub const CONSTRAINT5_LABEL: &str = "(C1+C2+I(X1X2;Y|U)+I(X1;U|X2)+I(X2;U|X1))/2";

pub const THEOREM2_LABELS: [&str; 5] = [
    "C1+C2-I(X1;X2|U)",
    "C2+I(X1;Y|X2U)",
    "C1+I(X2;Y|X1U)",
    "(C1+C2+I(X1X2;Y|U)-I(X1;X2|U))/2",
    "I(X1X2;Y)",
];

fn min_with_binding(values: &[f64]) -> (f64, usize) {
    let mut best = 0usize;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    (values[best], best)
}


fn nested_array_2d(p: &[f64], n1: usize, n2: usize) -> serde_json::Value {
    serde_json::json!((0..n1)
        .map(|i| p[i * n2..(i + 1) * n2].to_vec())
        .collect::<Vec<_>>())
}

// ---------------------------------------------------------------------------
// Cut-set bound
// ---------------------------------------------------------------------------

/// Fast evaluator for the four cut-set terms as a function of p(x1, x2).
struct CutsetEval {
    n1: usize,
    n2: usize,
    ny: usize,
    w: Vec<f64>,       // w[(x1*n2+x2)*ny + y]
    h_row: Vec<f64>,   // H(Y | x1, x2) per input pair
    c1: f64,
    c2: f64,
}

impl CutsetEval {
    fn new(mac: &DiscreteMac, cfg: &DiamondConfig) -> Self {
        let (n1, n2, ny) = (mac.x1_size, mac.x2_size, mac.y_size);
        let mut w = vec![0.0; n1 * n2 * ny];
        let mut h_row = vec![0.0; n1 * n2];
        for x1 in 0..n1 {
            for x2 in 0..n2 {
                let xi = x1 * n2 + x2;
                for y in 0..ny {
                    w[xi * ny + y] = mac.prob(x1, x2, y);
                }
                h_row[xi] = entropy_slice(&w[xi * ny..(xi + 1) * ny]);
            }
        }
        Self { n1, n2, ny, w, h_row, c1: cfg.c1, c2: cfg.c2 }
    }

    /// (C1+C2, C1+I(X2;Y|X1), C2+I(X1;Y|X2), I(X1X2;Y))
    fn terms(&self, p: &[f64]) -> [f64; 4] {
        let (n1, n2, ny) = (self.n1, self.n2, self.ny);
        let mut p_x1 = vec![0.0; n1];
        let mut p_x2 = vec![0.0; n2];
        let mut p_y = vec![0.0; ny];
        let mut p_x1y = vec![0.0; n1 * ny];
        let mut p_x2y = vec![0.0; n2 * ny];
        let mut h_y_given_x = 0.0;
        for x1 in 0..n1 {
            for x2 in 0..n2 {
                let xi = x1 * n2 + x2;
                let px = p[xi];
                if px <= 0.0 {
                    continue;
                }
                p_x1[x1] += px;
                p_x2[x2] += px;
                h_y_given_x += px * self.h_row[xi];
                for y in 0..ny {
                    let m = px * self.w[xi * ny + y];
                    p_y[y] += m;
                    p_x1y[x1 * ny + y] += m;
                    p_x2y[x2 * ny + y] += m;
                }
            }
        }
        let h_y = entropy_slice(&p_y);
        // I(X2;Y|X1) = H(Y|X1) - H(Y|X1X2)
        let h_y_given_x1 = entropy_slice(&p_x1y) - entropy_slice(&p_x1);
        let h_y_given_x2 = entropy_slice(&p_x2y) - entropy_slice(&p_x2);
        [
            self.c1 + self.c2,
            self.c1 + (h_y_given_x1 - h_y_given_x),
            self.c2 + (h_y_given_x2 - h_y_given_x),
            h_y - h_y_given_x,
        ]
    }
}

/// The four cut-set values at a fixed input distribution, in the order
/// (C1+C2, C1+I(X2;Y|X1), C2+I(X1;Y|X2), I(X1X2;Y)).
pub fn cutset_constraints(input: &JointDist, mac: &DiscreteMac, cfg: &DiamondConfig) -> Result<[f64; 4]> {
    let j = induced_joint(input, mac)?;
    Ok([
        cfg.c1 + cfg.c2,
        cfg.c1 + j.cond_mutual_info(&["x2"], &["y"], &["x1"])?,
        cfg.c2 + j.cond_mutual_info(&["x1"], &["y"], &["x2"])?,
        j.mutual_info(&["x1", "x2"], &["y"])?,
    ])
}

/// Rank grid points by value (descending), breaking ties lexicographically,
/// and return the best `k` together with the overall best value.
fn top_grid_points(grid: &[Vec<f64>], values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap()
            .then_with(|| grid[a].partial_cmp(&grid[b]).unwrap())
    });
    order.truncate(k);
    order
}

/// Max over p(x1,x2) of the min of the four cut-set constraints.
pub fn cutset_bound(mac: &DiscreteMac, cfg: &DiamondConfig, opts: &SearchOpts) -> Result<BoundReport> {
    opts.validate()?;
    let eval = CutsetEval::new(mac, cfg);
    let dim = mac.x1_size * mac.x2_size;
    let obj = move |p: &[f64]| -> f64 { eval.terms(p).into_iter().fold(f64::INFINITY, f64::min) };
    let steps = opts.grid_steps_for_dim(dim);
    let grid = simplex_grid(dim, steps);
    let values: Vec<f64> = grid.par_iter().map(|p| obj(p)).collect();
    let top = top_grid_points(&grid, &values, 4);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for &i in &top {
        let (v, p) = ascent_from(&obj, &[dim], &grid[i], opts)?;
        if best.as_ref().map_or(true, |b| v > b.0) {
            best = Some((v, p));
        }
    }
    let (value, p) = best.expect("nonempty grid");
    let eval = CutsetEval::new(mac, cfg);
    let (_, binding) = min_with_binding(&eval.terms(&p));
    Ok(BoundReport {
        value,
        binding: CUTSET_LABELS[binding].to_string(),
        witness: serde_json::json!({ "input": nested_array_2d(&p, mac.x1_size, mac.x2_size) }),
        meta: SearchMeta::new("valid upper bound (cut-set)", opts),
    })
}

// ---------------------------------------------------------------------------
// Theorem-1 upper bound
// ---------------------------------------------------------------------------

/// Fast evaluator of the fifth (auxiliary-channel) constraint for a fixed
/// input distribution, as a function of the kernel p(u|x1,x2,y).
struct Constraint5Eval {
    n1: usize,
    n2: usize,
    ny: usize,
    nu: usize,
    joint3: Vec<f64>, // p(x1,x2,y), index (x1*n2+x2)*ny + y
    h_x1: f64,
    h_x2: f64,
    h_x1x2: f64,
    csum: f64,
}

impl Constraint5Eval {
    fn new(p: &[f64], mac: &DiscreteMac, cfg: &DiamondConfig, nu: usize) -> Self {
        let (n1, n2, ny) = (mac.x1_size, mac.x2_size, mac.y_size);
        let mut joint3 = vec![0.0; n1 * n2 * ny];
        let mut p_x1 = vec![0.0; n1];
        let mut p_x2 = vec![0.0; n2];
        for x1 in 0..n1 {
            for x2 in 0..n2 {
                let xi = x1 * n2 + x2;
                p_x1[x1] += p[xi];
                p_x2[x2] += p[xi];
                for y in 0..ny {
                    joint3[xi * ny + y] = p[xi] * mac.prob(x1, x2, y);
                }
            }
        }
        Self {
            n1,
            n2,
            ny,
            nu,
            joint3,
            h_x1: entropy_slice(&p_x1),
            h_x2: entropy_slice(&p_x2),
            h_x1x2: entropy_slice(p),
            csum: cfg.c1 + cfg.c2,
        }
    }

    /// kernel access: k(combined x index, y, u) -> p(u | x1, x2, y)
    fn eval<K: Fn(usize, usize, usize) -> f64>(&self, k: K) -> f64 {
        let (n1, n2, ny, nu) = (self.n1, self.n2, self.ny, self.nu);
        let mut m_xu = vec![0.0; n1 * n2 * nu];
        let mut m_yu = vec![0.0; ny * nu];
        let mut m_u = vec![0.0; nu];
        let mut m_x1u = vec![0.0; n1 * nu];
        let mut m_x2u = vec![0.0; n2 * nu];
        let mut h_full = 0.0;
        for x1 in 0..n1 {
            for x2 in 0..n2 {
                let xi = x1 * n2 + x2;
                for y in 0..ny {
                    let p3 = self.joint3[xi * ny + y];
                    if p3 <= 0.0 {
                        continue;
                    }
                    for u in 0..nu {
                        let q = p3 * k(xi, y, u);
                        if q > 0.0 {
                            h_full -= q * q.log2();
                            m_xu[xi * nu + u] += q;
                            m_yu[y * nu + u] += q;
                            m_u[u] += q;
                            m_x1u[x1 * nu + u] += q;
                            m_x2u[x2 * nu + u] += q;
                        }
                    }
                }
            }
        }
        let h_xu = entropy_slice(&m_xu);
        let i_y = h_xu + entropy_slice(&m_yu) - h_full - entropy_slice(&m_u);
        let i1 = self.h_x1x2 + entropy_slice(&m_x2u) - h_xu - self.h_x2;
        let i2 = self.h_x1x2 + entropy_slice(&m_x1u) - h_xu - self.h_x1;
        0.5 * (self.csum + i_y + i1 + i2)
    }

    fn eval_flat(&self, kernel: &[f64]) -> f64 {
        let (ny, nu) = (self.ny, self.nu);
        self.eval(|xi, y, u| kernel[(xi * ny + y) * nu + u])
    }
}

/// The fifth constraint of the upper bound at a fixed input distribution and
/// auxiliary channel: (C1+C2+I(X1X2;Y|U)+I(X1;U|X2)+I(X2;U|X1)) / 2.
/// This bounds R, not 2R.
pub fn constraint5(input: &JointDist, mac: &DiscreteMac, aux: &Kernel, cfg: &DiamondConfig) -> Result<f64> {
    let j = attach_aux(&induced_joint(input, mac)?, aux)?;
    Ok(0.5
        * (cfg.c1
            + cfg.c2
            + j.cond_mutual_info(&["x1", "x2"], &["y"], &["u"])?
            + j.cond_mutual_info(&["x1"], &["u"], &["x2"])?
            + j.cond_mutual_info(&["x2"], &["u"], &["x1"])?))
}

/// Algebraically equal form of `constraint5`:
/// (C1+C2+I(X1X2;YU)-I(X1;X2)+I(X1;X2|U)) / 2. Kept as an identity test hook.
pub fn equiv_constraint5(input: &JointDist, mac: &DiscreteMac, aux: &Kernel, cfg: &DiamondConfig) -> Result<f64> {
    let j = attach_aux(&induced_joint(input, mac)?, aux)?;
    Ok(0.5
        * (cfg.c1
            + cfg.c2
            + j.mutual_info(&["x1", "x2"], &["y", "u"])?
            - j.mutual_info(&["x1"], &["x2"])?
            + j.cond_mutual_info(&["x1"], &["x2"], &["u"])?))
}

#[derive(Clone, Copy)]
struct InnerBudget {
    /// cap on the number of y-only grid kernels enumerated
    yonly_cap: usize,
    /// multistarts for the descent over general kernels (0 = grid only)
    starts: usize,
    max_iters: usize,
}

const INNER_CHEAP: InnerBudget = InnerBudget { yonly_cap: 1_000, starts: 0, max_iters: 0 };
const INNER_MEDIUM: InnerBudget = InnerBudget { yonly_cap: 2_000, starts: 1, max_iters: 1_500 };
const INNER_FINE: InnerBudget = InnerBudget { yonly_cap: 30_000, starts: 8, max_iters: 20_000 };

/// Enumerate y-only kernels on a simplex lattice and return the best
/// (value, full kernel) found. The grid resolution is the largest that
/// keeps the enumeration within `cap` kernels.
fn inner_min_yonly(eval: &Constraint5Eval, cap: usize) -> (f64, Vec<f64>) {
    let (ny, nu) = (eval.ny, eval.nu);
    let mut steps = 2usize;
    loop {
        let per_row = simplex_grid(nu, steps + 1).len();
        if per_row.pow(ny as u32) > cap || steps > 64 {
            break;
        }
        steps += 1;
    }
    let rows = simplex_grid(nu, steps);
    let nrows = rows.len();
    let mut idx = vec![0usize; ny];
    let mut best_v = f64::INFINITY;
    let mut best_idx = vec![0usize; ny];
    loop {
        let v = eval.eval(|_, y, u| rows[idx[y]][u]);
        if v < best_v {
            best_v = v;
            best_idx.copy_from_slice(&idx);
        }
        // odometer
        let mut pos = 0;
        loop {
            if pos == ny {
                let nxy = eval.n1 * eval.n2;
                let mut flat = vec![0.0; nxy * ny * nu];
                for xi in 0..nxy {
                    for y in 0..ny {
                        for u in 0..nu {
                            flat[(xi * ny + y) * nu + u] = rows[best_idx[y]][u];
                        }
                    }
                }
                return (best_v, flat);
            }
            idx[pos] += 1;
            if idx[pos] < nrows {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

fn inner_min_budgeted(
    eval: &Constraint5Eval,
    budget: InnerBudget,
    opts: &SearchOpts,
) -> Result<(f64, Vec<f64>)> {
    let (v_grid, seed_kernel) = inner_min_yonly(eval, budget.yonly_cap);
    if budget.starts == 0 {
        return Ok((v_grid, seed_kernel));
    }
    let nrows = eval.n1 * eval.n2 * eval.ny;
    let blocks = vec![eval.nu; nrows];
    let obj = |k: &[f64]| -eval.eval_flat(k);
    let sub_opts = SearchOpts {
        multistarts: budget.starts,
        max_iters: budget.max_iters,
        ..*opts
    };
    let (neg_v, kernel) =
        multistart_ascent_with_seeds(&obj, &blocks, &[seed_kernel.clone()], &sub_opts)?;
    if -neg_v <= v_grid {
        Ok((-neg_v, kernel))
    } else {
        Ok((v_grid, seed_kernel))
    }
}

/// Approximate min over auxiliary channels p(u|x1,x2,y) of `constraint5`.
/// The returned value is an upper estimate of the true minimum, so any
/// witness still certifies a valid capacity upper bound.
pub fn theorem1_inner_min(
    input: &JointDist,
    mac: &DiscreteMac,
    cfg: &DiamondConfig,
    aux_card: AuxCard,
    opts: &SearchOpts,
) -> Result<(f64, Kernel)> {
    if aux_card.0 < 1 {
        return Err(Error::Argument("auxiliary cardinality must be >= 1".into()));
    }
    opts.validate()?;
    let p: Vec<f64> = input.marginal(&["x1", "x2"])?.mass().iter().copied().collect();
    let eval = Constraint5Eval::new(&p, mac, cfg, aux_card.0);
    let budget = InnerBudget {
        starts: (opts.multistarts / 8).max(4),
        ..INNER_FINE
    };
    let (value, flat) = inner_min_budgeted(&eval, budget, opts)?;
    let rows = ArrayD::from_shape_vec(
        IxDyn(&[mac.x1_size, mac.x2_size, mac.y_size, aux_card.0]),
        flat,
    )
    .expect("kernel shape");
    let kernel = Kernel::with_row_tolerance(
        vec![("x1", mac.x1_size), ("x2", mac.x2_size), ("y", mac.y_size)],
        ("u", aux_card.0),
        rows,
        1e-9,
    )?;
    Ok((value, kernel))
}

/// Max over p(x1,x2) of min{the four cut-set terms, the inner-min fifth
/// constraint}, with the default auxiliary cardinality |Y|.
pub fn theorem1_upper(mac: &DiscreteMac, cfg: &DiamondConfig, opts: &SearchOpts) -> Result<BoundReport> {
    theorem1_upper_with_card(mac, cfg, AuxCard(mac.y_size), opts)
}

/// As `theorem1_upper` with an explicit auxiliary cardinality. A larger U
/// never invalidates the bound; it only tightens or loosens the estimate.
/// The outer objective is a min of functions concave in p, so a lattice scan
/// plus local ascent finds the max to tolerance.
pub fn theorem1_upper_with_card(
    mac: &DiscreteMac,
    cfg: &DiamondConfig,
    aux_card: AuxCard,
    opts: &SearchOpts,
) -> Result<BoundReport> {
    opts.validate()?;
    if aux_card.0 < 1 {
        return Err(Error::Argument("auxiliary cardinality must be >= 1".into()));
    }
    let dim = mac.x1_size * mac.x2_size;
    let cuts = CutsetEval::new(mac, cfg);
    let nu = aux_card.0;

    let objective = |p: &[f64], budget: InnerBudget| -> Result<f64> {
        let four = cuts.terms(p);
        let eval = Constraint5Eval::new(p, mac, cfg, nu);
        let (v5, _) = inner_min_budgeted(&eval, budget, opts)?;
        Ok(four.into_iter().fold(v5, f64::min))
    };

    // stage 1: lattice scan with a cheap inner minimization
    let steps = opts.grid_steps_for_dim(dim);
    let grid = simplex_grid(dim, steps);
    let values: Vec<f64> = grid
        .par_iter()
        .map(|p| objective(p, INNER_CHEAP).unwrap_or(f64::NEG_INFINITY))
        .collect();
    let top = top_grid_points(&grid, &values, 4);

    // stage 2: local ascent with a medium inner minimization
    let medium = |p: &[f64]| objective(p, INNER_MEDIUM).unwrap_or(f64::NEG_INFINITY);
    let ascent_opts = SearchOpts { max_iters: 400, ..*opts };
    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::new();
    let uniform = vec![1.0 / dim as f64; dim];
    let mut starts: Vec<Vec<f64>> = top.iter().map(|&i| grid[i].clone()).collect();
    starts.push(uniform);
    for s in &starts {
        candidates.push(ascent_from(&medium, &[dim], s, &ascent_opts)?);
    }
    candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then_with(|| a.1.partial_cmp(&b.1).unwrap()));

    // stage 3: fine inner minimization at the best candidates
    let mut best: Option<(f64, Vec<f64>, Vec<f64>, usize)> = None;
    for (_, p) in candidates.iter().take(2) {
        let four = cuts.terms(p);
        let eval = Constraint5Eval::new(p, mac, cfg, nu);
        let fine = InnerBudget {
            starts: (opts.multistarts / 8).max(4),
            ..INNER_FINE
        };
        let (v5, kernel) = inner_min_budgeted(&eval, fine, opts)?;
        let mut all = four.to_vec();
        all.push(v5);
        let (value, binding) = min_with_binding(&all);
        if best.as_ref().map_or(true, |b| value > b.0) {
            best = Some((value, p.clone(), kernel, binding));
        }
    }
    let (value, p, kernel, binding) = best.expect("at least one candidate");
    let label = if binding < 4 { CUTSET_LABELS[binding] } else { CONSTRAINT5_LABEL };
    Ok(BoundReport {
        value,
        binding: label.to_string(),
        witness: serde_json::json!({
            "input": nested_array_2d(&p, mac.x1_size, mac.x2_size),
            "aux_kernel": kernel,
            "aux_card": nu,
        }),
        meta: SearchMeta::new(
            "valid upper bound; tightness limited by inner-min search",
            opts,
        ),
    })
}

impl Serialize for Kernel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(3))?;
        map.serialize_entry("from_axes", self.from_axes())?;
        map.serialize_entry("to_axis", &self.to_axis())?;
        map.serialize_entry("rows", &self.rows().iter().copied().collect::<Vec<f64>>())?;
        map.end()
    }
}

// ---------------------------------------------------------------------------
// Theorem-2 lower bound
// ---------------------------------------------------------------------------

/// Fast evaluator of the five lower-bound terms as a function of the coding
/// distribution p(u, x1, x2), with the channel attached on the fly.
struct Theorem2Eval {
    n1: usize,
    n2: usize,
    ny: usize,
    nu: usize,
    w: Vec<f64>, // w[(x1*n2+x2)*ny + y]
    h_row: Vec<f64>,
    c1: f64,
    c2: f64,
}

struct Theorem2Quantities {
    terms: [f64; 5],
    i_x1x2_given_u: f64,
    i_xy_given_u: f64,
    i_x1y_given_x2u: f64,
    i_x2y_given_x1u: f64,
    i_uxy: f64,
}

impl Theorem2Eval {
    fn new(mac: &DiscreteMac, cfg: &DiamondConfig, nu: usize) -> Self {
        let (n1, n2, ny) = (mac.x1_size, mac.x2_size, mac.y_size);
        let mut w = vec![0.0; n1 * n2 * ny];
        let mut h_row = vec![0.0; n1 * n2];
        for x1 in 0..n1 {
            for x2 in 0..n2 {
                let xi = x1 * n2 + x2;
                for y in 0..ny {
                    w[xi * ny + y] = mac.prob(x1, x2, y);
                }
                h_row[xi] = entropy_slice(&w[xi * ny..(xi + 1) * ny]);
            }
        }
        Self { n1, n2, ny, nu, w, h_row, c1: cfg.c1, c2: cfg.c2 }
    }

    /// q indexed q[(u*n1 + x1)*n2 + x2]
    fn quantities(&self, q: &[f64]) -> Theorem2Quantities {
        let (n1, n2, ny, nu) = (self.n1, self.n2, self.ny, self.nu);
        let mut m_u = vec![0.0; nu];
        let mut m_x1u = vec![0.0; nu * n1];
        let mut m_x2u = vec![0.0; nu * n2];
        let mut m_uy = vec![0.0; nu * ny];
        let mut m_x1uy = vec![0.0; nu * n1 * ny];
        let mut m_x2uy = vec![0.0; nu * n2 * ny];
        let mut m_x1x2 = vec![0.0; n1 * n2];
        let mut m_y = vec![0.0; ny];
        let mut h_y_given_x = 0.0; // H(Y|X1X2) = H(Y|UX1X2)
        for u in 0..nu {
            for x1 in 0..n1 {
                for x2 in 0..n2 {
                    let m = q[(u * n1 + x1) * n2 + x2];
                    if m <= 0.0 {
                        continue;
                    }
                    let xi = x1 * n2 + x2;
                    m_u[u] += m;
                    m_x1u[u * n1 + x1] += m;
                    m_x2u[u * n2 + x2] += m;
                    m_x1x2[xi] += m;
                    h_y_given_x += m * self.h_row[xi];
                    for y in 0..ny {
                        let my = m * self.w[xi * ny + y];
                        if my > 0.0 {
                            m_uy[u * ny + y] += my;
                            m_x1uy[(u * n1 + x1) * ny + y] += my;
                            m_x2uy[(u * n2 + x2) * ny + y] += my;
                            m_y[y] += my;
                        }
                    }
                }
            }
        }
        let h_q = entropy_slice(q); // H(U X1 X2)
        let h_u = entropy_slice(&m_u);
        let h_x1u = entropy_slice(&m_x1u);
        let h_x2u = entropy_slice(&m_x2u);
        let h_uy = entropy_slice(&m_uy);
        let h_x1uy = entropy_slice(&m_x1uy);
        let h_x2uy = entropy_slice(&m_x2uy);
        let h_x1x2 = entropy_slice(&m_x1x2);
        let h_y = entropy_slice(&m_y);
        let h_full = h_q + h_y_given_x; // H(U X1 X2 Y); Y depends on (X1,X2) only
        let a = h_x1u + h_x2u - h_q - h_u; // I(X1;X2|U)
        let i1 = h_q + h_x2uy - h_full - h_x2u; // I(X1;Y|X2U)
        let i2 = h_q + h_x1uy - h_full - h_x1u; // I(X2;Y|X1U)
        let iy = h_q + h_uy - h_full - h_u; // I(X1X2;Y|U)
        let t5 = h_x1x2 + h_y - (h_x1x2 + h_y_given_x); // I(X1X2;Y)
        let i_uxy = h_q + h_y - h_full; // I(UX1X2;Y)
        Theorem2Quantities {
            terms: [
                self.c1 + self.c2 - a,
                self.c2 + i1,
                self.c1 + i2,
                0.5 * (self.c1 + self.c2 + iy - a),
                t5,
            ],
            i_x1x2_given_u: a,
            i_xy_given_u: iy,
            i_x1y_given_x2u: i1,
            i_x2y_given_x1u: i2,
            i_uxy,
        }
    }

    fn min_term(&self, q: &[f64]) -> f64 {
        self.quantities(q).terms.into_iter().fold(f64::INFINITY, f64::min)
    }
}

fn coding_dist_flat(coding: &JointDist, mac: &DiscreteMac) -> Result<(Vec<f64>, usize)> {
    let nu = match coding.axes() {
        [(u, nu), (a, n1), (b, n2)]
            if u == "u" && a == "x1" && b == "x2" && *n1 == mac.x1_size && *n2 == mac.x2_size =>
        {
            *nu
        }
        other => {
            return Err(Error::SizeMismatch(format!(
                "expected coding distribution over (u, x1, x2) matching the MAC, got {other:?}"
            )))
        }
    };
    Ok((coding.mass().iter().copied().collect(), nu))
}

/// The five min-terms of the lower bound at a fixed coding distribution
/// p(u, x1, x2), with the MAC attached (so U - (X1X2) - Y holds by
/// construction). Order matches `THEOREM2_LABELS`.
pub fn theorem2_terms(coding: &JointDist, mac: &DiscreteMac, cfg: &DiamondConfig) -> Result<[f64; 5]> {
    let (q, nu) = coding_dist_flat(coding, mac)?;
    Ok(Theorem2Eval::new(mac, cfg, nu).quantities(&q).terms)
}

fn embed_uconst(p: &[f64], nu: usize) -> Vec<f64> {
    let mut q = vec![0.0; nu * p.len()];
    q[..p.len()].copy_from_slice(p);
    q
}

/// Structured starting points for the lower-bound search: U constant with a
/// separately optimized input law, deterministic U = f(X1, X2), and
/// conditionally independent families.
fn theorem2_seeds(
    eval: &Theorem2Eval,
    opts: &SearchOpts,
) -> Result<Vec<Vec<f64>>> {
    let (n1, n2, nu) = (eval.n1, eval.n2, eval.nu);
    let dim_in = n1 * n2;
    // U constant: optimize the input law on its own (cheap, small simplex)
    let const_obj = |p: &[f64]| -> f64 {
        let q = embed_uconst(p, nu);
        eval.min_term(&q)
    };
    let sub = SearchOpts { multistarts: 16, max_iters: 4_000, ..*opts };
    let grid = simplex_grid(dim_in, opts.grid_steps_for_dim(dim_in));
    let gvals: Vec<f64> = grid.par_iter().map(|p| const_obj(p)).collect();
    let top = top_grid_points(&grid, &gvals, 3);
    let g_seeds: Vec<Vec<f64>> = top.iter().map(|&i| grid[i].clone()).collect();
    let (_, best_p) = multistart_ascent_with_seeds(&const_obj, &[dim_in], &g_seeds, &sub)?;

    let uniform_in = vec![1.0 / dim_in as f64; dim_in];
    let mut seeds = vec![embed_uconst(&best_p, nu), embed_uconst(&uniform_in, nu)];

    // deterministic U = f(X1, X2) for a few natural f
    let mut det_fns: Vec<Box<dyn Fn(usize, usize) -> usize>> = Vec::new();
    if nu >= n1 {
        det_fns.push(Box::new(|x1, _| x1));
    }
    if nu >= n2 {
        det_fns.push(Box::new(|_, x2| x2));
    }
    if nu >= n1 + n2 - 1 {
        det_fns.push(Box::new(|x1, x2| x1 + x2));
    }
    if nu >= n1 * n2 {
        det_fns.push(Box::new(move |x1, x2| x1 * n2 + x2));
    }
    for f in &det_fns {
        for p in [&best_p, &uniform_in] {
            let mut q = vec![0.0; nu * n1 * n2];
            for x1 in 0..n1 {
                for x2 in 0..n2 {
                    q[(f(x1, x2) * n1 + x1) * n2 + x2] = p[x1 * n2 + x2];
                }
            }
            seeds.push(q);
        }
    }

    // conditionally independent inputs given U, random parameters
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(0xc0d1))
        ;
    for _ in 0..4 {
        let mut q = vec![0.0; nu * n1 * n2];
        for u in 0..nu {
            let mut p1: Vec<f64> = (0..n1).map(|_| rng.gen_range(0.01..1.0)).collect();
            let mut p2: Vec<f64> = (0..n2).map(|_| rng.gen_range(0.01..1.0)).collect();
            let (s1, s2): (f64, f64) = (p1.iter().sum(), p2.iter().sum());
            p1.iter_mut().for_each(|v| *v /= s1);
            p2.iter_mut().for_each(|v| *v /= s2);
            for x1 in 0..n1 {
                for x2 in 0..n2 {
                    q[(u * n1 + x1) * n2 + x2] = p1[x1] * p2[x2] / nu as f64;
                }
            }
        }
        seeds.push(q);
    }
    Ok(seeds)
}

/// Max over p(u, x1, x2) of the min of the five lower-bound terms. Any
/// returned witness is a valid achievable rate.
pub fn theorem2_lower(
    mac: &DiscreteMac,
    cfg: &DiamondConfig,
    card: AuxCard,
    opts: &SearchOpts,
) -> Result<BoundReport> {
    opts.validate()?;
    let cap = AuxCard::lower_bound_cap(mac);
    if card.0 < 1 || card.0 > cap {
        return Err(Error::Argument(format!(
            "auxiliary cardinality {} outside [1, {cap}]",
            card.0
        )));
    }
    let nu = card.0;
    let eval = Theorem2Eval::new(mac, cfg, nu);
    let seeds = theorem2_seeds(&eval, opts)?;
    let dim = nu * mac.x1_size * mac.x2_size;
    let obj = |q: &[f64]| eval.min_term(q);
    let main_opts = SearchOpts {
        multistarts: (opts.multistarts / 4).max(8),
        max_iters: opts.max_iters.max(40 * dim * dim),
        ..*opts
    };
    let (value, q) = multistart_ascent_with_seeds(&obj, &[dim], &seeds, &main_opts)?;
    let quantities = eval.quantities(&q);
    let (_, binding) = min_with_binding(&quantities.terms);
    let coding: Vec<Vec<Vec<f64>>> = (0..nu)
        .map(|u| {
            (0..mac.x1_size)
                .map(|x1| {
                    (0..mac.x2_size)
                        .map(|x2| q[(u * mac.x1_size + x1) * mac.x2_size + x2])
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(BoundReport {
        value: value.max(0.0),
        binding: THEOREM2_LABELS[binding].to_string(),
        witness: serde_json::json!({ "coding": coding, "aux_card": nu }),
        meta: SearchMeta::new(
            "valid lower bound; tightness limited by outer-max search",
            opts,
        ),
    })
}

// ---------------------------------------------------------------------------
// Rate-split LP oracle
// ---------------------------------------------------------------------------

/// Maximum of R = R12 + R1 + R2 - I(X1;X2|U) over nonnegative rate splits
/// subject to the error-analysis constraints, solved exactly by vertex
/// enumeration of the 3-variable polytope. Returns 0 if infeasible.
pub fn fm_split_oracle(coding: &JointDist, mac: &DiscreteMac, cfg: &DiamondConfig) -> Result<f64> {
    let (q, nu) = coding_dist_flat(coding, mac)?;
    let quantities = Theorem2Eval::new(mac, cfg, nu).quantities(&q);
    let a = quantities.i_x1x2_given_u;
    // rows (normal, rhs): normal . (r12, r1, r2) <= rhs
    let rows: [([f64; 3], f64); 10] = [
        ([1.0, 1.0, 0.0], cfg.c1),
        ([1.0, 0.0, 1.0], cfg.c2),
        ([0.0, 1.0, 1.0], quantities.i_xy_given_u + a),
        ([0.0, 1.0, 0.0], quantities.i_x1y_given_x2u + a),
        ([0.0, 0.0, 1.0], quantities.i_x2y_given_x1u + a),
        ([1.0, 1.0, 1.0], quantities.i_uxy + a),
        ([0.0, -1.0, -1.0], -a),
        ([-1.0, 0.0, 0.0], 0.0),
        ([0.0, -1.0, 0.0], 0.0),
        ([0.0, 0.0, -1.0], 0.0),
    ];
    let mut best: Option<f64> = None;
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            for k in (j + 1)..rows.len() {
                let m = Matrix3::from_rows(&[
                    Vector3::from_column_slice(&rows[i].0).transpose(),
                    Vector3::from_column_slice(&rows[j].0).transpose(),
                    Vector3::from_column_slice(&rows[k].0).transpose(),
                ]);
                let b = Vector3::new(rows[i].1, rows[j].1, rows[k].1);
                if m.determinant().abs() < 1e-10 {
                    continue;
                }
                let Some(inv) = m.try_inverse() else { continue };
                let x = inv * b;
                if !x.iter().all(|v| v.is_finite()) {
                    continue;
                }
                let feasible = rows.iter().all(|(n, rhs)| {
                    n[0] * x[0] + n[1] * x[1] + n[2] * x[2] <= rhs + 1e-9
                });
                if feasible {
                    let r = x[0] + x[1] + x[2] - a;
                    best = Some(best.map_or(r, |b: f64| b.max(r)));
                }
            }
        }
    }
    Ok(best.unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{adder_aux_channel, binary_adder_mac, doubly_symmetric_input};
    use approx::assert_abs_diff_eq;

    fn cfg(c: f64) -> DiamondConfig {
        DiamondConfig::new(c, c).unwrap()
    }

    fn uniform_input() -> JointDist {
        doubly_symmetric_input(0.5).unwrap()
    }

    fn point_mass_input() -> JointDist {
        JointDist::new(
            vec![("x1", 2), ("x2", 2)],
            ArrayD::from_shape_vec(IxDyn(&[2, 2]), vec![1.0, 0.0, 0.0, 0.0]).unwrap(),
        )
        .unwrap()
    }

    fn coding_from(q: Vec<f64>, nu: usize) -> JointDist {
        JointDist::new(
            vec![("u", nu), ("x1", 2), ("x2", 2)],
            ArrayD::from_shape_vec(IxDyn(&[nu, 2, 2]), q).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn cutset_constraints_examples() {
        let mac = binary_adder_mac();
        let t = cutset_constraints(&uniform_input(), &mac, &cfg(0.8)).unwrap();
        assert_abs_diff_eq!(t[0], 1.6, epsilon = 1e-12);
        assert_abs_diff_eq!(t[1], 1.8, epsilon = 1e-12);
        assert_abs_diff_eq!(t[2], 1.8, epsilon = 1e-12);
        assert_abs_diff_eq!(t[3], 1.5, epsilon = 1e-12);

        let h3 = crate::measures::binary_entropy(1.0 / 3.0).unwrap();
        let d = doubly_symmetric_input(1.0 / 3.0).unwrap();
        let t = cutset_constraints(&d, &mac, &cfg(0.8)).unwrap();
        assert_abs_diff_eq!(t[1], 0.8 + h3, epsilon = 1e-12);
        assert_abs_diff_eq!(t[2], 0.8 + h3, epsilon = 1e-12);
        assert_abs_diff_eq!(t[3], 3f64.log2(), epsilon = 1e-12);

        let t = cutset_constraints(&point_mass_input(), &mac, &cfg(0.8)).unwrap();
        assert_abs_diff_eq!(t[1], 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(t[2], 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(t[3], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn cutset_fast_eval_matches_public() {
        let mac = binary_adder_mac();
        let c = cfg(0.8);
        let eval = CutsetEval::new(&mac, &c);
        let input_dist = |p: &[f64]| {
            JointDist::new(
                vec![("x1", 2), ("x2", 2)],
                ArrayD::from_shape_vec(IxDyn(&[2, 2]), p.to_vec()).unwrap(),
            )
        };
        for p in [vec![0.25; 4], vec![0.4, 0.1, 0.2, 0.3]] {
            let d = input_dist(&p).unwrap();
            let want = cutset_constraints(&d, &mac, &c).unwrap();
            let got = eval.terms(&p);
            for (a, b) in want.iter().zip(got.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cutset_bound_adder() {
        let mac = binary_adder_mac();
        let opts = SearchOpts::default();
        let r = cutset_bound(&mac, &cfg(0.8), &opts).unwrap();
        assert_abs_diff_eq!(r.value, 3f64.log2(), epsilon = 1e-4);
        let r = cutset_bound(&mac, &cfg(0.5), &opts).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-4);
        assert_eq!(r.binding, "C1+C2");
        let r = cutset_bound(&mac, &cfg(0.0), &opts).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn constraint5_examples() {
        let mac = binary_adder_mac();
        let c = cfg(0.8);
        // U constant (alpha = 1/2 makes U independent of Y)
        let aux = adder_aux_channel(0.5).unwrap();
        let v = constraint5(&uniform_input(), &mac, &aux, &c).unwrap();
        assert_abs_diff_eq!(v, (1.6 + 1.5) / 2.0, epsilon = 1e-12);

        // U = Y: identity kernel on y
        let eye = Kernel::new(
            vec![("y", 3)],
            ("u", 3),
            ArrayD::from_shape_vec(
                IxDyn(&[3, 3]),
                vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            )
            .unwrap(),
        )
        .unwrap();
        let v = constraint5(&uniform_input(), &mac, &eye, &c).unwrap();
        assert_abs_diff_eq!(v, (1.6 + 1.0 + 1.0) / 2.0, epsilon = 1e-12);

        // DSBS(p) with the Markov-matching alpha: (2C + 2 h2(p) - p) / 2
        let p = 1.0 / 3.0;
        let alpha = crate::closed_forms::adder_alpha(p).unwrap();
        let aux = adder_aux_channel(alpha).unwrap();
        let d = doubly_symmetric_input(p).unwrap();
        let v = constraint5(&d, &mac, &aux, &c).unwrap();
        let h = crate::measures::binary_entropy(p).unwrap();
        assert_abs_diff_eq!(v, (1.6 + 2.0 * h - p) / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn constraint5_equivalence_spot() {
        let mac = binary_adder_mac();
        let c = cfg(0.7);
        let d = doubly_symmetric_input(0.27).unwrap();
        let aux = adder_aux_channel(0.21).unwrap();
        let a = constraint5(&d, &mac, &aux, &c).unwrap();
        let b = equiv_constraint5(&d, &mac, &aux, &c).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
    }

    #[test]
    fn inner_min_card1_is_constant_channel() {
        let mac = binary_adder_mac();
        let c = cfg(0.8);
        let opts = SearchOpts { multistarts: 8, ..Default::default() };
        let (v, _) = theorem1_inner_min(&uniform_input(), &mac, &c, AuxCard(1), &opts).unwrap();
        assert_abs_diff_eq!(v, (1.6 + 1.5) / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn inner_min_dsbs_third() {
        let mac = binary_adder_mac();
        let c = cfg(0.8);
        let d = doubly_symmetric_input(1.0 / 3.0).unwrap();
        let opts = SearchOpts { multistarts: 16, ..Default::default() };
        let (v, _) = theorem1_inner_min(&d, &mac, &c, AuxCard(2), &opts).unwrap();
        let h = crate::measures::binary_entropy(1.0 / 3.0).unwrap();
        let target = (1.6 + 2.0 * h - 1.0 / 3.0) / 2.0; // 1.551629...
        assert!(v <= target + 1e-5, "inner min {v} above witness value {target}");
        // U constant is always feasible
        assert!(v <= (1.6 + 3f64.log2()) / 2.0 + 1e-9);
    }

    #[test]
    fn theorem2_terms_examples() {
        let mac = binary_adder_mac();
        // U constant, independent uniform, C = 0.8
        let q = embed_uconst(&[0.25; 4], 2);
        let t = theorem2_terms(&coding_from(q, 2), &mac, &cfg(0.8)).unwrap();
        for (got, want) in t.iter().zip([1.6, 1.8, 1.8, 1.55, 1.5]) {
            assert_abs_diff_eq!(got, &want, epsilon = 1e-12);
        }

        // U constant, symmetric three-level input at C = 1.2: p(y) uniform
        let q = embed_uconst(&[1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0], 1);
        let t = theorem2_terms(&coding_from(q, 1), &mac, &cfg(1.2)).unwrap();
        let i = 2.0 * 1.0 - crate::measures::entropy_slice(&[1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0]);
        assert_abs_diff_eq!(t[0], 2.4 - i, epsilon = 1e-12);
        assert_abs_diff_eq!(t[4], 3f64.log2(), epsilon = 1e-12);
        let (min, idx) = min_with_binding(&t);
        assert_eq!(idx, 4);
        assert_abs_diff_eq!(min, 3f64.log2(), epsilon = 1e-12);

        // binary U, conditionally iid Bernoulli(theta | u=0), flipped for u=1
        let theta: f64 = 0.5 * (1.0 - 1.0 / 3f64.sqrt());
        let mut q = vec![0.0; 8];
        for (u, t0) in [(0usize, theta), (1, 1.0 - theta)] {
            for x1 in 0..2 {
                for x2 in 0..2 {
                    let p1 = if x1 == 1 { t0 } else { 1.0 - t0 };
                    let p2 = if x2 == 1 { t0 } else { 1.0 - t0 };
                    q[(u * 2 + x1) * 2 + x2] = 0.5 * p1 * p2;
                }
            }
        }
        let t = theorem2_terms(&coding_from(q, 2), &mac, &cfg(1.1)).unwrap();
        let (min, idx) = min_with_binding(&t);
        assert_eq!(idx, 4, "fifth term should bind, got {t:?}");
        assert_abs_diff_eq!(min, 3f64.log2(), epsilon = 1e-9);
        assert_abs_diff_eq!(t[0], 2.2, epsilon = 1e-9); // I(X1;X2|U) = 0
    }

    #[test]
    fn fm_oracle_examples() {
        let mac = binary_adder_mac();
        let q = embed_uconst(&[0.25; 4], 2);
        let d = coding_from(q, 2);
        let r = fm_split_oracle(&d, &mac, &cfg(0.8)).unwrap();
        assert_abs_diff_eq!(r, 1.5, epsilon = 1e-9);
        let r = fm_split_oracle(&d, &mac, &cfg(0.0)).unwrap();
        assert_abs_diff_eq!(r, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn fm_oracle_matches_min_terms_random() {
        let mac = binary_adder_mac();
        let c = cfg(0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let nu = rng.gen_range(1..=4usize);
            let mut q: Vec<f64> = (0..nu * 4).map(|_| rng.gen_range(0.0..1.0f64)).collect();
            let s: f64 = q.iter().sum();
            q.iter_mut().for_each(|v| *v /= s);
            let d = coding_from(q, nu);
            let want = theorem2_terms(&d, &mac, &c)
                .unwrap()
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            let got = fm_split_oracle(&d, &mac, &c).unwrap();
            assert_abs_diff_eq!(got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn theorem2_lower_adder_spots() {
        let mac = binary_adder_mac();
        let opts = SearchOpts { multistarts: 24, ..Default::default() };
        let r = theorem2_lower(&mac, &cfg(0.7), AuxCard(2), &opts).unwrap();
        assert_abs_diff_eq!(r.value, 1.4, epsilon = 1e-4);
        let r = theorem2_lower(&mac, &cfg(1.2), AuxCard(2), &opts).unwrap();
        assert_abs_diff_eq!(r.value, 3f64.log2(), epsilon = 1e-3);
        let r = theorem2_lower(&mac, &cfg(0.0), AuxCard(2), &opts).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn theorem2_lower_rejects_bad_card() {
        let mac = binary_adder_mac();
        let opts = SearchOpts::default();
        assert!(theorem2_lower(&mac, &cfg(0.5), AuxCard(0), &opts).is_err());
        assert!(theorem2_lower(&mac, &cfg(0.5), AuxCard(99), &opts).is_err());
    }

    #[test]
    fn theorem1_upper_adder_zero_capacity() {
        let mac = binary_adder_mac();
        let opts = SearchOpts { grid_steps: 8, multistarts: 8, ..Default::default() };
        let r = theorem1_upper(&mac, &cfg(0.0), &opts).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-9);
    }
}
