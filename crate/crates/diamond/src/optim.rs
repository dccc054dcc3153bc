//! Generic search primitives: simplex enumeration, multistart pattern ascent
//! on products of probability simplexes (and boxes), and 1-D refinement.
//!
//! None of the objectives here are assumed smooth; the ascent is a
//! derivative-free best-improvement pattern search with shrinking steps. It
//! is monotone, so a run never returns a value worse than its starting point.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Mass floor applied when projecting back onto the simplex; keeps entropies
/// finite and comparisons well defined.
pub const SIMPLEX_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct SearchOpts {
    /// Grid resolution per simplex axis (callers coarsen automatically at
    /// higher dimension).
    pub grid_steps: usize,
    pub multistarts: usize,
    pub max_iters: usize,
    /// Convergence threshold in objective units (bits).
    pub tol: f64,
    pub seed: u64,
}

impl Default for SearchOpts {
    fn default() -> Self {
        Self {
            grid_steps: 24,
            multistarts: 64,
            max_iters: 2000,
            tol: 1e-7,
            seed: 0,
        }
    }
}

impl SearchOpts {
    pub fn validate(&self) -> Result<()> {
        if self.grid_steps < 1 || self.multistarts < 1 || self.tol <= 0.0 {
            return Err(Error::Argument(format!("invalid search options: {self:?}")));
        }
        Ok(())
    }

    /// Grid steps adjusted for the simplex dimension so enumeration stays
    /// desk-scale: full resolution up to dim 4, coarser above.
    pub fn grid_steps_for_dim(&self, dim: usize) -> usize {
        let steps = match dim {
            0..=4 => self.grid_steps,
            5..=6 => self.grid_steps / 2,
            7..=9 => self.grid_steps / 3,
            _ => self.grid_steps / 4,
        };
        steps.max(1)
    }
}

/// All compositions k/steps with sum k = steps: the lattice of the
/// (dim-1)-simplex. Count is C(steps+dim-1, dim-1).
pub fn simplex_grid(dim: usize, steps: usize) -> Vec<Vec<f64>> {
    assert!(dim >= 1 && steps >= 1);
    let mut out = Vec::new();
    let mut current = vec![0usize; dim];
    fn recurse(dim: usize, left: usize, pos: usize, current: &mut [usize], steps: usize, out: &mut Vec<Vec<f64>>) {
        if pos == dim - 1 {
            current[pos] = left;
            out.push(current.iter().map(|&k| k as f64 / steps as f64).collect());
            return;
        }
        for k in 0..=left {
            current[pos] = k;
            recurse(dim, left - k, pos + 1, current, steps, out);
        }
    }
    recurse(dim, steps, 0, &mut current, steps, &mut out);
    out
}

/// Clip to the floor and renormalize one simplex block in place.
fn project_block(block: &mut [f64]) {
    let mut sum = 0.0;
    for v in block.iter_mut() {
        if *v < SIMPLEX_FLOOR {
            *v = SIMPLEX_FLOOR;
        }
        sum += *v;
    }
    for v in block.iter_mut() {
        *v /= sum;
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Pick the better of two (value, point) candidates; ties go to the
/// lexicographically smallest point so reductions are order independent.
fn better(a: (f64, Vec<f64>), b: (f64, Vec<f64>)) -> (f64, Vec<f64>) {
    if a.0 > b.0 || (a.0 == b.0 && lex_less(&a.1, &b.1)) {
        a
    } else {
        b
    }
}

/// Best-improvement pattern ascent over a product of simplexes, starting
/// from `start`. Directions are pairwise mass transfers within each block.
pub fn ascent_from<F>(objective: &F, blocks: &[usize], start: &[f64], opts: &SearchOpts) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let total: usize = blocks.iter().sum();
    assert_eq!(start.len(), total, "start point length mismatch");
    let mut point = start.to_vec();
    {
        let mut off = 0;
        for &d in blocks {
            project_block(&mut point[off..off + d]);
            off += d;
        }
    }
    let mut value = objective(&point);
    if !value.is_finite() {
        return Err(Error::NonFinite(format!("{point:?}")));
    }
    let mut step = 0.25_f64;
    let mut iters = 0usize;
    let mut candidate = point.clone();
    while step > 1e-6 && iters < opts.max_iters {
        let mut best_gain = 0.0;
        let mut best_point: Option<Vec<f64>> = None;
        let mut off = 0;
        for &d in blocks {
            for i in 0..d {
                for j in 0..d {
                    if i == j {
                        continue;
                    }
                    // move `step` of the mass on j toward i
                    let t = step * point[off + j];
                    if t <= 0.0 {
                        continue;
                    }
                    candidate.copy_from_slice(&point);
                    candidate[off + i] += t;
                    candidate[off + j] -= t;
                    project_block(&mut candidate[off..off + d]);
                    let v = objective(&candidate);
                    iters += 1;
                    if !v.is_finite() {
                        return Err(Error::NonFinite(format!("{candidate:?}")));
                    }
                    if v - value > best_gain {
                        best_gain = v - value;
                        best_point = Some(candidate.clone());
                    }
                }
            }
            off += d;
        }
        match best_point {
            Some(p) if best_gain > 0.0 => {
                point = p;
                value += best_gain;
                if best_gain < opts.tol * 1e-3 {
                    step *= 0.5;
                }
            }
            _ => step *= 0.5,
        }
    }
    Ok((value, point))
}

fn random_simplex_point(rng: &mut ChaCha8Rng, blocks: &[usize]) -> Vec<f64> {
    let mut p = Vec::with_capacity(blocks.iter().sum());
    for &d in blocks {
        let start = p.len();
        for _ in 0..d {
            let u: f64 = rng.gen_range(1e-9..1.0);
            p.push(-u.ln());
        }
        project_block(&mut p[start..start + d]);
    }
    p
}

/// Best of `multistarts` pattern-ascent runs over a product of simplexes.
/// Deterministic given the seed: per-start RNG streams are derived from
/// seed and start index, and the reduction is order independent.
pub fn multistart_ascent<F>(objective: &F, blocks: &[usize], opts: &SearchOpts) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    multistart_ascent_with_seeds(objective, blocks, &[], opts)
}

/// As `multistart_ascent`, with extra caller-provided start points (useful
/// for structured witnesses).
pub fn multistart_ascent_with_seeds<F>(
    objective: &F,
    blocks: &[usize],
    seeds: &[Vec<f64>],
    opts: &SearchOpts,
) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    opts.validate()?;
    let total: usize = blocks.iter().sum();
    let uniform: Vec<f64> = blocks
        .iter()
        .flat_map(|&d| std::iter::repeat(1.0 / d as f64).take(d))
        .collect();
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(opts.multistarts + seeds.len() + 1);
    starts.push(uniform);
    starts.extend(seeds.iter().cloned());
    for k in 0..opts.multistarts {
        let mut rng = ChaCha8Rng::seed_from_u64(
            opts.seed
                .wrapping_mul(0x9e3779b97f4a7c15)
                .wrapping_add(k as u64 + 1),
        );
        starts.push(random_simplex_point(&mut rng, blocks));
    }
    debug_assert!(starts.iter().all(|s| s.len() == total));
    let results: Vec<Result<(f64, Vec<f64>)>> = starts
        .par_iter()
        .map(|s| ascent_from(objective, blocks, s, opts))
        .collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for r in results {
        let r = r?;
        best = Some(match best {
            None => r,
            Some(b) => better(r, b),
        });
    }
    Ok(best.expect("at least one start"))
}

/// Multistart coordinate pattern search over a box.
pub fn multistart_box<F>(objective: &F, bounds: &[(f64, f64)], opts: &SearchOpts) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    multistart_box_with_seeds(objective, bounds, &[], opts)
}

pub fn multistart_box_with_seeds<F>(
    objective: &F,
    bounds: &[(f64, f64)],
    seeds: &[Vec<f64>],
    opts: &SearchOpts,
) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    opts.validate()?;
    let mid: Vec<f64> = bounds.iter().map(|&(l, h)| 0.5 * (l + h)).collect();
    let mut starts = vec![mid];
    starts.extend(seeds.iter().cloned());
    for k in 0..opts.multistarts {
        let mut rng = ChaCha8Rng::seed_from_u64(
            opts.seed
                .wrapping_mul(0x9e3779b97f4a7c15)
                .wrapping_add(0x5851f42d4c957f2d)
                .wrapping_add(k as u64),
        );
        starts.push(bounds.iter().map(|&(l, h)| rng.gen_range(l..=h)).collect());
    }
    let run = |start: &Vec<f64>| -> Result<(f64, Vec<f64>)> {
        let mut point = start.clone();
        let mut value = objective(&point);
        if !value.is_finite() {
            return Err(Error::NonFinite(format!("{point:?}")));
        }
        let mut step = 0.25;
        let mut iters = 0usize;
        while step > 1e-8 && iters < opts.max_iters {
            let mut improved = false;
            for i in 0..point.len() {
                let (l, h) = bounds[i];
                let width = h - l;
                for dir in [1.0, -1.0] {
                    let mut cand = point.clone();
                    cand[i] = (cand[i] + dir * step * width).clamp(l, h);
                    let v = objective(&cand);
                    iters += 1;
                    if !v.is_finite() {
                        return Err(Error::NonFinite(format!("{cand:?}")));
                    }
                    if v > value {
                        value = v;
                        point = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        Ok((value, point))
    };
    let results: Vec<Result<(f64, Vec<f64>)>> = starts.par_iter().map(run).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for r in results {
        let r = r?;
        best = Some(match best {
            None => r,
            Some(b) => better(r, b),
        });
    }
    Ok(best.expect("at least one start"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefineMode {
    Min,
    Max,
}

/// Dense scan (>= 4097 points) followed by golden-section polish of the best
/// bracket. No unimodality assumed; the scan guards against local traps.
pub fn refine_1d<F>(objective: F, lo: f64, hi: f64, mode: RefineMode, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    assert!(lo < hi, "refine_1d needs lo < hi");
    let sign = match mode {
        RefineMode::Max => 1.0,
        RefineMode::Min => -1.0,
    };
    let f = |x: f64| sign * objective(x);
    const N: usize = 4097;
    let h = (hi - lo) / (N - 1) as f64;
    let mut best_i = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..N {
        let v = f(lo + i as f64 * h);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut a = lo + best_i.saturating_sub(1) as f64 * h;
    let mut b = (lo + (best_i + 1) as f64 * h).min(hi);
    // golden-section on the bracket
    const INVPHI: f64 = 0.6180339887498949;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let v = f(x).max(best_v);
    (x, sign * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::binary_entropy;
    use approx::assert_abs_diff_eq;

    #[test]
    fn simplex_grid_counts() {
        let g = simplex_grid(2, 2);
        assert_eq!(g.len(), 3);
        assert!(g.contains(&vec![0.5, 0.5]));
        assert_eq!(simplex_grid(1, 7), vec![vec![1.0]]);
        assert_eq!(simplex_grid(3, 4).len(), 15); // C(6,2)
        for p in simplex_grid(3, 4) {
            assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ascent_finds_simplex_center() {
        let obj = |p: &[f64]| -> f64 { -p.iter().map(|&v| (v - 1.0 / 3.0).powi(2)).sum::<f64>() };
        let opts = SearchOpts { multistarts: 8, ..Default::default() };
        let (v, p) = multistart_ascent(&obj, &[3], &opts).unwrap();
        assert!(v > -1e-9);
        for &x in &p {
            assert_abs_diff_eq!(x, 1.0 / 3.0, epsilon = 1e-4);
        }
    }

    #[test]
    fn ascent_linear_reaches_vertex() {
        let obj = |p: &[f64]| 2.0 * p[0] + p[1];
        let opts = SearchOpts { multistarts: 4, ..Default::default() };
        let (v, p) = multistart_ascent(&obj, &[3], &opts).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-5);
        assert!(p[0] > 1.0 - 1e-5);
    }

    #[test]
    fn ascent_max_entropy() {
        let obj = |p: &[f64]| crate::measures::entropy_slice(p);
        let opts = SearchOpts { multistarts: 16, ..Default::default() };
        let (v, _) = multistart_ascent(&obj, &[3], &opts).unwrap();
        assert_abs_diff_eq!(v, 3f64.log2(), epsilon = 1e-6);
    }

    #[test]
    fn ascent_deterministic() {
        let obj = |p: &[f64]| crate::measures::entropy_slice(&p[..3]) - p[3];
        let opts = SearchOpts { multistarts: 12, seed: 7, ..Default::default() };
        let a = multistart_ascent(&obj, &[3, 2], &opts).unwrap();
        let b = multistart_ascent(&obj, &[3, 2], &opts).unwrap();
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn ascent_rejects_non_finite() {
        let obj = |p: &[f64]| if p[0] > 0.6 { f64::NAN } else { p[0] };
        let opts = SearchOpts { multistarts: 2, ..Default::default() };
        assert!(multistart_ascent(&obj, &[2], &opts).is_err());
    }

    #[test]
    fn refine_examples() {
        // max h2(p) + 1 - p on [0, 0.5]: p = 1/3, value log2(3)
        let (x, v) = refine_1d(
            |p| binary_entropy(p).unwrap() + 1.0 - p,
            0.0,
            0.5,
            RefineMode::Max,
            1e-9,
        );
        assert_abs_diff_eq!(x, 1.0 / 3.0, epsilon = 1e-5);
        assert_abs_diff_eq!(v, 3f64.log2(), epsilon = 1e-9);

        // max h2(p) - p/2 on [0, 0.5]: stationary at (1-p)/p = sqrt(2)
        let (x, v) = refine_1d(
            |p| binary_entropy(p).unwrap() - p / 2.0,
            0.0,
            0.5,
            RefineMode::Max,
            1e-9,
        );
        assert_abs_diff_eq!(x, 0.41421356237309503, epsilon = 1e-5);
        assert_abs_diff_eq!(v, 0.7715533031636120, epsilon = 1e-9);

        let (x, _) = refine_1d(|x| (x - 0.25) * (x - 0.25), 0.0, 1.0, RefineMode::Min, 1e-9);
        assert_abs_diff_eq!(x, 0.25, epsilon = 1e-6);
    }

    #[test]
    fn box_search_quadratic() {
        let obj = |p: &[f64]| -(p[0] - 0.3).powi(2) - (p[1] - 0.9).powi(2);
        let opts = SearchOpts { multistarts: 8, ..Default::default() };
        let (_, p) = multistart_box(&obj, &[(0.0, 1.0), (0.0, 1.0)], &opts).unwrap();
        assert_abs_diff_eq!(p[0], 0.3, epsilon = 1e-4);
        assert_abs_diff_eq!(p[1], 0.9, epsilon = 1e-4);
    }
}
