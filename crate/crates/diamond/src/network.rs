//! Channel and network definitions: discrete MACs with JSON ingestion, the
//! binary adder, Gaussian MAC parameters, and constructors for the structured
//! distributions and auxiliary channels used by the bound evaluators.

use crate::error::{Error, Result};
use crate::measures::{JointDist, Kernel};
use ndarray::{ArrayD, Dimension, IxDyn};
use serde::Deserialize;

/// Row sums within this tolerance of 1 are renormalized silently; beyond
/// that the document is rejected.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// A finite-alphabet multiple access channel p(y | x1, x2).
#[derive(Debug, Clone)]
pub struct DiscreteMac {
    pub x1_size: usize,
    pub x2_size: usize,
    pub y_size: usize,
    transition: Kernel,
}

impl DiscreteMac {
    pub fn new(x1_size: usize, x2_size: usize, y_size: usize, transition: Kernel) -> Result<Self> {
        if x1_size < 2 || x2_size < 2 {
            return Err(Error::Argument(format!(
                "input alphabets must have size >= 2, got {x1_size} and {x2_size}"
            )));
        }
        if y_size < 1 {
            return Err(Error::Argument("output alphabet must be nonempty".into()));
        }
        let expect: Vec<(String, usize)> =
            vec![("x1".into(), x1_size), ("x2".into(), x2_size)];
        if transition.from_axes() != expect.as_slice() || transition.to_axis() != ("y", y_size) {
            return Err(Error::SizeMismatch(
                "transition kernel axes do not match the declared alphabets".into(),
            ));
        }
        Ok(Self {
            x1_size,
            x2_size,
            y_size,
            transition,
        })
    }

    pub fn transition(&self) -> &Kernel {
        &self.transition
    }

    /// p(y | x1, x2)
    pub fn prob(&self, x1: usize, x2: usize, y: usize) -> f64 {
        self.transition.prob(&[x1, x2], y)
    }
}

/// The two noiseless bit-pipe capacities, in bits per channel use.
#[derive(Debug, Clone, Copy)]
pub struct DiamondConfig {
    pub c1: f64,
    pub c2: f64,
}

impl DiamondConfig {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        if c1 < 0.0 || c2 < 0.0 || !c1.is_finite() || !c2.is_finite() {
            return Err(Error::Argument(format!("bit-pipe capacities must be >= 0, got {c1}, {c2}")));
        }
        Ok(Self { c1, c2 })
    }

    pub fn sum(&self) -> f64 {
        self.c1 + self.c2
    }
}

/// Gaussian MAC: Y = X1 + X2 + Z with Z ~ N(0,1) and average power
/// constraints P1, P2.
#[derive(Debug, Clone, Copy)]
pub struct GaussianMacParams {
    pub p1: f64,
    pub p2: f64,
}

impl GaussianMacParams {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        if p1 <= 0.0 || p2 <= 0.0 || !p1.is_finite() || !p2.is_finite() {
            return Err(Error::Argument(format!("powers must be positive, got {p1}, {p2}")));
        }
        Ok(Self { p1, p2 })
    }
}

#[derive(Deserialize)]
struct ChannelDoc {
    x1_size: usize,
    x2_size: usize,
    y_size: usize,
    transition: Vec<Vec<Vec<f64>>>,
}

/// Parse and validate a channel description document (JSON, indexed
/// `transition[x1][x2][y]`).
pub fn load_mac(document: &str) -> Result<DiscreteMac> {
    let doc: ChannelDoc =
        serde_json::from_str(document).map_err(|e| Error::Parse(format!("channel JSON: {e}")))?;
    if doc.transition.len() != doc.x1_size {
        return Err(Error::Parse(format!(
            "transition has {} x1 slices, expected {}",
            doc.transition.len(),
            doc.x1_size
        )));
    }
    let mut flat = Vec::with_capacity(doc.x1_size * doc.x2_size * doc.y_size);
    for (i, slice) in doc.transition.iter().enumerate() {
        if slice.len() != doc.x2_size {
            return Err(Error::Parse(format!(
                "transition[{i}] has {} x2 rows, expected {}",
                slice.len(),
                doc.x2_size
            )));
        }
        for (j, row) in slice.iter().enumerate() {
            if row.len() != doc.y_size {
                return Err(Error::Parse(format!(
                    "transition[{i}][{j}] has {} entries, expected {}",
                    row.len(),
                    doc.y_size
                )));
            }
            if let Some((k, &v)) = row.iter().enumerate().find(|(_, &v)| v < 0.0 || !v.is_finite()) {
                return Err(Error::Parse(format!(
                    "transition[{i}][{j}][{k}] = {v} is not a probability"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Parse(format!(
                    "row (x1={i}, x2={j}) sums to {sum}, expected 1 within {ROW_SUM_TOL:e}"
                )));
            }
            flat.extend(row.iter().map(|v| v / sum));
        }
    }
    let rows = ArrayD::from_shape_vec(IxDyn(&[doc.x1_size, doc.x2_size, doc.y_size]), flat)
        .expect("shape checked above");
    let kernel = Kernel::with_row_tolerance(
        vec![("x1", doc.x1_size), ("x2", doc.x2_size)],
        ("y", doc.y_size),
        rows,
        ROW_SUM_TOL,
    )?;
    DiscreteMac::new(doc.x1_size, doc.x2_size, doc.y_size, kernel)
}

/// The noiseless binary adder MAC: Y = X1 + X2 over {0,1,2}.
pub fn binary_adder_mac() -> DiscreteMac {
    let mut rows = ArrayD::zeros(IxDyn(&[2, 2, 3]));
    for x1 in 0..2usize {
        for x2 in 0..2usize {
            rows[IxDyn(&[x1, x2, x1 + x2])] = 1.0;
        }
    }
    let kernel = Kernel::new(vec![("x1", 2), ("x2", 2)], ("y", 3), rows).expect("valid kernel");
    DiscreteMac::new(2, 2, 3, kernel).expect("valid adder")
}

/// Doubly symmetric binary source with crossover probability `p`:
/// mass (0,0) = (1,1) = (1-p)/2 and (0,1) = (1,0) = p/2.
pub fn doubly_symmetric_input(p: f64) -> Result<JointDist> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("crossover {p} outside [0, 1]")));
    }
    let mass = ArrayD::from_shape_vec(
        IxDyn(&[2, 2]),
        vec![(1.0 - p) / 2.0, p / 2.0, p / 2.0, (1.0 - p) / 2.0],
    )
    .unwrap();
    JointDist::new(vec![("x1", 2), ("x2", 2)], mass)
}

/// The symmetric binary auxiliary channel p(u|y) for the adder:
/// y=0 -> u=0 w.p. 1-alpha; y=1 -> u uniform; y=2 -> u=0 w.p. alpha.
pub fn adder_aux_channel(alpha: f64) -> Result<Kernel> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha {alpha} outside [0, 1]")));
    }
    let rows = ArrayD::from_shape_vec(
        IxDyn(&[3, 2]),
        vec![1.0 - alpha, alpha, 0.5, 0.5, alpha, 1.0 - alpha],
    )
    .unwrap();
    Kernel::new(vec![("y", 3)], ("u", 2), rows)
}

/// Compose an input distribution with a MAC: p(x1,x2,y) = p(x1,x2) p(y|x1,x2).
pub fn induced_joint(input: &JointDist, mac: &DiscreteMac) -> Result<JointDist> {
    let (n1, n2) = match input.axes() {
        [(a, n1), (b, n2)] if a == "x1" && b == "x2" => (*n1, *n2),
        other => {
            return Err(Error::SizeMismatch(format!(
                "expected input over (x1, x2), got axes {other:?}"
            )))
        }
    };
    if n1 != mac.x1_size || n2 != mac.x2_size {
        return Err(Error::SizeMismatch(format!(
            "input alphabet ({n1}, {n2}) vs MAC ({}, {})",
            mac.x1_size, mac.x2_size
        )));
    }
    let mut mass = ArrayD::zeros(IxDyn(&[n1, n2, mac.y_size]));
    for x1 in 0..n1 {
        for x2 in 0..n2 {
            let px = input.mass()[IxDyn(&[x1, x2])];
            for y in 0..mac.y_size {
                mass[IxDyn(&[x1, x2, y])] = px * mac.prob(x1, x2, y);
            }
        }
    }
    JointDist::new(vec![("x1", n1), ("x2", n2), ("y", mac.y_size)], mass)
}

/// Attach an auxiliary channel to a joint distribution, appending the
/// kernel's output axis. The kernel may condition on any subset of the
/// joint's axes; the existing marginal is preserved exactly.
pub fn attach_aux(joint: &JointDist, aux: &Kernel) -> Result<JointDist> {
    let mut cond_pos = Vec::with_capacity(aux.from_axes().len());
    for (name, size) in aux.from_axes() {
        match joint.axis_index(name) {
            Some(i) if joint.axes()[i].1 == *size => cond_pos.push(i),
            Some(i) => {
                return Err(Error::SizeMismatch(format!(
                    "axis {name:?}: joint size {} vs kernel size {size}",
                    joint.axes()[i].1
                )))
            }
            None => return Err(Error::SizeMismatch(format!("joint has no axis {name:?}"))),
        }
    }
    let (to_name, to_size) = aux.to_axis();
    if joint.axis_index(to_name).is_some() {
        return Err(Error::Argument(format!("joint already has an axis {to_name:?}")));
    }
    let mut shape: Vec<usize> = joint.axes().iter().map(|&(_, s)| s).collect();
    shape.push(to_size);
    let mut mass = ArrayD::zeros(IxDyn(&shape));
    let mut out_idx = vec![0usize; shape.len()];
    let mut from_idx = vec![0usize; cond_pos.len()];
    for (idx, &p) in joint.mass().indexed_iter() {
        for (k, &pos) in cond_pos.iter().enumerate() {
            from_idx[k] = idx[pos];
        }
        out_idx[..idx.ndim()].copy_from_slice(idx.slice());
        for u in 0..to_size {
            out_idx[idx.ndim()] = u;
            mass[IxDyn(&out_idx)] = p * aux.prob(&from_idx, u);
        }
    }
    let mut axes: Vec<(&str, usize)> = joint
        .axes()
        .iter()
        .map(|(n, s)| (n.as_str(), *s))
        .collect();
    axes.push((to_name, to_size));
    JointDist::new(axes, mass)
}
