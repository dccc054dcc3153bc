//! End-to-end acceptance checks. Each test covers one numbered criterion and
//! prints a single PASS line (visible with `--nocapture`); a failed assertion
//! is the FAIL line.

use diamond::bounds::{
    constraint5, cutset_bound, equiv_constraint5, fm_split_oracle, theorem1_upper, theorem2_lower,
    theorem2_terms, AuxCard,
};
use diamond::closed_forms::{
    adder_alpha, adder_match_report, adder_upper, gaussian_aux_noise, gaussian_lower,
    gaussian_upper, mixture_value_from_table, rho_threshold, theorem3_report,
};
use diamond::measures::{JointDist, Kernel};
use diamond::network::{
    adder_aux_channel, attach_aux, binary_adder_mac, doubly_symmetric_input, induced_joint,
    DiamondConfig, GaussianMacParams,
};
use diamond::optim::SearchOpts;
use ndarray::{ArrayD, IxDyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LOG2_3: f64 = 1.584962500721156;

fn cfg(c: f64) -> DiamondConfig {
    DiamondConfig::new(c, c).unwrap()
}

fn params1() -> GaussianMacParams {
    GaussianMacParams::new(1.0, 1.0).unwrap()
}

fn opts() -> SearchOpts {
    SearchOpts::default()
}

/// Criterion 1: the four Gaussian matching thresholds at P = 1.
#[test]
fn criterion_1_gaussian_thresholds() {
    let r = theorem3_report(1.0).unwrap();
    let expected = [
        (r.c_low, 0.3962, "c_low"),
        (r.c_mid_lo, 0.4807, "c_mid_lo"),
        (r.c_mid_hi, 0.6942, "c_mid_hi"),
        (r.c_high, 1.1610, "c_high"),
    ];
    for (got, want, name) in expected {
        assert!(
            (got - want).abs() <= 1e-3,
            "criterion 1 FAIL: {name} = {got:.6}, expected {want:.4} +/- 1e-3"
        );
    }
    println!(
        "criterion 1 PASS: thresholds ({:.6}, {:.6}, {:.6}, {:.6}) within 1e-3",
        r.c_low, r.c_mid_lo, r.c_mid_hi, r.c_high
    );
}

/// Criterion 2: Gaussian sweep over C in [0, 1.6] — sandwich ordering,
/// matching in the three regimes, and spot values.
#[test]
fn criterion_2_gaussian_sweep() {
    let p = params1();
    let o = opts();
    let r = theorem3_report(1.0).unwrap();
    let steps = 64usize;
    let mut max_gap_matching: f64 = 0.0;
    let mut spot = std::collections::BTreeMap::new();
    for k in 0..=steps {
        let c = 1.6 * k as f64 / steps as f64;
        let cc = cfg(c);
        let up = gaussian_upper(&p, &cc).unwrap().value;
        let lo = gaussian_lower(&p, &cc, &o).unwrap().value;
        assert!(
            lo <= up + 1e-9,
            "criterion 2 FAIL: lower {lo:.6} above upper {up:.6} at c = {c:.4}"
        );
        let matching = c <= r.c_low || (c >= r.c_mid_lo && c <= r.c_mid_hi) || c >= r.c_high;
        if matching {
            max_gap_matching = max_gap_matching.max(up - lo);
            assert!(
                up - lo <= 5e-3,
                "criterion 2 FAIL: gap {:.6} > 5e-3 in matching regime at c = {c:.4}",
                up - lo
            );
        }
        spot.insert((c * 1000.0).round() as i64, (up, lo));
    }
    let (u03, _) = spot[&300];
    assert!(
        (u03 - 0.6).abs() <= 1e-3,
        "criterion 2 FAIL: upper(0.3) = {u03:.6}, expected 0.600 +/- 1e-3"
    );
    let (u06, l06) = spot[&600];
    assert!(
        (u06 - 0.9979).abs() <= 2e-3 && (l06 - 0.9979).abs() <= 2e-3,
        "criterion 2 FAIL: bounds at 0.6 = ({u06:.6}, {l06:.6}), expected 0.9979 +/- 2e-3"
    );
    let (u12, l12) = spot[&1200];
    assert!(
        (u12 - 1.1610).abs() <= 1e-3 && (l12 - 1.1610).abs() <= 1e-3,
        "criterion 2 FAIL: bounds at 1.2 = ({u12:.6}, {l12:.6}), expected 1.1610 +/- 1e-3"
    );
    println!(
        "criterion 2 PASS: 65-point sweep ordered; max matching-regime gap {max_gap_matching:.6} <= 5e-3; spot values at 0.3/0.6/1.2 hit"
    );
}

/// Criterion 3: mixtures dominate single Gaussian witnesses, the mixture
/// curve is midpoint-concave to 1e-3, and the improvement is strict (> 1e-3)
/// where the single-witness curve loses concavity. Measured location of the
/// non-concavity: the partial-/full-cooperation crossover band around
/// C in [0.98, 1.16]; the single curve is concave below C ~ 0.7, so no
/// strict improvement exists there.
#[test]
fn criterion_3_mixture_dominance_and_concavity() {
    let p = params1();
    let o = opts();
    // single-witness curve and witness table over a grid spanning the band
    let lo_c = 0.40;
    let hi_c = 1.30;
    let n = 36usize;
    let mut singles = Vec::with_capacity(n + 1);
    let mut table: Vec<(f64, [f64; 3])> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let c = lo_c + (hi_c - lo_c) * k as f64 / n as f64;
        let rep = gaussian_lower(&p, &cfg(c), &o).unwrap();
        let chart = [
            rep.witness["components"][0]["chart"]["a1"].as_f64().unwrap(),
            rep.witness["components"][0]["chart"]["a2"].as_f64().unwrap(),
            rep.witness["components"][0]["chart"]["t"].as_f64().unwrap(),
        ];
        singles.push((c, rep.value, chart));
        table.push((2.0 * c, chart));
    }
    let mix_opts = SearchOpts { multistarts: 8, ..o };
    let mix: Vec<f64> = singles
        .iter()
        .map(|&(c, v, chart)| {
            mixture_value_from_table(&p, &cfg(c), &table, v, chart, &mix_opts).unwrap()
        })
        .collect();
    let mut best_gain: f64 = 0.0;
    for (k, &(c, v, _)) in singles.iter().enumerate() {
        assert!(
            mix[k] >= v - 1e-9,
            "criterion 3 FAIL: mixture {:.6} below single {v:.6} at c = {c:.4}",
            mix[k]
        );
        best_gain = best_gain.max(mix[k] - v);
    }
    assert!(
        best_gain > 1e-3,
        "criterion 3 FAIL: best mixture improvement {best_gain:.6} <= 1e-3"
    );
    // midpoint concavity of the mixture curve on the uniform grid
    let mut worst_violation: f64 = 0.0;
    for k in 1..n {
        let chord = 0.5 * (mix[k - 1] + mix[k + 1]);
        worst_violation = worst_violation.max(chord - mix[k]);
    }
    assert!(
        worst_violation <= 1e-3,
        "criterion 3 FAIL: mixture curve concavity violated by {worst_violation:.6} > 1e-3"
    );
    println!(
        "criterion 3 PASS: mixture >= single everywhere; best strict gain {best_gain:.6} > 1e-3 (in the C ~ 1.0-1.1 band); midpoint concavity within {worst_violation:.2e}"
    );
}

/// Criterion 4: the adder matching thresholds.
#[test]
fn criterion_4_adder_thresholds() {
    let (c_low, c_high) = adder_match_report();
    assert!(
        (c_low - 0.750).abs() <= 1e-3,
        "criterion 4 FAIL: adder c_low = {c_low:.6}, expected 0.750 +/- 1e-3"
    );
    assert!(
        (c_high - 0.7929).abs() <= 1e-3,
        "criterion 4 FAIL: adder c_high = {c_high:.6}, expected 0.7929 +/- 1e-3"
    );
    println!("criterion 4 PASS: adder thresholds ({c_low:.6}, {c_high:.6}) within 1e-3");
}

/// Criterion 5: closed-form adder upper bound values, the cut-set value, and
/// the improvement of the auxiliary-constrained bound over the cut-set at
/// C = 0.8.
#[test]
fn criterion_5_adder_upper_values() {
    for (c, want) in [(0.75, 1.5), (0.8, 1.570951), (2.0, LOG2_3)] {
        let got = adder_upper(c).unwrap().value;
        assert!(
            (got - want).abs() <= 1e-4,
            "criterion 5 FAIL: adder upper({c}) = {got:.6}, expected {want:.6} +/- 1e-4"
        );
    }
    let mac = binary_adder_mac();
    let cut = cutset_bound(&mac, &cfg(0.8), &opts()).unwrap().value;
    assert!(
        (cut - LOG2_3).abs() <= 1e-4,
        "criterion 5 FAIL: cut-set(0.8) = {cut:.6}, expected {LOG2_3:.6} +/- 1e-4"
    );
    let improvement = cut - adder_upper(0.8).unwrap().value;
    assert!(
        (improvement - 0.0140).abs() <= 1e-3,
        "criterion 5 FAIL: improvement over cut-set at 0.8 = {improvement:.6}, expected 0.0140 +/- 1e-3"
    );
    println!(
        "criterion 5 PASS: adder upper values within 1e-4; improvement over cut-set {improvement:.6}"
    );
}

/// Criterion 6: the discrete lower-bound search meets the closed-form upper
/// bound in both matching regimes, and stays strictly below it at C = 0.77
/// inside the gap. Measured separation at 0.77 is ~4.6e-3 (the best
/// lower-bound witness reaches 1.535358 against the upper bound 1.540000,
/// verified by independent recomputation of its five terms), so the strict
/// threshold here is 2e-3.
#[test]
fn criterion_6_adder_lower_matches() {
    let mac = binary_adder_mac();
    let o = opts();
    let card = AuxCard(AuxCard::lower_bound_cap(&mac));
    for c in [0.5, 0.7, 0.75, 1.2, 2.0] {
        let lo = theorem2_lower(&mac, &cfg(c), card, &o).unwrap().value;
        let up = adder_upper(c).unwrap().value;
        assert!(
            (up - lo).abs() <= 1e-3,
            "criterion 6 FAIL: lower({c}) = {lo:.6} vs upper {up:.6}, gap above 1e-3"
        );
    }
    let lo = theorem2_lower(&mac, &cfg(0.77), card, &o).unwrap().value;
    let up = adder_upper(0.77).unwrap().value;
    assert!(
        up - lo > 2e-3,
        "criterion 6 FAIL: gap at 0.77 = {:.6}, expected strictly above 2e-3",
        up - lo
    );
    println!(
        "criterion 6 PASS: bounds match within 1e-3 on both regimes; gap at 0.77 = {:.6}",
        up - lo
    );
}

/// Criterion 7: the rate-split LP equals the five-term minimum on random
/// coding distributions over the adder with auxiliary cardinality up to 6.
#[test]
fn criterion_7_rate_split_oracle() {
    let mac = binary_adder_mac();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let nu = rng.gen_range(1..=6usize);
        let mut mass: Vec<f64> = (0..nu * 4).map(|_| rng.gen_range(0.001..1.0)).collect();
        let total: f64 = mass.iter().sum();
        mass.iter_mut().for_each(|v| *v /= total);
        let coding = JointDist::new(
            vec![("u", nu), ("x1", 2), ("x2", 2)],
            ArrayD::from_shape_vec(IxDyn(&[nu, 2, 2]), mass).unwrap(),
        )
        .unwrap();
        let cc = cfg(rng.gen_range(0.0..2.0));
        let lp = fm_split_oracle(&coding, &mac, &cc).unwrap();
        let direct = theorem2_terms(&coding, &mac, &cc)
            .unwrap()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
            .max(0.0);
        worst = worst.max((lp - direct).abs());
    }
    assert!(
        worst <= 1e-9,
        "criterion 7 FAIL: LP vs min-term deviation {worst:.3e} > 1e-9 over 500 cases"
    );
    println!("criterion 7 PASS: 500 random coding distributions, max deviation {worst:.3e}");
}

/// Criterion 8: the two algebraic forms of the fifth upper-bound constraint
/// agree on random instances, and the constructed auxiliaries are exactly
/// Markov (discrete adder and Gaussian) across parameter sweeps.
#[test]
fn criterion_8_identities_and_markov() {
    let mac = binary_adder_mac();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_id: f64 = 0.0;
    for _ in 0..120 {
        let mut mass: Vec<f64> = (0..4).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = mass.iter().sum();
        mass.iter_mut().for_each(|v| *v /= total);
        let input = JointDist::new(
            vec![("x1", 2), ("x2", 2)],
            ArrayD::from_shape_vec(IxDyn(&[2, 2]), mass).unwrap(),
        )
        .unwrap();
        let nu = rng.gen_range(2..=4usize);
        let mut rows = Vec::with_capacity(3 * nu);
        for _ in 0..3 {
            let mut row: Vec<f64> = (0..nu).map(|_| rng.gen_range(0.01..1.0)).collect();
            let t: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= t);
            rows.extend(row);
        }
        let aux = Kernel::new(
            vec![("y", 3)],
            ("u", nu),
            ArrayD::from_shape_vec(IxDyn(&[3, nu]), rows).unwrap(),
        )
        .unwrap();
        let cc = cfg(rng.gen_range(0.0..2.0));
        let a = constraint5(&input, &mac, &aux, &cc).unwrap();
        let b = equiv_constraint5(&input, &mac, &aux, &cc).unwrap();
        worst_id = worst_id.max((a - b).abs());
    }
    assert!(
        worst_id <= 1e-10,
        "criterion 8 FAIL: constraint forms deviate by {worst_id:.3e} > 1e-10"
    );

    let mut worst_adder: f64 = 0.0;
    for k in 1..=49 {
        let p = 0.01 * k as f64; // p in (0, 0.5)
        let alpha = adder_alpha(p).unwrap();
        let joint = attach_aux(
            &induced_joint(&doubly_symmetric_input(p).unwrap(), &mac).unwrap(),
            &adder_aux_channel(alpha).unwrap(),
        )
        .unwrap();
        let cmi = joint.cond_mutual_info(&["x1"], &["x2"], &["u"]).unwrap();
        worst_adder = worst_adder.max(cmi.abs());
    }
    assert!(
        worst_adder <= 1e-9,
        "criterion 8 FAIL: adder Markov residual {worst_adder:.3e} > 1e-9"
    );

    let mut worst_gauss: f64 = 0.0;
    for &(p1, p2) in &[(1.0, 1.0), (0.5, 2.0), (3.0, 0.7), (2.0, 2.0)] {
        let params = GaussianMacParams::new(p1, p2).unwrap();
        let thr = rho_threshold(&params);
        for k in 1..=40 {
            let rho = thr * k as f64 / 41.0;
            let n = gaussian_aux_noise(&params, rho).unwrap();
            let g = (p1 * p2).sqrt();
            let var_u = p1 + p2 + 2.0 * rho * g + 1.0 + n;
            let cond = rho * g - (p1 + rho * g) * (p2 + rho * g) / var_u;
            worst_gauss = worst_gauss.max(cond.abs());
        }
    }
    assert!(
        worst_gauss <= 1e-9,
        "criterion 8 FAIL: Gaussian Markov residual {worst_gauss:.3e} > 1e-9"
    );
    println!(
        "criterion 8 PASS: constraint identity within {worst_id:.1e}; Markov residuals {worst_adder:.1e} (adder), {worst_gauss:.1e} (Gaussian)"
    );
}

/// Criterion 9: the general discrete upper-bound search reproduces the
/// adder closed form.
#[test]
fn criterion_9_discrete_upper_search() {
    let mac = binary_adder_mac();
    let o = opts();
    let mut worst: f64 = 0.0;
    for c in [0.5, 0.8, 1.0, 2.0] {
        let got = theorem1_upper(&mac, &cfg(c), &o).unwrap().value;
        let want = adder_upper(c).unwrap().value;
        worst = worst.max((got - want).abs());
        assert!(
            (got - want).abs() <= 2e-3,
            "criterion 9 FAIL: search upper({c}) = {got:.6} vs closed form {want:.6}"
        );
    }
    println!("criterion 9 PASS: discrete search matches the closed form within {worst:.2e} at four budgets");
}
