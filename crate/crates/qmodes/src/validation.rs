//! The acceptance criteria as runnable checks, shared between the CLI
//! `validate` subcommand and the integration test suite. Each criterion
//! reports one pass/fail line with measured values.

use num_complex::Complex64 as C64;

use crate::algebra::{self, GenName, Group};
use crate::disentangle::{self, FactoredForm};
use crate::error::Result;
use crate::fock::{self, BlockPropagator};
use crate::models::{reduce, ModelSpec};
use crate::prng::SplitMix64;
use crate::smallmat::{self, CMat};
use crate::transition::{self, Regime};

/// Tunable oracle settings; the defaults are the documented ones.
#[derive(Debug, Clone)]
pub struct Settings {
    /// Per-mode cap for the amplifier closed-vs-oracle grid.
    pub pa_nmax: usize,
    /// Per-mode cap for the Raman closed-vs-oracle grid.
    pub raman_nmax: usize,
    /// Per-mode cap for the Raman unitarity-sum block.
    pub raman_unitarity_nmax: usize,
    /// Conserved-pair-block cap for the amplifier growth check.
    pub growth_nmax: usize,
    /// Seed for the random coefficient draws.
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            pa_nmax: 60,
            raman_nmax: 14,
            raman_unitarity_nmax: 20,
            growth_nmax: 1200,
            seed: 0x051D_5EED,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

pub const CRITERION_NAMES: [&str; 8] = [
    "algebra-exactness",
    "factorization-identity",
    "frequency-converter-vs-oracle",
    "amplifier-regimes-and-oracle",
    "raman-selection-and-oracle",
    "exponential-dual-route",
    "interaction-picture-convergence",
    "discrepancy-report",
];

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Criterion 1: the four representations reproduce their commutation
/// tables in exact rational arithmetic.
pub fn criterion_algebra() -> CriterionResult {
    let mut ok = true;
    let mut notes = Vec::new();
    for group in Group::ALL {
        let set = algebra::generators(group);
        match algebra::commutator_table(set) {
            Ok(table) => {
                if table != set.structure_constants {
                    ok = false;
                    notes.push(format!("{group}: recomputed table differs"));
                }
            }
            Err(e) => {
                ok = false;
                notes.push(format!("{group}: {e}"));
            }
        }
    }
    // printed anchor relations, exact
    let anchors: [(Group, GenName, GenName, GenName, i64); 6] = [
        (Group::Su2, GenName::JPlus, GenName::JMinus, GenName::J3, 2),
        (Group::Su11, GenName::KPlus, GenName::KMinus, GenName::K3, -2),
        (Group::Su21, GenName::A, GenName::B, GenName::C, 2),
        (Group::Su21, GenName::D, GenName::E, GenName::F, -2),
        (Group::Su21, GenName::G, GenName::J, GenName::K, -2),
        (Group::Su3, GenName::A, GenName::B, GenName::C, 2),
    ];
    for (group, a, b, out, coeff) in anchors {
        let set = algebra::generators(group);
        let got = algebra::bracket(set, a, b);
        let want = vec![(out, num_rational::Rational64::new(coeff, 1))];
        if got != want {
            ok = false;
            notes.push(format!("{group}: [{a},{b}] mismatch"));
        }
    }
    // F - C = K for both 3x3 families
    for group in [Group::Su21, Group::Su3] {
        let set = algebra::generators(group);
        let f = set.matrix(GenName::F).unwrap();
        let cg = set.matrix(GenName::C).unwrap();
        let k = set.matrix(GenName::K).unwrap();
        if &f.sub(cg).unwrap() != k {
            ok = false;
            notes.push(format!("{group}: F - C != K"));
        }
    }
    CriterionResult {
        name: CRITERION_NAMES[0],
        passed: ok,
        detail: if ok {
            "all commutation tables exact; F - C = K holds".into()
        } else {
            notes.join("; ")
        },
    }
}

fn draw_exponent(rng: &mut SplitMix64, group: Group, cap: f64) -> (Vec<(GenName, C64)>, CMat) {
    let set = algebra::generators(group);
    let names = set.names();
    loop {
        let coeffs: Vec<(GenName, C64)> = names
            .iter()
            .map(|&n| (n, c(rng.sym(1.0), rng.sym(1.0))))
            .collect();
        let m = algebra::assemble(&coeffs, set).unwrap();
        let norm = m.frobenius();
        if norm > 1e-3 {
            let s = rng.next_f64() * cap / norm;
            let scaled: Vec<(GenName, C64)> = coeffs.iter().map(|&(n, v)| (n, v * s)).collect();
            let m = algebra::assemble(&scaled, set).unwrap();
            return (scaled, m);
        }
    }
}

fn factorize_draw(group: Group, coeffs: &[(GenName, C64)], m: &CMat) -> Result<FactoredForm> {
    match group {
        Group::Su2 | Group::Su11 => {
            let w3 = coeffs[2].1;
            let (wm, wp) = (coeffs[0].1, coeffs[1].1);
            disentangle::disentangle_rank1(group, w3, wp, wm)
        }
        Group::Su21 => disentangle::disentangle_su21_exponent(m),
        Group::Su3 => disentangle::disentangle_su3(m, 1.0),
    }
}

/// Criterion 2: the factored product reproduces the direct exponential for
/// 100 random coefficient draws per group with exponent norm <= 2.
pub fn criterion_factorization(settings: &Settings) -> CriterionResult {
    let mut rng = SplitMix64::new(settings.seed);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for group in Group::ALL {
        for draw in 0..100 {
            let (coeffs, m) = draw_exponent(&mut rng, group, 2.0);
            let direct = smallmat::expm(&m, c(1.0, 0.0));
            match factorize_draw(group, &coeffs, &m) {
                Ok(f) => {
                    let r = disentangle::verify_factorization(&f, &direct).unwrap();
                    worst = worst.max(r);
                    if r >= 1e-10 {
                        failures.push(format!("{group} draw {draw}: residual {r:.2e}"));
                    }
                }
                Err(e) => failures.push(format!("{group} draw {draw}: {e}")),
            }
        }
    }
    CriterionResult {
        name: CRITERION_NAMES[1],
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("400 draws, worst residual {worst:.2e} < 1e-10")
        } else {
            failures.join("; ")
        },
    }
}

/// Criterion 3: converter swap probability vs the exact conserved-block
/// oracle over the parameter grid, plus the full-swap anchor point.
pub fn criterion_converter() -> CriterionResult {
    let mut worst: f64 = 0.0;
    for n in 1..=4u32 {
        for &k in &[0.5, 1.0, 2.0] {
            for &delta in &[0.0, 1.0, 3.0] {
                let spec = ModelSpec::FrequencyConverter {
                    omega_a: 1.3,
                    omega_b: 0.7,
                    k,
                    delta,
                };
                let basis = fock::build_basis(2, n as usize).unwrap();
                let form = reduce(&spec).unwrap();
                let prop = fock::interaction_propagator(&form, &basis).unwrap();
                let fi = basis.index(&[0, n as usize]).unwrap();
                let ii = basis.index(&[n as usize, 0]).unwrap();
                for step in 0..20 {
                    let t = 5.0 * (step as f64 + 1.0) / 20.0;
                    let oracle = prop.amplitude_at(t, fi, ii).norm_sqr();
                    let closed = transition::fc_swap_probability(n, k, delta, t);
                    worst = worst.max((oracle - closed).abs());
                }
            }
        }
    }
    let anchor = transition::fc_swap_probability(1, 1.0, 0.0, std::f64::consts::FRAC_PI_2);
    let anchor_ok = (anchor - 1.0).abs() < 1e-12;
    let passed = worst < 1e-9 && anchor_ok;
    CriterionResult {
        name: CRITERION_NAMES[2],
        passed,
        detail: format!(
            "max |closed - oracle| = {worst:.2e} over 720 grid points; anchor P(swap) = {anchor:.15}"
        ),
    }
}

/// Criterion 4: amplifier regimes and closed-vs-oracle agreement.
pub fn criterion_amplifier(settings: &Settings) -> CriterionResult {
    let mut notes = Vec::new();
    let mut ok = true;

    // (1, 3): oscillatory; oracle probability bounded below 1 on [0, 50]
    let (k_osc, d_osc) = (1.0, 3.0);
    if transition::pa_regime(k_osc, d_osc) != Regime::Oscillatory {
        ok = false;
        notes.push("(1,3) not classified oscillatory".to_string());
    }
    let spec = ModelSpec::ParametricAmplifier {
        omega_a: 1.0,
        omega_b: 1.0,
        k: k_osc,
        delta: d_osc,
    };
    let form = reduce(&spec).unwrap();
    let terms = fock::interaction_terms(&form).unwrap();
    let block = BlockPropagator::new(&terms, 80, &[0, 0], 10_000).unwrap();
    let mut sup: f64 = 0.0;
    for i in 0..=500 {
        let t = 50.0 * i as f64 / 500.0;
        sup = sup.max(block.probability_at(t, &[1, 1]));
    }
    if sup >= 1.0 {
        ok = false;
    }
    notes.push(format!("oscillatory sup P = {sup:.6} < 1"));

    // (2, 2): growth regime; oracle mean photon number grows by > e
    if transition::pa_regime(2.0, 2.0) != Regime::Growth {
        ok = false;
        notes.push("(2,2) not classified growth".to_string());
    }
    let spec = ModelSpec::ParametricAmplifier {
        omega_a: 1.0,
        omega_b: 1.0,
        k: 2.0,
        delta: 2.0,
    };
    let form = reduce(&spec).unwrap();
    let terms = fock::interaction_terms(&form).unwrap();
    let block =
        BlockPropagator::new(&terms, settings.growth_nmax, &[0, 0], settings.growth_nmax + 2)
            .unwrap();
    let n_early = block.mean_occupation_at(1.5, 0);
    let n_late = block.mean_occupation_at(3.0, 0);
    let ratio = n_late / n_early;
    if ratio <= std::f64::consts::E {
        ok = false;
    }
    notes.push(format!(
        "growth <n>(3)/<n>(1.5) = {n_late:.1}/{n_early:.1} = {ratio:.2} > e"
    ));

    // closed form vs full-basis oracle, kt <= 2
    let mut worst: f64 = 0.0;
    for &(k, delta) in &[(0.5, 0.0), (1.0, 0.0), (1.0, 1.0), (1.0, 3.0), (2.0, 2.0)] {
        let spec = ModelSpec::ParametricAmplifier {
            omega_a: 1.0,
            omega_b: 1.0,
            k,
            delta,
        };
        let basis = match fock::build_basis(2, settings.pa_nmax) {
            Ok(b) => b,
            Err(e) => {
                return CriterionResult {
                    name: CRITERION_NAMES[3],
                    passed: false,
                    detail: format!("oracle basis: {e}"),
                }
            }
        };
        let form = reduce(&spec).unwrap();
        let prop = fock::interaction_propagator(&form, &basis).unwrap();
        let fi = basis.index(&[1, 1]).unwrap();
        let ii = basis.index(&[0, 0]).unwrap();
        for step in 1..=20 {
            let t = 2.0 / k * step as f64 / 20.0;
            let oracle = prop.amplitude_at(t, fi, ii).norm_sqr();
            let closed = transition::pa_vac_to_11_probability(k, delta, t);
            worst = worst.max((oracle - closed).abs());
        }
    }
    if worst >= 1e-6 {
        ok = false;
    }
    notes.push(format!(
        "max |closed - oracle| = {worst:.2e} (n_max = {})",
        settings.pa_nmax
    ));

    CriterionResult {
        name: CRITERION_NAMES[3],
        passed: ok,
        detail: notes.join("; "),
    }
}

fn raman_coupling_sets() -> [(ModelSpec, f64); 2] {
    [
        (
            ModelSpec::Raman {
                omega_v: 0.9,
                omega_s: 1.4,
                omega_a: 0.6,
                g_s: 0.6,
                g_a: 0.4,
                k_s: 0.3,
                k_a: 0.1,
            },
            0.9,
        ),
        (
            ModelSpec::Raman {
                omega_v: 0.9,
                omega_s: 1.4,
                omega_a: 0.6,
                g_s: 0.4,
                g_a: 0.9,
                k_s: 1.1,
                k_a: 0.2,
            },
            1.2,
        ),
    ]
}

/// Criterion 5: Raman selection rule, closed form vs oracle, exact
/// conserved-charge commutator, and the truncation-deficit certificate.
pub fn criterion_raman(settings: &Settings) -> CriterionResult {
    let mut ok = true;
    let mut notes = Vec::new();

    let mut worst_closed: f64 = 0.0;
    let mut worst_forbidden: f64 = 0.0;
    let mut worst_deficit: f64 = 0.0;
    for (spec, t) in raman_coupling_sets() {
        let form = reduce(&spec).unwrap();

        // exact conserved charge on interior rows
        let basis = fock::build_basis(3, 6).unwrap();
        let h = fock::terms_matrix(&fock::interaction_terms(&form).unwrap(), &basis);
        let q = fock::terms_matrix(&fock::charge_terms(Group::Su21), &basis);
        let comm_norm = h.commutator(&q).max_abs_on(|i, j| {
            basis.interior(&basis.state(i), 2) && basis.interior(&basis.state(j), 2)
        });
        if comm_norm != 0.0 {
            ok = false;
            notes.push(format!("[H, Q] interior norm {comm_norm:.2e} != 0"));
        }

        // oracle column from the vacuum
        let basis = match fock::build_basis(3, settings.raman_nmax) {
            Ok(b) => b,
            Err(e) => {
                return CriterionResult {
                    name: CRITERION_NAMES[4],
                    passed: false,
                    detail: format!("oracle basis: {e}"),
                }
            }
        };
        let prop = fock::interaction_propagator(&form, &basis).unwrap();
        let vac = basis.index(&[0, 0, 0]).unwrap();
        let column = prop.column_at(t, vac);
        for (idx, amp) in &column {
            let st = basis.state(*idx);
            if st[1] != st[0] + st[2] {
                worst_forbidden = worst_forbidden.max(amp.norm_sqr());
            }
        }
        for step in 1..=20 {
            let tg = t * step as f64 / 20.0;
            for m_v in 0..=3usize {
                for m_a in 0..=3usize {
                    let m_s = m_v + m_a;
                    if m_s > 3 {
                        continue;
                    }
                    let oracle = prop
                        .amplitude_at(tg, basis.index(&[m_v, m_s, m_a]).unwrap(), vac)
                        .norm_sqr();
                    let r = transition::raman_from_vacuum(m_v, m_s, m_a, &spec, tg).unwrap();
                    worst_closed = worst_closed.max((r.prob_closed - oracle).abs());
                }
            }
        }

        // unitarity certificate on the conserved block at a higher cap
        let terms = fock::interaction_terms(&form).unwrap();
        let block =
            BlockPropagator::new(&terms, settings.raman_unitarity_nmax, &[0, 0, 0], 50_000)
                .unwrap();
        let psi = block.psi_at(t);
        let half = settings.raman_unitarity_nmax / 2;
        let mass: f64 = block
            .states
            .iter()
            .zip(psi.iter())
            .filter(|(s, _)| s[1] <= half && s[1] == s[0] + s[2])
            .map(|(_, a)| a.norm_sqr())
            .sum();
        worst_deficit = worst_deficit.max(1.0 - mass);
    }
    if worst_forbidden >= 1e-8 {
        ok = false;
    }
    if worst_closed >= 1e-6 {
        ok = false;
    }
    if worst_deficit >= 1e-6 {
        ok = false;
    }
    notes.push(format!(
        "forbidden max P = {worst_forbidden:.2e}; closed-vs-oracle max err = {worst_closed:.2e}; deficit = {worst_deficit:.2e}"
    ));
    CriterionResult {
        name: CRITERION_NAMES[4],
        passed: ok,
        detail: notes.join("; "),
    }
}

/// Criterion 6: the spectral-weight route, the biorthogonal eigenvector
/// route and the series exponential agree pairwise, including the printed
/// closed form of the (1,1) rotation entry.
pub fn criterion_dual_route(settings: &Settings) -> CriterionResult {
    let mut rng = SplitMix64::new(settings.seed ^ 0x0D0A_1CE5);
    let mut worst: f64 = 0.0;
    let mut entry_worst: f64 = 0.0;
    for _ in 0..50 {
        let (g1, g2, g3) = (rng.sym(2.0), rng.sym(2.0), rng.sym(2.0));
        let t = rng.next_f64() * 3.0;
        let m = CMat::from_rows(&[
            &[c(0.0, 0.0), c(g1 * t, 0.0), c(g3 * t, 0.0)],
            &[c(-g1 * t, 0.0), c(0.0, 0.0), c(g2 * t, 0.0)],
            &[c(-g3 * t, 0.0), c(-g2 * t, 0.0), c(0.0, 0.0)],
        ]);
        let via_series = smallmat::expm_series(&m);
        let via_spectral = match smallmat::expm_spectral(&m) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let via_eig = match smallmat::eig(&m) {
            Ok(es) => es.apply(|lam| lam.exp()),
            Err(_) => continue,
        };
        worst = worst.max(via_spectral.sub(&via_series).max_abs());
        worst = worst.max(via_eig.sub(&via_series).max_abs());
        worst = worst.max(via_spectral.sub(&via_eig).max_abs());

        let sum = g1 * g1 + g2 * g2 + g3 * g3;
        let closed = g2 * g2 / sum + (g1 * g1 + g3 * g3) / sum * (sum.sqrt() * t).cos();
        entry_worst = entry_worst.max((via_series.get(0, 0) - c(closed, 0.0)).norm());
    }
    let passed = worst < 1e-11 && entry_worst < 1e-11;
    CriterionResult {
        name: CRITERION_NAMES[5],
        passed,
        detail: format!(
            "pairwise route disagreement {worst:.2e}; (1,1)-entry closed form err {entry_worst:.2e}"
        ),
    }
}

/// Criterion 7: the time-ordered stepper converges to the interaction
/// factorization at second order for all three physical models.
pub fn criterion_convergence() -> CriterionResult {
    let cases: [(&str, ModelSpec, usize); 3] = [
        (
            "converter",
            ModelSpec::FrequencyConverter {
                omega_a: 1.3,
                omega_b: 0.7,
                k: 1.0,
                delta: 0.5,
            },
            6,
        ),
        (
            "amplifier",
            ModelSpec::ParametricAmplifier {
                omega_a: 1.1,
                omega_b: 0.9,
                k: 0.7,
                delta: 0.8,
            },
            12,
        ),
        (
            "raman",
            ModelSpec::Raman {
                omega_v: 0.9,
                omega_s: 1.4,
                omega_a: 0.6,
                g_s: 0.4,
                g_a: 0.5,
                k_s: 0.6,
                k_a: 0.2,
            },
            4,
        ),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, spec, n_max) in cases {
        let basis = fock::build_basis(spec.n_modes(), n_max).unwrap();
        let form = reduce(&spec).unwrap();
        let t = 1.0;
        let exact = fock::free_propagator(&form, &basis, t)
            .dot(&fock::evolve_interaction(&form, &basis, t).unwrap());
        let mut errs = Vec::new();
        for steps in [32usize, 64, 128] {
            let u = fock::evolve_timedep(&spec, &basis, t, t / steps as f64).unwrap();
            let err = (&u - &exact).iter().map(|v| v.norm()).fold(0.0, f64::max);
            errs.push(err);
        }
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        let order = order1.min(order2);
        if order < 1.9 {
            ok = false;
        }
        notes.push(format!("{name}: observed order {order:.2}"));
    }
    CriterionResult {
        name: CRITERION_NAMES[6],
        passed: ok,
        detail: notes.join("; "),
    }
}

/// Criterion 8: every printed-formula discrepancy, with the measured
/// printed and corrected values; each entry passes when the two values
/// differ or agree exactly as documented.
pub fn criterion_ledger(settings: &Settings) -> CriterionResult {
    let mut ok = true;
    let mut notes = Vec::new();

    // (a) rank-1 off-diagonal factor 2
    {
        let theta = 0.7f64;
        let w = c(0.0, -theta);
        let set = algebra::generators(Group::Su2);
        let m = algebra::assemble(&[(GenName::JPlus, w), (GenName::JMinus, w)], set).unwrap();
        let direct = smallmat::expm(&m, c(1.0, 0.0));
        let matched = disentangle::disentangle_rank1(Group::Su2, c(0.0, 0.0), w, w).unwrap();
        let printed = disentangle::rank1_printed(Group::Su2, c(0.0, 0.0), w, w).unwrap();
        let r_matched = disentangle::verify_factorization(&matched, &direct).unwrap();
        let r_printed = disentangle::verify_factorization(&printed, &direct).unwrap();
        let xm = matched.coefficient(GenName::JMinus).unwrap();
        let xp = printed.coefficient(GenName::JMinus).unwrap();
        let entry_ok = (xm - 2.0 * xp).norm() < 1e-12 && r_matched < 1e-10 && r_printed > 1e-3;
        ok &= entry_ok;
        notes.push(format!(
            "rank1-factor-2[{}]: matched X- = {:.6}{:+.6}i residual {:.1e}; printed X- = {:.6}{:+.6}i residual {:.1e}",
            if entry_ok { "ok" } else { "BAD" },
            xm.re, xm.im, r_matched, xp.re, xp.im, r_printed
        ));
    }

    // (b) the K3 constant: exact +1 in [K+, K-] and its effect on the
    // amplifier vacuum probability
    {
        let basis = fock::build_basis(2, 8).unwrap();
        let kp = fock::generator_terms(Group::Su11, GenName::KPlus).unwrap();
        let km = fock::generator_terms(Group::Su11, GenName::KMinus).unwrap();
        let k3 = fock::terms_matrix(
            &fock::generator_terms(Group::Su11, GenName::K3).unwrap(),
            &basis,
        );
        let comm_plus_2k3 = fock::commutator_matrix(&kp, &km, &basis).plus(&k3.scaled(c(2.0, 0.0)));
        let interior_norm = comm_plus_2k3.max_abs_on(|i, j| {
            basis.interior(&basis.state(i), 2) && basis.interior(&basis.state(j), 2)
        });

        let (k, delta, t) = (0.8, 0.0, 1.1);
        let spec = ModelSpec::ParametricAmplifier {
            omega_a: 1.0,
            omega_b: 1.0,
            k,
            delta,
        };
        let form = reduce(&spec).unwrap();
        let terms = fock::interaction_terms(&form).unwrap();
        let block = BlockPropagator::new(&terms, settings.pa_nmax, &[0, 0], 10_000).unwrap();
        let oracle = block.probability_at(t, &[1, 1]);
        let r = transition::pa_vac_to_11(k, delta, t).unwrap();
        let entry_ok = interior_norm == 0.0
            && (r.prob_closed - oracle).abs() < 1e-8
            && (r.prob_closed_printed - oracle).abs() > 1e-3;
        ok &= entry_ok;
        notes.push(format!(
            "k3-constant[{}]: [K+,K-]+2K3 interior norm = {interior_norm:.1e}; P(1,1) printed {:.6} vs corrected {:.6} vs oracle {oracle:.6}",
            if entry_ok { "ok" } else { "BAD" },
            r.prob_closed_printed, r.prob_closed
        ));
    }

    // (c) the combinatorial coefficient and (d) the vacuum normalization
    {
        let (spec, t) = raman_coupling_sets()[0].clone();
        let form = reduce(&spec).unwrap();
        let basis = fock::build_basis(3, settings.raman_nmax).unwrap();
        let prop = fock::interaction_propagator(&form, &basis).unwrap();
        let vac = basis.index(&[0, 0, 0]).unwrap();

        let mut comb_ok = true;
        for (m_v, m_s, m_a) in [(1usize, 2usize, 1usize), (0, 2, 2), (2, 3, 1)] {
            let oracle = prop
                .amplitude_at(t, basis.index(&[m_v, m_s, m_a]).unwrap(), vac)
                .norm_sqr();
            let r = transition::raman_from_vacuum(m_v, m_s, m_a, &spec, t).unwrap();
            comb_ok &= (r.prob_closed - oracle).abs() < 1e-6
                && (r.prob_closed_printed - oracle).abs() > 1e-8;
            if (m_v, m_s, m_a) == (1, 2, 1) {
                notes.push(format!(
                    "pair-coefficient[{}]: P(1,2,1) printed {:.6e} vs corrected {:.6e} vs oracle {:.6e}",
                    if comb_ok { "ok" } else { "BAD" },
                    r.prob_closed_printed, r.prob_closed, oracle
                ));
            }
        }
        ok &= comb_ok;

        // vacuum normalization |d3|^2: must differ from 1 and reproduce the
        // oracle vacuum-persistence probability
        let r = transition::raman_from_vacuum(0, 0, 0, &spec, t).unwrap();
        let oracle_vac = prop.amplitude_at(t, vac, vac).norm_sqr();
        let norm_sq = r.normalization.norm_sqr();
        let entry_ok = (norm_sq - 1.0).abs() > 1e-3 && (r.prob_closed - oracle_vac).abs() < 1e-6;
        ok &= entry_ok;
        notes.push(format!(
            "vacuum-normalization[{}]: |norm|^2 = {norm_sq:.6} (printed form assumes 1); P(vac) corrected {:.6} vs oracle {oracle_vac:.6}",
            if entry_ok { "ok" } else { "BAD" },
            r.prob_closed
        ));
    }

    CriterionResult {
        name: CRITERION_NAMES[7],
        passed: ok,
        detail: notes.join(" | "),
    }
}

/// Run every criterion in order.
pub fn run_all(settings: &Settings) -> Vec<CriterionResult> {
    vec![
        criterion_algebra(),
        criterion_factorization(settings),
        criterion_converter(),
        criterion_amplifier(settings),
        criterion_raman(settings),
        criterion_dual_route(settings),
        criterion_convergence(),
        criterion_ledger(settings),
    ]
}
