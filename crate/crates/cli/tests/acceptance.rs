//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spotmatch::assignment::{assign, PsaConfig, Tier};
use spotmatch::geometry::{polygon_diou, polygon_iou};
use spotmatch::harness::{
    correlation_report, evaluate, graded_jitter_points, synth_scenes, Lexicon, SynthConfig, WORDS,
};
use spotmatch::matching::hungarian;
use spotmatch::mms::{compute_factors, unsupervised_loss, LossTerms, MmsConfig, PairFactors, PairLoss, Reduction};
use spotmatch::pipeline::RunConfig;
use spotmatch::text::{levenshtein, Transcription};
use spotmatch_cli::{cmd_assign, cmd_synth, SynthOptions, SYNTH_FILES};
use spotmatch_testkit::{brute_force_min_cost, dp_levenshtein, random_matrix, random_polygon_pair, raster_iou};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: f64) -> (bool, String) {
    let s = elapsed.as_secs_f64();
    (s < limit_s, format!("{s:.2} s (limit {limit_s} s)"))
}

fn hungarian_optimality() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut mismatches = 0;
    for i in 0..1000 {
        let (r, c) = if i < 200 { (7, 7) } else { (rng.random_range(1..=7), rng.random_range(1..=7)) };
        let integral = rng.random_bool(0.3);
        let m = random_matrix(&mut rng, r, c, 10.0, integral);
        // summed in row order, like the exhaustive oracle
        let got: f64 = hungarian(&m).iter().map(|&(i, j)| m[i][j]).sum();
        if got != brute_force_min_cost(&m) {
            mismatches += 1;
        }
    }
    let (fast, t) = within(start.elapsed(), 10.0);
    outcome(mismatches == 0 && fast, format!("{} / 1000 exact, {t}", 1000 - mismatches))
}

fn iou_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let (a, b) = random_polygon_pair(&mut rng);
        worst = worst.max((polygon_iou(&a, &b) - raster_iou(&a, &b, 2048)).abs());
    }
    let (fast, t) = within(start.elapsed(), 60.0);
    outcome(worst <= 1e-3 && fast, format!("500 pairs, max |Δ| = {worst:.2e} (tol 1e-3), {t}"))
}

fn diou_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut self_err, mut above_iou, mut out_of_range) = (0.0f64, 0, 0);
    let n = 2000;
    for i in 0..n {
        let (a, mut b) = random_polygon_pair(&mut rng);
        if i % 4 == 0 {
            // disjoint pairs exercise the negative branch
            b = b.translated(rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0));
        }
        self_err = self_err.max((polygon_diou(&a, &a).unwrap() - 1.0).abs());
        let d = polygon_diou(&a, &b).unwrap();
        if d > polygon_iou(&a, &b) {
            above_iou += 1;
        }
        if !(-1.0..=1.0).contains(&d) {
            out_of_range += 1;
        }
    }
    outcome(
        self_err <= 1e-12 && above_iou == 0 && out_of_range == 0,
        format!("{n} pairs: max |DIoU(p,p)-1| = {self_err:.1e}, DIoU > IoU: {above_iou}, outside [-1,1]: {out_of_range}"),
    )
}

fn random_word(rng: &mut impl Rng) -> Vec<char> {
    const POOL: &[char] = &['a', 'b', 'c', 'd', 'A', 'é', '1', ' '];
    let len = rng.random_range(0..=25);
    let k = rng.random_range(2..=POOL.len());
    (0..len).map(|_| POOL[rng.random_range(0..k)]).collect()
}

fn levenshtein_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10_000);
    let mut disagree = 0;
    for _ in 0..10_000 {
        let (a, b) = (random_word(&mut rng), random_word(&mut rng));
        let (ta, tb) = (Transcription::new(a.clone()), Transcription::new(b.clone()));
        if levenshtein(&ta, &tb) != dp_levenshtein(&a, &b) {
            disagree += 1;
        }
    }
    outcome(disagree == 0, format!("{} / 10000 agree", 10_000 - disagree))
}

fn disparity_psa() -> PsaConfig {
    PsaConfig {
        text_cost: "disparity".into(),
        ..PsaConfig::default()
    }
}

fn corpus() -> Vec<spotmatch::harness::Scene> {
    let mut scenes = Vec::new();
    for (i, sigma) in [0.0, 0.005, 0.01, 0.02, 0.05].into_iter().enumerate() {
        for (j, cer) in [0.0, 0.05, 0.2].into_iter().enumerate() {
            let cfg = SynthConfig {
                seed: (i * 10 + j) as u64,
                n_instances: 12,
                jitter_sigma: sigma,
                char_error_rate: cer,
                score_noise: 0.15,
                ..SynthConfig::default()
            };
            scenes.extend(synth_scenes(&cfg, 20).unwrap());
        }
    }
    scenes
}

fn factor_ranges(scenes: &[spotmatch::harness::Scene]) -> Outcome {
    let mms = MmsConfig::default();
    let lambda = mms.lambda_scale;
    let (mut pairs, mut bad) = (0, 0);
    for s in scenes {
        let labels = assign(&s.teacher, &s.student, &disparity_psa()).unwrap().labels;
        for f in compute_factors(&s.teacher, &s.student, &labels, &mms).unwrap() {
            pairs += 1;
            if !(0.0..=2.0).contains(&f.alpha) || !(1.0..=1.0 + lambda).contains(&f.beta) {
                bad += 1;
            }
        }
    }
    let clean = SynthConfig {
        seed: 5,
        n_instances: 12,
        jitter_sigma: 0.0,
        char_error_rate: 0.0,
        score_noise: 0.0,
        ..SynthConfig::default()
    };
    let (mut clean_pairs, mut not_neutral) = (0, 0);
    for s in synth_scenes(&clean, 50).unwrap() {
        let labels = assign(&s.teacher, &s.student, &disparity_psa()).unwrap().labels;
        for f in compute_factors(&s.teacher, &s.student, &labels, &mms).unwrap() {
            clean_pairs += 1;
            if f.alpha != 2.0 || f.beta != 1.0 {
                not_neutral += 1;
            }
        }
    }
    outcome(
        pairs > 0 && bad == 0 && clean_pairs == 600 && not_neutral == 0,
        format!("{pairs} pairs, {bad} out of range; noiseless: {clean_pairs} pairs, {not_neutral} with α≠2 or β≠1"),
    )
}

fn loss_reduction() -> Outcome {
    let cfg = RunConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..20);
        let l_sup = rng.random_range(0.0..5.0);
        let tiers: Vec<Tier> = (0..n).map(|_| if rng.random_bool(0.5) { Tier::E2e } else { Tier::DetOnly }).collect();
        let pairs: Vec<PairLoss> = (0..n)
            .map(|_| PairLoss {
                cls: rng.random_range(0.0..3.0),
                reg: rng.random_range(0.0..3.0),
                rec: rng.random_range(0.0..3.0),
            })
            .collect();
        let factors: Vec<PairFactors> = tiers
            .iter()
            .enumerate()
            .map(|(i, &tier)| PairFactors {
                student: i,
                teacher: i,
                tier,
                alpha: 1.0,
                beta: 1.0,
                diou: 1.0,
                disparity: 0.0,
            })
            .collect();
        let mut cls = 0.0;
        let mut reg = 0.0;
        let mut rec = 0.0;
        for (p, t) in pairs.iter().zip(&tiers) {
            cls += p.cls;
            reg += p.reg;
            if *t == Tier::E2e {
                rec += p.rec;
            }
        }
        let sum = 1.0 * l_sup + 2.0 * (cls + reg + rec);
        let mean = 1.0 * l_sup + 2.0 * (cls + reg + rec) / n as f64;
        let terms = LossTerms {
            l_sup,
            pairs,
            omega_l: cfg.omega_l,
            omega_u: cfg.omega_u,
        };
        worst = worst
            .max((unsupervised_loss(&terms, &factors, Reduction::Sum).unwrap() - sum).abs())
            .max((unsupervised_loss(&terms, &factors, Reduction::Mean).unwrap() - mean).abs());
    }
    let defaults = cfg.omega_l == 1.0 && cfg.omega_u == 2.0;
    outcome(
        worst <= 1e-9 && defaults,
        format!("100 fixtures, max |Δ| = {worst:.1e} (tol 1e-9), defaults ω = ({}, {})", cfg.omega_l, cfg.omega_u),
    )
}

fn psa_monotonicity(scenes: &[spotmatch::harness::Scene]) -> Outcome {
    let grid = [0.5, 0.6, 0.7, 0.8, 0.9];
    let (mut violations, mut unsound, mut e2e_total) = (0, 0, vec![0usize; grid.len()]);
    for s in scenes {
        let mut last = usize::MAX;
        for (g, &t_rec) in grid.iter().enumerate() {
            let cfg = PsaConfig { t_rec, ..disparity_psa() };
            let labels = assign(&s.teacher, &s.student, &cfg).unwrap().labels;
            if labels.e2e.len() > last {
                violations += 1;
            }
            last = labels.e2e.len();
            e2e_total[g] += last;
            for &(si, ti) in &labels.e2e {
                let ct = s.teacher.instances[ti].confidence();
                let cs = s.student.instances[si].confidence();
                if !(ct > t_rec && ct > cs) {
                    unsound += 1;
                }
            }
        }
    }
    outcome(
        violations == 0 && unsound == 0 && e2e_total[0] > e2e_total[grid.len() - 1],
        format!("{} scenes, e2e totals {e2e_total:?}, {violations} increases, {unsound} unsound pairs", scenes.len()),
    )
}

fn correlation() -> Outcome {
    let start = Instant::now();
    let base = SynthConfig {
        seed: 42,
        n_instances: 25,
        char_error_rate: 0.05,
        ..SynthConfig::default()
    };
    let report = correlation_report(&graded_jitter_points(&base, 10_000, 10, 0.02).unwrap()).unwrap();
    let (fast, t) = within(start.elapsed(), 30.0);
    let monotone = report.similarity_non_increasing();
    let curve: Vec<String> = report.bins_diou.iter().map(|b| format!("{:.3}", b.mean_similarity)).collect();
    outcome(
        report.n == 10_000 && report.pearson_diou > 0.5 && monotone && fast,
        format!(
            "n = {}, r = {:.3} (> 0.5), bins [{}] monotone = {monotone}, {t}",
            report.n,
            report.pearson_diou,
            curve.join(" ")
        ),
    )
}

fn evaluation_sanity(scenes: &[spotmatch::harness::Scene]) -> Outcome {
    let lex = Lexicon::new(WORDS);
    let mut violations = 0;
    for s in scenes {
        for pred in [&s.teacher, &s.student] {
            let r = evaluate(std::slice::from_ref(pred), std::slice::from_ref(&s.gt), Some(&lex), 0.5).unwrap();
            if r.e2e_hmean_none > r.f1 || r.e2e_hmean_full.unwrap() > r.f1 {
                violations += 1;
            }
        }
    }
    let gts: Vec<_> = scenes.iter().take(20).map(|s| s.gt.clone()).collect();
    let p = evaluate(&gts, &gts, Some(&lex), 0.5).unwrap();
    let perfect = [p.precision, p.recall, p.f1, p.e2e_hmean_none, p.e2e_hmean_full.unwrap()]
        .iter()
        .all(|&m| m == 1.0);
    outcome(
        violations == 0 && perfect,
        format!("{} scene evaluations, {violations} with e2e > F1; perfect fixture all 1.0 = {perfect}", 2 * scenes.len()),
    )
}

fn determinism() -> Outcome {
    let opts = SynthOptions {
        scene: SynthConfig {
            seed: 42,
            n_instances: 10,
            emit_dists: true,
            ..SynthConfig::default()
        },
        n_images: 20,
    };
    let synth_once = || {
        let dir = tempfile::tempdir().unwrap();
        let paths = cmd_synth(&opts, dir.path()).unwrap();
        let files: Vec<Vec<u8>> = paths.iter().map(|p| fs::read(p).unwrap()).collect();
        let mut assigned = Vec::new();
        cmd_assign(&paths[1], &paths[2], &RunConfig::default(), &mut assigned).unwrap();
        (files, assigned)
    };
    let (f1, a1) = synth_once();
    let (f2, a2) = synth_once();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut golden_cfg = RunConfig::default();
    golden_cfg.psa.text_cost = "disparity".into();
    let golden = || {
        let mut out = Vec::new();
        cmd_assign(&fixtures.join("teacher.jsonl"), &fixtures.join("student.jsonl"), &golden_cfg, &mut out).unwrap();
        out
    };
    let same_synth = f1 == f2;
    let same_assign = a1 == a2 && golden() == golden();
    outcome(
        same_synth && same_assign,
        format!(
            "synth {} identical = {same_synth}, assign ({} bytes + golden fixture) identical = {same_assign}",
            SYNTH_FILES.join("/"),
            a1.len()
        ),
    )
}

fn main() -> ExitCode {
    let scenes = corpus();
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let checks: Vec<(&str, Check)> = vec![
        ("hungarian_optimality", Box::new(hungarian_optimality)),
        ("polygon_iou_raster_oracle", Box::new(iou_oracle)),
        ("diou_identities", Box::new(diou_identities)),
        ("levenshtein_dp_oracle", Box::new(levenshtein_oracle)),
        ("factor_ranges", Box::new(|| factor_ranges(&scenes))),
        ("loss_reduction", Box::new(loss_reduction)),
        ("psa_monotonicity", Box::new(|| psa_monotonicity(&scenes))),
        ("deviation_similarity_correlation", Box::new(correlation)),
        ("evaluation_sanity", Box::new(|| evaluation_sanity(&scenes))),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (name, check) in &checks {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
