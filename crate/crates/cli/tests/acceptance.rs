//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::Instant;

use lshxdp::audit::{
    certify_pxdp, enumerate_2d_channel, error_bound_check, estimate_collision_rate, hamming_law_check,
    hyperplane_release_leakage,
};
use lshxdp::data::{synthesize, SynthSpec};
use lshxdp::lsh::sample_family;
use lshxdp::mechanisms::{laplace_noise, Mechanism};
use lshxdp::nns::{exact_knn, mean_and_std_err, Dataset, MatchingExperiment};
use lshxdp::privacy::{
    cxdp_params, epsilon_for_target_xi, kl_bernoulli, pxdp_budget_simple, rr_flip_probability, solve_alpha,
    PrivacyParams,
};
use lshxdp::rng::substream;
use lshxdp::vectors::{angular_distance, DenseVector};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, ok: String, bad: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad())
    }
}

fn pair(d: f64) -> (DenseVector, DenseVector) {
    let t = PI * d;
    (
        DenseVector::new(vec![1.0, 0.0, 0.0]).unwrap(),
        DenseVector::new(vec![t.cos(), t.sin(), 0.0]).unwrap(),
    )
}

/// Published XDP-to-LDP table: rows (d_θ, ξ) and columns κ = 10, 20, 50.
const TABLE1: [(f64, f64, [i64; 3]); 8] = [
    (0.05, 1.0, [3, 4, 6]),
    (0.05, 5.0, [14, 20, 30]),
    (0.05, 10.0, [28, 40, 60]),
    (0.05, 20.0, [55, 79, 120]),
    (0.1, 1.0, [2, 3, 4]),
    (0.1, 5.0, [10, 14, 20]),
    (0.1, 10.0, [21, 28, 40]),
    (0.1, 20.0, [42, 57, 80]),
];

fn c1_table() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_lshxdp"))
        .args(["budget", "--table1", "--format", "csv"])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("exit status {}", out.status));
    }
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let mut matched = 0;
    let mut mismatches = Vec::new();
    for (d, xi, want) in TABLE1 {
        for (kappa, w) in [10, 20, 50].into_iter().zip(want) {
            let row = rows.iter().find(|r| {
                r[0].parse::<f64>() == Ok(d) && r[1].parse::<f64>() == Ok(xi) && r[2].parse::<usize>() == Ok(kappa)
            });
            match row.map(|r| r[6].parse::<i64>()) {
                Some(Ok(got)) if got == w => matched += 1,
                other => mismatches.push(format!("(d={d}, xi={xi}, kappa={kappa}): {other:?} vs {w}")),
            }
        }
    }
    check(
        matched == 24 && rows.len() == 24,
        format!("{matched}/24 entries"),
        || mismatches.join("; "),
    )
}

fn c2_flip_anchor() -> Outcome {
    let eps = epsilon_for_target_xi(5.0, 20, 0.05, 0.01).map_err(|e| e.to_string())?;
    let p = rr_flip_probability(eps).map_err(|e| e.to_string())?;
    check((0.26..=0.28).contains(&p), format!("eps={eps:.5} flip={p:.5}"), || {
        format!("flip={p}")
    })
}

fn c3_toy_channel() -> Outcome {
    let inputs: Vec<DenseVector> = [[0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]
        .iter()
        .map(|v| DenseVector::new(v.to_vec()).unwrap())
        .collect();
    let cm = enumerate_2d_channel(&inputs).map_err(|e| e.to_string())?;
    let mut probs: Vec<f64> = cm.functions.iter().map(|f| f.probability).collect();
    probs.sort_by(f64::total_cmp);
    let want = [0.125, 0.125, 0.125, 0.125, 0.25, 0.25];
    let probs_ok = probs.len() == 6 && probs.iter().zip(want).all(|(p, w)| (p - w).abs() < 1e-12);
    let rows_ok = cm.channel.iter().all(|p| (p - 0.5).abs() < 1e-12);
    let leak = hyperplane_release_leakage(&cm);
    let leak_ok = (leak.prob_singleton - 0.5).abs() < 1e-12;
    check(
        probs_ok && rows_ok && leak_ok,
        format!("6 functions {probs:?}, singleton prob {}", leak.prob_singleton),
        || {
            format!(
                "probs={probs:?} channel={:?} singleton={}",
                cm.channel, leak.prob_singleton
            )
        },
    )
}

fn c4_collision() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (i, d) in [0.0, 0.25, 0.5, 0.75, 1.0].into_iter().enumerate() {
        let (x, y) = pair(d);
        let r = estimate_collision_rate(&x, &y, 10_000, 4000 + i as u64).map_err(|e| e.to_string())?;
        ok &= r.pass;
        parts.push(format!("d={d}:{:.4}", r.rate));
    }
    check(ok, parts.join(" "), || parts.join(" "))
}

fn c5_hamming_law() -> Outcome {
    let (x, y) = pair(0.25);
    let r = hamming_law_check(&x, &y, 20, 1000, 5000).map_err(|e| e.to_string())?;
    let detail = format!(
        "mean {:.3} in [{:.3}, {:.3}], var {:.3} in [{:.3}, {:.3}]",
        r.mean, r.mean_band.0, r.mean_band.1, r.variance, r.variance_band.0, r.variance_band.1
    );
    check(r.pass, detail.clone(), || detail)
}

fn c6_error_bound() -> Outcome {
    let x = DenseVector::new(vec![1.0, 0.3, -0.2, 0.0]).unwrap();
    let y = DenseVector::new(vec![-0.1, 1.0, 0.4, 0.5]).unwrap();
    let mut worst = 0.0f64;
    let mut fails = Vec::new();
    for (i, eps) in [0.0, 0.5, 1.0, 2.0].into_iter().enumerate() {
        for kappa in [10, 20] {
            let r = error_bound_check(eps, kappa, &x, &y, 2000, 6000 + 10 * i as u64 + kappa as u64)
                .map_err(|e| e.to_string())?;
            worst = worst.max(r.mean_error / r.bound);
            if !r.pass {
                fails.push(format!("eps={eps} kappa={kappa}: {} > {}", r.mean_error, r.bound));
            }
        }
    }
    check(fails.is_empty(), format!("8 points, max mean/bound {worst:.3}"), || {
        fails.join("; ")
    })
}

fn c7_pxdp() -> Outcome {
    let mut grid = Vec::new();
    for (kappa, eps) in [(10, 1.0), (20, 1.0), (50, 0.5)] {
        for d in [0.05, 0.25] {
            for delta in [0.01, 0.1] {
                grid.push((eps, kappa, d, delta));
            }
        }
    }
    let mut fails = Vec::new();
    for (i, &(eps, kappa, d, delta)) in grid.iter().enumerate() {
        let (x, y) = pair(d);
        let r = certify_pxdp(eps, kappa, &x, &y, delta, 10_000, 7000 + i as u64).map_err(|e| e.to_string())?;
        let tight_ok = r.tight.as_ref().is_some_and(|t| t.pass);
        if !(r.simple.pass && tight_ok) {
            fails.push(format!("({eps}, {kappa}, {d}, {delta}): {r:?}"));
        }
    }
    check(
        fails.is_empty(),
        format!("{} points x 10000 families, both bounds", grid.len()),
        || fails.join("; "),
    )
}

fn c8_laplace_radius() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (n, eps, seed) in [(3usize, 2.0, 81u64), (100, 1.0, 82)] {
        let m = 10_000;
        let mut r = substream(seed, 0);
        let radii: Vec<f64> = (0..m)
            .map(|_| {
                laplace_noise(eps, n, &mut r)
                    .unwrap()
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let (mean, se) = mean_and_std_err(radii.into_iter());
        let target = n as f64 / eps;
        ok &= (mean - target).abs() <= 3.0 * se;
        parts.push(format!("n={n} eps={eps}: {mean:.3} vs {target} (se {se:.3})"));
    }
    check(ok, parts.join(", "), || parts.join(", "))
}

fn pooled(exp: &MatchingExperiment, kappa: usize, mech: Mechanism) -> (f64, f64) {
    let mut losses = Vec::new();
    for f in 0..3u64 {
        let fam = sample_family(100, kappa, 9100 + f).unwrap();
        let res = exp.run(&fam, mech, 9200 + f).unwrap();
        losses.extend(res.per_query.iter().map(|q| q.utility_loss));
    }
    mean_and_std_err(losses.into_iter())
}

fn within(a: (f64, f64), b: (f64, f64)) -> f64 {
    2.0 * (a.1 * a.1 + b.1 * b.1).sqrt()
}

fn c9_matching() -> Outcome {
    let s: Dataset = synthesize(&SynthSpec {
        n: 100,
        clusters: 10,
        users_per_cluster: 20,
        sigma_theta: 0.1,
        seed: 9,
    })
    .map_err(|e| e.to_string())?;
    let queries = s.ids().to_vec();
    let k = 10;
    let exp = MatchingExperiment::new(&s, &queries, k).map_err(|e| e.to_string())?;
    let mut fails = Vec::new();
    let mut curve = Vec::new();

    for kappa in [10, 20] {
        let mut prev: Option<(f64, f64)> = None;
        let mut zero = None;
        for xi in [0.0, 1.0, 5.0, 20.0] {
            let eps = epsilon_for_target_xi(xi, kappa, 0.1, 0.01).map_err(|e| e.to_string())?;
            let cur = pooled(&exp, kappa, Mechanism::Lshrr { epsilon: eps });
            curve.push(format!("k{kappa}/xi{xi}:{:.3}", cur.0));
            if let Some(p) = prev {
                if cur.0 > p.0 + within(p, cur) {
                    fails.push(format!("(a) kappa={kappa} xi={xi}: {cur:?} after {p:?}"));
                }
            }
            if xi == 0.0 {
                zero = Some(cur);
            }
            prev = Some(cur);
        }
        let zero = zero.expect("xi = 0 is on the grid");
        let uniform = pooled(&exp, kappa, Mechanism::Uniform);
        if (zero.0 - uniform.0).abs() > within(zero, uniform) {
            fails.push(format!("(b) kappa={kappa}: {zero:?} vs uniform {uniform:?}"));
        }
        let fam = sample_family(100, kappa, 9300).unwrap();
        let plain = exp.run(&fam, Mechanism::Lsh, 1).unwrap();
        let noisy = exp.run(&fam, Mechanism::Lshrr { epsilon: 50.0 }, 2).unwrap();
        if plain.approx != noisy.approx {
            fails.push(format!("(c) kappa={kappa}: eps=50 neighbor sets differ from plain LSH"));
        }
    }

    for q in &queries {
        let xq = s.get(q).unwrap();
        let mut all: Vec<(f64, &str)> = s
            .iter()
            .filter(|(id, _)| id != q)
            .map(|(id, v)| (angular_distance(xq, v).unwrap(), id))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
        let want: Vec<&str> = all.iter().take(k).map(|p| p.1).collect();
        let got = exact_knn(&s, q, k).unwrap();
        if got.ids().collect::<Vec<_>>() != want {
            fails.push(format!("(d) query {q}"));
            break;
        }
    }
    check(fails.is_empty(), curve.join(" "), || fails.join("; "))
}

fn c10_accountant() -> Outcome {
    let mut worst_conv = 0.0f64;
    let mut points = 0;
    for eps in [0.1, 0.5, 1.0, 2.0, 5.0] {
        for kappa in [1, 10, 20, 50] {
            for (d, delta) in [(0.0, 0.01), (0.05, 0.01), (0.1, 0.05), (0.25, 0.001), (0.5, 0.1)] {
                let c = cxdp_params(eps, kappa).map_err(|e| e.to_string())?;
                let conv = c.to_pxdp_independent_bits(d, delta).map_err(|e| e.to_string())?;
                let p = PrivacyParams::new(eps, kappa, delta, d).map_err(|e| e.to_string())?;
                let simple = pxdp_budget_simple(&p).map_err(|e| e.to_string())?.xi;
                worst_conv = worst_conv.max((conv - simple).abs() / simple.abs().max(f64::MIN_POSITIVE));
                points += 1;
            }
        }
    }
    let mut worst_alpha = 0.0f64;
    for kappa in [10, 20, 50] {
        for d in [0.01, 0.05, 0.1, 0.25] {
            for delta in [0.001, 0.01, 0.05, 0.2] {
                let alpha = solve_alpha(kappa, d, delta).map_err(|e| e.to_string())?;
                let back = (-(kappa as f64) * kl_bernoulli(d + alpha, d).unwrap()).exp();
                worst_alpha = worst_alpha.max((back - delta).abs() / delta);
            }
        }
    }
    check(
        points == 100 && worst_conv <= 1e-12 && worst_alpha <= 1e-9,
        format!("{points} points, conversion rel err {worst_conv:.1e}, delta round trip rel err {worst_alpha:.1e}"),
        || format!("conversion {worst_conv:e}, alpha {worst_alpha:e}"),
    )
}

fn main() -> ExitCode {
    // Under `cargo test -- --list` and similar, the harness protocol expects no work.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let criteria: [Criterion; 10] = [
        ("1 ldp conversion table", c1_table),
        ("2 flip probability anchor", c2_flip_anchor),
        ("3 two-dimensional channel", c3_toy_channel),
        ("4 one-bit collision law", c4_collision),
        ("5 binomial hamming law", c5_hamming_law),
        ("6 randomized response error bound", c6_error_bound),
        ("7 probabilistic xdp certification", c7_pxdp),
        ("8 laplace radius law", c8_laplace_radius),
        ("9 matching utility at desk scale", c9_matching),
        ("10 accountant consistency", c10_accountant),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name} ({secs:.2}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name} ({secs:.2}s): {detail}");
            }
        }
    }
    println!("acceptance: {}/10 passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
