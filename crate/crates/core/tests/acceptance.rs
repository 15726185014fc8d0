//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use sparsecorr::dictionaries::*;
use sparsecorr::experiments::*;
use sparsecorr::guarantees::*;
use sparsecorr::recovery::*;
use sparsecorr::signals::*;
use sparsecorr::solvers::*;
use sparsecorr::uncertainty::*;

type C = Complex64;

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

fn rel(a: &DVector<C>, b: &DVector<C>) -> f64 {
    let n = b.norm();
    if n == 0.0 {
        a.norm()
    } else {
        (a - b).norm() / n
    }
}

fn halves(d: &Dictionary<C>, na: usize) -> (Dictionary<C>, Dictionary<C>) {
    let nb = d.cols() - na;
    (
        Dictionary::new(d.matrix().columns(0, na).into_owned(), "etf-a").unwrap(),
        Dictionary::new(d.matrix().columns(na, nb).into_owned(), "etf-b").unwrap(),
    )
}

fn fourier_profile() -> CoherenceProfile<f64> {
    CoherenceProfile::new(0.0, 0.0, 1.0 / 64f64.sqrt()).unwrap()
}

fn etf_profile() -> CoherenceProfile<f64> {
    CoherenceProfile::new(0.1258, 0.1319, 0.1321).unwrap()
}

fn threshold_tables() -> Outcome {
    let start = Instant::now();
    let p = fourier_profile();
    let mut mismatches = 0;
    for nx in 1..=64usize {
        for ne in 1..=64usize {
            let prod = nx * ne;
            let expect = [prod < 64, prod < 32, prod < 32, prod < 16];
            let got = [
                case_i(nx, ne, &p).unwrap().satisfied,
                case_ii_e(nx, ne, &p).unwrap().satisfied,
                case_ii_x(nx, ne, &p).unwrap().satisfied,
                case_iii(nx, ne, &p).unwrap().satisfied,
            ];
            mismatches += expect.iter().zip(&got).filter(|(a, b)| a != b).count();
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && secs < 1.0,
        format!("{mismatches} mismatching cells of 4x4096, {secs:.3}s"),
    )
}

fn comb_tightness() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for m in [16usize, 64] {
        let t = (m as f64).sqrt() as usize;
        let f = build_dft::<C>(m).unwrap();
        let i = build_identity::<C>(m).unwrap();
        let prof = profile(&f, &i).unwrap();
        let c = comb::<C>(m, t).unwrap();
        ok &= verify_common_signal(&f, c.values(), &i, c.values(), 1e-10).unwrap();
        let chk = check_uncertainty(c.values(), c.values(), c.support(), c.support(), &prof).unwrap();
        let gap = (chk.lhs - chk.rhs).abs() / chk.rhs;
        worst = worst.max(gap);
        ok &= chk.holds;
    }
    outcome(ok && worst < 1e-9, format!("max |lhs-rhs|/rhs = {worst:.2e}"))
}

// Cells of the guaranteed region of `case`. The unknown vector is required to
// be nonzero (nx >= 1, or ne >= 1 when only X is known): otherwise the
// normalization of the projected dictionary need not exist.
fn region(case: CaseId, prof: &CoherenceProfile<f64>, na: usize, nb: usize) -> Vec<(usize, usize)> {
    let (nx_min, ne_min) = if case == CaseId::CaseIIX { (0, 1) } else { (1, 0) };
    let mut cells = Vec::new();
    for nx in nx_min..=na {
        for ne in ne_min..=nb {
            if evaluate(case, nx, ne, prof).unwrap().satisfied {
                cells.push((nx, ne));
            }
        }
    }
    cells
}

fn soundness() -> Outcome {
    const PER_CASE: usize = 500;
    let opts = RecoveryOptions::default();
    let mut pairs: Vec<(String, Dictionary<C>, Dictionary<C>)> = Vec::new();
    for m in [8usize, 16, 32] {
        pairs.push((format!("F{m}"), build_dft(m).unwrap(), build_identity(m).unwrap()));
        pairs.push((format!("H{m}"), build_hadamard(m).unwrap(), build_identity(m).unwrap()));
    }
    let etf = build_etf_approx::<C>(16, 32, EtfOptions { iterations: 2000, seed: 0 }).unwrap();
    let (ea, eb) = halves(&etf, 16);
    pairs.push(("ETF16".into(), ea, eb));

    let mut failures = Vec::new();
    let mut instances = 0usize;
    for (name, a, b) in &pairs {
        let prof = profile(a, b).unwrap();
        for (case_no, case) in [CaseId::CaseI, CaseId::CaseIIE, CaseId::CaseIIX].into_iter().enumerate() {
            let cells = region(case, &prof, a.cols(), b.cols());
            if cells.is_empty() {
                failures.push(format!("{name} {case}: empty region"));
                continue;
            }
            for t in 0..PER_CASE {
                let seed = derive_seed(7, &[a.rows() as u64, case_no as u64, t as u64, name.len() as u64]);
                let mut rng = rng_from_seed(seed);
                let (nx, ne) = cells[rng.random_range(0..cells.len())];
                let (x, e) =
                    random_instance::<C>(a.cols(), b.cols(), nx, ne, seed, Amplitudes::ComplexGaussian).unwrap();
                let z = a.apply(x.values()).unwrap() + b.apply(e.values()).unwrap();
                let runs: Vec<(&str, sparsecorr::Result<Recovered<C>>)> = match case {
                    CaseId::CaseI => vec![("pinv", recover_case_i(a, b, &z, x.support(), e.support()))],
                    CaseId::CaseIIE => vec![
                        ("bp", recover_case_ii_e(a, b, &z, e.support(), Method::Bp, None, &opts)),
                        ("omp", recover_case_ii_e(a, b, &z, e.support(), Method::Omp, Some(nx), &opts)),
                    ],
                    _ => vec![
                        ("bp", recover_case_ii_x(a, b, &z, x.support(), Method::Bp, None, &opts)),
                        ("omp", recover_case_ii_x(a, b, &z, x.support(), Method::Omp, Some(ne), &opts)),
                    ],
                };
                for (method, r) in runs {
                    instances += 1;
                    let err = r.map(|r| rel(&r.x, x.values()).max(rel(&r.e, e.values())));
                    match err {
                        Ok(err) if err < 1e-6 => {}
                        other => failures.push(format!("{name} {case} {method} ({nx},{ne}): {other:?}")),
                    }
                }
            }
        }
    }

    // Exhaustive search inside the Case III region at M = 8.
    for (name, a) in [("F8", build_dft::<C>(8).unwrap()), ("H8", build_hadamard::<C>(8).unwrap())] {
        let b = build_identity::<C>(8).unwrap();
        let prof = profile(&a, &b).unwrap();
        let cells = region(CaseId::CaseIII, &prof, 8, 8);
        for t in 0..PER_CASE {
            let seed = derive_seed(11, &[name.as_bytes()[0] as u64, t as u64]);
            let mut rng = rng_from_seed(seed);
            let (nx, ne) = cells[rng.random_range(0..cells.len())];
            let (x, e) = random_instance::<C>(8, 8, nx, ne, seed, Amplitudes::ComplexGaussian).unwrap();
            let z = a.apply(x.values()).unwrap() + b.apply(e.values()).unwrap();
            instances += 1;
            match recover_case_iii(&a, &b, &z, ne, nx) {
                Ok(r) if r.unique == Some(true) && rel(&r.x, x.values()) < 1e-6 => {}
                other => failures.push(format!("{name} caseIII ({nx},{ne}): {:?}", other.map(|r| r.unique))),
            }
        }
    }
    let detail = match failures.first() {
        None => format!("{instances} recoveries, 0 failures"),
        Some(f) => format!("{} failures of {instances}, first: {f}", failures.len()),
    };
    outcome(failures.is_empty(), detail)
}

fn projection_bounds() -> Outcome {
    let f = build_dft::<C>(64).unwrap();
    let h = build_hadamard::<C>(64).unwrap();
    let i = build_identity::<C>(64).unwrap();
    let etf = build_etf_approx::<C>(64, 128, EtfOptions { iterations: 300, seed: 0 }).unwrap();
    let (ea, eb) = halves(&etf, 64);
    let families = [(&f, &i), (&h, &i), (&ea, &eb)];
    let mut violations = 0;
    let mut worst_equality: f64 = 0.0;
    for t in 0..1000u64 {
        let (a, b) = families[(t % 3) as usize];
        let mut rng = rng_from_seed(derive_seed(3, &[t]));
        let ne = if t % 3 == 2 { rng.random_range(1..=8) } else { rng.random_range(1..=48) };
        let e = random_support(&mut rng, b.cols(), ne).unwrap();
        let bounds = check_projection_bounds(a, b, &e).unwrap();
        if !bounds.hold(1e-10) {
            violations += 1;
        }
        if t % 3 == 0 {
            worst_equality = worst_equality.max((bounds.min_colnorm_sq - bounds.colnorm_lb).abs());
        }
    }
    let four = check_projection_bounds(&f, &i, &[5, 17, 33, 62]).unwrap();
    let eq4 = (four.min_colnorm_sq - four.colnorm_lb).abs();
    let pass = violations == 0 && eq4 < 1e-10 && (four.min_colnorm_sq - 0.9375).abs() < 1e-10;
    outcome(
        pass,
        format!(
            "{violations} violations in 1000 draws; F64/I64 ne=4 projected-norm gap {eq4:.1e}, max over draws {worst_equality:.1e}"
        ),
    )
}

fn hadamard_diagonal() -> Outcome {
    let grid = |case, method, n_max: usize| {
        let mut g = ExperimentGrid::<f64>::new(
            build_hadamard(64).unwrap(),
            build_identity(64).unwrap(),
            case,
            method,
        );
        g.nx_values = (1..=n_max).collect();
        g.ne_values = g.nx_values.clone();
        g.diagonal_only = true;
        g.trials = 200;
        g.master_seed = 2012;
        g
    };
    let case_i_results = run_grid(&grid(CaseId::CaseI, Method::Bp, 48)).unwrap();
    let omp_results = run_grid(&grid(CaseId::CaseIIE, Method::Omp, 40)).unwrap();
    let c1 = diagonal_crossing(&case_i_results, 0.5);
    let c2 = diagonal_crossing(&omp_results, 0.5);
    match (c1, c2) {
        (Some(c1), Some(c2)) => {
            let ratio = c1 * c1 / (2.0 * c2 * c2);
            let pass = (c1 - 31.0).abs() <= 3.0 && (c2 - 23.0).abs() <= 3.0 && (ratio - 1.0).abs() <= 0.2;
            outcome(
                pass,
                format!("case I crossing {c1:.2}, case II-E OMP crossing {c2:.2}, c1^2/(2 c2^2) = {ratio:.3}"),
            )
        }
        _ => outcome(false, format!("no crossing found: {c1:?} {c2:?}")),
    }
}

fn case_iv_dominated() -> Outcome {
    let start = Instant::now();
    let mut bad = 0;
    for p in [fourier_profile(), etf_profile()] {
        let ne = 0..=64;
        let c = |case| contour(case, &p, ne.clone(), 64).unwrap();
        let (c1, c2e, c2x, c3, c4) = (
            c(CaseId::CaseI),
            c(CaseId::CaseIIE),
            c(CaseId::CaseIIX),
            c(CaseId::CaseIII),
            c(CaseId::CaseIVBP),
        );
        for k in 0..c1.len() {
            let ok = c4[k].max_nx <= c3[k].max_nx
                && c3[k].max_nx <= c2e[k].max_nx.min(c2x[k].max_nx)
                && c2e[k].max_nx.max(c2x[k].max_nx) <= c1[k].max_nx;
            if !ok {
                bad += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(bad == 0 && secs < 1.0, format!("{bad} ne values out of order, {secs:.3}s"))
}

fn inpainting() -> Outcome {
    let img = synthetic_image(64);
    let mask = text_mask(64, 0.188, 0).unwrap();
    let run = |transform, knowledge, max_iter| {
        let mut opts = InpaintOptions {
            transform,
            knowledge,
            ..InpaintOptions::default()
        };
        opts.bp.max_iter = max_iter;
        inpaint_experiment(&img, &mask, &opts)
    };
    let haar = Transform::Haar { octaves: 3 };
    let results = (
        run(Transform::Dct, InpaintKnowledge::CaseI, 4000),
        run(Transform::Dct, InpaintKnowledge::CaseIIE, 4000),
        run(haar, InpaintKnowledge::CaseIIE, 4000),
        // BP on the full concatenation does not converge here; its iterate is
        // already far from the truth, so the budget is kept short.
        run(Transform::Dct, InpaintKnowledge::CaseIV, 1000),
    );
    let (i, iie, h, iv) = match results {
        (Ok(a), Ok(b), Ok(c), Ok(d)) => (a, b, c, d),
        other => return outcome(false, format!("pipeline error: {other:?}").chars().take(300).collect::<String>()),
    };
    let strict = InpaintOptions {
        transform: haar,
        degenerate: DegeneratePolicy::Reject,
        ..InpaintOptions::default()
    };
    let diagnosed = matches!(
        inpaint_experiment(&img, &mask, &strict),
        Err(sparsecorr::Error::DegenerateColumns { .. })
    );
    let pass = iie.mse_db + 20.0 <= h.mse_db
        && i.mse_db <= iie.mse_db
        && iie.mse_db <= iv.mse_db
        && !h.dropped_columns.is_empty()
        && diagnosed;
    outcome(
        pass,
        format!(
            "MSE dB: corrupted {:.1}, case I {:.1}, DCT case II-E {:.1}, Haar case II-E {:.1} ({} atoms annihilated), case IV {:.1}",
            iie.corrupted_mse_db,
            i.mse_db,
            iie.mse_db,
            h.mse_db,
            h.dropped_columns.len(),
            iv.mse_db
        ),
    )
}

fn solver_cross_validation() -> Outcome {
    let dicts: Vec<Dictionary<C>> = vec![
        concat(&build_dft(4).unwrap(), &build_identity(4).unwrap()).unwrap(),
        concat(&build_dft(8).unwrap(), &build_identity(8).unwrap()).unwrap(),
        concat(&build_hadamard(8).unwrap(), &build_dft(8).unwrap()).unwrap(),
        build_etf_approx(6, 10, EtfOptions { iterations: 500, seed: 4 }).unwrap(),
        build_etf_approx(8, 12, EtfOptions { iterations: 500, seed: 5 }).unwrap(),
        build_dft(8).unwrap(),
    ];
    let bp_opts = BpOptions::default();
    let mut validated = 0;
    let mut failures = Vec::new();
    let mut t = 0u64;
    while validated < 300 && t < 2000 {
        let d = &dicts[(t % dicts.len() as u64) as usize];
        let mu = coherence(d);
        let kmax = (1..=d.rows()).take_while(|&k| classical(k, mu).satisfied).last();
        let mut rng = rng_from_seed(derive_seed(8, &[t]));
        t += 1;
        let Some(kmax) = kmax else { continue };
        let k = rng.random_range(1..=kmax);
        let x = random_sparse::<C, _>(&mut rng, d.cols(), k, Amplitudes::ComplexGaussian)
            .unwrap()
            .into_dense();
        let z = d.matrix() * &x;
        let oracle = match brute_force_p0(d.matrix(), &z, k) {
            Ok(o) if o.unique => o,
            _ => continue,
        };
        validated += 1;
        let bp = basis_pursuit(d.matrix(), &z, &bp_opts).map(|r| rel(&r.solution, &oracle.solution));
        let om = omp(d.matrix(), &z, oracle.sparsity).map(|r| rel(&r.solution, &oracle.solution));
        let truth = rel(&oracle.solution, &x);
        match (bp, om) {
            (Ok(b), Ok(o)) if b < 1e-6 && o < 1e-6 && truth < 1e-6 => {}
            other => failures.push(format!("{} k={k}: {other:?}", d.label())),
        }
    }
    let pass = validated >= 300 && failures.is_empty();
    let detail = match failures.first() {
        None => format!("{validated} instances, BP and OMP match the exhaustive oracle"),
        Some(f) => format!("{} disagreements in {validated}, first: {f}", failures.len()),
    };
    outcome(pass, detail)
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("threshold tables", threshold_tables),
        ("comb tightness", comb_tightness),
        ("guarantee soundness", soundness),
        ("projection bounds", projection_bounds),
        ("Hadamard diagonal phase transition", hadamard_diagonal),
        ("Case IV dominated", case_iv_dominated),
        ("inpainting ordering", inpainting),
        ("solver cross-validation", solver_cross_validation),
    ];
    // Optional criterion numbers on the command line restrict the run.
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(k + 1)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!(
            "{status} [{}] {name}: {} ({:.1}s)",
            k + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
