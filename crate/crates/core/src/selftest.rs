//! Fixed-seed invariant checks behind the `selftest` subcommand.

use num_complex::Complex64;
use rand::Rng;

use crate::augmentation::{build_augmented_dataset, AugmentedDataset, NoiseFamily, NoiseSpec};
use crate::boosting::{determine_weights, Aggregation, DetectionRatios};
use crate::channel::{draw_initial_channel, ChannelMatrix};
use crate::harness::{results_to_csv, run_sweep, ExperimentConfig};
use crate::impairments::{AdcSpec, ImpairmentChain, OracleModel, PaParams};
use crate::lf_em::{em_e_step, em_initialize, em_m_step, observed_log_likelihood};
use crate::lf_kde::LabeledBank;
use crate::likelihood::LikelihoodModel;
use crate::modulation::{Constellation, SymbolBook};
use crate::numeric::{argmax, rng_for, sample_cn};
use crate::pipeline::ChannelMode;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn em_instance(seed: u64) -> (AugmentedDataset, crate::lf_em::EmParams) {
    let mut rng = rng_for(seed, 0);
    let nr = rng.gen_range(1..=4);
    let book = SymbolBook::new(Constellation::qam(4).expect("4-QAM"), rng.gen_range(1..=2)).expect("book");
    let h = draw_initial_channel(nr, book.nt(), &mut rng);
    let sigma2 = rng.gen_range(0.05..0.5);
    let mut ys = Vec::with_capacity(300 * nr);
    for _ in 0..300 {
        let k = rng.gen_range(0..book.len());
        ys.extend(h.apply(book.vector(k)).into_iter().map(|z| z + sample_cn(&mut rng, sigma2)));
    }
    let perturb = draw_initial_channel(nr, book.nt(), &mut rng);
    let h_hat = ChannelMatrix::from_matrix(h.matrix() + perturb.matrix() * Complex64::new(0.1, 0.0)).expect("shape");
    (AugmentedDataset::unaugmented(&ys, nr), em_initialize(&h_hat, &book, sigma2))
}

fn em_monotone() -> Check {
    let mut worst = f64::INFINITY;
    for seed in 0..50 {
        let (data, mut params) = em_instance(seed);
        let mut prev = observed_log_likelihood(&data, &params);
        for _ in 0..10 {
            let e = em_e_step(&data, &params);
            params = em_m_step(&data, &e.responsibilities, &params).params;
            let next = observed_log_likelihood(&data, &params);
            worst = worst.min((next - prev) / prev.abs().max(1.0));
            prev = next;
        }
    }
    check(
        "em_log_likelihood_monotone",
        worst >= -1e-8,
        format!("50 instances x 10 iterations, worst relative step {worst:.3e}"),
    )
}

fn responsibilities_normalized() -> Check {
    let mut worst: f64 = 0.0;
    for seed in 100..150 {
        let (data, params) = em_instance(seed);
        let e = em_e_step(&data, &params);
        for d in 0..data.len() {
            worst = worst.max((e.responsibilities.row(d).iter().sum::<f64>() - 1.0).abs());
        }
    }
    check("responsibility_rows_sum_to_one", worst <= 1e-9, format!("max deviation {worst:.3e}"))
}

fn kde_normalized() -> Check {
    let mut rng = rng_for(3, 0);
    let s: Vec<Complex64> = (0..40).map(|_| Complex64::new(0.5, -0.2) + sample_cn(&mut rng, 0.3)).collect();
    let book = SymbolBook::new(Constellation::qam(4).expect("4-QAM"), 1).expect("book");
    let h = ChannelMatrix::from_rows(1, 1, &[Complex64::new(1.0, 0.0)]).expect("shape");
    let data = AugmentedDataset::unaugmented(&s, 1);
    let bank = LabeledBank::from_labels(&data, &vec![0; s.len()], &book, &h, 1.0).expect("bank");
    let sd = (bank.bandwidth(0).expect("class 0")[0] / 2.0).sqrt();
    let fold = |f: fn(&Complex64) -> f64| {
        s.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |a, x| (a.0.min(x), a.1.max(x)))
    };
    let (lo_re, hi_re) = fold(|z| z.re);
    let (lo_im, hi_im) = fold(|z| z.im);
    let steps = 600;
    let (x0, x1) = (lo_re - 6.0 * sd, hi_re + 6.0 * sd);
    let (y0, y1) = (lo_im - 6.0 * sd, hi_im + 6.0 * sd);
    let (dx, dy) = ((x1 - x0) / steps as f64, (y1 - y0) / steps as f64);
    let mut total = 0.0;
    for i in 0..steps {
        for j in 0..steps {
            let q = Complex64::new(x0 + (i as f64 + 0.5) * dx, y0 + (j as f64 + 0.5) * dy);
            total += bank.log_likelihood(&[q], 0).exp() * dx * dy;
        }
    }
    check("kde_integrates_to_one", (total - 1.0).abs() < 1e-3, format!("integral {total:.6}"))
}

fn oracle_total_probability() -> Check {
    let book = SymbolBook::new(Constellation::qam(4).expect("4-QAM"), 2).expect("book");
    let chain = ImpairmentChain {
        pa: Some(PaParams::default()),
        adc: Some(AdcSpec::uniform(2, 0.5).expect("ADC")),
    };
    let levels = chain.adc.as_ref().expect("ADC").levels().to_vec();
    let mut worst: f64 = 0.0;
    for (seed, sigma2) in [(1, 0.5), (2, 0.02), (3, 1e-3)] {
        let h = draw_initial_channel(1, 2, &mut rng_for(seed, 0));
        let oracle = OracleModel::new(&h, &book, sigma2, &chain);
        for k in 0..book.len() {
            let mut total = 0.0;
            for &re in &levels {
                for &im in &levels {
                    total += oracle.log_likelihood(&[Complex64::new(re, im)], k).exp();
                }
            }
            worst = worst.max((total - 1.0).abs());
        }
    }
    check("oracle_lf_total_probability", worst <= 1e-9, format!("max deviation {worst:.3e}"))
}

fn weight_simplex() -> Check {
    let mut rng = rng_for(7, 0);
    let mut ok = true;
    for _ in 0..200 {
        let j = rng.gen_range(1..10);
        let counts: Vec<Vec<usize>> = (0..j)
            .map(|_| {
                let mut c: Vec<usize> = (0..16).map(|_| rng.gen_range(0..30)).collect();
                c[0] += 1;
                c
            })
            .collect();
        let ratios = DetectionRatios::from_counts(counts).expect("counts");
        for rule in Aggregation::ALL {
            let w = determine_weights(rule, &ratios, &[2.0; 16]).expect("weights");
            let s = w.weights.as_slice();
            ok &= (s.iter().sum::<f64>() - 1.0).abs() <= 1e-12 && s.iter().all(|&x| x >= 0.0);
            if rule == Aggregation::Max {
                ok &= s.iter().filter(|&&x| x == 1.0).count() == 1;
            }
        }
    }
    check("weight_simplex", ok, "200 random ratio sets, three rules".into())
}

fn argmax_shift_invariance() -> Check {
    let mut rng = rng_for(8, 0);
    let mut ok = true;
    for _ in 0..500 {
        let v: Vec<f64> = (0..16).map(|_| rng.gen_range(-50.0..0.0)).collect();
        let c = rng.gen_range(-1e3..1e3);
        let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
        ok &= argmax(&v) == argmax(&shifted);
    }
    check("argmax_shift_invariance", ok, "500 random vectors".into())
}

fn dataset_arithmetic() -> Check {
    let mut rng = rng_for(9, 0);
    let mut ok = true;
    for _ in 0..20 {
        let nr = rng.gen_range(1..5);
        let tb = rng.gen_range(1..50);
        let copies = rng.gen_range(1..12);
        let base: Vec<Complex64> = (0..tb * nr).map(|_| sample_cn(&mut rng, 1.0)).collect();
        let spec = NoiseSpec::new(NoiseFamily::Laplace, 0.24).expect("spec");
        let set = build_augmented_dataset(&base, nr, &spec, copies, &mut rng).expect("dataset");
        ok &= set.len() == tb * copies && set.base_len() == tb && set.copies() == copies;
        for n in 0..tb {
            for i in 0..copies {
                ok &= set.index_of(n, i) == n * copies + i;
            }
        }
    }
    check("dataset_size_and_indexing", ok, "20 random shapes".into())
}

fn thread_independence() -> Check {
    let cfg = ExperimentConfig {
        t_d: 40,
        t_b: 20,
        i_da: 2,
        j: 3,
        sigma_g: vec![0.08],
        sigma_u: vec![1.0],
        sigma_l: vec![0.24],
        sub_blocks: 2,
        channels: vec![ChannelMode::Invariant, ChannelMode::Varying],
        snr_db: vec![10.0, 20.0],
        trials: 6,
        timing: false,
        ..Default::default()
    };
    let same = match (run_sweep(&cfg, 1), run_sweep(&cfg, 8)) {
        (Ok(a), Ok(b)) => results_to_csv(&a) == results_to_csv(&b),
        _ => false,
    };
    check("thread_count_independence", same, "CSV bytes, 1 vs 8 workers".into())
}

/// Runs every check.
pub fn run_all() -> Vec<Check> {
    vec![
        em_monotone(),
        responsibilities_normalized(),
        kde_normalized(),
        oracle_total_probability(),
        weight_simplex(),
        argmax_shift_invariance(),
        dataset_arithmetic(),
        thread_independence(),
    ]
}
