//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Free arguments select criteria by substring of
//! their names.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::prelude::*;
use robarch::evo::{fast_nondominated_sort, polynomial_mutation, sbx_crossover, EvoParams, Individual};
use robarch::gates::GatesParams;
use robarch::genome::{random_genome, Genome, Operation, GENOME_LEN};
use robarch::micronet::layers::*;
use robarch::micronet::*;
use robarch::rng::stream;
use robarch::search::*;
use robarch::surrogate::{fit_rbf, MlpModel, TrainingSet};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, started: Instant, what: &str) -> Result<f64, String> {
    let secs = started.elapsed().as_secs_f64();
    ensure(started.elapsed() < limit, || format!("{what} took {secs:.1} s, limit {} s", limit.as_secs()))?;
    Ok(secs)
}

fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

fn rand_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Worst relative error of `analytic` against central differences of `f` at `v`.
fn fd_error(v: &[f64], analytic: &[f64], coords: impl IntoIterator<Item = usize>, f: impl Fn(&[f64]) -> f64) -> f64 {
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for i in coords {
        let mut p = v.to_vec();
        p[i] += h;
        let mut m = v.to_vec();
        m[i] -= h;
        worst = worst.max(rel_err((f(&p) - f(&m)) / (2.0 * h), analytic[i]));
    }
    worst
}

/// Like [`fd_error`], but `None` when some coordinate sits on a kink, seen
/// as one-sided differences that disagree.
fn fd_error_smooth(v: &[f64], analytic: &[f64], coords: &[usize], f: impl Fn(&[f64]) -> f64) -> Option<f64> {
    let h = 1e-6;
    let f0 = f(v);
    let mut worst: f64 = 0.0;
    for &i in coords {
        let mut p = v.to_vec();
        p[i] += h;
        let mut m = v.to_vec();
        m[i] -= h;
        let (fp, fm) = (f(&p), f(&m));
        let (fwd, bwd) = ((fp - f0) / h, (f0 - fm) / h);
        if (fwd - bwd).abs() > 1e-2 * fwd.abs().max(bwd.abs()).max(1e-3) {
            return None;
        }
        worst = worst.max(rel_err((fp - fm) / (2.0 * h), analytic[i]));
    }
    Some(worst)
}

fn c1_sorting() -> Outcome {
    let started = Instant::now();
    let mut rng = stream(101, &[]);
    for trial in 0..200 {
        let n = rng.random_range(1..=64);
        let m = 2 + trial % 2;
        let mut pop: Vec<Individual> = (0..n)
            .map(|_| Individual::new(random_genome(&mut rng), (0..m).map(|_| f64::from(rng.random_range(0..6u8))).collect()))
            .collect();
        let objs: Vec<Vec<f64>> = pop.iter().map(|i| i.objectives.clone()).collect();
        let got: Vec<BTreeSet<usize>> = fast_nondominated_sort(&mut pop).iter().map(|f| f.iter().copied().collect()).collect();

        let mut left: BTreeSet<usize> = (0..n).collect();
        let mut want = Vec::new();
        while !left.is_empty() {
            let front: BTreeSet<usize> = left.iter().copied().filter(|&i| !left.iter().any(|&j| dominates(&objs[j], &objs[i]))).collect();
            left = left.difference(&front).copied().collect();
            want.push(front);
        }
        ensure(got == want, || format!("trial {trial}: partition differs"))?;
    }
    let secs = within(Duration::from_secs(10), started, "sorting")?;
    Ok(format!("200 populations match brute force in {secs:.2} s"))
}

fn c2_closure() -> Outcome {
    let mut rng = stream(102, &[]);
    let params = EvoParams::default();
    let frozen = EvoParams { mutation_prob: 0.0, ..params };
    for i in 0..10_000 {
        let (a, b) = (random_genome(&mut rng), random_genome(&mut rng));
        let (c1, c2) = sbx_crossover(&a, &b, &params, &mut rng);
        let m = polynomial_mutation(&c1, &params, &mut rng);
        for g in [c1, c2, m] {
            ensure(g.genes().len() == GENOME_LEN && g.genes().iter().all(|&v| v <= 3), || format!("invalid child at {i}"))?;
            ensure(g.to_string().parse::<Genome>() == Ok(g), || format!("child at {i} does not round-trip"))?;
        }
        ensure(sbx_crossover(&a, &a, &params, &mut rng) == (a, a), || format!("identical-parent SBX changed a genome at {i}"))?;
        ensure(polynomial_mutation(&a, &frozen, &mut rng) == a, || format!("zero-probability PM changed a genome at {i}"))?;
    }
    Ok("10000 applications valid, both identities exact".into())
}

fn c3_rbf() -> Outcome {
    let started = Instant::now();
    let gates = GatesParams::init(103);
    let mut rng = stream(103, &[]);
    let mut set = TrainingSet::default();
    while set.len() < 50 {
        let g = random_genome(&mut rng);
        set.insert(g, gates.embed(&g), rng.random(), rng.random());
    }
    let distinct: BTreeSet<Vec<u64>> = set.records().iter().map(|r| r.embedding.as_slice().iter().map(|v| v.to_bits()).collect()).collect();
    ensure(distinct.len() == 50, || "embeddings not distinct".into())?;
    let model = fit_rbf(&set, 7).map_err(|e| e.to_string())?;
    let mse = set.records().iter().map(|r| (model.predict(r.embedding.as_slice()) - r.label).powi(2)).sum::<f64>() / 50.0;
    let rmse = mse.sqrt();
    ensure(rmse < 1e-6, || format!("training RMSE {rmse:e}"))?;
    let secs = within(Duration::from_secs(5), started, "RBF fit")?;
    Ok(format!("training RMSE {rmse:.2e} in {secs:.2} s"))
}

fn c4_gradients() -> Outcome {
    let mut rng = stream(104, &[]);
    let mut worst: Vec<(&str, f64)> = Vec::new();
    let mut record = |name: &'static str, e: f64| match worst.iter_mut().find(|w| w.0 == name) {
        Some(w) => w.1 = w.1.max(e),
        None => worst.push((name, e)),
    };
    for _ in 0..20 {
        for (name, depthwise, stride) in [("conv", false, 1), ("conv_s2", false, 2), ("depthwise", true, 1), ("depthwise_s2", true, 2)] {
            let cin = 3;
            let cfg = Conv3x3 { cin, cout: if depthwise { cin } else { 2 }, h: 6, w: 4, stride, depthwise };
            let (ho, wo) = cfg.out_hw();
            let x = rand_vec(&mut rng, cin * 24);
            let wt = rand_vec(&mut rng, cfg.weight_len());
            let b = rand_vec(&mut rng, cfg.cout);
            let g = rand_vec(&mut rng, cfg.cout * ho * wo);
            let (mut dx, mut dw, mut db) = (vec![0.0; x.len()], vec![0.0; wt.len()], vec![0.0; b.len()]);
            cfg.backward(&x, &wt, &g, &mut dx, Some(&mut dw), Some(&mut db));
            record(name, fd_error(&x, &dx, 0..x.len(), |v| dot(&g, &cfg.forward(v, &wt, Some(&b)))));
            record(name, fd_error(&wt, &dw, 0..wt.len(), |v| dot(&g, &cfg.forward(&x, v, Some(&b)))));
            record(name, fd_error(&b, &db, 0..b.len(), |v| dot(&g, &cfg.forward(&x, &wt, Some(v)))));
        }

        let (cin, cout, hw) = (3, 4, 5);
        let x = rand_vec(&mut rng, cin * hw);
        let wt = rand_vec(&mut rng, cin * cout);
        let b = rand_vec(&mut rng, cout);
        let g = rand_vec(&mut rng, cout * hw);
        let (mut dx, mut dw, mut db) = (vec![0.0; x.len()], vec![0.0; wt.len()], vec![0.0; cout]);
        pointwise_backward(&x, cin, cout, hw, &wt, &g, &mut dx, Some(&mut dw), Some(&mut db));
        record("pointwise", fd_error(&x, &dx, 0..x.len(), |v| dot(&g, &pointwise_forward(v, cin, cout, hw, &wt, Some(&b)))));
        record("pointwise", fd_error(&wt, &dw, 0..wt.len(), |v| dot(&g, &pointwise_forward(&x, cin, cout, hw, v, Some(&b)))));
        record("pointwise", fd_error(&b, &db, 0..b.len(), |v| dot(&g, &pointwise_forward(&x, cin, cout, hw, &wt, Some(v)))));

        let (c, h, w) = (2, 4, 6);
        let x = rand_vec(&mut rng, c * h * w);
        let g = rand_vec(&mut rng, c * h * w / 4);
        let mut dx = vec![0.0; x.len()];
        avgpool2_backward(&g, c, h, w, &mut dx);
        record("avgpool", fd_error(&x, &dx, 0..x.len(), |v| dot(&g, &avgpool2_forward(v, c, h, w))));

        let g = rand_vec(&mut rng, c);
        let mut dx = vec![0.0; x.len()];
        gap_backward(&g, c, h * w, &mut dx);
        record("global_pool", fd_error(&x, &dx, 0..x.len(), |v| dot(&g, &gap_forward(v, c, h * w))));

        let g = rand_vec(&mut rng, x.len());
        let mut out = x.clone();
        relu_inplace(&mut out);
        let dr = relu_backward(&out, &g);
        record(
            "relu",
            fd_error(&x, &dr, 0..x.len(), |v| {
                let mut o = v.to_vec();
                relu_inplace(&mut o);
                dot(&g, &o)
            }),
        );

        let (_, scale) = sample_norm_forward(&x);
        let dz = sample_norm_backward(&x, scale, &g);
        record("sample_norm", fd_error(&x, &dz, 0..x.len(), |v| dot(&g, &sample_norm_forward(v).0)));

        let logits = rand_vec(&mut rng, 4);
        let label = rng.random_range(0..4);
        let (_, dl) = softmax_xent(&logits, label);
        record("softmax_xent", fd_error(&logits, &dl, 0..4, |v| softmax_xent(v, label).0));
    }

    // whole subnets at sampled coordinates; random parameters keep most
    // pre-activations off the rectifier kink and the rest are redrawn
    let layout = ParamLayout::full(NetConfig::default());
    let params = (0..layout.total()).map(|_| rng.random_range(-0.5..0.5)).collect();
    let net = Supernet(Network::from_parts(layout, params).map_err(|e| e.to_string())?);
    let (mut admitted, mut redrawn) = (0, 0);
    while admitted < 20 {
        let view = net.view(random_genome(&mut rng));
        let x = Tensor::new(vec![2, 1, 8, 8], (0..128).map(|_| rng.random::<f64>()).collect()).map_err(|e| e.to_string())?;
        let y = [rng.random_range(0..4), rng.random_range(0..4)];
        let grads = view.loss_and_grad(&x, &y, true).map_err(|e| e.to_string())?;
        let loss_at = |p: &[f64]| {
            let shifted = Network::from_parts(net.network().layout().clone(), p.to_vec()).expect("same layout");
            SubnetView::new(&shifted, *view.genome()).expect("full layout").loss_and_grad(&x, &y, false).expect("valid input").loss
        };
        let active: Vec<usize> = net.network().layout().active_ranges(view.genome()).into_iter().flatten().collect();
        let param_coords: Vec<usize> = (0..40).map(|_| active[rng.random_range(0..active.len())]).collect();
        let input_coords: Vec<usize> = (0..20).map(|_| rng.random_range(0..128)).collect();
        let on_params = fd_error_smooth(net.network().params(), grads.params.as_deref().expect("requested"), &param_coords, loss_at);
        let on_input = fd_error_smooth(x.data(), grads.input.data(), &input_coords, |v| {
            let t = Tensor::new(vec![2, 1, 8, 8], v.to_vec()).expect("shape");
            view.loss_and_grad(&t, &y, false).expect("valid input").loss
        });
        match (on_params, on_input) {
            (Some(a), Some(b)) => {
                record("subnet_params", a);
                record("subnet_input", b);
                admitted += 1;
            }
            _ => redrawn += 1,
        }
    }

    let model = MlpModel::init(6, 8, 104);
    for _ in 0..20 {
        let x = rand_vec(&mut rng, 6);
        let (_, grad) = model.output_and_param_grad(&x);
        let h = 1e-6;
        let e = (0..model.params.len())
            .map(|k| {
                let mut plus = model.clone();
                plus.params[k] += h;
                let mut minus = model.clone();
                minus.params[k] -= h;
                rel_err((plus.predict(&x) - minus.predict(&x)) / (2.0 * h), grad[k])
            })
            .fold(0.0, f64::max);
        record("mlp_surrogate", e);
    }

    let summary = worst.iter().map(|(n, e)| format!("{n} {e:.1e}")).collect::<Vec<_>>().join(", ");
    match worst.iter().find(|w| w.1 >= 1e-4) {
        Some((n, e)) => Err(format!("{n} relative error {e:e}; {summary}")),
        None => Ok(format!("20 points each ({redrawn} subnet points redrawn at kinks), worst: {summary}")),
    }
}

fn c5_attacks() -> Outcome {
    let mut rng = stream(105, &[]);
    let specs = [AttackSpec::default_fgsm(), AttackSpec::pgd7()];
    let mut pairs = 0;
    for net_seed in 0..10 {
        let net = Supernet::init(NetConfig::default(), 1050 + net_seed);
        for _ in 0..100 {
            let view = net.view(random_genome(&mut rng));
            let x = Tensor::new(vec![1, 1, 8, 8], (0..64).map(|_| rng.random::<f64>()).collect()).map_err(|e| e.to_string())?;
            let y = [rng.random_range(0..4)];
            for spec in &specs {
                let adv = attack(&view, &x, &y, spec, &mut rng).map_err(|e| e.to_string())?;
                let ok = adv.data().iter().zip(x.data()).all(|(a, b)| (a - b).abs() <= spec.epsilon && (0.0..=1.0).contains(a));
                ensure(ok, || format!("{:?} left the ball or box on pair {pairs}", spec.kind))?;
                let zero = AttackSpec { epsilon: 0.0, ..*spec };
                ensure(attack(&view, &x, &y, &zero, &mut rng).map_err(|e| e.to_string())? == x, || format!("eps=0 {:?} moved pair {pairs}", spec.kind))?;
            }
            pairs += 1;
        }
    }
    Ok(format!("{pairs} pairs, FGSM and PGD-7 inside ball and box, eps=0 exact"))
}

fn c6_sharing() -> Outcome {
    let net = Supernet::init(NetConfig::default(), 106);
    let mut rng = stream(106, &[]);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let g = random_genome(&mut rng);
        let x = Tensor::new(vec![2, 1, 8, 8], (0..128).map(|_| rng.random::<f64>()).collect()).map_err(|e| e.to_string())?;
        let shared = net.view(g).forward(&x).map_err(|e| e.to_string())?;
        let copied = net.extract(g).view().forward(&x).map_err(|e| e.to_string())?;
        worst = worst.max(shared.max_abs_diff(&copied));
    }
    ensure(worst == 0.0, || format!("max abs diff {worst:e}"))?;
    Ok("100 genomes, max abs diff 0".into())
}

fn c7_accounting() -> Outcome {
    let cfg = SearchConfig {
        population_size: 20,
        max_generations: 40,
        surrogate_update_interval: 20,
        infill_count: 4,
        initial_samples: 20,
        mode: Mode::SH,
        ..SearchConfig::default()
    };
    let out = run_search(&cfg, &SyntheticEvaluator { noise_seed: 107 }).map_err(|e| e.to_string())?;
    let c = &out.counters;
    ensure(c.high_evals == 24, || format!("{} high-fidelity evaluations", c.high_evals))?;
    ensure(c.surrogate_refits == 2, || format!("{} surrogate refits", c.surrogate_refits))?;
    ensure(out.training_set.len() == 24, || format!("training set of {}", out.training_set.len()))?;
    Ok(format!("{} high-fidelity evaluations, {} refits", c.high_evals, c.surrogate_refits))
}

fn c8_hypervolume() -> Outcome {
    let mut rng = stream(108, &[]);
    const SAMPLES: usize = 1_000_000;
    let mut worst_z: f64 = 0.0;
    for trial in 0..50 {
        let dim = 2 + trial % 2;
        let n = rng.random_range(1..=10);
        let front: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
        let exact = hypervolume(&front, &vec![1.0; dim]).map_err(|e| e.to_string())?;
        let mut x = vec![0.0; dim];
        let mut hits = 0usize;
        for _ in 0..SAMPLES {
            x.iter_mut().for_each(|v| *v = rng.random::<f64>());
            hits += usize::from(front.iter().any(|p| p.iter().zip(&x).all(|(a, b)| a <= b)));
        }
        let p = hits as f64 / SAMPLES as f64;
        let sigma = (p * (1.0 - p) / SAMPLES as f64).sqrt();
        ensure((exact - p).abs() <= 3.0 * sigma + 1e-12, || format!("trial {trial}: exact {exact} vs {p} (sigma {sigma:e})"))?;
        if sigma > 0.0 {
            worst_z = worst_z.max((exact - p).abs() / sigma);
        }
    }
    Ok(format!("50 fronts within 3 sigma, worst {worst_z:.2} sigma"))
}

fn c9_ablation() -> Outcome {
    let started = Instant::now();
    let (mut larger, mut not_dominated) = (0, 0);
    let mut sizes = Vec::new();
    for seed in 0..10 {
        let eval = SyntheticEvaluator { noise_seed: seed };
        let cfg = |mode| SearchConfig { population_size: 100, max_generations: 100, surrogate_update_interval: 20, mode, master_seed: seed, ..SearchConfig::default() };
        let sh = run_search(&cfg(Mode::SH), &eval).map_err(|e| e.to_string())?;
        let l = run_search(&cfg(Mode::L), &eval).map_err(|e| e.to_string())?;
        sizes.push(format!("{}/{}", sh.archive.len(), l.archive.len()));
        larger += usize::from(sh.archive.len() >= l.archive.len());
        let high = |a: &Archive| -> Result<Vec<[f64; 2]>, String> {
            let screened = secondary_screening(a.entries(), &eval).map_err(|e| e.to_string())?;
            Ok(screened.iter().map(|e| e.high.map(|(x, y)| [x, y]).expect("screened")).collect())
        };
        let (sh_front, l_front) = (high(&sh.archive)?, high(&l.archive)?);
        let wholesale = l_front.iter().any(|q| sh_front.iter().all(|p| dominates(q, p)));
        not_dominated += usize::from(!wholesale);
    }
    let secs = within(Duration::from_secs(600), started, "ablation")?;
    let detail = format!("SH>=L archive in {larger}/10, SH front not wholesale dominated in {not_dominated}/10, sizes SH/L {} ({secs:.0} s)", sizes.join(" "));
    ensure(larger >= 7 && not_dominated >= 7, || detail.clone())?;
    Ok(detail)
}

fn robarch(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_robarch")).args(args).output().map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    ensure(out.status.success(), || format!("robarch {} exited with {:?}: {}", args.join(" "), out.status.code(), String::from_utf8_lossy(&out.stderr)))?;
    Ok(stdout)
}

fn csv_rows(path: &Path) -> Result<Vec<csv::StringRecord>, String> {
    let mut r = csv::Reader::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    r.records().collect::<Result<_, _>>().map_err(|e| e.to_string())
}

/// `(clean, fgsm, pgd7, pgd20)` error rates from a metrics file.
fn metrics(path: &Path) -> Result<[f64; 4], String> {
    let rows = csv_rows(path)?;
    let row = rows.first().ok_or("empty metrics file")?;
    let mut out = [0.0; 4];
    for (i, v) in out.iter_mut().enumerate() {
        *v = row[3 + i].parse().map_err(|e| format!("metrics column {}: {e}", 3 + i))?;
    }
    Ok(out)
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

fn c10_micronet_smoke() -> Outcome {
    let started = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    let config = root.join("config.json");
    std::fs::write(
        &config,
        r#"{"population_size": 20, "max_generations": 20, "surrogate_update_interval": 10, "initial_samples": 16, "infill_count": 4, "evaluator": "micronet", "master_seed": 11}"#,
    )
    .map_err(|e| e.to_string())?;
    let (ckpt_dir, run, conv, none) = (root.join("supernet"), root.join("run"), root.join("conv"), root.join("none"));

    robarch(&["train-supernet", "--config", p(&config), "--out", p(&ckpt_dir)])?;
    let log = csv_rows(&ckpt_dir.join("train_log.csv"))?;
    let loss = |r: &csv::StringRecord| r[1].parse::<f64>().unwrap_or(f64::NAN);
    let (first, last) = (loss(&log[0]), loss(&log[log.len() - 1]));
    ensure(log.len() == 20 && last < first, || format!("supernet adv loss {first} -> {last} over {} epochs", log.len()))?;

    let ckpt = ckpt_dir.join("supernet.ckpt");
    robarch(&["search", "--config", p(&config), "--checkpoint", p(&ckpt), "--out", p(&run)])?;
    robarch(&["screen", p(&run)])?;
    let screened = read_archive(&run.join("screened.csv")).map_err(|e| e.to_string())?;
    let convs = |g: &Genome| g.genes().iter().filter(|&&v| Operation::from_gene(v).is_some_and(Operation::is_conv)).count();
    let (index, pick) = screened.iter().enumerate().max_by_key(|(i, e)| (convs(&e.genome), std::cmp::Reverse(*i))).ok_or("empty screened set")?;
    let index = index.to_string();
    robarch(&["final-train", p(&run), "--index", &index, "--config", p(&config), "--out", p(&conv)])?;
    let all_none = Genome::uniform(Operation::None).to_string();
    robarch(&["final-train", "--genome", &all_none, "--config", p(&config), "--out", p(&none)])?;
    let secs = within(Duration::from_secs(30 * 60), started, "pipeline")?;

    let [clean, fgsm, pgd7, pgd20] = metrics(&conv.join("metrics.csv"))?;
    let [none_clean, ..] = metrics(&none.join("metrics.csv"))?;
    let gap = (1.0 - clean) - (1.0 - none_clean);
    let detail = format!(
        "{} conv ops, clean acc {:.3} vs all-None {:.3}, errors FGSM {fgsm:.3} PGD-7 {pgd7:.3} PGD-20 {pgd20:.3}, {secs:.0} s",
        convs(&pick.genome),
        1.0 - clean,
        1.0 - none_clean
    );
    ensure(gap >= 0.20, || format!("accuracy gap {gap:.3}; {detail}"))?;
    ensure(pgd20 >= pgd7 - 0.01 && pgd7 >= fgsm - 0.01, || format!("attack ordering broken; {detail}"))?;
    Ok(detail)
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"population_size": 40, "max_generations": 40, "surrogate_update_interval": 20, "initial_samples": 30, "infill_count": 6}"#)
        .map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for workers in ["1", "3"] {
        let run = dir.path().join(format!("w{workers}"));
        robarch(&["--workers", workers, "search", "--config", p(&config), "--seed", "5", "--out", p(&run)])?;
        robarch(&["--workers", workers, "screen", p(&run)])?;
        let read = |name: &str| std::fs::read(run.join(name)).map_err(|e| e.to_string());
        files.push((read("archive.csv")?, read("screened.csv")?));
    }
    ensure(files[0].0 == files[1].0, || "archive.csv differs between 1 and 3 workers".into())?;
    ensure(files[0].1 == files[1].1, || "screened.csv differs between 1 and 3 workers".into())?;
    Ok(format!("archive.csv ({} bytes) and screened.csv identical for 1 and 3 workers", files[0].0.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("criterion_01_sorting_oracle", c1_sorting),
        ("criterion_02_variation_closure", c2_closure),
        ("criterion_03_rbf_exact_fit", c3_rbf),
        ("criterion_04_gradient_suite", c4_gradients),
        ("criterion_05_attack_invariants", c5_attacks),
        ("criterion_06_parameter_sharing", c6_sharing),
        ("criterion_07_search_accounting", c7_accounting),
        ("criterion_08_hypervolume_oracle", c8_hypervolume),
        ("criterion_09_fidelity_ablation", c9_ablation),
        ("criterion_10_micronet_smoke", c10_micronet_smoke),
        ("criterion_11_worker_determinism", c11_determinism),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let started = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {name} ({secs:.1} s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1} s): {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
