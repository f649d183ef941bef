//! Acceptance criteria 1–7. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Pass criterion numbers as arguments to run a subset.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use jja_cli::commands::OracleReport;
use jja_cli::output::read_csv;
use jja_cli::presets::{with_junctions, Preset};
use jja_core::circuit::capacitance_model;
use jja_core::excitations::build_trial;
use jja_core::faer::Mat;
use jja_core::ham_mpo::{build_charge_coupling, build_hamiltonian};
use jja_core::kerr::{build_star_model, pert1_chi, pert2_chi};
use jja_core::linalg;
use jja_core::localbasis::build_bases;
use jja_core::normalmodes::{iterate_residual, kerr_first_order, normal_modes, solve_eta, symplectic_diagonalize, symplectic_residual, QuadraticForm};
use jja_core::oracle::{dense_eigensolve, dense_hamiltonian, dense_walsh_hadamard, DenseSpectrum};
use jja_core::pipeline::{kerr_fluxonium, kerr_modes, lowest_strings, solve_excitation, solve_fluxonium_excited, solve_ground, Instance, FLUXONIUM_LABEL, GROUND_LABEL};
use jja_core::tn::{Mps, TruncationPolicy};
use jja_core::{BasisConfig, CircuitParams, OccupationString, SolverConfig, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(bool, String), String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Fluxonium toy: three array junctions closed by a weak junction.
fn toy(phi_ext: f64) -> CircuitParams {
    CircuitParams { phi_ext, ..CircuitParams::uniform(3, 20.0, 0.5, 3.0, Some(2.0), 50.0, 10.0, 10.0) }
}

fn basis(d: usize) -> BasisConfig {
    BasisConfig { ncut: 30, d }
}

fn full_spectrum(inst: &Instance) -> Result<DenseSpectrum, String> {
    let h = inst.dense_hamiltonian().map_err(err)?;
    dense_eigensolve(&h, h.nrows()).map_err(err)
}

fn column(spec: &DenseSpectrum, i: usize) -> Vec<C64> {
    let v = spec.eigenvectors.as_ref().expect("eigenvectors kept");
    (0..v.nrows()).map(|r| v[(r, i)]).collect()
}

/// Harmonic trial `Π Â†|reference⟩` built on a dense reference vector.
fn dense_trial(inst: &Instance, reference: &[C64], reference_label: &str, modes: &[usize]) -> Result<Vec<C64>, String> {
    let r = Mps::from_dense(&inst.dims(), reference, &TruncationPolicy::exact()).map_err(err)?;
    let occ = OccupationString::from_modes(inst.n(), modes).map_err(err)?;
    let t = build_trial(&r, reference_label, &occ, &inst.normal_modes, &inst.bases, &TruncationPolicy::exact()).map_err(err)?;
    t.mps.to_dense().map_err(err)
}

/// Exact `χ_jk`, states identified from the dense ground state and trials.
fn dense_chi_modes(inst: &Instance, spec: &DenseSpectrum, j: usize, k: usize) -> Result<f64, String> {
    let g = column(spec, 0);
    let t = |m: &[usize]| dense_trial(inst, &g, GROUND_LABEL, m);
    Ok(dense_walsh_hadamard(spec, &[g.clone(), t(&[j])?, t(&[k])?, t(&[j, k])?]).map_err(err)?.0)
}

/// Exact `χ_φk`, with the first excited eigenstate as the fluxonium level.
fn dense_chi_flux(inst: &Instance, spec: &DenseSpectrum, k: usize) -> Result<f64, String> {
    let (g, f) = (column(spec, 0), column(spec, 1));
    let a = dense_trial(inst, &g, GROUND_LABEL, &[k])?;
    let b = dense_trial(inst, &f, FLUXONIUM_LABEL, &[k])?;
    Ok(dense_walsh_hadamard(spec, &[g, f, a, b]).map_err(err)?.0)
}

/// Positive ratios with `|1 − r|` strictly decreasing and at least halved end to end.
fn monotone_to_one(ratios: &[f64]) -> bool {
    let gap = |r: f64| (1.0 - r).abs();
    ratios.iter().all(|&r| r > 0.0)
        && ratios.windows(2).all(|w| gap(w[1]) < gap(w[0]))
        && ratios.last().zip(ratios.first()).is_some_and(|(&l, &f)| gap(l) <= 0.5 * gap(f))
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
}

const CC_POLICY: TruncationPolicy = TruncationPolicy { max_bond: usize::MAX, svd_cutoff: 1e-12 };

fn criterion_1() -> Check {
    let mut worst_rel = 0.0f64;
    let mut worst_bond = 0usize;
    let mut cases = 0;
    for preset in Preset::ALL {
        for n in [2, 3, 4] {
            for d in [3, 4] {
                for (phi, ng) in [(0.0, 0.0), (0.7, 0.13)] {
                    let mut p = with_junctions(&preset.params(), n);
                    p.phi_ext = phi;
                    p.ng = (0..n).map(|i| ng * (i + 1) as f64).collect();
                    let p = p.resolved().map_err(err)?;
                    let model = capacitance_model(&p).map_err(err)?;
                    let bases = build_bases(&p, &model, basis(d)).map_err(err)?;
                    let ham = build_hamiltonian(&p, &model, &bases, &TruncationPolicy::operator()).map_err(err)?;
                    let h = dense_hamiltonian(&p, &model, &bases).map_err(err)?;
                    let diff = linalg::frobenius_c((ham.mpo.to_dense().map_err(err)? - &h).as_ref());
                    let spec = dense_eigensolve(&h, h.nrows()).map_err(err)?;
                    let norm = spec.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                    worst_rel = worst_rel.max(diff / norm);
                    let (cc, _) = build_charge_coupling(&bases, &model, &CC_POLICY).map_err(err)?;
                    worst_bond = worst_bond.max(cc.max_bond());
                    cases += 1;
                }
            }
        }
    }
    let mut full = Vec::new();
    for preset in Preset::ALL {
        let p = preset.params().resolved().map_err(err)?;
        let model = capacitance_model(&p).map_err(err)?;
        let bases = build_bases(&p, &model, basis(3)).map_err(err)?;
        let (cc, _) = build_charge_coupling(&bases, &model, &CC_POLICY).map_err(err)?;
        full.push(format!("{} N={} D_cc={}", preset.name(), p.n_junctions, cc.max_bond()));
        worst_bond = worst_bond.max(cc.max_bond());
    }
    let ok = worst_rel <= 1e-10 && worst_bond <= 5;
    Ok((ok, format!("{cases} cases, max ‖ΔH‖_F/‖H‖_2 = {worst_rel:.2e} (≤ 1e-10), max charge-coupling bond at cutoff 1e-12 {worst_bond} (≤ 5); full size: {}", full.join("; "))))
}

fn criterion_2() -> Check {
    let inst = Instance::new(&toy(0.3 * PI), basis(4)).map_err(err)?;
    let cfg = SolverConfig::with_variance_tol(64, 1e-6);
    let spec = full_spectrum(&inst)?;
    let ground = solve_ground(&inst, &cfg).map_err(err)?;
    let e0 = spec.eigenvalues[0];
    let rel = (ground.record.energy - e0).abs() / e0.abs();
    let mut ok = rel <= 1e-8;
    let mut seen = Vec::new();
    let (mut worst_de, mut worst_fid) = (0.0f64, 1.0f64);
    for occ in lowest_strings(&inst.normal_modes, 6, 2, &[]).map_err(err)? {
        let s = solve_excitation(&inst, &ground, GROUND_LABEL, &occ, &cfg).map_err(err)?;
        let (idx, fid) = spec.best_overlap(&s.mps.to_dense().map_err(err)?).map_err(err)?;
        let de = (s.record.energy - spec.eigenvalues[idx]).abs();
        ok &= de <= 1e-6 && fid > 0.999 && !seen.contains(&idx) && s.record.converged;
        seen.push(idx);
        worst_de = worst_de.max(de);
        worst_fid = worst_fid.min(fid);
    }
    Ok((ok, format!("ground rel. error {rel:.2e} (≤ 1e-8); 6 targets → dense states {seen:?}, max |ΔE| {worst_de:.2e} GHz (≤ 1e-6), min fidelity {worst_fid:.6} (> 0.999)")))
}

fn criterion_3() -> Check {
    let p = CircuitParams::uniform(8, 30.0, 0.5, 0.0, None, 100.0, 100.0, 100.0);
    let inst = Instance::new(&p, basis(6)).map_err(err)?;
    let band = iterate_residual(&inst.normal_modes, &inst.params, 1e-12, 100).map_err(err)?;
    let cfg = SolverConfig::with_variance_tol(64, 1e-4);
    let ground = solve_ground(&inst, &cfg).map_err(err)?;
    let mut states = Vec::new();
    let (mut worst_sigma, mut worst_dev, mut max_bond) = (ground.record.sigma, 0.0f64, 0usize);
    let mut ok = ground.record.converged;
    for k in 0..8 {
        let occ = OccupationString::single(8, k).map_err(err)?;
        let s = solve_excitation(&inst, &ground, GROUND_LABEL, &occ, &cfg).map_err(err)?;
        let gap = s.record.energy - ground.record.energy;
        let dev = (gap - band.omegas[k]).abs() / band.omegas[k];
        worst_sigma = worst_sigma.max(s.record.sigma);
        worst_dev = worst_dev.max(dev);
        max_bond = max_bond.max(s.mps.max_bond());
        ok &= s.record.converged && s.record.sigma < 1e-3 && dev < 0.01;
        states.push(s.mps);
    }
    let mut worst_ov = 0.0f64;
    for a in 0..states.len() {
        for b in a + 1..states.len() {
            worst_ov = worst_ov.max(states[a].inner(&states[b]).map_err(err)?.norm());
        }
    }
    ok &= worst_ov < 1e-3 && max_bond <= 64;
    Ok((
        ok,
        format!(
            "band {:.4}–{:.4} GHz; max σ {worst_sigma:.2e} GHz (< 1e-3), max pairwise overlap {worst_ov:.2e} (< 1e-3), max rel. deviation from band {worst_dev:.2e} (< 1e-2), max bond {max_bond}",
            band.omegas[0], band.omegas[7]
        ),
    ))
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Mat<f64> {
    let a = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let mut m = &a * a.transpose();
    for i in 0..n {
        m[(i, i)] += 0.1;
    }
    linalg::symmetrize(m.as_ref())
}

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_sympl, mut worst_diag) = (0.0f64, 0.0f64);
    for t in 0..100 {
        let n = 1 + t % 10;
        let form = QuadraticForm { k: random_spd(&mut rng, n), g: random_spd(&mut rng, n) };
        let m = symplectic_diagonalize(&form).map_err(err)?;
        worst_sympl = worst_sympl.max(symplectic_residual(&m.s_matrix()));
        let sinv = Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => m.c_inv[(i, j)],
            (false, false) => m.c[(j - n, i - n)],
            _ => 0.0,
        });
        let d = sinv.transpose() * form.matrix() * &sinv;
        for i in 0..2 * n {
            for j in 0..2 * n {
                let target = if i == j { m.omegas[i % n] } else { 0.0 };
                worst_diag = worst_diag.max((d[(i, j)] - target).abs());
            }
        }
    }
    let mut worst_eta = 0.0f64;
    for i in 0..=120 {
        let ratio = 1e-6 * (5e6f64).powf(i as f64 / 120.0);
        let eta = solve_eta(ratio / 8.0, 1.0).map_err(err)?;
        worst_eta = worst_eta.max(((-eta / 4.0).exp() * eta * eta - ratio).abs());
    }
    let p = with_junctions(&Preset::Set2.params(), 10).resolved().map_err(err)?;
    let nm0 = normal_modes(&p, &capacitance_model(&p).map_err(err)?).map_err(err)?;
    let nm1 = iterate_residual(&nm0, &p, 1e-12, 100).map_err(err)?;
    let dw = nm0.omegas.iter().zip(&nm1.omegas).map(|(a, b)| ((a - b) / a).abs()).fold(0.0, f64::max);
    let (c0, c1) = (kerr_first_order(&nm0, &p.ej_array), kerr_first_order(&nm1, &p.ej_array));
    let dchi = (0..nm0.n()).map(|k| ((c1[(0, k)] - c0[(0, k)]) / c0[(0, k)]).abs()).fold(0.0, f64::max);
    let ok = worst_sympl < 1e-10 && worst_diag < 1e-10 && worst_eta < 1e-12 && dw < 1e-3 && dchi < 1e-3;
    Ok((
        ok,
        format!(
            "100 forms: max |SΩSᵀ−Ω| {worst_sympl:.2e}, max diag. residual {worst_diag:.2e} (< 1e-10); max η residual {worst_eta:.2e} (< 1e-12); residual iteration ({} steps) max |Δω/ω| {dw:.2e}, max |Δχ1_0k/χ1_0k| {dchi:.2e} (< 1e-3) on set2 cut to N=10",
            nm1.iterations
        ),
    ))
}

fn criterion_5() -> Check {
    // Walsh–Hadamard χ from DMRG-X against the exact spectrum.
    let inst = Instance::new(&toy(0.3 * PI), basis(4)).map_err(err)?;
    let cfg = SolverConfig::with_variance_tol(64, 1e-6);
    let spec = full_spectrum(&inst)?;
    let ground = solve_ground(&inst, &cfg).map_err(err)?;
    let flux = solve_fluxonium_excited(&inst, &ground, &cfg).map_err(err)?;
    let mut wh_dev = 0.0f64;
    let run = kerr_modes(&inst, &ground, 1, 2, &cfg).map_err(err)?;
    wh_dev = wh_dev.max((run.result.chi - dense_chi_modes(&inst, &spec, 1, 2)?).abs());
    for k in [1, 2] {
        let run = kerr_fluxonium(&inst, &ground, &flux, k, &cfg).map_err(err)?;
        wh_dev = wh_dev.max((run.result.chi - dense_chi_flux(&inst, &spec, k)?).abs());
    }
    let wh_ok = wh_dev <= 1e-4;

    // First order: weaker charging and stronger junctions.
    let mut r1 = Vec::new();
    for s in [1.0, 2.0, 4.0, 8.0] {
        let p = CircuitParams {
            ej_array: vec![16.0 * s, 21.0 * s, 28.0 * s],
            ..CircuitParams::uniform(3, 0.0, 0.5 / s, 0.0, None, 50.0 / s, 10.0 / s, 10.0 / s)
        };
        let inst = Instance::new(&p, basis(8)).map_err(err)?;
        let spec = full_spectrum(&inst)?;
        let exact = dense_chi_modes(&inst, &spec, 1, 2)?;
        r1.push(pert1_chi(&inst.normal_modes, 1, 2).map_err(err)?.chi / exact);
    }
    let p1_ok = monotone_to_one(&r1);

    // Reduced fluxonium model: weaker black-sheep junction.
    let mut r2 = Vec::new();
    for f in [1.0, 0.5, 0.25, 0.125] {
        let p = CircuitParams { ej_blacksheep: 3.0 * f, ..toy(0.3 * PI) };
        let inst = Instance::new(&p, basis(6)).map_err(err)?;
        let spec = full_spectrum(&inst)?;
        let exact = dense_chi_flux(&inst, &spec, 2)?;
        let star = build_star_model(&inst.params, &inst.normal_modes).map_err(err)?;
        r2.push(pert2_chi(&star, 1, 16, 8).map_err(err)?.chi / exact);
    }
    let p2_ok = monotone_to_one(&r2);
    Ok((
        wh_ok && p1_ok && p2_ok,
        format!(
            "DMRG-X vs exact max |Δχ| {wh_dev:.2e} GHz (≤ 1e-4) [{}]; χ1/exact over 4 scalings [{}] [{}]; pert2/exact over 4 scalings [{}] [{}]",
            if wh_ok { "ok" } else { "fail" },
            fmt_list(&r1),
            if p1_ok { "monotone to 1" } else { "not monotone to 1" },
            fmt_list(&r2),
            if p2_ok { "monotone to 1" } else { "not monotone to 1" }
        ),
    ))
}

fn criterion_6() -> Check {
    // Offset-charge symmetries.
    let mut worst_ng = 0.0f64;
    for phi in [0.0, PI] {
        let ng = [0.1, 0.23, 0.37];
        let lowest = |shift: &dyn Fn(f64) -> f64| -> Result<Vec<f64>, String> {
            let p = CircuitParams { ng: ng.iter().map(|&x| shift(x)).collect(), ..toy(phi) };
            let inst = Instance::new(&p, basis(4)).map_err(err)?;
            let h = inst.hamiltonian.mpo.to_dense().map_err(err)?;
            Ok(dense_eigensolve(&h, 12).map_err(err)?.eigenvalues)
        };
        let base = lowest(&|x| x)?;
        for other in [lowest(&|x| x + 1.0)?, lowest(&|x| 1.0 - x)?] {
            worst_ng = worst_ng.max(base.iter().zip(&other).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
    }
    let ng_ok = worst_ng <= 1e-9;

    // Flux periodicity and reflection of χ_φ2 on a 5-point grid.
    let cfg = SolverConfig::with_variance_tol(64, 1e-6);
    let mut pts = Vec::new();
    for i in 0..5 {
        let inst = Instance::new(&toy(0.5 * PI * i as f64), basis(4)).map_err(err)?;
        let ground = solve_ground(&inst, &cfg).map_err(err)?;
        let flux = solve_fluxonium_excited(&inst, &ground, &cfg).map_err(err)?;
        let r = kerr_fluxonium(&inst, &ground, &flux, 2, &cfg).map_err(err)?.result;
        pts.push((r.chi, r.sigma_bound));
    }
    let within = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).abs() <= 3.0 * a.1.hypot(b.1);
    let flux_ok = within(pts[0], pts[4]) && within(pts[1], pts[3]);

    // Edge localization of the highest modes with unequal end capacitances.
    let p = Preset::Set1.params().resolved().map_err(err)?;
    let nm = normal_modes(&p, &capacitance_model(&p).map_err(err)?).map_err(err)?;
    let n = nm.n();
    let argmax = |k: usize| (0..n).max_by(|&a, &b| nm.participation(a, k).total_cmp(&nm.participation(b, k))).unwrap_or(0);
    let tops: Vec<usize> = (n - 2..n).map(argmax).collect();
    let edge_ok = tops.iter().all(|&j| j == 0 || j == n - 1);
    let tenth = n / 10;
    let end_weight: Vec<f64> = (n - 2..n)
        .map(|k| {
            let w = |r: std::ops::Range<usize>| r.map(|j| nm.participation(j, k)).sum::<f64>();
            w(0..tenth).max(w(n - tenth..n)) / w(0..n)
        })
        .collect();
    Ok((
        ng_ok && flux_ok && edge_ok,
        format!(
            "n_g max |ΔE| {worst_ng:.2e} GHz (≤ 1e-9); χ_φ2(φ) = [{}], |χ(0)−χ(2π)| {:.1e}, |χ(π/2)−χ(3π/2)| {:.1e}, σ-bound ≤ {:.1e} [{}]; top two modes of set1 peak at junctions {tops:?} (0-based) of {n}, required {{0, {}}}; weight in the nearer outer tenth [{}]",
            fmt_list(&pts.iter().map(|p| p.0).collect::<Vec<_>>()),
            (pts[0].0 - pts[4].0).abs(),
            (pts[1].0 - pts[3].0).abs(),
            pts.iter().map(|p| p.1).fold(0.0, f64::max),
            if flux_ok { "within 3σ" } else { "outside 3σ" },
            n - 1,
            fmt_list(&end_weight)
        ),
    ))
}

fn jja(args: &[&str]) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_jja")).args(args).output().map_err(err)
}

fn json_numbers(v: &serde_json::Value, out: &mut Vec<f64>) {
    match v {
        serde_json::Value::Number(x) => out.extend(x.as_f64()),
        serde_json::Value::Array(a) => a.iter().for_each(|x| json_numbers(x, out)),
        serde_json::Value::Object(o) => o.iter().filter(|(k, _)| *k != "header").for_each(|(_, x)| json_numbers(x, out)),
        _ => {}
    }
}

/// Numeric fields of an emitted file, header excluded.
fn numbers(path: &Path) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    if path.extension().is_some_and(|e| e == "json") {
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).map_err(err)?).map_err(err)?;
        json_numbers(&v, &mut out);
    } else {
        let (_, rows) = read_csv(path).map_err(err)?;
        out.extend(rows.iter().flat_map(|r| r.iter().filter_map(|f| f.parse::<f64>().ok()).collect::<Vec<_>>()));
    }
    Ok(out)
}

fn criterion_7() -> Check {
    let tmp = tempfile::tempdir().map_err(err)?;
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/toy.json");
    let cfg = cfg.to_str().ok_or("config path")?;
    let mut worst = 0.0f64;
    let mut files = 0;
    let mut same_shape = true;
    for cmd in ["normal-modes", "spectrum", "kerr"] {
        let mut outs = Vec::new();
        for run in ["a", "b"] {
            let dir = tmp.path().join(format!("{cmd}-{run}"));
            let o = jja(&[cmd, "--config", cfg, "--seed", "11", "--out", dir.to_str().ok_or("dir")?])?;
            if !o.status.success() {
                return Ok((false, format!("{cmd} exited with {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr))));
            }
            outs.push(dir);
        }
        for entry in std::fs::read_dir(&outs[0]).map_err(err)? {
            let name = entry.map_err(err)?.file_name();
            let a = std::fs::read_to_string(outs[0].join(&name)).map_err(err)?;
            let (na, nb) = (numbers(&outs[0].join(&name))?, numbers(&outs[1].join(&name))?);
            same_shape &= na.len() == nb.len() && a.contains("config_sha256");
            worst = na.iter().zip(&nb).map(|(x, y)| (x - y).abs()).fold(worst, f64::max);
            files += 1;
        }
    }
    let spectrum: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("spectrum-a/spectrum.json")).map_err(err)?).map_err(err)?;
    let kerr: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("kerr-a/kerr.json")).map_err(err)?).map_err(err)?;
    let finite = |v: &serde_json::Value, keys: &[&str]| keys.iter().all(|k| v[*k].as_f64().is_some_and(f64::is_finite));
    let mut records = vec![&spectrum["ground"]];
    records.extend(spectrum["states"].as_array().ok_or("states")?);
    let mut carried = records.iter().all(|r| finite(r, &["sigma_ghz", "fidelity"]));
    let rows = kerr["rows"].as_array().ok_or("rows")?;
    carried &= !rows.is_empty() && rows.iter().all(|r| finite(r, &["sigma", "fidelity"]));

    let dir = tmp.path().join("oracle");
    let o = jja(&["oracle-check", "--config", cfg, "--out", dir.to_str().ok_or("dir")?])?;
    let report: OracleReport = serde_json::from_str(&std::fs::read_to_string(dir.join("oracle_check.json")).map_err(err)?).map_err(err)?;
    let oracle_ok = o.status.code() == Some(0) && report.passed && report.items.iter().all(|i| i.passed);
    let ok = worst <= 1e-10 && same_shape && carried && oracle_ok;
    Ok((
        ok,
        format!(
            "{files} files from two seeded runs, max |Δ| {worst:.1e} (≤ 1e-10); σ and F on {} records; oracle-check exit {:?} with {}/{} items passing",
            records.len() + rows.len(),
            o.status.code(),
            report.items.iter().filter(|i| i.passed).count(),
            report.items.len()
        ),
    ))
}

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "MPO faithfulness", budget: Duration::from_secs(60), run: criterion_1 },
        Criterion { id: 2, name: "solver–oracle equivalence", budget: Duration::from_secs(300), run: criterion_2 },
        Criterion { id: 3, name: "degenerate-band targeting", budget: Duration::from_secs(900), run: criterion_3 },
        Criterion { id: 4, name: "symplectic suite", budget: Duration::from_secs(60), run: criterion_4 },
        Criterion { id: 5, name: "Kerr pipeline", budget: Duration::from_secs(600), run: criterion_5 },
        Criterion { id: 6, name: "physics symmetry suite", budget: Duration::from_secs(600), run: criterion_6 },
        Criterion { id: 7, name: "determinism and reporting", budget: Duration::from_secs(600), run: criterion_7 },
    ];
    let only: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(c.run).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, d)) => (ok && t <= c.budget, d),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!(
            "criterion {} [PRIMARY] {}: {} ({:.1} s of {} s) {detail}",
            c.id,
            c.name,
            if ok { "PASS" } else { "FAIL" },
            t.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
