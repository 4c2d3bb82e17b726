//! Command-line front end: construct the curve, the coefficient sequence,
//! and the layer profiles; assemble the corrected field; run the
//! verification suite; and emit figure data with a plotting script.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wch_cli::config::RunConfig;
use wch_cli::emit;
use wch_cli::report::{ConfigEcho, CriterionReport, VerifyReport, SCHEMA_VERSION};
use wch_cli::verify::{run_all, VerifyContext};
use wch_core::approx::{Engine, FermiChart, GlobalField, Variant};
use wch_core::curve::{period, Curve};
use wch_core::layer::{v0, LayerSystem};
use wch_core::mu::{
    closed_sequence, exact_series, mu1_closed, quintic_coeff_alt, recurrence_sequence,
    solve_endpoint_system,
};

#[derive(Parser)]
#[command(
    name = "wch",
    version,
    about = "Periodic planar interface field: construction and verification",
    long_about = "Constructs a periodic planar curve from its curvature law, the \
closed-form tilt of its zero set, and one-dimensional transition-layer profiles; \
assembles the five-term corrected field around the curve; and verifies the \
quantitative claims (decay rates, projections, monotonicity, zero-set bounds) \
with a twelve-criterion suite."
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Flat key=value configuration file (one pair per line, `#` comments).
    #[arg(long, value_name = "FILE", global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key after the file is read (repeatable).
    /// Keys: eps, t_periods, curve_n, layer_n, layer_half_width, tube_step,
    /// series_m, delta, tilt, out_dir, seed.
    #[arg(long, value_name = "KEY=VALUE", action = clap::ArgAction::Append, global = true)]
    set: Vec<String>,
    /// Output directory (shorthand for --set out_dir=DIR).
    #[arg(long, value_name = "DIR", global = true)]
    out_dir: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Construct the periodic curve; write samples and discrete invariants.
    Curve,
    /// Quintic coefficient sequence: endpoint solve, recursion, closed form.
    Coeffs,
    /// Transition-layer profiles, moments, and the integral identity table.
    Profiles,
    /// Assemble the corrected field in the tube and spot-check invariants
    /// at seeded random sample points.
    Assemble,
    /// Run the twelve-criterion verification suite; nonzero exit on failure.
    Verify {
        /// Also print the JSON report to stdout.
        #[arg(long)]
        json: bool,
        /// Drop one correction term (v2 | v3 | v4) to demonstrate the
        /// decay-rate criterion detects its absence.
        #[arg(long, value_name = "TERM")]
        ablate: Option<String>,
    },
    /// Emit figure data (curve polyline, field grid, zero polyline) and a
    /// plotting script.
    Plotdata,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    init_threads();
    let cfg = resolve_config(&cli.common)?;
    match cli.cmd {
        Cmd::Curve => cmd_curve(&cfg)?,
        Cmd::Coeffs => cmd_coeffs(&cfg)?,
        Cmd::Profiles => cmd_profiles(&cfg)?,
        Cmd::Assemble => cmd_assemble(&cfg)?,
        Cmd::Verify { json, ablate } => return cmd_verify(&cfg, json, ablate.as_deref()),
        Cmd::Plotdata => cmd_plotdata(&cfg)?,
    }
    Ok(ExitCode::SUCCESS)
}

/// WCH_THREADS caps the worker pool; unset means one worker per core.
fn init_threads() {
    if let Ok(v) = std::env::var("WCH_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn resolve_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for pair in &common.set {
        let (key, value) = pair
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got `{pair}`"))?;
        cfg.set(key.trim(), value.trim())?;
    }
    if let Some(dir) = &common.out_dir {
        cfg.set("out_dir", dir)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Periodic sixth-order second derivative of uniformly spaced samples.
fn periodic_second_deriv6(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let c = [2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0];
    let mut out = vec![0.0; n];
    for (j, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (o, cf) in c.iter().enumerate() {
            let idx = (j + n + o - 3) % n;
            acc += cf * v[idx];
        }
        *slot = acc / (180.0 * h * h);
    }
    out
}

fn cmd_curve(cfg: &RunConfig) -> Result<()> {
    let curve = Curve::build(cfg.curve_n);
    let tbar = period();
    let n = cfg.curve_n;
    let h = tbar / n as f64;

    // Discrete check of the curvature laws on this grid, with the second
    // derivative from finite differences of the sampled values.
    let kpp = periodic_second_deriv6(&curve.k, h);
    let mut law_residual = 0.0f64;
    let mut energy_residual = 0.0f64;
    for j in 0..n {
        let k = curve.k[j];
        let kp = curve.kp[j];
        law_residual = law_residual.max((kpp[j] + 0.5 * k * k * k).abs());
        energy_residual = energy_residual.max((kp * kp + 0.25 * k.powi(4) - 1.0).abs());
    }

    let sigma: Vec<f64> = (0..n).map(|j| h * j as f64).collect();
    let comments = vec![
        format!("periodic planar curve from the curvature law k'' = -k^3/2"),
        format!("period {tbar:.13} (about 7.4163)"),
        format!("horizontal drift per period {:.13}", curve.drift * tbar),
        format!("horizontal period {:.13}", curve.horizontal_period()),
        format!("grid points {n}, spacing {h:.6e}"),
        format!("discrete law residual {law_residual:.3e}, first-integral residual {energy_residual:.3e}"),
    ];
    let path = emit::out_path(&cfg.out_dir, emit::CURVE_CSV)?;
    emit::write_columns(
        &path,
        &comments,
        &[
            ("sigma", &sigma),
            ("k", &curve.k),
            ("kp", &curve.kp),
            ("x1", &curve.gamma1),
            ("x2", &curve.gamma2),
        ],
    )?;
    println!(
        "curve: period {tbar:.13}, horizontal period {:.13}, {n} samples -> {}",
        curve.horizontal_period(),
        path.display()
    );
    println!(
        "curve: discrete law residual {law_residual:.3e}, first integral {energy_residual:.3e}"
    );
    if law_residual > 1e-9 {
        println!(
            "warning: grid of {n} points leaves a discrete curvature-law residual of {law_residual:.3e} \
(threshold 1e-9); increase curve_n for production accuracy"
        );
    }
    Ok(())
}

fn cmd_coeffs(cfg: &RunConfig) -> Result<()> {
    let sol = solve_endpoint_system();
    let m = cfg.series_m;
    let recursed = recurrence_sequence(m, sol.mu0, sol.mu1);
    let closed = closed_sequence(m);
    let js: Vec<f64> = (0..=m).map(|j| j as f64).collect();
    let gaps: Vec<f64> = recursed.iter().zip(&closed).map(|(a, b)| (a - b).abs()).collect();
    let worst_gap = gaps.iter().cloned().fold(0.0f64, f64::max);

    // Independent cross-check against the exact rational-in-(mu0, mu1) series.
    let j_exact = m.min(60);
    let forms = exact_series(j_exact).map_err(|e| anyhow::anyhow!(e))?;
    let mut worst_rel = 0.0f64;
    for (j, form) in forms.iter().enumerate() {
        let exact = form.eval(sol.mu0, sol.mu1);
        worst_rel = worst_rel.max((recursed[j] - exact).abs() / exact.abs().max(1e-300));
    }

    let path = emit::out_path(&cfg.out_dir, emit::COEFFS_CSV)?;
    emit::write_columns(
        &path,
        &[
            format!("quintic-equation series coefficients, indices 0..={m}"),
            format!("endpoint solve: mu0 = {:.3e}, mu1 = {:.16}", sol.mu0, sol.mu1),
            format!("worst |recursed - closed| = {worst_gap:.3e}"),
            format!("worst relative gap vs exact rational series (j <= {j_exact}) = {worst_rel:.3e}"),
        ],
        &[("j", &js), ("recursed", &recursed), ("closed", &closed), ("abs_gap", &gaps)],
    )?;

    let endpoint = serde_json::json!({
        "mu0": sol.mu0,
        "mu1": sol.mu1,
        "mu1_closed_form": mu1_closed(),
        "mu2": recursed[2],
        "endpoint_determinant": sol.det,
        "quintic_lead_coefficient_alt": quintic_coeff_alt(sol.mu0),
        "worst_abs_gap_recursed_vs_closed": worst_gap,
        "worst_rel_gap_recursed_vs_exact": worst_rel,
    });
    let jpath = emit::out_path(&cfg.out_dir, emit::ENDPOINT_JSON)?;
    emit::write_text(&jpath, &(serde_json::to_string_pretty(&endpoint)? + "\n"))?;
    println!(
        "coeffs: mu0 = {:.3e}, mu1 = {:.16} (closed {:.16})",
        sol.mu0,
        sol.mu1,
        mu1_closed()
    );
    println!(
        "coeffs: worst closed-form gap {worst_gap:.3e}, worst exact-series gap {worst_rel:.3e} -> {} , {}",
        path.display(),
        jpath.display()
    );
    Ok(())
}

fn cmd_profiles(cfg: &RunConfig) -> Result<()> {
    let sys = LayerSystem::build(cfg.layer_half_width, cfg.layer_n);
    let v0s: Vec<f64> = sys.t.iter().map(|&t| v0(t)).collect();
    let path = emit::out_path(&cfg.out_dir, emit::PROFILES_CSV)?;
    emit::write_columns(
        &path,
        &[
            format!(
                "transition-layer profiles on [-{0}, {0}], {1} points",
                sys.half_width, sys.n
            ),
            format!("c_star = {:.16} (closed {:.16})", sys.c_star, wch_core::layer::c_star_closed()),
            format!("d_star = {:.16} (closed {:.16})", sys.d_star, wch_core::layer::d_star_closed()),
            format!("fredholm defect of the eta solve = {:.3e}", sys.fredholm_defect),
        ],
        &[
            ("t", &sys.t),
            ("v0", &v0s),
            ("eta", &sys.eta),
            ("eta1", &sys.eta1),
            ("eta2", &sys.eta2),
            ("eta3", &sys.eta3),
            ("w1", &sys.w1),
            ("w2", &sys.w2),
            ("w3", &sys.w3),
        ],
    )?;

    let table = sys.identity_table();
    let mut worst = 0.0f64;
    let rows: Vec<(String, Vec<f64>)> = table
        .iter()
        .map(|(name, value, target)| {
            let defect = (value - target).abs();
            worst = worst.max(defect);
            (name.clone(), vec![*value, *target, defect])
        })
        .collect();
    let ipath = emit::out_path(&cfg.out_dir, emit::IDENTITIES_CSV)?;
    emit::write_labeled(
        &ipath,
        &[format!("integral identities of the layer profiles; worst defect {worst:.3e}")],
        &["identity", "value", "target", "defect"],
        &rows,
    )?;
    println!(
        "profiles: c_star {:.12}, d_star {:.12}, worst identity defect {worst:.3e}",
        sys.c_star, sys.d_star
    );
    println!("profiles: wrote {} and {}", path.display(), ipath.display());
    ensure!(worst < 1e-8, "identity table defect {worst:.3e} exceeds 1e-8");
    Ok(())
}

fn cmd_assemble(cfg: &RunConfig) -> Result<()> {
    let eng = Engine::with_resolution(cfg.curve_n, cfg.layer_half_width, cfg.layer_n);
    let mode = cfg.tilt.mode();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let tbar = eng.period;
    for &eps in &cfg.eps_list {
        let tilt = eng.tilt(eps, mode);
        let chart = FermiChart::new(&eng.curve, eps);
        let r = (0.25 / eps - 0.15).min(8.0);

        // Tube grid: sigma along the period, layer coordinate across.
        let ns = 96;
        let nt = 65;
        let mut cs = vec![Vec::with_capacity(ns * nt); 6];
        for i in 0..ns {
            let sg = tbar * (i as f64 + 0.5) / ns as f64;
            let phis = tilt.phistar_value(sg);
            let ts: Vec<f64> = (0..nt).map(|q| -r + 2.0 * r * q as f64 / (nt - 1) as f64).collect();
            let zs: Vec<f64> = ts.iter().map(|t| t + phis).collect();
            let vs = eng.vtilde_val(sg, &zs, eps, &tilt, Variant::Full);
            for q in 0..nt {
                let (x1, x2) = chart.forward(sg, zs[q]);
                cs[0].push(sg);
                cs[1].push(ts[q]);
                cs[2].push(zs[q]);
                cs[3].push(x1);
                cs[4].push(x2);
                cs[5].push(vs[q]);
            }
        }

        // Seeded random sample-point checks: odd reflection, half-period
        // antisymmetry, range, and the wells at the tube edges.
        let mut sup_reflect = 0.0f64;
        let mut sup_shift = 0.0f64;
        let mut vmin = f64::INFINITY;
        let mut vmax = f64::NEG_INFINITY;
        let mut wells_ok = true;
        for _ in 0..128 {
            let sg = rng.gen_range(0.0..tbar);
            let t = rng.gen_range(-r..r);
            let z = t + tilt.phistar_value(sg);
            let v = eng.vtilde_val(sg, &[z], eps, &tilt, Variant::Full)[0];
            let v_reflect = eng.vtilde_val(-sg, &[-z], eps, &tilt, Variant::Full)[0];
            let v_shift = eng.vtilde_val(sg + 0.5 * tbar, &[-z], eps, &tilt, Variant::Full)[0];
            sup_reflect = sup_reflect.max((v + v_reflect).abs());
            sup_shift = sup_shift.max((v + v_shift).abs());
            vmin = vmin.min(v);
            vmax = vmax.max(v);
            let zp = 0.8 * r + tilt.phistar_value(sg);
            let zm = -0.8 * r + tilt.phistar_value(sg);
            let wp = eng.vtilde_val(sg, &[zp], eps, &tilt, Variant::Full)[0];
            let wm = eng.vtilde_val(sg, &[zm], eps, &tilt, Variant::Full)[0];
            if wp < 0.5 || wm > -0.5 {
                wells_ok = false;
            }
        }
        let overshoot = (vmax - 1.0).max(-1.0 - vmin).max(0.0);

        let label = format!("{eps:.6}");
        let path = emit::out_path(&cfg.out_dir, &format!("field_eps{label}.csv"))?;
        emit::write_columns(
            &path,
            &[
                format!("five-term corrected field in the tube, eps = {eps:.10}"),
                format!("tilt mode: {}", cfg.tilt),
                format!("layer half width used: {r:.4}"),
                format!("sample checks (seed {}): reflection defect {sup_reflect:.3e}, half-shift defect {sup_shift:.3e}", cfg.seed),
                format!("value range [{vmin:.6}, {vmax:.6}], overshoot {overshoot:.3e}"),
            ],
            &[
                ("sigma", &cs[0]),
                ("t", &cs[1]),
                ("z", &cs[2]),
                ("x1", &cs[3]),
                ("x2", &cs[4]),
                ("v", &cs[5]),
            ],
        )?;
        println!(
            "assemble eps={eps:.6}: reflection {sup_reflect:.3e}, half-shift {sup_shift:.3e}, \
range [{vmin:.4}, {vmax:.4}], wells {} -> {}",
            if wells_ok { "ok" } else { "BAD" },
            path.display()
        );
        ensure!(sup_reflect < 1e-6, "odd-reflection defect {sup_reflect:.3e} exceeds 1e-6");
        ensure!(sup_shift < 1e-6, "half-shift defect {sup_shift:.3e} exceeds 1e-6");
        ensure!(
            overshoot < 2.0 * eps * eps,
            "field overshoot {overshoot:.3e} exceeds 2 eps^2"
        );
        ensure!(wells_ok, "field does not reach its wells at the tube edges");
    }
    Ok(())
}

fn cmd_verify(cfg: &RunConfig, json: bool, ablate: Option<&str>) -> Result<ExitCode> {
    let ablate_variant = match ablate {
        None => None,
        Some("v2") => Some(Variant::NoV2),
        Some("v3") => Some(Variant::NoV3),
        Some("v4") => Some(Variant::NoV4),
        Some(other) => bail!("--ablate expects v2, v3, or v4, got `{other}`"),
    };
    let t0 = Instant::now();
    let ctx = VerifyContext::new(cfg.clone());
    let outcomes = run_all(&ctx, ablate_variant);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let all_passed = passed == outcomes.len();
    println!(
        "verify: {passed} of {} criteria passed in {:.1} s{}",
        outcomes.len(),
        t0.elapsed().as_secs_f64(),
        if ablate_variant.is_some() { " (with ablation)" } else { "" }
    );

    let report = VerifyReport {
        schema: SCHEMA_VERSION,
        config: ConfigEcho::new(cfg),
        criteria: outcomes
            .into_iter()
            .map(|o| CriterionReport {
                id: o.id,
                name: o.name.to_string(),
                passed: o.passed,
                details: o.details,
            })
            .collect(),
        all_passed,
    };
    let text = report.to_json();
    let path = emit::out_path(&cfg.out_dir, emit::VERIFY_JSON)?;
    emit::write_text(&path, &text)?;
    println!("verify: report written to {}", path.display());
    if json {
        print!("{text}");
    }
    Ok(if all_passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_plotdata(cfg: &RunConfig) -> Result<()> {
    let eps = cfg.eps_list[0];
    let eng = Engine::with_resolution(cfg.curve_n, cfg.layer_half_width, cfg.layer_n);
    let mode = cfg.tilt.mode();
    let field = GlobalField::new(&eng, eps, mode);
    let tilt = eng.tilt(eps, mode);
    let chart = FermiChart::new(&eng.curve, eps);
    let tbar = eng.period;
    let x_period = field.x_period;

    // Curve polyline spanning exactly one horizontal period.
    let nc = 512;
    let mut csg = Vec::with_capacity(nc + 1);
    let mut cx1 = Vec::with_capacity(nc + 1);
    let mut cx2 = Vec::with_capacity(nc + 1);
    for j in 0..=nc {
        let sg = tbar * j as f64 / nc as f64;
        let (x1, x2) = chart.forward(sg, 0.0);
        csg.push(sg);
        cx1.push(x1);
        cx2.push(x2);
    }
    let span = cx1[nc] - cx1[0];
    ensure!(
        (span - x_period).abs() < 1e-9 * x_period,
        "curve polyline spans {span:.6}, expected one horizontal period {x_period:.6}"
    );
    let cpath = emit::out_path(&cfg.out_dir, emit::CURVE_FIGURE_CSV)?;
    emit::write_columns(
        &cpath,
        &[
            format!("rescaled curve over one horizontal period, eps = {eps:.10}"),
            format!("horizontal period {x_period:.10}"),
        ],
        &[("sigma", &csg), ("x1", &cx1), ("x2", &cx2)],
    )?;

    // Heat-map grid of the globalized field over the same period. The
    // vertical window covers the curve plus the full cutoff collar.
    let margin = field.cutoff_outer_edge() + 2.0;
    let ylo = cx2.iter().cloned().fold(f64::INFINITY, f64::min) - margin;
    let yhi = cx2.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + margin;
    let nx = 192;
    let ny = 192;
    let mut gx1 = Vec::with_capacity(nx * ny);
    let mut gx2 = Vec::with_capacity(nx * ny);
    let mut gv = Vec::with_capacity(nx * ny);
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for i in 0..nx {
        let x1 = cx1[0] + x_period * i as f64 / (nx - 1) as f64;
        for j in 0..ny {
            let x2 = ylo + (yhi - ylo) * j as f64 / (ny - 1) as f64;
            let v = field.eval(x1, x2);
            vmin = vmin.min(v);
            vmax = vmax.max(v);
            gx1.push(x1);
            gx2.push(x2);
            gv.push(v);
        }
    }
    ensure!(
        vmin >= -1.1 && vmax <= 1.1,
        "field values [{vmin:.4}, {vmax:.4}] leave the overshoot band [-1.1, 1.1]"
    );
    let gpath = emit::out_path(&cfg.out_dir, emit::FIELD_GRID_CSV)?;
    emit::write_columns(
        &gpath,
        &[
            format!("globalized field on a {nx} x {ny} grid, eps = {eps:.10}"),
            format!("value range [{vmin:.6}, {vmax:.6}] (inside the overshoot band [-1.1, 1.1])"),
        ],
        &[("x1", &gx1), ("x2", &gx2), ("v", &gv)],
    )?;

    // Zero-level polyline: along each normal line, bisect the field in the
    // chart; record the Cartesian point and the normal distance to the curve.
    let nz = 256;
    let mut zs = Vec::with_capacity(nz + 1);
    let mut zx1 = Vec::with_capacity(nz + 1);
    let mut zx2 = Vec::with_capacity(nz + 1);
    let mut zdist = Vec::with_capacity(nz + 1);
    let mut sup_z0 = 0.0f64;
    for j in 0..=nz {
        let sg = tbar * j as f64 / nz as f64;
        let phi = tilt.phi_derivs(sg)[0];
        let (mut lo, mut hi) = (phi - 0.5, phi + 0.5);
        for _ in 0..52 {
            let mid = 0.5 * (lo + hi);
            let vm = eng.vtilde_val(sg, &[mid], eps, &tilt, Variant::Full)[0];
            if vm < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let z0 = 0.5 * (lo + hi);
        sup_z0 = sup_z0.max(z0.abs());
        let (x1, x2) = chart.forward(sg, z0);
        zs.push(sg);
        zx1.push(x1);
        zx2.push(x2);
        zdist.push(z0.abs());
    }
    ensure!(
        sup_z0 < 1.5 * eps,
        "zero set strays {sup_z0:.4e} from the curve, beyond 1.5 eps"
    );
    let zpath = emit::out_path(&cfg.out_dir, emit::ZERO_POLYLINE_CSV)?;
    emit::write_columns(
        &zpath,
        &[
            format!("zero-level polyline of the field, eps = {eps:.10}"),
            format!(
                "sup normal distance to the curve {sup_z0:.6e} = {:.4} eps",
                sup_z0 / eps
            ),
        ],
        &[("sigma", &zs), ("x1", &zx1), ("x2", &zx2), ("normal_dist", &zdist)],
    )?;

    let spath = emit::out_path(&cfg.out_dir, emit::PLOT_SCRIPT)?;
    emit::write_text(&spath, &emit::plot_script())?;
    println!(
        "plotdata: eps={eps:.6}, field range [{vmin:.4}, {vmax:.4}], zero set within {:.4} eps",
        sup_z0 / eps
    );
    println!(
        "plotdata: wrote {}, {}, {}, {}",
        cpath.display(),
        gpath.display(),
        zpath.display(),
        spath.display()
    );
    Ok(())
}
