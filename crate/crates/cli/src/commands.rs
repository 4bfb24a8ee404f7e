use std::fmt::Write as _;
use std::fs;
use std::time::Instant;

use dsm_core::analysis::{
    centrality_correlation, distance_decay_profile, energy_trajectory, gaussian_features,
    materialize, rank_preservation_sweep, verify_sweep, OperatorKind, VerifyOptions,
};
use dsm_core::dense::format_f64;
use dsm_core::spectral::{
    empirical_spectral_gap, exact_spectral_gap, spectrum_report, GAP_CURVE_GRID,
};
use dsm_core::{
    exact_dsm, generate_graph, propagate, propagate_with, residual_mass, DenseMatrix, Execution,
    Graph, OracleCap,
};
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{check_dir, check_input, check_output, write_atomic, write_json, Meta};
use crate::CliError;

/// Everything a command needs besides its own flags.
pub struct Context {
    pub cap: OracleCap,
}

fn domain(e: dsm_core::Error) -> CliError {
    CliError::Domain(e.to_string())
}

struct Loaded {
    graph: Graph,
    label: String,
    descriptor: Value,
}

fn load_graph(src: &GraphSource) -> Result<Loaded, CliError> {
    if let Some(path) = &src.graph {
        check_input(path, "--graph")?;
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Domain(format!("reading '{}': {e}", path.display())))?;
        let graph = Graph::parse_edge_list(&text).map_err(domain)?;
        let label = path.display().to_string();
        let descriptor = json!({
            "path": label,
            "n": graph.node_count(),
            "edges": graph.edge_count(),
        });
        return Ok(Loaded { graph, label, descriptor });
    }
    let model = src.model.to_model(None).map_err(|m| {
        CliError::Usage(format!("{m} (or pass --graph FILE)"))
    })?;
    let graph = generate_graph(&model, src.seed).map_err(domain)?;
    let mut descriptor = serde_json::to_value(&model).expect("model serializes");
    descriptor["edges"] = graph.edge_count().into();
    if descriptor.get("n").is_none() {
        descriptor["n"] = graph.node_count().into();
    }
    Ok(Loaded {
        graph,
        label: model.label(),
        descriptor,
    })
}

impl Context {
    fn meta(&self, command: &'static str, seed: u64, graph: Value) -> Meta {
        Meta {
            command,
            seed,
            oracle_cap: self.cap.0,
            graph,
        }
    }
}

pub fn generate(_ctx: &Context, a: &GenerateArgs) -> Result<(), CliError> {
    check_output(&a.out, "--out")?;
    let model = a.model.to_model(None).map_err(CliError::Usage)?;
    let g = generate_graph(&model, a.seed).map_err(domain)?;
    let comments = vec![
        format!("model {}", model.label()),
        format!("seed {}", a.seed),
        format!("edges {}", g.edge_count()),
    ];
    write_atomic(&a.out, g.to_edge_list(&comments).as_bytes())
}

pub fn diffuse(_ctx: &Context, a: &DiffuseArgs) -> Result<(), CliError> {
    check_output(&a.out, "--out")?;
    if let Some(p) = &a.mass_out {
        check_output(p, "--mass-out")?;
    }
    if let Some(p) = &a.features {
        check_input(p, "--features")?;
    }
    let loaded = load_graph(&a.source)?;
    let g = &loaded.graph;
    let z0 = match &a.features {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Domain(format!("reading '{}': {e}", path.display())))?;
            DenseMatrix::from_csv(&text).map_err(domain)?
        }
        None => gaussian_features(g.node_count(), a.features_dim, a.source.seed),
    };
    let exec = if a.parallel {
        Execution::Parallel
    } else {
        Execution::Sequential
    };
    let z = propagate_with(g, a.k, &z0, a.mode.into(), exec).map_err(domain)?;
    write_atomic(&a.out, z.to_csv().as_bytes())?;
    if let Some(p) = &a.mass_out {
        write_atomic(p, residual_mass(g, a.k).to_csv().as_bytes())?;
    }
    Ok(())
}

pub fn verify(ctx: &Context, a: &VerifyArgs) -> Result<(), CliError> {
    check_output(&a.out, "--out")?;
    let loaded = load_graph(&a.source)?;
    let opts = VerifyOptions {
        timing: a.timing,
        timing_features: a.features_dim,
        seed: a.source.seed,
    };
    let reports =
        verify_sweep(&loaded.graph, &loaded.label, &a.k_list, ctx.cap, opts).map_err(domain)?;
    let all_bounds = reports.iter().all(|r| r.bound_holds());
    let all_dominant = reports.iter().all(|r| r.dominance_ok);
    let meta = ctx.meta("verify", a.source.seed, loaded.descriptor);
    write_json(
        &a.out,
        &meta.wrap(json!({
            "bound_holds": all_bounds,
            "dominance_ok": all_dominant,
            "reports": reports,
        })),
    )
}

pub fn spectrum(ctx: &Context, a: &SpectrumArgs) -> Result<(), CliError> {
    check_output(&a.out, "--out")?;
    let loaded = load_graph(&a.source)?;
    let report = spectrum_report(&loaded.graph, a.k, ctx.cap).map_err(domain)?;
    let meta = ctx.meta("spectrum", a.source.seed, loaded.descriptor);
    write_json(&a.out, &meta.wrap(serde_json::to_value(&report).expect("serializes")))
}

pub fn gap_curve(ctx: &Context, a: &GapCurveArgs) -> Result<(), CliError> {
    check_output(&a.out, "--out")?;
    let loaded = load_graph(&a.source)?;
    let g = &loaded.graph;
    let ks = a.k_list.clone().unwrap_or_else(|| GAP_CURVE_GRID.to_vec());
    let exact = exact_spectral_gap(g, ctx.cap).map_err(domain)?;
    let mut curve = Vec::with_capacity(ks.len());
    for &k in &ks {
        curve.push(empirical_spectral_gap(g, k).map_err(domain)?);
    }
    let monotone = curve.windows(2).all(|w| w[1].value >= w[0].value - 1e-9);
    let max_excess = curve
        .iter()
        .map(|c| c.value - exact)
        .fold(f64::NEG_INFINITY, f64::max);
    let meta = ctx.meta("gap-curve", a.source.seed, loaded.descriptor);
    write_json(
        &a.out,
        &meta.wrap(json!({
            "gamma_exact": exact,
            "monotone": monotone,
            "max_excess_over_exact": max_excess,
            "curve": curve,
        })),
    )
}

fn kind_name(kind: OperatorKind) -> &'static str {
    match kind {
        OperatorKind::Exact => "exact",
        OperatorKind::Truncated => "truncated",
        OperatorKind::Compensated => "compensated",
        OperatorKind::Gcn => "gcn",
    }
}

pub fn energy(ctx: &Context, a: &EnergyArgs) -> Result<(), CliError> {
    check_output(&a.out, "--out")?;
    if let Some(dir) = &a.csv_dir {
        check_dir(dir, "--csv-dir")?;
    }
    if a.steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    if a.plateau_step > a.steps {
        return Err(CliError::Usage("--plateau-step must not exceed --steps".into()));
    }
    let loaded = load_graph(&a.source)?;
    let g = &loaded.graph;
    let kinds: Vec<OperatorKind> = if a.kind.is_empty() {
        vec![
            OperatorKind::Exact,
            OperatorKind::Truncated,
            OperatorKind::Compensated,
            OperatorKind::Gcn,
        ]
    } else {
        a.kind.iter().map(|&k| k.into()).collect()
    };
    let feature_seed = a.feature_seed.unwrap_or(a.source.seed);
    let x0 = gaussian_features(g.node_count(), a.features_dim, feature_seed);

    let mut traces = Vec::with_capacity(kinds.len());
    for kind in kinds {
        let tr = energy_trajectory(g, kind, a.k, &x0, a.steps, ctx.cap).map_err(domain)?;
        if let Some(dir) = &a.csv_dir {
            let path = dir.join(format!("energy_{}.csv", kind_name(kind)));
            write_atomic(&path, tr.to_csv().as_bytes())?;
        }
        traces.push(json!({
            "kind": tr.kind,
            "initial": tr.initial(),
            "plateau": tr.energies[a.plateau_step],
            "final": tr.energies[a.steps],
            "energies": tr.energies,
        }));
    }
    let meta = ctx.meta("energy", a.source.seed, loaded.descriptor);
    write_json(
        &a.out,
        &meta.wrap(json!({
            "K": a.k,
            "steps": a.steps,
            "plateau_step": a.plateau_step,
            "features_dim": a.features_dim,
            "feature_seed": feature_seed,
            "trajectories": traces,
        })),
    )
}

pub fn decay(ctx: &Context, a: &DecayArgs) -> Result<(), CliError> {
    check_output(&a.out, "--out")?;
    if let Some(p) = &a.csv {
        check_output(p, "--csv")?;
    }
    if a.kind == KindArg::Gcn {
        return Err(CliError::Usage("--kind gcn has no decay profile".into()));
    }
    let loaded = load_graph(&a.source)?;
    let profile =
        distance_decay_profile(&loaded.graph, a.kind.into(), a.k, ctx.cap).map_err(domain)?;
    if let Some(p) = &a.csv {
        write_atomic(p, profile.to_csv().as_bytes())?;
    }
    let meta = ctx.meta("decay", a.source.seed, loaded.descriptor);
    write_json(&a.out, &meta.wrap(serde_json::to_value(&profile).expect("serializes")))
}

pub fn rank(ctx: &Context, a: &RankArgs) -> Result<(), CliError> {
    check_output(&a.out, "--out")?;
    let loaded = load_graph(&a.source)?;
    let reports = rank_preservation_sweep(&loaded.graph, &a.k_list, ctx.cap).map_err(domain)?;
    let meta = ctx.meta("rank", a.source.seed, loaded.descriptor);
    write_json(
        &a.out,
        &meta.wrap(json!({ "target": "exact_diag", "reports": reports })),
    )
}

pub fn centrality(ctx: &Context, a: &CentralityArgs) -> Result<(), CliError> {
    check_output(&a.out, "--out")?;
    if a.kind == KindArg::Gcn {
        return Err(CliError::Usage("--kind must be exact, truncated or compensated".into()));
    }
    let loaded = load_graph(&a.source)?;
    let report =
        centrality_correlation(&loaded.graph, a.k, a.kind.into(), ctx.cap).map_err(domain)?;
    let meta = ctx.meta("centrality", a.source.seed, loaded.descriptor);
    let mut body = serde_json::to_value(report).expect("serializes");
    body["target"] = "betweenness".into();
    write_json(&a.out, &meta.wrap(body))
}

pub fn encode(ctx: &Context, a: &EncodeArgs) -> Result<(), CliError> {
    check_dir(&a.out_dir, "--out-dir")?;
    if a.kind == KindArg::Gcn {
        return Err(CliError::Usage("--kind must be exact, truncated or compensated".into()));
    }
    let loaded = load_graph(&a.source)?;
    let b = materialize(&loaded.graph, a.kind.into(), a.k, ctx.cap).map_err(domain)?;
    let mut centrality = String::from("node,value\n");
    for (i, v) in b.diagonal().iter().enumerate() {
        let _ = writeln!(centrality, "{i},{}", format_f64(*v));
    }
    let mut spatial = String::from("i,j,value\n");
    for i in 0..b.rows() {
        for (j, v) in b.row(i).iter().enumerate() {
            if i != j && *v != 0.0 {
                let _ = writeln!(spatial, "{i},{j},{}", format_f64(*v));
            }
        }
    }
    write_atomic(&a.out_dir.join("centrality.csv"), centrality.as_bytes())?;
    write_atomic(&a.out_dir.join("spatial.csv"), spatial.as_bytes())
}

pub fn bench(ctx: &Context, a: &BenchArgs) -> Result<(), CliError> {
    check_output(&a.out, "--out")?;
    if a.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let mut csv = String::from("n,E,K,t_exact_seconds,t_stream_seconds\n");
    for &n in &a.sizes {
        let model = a.model.to_model(Some(n)).map_err(CliError::Usage)?;
        let g = generate_graph(&model, a.seed).map_err(domain)?;
        let t_exact = if ctx.cap.check(n).is_ok() {
            let t = Instant::now();
            exact_dsm(&g, ctx.cap).map_err(domain)?;
            format!("{:.6e}", t.elapsed().as_secs_f64())
        } else {
            String::new()
        };
        let z0 = gaussian_features(n, a.features_dim, a.seed);
        for &k in &a.k_list {
            let mut best = f64::INFINITY;
            for _ in 0..a.reps {
                let t = Instant::now();
                propagate(&g, k, &z0, dsm_core::Mode::Compensated).map_err(domain)?;
                best = best.min(t.elapsed().as_secs_f64());
            }
            let _ = writeln!(csv, "{n},{},{k},{t_exact},{best:.6e}", g.edge_count());
        }
    }
    write_atomic(&a.out, csv.as_bytes())
}
