use std::path::{Path, PathBuf};

use rowball_core::charfun::{charfun_coeffs_excluding, charfun_degree, coincidence_search};
use rowball_core::contraction::poisson_kernel;
use rowball_core::invariants::{
    classify, decompose, gamma, gamma_structural, gamma_with_report, realize, wold,
};
use rowball_core::mobius::{aut_apply, compose, d_e, invert};
use rowball_core::numerics::{identity, max_abs};
use rowball_core::projrep::{adjoint_intertwining_residual, cocycle, intertwining_residual, u_operator};
use rowball_core::{AutElement, CharFun, CoincidenceOutcome, ModelTuple, RowTuple, Subspace};
use serde_json::{json, Value};

use crate::io::{self, AutFile, ModelFile, TupleFile};
use crate::{AutCommand, CliError, Command, Ctx, ModelCommand, ProjrepCommand};

type Outcome = Result<(Value, u8), CliError>;

pub fn run(cmd: &Command, ctx: &Ctx) -> Outcome {
    match cmd {
        Command::Check { files } => per_file(ctx, files, check),
        Command::Gamma { files } => per_file(ctx, files, |t, e| Ok(json!({ "gamma": gamma(t, e)? }))),
        Command::Classify { files } => per_file(ctx, files, |t, e| {
            let g = gamma(t, e)?;
            let labels: Vec<String> = classify(&g).iter().map(|l| l.to_string()).collect();
            Ok(json!({ "gamma": g, "labels": labels }))
        }),
        Command::Decompose { file } => single(ctx, file, |t, e| {
            let dec = decompose(t, e)?;
            let residual = dec
                .reassemble()
                .iter()
                .zip(t.mats())
                .map(|(a, b)| max_abs(&(a - b)))
                .fold(0.0, f64::max);
            Ok(json!({
                "degree": dec.degree,
                "dims": { "h_v": dec.h_v.dim(), "h_nil": dec.h_nil.dim(), "h_c": dec.h_c.dim() },
                "reassembly_residual": residual,
            }))
        }),
        Command::Charfun { file, degree, coeffs } => single(ctx, file, |t, e| match (degree, coeffs) {
            (_, Some(len)) => Ok(coefficients(&charfun_coeffs_excluding(t, *len, e)?)),
            _ => {
                let rep = charfun_degree(t, e)?;
                let cf = charfun_coeffs_excluding(t, rep.stabilized_at + 1, e)?;
                let scan = cf.scan_degree(t.tol().residual_abs);
                Ok(json!({
                    "degree": rep.degree,
                    "scan_degree": scan,
                    "agree": scan == rep.degree,
                    "chain": rep.chain,
                    "stabilized_at": rep.stabilized_at,
                }))
            }
        }),
        Command::Poisson { file, depth } => single(ctx, file, |t, _| {
            let k = poisson_kernel(t, *depth)?;
            let lhs = k.matrix.adjoint() * &k.matrix + t.phi_power_identity(depth + 1);
            Ok(json!({
                "depth": depth,
                "rows": k.matrix.nrows(),
                "defect_rank": k.defect_space.dim(),
                "telescoping_residual": max_abs(&(lhs - identity(t.dim()))),
            }))
        }),
        Command::Wold { file } => single(ctx, file, |t, e| {
            let w = wold(t, &Subspace::full(t.dim()), e)?;
            Ok(json!({
                "multiplicity": w.multiplicity,
                "pure_dim": w.pure_part.dim(),
                "unitary_dim": w.unitary_part.dim(),
            }))
        }),
        Command::Model(m) => model(ctx, m),
        Command::Aut(a) => aut(ctx, a),
        Command::Projrep(p) => projrep(ctx, p),
        Command::Coincide { a, b, cutoff, iters } => coincide(ctx, a, b, *cutoff, *iters),
    }
}

fn load_tuple(ctx: &Ctx, path: &Path) -> Result<(RowTuple, Option<Subspace>), CliError> {
    let input = ctx.read(path)?;
    io::parse::<TupleFile>(&input)?.to_tuple(ctx.residual_override)
}

fn load_aut(ctx: &Ctx, path: &Path) -> Result<AutElement, CliError> {
    let input = ctx.read(path)?;
    io::parse::<AutFile>(&input)?.to_aut()
}

fn single<F>(ctx: &Ctx, path: &Path, f: F) -> Outcome
where
    F: Fn(&RowTuple, Option<&Subspace>) -> Result<Value, CliError>,
{
    let (t, e) = load_tuple(ctx, path)?;
    Ok((f(&t, e.as_ref())?, 0))
}

/// Runs `f` on every file; each entry carries its own error, and the exit
/// code is the worst one seen.
fn per_file<F>(ctx: &Ctx, files: &[PathBuf], f: F) -> Outcome
where
    F: Fn(&RowTuple, Option<&Subspace>) -> Result<Value, CliError> + Sync,
{
    if files.is_empty() {
        return Err(CliError::Parse("no input files given".into()));
    }
    let loaded: Vec<Result<(RowTuple, Option<Subspace>), CliError>> =
        files.iter().map(|p| load_tuple(ctx, p)).collect();
    let work = |item: &Result<(RowTuple, Option<Subspace>), CliError>| match item {
        Ok((t, e)) => f(t, e.as_ref()),
        Err(CliError::Parse(m)) => Err(CliError::Parse(m.clone())),
        Err(CliError::Core(e)) => Err(CliError::Core(e.clone())),
    };
    let results: Vec<Result<Value, CliError>> = if ctx.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = loaded.iter().map(|item| s.spawn(|| work(item))).collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        })
    } else {
        loaded.iter().map(work).collect()
    };
    let mut code = 0;
    let entries: Vec<Value> = files
        .iter()
        .zip(results)
        .map(|(path, r)| {
            let path = path.display().to_string();
            match r {
                Ok(Value::Object(mut map)) => {
                    map.insert("path".into(), json!(path));
                    Value::Object(map)
                }
                Ok(other) => json!({ "path": path, "value": other }),
                Err(e) => {
                    code = code.max(e.exit_code());
                    json!({ "path": path, "error": { "kind": e.kind(), "message": e.to_string() } })
                }
            }
        })
        .collect();
    Ok((Value::Array(entries), code))
}

fn check(t: &RowTuple, _: Option<&Subspace>) -> Result<Value, CliError> {
    // the tuple was certified while loading
    Ok(json!({ "row_contraction": true, "row_norm": t.row_norm(), "n": t.n(), "dim": t.dim() }))
}

fn coefficients(cf: &CharFun) -> Value {
    // the empty word prints as g0
    let terms: Vec<Value> =
        cf.terms().map(|(w, m)| json!({ "word": w.to_string(), "matrix": io::from_matrix(m) })).collect();
    let (rows, cols) = cf.shape();
    json!({ "cutoff": cf.cutoff, "shape": [rows, cols], "coefficients": terms })
}

fn model(ctx: &Ctx, cmd: &ModelCommand) -> Outcome {
    let (path, realize_only) = match cmd {
        ModelCommand::Realize { file } => (file, true),
        ModelCommand::Gamma { file } => (file, false),
    };
    let input = ctx.read(path)?;
    let desc: ModelFile = io::parse(&input)?;
    let mut m = ModelTuple::new(desc.n, desc.iso_multiplicity, desc.fock_depth);
    if let Some(nil) = &desc.nil {
        m = m.with_nil(nil.to_tuple(ctx.residual_override)?.0);
    }
    if let Some(co) = &desc.coiso {
        m = m.with_coiso(co.to_tuple(ctx.residual_override)?.0);
    }
    let real = realize(&m)?;
    if realize_only {
        let file = TupleFile::from_tuple(&real.tuple, Some(&real.exclude));
        return Ok((json!({ "coupling_scale": real.coupling_scale, "tuple": file }), 0));
    }
    let predicted = gamma_structural(&m)?;
    let (computed, rep) = gamma_with_report(&real.tuple, Some(&real.exclude))?;
    Ok((
        json!({ "structural": predicted, "computed": computed, "agree": predicted == computed, "chain": rep.chain }),
        0,
    ))
}

fn aut(ctx: &Ctx, cmd: &AutCommand) -> Outcome {
    let value = match cmd {
        AutCommand::Compose { a, b } => {
            let (a, b) = (load_aut(ctx, a)?, load_aut(ctx, b)?);
            json!({ "composition": AutFile::from_aut(&compose(&a, &b)?) })
        }
        AutCommand::Invert { a } => json!({ "inverse": AutFile::from_aut(&invert(&load_aut(ctx, a)?)?) }),
        AutCommand::Apply { a, tuple } => {
            let phi = load_aut(ctx, a)?;
            let (t, _) = load_tuple(ctx, tuple)?;
            let image = RowTuple::new(aut_apply(&phi, t.mats())?, *t.tol())?;
            json!({ "image": TupleFile::from_tuple(&image, None), "row_norm": image.row_norm() })
        }
        AutCommand::Metric { a, b, depth } => {
            let (a, b) = (load_aut(ctx, a)?, load_aut(ctx, b)?);
            let iv = d_e(&a, &b, *depth)?;
            let euclid: f64 = a
                .lambda()
                .iter()
                .zip(b.lambda())
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            json!({ "depth": depth, "d_e": { "lower": iv.lower, "upper": iv.upper }, "euclidean_term": euclid })
        }
    };
    Ok((value, 0))
}

fn projrep(ctx: &Ctx, cmd: &ProjrepCommand) -> Outcome {
    let value = match cmd {
        ProjrepCommand::Verify { a, depth, buffer } => {
            let el = u_operator(&load_aut(ctx, a)?, *depth, *buffer)?;
            json!({
                "depth": depth,
                "buffer": buffer,
                "vacuum_defect": el.vacuum_defect,
                "secondary_singular_value": el.secondary,
                "interior_isometry_defect": el.isometry_defect(),
                "interior_intertwining_residual": intertwining_residual(&el),
                "adjoint_intertwining_residual": adjoint_intertwining_residual(&el),
                "tail_budget": el.tail_budget(),
            })
        }
        ProjrepCommand::Cocycle { a, b, depth, buffer } => {
            let (a, b) = (load_aut(ctx, a)?, load_aut(ctx, b)?);
            let co = cocycle(&a, &b, *depth, *buffer)?;
            json!({ "c": [co.c.re, co.c.im], "modulus": co.c.norm(), "residual": co.residual })
        }
    };
    Ok((value, 0))
}

/// Distinct Γ proves inequivalence; otherwise the search either exhibits a
/// witness or stays inconclusive.
fn coincide(ctx: &Ctx, a: &Path, b: &Path, cutoff: usize, iters: usize) -> Outcome {
    let (ta, ea) = load_tuple(ctx, a)?;
    let (tb, eb) = load_tuple(ctx, b)?;
    let (ga, gb) = (gamma(&ta, ea.as_ref())?, gamma(&tb, eb.as_ref())?);
    if ga != gb {
        return Ok((json!({ "gamma": [ga, gb], "verdict": "distinct" }), 0));
    }
    let ca = charfun_coeffs_excluding(&ta, cutoff, ea.as_ref())?;
    let cb = charfun_coeffs_excluding(&tb, cutoff, eb.as_ref())?;
    let value = match coincidence_search(&ca, &cb, iters, ctx.seed, &ctx.tolerance()) {
        CoincidenceOutcome::Witness { tau1, tau2, residual } => json!({
            "gamma": [ga, gb],
            "verdict": "coincide",
            "residual": residual,
            "tau1": io::from_matrix(&tau1),
            "tau2": io::from_matrix(&tau2),
        }),
        CoincidenceOutcome::NoWitnessFound { best_residual } => json!({
            "gamma": [ga, gb],
            "verdict": "inconclusive",
            "best_residual": best_residual,
        }),
    };
    Ok((value, 0))
}
