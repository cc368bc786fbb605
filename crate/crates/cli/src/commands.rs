//! Command dispatch: each command runs one library pipeline on a model file
//! and collects every check into a [`Report`].

use indextwo::basic::{
    corner_is_a, crossed_model, cut_expectation_f, fixed_points_of_flip, models_isomorphic, q_model, verify_basic,
    BasicConstruction, ModelKind,
};
use indextwo::bimodule::{build_bminus, build_xalpha, build_xb, canonical_xb_to_bminus, v_map, verify_bimodule};
use indextwo::correspondence::{functor_f, roundtrip_fg, roundtrip_gf};
use indextwo::dynamics::{
    classify, commutant_anti_isomorphism_check, restricted_crossed_model, simplicity_conditions,
    validate_two_z_inner, TwoZInnerSystem,
};
use indextwo::inclusion::{pair_invariants, validate_expectation, watatani_index, InclusionPair};
use indextwo::{Check, Tol};

use crate::model::ModelFile;
use crate::report::Report;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Validate,
    Index,
    Basic,
    Bimodule,
    Roundtrip,
    Classify,
    Simplicity,
    Fixture,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Index => "index",
            Command::Basic => "basic",
            Command::Bimodule => "bimodule",
            Command::Roundtrip => "roundtrip",
            Command::Classify => "classify",
            Command::Simplicity => "simplicity",
            Command::Fixture => "fixture",
            Command::Report => "report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Model {
    Crossed,
    Qmat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Which {
    #[value(name = "XB")]
    Xb,
    #[value(name = "Bminus")]
    Bminus,
    #[value(name = "Xalpha")]
    Xalpha,
}

#[derive(Debug, Clone, Copy)]
pub struct Flags {
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub model: Model,
    pub which: Which,
}

impl Default for Flags {
    fn default() -> Self {
        Flags {
            tol: None,
            seed: None,
            model: Model::Crossed,
            which: Which::Xb,
        }
    }
}

/// The model's tolerance block with command-line overrides applied.
pub fn effective_tol(m: &ModelFile, flags: &Flags) -> Tol {
    let mut t = m.tolerance;
    if let Some(eps) = flags.tol {
        t = t.with_eps(eps);
    }
    if let Some(seed) = flags.seed {
        t = t.with_seed(seed);
    }
    t
}

pub fn run_command(cmd: Command, model: &ModelFile, flags: &Flags) -> Report {
    let tol = effective_tol(model, flags);
    let mut r = Report::new(cmd.name(), &model.name, tol.rng_seed);
    let res = match cmd {
        Command::Validate => validate(model, &tol, &mut r, ""),
        Command::Index => index(model, &tol, &mut r, ""),
        Command::Basic => basic(model, flags, &tol, &mut r, ""),
        Command::Bimodule => bimodule(model, flags.which, &tol, &mut r, ""),
        Command::Roundtrip => roundtrip(model, &tol, &mut r, ""),
        Command::Classify => classify_cmd(model, &tol, &mut r, ""),
        Command::Simplicity => simplicity(model, &tol, &mut r, ""),
        Command::Fixture => {
            r.put("model", model);
            validate(model, &tol, &mut r, "")
        }
        Command::Report => full_report(model, flags, &tol, &mut r),
    };
    if let Err(e) = res {
        r.error(cmd.name(), e);
    }
    r
}

fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}/{name}")
    }
}

fn stage(r: &mut Report, prefix: &str, name: &str, f: impl FnOnce(&mut Report, &str) -> Result<(), CliError>) {
    let p = join(prefix, name);
    if let Err(e) = f(r, &p) {
        r.error(&p, e);
    }
}

fn full_report(m: &ModelFile, flags: &Flags, tol: &Tol, r: &mut Report) -> Result<(), CliError> {
    stage(r, "", "validate", |r, p| validate(m, tol, r, p));
    stage(r, "", "index", |r, p| index(m, tol, r, p));
    if m.pair(tol).is_err() {
        return Ok(());
    }
    stage(r, "", "basic", |r, p| basic(m, flags, tol, r, p));
    stage(r, "", "bimodule_xb", |r, p| bimodule(m, Which::Xb, tol, r, p));
    stage(r, "", "bimodule_bminus", |r, p| bimodule(m, Which::Bminus, tol, r, p));
    if m.dynamics.is_some() {
        stage(r, "", "bimodule_xalpha", |r, p| bimodule(m, Which::Xalpha, tol, r, p));
    }
    stage(r, "", "roundtrip", |r, p| roundtrip(m, tol, r, p));
    stage(r, "", "classify", |r, p| classify_cmd(m, tol, r, p));
    if m.dynamics.is_some() {
        stage(r, "", "simplicity", |r, p| simplicity(m, tol, r, p));
    }
    Ok(())
}

fn validate(m: &ModelFile, tol: &Tol, r: &mut Report, prefix: &str) -> Result<(), CliError> {
    if m.expectation.is_some() {
        let (b, a, e) = m.triple(tol)?;
        r.put(&join(prefix, "dim_a"), a.dim());
        r.put(&join(prefix, "dim_b"), b.dim());
        r.checks(&join(prefix, "expectation"), &validate_expectation(&e, tol));
    }
    if let Some(sys) = m.system(tol) {
        r.checks(&join(prefix, "two_z_inner"), &validate_two_z_inner(&sys, tol));
        if m.expectation.is_none() {
            let model = restricted_crossed_model(&sys, tol)?;
            r.put(&join(prefix, "dim_a"), sys.a.dim());
            r.put(&join(prefix, "dim_b"), model.pair.b.dim());
            r.checks(&join(prefix, "phi"), &model.phi_report);
        }
    }
    let p = m.pair(tol)?;
    r.checks(&join(prefix, "pair"), &p.report);
    r.checks(&join(prefix, "invariants"), &pair_invariants(&p, tol));
    Ok(())
}

fn index(m: &ModelFile, tol: &Tol, r: &mut Report, prefix: &str) -> Result<(), CliError> {
    let e = if m.expectation.is_some() {
        m.triple(tol)?.2
    } else {
        m.pair(tol)?.e
    };
    let idx = watatani_index(&e, tol)?;
    let two = e.source.unit().scale_re(2.0);
    r.checks(prefix, &idx.report);
    r.push(&Check::new(
        join(prefix, "index_two"),
        "Index E = 2·1",
        idx.value.dist(&two),
        tol.bound(two.norm()),
    ));
    r.put(&join(prefix, "index"), &idx.value);
    r.put(&join(prefix, "quasi_basis_size"), idx.quasi_basis.pairs.len());
    Ok(())
}

fn basic_model(p: &InclusionPair, model: Model, tol: &Tol) -> Result<BasicConstruction, CliError> {
    Ok(match model {
        Model::Crossed => crossed_model(p, tol),
        Model::Qmat => q_model(p, tol)?,
    })
}

fn basic(m: &ModelFile, flags: &Flags, tol: &Tol, r: &mut Report, prefix: &str) -> Result<(), CliError> {
    let p = m.pair(tol)?;
    let c = basic_model(&p, flags.model, tol)?;
    r.put(
        &join(prefix, "model"),
        match c.kind {
            ModelKind::Crossed => "crossed",
            ModelKind::Qmat => "qmat",
        },
    );
    r.put(&join(prefix, "ambient_dim"), c.ambient_dim());
    r.put(&join(prefix, "dim"), c.algebra.dim());
    r.checks(&join(prefix, "structure"), &verify_basic(&c, &p, tol));
    let f = cut_expectation_f(&c, &p, tol);
    r.checks(&join(prefix, "cut_expectation"), &f.report);
    r.checks(&join(prefix, "corner"), &corner_is_a(&c, &p, tol));
    let (_, fix) = fixed_points_of_flip(&c, &p, tol);
    r.checks(&join(prefix, "flip_fixed"), &fix);
    let other = match flags.model {
        Model::Crossed => q_model(&p, tol)?,
        Model::Qmat => crossed_model(&p, tol),
    };
    let (_, iso) = models_isomorphic(&c, &other, tol)?;
    r.checks(&join(prefix, "models"), &iso);
    Ok(())
}

fn system_for(m: &ModelFile, tol: &Tol) -> Result<TwoZInnerSystem, CliError> {
    if let Some(s) = m.system(tol) {
        return Ok(s);
    }
    let p = m.pair(tol)?;
    classify(&p, tol)?
        .two_z_inner
        .ok_or_else(|| CliError::NoSystem(m.name.clone()))
}

fn bimodule(m: &ModelFile, which: Which, tol: &Tol, r: &mut Report, prefix: &str) -> Result<(), CliError> {
    let x = match which {
        Which::Xb | Which::Bminus => {
            let p = m.pair(tol)?;
            let c = crossed_model(&p, tol);
            let xb = build_xb(&c, &p, tol);
            let bm = build_bminus(&p, tol);
            let (_, iso) = canonical_xb_to_bminus(&c, &p, &xb, &bm, tol)?;
            r.checks(&join(prefix, "xb_to_bminus"), &iso);
            if which == Which::Xb {
                xb
            } else {
                bm
            }
        }
        Which::Xalpha => build_xalpha(&system_for(m, tol)?, tol)?,
    };
    r.put(&join(prefix, "dim"), x.dim());
    r.put(&join(prefix, "coefficient_dim"), x.module.a_dim());
    r.checks(&join(prefix, "axioms"), &verify_bimodule(&x, tol));
    let (_, v) = v_map(&x, tol);
    r.checks(&join(prefix, "v_map"), &v);
    Ok(())
}

fn roundtrip(m: &ModelFile, tol: &Tol, r: &mut Report, prefix: &str) -> Result<(), CliError> {
    let p = m.pair(tol)?;
    stage(r, prefix, "gf", |r, q| {
        let rt = roundtrip_gf(&p, tol)?;
        r.checks(q, &rt.report);
        Ok(())
    });
    stage(r, prefix, "fg_xb", |r, q| {
        let rt = roundtrip_fg(&functor_f(&p, tol)?, tol)?;
        r.checks(q, &rt.report);
        Ok(())
    });
    stage(r, prefix, "fg_bminus", |r, q| {
        let rt = roundtrip_fg(&build_bminus(&p, tol), tol)?;
        r.checks(q, &rt.report);
        Ok(())
    });
    if let Some(sys) = m.system(tol) {
        stage(r, prefix, "fg_xalpha", |r, q| {
            let rt = roundtrip_fg(&build_xalpha(&sys, tol)?, tol)?;
            r.checks(q, &rt.report);
            Ok(())
        });
    }
    Ok(())
}

fn classify_cmd(m: &ModelFile, tol: &Tol, r: &mut Report, prefix: &str) -> Result<(), CliError> {
    let p = m.pair(tol)?;
    let c = classify(&p, tol)?;
    r.checks(prefix, &c.report);
    r.put(&join(prefix, "projections_equivalent"), c.projections_equivalent);
    r.put(&join(prefix, "unitary_quasi_basis"), c.unitary_quasi_basis.is_some());
    r.put(&join(prefix, "two_z_inner"), c.two_z_inner.is_some());
    r.put(&join(prefix, "consistent"), c.consistent);
    r.put(&join(prefix, "classification"), &c);
    Ok(())
}

fn simplicity(m: &ModelFile, tol: &Tol, r: &mut Report, prefix: &str) -> Result<(), CliError> {
    let sys = system_for(m, tol)?;
    let s = simplicity_conditions(&sys, tol)?;
    r.checks(&join(prefix, "conditions"), &s.report);
    r.put(&join(prefix, "simplicity"), &s);
    let p = m.pair(tol)?;
    let cm = commutant_anti_isomorphism_check(&p, tol)?;
    r.checks(&join(prefix, "commutants"), &cm.report);
    r.put(&join(prefix, "commutant_dims"), [cm.relative_dim, cm.basic_dim]);
    Ok(())
}
