//! Model files: a JSON description of an inclusion `A ⊂ B ⊆ M_n` with its
//! expectation, or of a 2Z-inner system. Complex entries are `[re, im]`.

use serde::{Deserialize, Serialize};

use indextwo::cstar::{generate_algebra, CStarAlg};
use indextwo::dynamics::{restricted_crossed_model, TwoZInnerSystem};
use indextwo::fixtures;
use indextwo::inclusion::{
    expectation_from_block_compression, expectation_from_involutive_automorphism, make_inclusion_pair, AutSpec,
    CondExp, InclusionPair,
};
use indextwo::matkernel::{CMat, I, ONE};
use indextwo::subspace::LinMap;
use indextwo::Tol;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    /// The algebra is the unital *-algebra these generate inside `M_n`.
    pub generators: Vec<CMat>,
}

/// A linear map given on a spanning family of its domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub domain: Vec<CMat>,
    pub images: Vec<CMat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ExpectationSpec {
    /// `E = (id + beta) / 2` for an order-two automorphism `beta`, either
    /// `Ad(unitary)` or an explicit map.
    Involution {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        unitary: Option<CMat>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        map: Option<MapSpec>,
    },
    /// `E(b) = Σ p_i b p_i`.
    Blocks { projections: Vec<CMat> },
    /// `E` given directly as a linear map on `B`.
    Matrix { map: MapSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub implementer: Option<CMat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSpec {
    pub alpha: AlphaSpec,
    pub z: CMat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub ambient_dim: usize,
    #[serde(default)]
    pub tolerance: Tol,
    pub algebra_a: AlgebraSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra_b: Option<AlgebraSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expectation: Option<ExpectationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsSpec>,
}

pub fn parse_model_file(text: &[u8]) -> Result<ModelFile, CliError> {
    let s = std::str::from_utf8(text).map_err(|e| CliError::Parse {
        line: 0,
        column: e.valid_up_to(),
        message: "input is not UTF-8".into(),
    })?;
    if s.trim().is_empty() {
        return Err(CliError::Parse {
            line: 1,
            column: 0,
            message: "empty model file".into(),
        });
    }
    let m: ModelFile = serde_json::from_str(s).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    m.validate()?;
    Ok(m)
}

pub fn emit_model_file(m: &ModelFile) -> String {
    let mut s = serde_json::to_string_pretty(m).expect("model files always serialize");
    s.push('\n');
    s
}

fn check_dims(field: &str, ms: &[CMat], n: usize) -> Result<(), CliError> {
    for (i, m) in ms.iter().enumerate() {
        if m.rows() != n || m.cols() != n {
            return Err(CliError::DimensionMismatch {
                field: format!("{field}[{i}]"),
                expected: format!("{n}x{n}"),
                found: format!("{}x{}", m.rows(), m.cols()),
            });
        }
    }
    Ok(())
}

fn check_map(field: &str, map: &MapSpec, n: usize) -> Result<(), CliError> {
    check_dims(&format!("{field}.domain"), &map.domain, n)?;
    check_dims(&format!("{field}.images"), &map.images, n)?;
    if map.domain.len() != map.images.len() {
        return Err(CliError::DimensionMismatch {
            field: format!("{field}.images"),
            expected: format!("{} images", map.domain.len()),
            found: format!("{} images", map.images.len()),
        });
    }
    Ok(())
}

fn missing(field: &str) -> CliError {
    CliError::MissingField(field.to_string())
}

impl ModelFile {
    pub fn validate(&self) -> Result<(), CliError> {
        let n = self.ambient_dim;
        if n == 0 {
            return Err(CliError::DimensionMismatch {
                field: "ambient_dim".into(),
                expected: "positive".into(),
                found: "0".into(),
            });
        }
        check_dims("algebra_a.generators", &self.algebra_a.generators, n)?;
        if let Some(b) = &self.algebra_b {
            check_dims("algebra_b.generators", &b.generators, n)?;
        }
        match &self.expectation {
            Some(ExpectationSpec::Involution { unitary, map }) => match (unitary, map) {
                (Some(w), None) => check_dims("expectation.unitary", std::slice::from_ref(w), n)?,
                (None, Some(m)) => check_map("expectation.map", m, n)?,
                _ => return Err(missing("expectation: exactly one of `unitary` or `map`")),
            },
            Some(ExpectationSpec::Blocks { projections }) => {
                if projections.is_empty() {
                    return Err(missing("expectation.projections"));
                }
                check_dims("expectation.projections", projections, n)?
            }
            Some(ExpectationSpec::Matrix { map }) => check_map("expectation.map", map, n)?,
            None => {}
        }
        if let Some(d) = &self.dynamics {
            check_dims("dynamics.z", std::slice::from_ref(&d.z), n)?;
            match (&d.alpha.implementer, &d.alpha.map) {
                (Some(y), None) => check_dims("dynamics.alpha.implementer", std::slice::from_ref(y), n)?,
                (None, Some(m)) => check_map("dynamics.alpha.map", m, n)?,
                _ => return Err(missing("dynamics.alpha: exactly one of `implementer` or `map`")),
            }
        }
        let inclusion = self.algebra_b.is_some() || self.expectation.is_some();
        if inclusion && (self.algebra_b.is_none() || self.expectation.is_none()) {
            return Err(missing(if self.algebra_b.is_none() { "algebra_b" } else { "expectation" }));
        }
        if !inclusion && self.dynamics.is_none() {
            return Err(missing("algebra_b/expectation or dynamics"));
        }
        Ok(())
    }

    pub fn algebra_a(&self, tol: &Tol) -> CStarAlg {
        generate_algebra(self.ambient_dim, &self.algebra_a.generators, tol)
    }

    pub fn system(&self, tol: &Tol) -> Option<TwoZInnerSystem> {
        let d = self.dynamics.as_ref()?;
        let a = self.algebra_a(tol);
        Some(match (&d.alpha.implementer, &d.alpha.map) {
            (Some(y), _) => TwoZInnerSystem::inner(a, y, d.z.clone()),
            (None, Some(m)) => {
                let (f, _) = LinMap::from_generators(&m.domain, &m.images, tol);
                let alpha = LinMap::from_fn(a.space(), |x| f.apply(x));
                TwoZInnerSystem {
                    a,
                    alpha,
                    z: d.z.clone(),
                }
            }
            (None, None) => unreachable!("validated"),
        })
    }

    /// `(B, A, E)` as declared, before any index checks.
    pub fn triple(&self, tol: &Tol) -> Result<(CStarAlg, CStarAlg, CondExp), CliError> {
        let (Some(bspec), Some(espec)) = (&self.algebra_b, &self.expectation) else {
            return Err(missing("algebra_b/expectation"));
        };
        let n = self.ambient_dim;
        let b = generate_algebra(n, &bspec.generators, tol);
        let a = self.algebra_a(tol);
        let e = match espec {
            ExpectationSpec::Involution { unitary: Some(w), .. } => {
                expectation_from_involutive_automorphism(&b, &AutSpec::Inner(w.clone()), tol)?
            }
            ExpectationSpec::Involution { map: Some(m), .. } => {
                let (f, _) = LinMap::from_generators(&m.domain, &m.images, tol);
                let beta = LinMap::from_fn(b.space(), |x| f.apply(x));
                expectation_from_involutive_automorphism(&b, &AutSpec::Map(beta), tol)?
            }
            ExpectationSpec::Involution { .. } => unreachable!("validated"),
            ExpectationSpec::Blocks { projections } => expectation_from_block_compression(&b, projections, tol)?,
            ExpectationSpec::Matrix { map } => {
                let (f, _) = LinMap::from_generators(&map.domain, &map.images, tol);
                CondExp::from_fn(b.clone(), a.clone(), |x| f.apply(x))
            }
        };
        Ok((b, a, e))
    }

    /// The verified inclusion pair; dynamics-only files use the restricted crossed model.
    pub fn pair(&self, tol: &Tol) -> Result<InclusionPair, CliError> {
        if self.expectation.is_some() {
            let (b, a, e) = self.triple(tol)?;
            return Ok(make_inclusion_pair(&b, &a, &e, tol)?);
        }
        let sys = self.system(tol).ok_or_else(|| missing("dynamics"))?;
        Ok(restricted_crossed_model(&sys, tol)?.pair)
    }
}

pub const FIXTURE_NAMES: [&str; 6] = ["A", "B", "C", "D", "E", "C3"];

fn generators(alg: &CStarAlg) -> Vec<CMat> {
    alg.basis().to_vec()
}

/// The shipped fixture catalog as model files (`seed` only affects `D`).
pub fn fixture_model(name: &str, seed: u64) -> Result<ModelFile, CliError> {
    let tol = Tol::default();
    let e = CMat::unit;
    let base = |name: &str, description: &str, n: usize, a: Vec<CMat>| ModelFile {
        name: name.into(),
        description: description.into(),
        ambient_dim: n,
        tolerance: Tol::default(),
        algebra_a: AlgebraSpec { generators: a },
        algebra_b: None,
        expectation: None,
        dynamics: None,
    };
    let m = match name {
        "A" => ModelFile {
            algebra_b: Some(AlgebraSpec {
                generators: vec![e(2, 0, 0), e(2, 1, 1)],
            }),
            expectation: Some(ExpectationSpec::Involution {
                unitary: None,
                map: Some(MapSpec {
                    domain: vec![e(2, 0, 0), e(2, 1, 1)],
                    images: vec![e(2, 1, 1), e(2, 0, 0)],
                }),
            }),
            ..base("A", "C·1 ⊂ C^2 with the coordinate swap", 2, vec![])
        },
        "B" => ModelFile {
            algebra_b: Some(AlgebraSpec {
                generators: vec![e(2, 0, 1)],
            }),
            expectation: Some(ExpectationSpec::Involution {
                unitary: Some(CMat::diag_re(&[1.0, -1.0])),
                map: None,
            }),
            ..base("B", "D_2 ⊂ M_2, E = (id + Ad diag(1,-1)) / 2", 2, vec![e(2, 0, 0)])
        },
        "C" => ModelFile {
            algebra_b: Some(AlgebraSpec {
                generators: vec![e(3, 0, 1), e(3, 1, 2)],
            }),
            expectation: Some(ExpectationSpec::Blocks {
                projections: fixtures::fix_c_projections().to_vec(),
            }),
            ..base(
                "C",
                "C ⊕ M_2 ⊂ M_3 by block compression; index 2, not a crossed product",
                3,
                vec![e(3, 0, 0), e(3, 1, 2)],
            )
        },
        "D" => {
            let (w, _) = fixtures::fix_d_unitary(seed);
            let p = fixtures::fix_d(seed, &tol)?;
            ModelFile {
                algebra_b: Some(AlgebraSpec {
                    generators: vec![e(4, 0, 1), e(4, 1, 2), e(4, 2, 3)],
                }),
                expectation: Some(ExpectationSpec::Involution {
                    unitary: Some(w),
                    map: None,
                }),
                tolerance: Tol::default().with_seed(seed),
                ..base(
                    "D",
                    &format!("M_4^(Ad w) ⊂ M_4 for the self-adjoint unitary w of seed {seed}"),
                    4,
                    generators(&p.a),
                )
            }
        }
        "E" => ModelFile {
            dynamics: Some(DynamicsSpec {
                alpha: AlphaSpec {
                    implementer: Some(CMat::diag(&[ONE, I])),
                    map: None,
                },
                z: CMat::diag_re(&[1.0, -1.0]),
            }),
            ..base("E", "2Z-inner system (M_2, Ad diag(1,i), diag(1,-1))", 2, vec![e(2, 0, 1)])
        },
        "C3" => ModelFile {
            algebra_b: Some(AlgebraSpec {
                generators: vec![e(3, 0, 0), e(3, 1, 1), e(3, 2, 2)],
            }),
            expectation: Some(ExpectationSpec::Involution {
                unitary: Some(CMat::from_re_rows(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]])),
                map: None,
            }),
            ..base(
                "C3",
                "C^3 with a transposition: central but non-scalar index diag(2,2,1)",
                3,
                vec![CMat::diag_re(&[1.0, 1.0, 0.0])],
            )
        },
        other => return Err(CliError::UnknownFixture(other.to_string())),
    };
    Ok(m)
}

/// File name of a shipped fixture under the data directory.
pub fn fixture_file_name(name: &str) -> String {
    match name {
        "D" => "fix_d_seed0.json".into(),
        "C3" => "c3_control.json".into(),
        other => format!("fix_{}.json", other.to_lowercase()),
    }
}
