//! JSON interchange formats. Coefficients and real values are strings
//! (`"p/q"` rationals, decimal doubles); structural integers such as
//! dimensions, jet orders and exponents are plain JSON integers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::ScaledInvariant;
use crate::normalization::{EquivalenceVerdict, EquivalenceWitness};
use crate::one_dim::LambdaSequence;
use crate::phylon::{PairInstance, PhylonMap};
use crate::quadrature::QuadratureReport;
use crate::rational;
use crate::series::TruncatedSeries;
use crate::tensor::SymTensor;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub alpha: Vec<u32>,
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trunc: Option<usize>,
    pub terms: Vec<TermJson>,
}

impl SeriesJson {
    pub fn from_series(s: &TruncatedSeries) -> Self {
        let terms = s
            .terms()
            .map(|(m, c)| TermJson { alpha: m.exponents().to_vec(), coeff: rational::format(c) })
            .collect();
        SeriesJson { dim: s.dim(), trunc: Some(s.trunc()), terms }
    }

    /// Builds the series, taking the jet order from `default_trunc` when the
    /// literal omits it.
    pub fn to_series(&self, default_trunc: Option<usize>) -> Result<TruncatedSeries> {
        let trunc = self
            .trunc
            .or(default_trunc)
            .ok_or_else(|| Error::Parse("series literal needs a \"trunc\"".into()))?;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                if t.alpha.len() != self.dim {
                    return Err(Error::Parse(format!(
                        "exponent vector {:?} has length {}, expected {}",
                        t.alpha,
                        t.alpha.len(),
                        self.dim
                    )));
                }
                let degree: u32 = t.alpha.iter().sum();
                if degree as usize > trunc {
                    return Err(Error::Parse(format!("term {:?} has degree {degree} above trunc {trunc}", t.alpha)));
                }
                Ok((t.alpha.clone(), rational::parse(&t.coeff)?))
            })
            .collect::<Result<Vec<_>>>()?;
        TruncatedSeries::from_terms(self.dim, trunc, terms)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhylonMapJson {
    pub dim: usize,
    pub trunc: usize,
    pub components: Vec<SeriesJson>,
}

impl PhylonMapJson {
    pub fn from_map(psi: &PhylonMap) -> Self {
        PhylonMapJson {
            dim: psi.dim(),
            trunc: psi.trunc(),
            components: psi.components().iter().map(SeriesJson::from_series).collect(),
        }
    }

    pub fn to_map(&self) -> Result<PhylonMap> {
        if self.components.len() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: self.components.len() });
        }
        let components =
            self.components.iter().map(|c| c.to_series(Some(self.trunc))).collect::<Result<Vec<_>>>()?;
        PhylonMap::new(components)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub dim: usize,
    pub trunc: usize,
    pub components: Vec<SeriesJson>,
    pub verified_to: usize,
}

impl WitnessJson {
    pub fn from_witness(w: &EquivalenceWitness) -> Self {
        let PhylonMapJson { dim, trunc, components } = PhylonMapJson::from_map(&w.psi);
        WitnessJson { dim, trunc, components, verified_to: w.verified_to }
    }

    pub fn to_witness(&self) -> Result<EquivalenceWitness> {
        let map = PhylonMapJson { dim: self.dim, trunc: self.trunc, components: self.components.clone() };
        Ok(EquivalenceWitness { psi: map.to_map()?, verified_to: self.verified_to })
    }
}

/// A pair `(f, b)` with an optional map. Series literals without their own
/// `trunc` take `trunc` for `f` and `trunc - 2` for `b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub dim: usize,
    pub trunc: usize,
    pub f: SeriesJson,
    pub b: SeriesJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<PhylonMapJson>,
}

impl ProblemInstance {
    pub fn from_pair(pair: &PairInstance, psi: Option<&PhylonMap>) -> Self {
        ProblemInstance {
            dim: pair.dim(),
            trunc: pair.f.trunc(),
            f: SeriesJson::from_series(&pair.f),
            b: SeriesJson::from_series(&pair.b),
            psi: psi.map(PhylonMapJson::from_map),
        }
    }

    pub fn pair(&self) -> Result<PairInstance> {
        for (name, s) in [("f", &self.f), ("b", &self.b)] {
            if s.dim != self.dim {
                return Err(Error::Parse(format!("{name} has dim {}, instance has dim {}", s.dim, self.dim)));
            }
        }
        let f = self.f.to_series(Some(self.trunc))?;
        let b = self.b.to_series(Some(self.trunc.saturating_sub(2)))?;
        PairInstance::new(f, b)
    }

    pub fn psi(&self) -> Result<Option<PhylonMap>> {
        self.psi.as_ref().map(PhylonMapJson::to_map).transpose()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefactorJson {
    pub two_pi_exp: String,
    pub det_f: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantJson {
    pub order: usize,
    pub prefactor: PrefactorJson,
    pub rational_part: String,
}

impl InvariantJson {
    pub fn from_invariant(v: &ScaledInvariant) -> Self {
        InvariantJson {
            order: v.order,
            prefactor: PrefactorJson {
                two_pi_exp: rational::format(&rational::ratio(v.dim as i64, 2)),
                det_f: rational::format(&v.det_f),
            },
            rational_part: rational::format(&v.rational_part),
        }
    }

    pub fn to_invariant(&self) -> Result<ScaledInvariant> {
        let exp = rational::parse(&self.prefactor.two_pi_exp)?;
        let twice = exp * rational::int(2);
        if !twice.is_integer() || twice < rational::int(1) {
            return Err(Error::Parse(format!("bad two_pi_exp {}", self.prefactor.two_pi_exp)));
        }
        let dim = twice.to_integer().try_into().map_err(|_| Error::Parse("dimension out of range".into()))?;
        Ok(ScaledInvariant {
            dim,
            order: self.order,
            det_f: rational::parse(&self.prefactor.det_f)?,
            rational_part: rational::parse(&self.rational_part)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadExtJson {
    pub a: String,
    pub b: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaJson {
    pub radicand: String,
    pub values: Vec<QuadExtJson>,
}

impl LambdaJson {
    pub fn from_sequence(l: &LambdaSequence) -> Self {
        LambdaJson {
            radicand: rational::format(&l.radicand),
            values: l
                .values
                .iter()
                .map(|v| QuadExtJson { a: rational::format(v.a()), b: rational::format(v.b()) })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorEntryJson {
    pub idx: Vec<usize>,
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorJson {
    pub order: usize,
    pub entries: Vec<TensorEntryJson>,
}

impl TensorJson {
    pub fn from_tensor(t: &SymTensor) -> Self {
        TensorJson {
            order: t.order(),
            entries: t.entries().map(|(idx, c)| TensorEntryJson { idx: idx.clone(), coeff: rational::format(c) }).collect(),
        }
    }

    pub fn to_tensor(&self, dim: usize) -> Result<SymTensor> {
        let mut t = SymTensor::zero(dim, self.order);
        for e in &self.entries {
            if e.idx.len() != self.order {
                return Err(Error::OrderMismatch { left: self.order, right: e.idx.len() });
            }
            if let Some(&label) = e.idx.iter().find(|&&l| l == 0 || l > dim) {
                return Err(Error::InvalidLabel { label, dim });
            }
            t.set(&e.idx, rational::parse(&e.coeff)?);
        }
        Ok(t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub equivalent: bool,
    pub failure_order: Option<usize>,
    pub witness: Option<WitnessJson>,
}

impl VerdictJson {
    pub fn from_verdict(v: &EquivalenceVerdict) -> Self {
        VerdictJson {
            equivalent: v.equivalent,
            failure_order: v.failure_order,
            witness: v.witness.as_ref().map(WitnessJson::from_witness),
        }
    }
}

fn real(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureReportJson {
    pub n_values: Vec<String>,
    pub partial_order: usize,
    pub numeric_integrals: Vec<String>,
    pub series_values: Vec<String>,
    pub residuals: Vec<String>,
    pub fitted_slope: String,
}

impl QuadratureReportJson {
    pub fn from_report(r: &QuadratureReport) -> Self {
        let list = |v: &[f64]| v.iter().copied().map(real).collect();
        QuadratureReportJson {
            n_values: list(&r.n_values),
            partial_order: r.partial_order,
            numeric_integrals: list(&r.numeric_integrals),
            series_values: list(&r.series_values),
            residuals: list(&r.residuals),
            fitted_slope: real(r.fitted_slope),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn series_round_trip() {
        let s = TruncatedSeries::from_terms(2, 4, vec![(vec![2, 0], int(1)), (vec![1, 2], ratio(-3, 7))]).unwrap();
        let text = serde_json::to_string(&SeriesJson::from_series(&s)).unwrap();
        assert_eq!(text, r#"{"dim":2,"trunc":4,"terms":[{"alpha":[2,0],"coeff":"1"},{"alpha":[1,2],"coeff":"-3/7"}]}"#);
        let back: SeriesJson = serde_json::from_str(&text).unwrap();
        let s2 = back.to_series(None).unwrap();
        assert_eq!(s2, s);
        assert_eq!(s2.trunc(), 4);
    }

    #[test]
    fn instance_defaults_and_validation() {
        let text = r#"{"dim":1,"trunc":4,"f":{"dim":1,"terms":[{"alpha":[2],"coeff":"1"}]},"b":{"dim":1,"terms":[{"alpha":[0],"coeff":"1"}]}}"#;
        let inst: ProblemInstance = serde_json::from_str(text).unwrap();
        let pair = inst.pair().unwrap();
        assert_eq!((pair.f.trunc(), pair.b.trunc()), (4, 2));
        let bad = text.replace(r#""alpha":[0],"coeff":"1""#, r#""alpha":[0],"coeff":"0""#);
        let inst: ProblemInstance = serde_json::from_str(&bad).unwrap();
        assert_eq!(inst.pair(), Err(Error::ZeroDensity));
    }

    #[test]
    fn map_and_invariant_round_trip() {
        let psi = PhylonMap::new(vec![TruncatedSeries::from_terms(1, 3, vec![(vec![1], int(2)), (vec![3], ratio(1, 5))]).unwrap()])
            .unwrap();
        let j = PhylonMapJson::from_map(&psi);
        let back: PhylonMapJson = serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap();
        assert_eq!(back.to_map().unwrap(), psi);
        let inv = ScaledInvariant { dim: 3, order: 2, det_f: ratio(8, 3), rational_part: ratio(-1, 4) };
        let ij = InvariantJson::from_invariant(&inv);
        assert_eq!(ij.prefactor.two_pi_exp, "3/2");
        assert_eq!(ij.to_invariant().unwrap(), inv);
    }

    #[test]
    fn tensor_round_trip() {
        let t = SymTensor::from_fn(2, 2, |idx| int(idx[0] as i64 * idx[1] as i64));
        let j = TensorJson::from_tensor(&t);
        assert_eq!(j.to_tensor(2).unwrap(), t);
        assert!(j.to_tensor(1).is_err());
    }
}
