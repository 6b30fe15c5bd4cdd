//! Method labels: `<family>[-uniform|-boxed]` for scalarized selection,
//! `exact` and `mc` for the hypervolume cross-check.

use hvscal_core::{HvExponent, SamplerKind, ScalarizerFamily, ScalarizerSpec, WeightSampler};

use crate::config::Experiment;

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Scalarized {
        label: String,
        spec: ScalarizerSpec,
        sampler: WeightSampler,
    },
    HvExact,
    HvMonteCarlo,
}

impl Method {
    pub fn label(&self) -> &str {
        match self {
            Self::Scalarized { label, .. } => label,
            Self::HvExact => "exact",
            Self::HvMonteCarlo => "mc",
        }
    }

    /// Parses a label for `experiment`.
    ///
    /// A `-boxed` suffix selects the boxed weight distribution matching the
    /// family: boxed-linear weights for linear and hypervolume, their inverse
    /// for Chebyshev. Without a suffix weights are uniform on the positive
    /// sphere, and the label is kept without a suffix.
    pub fn parse(label: &str, experiment: Experiment, hv_exponent: HvExponent) -> Result<Self, String> {
        if experiment == Experiment::HvCheck {
            return match label {
                "exact" => Ok(Self::HvExact),
                "mc" => Ok(Self::HvMonteCarlo),
                other => Err(format!("unknown hv-check method '{other}' (expected exact or mc)")),
            };
        }
        let (family, suffix) = match label.rsplit_once('-') {
            Some((f, s @ ("uniform" | "boxed"))) => (f, Some(s)),
            _ => (label, None),
        };
        let family: ScalarizerFamily = family.parse().map_err(|e| format!("method '{label}': {e}"))?;
        let kind = match (suffix, family) {
            (None | Some("uniform"), _) => SamplerKind::UniformSpherePositive,
            (_, ScalarizerFamily::Chebyshev) => SamplerKind::BoxedChebyshev,
            _ => SamplerKind::BoxedLinear,
        };
        let canonical = match suffix {
            Some(s) => format!("{family}-{s}"),
            None => family.to_string(),
        };
        Ok(Self::Scalarized {
            label: canonical,
            spec: ScalarizerSpec::new(family, hv_exponent),
            sampler: WeightSampler::with_default_box(kind),
        })
    }
}

pub fn default_methods(experiment: Experiment) -> Vec<String> {
    let labels: &[&str] = match experiment {
        Experiment::Whitebox => &["linear", "chebyshev", "hypervolume"],
        Experiment::Bandit => &[
            "hypervolume-uniform",
            "linear-uniform",
            "chebyshev-uniform",
            "hypervolume-boxed",
            "linear-boxed",
            "chebyshev-boxed",
        ],
        Experiment::HvCheck => &["exact", "mc"],
    };
    labels.iter().map(|s| s.to_string()).collect()
}
