//! Study config files. Every field is optional; missing ones fall back to the
//! grid figure setup and command-line flags override whatever is set here.

use kmpp::dataset::MixtureConfig;
use kmpp::experiments::ConvergenceStudySpec;
use kmpp::{Error, LloydConfig, Strategy};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyFile {
    pub mixture: Option<MixtureConfig>,
    pub k: Option<usize>,
    pub sample_sizes: Option<Vec<usize>>,
    pub reps: Option<usize>,
    pub seedings_per_sample: Option<usize>,
    pub ref_reps: Option<usize>,
    pub ref_size: Option<usize>,
    pub master_seed: Option<u64>,
    pub refine: Option<bool>,
    pub strategies: Option<Vec<Strategy>>,
    pub lloyd: Option<LloydConfig>,
}

impl StudyFile {
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Parse {
            line: e
                .span()
                .map(|s| text[..s.start].lines().count().max(1) as u64)
                .unwrap_or(0),
            message: e.message().to_string(),
        })
    }

    pub fn apply(self, spec: &mut ConvergenceStudySpec) {
        if let Some(v) = self.mixture {
            spec.mixture = v;
        }
        if let Some(v) = self.k {
            spec.k = v;
        }
        if let Some(v) = self.sample_sizes {
            spec.sample_sizes = v;
        }
        if let Some(v) = self.reps {
            spec.reps = v;
        }
        if let Some(v) = self.seedings_per_sample {
            spec.seedings_per_sample = v;
        }
        if let Some(v) = self.ref_reps {
            spec.ref_reps = v;
        }
        if let Some(v) = self.ref_size {
            spec.ref_size = v;
        }
        if let Some(v) = self.master_seed {
            spec.master_seed = v;
        }
        if let Some(v) = self.refine {
            spec.refine = v;
        }
        if let Some(v) = self.strategies {
            spec.strategies = v;
        }
        if let Some(v) = self.lloyd {
            spec.lloyd = v;
        }
    }
}

/// Parses `ROWSxCOLS`, e.g. `4x4`.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid {s:?} is not of the form ROWSxCOLS"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("grid {s:?}: {t:?} is not a positive integer"))
    };
    Ok((parse(r)?, parse(c)?))
}
