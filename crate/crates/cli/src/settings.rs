//! Merges defaults, the config file and command-line flags (in that order).

use regionscore::config::{GridConfig, PartitionConfig, RunConfig, ScoringConfig};
use regionscore::{CiMethod, Error, PartitionOfUnity, Result, ScoringSpec, ThetaGrid};

use crate::{CiFlag, Common, ScoringFlags};

pub const DEFAULT_SEED: u64 = 1;

pub struct Settings {
    pub config: RunConfig,
    pub partition_config: PartitionConfig,
    pub seed: u64,
}

impl Settings {
    pub fn load(common: &Common) -> Result<Self> {
        let config = match &common.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let mut partition_config = match &common.partition {
            Some(path) => PartitionConfig::load(path)?,
            None => config.partition.clone().unwrap_or_default(),
        };
        if let Some(c) = &common.cutpoints {
            partition_config = PartitionConfig {
                domain: partition_config.domain,
                cutpoints: Some(c.clone()),
                probe_points: partition_config.probe_points,
                ..Default::default()
            };
        }
        let seed = common.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
        Ok(Settings {
            config,
            partition_config,
            seed,
        })
    }

    pub fn partition(&self) -> Result<PartitionOfUnity> {
        self.partition_config.build()
    }

    /// A `--functional` flag without `--generator` picks that functional's
    /// default generator instead of the one in the config file.
    pub fn scoring(&self, flags: &ScoringFlags) -> Result<ScoringSpec> {
        let mut sc = self.config.scoring.clone().unwrap_or_default();
        if let Some(f) = &flags.functional {
            if sc.functional.as_deref() != Some(f.as_str()) {
                sc = ScoringConfig {
                    functional: Some(f.clone()),
                    ..Default::default()
                };
            }
        }
        let ScoringFlags {
            alpha,
            nu,
            generator,
            slope,
            ..
        } = flags;
        sc.alpha = alpha.or(sc.alpha);
        sc.nu = nu.or(sc.nu);
        sc.slope = slope.or(sc.slope);
        if generator.is_some() {
            sc.generator = generator.clone();
        }
        sc.build()
    }

    pub fn grid(&self, flag: Option<&str>) -> Result<ThetaGrid> {
        match flag {
            Some(text) => parse_grid(text)?.build(),
            None => self.config.grid.clone().unwrap_or_default().build(),
        }
    }

    pub fn ci(&self, flag: Option<CiFlag>) -> Result<CiMethod> {
        let mut c = self.config.ci.clone().unwrap_or_default();
        match flag {
            Some(CiFlag::Normal) => c.method = Some("normal".into()),
            Some(CiFlag::Bootstrap) => c.method = Some("bootstrap".into()),
            None => {}
        }
        c.build(self.seed)
    }
}

/// `"N"` or `"LO:HI:N"`.
pub fn parse_grid(text: &str) -> Result<GridConfig> {
    let bad = || Error::Validation(format!("--grid expects N or LO:HI:N, got '{text}'"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [n] => Ok(GridConfig {
            points: Some(n.trim().parse().map_err(|_| bad())?),
            ..Default::default()
        }),
        [lo, hi, n] => Ok(GridConfig {
            lower: Some(lo.trim().parse().map_err(|_| bad())?),
            upper: Some(hi.trim().parse().map_err(|_| bad())?),
            points: Some(n.trim().parse().map_err(|_| bad())?),
            ..Default::default()
        }),
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("11").unwrap().points, Some(11));
        let g = parse_grid("-5:5:21").unwrap();
        assert_eq!(
            (g.lower, g.upper, g.points),
            (Some(-5.0), Some(5.0), Some(21))
        );
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn flags_override_functional() {
        let s = Settings::load(&Common::default()).unwrap();
        assert_eq!(
            s.scoring(&ScoringFlags::default()).unwrap(),
            ScoringSpec::squared_error()
        );
        let flags = ScoringFlags {
            functional: Some("quantile".into()),
            alpha: Some(0.1),
            ..Default::default()
        };
        assert_eq!(
            s.scoring(&flags).unwrap(),
            ScoringSpec::pinball(0.1).unwrap()
        );
        assert_eq!(s.seed, DEFAULT_SEED);
    }

    #[test]
    fn cutpoints_flag_replaces_partition() {
        let common = Common {
            cutpoints: Some(vec![0.0, 5.0]),
            ..Default::default()
        };
        assert_eq!(
            Settings::load(&common).unwrap().partition().unwrap().len(),
            3
        );
    }
}
