//! The agent-local feature bundle.
//!
//! An [`Observation`] is everything a policy may see. It carries no identity
//! label; an agent can only infer its category from the size of its own last
//! clean or harvest.

use core::fmt;
use core::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    /// Open ground with a river cell in reach.
    RiverBank,
    Open,
    Orchard,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TeamSizeBucket {
    /// Solo, or alone in a team slot.
    One,
    /// Two or three members.
    Small,
    /// Four or more members.
    Large,
}

impl TeamSizeBucket {
    pub fn from_size(size: usize) -> Self {
        match size {
            0 | 1 => TeamSizeBucket::One,
            2 | 3 => TeamSizeBucket::Small,
            _ => TeamSizeBucket::Large,
        }
    }
}

/// Number of equal-width pollution bins.
pub const POLLUTION_BINS: u8 = 5;

pub fn pollution_bin(pollution: f64) -> u8 {
    ((pollution * POLLUTION_BINS as f64) as u8).min(POLLUTION_BINS - 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Observation {
    pub region: Region,
    pub apples_in_reach: u8,
    pub waste_in_reach: u8,
    /// `0..POLLUTION_BINS`, lowest bin is cleanest.
    pub pollution_bin: u8,
    pub team_size: TeamSizeBucket,
    /// Whether a team change proposed now could be accepted.
    pub switch_ready: bool,
    pub last_harvested: u8,
    pub last_cleaned: u8,
}

// Compact textual key, e.g. `bank/a0/w2/p1/t1/s1/h0/c3`. Used by policy
// snapshots.
impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let region = match self.region {
            Region::RiverBank => "bank",
            Region::Open => "open",
            Region::Orchard => "orchard",
        };
        let team = match self.team_size {
            TeamSizeBucket::One => 1,
            TeamSizeBucket::Small => 2,
            TeamSizeBucket::Large => 4,
        };
        write!(
            f,
            "{region}/a{}/w{}/p{}/t{team}/s{}/h{}/c{}",
            self.apples_in_reach,
            self.waste_in_reach,
            self.pollution_bin,
            self.switch_ready as u8,
            self.last_harvested,
            self.last_cleaned
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseObservationError;

impl fmt::Display for ParseObservationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("malformed observation key")
    }
}

impl core::error::Error for ParseObservationError {}

impl FromStr for Observation {
    type Err = ParseObservationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split('/');
        let mut next = || parts.next().ok_or(ParseObservationError);
        let region = match next()? {
            "bank" => Region::RiverBank,
            "open" => Region::Open,
            "orchard" => Region::Orchard,
            _ => return Err(ParseObservationError),
        };
        fn field(part: &str, tag: char) -> Result<u8, ParseObservationError> {
            part.strip_prefix(tag)
                .and_then(|v| v.parse().ok())
                .ok_or(ParseObservationError)
        }
        let apples_in_reach = field(next()?, 'a')?;
        let waste_in_reach = field(next()?, 'w')?;
        let pollution_bin = field(next()?, 'p')?;
        let team_size = match field(next()?, 't')? {
            1 => TeamSizeBucket::One,
            2 => TeamSizeBucket::Small,
            4 => TeamSizeBucket::Large,
            _ => return Err(ParseObservationError),
        };
        let switch_ready = match field(next()?, 's')? {
            0 => false,
            1 => true,
            _ => return Err(ParseObservationError),
        };
        let last_harvested = field(next()?, 'h')?;
        let last_cleaned = field(next()?, 'c')?;
        if parts.next().is_some() || pollution_bin >= POLLUTION_BINS {
            return Err(ParseObservationError);
        }
        Ok(Observation {
            region,
            apples_in_reach,
            waste_in_reach,
            pollution_bin,
            team_size,
            switch_ready,
            last_harvested,
            last_cleaned,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    #[test]
    fn bins() {
        assert_eq!(pollution_bin(0.0), 0);
        assert_eq!(pollution_bin(0.19), 0);
        assert_eq!(pollution_bin(0.2), 1);
        assert_eq!(pollution_bin(0.4), 2);
        assert_eq!(pollution_bin(1.0), 4);
    }

    #[test]
    fn team_buckets() {
        assert_eq!(TeamSizeBucket::from_size(1), TeamSizeBucket::One);
        assert_eq!(TeamSizeBucket::from_size(3), TeamSizeBucket::Small);
        assert_eq!(TeamSizeBucket::from_size(4), TeamSizeBucket::Large);
    }

    #[test]
    fn rejects_garbage() {
        assert!("".parse::<Observation>().is_err());
        assert!("bank/a0/w0/p9/t1/s1/h0/c0".parse::<Observation>().is_err());
        assert!("bank/a0/w0/p0/t3/s1/h0/c0".parse::<Observation>().is_err());
        assert!("bank/a0/w0/p0/t1/s1/h0/c0/x".parse::<Observation>().is_err());
    }

    fn arb_obs() -> impl Strategy<Value = Observation> {
        (
            prop_oneof![Just(Region::RiverBank), Just(Region::Open), Just(Region::Orchard)],
            any::<u8>(),
            any::<u8>(),
            0u8..POLLUTION_BINS,
            prop_oneof![Just(TeamSizeBucket::One), Just(TeamSizeBucket::Small), Just(TeamSizeBucket::Large)],
            any::<bool>(),
            any::<u8>(),
            any::<u8>(),
        )
            .prop_map(|(region, a, w, p, t, s, h, c)| Observation {
                region,
                apples_in_reach: a,
                waste_in_reach: w,
                pollution_bin: p,
                team_size: t,
                switch_ready: s,
                last_harvested: h,
                last_cleaned: c,
            })
    }

    proptest! {
        #[test]
        fn key_round_trips(obs in arb_obs()) {
            prop_assert_eq!(obs.to_string().parse::<Observation>(), Ok(obs));
        }
    }
}
