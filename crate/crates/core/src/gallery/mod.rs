//! The explicit maps: retraction and projection onto `beta_t`-complements, the
//! gated map `s~`, the branching family `h_t`, and the sequence-space maps.

mod branching;
mod phi_poly;
mod retract;
mod sequence;
mod split;
mod tilde;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use branching::{
    fixed_point_residual, h_diff, h_eval, h_transversality_data, h_zero_branch, sampled_root_count,
    BranchPoint, BranchingPhi, HFamily, LinearPhi, PhiFamily, TransversalityData,
};
pub use phi_poly::PhiPoly;
pub use retract::{
    dbeta_dt, pair_with_bump_dt, rho_diff, rho_eval, s_proj, s_proj_diff, RetractPoint, Rho, SProj,
};
pub use sequence::{
    rho_k_eval, rho_k_tangent, seq_diffeo, seq_diffeo_inv, RhoK, SeqDiffeo, DEFAULT_TRUNCATION,
};
pub use split::{bump_multiple, meets_bump, SplitFunction};
pub use tilde::{s_tilde_eval, s_tilde_inv, s_tilde_inv_tail_y, STilde, STildeImage};

use crate::error::{LabError, Result};
use crate::scale::ScaleVector;

/// String identifiers of the maps exposed on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MapId {
    #[serde(rename = "rho")]
    Rho,
    #[serde(rename = "s-proj")]
    SProj,
    #[serde(rename = "s-tilde")]
    STilde,
    #[serde(rename = "h-family")]
    HFamily,
    #[serde(rename = "seq-diffeo")]
    SeqDiffeo,
    #[serde(rename = "rho-k")]
    RhoK,
}

impl MapId {
    pub const ALL: [MapId; 6] = [
        MapId::Rho,
        MapId::SProj,
        MapId::STilde,
        MapId::HFamily,
        MapId::SeqDiffeo,
        MapId::RhoK,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MapId::Rho => "rho",
            MapId::SProj => "s-proj",
            MapId::STilde => "s-tilde",
            MapId::HFamily => "h-family",
            MapId::SeqDiffeo => "seq-diffeo",
            MapId::RhoK => "rho-k",
        }
    }
}

impl fmt::Display for MapId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MapId {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        MapId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| LabError::UnknownMap(s.to_string()))
    }
}

/// A map between scale vectors with a closed-form differential.
pub trait ScMap {
    type Domain: ScaleVector;
    type Codomain: ScaleVector;

    fn id(&self) -> MapId;

    fn eval(&self, x: &Self::Domain) -> Result<Self::Codomain>;

    /// `Df(base) dir`.
    fn differential(&self, base: &Self::Domain, dir: &Self::Domain) -> Result<Self::Codomain>;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_ids_round_trip() {
        for m in MapId::ALL {
            assert_eq!(m.as_str().parse::<MapId>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.as_str()));
        }
        assert!("nope".parse::<MapId>().is_err());
    }
}
