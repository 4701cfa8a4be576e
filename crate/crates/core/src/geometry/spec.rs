use serde::{Deserialize, Serialize};

use super::{Chain, GeometryError, Point};

/// Version tag written into every serialized spec.
pub const SPEC_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    SquareMaze,
    CircularMaze,
    SpikedAnnulus,
    TangentDisks,
    Custom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::SquareMaze => "square_maze",
            Family::CircularMaze => "circular_maze",
            Family::SpikedAnnulus => "spiked_annulus",
            Family::TangentDisks => "tangent_disks",
            Family::Custom => "custom",
        }
    }
}

/// Family parameters; only the fields relevant to the family are set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub spikes: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cut_radius: Option<f64>,
}

/// The compact set `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compact {
    /// A continuum given as a single (open or closed) curve.
    Curve(Chain),
    /// Union of regions, each bounded by a closed loop.
    Region(Vec<Chain>),
}

impl Compact {
    pub fn chains(&self) -> Vec<&Chain> {
        match self {
            Compact::Curve(c) => vec![c],
            Compact::Region(loops) => loops.iter().collect(),
        }
    }
}

/// A condenser `(Ω, K)`.
///
/// `outer` holds the boundary of `Ω`: closed chains are boundary loops,
/// open chains are walls with two sides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondenserSpec {
    pub version: u32,
    pub family: Family,
    pub params: FamilyParams,
    pub outer: Vec<Chain>,
    pub compact: Compact,
}

impl CondenserSpec {
    pub fn new(family: Family, params: FamilyParams, outer: Vec<Chain>, compact: Compact) -> Self {
        CondenserSpec {
            version: SPEC_VERSION,
            family,
            params,
            outer,
            compact,
        }
    }

    /// The same condenser rotated about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        let rot = |cs: &Vec<Chain>| cs.iter().map(|c| c.rotated(angle)).collect();
        let compact = match &self.compact {
            Compact::Curve(c) => Compact::Curve(c.rotated(angle)),
            Compact::Region(cs) => Compact::Region(rot(cs)),
        };
        CondenserSpec { outer: rot(&self.outer), compact, ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, GeometryError> {
        let spec: CondenserSpec = serde_json::from_str(text).map_err(|e| GeometryError::Parse(e.to_string()))?;
        if spec.version != SPEC_VERSION {
            return Err(GeometryError::UnsupportedVersion(spec.version));
        }
        for c in spec.outer.iter().chain(spec.compact.chains()) {
            c.check()?;
        }
        Ok(spec)
    }

    /// Closed loops of `∂Ω`.
    pub fn outer_loops(&self) -> impl Iterator<Item = &Chain> {
        self.outer.iter().filter(|c| c.closed)
    }

    /// Two-sided walls of `∂Ω`.
    pub fn walls(&self) -> impl Iterator<Item = &Chain> {
        self.outer.iter().filter(|c| !c.closed)
    }

    /// Inside test for `Ω` (which contains `K`): odd number of enclosing
    /// outer loops and not on a wall.
    pub fn contains(&self, p: Point) -> bool {
        let enclosing = self.outer_loops().filter(|c| c.winding_number(p) != 0).count();
        enclosing % 2 == 1 && self.boundary_distance_unchecked(p) > 0.0
    }

    /// Minimum distance from `p` to every primitive of `∂Ω`.
    pub fn boundary_distance_unchecked(&self, p: Point) -> f64 {
        self.outer
            .iter()
            .map(|c| c.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Area of `Ω` with walls counted as measure zero.
    pub fn area(&self) -> f64 {
        let loops: Vec<&Chain> = self.outer_loops().collect();
        let mut total = 0.0;
        for (i, l) in loops.iter().enumerate() {
            let probe = l.segments[0].point_at(0.5);
            let depth = loops
                .iter()
                .enumerate()
                .filter(|(j, o)| *j != i && o.winding_number(probe) != 0)
                .count();
            let a = l.signed_area().abs();
            if depth % 2 == 0 {
                total += a;
            } else {
                total -= a;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_square_maze;

    #[test]
    fn json_round_trip_is_byte_identical() {
        let spec = build_square_maze(5).unwrap();
        let text = spec.to_json();
        let back = CondenserSpec::from_json(&text).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn rejects_unknown_version_and_garbage() {
        let spec = build_square_maze(3).unwrap();
        let text = spec.to_json().replace("\"version\": 1", "\"version\": 9");
        assert_eq!(CondenserSpec::from_json(&text), Err(GeometryError::UnsupportedVersion(9)));
        assert!(matches!(CondenserSpec::from_json("{ nope"), Err(GeometryError::Parse(_))));
    }

    #[test]
    fn document_layout() {
        let v: serde_json::Value = serde_json::from_str(&build_square_maze(3).unwrap().to_json()).unwrap();
        assert_eq!(v["family"], "square_maze");
        assert_eq!(v["params"]["m"], 3);
        assert_eq!(v["outer"][0]["segments"][0]["kind"], "segment");
        assert!(v["compact"]["curve"]["segments"].is_array());
    }
}
