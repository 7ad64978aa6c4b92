use serde::{Deserialize, Serialize};

use crate::grid::Coord;

pub type RobotId = usize;
pub type VictimId = usize;

/// A victim as reported by the scouts: where it is and which of the `nr`
/// requirement kinds it needs (`q` vector).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VictimRecord {
    pub id: VictimId,
    pub location: Coord,
    #[serde(rename = "q")]
    pub requirements: Vec<u8>,
}

impl VictimRecord {
    pub fn new(id: VictimId, location: Coord, requirements: Vec<u8>) -> Self {
        Self {
            id,
            location,
            requirements,
        }
    }

    pub fn needs(&self, kind: usize) -> bool {
        self.requirements.get(kind).is_some_and(|&b| b == 1)
    }

    pub fn requirement_count(&self) -> usize {
        self.requirements.iter().filter(|&&b| b == 1).count()
    }
}

/// A rescue robot with its binary capability vector (`p` vector).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Robot {
    pub id: RobotId,
    pub start: Coord,
    #[serde(rename = "p")]
    pub capabilities: Vec<u8>,
}

impl Robot {
    pub fn new(id: RobotId, start: Coord, capabilities: Vec<u8>) -> Self {
        Self {
            id,
            start,
            capabilities,
        }
    }

    pub fn can(&self, kind: usize) -> bool {
        self.capabilities.get(kind).is_some_and(|&b| b == 1)
    }
}
