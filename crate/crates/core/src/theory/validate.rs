use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::TheoryError;
use crate::compiler::CompiledLayout;

/// What happens to one wire after the gate subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WireMeasurement {
    Unmeasured,
    Deterministic,
    Noisy,
    /// Part of the accept / reject / none measurement.
    AcceptReject,
}

impl WireMeasurement {
    pub fn code(self) -> &'static str {
        match self {
            WireMeasurement::Unmeasured => "unmeasured",
            WireMeasurement::Deterministic => "u",
            WireMeasurement::Noisy => "noisy",
            WireMeasurement::AcceptReject => "accept-reject",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        [
            WireMeasurement::Unmeasured,
            WireMeasurement::Deterministic,
            WireMeasurement::Noisy,
            WireMeasurement::AcceptReject,
        ]
        .into_iter()
        .find(|m| m.code() == code)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllowedCircuitDescriptor {
    pub gate_subset: BTreeSet<usize>,
    /// One entry per wire of the register.
    pub measurements: Vec<WireMeasurement>,
}

impl AllowedCircuitDescriptor {
    /// The whole of `M_n` followed by the final measurement.
    pub fn full(layout: &CompiledLayout) -> Self {
        let field = layout.state_field();
        AllowedCircuitDescriptor {
            gate_subset: (0..layout.schedule().len()).collect(),
            measurements: (0..layout.wire_count())
                .map(|w| {
                    if field.contains(&w) {
                        WireMeasurement::AcceptReject
                    } else {
                        WireMeasurement::Deterministic
                    }
                })
                .collect(),
        }
    }

    /// No gates, noisy measurements on every wire.
    pub fn local_tomography(layout: &CompiledLayout) -> Self {
        AllowedCircuitDescriptor {
            gate_subset: BTreeSet::new(),
            measurements: alloc::vec![WireMeasurement::Noisy; layout.wire_count()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Validation {
    pub allowed: bool,
    pub diagnostic: Option<String>,
}

impl Validation {
    fn reject(reason: String) -> Self {
        Validation {
            allowed: false,
            diagnostic: Some(reason),
        }
    }
}

/// Checks that the gate subset is downward closed under wire dependency and
/// that the measurement assignment is allowed: the accept / reject
/// measurement covers exactly the state field of cell `-t` and follows the
/// complete gate list. One pass over the gate list.
pub fn validate_allowed_circuit(
    descriptor: &AllowedCircuitDescriptor,
    layout: &CompiledLayout,
) -> Result<Validation, TheoryError> {
    let schedule = layout.schedule();
    let width = layout.wire_count();
    if let Some(&bad) = descriptor.gate_subset.iter().find(|&&g| g >= schedule.len()) {
        return Err(TheoryError::DanglingGate {
            index: bad,
            count: schedule.len(),
        });
    }
    if descriptor.measurements.len() != width {
        return Err(TheoryError::AssignmentLength {
            expected: width,
            given: descriptor.measurements.len(),
        });
    }
    // blocked[w]: index of an excluded gate already seen on wire w
    let mut blocked: Vec<Option<usize>> = alloc::vec![None; width];
    for (index, slot) in schedule.iter().enumerate() {
        if descriptor.gate_subset.contains(&index) {
            if let Some((w, missing)) = slot
                .wires()
                .find_map(|w| blocked[w].map(|g| (w, g)))
            {
                return Ok(Validation::reject(format!(
                    "gate {index} ({}) is included but earlier gate {missing} on wire {w} is not",
                    slot.kind.code()
                )));
            }
        } else {
            for w in slot.wires() {
                blocked[w].get_or_insert(index);
            }
        }
    }
    let field = layout.state_field();
    let marked: Vec<usize> = (0..width)
        .filter(|&w| descriptor.measurements[w] == WireMeasurement::AcceptReject)
        .collect();
    if !marked.is_empty() {
        if marked != field.clone().collect::<Vec<_>>() {
            return Ok(Validation::reject(format!(
                "accept/reject measurement must cover exactly wires {}..{}",
                field.start, field.end
            )));
        }
        if descriptor.gate_subset.len() != schedule.len() {
            return Ok(Validation::reject(
                "accept/reject measurement requires the complete gate list".into(),
            ));
        }
    }
    Ok(Validation {
        allowed: true,
        diagnostic: None,
    })
}
