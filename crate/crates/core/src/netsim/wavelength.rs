use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mapping::Direction;

/// One optical path: `sender` broadcasts on `wavelength` (1-indexed) and
/// every core in `receivers` drops a share of the signal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathAssignment {
    pub sender: u64,
    pub wavelength: u64,
    pub receivers: Vec<u64>,
}

/// Routing and wavelength plan of one transfer. Slots run one after the
/// other; paths within a slot share the waveguide on distinct wavelengths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WavelengthMatrix {
    pub period: usize,
    pub direction: Direction,
    pub slots: Vec<Vec<PathAssignment>>,
}

impl WavelengthMatrix {
    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn senders(&self) -> impl Iterator<Item = u64> + '_ {
        self.slots.iter().flatten().map(|p| p.sender)
    }
}

/// Groups `senders` in list order into slots of at most `lambda_max`; the
/// `k`-th sender of a slot gets wavelength `k`.
pub fn wavelength_matrix(
    period: usize,
    senders: &[u64],
    receivers: &[u64],
    lambda_max: u64,
    direction: Direction,
) -> Result<WavelengthMatrix> {
    if lambda_max == 0 {
        return Err(Error::invalid(
            "onoc.lambda_max",
            "need at least one wavelength",
        ));
    }
    if senders.is_empty() {
        return Err(Error::invalid(
            "senders",
            "a transfer needs at least one sender",
        ));
    }
    if receivers.is_empty() {
        return Err(Error::invalid(
            "receivers",
            "a transfer needs at least one receiver",
        ));
    }
    let slots = senders
        .chunks(lambda_max as usize)
        .map(|batch| {
            batch
                .iter()
                .zip(1..)
                .map(|(&sender, wavelength)| PathAssignment {
                    sender,
                    wavelength,
                    receivers: receivers.to_vec(),
                })
                .collect()
        })
        .collect();
    Ok(WavelengthMatrix {
        period,
        direction,
        slots,
    })
}

/// Writes `period,slot,sender,wavelength,receivers` rows, 1-indexed, with
/// receivers separated by `;`.
pub fn write_matrices_csv<W: Write>(matrices: &[WavelengthMatrix], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io {
        path: "wavelength csv".into(),
        message: e.to_string(),
    };
    w.write_record(["period", "slot", "sender", "wavelength", "receivers"])
        .map_err(io)?;
    for wm in matrices {
        for (s, slot) in wm.slots.iter().enumerate() {
            for p in slot {
                let receivers = p
                    .receivers
                    .iter()
                    .map(|r| (r + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(";");
                w.write_record([
                    wm.period.to_string(),
                    (s + 1).to_string(),
                    (p.sender + 1).to_string(),
                    p.wavelength.to_string(),
                    receivers,
                ])
                .map_err(io)?;
            }
        }
    }
    w.flush().map_err(|e| Error::Io {
        path: "wavelength csv".into(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_senders_one_slot() {
        let wm = wavelength_matrix(1, &[0, 1, 2], &[3, 4, 5, 6], 8, Direction::Clockwise).unwrap();
        assert_eq!(wm.slot_count(), 1);
        let got: Vec<_> = wm.slots[0]
            .iter()
            .map(|p| (p.sender, p.wavelength))
            .collect();
        assert_eq!(got, vec![(0, 1), (1, 2), (2, 3)]);
        assert!(wm.slots[0].iter().all(|p| p.receivers == [3, 4, 5, 6]));
    }

    #[test]
    fn tdm_when_senders_exceed_wavelengths() {
        let wm = wavelength_matrix(1, &[0, 1, 2, 3], &[4, 5], 2, Direction::Clockwise).unwrap();
        assert_eq!(wm.slot_count(), 2);
        assert!(wm.slots.iter().all(|s| s.len() == 2));
        assert_eq!(wm.slots[1][0].wavelength, 1);
    }

    #[test]
    fn single_sender() {
        let wm = wavelength_matrix(2, &[7], &[0], 4, Direction::Anticlockwise).unwrap();
        assert_eq!(wm.slot_count(), 1);
        assert_eq!(wm.slots[0][0].wavelength, 1);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(wavelength_matrix(1, &[0], &[1], 0, Direction::Clockwise).is_err());
        assert!(wavelength_matrix(1, &[], &[1], 2, Direction::Clockwise).is_err());
        assert!(wavelength_matrix(1, &[0], &[], 2, Direction::Clockwise).is_err());
    }

    #[test]
    fn csv_layout() {
        let wm = wavelength_matrix(1, &[0, 1], &[2, 3], 1, Direction::Clockwise).unwrap();
        let mut buf = Vec::new();
        write_matrices_csv(&[wm], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "period,slot,sender,wavelength,receivers\n1,1,1,1,3;4\n1,2,2,1,3;4\n"
        );
    }
}
