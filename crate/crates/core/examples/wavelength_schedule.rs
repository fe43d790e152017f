//! Wavelength assignment for one transfer, with and without TDM.

use onoc_fcnn::mapping::Direction;
use onoc_fcnn::netsim::{wavelength_matrix, write_matrices_csv};

fn main() -> onoc_fcnn::error::Result<()> {
    let senders = [0, 1, 2];
    let receivers = [3, 4, 5, 6];
    let wide = wavelength_matrix(1, &senders, &receivers, 8, Direction::Clockwise)?;
    let narrow = wavelength_matrix(2, &[0, 1, 2, 3, 4], &receivers, 2, Direction::Anticlockwise)?;
    println!(
        "{} slot(s) with 8 wavelengths, {} with 2",
        wide.slot_count(),
        narrow.slot_count()
    );
    write_matrices_csv(&[wide, narrow], std::io::stdout())
}
