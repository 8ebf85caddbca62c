//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use iot_footprint::frame::{FrameConfig, FrameGrid, SignalType};
use iot_footprint::power::PowerProfile;

use SignalType::*;

/// Occupied symbol columns of the two-frame reference drawing, inclusive
/// ranges. Every other column is free.
const DRAWN_COLUMNS: [(usize, usize, SignalType); 35] = [
    (3, 13, Npbch),
    (19, 20, Nrs),
    (26, 27, Nrs),
    (33, 34, Nrs),
    (40, 41, Nrs),
    (47, 48, Nrs),
    (54, 55, Nrs),
    (61, 62, Nrs),
    (68, 69, Nrs),
    (73, 83, Npss),
    (89, 90, Nrs),
    (96, 97, Nrs),
    (103, 104, Nrs),
    (110, 111, Nrs),
    (117, 118, Nrs),
    (124, 125, Nrs),
    (129, 139, Nsss),
    (143, 153, Npbch),
    (159, 160, Nrs),
    (166, 167, Nrs),
    (173, 174, Nrs),
    (180, 181, Nrs),
    (187, 188, Nrs),
    (194, 195, Nrs),
    (201, 202, Nrs),
    (208, 209, Nrs),
    (213, 223, Npss),
    (229, 230, Nrs),
    (236, 237, Nrs),
    (243, 244, Nrs),
    (250, 251, Nrs),
    (257, 258, Nrs),
    (264, 265, Nrs),
    (271, 272, Nrs),
    (278, 279, Nrs),
];

/// The drawn 280-column pattern repeated over `frames / 2` hyperperiods.
pub fn drawn_cells(frames: usize) -> Vec<SignalType> {
    let mut period = vec![Free; 280];
    for (lo, hi, sig) in DRAWN_COLUMNS {
        period[lo..=hi].fill(sig);
    }
    period
        .iter()
        .copied()
        .cycle()
        .take(280 * frames / 2)
        .collect()
}

pub fn count(cells: &[SignalType], sig: SignalType) -> usize {
    cells.iter().filter(|&&c| c == sig).count()
}

/// Length of the cyclic free run containing free cell `i`, and the index
/// where that run starts. Quadratic; only for checking.
pub fn run_around(cells: &[SignalType], i: usize) -> (usize, usize) {
    let n = cells.len();
    if cells.iter().all(|c| *c == Free) {
        return (0, n);
    }
    let mut back = 0;
    while cells[(i + n - back - 1) % n] == Free {
        back += 1;
    }
    let mut fwd = 0;
    while cells[(i + fwd + 1) % n] == Free {
        fwd += 1;
    }
    ((i + n - back) % n, back + fwd + 1)
}

/// Energy of one pass over the grid, walking symbol by symbol. Each free
/// symbol is charged according to its position inside its run: the first
/// `t_transition` seconds of an eligible run at idle power, the rest asleep.
pub fn walk_energy(grid: &FrameGrid, p: &PowerProfile) -> f64 {
    let cells = grid.cells();
    let dt = grid.config().symbol_duration;
    let n = cells.len();
    let mut energy = 0.0;
    for i in 0..n {
        if cells[i] != Free {
            energy += p.p_active * dt;
            continue;
        }
        let (start, len) = run_around(cells, i);
        let offset = (i + n - start) % n;
        let run = len as f64 * dt;
        let eligible = run * (1.0 + 1e-12) >= p.t_transition + p.min_sleep;
        if !eligible {
            energy += p.p_idle_awake * dt;
            continue;
        }
        let begin = offset as f64 * dt;
        let in_transition = (p.t_transition - begin).clamp(0.0, dt);
        energy += p.p_idle_awake * in_transition + p.p_sleep * (dt - in_transition);
    }
    energy
}

pub fn grid_from_drawing(frames: usize) -> FrameGrid {
    FrameGrid::from_cells(FrameConfig::with_frames(frames), drawn_cells(frames)).unwrap()
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
