//! NB-IoT downlink signalling grid (guard-band / stand-alone deployment).
//!
//! The grid is a time-only view: one cell per OFDM symbol across the whole
//! carrier, marked with the mandatory signal it carries (if any). Two radio
//! frames form the hyperperiod after which NPSS, NSSS, NPBCH and NRS repeat.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SUBFRAMES_PER_FRAME: usize = 10;
pub const SYMBOLS_PER_SUBFRAME: usize = 14;
/// 1 ms subframe split into 14 equal symbols.
pub const SYMBOL_DURATION: f64 = 1e-3 / 14.0;

/// Reference pie-chart split of downlink time (%, order NRS, NPBCH, NPSS,
/// NSSS, free). Kept as a comparison target; it does not follow from the
/// symbol-level grid exactly.
pub const REFERENCE_SHARE_PERCENT: [(SignalType, f64); 5] = [
    (SignalType::Nrs, 22.14),
    (SignalType::Npbch, 6.43),
    (SignalType::Npss, 6.43),
    (SignalType::Nsss, 3.2),
    (SignalType::Free, 61.8),
];

const NPBCH_SUBFRAME: usize = 0;
const NPSS_SUBFRAME: usize = 5;
const NSSS_SUBFRAME: usize = 9;
/// First symbol of NPBCH/NPSS/NSSS; the control region before it is left empty.
const SYNC_FIRST_SYMBOL: usize = 3;
const NRS_SYMBOLS: [usize; 4] = [5, 6, 12, 13];
const NRS_SUBFRAMES: [usize; 7] = [1, 2, 3, 4, 6, 7, 8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SignalType {
    Npss,
    Nsss,
    Npbch,
    Nrs,
    Free,
}

impl SignalType {
    pub const ALL: [SignalType; 5] = [
        SignalType::Npss,
        SignalType::Nsss,
        SignalType::Npbch,
        SignalType::Nrs,
        SignalType::Free,
    ];

    pub fn token(self) -> &'static str {
        match self {
            SignalType::Npss => "NPSS",
            SignalType::Nsss => "NSSS",
            SignalType::Npbch => "NPBCH",
            SignalType::Nrs => "NRS",
            SignalType::Free => "FREE",
        }
    }

    pub fn glyph(self) -> char {
        match self {
            SignalType::Npss => 'P',
            SignalType::Nsss => 'S',
            SignalType::Npbch => 'B',
            SignalType::Nrs => 'R',
            SignalType::Free => '.',
        }
    }

    pub fn is_free(self) -> bool {
        self == SignalType::Free
    }

    fn index(self) -> usize {
        match self {
            SignalType::Npss => 0,
            SignalType::Nsss => 1,
            SignalType::Npbch => 2,
            SignalType::Nrs => 3,
            SignalType::Free => 4,
        }
    }
}

impl fmt::Display for SignalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameConfig {
    pub frames: usize,
    pub subframes_per_frame: usize,
    pub symbols_per_subframe: usize,
    pub symbol_duration: f64,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig {
            frames: 2,
            subframes_per_frame: SUBFRAMES_PER_FRAME,
            symbols_per_subframe: SYMBOLS_PER_SUBFRAME,
            symbol_duration: SYMBOL_DURATION,
        }
    }
}

impl FrameConfig {
    pub fn with_frames(frames: usize) -> Self {
        FrameConfig {
            frames,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames < 2 || !self.frames.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "frames must be an even count >= 2, got {}",
                self.frames
            )));
        }
        if self.subframes_per_frame != SUBFRAMES_PER_FRAME {
            return Err(Error::Config(format!(
                "subframes_per_frame must be {SUBFRAMES_PER_FRAME}, got {}",
                self.subframes_per_frame
            )));
        }
        if self.symbols_per_subframe != SYMBOLS_PER_SUBFRAME {
            return Err(Error::Config(format!(
                "symbols_per_subframe must be {SYMBOLS_PER_SUBFRAME}, got {}",
                self.symbols_per_subframe
            )));
        }
        if !(self.symbol_duration.is_finite() && self.symbol_duration > 0.0) {
            return Err(Error::Config(format!(
                "symbol_duration must be positive, got {}",
                self.symbol_duration
            )));
        }
        Ok(())
    }

    pub fn symbols_per_frame(&self) -> usize {
        self.subframes_per_frame * self.symbols_per_subframe
    }

    pub fn total_symbols(&self) -> usize {
        self.frames * self.symbols_per_frame()
    }

    /// Length of the grid in seconds.
    pub fn duration(&self) -> f64 {
        self.total_symbols() as f64 * self.symbol_duration
    }
}

/// Symbol-level signal occupancy over a whole number of hyperperiods.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGrid {
    config: FrameConfig,
    // frame-major, then subframe, then symbol
    cells: Vec<SignalType>,
}

impl FrameGrid {
    /// A grid with every symbol free, i.e. a carrier without NB-IoT signalling.
    pub fn all_free(config: FrameConfig) -> Result<Self> {
        config.validate()?;
        Ok(FrameGrid {
            config,
            cells: vec![SignalType::Free; config.total_symbols()],
        })
    }

    pub fn from_cells(config: FrameConfig, cells: Vec<SignalType>) -> Result<Self> {
        config.validate()?;
        if cells.len() != config.total_symbols() {
            return Err(Error::Config(format!(
                "expected {} cells, got {}",
                config.total_symbols(),
                cells.len()
            )));
        }
        Ok(FrameGrid { config, cells })
    }

    pub fn config(&self) -> &FrameConfig {
        &self.config
    }

    pub fn cells(&self) -> &[SignalType] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn index(&self, frame: usize, subframe: usize, symbol: usize) -> usize {
        (frame * self.config.subframes_per_frame + subframe) * self.config.symbols_per_subframe
            + symbol
    }

    /// Position `(frame, subframe, symbol)` of a flat symbol index.
    pub fn position(&self, index: usize) -> (usize, usize, usize) {
        let per_sf = self.config.symbols_per_subframe;
        let per_frame = self.config.symbols_per_frame();
        (
            index / per_frame,
            (index % per_frame) / per_sf,
            index % per_sf,
        )
    }

    pub fn cell(&self, frame: usize, subframe: usize, symbol: usize) -> SignalType {
        self.cells[self.index(frame, subframe, symbol)]
    }

    pub fn count(&self, signal: SignalType) -> usize {
        self.cells.iter().filter(|&&c| c == signal).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("frame,subframe,symbol,signal\n");
        for (i, cell) in self.cells.iter().enumerate() {
            let (f, sf, s) = self.position(i);
            let _ = writeln!(out, "{f},{sf},{s},{}", cell.token());
        }
        out
    }

    /// One line per frame, one glyph per symbol, subframes separated by a space.
    pub fn to_ascii(&self) -> String {
        let mut out = String::new();
        let per_frame = self.config.symbols_per_frame();
        for (f, frame) in self.cells.chunks(per_frame).enumerate() {
            let _ = write!(out, "frame {f:>2} |");
            for (sf, subframe) in frame.chunks(self.config.symbols_per_subframe).enumerate() {
                if sf > 0 {
                    out.push(' ');
                }
                out.extend(subframe.iter().map(|c| c.glyph()));
            }
            out.push_str("|\n");
        }
        out.push_str("legend: P=NPSS S=NSSS B=NPBCH R=NRS .=free\n");
        out
    }
}

pub fn build_grid(config: FrameConfig) -> Result<FrameGrid> {
    config.validate()?;
    let mut grid = FrameGrid::all_free(config)?;
    let symbols = config.symbols_per_subframe;
    for frame in 0..config.frames {
        let even = frame % 2 == 0;
        let mut fill = |subframe: usize, range: &mut dyn Iterator<Item = usize>, sig| {
            for symbol in range {
                let i = grid.index(frame, subframe, symbol);
                grid.cells[i] = sig;
            }
        };
        fill(
            NPBCH_SUBFRAME,
            &mut (SYNC_FIRST_SYMBOL..symbols),
            SignalType::Npbch,
        );
        fill(
            NPSS_SUBFRAME,
            &mut (SYNC_FIRST_SYMBOL..symbols),
            SignalType::Npss,
        );
        if even {
            fill(
                NSSS_SUBFRAME,
                &mut (SYNC_FIRST_SYMBOL..symbols),
                SignalType::Nsss,
            );
        }
        let nrs_subframes = NRS_SUBFRAMES
            .iter()
            .copied()
            .chain((!even).then_some(NSSS_SUBFRAME));
        for subframe in nrs_subframes {
            fill(subframe, &mut NRS_SYMBOLS.iter().copied(), SignalType::Nrs);
        }
    }
    Ok(grid)
}

/// Fraction of grid time taken by each signal type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OccupancyShares {
    shares: [f64; 5],
}

impl OccupancyShares {
    pub fn share(&self, signal: SignalType) -> f64 {
        self.shares[signal.index()]
    }

    /// Time fraction carrying any mandatory signal.
    pub fn signalling(&self) -> f64 {
        1.0 - self.share(SignalType::Free)
    }

    pub fn iter(&self) -> impl Iterator<Item = (SignalType, f64)> + '_ {
        SignalType::ALL.iter().map(move |&s| (s, self.share(s)))
    }
}

pub fn occupancy_shares(grid: &FrameGrid) -> OccupancyShares {
    let mut counts = [0usize; 5];
    for c in grid.cells() {
        counts[c.index()] += 1;
    }
    let total = grid.len() as f64;
    OccupancyShares {
        shares: counts.map(|n| n as f64 / total),
    }
}

/// Maximal run of free symbols; may wrap past the end of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeInterval {
    pub start: usize,
    pub length: usize,
    pub duration: f64,
}

/// All maximal free runs, with the grid treated as cyclic. Runs are ordered
/// by start index; a run that wraps the boundary starts near the end.
pub fn free_intervals(grid: &FrameGrid) -> Vec<FreeInterval> {
    let cells = grid.cells();
    let n = cells.len();
    let dt = grid.config().symbol_duration;
    let interval = |start, length| FreeInterval {
        start,
        length,
        duration: length as f64 * dt,
    };

    let Some(anchor) = cells.iter().position(|c| !c.is_free()) else {
        return if n == 0 {
            Vec::new()
        } else {
            vec![interval(0, n)]
        };
    };

    // Walk one full cycle starting just after an occupied cell so no run is split.
    let mut out = Vec::new();
    let mut run_start = None;
    for step in 1..=n {
        let i = (anchor + step) % n;
        match (cells[i].is_free(), run_start) {
            (true, None) => run_start = Some((i, step)),
            (false, Some((start, first))) => {
                out.push(interval(start, step - first));
                run_start = None;
            }
            _ => {}
        }
    }
    out.sort_by_key(|iv| iv.start);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig() -> FrameGrid {
        build_grid(FrameConfig::default()).unwrap()
    }

    #[test]
    fn spot_cells() {
        let g = fig();
        assert_eq!(g.cell(0, 5, 7), SignalType::Npss);
        assert_eq!(g.cell(1, 9, 5), SignalType::Nrs);
        assert_eq!(g.cell(0, 2, 0), SignalType::Free);
        assert_eq!(g.cell(0, 9, 3), SignalType::Nsss);
        assert_eq!(g.cell(1, 9, 3), SignalType::Free);
        assert_eq!(g.cell(1, 0, 13), SignalType::Npbch);
    }

    #[test]
    fn rejects_bad_configs() {
        for cfg in [
            FrameConfig::with_frames(3),
            FrameConfig::with_frames(0),
            FrameConfig {
                subframes_per_frame: 8,
                ..Default::default()
            },
            FrameConfig {
                symbols_per_subframe: 12,
                ..Default::default()
            },
            FrameConfig {
                symbol_duration: 0.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(build_grid(cfg), Err(Error::Config(_))), "{cfg:?}");
        }
    }

    #[test]
    fn sync_signals_never_share_a_subframe_with_nrs() {
        let g = fig();
        for sf in g.cells().chunks(SYMBOLS_PER_SUBFRAME) {
            let has_sync = sf
                .iter()
                .any(|c| matches!(c, SignalType::Npss | SignalType::Nsss | SignalType::Npbch));
            let has_nrs = sf.contains(&SignalType::Nrs);
            assert!(!(has_sync && has_nrs));
        }
    }

    #[test]
    fn all_free_grid_is_one_cyclic_interval() {
        let g = FrameGrid::all_free(FrameConfig::default()).unwrap();
        let iv = free_intervals(&g);
        assert_eq!(iv.len(), 1);
        assert_eq!((iv[0].start, iv[0].length), (0, 280));
    }

    #[test]
    fn wrapping_run_is_merged() {
        let mut cells = vec![SignalType::Free; 280];
        cells[10] = SignalType::Nrs;
        cells[100] = SignalType::Nrs;
        let g = FrameGrid::from_cells(FrameConfig::default(), cells).unwrap();
        let iv = free_intervals(&g);
        assert_eq!(iv.len(), 2);
        assert_eq!((iv[0].start, iv[0].length), (11, 89));
        assert_eq!((iv[1].start, iv[1].length), (101, 189));
    }

    #[test]
    fn fully_occupied_grid_has_no_intervals() {
        let cells = vec![SignalType::Nrs; 280];
        let g = FrameGrid::from_cells(FrameConfig::default(), cells).unwrap();
        assert!(free_intervals(&g).is_empty());
    }

    #[test]
    fn csv_has_header_and_one_row_per_symbol() {
        let csv = fig().to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "frame,subframe,symbol,signal");
        assert_eq!(lines.len(), 281);
        assert_eq!(lines[1 + 5 * 14 + 7], "0,5,7,NPSS");
    }

    #[test]
    fn ascii_has_one_glyph_per_symbol() {
        let art = fig().to_ascii();
        let glyphs: usize = art
            .lines()
            .filter(|l| l.starts_with("frame"))
            .map(|l| {
                l.split('|')
                    .nth(1)
                    .unwrap()
                    .chars()
                    .filter(|c| *c != ' ')
                    .count()
            })
            .sum();
        assert_eq!(glyphs, 280);
    }
}
