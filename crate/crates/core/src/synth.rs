//! Seeded synthetic layouts on a 20 nm half-pitch grid.
//!
//! Rows of 20 nm tall wires at a 40 nm pitch. Each polygon spans 1-3 grid
//! cells horizontally; consecutive polygons in a row are separated by a
//! geometric number of empty cells whose mean shrinks as density grows.
//! With the default minimum spacing a wire conflicts with neighbors up to
//! two rows away, so dense layouts contain K5 and larger cliques.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{param, Result};
use crate::layout::{default_min_s, Layout, Rect, DEFAULT_HALF_PITCH_NM, DEFAULT_SPACING_NM, DEFAULT_WIDTH_NM};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub polygons: usize,
    /// In (0, 1]; 1 packs polygons with no empty cells.
    pub density: f64,
    /// Probability of splitting a polygon at each internal cell boundary.
    pub stitch_rate: f64,
    pub k: usize,
    pub seed: u64,
}

const PITCH: i64 = DEFAULT_WIDTH_NM + DEFAULT_SPACING_NM;

pub fn generate_synthetic(p: &SynthParams) -> Result<Layout> {
    if p.polygons == 0 {
        return param("polygon count must be positive");
    }
    if !(p.density > 0.0 && p.density <= 1.0) {
        return param(format!("density must be in (0, 1], got {}", p.density));
    }
    if !(0.0..=1.0).contains(&p.stitch_rate) {
        return param(format!("stitch rate must be in [0, 1], got {}", p.stitch_rate));
    }
    if p.k < 2 {
        return param("K must be >= 2");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mean_gap = (1.0 - p.density) / p.density;
    let cells = p.polygons as f64 * (2.0 + mean_gap);
    let width = (cells.sqrt().ceil() as i64).max(3);

    let gap = |rng: &mut ChaCha8Rng| -> i64 {
        let mut g = 0;
        while g < 64 && !rng.gen_bool(p.density) {
            g += 1;
        }
        g
    };

    let mut rects = Vec::new();
    let (mut row, mut col) = (0i64, gap(&mut rng) % width);
    for polygon in 0..p.polygons as u64 {
        let len = rng.gen_range(1..=3i64);
        if col + len > width {
            row += 1;
            col = gap(&mut rng) % width.min(3);
        }
        let y1 = row * PITCH;
        let y2 = y1 + DEFAULT_WIDTH_NM;
        let x_end = (col + len) * PITCH - DEFAULT_SPACING_NM;
        let mut x = col * PITCH;
        for cell in 1..len {
            let boundary = (col + cell) * PITCH;
            if rng.gen_bool(p.stitch_rate) {
                rects.push(Rect::new(polygon, x, y1, boundary, y2)?);
                x = boundary;
            }
        }
        rects.push(Rect::new(polygon, x, y1, x_end, y2)?);
        col += len + gap(&mut rng);
    }
    Layout::new(rects, default_min_s(p.k), DEFAULT_HALF_PITCH_NM)
}
