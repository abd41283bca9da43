use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ising::{resolution_range, GraphError, IsingGraph, Spin};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    #[default]
    Four,
    Eight,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImageError {
    #[error("image needs at least 2 pixels, got {0}")]
    TooSmall(usize),
    #[error("expected {expected} pixels, got {got}")]
    PixelCount { expected: usize, got: usize },
    #[error("pixel value {value} exceeds maxval {maxval}")]
    PixelRange { value: u32, maxval: u32 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A grayscale image, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageSegmentation {
    pub width: usize,
    pub height: usize,
    pub maxval: u32,
    pub pixels: Vec<u32>,
}

impl ImageSegmentation {
    pub fn new(width: usize, height: usize, maxval: u32, pixels: Vec<u32>) -> Result<Self, ImageError> {
        if pixels.len() != width * height {
            return Err(ImageError::PixelCount {
                expected: width * height,
                got: pixels.len(),
            });
        }
        if let Some(&value) = pixels.iter().find(|&&p| p > maxval) {
            return Err(ImageError::PixelRange { value, maxval });
        }
        Ok(Self { width, height, maxval, pixels })
    }

    /// Two flat regions split by a vertical boundary, with mild noise.
    pub fn two_region(width: usize, height: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let split = width / 2;
        let pixels = (0..width * height)
            .map(|k| {
                let base = if k % width < split { 40 } else { 200 };
                base + rng.random_range(0..16)
            })
            .collect();
        Self { width, height, maxval: 255, pixels }
    }

    pub fn random(width: usize, height: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pixels = (0..width * height).map(|_| rng.random_range(0..=255)).collect();
        Self { width, height, maxval: 255, pixels }
    }

    pub fn grid_edges(&self, conn: Connectivity) -> Vec<(usize, usize)> {
        let (w, h) = (self.width, self.height);
        let mut out = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if x + 1 < w {
                    out.push((i, i + 1));
                }
                if y + 1 < h {
                    out.push((i, i + w));
                    if conn == Connectivity::Eight {
                        if x + 1 < w {
                            out.push((i, i + w + 1));
                        }
                        if x > 0 {
                            out.push((i, i + w - 1));
                        }
                    }
                }
            }
        }
        out
    }

    /// Grid graph with `J_ij = -q(|p_i - p_j|)`, so that minimizing H
    /// maximizes the weighted cut between the two labels.
    pub fn to_ising(&self, r: u32, conn: Connectivity) -> Result<IsingGraph, ImageError> {
        crate::ising::graph::check_resolution(r)?;
        let n = self.width * self.height;
        if n < 2 {
            return Err(ImageError::TooSmall(n));
        }
        let top = resolution_range(r).1 as u64;
        let edges: Vec<_> = self
            .grid_edges(conn)
            .into_iter()
            .map(|(i, j)| {
                let d = self.pixels[i].abs_diff(self.pixels[j]);
                (i, j, -(quantize(d, self.maxval, top) as i64))
            })
            .collect();
        Ok(IsingGraph::with_edges(n, r, edges)?)
    }
}

/// Linear map of `0..=maxval` onto `0..=top`, rounding half up.
pub fn quantize(d: u32, maxval: u32, top: u64) -> u64 {
    if maxval == 0 {
        return 0;
    }
    let m = maxval as u64;
    (2 * d as u64 * top + m) / (2 * m)
}

/// Total coupling magnitude of a max-cut graph.
pub fn total_weight(graph: &IsingGraph) -> i64 {
    graph.edges().iter().map(|e| -e.weight).sum()
}

/// Weight of edges whose endpoints carry different labels.
pub fn cut_value(graph: &IsingGraph, spins: &[Spin]) -> i64 {
    graph
        .edges()
        .iter()
        .filter(|e| spins[e.i] != spins[e.j])
        .map(|e| -e.weight)
        .sum()
}

/// `cut = (W - H) / 2` for graphs built by [`ImageSegmentation::to_ising`].
pub fn cut_from_hamiltonian(graph: &IsingGraph, h: i64) -> i64 {
    (total_weight(graph) - h) / 2
}
