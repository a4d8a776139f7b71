//! High-frequency domains of normalised frequency matrices.

use serde::Serialize;

use super::{classify_gate, GateKind, PairSet};
use crate::fhn::InputPair;
use crate::ingest::{ConductiveGrid, RgbImage};
use crate::observe::FrequencyMatrix;

/// Domains are nodes with normalised frequency strictly above this.
pub const DEFAULT_DOMAIN_THRESHOLD: f64 = 0.72;

/// Overlay colours for the pairs 01, 10 and 11.
pub const DOMAIN_COLOURS: [[u8; 3]; 3] = [[0, 0, 0], [255, 0, 0], [0, 160, 0]];
const NETWORK_GREY: [u8; 3] = [200, 200, 200];

/// A 4-connected component of super-threshold nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyDomain {
    pub inputs: InputPair,
    /// Row-major sorted.
    pub nodes: Vec<(usize, usize)>,
    pub centroid: (f64, f64),
}

impl FrequencyDomain {
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.nodes
            .binary_search_by_key(&(y, x), |&(nx, ny)| (ny, nx))
            .is_ok()
    }
}

/// Components of `{s : ω_s > threshold}`, ordered by their first node in
/// row-major order.
pub fn extract_domains(freq: &FrequencyMatrix, threshold: f64) -> Vec<FrequencyDomain> {
    let (w, h) = (freq.width(), freq.height());
    let hot: Vec<bool> = freq.values().iter().map(|&v| v > threshold).collect();
    let mut seen = vec![false; w * h];
    let mut domains = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !hot[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut nodes = Vec::new();
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            nodes.push((x, y));
            let mut visit = |j: usize| {
                if hot[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        nodes.sort_by_key(|&(x, y)| (y, x));
        let n = nodes.len() as f64;
        let cx = nodes.iter().map(|&(x, _)| x as f64).sum::<f64>() / n;
        let cy = nodes.iter().map(|&(_, y)| y as f64).sum::<f64>() / n;
        domains.push(FrequencyDomain {
            inputs: freq.inputs,
            nodes,
            centroid: (cx, cy),
        });
    }
    domains
}

/// For each node, the set of input pairs with a domain covering it.
/// Row-major over a `width × height` grid.
pub fn domain_membership(
    width: usize,
    height: usize,
    domains: [&[FrequencyDomain]; 3],
) -> Vec<PairSet> {
    let mut out = vec![PairSet::EMPTY; width * height];
    for (k, list) in domains.iter().enumerate() {
        let pair = InputPair::GATE_PAIRS[k];
        for d in list.iter() {
            for &(x, y) in &d.nodes {
                if x < width && y < height {
                    out[y * width + x] = out[y * width + x].with(pair);
                }
            }
        }
    }
    out
}

/// Nodes whose domain membership across (01, 10, 11) is exactly the truth
/// vector of `target`, row-major.
pub fn frequency_gate_sites(
    domains01: &[FrequencyDomain],
    domains10: &[FrequencyDomain],
    domains11: &[FrequencyDomain],
    target: GateKind,
) -> Vec<(usize, usize)> {
    let all = [domains01, domains10, domains11];
    let width = all
        .iter()
        .flat_map(|l| l.iter())
        .flat_map(|d| d.nodes.iter())
        .map(|&(x, _)| x + 1)
        .max()
        .unwrap_or(0);
    let height = all
        .iter()
        .flat_map(|l| l.iter())
        .flat_map(|d| d.nodes.iter())
        .map(|&(_, y)| y + 1)
        .max()
        .unwrap_or(0);
    domain_membership(width, height, all)
        .into_iter()
        .enumerate()
        .filter(|(_, s)| classify_gate(*s) == Ok(target))
        .map(|(i, _)| (i % width, i / width))
        .collect()
}

/// Domains drawn over the network: pair 01 black, 10 red, 11 green; nodes
/// in several pairs' domains get the mean colour. Other conductive nodes are
/// grey and the background white.
pub fn domain_overlay(grid: &ConductiveGrid, domains: [&[FrequencyDomain]; 3]) -> RgbImage {
    let membership = domain_membership(grid.width(), grid.height(), domains);
    let mut img = RgbImage::filled(grid.width(), grid.height(), [255, 255, 255]);
    for (x, y) in grid.conductive_nodes() {
        img.set_pixel(x, y, NETWORK_GREY);
    }
    for (i, set) in membership.iter().enumerate() {
        if set.is_empty() {
            continue;
        }
        let mut sum = [0u32; 3];
        let mut n = 0u32;
        for (k, pair) in InputPair::GATE_PAIRS.into_iter().enumerate() {
            if set.contains(pair) {
                for c in 0..3 {
                    sum[c] += u32::from(DOMAIN_COLOURS[k][c]);
                }
                n += 1;
            }
        }
        img.set_pixel(
            i % grid.width(),
            i / grid.width(),
            sum.map(|s| (s / n) as u8),
        );
    }
    img
}
