use crate::corpus::Document;

/// Responsibility mass of one topic binned onto a regular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatMap {
    pub class: usize,
    pub cell_size: u32,
    pub cols: usize,
    pub rows: usize,
    /// Image size the grid covers.
    pub width: f64,
    pub height: f64,
    /// Row-major, `rows × cols`.
    pub grid: Vec<f64>,
}

impl HeatMap {
    pub fn zeros(class: usize, width: u32, height: u32, cell_size: u32) -> Self {
        assert!(cell_size > 0, "cell size must be positive");
        let cols = width.div_ceil(cell_size) as usize;
        let rows = height.div_ceil(cell_size) as usize;
        Self {
            class,
            cell_size,
            cols,
            rows,
            width: width as f64,
            height: height as f64,
            grid: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn at(&self, col: usize, row: usize) -> f64 {
        self.grid[row * self.cols + col]
    }

    /// Grid cell containing a location; the far image edges fall into the
    /// last cell.
    pub fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        let s = self.cell_size as f64;
        let col = ((x / s).floor().max(0.0) as usize).min(self.cols - 1);
        let row = ((y / s).floor().max(0.0) as usize).min(self.rows - 1);
        (col, row)
    }

    /// Cell rectangle clipped to the image.
    pub fn cell_rect(&self, col: usize, row: usize) -> (f64, f64, f64, f64) {
        let s = self.cell_size as f64;
        (
            col as f64 * s,
            row as f64 * s,
            ((col + 1) as f64 * s).min(self.width),
            ((row + 1) as f64 * s).min(self.height),
        )
    }

    pub fn cell_center(&self, col: usize, row: usize) -> (f64, f64) {
        let (x0, y0, x1, y1) = self.cell_rect(col, row);
        (0.5 * (x0 + x1), 0.5 * (y0 + y1))
    }

    pub fn total(&self) -> f64 {
        self.grid.iter().sum()
    }

    /// Adds `weights[i]` at the cell of observation `i`.
    pub fn deposit(&mut self, doc: &Document, weights: &[f64]) {
        for (o, &w) in doc.observations.iter().zip(weights) {
            let (c, r) = self.cell_of(o.x, o.y);
            self.grid[r * self.cols + c] += w;
        }
    }

    /// 3×3 box filter that spreads each cell evenly over its in-bounds
    /// neighbours, so total mass is preserved.
    pub fn smoothed(&self) -> HeatMap {
        let mut out = self.clone();
        out.grid.fill(0.0);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.at(c, r);
                if v == 0.0 {
                    continue;
                }
                let (r0, r1) = (r.saturating_sub(1), (r + 1).min(self.rows - 1));
                let (c0, c1) = (c.saturating_sub(1), (c + 1).min(self.cols - 1));
                let share = v / ((r1 - r0 + 1) * (c1 - c0 + 1)) as f64;
                for rr in r0..=r1 {
                    for cc in c0..=c1 {
                        out.grid[rr * self.cols + cc] += share;
                    }
                }
            }
        }
        out
    }

    /// Cells whose value is positive and not below any of the 8 neighbours.
    pub fn local_maxima(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.at(c, r);
                if v <= 0.0 {
                    continue;
                }
                let mut is_max = true;
                'n: for rr in r.saturating_sub(1)..=(r + 1).min(self.rows - 1) {
                    for cc in c.saturating_sub(1)..=(c + 1).min(self.cols - 1) {
                        if self.at(cc, rr) > v {
                            is_max = false;
                            break 'n;
                        }
                    }
                }
                if is_max {
                    out.push((c, r));
                }
            }
        }
        out
    }

    /// Heat inside a rectangle, splitting cells by overlap area.
    pub fn mass_in(&self, x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
        let s = self.cell_size as f64;
        let c0 = ((x0 / s).floor().max(0.0) as usize).min(self.cols - 1);
        let c1 = ((x1 / s).ceil().max(1.0) as usize).min(self.cols);
        let r0 = ((y0 / s).floor().max(0.0) as usize).min(self.rows - 1);
        let r1 = ((y1 / s).ceil().max(1.0) as usize).min(self.rows);
        let mut total = 0.0;
        for r in r0..r1 {
            for c in c0..c1 {
                let v = self.at(c, r);
                if v == 0.0 {
                    continue;
                }
                let (cx0, cy0, cx1, cy1) = self.cell_rect(c, r);
                let w = (x1.min(cx1) - x0.max(cx0)).max(0.0);
                let h = (y1.min(cy1) - y0.max(cy0)).max(0.0);
                let area = (cx1 - cx0) * (cy1 - cy0);
                if area > 0.0 {
                    total += v * w * h / area;
                }
            }
        }
        total
    }

    /// Binary PGM (P5), max-normalised to 0..=255.
    pub fn to_pgm(&self) -> Vec<u8> {
        let max = self.grid.iter().copied().fold(0.0f64, f64::max);
        let mut out = format!("P5\n{} {}\n255\n", self.cols, self.rows).into_bytes();
        out.extend(self.grid.iter().map(|&v| {
            if max > 0.0 {
                (v / max * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        }));
        out
    }
}

/// Heat map of one topic: responsibilities binned by location, then
/// smoothed.
pub fn build_heatmap(doc: &Document, resp_column: &[f64], class: usize, cell_size: u32) -> HeatMap {
    let mut hm = HeatMap::zeros(class, doc.width, doc.height, cell_size);
    hm.deposit(doc, resp_column);
    hm.smoothed()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Labels, Observation};

    fn doc(obs: Vec<Observation>) -> Document {
        Document {
            id: "d".into(),
            width: 23,
            height: 12,
            labels: Labels::Unlabelled,
            observations: obs,
        }
    }

    #[test]
    fn dimensions_round_up() {
        let hm = HeatMap::zeros(0, 23, 12, 5);
        assert_eq!((hm.cols, hm.rows), (5, 3));
    }

    #[test]
    fn binning() {
        let d = doc(vec![Observation::new(0, 12.0, 7.0)]);
        let mut hm = HeatMap::zeros(0, 23, 12, 5);
        hm.deposit(&d, &[1.0]);
        assert_eq!(hm.at(2, 1), 1.0);
        assert_eq!(hm.total(), 1.0);
    }

    #[test]
    fn far_edge_goes_to_last_cell() {
        let d = doc(vec![Observation::new(0, 23.0, 12.0)]);
        let mut hm = HeatMap::zeros(0, 23, 12, 5);
        hm.deposit(&d, &[0.5]);
        assert_eq!(hm.at(4, 2), 0.5);
    }

    #[test]
    fn deposit_conserves_mass() {
        let obs: Vec<_> = (0..7)
            .map(|i| Observation::new(0, 3.0 * i as f64, 1.5 * i as f64))
            .collect();
        let w: Vec<f64> = (0..7).map(|i| 0.1 * i as f64).collect();
        let mut hm = HeatMap::zeros(0, 23, 12, 5);
        hm.deposit(&doc(obs), &w);
        assert!((hm.total() - w.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn pgm_header_and_scaling() {
        let mut hm = HeatMap::zeros(0, 10, 5, 5);
        hm.grid = vec![0.5, 1.0];
        let pgm = hm.to_pgm();
        assert!(pgm.starts_with(b"P5\n2 1\n255\n"));
        assert_eq!(&pgm[pgm.len() - 2..], [128, 255]);
    }

    #[test]
    fn mass_in_splits_cells() {
        let mut hm = HeatMap::zeros(0, 10, 10, 5);
        hm.grid = vec![4.0, 0.0, 0.0, 0.0];
        assert!((hm.mass_in(0.0, 0.0, 2.5, 5.0) - 2.0).abs() < 1e-12);
        assert!((hm.mass_in(0.0, 0.0, 10.0, 10.0) - 4.0).abs() < 1e-12);
    }
}
