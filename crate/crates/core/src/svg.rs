//! Minimal SVG output: polylines, markers, circles and text in complex-plane
//! coordinates, plus marching-squares isolines on a sampled grid.

use std::fmt::Write as _;

use crate::matrix::C64;

/// Axis-aligned box in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Bounds {
    pub fn around<'a>(points: impl IntoIterator<Item = &'a C64>) -> Option<Bounds> {
        let mut it = points.into_iter().filter(|p| p.re.is_finite() && p.im.is_finite());
        let first = it.next()?;
        let mut b = Bounds { re_min: first.re, re_max: first.re, im_min: first.im, im_max: first.im };
        for p in it {
            b.re_min = b.re_min.min(p.re);
            b.re_max = b.re_max.max(p.re);
            b.im_min = b.im_min.min(p.im);
            b.im_max = b.im_max.max(p.im);
        }
        Some(b)
    }

    /// Grown by `fraction` of the larger side on every edge.
    pub fn padded(self, fraction: f64) -> Bounds {
        let pad = fraction * (self.re_max - self.re_min).max(self.im_max - self.im_min).max(1e-12);
        Bounds {
            re_min: self.re_min - pad,
            re_max: self.re_max + pad,
            im_min: self.im_min - pad,
            im_max: self.im_max + pad,
        }
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }
}

pub struct Plot {
    bounds: Bounds,
    width_px: f64,
    height_px: f64,
    body: String,
}

impl Plot {
    /// Keeps the aspect ratio of `bounds`; the longer side gets `size_px`.
    pub fn new(bounds: Bounds, size_px: f64) -> Plot {
        let scale = size_px / bounds.width().max(bounds.height());
        Plot { bounds, width_px: bounds.width() * scale, height_px: bounds.height() * scale, body: String::new() }
    }

    fn map(&self, z: C64) -> (f64, f64) {
        let x = (z.re - self.bounds.re_min) / self.bounds.width() * self.width_px;
        let y = (self.bounds.im_max - z.im) / self.bounds.height() * self.height_px;
        (x, y)
    }

    pub fn polyline(&mut self, points: &[C64], stroke: &str, width: f64, dash: Option<&str>) {
        if points.len() < 2 {
            return;
        }
        let mut coords = String::new();
        for &p in points {
            let (x, y) = self.map(p);
            let _ = write!(coords, "{x:.3},{y:.3} ");
        }
        let dash = dash.map(|d| format!(" stroke-dasharray=\"{d}\"")).unwrap_or_default();
        let _ = writeln!(
            self.body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"{dash}/>",
            coords.trim_end()
        );
    }

    /// Many segments as one path element.
    pub fn segments(&mut self, segs: &[(C64, C64)], stroke: &str, width: f64) {
        if segs.is_empty() {
            return;
        }
        let mut d = String::new();
        for &(a, b) in segs {
            let (x1, y1) = self.map(a);
            let (x2, y2) = self.map(b);
            let _ = write!(d, "M{x1:.2},{y1:.2}L{x2:.2},{y2:.2}");
        }
        let _ = writeln!(self.body, "<path d=\"{d}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>");
    }

    /// Circle of radius `r` in plane units.
    pub fn circle(&mut self, center: C64, r: f64, stroke: &str, width: f64) {
        let (x, y) = self.map(center);
        let rp = r / self.bounds.width() * self.width_px;
        let _ = writeln!(
            self.body,
            "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{rp:.3}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>"
        );
    }

    /// A small × at each point.
    pub fn crosses(&mut self, points: &[C64], stroke: &str) {
        for &p in points {
            let (x, y) = self.map(p);
            let _ = writeln!(
                self.body,
                "<path d=\"M{:.3},{:.3}L{:.3},{:.3}M{:.3},{:.3}L{:.3},{:.3}\" stroke=\"{stroke}\" stroke-width=\"1\"/>",
                x - 3.0,
                y - 3.0,
                x + 3.0,
                y + 3.0,
                x - 3.0,
                y + 3.0,
                x + 3.0,
                y - 3.0
            );
        }
    }

    pub fn dots(&mut self, points: &[C64], fill: &str) {
        for &p in points {
            let (x, y) = self.map(p);
            let _ = writeln!(self.body, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"1.5\" fill=\"{fill}\"/>");
        }
    }

    pub fn label(&mut self, at: C64, text: &str) {
        let (x, y) = self.map(at);
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.3}\" y=\"{y:.3}\" font-size=\"11\" font-family=\"sans-serif\">{text}</text>"
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.3} {h:.3}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width_px,
            h = self.height_px
        )
    }
}

/// Values on a uniform grid over `bounds`; `values[j * nx + i]` sits at
/// re = re_min + i·Δx, im = im_min + j·Δy.
#[derive(Debug, Clone)]
pub struct Grid {
    pub bounds: Bounds,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn point(&self, i: usize, j: usize) -> C64 {
        C64::new(
            self.bounds.re_min + self.bounds.width() * i as f64 / (self.nx - 1) as f64,
            self.bounds.im_min + self.bounds.height() * j as f64 / (self.ny - 1) as f64,
        )
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    /// Marching-squares segments of the level set {value = level}. Cells
    /// with a non-finite corner are skipped.
    pub fn isoline(&self, level: f64) -> Vec<(C64, C64)> {
        let mut out = Vec::new();
        for j in 0..self.ny.saturating_sub(1) {
            for i in 0..self.nx.saturating_sub(1) {
                let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                let v: Vec<f64> = corners.iter().map(|&(a, b)| self.at(a, b)).collect();
                if v.iter().any(|x| !x.is_finite()) {
                    continue;
                }
                let mut crossings = Vec::with_capacity(4);
                for e in 0..4 {
                    let (p, q) = (e, (e + 1) % 4);
                    if (v[p] < level) != (v[q] < level) {
                        let t = (level - v[p]) / (v[q] - v[p]);
                        let zp = self.point(corners[p].0, corners[p].1);
                        let zq = self.point(corners[q].0, corners[q].1);
                        crossings.push(zp + (zq - zp) * t);
                    }
                }
                match crossings.len() {
                    2 => out.push((crossings[0], crossings[1])),
                    // Saddle: pair edges by the cell-centre value.
                    4 => {
                        let centre = v.iter().sum::<f64>() / 4.0;
                        if (centre < level) == (v[0] < level) {
                            out.push((crossings[0], crossings[3]));
                            out.push((crossings[1], crossings[2]));
                        } else {
                            out.push((crossings[0], crossings[1]));
                            out.push((crossings[2], crossings[3]));
                        }
                    }
                    _ => {}
                }
            }
        }
        out
    }

    /// CSV with header `re,im,value`, rows in grid order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,value\n");
        for j in 0..self.ny {
            for i in 0..self.nx {
                let z = self.point(i, j);
                let _ = writeln!(out, "{:.17e},{:.17e},{:.17e}", z.re, z.im, self.at(i, j));
            }
        }
        out
    }
}

/// Stroke colour for the k-th of `count` contour levels (blue to red).
pub fn level_colour(k: usize, count: usize) -> String {
    let t = if count <= 1 { 0.0 } else { k as f64 / (count - 1) as f64 };
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    format!("#{r:02x}40{b:02x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isoline_of_a_cone_is_a_circle() {
        let bounds = Bounds { re_min: -1.0, re_max: 1.0, im_min: -1.0, im_max: 1.0 };
        let n = 81;
        let mut grid = Grid { bounds, nx: n, ny: n, values: vec![0.0; n * n] };
        for j in 0..n {
            for i in 0..n {
                grid.values[j * n + i] = grid.point(i, j).norm();
            }
        }
        let segs = grid.isoline(0.5);
        assert!(!segs.is_empty());
        for (a, b) in segs {
            assert!((a.norm() - 0.5).abs() < 1e-2 && (b.norm() - 0.5).abs() < 1e-2);
        }
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let mut plot = Plot::new(Bounds { re_min: 0.0, re_max: 2.0, im_min: 0.0, im_max: 1.0 }, 400.0);
        plot.polyline(&[C64::new(0.0, 0.0), C64::new(2.0, 1.0)], "black", 1.0, None);
        let svg = plot.finish();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("points=\"0.000,200.000 400.000,0.000\""));
    }
}
