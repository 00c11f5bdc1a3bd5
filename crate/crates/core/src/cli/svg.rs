//! Minimal SVG emission for isoline plots and XY charts. No plotting
//! dependency: a fixed 800x800 viewport with linear axes.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::pseudospectrum::Window;

pub const VIEW: f64 = 800.0;
const MARGIN: f64 = 60.0;

/// Fixed palette for level curves, cycled by index.
pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f",
];

pub struct SvgCanvas {
    window: Window,
    body: String,
}

impl SvgCanvas {
    pub fn new(window: Window) -> Self {
        Self { window, body: String::new() }
    }

    fn x(&self, re: f64) -> f64 {
        MARGIN + (re - self.window.re_min) / self.window.width() * (VIEW - 2.0 * MARGIN)
    }

    fn y(&self, im: f64) -> f64 {
        // SVG y grows downward.
        VIEW - MARGIN - (im - self.window.im_min) / self.window.height() * (VIEW - 2.0 * MARGIN)
    }

    pub fn add_axes(&mut self) {
        let _ = writeln!(
            self.body,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333" stroke-width="1"/>"##,
            MARGIN,
            MARGIN,
            VIEW - 2.0 * MARGIN,
            VIEW - 2.0 * MARGIN
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let re = self.window.re_min + f * self.window.width();
            let im = self.window.im_min + f * self.window.height();
            let xp = self.x(re);
            let yp = self.y(im);
            let _ = writeln!(
                self.body,
                r##"<line x1="{xp}" y1="{}" x2="{xp}" y2="{}" stroke="#333" stroke-width="1"/>"##,
                VIEW - MARGIN,
                VIEW - MARGIN + 6.0
            );
            let _ = writeln!(
                self.body,
                r##"<text x="{xp}" y="{}" font-size="12" text-anchor="middle">{:.3}</text>"##,
                VIEW - MARGIN + 20.0,
                re
            );
            let _ = writeln!(
                self.body,
                r##"<line x1="{}" y1="{yp}" x2="{}" y2="{yp}" stroke="#333" stroke-width="1"/>"##,
                MARGIN - 6.0,
                MARGIN
            );
            let _ = writeln!(
                self.body,
                r##"<text x="{}" y="{yp}" font-size="12" text-anchor="end">{:.3}</text>"##,
                MARGIN - 10.0,
                im
            );
        }
        let _ = writeln!(
            self.body,
            r##"<text x="{}" y="{}" font-size="13" text-anchor="middle">Re</text>"##,
            VIEW / 2.0,
            VIEW - 12.0
        );
        let _ = writeln!(
            self.body,
            r##"<text x="16" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">Im</text>"##,
            VIEW / 2.0,
            VIEW / 2.0
        );
    }

    pub fn add_polyline(&mut self, points: &[Complex64], color: &str, width: f64, closed: bool) {
        if points.len() < 2 {
            return;
        }
        let mut d = String::new();
        for (i, p) in points.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{cmd}{:.3} {:.3} ", self.x(p.re), self.y(p.im));
        }
        if closed {
            d.push('Z');
        }
        let _ = writeln!(
            self.body,
            r##"<path d="{d}" fill="none" stroke="{color}" stroke-width="{width}"/>"##
        );
    }

    /// Circle in data units (drawn as an ellipse since the axes may scale
    /// differently).
    pub fn add_circle(&mut self, center: Complex64, radius: f64, color: &str, dashed: bool) {
        if radius <= 0.0 {
            return;
        }
        let rx = radius / self.window.width() * (VIEW - 2.0 * MARGIN);
        let ry = radius / self.window.height() * (VIEW - 2.0 * MARGIN);
        let dash = if dashed { r##" stroke-dasharray="8 6""## } else { "" };
        let _ = writeln!(
            self.body,
            r##"<ellipse cx="{:.3}" cy="{:.3}" rx="{rx:.3}" ry="{ry:.3}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"##,
            self.x(center.re),
            self.y(center.im)
        );
    }

    pub fn add_polygon(&mut self, points: &[Complex64], color: &str, dashed: bool) {
        if points.len() < 2 {
            return;
        }
        let mut d = String::new();
        for (i, p) in points.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{cmd}{:.3} {:.3} ", self.x(p.re), self.y(p.im));
        }
        d.push('Z');
        let dash = if dashed { r##" stroke-dasharray="8 6""## } else { "" };
        let _ = writeln!(
            self.body,
            r##"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"##
        );
    }

    pub fn add_label(&mut self, text: &str, slot: usize, color: &str) {
        let _ = writeln!(
            self.body,
            r##"<text x="{}" y="{}" font-size="12" fill="{color}">{text}</text>"##,
            MARGIN + 8.0,
            MARGIN + 16.0 + 16.0 * slot as f64
        );
    }

    pub fn finish(self, title: &str) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{VIEW}\" height=\"{VIEW}\" viewBox=\"0 0 {VIEW} {VIEW}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
             <text x=\"{}\" y=\"28\" font-size=\"15\" text-anchor=\"middle\">{title}</text>\n{}\
             </svg>\n",
            VIEW / 2.0,
            self.body
        )
    }
}

/// Simple XY line chart with one polyline per labelled series.
pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(String, Vec<(f64, f64)>)],
) -> String {
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for (_, pts) in series {
        for &(x, y) in pts {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    if !x_min.is_finite() || x_min == x_max {
        x_min -= 1.0;
        x_max += 1.0;
    }
    if !y_min.is_finite() || y_min == y_max {
        y_min -= 1.0;
        y_max += 1.0;
    }
    let pad_x = 0.05 * (x_max - x_min);
    let pad_y = 0.05 * (y_max - y_min);
    let window = Window::new(x_min - pad_x, x_max + pad_x, y_min - pad_y, y_max + pad_y)
        .expect("chart window is nondegenerate by construction");
    let mut canvas = SvgCanvas::new(window);
    canvas.add_axes();
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let zs: Vec<Complex64> = pts.iter().map(|&(x, y)| Complex64::new(x, y)).collect();
        canvas.add_polyline(&zs, color, 2.0, false);
        canvas.add_label(label, i, color);
    }
    canvas.add_label(&format!("x: {x_label}"), series.len(), "#333");
    canvas.add_label(&format!("y: {y_label}"), series.len() + 1, "#333");
    canvas.finish(title)
}
