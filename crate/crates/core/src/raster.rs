//! Minimal software rasterizer for render commands.
//!
//! This is a reference implementation for checking composited output (pixel
//! coverage at pixel centers, straight alpha blending). It is not meant to
//! look good.

use crate::geometry::Point;
use crate::overlay::{ColorRole, Layer, Primitive, RenderCommand};

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Rgb>,
}

impl Image {
    pub fn filled(width: u32, height: u32, color: Rgb) -> Self {
        Self {
            width,
            height,
            pixels: vec![color; (width * height) as usize],
        }
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        self.pixels[(y * self.width + x) as usize]
    }
}

pub fn palette(c: ColorRole) -> Rgb {
    match c {
        ColorRole::Shade => [0, 0, 0],
        ColorRole::White => [255, 255, 255],
        ColorRole::Green => [40, 200, 80],
        ColorRole::Gold => [230, 180, 40],
        ColorRole::Sequential(t) => {
            let t = t.clamp(0.0, 1.0);
            let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
            [lerp(255.0, 200.0), lerp(245.0, 40.0), lerp(200.0, 20.0)]
        }
        ColorRole::Defense => [60, 120, 230],
        ColorRole::Link => [240, 240, 240],
        ColorRole::Glow => [255, 230, 120],
    }
}

fn blend(dst: &mut Rgb, src: Rgb, alpha: f64) {
    let a = alpha.clamp(0.0, 1.0);
    for i in 0..3 {
        dst[i] = (dst[i] as f64 * (1.0 - a) + src[i] as f64 * a).round() as u8;
    }
}

struct Canvas<'a> {
    img: Image,
    source: &'a Image,
    mask: &'a [bool],
}

impl Canvas<'_> {
    /// Visit pixels whose centers fall in `[x0,x1] x [y0,y1]` and satisfy `inside`.
    #[allow(clippy::too_many_arguments)]
    fn paint(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, color: Rgb, alpha: f64, inside: impl Fn(Point, usize) -> bool) {
        let (w, h) = (self.img.width as i64, self.img.height as i64);
        let lo = |v: f64, max: i64| ((v - 0.5).floor() as i64).clamp(0, max);
        let hi = |v: f64, max: i64| ((v - 0.5).ceil() as i64).clamp(-1, max - 1);
        for y in lo(y0, h)..=hi(y1, h) {
            for x in lo(x0, w)..=hi(x1, w) {
                let idx = (y * w + x) as usize;
                if inside(Point::new(x as f64 + 0.5, y as f64 + 0.5), idx) {
                    blend(&mut self.img.pixels[idx], color, alpha);
                }
            }
        }
    }

    fn draw(&mut self, c: &RenderCommand) {
        let color = palette(c.style.color);
        let alpha = c.style.opacity;
        let (w, h) = (self.img.width as f64, self.img.height as f64);
        let mask = self.mask;
        match &c.primitive {
            Primitive::BackgroundDarken => self.paint(0.0, 0.0, w, h, color, alpha, |_, i| !mask[i]),
            Primitive::AudienceDarken { center, radius } => {
                self.paint(0.0, 0.0, w, h, color, alpha, |p, i| !mask[i] && p.distance(*center) > *radius)
            }
            Primitive::Spotlight { anchor, radius_x, radius_y } => {
                let (a, rx, ry) = (*anchor, *radius_x, *radius_y);
                self.paint(a.x - rx, a.y - ry, a.x + rx, a.y + ry, color, alpha, |p, _| {
                    rx > 0.0 && ry > 0.0 && ((p.x - a.x) / rx).powi(2) + ((p.y - a.y) / ry).powi(2) <= 1.0
                })
            }
            Primitive::Highlight { bbox } | Primitive::Glow { bbox, .. } => {
                let alpha = match &c.primitive {
                    Primitive::Glow { strength, .. } => alpha * strength,
                    _ => alpha,
                };
                let inner = bbox.expand(-3.0);
                self.paint(bbox.x, bbox.y, bbox.x + bbox.w, bbox.y + bbox.h, color, alpha, |p, _| {
                    bbox.contains(p) && !inner.contains(p)
                })
            }
            Primitive::OffenseRing(r) => {
                let (a, o) = (r.anchor, r.outer_radius + 1.0);
                self.paint(a.x - o, a.y - o, a.x + o, a.y + o, color, alpha, |p, _| {
                    let d = p.distance(a);
                    (d >= r.inner_radius && d <= r.value_radius) || (d - r.outer_radius).abs() <= 1.0
                })
            }
            Primitive::DefenseShield(s) => {
                let (a, o) = (s.anchor, s.radius + s.thickness);
                let cos_min = (s.arc_fraction * std::f64::consts::PI).cos();
                self.paint(a.x - o, a.y - o, a.x + o, a.y + o, color, alpha, |p, _| {
                    let d = p.distance(a);
                    if s.thickness <= 0.0 || s.arc_fraction <= 0.0 || d < s.radius || d > o || d == 0.0 {
                        return false;
                    }
                    let cos = ((p.x - a.x) * s.direction.x + (p.y - a.y) * s.direction.y) / d;
                    cos >= cos_min
                })
            }
            Primitive::Link { from, to, width } => {
                let (f, t, r) = (*from, *to, width / 2.0);
                self.paint(f.x.min(t.x) - r, f.y.min(t.y) - r, f.x.max(t.x) + r, f.y.max(t.y) + r, color, alpha, |p, _| {
                    segment_distance(p, f, t) <= r
                })
            }
            Primitive::ForegroundRestore => {
                for (i, m) in self.mask.iter().enumerate() {
                    if *m {
                        self.img.pixels[i] = self.source.pixels[i];
                    }
                }
            }
            Primitive::NameLabel { anchor, text, .. } => {
                let half = 4.0 * text.chars().count() as f64;
                let a = *anchor;
                self.paint(a.x - half, a.y - 14.0, a.x + half, a.y, color, alpha, |_, _| true)
            }
        }
    }
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(Point::new(a.x + t * dx, a.y + t * dy))
}

/// Draw every command up to and including layer `through` over `source`.
/// `mask` is the frame's row-major foreground mask.
pub fn rasterize(source: &Image, mask: &[bool], commands: &[RenderCommand], through: Layer) -> Image {
    assert_eq!(mask.len(), source.pixels.len(), "mask size must match the frame");
    let mut canvas = Canvas {
        img: source.clone(),
        source,
        mask,
    };
    let mut ordered: Vec<&RenderCommand> = commands.iter().filter(|c| c.layer <= through).collect();
    ordered.sort_by_key(|c| c.layer);
    for c in ordered {
        canvas.draw(c);
    }
    canvas.img
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::overlay::{RingSpec, Style};

    fn cmd(layer: Layer, primitive: Primitive) -> RenderCommand {
        RenderCommand {
            layer,
            player: None,
            primitive,
            style: Style {
                color: ColorRole::White,
                opacity: 1.0,
                ease: 1.0,
            },
        }
    }

    #[test]
    fn darken_spares_foreground() {
        let src = Image::filled(4, 1, [100, 100, 100]);
        let mask = [true, false, false, true];
        let mut c = cmd(Layer::BackgroundDarken, Primitive::BackgroundDarken);
        c.style.color = ColorRole::Shade;
        c.style.opacity = 0.5;
        let out = rasterize(&src, &mask, &[c], Layer::Label);
        assert_eq!(out.pixels, vec![[100; 3], [50; 3], [50; 3], [100; 3]]);
    }

    #[test]
    fn restore_undoes_court_overlay() {
        let src = Image::filled(20, 20, [10, 20, 30]);
        let mut mask = vec![false; 400];
        mask[10 * 20 + 10] = true;
        let ring = RingSpec {
            anchor: Point::new(10.0, 10.0),
            epv: 3.0,
            inner_radius: 0.0,
            outer_radius: 8.0,
            value_radius: 8.0,
            color_position: 1.0,
        };
        let cmds = [
            cmd(Layer::CourtOverlay, Primitive::OffenseRing(ring)),
            cmd(Layer::ForegroundRestore, Primitive::ForegroundRestore),
        ];
        let before = rasterize(&src, &mask, &cmds, Layer::CourtOverlay);
        assert_ne!(before.get(10, 10), [10, 20, 30]);
        let after = rasterize(&src, &mask, &cmds, Layer::ForegroundRestore);
        assert_eq!(after.get(10, 10), [10, 20, 30]);
        assert_ne!(after.get(12, 10), [10, 20, 30]);
    }

    #[test]
    fn off_canvas_shapes_are_clipped() {
        let src = Image::filled(5, 5, [0; 3]);
        let c = cmd(
            Layer::CourtOverlay,
            Primitive::Spotlight {
                anchor: Point::new(-100.0, 500.0),
                radius_x: 40.0,
                radius_y: 10.0,
            },
        );
        assert_eq!(rasterize(&src, &[false; 25], &[c], Layer::Label), src);
    }
}
