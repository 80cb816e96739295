use rayon::prelude::*;

use super::project::{project_splat, Projected2D};
use crate::image::Image;
use crate::scene::{Camera, Splat};

/// Per-pixel opacity clamp; keeps `1 / (1 - alpha)` finite.
pub const ALPHA_MAX: f64 = 0.999;
/// Contributions below this opacity are skipped.
pub const ALPHA_MIN: f64 = 1.0 / 255.0;
/// Compositing stops before a splat that would push transmittance below this.
pub const T_TERMINATE: f64 = 1e-4;
/// Beyond this transmittance no single removal (at most a `1 / (1 - ALPHA_MAX)`
/// renormalization) can bring a splat back above [`T_TERMINATE`].
pub const T_RECORD_FLOOR: f64 = T_TERMINATE * (1.0 - ALPHA_MAX);

const TILE: u32 = 16;

/// One splat's participation in a pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contribution {
    pub splat_id: u32,
    /// Clamped per-pixel opacity, in `[ALPHA_MIN, ALPHA_MAX]`.
    pub alpha: f64,
    /// Transmittance in front of this splat.
    pub transmittance: f64,
    pub color: [f64; 3],
}

impl Contribution {
    #[inline]
    pub fn weight(&self) -> f64 {
        self.transmittance * self.alpha
    }

    #[inline]
    fn transmittance_after(&self) -> f64 {
        self.transmittance * (1.0 - self.alpha)
    }
}

/// Ordered contributions of one pixel.
///
/// The first `active` entries are composited. The remainder are splats past
/// early termination, kept so that the effect of removing an active splat is
/// exact even when the removal moves the termination point.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelRecord {
    pub contributions: Vec<Contribution>,
    pub active: usize,
}

impl PixelRecord {
    /// `P_0 ..= P_len` where `P_i` is the color after the first `i` entries.
    pub fn partial_colors(&self) -> Vec<[f64; 3]> {
        let mut prefix = Vec::new();
        partial_colors_into(&self.contributions, &mut prefix);
        prefix
    }

    /// Composited color `P_K`.
    pub fn color(&self) -> [f64; 3] {
        self.partial_colors()[self.active]
    }

    /// Transmittance left after the composited splats.
    pub fn final_transmittance(&self) -> f64 {
        match self.contributions.get(self.active) {
            Some(c) => c.transmittance,
            None => self
                .contributions
                .last()
                .map_or(1.0, Contribution::transmittance_after),
        }
    }

    /// Change in this pixel's color if `splat_id` were deleted.
    pub fn prune_difference(&self, splat_id: u32) -> [f64; 3] {
        let reach = (self.active + 1).min(self.contributions.len());
        let rank = self.contributions[..reach]
            .iter()
            .position(|c| c.splat_id == splat_id);
        match rank {
            Some(rank) => prune_difference(&self.contributions, &self.partial_colors(), self.active, rank),
            None => [0.0; 3],
        }
    }
}

pub(crate) fn partial_colors_into(contributions: &[Contribution], prefix: &mut Vec<[f64; 3]>) {
    prefix.clear();
    prefix.reserve(contributions.len() + 1);
    let mut acc = [0.0; 3];
    prefix.push(acc);
    for c in contributions {
        let w = c.weight();
        for ch in 0..3 {
            acc[ch] += w * c.color[ch];
        }
        prefix.push(acc);
    }
}

/// Pruning difference for the contribution at `rank`:
/// `P_i - P_{i+1} / (1 - a_i) + a_i P_K / (1 - a_i)`, extended past early
/// termination when the removal lets later splats through. `rank == active`
/// is the splat that stopped compositing; it adds nothing itself, but
/// removing it can still let the splats behind it through.
pub(crate) fn prune_difference(
    contributions: &[Contribution],
    prefix: &[[f64; 3]],
    active: usize,
    rank: usize,
) -> [f64; 3] {
    debug_assert!(rank <= active && rank < contributions.len());
    let alpha = contributions[rank].alpha;
    let renorm = 1.0 / (1.0 - alpha);
    let threshold = T_TERMINATE * (1.0 - alpha);
    let mut end = active.max(rank + 1);
    while end < contributions.len() && contributions[end].transmittance_after() >= threshold {
        end += 1;
    }
    let (p_i, p_next, p_end, p_k) = (prefix[rank], prefix[rank + 1], prefix[end], prefix[active]);
    std::array::from_fn(|ch| p_i[ch] + (p_end[ch] - p_next[ch]) * renorm - p_k[ch])
}

/// Splats of one scene projected and binned for one camera.
pub struct Frame<'a> {
    pub camera: &'a Camera,
    /// Depth-sorted (ties by splat index).
    pub projected: Vec<Projected2D>,
    bounds: Vec<(u32, u32, u32, u32)>,
    tiles: Vec<Vec<u32>>,
    tiles_x: u32,
}

impl<'a> Frame<'a> {
    pub fn new(splats: &[Splat], camera: &'a Camera) -> Frame<'a> {
        let mut projected: Vec<Projected2D> = splats
            .par_iter()
            .enumerate()
            .filter_map(|(i, s)| project_splat(s, i as u32, camera))
            .collect();
        projected.sort_by(|a, b| {
            a.view_depth
                .total_cmp(&b.view_depth)
                .then(a.splat_id.cmp(&b.splat_id))
        });

        let (w, h) = (camera.width, camera.height);
        let tiles_x = w.div_ceil(TILE);
        let tiles_y = h.div_ceil(TILE);
        let mut tiles = vec![Vec::new(); (tiles_x * tiles_y) as usize];
        let mut bounds = Vec::with_capacity(projected.len());
        let mut kept = Vec::with_capacity(projected.len());
        for p in projected {
            let Some(b) = p.pixel_bounds(w, h) else { continue };
            let idx = kept.len() as u32;
            for ty in b.1 / TILE..=b.3 / TILE {
                for tx in b.0 / TILE..=b.2 / TILE {
                    tiles[(ty * tiles_x + tx) as usize].push(idx);
                }
            }
            bounds.push(b);
            kept.push(p);
        }

        Frame {
            camera,
            projected: kept,
            bounds,
            tiles,
            tiles_x,
        }
    }

    /// Fill `out` with the pixel's ordered contributions and return the
    /// number of composited (active) entries.
    pub fn composite(&self, x: u32, y: u32, out: &mut Vec<Contribution>) -> usize {
        out.clear();
        let tile = &self.tiles[((y / TILE) * self.tiles_x + x / TILE) as usize];
        let mut t = 1.0;
        let mut active = None;
        for &idx in tile {
            let (x0, y0, x1, y1) = self.bounds[idx as usize];
            if x < x0 || x > x1 || y < y0 || y > y1 {
                continue;
            }
            let p = &self.projected[idx as usize];
            let alpha = p.alpha_at(x, y).min(ALPHA_MAX);
            if alpha < ALPHA_MIN {
                continue;
            }
            let next = t * (1.0 - alpha);
            if active.is_none() && next < T_TERMINATE {
                active = Some(out.len());
            }
            out.push(Contribution {
                splat_id: p.splat_id,
                alpha,
                transmittance: t,
                color: p.color,
            });
            t = next;
            if next < T_RECORD_FLOOR {
                break;
            }
        }
        active.unwrap_or(out.len())
    }

    pub fn record(&self, x: u32, y: u32) -> PixelRecord {
        let mut contributions = Vec::new();
        let active = self.composite(x, y, &mut contributions);
        PixelRecord {
            contributions,
            active,
        }
    }
}

/// Front-to-back composite over a black background.
pub fn render(splats: &[Splat], camera: &Camera) -> Image {
    let frame = Frame::new(splats, camera);
    let w = camera.width as usize;
    let mut image = Image::black(camera.width, camera.height);
    image
        .pixels
        .par_chunks_mut(w)
        .enumerate()
        .for_each_init(
            || (Vec::new(), Vec::new()),
            |(contribs, prefix), (y, row)| {
                for (x, px) in row.iter_mut().enumerate() {
                    let active = frame.composite(x as u32, y as u32, contribs);
                    partial_colors_into(&contribs[..active], prefix);
                    *px = prefix[active];
                }
            },
        );
    image
}

pub fn render_all(splats: &[Splat], cameras: &[Camera]) -> Vec<Image> {
    cameras.iter().map(|c| render(splats, c)).collect()
}

/// Render one camera and keep every pixel's contribution record
/// (row-major). Returns the image and per-splat `I_k(s)` for this camera.
pub fn render_with_records(splats: &[Splat], camera: &Camera) -> (Image, Vec<PixelRecord>, Vec<f64>) {
    let frame = Frame::new(splats, camera);
    let mut image = Image::black(camera.width, camera.height);
    let mut records = Vec::with_capacity(camera.pixel_count());
    let mut importance = vec![0.0; splats.len()];
    for y in 0..camera.height {
        for x in 0..camera.width {
            let record = frame.record(x, y);
            for c in &record.contributions[..record.active] {
                importance[c.splat_id as usize] += c.weight();
            }
            image.pixels[y as usize * camera.width as usize + x as usize] = record.color();
            records.push(record);
        }
    }
    let p = camera.pixel_count() as f64;
    importance.iter_mut().for_each(|v| *v /= p);
    (image, records, importance)
}
