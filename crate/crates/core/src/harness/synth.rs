use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{polygon_diou, Point, Polygon};
use crate::instance::{PredictionSet, TextInstance};
use crate::text::{Alphabet, CharConfidences, Transcription};

/// Vocabulary drawn on for ground-truth words.
pub const WORDS: &[&str] = &[
    "STOP", "EXIT", "OPEN", "Coffee", "PHARMACY", "HOTEL", "Bakery", "PARKING", "Station",
    "MARKET", "Tea", "BANK", "ENTRANCE", "Garden", "SALE", "Books", "CENTRAL", "Pizza", "NORTH",
    "street", "LIBRARY", "Museum", "TAXI", "Hospital", "POLICE", "Bus", "kitchen", "THEATRE",
    "Fresh", "SCHOOL", "Avenue", "CAFE", "Dental", "Pub", "FLOWERS", "Gallery", "RIVER",
    "studio", "OFFICE", "Airport", "WELCOME", "Salon", "MOTEL", "Burger", "GOLD", "Harbour",
];

const CORRUPTION_GAIN: f64 = 12.0;
const IMAGE_WIDTH: u32 = 1280;
const IMAGE_HEIGHT: u32 = 960;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_instances: usize,
    pub k_points: usize,
    /// Standard deviation of the polygon shift, normalized units.
    pub jitter_sigma: f64,
    /// Base per-character corruption probability. The realized rate grows
    /// with the instance's deviation from ground truth.
    pub char_error_rate: f64,
    pub score_noise: f64,
    /// Attach slot distributions to student instances.
    pub emit_dists: bool,
    pub max_len: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_instances: 8,
            k_points: 8,
            jitter_sigma: 0.01,
            char_error_rate: 0.05,
            score_noise: 0.05,
            emit_dists: false,
            max_len: 25,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_points < 3 {
            return Err(Error::Config("k_points must be >= 3".into()));
        }
        if !(0.0..=1.0).contains(&self.char_error_rate) {
            return Err(Error::Config("char_error_rate must lie in [0, 1]".into()));
        }
        if !(self.jitter_sigma >= 0.0 && self.jitter_sigma.is_finite()) {
            return Err(Error::Config("jitter_sigma must be finite and >= 0".into()));
        }
        if !(self.score_noise >= 0.0 && self.score_noise.is_finite()) {
            return Err(Error::Config("score_noise must be finite and >= 0".into()));
        }
        if self.max_len == 0 {
            return Err(Error::Config("max_len must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub gt: PredictionSet,
    pub teacher: PredictionSet,
    pub student: PredictionSet,
}

/// One scene from `cfg.seed`.
pub fn synth_scene(cfg: &SynthConfig) -> Result<Scene> {
    synth_image(cfg, 0, "synth_0000".to_string())
}

/// `n_images` scenes; image `i` draws from stream `i` of the seeded generator.
pub fn synth_scenes(cfg: &SynthConfig, n_images: usize) -> Result<Vec<Scene>> {
    (0..n_images)
        .map(|i| synth_image(cfg, i as u64, format!("synth_{i:04}")))
        .collect()
}

fn synth_image(cfg: &SynthConfig, stream: u64, image_id: String) -> Result<Scene> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let alphabet = Alphabet::latin();

    let gt_polys = layout(&mut rng, cfg.n_instances, cfg.k_points);
    let mut gt = Vec::with_capacity(cfg.n_instances);
    let mut teacher = Vec::with_capacity(cfg.n_instances);
    let mut student = Vec::with_capacity(cfg.n_instances);
    for poly in gt_polys {
        let word = Transcription::from(WORDS[rng.random_range(0..WORDS.len())]);
        let t_inst = perturb(&mut rng, cfg, &poly, &word, None)?;
        let s_inst = perturb(&mut rng, cfg, &poly, &word, cfg.emit_dists.then_some(&alphabet))?;
        let conf = CharConfidences::new(vec![1.0; word.len()])?;
        gt.push(TextInstance::new(poly, 1.0, word, conf, None)?);
        teacher.push(t_inst);
        student.push(s_inst);
    }
    let set = |instances| {
        PredictionSet::new(image_id.clone(), IMAGE_WIDTH, IMAGE_HEIGHT).with_instances(instances)
    };
    Ok(Scene {
        gt: set(gt),
        teacher: set(teacher),
        student: set(student),
    })
}

/// Non-overlapping curved text polygons, one per grid cell.
fn layout(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Polygon> {
    if n == 0 {
        return Vec::new();
    }
    let side = (n as f64).sqrt().ceil() as usize;
    let cell = 1.0 / side as f64;
    let mut cells: Vec<usize> = (0..side * side).collect();
    // partial shuffle for the first n cells
    for i in 0..n {
        let j = rng.random_range(i..cells.len());
        cells.swap(i, j);
    }
    cells[..n]
        .iter()
        .map(|&c| {
            let (cx0, cy0) = ((c % side) as f64 * cell, (c / side) as f64 * cell);
            let w = cell * rng.random_range(0.55..0.8);
            let h = cell * rng.random_range(0.18..0.3);
            let x0 = cx0 + rng.random_range(0.05 * cell..(0.95 * cell - w));
            let y0 = cy0 + rng.random_range(0.3 * cell..(0.95 * cell - 1.4 * h));
            let bend = rng.random_range(-0.4..0.4) * h;
            text_polygon(x0, y0, w, h, bend, k)
        })
        .collect()
}

fn text_polygon(x0: f64, y0: f64, w: f64, h: f64, bend: f64, k: usize) -> Polygon {
    let top: Vec<Point> = (0..k)
        .map(|i| {
            let u = i as f64 / (k - 1) as f64;
            let v = 2.0 * u - 1.0;
            Point::new(x0 + u * w, y0 + bend * v * v)
        })
        .collect();
    let mut pts = top.clone();
    pts.extend(top.iter().rev().map(|p| Point::new(p.x, p.y + h)));
    Polygon::new(pts).expect("layout points are finite")
}

fn perturb(
    rng: &mut ChaCha8Rng,
    cfg: &SynthConfig,
    gt_poly: &Polygon,
    word: &Transcription,
    dist_alphabet: Option<&Alphabet>,
) -> Result<TextInstance> {
    let sigma = cfg.jitter_sigma;
    let poly = if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).expect("sigma is finite");
        let (dx, dy) = (normal.sample(rng), normal.sample(rng));
        let k = gt_poly.len() / 2;
        let pts = gt_poly.points();
        let height = pts[0].distance(pts[2 * k - 1]);
        let spacing = pts[0].distance(pts[1]).min(height);
        let cap = 0.2 * spacing;
        let local = Normal::new(0.0, 0.25 * sigma).expect("sigma is finite");
        let moved = pts
            .iter()
            .map(|p| {
                let ex = local.sample(rng).clamp(-cap, cap);
                let ey = local.sample(rng).clamp(-cap, cap);
                Point::new(
                    (p.x + dx + ex).clamp(0.0, 1.0),
                    (p.y + dy + ey).clamp(0.0, 1.0),
                )
            })
            .collect();
        Polygon::new(moved)?
    } else {
        gt_poly.clone()
    };

    let deviation = (1.0 - polygon_diou(gt_poly, &poly)?).max(0.0);
    let p_err = (cfg.char_error_rate * (1.0 + CORRUPTION_GAIN * deviation)).min(1.0);
    let noise = |rng: &mut ChaCha8Rng| -> f64 {
        if cfg.score_noise > 0.0 {
            Normal::new(0.0, cfg.score_noise)
                .expect("noise is finite")
                .sample(rng)
        } else {
            0.0
        }
    };

    let mut chars = Vec::with_capacity(word.len() + 2);
    let mut confs = Vec::with_capacity(word.len() + 2);
    let base = 1.0 - 0.5 * deviation.min(1.0);
    for &c in word.chars() {
        if p_err > 0.0 && rng.random_bool(p_err) {
            let op = rng.random_range(0..20);
            let wrong_conf = (0.45 * base - noise(rng).abs()).clamp(0.0, 1.0);
            if op < 14 {
                chars.push(random_letter(rng, c));
                confs.push(wrong_conf);
            } else if op < 17 {
                // deletion
            } else {
                chars.push(c);
                confs.push((base - noise(rng).abs()).clamp(0.0, 1.0));
                chars.push(random_letter(rng, c));
                confs.push(wrong_conf);
            }
        } else {
            chars.push(c);
            confs.push((base - noise(rng).abs()).clamp(0.0, 1.0));
        }
    }
    chars.truncate(cfg.max_len);
    confs.truncate(cfg.max_len);
    let score = (base + noise(rng)).clamp(0.0, 1.0);

    let dists = dist_alphabet.map(|alphabet| slot_distributions(alphabet, &chars, &confs, cfg.max_len));
    TextInstance::new(
        poly,
        score,
        Transcription::new(chars),
        CharConfidences::new(confs)?,
        dists,
    )
}

fn random_letter(rng: &mut ChaCha8Rng, not: char) -> char {
    loop {
        let c = if rng.random_bool(0.5) {
            rng.random_range(b'A'..=b'Z')
        } else {
            rng.random_range(b'a'..=b'z')
        } as char;
        if c != not {
            return c;
        }
    }
}

/// Rows put the character's confidence on its class and spread the rest evenly.
fn slot_distributions(alphabet: &Alphabet, chars: &[char], confs: &[f64], max_len: usize) -> Vec<Vec<f64>> {
    let classes = alphabet.classes();
    let pad_conf = if confs.is_empty() {
        1.0
    } else {
        confs.iter().sum::<f64>() / confs.len() as f64
    };
    (0..max_len)
        .map(|slot| {
            let (target, p) = match chars.get(slot) {
                Some(&c) => (
                    alphabet.index_of(c).expect("synthetic letters are in the alphabet"),
                    confs[slot],
                ),
                None => (alphabet.pad_index(), pad_conf),
            };
            let rest = (1.0 - p) / (classes - 1) as f64;
            let mut row = vec![rest; classes];
            row[target] = p;
            row
        })
        .collect()
}
