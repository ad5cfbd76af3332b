use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{PageImage, RandomSeed, RasterError};
use crate::geometry::{Affine2, Point2, Projective2};

/// Fill value for pixels that resampling pulls from outside the page.
pub const BACKGROUND: u8 = 255;

#[inline]
fn round_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn check(
    name: &'static str,
    value: f64,
    ok: bool,
    reason: &'static str,
) -> Result<(), RasterError> {
    if ok {
        Ok(())
    } else {
        Err(RasterError::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}

/// Bilinear sample at continuous position `(x, y)`; neighbors outside the
/// frame read as background.
fn sample_bilinear(img: &PageImage, x: f64, y: f64, out: &mut [u8]) {
    // shift so integer coordinates land on pixel centers
    let sx = x - 0.5;
    let sy = y - 0.5;
    let x0 = sx.floor();
    let y0 = sy.floor();
    let fx = sx - x0;
    let fy = sy - y0;
    let (w, h) = (img.width() as i64, img.height() as i64);
    let (x0, y0) = (x0 as i64, y0 as i64);
    let n = img.channels().count();
    let taps = [
        (x0, y0, (1.0 - fx) * (1.0 - fy)),
        (x0 + 1, y0, fx * (1.0 - fy)),
        (x0, y0 + 1, (1.0 - fx) * fy),
        (x0 + 1, y0 + 1, fx * fy),
    ];
    for c in 0..n {
        let mut acc = 0.0;
        for &(tx, ty, wt) in &taps {
            if wt == 0.0 {
                continue;
            }
            let v = if tx >= 0 && ty >= 0 && tx < w && ty < h {
                img.pixel(tx as u32, ty as u32)[c] as f64
            } else {
                BACKGROUND as f64
            };
            acc += wt * v;
        }
        out[c] = round_u8(acc);
    }
}

/// Builds an output image of the same size by pulling every output pixel
/// center back through `inverse`. `None` from `inverse` means background.
fn resample<F>(img: &PageImage, inverse: F) -> PageImage
where
    F: Fn(Point2<f64>) -> Option<Point2<f64>>,
{
    let n = img.channels().count();
    let mut data = vec![BACKGROUND; img.data().len()];
    let width = img.width() as usize;
    for (i, row) in data.chunks_mut(width * n).enumerate() {
        for (j, px) in row.chunks_mut(n).enumerate() {
            let q = Point2::new(j as f64 + 0.5, i as f64 + 0.5);
            if let Some(p) = inverse(q) {
                sample_bilinear(img, p.x, p.y, px);
            }
        }
    }
    PageImage::new(img.width(), img.height(), img.channels(), data)
        .expect("same geometry as the input")
}

/// Rotates the page about its center, keeping the canvas size. Returns the
/// forward transform so boxes can follow the pixels.
pub fn rotate_affine(
    img: &PageImage,
    degrees: f64,
) -> Result<(PageImage, Affine2<f64>), RasterError> {
    check("degrees", degrees, degrees.is_finite(), "must be finite")?;
    let center = Point2::new(img.width() as f64 / 2.0, img.height() as f64 / 2.0);
    let forward = Affine2::rotation_about(center, degrees);
    let inverse = forward.inverse()?;
    let out = resample(img, |q| Some(inverse.apply(q)));
    Ok((out, forward))
}

pub fn additive_gaussian_noise(
    img: &PageImage,
    mean: f64,
    stddev: f64,
    seed: RandomSeed,
) -> Result<PageImage, RasterError> {
    check("noise_mean", mean, mean.is_finite(), "must be finite")?;
    check(
        "noise_stddev",
        stddev,
        stddev.is_finite() && stddev >= 0.0,
        "must be finite and non-negative",
    )?;
    let data: Vec<u8> = if stddev == 0.0 {
        img.data()
            .iter()
            .map(|&v| round_u8(v as f64 + mean))
            .collect()
    } else {
        let normal = Normal::new(mean, stddev).expect("parameters validated");
        let mut rng = seed.rng();
        img.data()
            .iter()
            .map(|&v| round_u8(v as f64 + normal.sample(&mut rng)))
            .collect()
    };
    PageImage::new(img.width(), img.height(), img.channels(), data)
}

/// Replaces each pixel (all channels together) with black or white, each
/// with probability `p / 2`.
pub fn salt_and_pepper(
    img: &PageImage,
    p: f64,
    seed: RandomSeed,
) -> Result<PageImage, RasterError> {
    check(
        "sp_probability",
        p,
        (0.0..=1.0).contains(&p),
        "must lie in [0, 1]",
    )?;
    let mut out = img.clone();
    if p == 0.0 {
        return Ok(out);
    }
    let mut rng = seed.rng();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if rng.random::<f64>() < p {
                let v = if rng.random::<bool>() { 255 } else { 0 };
                out.set_pixel(x, y, v);
            }
        }
    }
    Ok(out)
}

/// Normalized 1-D Gaussian weights for offsets `-r..=r`, `r = ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= sum);
    k
}

/// Separable Gaussian blur with clamp-to-edge borders.
pub fn gaussian_blur(img: &PageImage, sigma: f64) -> Result<PageImage, RasterError> {
    check(
        "blur_sigma",
        sigma,
        sigma.is_finite() && sigma >= 0.0,
        "must be finite and non-negative",
    )?;
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let kernel = gaussian_kernel(sigma);
    let r = (kernel.len() / 2) as i64;
    let (w, h) = (img.width() as i64, img.height() as i64);
    let n = img.channels().count();
    let src = img.data();
    let idx = |x: i64, y: i64, c: usize| (y as usize * w as usize + x as usize) * n + c;

    let mut horizontal = vec![0.0f64; src.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..n {
                let mut acc = 0.0;
                for (k, wt) in kernel.iter().enumerate() {
                    let sx = (x + k as i64 - r).clamp(0, w - 1);
                    acc += wt * src[idx(sx, y, c)] as f64;
                }
                horizontal[idx(x, y, c)] = acc;
            }
        }
    }
    let mut data = vec![0u8; src.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..n {
                let mut acc = 0.0;
                for (k, wt) in kernel.iter().enumerate() {
                    let sy = (y + k as i64 - r).clamp(0, h - 1);
                    acc += wt * horizontal[idx(x, sy, c)];
                }
                data[idx(x, y, c)] = round_u8(acc);
            }
        }
    }
    PageImage::new(img.width(), img.height(), img.channels(), data)
}

/// `v -> 127 + alpha (v - 127)`, clamped then truncated to 8 bits.
pub fn linear_contrast(img: &PageImage, alpha: f64) -> Result<PageImage, RasterError> {
    check(
        "contrast_alpha",
        alpha,
        alpha.is_finite() && alpha >= 0.0,
        "must be finite and non-negative",
    )?;
    const PIVOT: f64 = 127.0;
    let mut lut = [0u8; 256];
    for (v, slot) in lut.iter_mut().enumerate() {
        *slot = (PIVOT + alpha * (v as f64 - PIVOT)).clamp(0.0, 255.0) as u8;
    }
    let data = img.data().iter().map(|&v| lut[v as usize]).collect();
    PageImage::new(img.width(), img.height(), img.channels(), data)
}

fn frame_corners(img: &PageImage) -> [Point2<f64>; 4] {
    let (w, h) = (img.width() as f64, img.height() as f64);
    [
        Point2::new(0.0, 0.0),
        Point2::new(w, 0.0),
        Point2::new(w, h),
        Point2::new(0.0, h),
    ]
}

fn is_strictly_convex(q: &[Point2<f64>; 4]) -> bool {
    let mut sign = 0.0;
    for i in 0..4 {
        let (a, b, c) = (q[i], q[(i + 1) % 4], q[(i + 2) % 4]);
        let cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
        if cross == 0.0 || !cross.is_finite() {
            return false;
        }
        if sign == 0.0 {
            sign = cross.signum();
        } else if cross.signum() != sign {
            return false;
        }
    }
    true
}

/// Corners of the page (top-left, top-right, bottom-right, bottom-left),
/// each pulled inward by independent uniform offsets of up to
/// `fraction * width` horizontally and `fraction * height` vertically.
pub fn jittered_quad(
    width: u32,
    height: u32,
    fraction: f64,
    seed: RandomSeed,
) -> Result<[Point2<f64>; 4], RasterError> {
    check(
        "perspective_jitter_fraction",
        fraction,
        (0.0..=0.25).contains(&fraction),
        "must lie in [0, 0.25]",
    )?;
    let (w, h) = (width as f64, height as f64);
    let mut rng = seed.rng();
    let mut draw = |limit: f64| {
        if limit > 0.0 {
            rng.random_range(0.0..=limit)
        } else {
            0.0
        }
    };
    let mut offsets = [(0.0, 0.0); 4];
    for o in offsets.iter_mut() {
        *o = (draw(fraction * w), draw(fraction * h));
    }
    Ok([
        Point2::new(offsets[0].0, offsets[0].1),
        Point2::new(w - offsets[1].0, offsets[1].1),
        Point2::new(w - offsets[2].0, h - offsets[2].1),
        Point2::new(offsets[3].0, h - offsets[3].1),
    ])
}

/// Warps the page rectangle onto `target` (corners in top-left, top-right,
/// bottom-right, bottom-left order) with bilinear resampling and white
/// fill. Returns the forward homography.
pub fn perspective_warp(
    img: &PageImage,
    target: &[Point2<f64>; 4],
) -> Result<(PageImage, Projective2<f64>), RasterError> {
    if !target.iter().all(Point2::is_finite) || !is_strictly_convex(target) {
        return Err(RasterError::NonConvexQuad);
    }
    let source = frame_corners(img);
    if *target == source {
        return Ok((img.clone(), Projective2::identity()));
    }
    let forward = Projective2::from_correspondences(&source, target)?;
    let inverse = forward.inverse()?;
    let out = resample(img, |q| {
        let (p, w) = inverse.apply_homogeneous(q);
        (w > 1e-12 && p.is_finite()).then_some(p)
    });
    Ok((out, forward))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointTransform;
    use crate::raster::Channels;

    fn gray(w: u32, h: u32, v: u8) -> PageImage {
        PageImage::filled(w, h, Channels::Gray, v).unwrap()
    }

    fn textured(w: u32, h: u32) -> PageImage {
        let data = (0..w * h)
            .map(|i| ((i * 37 + (i / w) * 11) % 256) as u8)
            .collect();
        PageImage::new(w, h, Channels::Gray, data).unwrap()
    }

    fn argmin(img: &PageImage) -> (u32, u32) {
        let mut best = (0, 0, f64::MAX);
        for y in 0..img.height() {
            for x in 0..img.width() {
                let v = img.intensity(x, y);
                if v < best.2 {
                    best = (x, y, v);
                }
            }
        }
        (best.0, best.1)
    }

    #[test]
    fn rotation_by_zero_is_exact_identity() {
        let img = textured(31, 23);
        let (out, t) = rotate_affine(&img, 0.0).unwrap();
        assert_eq!(out, img);
        assert_eq!(t, Affine2::identity());
    }

    #[test]
    fn full_turn_within_resampling_tolerance() {
        let img = textured(40, 30);
        let (out, _) = rotate_affine(&img, 360.0).unwrap();
        let max = img
            .data()
            .iter()
            .zip(out.data())
            .map(|(&a, &b)| (a as i32 - b as i32).abs())
            .max()
            .unwrap();
        assert!(max <= 2, "max diff {max}");
    }

    #[test]
    fn rotation_keeps_center_pixel_fixed() {
        let mut img = gray(21, 21, 255);
        img.set_pixel(10, 10, 0);
        let (out, _) = rotate_affine(&img, 45.0).unwrap();
        assert_eq!(argmin(&out), (10, 10));
    }

    #[test]
    fn rotation_marker_lands_where_transform_says() {
        let mut img = gray(120, 90, 255);
        img.fill_rect(14, 9, 17, 12, 0); // marker centered at (15.5, 10.5)
        let (out, t) = rotate_affine(&img, 7.0).unwrap();
        let expected = t.apply(Point2::new(15.5, 10.5));
        let (x, y) = argmin(&out);
        let got = Point2::new(x as f64 + 0.5, y as f64 + 0.5);
        assert!(got.distance(&expected) <= 1.5, "{got:?} vs {expected:?}");
    }

    #[test]
    fn noise_zero_stddev_is_identity_and_rejects_negative() {
        let img = textured(16, 16);
        assert_eq!(
            additive_gaussian_noise(&img, 0.0, 0.0, RandomSeed(1)).unwrap(),
            img
        );
        assert!(additive_gaussian_noise(&img, 0.0, -1.0, RandomSeed(1)).is_err());
    }

    #[test]
    fn noise_is_seed_deterministic() {
        let img = textured(32, 32);
        let a = additive_gaussian_noise(&img, 0.0, 10.0, RandomSeed(9)).unwrap();
        let b = additive_gaussian_noise(&img, 0.0, 10.0, RandomSeed(9)).unwrap();
        let c = additive_gaussian_noise(&img, 0.0, 10.0, RandomSeed(10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn noise_sample_mean_concentrates() {
        let img = gray(256, 256, 128);
        let out = additive_gaussian_noise(&img, 0.0, 10.0, RandomSeed(3)).unwrap();
        let mean = out.data().iter().map(|&v| v as f64).sum::<f64>() / out.data().len() as f64;
        assert!((126.0..=130.0).contains(&mean), "mean {mean}");
        assert_ne!(out, img);
    }

    #[test]
    fn salt_and_pepper_bounds() {
        let img = textured(20, 20);
        assert_eq!(salt_and_pepper(&img, 0.0, RandomSeed(1)).unwrap(), img);
        let all = salt_and_pepper(&img, 1.0, RandomSeed(1)).unwrap();
        assert!(all.data().iter().all(|&v| v == 0 || v == 255));
        assert!(salt_and_pepper(&img, 1.5, RandomSeed(1)).is_err());
        assert!(salt_and_pepper(&img, -0.1, RandomSeed(1)).is_err());
    }

    #[test]
    fn salt_and_pepper_fraction_concentrates() {
        let img = gray(1000, 1000, 128);
        let out = salt_and_pepper(&img, 0.1, RandomSeed(5)).unwrap();
        let altered = out.data().iter().filter(|&&v| v != 128).count() as f64 / 1e6;
        assert!((0.095..=0.105).contains(&altered), "fraction {altered}");
    }

    #[test]
    fn salt_and_pepper_rgb_replaces_whole_pixels() {
        let img = PageImage::filled(30, 30, Channels::Rgb, 100).unwrap();
        let out = salt_and_pepper(&img, 0.5, RandomSeed(2)).unwrap();
        for px in out.data().chunks(3) {
            assert!(px == [100, 100, 100] || px == [0, 0, 0] || px == [255, 255, 255]);
        }
    }

    #[test]
    fn blur_zero_sigma_and_constant_image() {
        let img = textured(15, 12);
        assert_eq!(gaussian_blur(&img, 0.0).unwrap(), img);
        let flat = gray(15, 12, 77);
        assert_eq!(gaussian_blur(&flat, 2.3).unwrap(), flat);
    }

    #[test]
    fn blur_impulse_response_matches_direct_kernel() {
        // oracle: evaluate exp(-d^2 / (2 sigma^2)) for d in -2..=2 by hand
        let raw: Vec<f64> = [-2.0f64, -1.0, 0.0, 1.0, 2.0]
            .iter()
            .map(|d| (-d * d / (2.0 * 0.25)).exp())
            .collect();
        let w0 = raw[2] / raw.iter().sum::<f64>();
        assert!((w0 - 0.786_570).abs() < 1e-6);
        let mut img = gray(9, 9, 0);
        img.set_pixel(4, 4, 255);
        let out = gaussian_blur(&img, 0.5).unwrap();
        // separable kernel: the 2-D center weight is w0 squared
        let expected = (255.0 * w0 * w0).round() as u8;
        assert_eq!(expected, 158);
        assert_eq!(out.pixel(4, 4)[0], expected);
        assert_eq!(gaussian_kernel(0.5).len(), 5);
    }

    #[test]
    fn blur_preserves_interior_mean() {
        let img = textured(200, 200);
        let out = gaussian_blur(&img, 1.5).unwrap();
        let mean = |im: &PageImage| {
            let mut s = 0.0;
            for y in 20..180 {
                for x in 20..180 {
                    s += im.intensity(x, y);
                }
            }
            s / (160.0 * 160.0)
        };
        assert!((mean(&img) - mean(&out)).abs() <= 1.0);
    }

    #[test]
    fn linear_contrast_examples() {
        let img = textured(16, 16);
        assert_eq!(linear_contrast(&img, 1.0).unwrap(), img);
        assert!(linear_contrast(&img, 0.0)
            .unwrap()
            .data()
            .iter()
            .all(|&v| v == 127));
        let px = gray(1, 1, 200);
        // 127 + 1.5 * 73 = 236.5, truncated
        assert_eq!(linear_contrast(&px, 1.5).unwrap().pixel(0, 0)[0], 236);
        assert_eq!(
            linear_contrast(&gray(1, 1, 250), 3.0).unwrap().pixel(0, 0)[0],
            255
        );
        assert_eq!(
            linear_contrast(&gray(1, 1, 5), 3.0).unwrap().pixel(0, 0)[0],
            0
        );
    }

    #[test]
    fn perspective_zero_jitter_is_identity() {
        let img = textured(50, 40);
        let quad = jittered_quad(50, 40, 0.0, RandomSeed(4)).unwrap();
        let (out, h) = perspective_warp(&img, &quad).unwrap();
        assert_eq!(out, img);
        assert_eq!(h, Projective2::identity());
    }

    #[test]
    fn perspective_is_seed_deterministic() {
        let img = textured(60, 60);
        let q1 = jittered_quad(60, 60, 0.05, RandomSeed(8)).unwrap();
        let q2 = jittered_quad(60, 60, 0.05, RandomSeed(8)).unwrap();
        assert_eq!(q1, q2);
        assert_eq!(
            perspective_warp(&img, &q1).unwrap(),
            perspective_warp(&img, &q2).unwrap()
        );
    }

    #[test]
    fn perspective_top_left_corner_example() {
        let img = gray(100, 100, 200);
        let target = [
            Point2::new(10.0, 10.0),
            Point2::new(100.0, 0.0),
            Point2::new(100.0, 100.0),
            Point2::new(0.0, 100.0),
        ];
        let (_, h) = perspective_warp(&img, &target).unwrap();
        let p = h.map_point(Point2::new(0.0, 0.0)).unwrap();
        assert!(p.distance(&Point2::new(10.0, 10.0)) < 1e-9);
    }

    #[test]
    fn perspective_rejects_non_convex_quads() {
        let img = gray(100, 100, 200);
        let bowtie = [
            Point2::new(0.0, 0.0),
            Point2::new(100.0, 100.0),
            Point2::new(100.0, 0.0),
            Point2::new(0.0, 100.0),
        ];
        assert!(matches!(
            perspective_warp(&img, &bowtie),
            Err(RasterError::NonConvexQuad)
        ));
        let dart = [
            Point2::new(0.0, 0.0),
            Point2::new(100.0, 0.0),
            Point2::new(20.0, 20.0),
            Point2::new(0.0, 100.0),
        ];
        assert!(matches!(
            perspective_warp(&img, &dart),
            Err(RasterError::NonConvexQuad)
        ));
        assert!(jittered_quad(100, 100, 0.4, RandomSeed(0)).is_err());
    }

    #[test]
    fn perspective_marker_lands_where_transform_says() {
        let mut img = gray(100, 80, 255);
        img.fill_rect(79, 59, 82, 62, 0); // marker centered at (80.5, 60.5)
        let quad = jittered_quad(100, 80, 0.05, RandomSeed(21)).unwrap();
        let (out, h) = perspective_warp(&img, &quad).unwrap();
        let expected = h.map_point(Point2::new(80.5, 60.5)).unwrap();
        let (x, y) = argmin(&out);
        let got = Point2::new(x as f64 + 0.5, y as f64 + 0.5);
        assert!(got.distance(&expected) <= 1.5, "{got:?} vs {expected:?}");
    }

    #[test]
    fn outputs_stay_in_range_for_extreme_noise() {
        let img = textured(32, 32);
        // clamping is implied by u8, but large draws must saturate, not wrap
        let out = additive_gaussian_noise(&img, 0.0, 500.0, RandomSeed(1)).unwrap();
        let saturated = out.data().iter().filter(|&&v| v == 0 || v == 255).count();
        assert!(saturated > out.data().len() / 2);
    }
}
