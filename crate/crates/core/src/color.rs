//! sRGB to CIE XYZ / L*u*v* / L*a*b* and HSV conversions (D65 white).

#[allow(unused_imports)]
use num_traits::Float;

const WHITE_X: f64 = 0.95047;
const WHITE_Y: f64 = 1.0;
const WHITE_Z: f64 = 1.08883;
const EPSILON: f64 = 216.0 / 24389.0;
const KAPPA: f64 = 24389.0 / 27.0;

fn srgb_to_linear(c: u8) -> f64 {
    let c = c as f64 / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

pub fn rgb_to_xyz(rgb: [u8; 3]) -> [f64; 3] {
    let r = srgb_to_linear(rgb[0]);
    let g = srgb_to_linear(rgb[1]);
    let b = srgb_to_linear(rgb[2]);
    [
        0.4124564 * r + 0.3575761 * g + 0.1804375 * b,
        0.2126729 * r + 0.7151522 * g + 0.0721750 * b,
        0.0193339 * r + 0.1191920 * g + 0.9503041 * b,
    ]
}

fn lightness(yr: f64) -> f64 {
    if yr > EPSILON {
        116.0 * yr.cbrt() - 16.0
    } else {
        KAPPA * yr
    }
}

/// CIE L*u*v*. L in [0, 100], u roughly [-84, 176], v roughly [-135, 108] for sRGB.
pub fn rgb_to_luv(rgb: [u8; 3]) -> [f64; 3] {
    let [x, y, z] = rgb_to_xyz(rgb);
    let l = lightness(y / WHITE_Y);
    let denom = x + 15.0 * y + 3.0 * z;
    if denom <= 0.0 {
        return [0.0, 0.0, 0.0];
    }
    let white_denom = WHITE_X + 15.0 * WHITE_Y + 3.0 * WHITE_Z;
    let un = 4.0 * WHITE_X / white_denom;
    let vn = 9.0 * WHITE_Y / white_denom;
    let up = 4.0 * x / denom;
    let vp = 9.0 * y / denom;
    [l, 13.0 * l * (up - un), 13.0 * l * (vp - vn)]
}

/// CIE L*a*b*.
pub fn rgb_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let [x, y, z] = rgb_to_xyz(rgb);
    let f = |t: f64| {
        if t > EPSILON {
            t.cbrt()
        } else {
            (KAPPA * t + 16.0) / 116.0
        }
    };
    let fx = f(x / WHITE_X);
    let fy = f(y / WHITE_Y);
    let fz = f(z / WHITE_Z);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// CIE76 colour difference.
pub fn delta_e76(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// HSV with hue in degrees [0, 360) and s, v in [0, 1].
pub fn rgb_to_hsv(rgb: [u8; 3]) -> [f64; 3] {
    let r = rgb[0] as f64 / 255.0;
    let g = rgb[1] as f64 / 255.0;
    let b = rgb[2] as f64 / 255.0;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let hue = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * (((g - b) / delta) % 6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    let hue = if hue < 0.0 { hue + 360.0 } else { hue };
    let sat = if max == 0.0 { 0.0 } else { delta / max };
    [hue, sat, max]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_and_black_luv() {
        let w = rgb_to_luv([255, 255, 255]);
        assert!((w[0] - 100.0).abs() < 1e-3 && w[1].abs() < 1e-2 && w[2].abs() < 1e-2);
        assert_eq!(rgb_to_luv([0, 0, 0]), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn red_lab_reference() {
        // Reference value for sRGB red under D65.
        let lab = rgb_to_lab([255, 0, 0]);
        assert!((lab[0] - 53.24).abs() < 0.05);
        assert!((lab[1] - 80.09).abs() < 0.1);
        assert!((lab[2] - 67.20).abs() < 0.1);
    }

    #[test]
    fn hsv_primaries() {
        assert_eq!(rgb_to_hsv([0, 255, 0]), [120.0, 1.0, 1.0]);
        assert_eq!(rgb_to_hsv([0, 0, 255]), [240.0, 1.0, 1.0]);
        assert_eq!(rgb_to_hsv([10, 10, 10])[1], 0.0);
    }
}
