//! Independent reference computations shared by the integration tests.
#![allow(dead_code, clippy::excessive_precision)]

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Gauss–Kronrod 7/15 on `[a, b]`: `(kronrod, |kronrod − gauss|)`.
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (k, err) = gk15(f, a, b);
    if err <= tol || err <= 1e-15 * k.abs() || !k.is_finite() || depth == 0 {
        return k;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
}

/// Adaptive quadrature of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    adapt(&f, a, b, tol, 50)
}

/// As `integrate`, splitting at interior `breaks` where the integrand may
/// have integrable singularities. Each piece is halved and mapped with
/// `x = end ∓ (half width)·u²` towards both of its ends.
pub fn integrate_with_breaks(f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(b);
    let pieces = 2.0 * (pts.len() - 1) as f64;
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let h = 0.5 * (q - p);
        let left = |u: f64| 2.0 * h * u * f(p + h * u * u);
        let right = |u: f64| 2.0 * h * u * f(q - h * u * u);
        total += adapt(&left, 0.0, 1.0, tol / pieces, 50) + adapt(&right, 0.0, 1.0, tol / pieces, 50);
    }
    total
}

/// `E ln|j + μω|`, `ω` uniform on `[−1, 1]`, by quadrature of `ln|x|`
/// over `[j − μ, j + μ]`.
pub fn mean_log_abs_quad(j: f64, mu: f64) -> f64 {
    if mu == 0.0 {
        return j.abs().ln();
    }
    let f = |x: f64| x.abs().ln();
    integrate_with_breaks(f, j - mu, j + mu, &[0.0], 1e-13) / (2.0 * mu)
}

/// `E ln|s + aω + bω′|` by nested quadrature over `y = s + aω`.
pub fn mean_log_abs2_quad(s: f64, a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return mean_log_abs_quad(s, b);
    }
    // The inner mean has kinks where its singular point leaves the range.
    let g = |y: f64| mean_log_abs_quad(y, b);
    integrate_with_breaks(g, s - a, s + a, &[-b, 0.0, b], 1e-12) / (2.0 * a)
}

/// `E f(ω, ω′)` for independent uniform `ω, ω′` on `[−1, 1]`.
pub fn mean_uniform2(f: impl Fn(f64, f64) -> f64, tol: f64) -> f64 {
    let outer = |x: f64| integrate(|y| f(x, y), -1.0, 1.0, tol);
    0.25 * integrate(outer, -1.0, 1.0, tol)
}

/// Winding of `k ↦ g(k)` around the origin over one Brillouin zone, from
/// accumulated phase increments.
pub fn bloch_winding(g: impl Fn(f64) -> Complex<f64>, samples: usize) -> f64 {
    let mut total = 0.0;
    let mut prev = g(0.0);
    for k in 1..=samples {
        let z = g(2.0 * PI * k as f64 / samples as f64);
        total += (z / prev).arg();
        prev = z;
    }
    total / (2.0 * PI)
}

/// Angular frequency of the largest non-DC peak of an evenly sampled
/// signal, and the bin spacing in angular frequency.
pub fn dominant_angular_frequency(values: &[f64], dt: f64) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let (k, _) = buf[1..n / 2]
        .iter()
        .enumerate()
        .map(|(i, z)| (i + 1, z.norm()))
        .fold((0, 0.0), |best, x| if x.1 > best.1 { x } else { best });
    let bin = 2.0 * PI / (n as f64 * dt);
    (k as f64 * bin, bin)
}
