//! Exact areas of the density supports intersected with origin-centred discs,
//! and segment/region intersections for line integrals.

use std::f64::consts::PI;

use num_complex::Complex64;

/// `area(B(c, c) ∩ B(0, t)) / t^2` as a function of `x = t/c`.
pub fn lens_factor(x: f64) -> f64 {
    if x < 1e-3 {
        PI / 2.0 - x / 3.0 - x * x * x / 120.0
    } else if x >= 2.0 {
        PI / (x * x)
    } else {
        let h = x / 2.0;
        h.acos() + 2.0 * h.asin() / (x * x) - 0.5 * (4.0 / (x * x) - 1.0).sqrt()
    }
}

/// `lens_factor(x_small) - lens_factor(x_big)` without cancellation for tiny arguments.
fn lens_factor_diff(x_small: f64, x_big: f64) -> f64 {
    if x_big < 1e-3 {
        (x_big - x_small) / 3.0 + (x_big.powi(3) - x_small.powi(3)) / 120.0
    } else {
        (lens_factor(x_small) - lens_factor(x_big)).max(0.0)
    }
}

/// `ln area(B(c,c) ∩ B(0,t))`.
pub fn ln_lens_area(ln_t: f64, ln_c: f64) -> f64 {
    let x = (ln_t - ln_c).exp();
    if x >= 2.0 {
        return PI.ln() + 2.0 * ln_c;
    }
    2.0 * ln_t + lens_factor(x).ln()
}

/// `ln area((B(c_out,c_out) \ B(c_in,c_in)) ∩ B(0,t))` for internally tangent discs
/// `c_in < c_out`.
pub fn ln_lens_ring_area(ln_t: f64, ln_c_out: f64, ln_c_in: f64) -> f64 {
    let xs = (ln_t - ln_c_out).exp();
    let xb = (ln_t - ln_c_in).exp();
    if xs < 1e-3 {
        return 2.0 * ln_t + lens_factor_diff(xs, xb).ln();
    }
    let outer = ln_lens_area(ln_t, ln_c_out).exp();
    let inner = ln_lens_area(ln_t, ln_c_in).exp();
    (outer - inner).max(0.0).ln()
}

/// `∫ sqrt(a^2 - (x-b)^2) dx` antiderivative.
fn arc_antiderivative(x: f64, a: f64, b: f64) -> f64 {
    let u = (x - b).clamp(-a, a);
    0.5 * (u * (a * a - u * u).max(0.0).sqrt() + a * a * (u / a).asin())
}

/// Stadium `{dist(z, [z0, 1]) < z0}` ∩ `B(0, t)`, by vertical chords.
pub fn ln_stadium_area(ln_t: f64, z0: f64) -> f64 {
    if ln_t <= z0.ln() {
        // the disc only meets the left cap
        return ln_lens_area(ln_t, z0.ln());
    }
    let t = ln_t.exp();
    let total = 2.0 * z0 * (1.0 - z0) + PI * z0 * z0;
    if t >= 1.0 + z0 {
        return total.ln();
    }
    // (piece start, piece end, half-width kind, crossover)
    enum W {
        Cap(f64),
        Flat,
    }
    let pieces = [
        (0.0, z0, W::Cap(z0), t * t / (2.0 * z0)),
        (z0, 1.0, W::Flat, (t * t - z0 * z0).max(0.0).sqrt()),
        (1.0, 1.0 + z0, W::Cap(1.0), (t * t - z0 * z0 + 1.0) / 2.0),
    ];
    let disc = |x: f64| arc_antiderivative(x, t, 0.0);
    let mut half = 0.0;
    for (a, b, kind, cross) in pieces {
        let b = b.min(t);
        if b <= a {
            continue;
        }
        let mut cuts = vec![a];
        if cross > a && cross < b {
            cuts.push(cross);
        }
        cuts.push(b);
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (lo + hi);
            let width = match kind {
                W::Cap(center) => (z0 * z0 - (mid - center).powi(2)).max(0.0).sqrt(),
                W::Flat => z0,
            };
            let dmid = (t * t - mid * mid).max(0.0).sqrt();
            half += if width <= dmid {
                match kind {
                    W::Cap(center) => arc_antiderivative(hi, z0, center) - arc_antiderivative(lo, z0, center),
                    W::Flat => z0 * (hi - lo),
                }
            } else {
                disc(hi) - disc(lo)
            };
        }
    }
    (2.0 * half).ln()
}

/// Parameter interval `[s0, s1] ⊂ [0, 1]` of `p + s (q - p)` inside the open disc.
pub fn segment_disc(p: Complex64, q: Complex64, center: Complex64, radius: f64) -> Option<(f64, f64)> {
    let d = q - p;
    let f = p - center;
    let a = d.norm_sqr();
    if a == 0.0 {
        return None;
    }
    let b = 2.0 * (f.re * d.re + f.im * d.im);
    let c = f.norm_sqr() - radius * radius;
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // stable roots
    let qq = -0.5 * (b + b.signum() * sq);
    let (mut s0, mut s1) = if qq != 0.0 { (qq / a, c / qq) } else { (-sq / (2.0 * a), sq / (2.0 * a)) };
    if s0 > s1 {
        std::mem::swap(&mut s0, &mut s1);
    }
    let (s0, s1) = (s0.max(0.0), s1.min(1.0));
    (s1 > s0).then_some((s0, s1))
}

/// Parameter interval of a segment inside an axis-aligned box.
pub fn segment_box(p: Complex64, q: Complex64, lo: Complex64, hi: Complex64) -> Option<(f64, f64)> {
    let d = q - p;
    let mut s0: f64 = 0.0;
    let mut s1: f64 = 1.0;
    for (pc, dc, l, h) in [(p.re, d.re, lo.re, hi.re), (p.im, d.im, lo.im, hi.im)] {
        if dc == 0.0 {
            if pc <= l || pc >= h {
                return None;
            }
        } else {
            let (mut a, mut b) = ((l - pc) / dc, (h - pc) / dc);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            s0 = s0.max(a);
            s1 = s1.min(b);
        }
    }
    (s1 > s0).then_some((s0, s1))
}
