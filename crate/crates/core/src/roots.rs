//! Sign-scan bracketing and bisection for smooth scalar functions.

/// All sign changes of `f` on `[lo, hi]`, located by scanning `subdivisions`
/// equal cells and bisecting each bracket until its width is below `tol`.
///
/// Exact zeros at grid nodes are reported once. Non-finite samples break
/// brackets rather than producing spurious roots.
pub fn bracket_roots<F>(f: F, lo: f64, hi: f64, subdivisions: usize, tol: f64) -> Vec<f64>
where
    F: Fn(f64) -> f64,
{
    assert!(hi > lo && subdivisions > 0);
    let step = (hi - lo) / subdivisions as f64;
    let mut roots = Vec::new();
    let mut x_prev = lo;
    let mut f_prev = f(lo);
    if f_prev == 0.0 {
        roots.push(lo);
    }
    for i in 1..=subdivisions {
        let x = if i == subdivisions {
            hi
        } else {
            lo + step * i as f64
        };
        let fx = f(x);
        if fx == 0.0 {
            roots.push(x);
        } else if f_prev.is_finite() && fx.is_finite() && f_prev != 0.0 && f_prev.signum() != fx.signum() {
            roots.push(bisect(&f, x_prev, x, f_prev, tol));
        }
        x_prev = x;
        f_prev = fx;
    }
    roots
}

/// Bisection on a bracket `[a, b]` with `f(a) = fa` of opposite sign to `f(b)`.
pub fn bisect<F>(f: &F, mut a: f64, mut b: f64, mut fa: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
pub fn golden_min<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
