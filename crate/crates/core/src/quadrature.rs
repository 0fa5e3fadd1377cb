//! Adaptive 1-D quadrature (Gauss 7 / Kronrod 15) with split points, used for
//! the Macdonald–Mehta–Selberg constant. The weight |⟨α,x⟩|^{μ(α)} has kinks
//! on the root hyperplanes, so callers pass those locations as splits and the
//! bisection does the rest.

// Kronrod 15 abscissae on [-1, 1] (symmetric; nonnegative half listed).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

// Gauss 7 weights matching XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One G7/K15 panel: returns (kronrod value, |kronrod − gauss|).
fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let (fl, fr) = if x == 0.0 {
            let v = f(c);
            (v, 0.0)
        } else {
            (f(c - h * x), f(c + h * x))
        };
        let s = fl + fr;
        kronrod += wk * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h)
}

/// Adaptive bisection to absolute tolerance `tol`. Returns (value, error estimate).
pub fn adaptive(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    struct Seg {
        a: f64,
        b: f64,
        val: f64,
        err: f64,
    }
    let (val, err) = gk15(f, a, b);
    let mut segs = vec![Seg { a, b, val, err }];
    let max_segs = 20_000;
    loop {
        let total_err: f64 = segs.iter().map(|s| s.err).sum();
        if total_err <= tol || segs.len() >= max_segs {
            let total: f64 = segs.iter().map(|s| s.val).sum();
            return (total, total_err);
        }
        // split the worst segment
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap())
            .unwrap();
        let Seg { a, b, .. } = segs.swap_remove(idx);
        let m = 0.5 * (a + b);
        let (v1, e1) = gk15(f, a, m);
        let (v2, e2) = gk15(f, m, b);
        segs.push(Seg { a, b: m, val: v1, err: e1 });
        segs.push(Seg { a: m, b, val: v2, err: e2 });
    }
}

/// Adaptive quadrature over [a, b] with mandatory subdivision at `splits`
/// (kink locations). Tolerance is split evenly across the pieces.
pub fn adaptive_with_splits(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    splits: &[f64],
    tol: f64,
) -> (f64, f64) {
    let mut pts: Vec<f64> = splits
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let pieces = pts.len() - 1;
    let mut total = 0.0;
    let mut err = 0.0;
    for w in pts.windows(2) {
        let (v, e) = adaptive(f, w[0], w[1], tol / pieces as f64);
        total += v;
        err += e;
    }
    (total, err)
}
