//! The planar body `{(y1, y2) in [-2N, 2N]^2 : |x1 y1 - x2 y2| <= K}`, its
//! successive minima with respect to `Z^2`, area and lattice point count.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::RatioReport;

/// Largest coordinate enumerated when searching for successive minima.
pub const MINIMA_COORD_CAP: f64 = 1e6;
/// Largest number of candidate vectors scanned for successive minima.
pub const MINIMA_CANDIDATE_CAP: f64 = 1e8;
/// Largest box side `2N` accepted by [`lattice_point_count`].
pub const COUNT_WINDOW_CAP: f64 = 1e4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LatticeBody {
    pub x1: f64,
    pub x2: f64,
    pub n: f64,
    pub k: f64,
}

impl LatticeBody {
    pub fn new(x1: f64, x2: f64, n: f64, k: f64) -> Result<Self> {
        for (name, v) in [("x1", x1), ("x2", x2), ("N", n), ("K", k)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(format!(
                    "{name} must be a positive real, got {v}"
                )));
            }
        }
        Ok(LatticeBody { x1, x2, n, k })
    }

    /// The body dilated by `r`.
    pub fn scaled(&self, r: f64) -> Result<Self> {
        LatticeBody::new(self.x1, self.x2, self.n * r, self.k * r)
    }

    fn half_side(&self) -> f64 {
        2.0 * self.n
    }

    #[inline]
    fn strip(&self, v: [i64; 2]) -> f64 {
        self.x1 * v[0] as f64 - self.x2 * v[1] as f64
    }

    pub fn contains(&self, v: [i64; 2]) -> bool {
        let side = self.half_side();
        (v[0] as f64).abs() <= side && (v[1] as f64).abs() <= side && self.strip(v).abs() <= self.k
    }
}

/// Minkowski functional: the least `lambda` with `v` in `lambda B`.
pub fn gauge(body: &LatticeBody, v: [i64; 2]) -> Result<f64> {
    if v == [0, 0] {
        return Err(Error::param("gauge of the zero vector"));
    }
    Ok(gauge_nonzero(body, v))
}

#[inline]
fn gauge_nonzero(body: &LatticeBody, v: [i64; 2]) -> f64 {
    let side = body.half_side();
    let first = (v[0] as f64).abs() / side;
    let second = (v[1] as f64).abs() / side;
    first.max(second).max(body.strip(v).abs() / body.k)
}

/// Positive semidefinite form `Q(v) = sum_i (r_i . v)^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticForm {
    rows: Vec<[f64; 2]>,
}

impl QuadraticForm {
    pub fn euclidean() -> Self {
        QuadraticForm {
            rows: vec![[1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn from_rows(rows: Vec<[f64; 2]>) -> Self {
        QuadraticForm { rows }
    }

    /// Smooth companion of the body gauge, within a factor `sqrt 3` of it.
    pub fn for_body(body: &LatticeBody) -> Self {
        let s = 1.0 / body.half_side();
        QuadraticForm {
            rows: vec![[s, 0.0], [0.0, s], [body.x1 / body.k, -body.x2 / body.k]],
        }
    }

    pub fn inner(&self, u: [f64; 2], v: [f64; 2]) -> f64 {
        self.rows
            .iter()
            .map(|r| (r[0] * u[0] + r[1] * u[1]) * (r[0] * v[0] + r[1] * v[1]))
            .sum()
    }

    pub fn eval(&self, v: [f64; 2]) -> f64 {
        self.inner(v, v)
    }
}

/// Lagrange reduction: returns `b1, b2` spanning the same lattice with
/// `Q(b1) <= Q(b2) <= Q(b2 +- b1)`.
pub fn gauss_reduce(basis: [[f64; 2]; 2], form: &QuadraticForm) -> Result<[[f64; 2]; 2]> {
    let [mut b1, mut b2] = basis;
    let det = b1[0] * b2[1] - b1[1] * b2[0];
    if det == 0.0 || !det.is_finite() {
        return Err(Error::param("basis vectors are linearly dependent"));
    }
    if form.eval(b1) > form.eval(b2) {
        std::mem::swap(&mut b1, &mut b2);
    }
    loop {
        let q1 = form.eval(b1);
        if !(q1 > 0.0) {
            return Err(Error::param("quadratic form is degenerate on the lattice"));
        }
        let mu = (form.inner(b1, b2) / q1).round();
        let next = [b2[0] - mu * b1[0], b2[1] - mu * b1[1]];
        if mu == 0.0 || form.eval(next) >= form.eval(b2) {
            break;
        }
        b2 = next;
        if form.eval(b2) < q1 {
            std::mem::swap(&mut b1, &mut b2);
        } else {
            break;
        }
    }
    Ok([b1, b2])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MinimaResult {
    pub lambda1: f64,
    pub lambda2: f64,
    pub v1: [i64; 2],
    pub v2: [i64; 2],
}

fn tie_key(v: [i64; 2]) -> (u64, u64, i64, i64) {
    (v[0].unsigned_abs(), v[1].unsigned_abs(), v[0], v[1])
}

fn better(
    body: &LatticeBody,
    candidate: [i64; 2],
    best: Option<(f64, [i64; 2])>,
) -> Option<(f64, [i64; 2])> {
    let g = gauge_nonzero(body, candidate);
    match best {
        Some((bg, bv)) if bg < g || (bg == g && tie_key(bv) <= tie_key(candidate)) => best,
        _ => Some((g, candidate)),
    }
}

/// Integer `y2` with `|y2| <= limit` and `|x1 y1 - x2 y2| <= width`, as an
/// inclusive range; exact float predicate at both ends.
fn column_range(body: &LatticeBody, y1: i64, width: f64, limit: i64) -> Option<(i64, i64)> {
    let a = body.x1 * y1 as f64;
    let ok_low = |y2: i64| a - body.x2 * y2 as f64 <= width;
    let ok_high = |y2: i64| body.x2 * y2 as f64 - a <= width;
    let clamp = |v: f64| {
        if v.is_nan() {
            0
        } else {
            v.clamp(-(limit as f64) - 1.0, limit as f64 + 1.0) as i64
        }
    };
    let mut lo = clamp(((a - width) / body.x2).ceil()).max(-limit);
    while lo > -limit && ok_low(lo - 1) {
        lo -= 1;
    }
    while lo <= limit && !ok_low(lo) {
        lo += 1;
    }
    let mut hi = clamp(((a + width) / body.x2).floor()).min(limit);
    while hi < limit && ok_high(hi + 1) {
        hi += 1;
    }
    while hi >= -limit && !ok_high(hi) {
        hi -= 1;
    }
    (lo <= hi).then_some((lo, hi))
}

/// Exact successive minima over `Z^2`, seeded by a reduced basis for the
/// companion quadratic form and finished by enumeration. Ties go to the
/// smallest `(|v1|, |v2|, v1, v2)`.
pub fn successive_minima(body: &LatticeBody) -> Result<MinimaResult> {
    let reduced = gauss_reduce([[1.0, 0.0], [0.0, 1.0]], &QuadraticForm::for_body(body))?;
    let as_int = |v: [f64; 2]| [v[0] as i64, v[1] as i64];
    let (b1, b2) = (as_int(reduced[0]), as_int(reduced[1]));
    let upper = gauge_nonzero(body, b1).max(gauge_nonzero(body, b2)) * (1.0 + 1e-12);

    let bound = (body.half_side() * upper).floor();
    if bound > MINIMA_COORD_CAP {
        return Err(Error::EnumerationCap {
            bound,
            cap: MINIMA_COORD_CAP,
        });
    }
    let r = bound as i64;
    let width = body.k * upper;
    let rows: Vec<(i64, i64, i64)> = (-r..=r)
        .filter_map(|y1| column_range(body, y1, width, r).map(|(lo, hi)| (y1, lo, hi)))
        .collect();
    let candidates: f64 = rows.iter().map(|&(_, lo, hi)| (hi - lo + 1) as f64).sum();
    if candidates > MINIMA_CANDIDATE_CAP {
        return Err(Error::EnumerationCap {
            bound: candidates,
            cap: MINIMA_CANDIDATE_CAP,
        });
    }

    let scan = |accept: &(dyn Fn([i64; 2]) -> bool + Sync)| {
        rows.par_iter()
            .map(|&(y1, lo, hi)| {
                let mut best = None;
                for y2 in lo..=hi {
                    let v = [y1, y2];
                    if accept(v) {
                        best = better(body, v, best);
                    }
                }
                best
            })
            .reduce(
                || None,
                |a, b| match (a, b) {
                    (Some(x), Some(y)) => better(body, y.1, Some(x)),
                    (x, None) => x,
                    (None, y) => y,
                },
            )
    };

    let (lambda1, v1) = scan(&|v| v != [0, 0]).expect("reduced basis lies inside the scanned box");
    let (lambda2, v2) =
        scan(&|v| i128::from(v1[0]) * i128::from(v[1]) != i128::from(v1[1]) * i128::from(v[0]))
            .expect("reduced basis has an independent vector");
    Ok(MinimaResult {
        lambda1,
        lambda2,
        v1,
        v2,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BodyArea {
    pub area: f64,
    /// `4 (2N) K / x1`, the area of the strip's parallelogram over the
    /// vertical sides.
    pub parallelogram_bound: f64,
}

/// Keeps the part of `poly` where `a y1 + b y2 <= c`.
fn clip(poly: &[[f64; 2]], a: f64, b: f64, c: f64) -> Vec<[f64; 2]> {
    let inside = |p: [f64; 2]| a * p[0] + b * p[1] <= c;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let cur = poly[i];
        let prev = poly[(i + poly.len() - 1) % poly.len()];
        let (ci, pi) = (inside(cur), inside(prev));
        if ci != pi {
            let fp = a * prev[0] + b * prev[1] - c;
            let fc = a * cur[0] + b * cur[1] - c;
            let t = fp / (fp - fc);
            out.push([
                prev[0] + t * (cur[0] - prev[0]),
                prev[1] + t * (cur[1] - prev[1]),
            ]);
        }
        if ci {
            out.push(cur);
        }
    }
    out
}

fn shoelace(poly: &[[f64; 2]]) -> f64 {
    let mut twice = 0.0;
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        twice += p[0] * q[1] - q[0] * p[1];
    }
    twice.abs() / 2.0
}

pub fn body_area(body: &LatticeBody) -> BodyArea {
    let s = body.half_side();
    let square = [[-s, -s], [s, -s], [s, s], [-s, s]];
    let upper = clip(&square, body.x1, -body.x2, body.k);
    let both = clip(&upper, -body.x1, body.x2, body.k);
    BodyArea {
        area: shoelace(&both),
        parallelogram_bound: 4.0 * s * body.k / body.x1,
    }
}

/// `|B cap Z^2|`.
pub fn lattice_point_count(body: &LatticeBody) -> Result<u64> {
    let s = body.half_side();
    if s > COUNT_WINDOW_CAP {
        return Err(Error::EnumerationCap {
            bound: s,
            cap: COUNT_WINDOW_CAP,
        });
    }
    let r = s.floor() as i64;
    Ok((-r..=r)
        .into_par_iter()
        .map(|y1| column_range(body, y1, body.k, r).map_or(0, |(lo, hi)| (hi - lo + 1) as u64))
        .sum())
}

/// `mu(B) lambda1 lambda2`, which lies in `[2, 4]` for every planar body.
pub fn minkowski_check(body: &LatticeBody) -> Result<RatioReport> {
    let minima = successive_minima(body)?;
    let area = body_area(body).area;
    let product = area * minima.lambda1 * minima.lambda2;
    Ok(with_body(RatioReport::new("minkowski", product, 1.0), body)
        .param("area", area)
        .param("lambda1", minima.lambda1)
        .param("lambda2", minima.lambda2))
}

/// `|B cap Z^2| / prod_j max(1, 1 / lambda_j)`.
pub fn count_vs_minima_check(body: &LatticeBody) -> Result<RatioReport> {
    let minima = successive_minima(body)?;
    let count = lattice_point_count(body)?;
    let product = (1.0 / minima.lambda1).max(1.0) * (1.0 / minima.lambda2).max(1.0);
    Ok(with_body(
        RatioReport::new("count-vs-minima", count as f64, product),
        body,
    )
    .param("lambda1", minima.lambda1)
    .param("lambda2", minima.lambda2))
}

fn with_body(report: RatioReport, body: &LatticeBody) -> RatioReport {
    report
        .param("x1", body.x1)
        .param("x2", body.x2)
        .param("N", body.n)
        .param("K", body.k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_body() -> LatticeBody {
        LatticeBody::new(1.0, 1.0, 0.5, 1.0).unwrap()
    }

    fn random_body(rng: &mut ChaCha8Rng) -> LatticeBody {
        LatticeBody::new(
            rng.gen_range(1.0..4.0),
            rng.gen_range(1.0..4.0),
            rng.gen_range(0.5..8.0),
            rng.gen_range(0.5..5.0),
        )
        .unwrap()
    }

    /// Minimum gauge over all vectors in a box twice as large as the one any
    /// independent pair of unit vectors certifies.
    fn oracle_minima(body: &LatticeBody) -> (f64, f64) {
        let u = gauge_nonzero(body, [1, 0]).max(gauge_nonzero(body, [0, 1]));
        let r = 2 * (2.0 * body.n * u).ceil() as i64;
        let mut all = Vec::new();
        for a in -r..=r {
            for b in -r..=r {
                if (a, b) != (0, 0) {
                    all.push((gauge_nonzero(body, [a, b]), [a, b]));
                }
            }
        }
        all.sort_by(|p, q| p.0.total_cmp(&q.0));
        let (l1, v1) = all[0];
        let l2 = all
            .iter()
            .find(|(_, v)| v1[0] * v[1] != v1[1] * v[0])
            .unwrap()
            .0;
        (l1, l2)
    }

    #[test]
    fn gauge_examples() {
        let b = unit_body();
        assert_eq!(gauge(&b, [1, 0]).unwrap(), 1.0);
        assert_eq!(gauge(&b, [1, 1]).unwrap(), 1.0);
        assert!(gauge(&b, [0, 0]).is_err());
        assert!(LatticeBody::new(1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn reduction() {
        let e = QuadraticForm::euclidean();
        assert_eq!(
            gauss_reduce([[1.0, 0.0], [0.0, 1.0]], &e).unwrap(),
            [[1.0, 0.0], [0.0, 1.0]]
        );
        assert_eq!(
            gauss_reduce([[1.0, 0.0], [1.0, 1.0]], &e).unwrap(),
            [[1.0, 0.0], [0.0, 1.0]]
        );
        assert!(gauss_reduce([[1.0, 2.0], [2.0, 4.0]], &e).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let basis = [
                [rng.gen_range(-50..50) as f64, rng.gen_range(-50..50) as f64],
                [rng.gen_range(-50..50) as f64, rng.gen_range(-50..50) as f64],
            ];
            let det = basis[0][0] * basis[1][1] - basis[0][1] * basis[1][0];
            if det == 0.0 {
                continue;
            }
            let [b1, b2] = gauss_reduce(basis, &e).unwrap();
            assert_eq!((b1[0] * b2[1] - b1[1] * b2[0]).abs(), det.abs());
            let (q1, q2) = (e.eval(b1), e.eval(b2));
            assert!(q1 <= q2);
            assert!(q2 <= e.eval([b2[0] + b1[0], b2[1] + b1[1]]));
            assert!(q2 <= e.eval([b2[0] - b1[0], b2[1] - b1[1]]));
        }
    }

    #[test]
    fn minima_of_unit_body() {
        let m = successive_minima(&unit_body()).unwrap();
        assert_eq!((m.lambda1, m.lambda2), (1.0, 1.0));
        assert_eq!(m.v1, [0, -1]);
        assert_eq!(m.v2, [-1, 0]);
        assert_eq!(gauge(&unit_body(), m.v1).unwrap(), m.lambda1);
    }

    #[test]
    fn minima_match_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let body = random_body(&mut rng);
            let m = successive_minima(&body).unwrap();
            let (l1, l2) = oracle_minima(&body);
            assert_eq!((m.lambda1, m.lambda2), (l1, l2), "{body:?}");
            assert_eq!(gauge(&body, m.v1).unwrap(), m.lambda1);
            assert_eq!(gauge(&body, m.v2).unwrap(), m.lambda2);
            assert_ne!(m.v1[0] * m.v2[1], m.v1[1] * m.v2[0]);
        }
    }

    #[test]
    fn minima_scale_inversely() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let body = random_body(&mut rng);
            let m = successive_minima(&body).unwrap();
            for r in [0.5, 1.0 / 3.0, 2.0] {
                let s = successive_minima(&body.scaled(r).unwrap()).unwrap();
                assert!((s.lambda1 * r / m.lambda1 - 1.0).abs() < 1e-12);
                assert!((s.lambda2 * r / m.lambda2 - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eccentric_body_hits_cap() {
        let body = LatticeBody::new(1.0, 1.0, 1000.0, 1e-3).unwrap();
        assert!(matches!(
            successive_minima(&body),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn areas() {
        let wide = LatticeBody::new(1.0, 1.0, 2.0, 1e3).unwrap();
        assert_eq!(body_area(&wide).area, 64.0);
        let a = body_area(&unit_body());
        assert!((a.area - 3.0).abs() < 1e-15);
        assert_eq!(a.parallelogram_bound, 4.0);
    }

    #[test]
    fn area_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        // strip leaves through the vertical sides when K + 2N x2 <= 2N x1
        let body = LatticeBody::new(3.0, 1.0, 1.0, 1.5).unwrap();
        let samples = 1_000_000;
        let s = 2.0 * body.n;
        let hits = (0..samples)
            .filter(|_| {
                let y1: f64 = rng.gen_range(-s..s);
                let y2: f64 = rng.gen_range(-s..s);
                (body.x1 * y1 - body.x2 * y2).abs() <= body.k
            })
            .count() as f64;
        let p = hits / samples as f64;
        let box_area = 4.0 * s * s;
        let sigma = box_area * (p * (1.0 - p) / samples as f64).sqrt();
        let a = body_area(&body);
        assert!(
            (a.area - p * box_area).abs() <= 3.0 * sigma,
            "{a:?} vs {}",
            p * box_area
        );
        assert!((a.area - a.parallelogram_bound).abs() < 1e-12);
    }

    #[test]
    fn counts() {
        assert_eq!(lattice_point_count(&unit_body()).unwrap(), 7);
        let thin = LatticeBody::new(1.0, 2f64.sqrt(), 1.0, 1e-9).unwrap();
        assert_eq!(lattice_point_count(&thin).unwrap(), 1);
        assert!(lattice_point_count(&LatticeBody::new(1.0, 1.0, 1e4, 1.0).unwrap()).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let body = random_body(&mut rng);
            let r = (2.0 * body.n) as i64;
            let direct = (-r..=r)
                .flat_map(|a| (-r..=r).map(move |b| [a, b]))
                .filter(|&v| body.contains(v))
                .count();
            assert_eq!(lattice_point_count(&body).unwrap(), direct as u64);
        }
    }

    #[test]
    fn reports() {
        let mk = minkowski_check(&unit_body()).unwrap();
        assert!((mk.ratio - 3.0).abs() < 1e-15);
        let square = LatticeBody::new(1.0, 1.0, 0.5, 1e9).unwrap();
        let mk = minkowski_check(&square).unwrap();
        assert_eq!(mk.ratio, 4.0);
        let cv = count_vs_minima_check(&unit_body()).unwrap();
        assert_eq!(cv.ratio, 7.0);
        let small = LatticeBody::new(1.0, 1.0, 0.2, 0.3).unwrap();
        let cv = count_vs_minima_check(&small).unwrap();
        assert_eq!((cv.lhs, cv.rhs, cv.ratio), (1.0, 1.0, 1.0));
    }

    proptest! {
        #[test]
        fn gauge_is_homogeneous(x1 in 0.1f64..10.0, x2 in 0.1f64..10.0, n in 0.1f64..10.0, k in 0.1f64..10.0,
                                a in -1000i64..1000, b in -1000i64..1000) {
            prop_assume!((a, b) != (0, 0));
            let body = LatticeBody::new(x1, x2, n, k).unwrap();
            let g = gauge(&body, [a, b]).unwrap();
            prop_assert!((gauge(&body, [2 * a, 2 * b]).unwrap() - 2.0 * g).abs() <= 1e-12 * g);
        }

        #[test]
        fn minkowski_window(x1 in 1.0f64..4.0, x2 in 1.0f64..4.0, n in 0.5f64..8.0, k in 0.5f64..5.0) {
            let body = LatticeBody::new(x1, x2, n, k).unwrap();
            let m = successive_minima(&body).unwrap();
            prop_assert!(m.lambda1 <= m.lambda2);
            let count = lattice_point_count(&body).unwrap();
            prop_assert_eq!(count % 2, 1);
            let r = minkowski_check(&body).unwrap().ratio;
            prop_assert!((2.0 - 1e-6..=4.0 + 1e-6).contains(&r), "{}", r);
        }
    }
}
