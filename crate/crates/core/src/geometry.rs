//! Norms, feasible sets, Bregman divergences and the closed-form prox step
//! used inside the sliding inner loop.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{norm1, norm2, norm_inf};

/// Logs of entropy arguments are clamped at this floor.
pub const LOG_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// ℓ₂ primal, ℓ₂ dual.
    Euclidean,
    /// ℓ₁ primal, ℓ∞ dual.
    L1,
}

/// A primal/dual norm pair together with its equivalence constants against ℓ₂:
/// `dual(x) <= c1 |x|_2`, `|x|_2 <= c2 dual(x)`, `primal(x) <= c3 |x|_2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormPair {
    pub kind: NormKind,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl NormPair {
    pub fn euclidean() -> Self {
        NormPair {
            kind: NormKind::Euclidean,
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
        }
    }

    pub fn l1(n: usize) -> Self {
        let root = (n as f64).sqrt();
        NormPair {
            kind: NormKind::L1,
            c1: 1.0,
            c2: root,
            c3: root,
        }
    }

    pub fn primal(&self, x: &[f64]) -> f64 {
        match self.kind {
            NormKind::Euclidean => norm2(x),
            NormKind::L1 => norm1(x),
        }
    }

    pub fn dual(&self, x: &[f64]) -> f64 {
        match self.kind {
            NormKind::Euclidean => norm2(x),
            NormKind::L1 => norm_inf(x),
        }
    }

    /// Default fourth-moment bound `p*` on the dual norm of a uniform sphere
    /// direction. For ℓ∞ this is a computable instance of `O(sqrt(ln n / n))`.
    pub fn default_p_star(&self, n: usize) -> f64 {
        match self.kind {
            NormKind::Euclidean => 1.0,
            NormKind::L1 => {
                let n = n.max(1) as f64;
                (4.0 * (2.0 * n).ln() / n).sqrt().min(1.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    Ball2 { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Simplex { n: usize },
    /// All of ℝⁿ. Not compact: `bound_hint` stands in for the diameter.
    WholeSpace { n: usize, bound_hint: f64 },
}

impl FeasibleSet {
    pub fn ball2(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("radius", format!("must be positive, got {radius}")));
        }
        Ok(FeasibleSet::Ball2 { center, radius })
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        check_box(&lo, &hi)?;
        Ok(FeasibleSet::Box { lo, hi })
    }

    pub fn cube(n: usize, half_width: f64) -> Result<Self> {
        Self::boxed(vec![-half_width; n], vec![half_width; n])
    }

    pub fn simplex(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "simplex needs n >= 1"));
        }
        Ok(FeasibleSet::Simplex { n })
    }

    pub fn whole_space(n: usize, bound_hint: f64) -> Result<Self> {
        if !(bound_hint > 0.0 && bound_hint.is_finite()) {
            return Err(Error::invalid(
                "bound_hint",
                format!("must be positive and finite, got {bound_hint}"),
            ));
        }
        Ok(FeasibleSet::WholeSpace { n, bound_hint })
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Ball2 { center, .. } => center.len(),
            FeasibleSet::Box { lo, .. } => lo.len(),
            FeasibleSet::Simplex { n } | FeasibleSet::WholeSpace { n, .. } => *n,
        }
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self, FeasibleSet::WholeSpace { .. })
    }

    /// Diameter of the set in the primal norm of `norms`.
    pub fn diameter(&self, norms: &NormPair) -> f64 {
        let n = self.dim();
        match (self, norms.kind) {
            (FeasibleSet::Ball2 { radius, .. }, NormKind::Euclidean) => 2.0 * radius,
            (FeasibleSet::Ball2 { radius, .. }, NormKind::L1) => 2.0 * radius * (n as f64).sqrt(),
            (FeasibleSet::Box { lo, hi }, kind) => {
                let widths: Vec<f64> = hi.iter().zip(lo).map(|(h, l)| h - l).collect();
                match kind {
                    NormKind::Euclidean => norm2(&widths),
                    NormKind::L1 => norm1(&widths),
                }
            }
            (FeasibleSet::Simplex { n }, _) if *n == 1 => 0.0,
            (FeasibleSet::Simplex { .. }, NormKind::Euclidean) => std::f64::consts::SQRT_2,
            (FeasibleSet::Simplex { .. }, NormKind::L1) => 2.0,
            (FeasibleSet::WholeSpace { bound_hint, .. }, _) => *bound_hint,
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() || !x.iter().all(|v| v.is_finite()) {
            return false;
        }
        match self {
            FeasibleSet::Ball2 { center, radius } => crate::linalg::dist2(x, center) <= radius + tol,
            FeasibleSet::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| *v >= l - tol && *v <= h + tol),
            FeasibleSet::Simplex { .. } => {
                x.iter().all(|v| *v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol
            }
            FeasibleSet::WholeSpace { .. } => true,
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), z.len())?;
        Ok(match self {
            FeasibleSet::Ball2 { center, radius } => {
                let d = crate::linalg::dist2(z, center);
                if d <= *radius {
                    z.to_vec()
                } else {
                    let s = radius / d;
                    z.iter().zip(center).map(|(zi, ci)| ci + s * (zi - ci)).collect()
                }
            }
            FeasibleSet::Box { lo, hi } => {
                check_box(lo, hi)?;
                z.iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(v, (l, h))| v.clamp(*l, *h))
                    .collect()
            }
            FeasibleSet::Simplex { .. } => project_simplex(z),
            FeasibleSet::WholeSpace { .. } => z.to_vec(),
        })
    }

    /// A canonical interior starting point.
    pub fn center(&self) -> Vec<f64> {
        match self {
            FeasibleSet::Ball2 { center, .. } => center.clone(),
            FeasibleSet::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect(),
            FeasibleSet::Simplex { n } => vec![1.0 / *n as f64; *n],
            FeasibleSet::WholeSpace { n, .. } => vec![0.0; *n],
        }
    }
}

fn check_box(lo: &[f64], hi: &[f64]) -> Result<()> {
    if let Some(i) = lo.iter().zip(hi).position(|(l, h)| !(l <= h)) {
        return Err(Error::invalid(
            "box",
            format!("lo[{i}] = {} exceeds hi[{i}] = {}", lo[i], hi[i]),
        ));
    }
    Ok(())
}

/// Sort-based Euclidean projection onto the probability simplex.
fn project_simplex(z: &[f64]) -> Vec<f64> {
    let mut sorted = z.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, v) in sorted.iter().enumerate() {
        cumsum += v;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if v - candidate > 0.0 {
            theta = candidate;
        }
    }
    z.iter().map(|v| (v - theta).max(0.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dgf {
    /// ν(x) = ½‖x‖₂²
    HalfSqEuclid,
    /// ν(x) = Σ xᵢ ln xᵢ on the simplex
    Entropy,
}

/// Norm pair, feasible set and distance-generating function, with the
/// primal diameter `d_x` and the Bregman diameter `d_xv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximalSetup {
    pub norms: NormPair,
    pub set: FeasibleSet,
    pub dgf: Dgf,
    pub d_x: f64,
    pub d_xv: f64,
}

impl ProximalSetup {
    pub fn euclidean(set: FeasibleSet) -> Self {
        let norms = NormPair::euclidean();
        let d_x = set.diameter(&norms);
        ProximalSetup {
            norms,
            set,
            dgf: Dgf::HalfSqEuclid,
            d_x,
            d_xv: d_x,
        }
    }

    /// ℓ₁ norm with the entropy dgf on the probability simplex.
    pub fn entropic(n: usize) -> Result<Self> {
        let set = FeasibleSet::simplex(n)?;
        let norms = NormPair::l1(n);
        let d_x = set.diameter(&norms);
        Ok(ProximalSetup {
            norms,
            set,
            dgf: Dgf::Entropy,
            d_x,
            d_xv: (2.0 * (n as f64).ln()).sqrt(),
        })
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    /// V(x, y) = ν(y) − ν(x) − ⟨∇ν(x), y − x⟩.
    pub fn bregman(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(x.len(), y.len())?;
        check_dim(self.dim(), x.len())?;
        Ok(match self.dgf {
            Dgf::HalfSqEuclid => 0.5 * crate::linalg::dist2(x, y).powi(2),
            Dgf::Entropy => x
                .iter()
                .zip(y)
                .map(|(&xi, &yi)| {
                    let ln_x = xi.max(LOG_FLOOR).ln();
                    let y_ln_y = if yi > 0.0 { yi * yi.ln() } else { 0.0 };
                    y_ln_y - yi * ln_x - yi + xi
                })
                .sum::<f64>()
                .max(0.0),
        })
    }

    /// argmin over the set of `⟨a,u⟩ + β V(x_anchor, u) + β p V(u_prev, u)`.
    pub fn prox_step(
        &self,
        a: &[f64],
        x_anchor: &[f64],
        u_prev: &[f64],
        beta: f64,
        p: f64,
    ) -> Result<Vec<f64>> {
        if !(beta > 0.0) {
            return Err(Error::invalid("beta", format!("must be positive, got {beta}")));
        }
        if !(p > 0.0) {
            return Err(Error::invalid("p", format!("must be positive, got {p}")));
        }
        let n = self.dim();
        check_dim(n, a.len())?;
        check_dim(n, x_anchor.len())?;
        check_dim(n, u_prev.len())?;
        match self.dgf {
            Dgf::HalfSqEuclid => {
                let scale = 1.0 / (beta * (1.0 + p));
                let target: Vec<f64> = (0..n)
                    .map(|i| (beta * x_anchor[i] + beta * p * u_prev[i] - a[i]) * scale)
                    .collect();
                self.set.project(&target)
            }
            Dgf::Entropy => {
                let logits: Vec<f64> = (0..n)
                    .map(|i| {
                        (x_anchor[i].max(LOG_FLOOR).ln() + p * u_prev[i].max(LOG_FLOOR).ln()
                            - a[i] / beta)
                            / (1.0 + p)
                    })
                    .collect();
                let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut u: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
                let total: f64 = u.iter().sum();
                u.iter_mut().for_each(|v| *v /= total);
                Ok(u)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ball() -> ProximalSetup {
        ProximalSetup::euclidean(FeasibleSet::ball2(vec![0.0, 0.0], 1.0).unwrap())
    }

    fn prox_objective(s: &ProximalSetup, a: &[f64], x: &[f64], up: &[f64], b: f64, p: f64, u: &[f64]) -> f64 {
        crate::linalg::dot(a, u) + b * s.bregman(x, u).unwrap() + b * p * s.bregman(up, u).unwrap()
    }

    #[test]
    fn bregman_examples() {
        let s = ball();
        assert_eq!(s.bregman(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert!((s.bregman(&[0.0, 0.0], &[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);

        let e = ProximalSetup::entropic(2).unwrap();
        let (x, y): ([f64; 2], [f64; 2]) = ([0.5, 0.5], [0.9, 0.1]);
        // ν(y) − ν(x) − ⟨ln x + 1, y − x⟩ written out term by term
        let nu = |v: &[f64]| v.iter().map(|t| t * t.ln()).sum::<f64>();
        let lin: f64 = (0..2).map(|i| (x[i].ln() + 1.0) * (y[i] - x[i])).sum();
        let definitional = nu(&y) - nu(&x) - lin;
        let kl: f64 = (0..2).map(|i| y[i] * (y[i] / x[i]).ln()).sum();
        assert!((definitional - kl).abs() < 1e-14);
        let v = e.bregman(&x, &y).unwrap();
        assert!((v - definitional).abs() < 1e-14);
        assert!((v - 0.36806).abs() < 1e-5);
    }

    #[test]
    fn bregman_rejects_dimension_mismatch() {
        assert!(matches!(ball().bregman(&[0.0], &[0.0, 1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn entropy_boundary_is_clamped() {
        let e = ProximalSetup::entropic(2).unwrap();
        let v = e.bregman(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!(v.is_finite() && v > 100.0);
    }

    #[test]
    fn projection_examples() {
        let b = FeasibleSet::ball2(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(b.project(&[0.2, 0.1]).unwrap(), vec![0.2, 0.1]);
        let p = b.project(&[3.0, 4.0]).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
        // KKT: z − u = λ u with λ >= 0 and |u| = 1
        let lambda = (3.0 - p[0]) / p[0];
        assert!(lambda > 0.0 && ((4.0 - p[1]) - lambda * p[1]).abs() < 1e-12);

        let s = FeasibleSet::simplex(3).unwrap();
        for v in s.project(&[0.5, 0.5, 0.5]).unwrap() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn box_with_inverted_bounds_is_rejected() {
        assert!(FeasibleSet::boxed(vec![1.0], vec![0.0]).is_err());
        let bad = FeasibleSet::Box { lo: vec![1.0], hi: vec![0.0] };
        assert!(bad.project(&[0.5]).is_err());
    }

    #[test]
    fn prox_step_examples() {
        let s = ball();
        assert_eq!(s.prox_step(&[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0], 1.0, 1.0).unwrap(), vec![0.0, 0.0]);

        let u = s.prox_step(&[2.0, 0.0], &[0.0, 0.0], &[0.0, 0.0], 1.0, 1.0).unwrap();
        assert!((u[0] + 1.0).abs() < 1e-15 && u[1].abs() < 1e-15);
        // grid search over the disk at spacing 1e-3
        let obj = |w: &[f64]| prox_objective(&s, &[2.0, 0.0], &[0.0, 0.0], &[0.0, 0.0], 1.0, 1.0, w);
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for i in -1000..=1000 {
            for j in -1000..=1000 {
                let w = [i as f64 * 1e-3, j as f64 * 1e-3];
                if w[0] * w[0] + w[1] * w[1] <= 1.0 {
                    let v = obj(&w);
                    if v < best.0 {
                        best = (v, w);
                    }
                }
            }
        }
        assert!((best.1[0] - u[0]).abs() <= 1e-3 && (best.1[1] - u[1]).abs() <= 1e-3);
        assert!(obj(&u) <= best.0 + 1e-12);

        let e = ProximalSetup::entropic(2).unwrap();
        let (x, up) = ([0.8, 0.2], [0.2, 0.8]);
        let u = e.prox_step(&[0.0, 0.0], &x, &up, 1.0, 1.0).unwrap();
        assert!((u[0] - 0.5).abs() < 1e-12 && (u[1] - 0.5).abs() < 1e-12);
        let mut best = (f64::INFINITY, 0.0);
        for i in 1..100_000 {
            let t = i as f64 * 1e-5;
            let v = prox_objective(&e, &[0.0, 0.0], &x, &up, 1.0, 1.0, &[t, 1.0 - t]);
            if v < best.0 {
                best = (v, t);
            }
        }
        assert!((best.1 - u[0]).abs() < 1e-4);
    }

    #[test]
    fn prox_step_rejects_nonpositive_parameters() {
        let s = ball();
        assert!(s.prox_step(&[0.0; 2], &[0.0; 2], &[0.0; 2], 0.0, 1.0).is_err());
        assert!(s.prox_step(&[0.0; 2], &[0.0; 2], &[0.0; 2], 1.0, -1.0).is_err());
    }

    #[test]
    fn entropy_prox_survives_huge_linear_terms() {
        let e = ProximalSetup::entropic(3).unwrap();
        let c = [1.0 / 3.0; 3];
        let u = e.prox_step(&[1e6, -1e6, 0.0], &c, &c, 1e-3, 0.5).unwrap();
        assert!(u.iter().all(|v| v.is_finite()));
        assert!((u.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(u[1] > 0.999);
    }

    #[test]
    fn diameters() {
        assert_eq!(ProximalSetup::entropic(4).unwrap().d_xv, (2.0 * 4f64.ln()).sqrt());
        let s = ProximalSetup::euclidean(FeasibleSet::cube(4, 1.0).unwrap());
        assert_eq!(s.d_x, 4.0);
        assert_eq!(s.d_x, s.d_xv);
    }

    fn simplex_point(raw: &[f64]) -> Vec<f64> {
        let t: f64 = raw.iter().sum();
        raw.iter().map(|v| v / t).collect()
    }

    fn setups(n: usize) -> Vec<ProximalSetup> {
        vec![
            ProximalSetup::euclidean(FeasibleSet::ball2(vec![0.0; n], 1.5).unwrap()),
            ProximalSetup::euclidean(FeasibleSet::cube(n, 1.0).unwrap()),
            ProximalSetup::euclidean(FeasibleSet::simplex(n).unwrap()),
            ProximalSetup::entropic(n).unwrap(),
        ]
    }

    fn feasible(s: &ProximalSetup, raw: &[f64]) -> Vec<f64> {
        match s.set {
            FeasibleSet::Simplex { .. } => simplex_point(&raw.iter().map(|v| v.abs() + 1e-3).collect::<Vec<_>>()),
            _ => s.set.project(raw).unwrap(),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(250))]

        #[test]
        fn norm_equivalence_constants(x in prop::collection::vec(-5.0f64..5.0, 1..10)) {
            let n = x.len();
            for np in [NormPair::euclidean(), NormPair::l1(n)] {
                let l2 = norm2(&x);
                prop_assert!(np.dual(&x) <= np.c1 * l2 + 1e-12);
                prop_assert!(l2 <= np.c2 * np.dual(&x) + 1e-12);
                prop_assert!(np.primal(&x) <= np.c3 * l2 + 1e-12);
            }
        }

        #[test]
        fn bregman_is_strongly_convex(n in 2usize..8, seed in prop::collection::vec(-3.0f64..3.0, 16)) {
            for s in setups(n) {
                let x = feasible(&s, &seed[..n]);
                let y = feasible(&s, &seed[8..8 + n]);
                let d = s.norms.primal(&crate::linalg::sub(&x, &y));
                prop_assert!(s.bregman(&x, &y).unwrap() >= 0.5 * d * d - 1e-12);
                prop_assert!(s.bregman(&x, &x).unwrap().abs() < 1e-14);
            }
        }

        #[test]
        fn prox_step_is_optimal(
            n in 1usize..8,
            raw in prop::collection::vec(-3.0f64..3.0, 40),
            beta in 0.05f64..5.0,
            p in 0.05f64..5.0,
        ) {
            for s in setups(n.max(2)) {
                let n = s.dim();
                let a = &raw[..n];
                let x = feasible(&s, &raw[8..8 + n]);
                let up = feasible(&s, &raw[16..16 + n]);
                let u = s.prox_step(a, &x, &up, beta, p).unwrap();
                prop_assert!(s.set.contains(&u, 1e-12));
                let at_u = prox_objective(&s, a, &x, &up, beta, p, &u);
                let w = feasible(&s, &raw[24..24 + n]);
                prop_assert!(at_u <= prox_objective(&s, a, &x, &up, beta, p, &w) + 1e-9);
            }
        }

        #[test]
        fn projection_is_idempotent_and_nonexpansive(
            n in 1usize..8,
            raw in prop::collection::vec(-4.0f64..4.0, 16),
        ) {
            for s in setups(n.max(2)) {
                let n = s.dim();
                let (z1, z2) = (&raw[..n], &raw[8..8 + n]);
                let p1 = s.set.project(z1).unwrap();
                let p2 = s.set.project(z2).unwrap();
                prop_assert!(s.set.contains(&p1, 1e-12));
                let again = s.set.project(&p1).unwrap();
                prop_assert!(crate::linalg::dist2(&again, &p1) <= 1e-12);
                prop_assert!(crate::linalg::dist2(&p1, &p2) <= crate::linalg::dist2(z1, z2) + 1e-12);
            }
        }
    }
}
