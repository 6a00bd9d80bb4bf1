use super::coupling::{Coupling, SparseMatrix};
use super::{check_point, Game, Point};
use crate::error::{check_len, Error, Result};
use crate::numerics::{self, orthonormalize, streams, DenseMatrix, RngStream};

/// How the coupling matrices `A_i` of a generated game are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingKind {
    /// `[A_i]_{kl} = 1` iff `i = k = l` (zero matrix for `i ≥ d`).
    OneHot,
    /// `A_i = Q_i diag(λ) Q_iᵀ` with a random orthonormal `Q_i` and `λ ~ U(0.1, 1)`.
    Spd,
}

/// Recipe for the generated bilinear family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearSpec {
    pub n: usize,
    pub d: usize,
    pub kind: CouplingKind,
    /// Sets every `b_i = c_i = 0`, so every component vanishes at the solution.
    pub interpolated: bool,
    pub seed: u64,
}

impl BilinearSpec {
    /// `n = d1 = d2 = 100`, one-hot couplings, noisy offsets.
    pub fn standard(seed: u64) -> Self {
        Self {
            n: 100,
            d: 100,
            kind: CouplingKind::OneHot,
            interpolated: false,
            seed,
        }
    }
}

/// `g_i(x1, x2) = x1ᵀ b_i + x1ᵀ A_i x2 + c_iᵀ x2`.
#[derive(Debug, Clone)]
pub struct BilinearGame {
    d1: usize,
    d2: usize,
    a: Vec<Coupling>,
    b: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    mean_a: DenseMatrix,
    mean_b: Vec<f64>,
    mean_c: Vec<f64>,
    label: String,
}

impl BilinearGame {
    pub fn new(a: Vec<Coupling>, b: Vec<Vec<f64>>, c: Vec<Vec<f64>>) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(Error::invalid("n", "a game needs at least one component"));
        }
        check_len("b_i count", n, b.len())?;
        check_len("c_i count", n, c.len())?;
        let d1 = a[0].rows();
        let d2 = a[0].cols();
        if d1 == 0 || d2 == 0 {
            return Err(Error::invalid("dimensions", "d1 and d2 must be >= 1"));
        }
        for ((ai, bi), ci) in a.iter().zip(&b).zip(&c) {
            ai.check_shape(d1, d2)?;
            check_len("b_i length", d1, bi.len())?;
            check_len("c_i length", d2, ci.len())?;
            if bi.iter().chain(ci).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("b_i / c_i"));
            }
        }
        let mut mean_a = DenseMatrix::zeros(d1, d2);
        for ai in &a {
            mean_a = mean_a.add(&ai.to_dense())?;
        }
        let mean_a = mean_a.scaled(1.0 / n as f64);
        if mean_a.max_abs() == 0.0 {
            return Err(Error::Degenerate("mean coupling matrix A is zero".into()));
        }
        let mean_b = mean_of(&b, d1);
        let mean_c = mean_of(&c, d2);
        Ok(Self {
            d1,
            d2,
            a,
            b,
            c,
            mean_a,
            mean_b,
            mean_c,
            label: "bilinear".into(),
        })
    }

    /// Generated family: one-hot or SPD couplings, `b_i, c_i ~ N(0, 1/n)` entrywise.
    pub fn generate(spec: &BilinearSpec) -> Result<Self> {
        if spec.n == 0 || spec.d == 0 {
            return Err(Error::invalid("n/d", "must be >= 1"));
        }
        let mut rng = RngStream::new(spec.seed, streams::GAME);
        let d = spec.d;
        let a: Vec<Coupling> = match spec.kind {
            CouplingKind::OneHot => (0..spec.n)
                .map(|i| {
                    let entries = if i < d { vec![(i, i, 1.0)] } else { vec![] };
                    SparseMatrix::new(d, d, entries).map(Coupling::Sparse)
                })
                .collect::<Result<_>>()?,
            CouplingKind::Spd => (0..spec.n)
                .map(|_| random_spd(d, &mut rng).map(Coupling::Dense))
                .collect::<Result<_>>()?,
        };
        let std = (1.0 / spec.n as f64).sqrt();
        let mut b = Vec::with_capacity(spec.n);
        let mut c = Vec::with_capacity(spec.n);
        for _ in 0..spec.n {
            if spec.interpolated {
                b.push(vec![0.0; d]);
                c.push(vec![0.0; d]);
            } else {
                b.push((0..d).map(|_| std * rng.standard_normal()).collect());
                c.push((0..d).map(|_| std * rng.standard_normal()).collect());
            }
        }
        let mut game = Self::new(a, b, c)?;
        game.label = match (spec.kind, spec.interpolated) {
            (CouplingKind::OneHot, false) => "bilinear",
            (CouplingKind::OneHot, true) => "bilinear-interp",
            (CouplingKind::Spd, false) => "bilinear-spd",
            (CouplingKind::Spd, true) => "bilinear-spd-interp",
        }
        .into();
        Ok(game)
    }

    /// The 100×100, n = 100 game with one-hot couplings.
    pub fn standard(seed: u64) -> Result<Self> {
        Self::generate(&BilinearSpec::standard(seed))
    }

    /// Dense i.i.d. `N(0, 1)` couplings and offsets; a generic test game.
    pub fn random_dense(n: usize, d1: usize, d2: usize, seed: u64) -> Result<Self> {
        let mut rng = RngStream::new(seed, streams::GAME);
        let a = (0..n)
            .map(|_| Coupling::Dense(DenseMatrix::from_fn(d1, d2, |_, _| rng.standard_normal())))
            .collect();
        let b = (0..n)
            .map(|_| (0..d1).map(|_| rng.standard_normal()).collect())
            .collect();
        let c = (0..n)
            .map(|_| (0..d2).map(|_| rng.standard_normal()).collect())
            .collect();
        let mut g = Self::new(a, b, c)?;
        g.label = "bilinear-random".into();
        Ok(g)
    }

    /// Couplings `A_i = U diag(s_i) Vᵀ` sharing random orthonormal `U, V`, with
    /// `s_i ~ U(0.5, 1.5)`. Every product `A_i A_jᵀ` and `A_iᵀ A_j` is then PSD,
    /// so each pair Hamiltonian `H_{i,j}` is convex.
    pub fn random_shared_basis(n: usize, d: usize, seed: u64) -> Result<Self> {
        let mut rng = RngStream::new(seed, streams::GAME);
        let u = orthonormalize(&DenseMatrix::from_fn(d, d, |_, _| rng.standard_normal()))?;
        let v = orthonormalize(&DenseMatrix::from_fn(d, d, |_, _| rng.standard_normal()))?;
        let vt = v.transpose();
        let mut a = Vec::with_capacity(n);
        for _ in 0..n {
            let s: Vec<f64> = (0..d).map(|_| rng.uniform_range(0.5, 1.5)).collect();
            let us = DenseMatrix::from_fn(d, d, |r, c| u.get(r, c) * s[c]);
            a.push(Coupling::Dense(us.matmul(&vt)?));
        }
        let b = (0..n)
            .map(|_| (0..d).map(|_| rng.standard_normal()).collect())
            .collect();
        let c = (0..n)
            .map(|_| (0..d).map(|_| rng.standard_normal()).collect())
            .collect();
        let mut g = Self::new(a, b, c)?;
        g.label = "bilinear-shared-basis".into();
        Ok(g)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.a
    }

    pub fn offsets_b(&self) -> &[Vec<f64>] {
        &self.b
    }

    pub fn offsets_c(&self) -> &[Vec<f64>] {
        &self.c
    }

    /// `A = (1/n) Σ A_i`.
    pub fn mean_coupling(&self) -> &DenseMatrix {
        &self.mean_a
    }

    pub fn mean_b(&self) -> &[f64] {
        &self.mean_b
    }

    pub fn mean_c(&self) -> &[f64] {
        &self.mean_c
    }

    /// `ξ_i` with the coupling scaled by `s`: `(s A_i x2 + b_i, −(s A_iᵀ x1 + c_i))`.
    #[inline]
    pub(crate) fn xi_scaled_into(&self, i: usize, s: f64, x: &[f64], out: &mut [f64]) {
        let (x1, x2) = x.split_at(self.d1);
        let (o1, o2) = out.split_at_mut(self.d1);
        o1.copy_from_slice(&self.b[i]);
        for (o, &c) in o2.iter_mut().zip(&self.c[i]) {
            *o = -c;
        }
        self.a[i].mul_add(x2, s, o1);
        self.a[i].tmul_add(x1, -s, o2);
    }

    /// `out += scale · (−s A_i v2, s A_iᵀ v1)`: the coupling part of `J_iᵀ v`.
    #[inline]
    pub(crate) fn jtv_scaled_add(&self, i: usize, s: f64, v: &[f64], scale: f64, out: &mut [f64]) {
        let (v1, v2) = v.split_at(self.d1);
        let (o1, o2) = out.split_at_mut(self.d1);
        self.a[i].mul_add(v2, -s * scale, o1);
        self.a[i].tmul_add(v1, s * scale, o2);
    }

    /// `x1ᵀ b_i + s x1ᵀ A_i x2 + c_iᵀ x2`.
    pub(crate) fn objective_scaled(&self, i: usize, s: f64, x: &[f64]) -> f64 {
        let (x1, x2) = x.split_at(self.d1);
        let mut ax2 = vec![0.0; self.d1];
        self.a[i].mul_add(x2, 1.0, &mut ax2);
        numerics::dot(x1, &self.b[i]) + s * numerics::dot(x1, &ax2) + numerics::dot(&self.c[i], x2)
    }

    /// A stationary point: `A x2 = −b̄`, `Aᵀ x1 = −c̄`, each solved in the
    /// minimum-norm least-squares sense.
    pub fn solution(&self) -> Result<Point> {
        let neg_b: Vec<f64> = self.mean_b.iter().map(|v| -v).collect();
        let neg_c: Vec<f64> = self.mean_c.iter().map(|v| -v).collect();
        let x2 = numerics::solve_least_squares(&self.mean_a, &neg_b)?;
        let x1 = numerics::solve_least_squares(&self.mean_a.transpose(), &neg_c)?;
        Point::new(&x1, &x2)
    }

    /// Value of `g_i` at `x`.
    pub fn objective(&self, i: usize, x: &Point) -> Result<f64> {
        check_point(self, x)?;
        if i >= self.n() {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.n(),
            });
        }
        Ok(self.objective_scaled(i, 1.0, x.as_slice()))
    }
}

fn mean_of(vs: &[Vec<f64>], len: usize) -> Vec<f64> {
    let mut m = vec![0.0; len];
    for v in vs {
        numerics::axpy(1.0, v, &mut m);
    }
    let inv = 1.0 / vs.len() as f64;
    m.iter_mut().for_each(|x| *x *= inv);
    m
}

fn random_spd(d: usize, rng: &mut RngStream) -> Result<DenseMatrix> {
    let q = orthonormalize(&DenseMatrix::from_fn(d, d, |_, _| rng.standard_normal()))?;
    let lambda: Vec<f64> = (0..d).map(|_| rng.uniform_range(0.1, 1.0)).collect();
    let ql = DenseMatrix::from_fn(d, d, |r, c| q.get(r, c) * lambda[c]);
    Ok(ql.matmul(&q.transpose())?.symmetrized())
}

impl Game for BilinearGame {
    fn n(&self) -> usize {
        self.a.len()
    }

    fn d1(&self) -> usize {
        self.d1
    }

    fn d2(&self) -> usize {
        self.d2
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn xi_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        self.xi_scaled_into(i, 1.0, x, out);
    }

    fn jtv_add(&self, i: usize, _x: &[f64], v: &[f64], scale: f64, out: &mut [f64]) {
        self.jtv_scaled_add(i, 1.0, v, scale, out);
    }

    fn player_losses(&self, i: usize, x: &[f64]) -> (f64, f64) {
        let g = self.objective_scaled(i, 1.0, x);
        (g, -g)
    }

    fn xi_full_into(&self, x: &[f64], out: &mut [f64]) {
        let (x1, x2) = x.split_at(self.d1);
        let (o1, o2) = out.split_at_mut(self.d1);
        o1.copy_from_slice(&self.mean_b);
        for (o, &c) in o2.iter_mut().zip(&self.mean_c) {
            *o = -c;
        }
        self.mean_a.mul_add(x2, 1.0, o1);
        self.mean_a.tmul_add(x1, -1.0, o2);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{jtv_component, xi_component, xi_full};

    fn scalar_game() -> BilinearGame {
        // g = x1 * x2
        let a = vec![Coupling::Dense(DenseMatrix::identity(1))];
        BilinearGame::new(a, vec![vec![0.0]], vec![vec![0.0]]).unwrap()
    }

    #[test]
    fn scalar_xi_and_jtv() {
        let g = scalar_game();
        let x = Point::new(&[1.0], &[1.0]).unwrap();
        assert_eq!(xi_component(&g, 0, &x).unwrap(), vec![1.0, -1.0]);
        assert_eq!(
            jtv_component(&g, 0, &x, &[1.0, -1.0]).unwrap(),
            vec![1.0, 1.0]
        );
        assert_eq!(
            jtv_component(&g, 0, &x, &[0.0, 0.0]).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn out_of_range_and_mismatch_rejected() {
        let g = scalar_game();
        let x = Point::new(&[1.0], &[1.0]).unwrap();
        assert!(matches!(
            xi_component(&g, 1, &x),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(jtv_component(&g, 0, &x, &[1.0]).is_err());
        let bad = Point::new(&[1.0, 2.0], &[1.0]).unwrap();
        assert!(xi_component(&g, 0, &bad).is_err());
    }

    #[test]
    fn zero_offsets_zero_at_origin() {
        let spec = BilinearSpec {
            n: 5,
            d: 4,
            kind: CouplingKind::OneHot,
            interpolated: true,
            seed: 1,
        };
        let g = BilinearGame::generate(&spec).unwrap();
        let x = Point::zeros(4, 4);
        for i in 0..5 {
            assert!(xi_component(&g, i, &x).unwrap().iter().all(|&v| v == 0.0));
        }
        assert!(xi_full(&g, &x).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn xi_full_matches_closed_form_mean() {
        let g = BilinearGame::random_dense(4, 3, 5, 11).unwrap();
        let mut rng = RngStream::new(1, 9);
        let x: Vec<f64> = (0..8).map(|_| rng.standard_normal()).collect();
        let p = Point::from_flat(x.clone(), 3).unwrap();
        // generic mean over components, independent of the specialised override
        let mut generic = vec![0.0; 8];
        for i in 0..4 {
            let xi = xi_component(&g, i, &p).unwrap();
            numerics::axpy(0.25, &xi, &mut generic);
        }
        let fast = xi_full(&g, &p).unwrap();
        for (a, b) in generic.iter().zip(&fast) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn standard_game_structure() {
        let g = BilinearGame::standard(3).unwrap();
        assert_eq!((g.n(), g.d1(), g.d2()), (100, 100, 100));
        let a = g.mean_coupling();
        for r in 0..100 {
            for c in 0..100 {
                let want = if r == c { 0.01 } else { 0.0 };
                assert_eq!(a.get(r, c), want);
            }
        }
        let again = BilinearGame::standard(3).unwrap();
        assert_eq!(g.offsets_b(), again.offsets_b());
        assert_eq!(g.offsets_c(), again.offsets_c());
        let other = BilinearGame::standard(4).unwrap();
        assert_ne!(g.offsets_b(), other.offsets_b());
    }

    #[test]
    fn standard_solution_closed_form() {
        let g = BilinearGame::standard(5).unwrap();
        let xs = g.solution().unwrap();
        for (x2, b) in xs.x2().iter().zip(g.mean_b()) {
            assert!((x2 + 100.0 * b).abs() < 1e-10);
        }
        let r = xi_full(&g, &xs).unwrap();
        let scale = 1.0 + numerics::norm(g.mean_b()) + numerics::norm(g.mean_c());
        assert!(numerics::norm(&r) <= 1e-10 * scale);
    }

    #[test]
    fn random_game_solution_is_stationary() {
        let g = BilinearGame::random_dense(3, 4, 4, 21).unwrap();
        let xs = g.solution().unwrap();
        assert!(numerics::norm(&xi_full(&g, &xs).unwrap()) <= 1e-10);
    }

    #[test]
    fn interpolated_solution_is_origin() {
        let spec = BilinearSpec {
            n: 3,
            d: 3,
            kind: CouplingKind::Spd,
            interpolated: true,
            seed: 2,
        };
        let g = BilinearGame::generate(&spec).unwrap();
        assert!(g.solution().unwrap().as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_mean_coupling_rejected() {
        let a = vec![
            Coupling::Dense(DenseMatrix::identity(2)),
            Coupling::Dense(DenseMatrix::identity(2).scaled(-1.0)),
        ];
        let z = vec![vec![0.0; 2]; 2];
        assert!(matches!(
            BilinearGame::new(a, z.clone(), z),
            Err(Error::Degenerate(_))
        ));
    }
}
