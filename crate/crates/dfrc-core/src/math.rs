//! Small numerical toolkit: complex vectors and dense matrices, quadrature,
//! peak interpolation, FFT wrappers, and seeded random sampling.
//!
//! The problem sizes in this crate are tiny (matrices up to a few dozen rows),
//! so the linear algebra is hand-rolled dense code with partial pivoting
//! rather than a BLAS binding. Everything here is deterministic for a fixed
//! seed and thread count.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Complex double-precision scalar used throughout the crate.
pub type C64 = Complex64;

/// Propagation speed used for all range/wavelength conversions, m/s.
///
/// The round value (rather than the CODATA constant) keeps derived quantities
/// such as range resolution and wavelength at the round numbers the rest of
/// the parameter set is built from.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

// ── Complex vector helpers ──────────────────────────────────────────────────

/// Plain dot product `Σ a_i b_i` (no conjugation).
pub fn cdot(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Hermitian inner product `Σ conj(a_i) b_i`.
pub fn cdot_h(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Squared Euclidean norm `Σ |a_i|²`.
pub fn norm_sq(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Euclidean norm.
pub fn norm(a: &[C64]) -> f64 {
    norm_sq(a).sqrt()
}

/// Returns a unit-norm copy of `a`; errors on the zero vector.
pub fn normalized(a: &[C64]) -> Result<Vec<C64>> {
    let n = norm(a);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::numerical("cannot normalize zero or non-finite vector"));
    }
    Ok(a.iter().map(|x| x / n).collect())
}

/// `y ← y + s·x`.
pub fn axpy(s: C64, x: &[C64], y: &mut [C64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

// ── Dense complex matrix ────────────────────────────────────────────────────

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    /// Number of rows.
    pub nr: usize,
    /// Number of columns.
    pub nc: usize,
    data: Vec<C64>,
}

impl CMat {
    /// All-zero matrix.
    pub fn zeros(nr: usize, nc: usize) -> Self {
        CMat {
            nr,
            nc,
            data: vec![C64::new(0.0, 0.0); nr * nc],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row slices; all rows must share a length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let nr = rows.len();
        let nc = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nr * nc);
        for r in rows {
            assert_eq!(r.len(), nc, "ragged rows");
            data.extend_from_slice(r);
        }
        CMat { nr, nc, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[Vec<C64>]) -> Self {
        let nc = cols.len();
        let nr = cols.first().map_or(0, Vec::len);
        let mut m = CMat::zeros(nr, nc);
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), nr, "ragged columns");
            for i in 0..nr {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    /// Borrow row `i` as a slice.
    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.nc..(i + 1) * self.nc]
    }

    /// Copy column `j` out as a vector.
    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.nr).map(|i| self[(i, j)]).collect()
    }

    /// Overwrite column `j`.
    pub fn set_col(&mut self, j: usize, v: &[C64]) {
        assert_eq!(v.len(), self.nr);
        for i in 0..self.nr {
            self[(i, j)] = v[i];
        }
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.nc, rhs.nr, "dimension mismatch in mul");
        let mut out = CMat::zeros(self.nr, rhs.nc);
        for i in 0..self.nr {
            for k in 0..self.nc {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.nc {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// Matrix-vector product `self · x`.
    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.nc, x.len());
        (0..self.nr).map(|i| cdot(self.row(i), x)).collect()
    }

    /// Conjugate transpose.
    pub fn herm(&self) -> CMat {
        let mut out = CMat::zeros(self.nc, self.nr);
        for i in 0..self.nr {
            for j in 0..self.nc {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Elementwise sum.
    pub fn add(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.nr, self.nc), (rhs.nr, rhs.nc));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
        out
    }

    /// Scalar multiple.
    pub fn scaled(&self, s: C64) -> CMat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    /// Adds `s` to every diagonal entry (matrix must be square).
    pub fn add_diag(&self, s: C64) -> CMat {
        assert_eq!(self.nr, self.nc);
        let mut out = self.clone();
        for i in 0..self.nr {
            out[(i, i)] += s;
        }
        out
    }

    /// Frobenius norm squared of the difference `self − rhs`.
    pub fn diff_norm_sq(&self, rhs: &CMat) -> f64 {
        assert_eq!((self.nr, self.nc), (rhs.nr, rhs.nc));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum()
    }

    /// Solves `self · x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        assert_eq!(self.nr, self.nc, "solve requires a square matrix");
        assert_eq!(b.len(), self.nr);
        let n = self.nr;
        let mut a = self.data.clone();
        let mut x: Vec<C64> = b.to_vec();
        for col in 0..n {
            // Partial pivot on the largest remaining magnitude.
            let (piv, piv_mag) = (col..n)
                .map(|r| (r, a[r * n + col].norm()))
                .max_by(|p, q| p.1.total_cmp(&q.1))
                .unwrap();
            if piv_mag < 1e-300 {
                return Err(Error::numerical("singular matrix in solve"));
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                x.swap(col, piv);
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in col..n {
                    let v = a[col * n + j];
                    a[r * n + j] -= f * v;
                }
                let xc = x[col];
                x[r] -= f * xc;
            }
        }
        for col in (0..n).rev() {
            let mut s = x[col];
            for j in col + 1..n {
                s -= a[col * n + j] * x[j];
            }
            x[col] = s / a[col * n + col];
        }
        Ok(x)
    }

    /// Cholesky factor `L` (lower triangular) of a Hermitian positive-definite
    /// matrix, so that `self = L·Lᴴ`.
    pub fn cholesky(&self) -> Result<CMat> {
        assert_eq!(self.nr, self.nc);
        let n = self.nr;
        let mut l = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                if i == j {
                    let d = s.re;
                    if d <= 0.0 || s.im.abs() > 1e-9 * d.abs().max(1e-300) {
                        return Err(Error::numerical(
                            "matrix is not Hermitian positive definite in cholesky",
                        ));
                    }
                    l[(i, i)] = C64::new(d.sqrt(), 0.0);
                } else {
                    l[(i, j)] = s / l[(j, j)];
                }
            }
        }
        Ok(l)
    }

    /// Solves `L·x = b` for lower-triangular `L`.
    pub fn solve_lower(&self, b: &[C64]) -> Vec<C64> {
        let n = self.nr;
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self[(i, k)] * x[k];
            }
            x[i] = s / self[(i, i)];
        }
        x
    }

    /// Solves `Lᴴ·x = b` for lower-triangular `L`.
    pub fn solve_lower_herm(&self, b: &[C64]) -> Vec<C64> {
        let n = self.nr;
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self[(k, i)].conj() * x[k];
            }
            x[i] = s / self[(i, i)].conj();
        }
        x
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.nc + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.nc + j]
    }
}

/// Largest Rayleigh quotient `xᴴ·Q1·x / xᴴ·Q2·x` and its maximizer.
///
/// `q1` must be Hermitian positive semidefinite and `q2` Hermitian positive
/// definite. The pencil is whitened with the Cholesky factor of `q2` and the
/// dominant eigenvector of the whitened matrix is found by power iteration,
/// which converges quickly here because `q1` always has small rank in this
/// crate. The returned vector has unit norm and its first component of
/// largest magnitude is rotated to the positive real axis so repeated calls
/// are comparable.
pub fn principal_generalized_eig(q1: &CMat, q2: &CMat) -> Result<(Vec<C64>, f64)> {
    assert_eq!(q1.nr, q1.nc);
    assert_eq!(q2.nr, q2.nc);
    assert_eq!(q1.nr, q2.nr);
    let n = q1.nr;
    let l = q2.cholesky()?;
    // Whitened matrix G = L⁻¹·Q1·L⁻ᴴ, applied implicitly to vectors.
    let apply = |v: &[C64]| -> Vec<C64> {
        let a = l.solve_lower_herm(v);
        let b = q1.mul_vec(&a);
        l.solve_lower(&b)
    };
    // Deterministic start: unit vector with the largest response.
    let mut u = vec![C64::new(0.0, 0.0); n];
    let mut best = (0usize, -1.0f64);
    for i in 0..n {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[i] = C64::new(1.0, 0.0);
        let r = norm(&apply(&e));
        if r > best.1 {
            best = (i, r);
        }
    }
    if best.1 <= 0.0 {
        // Q1 is the zero matrix: any direction attains quotient 0.
        u[0] = C64::new(1.0, 0.0);
        let x = l.solve_lower_herm(&u);
        return Ok((normalized(&x)?, 0.0));
    }
    u[best.0] = C64::new(1.0, 0.0);
    let mut lambda = 0.0;
    for _ in 0..500 {
        let w = apply(&u);
        let nw = norm(&w);
        if nw == 0.0 {
            break;
        }
        let next: Vec<C64> = w.iter().map(|x| x / nw).collect();
        let new_lambda = nw;
        let delta = (new_lambda - lambda).abs();
        u = next;
        lambda = new_lambda;
        if delta <= 1e-14 * lambda.max(1.0) {
            break;
        }
    }
    let mut x = l.solve_lower_herm(&u);
    let nx = norm(&x);
    for v in x.iter_mut() {
        *v /= nx;
    }
    // Fix the overall phase for reproducibility.
    let (imax, _) = x
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .unwrap();
    let ph = x[imax] / x[imax].norm();
    for v in x.iter_mut() {
        *v /= ph;
    }
    Ok((x, lambda))
}

// ── Scalar special functions and quadrature ─────────────────────────────────

/// Gaussian tail probability `Q(x) = P[N(0,1) > x]`.
pub fn q_func(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Nodes and weights of the 20-point Gauss-Legendre rule on `[-1, 1]`
/// (positive half; the rule is symmetric).
const GL20: [(f64, f64); 10] = [
    (0.0765265211334973, 0.1527533871307258),
    (0.2277858511416451, 0.1491729864726037),
    (0.3737060887154195, 0.1420961093183820),
    (0.5108670019508271, 0.1316886384491766),
    (0.6360536807265150, 0.1181945319615184),
    (0.7463319064601508, 0.1019301198172404),
    (0.8391169718222188, 0.0832767415767048),
    (0.9122344282513259, 0.0626720483341091),
    (0.9639719272779138, 0.0406014298003869),
    (0.9931285991850949, 0.0176140071391521),
];

/// Integrates `f` over `[a, b]` with a composite 20-point Gauss-Legendre
/// rule split into `panels` equal panels.
pub fn integrate_gl<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for (x, w) in GL20 {
            acc += w * (f(mid + half * x) + f(mid - half * x));
        }
        total += acc * half;
    }
    total
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(&f, a, fa, b, fb);
    recurse(&f, a, fa, b, fb, whole, m, fm, tol, 48)
}

/// Vertex offset of the parabola through `(-1, ym1)`, `(0, y0)`, `(1, yp1)`,
/// clamped to `[-0.5, 0.5]`. Used to refine spectral peak locations.
pub fn parabolic_peak_offset(ym1: f64, y0: f64, yp1: f64) -> f64 {
    let denom = ym1 - 2.0 * y0 + yp1;
    if denom.abs() < 1e-300 {
        return 0.0;
    }
    (0.5 * (ym1 - yp1) / denom).clamp(-0.5, 0.5)
}

// ── FFT wrappers ────────────────────────────────────────────────────────────

/// In-place forward FFT.
pub fn fft_forward(buf: &mut [C64]) {
    FftPlanner::new().plan_fft_forward(buf.len()).process(buf);
}

/// In-place inverse FFT including the `1/N` normalization.
pub fn fft_inverse(buf: &mut [C64]) {
    FftPlanner::new().plan_fft_inverse(buf.len()).process(buf);
    let n = buf.len() as f64;
    for v in buf.iter_mut() {
        *v /= n;
    }
}

/// Signed frequency of FFT bin `i` for an `n`-point transform at sampling
/// rate `fs` (bins above `n/2` map to negative frequencies).
pub fn fft_bin_freq(i: usize, n: usize, fs: f64) -> f64 {
    let i = i as f64;
    let n = n as f64;
    if i <= n / 2.0 {
        i * fs / n
    } else {
        (i - n) * fs / n
    }
}

// ── Random sampling ─────────────────────────────────────────────────────────

/// Deterministic RNG for a top-level seed and an independent stream index.
///
/// Every Monte-Carlo cell derives its own stream so results do not depend on
/// scheduling order or thread count.
pub fn derive_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One standard normal sample via Box-Muller.
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u1: f64 = rng.gen();
        if u1 <= f64::MIN_POSITIVE {
            continue;
        }
        let u2: f64 = rng.gen();
        return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
    }
}

/// Circularly symmetric complex Gaussian sample with total variance `var`
/// (`var/2` per real dimension).
pub fn complex_gaussian<R: Rng>(rng: &mut R, var: f64) -> C64 {
    let s = (var / 2.0).sqrt();
    C64::new(s * standard_normal(rng), s * standard_normal(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-10;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn solve_recovers_known_solution() {
        // 1. Build A·x = b with a known x and check the solver returns it.
        let a = CMat::from_rows(&[
            vec![c(2.0, 1.0), c(0.5, -0.3), c(0.0, 1.0)],
            vec![c(-1.0, 0.2), c(3.0, 0.0), c(0.7, 0.7)],
            vec![c(0.1, -0.9), c(0.4, 0.4), c(2.5, -0.5)],
        ]);
        let x_true = vec![c(1.0, -2.0), c(0.5, 0.25), c(-1.5, 1.0)];
        let b = a.mul_vec(&x_true);
        let x = a.solve(&b).unwrap();
        for (got, want) in x.iter().zip(&x_true) {
            assert!((got - want).norm() < TOL, "solve mismatch: {got} vs {want}");
        }
    }

    #[test]
    fn solve_rejects_singular() {
        // 2. A rank-1 matrix must produce a numerical error, not garbage.
        let a = CMat::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]]);
        assert!(matches!(a.solve(&[c(1.0, 0.0), c(1.0, 0.0)]), Err(Error::Numerical(_))));
    }

    #[test]
    fn cholesky_roundtrip() {
        // 3. L·Lᴴ reproduces the original Hermitian positive-definite matrix.
        let g = CMat::from_rows(&[
            vec![c(1.0, 0.5), c(0.2, -0.1)],
            vec![c(-0.3, 0.8), c(1.5, 0.0)],
            vec![c(0.6, 0.0), c(0.1, 0.9)],
        ]);
        let a = g.herm().mul(&g).add_diag(c(0.5, 0.0));
        let l = a.cholesky().unwrap();
        let back = l.mul(&l.herm());
        assert!(a.diff_norm_sq(&back) < TOL, "cholesky roundtrip failed");
    }

    #[test]
    fn generalized_eig_matches_direct_search_rank_one() {
        // 4. For Q1 = z·zᴴ the maximizer of the quotient is Q2⁻¹·z up to
        //    scale, with value zᴴ·Q2⁻¹·z.
        let z = vec![c(1.0, 0.3), c(-0.5, 0.2), c(0.1, -0.7)];
        let q1 = CMat::from_cols(&[z.clone()]).mul(&CMat::from_cols(&[z.clone()]).herm());
        let g = CMat::from_rows(&[
            vec![c(0.9, 0.1), c(0.2, 0.2), c(0.0, -0.4)],
            vec![c(0.3, 0.0), c(1.1, -0.2), c(0.5, 0.1)],
            vec![c(-0.2, 0.6), c(0.0, 0.3), c(0.8, 0.0)],
        ]);
        let q2 = g.herm().mul(&g).add_diag(c(1.0, 0.0));
        let (x, lam) = principal_generalized_eig(&q1, &q2).unwrap();
        let expect = cdot_h(&z, &q2.solve(&z).unwrap()).re;
        assert!(
            (lam - expect).abs() < 1e-9 * expect,
            "eigenvalue {lam} vs closed form {expect}"
        );
        // Quotient at the returned vector equals the eigenvalue.
        let num = cdot_h(&x, &q1.mul_vec(&x)).re;
        let den = cdot_h(&x, &q2.mul_vec(&x)).re;
        assert!((num / den - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn gl_and_simpson_agree_on_oscillatory_integral() {
        // 5. ∫₀^π sin(5t) dt = 2/5 exactly.
        let f = |t: f64| (5.0 * t).sin();
        let exact = 2.0 / 5.0;
        assert!((integrate_gl(f, 0.0, std::f64::consts::PI, 4) - exact).abs() < 1e-12);
        assert!((adaptive_simpson(f, 0.0, std::f64::consts::PI, 1e-12) - exact).abs() < 1e-10);
    }

    #[test]
    fn q_func_reference_values() {
        // 6. Q(0) = 1/2 and a standard table value.
        assert!((q_func(0.0) - 0.5).abs() < 1e-15);
        assert!((q_func(1.0) - 0.158_655_253_931_457_05).abs() < 1e-12);
        assert!((q_func(-1.0) - (1.0 - 0.158_655_253_931_457_05)).abs() < 1e-12);
    }

    #[test]
    fn fft_roundtrip_and_parseval() {
        // 7. ifft(fft(x)) = x and energy is preserved under the 1/N scaling.
        let mut rng = derive_rng(7, 0);
        let x: Vec<C64> = (0..256).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let mut y = x.clone();
        fft_forward(&mut y);
        let e_time: f64 = norm_sq(&x);
        let e_freq: f64 = norm_sq(&y) / x.len() as f64;
        assert!((e_time - e_freq).abs() < 1e-9 * e_time);
        fft_inverse(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn derived_rng_streams_are_independent_and_stable() {
        // 8. Same (seed, stream) reproduces bytes; different streams differ.
        let a: Vec<u64> = (0..4).map(|_| derive_rng(42, 1).gen::<u64>()).collect();
        let b: Vec<u64> = (0..4).map(|_| derive_rng(42, 1).gen::<u64>()).collect();
        assert_eq!(a, b);
        assert_ne!(derive_rng(42, 1).gen::<u64>(), derive_rng(42, 2).gen::<u64>());
    }

    #[test]
    fn gaussian_moments() {
        // 9. Sample mean/variance of the complex Gaussian match (0, var).
        let mut rng = derive_rng(3, 0);
        let n = 20_000;
        let var = 2.5;
        let mut mean = c(0.0, 0.0);
        let mut second = 0.0;
        for _ in 0..n {
            let z = complex_gaussian(&mut rng, var);
            mean += z;
            second += z.norm_sqr();
        }
        mean /= n as f64;
        second /= n as f64;
        assert!(mean.norm() < 0.05, "mean {mean}");
        assert!((second - var).abs() < 0.1, "variance {second}");
    }

    #[test]
    fn parabolic_offset_recovers_vertex() {
        // 10. Sampling y = -(x - 0.3)² at x = -1, 0, 1 gives offset 0.3.
        let f = |x: f64| -(x - 0.3) * (x - 0.3);
        let off = parabolic_peak_offset(f(-1.0), f(0.0), f(1.0));
        assert!((off - 0.3).abs() < 1e-12);
    }
}
