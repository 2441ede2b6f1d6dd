//! Planar array geometry, the array manifold and the DFT beam codebook.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector};

/// Uniform planar array in the `z = 0` plane of the satellite body frame.
///
/// Element `m = ix · n_y + iy` sits at `(ix · d, iy · d, 0)` with `d` the
/// spacing in meters, so the manifold factors as a Kronecker product of the
/// per-axis steering vectors in the same order as the codebook.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub n_x: usize,
    pub n_y: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
    /// Element positions in meters.
    pub element_positions: Vec<[f64; 3]>,
    /// `true` for the uniform grid layout described above.
    pub grid: bool,
}

impl ArrayGeometry {
    pub fn uniform_planar(n_x: usize, n_y: usize, spacing: f64, wavelength: f64) -> Self {
        let d = spacing * wavelength;
        let element_positions = (0..n_x)
            .flat_map(|ix| (0..n_y).map(move |iy| [ix as f64 * d, iy as f64 * d, 0.0]))
            .collect();
        Self {
            n_x,
            n_y,
            spacing,
            element_positions,
            grid: true,
        }
    }

    /// Arbitrary element layout; the DFT codebook is unavailable for these.
    pub fn from_positions(positions: Vec<[f64; 3]>) -> Self {
        Self {
            n_x: positions.len(),
            n_y: 1,
            spacing: 0.0,
            element_positions: positions,
            grid: false,
        }
    }

    pub fn n_elements(&self) -> usize {
        self.element_positions.len()
    }
}

/// Wave vector `κ = (2π/λ)[sinθ cosφ, sinθ sinφ, cosθ]`.
pub fn wave_vector(theta: f64, phi: f64, wavelength: f64) -> [f64; 3] {
    let k = 2.0 * PI / wavelength;
    [
        k * theta.sin() * phi.cos(),
        k * theta.sin() * phi.sin(),
        k * theta.cos(),
    ]
}

/// Unit-norm array response `a = N_t^{-1/2} [e^{jκ·r_m}]_m`.
pub fn array_manifold(
    theta: f64,
    phi: f64,
    geom: &ArrayGeometry,
    wavelength: f64,
) -> ComplexVector {
    let kv = wave_vector(theta, phi, wavelength);
    let n = geom.n_elements();
    let norm = 1.0 / (n as f64).sqrt();
    ComplexVector::from_iterator(
        n,
        geom.element_positions.iter().map(|r| {
            let phase = kv[0] * r[0] + kv[1] * r[1] + kv[2] * r[2];
            Complex64::from_polar(norm, phase)
        }),
    )
}

/// Per-axis factors `(a_x, a_y)` of a grid-array manifold, `a = a_x ⊗ a_y`.
/// The `N_t^{-1/2}` normalization is carried by `a_y`.
pub fn grid_axes(
    theta: f64,
    phi: f64,
    geom: &ArrayGeometry,
    wavelength: f64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    debug_assert!(geom.grid);
    let kv = wave_vector(theta, phi, wavelength);
    let d = geom.spacing * wavelength;
    let norm = 1.0 / ((geom.n_x * geom.n_y) as f64).sqrt();
    let ax = (0..geom.n_x)
        .map(|ix| Complex64::from_polar(1.0, kv[0] * ix as f64 * d))
        .collect();
    let ay = (0..geom.n_y)
        .map(|iy| Complex64::from_polar(norm, kv[1] * iy as f64 * d))
        .collect();
    (ax, ay)
}

/// Same as [`array_manifold`] for a grid array, evaluated through the
/// per-axis factorization (`n_x + n_y` complex exponentials instead of `N_t`).
pub fn grid_manifold(theta: f64, phi: f64, geom: &ArrayGeometry, wavelength: f64) -> ComplexVector {
    let (ax, ay) = grid_axes(theta, phi, geom, wavelength);
    ComplexVector::from_iterator(
        geom.n_x * geom.n_y,
        ax.iter().flat_map(|&x| ay.iter().map(move |&y| x * y)),
    )
}

/// Critically sampled 2-D DFT codebook of a uniform planar array.
///
/// Codeword `c = kx · n_y + ky` is `f_kx ⊗ f_ky` with
/// `f_k[m] = e^{j2πkm/N} / √N`.
#[derive(Debug, Clone)]
pub struct Codebook {
    n_x: usize,
    n_y: usize,
    /// `dft_x[(m, k)] = f_k[m]` for the x axis.
    dft_x: ComplexMatrix,
    dft_y: ComplexMatrix,
}

fn dft_matrix(n: usize) -> ComplexMatrix {
    let norm = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, n, |m, k| {
        let phase = 2.0 * PI * ((m * k) % n) as f64 / n as f64;
        Complex64::from_polar(norm, phase)
    })
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_elements(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn codeword(&self, index: usize) -> ComplexVector {
        let (kx, ky) = (index / self.n_y, index % self.n_y);
        let fx = self.dft_x.column(kx);
        let fy = self.dft_y.column(ky);
        ComplexVector::from_iterator(
            self.n_elements(),
            fx.iter().flat_map(|&x| fy.iter().map(move |&y| x * y)),
        )
    }

    pub fn codewords(&self) -> Vec<ComplexVector> {
        (0..self.len()).map(|i| self.codeword(i)).collect()
    }

    /// `N_t × |indices|` matrix whose columns are the requested codewords.
    pub fn matrix(&self, indices: &[usize]) -> ComplexMatrix {
        let mut f = ComplexMatrix::zeros(self.n_elements(), indices.len());
        for (j, &idx) in indices.iter().enumerate() {
            f.set_column(j, &self.codeword(idx));
        }
        f
    }

    /// Received inner products `row · c` for every codeword, where `row` is
    /// a channel row (`h̃ᴴ`). Separable: `F_xᵀ R F_y` with `R` the row folded
    /// to `n_x × n_y`.
    pub fn responses(&self, row: &[Complex64]) -> Vec<Complex64> {
        let folded = ComplexMatrix::from_fn(self.n_x, self.n_y, |ix, iy| row[ix * self.n_y + iy]);
        let p = self.dft_x.transpose() * folded * &self.dft_y;
        (0..self.len())
            .map(|idx| p[(idx / self.n_y, idx % self.n_y)])
            .collect()
    }

    pub fn powers(&self, row: &[Complex64]) -> Vec<f64> {
        self.responses(row)
            .into_iter()
            .map(|z| z.norm_sqr())
            .collect()
    }

    /// [`powers`](Self::powers) of a separable row `r_x ⊗ r_y`, in
    /// `O(n_x² + n_y²)`.
    pub fn separable_powers(&self, rx: &[Complex64], ry: &[Complex64]) -> Vec<f64> {
        let axis = |r: &[Complex64], dft: &ComplexMatrix| -> Vec<f64> {
            (0..dft.ncols())
                .map(|k| {
                    r.iter()
                        .enumerate()
                        .map(|(m, &z)| z * dft[(m, k)])
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .collect()
        };
        let px = axis(rx, &self.dft_x);
        let py = axis(ry, &self.dft_y);
        px.iter()
            .flat_map(|&x| py.iter().map(move |&y| x * y))
            .collect()
    }
}

/// Builds the `n_x · n_y` DFT beam set of a grid array.
pub fn dft_codebook(geom: &ArrayGeometry) -> Result<Codebook> {
    if !geom.grid || geom.n_x * geom.n_y != geom.n_elements() || geom.n_elements() == 0 {
        return Err(Error::UnsupportedGeometry(
            "DFT codebook needs a uniform planar grid".into(),
        ));
    }
    Ok(Codebook {
        n_x: geom.n_x,
        n_y: geom.n_y,
        dft_x: dft_matrix(geom.n_x),
        dft_y: dft_matrix(geom.n_y),
    })
}

/// Analog beam assignment: the steering matrix and the codebook indices of
/// its columns (the first `K` columns belong to the UTs in order).
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSelection {
    pub f_rf: ComplexMatrix,
    pub indices: Vec<usize>,
}

fn ranked(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Best-power beam selection.
///
/// UTs are served in row order; each takes its strongest codeword
/// (`|h̃ᴴ c|²`, ties to the lower index) not already taken. RF chains left
/// over after the `K` UTs are filled with the unused codewords of highest
/// total power across all UTs.
pub fn select_beams(
    h_tilde: &ComplexMatrix,
    codebook: &Codebook,
    n_rf: usize,
) -> Result<BeamSelection> {
    let k = h_tilde.nrows();
    if h_tilde.ncols() != codebook.n_elements() {
        return Err(crate::error::dim_mismatch(
            "select_beams",
            format!("{} columns", codebook.n_elements()),
            format!("{}", h_tilde.ncols()),
        ));
    }
    if k > n_rf || n_rf > codebook.len() {
        return Err(Error::InvalidArgument(format!(
            "need K <= N_RF <= |codebook|, got K = {k}, N_RF = {n_rf}, |codebook| = {}",
            codebook.len()
        )));
    }
    let powers: Vec<Vec<f64>> = (0..k)
        .map(|n| {
            let row: Vec<Complex64> = h_tilde.row(n).iter().copied().collect();
            codebook.powers(&row)
        })
        .collect();
    let indices = assign_beams(&powers, n_rf, codebook.len());
    Ok(BeamSelection {
        f_rf: codebook.matrix(&indices),
        indices,
    })
}

/// Index assignment behind [`select_beams`], given per-UT codeword powers.
pub fn assign_beams(powers: &[Vec<f64>], n_rf: usize, n_codewords: usize) -> Vec<usize> {
    let mut used = vec![false; n_codewords];
    let mut indices = Vec::with_capacity(n_rf);
    for p in powers {
        let pick = ranked(p)
            .into_iter()
            .find(|&c| !used[c])
            .expect("K <= codebook size");
        used[pick] = true;
        indices.push(pick);
    }
    if indices.len() < n_rf {
        let total: Vec<f64> = (0..n_codewords)
            .map(|c| powers.iter().map(|p| p[c]).sum())
            .collect();
        for c in ranked(&total) {
            if indices.len() == n_rf {
                break;
            }
            if !used[c] {
                used[c] = true;
                indices.push(c);
            }
        }
    }
    indices
}
