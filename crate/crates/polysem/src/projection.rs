//! PCA projection to 2D for the semantic-space scatter exports.
//!
//! The eigendecomposition is cyclic Jacobi on the sample covariance matrix;
//! dimensionalities here stay in the low hundreds so convergence is quick
//! and there is no linear-algebra dependency to carry.

use thiserror::Error;

use crate::embeddings::EmbeddingModel;
use crate::num::Real;

#[derive(Debug, Error)]
pub enum PcaError {
    #[error("need at least 2 rows to fit PCA, got {0}")]
    TooFewRows(usize),
    #[error("n_components={requested} out of range [1, {max}]")]
    ComponentsOutOfRange { requested: usize, max: usize },
    #[error("data has zero total variance")]
    ZeroVariance,
    #[error("non-finite entry in input data")]
    NonFinite,
    #[error("expected {expected} columns, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("words not in vocabulary: {0:?}")]
    OutOfVocabulary(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct PcaModel<R: Real> {
    pub mean: Vec<R>,
    /// n_components rows of length dim; rows are orthonormal.
    pub components: Vec<Vec<R>>,
    /// Sample variance (divisor n-1) along each component, non-increasing.
    pub explained_variance: Vec<R>,
}

impl<R: Real> PcaModel<R> {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns (eigenvalues, eigenvectors as columns), unsorted.
fn jacobi_eigen<R: Real>(mut a: Vec<Vec<R>>) -> (Vec<R>, Vec<Vec<R>>) {
    let n = a.len();
    let mut v = vec![vec![R::zero(); n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = R::one();
    }
    if n <= 1 {
        return (a.iter().enumerate().map(|(i, r)| r[i]).collect(), v);
    }
    let eps = R::epsilon();
    let two = R::from_f64_c(2.0);
    for _sweep in 0..100 {
        let mut off = R::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        let diag_scale: R = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= eps * eps * (diag_scale + off).max(R::one()) {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                if a[p][q].abs() <= eps * (a[p][p].abs() + a[q][q].abs()).max(eps) {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (two * a[p][q]);
                let t = {
                    let s = if theta >= R::zero() { R::one() } else { -R::one() };
                    s / (theta.abs() + (theta * theta + R::one()).sqrt())
                };
                let c = R::one() / (t * t + R::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// Fit PCA on an n×dim row-major matrix.
pub fn pca_fit<R: Real>(
    data: &[Vec<R>],
    n_components: usize,
) -> Result<PcaModel<R>, PcaError> {
    let n = data.len();
    if n < 2 {
        return Err(PcaError::TooFewRows(n));
    }
    let dim = data[0].len();
    let max_components = (n - 1).min(dim);
    if n_components < 1 || n_components > max_components {
        return Err(PcaError::ComponentsOutOfRange {
            requested: n_components,
            max: max_components,
        });
    }
    for row in data {
        if row.len() != dim {
            return Err(PcaError::DimMismatch {
                expected: dim,
                got: row.len(),
            });
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(PcaError::NonFinite);
        }
    }

    let nf = R::from_usize(n).unwrap();
    let mut mean = vec![R::zero(); dim];
    for row in data {
        for (m, &x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= nf);

    let denom = R::from_usize(n - 1).unwrap();
    let mut cov = vec![vec![R::zero(); dim]; dim];
    for row in data {
        let centered: Vec<R> = row.iter().zip(&mean).map(|(&x, &m)| x - m).collect();
        for i in 0..dim {
            for j in i..dim {
                cov[i][j] += centered[i] * centered[j] / denom;
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            cov[i][j] = cov[j][i];
        }
    }
    let total_variance: R = (0..dim).map(|i| cov[i][i]).sum();
    if total_variance <= R::zero() {
        return Err(PcaError::ZeroVariance);
    }

    let (eigvals, eigvecs) = jacobi_eigen(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eigvals[j].partial_cmp(&eigvals[i]).unwrap().then(i.cmp(&j)));

    let mut components = Vec::with_capacity(n_components);
    let mut explained_variance = Vec::with_capacity(n_components);
    for &idx in order.iter().take(n_components) {
        let mut comp: Vec<R> = (0..dim).map(|k| eigvecs[k][idx]).collect();
        // sign convention: largest-magnitude entry positive
        let lead = comp
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap().then(b.0.cmp(&a.0)))
            .map(|(_, &x)| x)
            .unwrap();
        if lead < R::zero() {
            comp.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(comp);
        explained_variance.push(eigvals[idx].max(R::zero()));
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
    })
}

pub fn pca_transform<R: Real>(
    model: &PcaModel<R>,
    vectors: &[Vec<R>],
) -> Result<Vec<Vec<R>>, PcaError> {
    let dim = model.dim();
    let mut out = Vec::with_capacity(vectors.len());
    for row in vectors {
        if row.len() != dim {
            return Err(PcaError::DimMismatch {
                expected: dim,
                got: row.len(),
            });
        }
        let centered: Vec<R> = row.iter().zip(&model.mean).map(|(&x, &m)| x - m).collect();
        out.push(
            model
                .components
                .iter()
                .map(|c| c.iter().zip(&centered).map(|(&a, &b)| a * b).sum())
                .collect(),
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint<R: Real> {
    pub word: String,
    pub group: String,
    pub x: R,
    pub y: R,
}

#[derive(Debug, Clone)]
pub struct WordGroup {
    pub label: String,
    pub words: Vec<String>,
}

/// Project selected words from one or more embedding models into 2D.
/// PCA is fit on the union of the selected vectors only. When the selection
/// admits only one principal axis, y is zero for every point.
pub fn project_labeled<R: Real>(
    groups: &[(&EmbeddingModel<R>, WordGroup)],
) -> Result<Vec<LabeledPoint<R>>, PcaError> {
    let mut missing = Vec::new();
    let mut rows: Vec<Vec<R>> = Vec::new();
    let mut labels: Vec<(String, String)> = Vec::new();
    for (model, group) in groups {
        for word in &group.words {
            match model.vocabulary.id(word) {
                Some(id) => {
                    rows.push(model.input_vector(id).to_vec());
                    labels.push((word.clone(), group.label.clone()));
                }
                None => missing.push(word.clone()),
            }
        }
    }
    if !missing.is_empty() {
        return Err(PcaError::OutOfVocabulary(missing));
    }
    if rows.len() < 2 {
        return Err(PcaError::TooFewRows(rows.len()));
    }
    let dim = rows[0].len();
    let n_components = 2.min(rows.len() - 1).min(dim);
    let model = pca_fit(&rows, n_components)?;
    let projected = pca_transform(&model, &rows)?;
    Ok(labels
        .into_iter()
        .zip(projected)
        .map(|((word, group), p)| LabeledPoint {
            word,
            group,
            x: p[0],
            y: if p.len() > 1 { p[1] } else { R::zero() },
        })
        .collect())
}
