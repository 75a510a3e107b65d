//! Root-system bookkeeping for ranks one and two.
//!
//! Weights are stored in fundamental-weight integer coordinates and the
//! invariant form is evaluated through the inverse Cartan matrix with exact
//! rational arithmetic: the normalization is `(α_i, α_j) = d_i a_ij` with
//! coprime positive symmetrizers `d_i`.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{Signed, Zero};

use crate::qscalars::QParam;
use crate::{Error, Result};

/// Integral weight in fundamental-weight coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight(pub Vec<i64>);

impl Weight {
    pub fn zero(rank: usize) -> Self {
        Weight(vec![0; rank])
    }

    pub fn fundamental(rank: usize, i: usize) -> Self {
        let mut c = vec![0; rank];
        c[i] = 1;
        Weight(c)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn is_dominant(&self) -> bool {
        self.0.iter().all(|&c| c >= 0)
    }

    /// Pairing with the i-th simple coroot, `⟨μ, α_i^∨⟩`.
    pub fn coroot_pairing(&self, i: usize) -> i64 {
        self.0[i]
    }

    pub fn add(&self, other: &Weight) -> Weight {
        Weight(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Weight) -> Weight {
        Weight(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// Sum of coordinates; used as a coarse height for deterministic ordering.
    pub fn coord_sum(&self) -> i64 {
        self.0.iter().sum()
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// Deterministic ordering by (coordinate sum, lexicographic).
pub fn weight_order(a: &Weight, b: &Weight) -> std::cmp::Ordering {
    a.coord_sum().cmp(&b.coord_sum()).then_with(|| a.0.cmp(&b.0))
}

/// Supported simple types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LieType {
    A1,
    A1xA1,
    A2,
    B2,
    C2,
    G2,
}

impl FromStr for LieType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A1" | "a1" => Ok(LieType::A1),
            "A1xA1" | "a1xa1" | "A1XA1" => Ok(LieType::A1xA1),
            "A2" | "a2" => Ok(LieType::A2),
            "B2" | "b2" => Ok(LieType::B2),
            "C2" | "c2" => Ok(LieType::C2),
            "G2" | "g2" => Ok(LieType::G2),
            other => Err(Error::Config(format!("unknown Lie type '{other}'"))),
        }
    }
}

impl fmt::Display for LieType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LieType::A1 => "A1",
            LieType::A1xA1 => "A1xA1",
            LieType::A2 => "A2",
            LieType::B2 => "B2",
            LieType::C2 => "C2",
            LieType::G2 => "G2",
        };
        write!(f, "{s}")
    }
}

/// Root datum of a simply connected semisimple group of rank ≤ 2.
#[derive(Debug, Clone)]
pub struct CartanData {
    pub lie_type: LieType,
    pub rank: usize,
    /// Cartan matrix entries `a_ij = ⟨α_j, α_i^∨⟩`… stored row-major as `a[i][j]`.
    pub cartan_matrix: Vec<Vec<i64>>,
    /// Symmetrizers `d_i` with `d_i a_ij` symmetric positive definite.
    pub symmetrizers: Vec<i64>,
    /// Gram matrix `(ω_i, ω_j)` of the fundamental weights.
    form_gram: Vec<Vec<Rational64>>,
    /// Positive roots in simple-root coordinates.
    pub positive_roots: Vec<Vec<i64>>,
}

impl CartanData {
    pub fn new(lie_type: LieType) -> Self {
        let (a, d, pos): (Vec<Vec<i64>>, Vec<i64>, Vec<Vec<i64>>) = match lie_type {
            LieType::A1 => (vec![vec![2]], vec![1], vec![vec![1]]),
            LieType::A1xA1 => (
                vec![vec![2, 0], vec![0, 2]],
                vec![1, 1],
                vec![vec![1, 0], vec![0, 1]],
            ),
            LieType::A2 => (
                vec![vec![2, -1], vec![-1, 2]],
                vec![1, 1],
                vec![vec![1, 0], vec![0, 1], vec![1, 1]],
            ),
            LieType::B2 => (
                vec![vec![2, -1], vec![-2, 2]],
                vec![2, 1],
                vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![1, 2]],
            ),
            LieType::C2 => (
                vec![vec![2, -2], vec![-1, 2]],
                vec![1, 2],
                vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 1]],
            ),
            LieType::G2 => (
                vec![vec![2, -1], vec![-3, 2]],
                vec![3, 1],
                vec![
                    vec![1, 0],
                    vec![0, 1],
                    vec![1, 1],
                    vec![1, 2],
                    vec![1, 3],
                    vec![2, 3],
                ],
            ),
        };
        let rank = a.len();
        // (ω_i, ω_j) = (A^{-1})_{ji} d_j
        let inv = invert_integer_matrix(&a);
        let mut gram = vec![vec![Rational64::zero(); rank]; rank];
        for i in 0..rank {
            for j in 0..rank {
                gram[i][j] = inv[j][i] * Rational64::from_integer(d[j]);
            }
        }
        let cd = CartanData {
            lie_type,
            rank,
            cartan_matrix: a,
            symmetrizers: d,
            form_gram: gram,
            positive_roots: pos,
        };
        debug_assert!(cd.self_check());
        cd
    }

    fn self_check(&self) -> bool {
        // d_i a_ij symmetric positive definite
        for i in 0..self.rank {
            for j in 0..self.rank {
                if self.symmetrizers[i] * self.cartan_matrix[i][j]
                    != self.symmetrizers[j] * self.cartan_matrix[j][i]
                {
                    return false;
                }
            }
        }
        // 2ρ equals the sum of positive roots
        let mut two_rho = Weight::zero(self.rank);
        for root in &self.positive_roots {
            two_rho = two_rho.add(&self.root_in_fundamental(root));
        }
        two_rho == Weight(vec![2; self.rank])
    }

    pub fn rho(&self) -> Weight {
        Weight(vec![1; self.rank])
    }

    /// The simple root `α_i` in fundamental-weight coordinates
    /// (the i-th column of the Cartan matrix).
    pub fn alpha(&self, i: usize) -> Weight {
        Weight((0..self.rank).map(|j| self.cartan_matrix[j][i]).collect())
    }

    /// A root given in simple-root coordinates, converted to fundamental ones.
    pub fn root_in_fundamental(&self, root: &[i64]) -> Weight {
        let mut w = Weight::zero(self.rank);
        for (i, &c) in root.iter().enumerate() {
            let alpha = self.alpha(i);
            for j in 0..self.rank {
                w.0[j] += c * alpha.0[j];
            }
        }
        w
    }

    /// Normalized invariant form on the weight lattice.
    pub fn weight_form(&self, mu: &Weight, nu: &Weight) -> Result<Rational64> {
        if mu.rank() != self.rank || nu.rank() != self.rank {
            return Err(Error::DimensionMismatch(format!(
                "weights of rank {}/{} against Cartan data of rank {}",
                mu.rank(),
                nu.rank(),
                self.rank
            )));
        }
        let mut acc = Rational64::zero();
        for i in 0..self.rank {
            for j in 0..self.rank {
                acc += Rational64::from_integer(mu.0[i]) * self.form_gram[i][j]
                    * Rational64::from_integer(nu.0[j]);
            }
        }
        Ok(acc)
    }

    /// `(α_i, μ) = d_i ⟨μ, α_i^∨⟩` — always an integer.
    pub fn alpha_form(&self, i: usize, mu: &Weight) -> i64 {
        self.symmetrizers[i] * mu.0[i]
    }

    /// `(β, μ)` for a root `β` in simple-root coordinates — always an integer.
    pub fn root_form(&self, root: &[i64], mu: &Weight) -> i64 {
        root.iter()
            .enumerate()
            .map(|(i, &c)| c * self.alpha_form(i, mu))
            .sum()
    }

    /// Casimir scalar `(λ, λ + 2ρ)`.
    pub fn casimir_scalar(&self, lambda: &Weight) -> Result<Rational64> {
        if !lambda.is_dominant() {
            return Err(Error::NonDominantWeight(lambda.0.clone()));
        }
        let rho = self.rho();
        let shifted = Weight(
            lambda
                .0
                .iter()
                .zip(&rho.0)
                .map(|(l, r)| l + 2 * r)
                .collect(),
        );
        self.weight_form(lambda, &shifted)
    }

    /// Classical Weyl dimension of `V_λ`.
    pub fn weyl_dim(&self, lambda: &Weight) -> Result<u64> {
        if !lambda.is_dominant() {
            return Err(Error::NonDominantWeight(lambda.0.clone()));
        }
        let rho = self.rho();
        let shifted = lambda.add(&rho);
        let mut num = 1i64;
        let mut den = 1i64;
        for root in &self.positive_roots {
            num *= self.root_form(root, &shifted);
            den *= self.root_form(root, &rho);
        }
        let r = Rational64::new(num, den);
        debug_assert!(r.is_integer() && r.is_positive());
        Ok(r.to_integer() as u64)
    }

    /// q-deformed Weyl dimension `Π_{α>0} [(λ+ρ,α)]_q / [(ρ,α)]_q`.
    pub fn q_weyl_dim(&self, qp: QParam, lambda: &Weight) -> Result<f64> {
        if !lambda.is_dominant() {
            return Err(Error::NonDominantWeight(lambda.0.clone()));
        }
        let rho = self.rho();
        let shifted = lambda.add(&rho);
        let mut out = 1.0;
        for root in &self.positive_roots {
            out *= qp.q_integer(self.root_form(root, &shifted))
                / qp.q_integer(self.root_form(root, &rho));
        }
        Ok(out)
    }

    /// Highest weight of the contragredient module, `−w_0 λ`.
    pub fn conjugate_weight(&self, lambda: &Weight) -> Weight {
        match self.lie_type {
            LieType::A2 => Weight(lambda.0.iter().rev().copied().collect()),
            _ => lambda.clone(),
        }
    }

    /// Dominant weights kept at truncation `Λ`, in deterministic order.
    ///
    /// For A1 the bound is in spin units (coordinate `m ≤ 2Λ`, matching the
    /// half-integer labeling of its weights); for the rank-two types the bound
    /// is coordinate-wise `c_i ≤ Λ`.
    pub fn truncation_set(&self, lambda_max: u32) -> Vec<Weight> {
        let mut out = Vec::new();
        match self.lie_type {
            LieType::A1 => {
                for m in 0..=(2 * lambda_max as i64) {
                    out.push(Weight(vec![m]));
                }
            }
            _ => {
                let l = lambda_max as i64;
                for c1 in 0..=l {
                    for c2 in 0..=l {
                        out.push(Weight(vec![c1, c2]));
                    }
                }
            }
        }
        out.sort_by(weight_order);
        out
    }

    pub fn in_truncation(&self, lambda: &Weight, lambda_max: u32) -> bool {
        match self.lie_type {
            LieType::A1 => lambda.0[0] <= 2 * lambda_max as i64,
            _ => lambda.0.iter().all(|&c| c <= lambda_max as i64),
        }
    }
}

fn invert_integer_matrix(a: &[Vec<i64>]) -> Vec<Vec<Rational64>> {
    match a.len() {
        1 => vec![vec![Rational64::new(1, a[0][0])]],
        2 => {
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            assert!(det != 0);
            vec![
                vec![Rational64::new(a[1][1], det), Rational64::new(-a[0][1], det)],
                vec![Rational64::new(-a[1][0], det), Rational64::new(a[0][0], det)],
            ]
        }
        n => panic!("rank {n} not supported"),
    }
}
