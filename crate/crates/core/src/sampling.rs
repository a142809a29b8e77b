//! Deterministic sampling of points and tangent vectors.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::calabi::{TBPoint, TTVec};
use crate::error::Result;
use crate::matkit::{random_hermitian_from, rank1_project, seeded_rng};
use crate::projective::{tangent_project, ProjPoint, TangentVec};

/// Per-check seed: FNV-1a of the name folded with the run seed.
pub fn derive_seed(seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn rng_for(seed: u64, name: &str) -> ChaCha8Rng {
    seeded_rng(derive_seed(seed, name))
}

pub fn random_point<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ProjPoint> {
    loop {
        match rank1_project(&random_hermitian_from(dim, rng)) {
            Ok(p) => return Ok(p),
            Err(crate::GeomError::AmbiguousRetraction { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
}

pub fn random_tangent<R: Rng + ?Sized>(a: &ProjPoint, rng: &mut R) -> Result<TangentVec> {
    tangent_project(a, &random_hermitian_from(a.dim(), rng))
}

/// A point of TCP^n with `|X|` drawn uniformly in `[r_min, r_max]` (in the `g` norm).
pub fn random_tb_point<R: Rng + ?Sized>(dim: usize, r_min: f64, r_max: f64, rng: &mut R) -> Result<TBPoint> {
    let a = random_point(dim, rng)?;
    let x = random_tangent(&a, rng)?;
    let r = if r_max > r_min { rng.random_range(r_min..r_max) } else { r_min };
    let nx = x.norm();
    let x = if nx > 0.0 { x.scale(r / nx) } else { x };
    Ok(TBPoint::from_tangent(x))
}

pub fn random_tt_vec<R: Rng + ?Sized>(p: &TBPoint, rng: &mut R) -> Result<TTVec> {
    let h = random_tangent(p.a(), rng)?;
    let v = random_tangent(p.a(), rng)?;
    TTVec::new(p, h, v)
}
