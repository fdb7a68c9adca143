//! Seeded random generation of valid complexes and chain maps, for
//! property tests and for the reproducible randomized searches exposed by
//! the CLI.
//!
//! Complexes are grown from shifted line bundles inside the window by
//! taking cones of random chain maps and direct sums, so every sample is
//! valid by construction. Chain maps are random integer combinations of a
//! basis of the chain-map space, per the commutation-solving approach.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::{cone, ChainMap, LineBundleComplex, PolyMatrix};
use crate::error::Result;
use crate::ext::chain_map_space;
use crate::poly::HomogPoly;
use crate::scalar::Scalar;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// A random direct sum of shifted window line bundles.
    fn window_sum(&mut self, n: usize, pieces: usize) -> LineBundleComplex {
        let mut acc = LineBundleComplex::zero(n);
        for _ in 0..pieces {
            let d = self.rng.gen_range(-(n as i64)..=0);
            let k = self.rng.gen_range(-1..=1);
            let lb = LineBundleComplex::line_bundle(n, d).shift(k);
            acc = acc.direct_sum(&lb).expect("same ambient space");
        }
        acc
    }

    /// A random valid complex with all twists in `[-n, 0]`, built by
    /// iterated cones of random chain maps between window sums.
    pub fn window_complex(&mut self, n: usize) -> LineBundleComplex {
        let pa = self.rng.gen_range(1..=2);
        let pb = self.rng.gen_range(1..=2);
        let a = self.window_sum(n, pa);
        let b = self.window_sum(n, pb);
        let mut c = match self.chain_map(&a, &b) {
            Ok(f) => cone(&f).expect("cone of valid map"),
            Err(_) => a.direct_sum(&b).expect("same ambient space"),
        };
        if self.rng.gen_bool(0.5) {
            let d = self.window_sum(n, 1);
            if let Ok(f) = self.chain_map(&c, &d) {
                c = cone(&f).expect("cone of valid map");
            }
        }
        if self.rng.gen_bool(0.3) {
            c = c.shift(self.rng.gen_range(-1..=1));
        }
        c.prune()
    }

    /// A random chain map `A -> B`: an integer combination of a basis of
    /// the chain-map space (zero when the space is empty).
    pub fn chain_map(
        &mut self,
        a: &LineBundleComplex,
        b: &LineBundleComplex,
    ) -> Result<ChainMap> {
        let basis = chain_map_space(a, b)?;
        let mut maps: std::collections::BTreeMap<i64, PolyMatrix> = std::collections::BTreeMap::new();
        for f in &basis {
            let coeff = Scalar::from_int(self.rng.gen_range(-2i64..=2));
            if coeff.is_zero() {
                continue;
            }
            for (&i, m) in f.maps() {
                let scaled = m.scale(&coeff);
                match maps.get_mut(&i) {
                    None => {
                        maps.insert(i, scaled);
                    }
                    Some(acc) => {
                        let mut sum = PolyMatrix::zero_map(a.n(), &b.term(i), &a.term(i));
                        for r in 0..sum.rows() {
                            for c in 0..sum.cols() {
                                sum.set(r, c, acc.get(r, c).add(scaled.get(r, c)));
                            }
                        }
                        *acc = sum;
                    }
                }
            }
        }
        ChainMap::new(a.clone(), b.clone(), maps)
    }

    /// `n` random independent linear forms, cutting out a rational point.
    pub fn point_forms(&mut self, n: usize) -> Vec<HomogPoly> {
        loop {
            let forms: Vec<HomogPoly> = (0..n)
                .map(|_| {
                    let mut p = HomogPoly::zero(n, 1);
                    for i in 0..=n {
                        let mut e = vec![0u32; n + 1];
                        e[i] = 1;
                        p.add_term(e, Scalar::from_int(self.rng.gen_range(-2i64..=2)));
                    }
                    p
                })
                .collect();
            if forms.iter().any(HomogPoly::is_zero) {
                continue;
            }
            if crate::ext::koszul_point(n, &forms).is_ok() {
                return forms;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_complexes_are_valid_window_objects() {
        let mut s = Sampler::new(42);
        for n in 1..=2usize {
            for _ in 0..10 {
                let c = s.window_complex(n);
                assert!(c.validate().is_ok());
                if let Some((lo, hi)) = c.twist_range() {
                    assert!(lo >= -(n as i64) && hi <= 0);
                }
            }
        }
    }

    #[test]
    fn sampled_chain_maps_validate() {
        let mut s = Sampler::new(7);
        for _ in 0..10 {
            let a = s.window_complex(1);
            let b = s.window_complex(1);
            let f = s.chain_map(&a, &b).unwrap();
            assert!(f.validate().is_ok());
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let mut s1 = Sampler::new(99);
        let mut s2 = Sampler::new(99);
        assert_eq!(s1.window_complex(2), s2.window_complex(2));
    }
}
