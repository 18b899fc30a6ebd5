#![allow(dead_code)]

use proptest::prelude::*;
use superakns::diffring::{DiffPoly, Field, Jet};
use superakns::grassmann::rat;
use superakns::hierarchy::U_ORDER;
use superakns::numcheck::GrassmannNumber;
use superakns::superlie::{Algebra, SuperMatrix};

pub fn arb_field() -> impl Strategy<Value = Field> {
    prop::sample::select(U_ORDER.to_vec())
}

pub fn arb_jet(max_order: u16) -> impl Strategy<Value = Jet> {
    (arb_field(), 0..=max_order).prop_map(|(f, k)| Jet::new(f, k))
}

/// One term: small coefficient, μ power up to 2 and at most three jets.
pub fn arb_term() -> impl Strategy<Value = DiffPoly> {
    (
        -4i64..=4,
        1i64..=3,
        0u32..=2,
        prop::collection::vec(arb_jet(2), 0..=3),
    )
        .prop_map(|(n, d, mu, jets)| DiffPoly::product(rat(n, d), mu, &jets))
}

pub fn arb_poly() -> impl Strategy<Value = DiffPoly> {
    prop::collection::vec(arb_term(), 0..=4)
        .prop_map(|ts| ts.into_iter().fold(DiffPoly::zero(), |a, t| a + t))
}

/// A polynomial of one parity, so sign rules apply uniformly.
pub fn arb_homogeneous() -> impl Strategy<Value = DiffPoly> {
    arb_poly().prop_map(|p| {
        let (even, odd) = p.split_parity();
        if odd.is_zero() {
            even
        } else {
            odd
        }
    })
}

pub fn arb_grassmann(gens: usize) -> impl Strategy<Value = GrassmannNumber> {
    prop::collection::vec(-2.0f64..2.0, 1usize << gens).prop_map(move |cs| {
        let mut g = GrassmannNumber::zero(gens);
        for (mask, c) in cs.into_iter().enumerate() {
            g.set(mask as u32, c);
        }
        g
    })
}

/// A random rational combination of sl(4,1) basis elements of one parity.
pub fn arb_sl41_homogeneous() -> impl Strategy<Value = SuperMatrix> {
    let basis = Algebra::Sl41.basis();
    (any::<bool>(), prop::collection::vec(-3i64..=3, basis.len())).prop_map(move |(odd, cs)| {
        let picked: Vec<(&SuperMatrix, i64)> = basis
            .iter()
            .zip(cs)
            .filter(|(b, _)| b.parity().is_odd() == odd)
            .collect();
        let mut acc = picked[0].0.scale(&rat(picked[0].1, 1));
        for (b, c) in &picked[1..] {
            acc = acc.add(&b.scale(&rat(*c, 1))).unwrap();
        }
        acc
    })
}

/// (−1)^{|x||z|}[x,[y,z]] + (−1)^{|y||x|}[y,[z,x]] + (−1)^{|z||y|}[z,[x,y]].
pub fn jacobiator(x: &SuperMatrix, y: &SuperMatrix, z: &SuperMatrix) -> SuperMatrix {
    let sgn = |a: &SuperMatrix, b: &SuperMatrix| {
        if a.parity().is_odd() && b.parity().is_odd() {
            -1
        } else {
            1
        }
    };
    let t1 = x
        .supercommutator(&y.supercommutator(z).unwrap())
        .unwrap()
        .scale(&rat(sgn(x, z), 1));
    let t2 = y
        .supercommutator(&z.supercommutator(x).unwrap())
        .unwrap()
        .scale(&rat(sgn(y, x), 1));
    let t3 = z
        .supercommutator(&x.supercommutator(y).unwrap())
        .unwrap()
        .scale(&rat(sgn(z, y), 1));
    let p = t1.parity();
    t1.add(&t2.with_parity(p))
        .unwrap()
        .add(&t3.with_parity(p))
        .unwrap()
}
