//! Total variation between the single-block law induced by the encoder and
//! the memoryless target law over `(A, T)`.

use super::enumerate::{enumerate_paths, pack_bits};
use super::EvalError;
use crate::codec::{fill_v_layer, fill_x_layer};
use crate::polar::polar_transform;
use crate::channel::DmsSpec;
use crate::sets::PolarizedSets;
use std::collections::HashMap;

/// Largest block length accepted by [`tv_distance_check`].
pub const TV_MAX_N: usize = 6;

fn unpack(mut key: u128, n: usize) -> Vec<u8> {
    let mut bits = vec![0u8; n];
    for b in bits.iter_mut().rev() {
        *b = (key & 1) as u8;
        key >>= 1;
    }
    bits
}

/// Exact `V(q̃_{A T}, p_{A T})` for one block with no chained content: every
/// `H` index is uniform and the rest follow the fill rules.
pub fn tv_distance_check(spec: &DmsSpec, sets: &PolarizedSets, budget: usize) -> Result<f64, EvalError> {
    let n = sets.n;
    if n > TV_MAX_N || 1usize << (2 * n) > budget {
        return Err(EvalError::BudgetExceeded {
            what: format!("joint (A, T) outcomes at n = {n} (limit n ≤ {TV_MAX_N})"),
            budget,
        });
    }
    let none = vec![None; n];
    let leaves = enumerate_paths(budget, |src| {
        let a = fill_v_layer(spec, sets, &none, src);
        let v = polar_transform(&a).expect("power of two");
        let t = fill_x_layer(spec, sets, &v, &none, src);
        (pack_bits(&a), pack_bits(&t))
    })?;
    let mut q: HashMap<(u128, u128), f64> = HashMap::new();
    for (w, key) in leaves {
        *q.entry(key).or_insert(0.0) += w;
    }
    let mut tv = 0.0;
    for ak in 0..(1u128 << n) {
        let v = polar_transform(&unpack(ak, n)).expect("power of two");
        for tk in 0..(1u128 << n) {
            let x = polar_transform(&unpack(tk, n)).expect("power of two");
            let p: f64 = v.iter().zip(&x).map(|(&vi, &xi)| spec.p_vx(vi, xi)).product();
            let qv = q.get(&(ak, tk)).copied().unwrap_or(0.0);
            tv += (qv - p).abs();
        }
    }
    Ok((tv / 2.0).clamp(0.0, 1.0))
}
