use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use num_rational::Ratio;

/// Exact joint counts of (key, observation) pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JointDistribution {
    cells: BTreeMap<(Vec<u32>, Vec<u32>), u64>,
    total: u64,
}

impl JointDistribution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: &[u32], obs: &[u32], count: u64) {
        *self.cells.entry((key.to_vec(), obs.to_vec())).or_insert(0) += count;
        self.total += count;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, key: &[u32], obs: &[u32]) -> u64 {
        self.cells.get(&(key.to_vec(), obs.to_vec())).copied().unwrap_or(0)
    }

    pub fn cells(&self) -> impl Iterator<Item = (&[u32], &[u32], u64)> {
        self.cells.iter().map(|((k, o), &c)| (k.as_slice(), o.as_slice(), c))
    }

    pub fn key_marginal(&self) -> BTreeMap<Vec<u32>, u64> {
        let mut m = BTreeMap::new();
        for ((k, _), &c) in &self.cells {
            *m.entry(k.clone()).or_insert(0) += c;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MutualInformation {
    /// Decided by exact integer factorization of the counts.
    pub is_zero: bool,
    /// Diagnostic only.
    pub value_bits: f64,
    /// `Σ p log2(p / (p_K p_O))` grouped by identical terms; empty when zero.
    pub expression: String,
}

pub fn exact_mutual_information(joint: &JointDistribution) -> MutualInformation {
    assert!(joint.total > 0, "empty distribution");
    mi_from_cells(joint.cells())
}

/// Exact MI over any hashable cell labels.
pub(crate) fn mi_from_cells<K, O, I>(cells: I) -> MutualInformation
where
    K: Hash + Eq + Clone,
    O: Hash + Eq + Clone,
    I: IntoIterator<Item = (K, O, u64)>,
{
    let cells: Vec<(K, O, u64)> = cells.into_iter().filter(|c| c.2 > 0).collect();
    let mut pk: HashMap<K, u64> = HashMap::new();
    let mut po: HashMap<O, u64> = HashMap::new();
    let mut total: u64 = 0;
    for (k, o, c) in &cells {
        *pk.entry(k.clone()).or_insert(0) += c;
        *po.entry(o.clone()).or_insert(0) += c;
        total += c;
    }
    let n = total as u128;
    // zero iff the support is a full product and every cell factorizes
    let mut is_zero = cells.len() as u128 == pk.len() as u128 * po.len() as u128;
    let mut value = 0.0;
    let mut terms: BTreeMap<(u64, u64, u64), u64> = BTreeMap::new();
    for (k, o, c) in &cells {
        let (ck, co) = (pk[k], po[o]);
        if (*c as u128) * n != (ck as u128) * (co as u128) {
            is_zero = false;
        }
        let p = *c as f64 / total as f64;
        value += p * ((*c as f64 * total as f64) / (ck as f64 * co as f64)).log2();
        *terms.entry((*c, ck, co)).or_insert(0) += 1;
    }
    if is_zero {
        return MutualInformation { is_zero, value_bits: 0.0, expression: String::new() };
    }
    let mut parts = Vec::new();
    for (&(c, ck, co), &mult) in &terms {
        let ratio = Ratio::new(c as u128 * n, ck as u128 * co as u128);
        if ratio == Ratio::from_integer(1) {
            continue;
        }
        let w = Ratio::new(mult as u128 * c as u128, n);
        parts.push(format!("{w}·log2({ratio})"));
    }
    const SHOWN: usize = 8;
    let extra = parts.len().saturating_sub(SHOWN);
    parts.truncate(SHOWN);
    let mut expression = parts.join(" + ");
    if extra > 0 {
        expression.push_str(&format!(" + ({extra} more terms)"));
    }
    MutualInformation { is_zero, value_bits: value.max(0.0), expression }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_symbols() {
        let mut j = JointDistribution::new();
        for a in 0..3 {
            for b in 0..3 {
                j.add(&[a], &[b], 1);
            }
        }
        let mi = exact_mutual_information(&j);
        assert!(mi.is_zero);
        assert_eq!(mi.value_bits, 0.0);
    }

    #[test]
    fn identical_symbols() {
        let mut j = JointDistribution::new();
        for a in 0..3 {
            j.add(&[a], &[a], 1);
        }
        let mi = exact_mutual_information(&j);
        assert!(!mi.is_zero);
        assert!((mi.value_bits - 3f64.log2()).abs() < 1e-12);
        assert_eq!(mi.expression, "1·log2(3)");
    }

    #[test]
    fn missing_cell_is_dependence() {
        let mut j = JointDistribution::new();
        j.add(&[0], &[0], 1);
        j.add(&[0], &[1], 1);
        j.add(&[1], &[0], 1);
        assert!(!exact_mutual_information(&j).is_zero);
    }
}
