use super::rng::RngHandle;
use crate::exact::SizeLawTable;
use crate::model::{GWSpec, TypedTree};
use crate::{Error, Result};

/// A configuration prepared for size splitting: its children sorted by type
/// (with the original positions) and the trie nodes of the sorted prefixes.
struct PreparedConfig {
    log_q: f64,
    children: Vec<usize>,
    /// `order[j]` is the original position of the j-th child in sorted order.
    order: Vec<usize>,
    /// `path[j]` is the trie node of the first `j` sorted children.
    path: Vec<usize>,
}

/// Exact sampler of trees conditioned on their size.
///
/// Root type, configuration and child sizes are drawn from their exact
/// conditional laws given the size, read off the convolution tables of a
/// [`SizeLawTable`]; the output law is the conditioned law exactly.
pub struct ExactSampler<'a> {
    spec: &'a GWSpec,
    table: &'a SizeLawTable,
    configs: Vec<Vec<PreparedConfig>>,
}

impl<'a> ExactSampler<'a> {
    pub fn new(spec: &'a GWSpec, table: &'a SizeLawTable) -> Result<Self> {
        if table.num_types() != spec.num_types() {
            return Err(Error::InvalidArgument("size-law table belongs to another model".into()));
        }
        let mut configs = Vec::new();
        for a in 0..spec.num_types() {
            let mut row = Vec::new();
            for (c, &q) in spec.kernel().row(a) {
                let mut order: Vec<usize> = (0..c.arity()).collect();
                order.sort_by_key(|&i| (c.children()[i], i));
                let sorted: Vec<usize> = order.iter().map(|&i| c.children()[i]).collect();
                let path = (0..=sorted.len())
                    .map(|j| {
                        table.trie.node_of(&sorted[..j]).ok_or_else(|| {
                            Error::InvalidArgument("size-law table belongs to another model".into())
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                row.push(PreparedConfig { log_q: q.ln(), children: c.children().to_vec(), order, path });
            }
            configs.push(row);
        }
        Ok(Self { spec, table, configs })
    }

    /// One tree with exactly `n` vertices.
    pub fn sample(&self, n: usize, rng: &mut RngHandle) -> Result<TypedTree> {
        if n == 0 || n > self.table.n_max() {
            return Err(Error::InvalidArgument(format!(
                "size {n} outside the table range 1..={}",
                self.table.n_max()
            )));
        }
        let root_weights: Vec<f64> = self
            .spec
            .root_dist()
            .iter()
            .enumerate()
            .map(|(a, &m)| if m > 0.0 { m.ln() + self.table.log_f(a, n) } else { f64::NEG_INFINITY })
            .collect();
        let root = draw_log(&root_weights, rng)
            .ok_or_else(|| Error::NullConditioning(format!("P{{|T| = {n}}} = 0")))?;

        let mut tree = TypedTree::leaf(root);
        let mut stack = vec![(0usize, n)];
        let mut weights = Vec::new();
        while let Some((v, size)) = stack.pop() {
            let a = tree.ty(v);
            let s = size - 1;
            weights.clear();
            weights.extend(
                self.configs[a].iter().map(|pc| pc.log_q + self.table.log_w(*pc.path.last().unwrap(), s)),
            );
            let pc = &self.configs[a][draw_log(&weights, rng).expect("positive size-law mass")];

            // Child sizes, last sorted child first, from the prefix tables.
            let r = pc.children.len();
            let mut sizes = vec![0usize; r];
            let mut rest = s;
            for j in (1..=r).rev() {
                let prefix = pc.path[j - 1];
                let ty = pc.children[pc.order[j - 1]];
                weights.clear();
                // Child takes `sj`, the remaining j-1 children take `rest - sj >= j-1`.
                let max_sj = rest - (j - 1);
                weights.extend(
                    (1..=max_sj).map(|sj| self.table.log_w(prefix, rest - sj) + self.table.log_f(ty, sj)),
                );
                let sj = 1 + draw_log(&weights, rng).expect("positive split mass");
                sizes[pc.order[j - 1]] = sj;
                rest -= sj;
            }
            debug_assert_eq!(rest, 0);
            let ids: Vec<usize> = pc.children.iter().map(|&t| tree.add_child(v, t)).collect();
            for (id, sz) in ids.into_iter().zip(sizes).rev() {
                stack.push((id, sz));
            }
        }
        Ok(tree)
    }
}

/// Index drawn with probability proportional to `exp(log_weights)`; `None`
/// if every weight is zero.
fn draw_log(log_weights: &[f64], rng: &mut RngHandle) -> Option<usize> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return None;
    }
    let total: f64 = log_weights.iter().map(|w| (w - max).exp()).sum();
    let mut u = rng.uniform() * total;
    let mut last_positive = 0;
    for (i, w) in log_weights.iter().enumerate() {
        if *w == f64::NEG_INFINITY {
            continue;
        }
        let p = (w - max).exp();
        last_positive = i;
        if u < p {
            return Some(i);
        }
        u -= p;
    }
    Some(last_positive)
}

/// One exactly conditioned tree of size `n`.
pub fn sample_conditioned_exact(
    spec: &GWSpec,
    n: usize,
    rng: &mut RngHandle,
    table: &SizeLawTable,
) -> Result<TypedTree> {
    ExactSampler::new(spec, table)?.sample(n, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::size_law;
    use crate::model::OffspringLaw;

    #[test]
    fn sizes_are_exact() {
        let spec = GWSpec::single_type(OffspringLaw::poisson(1.0, 8).unwrap()).unwrap();
        let table = size_law(&spec, 60).unwrap();
        let s = ExactSampler::new(&spec, &table).unwrap();
        let mut rng = RngHandle::new(11, 0);
        for n in [1, 2, 5, 17, 60] {
            let t = s.sample(n, &mut rng).unwrap();
            assert_eq!(t.size(), n);
            t.validate().unwrap();
        }
    }

    #[test]
    fn null_and_out_of_range() {
        let spec = GWSpec::single_type(OffspringLaw::new(vec![0.5, 0.0, 0.5]).unwrap()).unwrap();
        let table = size_law(&spec, 9).unwrap();
        let mut rng = RngHandle::new(1, 0);
        assert!(matches!(sample_conditioned_exact(&spec, 4, &mut rng, &table), Err(Error::NullConditioning(_))));
        assert!(sample_conditioned_exact(&spec, 10, &mut rng, &table).is_err());
    }
}
