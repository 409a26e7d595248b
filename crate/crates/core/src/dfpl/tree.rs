use std::sync::Arc;

use crate::domain::{ExpertIndex, PayoffVector};
use crate::error::{invalid, Result};
use crate::protocol::{Channel, ModelKind, Protocol, RoundGuard};
use crate::scalar::Scalar;

use super::params::DfplParams;
use super::state::{BlockEvent, DfplState, Phase};

#[derive(Debug, Clone, Copy)]
enum Child {
    Leaf(usize),
    Node(usize),
}

#[derive(Debug, Clone)]
struct TreeNode<S> {
    state: DfplState<S>,
    left: Child,
    right: Child,
    // experts picked by each subtree on the current step
    picks: (usize, usize),
    last_event: Option<BlockEvent>,
}

/// Balanced binary tree of independent two-expert DFPL instances over `n`
/// experts. Each internal node treats its two subtrees as meta-experts whose
/// payoff is that of the expert the subtree picked this step.
#[derive(Debug, Clone)]
pub struct MetaTree<S> {
    nodes: Vec<TreeNode<S>>,
    experts: usize,
}

impl<S: Scalar> MetaTree<S> {
    /// Every node shares `params` and the block schedule; node `i` (pre-order,
    /// root = 0) draws from its own streams, so `n = 2` is a single
    /// [`DfplState`] with node id 0.
    pub fn new(experts: usize, params: DfplParams<S>, schedule: Arc<[usize]>, seed: u64) -> Result<Self> {
        if experts < 2 {
            return invalid(format!("the expert tree needs at least 2 experts, got {experts}"));
        }
        let mut nodes = Vec::with_capacity(experts - 1);
        build(0, experts, &params, &schedule, seed, &mut nodes);
        Ok(Self { nodes, experts })
    }

    pub fn experts(&self) -> usize {
        self.experts
    }

    /// `ceil(log2 n)`.
    pub fn depth(&self) -> usize {
        fn depth_of<S>(nodes: &[TreeNode<S>], c: Child) -> usize {
            match c {
                Child::Leaf(_) => 0,
                Child::Node(i) => 1 + depth_of(nodes, nodes[i].left).max(depth_of(nodes, nodes[i].right)),
            }
        }
        depth_of(&self.nodes, Child::Node(0))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, i: usize) -> &DfplState<S> {
        &self.nodes[i].state
    }

    /// Chooses an expert in `[1, n]`; children are evaluated before parents.
    pub fn choose(&mut self) -> Result<ExpertIndex> {
        let pick = self.eval(Child::Node(0))?;
        Ok(ExpertIndex::from_zero_based(pick))
    }

    fn eval(&mut self, c: Child) -> Result<usize> {
        match c {
            Child::Leaf(e) => Ok(e),
            Child::Node(i) => {
                let (l, r) = (self.nodes[i].left, self.nodes[i].right);
                let left = self.eval(l)?;
                let right = self.eval(r)?;
                let node = &mut self.nodes[i];
                let (a, ev) = node.state.choose()?;
                node.picks = (left, right);
                node.last_event = Some(ev);
                Ok(if a == ExpertIndex::FIRST { left } else { right })
            }
        }
    }

    /// Feeds the real payoff vector to every node. Returns, per node, whether
    /// its block closed on this step.
    pub fn observe(&mut self, p: &PayoffVector<S>) -> Result<Vec<bool>> {
        if p.len() != self.experts {
            return invalid(format!("payoff dimension {} does not match {} experts", p.len(), self.experts));
        }
        let v = p.as_slice();
        self.nodes
            .iter_mut()
            .map(|node| {
                let meta = PayoffVector::pair(v[node.picks.0], v[node.picks.1])?;
                node.state.on_payoff(&meta)
            })
            .collect()
    }

    fn events(&self) -> impl Iterator<Item = Option<BlockEvent>> + '_ {
        self.nodes.iter().map(|n| n.last_event)
    }
}

fn build<S: Scalar>(
    lo: usize,
    hi: usize,
    params: &DfplParams<S>,
    schedule: &Arc<[usize]>,
    seed: u64,
    nodes: &mut Vec<TreeNode<S>>,
) -> Child {
    if hi - lo == 1 {
        return Child::Leaf(lo);
    }
    let id = nodes.len();
    nodes.push(TreeNode {
        state: DfplState::with_schedule(params.clone(), Arc::clone(schedule), seed, id as u32),
        left: Child::Leaf(lo),
        right: Child::Leaf(lo),
        picks: (lo, lo),
        last_event: None,
    });
    let mid = lo + (hi - lo).div_ceil(2);
    let left = build(lo, mid, params, schedule, seed, nodes);
    let right = build(mid, hi, params, schedule, seed, nodes);
    nodes[id].left = left;
    nodes[id].right = right;
    Child::Node(id)
}

/// DFPL in the site-prediction model.
///
/// Per node and block: a `k`-message broadcast when the block opens and a
/// `k`-message collection of local block payoffs when it closes. Per node and
/// step-phase step: the coordinator sends the current state to the queried
/// site and the site returns its payoff.
#[derive(Debug, Clone)]
pub struct DfplProtocol<S> {
    tree: MetaTree<S>,
    guard: RoundGuard,
}

impl<S: Scalar> DfplProtocol<S> {
    pub fn new(tree: MetaTree<S>) -> Self {
        Self { tree, guard: RoundGuard::default() }
    }

    pub fn tree(&self) -> &MetaTree<S> {
        &self.tree
    }
}

impl<S: Scalar> Protocol<S> for DfplProtocol<S> {
    fn name(&self) -> &'static str {
        "dfpl"
    }

    fn model(&self) -> ModelKind {
        ModelKind::SitePrediction
    }

    fn choose(&mut self, t: usize, site: usize, channel: &mut dyn Channel) -> Result<ExpertIndex> {
        self.guard.begin(t)?;
        let a = self.tree.choose()?;
        for ev in self.tree.events().flatten() {
            if ev.started {
                channel.broadcast(2);
            }
            if ev.phase == Phase::Step {
                channel.to_site(site, 2);
            }
        }
        Ok(a)
    }

    fn observe(&mut self, t: usize, site: usize, payoff: &PayoffVector<S>, channel: &mut dyn Channel) -> Result<()> {
        self.guard.end(t)?;
        let closed = self.tree.observe(payoff)?;
        let phases: Vec<_> = self.tree.events().map(|e| e.map(|e| e.phase)).collect();
        for (closed, phase) in closed.into_iter().zip(phases) {
            if phase == Some(Phase::Step) {
                channel.to_coordinator(site, 2);
            }
            if closed {
                for j in 0..channel.sites() {
                    channel.to_coordinator(j, 2);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfpl::block_schedule;

    fn params(horizon: usize, ell: usize) -> DfplParams<f64> {
        DfplParams::with_tuned_noise(horizon, ell).unwrap()
    }

    fn schedule(horizon: usize, ell: usize) -> Arc<[usize]> {
        block_schedule(horizon, ell, None).into()
    }

    #[test]
    fn two_experts_match_single_instance() {
        let (t, ell) = (2000, 20);
        let p = params(t, ell).with_step_probability(0.3).unwrap();
        let mut tree = MetaTree::new(2, p.clone(), schedule(t, ell), 77).unwrap();
        let mut single = DfplState::new(p, 77);
        for i in 0..t {
            let pay = PayoffVector::pair(((i * 7) % 10) as f64 / 10.0, ((i * 3) % 10) as f64 / 10.0).unwrap();
            let a = tree.choose().unwrap();
            let (b, _) = single.choose().unwrap();
            assert_eq!(a, b);
            tree.observe(&pay).unwrap();
            single.on_payoff(&pay).unwrap();
        }
    }

    #[test]
    fn shapes_for_various_n() {
        for (n, depth) in [(2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4)] {
            let tree = MetaTree::new(n, params(100, 10), schedule(100, 10), 0).unwrap();
            assert_eq!(tree.node_count(), n - 1);
            assert_eq!(tree.depth(), depth, "n={n}");
        }
        assert!(MetaTree::new(1, params(100, 10), schedule(100, 10), 0).is_err());
    }

    #[test]
    fn three_experts_only_play_real_experts() {
        let mut tree = MetaTree::new(3, params(600, 20), schedule(600, 20), 5).unwrap();
        for i in 0..600 {
            let a = tree.choose().unwrap();
            assert!((1..=3).contains(&a.get()));
            let v = vec![0.2, if i % 2 == 0 { 1.0 } else { 0.0 }, 0.5];
            tree.observe(&PayoffVector::new(v).unwrap()).unwrap();
        }
    }

    #[test]
    fn four_experts_converge_on_constant_leader() {
        let (t, ell) = (20_000, 25);
        let mut fractions = vec![];
        for seed in 0..50 {
            let mut tree = MetaTree::new(4, params(t, ell), schedule(t, ell), seed).unwrap();
            let p = PayoffVector::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
            let mut hits = 0;
            for i in 0..t {
                let a = tree.choose().unwrap();
                if i >= t / 2 && a == ExpertIndex::FIRST {
                    hits += 1;
                }
                tree.observe(&p).unwrap();
            }
            fractions.push(hits as f64 / (t / 2) as f64);
        }
        let mean = fractions.iter().sum::<f64>() / fractions.len() as f64;
        assert!(mean > 0.9, "{mean}");
    }
}
