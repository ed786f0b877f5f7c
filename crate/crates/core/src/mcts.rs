//! Progressive-widening UCT over circuits.
//!
//! Every node holds a circuit; an edge is one [`EditAction`]. Each iteration
//! descends from the committed root, creates exactly one child where the
//! widening cap `⌈β·max(N,1)^α⌉` still has room, evaluates it, and
//! backpropagates the reward along the path. The search commits to a child of
//! the current root once that child has been visited `⌈ρ·I⌉` times; the
//! iteration budget `I` is shared across commits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{apply_action, effective_distribution, sample_action, ActionDistribution, Circuit, EditAction};
use crate::config::SearchConfig;
use crate::error::{Error, Result};
use crate::problems::{Evaluator, Problem};

/// `Q/N + c·√(ln N_s / N)`.
pub fn ucb(q: f64, visits: u64, parent_visits: u64, exploration: f64) -> Result<f64> {
    if visits == 0 || parent_visits == 0 {
        return Err(Error::Internal(format!("UCB with {visits} child and {parent_visits} parent visits")));
    }
    let n = visits as f64;
    Ok(q / n + exploration * ((parent_visits as f64).ln() / n).sqrt())
}

/// Widening cap for a node with `visits` visits.
pub fn allowed_children(visits: u64, cfg: &SearchConfig) -> usize {
    match cfg.fixed_branching {
        Some(k) => k,
        None => (cfg.pw_coefficient * (visits.max(1) as f64).powf(cfg.pw_exponent)).ceil() as usize,
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub circuit: Circuit,
    pub visits: u64,
    /// Sum of all rewards backpropagated through this node.
    pub q: f64,
    /// Noiseless or noisy cost, as seen by the evaluator at creation.
    pub cost: f64,
    /// Reward of the iteration that created the node.
    pub creation_reward: f64,
    pub parent: Option<usize>,
    pub action: Option<EditAction>,
    pub children: Vec<usize>,
    pub depth: usize,
    /// Visits and `Q` at the moment the search committed to this node.
    pub at_commit: Option<(u64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    pub circuit: Circuit,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommitEvent {
    /// Number of iterations completed when the commit happened.
    pub iteration: u64,
    pub node: usize,
    pub depth: usize,
    pub visits: u64,
}

/// Where the evaluations of one search went.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalBreakdown {
    pub root: u64,
    pub expansion: u64,
    pub rollout: u64,
    pub path_reevaluation: u64,
}

impl EvalBreakdown {
    pub fn total(&self) -> u64 {
        self.root + self.expansion + self.rollout + self.path_reevaluation
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_path: Vec<PathStep>,
    pub best_circuit: Circuit,
    pub best_cost: f64,
    /// Position of `best_circuit` on `best_path`.
    pub best_index: usize,
    pub committed: Vec<CommitEvent>,
    pub eval_count: u64,
    pub evals: EvalBreakdown,
    /// Lowest cost evaluated so far, after each iteration.
    pub iteration_log: Vec<f64>,
    pub failed_iterations: u64,
    pub tree_size: usize,
    /// Children of the original root when the search ended.
    pub root_children: usize,
    /// Mean number of children over nodes that have any.
    pub mean_branching: f64,
    /// Iteration at which some circuit first reached `2n` gates.
    pub warmed_at: Option<u64>,
}

/// One search in progress: the tree, its RNG and its bookkeeping.
pub struct Search<'e, 'p> {
    ev: &'e Evaluator<'p>,
    cfg: SearchConfig,
    base: ActionDistribution,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    current: usize,
    warmed_at: Option<u64>,
    completed: u64,
    failed: u64,
    committed: Vec<CommitEvent>,
    evals: EvalBreakdown,
    best_seen: f64,
    log: Vec<f64>,
    reward_scale: f64,
}

impl<'e, 'p> Search<'e, 'p> {
    /// Starts a tree at `root`, evaluating it once.
    pub fn new(ev: &'e Evaluator<'p>, cfg: &SearchConfig, root: Circuit) -> Result<Self> {
        cfg.validate()?;
        let base = cfg.action_distribution()?;
        let problem = ev.problem();
        let cost = ev.cost(&root)?;
        let raw = problem.reward(cost);
        let reward_scale = if cfg.normalize_rewards && raw != 0.0 { raw.abs() } else { 1.0 };
        let warmed_at = (root.len() >= 2 * root.n_qubits()).then_some(0);
        let node = Node {
            circuit: root,
            visits: 0,
            q: 0.0,
            cost,
            creation_reward: 0.0,
            parent: None,
            action: None,
            children: Vec::new(),
            depth: 0,
            at_commit: None,
        };
        Ok(Self {
            ev,
            cfg: cfg.clone(),
            base,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            nodes: vec![node],
            current: 0,
            warmed_at,
            completed: 0,
            failed: 0,
            committed: Vec::new(),
            evals: EvalBreakdown { root: 1, ..Default::default() },
            best_seen: cost,
            log: Vec::with_capacity(cfg.iterations.min(1 << 20) as usize),
            reward_scale,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn current_root(&self) -> usize {
        self.current
    }

    pub fn is_warmed(&self) -> bool {
        self.warmed_at.is_some()
    }

    pub fn completed_iterations(&self) -> u64 {
        self.completed
    }

    fn reward(&self, cost: f64) -> f64 {
        self.ev.problem().reward(cost) / self.reward_scale
    }

    fn select(&self) -> Result<usize> {
        let mut s = self.current;
        loop {
            let node = &self.nodes[s];
            if node.children.len() < allowed_children(node.visits, &self.cfg) {
                return Ok(s);
            }
            let mut best = None;
            for &c in &node.children {
                let child = &self.nodes[c];
                let u = ucb(child.q, child.visits, node.visits, self.cfg.exploration)?;
                if best.is_none_or(|(_, b)| u > b) {
                    best = Some((c, u));
                }
            }
            // caps are at least 1, so a node reaching here has children
            s = best.expect("non-empty children").0;
        }
    }

    fn distribution_for(&self, c: &Circuit) -> ActionDistribution {
        effective_distribution(c, &self.base, &self.cfg, self.is_warmed())
    }

    fn random_edit(&mut self, c: &Circuit) -> Result<(EditAction, Circuit)> {
        let dist = self.distribution_for(c);
        let action = sample_action(c, &dist, &mut self.rng, self.cfg.angle_deviation)?;
        let next = apply_action(c, &action)?;
        Ok((action, next))
    }

    /// One selection / expansion / roll-out / backpropagation round.
    ///
    /// A failing cost evaluation abandons the round: it is logged, counted
    /// in `failed_iterations`, and leaves the tree unchanged.
    pub fn iterate(&mut self) -> Result<()> {
        let leaf = self.select()?;
        let parent_circuit = self.nodes[leaf].circuit.clone();
        let (action, circuit) = self.random_edit(&parent_circuit)?;
        self.evals.expansion += 1;
        let cost = match self.ev.cost(&circuit) {
            Ok(c) => c,
            Err(e) => return self.abandon(e),
        };
        self.best_seen = self.best_seen.min(cost);
        let mut reward = self.reward(cost);

        let mut state = circuit.clone();
        for _ in 0..self.cfg.rollout_steps {
            let (_, next) = self.random_edit(&state)?;
            self.evals.rollout += 1;
            let c = match self.ev.cost(&next) {
                Ok(c) => c,
                Err(e) => return self.abandon(e),
            };
            self.best_seen = self.best_seen.min(c);
            reward = reward.max(self.reward(c));
            state = next;
        }

        let n = circuit.n_qubits();
        if self.warmed_at.is_none() && circuit.len() >= 2 * n {
            self.warmed_at = Some(self.completed + 1);
        }
        let id = self.nodes.len();
        let depth = self.nodes[leaf].depth + 1;
        self.nodes.push(Node {
            circuit,
            visits: 0,
            q: 0.0,
            cost,
            creation_reward: reward,
            parent: Some(leaf),
            action: Some(action),
            children: Vec::new(),
            depth,
            at_commit: None,
        });
        self.nodes[leaf].children.push(id);

        let mut s = Some(id);
        while let Some(k) = s {
            let node = &mut self.nodes[k];
            node.visits += 1;
            node.q += reward;
            if k == self.current {
                break;
            }
            s = node.parent;
        }
        self.finish_round();
        Ok(())
    }

    fn abandon(&mut self, e: Error) -> Result<()> {
        log::warn!("iteration {} abandoned: {e}", self.completed + 1);
        self.failed += 1;
        self.finish_round();
        Ok(())
    }

    fn finish_round(&mut self) {
        self.completed += 1;
        self.log.push(self.best_seen);
    }

    /// Advances the search root to its most-visited child once that child has
    /// reached the commit threshold (ties go to the higher `Q`). Returns
    /// whether a commit happened.
    pub fn maybe_commit(&mut self) -> bool {
        let threshold = self.cfg.commit_threshold();
        let mut pick: Option<usize> = None;
        for &c in &self.nodes[self.current].children {
            let node = &self.nodes[c];
            if node.visits < threshold {
                continue;
            }
            let better = match pick {
                None => true,
                Some(p) => {
                    let best = &self.nodes[p];
                    node.visits > best.visits || (node.visits == best.visits && node.q > best.q)
                }
            };
            if better {
                pick = Some(c);
            }
        }
        let Some(c) = pick else { return false };
        self.current = c;
        self.nodes[c].at_commit = Some((self.nodes[c].visits, self.nodes[c].q));
        self.committed.push(CommitEvent {
            iteration: self.completed,
            node: c,
            depth: self.nodes[c].depth,
            visits: self.nodes[c].visits,
        });
        true
    }

    /// Follows the highest-`Q` child from the original root down to a leaf.
    pub fn greedy_path(&self) -> Vec<usize> {
        let mut path = vec![0];
        let mut s = 0;
        while !self.nodes[s].children.is_empty() {
            let mut best = self.nodes[s].children[0];
            for &c in &self.nodes[s].children[1..] {
                if self.nodes[c].q > self.nodes[best].q {
                    best = c;
                }
            }
            path.push(best);
            s = best;
        }
        path
    }

    /// Checks the structural invariants of the tree; used by tests.
    ///
    /// Visits and `Q` are conserved: a node's totals equal its own creation
    /// round plus what its children carried, where a committed child only
    /// counts up to the moment the search moved into it.
    pub fn audit(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Internal(msg));
        for (i, node) in self.nodes.iter().enumerate() {
            let cap = allowed_children(node.visits, &self.cfg);
            if node.children.len() > cap {
                return fail(format!("node {i}: {} children over cap {cap}", node.children.len()));
            }
            if i != 0 && node.visits < 1 {
                return fail(format!("node {i} was never visited"));
            }
            let mut visits = u64::from(i != 0);
            let mut q = if i == 0 { 0.0 } else { node.creation_reward };
            for &c in &node.children {
                let child = &self.nodes[c];
                if child.parent != Some(i) {
                    return fail(format!("node {c} does not point back to {i}"));
                }
                let (v, cq) = child.at_commit.unwrap_or((child.visits, child.q));
                visits += v;
                q += cq;
            }
            if node.visits != visits {
                return fail(format!("node {i}: {} visits, subtree accounts for {visits}", node.visits));
            }
            if (node.q - q).abs() > 1e-9 * (1.0 + q.abs()) {
                return fail(format!("node {i}: Q {} but subtree accounts for {q}", node.q));
            }
        }
        Ok(())
    }

    /// Runs the remaining budget, then re-evaluates the greedy path.
    pub fn run(mut self) -> Result<SearchResult> {
        while self.completed < self.cfg.iterations {
            self.iterate()?;
            self.maybe_commit();
        }
        self.finish()
    }

    fn finish(mut self) -> Result<SearchResult> {
        let path = self.greedy_path();
        let mut best_path = Vec::with_capacity(path.len());
        for &k in &path {
            let circuit = self.nodes[k].circuit.clone();
            let cost = self.ev.cost(&circuit)?;
            self.evals.path_reevaluation += 1;
            best_path.push(PathStep { circuit, cost });
        }
        let mut best_index = 0;
        for (i, step) in best_path.iter().enumerate() {
            if step.cost < best_path[best_index].cost {
                best_index = i;
            }
        }
        let parents: Vec<usize> = self.nodes.iter().map(|n| n.children.len()).filter(|&k| k > 0).collect();
        let mean_branching =
            if parents.is_empty() { 0.0 } else { parents.iter().sum::<usize>() as f64 / parents.len() as f64 };
        Ok(SearchResult {
            best_circuit: best_path[best_index].circuit.clone(),
            best_cost: best_path[best_index].cost,
            best_index,
            best_path,
            committed: self.committed,
            eval_count: self.evals.total(),
            evals: self.evals,
            iteration_log: self.log,
            failed_iterations: self.failed,
            tree_size: self.nodes.len(),
            root_children: self.nodes[0].children.len(),
            mean_branching,
            warmed_at: self.warmed_at,
        })
    }
}

/// Full search from the all-Hadamard root under the configured noise.
pub fn search(problem: &dyn Problem, cfg: &SearchConfig) -> Result<SearchResult> {
    let ev = Evaluator::new(problem, cfg.noise)?;
    search_with(&ev, cfg, Circuit::root(problem.qubit_count())?)
}

/// Full search from `root` with a caller-owned evaluator.
pub fn search_with(ev: &Evaluator<'_>, cfg: &SearchConfig, root: Circuit) -> Result<SearchResult> {
    Search::new(ev, cfg, root)?.run()
}
