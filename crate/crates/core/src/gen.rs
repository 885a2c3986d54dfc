//! Random AST generation for round-trip and layout testing.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::ast::{Ast, AstNode};
use crate::cparser::kinds;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenConfig {
    /// Deepest level a tree may reach (root-only = 0).
    pub max_depth: usize,
    /// Most nodes on any level.
    pub max_width: usize,
    /// Distinct parameter strings drawn from; small pools repeat tokens.
    pub param_pool: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            max_depth: 12,
            max_width: 16,
            param_pool: 6,
        }
    }
}

const ODD_PARAMS: [&str; 6] = ["a\tb", "x\\y", "line\nbreak", "\u{1f}", "π", " "];

fn random_param<R: Rng + ?Sized>(rng: &mut R, pool: usize) -> String {
    if rng.random_bool(0.05) {
        return ODD_PARAMS.choose(rng).expect("non-empty").to_string();
    }
    format!("p{}", rng.random_range(0..pool.max(1)))
}

pub fn random_node_token<R: Rng + ?Sized>(rng: &mut R, config: &GenConfig) -> (String, Vec<String>) {
    let kind = if rng.random_bool(0.9) {
        kinds::ALL.choose(rng).expect("non-empty").to_string()
    } else {
        format!("Kind{}", rng.random_range(0..4))
    };
    let count = rng.random_range(0..=crate::ast::MAX_PARAMS);
    let params = (0..count).map(|_| random_param(rng, config.param_pool)).collect();
    (kind, params)
}

/// A tree whose depth and level widths respect `config`. Each level's
/// nodes are spread over random parents of the level above, so single
/// parents with many children occur alongside wide, shallow fan-outs.
pub fn random_ast<R: Rng + ?Sized>(rng: &mut R, config: &GenConfig) -> Ast {
    let depth = rng.random_range(0..=config.max_depth);
    // child_counts[level][i] = children of node i on that level
    let mut child_counts: Vec<Vec<usize>> = Vec::new();
    let mut width = 1;
    for _ in 0..depth {
        let next = rng.random_range(1..=config.max_width.max(1));
        let mut counts = vec![0; width];
        for _ in 0..next {
            counts[rng.random_range(0..width)] += 1;
        }
        child_counts.push(counts);
        width = next;
    }

    let mut below: Vec<AstNode> = Vec::new();
    for level in (0..=depth).rev() {
        let count = width_at(&child_counts, level);
        let mut nodes = Vec::with_capacity(count);
        let mut children = below.into_iter();
        for i in 0..count {
            let take = child_counts.get(level).map_or(0, |c| c[i]);
            let kids: Vec<AstNode> = children.by_ref().take(take).collect();
            let (kind, params) = random_node_token(rng, config);
            nodes.push(AstNode::new(kind, params, kids).expect("generated token is valid"));
        }
        below = nodes;
    }
    Ast::new(below.pop().expect("root"))
}

fn width_at(child_counts: &[Vec<usize>], level: usize) -> usize {
    if level == 0 {
        1
    } else {
        child_counts[level - 1].iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn respects_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let config = GenConfig::default();
        let mut deepest = 0;
        for _ in 0..300 {
            let ast = random_ast(&mut rng, &config);
            assert!(ast.depth() <= 12);
            assert!(ast.max_level_width() <= 16);
            deepest = deepest.max(ast.depth());
        }
        assert_eq!(deepest, 12);
    }

    #[test]
    fn deterministic_per_seed() {
        let config = GenConfig::default();
        let a = random_ast(&mut ChaCha8Rng::seed_from_u64(1), &config);
        let b = random_ast(&mut ChaCha8Rng::seed_from_u64(1), &config);
        assert_eq!(a, b);
    }
}
