//! Bounded-depth searches over the mutation tree: sign coherence, B-classes,
//! B-coherent relations, independence and positive decompositions.
//!
//! A verdict of [`VerdictStatus::HoldsToDepth`] only covers sequences of length
//! at most the recorded depth. Sequences never repeat an index twice in a row,
//! and are explored by length, then lexicographically in application order, so
//! witnesses are deterministic.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eta::{eta_step_unchecked, min_with_zero, ShearVector};
use crate::exchange::{ExchangeMatrix, MutationSequence};
use crate::linalg::{Matrix, NullspaceTracker};
use crate::par;
use crate::rational::{primitive_integer, sign, Rat};

/// Default search depth for a given rank.
pub fn default_depth(rank: usize) -> usize {
    if rank <= 3 {
        8
    } else {
        5
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector(pub Vec<i8>);

pub fn sign_vector(a: &ShearVector) -> SignVector {
    SignVector(a.as_slice().iter().map(sign).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    HoldsToDepth,
    Refuted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub seq: MutationSequence,
    pub coord: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepthVerdict {
    pub status: VerdictStatus,
    pub depth: usize,
    pub witness: Option<Witness>,
}

impl DepthVerdict {
    fn holds(depth: usize) -> Self {
        Self {
            status: VerdictStatus::HoldsToDepth,
            depth,
            witness: None,
        }
    }

    fn refuted(depth: usize, seq: MutationSequence, coord: usize) -> Self {
        Self {
            status: VerdictStatus::Refuted,
            depth,
            witness: Some(Witness { seq, coord }),
        }
    }

    pub fn holds_to_depth(&self) -> bool {
        self.status == VerdictStatus::HoldsToDepth
    }
}

/// A sequence after which two vectors have strictly opposite signs at `coord`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationCertificate {
    pub seq: MutationSequence,
    pub coord: usize,
    /// Signs of the first and second image at `coord`.
    pub signs: (i8, i8),
}

impl SeparationCertificate {
    /// Re-evaluates the maps along `seq` and confirms the opposite signs.
    pub fn replays(&self, b: &ExchangeMatrix, a: &ShearVector, c: &ShearVector) -> Result<bool> {
        let ia = crate::eta::eta(b, &self.seq, a)?;
        let ic = crate::eta::eta(b, &self.seq, c)?;
        let (sa, sc) = (sign(&ia[self.coord]), sign(&ic[self.coord]));
        Ok(sa * sc == -1 && (sa, sc) == self.signs)
    }
}

/// Weighted vectors `Σ c_i v_i`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct WeightedFamily {
    items: Vec<(ShearVector, Rat)>,
}

impl WeightedFamily {
    pub fn new(items: Vec<(ShearVector, Rat)>) -> Result<Self> {
        if let Some((first, _)) = items.first() {
            let n = first.dim();
            if let Some((v, _)) = items.iter().find(|(v, _)| v.dim() != n) {
                return Err(Error::Dimension {
                    expected: n,
                    got: v.dim(),
                });
            }
        }
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                if items[i].0 == items[j].0 {
                    return Err(Error::Contract(format!(
                        "family vectors {} and {} coincide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[(ShearVector, Rat)] {
        &self.items
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RingMode {
    Integer,
    Rational,
}

struct Node {
    parent: usize,
    step: usize,
    matrix: ExchangeMatrix,
}

/// All mutation sequences of length at most `depth` without immediate
/// repeats, in breadth-first, lexicographic order, with `μ_seq(B)` cached.
pub struct SequenceTree {
    depth: usize,
    nodes: Vec<Node>,
    level_starts: Vec<usize>,
}

impl SequenceTree {
    pub fn new(b: &ExchangeMatrix, depth: usize) -> Result<Self> {
        let n = b.rank();
        let mut nodes = vec![Node {
            parent: usize::MAX,
            step: usize::MAX,
            matrix: b.clone(),
        }];
        let mut level_starts = vec![0, 1];
        for _ in 0..depth {
            let (lo, hi) = (level_starts[level_starts.len() - 2], nodes.len());
            for p in lo..hi {
                for k in 0..n {
                    if nodes[p].step == k {
                        continue;
                    }
                    let matrix = nodes[p].matrix.mutate(k)?;
                    nodes.push(Node {
                        parent: p,
                        step: k,
                        matrix,
                    });
                }
            }
            level_starts.push(nodes.len());
        }
        Ok(Self {
            depth,
            nodes,
            level_starts,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.nodes[0].matrix.rank()
    }

    pub fn base(&self) -> &ExchangeMatrix {
        &self.nodes[0].matrix
    }

    pub fn sequence(&self, mut node: usize) -> MutationSequence {
        let mut steps = Vec::new();
        while node != 0 {
            steps.push(self.nodes[node].step);
            node = self.nodes[node].parent;
        }
        steps.reverse();
        MutationSequence::new(steps)
    }

    fn level(&self, d: usize) -> std::ops::Range<usize> {
        self.level_starts[d]..self.level_starts[d + 1]
    }

    fn child_image(&self, node: usize, parent_image: &[ShearVector]) -> Vec<ShearVector> {
        let nd = &self.nodes[node];
        let pm = &self.nodes[nd.parent].matrix;
        parent_image
            .iter()
            .map(|v| eta_step_unchecked(pm, nd.step, v))
            .collect()
    }

    /// Walks the tree level by level and returns the first node (in tree order)
    /// whose image set fails `check`, together with the reported coordinate.
    pub fn first_violation<F>(&self, vectors: &[ShearVector], check: F) -> Option<(usize, usize)>
    where
        F: Fn(&[ShearVector]) -> Option<usize> + Sync + Send,
    {
        if let Some(c) = check(vectors) {
            return Some((0, c));
        }
        let mut prev: Vec<Vec<ShearVector>> = vec![vectors.to_vec()];
        for d in 1..=self.depth {
            let range = self.level(d);
            let plo = self.level_starts[d - 1];
            let images: Vec<Vec<ShearVector>> = par::map_range(range.clone(), |node| {
                self.child_image(node, &prev[self.nodes[node].parent - plo])
            });
            if let Some((i, c)) = par::find_first(&images, |im| check(im)) {
                return Some((range.start + i, c));
            }
            prev = images;
        }
        None
    }

    /// Images of every vector at every node, indexed `[node][vector]`.
    pub fn all_images(&self, vectors: &[ShearVector]) -> Vec<Vec<ShearVector>> {
        let mut out: Vec<Vec<ShearVector>> = Vec::with_capacity(self.nodes.len());
        out.push(vectors.to_vec());
        for d in 1..=self.depth {
            let level: Vec<Vec<ShearVector>> = par::map_range(self.level(d), |node| {
                self.child_image(node, &out[self.nodes[node].parent])
            });
            out.extend(level);
        }
        out
    }

    /// Sign vectors of one vector at every node.
    pub fn sign_table(&self, v: &ShearVector) -> Vec<SignVector> {
        self.all_images(std::slice::from_ref(v))
            .into_iter()
            .map(|mut im| sign_vector(&im.pop().unwrap()))
            .collect()
    }
}

fn check_dims(b: &ExchangeMatrix, vs: &[&ShearVector]) -> Result<()> {
    match vs.iter().find(|v| v.dim() != b.rank()) {
        Some(v) => Err(Error::Dimension {
            expected: b.rank(),
            got: v.dim(),
        }),
        None => Ok(()),
    }
}

/// First coordinate where two members of `images` have strictly opposite signs.
fn incoherent_coord(images: &[ShearVector]) -> Option<usize> {
    let n = images.first()?.dim();
    (0..n).find(|&j| {
        let mut pos = false;
        let mut neg = false;
        for v in images {
            match sign(&v[j]) {
                1 => pos = true,
                -1 => neg = true,
                _ => {}
            }
        }
        pos && neg
    })
}

/// Whether the vectors stay sign-coherent under every sequence of length at most `depth`.
pub fn common_cone_up_to_depth(
    b: &ExchangeMatrix,
    vectors: &[ShearVector],
    depth: usize,
) -> Result<DepthVerdict> {
    check_dims(b, &vectors.iter().collect::<Vec<_>>())?;
    let tree = SequenceTree::new(b, depth)?;
    Ok(common_cone_in(&tree, vectors))
}

pub fn common_cone_in(tree: &SequenceTree, vectors: &[ShearVector]) -> DepthVerdict {
    match tree.first_violation(vectors, incoherent_coord) {
        Some((node, coord)) => DepthVerdict::refuted(tree.depth(), tree.sequence(node), coord),
        None => DepthVerdict::holds(tree.depth()),
    }
}

/// Shortest, lexicographically least sequence giving strictly opposite signs.
pub fn find_separating_sequence(
    b: &ExchangeMatrix,
    a: &ShearVector,
    c: &ShearVector,
    depth: usize,
) -> Result<Option<SeparationCertificate>> {
    check_dims(b, &[a, c])?;
    let tree = SequenceTree::new(b, depth)?;
    Ok(separating_in(&tree, a, c))
}

pub fn separating_in(
    tree: &SequenceTree,
    a: &ShearVector,
    c: &ShearVector,
) -> Option<SeparationCertificate> {
    let pair = [a.clone(), c.clone()];
    let hit = tree.first_violation(&pair, |im| {
        (0..im[0].dim()).find(|&j| sign(&im[0][j]) * sign(&im[1][j]) == -1)
    });
    hit.map(|(node, coord)| {
        let seq = tree.sequence(node);
        let ia = crate::eta::eta(tree.base(), &seq, a).expect("validated sequence");
        let ic = crate::eta::eta(tree.base(), &seq, c).expect("validated sequence");
        SeparationCertificate {
            seq,
            coord,
            signs: (sign(&ia[coord]), sign(&ic[coord])),
        }
    })
}

/// Whether `a` and `c` have equal sign vectors under every sequence up to `depth`.
pub fn b_equivalent_up_to_depth(
    b: &ExchangeMatrix,
    a: &ShearVector,
    c: &ShearVector,
    depth: usize,
) -> Result<DepthVerdict> {
    check_dims(b, &[a, c])?;
    let tree = SequenceTree::new(b, depth)?;
    let pair = [a.clone(), c.clone()];
    Ok(
        match tree.first_violation(&pair, |im| {
            (0..im[0].dim()).find(|&j| sign(&im[0][j]) != sign(&im[1][j]))
        }) {
            Some((node, coord)) => DepthVerdict::refuted(depth, tree.sequence(node), coord),
            None => DepthVerdict::holds(depth),
        },
    )
}

fn weighted_sum(images: &[ShearVector], coeffs: &[Rat], n: usize) -> Vec<Rat> {
    let mut acc = vec![Rat::zero(); n];
    for (v, c) in images.iter().zip(coeffs) {
        for j in 0..n {
            if !v[j].is_zero() {
                acc[j] += &v[j] * c;
            }
        }
    }
    acc
}

/// Checks the linear relation (and, when `B` has a zero row, the truncated
/// relation) at every sequence of length at most `depth`.
pub fn is_b_coherent_up_to_depth(
    b: &ExchangeMatrix,
    fam: &WeightedFamily,
    depth: usize,
) -> Result<DepthVerdict> {
    if fam.is_empty() {
        return Ok(DepthVerdict::holds(depth));
    }
    let vectors: Vec<ShearVector> = fam.items().iter().map(|(v, _)| v.clone()).collect();
    check_dims(b, &vectors.iter().collect::<Vec<_>>())?;
    let tree = SequenceTree::new(b, depth)?;
    Ok(coherent_in(&tree, fam))
}

pub fn coherent_in(tree: &SequenceTree, fam: &WeightedFamily) -> DepthVerdict {
    let depth = tree.depth();
    if fam.is_empty() {
        return DepthVerdict::holds(depth);
    }
    let vectors: Vec<ShearVector> = fam.items().iter().map(|(v, _)| v.clone()).collect();
    let coeffs: Vec<Rat> = fam.items().iter().map(|(_, c)| c.clone()).collect();
    let n = tree.rank();
    let piecewise = tree.base().has_zero_row();
    let hit = tree.first_violation(&vectors, |im| {
        let lin = weighted_sum(im, &coeffs, n);
        if let Some(j) = lin.iter().position(|x| !x.is_zero()) {
            return Some(j);
        }
        if piecewise {
            let mins: Vec<ShearVector> = im.iter().map(min_with_zero).collect();
            return weighted_sum(&mins, &coeffs, n).iter().position(|x| !x.is_zero());
        }
        None
    });
    match hit {
        Some((node, coord)) => DepthVerdict::refuted(depth, tree.sequence(node), coord),
        None => DepthVerdict::holds(depth),
    }
}

/// Result of the independence search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceReport {
    /// `HoldsToDepth` means no nonzero coefficient vector survives.
    pub status: VerdictStatus,
    pub depth: usize,
    /// Sequence at which the surviving relations were eliminated.
    pub killed_by: Option<MutationSequence>,
    /// A surviving relation, primitive integral in either mode.
    pub relation: Option<Vec<Rat>>,
}

impl IndependenceReport {
    pub fn independent(&self) -> bool {
        self.status == VerdictStatus::HoldsToDepth
    }
}

/// Intersects the coefficient nullspaces of the stacked images over all
/// sequences up to `depth`, stopping once it is trivial.
pub fn independent_up_to_depth(
    b: &ExchangeMatrix,
    vectors: &[ShearVector],
    depth: usize,
    _mode: RingMode,
) -> Result<IndependenceReport> {
    check_dims(b, &vectors.iter().collect::<Vec<_>>())?;
    let m = vectors.len();
    let n = b.rank();
    if m == 0 {
        return Ok(IndependenceReport {
            status: VerdictStatus::HoldsToDepth,
            depth,
            killed_by: Some(MutationSequence::empty()),
            relation: None,
        });
    }
    let tree = SequenceTree::new(b, depth)?;
    let piecewise = b.has_zero_row();
    let mut tracker = NullspaceTracker::full(m);
    let stack = |im: &[ShearVector]| -> Matrix {
        let mut rows: Vec<Vec<Rat>> = (0..n)
            .map(|j| im.iter().map(|v| v[j].clone()).collect())
            .collect();
        if piecewise {
            let mins: Vec<ShearVector> = im.iter().map(min_with_zero).collect();
            rows.extend((0..n).map(|j| mins.iter().map(|v| v[j].clone()).collect::<Vec<_>>()));
        }
        Matrix::from_rows(&rows)
    };
    // intersections run in tree order so the kill point is deterministic
    let mut killed = None;
    let images = tree.all_images(vectors);
    for (node, im) in images.iter().enumerate() {
        tracker.intersect(&stack(im));
        if tracker.is_trivial() {
            killed = Some(tree.sequence(node));
            break;
        }
    }
    Ok(match killed {
        Some(seq) => IndependenceReport {
            status: VerdictStatus::HoldsToDepth,
            depth,
            killed_by: Some(seq),
            relation: None,
        },
        None => {
            let rel = primitive_integer(&tracker.basis()[0])
                .into_iter()
                .map(Rat::from_integer)
                .collect();
            IndependenceReport {
                status: VerdictStatus::Refuted,
                depth,
                killed_by: None,
                relation: Some(rel),
            }
        }
    })
}

/// A nonnegative combination `target = Σ coeffs[i] * candidates[support[i]]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Decomposition {
    pub support: Vec<usize>,
    pub coeffs: Vec<Rat>,
}

/// Precomputed candidate images and pairwise compatibility for repeated
/// decompositions against one candidate set.
pub struct ConeDecomposer {
    tree: SequenceTree,
    candidates: Vec<ShearVector>,
    signs: Vec<Vec<SignVector>>,
    compatible: Vec<Vec<bool>>,
}

fn coherent_signs(a: &[SignVector], b: &[SignVector]) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| x.0.iter().zip(&y.0).all(|(s, t)| s * t != -1))
}

impl ConeDecomposer {
    pub fn new(b: &ExchangeMatrix, candidates: Vec<ShearVector>, depth: usize) -> Result<Self> {
        check_dims(b, &candidates.iter().collect::<Vec<_>>())?;
        let tree = SequenceTree::new(b, depth)?;
        let images = tree.all_images(&candidates);
        let signs: Vec<Vec<SignVector>> = (0..candidates.len())
            .map(|i| images.iter().map(|im| sign_vector(&im[i])).collect())
            .collect();
        let m = candidates.len();
        let rows = par::map_range(0..m, |i| {
            (0..m)
                .map(|j| i == j || coherent_signs(&signs[i], &signs[j]))
                .collect::<Vec<bool>>()
        });
        Ok(Self {
            tree,
            candidates,
            signs,
            compatible: rows,
        })
    }

    pub fn candidates(&self) -> &[ShearVector] {
        &self.candidates
    }

    /// Pairwise compatibility (no separating sequence up to the depth).
    pub fn compatible(&self, i: usize, j: usize) -> bool {
        self.compatible[i][j]
    }

    pub fn compatibility_matrix(&self) -> &[Vec<bool>] {
        &self.compatible
    }

    pub fn depth(&self) -> usize {
        self.tree.depth()
    }

    /// Every distinct nonnegative decomposition of `target` over a pairwise
    /// compatible, linearly independent subset of the candidates that are
    /// themselves compatible with `target`.
    pub fn decompositions(&self, target: &ShearVector, mode: RingMode) -> Result<Vec<Decomposition>> {
        if target.dim() != self.tree.rank() {
            return Err(Error::Dimension {
                expected: self.tree.rank(),
                got: target.dim(),
            });
        }
        if target.is_zero() {
            return Ok(vec![Decomposition {
                support: vec![],
                coeffs: vec![],
            }]);
        }
        let tsigns = self.tree.sign_table(target);
        let near: Vec<usize> = (0..self.candidates.len())
            .filter(|&i| coherent_signs(&tsigns, &self.signs[i]))
            .collect();
        let n = self.tree.rank();
        let mut found: BTreeMap<Vec<usize>, Vec<Rat>> = BTreeMap::new();
        let mut clique = Vec::new();
        self.extend_cliques(&near, 0, &mut clique, n, &mut |cl| {
            let cols: Vec<&[Rat]> = cl.iter().map(|&i| self.candidates[i].as_slice()).collect();
            let a = Matrix::from_columns(&cols, n);
            let Some(x) = a.solve_unique(target.as_slice()) else {
                return;
            };
            if x.iter().any(|c| c.is_negative()) {
                return;
            }
            if mode == RingMode::Integer && x.iter().any(|c| !c.is_integer()) {
                return;
            }
            let (support, coeffs): (Vec<usize>, Vec<Rat>) = cl
                .iter()
                .zip(x)
                .filter(|(_, c)| !c.is_zero())
                .map(|(&i, c)| (i, c))
                .unzip();
            found.entry(support).or_insert(coeffs);
        });
        Ok(found
            .into_iter()
            .map(|(support, coeffs)| Decomposition { support, coeffs })
            .collect())
    }

    fn extend_cliques(
        &self,
        pool: &[usize],
        start: usize,
        clique: &mut Vec<usize>,
        max: usize,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        for p in start..pool.len() {
            let c = pool[p];
            if clique.iter().all(|&q| self.compatible[q][c]) {
                clique.push(c);
                visit(clique);
                if clique.len() < max {
                    self.extend_cliques(pool, p + 1, clique, max, visit);
                }
                clique.pop();
            }
        }
    }
}

/// First decomposition of `target` (smallest support, lexicographically).
pub fn decompose_in_cone(
    b: &ExchangeMatrix,
    target: &ShearVector,
    candidates: &[ShearVector],
    depth: usize,
    mode: RingMode,
) -> Result<Option<Decomposition>> {
    let dec = ConeDecomposer::new(b, candidates.to_vec(), depth)?;
    Ok(dec.decompositions(target, mode)?.into_iter().next())
}
