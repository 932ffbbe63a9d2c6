//! Small hand-built profiles used throughout the tests and in the CLI docs.

use crate::instance::Instance;

/// n=10, m=4, k=2. Voters 0-4 approve c0, voters 5-9 approve c1, and the two
/// middle voters 4 and 5 also approve c2 and c3.
pub fn bridged_pair() -> Instance {
    let ballots = (0..10)
        .map(|v| match v {
            4 => vec![0, 2, 3],
            5 => vec![1, 2, 3],
            v if v < 5 => vec![0],
            _ => vec![1],
        })
        .collect();
    Instance::new(4, 2, ballots).expect("valid fixture")
}

/// n=12, m=7, k=3. Four voters approve {c0,c1,c2}, three approve c3, one c4,
/// three c5 and one c6.
pub fn three_blocks() -> Instance {
    let mut ballots = vec![vec![0, 1, 2]; 4];
    ballots.extend(vec![vec![3]; 3]);
    ballots.push(vec![4]);
    ballots.extend(vec![vec![5]; 3]);
    ballots.push(vec![6]);
    Instance::new(7, 3, ballots).expect("valid fixture")
}

/// `k·y` voters approve `c0..c(k-1)` and `y` voters approve `ck`. Every
/// committee has EJR value `k/(k+1)` while JR can be met exactly.
pub fn jr_ejr_gap(k: usize, y: usize) -> Instance {
    let mut ballots = vec![(0..k).collect::<Vec<_>>(); k * y];
    ballots.extend(vec![vec![k]; y]);
    Instance::new(k + 1, k, ballots).expect("valid fixture")
}

/// Builds the block grid with blocks of `width` voters: candidates
/// `0..=k` each cover one block, candidates `k+1..2k` pick the voters at
/// offset `1..=k` (1-based) within every block.
fn block_grid_with_width(k: usize, width: usize) -> Instance {
    let n = (k + 1) * width;
    let ballots = (0..n)
        .map(|v| {
            let mut ballot = vec![v / width];
            let offset = (v + 1) % width;
            if (1..=k).contains(&offset) {
                ballot.push(k + offset);
            }
            ballot
        })
        .collect();
    Instance::new(2 * k + 1, k, ballots).expect("valid fixture")
}

/// `(k+1)²` voters in `k+1` blocks. The block candidates `b0..bk` are
/// indices `0..=k`; the cross candidates `d1..dk` are `k+1..=2k`. Every
/// candidate has `k+1` supporters, so greedy rules may fill the committee
/// with block candidates.
pub fn block_grid(k: usize) -> Instance {
    block_grid_with_width(k, k + 1)
}

/// Variant of [`block_grid`] with blocks of `k+2` voters, so block
/// candidates strictly dominate and no tie-breaking is involved.
pub fn block_grid_tie_free(k: usize) -> Instance {
    block_grid_with_width(k, k + 2)
}

/// n=6, k=2, voter-interval: c0 spans voters 0-2, c1 spans 2-4, c2 spans 4-5.
pub fn voter_interval_chain() -> Instance {
    let ballots = vec![vec![0], vec![0], vec![0, 1], vec![1], vec![1, 2], vec![2]];
    Instance::new(3, 2, ballots).expect("valid fixture")
}

/// n=5, k=1, candidate-interval: ballots {c0,c1} twice, {c1,c2} twice, {c2}.
pub fn candidate_interval_chain() -> Instance {
    let ballots = vec![vec![0, 1], vec![0, 1], vec![1, 2], vec![1, 2], vec![2]];
    Instance::new(3, 1, ballots).expect("valid fixture")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_grid_supports() {
        let inst = block_grid(2);
        assert_eq!((inst.n(), inst.m(), inst.k()), (9, 5, 2));
        assert_eq!(inst.supporters(0).to_vec(), vec![0, 1, 2]);
        assert_eq!(inst.supporters(2).to_vec(), vec![6, 7, 8]);
        // d1: 1-based voters 1, 4, 7
        assert_eq!(inst.supporters(3).to_vec(), vec![0, 3, 6]);
        assert_eq!(inst.supporters(4).to_vec(), vec![1, 4, 7]);
    }

    #[test]
    fn tie_free_grid_supports() {
        let inst = block_grid_tie_free(5);
        assert_eq!((inst.n(), inst.m(), inst.k()), (42, 11, 5));
        for b in 0..6 {
            assert_eq!(inst.supporters(b).len(), 7);
        }
        for d in 6..11 {
            assert_eq!(inst.supporters(d).len(), 6);
        }
    }

    #[test]
    fn gap_fixture_shape() {
        let inst = jr_ejr_gap(2, 2);
        assert_eq!(inst.ballots(), vec![vec![0, 1], vec![0, 1], vec![0, 1], vec![0, 1], vec![2], vec![2]]);
    }
}
