//! Evaluation games against the exact minimax opponent.
//!
//! The searcher plays X (MAX). On each of its turns the game so far is
//! replayed through the searcher's explored graph from the root; if the
//! current position is an explored node with children, the searcher's
//! recommendation is played, otherwise a uniformly random legal move. O
//! always plays the lowest-index optimal move.

use rand::seq::IndexedRandom;
use rand::RngCore;

use crate::dag::NodeId;
use crate::domains::tictactoe::{MinimaxOracle, TttState, X};
use crate::engine::Searcher;
use crate::error::DomainError;

/// Chooses X's moves.
pub trait MovePolicy {
    /// A legal cell for `state`, given the moves played since the empty board.
    fn choose(&self, state: &TttState, history: &[usize], rng: &mut dyn RngCore) -> Result<usize, DomainError>;
}

/// Follows a search snapshot's recommendations while on its graph.
pub struct SearchPolicy<'a, S: ?Sized>(pub &'a S);

impl<S: Searcher<TttState> + ?Sized> SearchPolicy<'_, S> {
    fn locate(&self, history: &[usize]) -> Option<NodeId> {
        let dag = self.0.dag();
        let mut node = dag.root();
        let mut state = dag.node(node).state;
        for &cell in history {
            state = state.play(cell);
            node = *dag.node(node).children.iter().find(|&&c| dag.node(c).state == state)?;
        }
        Some(node)
    }
}

impl<S: Searcher<TttState> + ?Sized> MovePolicy for SearchPolicy<'_, S> {
    fn choose(&self, state: &TttState, history: &[usize], rng: &mut dyn RngCore) -> Result<usize, DomainError> {
        if let Some(child) = self.locate(history).and_then(|n| self.0.recommend(n)) {
            let next = self.0.dag().node(child).state;
            if let Some(cell) = (0..9).find(|&c| state.cells[c] != next.cells[c]) {
                return Ok(cell);
            }
        }
        RandomPolicy.choose(state, history, rng)
    }
}

/// Uniformly random legal moves.
pub struct RandomPolicy;

impl MovePolicy for RandomPolicy {
    fn choose(&self, state: &TttState, _history: &[usize], rng: &mut dyn RngCore) -> Result<usize, DomainError> {
        let mut rng = rng;
        state
            .legal_moves()
            .choose(&mut rng)
            .copied()
            .ok_or_else(|| DomainError::Invalid("no legal move in a finished game".into()))
    }
}

/// Perfect play (lowest-index optimal move).
pub struct OraclePolicy<'a>(pub &'a MinimaxOracle);

impl MovePolicy for OraclePolicy<'_> {
    fn choose(&self, state: &TttState, _history: &[usize], _rng: &mut dyn RngCore) -> Result<usize, DomainError> {
        self.0.best_move(state)?.ok_or_else(|| DomainError::Invalid("no legal move in a finished game".into()))
    }
}

/// Plays one game from the empty board; returns X's outcome.
pub fn play_game(max_player: &dyn MovePolicy, oracle: &MinimaxOracle, rng: &mut dyn RngCore) -> Result<i8, DomainError> {
    let mut state = TttState::empty();
    let mut history = Vec::with_capacity(9);
    loop {
        if let Some(outcome) = state.outcome() {
            return Ok(outcome);
        }
        let cell = if state.to_move() == X {
            max_player.choose(&state, &history, rng)?
        } else {
            OraclePolicy(oracle).choose(&state, &history, rng)?
        };
        if state.cells.get(cell) != Some(&0) {
            return Err(DomainError::Invalid(format!("illegal move {cell} in {:?}", state.cells)));
        }
        state = state.play(cell);
        history.push(cell);
    }
}

/// Mean outcome for X over `games` games.
pub fn evaluate_adversarial(
    max_player: &dyn MovePolicy,
    oracle: &MinimaxOracle,
    games: usize,
    rng: &mut dyn RngCore,
) -> Result<f64, DomainError> {
    if games == 0 {
        return Ok(0.0);
    }
    let mut total = 0i64;
    for _ in 0..games {
        total += play_game(max_player, oracle, rng)? as i64;
    }
    Ok(total as f64 / games as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::tictactoe::TicTacToe;
    use crate::engine::{phase_rng, ProbSearch, SearchConfig, STREAM_EVAL};

    #[test]
    fn perfect_play_draws() {
        let oracle = MinimaxOracle::new();
        let mut rng = phase_rng(0, STREAM_EVAL);
        assert_eq!(evaluate_adversarial(&OraclePolicy(&oracle), &oracle, 20, &mut rng).unwrap(), 0.0);
    }

    #[test]
    fn random_play_loses_on_average() {
        let oracle = MinimaxOracle::new();
        let mut rng = phase_rng(1, STREAM_EVAL);
        let mean = evaluate_adversarial(&RandomPolicy, &oracle, 1000, &mut rng).unwrap();
        assert!(mean < -0.5, "{mean}");
    }

    #[test]
    fn evaluation_leaves_the_search_untouched() {
        let game = TicTacToe::new();
        let mut search = ProbSearch::new(&game, SearchConfig { budget: 30, c: 0.5, lambda: 0.1, ..Default::default() }).unwrap();
        for _ in 0..30 {
            search.step().unwrap();
        }
        let before = (search.dag().len(), search.values().to_vec());
        let oracle = MinimaxOracle::new();
        let mut rng = phase_rng(0, STREAM_EVAL);
        let r = evaluate_adversarial(&SearchPolicy(&search), &oracle, 10, &mut rng).unwrap();
        assert!((-1.0..=0.0).contains(&r));
        assert_eq!(before, (search.dag().len(), search.values().to_vec()));
    }
}
