//! Tic-Tac-Toe. X is the searching MAX player and moves first; levels
//! alternate MAX (X to move) and MIN (O to move).

use std::collections::HashMap;

use super::Domain;
use crate::dag::{NodeKind, StateKey};
use crate::error::DomainError;
use crate::posterior::Kernel;

pub const EMPTY: u8 = 0;
pub const X: u8 = 1;
pub const O: u8 = 2;

const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TttState {
    pub cells: [u8; 9],
}

impl TttState {
    pub fn empty() -> Self {
        Self { cells: [EMPTY; 9] }
    }

    /// Parses nine characters from `X`, `O` and `.`/`-`/`_`.
    pub fn parse(s: &str) -> Option<Self> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        if chars.len() != 9 {
            return None;
        }
        let mut cells = [EMPTY; 9];
        for (i, c) in chars.iter().enumerate() {
            cells[i] = match c {
                'X' | 'x' => X,
                'O' | 'o' => O,
                '.' | '-' | '_' => EMPTY,
                _ => return None,
            };
        }
        Some(Self { cells })
    }

    pub fn count(&self, mark: u8) -> usize {
        self.cells.iter().filter(|&&c| c == mark).count()
    }

    pub fn moves_made(&self) -> usize {
        9 - self.count(EMPTY)
    }

    pub fn to_move(&self) -> u8 {
        if self.count(X) == self.count(O) {
            X
        } else {
            O
        }
    }

    pub fn winner(&self) -> Option<u8> {
        LINES.iter().find_map(|l| {
            let c = self.cells[l[0]];
            (c != EMPTY && c == self.cells[l[1]] && c == self.cells[l[2]]).then_some(c)
        })
    }

    pub fn is_over(&self) -> bool {
        self.winner().is_some() || self.count(EMPTY) == 0
    }

    /// Outcome from X's point of view; `None` while the game is running.
    pub fn outcome(&self) -> Option<i8> {
        match self.winner() {
            Some(X) => Some(1),
            Some(_) => Some(-1),
            None if self.count(EMPTY) == 0 => Some(0),
            None => None,
        }
    }

    pub fn legal_moves(&self) -> Vec<usize> {
        if self.is_over() {
            return Vec::new();
        }
        (0..9).filter(|&i| self.cells[i] == EMPTY).collect()
    }

    pub fn play(&self, cell: usize) -> Self {
        debug_assert_eq!(self.cells[cell], EMPTY);
        let mut next = *self;
        next.cells[cell] = self.to_move();
        next
    }

    /// Mark counts are consistent and at most one side has won (and, if so,
    /// the winner made the last move).
    pub fn is_legal(&self) -> bool {
        let (x, o) = (self.count(X), self.count(O));
        if !(x == o || x == o + 1) {
            return false;
        }
        let wins = |m: u8| LINES.iter().any(|l| l.iter().all(|&i| self.cells[i] == m));
        match (wins(X), wins(O)) {
            (true, true) => false,
            (true, false) => x == o + 1,
            (false, true) => x == o,
            (false, false) => true,
        }
    }

    fn to_index(&self) -> u32 {
        self.cells.iter().fold(0u32, |acc, &c| acc * 3 + c as u32)
    }
}

/// Shared `(cell, mark)` pairs, scaled by `1 / (cells + 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TttKernel;

impl Kernel<TttState> for TttKernel {
    fn cov(&self, a: &TttState, b: &TttState) -> f64 {
        let shared = a
            .cells
            .iter()
            .zip(b.cells.iter())
            .filter(|(x, y)| **x != EMPTY && x == y)
            .count();
        shared as f64 / 10.0
    }

    fn level_increment(&self) -> f64 {
        0.1
    }
}

#[derive(Debug, Clone, Default)]
pub struct TicTacToe {
    kernel: TttKernel,
}

impl TicTacToe {
    pub fn new() -> Self {
        Self { kernel: TttKernel }
    }
}

impl Domain for TicTacToe {
    type State = TttState;

    fn name(&self) -> &str {
        "tictactoe"
    }

    fn root(&self) -> TttState {
        TttState::empty()
    }

    fn successors(&self, state: &TttState) -> Vec<TttState> {
        state.legal_moves().into_iter().map(|c| state.play(c)).collect()
    }

    fn is_terminal(&self, state: &TttState) -> bool {
        state.is_over()
    }

    fn reward(&self, state: &TttState) -> Result<f64, DomainError> {
        state
            .outcome()
            .map(f64::from)
            .ok_or_else(|| DomainError::NotTerminal(format!("{:?}", state.cells)))
    }

    fn key(&self, state: &TttState) -> StateKey {
        StateKey::new(state.cells.to_vec())
    }

    fn node_kind(&self, level: usize) -> NodeKind {
        if level % 2 == 0 {
            NodeKind::Max
        } else {
            NodeKind::Min
        }
    }

    fn max_depth(&self) -> usize {
        9
    }

    fn branching(&self, level: usize) -> usize {
        9 - level
    }

    fn kernel(&self) -> &dyn Kernel<TttState> {
        &self.kernel
    }

    fn random_successor(&self, state: &TttState, rng: &mut dyn rand::RngCore) -> Option<TttState> {
        use rand::Rng;
        let moves = state.legal_moves();
        if moves.is_empty() {
            return None;
        }
        Some(state.play(moves[rng.random_range(0..moves.len())]))
    }
}

/// Exact game values for every reachable position, solved once by
/// memoized minimax from the empty board.
#[derive(Debug, Clone)]
pub struct MinimaxOracle {
    // value for the side to move
    values: HashMap<u32, i8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimaxAnswer {
    /// Game value for the side to move.
    pub value: i8,
    /// Every move achieving `value`, ascending.
    pub optimal_moves: Vec<usize>,
}

impl Default for MinimaxOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl MinimaxOracle {
    pub fn new() -> Self {
        let mut values = HashMap::new();
        Self::solve(&TttState::empty(), &mut values);
        Self { values }
    }

    fn solve(state: &TttState, memo: &mut HashMap<u32, i8>) -> i8 {
        let idx = state.to_index();
        if let Some(&v) = memo.get(&idx) {
            return v;
        }
        let v = match state.outcome() {
            // the side to move has just been beaten (or drew)
            Some(o) => {
                if o == 0 {
                    0
                } else {
                    -1
                }
            }
            None => state
                .legal_moves()
                .into_iter()
                .map(|c| -Self::solve(&state.play(c), memo))
                .max()
                .unwrap_or(0),
        };
        memo.insert(idx, v);
        v
    }

    pub fn positions(&self) -> usize {
        self.values.len()
    }

    /// Value for the side to move and all value-achieving moves.
    pub fn query(&self, state: &TttState) -> Result<MinimaxAnswer, DomainError> {
        if !state.is_legal() {
            return Err(DomainError::Invalid(format!("illegal position {:?}", state.cells)));
        }
        let value = self.value(state);
        let optimal_moves = state
            .legal_moves()
            .into_iter()
            .filter(|&c| -self.value(&state.play(c)) == value)
            .collect();
        Ok(MinimaxAnswer { value, optimal_moves })
    }

    fn value(&self, state: &TttState) -> i8 {
        match self.values.get(&state.to_index()) {
            Some(&v) => v,
            None => {
                // legal but unreachable from the empty board only if the game
                // ended earlier; solve locally
                let mut memo = HashMap::new();
                Self::solve(state, &mut memo)
            }
        }
    }

    /// Value from X's point of view.
    pub fn value_for_x(&self, state: &TttState) -> Result<i8, DomainError> {
        let v = self.query(state)?.value;
        Ok(if state.to_move() == X { v } else { -v })
    }

    /// The deterministic optimal reply: lowest cell index among optimal moves.
    pub fn best_move(&self, state: &TttState) -> Result<Option<usize>, DomainError> {
        Ok(self.query(state)?.optimal_moves.first().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_board_is_a_draw() {
        let oracle = MinimaxOracle::new();
        assert_eq!(oracle.query(&TttState::empty()).unwrap().value, 0);
        assert_eq!(oracle.positions(), 5478);
    }

    #[test]
    fn immediate_win_is_found() {
        let oracle = MinimaxOracle::new();
        let s = TttState::parse("XX. OO. ...").unwrap();
        let ans = oracle.query(&s).unwrap();
        assert_eq!(ans.value, 1);
        assert!(ans.optimal_moves.contains(&2));
    }

    #[test]
    fn forked_side_to_move_loses() {
        // X threatens 0-1-2 and 0-3-6; O cannot block both
        let oracle = MinimaxOracle::new();
        let s = TttState::parse("XX. XO. ..O").unwrap();
        assert_eq!(s.to_move(), O);
        assert_eq!(oracle.query(&s).unwrap().value, -1);
        assert_eq!(oracle.value_for_x(&s).unwrap(), 1);
    }

    #[test]
    fn illegal_positions_are_rejected() {
        let oracle = MinimaxOracle::new();
        assert!(oracle.query(&TttState::parse("XXX XXX ...").unwrap()).is_err());
        assert!(oracle.query(&TttState::parse("XXX OOO ...").unwrap()).is_err());
    }

    #[test]
    fn rewards_and_kernel() {
        let t = TicTacToe::new();
        assert_eq!(t.reward(&TttState::parse("XXX OO. ...").unwrap()).unwrap(), 1.0);
        assert_eq!(t.reward(&TttState::parse("OOO XX. X..").unwrap()).unwrap(), -1.0);
        assert_eq!(t.reward(&TttState::parse("XOX XOO OXX").unwrap()).unwrap(), 0.0);
        assert!(t.reward(&TttState::empty()).is_err());

        let a = TttState::parse("X.. .O. ...").unwrap();
        let b = TttState::parse("X.. ... .O.").unwrap();
        assert_eq!(TttKernel.cov(&a, &b), 0.1);
        assert_eq!(TttKernel.cov(&a, &a), 0.2);
    }
}
